//! Similarity estimation between multisets through counting Bloom filters
//! and count-min sketches.
//!
//! Two peers that agree on sketch dimensions and a hash seed can each encode
//! their profile (a multiset such as song → play count) into a fixed-size
//! sketch, exchange it once, and estimate the Dice coefficient or cosine
//! similarity of the underlying multisets without revealing them.
//!
//! Modules:
//!
//! * [`oracle`]: exact multisets and ground-truth Dice / cosine scores.
//! * [`hashing`]: the seeded double-hashing family shared by every sketch.
//! * [`sketches`]: Bloom filter, counting Bloom filter and count-min sketch.
//! * [`metrics`]: sketch-level Dice and cosine estimators.
//! * [`datasets`]: synthetic corpus generation and listening-history ingestion.
//! * [`experiments`]: pairwise runs, RMSE grids and threshold reports.
//! * [`wire`]: versioned binary envelope for exchanging a sketch.
//!
//! Scores are generic over [`Scalar`]. Use [`Score`] (`f64`) for everyday
//! work and [`ExactScore`] (arbitrary-precision rational) where Dice values
//! must be compared without rounding.
//!
//! ```
//! use multisketch::{metrics, oracle::Multiset, sketches::{FilterParams, CountingBloomFilter}};
//!
//! let x: Multiset = [("a", 2), ("b", 1)].into_iter().collect();
//! let y: Multiset = [("a", 1), ("c", 1)].into_iter().collect();
//! let params = FilterParams::new(128, 1, 0).unwrap();
//! let p = CountingBloomFilter::from_multiset(&x, params);
//! let q = CountingBloomFilter::from_multiset(&y, params);
//! let estimate: f64 = metrics::cbf_dice(&p, &q).unwrap();
//! let truth: f64 = x.dice(&y).unwrap();
//! assert!(estimate >= truth);
//! ```

pub mod datasets;
pub mod error;
pub mod experiments;
pub mod hashing;
pub mod metrics;
pub mod oracle;
pub mod scalar;
pub mod sketches;
pub mod wire;

pub use error::{Error, Result};
pub use scalar::{RealScalar, Scalar};

/// Default floating-point score type.
pub type Score = f64;

/// Exact rational score, for Dice values compared without rounding.
pub type ExactScore = num_rational::BigRational;

/// Pairwise comparison record at the default score precision.
pub type Comparison = experiments::ComparisonResult<Score>;

/// Counting Bloom filter with the crate's 32-bit saturating counters.
pub type Cbf = sketches::CountingBloomFilter;

/// Count-min sketch with the crate's 32-bit saturating counters.
pub type Cms = sketches::CountMinSketch;
