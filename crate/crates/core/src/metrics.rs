//! Similarity of two sketches, approximating the similarity of the
//! multisets they encode.
//!
//! Dice over counter vectors `p`, `q`:
//!
//! ```text
//! dice(p, q) = 2 · Σ min(p_i, q_i) / Σ (p_i + q_i)
//! ```
//!
//! Count-min variants average the per-row value over the `d` rows. Because
//! every element instance adds the same total to both numerator-side minima
//! and the denominator, the sketch Dice of two encoded multisets is never
//! below their exact Dice (absent saturation).
//!
//! Sums are accumulated in integers; a score costs one final division per row.

use std::fmt;

use crate::scalar::{cosine_ratio, RealScalar, Scalar};
use crate::sketches::{AnySketch, CountMinSketch, CountingBloomFilter, Descriptor, Sketch};
use crate::{Error, Result};

/// Proof that two sketches share kind, dimensions, hash family and counter
/// width. Only [`check_compatible`] creates one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompatibilityWitness {
    descriptor: Descriptor,
}

impl CompatibilityWitness {
    pub fn descriptor(&self) -> &Descriptor {
        &self.descriptor
    }
}

/// The descriptor fields on which two sketches disagree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub fields: Vec<&'static str>,
    pub left: Descriptor,
    pub right: Descriptor,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "differing fields: {}", self.fields.join(", "))
    }
}

impl std::error::Error for Mismatch {}

pub fn check_compatible(a: &Descriptor, b: &Descriptor) -> Result<CompatibilityWitness, Mismatch> {
    let mut fields = Vec::new();
    if a.kind != b.kind {
        fields.push("kind");
    }
    if a.width != b.width {
        fields.push("width");
    }
    if a.depth != b.depth {
        fields.push("depth");
    }
    if a.hashes != b.hashes {
        fields.push("hashes");
    }
    if a.seed != b.seed {
        fields.push("seed");
    }
    if a.counter_width != b.counter_width {
        fields.push("counter_width");
    }
    if fields.is_empty() {
        Ok(CompatibilityWitness { descriptor: *a })
    } else {
        Err(Mismatch {
            fields,
            left: *a,
            right: *b,
        })
    }
}

fn witness(a: &impl Sketch, b: &impl Sketch) -> Result<CompatibilityWitness> {
    check_compatible(&a.descriptor(), &b.descriptor()).map_err(Error::Incompatible)
}

/// Dice over two equal-length counter vectors.
pub fn vector_dice<S: Scalar>(p: &[u32], q: &[u32]) -> Result<S> {
    debug_assert_eq!(p.len(), q.len());
    let (mut shared, mut total) = (0u128, 0u128);
    for (&a, &b) in p.iter().zip(q) {
        shared += a.min(b) as u128;
        total += a as u128 + b as u128;
    }
    if total == 0 {
        return Err(Error::UndefinedSimilarity("both counter vectors are zero"));
    }
    Ok(S::from_ratio(2 * shared, total))
}

/// Cosine over two equal-length counter vectors.
pub fn vector_cosine<S: RealScalar>(p: &[u32], q: &[u32]) -> Result<S> {
    debug_assert_eq!(p.len(), q.len());
    let (mut dot, mut pp, mut qq) = (0u128, 0u128, 0u128);
    for (&a, &b) in p.iter().zip(q) {
        let (a, b) = (a as u128, b as u128);
        dot += a * b;
        pp += a * a;
        qq += b * b;
    }
    if pp == 0 || qq == 0 {
        return Err(Error::UndefinedSimilarity("zero counter vector"));
    }
    Ok(cosine_ratio(dot, pp, qq))
}

pub fn cbf_dice<S: Scalar>(p: &CountingBloomFilter, q: &CountingBloomFilter) -> Result<S> {
    witness(p, q)?;
    vector_dice(p.counters(), q.counters())
}

pub fn cbf_cosine<S: RealScalar>(p: &CountingBloomFilter, q: &CountingBloomFilter) -> Result<S> {
    witness(p, q)?;
    vector_cosine(p.counters(), q.counters())
}

/// Mean of the per-row Dice values. Any row with a zero denominator is an
/// error; rows are never skipped.
pub fn cms_dice<S: Scalar>(r: &CountMinSketch, s: &CountMinSketch) -> Result<S> {
    witness(r, s)?;
    let rows = r
        .rows()
        .zip(s.rows())
        .map(|(a, b)| vector_dice(a, b))
        .collect::<Result<Vec<S>>>()?;
    Ok(S::mean(&rows))
}

/// Mean of the per-row cosine similarities.
pub fn cms_cosine<S: RealScalar>(r: &CountMinSketch, s: &CountMinSketch) -> Result<S> {
    witness(r, s)?;
    let rows = r
        .rows()
        .zip(s.rows())
        .map(|(a, b)| vector_cosine(a, b))
        .collect::<Result<Vec<S>>>()?;
    Ok(S::mean(&rows))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Metric {
    #[default]
    Dice,
    Cosine,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Dice => "dice",
            Metric::Cosine => "cosine",
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dice" => Ok(Metric::Dice),
            "cosine" | "cos" => Ok(Metric::Cosine),
            other => Err(Error::InvalidParams(format!("unknown metric `{other}`"))),
        }
    }
}

/// Evaluates `metric` on two decoded sketches of matching kind.
pub fn estimate<S: RealScalar>(metric: Metric, a: &AnySketch, b: &AnySketch) -> Result<S> {
    witness(a, b)?;
    match (a, b, metric) {
        (AnySketch::Counting(p), AnySketch::Counting(q), Metric::Dice) => cbf_dice(p, q),
        (AnySketch::Counting(p), AnySketch::Counting(q), Metric::Cosine) => cbf_cosine(p, q),
        (AnySketch::CountMin(r), AnySketch::CountMin(s), Metric::Dice) => cms_dice(r, s),
        (AnySketch::CountMin(r), AnySketch::CountMin(s), Metric::Cosine) => cms_cosine(r, s),
        _ => Err(Error::InvalidParams(
            "plain Bloom filters carry no counts; similarity needs a CBF or CMS".into(),
        )),
    }
}
