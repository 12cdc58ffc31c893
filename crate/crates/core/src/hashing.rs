//! Seeded double-hashing family.
//!
//! The procedure is normative: two sketches are comparable only if both
//! sides derive identical positions, on any platform.
//!
//! For a family `(seed, k, range)` and element bytes `e`:
//!
//! ```text
//! fnv1a(bytes)  = FNV-1a 64 (offset 0xcbf29ce484222325, prime 0x100000001b3)
//! fmix(x)       = MurmurHash3 fmix64 finalizer:
//!                 x ^= x >> 33; x *= 0xff51afd7ed558ccd;
//!                 x ^= x >> 33; x *= 0xc4ceb9fe1a85ec53; x ^= x >> 33
//! digest(s, b)  = fmix(fnv1a(le64(s) ‖ b))
//! h1            = digest(seed, e)
//! h2            = digest(seed ^ 0x9e3779b97f4a7c15, e) | 1
//! position(i)   = (h1 +wrap i ·wrap h2) mod range      for i in 0..k
//! ```
//!
//! All arithmetic is wrapping `u64`. The finalizer matters: raw FNV-1a low
//! bits depend only on the low bits of the input, which skews `h1 + i·h2`
//! modulo powers of two. Count-min rows use one-function
//! families whose seeds come from [`row_seed`].

use crate::{Error, Result};

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;
const SECOND_DIGEST_MIX: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Debug, Clone, Copy)]
struct Fnv1a(u64);

impl Fnv1a {
    fn new() -> Self {
        Fnv1a(FNV_OFFSET)
    }

    fn write(mut self, bytes: &[u8]) -> Self {
        for &b in bytes {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(FNV_PRIME);
        }
        self
    }
}

fn fmix64(mut x: u64) -> u64 {
    x ^= x >> 33;
    x = x.wrapping_mul(0xff51_afd7_ed55_8ccd);
    x ^= x >> 33;
    x = x.wrapping_mul(0xc4ce_b9fe_1a85_ec53);
    x ^ (x >> 33)
}

/// Finalized FNV-1a digest of `le64(seed) ‖ bytes`.
pub fn seeded_digest(seed: u64, bytes: &[u8]) -> u64 {
    fmix64(Fnv1a::new().write(&seed.to_le_bytes()).write(bytes).0)
}

/// Seed of count-min row `row`: the base seed for row 0, otherwise
/// `digest(base, le32(row))`.
///
/// Row 0 reusing the base seed makes a one-row sketch coincide with a
/// one-function counting Bloom filter of the same seed.
pub fn row_seed(base: u64, row: u32) -> u64 {
    if row == 0 {
        base
    } else {
        seeded_digest(base, &row.to_le_bytes())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HashFamily {
    seed: u64,
    hashes: u32,
    range: u32,
}

impl HashFamily {
    pub fn new(seed: u64, hashes: u32, range: u32) -> Result<Self> {
        if hashes == 0 {
            return Err(Error::InvalidParams("hash count must be at least 1".into()));
        }
        if range == 0 {
            return Err(Error::InvalidParams("hash range must be at least 1".into()));
        }
        Ok(HashFamily {
            seed,
            hashes,
            range,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn hashes(&self) -> u32 {
        self.hashes
    }

    pub fn range(&self) -> u32 {
        self.range
    }

    /// The `k` table positions of `element`.
    pub fn positions(&self, element: &[u8]) -> Positions {
        let h1 = seeded_digest(self.seed, element);
        let h2 = seeded_digest(self.seed ^ SECOND_DIGEST_MIX, element) | 1;
        Positions {
            h1,
            h2,
            range: self.range as u64,
            next: 0,
            end: self.hashes,
        }
    }

    /// First position only; what a count-min row uses.
    pub fn first_position(&self, element: &[u8]) -> usize {
        (seeded_digest(self.seed, element) % self.range as u64) as usize
    }
}

/// Iterator over the positions of one element.
#[derive(Debug, Clone)]
pub struct Positions {
    h1: u64,
    h2: u64,
    range: u64,
    next: u32,
    end: u32,
}

impl Iterator for Positions {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.next == self.end {
            return None;
        }
        let i = self.next as u64;
        self.next += 1;
        Some((self.h1.wrapping_add(i.wrapping_mul(self.h2)) % self.range) as usize)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.end - self.next) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for Positions {}
