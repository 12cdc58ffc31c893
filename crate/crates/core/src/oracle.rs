//! Exact multisets and the ground-truth similarity scores that sketch
//! estimates are measured against.

use std::collections::btree_map::{self, BTreeMap};

use crate::scalar::{cosine_ratio, RealScalar, Scalar};
use crate::{Error, Result};

/// Element → positive multiplicity. Absent elements have multiplicity zero.
///
/// Elements are opaque, non-empty byte strings. Iteration order is the
/// lexicographic byte order of the elements.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Multiset {
    entries: BTreeMap<Vec<u8>, u64>,
    cardinality: u64,
}

impl Multiset {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `times` instances of `element`.
    pub fn insert(&mut self, element: impl AsRef<[u8]>, times: u64) -> Result<()> {
        let element = element.as_ref();
        if element.is_empty() {
            return Err(Error::EmptyElement);
        }
        if times == 0 {
            return Err(Error::ZeroTimes);
        }
        let cardinality = self
            .cardinality
            .checked_add(times)
            .ok_or(Error::CountOverflow)?;
        match self.entries.get_mut(element) {
            Some(count) => *count = count.checked_add(times).ok_or(Error::CountOverflow)?,
            None => {
                self.entries.insert(element.to_vec(), times);
            }
        }
        self.cardinality = cardinality;
        Ok(())
    }

    /// Builder-style [`insert`](Self::insert).
    pub fn with(mut self, element: impl AsRef<[u8]>, times: u64) -> Result<Self> {
        self.insert(element, times)?;
        Ok(self)
    }

    pub fn count(&self, element: impl AsRef<[u8]>) -> u64 {
        self.entries.get(element.as_ref()).copied().unwrap_or(0)
    }

    /// Total number of instances (sum of all counts).
    pub fn cardinality(&self) -> u64 {
        self.cardinality
    }

    /// Number of distinct elements.
    pub fn distinct_count(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, element: impl AsRef<[u8]>) -> bool {
        self.entries.contains_key(element.as_ref())
    }

    pub fn iter(&self) -> Iter<'_> {
        Iter {
            inner: self.entries.iter(),
        }
    }

    /// Σ over shared elements of the smaller multiplicity.
    pub fn intersection_cardinality(&self, other: &Multiset) -> u64 {
        let (small, large) = if self.distinct_count() <= other.distinct_count() {
            (self, other)
        } else {
            (other, self)
        };
        small
            .entries
            .iter()
            .filter_map(|(e, &c)| large.entries.get(e).map(|&d| c.min(d)))
            .sum()
    }

    /// Multiset Dice coefficient `2·|X ∩ Y| / (|X| + |Y|)`.
    pub fn dice<S: Scalar>(&self, other: &Multiset) -> Result<S> {
        let denominator = self.cardinality as u128 + other.cardinality as u128;
        if denominator == 0 {
            return Err(Error::UndefinedSimilarity("both multisets are empty"));
        }
        let numerator = 2 * self.intersection_cardinality(other) as u128;
        Ok(S::from_ratio(numerator, denominator))
    }

    /// Cosine similarity of the count vectors aligned by element.
    pub fn cosine<S: RealScalar>(&self, other: &Multiset) -> Result<S> {
        if self.is_empty() || other.is_empty() {
            return Err(Error::UndefinedSimilarity("cosine of an empty multiset"));
        }
        let sum_sq = |m: &Multiset| -> Result<u128> {
            m.entries.values().try_fold(0u128, |acc, &c| {
                acc.checked_add(c as u128 * c as u128)
                    .ok_or(Error::CountOverflow)
            })
        };
        let mut dot = 0u128;
        for (e, &c) in &self.entries {
            if let Some(&d) = other.entries.get(e) {
                dot = dot
                    .checked_add(c as u128 * d as u128)
                    .ok_or(Error::CountOverflow)?;
            }
        }
        Ok(cosine_ratio(dot, sum_sq(self)?, sum_sq(other)?))
    }
}

/// Free-function form of [`Multiset::intersection_cardinality`].
pub fn intersection_cardinality(x: &Multiset, y: &Multiset) -> u64 {
    x.intersection_cardinality(y)
}

pub fn dice<S: Scalar>(x: &Multiset, y: &Multiset) -> Result<S> {
    x.dice(y)
}

pub fn cosine<S: RealScalar>(x: &Multiset, y: &Multiset) -> Result<S> {
    x.cosine(y)
}

pub struct Iter<'a> {
    inner: btree_map::Iter<'a, Vec<u8>, u64>,
}

impl<'a> Iterator for Iter<'a> {
    type Item = (&'a [u8], u64);

    fn next(&mut self) -> Option<Self::Item> {
        self.inner.next().map(|(e, &c)| (e.as_slice(), c))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        self.inner.size_hint()
    }
}

impl DoubleEndedIterator for Iter<'_> {
    fn next_back(&mut self) -> Option<Self::Item> {
        self.inner.next_back().map(|(e, &c)| (e.as_slice(), c))
    }
}

impl ExactSizeIterator for Iter<'_> {}

impl<'a> IntoIterator for &'a Multiset {
    type Item = (&'a [u8], u64);
    type IntoIter = Iter<'a>;

    fn into_iter(self) -> Iter<'a> {
        self.iter()
    }
}

/// Collects `(element, count)` pairs, summing repeated elements.
///
/// Panics on empty elements, zero counts or overflow; use
/// [`Multiset::insert`] for fallible construction.
impl<E: AsRef<[u8]>> FromIterator<(E, u64)> for Multiset {
    fn from_iter<I: IntoIterator<Item = (E, u64)>>(iter: I) -> Self {
        let mut m = Multiset::new();
        for (e, c) in iter {
            m.insert(e, c).expect("valid multiset entry");
        }
        m
    }
}
