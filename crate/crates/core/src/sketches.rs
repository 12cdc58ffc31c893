//! Bloom filter, counting Bloom filter and count-min sketch.
//!
//! Counters are 32-bit and saturate at `u32::MAX`; a sketch in which any
//! counter reached the maximum reports [`is_saturated`](CountingBloomFilter::is_saturated).
//! When double hashing maps an element to the same cell more than once, the
//! cell is incremented once per hash function, so the counter sum of an
//! unsaturated counting filter is always `k · total_insertions`.

use crate::hashing::{row_seed, HashFamily};
use crate::oracle::Multiset;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum SketchKind {
    Bloom = 0,
    Counting = 1,
    CountMin = 2,
}

impl SketchKind {
    pub fn name(self) -> &'static str {
        match self {
            SketchKind::Bloom => "BF",
            SketchKind::Counting => "CBF",
            SketchKind::CountMin => "CMS",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum CounterWidth {
    /// One bit per cell, packed.
    Bit = 0,
    /// 32-bit unsigned counters.
    U32 = 2,
}

/// Everything two peers must agree on before their sketches are comparable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Descriptor {
    pub kind: SketchKind,
    /// Filter length `n`, or count-min width `w`.
    pub width: u32,
    /// Count-min depth `d`; 1 for filters.
    pub depth: u32,
    /// Hash functions per element `k`; 1 for count-min.
    pub hashes: u32,
    pub seed: u64,
    pub counter_width: CounterWidth,
}

/// Common read access to any sketch.
pub trait Sketch {
    fn descriptor(&self) -> Descriptor;
}

/// Dimensions of a Bloom filter or counting Bloom filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FilterParams {
    len: u32,
    hashes: u32,
    seed: u64,
}

impl FilterParams {
    pub fn new(len: u32, hashes: u32, seed: u64) -> Result<Self> {
        HashFamily::new(seed, hashes, len)?;
        Ok(FilterParams { len, hashes, seed })
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> u32 {
        self.len
    }

    pub fn hashes(&self) -> u32 {
        self.hashes
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn family(&self) -> HashFamily {
        HashFamily::new(self.seed, self.hashes, self.len).expect("validated")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CmsParams {
    width: u32,
    depth: u32,
    seed: u64,
}

impl CmsParams {
    pub fn new(width: u32, depth: u32, seed: u64) -> Result<Self> {
        if width == 0 || depth == 0 {
            return Err(Error::InvalidParams(
                "count-min width and depth must be at least 1".into(),
            ));
        }
        Ok(CmsParams { width, depth, seed })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

fn check_insert(element: &[u8], times: u64) -> Result<()> {
    if element.is_empty() {
        return Err(Error::EmptyElement);
    }
    if times == 0 {
        return Err(Error::ZeroTimes);
    }
    Ok(())
}

/// Saturating add of `times` into a counter; returns true if the counter is
/// now at its maximum.
fn bump(counter: &mut u32, times: u64) -> bool {
    let add = u32::try_from(times).unwrap_or(u32::MAX);
    *counter = counter.saturating_add(add);
    *counter == u32::MAX
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BloomFilter {
    words: Vec<u64>,
    family: HashFamily,
}

impl BloomFilter {
    pub fn new(params: FilterParams) -> Self {
        BloomFilter {
            words: vec![0; (params.len as usize).div_ceil(64)],
            family: params.family(),
        }
    }

    pub fn from_multiset(m: &Multiset, params: FilterParams) -> Self {
        let mut bf = Self::new(params);
        for (e, _) in m {
            bf.set(e);
        }
        bf
    }

    pub fn insert(&mut self, element: impl AsRef<[u8]>) -> Result<()> {
        let element = element.as_ref();
        check_insert(element, 1)?;
        self.set(element);
        Ok(())
    }

    fn set(&mut self, element: &[u8]) {
        for p in self.family.positions(element) {
            self.words[p / 64] |= 1 << (p % 64);
        }
    }

    /// `false` means `element` was never inserted.
    pub fn contains(&self, element: impl AsRef<[u8]>) -> bool {
        self.family.positions(element.as_ref()).all(|p| self.bit(p))
    }

    pub fn bit(&self, index: usize) -> bool {
        self.words[index / 64] >> (index % 64) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.family.range() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.count_ones() == 0
    }

    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    pub fn params(&self) -> FilterParams {
        FilterParams {
            len: self.family.range(),
            hashes: self.family.hashes(),
            seed: self.family.seed(),
        }
    }

    /// Bits packed least-significant-bit first, padded to a whole byte.
    pub fn to_packed_bytes(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.len().div_ceil(8)];
        for i in 0..self.len() {
            if self.bit(i) {
                out[i / 8] |= 1 << (i % 8);
            }
        }
        out
    }

    /// Inverse of [`to_packed_bytes`](Self::to_packed_bytes). Padding bits must be zero.
    pub fn from_packed_bytes(params: FilterParams, bytes: &[u8]) -> Result<Self> {
        let len = params.len as usize;
        if bytes.len() != len.div_ceil(8) {
            return Err(Error::InvalidParams(format!(
                "expected {} packed bytes, got {}",
                len.div_ceil(8),
                bytes.len()
            )));
        }
        let mut bf = Self::new(params);
        for (i, byte) in bytes.iter().enumerate() {
            for bit in 0..8 {
                if byte >> bit & 1 == 1 {
                    let idx = i * 8 + bit;
                    if idx >= len {
                        return Err(Error::InvalidParams("non-zero padding bits".into()));
                    }
                    bf.words[idx / 64] |= 1 << (idx % 64);
                }
            }
        }
        Ok(bf)
    }
}

impl Sketch for BloomFilter {
    fn descriptor(&self) -> Descriptor {
        Descriptor {
            kind: SketchKind::Bloom,
            width: self.family.range(),
            depth: 1,
            hashes: self.family.hashes(),
            seed: self.family.seed(),
            counter_width: CounterWidth::Bit,
        }
    }
}

/// Counting Bloom filter: `n` saturating counters and `k` hash functions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountingBloomFilter {
    counters: Vec<u32>,
    family: HashFamily,
    total_insertions: u64,
    saturated: bool,
}

impl CountingBloomFilter {
    pub fn new(params: FilterParams) -> Self {
        CountingBloomFilter {
            counters: vec![0; params.len as usize],
            family: params.family(),
            total_insertions: 0,
            saturated: false,
        }
    }

    /// Encodes every `(element, count)` of `m`. The result does not depend
    /// on insertion order.
    pub fn from_multiset(m: &Multiset, params: FilterParams) -> Self {
        let mut cbf = Self::new(params);
        for (e, c) in m {
            cbf.add(e, c);
        }
        cbf
    }

    /// Rebuilds a filter from its counter vector, e.g. after decoding.
    ///
    /// `total_insertions` is recovered as `Σ counters / k`, which is exact
    /// unless the filter is saturated.
    pub fn from_counters(params: FilterParams, counters: Vec<u32>) -> Result<Self> {
        if counters.len() != params.len as usize {
            return Err(Error::InvalidParams(format!(
                "expected {} counters, got {}",
                params.len,
                counters.len()
            )));
        }
        let sum: u64 = counters.iter().map(|&c| c as u64).sum();
        let saturated = counters.contains(&u32::MAX);
        Ok(CountingBloomFilter {
            counters,
            family: params.family(),
            total_insertions: sum / params.hashes as u64,
            saturated,
        })
    }

    pub fn insert(&mut self, element: impl AsRef<[u8]>, times: u64) -> Result<()> {
        let element = element.as_ref();
        check_insert(element, times)?;
        self.add(element, times);
        Ok(())
    }

    fn add(&mut self, element: &[u8], times: u64) {
        for p in self.family.positions(element) {
            self.saturated |= bump(&mut self.counters[p], times);
        }
        self.total_insertions = self.total_insertions.saturating_add(times);
    }

    /// Minimum over the element's counters; never below the true count.
    pub fn estimate_count(&self, element: impl AsRef<[u8]>) -> u32 {
        self.family
            .positions(element.as_ref())
            .map(|p| self.counters[p])
            .min()
            .unwrap_or(0)
    }

    pub fn counters(&self) -> &[u32] {
        &self.counters
    }

    pub fn len(&self) -> usize {
        self.counters.len()
    }

    /// True when every counter is zero.
    pub fn is_empty(&self) -> bool {
        self.counters.iter().all(|&c| c == 0)
    }

    pub fn total_insertions(&self) -> u64 {
        self.total_insertions
    }

    /// True once any counter has reached `u32::MAX`.
    pub fn is_saturated(&self) -> bool {
        self.saturated
    }

    pub fn hash_family(&self) -> &HashFamily {
        &self.family
    }

    pub fn params(&self) -> FilterParams {
        FilterParams {
            len: self.family.range(),
            hashes: self.family.hashes(),
            seed: self.family.seed(),
        }
    }
}

impl Sketch for CountingBloomFilter {
    fn descriptor(&self) -> Descriptor {
        Descriptor {
            kind: SketchKind::Counting,
            width: self.family.range(),
            depth: 1,
            hashes: self.family.hashes(),
            seed: self.family.seed(),
            counter_width: CounterWidth::U32,
        }
    }
}

/// Count-min sketch: `d` rows of `w` saturating counters, one hash per row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountMinSketch {
    params: CmsParams,
    rows: Vec<HashFamily>,
    table: Vec<u32>,
    total_insertions: u64,
    saturated: bool,
}

impl CountMinSketch {
    pub fn new(params: CmsParams) -> Self {
        let rows = (0..params.depth)
            .map(|r| HashFamily::new(row_seed(params.seed, r), 1, params.width).expect("validated"))
            .collect();
        CountMinSketch {
            params,
            rows,
            table: vec![0; params.width as usize * params.depth as usize],
            total_insertions: 0,
            saturated: false,
        }
    }

    pub fn from_multiset(m: &Multiset, params: CmsParams) -> Self {
        let mut cms = Self::new(params);
        for (e, c) in m {
            cms.add(e, c);
        }
        cms
    }

    /// Rebuilds a sketch from its row-major table.
    ///
    /// `total_insertions` is recovered from the first row sum, exact unless
    /// the sketch is saturated.
    pub fn from_table(params: CmsParams, table: Vec<u32>) -> Result<Self> {
        let cells = params.width as usize * params.depth as usize;
        if table.len() != cells {
            return Err(Error::InvalidParams(format!(
                "expected {cells} counters, got {}",
                table.len()
            )));
        }
        let mut cms = Self::new(params);
        cms.total_insertions = table[..params.width as usize]
            .iter()
            .map(|&c| c as u64)
            .sum();
        cms.saturated = table.contains(&u32::MAX);
        cms.table = table;
        Ok(cms)
    }

    pub fn insert(&mut self, element: impl AsRef<[u8]>, times: u64) -> Result<()> {
        let element = element.as_ref();
        check_insert(element, times)?;
        self.add(element, times);
        Ok(())
    }

    fn add(&mut self, element: &[u8], times: u64) {
        let w = self.params.width as usize;
        for (r, family) in self.rows.iter().enumerate() {
            let cell = &mut self.table[r * w + family.first_position(element)];
            self.saturated |= bump(cell, times);
        }
        self.total_insertions = self.total_insertions.saturating_add(times);
    }

    /// Row-wise minimum; never below the true count.
    pub fn estimate_count(&self, element: impl AsRef<[u8]>) -> u32 {
        let element = element.as_ref();
        let w = self.params.width as usize;
        self.rows
            .iter()
            .enumerate()
            .map(|(r, family)| self.table[r * w + family.first_position(element)])
            .min()
            .unwrap_or(0)
    }

    pub fn row(&self, index: usize) -> &[u32] {
        let w = self.params.width as usize;
        &self.table[index * w..(index + 1) * w]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[u32]> {
        self.table.chunks_exact(self.params.width as usize)
    }

    /// Row-major counter table.
    pub fn table(&self) -> &[u32] {
        &self.table
    }

    pub fn width(&self) -> u32 {
        self.params.width
    }

    pub fn depth(&self) -> u32 {
        self.params.depth
    }

    pub fn params(&self) -> CmsParams {
        self.params
    }

    pub fn total_insertions(&self) -> u64 {
        self.total_insertions
    }

    pub fn is_saturated(&self) -> bool {
        self.saturated
    }

    pub fn is_empty(&self) -> bool {
        self.table.iter().all(|&c| c == 0)
    }

    /// Column sums as a length-`w` counting filter.
    ///
    /// This is a lossy projection: the result's counters are meaningful for
    /// the similarity metrics, but its hash family (base seed, `k = d`) is
    /// not the one that produced the counters, so point queries on it are
    /// only correct when `d = 1`.
    pub fn to_cbf(&self) -> CountingBloomFilter {
        let w = self.params.width as usize;
        let mut counters = vec![0u32; w];
        let mut saturated = false;
        for row in self.table.chunks_exact(w) {
            for (acc, &c) in counters.iter_mut().zip(row) {
                *acc = acc.saturating_add(c);
                saturated |= *acc == u32::MAX;
            }
        }
        let params = FilterParams::new(self.params.width, self.params.depth, self.params.seed)
            .expect("validated");
        CountingBloomFilter {
            counters,
            family: params.family(),
            total_insertions: self.total_insertions,
            saturated,
        }
    }
}

impl Sketch for CountMinSketch {
    fn descriptor(&self) -> Descriptor {
        Descriptor {
            kind: SketchKind::CountMin,
            width: self.params.width,
            depth: self.params.depth,
            hashes: 1,
            seed: self.params.seed,
            counter_width: CounterWidth::U32,
        }
    }
}

/// A sketch of any kind, as produced by decoding an envelope.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnySketch {
    Bloom(BloomFilter),
    Counting(CountingBloomFilter),
    CountMin(CountMinSketch),
}

impl AnySketch {
    pub fn kind(&self) -> SketchKind {
        match self {
            AnySketch::Bloom(_) => SketchKind::Bloom,
            AnySketch::Counting(_) => SketchKind::Counting,
            AnySketch::CountMin(_) => SketchKind::CountMin,
        }
    }

    pub fn is_saturated(&self) -> bool {
        match self {
            AnySketch::Bloom(_) => false,
            AnySketch::Counting(c) => c.is_saturated(),
            AnySketch::CountMin(c) => c.is_saturated(),
        }
    }
}

impl Sketch for AnySketch {
    fn descriptor(&self) -> Descriptor {
        match self {
            AnySketch::Bloom(s) => s.descriptor(),
            AnySketch::Counting(s) => s.descriptor(),
            AnySketch::CountMin(s) => s.descriptor(),
        }
    }
}

impl From<BloomFilter> for AnySketch {
    fn from(s: BloomFilter) -> Self {
        AnySketch::Bloom(s)
    }
}

impl From<CountingBloomFilter> for AnySketch {
    fn from(s: CountingBloomFilter) -> Self {
        AnySketch::Counting(s)
    }
}

impl From<CountMinSketch> for AnySketch {
    fn from(s: CountMinSketch) -> Self {
        AnySketch::CountMin(s)
    }
}
