//! Evaluation engine: compare every pair of a corpus through a sketch,
//! aggregate RMSE over parameter grids, and classify estimates against a
//! relevance threshold.

use std::io::Write;

use rayon::prelude::*;

use crate::datasets::ProfilePair;
use crate::metrics::{self, Metric};
use crate::scalar::RealScalar;
use crate::sketches::{CmsParams, CountMinSketch, CountingBloomFilter, FilterParams, SketchKind};
use crate::{Error, Result};

/// Sketch dimensions used to encode both sides of every pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SketchSpec {
    Cbf(FilterParams),
    Cms(CmsParams),
}

impl SketchSpec {
    pub fn new(kind: SketchKind, width: u32, depth: u32, seed: u64) -> Result<Self> {
        match kind {
            SketchKind::Counting => Ok(SketchSpec::Cbf(FilterParams::new(width, depth, seed)?)),
            SketchKind::CountMin => Ok(SketchSpec::Cms(CmsParams::new(width, depth, seed)?)),
            SketchKind::Bloom => Err(Error::InvalidParams(
                "experiments need a counting sketch (CBF or CMS)".into(),
            )),
        }
    }

    /// Estimated similarity of one pair.
    pub fn estimate<S: RealScalar>(&self, pair: &ProfilePair, metric: Metric) -> Result<S> {
        match (self, metric) {
            (SketchSpec::Cbf(p), _) => {
                let a = CountingBloomFilter::from_multiset(&pair.left, *p);
                let b = CountingBloomFilter::from_multiset(&pair.right, *p);
                match metric {
                    Metric::Dice => metrics::cbf_dice(&a, &b),
                    Metric::Cosine => metrics::cbf_cosine(&a, &b),
                }
            }
            (SketchSpec::Cms(p), _) => {
                let a = CountMinSketch::from_multiset(&pair.left, *p);
                let b = CountMinSketch::from_multiset(&pair.right, *p);
                match metric {
                    Metric::Dice => metrics::cms_dice(&a, &b),
                    Metric::Cosine => metrics::cms_cosine(&a, &b),
                }
            }
        }
    }
}

/// Exact similarity of one pair under `metric`.
pub fn ground_truth<S: RealScalar>(pair: &ProfilePair, metric: Metric) -> Result<S> {
    match metric {
        Metric::Dice => pair.left.dice(&pair.right),
        Metric::Cosine => pair.left.cosine(&pair.right),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonResult<S> {
    pub pair_id: String,
    pub truth: S,
    pub estimate: S,
    /// `estimate − truth`.
    pub error: S,
}

#[derive(Debug)]
pub struct PairFailure {
    pub pair_id: String,
    pub error: Error,
}

#[derive(Debug)]
pub struct PairwiseRun<S> {
    /// Sorted by ground truth ascending, ties by pair id.
    pub results: Vec<ComparisonResult<S>>,
    pub failures: Vec<PairFailure>,
}

/// Sketches both sides of every pair with identical parameters and compares
/// the estimate with the oracle. A failing pair is recorded, not fatal.
pub fn run_pairwise<S: RealScalar>(
    corpus: &[ProfilePair],
    sketch: SketchSpec,
    metric: Metric,
) -> Result<PairwiseRun<S>> {
    if corpus.is_empty() {
        return Err(Error::EmptyInput("corpus has no pairs"));
    }
    let mut results = Vec::with_capacity(corpus.len());
    let mut failures = Vec::new();
    for pair in corpus {
        let outcome = ground_truth::<S>(pair, metric)
            .and_then(|truth| Ok((truth, sketch.estimate::<S>(pair, metric)?)));
        match outcome {
            Ok((truth, estimate)) => results.push(ComparisonResult {
                pair_id: pair.id.clone(),
                error: estimate - truth,
                truth,
                estimate,
            }),
            Err(error) => failures.push(PairFailure {
                pair_id: pair.id.clone(),
                error,
            }),
        }
    }
    results.sort_by(|a, b| {
        a.truth
            .partial_cmp(&b.truth)
            .expect("scores are finite")
            .then_with(|| a.pair_id.cmp(&b.pair_id))
    });
    Ok(PairwiseRun { results, failures })
}

/// Root mean square of the signed errors.
pub fn rmse<S: RealScalar>(results: &[ComparisonResult<S>]) -> Result<S> {
    if results.is_empty() {
        return Err(Error::EmptyInput("no comparison results"));
    }
    let sum = results
        .iter()
        .fold(S::zero(), |acc, r| acc + r.error * r.error);
    Ok((sum / S::from_usize(results.len()).expect("length")).sqrt())
}

/// Mean signed error of the results whose truth satisfies `keep`.
pub fn mean_error_where<S: RealScalar>(
    results: &[ComparisonResult<S>],
    keep: impl Fn(S) -> bool,
) -> Option<S> {
    let picked: Vec<S> = results
        .iter()
        .filter(|r| keep(r.truth))
        .map(|r| r.error)
        .collect();
    if picked.is_empty() {
        None
    } else {
        Some(S::mean(&picked))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub kind: SketchKind,
    /// CBF lengths or CMS widths.
    pub widths: Vec<u32>,
    /// CBF hash counts or CMS depths.
    pub depths: Vec<u32>,
    pub metric: Metric,
    pub seed: u64,
}

impl GridSpec {
    pub const DEFAULT_WIDTHS: [u32; 5] = [64, 128, 200, 400, 800];
    pub const DEFAULT_DEPTHS: [u32; 5] = [1, 2, 4, 8, 10];

    pub fn new(kind: SketchKind, metric: Metric, seed: u64) -> Self {
        GridSpec {
            kind,
            widths: Self::DEFAULT_WIDTHS.to_vec(),
            depths: Self::DEFAULT_DEPTHS.to_vec(),
            metric,
            seed,
        }
    }

    pub fn with_axes(mut self, widths: &[u32], depths: &[u32]) -> Self {
        self.widths = widths.to_vec();
        self.depths = depths.to_vec();
        self
    }

    fn validate(&self) -> Result<()> {
        if self.kind == SketchKind::Bloom {
            return Err(Error::InvalidParams("grids need a CBF or CMS".into()));
        }
        if self.widths.is_empty() || self.depths.is_empty() {
            return Err(Error::InvalidParams("grid axes must be non-empty".into()));
        }
        if self.widths.contains(&0) || self.depths.contains(&0) {
            return Err(Error::InvalidParams(
                "grid dimensions must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridCell<S> {
    pub width: u32,
    pub depth: u32,
    /// Missing when any pair of the cell failed.
    pub rmse: Option<S>,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult<S> {
    /// Width-major, in axis order.
    pub cells: Vec<GridCell<S>>,
}

impl<S: Clone> GridResult<S> {
    pub fn rmse(&self, width: u32, depth: u32) -> Option<S> {
        self.cells
            .iter()
            .find(|c| c.width == width && c.depth == depth)
            .and_then(|c| c.rmse.clone())
    }
}

/// One RMSE per `(width, depth)` combination. Cells run in parallel and
/// are independent, so the result equals a sequential run.
pub fn run_grid<S: RealScalar>(corpus: &[ProfilePair], grid: &GridSpec) -> Result<GridResult<S>> {
    grid.validate()?;
    if corpus.is_empty() {
        return Err(Error::EmptyInput("corpus has no pairs"));
    }
    let combos: Vec<(u32, u32)> = grid
        .widths
        .iter()
        .flat_map(|&w| grid.depths.iter().map(move |&d| (w, d)))
        .collect();
    let cells = combos
        .into_par_iter()
        .map(|(width, depth)| {
            let spec = SketchSpec::new(grid.kind, width, depth, grid.seed)?;
            let run = run_pairwise::<S>(corpus, spec, grid.metric)?;
            let rmse = if run.failures.is_empty() {
                rmse(&run.results).ok()
            } else {
                None
            };
            Ok(GridCell {
                width,
                depth,
                rmse,
                failures: run.failures.len(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GridResult { cells })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdReport<S> {
    pub threshold: S,
    pub true_positives: usize,
    pub false_positives: usize,
    pub true_negatives: usize,
    pub false_negatives: usize,
    /// Largest `estimate − truth` among false positives.
    pub max_overshoot: Option<S>,
    /// Lowest ground truth among false positives.
    pub min_false_positive_truth: Option<S>,
}

/// Classifies results: predicted positive iff `estimate ≥ threshold`,
/// actually positive iff `truth ≥ threshold`.
pub fn threshold_report<S: RealScalar>(
    results: &[ComparisonResult<S>],
    threshold: S,
) -> Result<ThresholdReport<S>> {
    if !(threshold > S::zero() && threshold < S::one()) {
        return Err(Error::InvalidParams("threshold must lie in (0, 1)".into()));
    }
    let mut report = ThresholdReport {
        threshold,
        true_positives: 0,
        false_positives: 0,
        true_negatives: 0,
        false_negatives: 0,
        max_overshoot: None,
        min_false_positive_truth: None,
    };
    for r in results {
        match (r.estimate >= threshold, r.truth >= threshold) {
            (true, true) => report.true_positives += 1,
            (false, false) => report.true_negatives += 1,
            (false, true) => report.false_negatives += 1,
            (true, false) => {
                report.false_positives += 1;
                let overshoot = r.estimate - r.truth;
                if report.max_overshoot.is_none_or(|m| overshoot > m) {
                    report.max_overshoot = Some(overshoot);
                }
                if report.min_false_positive_truth.is_none_or(|m| r.truth < m) {
                    report.min_false_positive_truth = Some(r.truth);
                }
            }
        }
    }
    Ok(report)
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io("<csv output>", io),
        other => Error::InvalidParams(format!("csv: {other:?}")),
    }
}

fn fmt<S: RealScalar>(v: S) -> String {
    format!("{}", v.to_f64_lossy())
}

/// `pair_id,truth,estimate,error`
pub fn write_comparisons_csv<S: RealScalar, W: Write>(
    out: W,
    results: &[ComparisonResult<S>],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["pair_id", "truth", "estimate", "error"])
        .map_err(csv_err)?;
    for r in results {
        w.write_record([
            r.pair_id.clone(),
            fmt(r.truth),
            fmt(r.estimate),
            fmt(r.error),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io("<csv output>", e))
}

/// `dim,depth,rmse`; a failed cell leaves `rmse` empty.
pub fn write_grid_csv<S: RealScalar, W: Write>(out: W, grid: &GridResult<S>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["dim", "depth", "rmse"]).map_err(csv_err)?;
    for c in &grid.cells {
        let rmse = c.rmse.map(fmt).unwrap_or_default();
        w.write_record([c.width.to_string(), c.depth.to_string(), rmse])
            .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io("<csv output>", e))
}

/// `threshold,tp,fp,tn,fn,max_overshoot`; `max_overshoot` is empty without
/// false positives.
pub fn write_threshold_csv<S: RealScalar, W: Write>(
    out: W,
    reports: &[ThresholdReport<S>],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["threshold", "tp", "fp", "tn", "fn", "max_overshoot"])
        .map_err(csv_err)?;
    for r in reports {
        w.write_record([
            fmt(r.threshold),
            r.true_positives.to_string(),
            r.false_positives.to_string(),
            r.true_negatives.to_string(),
            r.false_negatives.to_string(),
            r.max_overshoot.map(fmt).unwrap_or_default(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io("<csv output>", e))
}
