use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use multisketch::datasets::{
    self, all_pairs, build_user_profiles, generate_synthetic, ingest_triplets, load_corpus,
    open_triplets, read_profiles, summarize, write_corpus, write_profiles, ProfilePair,
    SyntheticConfig,
};
use multisketch::experiments::{
    self, run_grid, run_pairwise, threshold_report, write_comparisons_csv, write_grid_csv,
    write_threshold_csv, GridSpec, SketchSpec,
};
use multisketch::metrics::{self, Metric};
use multisketch::oracle::Multiset;
use multisketch::sketches::{
    AnySketch, BloomFilter, CmsParams, CountMinSketch, CountingBloomFilter, Descriptor,
    FilterParams, SketchKind,
};
use multisketch::wire::{self, SketchEnvelope};

use super::{
    CliError, CompareArgs, CorpusSource, GenArgs, GridArgs, IngestArgs, KindArg, PairsArgs,
    SketchCmdArgs, SketchParamArgs,
};

type CliResult<T = ()> = Result<T, CliError>;

#[derive(Debug, Clone, Copy)]
enum Resolved {
    Bloom(FilterParams),
    Cbf(FilterParams),
    Cms(CmsParams),
}

impl Resolved {
    fn from_args(p: &SketchParamArgs) -> CliResult<Self> {
        let usage = |msg: &str| Err(CliError::Usage(msg.to_string()));
        if p.width == 0 {
            return usage("--width must be at least 1");
        }
        match p.kind {
            KindArg::Bf | KindArg::Cbf => {
                if p.depth.is_some_and(|d| d != 1) {
                    return usage("--depth applies to CMS only");
                }
                let k = p.hashes.unwrap_or(1);
                if k == 0 {
                    return usage("--hashes must be at least 1");
                }
                let fp = FilterParams::new(p.width, k, p.seed)?;
                Ok(if p.kind == KindArg::Bf {
                    Resolved::Bloom(fp)
                } else {
                    Resolved::Cbf(fp)
                })
            }
            KindArg::Cms => {
                if p.hashes.is_some_and(|k| k != 1) {
                    return usage("--hashes applies to BF/CBF only; a CMS uses one hash per row");
                }
                let d = p.depth.unwrap_or(1);
                if d == 0 {
                    return usage("--depth must be at least 1");
                }
                Ok(Resolved::Cms(CmsParams::new(p.width, d, p.seed)?))
            }
        }
    }

    fn from_header(h: &Descriptor) -> CliResult<Self> {
        Ok(match h.kind {
            SketchKind::Bloom => Resolved::Bloom(FilterParams::new(h.width, h.hashes, h.seed)?),
            SketchKind::Counting => Resolved::Cbf(FilterParams::new(h.width, h.hashes, h.seed)?),
            SketchKind::CountMin => Resolved::Cms(CmsParams::new(h.width, h.depth, h.seed)?),
        })
    }

    fn build(&self, m: &Multiset) -> AnySketch {
        match *self {
            Resolved::Bloom(p) => BloomFilter::from_multiset(m, p).into(),
            Resolved::Cbf(p) => CountingBloomFilter::from_multiset(m, p).into(),
            Resolved::Cms(p) => CountMinSketch::from_multiset(m, p).into(),
        }
    }

    fn experiment_spec(&self) -> CliResult<SketchSpec> {
        match *self {
            Resolved::Cbf(p) => Ok(SketchSpec::Cbf(p)),
            Resolved::Cms(p) => Ok(SketchSpec::Cms(p)),
            Resolved::Bloom(_) => Err(CliError::Usage(
                "similarity needs --kind cbf or --kind cms".into(),
            )),
        }
    }
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> CliResult {
    w.flush()
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn select_user(path: &Path, user: Option<&str>) -> CliResult<Multiset> {
    let mut profiles = read_profiles(path)?;
    match user {
        Some(u) => profiles
            .remove(u)
            .ok_or_else(|| CliError::Data(format!("{}: no user `{u}`", path.display()))),
        None if profiles.len() == 1 => Ok(profiles.into_values().next().expect("one user")),
        None => Err(CliError::Usage(format!(
            "{} holds {} users; pick one with a --*user flag",
            path.display(),
            profiles.len()
        ))),
    }
}

fn warn_saturated(sketch: &AnySketch, what: &str) {
    if sketch.is_saturated() {
        eprintln!("warning: {what}: a counter saturated at {}", u32::MAX);
    }
}

pub fn gen(a: GenArgs) -> CliResult {
    let corpus = generate_synthetic(&SyntheticConfig {
        seed: a.seed,
        pair_count: a.pairs,
        target_unique: a.unique,
        string_length: a.strlen,
    })?;
    let manifest = write_corpus(&a.out, &corpus)?;
    eprintln!(
        "wrote {} pairs to {} (base: {} distinct, cardinality {}; mean distinct {:.1})",
        manifest.pairs.len(),
        a.out.display(),
        manifest.base.distinct,
        manifest.base.cardinality,
        corpus.mean_distinct()
    );
    Ok(())
}

pub fn ingest(a: IngestArgs) -> CliResult {
    let ingested = ingest_triplets(open_triplets(&a.input)?)
        .map_err(|e| CliError::Data(format!("{}: {e}", a.input.display())))?;
    for d in ingested.duplicates.iter().take(10) {
        eprintln!(
            "warning: line {}: duplicate ({}, {}) summed into line {}",
            d.line, d.user, d.song, d.first_line
        );
    }
    if ingested.duplicates.len() > 10 {
        eprintln!(
            "warning: {} more duplicate lines",
            ingested.duplicates.len() - 10
        );
    }
    let profiles = build_user_profiles(&ingested.records, a.min_distinct);
    let mut out = create(&a.out)?;
    write_profiles(&mut out, profiles.iter().map(|(u, m)| (u.as_str(), m)))?;
    finish(out, &a.out)?;
    let summary = summarize(&profiles);
    eprintln!(
        "kept {} users, {} distinct songs, {} plays (min distinct {})",
        summary.users, summary.distinct_songs, summary.total_plays, a.min_distinct
    );
    if let Some(path) = &a.summary {
        let mut json = serde_json::to_string_pretty(&summary).expect("summary serializes");
        json.push('\n');
        std::fs::write(path, json)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

pub fn sketch(a: SketchCmdArgs) -> CliResult {
    let params = Resolved::from_args(&a.params)?;
    let profile = select_user(&a.input, a.user.as_deref())?;
    let sketch = params.build(&profile);
    warn_saturated(&sketch, &a.input.display().to_string());
    let bytes = wire::encode(&sketch);
    std::fs::write(&a.out, &bytes)
        .map_err(|e| CliError::Data(format!("{}: {e}", a.out.display())))?;
    eprintln!("wrote {} bytes to {}", bytes.len(), a.out.display());
    Ok(())
}

enum Input {
    Envelope(SketchEnvelope),
    Profile(Multiset),
}

fn load_input(path: &Path, user: Option<&str>) -> CliResult<Input> {
    let bytes =
        std::fs::read(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    if bytes.starts_with(&wire::MAGIC) {
        let env =
            wire::decode(&bytes).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        if user.is_some() {
            return Err(CliError::Usage(format!(
                "{} is a sketch; user flags do not apply",
                path.display()
            )));
        }
        Ok(Input::Envelope(env))
    } else {
        Ok(Input::Profile(select_user(path, user)?))
    }
}

pub fn compare(a: CompareArgs) -> CliResult {
    let metric = Metric::from(a.metric);
    let left = load_input(&a.left, a.left_user.as_deref())?;
    let right = load_input(&a.right, a.right_user.as_deref())?;
    let truth = match (&left, &right) {
        (Input::Profile(x), Input::Profile(y)) if a.truth => Some(match metric {
            Metric::Dice => x.dice::<f64>(y)?,
            Metric::Cosine => x.cosine::<f64>(y)?,
        }),
        _ if a.truth => {
            return Err(CliError::Usage("--truth needs two profile inputs".into()));
        }
        _ => None,
    };
    let (l, r) = match (left, right) {
        (Input::Profile(x), Input::Profile(y)) => {
            let params = Resolved::from_args(&a.params)?;
            (params.build(&x), params.build(&y))
        }
        // a local profile is encoded with the peer's parameters
        (Input::Profile(x), Input::Envelope(e)) => {
            (Resolved::from_header(&e.header)?.build(&x), e.sketch)
        }
        (Input::Envelope(e), Input::Profile(y)) => {
            let built = Resolved::from_header(&e.header)?.build(&y);
            (e.sketch, built)
        }
        (Input::Envelope(e), Input::Envelope(f)) => {
            wire::compatibility_check(&e.header, &f.header).map_err(CliError::Incompatible)?;
            (e.sketch, f.sketch)
        }
    };
    warn_saturated(&l, "left");
    warn_saturated(&r, "right");
    if l.kind() == SketchKind::Bloom {
        return Err(CliError::Usage(
            "similarity needs a CBF or CMS, not a plain BF".into(),
        ));
    }
    let estimate: f64 = metrics::estimate(metric, &l, &r)?;
    let mut out = std::io::stdout().lock();
    let mut line = |s: String| writeln!(out, "{s}").map_err(|e| CliError::Data(e.to_string()));
    line(format!("metric={}", metric.name()))?;
    line(format!("estimate={estimate}"))?;
    if let Some(t) = truth {
        line(format!("truth={t}"))?;
        line(format!("error={}", estimate - t))?;
    }
    Ok(())
}

fn load_pairs(source: &CorpusSource, max_pairs: usize) -> CliResult<Vec<ProfilePair>> {
    match (&source.corpus, &source.profiles) {
        (Some(dir), None) => Ok(load_corpus(dir)?.1),
        (None, Some(path)) => {
            let profiles: BTreeMap<String, Multiset> = datasets::read_profiles(path)?;
            Ok(all_pairs(&profiles, max_pairs))
        }
        _ => Err(CliError::Usage(
            "give exactly one of --corpus or --profiles".into(),
        )),
    }
}

pub fn pairs(a: PairsArgs) -> CliResult {
    let spec = Resolved::from_args(&a.params)?.experiment_spec()?;
    if a.report.is_some() && a.threshold.iter().any(|&t| !(t > 0.0 && t < 1.0)) {
        return Err(CliError::Usage("thresholds must lie in (0, 1)".into()));
    }
    let corpus = load_pairs(&a.source, a.max_pairs)?;
    eprintln!("comparing {} pairs", corpus.len());
    let run = run_pairwise::<f64>(&corpus, spec, a.metric.into())?;
    for f in &run.failures {
        eprintln!("warning: pair {}: {}", f.pair_id, f.error);
    }
    let mut out = create(&a.out)?;
    write_comparisons_csv(&mut out, &run.results)?;
    finish(out, &a.out)?;
    if let Some(path) = &a.report {
        let reports = a
            .threshold
            .iter()
            .map(|&t| threshold_report(&run.results, t))
            .collect::<Result<Vec<_>, _>>()?;
        let mut out = create(path)?;
        write_threshold_csv(&mut out, &reports)?;
        finish(out, path)?;
    }
    if let Ok(r) = experiments::rmse(&run.results) {
        eprintln!("rmse {r:.6} over {} pairs", run.results.len());
    }
    Ok(())
}

pub fn grid(a: GridArgs) -> CliResult {
    let kind = match a.kind {
        KindArg::Cbf => SketchKind::Counting,
        KindArg::Cms => SketchKind::CountMin,
        KindArg::Bf => {
            return Err(CliError::Usage(
                "grids need --kind cbf or --kind cms".into(),
            ))
        }
    };
    if a.widths.contains(&0) || a.depths.contains(&0) {
        return Err(CliError::Usage("grid dimensions must be at least 1".into()));
    }
    let spec = GridSpec::new(kind, a.metric.into(), a.seed).with_axes(&a.widths, &a.depths);
    let corpus = load_pairs(&a.source, a.max_pairs)?;
    eprintln!(
        "grid: {} x {} cells over {} pairs",
        a.widths.len(),
        a.depths.len(),
        corpus.len()
    );
    let result = run_grid::<f64>(&corpus, &spec)?;
    for c in result.cells.iter().filter(|c| c.failures > 0) {
        eprintln!(
            "warning: cell ({}, {}): {} failed pairs",
            c.width, c.depth, c.failures
        );
    }
    let mut out = create(&a.out)?;
    write_grid_csv(&mut out, &result)?;
    finish(out, &a.out)
}
