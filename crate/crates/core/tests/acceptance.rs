//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any criterion fails.
//!
//! Set `MULTISKETCH_TASTE_PROFILE` to the original filtered taste-profile
//! triplet file to additionally check its published corpus counts.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use multisketch::datasets::{
    build_user_profiles, generate_synthetic, ingest_triplets, open_triplets, real_like_pairs,
    summarize, ProfilePair, RealLikeConfig, SyntheticConfig,
};
use multisketch::experiments::{
    mean_error_where, rmse, run_pairwise, threshold_report, GridSpec, SketchSpec,
};
use multisketch::hashing::HashFamily;
use multisketch::metrics::{self, Metric};
use multisketch::oracle::Multiset;
use multisketch::sketches::{
    AnySketch, BloomFilter, CmsParams, CountMinSketch, CountingBloomFilter, FilterParams,
    SketchKind,
};
use multisketch::wire;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CORPUS_SEED: u64 = 7;
const HASH_SEED: u64 = 0;
const OVERESTIMATION_SLACK: f64 = -1e-12;
const EXACTNESS_TOLERANCE: f64 = 1e-12;
const DEPTH_INSENSITIVITY: f64 = 0.25;
const LENGTH_INVERSION_LIMIT: f64 = 0.10;
const RELEVANCE_THRESHOLD: f64 = 0.6;
const MIN_FALSE_POSITIVE_TRUTH: f64 = 0.45;

type Outcome = Result<String, String>;
type Criterion<'a> = Box<dyn Fn() -> Outcome + 'a>;

struct Fixtures {
    synthetic: Vec<ProfilePair>,
    mean_distinct: f64,
    real_like: Vec<ProfilePair>,
}

fn fixtures() -> Fixtures {
    let corpus = generate_synthetic(&SyntheticConfig {
        seed: CORPUS_SEED,
        ..Default::default()
    })
    .expect("synthetic corpus");
    let real_like = real_like_pairs(
        &RealLikeConfig {
            seed: CORPUS_SEED,
            ..Default::default()
        },
        500,
    )
    .expect("real-like pairs");
    Fixtures {
        synthetic: corpus.profile_pairs(),
        mean_distinct: corpus.mean_distinct(),
        real_like,
    }
}

fn random_multiset(rng: &mut ChaCha8Rng, max_distinct: usize) -> Multiset {
    let mut m = Multiset::new();
    let distinct = rng.gen_range(1..=max_distinct);
    while m.distinct_count() < distinct {
        let s: String = (0..10)
            .map(|_| rng.gen_range(0x21u8..=0x7e) as char)
            .collect();
        if !m.contains(&s) {
            m.insert(s, rng.gen_range(1..=12)).unwrap();
        }
    }
    m
}

fn cbf_rmse(corpus: &[ProfilePair], len: u32, k: u32) -> f64 {
    let spec = SketchSpec::new(SketchKind::Counting, len, k, HASH_SEED).unwrap();
    let run = run_pairwise::<f64>(corpus, spec, Metric::Dice).unwrap();
    assert!(run.failures.is_empty());
    rmse(&run.results).unwrap()
}

fn cms_rmse(corpus: &[ProfilePair], width: u32, depth: u32) -> f64 {
    let spec = SketchSpec::new(SketchKind::CountMin, width, depth, HASH_SEED).unwrap();
    let run = run_pairwise::<f64>(corpus, spec, Metric::Dice).unwrap();
    assert!(run.failures.is_empty());
    rmse(&run.results).unwrap()
}

fn c1_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let sets: Vec<Multiset> = (0..100).map(|_| random_multiset(&mut rng, 120)).collect();
    let mut checked = 0;
    for n in [64u32, 128, 400] {
        let seed = rng.gen();
        let fp = FilterParams::new(n, 1, seed).unwrap();
        let cp = CmsParams::new(n, 1, seed).unwrap();
        let cbfs: Vec<_> = sets
            .iter()
            .map(|m| CountingBloomFilter::from_multiset(m, fp))
            .collect();
        let cmss: Vec<_> = sets
            .iter()
            .map(|m| CountMinSketch::from_multiset(m, cp))
            .collect();
        for (p, r) in cbfs.iter().zip(&cmss) {
            if p.counters() != r.row(0) {
                return Err(format!("counter vectors differ at n={n}"));
            }
        }
        for i in 0..sets.len() {
            let j = (i + 1) % sets.len();
            let a: f64 = metrics::cbf_dice(&cbfs[i], &cbfs[j]).unwrap();
            let b: f64 = metrics::cms_dice(&cmss[i], &cmss[j]).unwrap();
            if a.to_bits() != b.to_bits() {
                return Err(format!("n={n} pair {i}: cbf_dice {a} != cms_dice {b}"));
            }
            checked += 1;
        }
    }
    Ok(format!(
        "100 multisets x 3 lengths bit-identical, {checked} dice pairs equal"
    ))
}

fn c2_overestimation(f: &Fixtures) -> Outcome {
    let corpus: Vec<&ProfilePair> = f.synthetic.iter().chain(&f.real_like).collect();
    let mut worst = f64::INFINITY;
    let mut comparisons = 0usize;
    for &w in &GridSpec::DEFAULT_WIDTHS {
        for &d in &GridSpec::DEFAULT_DEPTHS {
            let fp = FilterParams::new(w, d, HASH_SEED).unwrap();
            let cp = CmsParams::new(w, d, HASH_SEED).unwrap();
            for pair in &corpus {
                let truth: f64 = pair.left.dice(&pair.right).unwrap();
                let p = CountingBloomFilter::from_multiset(&pair.left, fp);
                let q = CountingBloomFilter::from_multiset(&pair.right, fp);
                let r = CountMinSketch::from_multiset(&pair.left, cp);
                let s = CountMinSketch::from_multiset(&pair.right, cp);
                for est in [
                    metrics::cbf_dice::<f64>(&p, &q).unwrap(),
                    metrics::cms_dice::<f64>(&r, &s).unwrap(),
                ] {
                    let diff = est - truth;
                    worst = worst.min(diff);
                    if diff < OVERESTIMATION_SLACK {
                        return Err(format!(
                            "{} (w={w}, d/k={d}): {est} < truth {truth}",
                            pair.id
                        ));
                    }
                    comparisons += 1;
                }
            }
        }
    }
    Ok(format!(
        "{comparisons} estimates, min(estimate - truth) = {worst:e}"
    ))
}

fn c3_hash_count_penalty(f: &Fixtures) -> Outcome {
    let mut lines = Vec::new();
    for n in [128u32, 256, 400] {
        let r: HashMap<u32, f64> = [1, 2, 4, 8]
            .iter()
            .map(|&k| (k, cbf_rmse(&f.synthetic, n, k)))
            .collect();
        lines.push(format!(
            "n={n}: k1 {:.4} k2 {:.4} k4 {:.4} k8 {:.4}",
            r[&1], r[&2], r[&4], r[&8]
        ));
        if r[&4].partial_cmp(&r[&1]).is_none_or(|o| o.is_lt())
            || r[&8].partial_cmp(&r[&2]).is_none_or(|o| o.is_lt())
        {
            return Err(lines.join("; "));
        }
    }
    Ok(lines.join("; "))
}

fn c4_length_benefit(f: &Fixtures) -> Outcome {
    let lengths = [64u32, 128, 256, 512, 1024];
    let r: Vec<f64> = lengths
        .iter()
        .map(|&n| cbf_rmse(&f.synthetic, n, 1))
        .collect();
    let shown = lengths
        .iter()
        .zip(&r)
        .map(|(n, v)| format!("{n}:{v:.4}"))
        .collect::<Vec<_>>()
        .join(" ");
    let inversions: Vec<f64> = r
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| (w[1] - w[0]) / w[0])
        .collect();
    if inversions.len() > 1 || inversions.iter().any(|&rel| rel >= LENGTH_INVERSION_LIMIT) {
        return Err(format!("{shown}; inversions {inversions:?}"));
    }
    Ok(format!("{shown}; {} inversion(s)", inversions.len()))
}

fn c5_depth_insensitivity(f: &Fixtures) -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for w in [200u32, 400] {
        let d1 = cms_rmse(&f.synthetic, w, 1);
        let d10 = cms_rmse(&f.synthetic, w, 10);
        let rel = (d10 - d1).abs() / d1;
        ok &= rel <= DEPTH_INSENSITIVITY;
        lines.push(format!("w={w}: d1 {d1:.4} d10 {d10:.4} rel {rel:.3}"));
    }
    if ok {
        Ok(lines.join("; "))
    } else {
        Err(lines.join("; "))
    }
}

fn c6_recommended_configuration(f: &Fixtures) -> Outcome {
    if !(60.0..=74.0).contains(&f.mean_distinct) {
        return Err(format!(
            "mean distinct {} outside [60, 74]",
            f.mean_distinct
        ));
    }
    let spec = SketchSpec::new(SketchKind::Counting, 128, 1, HASH_SEED).unwrap();
    let run = run_pairwise::<f64>(&f.synthetic, spec, Metric::Dice).unwrap();
    let report = threshold_report(&run.results, RELEVANCE_THRESHOLD).unwrap();
    let high = mean_error_where(&run.results, |t| t >= RELEVANCE_THRESHOLD).unwrap();
    let low = mean_error_where(&run.results, |t| t < 0.2).unwrap();
    let lowest_fp = report.min_false_positive_truth;
    let summary = format!(
        "mean distinct {:.1}; tp {} fp {} tn {} fn {}; lowest FP truth {:?}; max overshoot {:?}; mean error truth>=0.6 {high:.4} vs <0.2 {low:.4}",
        f.mean_distinct,
        report.true_positives,
        report.false_positives,
        report.true_negatives,
        report.false_negatives,
        lowest_fp,
        report.max_overshoot,
    );
    let fp_ok = lowest_fp.is_none_or(|t| t >= MIN_FALSE_POSITIVE_TRUTH);
    if report.false_negatives == 0 && fp_ok && high < low {
        Ok(summary)
    } else {
        Err(summary)
    }
}

fn c7_dice_vs_cosine(f: &Fixtures) -> Outcome {
    let params = CmsParams::new(400, 10, HASH_SEED).unwrap();
    let mut max_gap = 0f64;
    let mut max_oracle_gap = 0f64;
    for pair in &f.synthetic {
        let r = CountMinSketch::from_multiset(&pair.left, params);
        let s = CountMinSketch::from_multiset(&pair.right, params);
        let dice: f64 = metrics::cms_dice(&r, &s).unwrap();
        let cos: f64 = metrics::cms_cosine(&r, &s).unwrap();
        max_gap = max_gap.max((dice - cos).abs());
        let od: f64 = pair.left.dice(&pair.right).unwrap();
        let oc: f64 = pair.left.cosine(&pair.right).unwrap();
        max_oracle_gap = max_oracle_gap.max((od - oc).abs());
    }
    // exact agreement on identity and disjoint pairs
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let x = random_multiset(&mut rng, 40);
        let y = random_multiset(&mut rng, 40);
        let (xd, xc) = (x.dice::<f64>(&x).unwrap(), x.cosine::<f64>(&x).unwrap());
        if xd != 1.0 || xc != 1.0 {
            return Err(format!("identity: dice {xd}, cosine {xc}"));
        }
        let disjoint = x.iter().all(|(e, _)| !y.contains(e));
        let (d, c) = (x.dice::<f64>(&y).unwrap(), x.cosine::<f64>(&y).unwrap());
        if disjoint && (d != 0.0 || c != 0.0) {
            return Err(format!("disjoint: dice {d}, cosine {c}"));
        }
    }
    Ok(format!(
        "report only: max |CMS-Dice - CMS-cosSim| = {max_gap:.4} (oracle max |Dice - cosine| = {max_oracle_gap:.4}); identity/disjoint cases agree exactly"
    ))
}

fn c8_wire_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..1000 {
        let m = random_multiset(&mut rng, 50);
        let width = rng.gen_range(1..300);
        let depth = rng.gen_range(1..8);
        let seed = rng.gen();
        let sketch: AnySketch = match i % 3 {
            0 => BloomFilter::from_multiset(&m, FilterParams::new(width, depth, seed).unwrap())
                .into(),
            1 => CountingBloomFilter::from_multiset(
                &m,
                FilterParams::new(width, depth, seed).unwrap(),
            )
            .into(),
            _ => CountMinSketch::from_multiset(&m, CmsParams::new(width, depth, seed).unwrap())
                .into(),
        };
        let bytes = wire::encode(&sketch);
        let decoded = wire::decode(&bytes).map_err(|e| format!("sketch {i}: {e}"))?;
        if decoded.sketch != sketch || wire::encode(&decoded.sketch) != bytes {
            return Err(format!("sketch {i} did not round-trip"));
        }
    }
    let empty = CountingBloomFilter::new(FilterParams::new(128, 1, 0).unwrap());
    let len = wire::encode(&empty).len();
    if len != 539 {
        return Err(format!("CBF n=128 envelope is {len} bytes"));
    }
    Ok("1000 sketches round-trip bit-identically; CBF n=128 envelope = 539 bytes".into())
}

fn c9_real_data_pipeline() -> Outcome {
    let path =
        Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/taste_profile_50users.tsv");
    let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
    // naive oracle straight from the raw lines
    let mut songs_by_user: BTreeMap<&str, HashSet<&str>> = BTreeMap::new();
    for line in text.lines().filter(|l| !l.is_empty()) {
        let mut parts = line.split('\t');
        let (user, song) = (parts.next().unwrap(), parts.next().unwrap());
        songs_by_user.entry(user).or_default().insert(song);
    }
    let expected: Vec<&str> = songs_by_user
        .iter()
        .filter(|(_, s)| s.len() >= 50)
        .map(|(u, _)| *u)
        .collect();
    let ingested = ingest_triplets(open_triplets(&path).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let profiles = build_user_profiles(&ingested.records, 50);
    let kept: Vec<&str> = profiles.keys().map(String::as_str).collect();
    if songs_by_user.len() != 50 || kept != expected {
        return Err(format!(
            "kept {} users, oracle expects {}",
            kept.len(),
            expected.len()
        ));
    }
    let mut note = format!(
        "fixture: {} of 50 users kept, matching the oracle",
        kept.len()
    );
    match std::env::var_os("MULTISKETCH_TASTE_PROFILE") {
        Some(original) => {
            let ingested =
                ingest_triplets(open_triplets(Path::new(&original)).map_err(|e| e.to_string())?)
                    .map_err(|e| e.to_string())?;
            let s = summarize(&build_user_profiles(&ingested.records, 50));
            if (s.users, s.distinct_songs, s.total_plays) != (1865, 14867, 122_389) {
                return Err(format!("{note}; original subset gave {s:?}"));
            }
            note.push_str("; original subset reproduces 1865/14867/122389");
        }
        None => note.push_str("; published counts skipped (MULTISKETCH_TASTE_PROFILE unset)"),
    }
    Ok(note)
}

fn collision_free_seed(elements: &[&[u8]], len: u32, hashes: u32) -> Option<u64> {
    (0u64..100_000).find(|&seed| {
        let f = HashFamily::new(seed, hashes, len).unwrap();
        let mut seen = HashSet::new();
        elements.iter().all(|e| {
            let own: HashSet<usize> = f.positions(e).collect();
            own.into_iter().all(|p| seen.insert(p))
        })
    })
}

fn c10_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = 0f64;
    for i in 0..100 {
        let universe: Vec<String> = (0..16).map(|j| format!("el-{i}-{j}")).collect();
        let pick = |rng: &mut ChaCha8Rng| -> Multiset {
            let mut m = Multiset::new();
            for e in &universe {
                if rng.gen_bool(0.5) {
                    m.insert(e, rng.gen_range(1..=9)).unwrap();
                }
            }
            if m.is_empty() {
                m.insert(&universe[0], 1).unwrap();
            }
            m
        };
        let (x, y) = (pick(&mut rng), pick(&mut rng));
        let elements: Vec<&[u8]> = universe.iter().map(|s| s.as_bytes()).collect();
        let k = 1 + (i % 2) as u32;
        let seed = collision_free_seed(&elements, 128, k).ok_or("no collision-free seed found")?;
        let fp = FilterParams::new(128, k, seed).unwrap();
        let est: f64 = metrics::cbf_dice(
            &CountingBloomFilter::from_multiset(&x, fp),
            &CountingBloomFilter::from_multiset(&y, fp),
        )
        .unwrap();
        let truth: f64 = x.dice(&y).unwrap();
        worst = worst.max((est - truth).abs());
        if (est - truth).abs() > EXACTNESS_TOLERANCE {
            return Err(format!("pair {i}: {est} vs {truth}"));
        }
    }
    Ok(format!("100 pairs, max |cbf_dice - dice| = {worst:e}"))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let f = fixtures();
    let criteria: Vec<(&str, Criterion<'_>)> = vec![
        ("C1 equivalence", Box::new(c1_equivalence)),
        ("C2 overestimation", Box::new(|| c2_overestimation(&f))),
        (
            "C3 hash-count penalty",
            Box::new(|| c3_hash_count_penalty(&f)),
        ),
        ("C4 length benefit", Box::new(|| c4_length_benefit(&f))),
        (
            "C5 depth insensitivity",
            Box::new(|| c5_depth_insensitivity(&f)),
        ),
        (
            "C6 recommended configuration",
            Box::new(|| c6_recommended_configuration(&f)),
        ),
        ("C7 dice vs cosine", Box::new(|| c7_dice_vs_cosine(&f))),
        ("C8 wire round-trip", Box::new(c8_wire_round_trip)),
        ("C9 real-data pipeline", Box::new(c9_real_data_pipeline)),
        ("C10 exactness oracle", Box::new(c10_exactness)),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        let t = Instant::now();
        match check() {
            Ok(detail) => println!("PASS {name} ({:.1?}): {detail}", t.elapsed()),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name} ({:.1?}): {detail}", t.elapsed());
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1?}",
        criteria.len() - failed,
        start.elapsed()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
