//! Evaluation inputs: a synthetic corpus with controlled Dice values, a
//! generator of listening-history-like profiles, and ingestion of
//! `user \t song \t count` triplet files.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::Path;

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::oracle::Multiset;
use crate::{Error, Result};

/// Two profiles to compare; `left` plays the role of the reference profile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfilePair {
    pub id: String,
    pub left: Multiset,
    pub right: Multiset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyntheticConfig {
    pub seed: u64,
    pub pair_count: usize,
    pub target_unique: usize,
    pub string_length: usize,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            seed: 0,
            pair_count: 1001,
            target_unique: 67,
            string_length: 10,
        }
    }
}

/// One companion multiset and the Dice it achieves against the base.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticPair {
    pub index: usize,
    pub other: Multiset,
    /// Target Dice as an exact fraction `(numerator, denominator)`.
    pub target: (u64, u64),
    /// Oracle Dice of `(base, other)`.
    pub exact_dice: f64,
}

impl SyntheticPair {
    pub fn target_dice(&self) -> f64 {
        self.target.0 as f64 / self.target.1 as f64
    }

    pub fn profile_id(&self) -> String {
        format!("pair-{:04}", self.index)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub config: SyntheticConfig,
    pub base: Multiset,
    /// Sorted by target, ascending.
    pub pairs: Vec<SyntheticPair>,
}

impl SyntheticCorpus {
    pub fn profile_pairs(&self) -> Vec<ProfilePair> {
        self.pairs
            .iter()
            .map(|p| ProfilePair {
                id: p.profile_id(),
                left: self.base.clone(),
                right: p.other.clone(),
            })
            .collect()
    }

    /// Mean distinct count over the base and every companion.
    pub fn mean_distinct(&self) -> f64 {
        let total: usize = self.base.distinct_count()
            + self
                .pairs
                .iter()
                .map(|p| p.other.distinct_count())
                .sum::<usize>();
        total as f64 / (self.pairs.len() + 1) as f64
    }
}

const PRINTABLE: std::ops::RangeInclusive<u8> = 0x21..=0x7e;

struct FreshStrings {
    used: HashSet<Vec<u8>>,
    len: usize,
}

impl FreshStrings {
    fn next(&mut self, rng: &mut ChaCha8Rng) -> Vec<u8> {
        loop {
            let s: Vec<u8> = (0..self.len).map(|_| rng.gen_range(PRINTABLE)).collect();
            if self.used.insert(s.clone()) {
                return s;
            }
        }
    }
}

/// Builds a base multiset `A_r` of random printable-ASCII strings and, for
/// each target `t = i / (pair_count − 1)`, a companion of the same
/// cardinality `T` that shares `round(t · T)` instances with `A_r` and is
/// padded with fresh strings. The achieved Dice is `round(t · T) / T`,
/// recomputed by the oracle. A single pair targets 1.
///
/// Counts are uniform in `1..=2c − 1` with mean `c = ⌈pair_count / (2 ·
/// target_unique)⌉`, and `T` is topped up to at least `pair_count / 2`, so
/// achieved Dice values step by at most `2 / pair_count`.
pub fn generate_synthetic(config: &SyntheticConfig) -> Result<SyntheticCorpus> {
    let SyntheticConfig {
        seed,
        pair_count,
        target_unique,
        string_length,
    } = *config;
    if pair_count == 0 {
        return Err(Error::InvalidParams("pair count must be at least 1".into()));
    }
    if target_unique == 0 || string_length == 0 {
        return Err(Error::InvalidParams(
            "unique entries and string length must be at least 1".into(),
        ));
    }
    let needed = (target_unique as f64) * (pair_count as f64 + 1.0);
    let space = (PRINTABLE.len() as f64).powi(string_length.min(64) as i32);
    if space < 4.0 * needed {
        return Err(Error::Generation(format!(
            "{needed} distinct strings of length {string_length} requested, only {space} exist"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mean_count = pair_count.div_ceil(2 * target_unique).max(1) as u64;
    let max_count = 2 * mean_count - 1;
    let mut fresh = FreshStrings {
        used: HashSet::new(),
        len: string_length,
    };

    let mut base_entries: Vec<(Vec<u8>, u64)> = (0..target_unique)
        .map(|_| (fresh.next(&mut rng), rng.gen_range(1..=max_count)))
        .collect();
    let min_total = pair_count.div_ceil(2) as u64;
    let mut total: u64 = base_entries.iter().map(|(_, c)| c).sum();
    let mut i = 0;
    while total < min_total {
        base_entries[i % target_unique].1 += 1;
        total += 1;
        i += 1;
    }
    let base: Multiset = base_entries.iter().map(|(e, c)| (e, *c)).collect();

    let denominator = (pair_count as u64 - 1).max(1);
    let mut pairs = Vec::with_capacity(pair_count);
    for index in 0..pair_count {
        let numerator = if pair_count == 1 { 1 } else { index as u64 };
        // round(numerator / denominator · total), half up
        let shared = (2 * numerator * total + denominator) / (2 * denominator);

        let mut order = base_entries.clone();
        order.shuffle(&mut rng);
        let mut other = Multiset::new();
        let mut left = shared;
        for (e, c) in order {
            if left == 0 {
                break;
            }
            let take = c.min(left);
            other.insert(&e, take)?;
            left -= take;
        }
        let mut pad = total - shared;
        while pad > 0 {
            let take = rng.gen_range(1..=max_count).min(pad);
            other.insert(fresh.next(&mut rng), take)?;
            pad -= take;
        }
        let exact_dice = base.dice(&other)?;
        pairs.push(SyntheticPair {
            index,
            other,
            target: (numerator, denominator),
            exact_dice,
        });
    }
    Ok(SyntheticCorpus {
        config: *config,
        base,
        pairs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealLikeConfig {
    pub seed: u64,
    pub users: usize,
    pub catalog: usize,
    /// Zipf exponent of song popularity.
    pub popularity_skew: f64,
    pub min_distinct: usize,
    pub max_distinct: usize,
    pub max_plays: u64,
}

impl Default for RealLikeConfig {
    fn default() -> Self {
        RealLikeConfig {
            seed: 0,
            users: 200,
            catalog: 2000,
            popularity_skew: 1.0,
            min_distinct: 50,
            max_distinct: 80,
            max_plays: 12,
        }
    }
}

fn song_id(index: usize) -> String {
    format!("SO{index:016X}")
}

/// Listening profiles drawn from a Zipf-popular catalog; overlapping
/// popular songs give a spread of pairwise similarities. Play counts follow
/// a truncated `1/c` law on `1..=max_plays`.
pub fn generate_real_like(config: &RealLikeConfig) -> Result<BTreeMap<String, Multiset>> {
    if config.users == 0 || config.catalog == 0 || config.min_distinct == 0 {
        return Err(Error::InvalidParams("empty real-like configuration".into()));
    }
    if config.min_distinct > config.max_distinct || config.max_distinct > config.catalog {
        return Err(Error::InvalidParams(
            "need min_distinct <= max_distinct <= catalog".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let popularity = WeightedIndex::new(
        (1..=config.catalog).map(|r| 1.0 / (r as f64).powf(config.popularity_skew)),
    )
    .map_err(|e| Error::InvalidParams(e.to_string()))?;
    let plays = WeightedIndex::new((1..=config.max_plays).map(|c| 1.0 / c as f64))
        .map_err(|e| Error::InvalidParams(e.to_string()))?;

    let mut profiles = BTreeMap::new();
    for u in 0..config.users {
        let distinct = rng.gen_range(config.min_distinct..=config.max_distinct);
        let mut songs = BTreeSet::new();
        while songs.len() < distinct {
            songs.insert(popularity.sample(&mut rng));
        }
        let mut profile = Multiset::new();
        for s in songs {
            profile.insert(song_id(s), plays.sample(&mut rng) as u64 + 1)?;
        }
        profiles.insert(format!("user-{u:05}"), profile);
    }
    Ok(profiles)
}

/// `count` random pairs of distinct users from a real-like population.
pub fn real_like_pairs(config: &RealLikeConfig, count: usize) -> Result<Vec<ProfilePair>> {
    if config.users < 2 {
        return Err(Error::InvalidParams("need at least two users".into()));
    }
    let profiles: Vec<(String, Multiset)> = generate_real_like(config)?.into_iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5041_4952);
    Ok((0..count)
        .map(|_| {
            let picked: Vec<&(String, Multiset)> = profiles.choose_multiple(&mut rng, 2).collect();
            ProfilePair {
                id: format!("{}~{}", picked[0].0, picked[1].0),
                left: picked[0].1.clone(),
                right: picked[1].1.clone(),
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ListeningRecord {
    pub user: String,
    pub song: String,
    pub plays: u64,
}

/// A duplicate `(user, song)` line whose count was merged into an earlier one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DuplicateLine {
    pub line: usize,
    pub first_line: usize,
    pub user: String,
    pub song: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Ingested {
    pub records: Vec<ListeningRecord>,
    pub duplicates: Vec<DuplicateLine>,
}

fn parse_line(line: &str, number: usize) -> Result<ListeningRecord> {
    let err = |message: String| Error::Parse {
        line: number,
        message,
    };
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 3 {
        return Err(err(format!(
            "expected 3 tab-separated fields, found {}",
            fields.len()
        )));
    }
    if fields[0].is_empty() || fields[1].is_empty() {
        return Err(err("empty user or song id".into()));
    }
    let plays: u64 = fields[2]
        .trim()
        .parse()
        .map_err(|_| err(format!("play count `{}` is not an integer", fields[2])))?;
    if plays == 0 {
        return Err(err("play count must be at least 1".into()));
    }
    Ok(ListeningRecord {
        user: fields[0].to_string(),
        song: fields[1].to_string(),
        plays,
    })
}

/// Reads `user \t song \t plays` lines. Blank lines are skipped; the first
/// malformed line aborts with its 1-based line number. Repeated
/// `(user, song)` lines are summed into the first occurrence and reported.
pub fn ingest_triplets<R: BufRead>(reader: R) -> Result<Ingested> {
    let mut out = Ingested::default();
    let mut seen: std::collections::HashMap<(String, String), (usize, usize)> = Default::default();
    for (i, line) in reader.lines().enumerate() {
        let number = i + 1;
        let line = line.map_err(|e| Error::Parse {
            line: number,
            message: e.to_string(),
        })?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() {
            continue;
        }
        let record = parse_line(line, number)?;
        let key = (record.user.clone(), record.song.clone());
        match seen.get(&key) {
            Some(&(index, first_line)) => {
                let plays = &mut out.records[index].plays;
                *plays = plays
                    .checked_add(record.plays)
                    .ok_or(Error::CountOverflow)?;
                out.duplicates.push(DuplicateLine {
                    line: number,
                    first_line,
                    user: key.0,
                    song: key.1,
                });
            }
            None => {
                seen.insert(key, (out.records.len(), number));
                out.records.push(record);
            }
        }
    }
    Ok(out)
}

/// Opens a triplet file, transparently decompressing gzip input.
pub fn open_triplets(path: &Path) -> Result<Box<dyn BufRead>> {
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut magic = [0u8; 2];
    let n = file.read(&mut magic).map_err(|e| Error::io(path, e))?;
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    if n == 2 && magic == [0x1f, 0x8b] {
        Ok(Box::new(BufReader::new(flate2::read::MultiGzDecoder::new(
            file,
        ))))
    } else {
        Ok(Box::new(BufReader::new(file)))
    }
}

/// One multiset per user (song → plays), keeping users with at least
/// `min_distinct` distinct songs.
pub fn build_user_profiles(
    records: &[ListeningRecord],
    min_distinct: usize,
) -> BTreeMap<String, Multiset> {
    let mut profiles: BTreeMap<String, Multiset> = BTreeMap::new();
    for r in records {
        profiles
            .entry(r.user.clone())
            .or_default()
            .insert(&r.song, r.plays)
            .expect("records hold non-empty songs and positive counts");
    }
    profiles.retain(|_, m| m.distinct_count() >= min_distinct);
    profiles
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub users: usize,
    pub distinct_songs: usize,
    pub total_plays: u64,
}

pub fn summarize(profiles: &BTreeMap<String, Multiset>) -> CorpusSummary {
    let songs: BTreeSet<&[u8]> = profiles
        .values()
        .flat_map(|m| m.iter().map(|(e, _)| e))
        .collect();
    CorpusSummary {
        users: profiles.len(),
        distinct_songs: songs.len(),
        total_plays: profiles.values().map(Multiset::cardinality).sum(),
    }
}

fn tsv_field<'a>(bytes: &'a [u8], what: &str) -> Result<&'a str> {
    let s = std::str::from_utf8(bytes)
        .map_err(|_| Error::InvalidParams(format!("{what} is not UTF-8")))?;
    if s.contains(['\t', '\n', '\r']) {
        return Err(Error::InvalidParams(format!(
            "{what} `{s}` contains a tab or newline"
        )));
    }
    Ok(s)
}

/// Writes profiles as `user \t song \t plays` lines, users and songs sorted.
pub fn write_profiles<'a, W: Write>(
    mut out: W,
    profiles: impl IntoIterator<Item = (&'a str, &'a Multiset)>,
) -> Result<()> {
    for (user, m) in profiles {
        let user = tsv_field(user.as_bytes(), "user id")?;
        for (song, plays) in m {
            let song = tsv_field(song, "element")?;
            writeln!(out, "{user}\t{song}\t{plays}").map_err(|e| Error::io("<output>", e))?;
        }
    }
    Ok(())
}

/// Reads a profile TSV back into per-user multisets without filtering.
pub fn read_profiles(path: &Path) -> Result<BTreeMap<String, Multiset>> {
    let ingested = ingest_triplets(open_triplets(path)?)?;
    Ok(build_user_profiles(&ingested.records, 0))
}

pub const MANIFEST_FILE: &str = "manifest.json";
pub const PROFILES_FILE: &str = "profiles.tsv";
pub const BASE_PROFILE: &str = "base";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileStats {
    pub id: String,
    pub distinct: usize,
    pub cardinality: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestPair {
    pub pair_id: usize,
    pub profile: String,
    pub target_dice: f64,
    pub exact_dice: f64,
    pub distinct: usize,
    pub cardinality: u64,
}

/// JSON index of a generated corpus directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub version: u32,
    pub seed: u64,
    pub pair_count: usize,
    pub target_unique: usize,
    pub string_length: usize,
    pub profiles: String,
    pub base: ProfileStats,
    pub pairs: Vec<ManifestPair>,
}

impl CorpusManifest {
    pub fn from_corpus(corpus: &SyntheticCorpus) -> Self {
        CorpusManifest {
            version: 1,
            seed: corpus.config.seed,
            pair_count: corpus.config.pair_count,
            target_unique: corpus.config.target_unique,
            string_length: corpus.config.string_length,
            profiles: PROFILES_FILE.into(),
            base: ProfileStats {
                id: BASE_PROFILE.into(),
                distinct: corpus.base.distinct_count(),
                cardinality: corpus.base.cardinality(),
            },
            pairs: corpus
                .pairs
                .iter()
                .map(|p| ManifestPair {
                    pair_id: p.index,
                    profile: p.profile_id(),
                    target_dice: p.target_dice(),
                    exact_dice: p.exact_dice,
                    distinct: p.other.distinct_count(),
                    cardinality: p.other.cardinality(),
                })
                .collect(),
        }
    }
}

/// Writes `manifest.json` and `profiles.tsv` into `dir`.
pub fn write_corpus(dir: &Path, corpus: &SyntheticCorpus) -> Result<CorpusManifest> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let manifest = CorpusManifest::from_corpus(corpus);
    let profiles_path = dir.join(PROFILES_FILE);
    let file = File::create(&profiles_path).map_err(|e| Error::io(&profiles_path, e))?;
    let mut out = io::BufWriter::new(file);
    let ids: Vec<String> = corpus.pairs.iter().map(SyntheticPair::profile_id).collect();
    let rows = std::iter::once((BASE_PROFILE, &corpus.base)).chain(
        ids.iter()
            .map(String::as_str)
            .zip(corpus.pairs.iter().map(|p| &p.other)),
    );
    write_profiles(&mut out, rows)?;
    out.flush().map_err(|e| Error::io(&profiles_path, e))?;

    let manifest_path = dir.join(MANIFEST_FILE);
    let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    json.push('\n');
    std::fs::write(&manifest_path, json).map_err(|e| Error::io(&manifest_path, e))?;
    Ok(manifest)
}

/// Loads a corpus directory as `(base, companion)` pairs in manifest order.
pub fn load_corpus(dir: &Path) -> Result<(CorpusManifest, Vec<ProfilePair>)> {
    let manifest_path = dir.join(MANIFEST_FILE);
    let text = std::fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let manifest: CorpusManifest = serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line(),
        message: format!("{}: {e}", manifest_path.display()),
    })?;
    let mut profiles = read_profiles(&dir.join(&manifest.profiles))?;
    let base = profiles
        .remove(&manifest.base.id)
        .ok_or_else(|| Error::InvalidParams(format!("profile `{}` missing", manifest.base.id)))?;
    let pairs = manifest
        .pairs
        .iter()
        .map(|p| {
            let right = profiles
                .get(&p.profile)
                .cloned()
                .ok_or_else(|| Error::InvalidParams(format!("profile `{}` missing", p.profile)))?;
            Ok(ProfilePair {
                id: p.profile.clone(),
                left: base.clone(),
                right,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((manifest, pairs))
}

/// All unordered user pairs in id order, at most `limit` of them.
pub fn all_pairs(profiles: &BTreeMap<String, Multiset>, limit: usize) -> Vec<ProfilePair> {
    let users: Vec<(&String, &Multiset)> = profiles.iter().collect();
    let mut out = Vec::new();
    'outer: for (i, (a, x)) in users.iter().enumerate() {
        for (b, y) in &users[i + 1..] {
            if out.len() >= limit {
                break 'outer;
            }
            out.push(ProfilePair {
                id: format!("{a}~{b}"),
                left: (*x).clone(),
                right: (*y).clone(),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64, pair_count: usize) -> SyntheticCorpus {
        generate_synthetic(&SyntheticConfig {
            seed,
            pair_count,
            target_unique: 20,
            string_length: 6,
        })
        .unwrap()
    }

    #[test]
    fn synthetic_endpoints() {
        let c = small(1, 11);
        assert_eq!(c.pairs.len(), 11);
        assert_eq!(c.pairs[0].exact_dice, 0.0);
        assert!(c.pairs[0].other.iter().all(|(e, _)| !c.base.contains(e)));
        assert_eq!(c.pairs[10].exact_dice, 1.0);
        assert_eq!(c.pairs[10].other, c.base);
        for p in &c.pairs {
            assert_eq!(p.other.cardinality(), c.base.cardinality());
            assert_eq!(p.exact_dice, c.base.dice::<f64>(&p.other).unwrap());
            let slack = 1.0 / c.base.cardinality() as f64;
            assert!((p.exact_dice - p.target_dice()).abs() <= slack);
        }
    }

    #[test]
    fn single_pair_targets_identity() {
        let c = small(3, 1);
        assert_eq!(c.pairs.len(), 1);
        assert_eq!(c.pairs[0].exact_dice, 1.0);
    }

    #[test]
    fn synthetic_is_deterministic() {
        assert_eq!(small(5, 30), small(5, 30));
        assert_ne!(small(5, 30).base, small(6, 30).base);
    }

    #[test]
    fn default_shape() {
        let c = generate_synthetic(&SyntheticConfig::default()).unwrap();
        assert_eq!(c.pairs.len(), 1001);
        let mean = c.mean_distinct();
        assert!((60.0..=74.0).contains(&mean), "mean distinct {mean}");
        let mut dice: Vec<f64> = c.pairs.iter().map(|p| p.exact_dice).collect();
        assert!(dice.windows(2).all(|w| w[0] <= w[1]));
        dice.dedup();
        let gap = dice.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        assert!(gap <= 2.0 / 1001.0 + 1e-12, "gap {gap}");
        for (e, _) in &c.base {
            assert_eq!(e.len(), 10);
            assert!(e.iter().all(|b| PRINTABLE.contains(b)));
        }
    }

    #[test]
    fn synthetic_rejects_bad_config() {
        let bad = |pair_count, target_unique, string_length| {
            generate_synthetic(&SyntheticConfig {
                seed: 0,
                pair_count,
                target_unique,
                string_length,
            })
        };
        assert!(bad(0, 10, 5).is_err());
        assert!(bad(10, 0, 5).is_err());
        assert!(matches!(bad(100, 67, 1), Err(Error::Generation(_))));
    }

    #[test]
    fn ingest_examples() {
        let got = ingest_triplets("u1\ts9\t3\n".as_bytes()).unwrap();
        assert_eq!(
            got.records,
            vec![ListeningRecord {
                user: "u1".into(),
                song: "s9".into(),
                plays: 3
            }]
        );
        let err = ingest_triplets("u1\ts1\t2\n\nu1\ts9\t0\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = ingest_triplets("u1\ts9\tx\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = ingest_triplets("u1 s9 3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));

        let text = "a\tx\t1\na\ty\t1\nb\tx\t2\nb\ty\t1\nc\tx\t4\nc\ty\t1\r\n";
        assert_eq!(ingest_triplets(text.as_bytes()).unwrap().records.len(), 6);
    }

    #[test]
    fn duplicates_are_summed() {
        let got = ingest_triplets("u\ts\t2\nu\tt\t1\nu\ts\t5\n".as_bytes()).unwrap();
        assert_eq!(got.records.len(), 2);
        assert_eq!(got.records[0].plays, 7);
        assert_eq!(got.duplicates.len(), 1);
        assert_eq!(got.duplicates[0].line, 3);
        assert_eq!(got.duplicates[0].first_line, 1);
    }

    fn user_with(user: &str, distinct: usize) -> Vec<ListeningRecord> {
        (0..distinct)
            .map(|i| ListeningRecord {
                user: user.into(),
                song: format!("s{i}"),
                plays: 1,
            })
            .collect()
    }

    #[test]
    fn profile_filter_boundary() {
        let mut records = user_with("u49", 49);
        records.extend(user_with("u50", 50));
        let kept = build_user_profiles(&records, 50);
        assert_eq!(kept.keys().collect::<Vec<_>>(), ["u50"]);
        assert_eq!(build_user_profiles(&records, 0).len(), 2);
        let mut last = usize::MAX;
        for min in 0..60 {
            let n = build_user_profiles(&records, min).len();
            assert!(n <= last);
            last = n;
        }
        let s = summarize(&build_user_profiles(&records, 0));
        assert_eq!(
            s,
            CorpusSummary {
                users: 2,
                distinct_songs: 50,
                total_plays: 99
            }
        );
    }

    #[test]
    fn profiles_round_trip_through_tsv() {
        let profiles = generate_real_like(&RealLikeConfig {
            users: 5,
            ..Default::default()
        })
        .unwrap();
        let mut buf = Vec::new();
        write_profiles(&mut buf, profiles.iter().map(|(u, m)| (u.as_str(), m))).unwrap();
        let back = build_user_profiles(&ingest_triplets(&buf[..]).unwrap().records, 0);
        assert_eq!(back, profiles);
        let bad: Multiset = [("a\tb", 1)].into_iter().collect();
        assert!(write_profiles(Vec::new(), [("u", &bad)]).is_err());
    }

    #[test]
    fn real_like_shape() {
        let cfg = RealLikeConfig::default();
        let profiles = generate_real_like(&cfg).unwrap();
        assert_eq!(profiles.len(), cfg.users);
        assert!(profiles
            .values()
            .all(|m| (50..=80).contains(&m.distinct_count())));
        assert_eq!(profiles, generate_real_like(&cfg).unwrap());
        let pairs = real_like_pairs(&cfg, 50).unwrap();
        assert_eq!(pairs.len(), 50);
        assert!(pairs.iter().all(|p| p.left != p.right));
    }

    #[test]
    fn corpus_directory_round_trip() {
        let dir = std::env::temp_dir().join(format!("multisketch-corpus-{}", std::process::id()));
        let corpus = small(9, 15);
        let manifest = write_corpus(&dir, &corpus).unwrap();
        let (loaded, pairs) = load_corpus(&dir).unwrap();
        assert_eq!(loaded, manifest);
        assert_eq!(pairs, corpus.profile_pairs());
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn gzip_input_is_detected() {
        use flate2::{write::GzEncoder, Compression};
        let dir = std::env::temp_dir();
        let path = dir.join(format!("multisketch-{}.tsv.gz", std::process::id()));
        let mut enc = GzEncoder::new(Vec::new(), Compression::default());
        enc.write_all(b"u1\ts1\t4\n").unwrap();
        std::fs::write(&path, enc.finish().unwrap()).unwrap();
        let got = ingest_triplets(open_triplets(&path).unwrap()).unwrap();
        assert_eq!(got.records[0].plays, 4);
        std::fs::remove_file(&path).unwrap();
    }
}
