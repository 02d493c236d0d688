//! Monte Carlo null distributions of `T_k(s)` under `(k+1)`-dimensional
//! standard normal data, their percentile bands, and an on-disk cache.
//!
//! Replicate `r` of a table draws from its own generator stream derived from
//! `(seed, k, r)`, so tables are identical whatever order replicates run in.
//!
//! # Cache file layout
//!
//! One table per file, named `null-k{k}-n{n}-{hash}.txt` where `hash` is the
//! first 16 hex digits of the SHA-256 of [`NullKey::canonical`]:
//!
//! ```text
//! # scaledim null table
//! version = 1
//! k = 1
//! n = 100
//! step_percent = 5.0
//! mode = max-pairwise
//! replicates = 1000
//! seed = 7
//! alpha = 0.05
//! [rows]
//! label,raw_scale_mean,standardized_scale_mean,mean,lower,upper
//! s_min,0.0123,0.0021,1.93,1.71,2.14
//! ...
//! [end]
//! sha256 = <hex digest of every preceding byte>
//! ```

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::DistanceIndex;
use crate::rng::stream_rng;
use crate::scale::{
    canonical_percents, compute_T, compute_angle_field_for, nearest_rank, scale_label,
    NeumaierSum, NormalizerMode, NormalizerTable, ScaleGrid,
};
use crate::synthetic::gaussian_from;

/// Fewest replicates for which bands are produced.
pub const MIN_REPLICATES: usize = 50;

/// Identifies a null table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullKey {
    pub k: usize,
    pub n: usize,
    pub step_percent: f64,
    pub mode: NormalizerMode,
    pub replicates: usize,
    pub seed: u64,
    pub alpha: f64,
}

impl NullKey {
    pub fn canonical(&self) -> String {
        format!(
            "k={};n={};step_percent={:?};mode={};replicates={};seed={};alpha={:?}",
            self.k, self.n, self.step_percent, self.mode, self.replicates, self.seed, self.alpha
        )
    }

    pub fn file_name(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        format!("null-k{}-n{}-{}.txt", self.k, self.n, &hex::encode(digest)[..16])
    }

    fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Parameter("null order k must be >= 1".into()));
        }
        if self.n < self.k + 3 {
            return Err(Error::Parameter(format!(
                "null sample size n = {} must be >= k + 3 = {}",
                self.n,
                self.k + 3
            )));
        }
        if self.replicates < MIN_REPLICATES {
            return Err(Error::Parameter(format!(
                "null needs at least {MIN_REPLICATES} replicates, got {}",
                self.replicates
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Parameter(format!("alpha must be in (0, 1), got {}", self.alpha)));
        }
        canonical_percents(self.step_percent)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NullRow {
    pub percent: f64,
    pub raw_scale_mean: f64,
    pub standardized_scale_mean: f64,
    pub mean: f64,
    pub lower: f64,
    pub upper: f64,
}

impl NullRow {
    pub fn label(&self) -> String {
        scale_label(self.percent)
    }
}

/// Mean and `α/2`, `1 − α/2` percentile curves of `T_k` per grid label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullTable {
    pub key: NullKey,
    pub rows: Vec<NullRow>,
}

impl NullTable {
    pub fn row(&self, percent: f64) -> Option<&NullRow> {
        self.rows.iter().find(|r| r.percent == percent)
    }
}

/// `T_k` of every replicate at every canonical label: `values[label][replicate]`.
pub fn null_replicates(key: &NullKey) -> Result<(Vec<Vec<f64>>, Vec<(f64, f64)>)> {
    key.validate()?;
    let normalizers = NormalizerTable::standard(key.k)?;
    let labels = canonical_percents(key.step_percent)?.len();

    let per_rep: Vec<(Vec<f64>, Vec<(f64, f64)>)> = (0..key.replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(key.seed, ((key.k as u64) << 32) | r as u64);
            let cloud = gaussian_from(&mut rng, key.n, key.k + 1)?;
            let index = DistanceIndex::build(&cloud)?;
            let grid = ScaleGrid::build_full(&index, key.step_percent, key.mode)?;
            let field = compute_angle_field_for(&cloud, &index, &grid, key.k..=key.k)?;
            let t = compute_T(&field, &normalizers)?;
            let values = (0..grid.len())
                .map(|g| {
                    t.value(key.k, g).ok_or_else(|| {
                        Error::DegenerateInput(format!("null replicate {r}: empty T cell"))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let scales = grid.points.iter().map(|p| (p.raw, p.standardized)).collect();
            Ok((values, scales))
        })
        .collect::<Result<_>>()?;

    let mut values = vec![Vec::with_capacity(key.replicates); labels];
    let mut scales = vec![(0.0, 0.0); labels];
    let mut raw_sums = vec![NeumaierSum::default(); labels];
    let mut std_sums = vec![NeumaierSum::default(); labels];
    for (rep_values, rep_scales) in &per_rep {
        for g in 0..labels {
            values[g].push(rep_values[g]);
            raw_sums[g].add(rep_scales[g].0);
            std_sums[g].add(rep_scales[g].1);
        }
    }
    for g in 0..labels {
        scales[g] = (
            raw_sums[g].total() / key.replicates as f64,
            std_sums[g].total() / key.replicates as f64,
        );
    }
    Ok((values, scales))
}

/// Monte Carlo null table for `key`.
pub fn generate_null(key: &NullKey) -> Result<NullTable> {
    let (values, scales) = null_replicates(key)?;
    let percents = canonical_percents(key.step_percent)?;
    let r = key.replicates;
    let lo_rank = nearest_rank(100.0 * key.alpha / 2.0, r);
    let hi_rank = nearest_rank(100.0 * (1.0 - key.alpha / 2.0), r);
    let rows = percents
        .iter()
        .zip(values)
        .zip(scales)
        .map(|((&percent, mut vals), (raw, std))| {
            let mut sum = NeumaierSum::default();
            vals.iter().for_each(|&v| sum.add(v));
            vals.sort_unstable_by(f64::total_cmp);
            NullRow {
                percent,
                raw_scale_mean: raw,
                standardized_scale_mean: std,
                mean: sum.total() / r as f64,
                lower: vals[lo_rank],
                upper: vals[hi_rank],
            }
        })
        .collect();
    Ok(NullTable { key: key.clone(), rows })
}

fn render(table: &NullTable) -> String {
    let k = &table.key;
    let mut body = String::new();
    body.push_str("# scaledim null table\nversion = 1\n");
    body.push_str(&format!(
        "k = {}\nn = {}\nstep_percent = {:?}\nmode = {}\nreplicates = {}\nseed = {}\nalpha = {:?}\n",
        k.k, k.n, k.step_percent, k.mode, k.replicates, k.seed, k.alpha
    ));
    body.push_str("[rows]\nlabel,raw_scale_mean,standardized_scale_mean,mean,lower,upper\n");
    for r in &table.rows {
        body.push_str(&format!(
            "{},{:?},{:?},{:?},{:?},{:?}\n",
            r.label(),
            r.raw_scale_mean,
            r.standardized_scale_mean,
            r.mean,
            r.lower,
            r.upper
        ));
    }
    body.push_str("[end]\n");
    let digest = hex::encode(Sha256::digest(body.as_bytes()));
    body.push_str(&format!("sha256 = {digest}\n"));
    body
}

fn parse_label(label: &str) -> Option<f64> {
    match label {
        "s_min" => Some(0.0),
        "s_max" => Some(100.0),
        other => other.strip_prefix("s_")?.strip_suffix('%')?.parse().ok(),
    }
}

fn parse(text: &str, path: &Path) -> Result<NullTable> {
    let corrupt = |reason: String| Error::CacheIntegrity {
        path: path.to_path_buf(),
        reason,
    };
    let split = text
        .rfind("sha256 = ")
        .ok_or_else(|| corrupt("missing checksum line".into()))?;
    let (body, tail) = text.split_at(split);
    let stored = tail.trim_start_matches("sha256 = ").trim();
    if hex::encode(Sha256::digest(body.as_bytes())) != stored {
        return Err(corrupt("checksum mismatch".into()));
    }

    let mut lines = body.lines();
    if lines.next() != Some("# scaledim null table") {
        return Err(corrupt("missing header".into()));
    }
    let mut fields: HashMap<&str, &str> = HashMap::new();
    for line in lines.by_ref() {
        if line == "[rows]" {
            break;
        }
        let (name, value) = line
            .split_once(" = ")
            .ok_or_else(|| corrupt(format!("malformed key line '{line}'")))?;
        fields.insert(name, value);
    }
    fn field<T: std::str::FromStr>(
        fields: &HashMap<&str, &str>,
        name: &str,
    ) -> std::result::Result<T, String> {
        fields
            .get(name)
            .ok_or_else(|| format!("missing key field '{name}'"))?
            .parse()
            .map_err(|_| format!("unparsable key field '{name}'"))
    }
    if fields.get("version") != Some(&"1") {
        return Err(corrupt("unsupported version".into()));
    }
    let key = (|| -> std::result::Result<NullKey, String> {
        Ok(NullKey {
            k: field(&fields, "k")?,
            n: field(&fields, "n")?,
            step_percent: field(&fields, "step_percent")?,
            mode: fields
                .get("mode")
                .ok_or("missing key field 'mode'")?
                .parse()
                .map_err(|_| "unparsable key field 'mode'".to_string())?,
            replicates: field(&fields, "replicates")?,
            seed: field(&fields, "seed")?,
            alpha: field(&fields, "alpha")?,
        })
    })()
    .map_err(corrupt)?;

    if lines.next() != Some("label,raw_scale_mean,standardized_scale_mean,mean,lower,upper") {
        return Err(corrupt("missing row header".into()));
    }
    let mut rows = Vec::new();
    let mut closed = false;
    for line in lines {
        if line == "[end]" {
            closed = true;
            break;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 6 {
            return Err(corrupt(format!("malformed row '{line}'")));
        }
        let percent = parse_label(cols[0]).ok_or_else(|| corrupt(format!("bad label '{}'", cols[0])))?;
        let num = |i: usize| -> Result<f64> {
            cols[i]
                .parse()
                .map_err(|_| corrupt(format!("non-numeric value '{}'", cols[i])))
        };
        rows.push(NullRow {
            percent,
            raw_scale_mean: num(1)?,
            standardized_scale_mean: num(2)?,
            mean: num(3)?,
            lower: num(4)?,
            upper: num(5)?,
        });
    }
    if !closed {
        return Err(corrupt("truncated row section".into()));
    }
    let expected = canonical_percents(key.step_percent).map_err(|e| corrupt(e.to_string()))?;
    if rows.iter().map(|r| r.percent).ne(expected.iter().copied()) {
        return Err(corrupt("row labels do not match the canonical grid".into()));
    }
    Ok(NullTable { key, rows })
}

/// Writes `table` into `cache_dir`, replacing any previous file atomically.
pub fn store_null(table: &NullTable, cache_dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(cache_dir)?;
    let path = cache_dir.join(table.key.file_name());
    let tmp = cache_dir.join(format!(".{}.{}.tmp", table.key.file_name(), std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(render(table).as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, &path)?;
    Ok(path)
}

/// Loads the table for exactly `key`; `Ok(None)` when no such file exists.
pub fn load_null(key: &NullKey, cache_dir: &Path) -> Result<Option<NullTable>> {
    let path = cache_dir.join(key.file_name());
    let text = match fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let table = parse(&text, &path)?;
    if table.key != *key {
        return Err(Error::CacheIntegrity {
            path,
            reason: format!("file holds key {} instead of {}", table.key.canonical(), key.canonical()),
        });
    }
    Ok(Some(table))
}

/// Supplies null tables to the sequential test.
pub trait NullProvider {
    fn null_table(&self, key: &NullKey) -> Result<NullTable>;
}

/// Fixed set of precomputed tables; never generates.
#[derive(Debug, Default, Clone)]
pub struct PrecomputedNulls {
    tables: HashMap<String, NullTable>,
}

impl PrecomputedNulls {
    pub fn new(tables: impl IntoIterator<Item = NullTable>) -> Self {
        Self {
            tables: tables.into_iter().map(|t| (t.key.canonical(), t)).collect(),
        }
    }

    pub fn insert(&mut self, table: NullTable) {
        self.tables.insert(table.key.canonical(), table);
    }
}

impl NullProvider for PrecomputedNulls {
    fn null_table(&self, key: &NullKey) -> Result<NullTable> {
        self.tables
            .get(&key.canonical())
            .cloned()
            .ok_or_else(|| Error::MissingNull(key.canonical()))
    }
}

/// Memoizing provider backed by an optional cache directory, optionally
/// allowed to generate missing tables (and store them when a cache is set).
#[derive(Debug, Default)]
pub struct NullStore {
    cache_dir: Option<PathBuf>,
    allow_generate: bool,
    memo: Mutex<HashMap<String, NullTable>>,
    cache_hits: AtomicUsize,
    generated: AtomicUsize,
}

impl NullStore {
    pub fn new(cache_dir: Option<PathBuf>, allow_generate: bool) -> Self {
        Self {
            cache_dir,
            allow_generate,
            ..Self::default()
        }
    }

    /// Generates everything in memory, no cache.
    pub fn in_memory() -> Self {
        Self::new(None, true)
    }

    pub fn cache_hits(&self) -> usize {
        self.cache_hits.load(Ordering::Relaxed)
    }

    pub fn generated(&self) -> usize {
        self.generated.load(Ordering::Relaxed)
    }
}

impl NullProvider for NullStore {
    fn null_table(&self, key: &NullKey) -> Result<NullTable> {
        let canonical = key.canonical();
        if let Some(t) = self.memo.lock().expect("memo lock").get(&canonical) {
            return Ok(t.clone());
        }
        let table = match self.cache_dir.as_deref().map(|d| load_null(key, d)).transpose()?.flatten() {
            Some(t) => {
                log::info!("null cache hit: {canonical}");
                self.cache_hits.fetch_add(1, Ordering::Relaxed);
                t
            }
            None if self.allow_generate => {
                log::info!("generating null table: {canonical}");
                let t = generate_null(key)?;
                self.generated.fetch_add(1, Ordering::Relaxed);
                if let Some(dir) = &self.cache_dir {
                    store_null(&t, dir)?;
                }
                t
            }
            None => return Err(Error::MissingNull(canonical)),
        };
        self.memo
            .lock()
            .expect("memo lock")
            .insert(canonical, table.clone());
        Ok(table)
    }
}
