//! End-to-end analysis: configuration, orchestration and report output.
//!
//! The report is JSON. Plot tables are CSV, one row per grid label:
//!
//! * `plot_k{k}.csv`: `label,percent,standardized_scale,raw_scale,t,null_mean,lower,upper,relation`
//!   for every order `k` tried (`relation` is empty where order `k` was not tried).
//! * `profile.csv`: `label,percent,standardized_scale,raw_scale,accepted_k,effective_dimension,relation,unresolved_at_least,reliable`.
//!
//! Numbers in both outputs use the shortest representation that parses
//! back to the same `f64`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::dim_test::{sequential_test, DimensionProfile, TestConfig};
use crate::error::{Error, Result};
use crate::geometry::DistanceIndex;
use crate::io::{ingest_csv, CsvOptions};
use crate::null::{NullStore, NullTable};
use crate::scale::{
    default_k_max, max_order, scale_label, NormalizerMode, NormalizerTable, Provenance, ScaleGrid,
    TCell,
};
use crate::synthetic::GeneratorSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DataSource {
    Csv {
        path: PathBuf,
        #[serde(default)]
        options: CsvOptions,
    },
    Generator {
        spec: GeneratorSpec,
    },
}

impl DataSource {
    pub fn load(&self) -> Result<PointCloud> {
        match self {
            DataSource::Csv { path, options } => ingest_csv(path, *options),
            DataSource::Generator { spec } => spec.generate(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub source: DataSource,
    pub step_percent: f64,
    pub mode: NormalizerMode,
    pub alpha: f64,
    pub replicates: usize,
    /// Defaults to `min(d - 1, n - 2, 10)`.
    pub k_max: Option<usize>,
    /// Seed of the null replicates.
    pub seed: u64,
    #[serde(default)]
    pub bonferroni: bool,
    pub cache_dir: Option<PathBuf>,
    /// Generate null tables that are neither cached nor precomputed.
    pub generate_nulls: bool,
}

impl AnalysisConfig {
    pub fn new(source: DataSource) -> Self {
        Self {
            source,
            step_percent: 5.0,
            mode: NormalizerMode::MaxPairwise,
            alpha: 0.05,
            replicates: 1000,
            k_max: None,
            seed: 0,
            bonferroni: false,
            cache_dir: None,
            generate_nulls: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let DataSource::Csv { path, .. } = &self.source {
            if !path.is_file() {
                return Err(Error::Input {
                    path: path.clone(),
                    reason: "input file does not exist".into(),
                });
            }
        }
        if let Some(dir) = &self.cache_dir {
            if dir.exists() && !dir.is_dir() {
                return Err(Error::Parameter(format!(
                    "cache path {} is not a directory",
                    dir.display()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSummary {
    pub n: usize,
    pub d: usize,
    pub s_min: f64,
    pub s_max: f64,
    pub duplicate_pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizerEntry {
    pub k: usize,
    pub a_k: f64,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderCurve {
    pub k: usize,
    pub cells: Vec<TCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub unreliable_cells: usize,
    pub unavailable_cells: usize,
    pub timing_ms: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub tool: String,
    pub version: String,
    pub config: AnalysisConfig,
    pub k_max: usize,
    pub data: DataSummary,
    pub grid: ScaleGrid,
    pub normalizers: Vec<NormalizerEntry>,
    /// `T_k` curves for every order tried.
    pub t_curves: Vec<OrderCurve>,
    pub nulls: Vec<NullTable>,
    pub profile: DimensionProfile,
    pub diagnostics: Diagnostics,
}

impl AnalysisReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Input {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        Self::from_json(&text).map_err(|e| Error::Input {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
    }

    /// Copy with timing fields cleared, for comparing runs.
    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        r.diagnostics.timing_ms.clear();
        r
    }

    pub fn curve(&self, k: usize) -> Option<&OrderCurve> {
        self.t_curves.iter().find(|c| c.k == k)
    }

    pub fn null(&self, k: usize) -> Option<&NullTable> {
        self.nulls.iter().find(|t| t.key.k == k)
    }
}

/// Runs the full pipeline with a [`NullStore`] built from the config.
pub fn run_analyze(config: &AnalysisConfig) -> Result<AnalysisReport> {
    let store = NullStore::new(config.cache_dir.clone(), config.generate_nulls);
    run_analyze_with(config, &store)
}

pub fn run_analyze_with(
    config: &AnalysisConfig,
    nulls: &dyn crate::null::NullProvider,
) -> Result<AnalysisReport> {
    config.validate()?;
    let mut timing = BTreeMap::new();
    let mut clock = Instant::now();
    let mut lap = |name: &str, timing: &mut BTreeMap<String, f64>| {
        timing.insert(name.to_string(), clock.elapsed().as_secs_f64() * 1e3);
        clock = Instant::now();
    };

    let cloud = config.source.load()?;
    lap("load", &mut timing);
    let k_max = match config.k_max {
        Some(k) if k >= 1 && k <= max_order(&cloud) => k,
        Some(k) => {
            return Err(Error::Parameter(format!(
                "k_max = {k} outside 1..={}",
                max_order(&cloud)
            )))
        }
        None => default_k_max(&cloud),
    };
    let index = DistanceIndex::build(&cloud)?;
    let grid = ScaleGrid::build(&index, config.step_percent, config.mode)?;
    lap("index", &mut timing);

    let cfg = TestConfig {
        alpha: config.alpha,
        k_max,
        replicates: config.replicates,
        seed: config.seed,
        bonferroni: config.bonferroni,
    };
    let outcome = sequential_test(&cloud, &index, &grid, nulls, &cfg)?;
    lap("test", &mut timing);

    let tried = outcome.max_order_tried();
    let normalizers = NormalizerTable::standard(k_max)?;
    let t_curves: Vec<OrderCurve> = (1..=tried)
        .map(|k| OrderCurve {
            k,
            cells: (0..grid.len()).map(|g| outcome.t.cell(k, g)).collect(),
        })
        .collect();
    let cells = t_curves.iter().flat_map(|c| c.cells.iter());
    let unreliable_cells = cells.clone().filter(|c| !c.reliable).count();
    let unavailable_cells = cells.filter(|c| c.value.is_none()).count();

    Ok(AnalysisReport {
        tool: "scaledim".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: config.clone(),
        k_max,
        data: DataSummary {
            n: cloud.len(),
            d: cloud.dim(),
            s_min: index.s_min(),
            s_max: index.s_max(),
            duplicate_pairs: index.duplicates().len(),
        },
        normalizers: normalizers
            .iter()
            .filter(|(k, _)| *k <= tried)
            .map(|(k, e)| NormalizerEntry {
                k,
                a_k: e.value,
                provenance: e.provenance,
            })
            .collect(),
        grid,
        t_curves,
        nulls: outcome.nulls,
        profile: outcome.profile,
        diagnostics: Diagnostics {
            unreliable_cells,
            unavailable_cells,
            timing_ms: timing,
        },
    })
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// Flat CSV tables `(file name, contents)` for plotting.
pub fn plot_tables(report: &AnalysisReport) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for curve in &report.t_curves {
        let k = curve.k;
        let null = report.null(k);
        let mut csv = String::from(
            "label,percent,standardized_scale,raw_scale,t,null_mean,lower,upper,relation\n",
        );
        for (gp, cell) in report.grid.points.iter().zip(&curve.cells) {
            let row = null.and_then(|t| t.row(gp.percent));
            let relation = report
                .profile
                .verdict(gp.percent)
                .and_then(|v| v.trials.iter().find(|t| t.k == k))
                .map_or("", |t| t.relation.as_str());
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                scale_label(gp.percent),
                num(gp.percent),
                num(gp.standardized),
                num(gp.raw),
                opt(cell.value),
                opt(row.map(|r| r.mean)),
                opt(row.map(|r| r.lower)),
                opt(row.map(|r| r.upper)),
                relation
            ));
        }
        out.push((format!("plot_k{k}.csv"), csv));
    }

    let mut csv = String::from(
        "label,percent,standardized_scale,raw_scale,accepted_k,effective_dimension,relation,unresolved_at_least,reliable\n",
    );
    for v in &report.profile.verdicts {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            v.label,
            num(v.percent),
            num(v.standardized_scale),
            num(v.raw_scale),
            v.accepted_k.map(|k| k.to_string()).unwrap_or_default(),
            opt(v.effective_dimension),
            v.relation().map_or("", |r| r.as_str()),
            v.unresolved_at_least.map(|k| k.to_string()).unwrap_or_default(),
            v.reliable
        ));
    }
    out.push(("profile.csv".into(), csv));
    out
}

pub fn write_plot_tables(report: &AnalysisReport, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    plot_tables(report)
        .into_iter()
        .map(|(name, contents)| {
            let path = dir.join(name);
            std::fs::write(&path, contents)?;
            Ok(path)
        })
        .collect()
}
