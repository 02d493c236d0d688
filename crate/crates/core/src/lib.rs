//! Scale-space estimation of the effective (intrinsic) dimension of a point cloud.
//!
//! For every point and every scale `s`, neighbors are ranked by their
//! closeness to the sphere of radius `s` around the point. The angle between
//! the `(k+1)`-th neighbor direction and the span of the first `k` neighbor
//! directions, averaged over points and rescaled, gives
//! `T_k(s) = k + mean θ^k(s) / a_k`, a real-valued dimension estimate at
//! scale `s`. Comparing `T_k(s)` against Monte Carlo bands of
//! `(k+1)`-dimensional Gaussian data yields an effective-dimension profile
//! over all scales.
//!
//! ```no_run
//! use scaledim::{gen_circle, DistanceIndex, NormalizerMode, NullStore, ScaleGrid, TestConfig};
//!
//! let cloud = gen_circle(100, 2, 7)?;
//! let index = DistanceIndex::build(&cloud)?;
//! let grid = ScaleGrid::build(&index, 5.0, NormalizerMode::MaxPairwise)?;
//! let nulls = NullStore::in_memory();
//! let outcome = scaledim::sequential_test(&cloud, &index, &grid, &nulls, &TestConfig::new(1, 1000, 1))?;
//! for v in &outcome.profile.verdicts {
//!     println!("{:>6}  {}", v.label, v.summary());
//! }
//! # Ok::<(), scaledim::Error>(())
//! ```

pub mod analysis;
pub mod cloud;
pub mod error;
pub mod geometry;
pub mod io;
pub mod null;
pub mod rng;
pub mod scale;
pub mod synthetic;

pub use analysis::{plot_tables, run_analyze, AnalysisConfig, AnalysisReport, DataSource};
pub use cloud::PointCloud;
pub use dim_test::{
    sequential_test, sequential_test_profile, BandRelation, DimensionProfile, ScaleVerdict,
    TestConfig,
};
pub use error::{Error, Result};
pub use geometry::{angle, DistanceIndex, NeighborSelection, Projector};
pub use io::{ingest_csv, CsvOptions};
pub use null::{generate_null, load_null, store_null, NullKey, NullProvider, NullStore, NullTable};
pub use scale::{
    compute_T, compute_angle_field, compute_normalizer, AngleField, NormalizerMethod,
    NormalizerMode, NormalizerTable, ScaleGrid, TProfile,
};
pub use synthetic::{
    gen_circle, gen_gaussian, gen_henon, gen_line_toy, gen_swiss_roll, GeneratorSpec,
};
