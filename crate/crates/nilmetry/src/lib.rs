//! Computational toolkit for simply connected graded nilpotent Lie groups
//! in exponential coordinates.
//!
//! The crate builds groups from structure constants ([`algebra`]), measures
//! them with homogeneous quasi-metrics and optimization-based distance
//! bounds ([`metrics`], [`distance`]), constructs shear maps, affine maps
//! and their quasiisometry constants ([`maps`]), implements the special
//! maps of the 3-dimensional Heisenberg group — the inversion, its
//! conjugates, and Lipschitz lifts of planar maps ([`heisenberg`],
//! [`lift`]) — and verifies their metric properties empirically through a
//! deterministic seeded sampling harness with CSV reports ([`harness`],
//! [`report`]).
//!
//! Sampling loops run data-parallel on rayon by default; building with
//! `--no-default-features` switches in a sequential fallback with identical
//! (bitwise) results.

pub mod algebra;
pub mod distance;
pub mod error;
pub mod exec;
pub mod expr;
pub mod harness;
pub mod heisenberg;
pub mod lift;
pub mod maps;
pub mod metrics;
pub mod numeric;
pub mod report;
pub mod sample;

pub use algebra::{
    load_algebra, make_builtin, parse_algebra, validate_algebra, GradedLieAlgebra, GroupPoint,
    RawEntry, ValidationIssue, ValidationReport, BUILTIN_NAMES,
};
pub use distance::{
    ball_box_diagnostic, distance_upper_bound, riemannian_path_length, BallBoxReport,
    DistanceMode, DistanceOptions, DistanceResult, PathSpec,
};
pub use error::{Error, Result};
pub use expr::{parse_map_expr, parse_planar, CompiledMap, MapTerm};
pub use harness::{
    cone_convergence, fit_ls_envelope, hausdorff_estimate, qi_verify, ConvergenceReport,
    EnvelopeFit, QIReport,
};
pub use heisenberg::{
    boundary_d2, f_lambda, h_inv, h_mul, inversion_conjugate, inversion_j, line_image_analysis,
    BoundaryPoint, HPoint, LineImageReport, VerticalLine,
};
pub use lift::{
    det_estimate, discrete_curl, lift_gradient, LiftedMap, PlanarMap, QuadratureConfig,
};
pub use maps::{
    automorphism_validate, builtin_ls_family, cone_deviation_bound, cone_rescaled_shear,
    dilation_matrix, linear_distance_classifier, linear_shear_matrix, qi_constants_bound,
    shear_affine_defect, shear_apply, shear_compose, AutomorphismReport, GrowthReport, LsMap,
    QuasiMap,
};
pub use metrics::{
    estimate_triangle_constant, koranyi_distance, koranyi_gauge, HomogeneousGauge,
    TriangleConstantEstimate,
};
pub use report::{
    fmt_f64, write_report, CsvReport, EstimatorReport, EstimatorRow, FoliationReport,
    FoliationRow, LiftReport, LiftRow,
};
pub use sample::{
    balanced_grid_counts, carnot_box_grid, DomainShape, PairMode, PointSampler, SamplerConfig,
};
