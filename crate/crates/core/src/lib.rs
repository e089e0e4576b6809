//! Controllability and control sets of planar single-input linear systems
//! `v' = A v + u ζ` with a bounded scalar control `u ∈ [u⁻, u⁺]`.
//!
//! Systems with real eigenvalues fall into five cells (nilpotent, rank one,
//! saddle, stable node, unstable node). For each cell the control set with
//! nonempty interior is described in closed form, membership can be tested,
//! and explicit piecewise-constant controls steer between interior points.
//! A Monte Carlo reachability oracle cross-checks the closed forms.

pub mod algebra;
pub mod config;
pub mod control_set;
pub mod dynamics;
pub mod error;
pub mod oracle;
pub mod report;
pub mod steering;
pub mod system;

pub use algebra::{adapted_norm, eig2, expm2, rotate_quarter, AdaptedNorm, EigenDecomposition, EigenKind, Mat2, Vec2};
pub use config::{parse_spec, SystemConfig};
pub use control_set::{
    boundary_polyline, contains, control_set, f_jacobian, f_map, invert_f, ControlSet, ControlSetDescription,
    Membership, NodeMap, NodeRegionSet, Polyline, TOL_BAND,
};
pub use dynamics::{invariant_f, invariant_g, propagate, solve_constant, Schedule, Segment, Trajectory};
pub use error::{Error, Result};
pub use oracle::{
    estimate_control_set, mutually_reachable, sample_reachable, trial_schedule, Agreement, CellLabel, Grid,
    GridEstimate, ReachConfig,
};
pub use report::{classify_report, ClassifyReport, Equilibria};
pub use steering::{
    closed_orbit_saddle, steer, steer_nilpotent, steer_node, steer_node_with_relax, steer_rank1, steer_unstable_node,
    SteeringResult,
};
pub use system::{
    canonicalize, check_larc, classify, equilibrium, CanonicalForm, CanonicalShape, Case, CaseTag, ControlRange,
    LinearSystem, Sign, SystemSpec, ZeroPosition,
};
