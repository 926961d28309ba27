//! Executable witnesses for each step of the argument that a convex C¹
//! function with constant gradient norm is affine, and the verdict engine
//! built on them.

mod convexity;
mod fixed_point;
mod lines;
mod rays;
mod report;
mod verdict;

pub use convexity::{first_order_gap, line_pair_witness, monotonicity_gap, LinePairReport};
pub use fixed_point::{
    brouwer_fixed_point, estimate_gradient_lipschitz, limit_direction, resolvent_point, FixedPointOptions,
    FixedPointResult, FixedPointVariant, LimitDirection,
};
pub use lines::{closest_points_between_lines, Line, LineGapResult, PARALLEL_COSINE};
pub use rays::{ray_deviation, ray_gradient_drift};
pub use report::{run_witness, ConvexityStats, FixedPointRecord, GradNormStats, RayRecord, RunInfo, WitnessReport};
pub use verdict::{classify_field, ClassifyOptions, Mode, Verdict, VerdictKind};
