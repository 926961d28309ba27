//! Vectors, differentiable scalar fields, seeded sampling and the field zoo.

mod field;
mod sampling;
mod vecn;
mod zoo;

pub use field::{
    fd_gradient, gradient, probe_smoothness, Claims, EvalFn, GradFn, GradMode, ScalarField,
    SmoothnessProbe, Tolerances, DEFAULT_FD_STEP,
};
pub use sampling::{sample_points, seeded_rng, Domain};
pub(crate) use sampling::draw;
pub use vecn::VecN;
pub use zoo::{make_zoo_field, ZooSpec, ZOO_CATALOG};
