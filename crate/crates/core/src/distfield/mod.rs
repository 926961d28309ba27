//! Distance functions to graphs of smooth functions, the closed-form parabola
//! case, singular-locus classification and grid emission.

mod graph;
mod grid;
mod parabola;

pub use graph::{
    evaluate_distance_field, parabola_distance_field, project_to_graph, FieldSample, GraphKind,
    GraphSpec, ProjectionOptions, ProjectionResult,
};
pub(crate) use graph::projection_gradient;
pub(crate) use grid::write_file;
pub use grid::{emit_grid, format_float, Grid, GridColumn, GridRecord, GridSpec, CSV_HEADER};
pub use parabola::{
    classify_singularity, parabola_cubic_residual, parabola_discriminant, parabola_projection,
    parabola_projection_with_margin, SingularClass, CLOSED_FORM_MARGIN,
};
