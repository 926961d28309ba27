//! Sampling a planar distance field on a regular grid, with CSV and PGM output.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::distfield::parabola::classify_with_value;
use crate::distfield::{project_to_graph, projection_gradient, GraphKind, GraphSpec, ProjectionOptions, SingularClass};
use crate::error::{Error, Result};
use crate::numcore::{Tolerances, VecN};

pub const CSV_HEADER: &str = "u1,u2,value,gradnorm,class";

/// A regular `nx × ny` lattice over `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(lo: [f64; 2], hi: [f64; 2], nx: usize, ny: usize) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidParameter(format!(
                "grid needs nx, ny >= 2, got {nx}x{ny}"
            )));
        }
        if !(lo[0] < hi[0] && lo[1] < hi[1]) || lo.iter().chain(&hi).any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("grid requires finite lo < hi".into()));
        }
        Ok(GridSpec { lo, hi, nx, ny })
    }

    /// Coordinates of node `(i, j)`; `i` runs along u₁, `j` along u₂.
    pub fn node(&self, i: usize, j: usize) -> (f64, f64) {
        let t = i as f64 / (self.nx - 1) as f64;
        let s = j as f64 / (self.ny - 1) as f64;
        (
            self.lo[0] + (self.hi[0] - self.lo[0]) * t,
            self.lo[1] + (self.hi[1] - self.lo[1]) * s,
        )
    }
}

/// A scalar column of the grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridColumn {
    Value,
    GradNorm,
}

impl std::str::FromStr for GridColumn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "value" => Ok(GridColumn::Value),
            "gradnorm" => Ok(GridColumn::GradNorm),
            other => Err(Error::InvalidParameter(format!(
                "unknown grid column `{other}` (expected value or gradnorm)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridRecord {
    pub u1: f64,
    pub u2: f64,
    pub value: f64,
    /// NaN where the gradient is undefined.
    pub gradnorm: f64,
    pub class: SingularClass,
}

impl GridRecord {
    pub fn column(&self, column: GridColumn) -> f64 {
        match column {
            GridColumn::Value => self.value,
            GridColumn::GradNorm => self.gradnorm,
        }
    }
}

/// Records in row-major order: u₂ ascending across rows, u₁ ascending within.
#[derive(Clone, Debug)]
pub struct Grid {
    pub spec: GridSpec,
    pub records: Vec<GridRecord>,
}

fn evaluate_node(graph: &GraphSpec, u1: f64, u2: f64, tol: &Tolerances) -> Result<GridRecord> {
    let u = VecN::new(vec![u1, u2])?;
    let projection = project_to_graph(graph, &u, &ProjectionOptions::from_tolerances(tol))?;
    let class = match graph.kind() {
        GraphKind::Parabola => classify_with_value(u1, u2, projection.value, tol.singular_margin),
        GraphKind::General if projection.value <= tol.singular_margin => SingularClass::OnGraph,
        GraphKind::General if projection.multiple => SingularClass::MultiRoot,
        GraphKind::General => SingularClass::Regular,
    };
    let gradnorm = if projection.value > tol.singular_margin && !projection.multiple {
        projection_gradient(&u, &projection).norm()
    } else {
        f64::NAN
    };
    Ok(GridRecord {
        u1,
        u2,
        value: projection.value,
        gradnorm,
        class,
    })
}

/// Evaluates the distance field of a planar graph at every grid node.
pub fn emit_grid(graph: &GraphSpec, spec: &GridSpec, tol: &Tolerances) -> Result<Grid> {
    if graph.ambient_dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: graph.ambient_dim(),
        });
    }
    let records = (0..spec.nx * spec.ny)
        .into_par_iter()
        .map(|k| {
            let (u1, u2) = spec.node(k % spec.nx, k / spec.nx);
            evaluate_node(graph, u1, u2, tol)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Grid {
        spec: *spec,
        records,
    })
}

/// 17 significant digits, `nan` for NaN.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:.16e}")
    }
}

impl Grid {
    pub fn record(&self, i: usize, j: usize) -> &GridRecord {
        &self.records[j * self.spec.nx + i]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(96 * (self.records.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                format_float(r.u1),
                format_float(r.u2),
                format_float(r.value),
                format_float(r.gradnorm),
                r.class
            );
        }
        out
    }

    /// Binary 8-bit PGM of one column, min–max normalised over finite
    /// entries; row 0 is the largest u₂. Non-finite entries map to 0.
    pub fn to_pgm(&self, column: GridColumn) -> Vec<u8> {
        let (nx, ny) = (self.spec.nx, self.spec.ny);
        let (lo, hi) = self
            .records
            .iter()
            .map(|r| r.column(column))
            .filter(|x| x.is_finite())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
        let span = hi - lo;
        let mut out = format!("P5\n{nx} {ny}\n255\n").into_bytes();
        out.reserve(nx * ny);
        for j in (0..ny).rev() {
            for i in 0..nx {
                let x = self.record(i, j).column(column);
                let px = if !x.is_finite() || span.is_nan() || span <= 0.0 {
                    0
                } else {
                    (255.0 * (x - lo) / span).round().clamp(0.0, 255.0) as u8
                };
                out.push(px);
            }
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_file(path.as_ref(), self.to_csv().as_bytes())
    }

    pub fn write_pgm(&self, path: impl AsRef<Path>, column: GridColumn) -> Result<()> {
        write_file(path.as_ref(), &self.to_pgm(column))
    }
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
