//! Closed-form nearest point on the parabola `x²`.
//!
//! The foot of `u` solves the depressed cubic `x³ + (½ − u₂)x − u₁/2 = 0`.

use std::fmt;

use serde::Serialize;

use crate::distfield::{project_to_graph, GraphSpec, ProjectionOptions};
use crate::error::{Error, Result};
use crate::numcore::{Tolerances, VecN};

/// Positivity margin on the discriminant for the closed form.
pub const CLOSED_FORM_MARGIN: f64 = 1e-9;

fn coords(u: &VecN) -> Result<(f64, f64)> {
    u.check_dim(2)?;
    Ok((u[0], u[1]))
}

/// `D(u) = u₁²/16 + (½ − u₂)³/27`.
pub fn parabola_discriminant(u: &VecN) -> Result<f64> {
    let (u1, u2) = coords(u)?;
    Ok(discriminant(u1, u2))
}

fn discriminant(u1: f64, u2: f64) -> f64 {
    let p = 0.5 - u2;
    u1 * u1 / 16.0 + p * p * p / 27.0
}

/// Residual of the cubic `x³ + (½ − u₂)x − u₁/2` at `x`.
pub fn parabola_cubic_residual(u: &VecN, x: f64) -> Result<f64> {
    let (u1, u2) = coords(u)?;
    Ok(x * x * x + (0.5 - u2) * x - 0.5 * u1)
}

/// The unique real root `∛(u₁/4 + √D) + ∛(u₁/4 − √D)` when `D(u)` exceeds
/// [`CLOSED_FORM_MARGIN`].
pub fn parabola_projection(u: &VecN) -> Result<f64> {
    parabola_projection_with_margin(u, CLOSED_FORM_MARGIN)
}

pub fn parabola_projection_with_margin(u: &VecN, margin: f64) -> Result<f64> {
    let (u1, u2) = coords(u)?;
    let d = discriminant(u1, u2);
    if d <= margin {
        return Err(Error::DiscriminantNotPositive { discriminant: d });
    }
    let s = d.sqrt();
    let q = u1 / 4.0;
    // cbrt takes the real branch for negative arguments.
    Ok((q + s).cbrt() + (q - s).cbrt())
}

/// Where a plane point sits relative to the parabola's singular set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum SingularClass {
    /// Distance at most the singular margin.
    OnGraph,
    /// `D(u) ≤ margin`: several real stationary feet.
    MultiRoot,
    /// `|u₁| = 4√D(u)` within the margin, with `D > 0`.
    CuspCondition,
    Regular,
}

impl SingularClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            SingularClass::OnGraph => "OnGraph",
            SingularClass::MultiRoot => "MultiRoot",
            SingularClass::CuspCondition => "CuspCondition",
            SingularClass::Regular => "Regular",
        }
    }
}

impl fmt::Display for SingularClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub(crate) fn classify_with_value(u1: f64, u2: f64, value: f64, margin: f64) -> SingularClass {
    if value <= margin {
        return SingularClass::OnGraph;
    }
    let d = discriminant(u1, u2);
    if d <= margin {
        SingularClass::MultiRoot
    } else if (u1.abs() - 4.0 * d.sqrt()).abs() <= margin {
        SingularClass::CuspCondition
    } else {
        SingularClass::Regular
    }
}

/// Classifies `u` using the distance to the parabola and the discriminant.
pub fn classify_singularity(u: &VecN, tol: &Tolerances) -> Result<SingularClass> {
    let (u1, u2) = coords(u)?;
    let p = project_to_graph(
        &GraphSpec::parabola(),
        u,
        &ProjectionOptions::from_tolerances(tol),
    )?;
    Ok(classify_with_value(u1, u2, p.value, tol.singular_margin))
}
