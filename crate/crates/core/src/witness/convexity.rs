use serde::Serialize;

use crate::error::{Error, Result};
use crate::numcore::{ScalarField, Tolerances, VecN};
use crate::witness::{closest_points_between_lines, ray_deviation, Line};

/// `f(v) − f(u) − ⟨∇f(u), v − u⟩`; nonnegative for convex `f`.
pub fn first_order_gap(field: &ScalarField, u: &VecN, v: &VecN) -> Result<f64> {
    v.check_dim(u.dim())?;
    Ok(field.value(v)? - field.value(u)? - field.gradient(u)?.dot(&(v - u)))
}

/// `⟨∇f(u) − ∇f(v), u − v⟩`; nonnegative for convex `f`.
pub fn monotonicity_gap(field: &ScalarField, u: &VecN, v: &VecN) -> Result<f64> {
    v.check_dim(u.dim())?;
    Ok((&field.gradient(u)? - &field.gradient(v)?).dot(&(u - v)))
}

/// Outcome of running the line-gap argument on the gradient lines through
/// two points.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinePairReport {
    pub u: VecN,
    pub v: VecN,
    pub parallel: bool,
    pub gap: f64,
    /// Closest points `u₀` on `c_u` and `v₀` on `c_v`.
    pub u0: VecN,
    pub v0: VecN,
    /// `|f(u₀) − f(v₀)|`.
    pub value_diff: f64,
    /// `|∇f(u₀) − ∇f(v₀)|`.
    pub gradient_diff: f64,
    /// `|⟨v₀ − u₀, d_u⟩|` and `|⟨v₀ − u₀, d_v⟩|`.
    pub orthogonality: (f64, f64),
    /// Ray-identity deviation over `s ∈ [−10, 10]` at `u₀` and `v₀`.
    pub ray_deviation: (f64, f64),
    /// Gradients at `u` and `v` share a nonzero norm and the field is
    /// claimed convex and C¹.
    pub hypotheses_hold: bool,
}

impl LinePairReport {
    /// Largest of the reported residuals.
    pub fn max_residual(&self) -> f64 {
        [
            self.value_diff,
            self.gradient_diff,
            self.orthogonality.0,
            self.orthogonality.1,
            self.ray_deviation.0,
            self.ray_deviation.1,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn passes(&self, tol_equal: f64) -> bool {
        self.max_residual() <= tol_equal
    }
}

/// Builds the gradient lines through `u` and `v`, finds their closest points
/// and measures every identity the affine conclusion predicts there.
pub fn line_pair_witness(field: &ScalarField, u: &VecN, v: &VecN, tol: &Tolerances) -> Result<LinePairReport> {
    v.check_dim(u.dim())?;
    let gu = field.gradient(u)?;
    let gv = field.gradient(v)?;
    let (nu, nv) = (gu.norm(), gv.norm());
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::Precondition(
            "gradient lines need nonzero gradients at both points".into(),
        ));
    }
    let hypotheses_hold = field.claims.convex
        && field.claims.differentiable
        && (nu - nv).abs() <= tol.tol_grad_norm
        && nu > tol.tol_grad_norm;

    let lu = Line::new(u.clone(), gu)?;
    let lv = Line::new(v.clone(), gv)?;
    let gap = closest_points_between_lines(&lu, &lv)?;
    let u0 = lu.at(gap.s_star);
    let v0 = lv.at(gap.t_star);
    Ok(LinePairReport {
        u: u.clone(),
        v: v.clone(),
        parallel: gap.parallel,
        gap: gap.gap,
        value_diff: (field.value(&u0)? - field.value(&v0)?).abs(),
        gradient_diff: (&field.gradient(&u0)? - &field.gradient(&v0)?).norm(),
        orthogonality: gap.orthogonality_residuals(&lu, &lv),
        ray_deviation: (
            ray_deviation(field, &u0, -10.0, 10.0, 21)?,
            ray_deviation(field, &v0, -10.0, 10.0, 21)?,
        ),
        hypotheses_hold,
        u0,
        v0,
    })
}
