use serde::Serialize;

use crate::error::{Error, Result};
use crate::numcore::{ScalarField, VecN};

/// Threshold on `|⟨d₁, d₂⟩|` above which two lines count as parallel.
pub const PARALLEL_COSINE: f64 = 1.0 - 1e-12;

/// `s ↦ base + s·dir` with a unit direction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Line {
    pub base: VecN,
    pub dir: VecN,
}

impl Line {
    /// Normalises `dir`; fails on a zero direction or mismatched dimensions.
    pub fn new(base: VecN, dir: VecN) -> Result<Self> {
        dir.check_dim(base.dim())?;
        let dir = dir
            .normalized()
            .ok_or_else(|| Error::InvalidParameter("line direction must be nonzero".into()))?;
        Ok(Line { base, dir })
    }

    /// The gradient line `s ↦ u + s·∇f(u)/|∇f(u)|`.
    pub fn gradient_line(field: &ScalarField, u: &VecN) -> Result<Self> {
        Line::new(u.clone(), field.gradient(u)?)
    }

    pub fn at(&self, s: f64) -> VecN {
        self.base.axpy(s, &self.dir)
    }
}

/// Closest pair of points between two lines.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LineGapResult {
    pub s_star: f64,
    pub t_star: f64,
    pub gap: f64,
    /// `l₂(t*) − l₁(s*)`.
    pub diff: VecN,
    pub parallel: bool,
}

impl LineGapResult {
    /// `(|⟨diff, d₁⟩|, |⟨diff, d₂⟩|)`.
    pub fn orthogonality_residuals(&self, l1: &Line, l2: &Line) -> (f64, f64) {
        (self.diff.dot(&l1.dir).abs(), self.diff.dot(&l2.dir).abs())
    }
}

/// Minimises `|l₁(s) − l₂(t)|` through the 2×2 normal equations.
///
/// For unit directions with `c = ⟨d₁, d₂⟩`, `w = b₁ − b₂`:
/// `s = (c⟨d₂,w⟩ − ⟨d₁,w⟩)/(1 − c²)`, `t = (⟨d₂,w⟩ − c⟨d₁,w⟩)/(1 − c²)`.
/// Parallel lines take `s = 0` and `t` the projection of `b₁` onto `l₂`.
pub fn closest_points_between_lines(l1: &Line, l2: &Line) -> Result<LineGapResult> {
    l2.base.check_dim(l1.base.dim())?;
    let w = &l1.base - &l2.base;
    let c = l1.dir.dot(&l2.dir);
    let d = l1.dir.dot(&w);
    let e = l2.dir.dot(&w);
    let parallel = c.abs() >= PARALLEL_COSINE;
    let (s, t) = if parallel {
        (0.0, e)
    } else {
        let denom = 1.0 - c * c;
        ((c * e - d) / denom, (e - c * d) / denom)
    };
    let diff = &l2.at(t) - &l1.at(s);
    Ok(LineGapResult {
        s_star: s,
        t_star: t,
        gap: diff.norm(),
        diff,
        parallel,
    })
}
