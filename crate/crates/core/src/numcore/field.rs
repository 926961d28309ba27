use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numcore::VecN;

/// Default central-difference step.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

pub type EvalFn = Arc<dyn Fn(&VecN) -> f64 + Send + Sync>;
pub type GradFn = Arc<dyn Fn(&VecN) -> VecN + Send + Sync>;

/// How a field produces its gradient.
#[derive(Clone)]
pub enum GradMode {
    Analytic(GradFn),
    FiniteDifference { step: f64 },
}

impl fmt::Debug for GradMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GradMode::Analytic(_) => f.write_str("Analytic"),
            GradMode::FiniteDifference { step } => write!(f, "FiniteDifference({step})"),
        }
    }
}

/// What the author of a field asserts about it. The verdict engine never
/// trusts these; they are compared against its findings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Claims {
    pub convex: bool,
    pub differentiable: bool,
}

impl Default for Claims {
    fn default() -> Self {
        Claims {
            convex: false,
            differentiable: true,
        }
    }
}

/// A scalar field on ℝⁿ together with a gradient route.
#[derive(Clone)]
pub struct ScalarField {
    dim: usize,
    eval: EvalFn,
    grad_mode: GradMode,
    pub claims: Claims,
    pub label: String,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("dim", &self.dim)
            .field("grad_mode", &self.grad_mode)
            .field("claims", &self.claims)
            .field("label", &self.label)
            .finish()
    }
}

impl ScalarField {
    /// A field with finite-difference gradients at the default step.
    pub fn new<F>(dim: usize, label: impl Into<String>, eval: F) -> Result<Self>
    where
        F: Fn(&VecN) -> f64 + Send + Sync + 'static,
    {
        if dim == 0 {
            return Err(Error::InvalidParameter("field dimension must be >= 1".into()));
        }
        Ok(ScalarField {
            dim,
            eval: Arc::new(eval),
            grad_mode: GradMode::FiniteDifference {
                step: DEFAULT_FD_STEP,
            },
            claims: Claims::default(),
            label: label.into(),
        })
    }

    pub fn with_gradient<G>(mut self, grad: G) -> Self
    where
        G: Fn(&VecN) -> VecN + Send + Sync + 'static,
    {
        self.grad_mode = GradMode::Analytic(Arc::new(grad));
        self
    }

    pub fn with_fd_step(mut self, step: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "finite-difference step must be > 0, got {step}"
            )));
        }
        self.grad_mode = GradMode::FiniteDifference { step };
        Ok(self)
    }

    pub fn with_claims(mut self, claims: Claims) -> Self {
        self.claims = claims;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grad_mode(&self) -> &GradMode {
        &self.grad_mode
    }

    pub fn value(&self, u: &VecN) -> Result<f64> {
        u.check_dim(self.dim)?;
        let v = (self.eval)(u);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite {
                point: u.as_slice().to_vec(),
            })
        }
    }

    /// Analytic gradient when available, central differences otherwise.
    pub fn gradient(&self, u: &VecN) -> Result<VecN> {
        u.check_dim(self.dim)?;
        match &self.grad_mode {
            GradMode::Analytic(g) => {
                let grad = g(u);
                grad.check_dim(self.dim)?;
                if grad.is_finite() {
                    Ok(grad)
                } else {
                    Err(Error::NonFinite {
                        point: u.as_slice().to_vec(),
                    })
                }
            }
            GradMode::FiniteDifference { step } => fd_gradient(self, u, *step),
        }
    }

    /// `u ↦ -f(u)`. Convexity claims do not carry over.
    pub fn negated(&self) -> ScalarField {
        let eval = Arc::clone(&self.eval);
        let grad_mode = match &self.grad_mode {
            GradMode::Analytic(g) => {
                let g = Arc::clone(g);
                GradMode::Analytic(Arc::new(move |u: &VecN| -&g(u)))
            }
            fd => fd.clone(),
        };
        ScalarField {
            dim: self.dim,
            eval: Arc::new(move |u: &VecN| -eval(u)),
            grad_mode,
            claims: Claims {
                convex: false,
                differentiable: self.claims.differentiable,
            },
            label: format!("-({})", self.label),
        }
    }

    /// `u ↦ f(u + offset) + lift`.
    pub fn shifted(&self, offset: &VecN, lift: f64) -> Result<ScalarField> {
        offset.check_dim(self.dim)?;
        let eval = Arc::clone(&self.eval);
        let a = offset.clone();
        let grad_mode = match &self.grad_mode {
            GradMode::Analytic(g) => {
                let g = Arc::clone(g);
                let a = offset.clone();
                GradMode::Analytic(Arc::new(move |u: &VecN| g(&(u + &a))))
            }
            fd => fd.clone(),
        };
        Ok(ScalarField {
            dim: self.dim,
            eval: Arc::new(move |u: &VecN| eval(&(u + &a)) + lift),
            grad_mode,
            claims: self.claims,
            label: format!("{}[shifted]", self.label),
        })
    }
}

/// Gradient of `field` at `u` through its configured route.
pub fn gradient(field: &ScalarField, u: &VecN) -> Result<VecN> {
    field.gradient(u)
}

/// Central differences: component i is `(f(u+h·eᵢ) − f(u−h·eᵢ)) / 2h`.
pub fn fd_gradient(field: &ScalarField, u: &VecN, step: f64) -> Result<VecN> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "finite-difference step must be > 0, got {step}"
        )));
    }
    u.check_dim(field.dim())?;
    let mut coords = Vec::with_capacity(u.dim());
    let mut probe = u.as_slice().to_vec();
    for i in 0..u.dim() {
        let x = probe[i];
        probe[i] = x + step;
        let fp = field.value(&VecN::from_raw(probe.clone()))?;
        probe[i] = x - step;
        let fm = field.value(&VecN::from_raw(probe.clone()))?;
        probe[i] = x;
        coords.push((fp - fm) / (2.0 * step));
    }
    Ok(VecN::from_raw(coords))
}

/// Outcome of probing a point for a kink.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothnessProbe {
    /// Largest one-sided slope jump at the fine step.
    pub slope_jump: f64,
    /// Largest change of the central-difference gradient between steps.
    pub central_shift: f64,
    pub flagged: bool,
}

impl SmoothnessProbe {
    pub fn evidence(&self) -> f64 {
        self.slope_jump.max(self.central_shift)
    }
}

/// Compares difference quotients at `step` and `step/10`.
///
/// A C¹ point has a forward/backward slope jump that shrinks linearly with the
/// step; a kink keeps it. The central gradients at the two steps are also
/// compared. Either signal above `threshold` flags the point.
pub fn probe_smoothness(
    field: &ScalarField,
    u: &VecN,
    step: f64,
    threshold: f64,
) -> Result<SmoothnessProbe> {
    u.check_dim(field.dim())?;
    let f0 = field.value(u)?;
    let fine = step / 10.0;
    let mut probe = u.as_slice().to_vec();
    let jump_at = |h: f64, probe: &mut Vec<f64>| -> Result<(Vec<f64>, Vec<f64>)> {
        let mut jumps = Vec::with_capacity(probe.len());
        let mut centrals = Vec::with_capacity(probe.len());
        for i in 0..probe.len() {
            let x = probe[i];
            probe[i] = x + h;
            let fp = field.value(&VecN::from_raw(probe.clone()))?;
            probe[i] = x - h;
            let fm = field.value(&VecN::from_raw(probe.clone()))?;
            probe[i] = x;
            jumps.push(((fp - f0) - (f0 - fm)).abs() / h);
            centrals.push((fp - fm) / (2.0 * h));
        }
        Ok((jumps, centrals))
    };
    let (coarse_jump, coarse_central) = jump_at(step, &mut probe)?;
    let (fine_jump, fine_central) = jump_at(fine, &mut probe)?;

    let mut slope_jump: f64 = 0.0;
    let mut flagged = false;
    for (c, f) in coarse_jump.iter().zip(&fine_jump) {
        slope_jump = slope_jump.max(*f);
        if *f > threshold && *f > 0.5 * c {
            flagged = true;
        }
    }
    let central_shift = coarse_central
        .iter()
        .zip(&fine_central)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if central_shift > threshold {
        flagged = true;
    }
    Ok(SmoothnessProbe {
        slope_jump,
        central_shift,
        flagged,
    })
}

/// Numerical tolerances shared by every module.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    pub tol_grad_norm: f64,
    pub tol_residual: f64,
    pub tol_equal: f64,
    pub fd_step: f64,
    pub singular_margin: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tol_grad_norm: 1e-6,
            tol_residual: 1e-10,
            tol_equal: 1e-8,
            fd_step: DEFAULT_FD_STEP,
            singular_margin: 1e-3,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("tol_grad_norm", self.tol_grad_norm),
            ("tol_residual", self.tol_residual),
            ("tol_equal", self.tol_equal),
            ("fd_step", self.fd_step),
            ("singular_margin", self.singular_margin),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Tolerances {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "tol_grad_norm={:e} tol_residual={:e} tol_equal={:e} fd_step={:e} singular_margin={:e}",
            self.tol_grad_norm, self.tol_residual, self.tol_equal, self.fd_step, self.singular_margin
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> VecN {
        VecN::new(c.to_vec()).unwrap()
    }

    fn sqrt_quadratic(dim: usize) -> ScalarField {
        ScalarField::new(dim, "sqrt_quadratic", |u: &VecN| (1.0 + u.norm_squared()).sqrt()).unwrap()
    }

    #[test]
    fn fd_matches_analytic_for_sqrt_quadratic() {
        let f = sqrt_quadratic(2);
        let g = gradient(&f, &v(&[1.0, 0.0])).unwrap();
        assert!((g[0] - 1.0 / 2f64.sqrt()).abs() < 1e-6);
        assert!(g[1].abs() < 1e-6);
        let g0 = gradient(&f, &v(&[0.0, 0.0])).unwrap();
        assert_eq!(g0.as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn fd_on_constant_and_square() {
        let c = ScalarField::new(3, "c", |_: &VecN| 4.0).unwrap();
        let g = fd_gradient(&c, &v(&[0.3, -1.0, 2.0]), 1e-5).unwrap();
        assert_eq!(g.as_slice(), &[0.0, 0.0, 0.0]);

        let sq = ScalarField::new(1, "sq", |u: &VecN| u[0] * u[0]).unwrap();
        let g = fd_gradient(&sq, &v(&[1.0]), 1e-4).unwrap();
        assert!((g[0] - 2.0).abs() < 1e-7);
    }

    #[test]
    fn fd_rejects_bad_step_and_dimension() {
        let f = sqrt_quadratic(2);
        assert!(fd_gradient(&f, &v(&[0.0, 0.0]), 0.0).is_err());
        assert!(fd_gradient(&f, &v(&[0.0, 0.0]), -1.0).is_err());
        assert!(matches!(
            f.gradient(&v(&[0.0])),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
        assert!(f.clone().with_fd_step(0.0).is_err());
    }

    #[test]
    fn non_finite_evaluation_is_an_error() {
        let f = ScalarField::new(1, "log", |u: &VecN| u[0].ln()).unwrap();
        assert!(matches!(f.value(&v(&[-1.0])), Err(Error::NonFinite { .. })));
        assert!(f.gradient(&v(&[0.0])).is_err());
    }

    #[test]
    fn smoothness_probe_flags_kink_only() {
        let norm = ScalarField::new(2, "norm", |u: &VecN| u.norm()).unwrap();
        let p = probe_smoothness(&norm, &v(&[0.0, 0.0]), 1e-5, 1e-4).unwrap();
        assert!(p.flagged);
        assert!((p.slope_jump - 2.0).abs() < 1e-9);

        let p = probe_smoothness(&norm, &v(&[1.0, 0.5]), 1e-5, 1e-4).unwrap();
        assert!(!p.flagged, "{p:?}");

        let f = sqrt_quadratic(2);
        let p = probe_smoothness(&f, &v(&[0.0, 0.0]), 1e-5, 1e-4).unwrap();
        assert!(!p.flagged, "{p:?}");
    }

    #[test]
    fn negation_and_shift() {
        let f = ScalarField::new(2, "lin", |u: &VecN| 2.0 * u[0] - u[1])
            .unwrap()
            .with_gradient(|_: &VecN| VecN::from_raw(vec![2.0, -1.0]));
        let n = f.negated();
        assert_eq!(n.value(&v(&[1.0, 1.0])).unwrap(), -1.0);
        assert_eq!(n.gradient(&v(&[1.0, 1.0])).unwrap().as_slice(), &[-2.0, 1.0]);
        let s = f.shifted(&v(&[1.0, 0.0]), 3.0).unwrap();
        assert_eq!(s.value(&v(&[0.0, 0.0])).unwrap(), 5.0);
    }

    #[test]
    fn tolerances_validate() {
        assert!(Tolerances::default().validate().is_ok());
        let bad = Tolerances {
            tol_equal: 0.0,
            ..Tolerances::default()
        };
        assert!(bad.validate().is_err());
    }
}
