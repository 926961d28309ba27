use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numcore::{sample_points, Domain, ScalarField, VecN};

/// Settings for the fixed-point and resolvent solvers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FixedPointOptions {
    pub max_iter: usize,
    /// Seeded starts in addition to the origin.
    pub starts: usize,
    pub seed: u64,
    pub tol_residual: f64,
    pub tol_equal: f64,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        FixedPointOptions {
            max_iter: 5000,
            starts: 8,
            seed: 0,
            tol_residual: 1e-10,
            tol_equal: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FixedPointResult {
    pub point: VecN,
    pub radius: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("radius must be > 0, got {r}")))
    }
}

fn project_to_ball(u: VecN, r: f64) -> VecN {
    let n = u.norm();
    if n > r {
        u.scaled(r / n)
    } else {
        u
    }
}

/// Symmetrised central-difference Jacobian of the gradient.
fn gradient_jacobian(field: &ScalarField, u: &VecN) -> Result<DMatrix<f64>> {
    let n = u.dim();
    let eta = 1e-5 * u.max_abs().max(1.0);
    let mut h = DMatrix::zeros(n, n);
    for j in 0..n {
        let e = VecN::basis(n, j);
        let gp = field.gradient(&u.axpy(eta, &e))?;
        let gm = field.gradient(&u.axpy(-eta, &e))?;
        for i in 0..n {
            h[(i, j)] = (gp[i] - gm[i]) / (2.0 * eta);
        }
    }
    Ok((&h + h.transpose()) * 0.5)
}

fn to_dvec(v: &VecN) -> DVector<f64> {
    DVector::from_column_slice(v.as_slice())
}

/// A fixed point of `u ↦ r∇f(u)` on the ball `|u| ≤ r`.
///
/// The residual `|u − r∇f(u)|` is driven to zero by projected Newton steps
/// with backtracking, falling back to the plain map, from the origin and then
/// from seeded starts in the ball. Returns the best candidate with
/// `converged = false` if no start reaches `tol_residual`.
pub fn brouwer_fixed_point(field: &ScalarField, r: f64, opts: &FixedPointOptions) -> Result<FixedPointResult> {
    check_radius(r)?;
    if !field.claims.differentiable {
        return Err(Error::Precondition(format!(
            "`{}` is not claimed differentiable",
            field.label
        )));
    }
    let n = field.dim();
    let residual = |u: &VecN| -> Result<(VecN, f64)> {
        let g = u.axpy(-r, &field.gradient(u)?);
        let norm = g.norm();
        Ok((g, norm))
    };

    let mut starts = vec![VecN::zeros(n)];
    if opts.starts > 0 {
        starts.extend(sample_points(
            &Domain::new_ball(VecN::zeros(n), r)?,
            opts.starts,
            opts.seed,
        )?);
    }

    let mut best: Option<FixedPointResult> = None;
    let mut total = 0;
    for start in starts {
        let mut u = start;
        let (mut g, mut res) = residual(&u)?;
        let mut iters = 0;
        while iters < opts.max_iter && res > opts.tol_residual {
            iters += 1;
            let jac = DMatrix::identity(n, n) - gradient_jacobian(field, &u)? * r;
            let dir = jac
                .lu()
                .solve(&(-to_dvec(&g)))
                .map(|d| VecN::from_raw(d.iter().copied().collect()))
                .filter(VecN::is_finite)
                .unwrap_or_else(|| -&g);
            let mut next = None;
            let mut t = 1.0;
            for _ in 0..40 {
                let cand = project_to_ball(u.axpy(t, &dir), r);
                let (gc, rc) = residual(&cand)?;
                if rc < res {
                    next = Some((cand, gc, rc));
                    break;
                }
                t *= 0.5;
            }
            if next.is_none() {
                let cand = project_to_ball(&u - &g, r);
                let (gc, rc) = residual(&cand)?;
                if rc < res {
                    next = Some((cand, gc, rc));
                }
            }
            match next {
                Some((cand, gc, rc)) => {
                    u = cand;
                    g = gc;
                    res = rc;
                }
                None => break,
            }
        }
        total += iters;
        let candidate = FixedPointResult {
            point: u,
            radius: r,
            residual: res,
            iterations: total,
            converged: res <= opts.tol_residual,
        };
        if candidate.converged {
            return Ok(candidate);
        }
        if best.as_ref().is_none_or(|b| candidate.residual < b.residual) {
            best = Some(candidate);
        }
    }
    let mut best = best.expect("at least one start");
    best.iterations = total;
    Ok(best)
}

/// Largest sampled ratio `|∇f(u) − ∇f(v)| / |u − v|` over nearby pairs in a
/// ball of the given radius.
pub fn estimate_gradient_lipschitz(field: &ScalarField, radius: f64, samples: usize, seed: u64) -> Result<f64> {
    let n = field.dim();
    let ball = Domain::new_ball(VecN::zeros(n), radius)?;
    let mut pts = vec![VecN::zeros(n)];
    pts.extend(sample_points(&ball, samples.max(1), seed)?);
    let dirs = sample_points(&Domain::new_ball(VecN::zeros(n), 1.0)?, pts.len(), seed ^ 0x9e37_79b9)?;
    let delta = 1e-3 * radius.max(1e-3);
    let mut lip: f64 = 0.0;
    for (p, d) in pts.iter().zip(&dirs) {
        let Some(d) = d.normalized() else { continue };
        let q = p.axpy(delta, &d);
        let diff = (&field.gradient(p)? - &field.gradient(&q)?).norm();
        lip = lip.max(diff / delta);
    }
    Ok(lip)
}

/// The solution of `u + r∇f(u) = 0`, the resolvent of the gradient at zero.
///
/// Iterates `u ← u − τ(u + r∇f(u))` with `τ = 1/(1 + r·L̂)`, halving `τ`
/// whenever the residual would grow. Runs from the origin and from a seeded
/// start; `converged` requires both to reach `tol_residual` and agree within
/// `tol_equal`.
pub fn resolvent_point(field: &ScalarField, r: f64, opts: &FixedPointOptions) -> Result<FixedPointResult> {
    check_radius(r)?;
    if !(field.claims.convex && field.claims.differentiable) {
        return Err(Error::Precondition(format!(
            "`{}` is not claimed convex and differentiable",
            field.label
        )));
    }
    let n = field.dim();
    let g0 = field.gradient(&VecN::zeros(n))?.norm();
    let reach = r * (g0 + 1.0) + 1.0;
    let lip = estimate_gradient_lipschitz(field, reach, 32, opts.seed)?;
    let tau0 = 1.0 / (1.0 + r * lip);

    let operator = |u: &VecN| -> Result<(VecN, f64)> {
        let a = u.axpy(r, &field.gradient(u)?);
        let norm = a.norm();
        Ok((a, norm))
    };
    let run = |start: VecN| -> Result<(VecN, f64, usize)> {
        let mut u = start;
        let (mut a, mut res) = operator(&u)?;
        let mut tau = tau0;
        let mut iters = 0;
        while iters < opts.max_iter && res > opts.tol_residual {
            iters += 1;
            let cand = u.axpy(-tau, &a);
            let (ac, rc) = operator(&cand)?;
            if rc <= res {
                u = cand;
                a = ac;
                res = rc;
            } else {
                tau *= 0.5;
                if tau < 1e-12 * tau0 {
                    break;
                }
            }
        }
        Ok((u, res, iters))
    };

    let (pa, ra, ia) = run(VecN::zeros(n))?;
    let far = sample_points(&Domain::new_ball(VecN::zeros(n), reach)?, 1, opts.seed)?.remove(0);
    let (pb, rb, ib) = run(far)?;
    let unique = pa.distance(&pb) <= opts.tol_equal;
    Ok(FixedPointResult {
        point: pa,
        radius: r,
        residual: ra.max(rb),
        iterations: ia + ib,
        converged: ra <= opts.tol_residual && rb <= opts.tol_residual && unique,
    })
}

/// Which family of points defines the limit direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FixedPointVariant {
    /// `u_r = r∇f(u_r)`; the direction is `u_r / r`.
    Brouwer,
    /// `u_r = −r∇f(u_r)`; the direction is `−u_r / r`.
    Resolvent,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LimitDirection {
    /// The ratio at the smallest radius.
    pub direction: VecN,
    /// `(r, ratio)` for every radius, in input order.
    pub sequence: Vec<(f64, VecN)>,
}

/// Tracks `±u_r / r` along a decreasing list of radii ending at or below 1e-3.
pub fn limit_direction(
    field: &ScalarField,
    radii: &[f64],
    variant: FixedPointVariant,
    opts: &FixedPointOptions,
) -> Result<LimitDirection> {
    let Some(&last) = radii.last() else {
        return Err(Error::InvalidParameter("radii must be non-empty".into()));
    };
    if radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) || radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter(
            "radii must be positive and strictly decreasing".into(),
        ));
    }
    if last > 1e-3 {
        return Err(Error::InvalidParameter(format!(
            "smallest radius must be <= 1e-3, got {last}"
        )));
    }
    let mut sequence = Vec::with_capacity(radii.len());
    for &r in radii {
        let (fp, sign) = match variant {
            FixedPointVariant::Brouwer => (brouwer_fixed_point(field, r, opts)?, 1.0),
            FixedPointVariant::Resolvent => (resolvent_point(field, r, opts)?, -1.0),
        };
        if !fp.converged {
            return Err(Error::NonConvergence {
                what: "fixed point",
                residual: fp.residual,
                iterations: fp.iterations,
            });
        }
        sequence.push((r, fp.point.scaled(sign / r)));
    }
    Ok(LimitDirection {
        direction: sequence.last().expect("non-empty").1.clone(),
        sequence,
    })
}
