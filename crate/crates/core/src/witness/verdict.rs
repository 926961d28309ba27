//! The verdict engine: decides which hypothesis of "convex + C¹ + constant
//! gradient norm ⇒ affine" a field fails, or recovers its affine form.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numcore::{probe_smoothness, sample_points, seeded_rng, Claims, Domain, ScalarField, Tolerances, VecN};
use crate::witness::report::{ConvexityStats, GradNormStats, WitnessReport};

/// Curvature the field is tested for.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Mode {
    #[default]
    Convex,
    /// Classifies `−f` as convex and maps the result back.
    Concave,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "convex" => Ok(Mode::Convex),
            "concave" => Ok(Mode::Concave),
            other => Err(Error::InvalidParameter(format!(
                "unknown mode `{other}` (expected convex or concave)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassifyOptions {
    /// Random samples; the domain center is always added in front.
    pub samples: usize,
    /// Random sample pairs for the first-order scan.
    pub pairs: usize,
    /// Fresh samples for verifying the affine fit.
    pub fresh: usize,
    /// Base points for ray checks in `run_witness`.
    pub ray_checks: usize,
    /// Point pairs for the line-gap witness in `run_witness`.
    pub line_checks: usize,
    pub seed: u64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            samples: 256,
            pairs: 1024,
            fresh: 128,
            ray_checks: 4,
            line_checks: 2,
            seed: 0,
        }
    }
}

/// Classification outcome.
#[derive(Clone, Debug, PartialEq)]
pub enum VerdictKind {
    Affine { c1: VecN, c0: f64 },
    Constant { c0: f64 },
    NotConstantNorm { spread: f64, min: f64, max: f64 },
    NotConvex { u: VecN, v: VecN, gap: f64 },
    NotDifferentiable { point: VecN, evidence: f64 },
}

impl VerdictKind {
    pub fn name(&self) -> &'static str {
        match self {
            VerdictKind::Affine { .. } => "Affine",
            VerdictKind::Constant { .. } => "Constant",
            VerdictKind::NotConstantNorm { .. } => "NotConstantNorm",
            VerdictKind::NotConvex { .. } => "NotConvex",
            VerdictKind::NotDifferentiable { .. } => "NotDifferentiable",
        }
    }

    /// Whether this outcome disagrees with what a field claims about itself.
    pub fn contradicts(&self, claims: &Claims) -> bool {
        match self {
            VerdictKind::NotConvex { .. } => claims.convex,
            VerdictKind::NotDifferentiable { .. } => claims.differentiable,
            VerdictKind::Affine { .. } | VerdictKind::Constant { .. } => {
                !(claims.convex && claims.differentiable)
            }
            VerdictKind::NotConstantNorm { .. } => !claims.differentiable,
        }
    }

    fn negated(self) -> VerdictKind {
        match self {
            // `0.0 - x` keeps zero coefficients at +0.
            VerdictKind::Affine { c1, c0 } => VerdictKind::Affine {
                c1: VecN::from_raw(c1.as_slice().iter().map(|c| 0.0 - c).collect()),
                c0: 0.0 - c0,
            },
            VerdictKind::Constant { c0 } => VerdictKind::Constant { c0: 0.0 - c0 },
            other => other,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub report: WitnessReport,
}

/// Classifies `field` over `domain`.
///
/// Checks, in order: first-order convexity on seeded pairs (skipped in one
/// dimension, where constant |f′| already forces affinity), a kink probe at
/// every sample, the spread of sampled gradient norms, a vanishing common
/// norm, and finally an affine fit verified on fresh samples.
pub fn classify_field(
    field: &ScalarField,
    domain: &Domain,
    tol: &Tolerances,
    mode: Mode,
    opts: &ClassifyOptions,
) -> Result<Verdict> {
    tol.validate()?;
    if domain.dim() != field.dim() {
        return Err(Error::DimensionMismatch {
            expected: field.dim(),
            found: domain.dim(),
        });
    }
    let min_extent = 10.0 * tol.fd_step;
    if domain.min_extent() < min_extent {
        return Err(Error::DegenerateDomain {
            extent: domain.min_extent(),
            min: min_extent,
        });
    }
    match mode {
        Mode::Convex => classify_convex(field, domain, tol, opts),
        Mode::Concave => {
            let mut verdict = classify_convex(&field.negated(), domain, tol, opts)?;
            verdict.kind = verdict.kind.negated();
            Ok(verdict)
        }
    }
}

fn classify_convex(field: &ScalarField, domain: &Domain, tol: &Tolerances, opts: &ClassifyOptions) -> Result<Verdict> {
    let mut points = vec![domain.center()];
    points.extend(sample_points(domain, opts.samples.max(1), opts.seed)?);

    let evals: Vec<(f64, VecN)> = points
        .par_iter()
        .map(|p| Ok((field.value(p)?, field.gradient(p)?)))
        .collect::<Result<_>>()?;
    let norms: Vec<f64> = evals.iter().map(|(_, g)| g.norm()).collect();
    let gradnorm = GradNormStats::from_norms(&norms);

    let mut report = WitnessReport {
        gradnorm,
        convexity: ConvexityStats::default(),
        ..Default::default()
    };

    // First-order scan over seeded pairs.
    let mut worst_pair: Option<(usize, usize, f64)> = None;
    if field.dim() > 1 && points.len() > 1 {
        let mut rng = seeded_rng(opts.seed.wrapping_add(0x5eed_0001));
        let mut min_mono = f64::INFINITY;
        for _ in 0..opts.pairs {
            let i = rng.random_range(0..points.len());
            let mut j = rng.random_range(0..points.len() - 1);
            if j >= i {
                j += 1;
            }
            let (fu, gu) = &evals[i];
            let (fv, gv) = &evals[j];
            let d = &points[j] - &points[i];
            let gap = fv - fu - gu.dot(&d);
            let mono = (gv - gu).dot(&d);
            min_mono = min_mono.min(mono);
            if worst_pair.is_none_or(|(_, _, g)| gap < g) {
                worst_pair = Some((i, j, gap));
            }
        }
        report.convexity = ConvexityStats {
            min_first_order_gap: worst_pair.map_or(0.0, |(_, _, g)| g),
            min_monotonicity: if min_mono.is_finite() { min_mono } else { 0.0 },
            pairs: opts.pairs,
        };
        if let Some((i, j, gap)) = worst_pair {
            if gap < -tol.tol_equal {
                return Ok(Verdict {
                    kind: VerdictKind::NotConvex {
                        u: points[i].clone(),
                        v: points[j].clone(),
                        gap,
                    },
                    report,
                });
            }
        }
    }

    // Kink probe.
    let threshold = 100.0 * tol.tol_grad_norm;
    let probes = points
        .par_iter()
        .map(|p| probe_smoothness(field, p, tol.fd_step, threshold))
        .collect::<Result<Vec<_>>>()?;
    let kink = probes
        .iter()
        .enumerate()
        .filter(|(_, p)| p.flagged)
        .max_by(|a, b| a.1.evidence().total_cmp(&b.1.evidence()));
    if let Some((k, probe)) = kink {
        return Ok(Verdict {
            kind: VerdictKind::NotDifferentiable {
                point: points[k].clone(),
                evidence: probe.evidence(),
            },
            report,
        });
    }

    let stats = report.gradnorm;
    if stats.spread > 10.0 * tol.tol_grad_norm {
        return Ok(Verdict {
            kind: VerdictKind::NotConstantNorm {
                spread: stats.spread,
                min: stats.min,
                max: stats.max,
            },
            report,
        });
    }

    if stats.mean <= tol.tol_grad_norm {
        let kind = VerdictKind::Constant { c0: evals[0].0 };
        return Ok(Verdict { kind, report });
    }

    // Affine fit from the mean gradient.
    let n = field.dim();
    let count = evals.len() as f64;
    let c1 = VecN::from_raw(
        (0..n)
            .map(|k| evals.iter().map(|(_, g)| g[k]).sum::<f64>() / count)
            .collect(),
    );
    let c0 = points
        .iter()
        .zip(&evals)
        .map(|(p, (f, _))| f - c1.dot(p))
        .sum::<f64>()
        / count;
    let fresh = sample_points(domain, opts.fresh.max(1), opts.seed.wrapping_add(0xf7e5_0002))?;
    let residuals = fresh
        .par_iter()
        .map(|p| Ok((field.value(p)? - c1.dot(p) - c0).abs()))
        .collect::<Result<Vec<f64>>>()?;
    let residual = residuals.into_iter().fold(0.0, f64::max);
    report.affine_residual = Some(residual);

    let kind = if residual <= tol.tol_equal {
        VerdictKind::Affine { c1, c0 }
    } else {
        VerdictKind::NotConstantNorm {
            spread: stats.spread,
            min: stats.min,
            max: stats.max,
        }
    };
    Ok(Verdict { kind, report })
}

/// `u ↦ k·f(u)` with gradients scaled to match.
pub(crate) fn scale_field(field: &ScalarField, k: f64) -> ScalarField {
    let base = field.clone();
    let grad_base = field.clone();
    let scaled = ScalarField::new(field.dim(), field.label.clone(), move |u: &VecN| {
        base.value(u).map_or(f64::NAN, |f| k * f)
    })
    .expect("dimension >= 1")
    .with_gradient(move |u: &VecN| {
        grad_base
            .gradient(u)
            .map_or_else(|_| VecN::from_raw(vec![f64::NAN; u.dim()]), |g| g.scaled(k))
    });
    scaled.with_claims(field.claims)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numcore::make_zoo_field;

    fn classify(spec: &str, dim: usize) -> Verdict {
        let f = make_zoo_field(spec, dim).unwrap();
        classify_field(
            &f,
            &Domain::cube(dim, 2.0).unwrap(),
            &Tolerances::default(),
            Mode::Convex,
            &ClassifyOptions::default(),
        )
        .unwrap()
    }

    #[test]
    fn affine_is_recovered() {
        let v = classify("affine:0.6,0.8:1", 2);
        match &v.kind {
            VerdictKind::Affine { c1, c0 } => {
                assert!((c1[0] - 0.6).abs() < 1e-8 && (c1[1] - 0.8).abs() < 1e-8);
                assert!((c0 - 1.0).abs() < 1e-8);
            }
            other => panic!("{other:?}"),
        }
        assert!(v.report.affine_residual.unwrap() < 1e-12);
    }

    #[test]
    fn sqrt_quadratic_has_varying_norm() {
        match classify("sqrt_quadratic", 2).kind {
            VerdictKind::NotConstantNorm { min, max, .. } => {
                assert_eq!(min, 0.0);
                // |u|/√(1+|u|²) peaks below 2√2/3 at the corners.
                assert!(max < 2.0 * 2f64.sqrt() / 3.0 && max > 0.85, "{max}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn norm_is_flagged_at_the_origin() {
        match classify("norm:0", 2).kind {
            VerdictKind::NotDifferentiable { point, evidence } => {
                assert!(point.norm() < 0.1);
                assert!(evidence > 1.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parabola_distance_is_not_convex() {
        match classify("parabola_distance", 2).kind {
            VerdictKind::NotConvex { gap, .. } => assert!(gap < -1e-3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn constant_and_one_dimensional_paths() {
        assert_eq!(classify("constant:2.5", 3).kind, VerdictKind::Constant { c0: 2.5 });
        assert!(matches!(classify("affine:-2:1", 1).kind, VerdictKind::Affine { .. }));
        assert!(matches!(classify("norm:0", 1).kind, VerdictKind::NotDifferentiable { .. }));
    }

    #[test]
    fn concave_mode_negates() {
        let f = make_zoo_field("affine:0.6,0.8:1", 2).unwrap();
        let d = Domain::cube(2, 2.0).unwrap();
        let v = classify_field(&f, &d, &Tolerances::default(), Mode::Concave, &ClassifyOptions::default()).unwrap();
        match v.kind {
            VerdictKind::Affine { c1, c0 } => {
                assert!((c1[0] - 0.6).abs() < 1e-12 && (c0 - 1.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        let q = make_zoo_field("quadratic", 2).unwrap();
        let v = classify_field(&q, &d, &Tolerances::default(), Mode::Concave, &ClassifyOptions::default()).unwrap();
        assert!(matches!(v.kind, VerdictKind::NotConvex { .. }));
    }

    #[test]
    fn rejects_degenerate_and_mismatched_domains() {
        let f = make_zoo_field("constant:0", 2).unwrap();
        let tiny = Domain::new_ball(VecN::zeros(2), 1e-5).unwrap();
        assert!(matches!(
            classify_field(&f, &tiny, &Tolerances::default(), Mode::Convex, &ClassifyOptions::default()),
            Err(Error::DegenerateDomain { .. })
        ));
        let wrong = Domain::cube(3, 1.0).unwrap();
        assert!(classify_field(&f, &wrong, &Tolerances::default(), Mode::Convex, &ClassifyOptions::default()).is_err());
    }

    #[test]
    fn claims_contradictions() {
        let convex_c1 = Claims {
            convex: true,
            differentiable: true,
        };
        let kinked = Claims {
            convex: true,
            differentiable: false,
        };
        let z = VecN::zeros(1);
        assert!(VerdictKind::NotConvex { u: z.clone(), v: z.clone(), gap: -1.0 }.contradicts(&convex_c1));
        assert!(!VerdictKind::NotDifferentiable { point: z.clone(), evidence: 2.0 }.contradicts(&kinked));
        assert!(VerdictKind::Constant { c0: 0.0 }.contradicts(&kinked));
        assert!(!VerdictKind::NotConstantNorm { spread: 1.0, min: 0.0, max: 1.0 }.contradicts(&convex_c1));
    }
}
