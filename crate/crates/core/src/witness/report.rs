use serde::Serialize;
use serde_json::{json, Value};

use crate::error::Result;
use crate::numcore::{sample_points, Domain, ScalarField, Tolerances, VecN};
use crate::witness::verdict::{classify_field, scale_field, ClassifyOptions, Mode, Verdict, VerdictKind};
use crate::witness::{
    brouwer_fixed_point, line_pair_witness, ray_deviation, ray_gradient_drift, resolvent_point, FixedPointOptions,
    LinePairReport,
};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct GradNormStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// `max − min`.
    pub spread: f64,
}

impl GradNormStats {
    pub fn from_norms(norms: &[f64]) -> Self {
        if norms.is_empty() {
            return GradNormStats::default();
        }
        let min = norms.iter().copied().fold(f64::INFINITY, f64::min);
        let max = norms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = norms.iter().sum::<f64>() / norms.len() as f64;
        GradNormStats {
            min,
            max,
            mean,
            spread: max - min,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct ConvexityStats {
    pub min_first_order_gap: f64,
    pub min_monotonicity: f64,
    pub pairs: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RayRecord {
    pub base: VecN,
    pub s_min: f64,
    pub s_max: f64,
    pub deviation: f64,
    pub gradient_drift: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FixedPointRecord {
    /// `brouwer` or `resolvent`.
    pub variant: &'static str,
    pub radius: f64,
    pub point: VecN,
    pub residual: f64,
    pub converged: bool,
    /// `| |point| − radius |`.
    pub norm_error: f64,
}

/// Numerical evidence gathered while classifying a field.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct WitnessReport {
    pub gradnorm: GradNormStats,
    pub convexity: ConvexityStats,
    /// Largest `|f − ⟨c1,u⟩ − c0|` on fresh samples, when a fit was tried.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub affine_residual: Option<f64>,
    pub fixed_points: Vec<FixedPointRecord>,
    pub rays: Vec<RayRecord>,
    pub line_gaps: Vec<LinePairReport>,
}

/// Classifies `field`, then runs the proof-step witnesses on its rescaling
/// `k·f` with `k` the reciprocal sampled mean gradient norm (negated in
/// concave mode), so an affine field becomes unit-slope convex.
///
/// Rays start at seeded domain points and line pairs join consecutive ones;
/// points with a vanishing gradient are skipped. The two fixed-point
/// constructions at `radius` run only when the field's claims allow them.
pub fn run_witness(
    field: &ScalarField,
    domain: &Domain,
    radius: f64,
    tol: &Tolerances,
    mode: Mode,
    opts: &ClassifyOptions,
) -> Result<Verdict> {
    let mut verdict = classify_field(field, domain, tol, mode, opts)?;
    let mean = verdict.report.gradnorm.mean;
    let k = if mean > tol.tol_grad_norm { 1.0 / mean } else { 1.0 };
    let unit = match mode {
        Mode::Convex => scale_field(field, k),
        Mode::Concave => scale_field(&field.negated(), k),
    };
    let report = &mut verdict.report;

    let count = opts.ray_checks.max(2 * opts.line_checks).max(1);
    let bases = sample_points(domain, count, opts.seed.wrapping_add(0x7a15_0003))?;
    let mut moving = Vec::with_capacity(bases.len());
    for p in bases {
        if unit.gradient(&p)?.norm() > tol.tol_grad_norm {
            moving.push(p);
        }
    }
    for p in moving.iter().take(opts.ray_checks) {
        report.rays.push(RayRecord {
            base: p.clone(),
            s_min: -10.0,
            s_max: 10.0,
            deviation: ray_deviation(&unit, p, -10.0, 10.0, 41)?,
            gradient_drift: ray_gradient_drift(&unit, p, -10.0, 10.0, 41)?,
        });
    }
    if field.dim() > 1 {
        for pair in moving.chunks_exact(2).take(opts.line_checks) {
            report.line_gaps.push(line_pair_witness(&unit, &pair[0], &pair[1], tol)?);
        }
    }

    let fp_opts = FixedPointOptions {
        seed: opts.seed,
        tol_residual: tol.tol_residual,
        tol_equal: tol.tol_equal,
        ..Default::default()
    };
    let claims = unit.claims;
    let mut runs = Vec::new();
    if claims.differentiable {
        runs.push(("brouwer", brouwer_fixed_point(&unit, radius, &fp_opts)?));
    }
    if claims.differentiable && claims.convex {
        runs.push(("resolvent", resolvent_point(&unit, radius, &fp_opts)?));
    }
    for (variant, fp) in runs {
        report.fixed_points.push(FixedPointRecord {
            variant,
            radius,
            norm_error: (fp.point.norm() - radius).abs(),
            point: fp.point,
            residual: fp.residual,
            converged: fp.converged,
        });
    }
    Ok(verdict)
}

fn domain_json(domain: &Domain) -> Value {
    match domain {
        Domain::Box { lo, hi } => json!({"kind": "box", "lo": lo, "hi": hi}),
        Domain::Ball { center, radius } => json!({"kind": "ball", "center": center, "radius": radius}),
    }
}

impl VerdictKind {
    fn params_json(&self) -> Value {
        match self {
            VerdictKind::Affine { c1, c0 } => json!({"c1": c1, "c0": c0}),
            VerdictKind::Constant { c0 } => json!({"c0": c0}),
            _ => json!({}),
        }
    }

    fn evidence_json(&self) -> Value {
        match self {
            VerdictKind::Affine { .. } | VerdictKind::Constant { .. } => json!({}),
            VerdictKind::NotConstantNorm { spread, min, max } => {
                json!({"spread": spread, "min": min, "max": max})
            }
            VerdictKind::NotConvex { u, v, gap } => json!({"u": u, "v": v, "gap": gap}),
            VerdictKind::NotDifferentiable { point, evidence } => {
                json!({"point": point, "evidence": evidence})
            }
        }
    }
}

/// Context echoed into the JSON document next to the verdict.
#[derive(Clone, Debug)]
pub struct RunInfo<'a> {
    pub field: &'a str,
    pub domain: &'a Domain,
    pub mode: Mode,
    pub seed: u64,
    pub tolerances: &'a Tolerances,
}

impl Verdict {
    /// The machine-readable document written by `check --out`. Keys are
    /// sorted, so equal inputs give byte-identical output.
    pub fn to_json(&self, info: &RunInfo<'_>) -> Value {
        json!({
            "field": info.field,
            "domain": domain_json(info.domain),
            "mode": match info.mode { Mode::Convex => "convex", Mode::Concave => "concave" },
            "seed": info.seed,
            "tolerances": info.tolerances,
            "verdict": {
                "kind": self.kind.name(),
                "params": self.kind.params_json(),
                "evidence": self.kind.evidence_json(),
            },
            "report": self.report,
        })
    }
}
