use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::numcore::{draw, seeded_rng, Claims, Domain, ScalarField, Tolerances, VecN};

type GraphFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GraphGradFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Which closed-form machinery, if any, applies to a graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphKind {
    /// `g(x) = x²` in the plane.
    Parabola,
    General,
}

/// The graph `{(x, g(x)) : x ∈ ℝⁿ⁻¹}` of a smooth function.
#[derive(Clone)]
pub struct GraphSpec {
    ambient_dim: usize,
    g: GraphFn,
    dg: Option<GraphGradFn>,
    pub label: String,
    kind: GraphKind,
}

impl fmt::Debug for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GraphSpec")
            .field("ambient_dim", &self.ambient_dim)
            .field("analytic_dg", &self.dg.is_some())
            .field("label", &self.label)
            .field("kind", &self.kind)
            .finish()
    }
}

impl GraphSpec {
    pub fn new<G>(ambient_dim: usize, label: impl Into<String>, g: G) -> Result<Self>
    where
        G: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        if ambient_dim < 2 {
            return Err(Error::InvalidParameter(format!(
                "graph ambient dimension must be >= 2, got {ambient_dim}"
            )));
        }
        Ok(GraphSpec {
            ambient_dim,
            g: Arc::new(g),
            dg: None,
            label: label.into(),
            kind: GraphKind::General,
        })
    }

    pub fn with_gradient<D>(mut self, dg: D) -> Self
    where
        D: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        self.dg = Some(Arc::new(dg));
        self
    }

    /// The parabola `g(x) = x²`.
    pub fn parabola() -> Self {
        GraphSpec {
            ambient_dim: 2,
            g: Arc::new(|x: &[f64]| x[0] * x[0]),
            dg: Some(Arc::new(|x: &[f64]| vec![2.0 * x[0]])),
            label: "parabola".into(),
            kind: GraphKind::Parabola,
        }
    }

    /// The paraboloid `g(x) = |x|²` over ℝⁿ⁻¹.
    pub fn paraboloid(ambient_dim: usize) -> Result<Self> {
        Ok(
            GraphSpec::new(ambient_dim, format!("paraboloid{ambient_dim}"), |x: &[f64]| {
                x.iter().map(|c| c * c).sum()
            })?
            .with_gradient(|x: &[f64]| x.iter().map(|c| 2.0 * c).collect()),
        )
    }

    /// `g(x) = sin x` in the plane.
    pub fn sine() -> Self {
        GraphSpec::new(2, "sine", |x: &[f64]| x[0].sin())
            .expect("dimension 2")
            .with_gradient(|x: &[f64]| vec![x[0].cos()])
    }

    /// Looks up a named graph: `parabola`, `sine`, `paraboloid3`.
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "parabola" => Ok(GraphSpec::parabola()),
            "sine" => Ok(GraphSpec::sine()),
            "paraboloid3" => GraphSpec::paraboloid(3),
            other => Err(Error::InvalidParameter(format!(
                "unknown graph `{other}` (expected parabola, sine or paraboloid3)"
            ))),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn eval_g(&self, x: &[f64]) -> f64 {
        (self.g)(x)
    }

    /// `∇g`, analytic when supplied, otherwise central differences.
    pub fn eval_dg(&self, x: &[f64]) -> Vec<f64> {
        match &self.dg {
            Some(dg) => dg(x),
            None => {
                let mut probe = x.to_vec();
                (0..x.len())
                    .map(|i| {
                        let h = 1e-6 * x[i].abs().max(1.0);
                        probe[i] = x[i] + h;
                        let fp = (self.g)(&probe);
                        probe[i] = x[i] - h;
                        let fm = (self.g)(&probe);
                        probe[i] = x[i];
                        (fp - fm) / (2.0 * h)
                    })
                    .collect()
            }
        }
    }

    fn hessian_g(&self, x: &[f64]) -> DMatrix<f64> {
        let m = x.len();
        let scale = if self.dg.is_some() { 1e-6 } else { 1e-4 };
        let mut h = DMatrix::zeros(m, m);
        let mut probe = x.to_vec();
        for j in 0..m {
            let step = scale * x[j].abs().max(1.0);
            probe[j] = x[j] + step;
            let gp = self.eval_dg(&probe);
            probe[j] = x[j] - step;
            let gm = self.eval_dg(&probe);
            probe[j] = x[j];
            for i in 0..m {
                h[(i, j)] = (gp[i] - gm[i]) / (2.0 * step);
            }
        }
        (&h + h.transpose()) * 0.5
    }
}

/// Multi-start settings for [`project_to_graph`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectionOptions {
    /// Seeded perturbations, used in ± pairs (rounded up to even).
    pub perturbations: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub tol_residual: f64,
    pub tol_equal: f64,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        ProjectionOptions::from_tolerances(&Tolerances::default())
    }
}

impl ProjectionOptions {
    pub fn from_tolerances(tol: &Tolerances) -> Self {
        ProjectionOptions {
            perturbations: 8,
            seed: 0,
            max_iter: 100,
            tol_residual: tol.tol_residual,
            tol_equal: tol.tol_equal,
        }
    }
}

/// Nearest point on a graph.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionResult {
    /// `x*`, of dimension n−1.
    pub minimizer: Vec<f64>,
    /// `(x*, g(x*))`.
    pub foot: VecN,
    /// The distance `|foot − u|`.
    pub value: f64,
    /// `max_k |(g(x*) − uₙ)·∂ₖg(x*) + x*ₖ − uₖ|`.
    pub stationarity_residual: f64,
    /// Another start reached a different foot at the same distance.
    pub multiple: bool,
}

struct Candidate {
    x: Vec<f64>,
    value: f64,
    residual: f64,
    local_min: bool,
}

/// Stationarity map `F(x) = (g(x) − uₙ)∇g(x) + x − u'` and the squared
/// distance `φ(x)`.
fn stationarity(graph: &GraphSpec, base: &[f64], un: f64, x: &[f64]) -> (Vec<f64>, f64, f64, Vec<f64>) {
    let lift = graph.eval_g(x) - un;
    let dg = graph.eval_dg(x);
    let f: Vec<f64> = (0..x.len()).map(|k| lift * dg[k] + x[k] - base[k]).collect();
    let phi = x
        .iter()
        .zip(base)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        + lift * lift;
    (f, phi, lift, dg)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, c| m.max(c.abs()))
}

fn phi_at(graph: &GraphSpec, base: &[f64], un: f64, x: &[f64]) -> f64 {
    let lift = graph.eval_g(x) - un;
    x.iter()
        .zip(base)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        + lift * lift
}

/// `J = I + ∇g∇gᵀ + (g − uₙ)∇²g`.
fn jacobian(graph: &GraphSpec, x: &[f64], lift: f64, dg: &[f64]) -> DMatrix<f64> {
    let m = x.len();
    let dgv = DVector::from_column_slice(dg);
    DMatrix::identity(m, m) + &dgv * dgv.transpose() + graph.hessian_g(x) * lift
}

/// `J` for a single graph variable, without allocating.
fn scalar_jacobian(graph: &GraphSpec, x: &[f64], lift: f64, dg: &[f64]) -> f64 {
    let scale = if graph.dg.is_some() { 1e-6 } else { 1e-4 };
    let step = scale * x[0].abs().max(1.0);
    let h = (graph.eval_dg(&[x[0] + step])[0] - graph.eval_dg(&[x[0] - step])[0]) / (2.0 * step);
    1.0 + dg[0] * dg[0] + lift * h
}

/// Newton step `−J⁻¹F` when `J` is positive definite, else `−F`.
fn newton_direction(graph: &GraphSpec, x: &[f64], f: &[f64], lift: f64, dg: &[f64]) -> (Vec<f64>, bool) {
    if x.len() == 1 {
        let j = scalar_jacobian(graph, x, lift, dg);
        return if j > 0.0 { (vec![-f[0] / j], true) } else { (vec![-f[0]], false) };
    }
    let fv = DVector::from_column_slice(f);
    match jacobian(graph, x, lift, dg).cholesky() {
        Some(c) => (c.solve(&(-&fv)).as_slice().to_vec(), true),
        None => (f.iter().map(|v| -v).collect(), false),
    }
}

/// Damped Newton on `F = 0` with a gradient-descent fallback.
fn descend(graph: &GraphSpec, base: &[f64], un: f64, x0: Vec<f64>, max_iter: usize) -> Candidate {
    let m = x0.len();
    let mut x = x0;
    for _ in 0..max_iter {
        let (f, phi, lift, dg) = stationarity(graph, base, un, &x);
        let scale = 1.0 + max_abs(&x) + max_abs(base) + lift.abs() * max_abs(&dg);
        if max_abs(&f) <= 8.0 * f64::EPSILON * scale {
            break;
        }
        let (dir, full_ok) = newton_direction(graph, &x, &f, lift, &dg);
        let slope = 2.0 * f.iter().zip(&dir).map(|(a, b)| a * b).sum::<f64>();
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..60 {
            let trial: Vec<f64> = x.iter().zip(dir.iter()).map(|(a, d)| a + t * d).collect();
            let p = phi_at(graph, base, un, &trial);
            let accept = if full_ok && t == 1.0 {
                p <= phi + 1e-14 * (1.0 + phi)
            } else {
                p <= phi + 1e-4 * t * slope
            };
            if accept {
                let tiny = trial
                    .iter()
                    .zip(&x)
                    .all(|(a, b)| (a - b).abs() <= f64::EPSILON * (1.0 + b.abs()));
                x = trial;
                moved = !tiny;
                break;
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }
    let (f, phi, lift, dg) = stationarity(graph, base, un, &x);
    let min_eig = if m == 1 {
        scalar_jacobian(graph, &x, lift, &dg)
    } else {
        jacobian(graph, &x, lift, &dg).symmetric_eigen().eigenvalues.min()
    };
    Candidate {
        value: phi.sqrt(),
        residual: max_abs(&f),
        local_min: min_eig >= -1e-8,
        x,
    }
}

/// Nearest point of the graph to `u`, by multi-start descent on the squared
/// distance.
///
/// Starts at `u' = (u₁, …, uₙ₋₁)` and at seeded ± perturbations inside the
/// ball of radius `|g(u') − uₙ|` around `u'`, which contains every minimizer.
pub fn project_to_graph(graph: &GraphSpec, u: &VecN, opts: &ProjectionOptions) -> Result<ProjectionResult> {
    u.check_dim(graph.ambient_dim)?;
    let n = graph.ambient_dim;
    let base = &u.as_slice()[..n - 1];
    let un = u[n - 1];
    let reach = (graph.eval_g(base) - un).abs();
    if !reach.is_finite() {
        return Err(Error::NonFinite {
            point: u.as_slice().to_vec(),
        });
    }

    let mut starts = vec![base.to_vec()];
    if reach > 0.0 {
        let ball = Domain::Ball {
            center: VecN::zeros(n - 1),
            radius: reach,
        };
        let mut rng = seeded_rng(opts.seed);
        for _ in 0..opts.perturbations.div_ceil(2) {
            let d = draw(&ball, &mut rng);
            starts.push(base.iter().zip(d.as_slice()).map(|(b, e)| b + e).collect());
            starts.push(base.iter().zip(d.as_slice()).map(|(b, e)| b - e).collect());
        }
    }

    let candidates: Vec<Candidate> = starts
        .into_iter()
        .map(|x0| descend(graph, base, un, x0, opts.max_iter))
        .collect();
    let best_residual = candidates.iter().map(|c| c.residual).fold(f64::INFINITY, f64::min);
    let good: Vec<&Candidate> = candidates
        .iter()
        .filter(|c| c.local_min && c.residual <= opts.tol_residual && c.value.is_finite())
        .collect();
    let best = good
        .iter()
        .copied()
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .ok_or(Error::NonConvergence {
            what: "graph projection",
            residual: best_residual,
            iterations: opts.max_iter,
        })?;

    let foot_of = |x: &[f64]| {
        let mut f = x.to_vec();
        f.push(graph.eval_g(x));
        VecN::from_raw(f)
    };
    let foot = foot_of(&best.x);
    let multiple = good.iter().any(|c| {
        (c.value - best.value).abs() <= opts.tol_equal && foot_of(&c.x).distance(&foot) > opts.tol_equal
    });
    Ok(ProjectionResult {
        minimizer: best.x.clone(),
        foot,
        value: best.value,
        stationarity_residual: best.residual,
        multiple,
    })
}

/// Distance value, gradient and the projection behind them.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldSample {
    pub value: f64,
    pub grad: VecN,
    pub projection: ProjectionResult,
}

/// Gradient of the distance from the projection: `∂ᵢf = −(πᵢ(u) − uᵢ)/f(u)`
/// for the first n−1 coordinates and `∂ₙf = −(g(π(u)) − uₙ)/f(u)`.
pub(crate) fn projection_gradient(u: &VecN, projection: &ProjectionResult) -> VecN {
    let n = u.dim();
    let f = projection.value;
    let mut grad: Vec<f64> = (0..n - 1)
        .map(|i| -(projection.minimizer[i] - u[i]) / f)
        .collect();
    grad.push(-(projection.foot[n - 1] - u[n - 1]) / f);
    VecN::from_raw(grad)
}

/// Distance to the graph and its gradient via the projection identity.
pub fn evaluate_distance_field(graph: &GraphSpec, u: &VecN, tol: &Tolerances) -> Result<FieldSample> {
    let projection = project_to_graph(graph, u, &ProjectionOptions::from_tolerances(tol))?;
    if projection.value <= tol.singular_margin {
        return Err(Error::OnGraph {
            value: projection.value,
        });
    }
    if projection.multiple {
        return Err(Error::AmbiguousProjection);
    }
    Ok(FieldSample {
        value: projection.value,
        grad: projection_gradient(u, &projection),
        projection,
    })
}

/// The parabola distance as a [`ScalarField`]. The gradient comes from the
/// nearest foot found (first one on the medial axis) and is zero on the graph.
pub fn parabola_distance_field() -> ScalarField {
    let graph = Arc::new(GraphSpec::parabola());
    let opts = ProjectionOptions::default();
    let g_eval = Arc::clone(&graph);
    ScalarField::new(2, "parabola_distance", move |u: &VecN| {
        project_to_graph(&g_eval, u, &opts).map_or(f64::NAN, |p| p.value)
    })
    .expect("dimension 2")
    .with_gradient(move |u: &VecN| match project_to_graph(&graph, u, &opts) {
        Ok(p) if p.value > 0.0 => projection_gradient(u, &p),
        Ok(_) => VecN::zeros(2),
        Err(_) => VecN::from_raw(vec![f64::NAN; 2]),
    })
    .with_claims(Claims {
        convex: false,
        differentiable: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> VecN {
        VecN::new(c.to_vec()).unwrap()
    }

    /// Brute-force nearest point on the parabola: a fine grid over [-3, 3]
    /// followed by golden-section refinement around the best cell.
    fn brute_parabola(u: (f64, f64)) -> (f64, f64) {
        let phi = |x: f64| (x - u.0).powi(2) + (x * x - u.1).powi(2);
        let n = 600_000;
        let mut best = (f64::INFINITY, 0.0);
        for k in 0..=n {
            let x = -3.0 + 6.0 * k as f64 / n as f64;
            let p = phi(x);
            if p < best.0 {
                best = (p, x);
            }
        }
        let (mut a, mut b) = (best.1 - 1e-5, best.1 + 1e-5);
        let gr = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let c = b - gr * (b - a);
            let d = a + gr * (b - a);
            if phi(c) < phi(d) {
                b = d;
            } else {
                a = c;
            }
        }
        let x = 0.5 * (a + b);
        (x, phi(x).sqrt())
    }

    #[test]
    fn below_the_vertex_projects_to_origin() {
        let p = project_to_graph(&GraphSpec::parabola(), &v(&[0.0, -1.0]), &ProjectionOptions::default()).unwrap();
        assert!(p.minimizer[0].abs() < 1e-12);
        assert!((p.value - 1.0).abs() < 1e-12);
        assert!(p.stationarity_residual < 1e-12);
        assert!(!p.multiple);
        assert!(p.foot.distance(&v(&[0.0, 0.0])) < 1e-12);
    }

    #[test]
    fn medial_point_has_two_feet() {
        let p = project_to_graph(&GraphSpec::parabola(), &v(&[0.0, 2.0]), &ProjectionOptions::default()).unwrap();
        assert!(p.multiple);
        assert!((p.minimizer[0].abs() - 1.5f64.sqrt()).abs() < 1e-9);
        assert!((p.value - 1.75f64.sqrt()).abs() < 1e-12);
        let (bx, bv) = brute_parabola((0.0, 2.0));
        assert!((bx.abs() - 1.224744871391589).abs() < 1e-8);
        assert!((bv - 1.3228756555322954).abs() < 1e-10);
    }

    #[test]
    fn matches_brute_force_at_unit_point() {
        let (bx, bv) = brute_parabola((1.0, 0.0));
        // Frozen oracle values.
        assert!((bx - 0.5897545123014583).abs() < 1e-8);
        assert!((bv - 0.5378414486981995).abs() < 1e-10);
        let p = project_to_graph(&GraphSpec::parabola(), &v(&[1.0, 0.0]), &ProjectionOptions::default()).unwrap();
        assert!((p.minimizer[0] - 0.5897545123014583).abs() < 1e-12);
        assert!((p.value - 0.5378414486981995).abs() < 1e-12);
        assert!(p.stationarity_residual <= 1e-10);
    }

    #[test]
    fn distance_gradient_from_projection() {
        let tol = Tolerances::default();
        let s = evaluate_distance_field(&GraphSpec::parabola(), &v(&[0.0, -1.0]), &tol).unwrap();
        assert!((s.value - 1.0).abs() < 1e-12);
        assert!(s.grad.distance(&v(&[0.0, -1.0])) < 1e-12);

        let s = evaluate_distance_field(&GraphSpec::parabola(), &v(&[1.0, 0.0]), &tol).unwrap();
        // (u − foot)/value from the brute-force projection.
        assert!((s.grad[0] - 0.7627628691).abs() < 1e-6);
        assert!((s.grad[1] + 0.6466782757).abs() < 1e-6);
        assert!((s.grad.norm() - 1.0).abs() < 1e-12);

        assert!(matches!(
            evaluate_distance_field(&GraphSpec::parabola(), &v(&[0.0, 2.0]), &tol),
            Err(Error::AmbiguousProjection)
        ));
        assert!(matches!(
            evaluate_distance_field(&GraphSpec::parabola(), &v(&[1.0, 1.0]), &tol),
            Err(Error::OnGraph { .. })
        ));
    }

    #[test]
    fn on_graph_and_dimension_errors() {
        let g = GraphSpec::parabola();
        let p = project_to_graph(&g, &v(&[1.5, 2.25]), &ProjectionOptions::default()).unwrap();
        assert_eq!(p.value, 0.0);
        assert!(project_to_graph(&g, &v(&[1.0]), &ProjectionOptions::default()).is_err());
        assert!(GraphSpec::new(1, "bad", |_: &[f64]| 0.0).is_err());
        assert!(GraphSpec::from_name("hyperbola").is_err());
    }

    #[test]
    fn general_graphs_without_analytic_gradient() {
        let g = GraphSpec::new(3, "bowl", |x: &[f64]| 0.5 * (x[0] * x[0] + x[1] * x[1])).unwrap();
        let u = v(&[0.3, -0.2, -1.0]);
        let p = project_to_graph(&g, &u, &ProjectionOptions::default()).unwrap();
        let a = project_to_graph(&GraphSpec::paraboloid(3).unwrap(), &v(&[0.0, 0.0, -1.0]), &ProjectionOptions::default()).unwrap();
        assert!((a.value - 1.0).abs() < 1e-12);
        assert!(p.stationarity_residual <= 1e-10);
        // Compare against a dense 2-D scan.
        let mut best = f64::INFINITY;
        for i in 0..=400 {
            for j in 0..=400 {
                let x = -1.0 + 2.0 * i as f64 / 400.0;
                let y = -1.0 + 2.0 * j as f64 / 400.0;
                let z = 0.5 * (x * x + y * y);
                best = best.min(((x - 0.3).powi(2) + (y + 0.2).powi(2) + (z + 1.0).powi(2)).sqrt());
            }
        }
        assert!(p.value <= best + 1e-12 && best - p.value < 1e-4);
    }

    #[test]
    fn sine_graph_unit_gradient() {
        let tol = Tolerances::default();
        let s = evaluate_distance_field(&GraphSpec::sine(), &v(&[0.4, 2.0]), &tol).unwrap();
        assert!((s.grad.norm() - 1.0).abs() < 1e-12);
        assert!(s.projection.stationarity_residual <= tol.tol_residual);
    }
}
