//! Command-line front end: `check`, `field`, `witness` and `zoo`.
//!
//! Exit codes: 0 on success, 1 when a verdict contradicts the field's own
//! convexity/differentiability claims, 2 on usage or runtime errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::distfield::{emit_grid, write_file, GraphSpec, GridColumn, GridSpec};
use crate::error::{Error, Result};
use crate::numcore::{Claims, Domain, Tolerances, VecN, ZooSpec, ZOO_CATALOG};
use crate::witness::{classify_field, run_witness, ClassifyOptions, Mode, RunInfo, Verdict, VerdictKind};

#[derive(Debug, Parser)]
#[command(name = "unitgrad", version, about = "Distance fields and constant-gradient-norm verdicts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify a zoo field over a box or ball.
    Check(CheckArgs),
    /// Tabulate the distance field of a graph on a grid.
    Field(FieldArgs),
    /// Classify a field and run every proof-step witness on it.
    Witness(WitnessArgs),
    /// List the available field specs.
    Zoo,
}

#[derive(Debug, Args)]
pub struct TolArgs {
    #[arg(long = "tol-grad")]
    pub tol_grad: Option<f64>,
    #[arg(long = "tol-res")]
    pub tol_res: Option<f64>,
    #[arg(long = "tol-equal")]
    pub tol_equal: Option<f64>,
    #[arg(long = "fd-step")]
    pub fd_step: Option<f64>,
    #[arg(long = "singular-margin")]
    pub singular_margin: Option<f64>,
}

impl TolArgs {
    pub fn resolve(&self) -> Result<Tolerances> {
        let d = Tolerances::default();
        let tol = Tolerances {
            tol_grad_norm: self.tol_grad.unwrap_or(d.tol_grad_norm),
            tol_residual: self.tol_res.unwrap_or(d.tol_residual),
            tol_equal: self.tol_equal.unwrap_or(d.tol_equal),
            fd_step: self.fd_step.unwrap_or(d.fd_step),
            singular_margin: self.singular_margin.unwrap_or(d.singular_margin),
        };
        tol.validate()?;
        Ok(tol)
    }
}

#[derive(Debug, Args)]
pub struct DomainArgs {
    /// Box corners `lo1,..,lon,hi1,..,hin`.
    #[arg(long = "box", allow_hyphen_values = true, conflicts_with = "ball")]
    pub bbox: Option<String>,
    /// Ball `c1,..,cn,radius`.
    #[arg(long, allow_hyphen_values = true)]
    pub ball: Option<String>,
    /// Dimension for specs that do not fix one, used with the default box.
    #[arg(long)]
    pub dim: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub field: String,
    #[command(flatten)]
    pub domain: DomainArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `convex` or `concave`.
    #[arg(long, default_value = "convex")]
    pub mode: Mode,
    #[arg(long, default_value_t = 256)]
    pub samples: usize,
    /// JSON verdict document.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub tol: TolArgs,
}

#[derive(Debug, Args)]
pub struct FieldArgs {
    /// `parabola` or `sine`.
    #[arg(long, default_value = "parabola")]
    pub graph: String,
    /// `lo1,lo2,hi1,hi2`.
    #[arg(long = "box", allow_hyphen_values = true, default_value = "-2,-2,2,2")]
    pub bbox: String,
    #[arg(long, default_value_t = 200)]
    pub nx: usize,
    #[arg(long, default_value_t = 200)]
    pub ny: usize,
    /// CSV output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Binary PGM image of one column.
    #[arg(long)]
    pub pgm: Option<PathBuf>,
    /// `value` or `gradnorm`.
    #[arg(long = "pgm-column", default_value = "value")]
    pub pgm_column: GridColumn,
    #[command(flatten)]
    pub tol: TolArgs,
}

#[derive(Debug, Args)]
pub struct WitnessArgs {
    #[arg(long)]
    pub field: String,
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    #[command(flatten)]
    pub domain: DomainArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "convex")]
    pub mode: Mode,
    #[arg(long, default_value_t = 256)]
    pub samples: usize,
    /// JSON report.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub tol: TolArgs,
}

fn parse_list(text: &str, what: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("bad number `{t}` in {what}")))
        })
        .collect()
}

fn parse_box(text: &str) -> Result<Domain> {
    let v = parse_list(text, "--box")?;
    if v.is_empty() || v.len() % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "--box needs 2n numbers lo1,..,lon,hi1,..,hin, got {}",
            v.len()
        )));
    }
    let (lo, hi) = v.split_at(v.len() / 2);
    Domain::new_box(VecN::new(lo.to_vec())?, VecN::new(hi.to_vec())?)
}

fn parse_ball(text: &str) -> Result<Domain> {
    let mut v = parse_list(text, "--ball")?;
    if v.len() < 2 {
        return Err(Error::InvalidParameter("--ball needs c1,..,cn,radius".into()));
    }
    let r = v.pop().expect("len >= 2");
    Domain::new_ball(VecN::new(v)?, r)
}

impl DomainArgs {
    fn resolve(&self, spec: &ZooSpec) -> Result<Domain> {
        if let Some(b) = &self.bbox {
            return parse_box(b);
        }
        if let Some(b) = &self.ball {
            return parse_ball(b);
        }
        let dim = self.dim.or(spec.natural_dim()).unwrap_or(2);
        Domain::cube(dim, 2.0)
    }
}

/// Whether `kind` disagrees with the claims of the field it came from. In
/// concave mode only the differentiability claim is tested, since claims
/// describe convexity of `f` itself.
pub fn verdict_contradicts(kind: &VerdictKind, claims: &Claims, mode: Mode) -> bool {
    match mode {
        Mode::Convex => kind.contradicts(claims),
        Mode::Concave => match kind {
            VerdictKind::NotDifferentiable { .. } => claims.differentiable,
            VerdictKind::Affine { .. } | VerdictKind::Constant { .. } => !claims.differentiable,
            _ => false,
        },
    }
}

fn print_header(out: &mut impl Write, seed: Option<u64>, tol: &Tolerances) -> std::io::Result<()> {
    if let Some(seed) = seed {
        writeln!(out, "seed: {seed}")?;
    }
    writeln!(out, "tolerances: {tol}")
}

fn print_verdict(out: &mut impl Write, verdict: &Verdict) -> std::io::Result<()> {
    writeln!(out, "verdict: {}", verdict.kind.name())?;
    match &verdict.kind {
        VerdictKind::Affine { c1, c0 } => writeln!(out, "  c1 = {:?}\n  c0 = {c0}", c1.as_slice()),
        VerdictKind::Constant { c0 } => writeln!(out, "  c0 = {c0}"),
        VerdictKind::NotConstantNorm { spread, min, max } => {
            writeln!(out, "  |grad f| ranges over [{min}, {max}] (spread {spread:e})")
        }
        VerdictKind::NotConvex { u, v, gap } => writeln!(
            out,
            "  first-order gap {gap:e} between u = {:?} and v = {:?}",
            u.as_slice(),
            v.as_slice()
        ),
        VerdictKind::NotDifferentiable { point, evidence } => writeln!(
            out,
            "  kink near {:?} (slope jump {evidence:e})",
            point.as_slice()
        ),
    }
}

fn write_json(path: &std::path::Path, doc: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(doc).expect("JSON values always serialize");
    text.push('\n');
    write_file(path, text.as_bytes())
}

fn io(e: std::io::Error) -> Error {
    Error::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    }
}

#[allow(clippy::too_many_arguments)]
fn classify_command(
    out: &mut impl Write,
    spec_text: &str,
    domain: &DomainArgs,
    seed: u64,
    mode: Mode,
    samples: usize,
    tol: &TolArgs,
    witness_radius: Option<f64>,
    json_out: Option<&PathBuf>,
) -> Result<bool> {
    let tol = tol.resolve()?;
    print_header(out, Some(seed), &tol).map_err(io)?;
    let spec: ZooSpec = spec_text.parse()?;
    let domain = domain.resolve(&spec)?;
    let field = spec.build(domain.dim())?;
    let opts = ClassifyOptions {
        samples,
        seed,
        ..Default::default()
    };
    let verdict = match witness_radius {
        Some(r) => run_witness(&field, &domain, r, &tol, mode, &opts)?,
        None => classify_field(&field, &domain, &tol, mode, &opts)?,
    };
    writeln!(out, "field: {spec} (dim {})", field.dim()).map_err(io)?;
    print_verdict(out, &verdict).map_err(io)?;
    if witness_radius.is_some() {
        let r = &verdict.report;
        let max_dev = r.rays.iter().map(|x| x.deviation).fold(0.0, f64::max);
        let max_drift = r.rays.iter().map(|x| x.gradient_drift).fold(0.0, f64::max);
        writeln!(out, "rays: {} checked, max deviation {max_dev:e}, max drift {max_drift:e}", r.rays.len())
            .map_err(io)?;
        for lg in &r.line_gaps {
            writeln!(out, "line gap: {:e}, max residual {:e}", lg.gap, lg.max_residual()).map_err(io)?;
        }
        for fp in &r.fixed_points {
            writeln!(
                out,
                "{} point at r = {}: residual {:e}, ||p| - r| = {:e}, converged {}",
                fp.variant, fp.radius, fp.residual, fp.norm_error, fp.converged
            )
            .map_err(io)?;
        }
    }
    if let Some(path) = json_out {
        let label = spec.to_string();
        let doc = verdict.to_json(&RunInfo {
            field: &label,
            domain: &domain,
            mode,
            seed,
            tolerances: &tol,
        });
        write_json(path, &doc)?;
        writeln!(out, "wrote {}", path.display()).map_err(io)?;
    }
    let contradiction = verdict_contradicts(&verdict.kind, &field.claims, mode);
    if contradiction {
        writeln!(out, "verdict contradicts the field's claims {:?}", field.claims).map_err(io)?;
    }
    Ok(contradiction)
}

fn field_command(out: &mut impl Write, args: &FieldArgs) -> Result<()> {
    let tol = args.tol.resolve()?;
    print_header(out, None, &tol).map_err(io)?;
    let graph = GraphSpec::from_name(&args.graph)?;
    let corners = parse_list(&args.bbox, "--box")?;
    let [l1, l2, h1, h2] = corners[..] else {
        return Err(Error::InvalidParameter("--box needs lo1,lo2,hi1,hi2".into()));
    };
    let spec = GridSpec::new([l1, l2], [h1, h2], args.nx, args.ny)?;
    let grid = emit_grid(&graph, &spec, &tol)?;
    let mut counts = std::collections::BTreeMap::new();
    for r in &grid.records {
        *counts.entry(r.class.as_str()).or_insert(0usize) += 1;
    }
    writeln!(out, "grid: {}x{} nodes of the {} distance field", args.nx, args.ny, args.graph).map_err(io)?;
    for (class, n) in counts {
        writeln!(out, "  {class}: {n}").map_err(io)?;
    }
    if let Some(path) = &args.out {
        grid.write_csv(path)?;
        writeln!(out, "wrote {}", path.display()).map_err(io)?;
    }
    if let Some(path) = &args.pgm {
        grid.write_pgm(path, args.pgm_column)?;
        writeln!(out, "wrote {}", path.display()).map_err(io)?;
    }
    Ok(())
}

fn zoo_command(out: &mut impl Write) -> Result<()> {
    print_header(out, None, &Tolerances::default()).map_err(io)?;
    for (spec, what) in ZOO_CATALOG {
        writeln!(out, "{spec:<26} {what}").map_err(io)?;
    }
    writeln!(out, "graphs for `field`: parabola, sine").map_err(io)
}

/// Runs one invocation, writing to the given streams; returns the exit code.
pub fn run_with<I, T>(args: I, out: &mut impl Write, err: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    let result = match &cli.command {
        Command::Check(a) => classify_command(
            out,
            &a.field,
            &a.domain,
            a.seed,
            a.mode,
            a.samples,
            &a.tol,
            None,
            a.out.as_ref(),
        ),
        Command::Witness(a) => classify_command(
            out,
            &a.field,
            &a.domain,
            a.seed,
            a.mode,
            a.samples,
            &a.tol,
            Some(a.radius),
            a.out.as_ref(),
        ),
        Command::Field(a) => field_command(out, a).map(|_| false),
        Command::Zoo => zoo_command(out).map(|_| false),
    };
    match result {
        Ok(false) => 0,
        Ok(true) => 1,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

/// Runs one invocation against the process's stdout and stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("unitgrad").chain(args.iter().copied());
        let code = run_with(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn check_affine() {
        let (code, out, _) = run_capture(&["check", "--field", "affine:0.6,0.8:1.0", "--box", "-2,-2,2,2", "--seed", "0"]);
        assert_eq!(code, 0);
        assert!(out.contains("verdict: Affine"), "{out}");
        assert!(out.contains("seed: 0") && out.contains("tolerances: tol_grad_norm=1e-6"));
    }

    #[test]
    fn usage_errors_exit_two() {
        let (code, _, err) = run_capture(&["frobnicate"]);
        assert_eq!(code, 2);
        assert!(err.contains("Usage"), "{err}");
        assert_eq!(run_capture(&["check", "--field", "affine:1:0", "--bogus"]).0, 2);
        let (code, _, err) = run_capture(&["check", "--field", "wobbly"]);
        assert_eq!(code, 2);
        assert!(err.contains("unknown field"), "{err}");
        assert_eq!(run_capture(&["check", "--field", "norm", "--box", "1,2,3"]).0, 2);
    }

    #[test]
    fn domain_parsing() {
        assert_eq!(parse_box("-1,0,1,2").unwrap().dim(), 2);
        assert!(parse_box("1,0").is_err());
        let ball = parse_ball("0,0,0,1.5").unwrap();
        assert_eq!(ball.dim(), 3);
        assert_eq!(ball.min_extent(), 3.0);
    }

    #[test]
    fn contradiction_in_concave_mode() {
        let claims = Claims {
            convex: true,
            differentiable: true,
        };
        let z = VecN::zeros(2);
        let nc = VerdictKind::NotConvex { u: z.clone(), v: z, gap: -1.0 };
        assert!(verdict_contradicts(&nc, &claims, Mode::Convex));
        assert!(!verdict_contradicts(&nc, &claims, Mode::Concave));
    }

    #[test]
    fn zoo_lists_specs() {
        let (code, out, _) = run_capture(&["zoo"]);
        assert_eq!(code, 0);
        assert!(out.contains("smoothed_norm:eps:c0"));
    }
}
