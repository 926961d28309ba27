//! Named test fields, addressed by colon-delimited spec strings such as
//! `affine:0.6,0.8:1.0` or `smoothed_norm:0.1:0`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::distfield;
use crate::error::{Error, Result};
use crate::numcore::{Claims, ScalarField, VecN};

/// A parsed zoo entry.
#[derive(Clone, Debug, PartialEq)]
pub enum ZooSpec {
    /// `⟨c1, u⟩ + c0`
    Affine { c1: Vec<f64>, c0: f64 },
    /// The constant `c0`.
    Constant { c0: f64 },
    /// `|u| + c0`
    Norm { c0: f64 },
    /// `√(eps² + |u|²) + c0`
    SmoothedNorm { eps: f64, c0: f64 },
    /// `√(1 + |u|²)`
    SqrtQuadratic,
    /// Distance to the graph of `x²` in the plane.
    ParabolaDistance,
    /// `½ uᵀQu`; `None` means the identity.
    Quadratic { q: Option<Vec<f64>> },
}

/// One-line usage strings for every zoo entry.
pub const ZOO_CATALOG: &[(&str, &str)] = &[
    ("affine:c1,..,cn:c0", "<c1,u> + c0 (convex, C1)"),
    ("constant:c0", "the constant c0 (convex, C1)"),
    ("norm:c0", "|u| + c0 (convex, kink at the origin)"),
    ("smoothed_norm:eps:c0", "sqrt(eps^2 + |u|^2) + c0 (convex, C1)"),
    ("sqrt_quadratic", "sqrt(1 + |u|^2) (convex, C1)"),
    ("parabola_distance", "distance to the graph of x^2, 2-D (not convex)"),
    ("quadratic[:q11,..,qnn]", "u^T Q u / 2, Q symmetric PSD (default identity)"),
];

fn parse_f64(tok: &str, what: &str) -> Result<f64> {
    tok.trim()
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::InvalidParameter(format!("bad {what} `{tok}`")))
}

fn parse_list(tok: &str, what: &str) -> Result<Vec<f64>> {
    tok.split(',').map(|t| parse_f64(t, what)).collect()
}

impl FromStr for ZooSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let arity = |n: usize| -> Result<()> {
            if parts.len() == n {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "`{s}`: expected {} parameter group(s), got {}",
                    n - 1,
                    parts.len() - 1
                )))
            }
        };
        match parts[0] {
            "affine" => {
                arity(3)?;
                Ok(ZooSpec::Affine {
                    c1: parse_list(parts[1], "coefficient")?,
                    c0: parse_f64(parts[2], "offset")?,
                })
            }
            "constant" => {
                arity(2)?;
                Ok(ZooSpec::Constant {
                    c0: parse_f64(parts[1], "offset")?,
                })
            }
            "norm" => {
                if parts.len() == 1 {
                    return Ok(ZooSpec::Norm { c0: 0.0 });
                }
                arity(2)?;
                Ok(ZooSpec::Norm {
                    c0: parse_f64(parts[1], "offset")?,
                })
            }
            "smoothed_norm" => {
                arity(3)?;
                let eps = parse_f64(parts[1], "eps")?;
                if eps <= 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "smoothed_norm needs eps > 0, got {eps}"
                    )));
                }
                Ok(ZooSpec::SmoothedNorm {
                    eps,
                    c0: parse_f64(parts[2], "offset")?,
                })
            }
            "sqrt_quadratic" => {
                arity(1)?;
                Ok(ZooSpec::SqrtQuadratic)
            }
            "parabola_distance" => {
                arity(1)?;
                Ok(ZooSpec::ParabolaDistance)
            }
            "quadratic" => {
                if parts.len() == 1 {
                    return Ok(ZooSpec::Quadratic { q: None });
                }
                arity(2)?;
                Ok(ZooSpec::Quadratic {
                    q: Some(parse_list(parts[1], "matrix entry")?),
                })
            }
            _ => Err(Error::UnknownField(s.to_string())),
        }
    }
}

impl fmt::Display for ZooSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        match self {
            ZooSpec::Affine { c1, c0 } => write!(f, "affine:{}:{c0}", list(c1)),
            ZooSpec::Constant { c0 } => write!(f, "constant:{c0}"),
            ZooSpec::Norm { c0 } => write!(f, "norm:{c0}"),
            ZooSpec::SmoothedNorm { eps, c0 } => write!(f, "smoothed_norm:{eps}:{c0}"),
            ZooSpec::SqrtQuadratic => f.write_str("sqrt_quadratic"),
            ZooSpec::ParabolaDistance => f.write_str("parabola_distance"),
            ZooSpec::Quadratic { q: None } => f.write_str("quadratic"),
            ZooSpec::Quadratic { q: Some(q) } => write!(f, "quadratic:{}", list(q)),
        }
    }
}

const CONVEX_C1: Claims = Claims {
    convex: true,
    differentiable: true,
};

impl ZooSpec {
    /// The dimension fixed by the spec itself, if any.
    pub fn natural_dim(&self) -> Option<usize> {
        match self {
            ZooSpec::Affine { c1, .. } => Some(c1.len()),
            ZooSpec::ParabolaDistance => Some(2),
            ZooSpec::Quadratic { q: Some(q) } => Some((q.len() as f64).sqrt().round() as usize),
            _ => None,
        }
    }

    /// Builds the field in ambient dimension `dim`.
    pub fn build(&self, dim: usize) -> Result<ScalarField> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        let label = self.to_string();
        let field = match self.clone() {
            ZooSpec::Affine { c1, c0 } => {
                if c1.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: c1.len(),
                    });
                }
                let c1 = VecN::new(c1)?;
                let grad = c1.clone();
                ScalarField::new(dim, label, move |u: &VecN| c1.dot(u) + c0)?
                    .with_gradient(move |_: &VecN| grad.clone())
                    .with_claims(CONVEX_C1)
            }
            ZooSpec::Constant { c0 } => ScalarField::new(dim, label, move |_: &VecN| c0)?
                .with_gradient(move |_: &VecN| VecN::zeros(dim))
                .with_claims(CONVEX_C1),
            ZooSpec::Norm { c0 } => ScalarField::new(dim, label, move |u: &VecN| u.norm() + c0)?
                .with_gradient(move |u: &VecN| u.normalized().unwrap_or_else(|| VecN::zeros(dim)))
                .with_claims(Claims {
                    convex: true,
                    differentiable: false,
                }),
            ZooSpec::SmoothedNorm { eps, c0 } => {
                let e2 = eps * eps;
                ScalarField::new(dim, label, move |u: &VecN| (e2 + u.norm_squared()).sqrt() + c0)?
                    .with_gradient(move |u: &VecN| u.scaled(1.0 / (e2 + u.norm_squared()).sqrt()))
                    .with_claims(CONVEX_C1)
            }
            ZooSpec::SqrtQuadratic => {
                ScalarField::new(dim, label, |u: &VecN| (1.0 + u.norm_squared()).sqrt())?
                    .with_gradient(|u: &VecN| u.scaled(1.0 / (1.0 + u.norm_squared()).sqrt()))
                    .with_claims(CONVEX_C1)
            }
            ZooSpec::ParabolaDistance => {
                if dim != 2 {
                    return Err(Error::DimensionMismatch {
                        expected: 2,
                        found: dim,
                    });
                }
                distfield::parabola_distance_field()
            }
            ZooSpec::Quadratic { q } => {
                let q = match q {
                    None => DMatrix::identity(dim, dim),
                    Some(entries) => {
                        if entries.len() != dim * dim {
                            return Err(Error::DimensionMismatch {
                                expected: dim * dim,
                                found: entries.len(),
                            });
                        }
                        DMatrix::from_row_slice(dim, dim, &entries)
                    }
                };
                check_psd(&q)?;
                let qe = q.clone();
                let apply = move |m: &DMatrix<f64>, u: &VecN| -> Vec<f64> {
                    (m * nalgebra::DVector::from_column_slice(u.as_slice()))
                        .iter()
                        .copied()
                        .collect()
                };
                let qg = q.clone();
                ScalarField::new(dim, label, move |u: &VecN| {
                    0.5 * u.dot(&VecN::from_raw(apply(&qe, u)))
                })?
                .with_gradient(move |u: &VecN| VecN::from_raw(apply(&qg, u)))
                .with_claims(CONVEX_C1)
            }
        };
        Ok(field)
    }
}

fn check_psd(q: &DMatrix<f64>) -> Result<()> {
    let asym = (q - q.transpose()).abs().max();
    if asym > 1e-12 * (1.0 + q.abs().max()) {
        return Err(Error::InvalidParameter("quadratic matrix must be symmetric".into()));
    }
    let min_eig = q.clone().symmetric_eigen().eigenvalues.min();
    if min_eig < -1e-12 * (1.0 + q.abs().max()) {
        return Err(Error::InvalidParameter(format!(
            "quadratic matrix must be positive semidefinite (min eigenvalue {min_eig:e})"
        )));
    }
    Ok(())
}

/// Parses `spec` and builds the field in dimension `dim`.
pub fn make_zoo_field(spec: &str, dim: usize) -> Result<ScalarField> {
    spec.parse::<ZooSpec>()?.build(dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numcore::{fd_gradient, sample_points, Domain};

    fn v(c: &[f64]) -> VecN {
        VecN::new(c.to_vec()).unwrap()
    }

    #[test]
    fn affine_gradient_is_its_coefficient() {
        let f = make_zoo_field("affine:0.6,0.8:1.0", 2).unwrap();
        let g = f.gradient(&v(&[7.0, -2.0])).unwrap();
        assert_eq!(g.as_slice(), &[0.6, 0.8]);
        assert!((g.norm() - 1.0).abs() < 1e-15);
        assert_eq!(f.claims, CONVEX_C1);
    }

    #[test]
    fn norm_has_unit_gradient_away_from_origin() {
        let f = make_zoo_field("norm:0", 3).unwrap();
        assert!(!f.claims.differentiable);
        for p in sample_points(&Domain::cube(3, 2.0).unwrap(), 50, 5).unwrap() {
            assert!((f.gradient(&p).unwrap().norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn smoothed_norm_gradient_is_below_one_and_varies() {
        let f = make_zoo_field("smoothed_norm:0.1:0", 2).unwrap();
        let a = f.gradient(&v(&[0.05, 0.0])).unwrap().norm();
        let b = f.gradient(&v(&[1.0, 1.0])).unwrap().norm();
        // |u| / √(0.01 + |u|²)
        assert!((a - 0.05 / (0.01f64 + 0.0025).sqrt()).abs() < 1e-14);
        assert!((b - 2f64.sqrt() / (0.01f64 + 2.0).sqrt()).abs() < 1e-14);
        assert!(a < b && b < 1.0);
    }

    #[test]
    fn parameter_errors() {
        assert!(matches!(make_zoo_field("wobble", 2), Err(Error::UnknownField(_))));
        assert!(make_zoo_field("smoothed_norm:0:0", 2).is_err());
        assert!(make_zoo_field("smoothed_norm:-1:0", 2).is_err());
        assert!(matches!(
            make_zoo_field("affine:1,2,3:0", 2),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(make_zoo_field("parabola_distance", 3).is_err());
        assert!(make_zoo_field("quadratic:1,2,2,1", 2).is_err());
        assert!(make_zoo_field("quadratic:1,0,1,1", 2).is_err());
        assert!(make_zoo_field("affine:x:0", 1).is_err());
    }

    #[test]
    fn spec_round_trips_through_display() {
        for s in [
            "affine:0.6,0.8:1",
            "constant:2",
            "norm:0",
            "smoothed_norm:0.1:0",
            "sqrt_quadratic",
            "parabola_distance",
            "quadratic",
            "quadratic:2,0,0,1",
        ] {
            assert_eq!(s.parse::<ZooSpec>().unwrap().to_string(), s);
        }
    }

    #[test]
    fn analytic_gradients_agree_with_central_differences() {
        let specs = [
            "affine:0.6,0.8:1",
            "constant:3",
            "smoothed_norm:0.5:0",
            "sqrt_quadratic",
            "quadratic:2,0.5,0.5,1",
            "parabola_distance",
        ];
        let domain = Domain::new_ball(VecN::zeros(2), 2.0).unwrap();
        let pts = sample_points(&domain, 100, 11).unwrap();
        for s in specs {
            let f = make_zoo_field(s, 2).unwrap();
            let mut worst: f64 = 0.0;
            for p in &pts {
                let fd = fd_gradient(&f, p, 1e-5).unwrap();
                let an = f.gradient(p).unwrap();
                worst = worst.max((&fd - &an).norm());
            }
            assert!(worst <= 1e-4, "{s}: {worst:e}");
        }
    }
}
