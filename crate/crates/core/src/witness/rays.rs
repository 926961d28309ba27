use crate::error::{Error, Result};
use crate::numcore::{ScalarField, VecN};

fn ray_parameters(s_min: f64, s_max: f64, samples: usize) -> Result<impl Iterator<Item = f64>> {
    if !(s_min.is_finite() && s_max.is_finite() && s_min < s_max) {
        return Err(Error::InvalidParameter(format!(
            "need finite s_min < s_max, got [{s_min}, {s_max}]"
        )));
    }
    if samples < 2 {
        return Err(Error::InvalidParameter("need at least 2 ray samples".into()));
    }
    let span = s_max - s_min;
    Ok((0..samples).map(move |k| s_min + span * k as f64 / (samples - 1) as f64))
}

/// `max_s |f(u + s∇f(u)) − s − f(u)|` over evenly spaced `s`.
pub fn ray_deviation(field: &ScalarField, u: &VecN, s_min: f64, s_max: f64, samples: usize) -> Result<f64> {
    let params = ray_parameters(s_min, s_max, samples)?;
    let f0 = field.value(u)?;
    let g0 = field.gradient(u)?;
    let mut worst: f64 = 0.0;
    for s in params {
        let fs = field.value(&u.axpy(s, &g0))?;
        worst = worst.max((fs - s - f0).abs());
    }
    Ok(worst)
}

/// `max_s |∇f(u + s∇f(u)) − ∇f(u)|` over evenly spaced `s`.
pub fn ray_gradient_drift(field: &ScalarField, u: &VecN, s_min: f64, s_max: f64, samples: usize) -> Result<f64> {
    let params = ray_parameters(s_min, s_max, samples)?;
    let g0 = field.gradient(u)?;
    let mut worst: f64 = 0.0;
    for s in params {
        let gs = field.gradient(&u.axpy(s, &g0))?;
        worst = worst.max((&gs - &g0).norm());
    }
    Ok(worst)
}
