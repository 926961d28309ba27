//! Seeded sampling of boxes and balls.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::numcore::VecN;

/// A sampling region.
#[derive(Clone, Debug, PartialEq)]
pub enum Domain {
    Box { lo: VecN, hi: VecN },
    Ball { center: VecN, radius: f64 },
}

impl Domain {
    pub fn new_box(lo: VecN, hi: VecN) -> Result<Self> {
        lo.check_dim(hi.dim())?;
        if lo.as_slice().iter().zip(hi.as_slice()).any(|(l, h)| l >= h) {
            return Err(Error::InvalidParameter(
                "box requires lo < hi componentwise".into(),
            ));
        }
        Ok(Domain::Box { lo, hi })
    }

    pub fn new_ball(center: VecN, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "ball radius must be > 0, got {radius}"
            )));
        }
        Ok(Domain::Ball { center, radius })
    }

    /// `[-half, half]^dim`.
    pub fn cube(dim: usize, half: f64) -> Result<Self> {
        Domain::new_box(VecN::new(vec![-half; dim])?, VecN::new(vec![half; dim])?)
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Box { lo, .. } => lo.dim(),
            Domain::Ball { center, .. } => center.dim(),
        }
    }

    pub fn center(&self) -> VecN {
        match self {
            Domain::Box { lo, hi } => (lo + hi).scaled(0.5),
            Domain::Ball { center, .. } => center.clone(),
        }
    }

    /// Smallest box side, or the ball diameter.
    pub fn min_extent(&self) -> f64 {
        match self {
            Domain::Box { lo, hi } => lo
                .as_slice()
                .iter()
                .zip(hi.as_slice())
                .map(|(l, h)| h - l)
                .fold(f64::INFINITY, f64::min),
            Domain::Ball { radius, .. } => 2.0 * radius,
        }
    }

    pub fn contains(&self, u: &VecN) -> bool {
        if u.dim() != self.dim() {
            return false;
        }
        match self {
            Domain::Box { lo, hi } => u
                .as_slice()
                .iter()
                .zip(lo.as_slice().iter().zip(hi.as_slice()))
                .all(|(x, (l, h))| x >= l && x <= h),
            Domain::Ball { center, radius } => u.distance(center) <= *radius,
        }
    }
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `count` points drawn uniformly from `domain`; identical for identical
/// `(domain, count, seed)`.
pub fn sample_points(domain: &Domain, count: usize, seed: u64) -> Result<Vec<VecN>> {
    if count == 0 {
        return Err(Error::InvalidParameter("sample count must be >= 1".into()));
    }
    let mut rng = seeded_rng(seed);
    Ok((0..count).map(|_| draw(domain, &mut rng)).collect())
}

pub(crate) fn draw<R: Rng>(domain: &Domain, rng: &mut R) -> VecN {
    match domain {
        Domain::Box { lo, hi } => VecN::from_raw(
            lo.as_slice()
                .iter()
                .zip(hi.as_slice())
                .map(|(l, h)| l + (h - l) * rng.random::<f64>())
                .collect(),
        ),
        Domain::Ball { center, radius } => {
            let dim = center.dim();
            let dir = loop {
                let g = VecN::from_raw((0..dim).map(|_| rng.sample(StandardNormal)).collect());
                if let Some(d) = g.normalized() {
                    break d;
                }
            };
            let rho = radius * rng.random::<f64>().powf(1.0 / dim as f64);
            center.axpy(rho, &dir)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> VecN {
        VecN::new(c.to_vec()).unwrap()
    }

    #[test]
    fn box_samples_are_contained_and_reproducible() {
        let d = Domain::new_box(v(&[0.0, 0.0]), v(&[1.0, 1.0])).unwrap();
        let a = sample_points(&d, 3, 42).unwrap();
        let b = sample_points(&d, 3, 42).unwrap();
        assert_eq!(a.len(), 3);
        assert!(a.iter().all(|p| d.contains(p)));
        let bits = |pts: &[VecN]| -> Vec<u64> {
            pts.iter()
                .flat_map(|p| p.as_slice().iter().map(|x| x.to_bits()))
                .collect()
        };
        assert_eq!(bits(&a), bits(&b));
        assert_ne!(a, sample_points(&d, 3, 43).unwrap());
    }

    #[test]
    fn ball_samples_stay_inside() {
        let d = Domain::new_ball(v(&[0.0, 0.0]), 1.0).unwrap();
        let pts = sample_points(&d, 1000, 7).unwrap();
        assert!(pts.iter().all(|p| p.norm() <= 1.0));
    }

    #[test]
    fn box_mean_is_near_center() {
        let d = Domain::cube(2, 2.0).unwrap();
        let pts = sample_points(&d, 10_000, 1).unwrap();
        for k in 0..2 {
            let mean = pts.iter().map(|p| p[k]).sum::<f64>() / pts.len() as f64;
            assert!(mean.abs() < 0.1, "coordinate {k} mean {mean}");
        }
    }

    #[test]
    fn ball_radial_law_is_uniform() {
        // P(|u| <= r/2) = 2^-dim for uniform-in-ball.
        let d = Domain::new_ball(v(&[0.0, 0.0, 0.0]), 2.0).unwrap();
        let pts = sample_points(&d, 20_000, 3).unwrap();
        let inner = pts.iter().filter(|p| p.norm() <= 1.0).count() as f64 / 20_000.0;
        assert!((inner - 0.125).abs() < 0.01, "{inner}");
    }

    #[test]
    fn invalid_domains() {
        assert!(Domain::new_box(v(&[0.0, 1.0]), v(&[1.0, 1.0])).is_err());
        assert!(Domain::new_box(v(&[0.0]), v(&[1.0, 1.0])).is_err());
        assert!(Domain::new_ball(v(&[0.0]), 0.0).is_err());
        assert!(sample_points(&Domain::cube(1, 1.0).unwrap(), 0, 0).is_err());
    }
}
