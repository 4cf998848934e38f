//! Mixed Lebesgue norms, means and Morrey norms over parabolic cylinders.

mod cylinder;
mod quadrature;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::PQPair;
use crate::fields::{SpaceTimeField, SpaceTimePoint};

pub use cylinder::{infer_clip, parabolic_distance, Clip, ParabolicCylinder};
pub use quadrature::{
    CellProbe, CoverageFlag, CylinderQuadrature, Evaluation, Integrand, PointProbe, Probe,
    QuadratureConfig, Source, TimeSample, time_sample,
};

pub(crate) use cylinder::dist;
pub(crate) use quadrature::time_pieces;

pub fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// `|u|` at a probe.
pub fn speed(probe: &dyn Probe, _: usize) -> f64 {
    norm3(probe.velocity())
}

/// `‖g‖_{L^{p,q}}` over the clipped cylinder.
pub fn lpq_norm(
    field: &SpaceTimeField,
    cyl: &ParabolicCylinder,
    pq: PQPair,
    cfg: &QuadratureConfig,
    g: &Integrand<'_>,
) -> Result<f64> {
    let q = CylinderQuadrature::new(field.grid(), cyl, cfg)?;
    Ok(q.mixed_norm(Source::for_field(field, cfg)?, pq, g))
}

/// `‖u‖_{L^{p,q}}` over the clipped cylinder.
pub fn velocity_norm(
    field: &SpaceTimeField,
    cyl: &ParabolicCylinder,
    pq: PQPair,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    lpq_norm(field, cyl, pq, cfg, &speed)
}

/// Mean of `g` over the clipped ball at one time piece of the cylinder.
pub fn spatial_mean(
    field: &SpaceTimeField,
    cyl: &ParabolicCylinder,
    piece: usize,
    cfg: &QuadratureConfig,
    g: &Integrand<'_>,
) -> Result<f64> {
    let q = CylinderQuadrature::new(field.grid(), cyl, cfg)?;
    let ts = *q.pieces().get(piece).ok_or_else(|| {
        Error::Range(format!("time piece {piece} of {} does not exist", q.pieces().len()))
    })?;
    let src = Source::for_field(field, cfg)?;
    Ok(q.slice_integral(src, ts, piece, g) / q.spatial_measure())
}

/// Sampled Morrey norm together with the lattice it was taken over.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MorreyValue {
    pub value: f64,
    pub gamma: f64,
    pub argmax_center: SpaceTimePoint,
    pub argmax_radius: f64,
    pub centers: Vec<SpaceTimePoint>,
    pub radii: Vec<f64>,
}

/// `sup r^{2−γ} (⨍_{Q(z,r)∩ω} |f|²)^{1/2}` over the given centres and radii.
pub fn morrey_norm(
    field: &SpaceTimeField,
    gamma: f64,
    centers: &[SpaceTimePoint],
    radii: &[f64],
    cfg: &QuadratureConfig,
) -> Result<MorreyValue> {
    if !(gamma > 0.0 && gamma <= 2.0) {
        return Err(Error::domain("gamma", gamma, "(0, 2]"));
    }
    if centers.is_empty() || radii.is_empty() {
        return Err(Error::Config("Morrey norm needs at least one centre and one radius".into()));
    }
    let src = Source::for_field(field, cfg)?;
    let f2 = |p: &dyn Probe, _: usize| {
        let f = p.forcing();
        f[0] * f[0] + f[1] * f[1] + f[2] * f[2]
    };
    let mut best = (f64::NEG_INFINITY, centers[0], radii[0]);
    for z in centers {
        for &r in radii {
            let cyl = ParabolicCylinder::new(*z, r, Clip::Interior)?;
            let q = CylinderQuadrature::new(field.grid(), &cyl, cfg)?;
            let mean = q.integral(src, &f2) / (q.spatial_measure() * q.time_length());
            let v = r.powf(2.0 - gamma) * mean.max(0.0).sqrt();
            if v > best.0 {
                best = (v, *z, r);
            }
        }
    }
    Ok(MorreyValue {
        value: best.0,
        gamma,
        argmax_center: best.1,
        argmax_radius: best.2,
        centers: centers.to_vec(),
        radii: radii.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::Exponent;
    use crate::fields::{generate_zero, with_forcing, Forcing, GridSpec};
    use std::f64::consts::PI;

    fn grid() -> GridSpec {
        GridSpec::centered([32, 32, 32], 0.05, 0.0, 0.01, 20).unwrap()
    }

    #[test]
    fn constant_norm_matches_volume_formula() {
        let f = generate_zero(grid()).unwrap();
        let cyl = ParabolicCylinder::new(SpaceTimePoint::new([0.0; 3], 0.15), 0.35, Clip::Interior).unwrap();
        let c = 2.5;
        let g = |_: &dyn Probe, _: usize| c;
        let pq = PQPair::finite(3.0, 4.0).unwrap();
        let v = lpq_norm(&f, &cyl, pq, &QuadratureConfig::default(), &g).unwrap();
        let r: f64 = 0.35;
        let exact = c * (4.0 * PI * r.powi(3) / 3.0).powf(1.0 / 3.0) * (r * r).powf(0.25);
        assert!((v / exact - 1.0).abs() < 5e-3, "{v} {exact}");
        let inf = PQPair::new(Exponent::Infinite, Exponent::Infinite).unwrap();
        let v = lpq_norm(&f, &cyl, inf, &QuadratureConfig::default(), &g).unwrap();
        assert!((v - c).abs() < 1e-12);
    }

    #[test]
    fn zero_field_norm_is_zero() {
        let f = generate_zero(grid()).unwrap();
        let cyl = ParabolicCylinder::new(SpaceTimePoint::new([0.0; 3], 0.15), 0.3, Clip::Interior).unwrap();
        let pq = PQPair::finite(2.25, 3.0).unwrap();
        assert_eq!(velocity_norm(&f, &cyl, pq, &QuadratureConfig::default()).unwrap(), 0.0);
    }

    #[test]
    fn odd_function_mean_vanishes() {
        let f = generate_zero(grid()).unwrap();
        let cyl = ParabolicCylinder::new(SpaceTimePoint::new([0.0; 3], 0.15), 0.3, Clip::Interior).unwrap();
        let g = |p: &dyn Probe, _: usize| p.position()[0] * p.position()[1].powi(2);
        let m = spatial_mean(&f, &cyl, 0, &QuadratureConfig::default(), &g).unwrap();
        assert!(m.abs() < 1e-14);
        let one = |_: &dyn Probe, _: usize| 1.0;
        assert!((spatial_mean(&f, &cyl, 0, &QuadratureConfig::default(), &one).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn morrey_constant_forcing() {
        let f = with_forcing(&generate_zero(grid()).unwrap(), Forcing::Constant { value: [0.0, 3.0, 4.0] });
        let centers = [SpaceTimePoint::new([0.0; 3], 0.15)];
        let radii = [0.2, 0.3];
        let cfg = QuadratureConfig::default();
        let m2 = morrey_norm(&f, 2.0, &centers, &radii, &cfg).unwrap();
        assert!((m2.value - 5.0).abs() < 1e-10);
        let m1 = morrey_norm(&f, 1.0, &centers, &radii, &cfg).unwrap();
        assert!((m1.value - 5.0 * 0.3).abs() < 1e-10);
        assert_eq!(m1.argmax_radius, 0.3);
        assert!(morrey_norm(&f, 1.0, &[], &radii, &cfg).is_err());
        assert!(morrey_norm(&f, 2.5, &centers, &radii, &cfg).is_err());
    }
}
