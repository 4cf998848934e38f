//! Scale-invariant functionals on parabolic cylinders.
//!
//! Every functional is evaluated on the cylinder clipped according to its
//! centre: half cylinders for centres on the wall of a half-space grid, full
//! cylinders otherwise.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{criterion_exponent, Exponent, ExponentSet, PQPair};
use crate::fields::{SpaceTimeField, SpaceTimePoint};
use crate::mixed_norms::{
    norm3, speed, Clip, CoverageFlag, CylinderQuadrature, ParabolicCylinder, Probe, QuadratureConfig, Source,
};

/// All functionals of one cylinder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionalReport {
    pub center: SpaceTimePoint,
    pub radius: f64,
    pub clip: Clip,
    pub flags: Vec<CoverageFlag>,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "G")]
    pub g: f64,
    #[serde(rename = "D_tilde")]
    pub d_tilde: f64,
    #[serde(rename = "D1_tilde")]
    pub d1_tilde: f64,
    #[serde(rename = "D")]
    pub d: f64,
    #[serde(rename = "D1")]
    pub d1: f64,
    pub criterion: f64,
    pub exponents: ExponentSet,
    pub pq: PQPair,
}

/// One cylinder with its quadrature rule and sample source.
pub struct CylinderEval<'a> {
    pub quad: CylinderQuadrature,
    pub src: Source<'a>,
    pub radius: f64,
}

impl<'a> CylinderEval<'a> {
    pub fn new(field: &'a SpaceTimeField, z: SpaceTimePoint, r: f64, cfg: &QuadratureConfig) -> Result<Self> {
        let cyl = ParabolicCylinder::for_grid(field.grid(), z, r)?;
        let quad = CylinderQuadrature::new(field.grid(), &cyl, cfg)?;
        Ok(CylinderEval {
            quad,
            src: Source::for_field(field, cfg)?,
            radius: r,
        })
    }

    /// `sup_s (1/r) ∫_B |u(·, s)|²`.
    pub fn a(&self) -> f64 {
        let g = |p: &dyn Probe, _: usize| {
            let u = p.velocity();
            u[0] * u[0] + u[1] * u[1] + u[2] * u[2]
        };
        self.quad.sup_in_time(self.src, &g).max(0.0) / self.radius
    }

    /// `(1/r²) ∫∫ |u|³`.
    pub fn c(&self) -> f64 {
        let g = |p: &dyn Probe, _: usize| norm3(p.velocity()).powi(3);
        self.quad.integral(self.src, &g) / (self.radius * self.radius)
    }

    /// `(1/r) ∫∫ |∇u|²`.
    pub fn e(&self) -> f64 {
        let g = |p: &dyn Probe, _: usize| {
            p.velocity_gradient()
                .iter()
                .flat_map(|row| row.iter())
                .map(|v| v * v)
                .sum::<f64>()
        };
        self.quad.integral(self.src, &g) / self.radius
    }

    /// `(1/r) ‖u‖_{L^{p,q}}`.
    pub fn g(&self, exponents: &ExponentSet) -> f64 {
        self.quad.mixed_norm(self.src, exponents.pq(), &speed) / self.radius
    }

    fn pressure_means(&self) -> Vec<f64> {
        self.quad.piece_means(self.src, &|p: &dyn Probe, _: usize| p.pressure())
    }

    /// `(1/r) ‖p − (p)_B(s)‖_{L^{κ*,λ}}`.
    pub fn d_tilde(&self, exponents: &ExponentSet) -> f64 {
        let means = self.pressure_means();
        let g = |p: &dyn Probe, i: usize| (p.pressure() - means[i]).abs();
        let pq = PQPair {
            p: Exponent::Finite(exponents.kappa_star),
            q: Exponent::Finite(exponents.lambda),
        };
        self.quad.mixed_norm(self.src, pq, &g) / self.radius
    }

    /// `(1/r) ‖∇p‖_{L^{κ,λ}}`.
    pub fn d1_tilde(&self, exponents: &ExponentSet) -> f64 {
        let g = |p: &dyn Probe, _: usize| norm3(p.pressure_gradient());
        let pq = PQPair {
            p: Exponent::Finite(exponents.kappa),
            q: Exponent::Finite(exponents.lambda),
        };
        self.quad.mixed_norm(self.src, pq, &g) / self.radius
    }

    /// `(1/r²) ∫∫ |p − (p)_B(s)|^{3/2}`.
    pub fn d(&self) -> f64 {
        let means = self.pressure_means();
        let g = |p: &dyn Probe, i: usize| (p.pressure() - means[i]).abs().powf(1.5);
        self.quad.integral(self.src, &g) / (self.radius * self.radius)
    }

    /// `r^{−3/2} ∫ (∫_B |∇p|^{9/8})^{4/3} ds`.
    pub fn d1(&self) -> f64 {
        let g = |p: &dyn Probe, _: usize| norm3(p.pressure_gradient()).powf(9.0 / 8.0);
        let slabs = self.quad.piece_integrals(self.src, &g);
        let total: f64 = slabs
            .iter()
            .zip(self.quad.pieces())
            .map(|(s, ts)| ts.weight * s.max(0.0).powf(4.0 / 3.0))
            .sum();
        total / self.radius.powf(1.5)
    }

    /// `r^{−(3/p+2/q−1)} ‖u‖_{L^{p,q}}`.
    pub fn criterion(&self, pq: PQPair) -> Result<f64> {
        let power = criterion_exponent(pq)?;
        Ok(self.radius.powf(-power) * self.quad.mixed_norm(self.src, pq, &speed))
    }

    /// `‖u‖_{L^{p,q}}` without scaling.
    pub fn velocity_norm(&self, pq: PQPair) -> f64 {
        self.quad.mixed_norm(self.src, pq, &speed)
    }

    pub fn report(&self, exponents: &ExponentSet, pq: PQPair) -> Result<FunctionalReport> {
        let cyl = self.quad.cylinder();
        Ok(FunctionalReport {
            center: cyl.center,
            radius: self.radius,
            clip: cyl.clip,
            flags: self.quad.flags().to_vec(),
            a: self.a(),
            c: self.c(),
            e: self.e(),
            g: self.g(exponents),
            d_tilde: self.d_tilde(exponents),
            d1_tilde: self.d1_tilde(exponents),
            d: self.d(),
            d1: self.d1(),
            criterion: self.criterion(pq)?,
            exponents: *exponents,
            pq,
        })
    }
}

pub fn functional_a(field: &SpaceTimeField, z: SpaceTimePoint, r: f64, cfg: &QuadratureConfig) -> Result<f64> {
    Ok(CylinderEval::new(field, z, r, cfg)?.a())
}

pub fn functional_c(field: &SpaceTimeField, z: SpaceTimePoint, r: f64, cfg: &QuadratureConfig) -> Result<f64> {
    Ok(CylinderEval::new(field, z, r, cfg)?.c())
}

pub fn functional_e(field: &SpaceTimeField, z: SpaceTimePoint, r: f64, cfg: &QuadratureConfig) -> Result<f64> {
    Ok(CylinderEval::new(field, z, r, cfg)?.e())
}

pub fn functional_g(
    field: &SpaceTimeField,
    z: SpaceTimePoint,
    r: f64,
    exponents: &ExponentSet,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    Ok(CylinderEval::new(field, z, r, cfg)?.g(exponents))
}

pub fn functional_d_tilde(
    field: &SpaceTimeField,
    z: SpaceTimePoint,
    r: f64,
    exponents: &ExponentSet,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    Ok(CylinderEval::new(field, z, r, cfg)?.d_tilde(exponents))
}

pub fn functional_d1_tilde(
    field: &SpaceTimeField,
    z: SpaceTimePoint,
    r: f64,
    exponents: &ExponentSet,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    Ok(CylinderEval::new(field, z, r, cfg)?.d1_tilde(exponents))
}

pub fn criterion_quantity(
    field: &SpaceTimeField,
    z: SpaceTimePoint,
    r: f64,
    pq: PQPair,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    CylinderEval::new(field, z, r, cfg)?.criterion(pq)
}

/// Reports for every radius, in the order given.
pub fn sweep(
    field: &SpaceTimeField,
    z: SpaceTimePoint,
    radii: &[f64],
    exponents: &ExponentSet,
    pq: PQPair,
    cfg: &QuadratureConfig,
) -> Result<Vec<FunctionalReport>> {
    radii
        .par_iter()
        .map(|&r| {
            CylinderEval::new(field, z, r, cfg)
                .and_then(|ev| ev.report(exponents, pq))
                .map_err(|e| match e {
                    Error::Resolution { .. } => e,
                    other => Error::Range(format!("radius {r}: {other}")),
                })
        })
        .collect()
}

/// Dyadic radii `r0, r0/2, …` (`count` values).
pub fn dyadic_radii(r0: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| r0 / f64::powi(2.0, k as i32)).collect()
}
