use super::{RatioContext, RatioFlag, RatioRecord};
use crate::error::{Error, Result};
use crate::exponents::{interp_l4_exponents, interp_sec4_exponents, Exponent, LMPair, PQPair, Sec4Interpolation};
use crate::fields::SpaceTimeField;
use crate::mixed_norms::{speed, CylinderQuadrature, Integrand, ParabolicCylinder, QuadratureConfig, Source};

const BALANCE_TOL: f64 = 1e-9;

/// `‖g‖_{L^{p,q}}` with the spatial and temporal measures normalized to one.
pub fn normalized_norm(quad: &CylinderQuadrature, src: Source<'_>, pq: PQPair, g: &Integrand<'_>) -> f64 {
    let raw = quad.mixed_norm(src, pq, g);
    raw / (quad.spatial_measure().powf(pq.p.reciprocal()) * quad.time_length().powf(pq.q.reciprocal()))
}

fn pair(p: f64, q: Exponent) -> PQPair {
    PQPair { p: Exponent::Finite(p), q }
}

fn region_context(field: &SpaceTimeField, region: &ParabolicCylinder, note: String) -> RatioContext {
    RatioContext {
        center: Some(region.center),
        field: field.label.clone(),
        exponents: None,
        note: Some(note),
    }
}

/// `‖u‖_{L⁴}` against `‖u‖_{r,s}^{1/2} ‖u‖_{2,∞}^{1/s} ‖u‖_{6,2}^{3/(2r)}`, normalized norms.
pub fn check_l4_interpolation(
    field: &SpaceTimeField,
    region: &ParabolicCylinder,
    rs: PQPair,
    cfg: &QuadratureConfig,
) -> Result<RatioRecord> {
    let w = interp_l4_exponents(rs)?;
    let quad = CylinderQuadrature::new(field.grid(), region, cfg)?;
    let src = Source::for_field(field, cfg)?;
    let n = |pq: PQPair| normalized_norm(&quad, src, pq, &speed);
    let lhs = n(pair(4.0, Exponent::Finite(4.0)));
    let rhs = n(rs).powf(w.half)
        * n(pair(2.0, Exponent::Infinite)).powf(w.one_over_q)
        * n(pair(6.0, Exponent::Finite(2.0))).powf(w.three_over_2p);
    let mut rec = RatioRecord::new(
        "l4_interpolation",
        region.radius,
        lhs,
        rhs,
        region_context(field, region, format!("(r, s) = ({}, {})", rs.p, rs.q)),
    )
    .with_coverage(quad.flags())
    .flag(RatioFlag::PairingAssumed);
    if w.balance_defect(rs) > BALANCE_TOL {
        rec = rec.flag(RatioFlag::Unbalanced);
    }
    Ok(rec)
}

/// Interpolation of `L^{l,m}` into `L^k` (`l > m`) or `L⁴` (`l ≤ m`), normalized norms.
pub fn check_sec4_interpolation(
    field: &SpaceTimeField,
    region: &ParabolicCylinder,
    lm: LMPair,
    cfg: &QuadratureConfig,
) -> Result<RatioRecord> {
    let case = interp_sec4_exponents(lm)?;
    let quad = CylinderQuadrature::new(field.grid(), region, cfg)?;
    let src = Source::for_field(field, cfg)?;
    let n = |pq: PQPair| normalized_norm(&quad, src, pq, &speed);
    let base = n(lm.as_pq());
    let energy = n(pair(2.0, Exponent::Infinite));
    let (l, m) = (lm.l, lm.m);
    let (lhs, rhs, defect) = match case {
        Sec4Interpolation::SpatialDominant { k, sigma } => {
            let lhs = n(pair(k, Exponent::Finite(k)));
            let rhs = base.powf(sigma) * energy.powf(1.0 - sigma);
            let space = sigma / l + (1.0 - sigma) / 2.0 - 1.0 / k;
            let time = sigma / m - 1.0 / k;
            (lhs, rhs, space.abs().max(time.abs()))
        }
        Sec4Interpolation::TemporalDominant {
            alpha,
            beta,
            sigma,
            degenerate,
        } => {
            if degenerate {
                return Err(Error::Unsupported(format!(
                    "(l, m) = ({l}, {m}) zeroes the interpolation exponent alpha"
                )));
            }
            let w2 = (6.0 - alpha) * (1.0 - sigma) / (2.0 * alpha);
            let w3 = 2.0 * (1.0 - sigma) / beta;
            let lhs = n(pair(4.0, Exponent::Finite(4.0)));
            let rhs = base.powf(sigma) * energy.powf(w2) * n(pair(6.0, Exponent::Finite(2.0))).powf(w3);
            let total = sigma + w2 + w3 - 1.0;
            let space = sigma / l + w2 / 2.0 + w3 / 6.0 - 0.25;
            let time = sigma / m + w3 / 2.0 - 0.25;
            (lhs, rhs, total.abs().max(space.abs()).max(time.abs()))
        }
    };
    let mut rec = RatioRecord::new(
        "integrability_interpolation",
        region.radius,
        lhs,
        rhs,
        region_context(field, region, format!("(l, m) = ({l}, {m})")),
    )
    .with_coverage(quad.flags());
    if defect > BALANCE_TOL || case.sigma() < 0.0 || case.sigma() > 1.0 {
        rec = rec.flag(RatioFlag::Unbalanced);
    }
    Ok(rec)
}
