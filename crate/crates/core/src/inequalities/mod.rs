//! Inequality lemmas evaluated as dimensionless ratios.
//!
//! The absolute constants of the estimates are never assumed. Each check
//! reports `lhs / rhs` with the constant stripped; `0/0` is reported as `0`
//! and `x/0` as an explicit infinite ratio, both with a flag.

mod energy;
mod interpolation;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{ExponentSet, IDENTITY_TOL};
use crate::fields::{SpaceTimeField, SpaceTimePoint};
use crate::functionals::CylinderEval;
use crate::mixed_norms::{Clip, CoverageFlag, Probe, QuadratureConfig};

pub use energy::{bump, check_energy_inequality, Bump, CutoffSpec};
pub use interpolation::{check_l4_interpolation, check_sec4_interpolation, normalized_norm};

/// A ratio that may be infinite, serialized as a number or `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RatioRepr", into = "RatioRepr")]
pub enum Ratio {
    Finite(f64),
    Infinite,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RatioRepr {
    Number(f64),
    Text(String),
}

impl TryFrom<RatioRepr> for Ratio {
    type Error = String;

    fn try_from(r: RatioRepr) -> std::result::Result<Self, String> {
        match r {
            RatioRepr::Number(v) if v.is_finite() => Ok(Ratio::Finite(v)),
            RatioRepr::Text(s) if s == "inf" => Ok(Ratio::Infinite),
            _ => Err("ratio must be a finite number or \"inf\"".into()),
        }
    }
}

impl From<Ratio> for RatioRepr {
    fn from(r: Ratio) -> Self {
        match r {
            Ratio::Finite(v) => RatioRepr::Number(v),
            Ratio::Infinite => RatioRepr::Text("inf".into()),
        }
    }
}

impl Ratio {
    pub fn value(self) -> Option<f64> {
        match self {
            Ratio::Finite(v) => Some(v),
            Ratio::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Ratio::Finite(_))
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ratio::Finite(v) => write!(f, "{v}"),
            Ratio::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioFlag {
    ZeroOverZero,
    Infinite,
    /// Interpolation weights name `p, q` and were read as the given pair.
    PairingAssumed,
    /// Interpolation weights do not balance exactly.
    Unbalanced,
    /// An identity stated alongside the estimate does not hold for these exponents.
    LiteralIdentityDefect,
    TimeClipped,
    SpaceClipped,
    TouchesBoundary,
}

impl From<CoverageFlag> for RatioFlag {
    fn from(f: CoverageFlag) -> Self {
        match f {
            CoverageFlag::TimeClipped => RatioFlag::TimeClipped,
            CoverageFlag::SpaceClipped => RatioFlag::SpaceClipped,
            CoverageFlag::TouchesBoundary => RatioFlag::TouchesBoundary,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RatioContext {
    pub center: Option<SpaceTimePoint>,
    pub field: String,
    pub exponents: Option<ExponentSet>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioRecord {
    pub name: String,
    pub r: f64,
    pub lhs: f64,
    pub rhs_without_n: f64,
    pub ratio: Ratio,
    /// `rhs − lhs`, reported by balance checks.
    pub defect: Option<f64>,
    pub flags: Vec<RatioFlag>,
    pub context: RatioContext,
}

impl RatioRecord {
    pub fn new(name: &str, r: f64, lhs: f64, rhs: f64, context: RatioContext) -> Self {
        let mut flags = Vec::new();
        let ratio = if rhs > 0.0 {
            Ratio::Finite(lhs / rhs)
        } else if lhs == 0.0 {
            flags.push(RatioFlag::ZeroOverZero);
            Ratio::Finite(0.0)
        } else {
            flags.push(RatioFlag::Infinite);
            Ratio::Infinite
        };
        RatioRecord {
            name: name.to_string(),
            r,
            lhs,
            rhs_without_n: rhs,
            ratio,
            defect: None,
            flags,
            context,
        }
    }

    pub fn flag(mut self, f: RatioFlag) -> Self {
        if !self.flags.contains(&f) {
            self.flags.push(f);
            self.flags.sort();
        }
        self
    }

    pub fn with_coverage(self, flags: &[CoverageFlag]) -> Self {
        flags.iter().fold(self, |rec, f| rec.flag((*f).into()))
    }
}

/// Exponents of the three-factor Hölder step behind the scaled `L³` estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderExponents {
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
}

impl HolderExponents {
    pub fn new(e: &ExponentSet) -> Self {
        HolderExponents {
            alpha: 1.0 / e.q,
            beta: (1.0 - 1.0 / e.q) / 3.0,
            delta: 1.0 / e.p,
        }
    }

    /// Largest defect among the relations the Hölder steps use:
    /// `2α+6β+pδ = 3`, `α+β+δ = 1` and `3β+α = 1`.
    pub fn defect(&self, p: f64) -> f64 {
        let h = self;
        [
            2.0 * h.alpha + 6.0 * h.beta + p * h.delta - 3.0,
            h.alpha + h.beta + h.delta - 1.0,
            3.0 * h.beta + h.alpha - 1.0,
        ]
        .iter()
        .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Defect of the relation `3β + δ = 1` as literally stated; it holds only when `p = q`.
    pub fn literal_defect(&self) -> f64 {
        (3.0 * self.beta + self.delta - 1.0).abs()
    }
}

fn context(field: &SpaceTimeField, z: SpaceTimePoint, e: Option<&ExponentSet>) -> RatioContext {
    RatioContext {
        center: Some(z),
        field: field.label.clone(),
        exponents: e.copied(),
        note: None,
    }
}

fn require_clip(ev: &CylinderEval<'_>, want: Clip, what: &str) -> Result<()> {
    let got = ev.quad.cylinder().clip;
    if got != want {
        return Err(Error::Precondition(format!(
            "{what} needs a {} centre, got {:?} at {}",
            match want {
                Clip::Half => "boundary",
                Clip::Interior => "interior",
            },
            got,
            ev.quad.cylinder().center
        )));
    }
    Ok(())
}

/// `C(r)` against `A^{1/q} E^{1−1/q} G` at a boundary centre.
pub fn check_basiclemma(
    field: &SpaceTimeField,
    z: SpaceTimePoint,
    r: f64,
    exponents: &ExponentSet,
    cfg: &QuadratureConfig,
) -> Result<RatioRecord> {
    let h = HolderExponents::new(exponents);
    let d = h.defect(exponents.p);
    if d > IDENTITY_TOL {
        return Err(Error::Precondition(format!("Hölder exponent identities fail by {d:e}")));
    }
    let ev = CylinderEval::new(field, z, r, cfg)?;
    require_clip(&ev, Clip::Half, "the scaled L3 estimate")?;
    let (a, c, e, g) = (ev.a(), ev.c(), ev.e(), ev.g(exponents));
    let q = exponents.q;
    let rhs = a.powf(1.0 / q) * e.powf(1.0 - 1.0 / q) * g;
    let mut rec = RatioRecord::new("basic_l3", r, c, rhs, context(field, z, Some(exponents)))
        .with_coverage(ev.quad.flags());
    if h.literal_defect() > IDENTITY_TOL {
        rec = rec.flag(RatioFlag::LiteralIdentityDefect);
        rec.context.note = Some(format!("3*beta+delta-1 = {:e}", 3.0 * h.beta + h.delta - 1.0));
    }
    Ok(rec)
}

/// Interior `L³` estimate: `C` against `A^{1/q}E^{1−1/q}G + A^{1/2}G²`.
pub fn check_interior_l3(
    field: &SpaceTimeField,
    z: SpaceTimePoint,
    r: f64,
    exponents: &ExponentSet,
    cfg: &QuadratureConfig,
) -> Result<RatioRecord> {
    let ev = CylinderEval::new(field, z, r, cfg)?;
    require_clip(&ev, Clip::Interior, "the interior L3 estimate")?;
    let (a, c, e, g) = (ev.a(), ev.c(), ev.e(), ev.g(exponents));
    let q = exponents.q;
    let rhs = a.powf(1.0 / q) * e.powf(1.0 - 1.0 / q) * g + a.sqrt() * g * g;
    Ok(RatioRecord::new("interior_l3", r, c, rhs, context(field, z, Some(exponents))).with_coverage(ev.quad.flags()))
}

/// `A(r/2)+E(r/2)` against `C^{2/3}+C+G·D̃+r^{2(γ+1)}m_γ²`, all but the left side at radius `r`.
pub fn check_energy_consequence(
    field: &SpaceTimeField,
    z: SpaceTimePoint,
    r: f64,
    gamma: f64,
    morrey_value: f64,
    exponents: &ExponentSet,
    cfg: &QuadratureConfig,
) -> Result<RatioRecord> {
    let half = CylinderEval::new(field, z, 0.5 * r, cfg)?;
    let full = CylinderEval::new(field, z, r, cfg)?;
    let lhs = half.a() + half.e();
    let c = full.c();
    let rhs = c.powf(2.0 / 3.0)
        + c
        + full.g(exponents) * full.d_tilde(exponents)
        + r.powf(2.0 * (gamma + 1.0)) * morrey_value * morrey_value;
    Ok(RatioRecord::new("energy_consequence", r, lhs, rhs, context(field, z, Some(exponents)))
        .with_coverage(full.quad.flags()))
}

/// `|(u·∇)u|` at a probe.
pub fn advection_magnitude(p: &dyn Probe, _: usize) -> f64 {
    let u = p.velocity();
    let g = p.velocity_gradient();
    let mut s = 0.0;
    for row in &g {
        let v = row[0] * u[0] + row[1] * u[1] + row[2] * u[2];
        s += v * v;
    }
    s.sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Boundary,
    Interior,
}

/// `‖(u·∇)u‖_{L^{κ,λ}}` against `ρE^{1/λ}A^{(3−2κ)/(2κ)}` (plus the interior term).
pub fn check_nonlinear_term(
    field: &SpaceTimeField,
    z: SpaceTimePoint,
    rho: f64,
    exponents: &ExponentSet,
    mode: Mode,
    cfg: &QuadratureConfig,
) -> Result<RatioRecord> {
    let ev = CylinderEval::new(field, z, rho, cfg)?;
    let (k, l) = (exponents.kappa, exponents.lambda);
    let pair = crate::exponents::PQPair::finite(k, l)?;
    let lhs = ev.quad.mixed_norm(ev.src, pair, &advection_magnitude);
    let (a, e) = (ev.a(), ev.e());
    let mut rhs = rho * e.powf(1.0 / l) * a.powf((3.0 - 2.0 * k) / (2.0 * k));
    if mode == Mode::Interior {
        rhs += rho * e.sqrt() * a.powf((2.0 - k) / (2.0 * k)) * ev.g(exponents).powf((k - 1.0) / k);
    }
    let name = match mode {
        Mode::Boundary => "nonlinear_boundary",
        Mode::Interior => "nonlinear_interior",
    };
    Ok(RatioRecord::new(name, rho, lhs, rhs, context(field, z, Some(exponents))).with_coverage(ev.quad.flags()))
}

/// Pressure-gradient values `D̃₁(r)` and `D̃₁(ρ)` supplied from elsewhere, e.g. a pressure split.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct D1Values {
    pub at_r: f64,
    pub at_rho: f64,
}

/// `D̃₁(r)` against the two-scale pressure bound with `r ≤ ρ/4`.
#[allow(clippy::too_many_arguments)]
pub fn check_pressure_bound(
    field: &SpaceTimeField,
    z: SpaceTimePoint,
    r: f64,
    rho: f64,
    exponents: &ExponentSet,
    d1_values: Option<D1Values>,
    gamma: f64,
    morrey_value: f64,
    mode: Mode,
    cfg: &QuadratureConfig,
) -> Result<RatioRecord> {
    if !(r > 0.0 && r <= 0.25 * rho * (1.0 + 1e-12)) {
        return Err(Error::Precondition(format!("pressure bound needs 0 < r <= rho/4, got r = {r}, rho = {rho}")));
    }
    let big = CylinderEval::new(field, z, rho, cfg)?;
    let d1 = match d1_values {
        Some(v) => v,
        None => {
            let small = CylinderEval::new(field, z, r, cfg)?;
            D1Values {
                at_r: small.d1_tilde(exponents),
                at_rho: big.d1_tilde(exponents),
            }
        }
    };
    let (k, l) = (exponents.kappa, exponents.lambda);
    let (a, e) = (big.a(), big.e());
    let mut near = e.powf(1.0 / l) * a.powf((3.0 - 2.0 * k) / (2.0 * k)) + rho.powf(gamma + 1.0) * morrey_value;
    if mode == Mode::Interior {
        near += e.sqrt() * a.powf((2.0 - k) / (2.0 * k)) * big.g(exponents).powf((k - 1.0) / k);
    }
    let rhs = (rho / r) * near + (r / rho) * (e.sqrt() + d1.at_rho);
    let name = match mode {
        Mode::Boundary => "pressure_boundary",
        Mode::Interior => "pressure_interior",
    };
    let mut ctx = context(field, z, Some(exponents));
    ctx.note = Some(format!("rho = {rho}"));
    Ok(RatioRecord::new(name, r, d1.at_r, rhs, ctx).with_coverage(big.quad.flags()))
}
