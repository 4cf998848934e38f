//! ε-threshold regularity verdicts and decay diagnostics.
//!
//! Limits as `r → 0` are replaced by the maximum or minimum over the `k`
//! smallest admissible radii; `k` and the radius floor travel with every verdict.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{criterion_exponent, ExponentSet, PQPair};
use crate::fields::{SpaceTimeField, SpaceTimePoint};
use crate::functionals::{sweep, CylinderEval, FunctionalReport};
use crate::inequalities::{Ratio, RatioFlag};
use crate::mixed_norms::QuadratureConfig;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriteriaConfig {
    pub epsilon: f64,
    pub epsilon0: f64,
    /// Number of smallest radii standing in for the limit.
    pub k: usize,
    /// Decay exponent of the diagnostics.
    pub alpha: f64,
}

impl Default for CriteriaConfig {
    fn default() -> Self {
        CriteriaConfig {
            epsilon: 0.05,
            epsilon0: 0.05,
            k: 3,
            alpha: 0.5,
        }
    }
}

impl CriteriaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::domain("epsilon", self.epsilon, "(0, ∞)"));
        }
        if !(self.epsilon0 > 0.0 && self.epsilon0.is_finite()) {
            return Err(Error::domain("epsilon0", self.epsilon0, "(0, ∞)"));
        }
        if self.k == 0 {
            return Err(Error::domain("k", 0, "k >= 1"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::domain("alpha", self.alpha, "(0, 1)"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    #[serde(rename = "regular_by_TH1")]
    RegularByTh1,
    RegularByModLemma,
    #[serde(rename = "regular_by_CKN")]
    RegularByCkn,
    FlaggedCandidate,
    Inconclusive,
}

impl Status {
    pub fn is_regular(self) -> bool {
        matches!(self, Status::RegularByTh1 | Status::RegularByModLemma | Status::RegularByCkn)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::RegularByTh1 => "regular_by_TH1",
            Status::RegularByModLemma => "regular_by_mod_lemma",
            Status::RegularByCkn => "regular_by_CKN",
            Status::FlaggedCandidate => "flagged_candidate",
            Status::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub r: f64,
    pub quantity: f64,
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: Status,
    pub evidence: Vec<Evidence>,
    pub epsilon_used: f64,
    pub radii_used: Vec<f64>,
    pub k: usize,
    pub radius_floor: f64,
}

/// The `k` smallest admissible radii, in descending order.
pub fn smallest_admissible(field: &SpaceTimeField, radii: &[f64], k: usize, cfg: &QuadratureConfig) -> Result<Vec<f64>> {
    let h = field.grid().h;
    let floor = cfg.min_cells as f64 * h;
    let mut ok: Vec<f64> = radii
        .iter()
        .copied()
        .filter(|&r| r.is_finite() && r >= floor * (1.0 - 1e-12))
        .collect();
    ok.sort_by(|a, b| b.total_cmp(a));
    ok.dedup();
    if ok.len() < k {
        let smallest = radii.iter().copied().fold(f64::INFINITY, f64::min);
        return Err(Error::Resolution {
            radius: smallest,
            floor,
            min_cells: cfg.min_cells,
            h,
        });
    }
    Ok(ok.split_off(ok.len() - k))
}

fn verdict(
    quantities: &[(f64, f64)],
    threshold: f64,
    k: usize,
    floor: f64,
    pass: impl Fn(&[f64]) -> bool,
    status: Status,
) -> Verdict {
    let values: Vec<f64> = quantities.iter().map(|q| q.1).collect();
    Verdict {
        status: if pass(&values) { status } else { Status::Inconclusive },
        evidence: quantities
            .iter()
            .map(|&(r, quantity)| Evidence { r, quantity, threshold })
            .collect(),
        epsilon_used: threshold,
        radii_used: quantities.iter().map(|q| q.0).collect(),
        k,
        radius_floor: floor,
    }
}

fn all_at_most(eps: f64) -> impl Fn(&[f64]) -> bool {
    move |v| v.iter().all(|&q| q <= eps)
}

fn some_below(eps: f64) -> impl Fn(&[f64]) -> bool {
    move |v| v.iter().any(|&q| q < eps)
}

fn per_radius<F>(field: &SpaceTimeField, z: SpaceTimePoint, radii: &[f64], cfg: &QuadratureConfig, f: F) -> Result<Vec<(f64, f64)>>
where
    F: Fn(&CylinderEval<'_>) -> Result<f64> + Sync,
{
    radii
        .par_iter()
        .map(|&r| {
            let ev = CylinderEval::new(field, z, r, cfg)?;
            Ok((r, f(&ev)?))
        })
        .collect()
}

fn floor_of(field: &SpaceTimeField, cfg: &QuadratureConfig) -> f64 {
    cfg.min_cells as f64 * field.grid().h
}

/// Scaled criterion `r^{−(3/p+2/q−1)}‖u‖_{p,q}` at most `ε` on the `k` smallest radii.
pub fn evaluate_th1(
    field: &SpaceTimeField,
    z: SpaceTimePoint,
    pq: PQPair,
    radii: &[f64],
    epsilon: f64,
    k: usize,
    cfg: &QuadratureConfig,
) -> Result<Verdict> {
    criterion_exponent(pq)?;
    let rs = smallest_admissible(field, radii, k, cfg)?;
    let q = per_radius(field, z, &rs, cfg, |ev| ev.criterion(pq))?;
    Ok(verdict(&q, epsilon, k, floor_of(field, cfg), all_at_most(epsilon), Status::RegularByTh1))
}

/// `C^{1/3} + D̃` below `ε` at one of the `k` smallest radii.
pub fn evaluate_mod_lemma(
    field: &SpaceTimeField,
    z: SpaceTimePoint,
    exponents: &ExponentSet,
    radii: &[f64],
    epsilon: f64,
    k: usize,
    cfg: &QuadratureConfig,
) -> Result<Verdict> {
    let rs = smallest_admissible(field, radii, k, cfg)?;
    let q = per_radius(field, z, &rs, cfg, |ev| Ok(ev.c().cbrt() + ev.d_tilde(exponents)))?;
    Ok(verdict(&q, epsilon, k, floor_of(field, cfg), some_below(epsilon), Status::RegularByModLemma))
}

/// Scaled dissipation `E(r)` at most `ε` on the `k` smallest radii.
pub fn ckn_criterion(
    field: &SpaceTimeField,
    z: SpaceTimePoint,
    radii: &[f64],
    epsilon: f64,
    k: usize,
    cfg: &QuadratureConfig,
) -> Result<Verdict> {
    let rs = smallest_admissible(field, radii, k, cfg)?;
    let q = per_radius(field, z, &rs, cfg, |ev| Ok(ev.e()))?;
    Ok(verdict(&q, epsilon, k, floor_of(field, cfg), all_at_most(epsilon), Status::RegularByCkn))
}

/// All verdicts at one centre, derived from a single functional sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assessment {
    pub center: SpaceTimePoint,
    pub th1: Verdict,
    pub mod_lemma: Verdict,
    pub ckn: Verdict,
    /// First regular verdict in the order TH1, modified lemma; otherwise
    /// flagged when the criterion reaches `ε₀` at a used radius.
    pub status: Status,
    pub epsilon0_used: f64,
    pub reports: Vec<FunctionalReport>,
}

pub fn assess_point(
    field: &SpaceTimeField,
    z: SpaceTimePoint,
    exponents: &ExponentSet,
    pq: PQPair,
    radii: &[f64],
    crit: &CriteriaConfig,
    cfg: &QuadratureConfig,
) -> Result<Assessment> {
    crit.validate()?;
    criterion_exponent(pq)?;
    let used = smallest_admissible(field, radii, crit.k, cfg)?;
    let floor = floor_of(field, cfg);
    let mut all: Vec<f64> = radii.iter().copied().filter(|&r| r >= floor * (1.0 - 1e-12)).collect();
    all.sort_by(|a, b| b.total_cmp(a));
    all.dedup();
    let reports = sweep(field, z, &all, exponents, pq, cfg)?;
    let pick = |f: &dyn Fn(&FunctionalReport) -> f64| -> Vec<(f64, f64)> {
        reports
            .iter()
            .filter(|rep| used.contains(&rep.radius))
            .map(|rep| (rep.radius, f(rep)))
            .collect()
    };
    let k = crit.k;
    let crit_q = pick(&|r| r.criterion);
    let th1 = verdict(&crit_q, crit.epsilon, k, floor, all_at_most(crit.epsilon), Status::RegularByTh1);
    let mod_lemma = verdict(
        &pick(&|r| r.c.cbrt() + r.d_tilde),
        crit.epsilon,
        k,
        floor,
        some_below(crit.epsilon),
        Status::RegularByModLemma,
    );
    let ckn = verdict(&pick(&|r| r.e), crit.epsilon, k, floor, all_at_most(crit.epsilon), Status::RegularByCkn);
    let status = if th1.status.is_regular() {
        Status::RegularByTh1
    } else if mod_lemma.status.is_regular() {
        Status::RegularByModLemma
    } else if crit_q.iter().any(|q| q.1 >= crit.epsilon0) {
        Status::FlaggedCandidate
    } else {
        Status::Inconclusive
    };
    Ok(Assessment {
        center: z,
        th1,
        mod_lemma,
        ckn,
        status,
        epsilon0_used: crit.epsilon0,
        reports,
    })
}

/// [`assess_point`] over many centres, in centre order; failures stay per centre.
pub fn assess_centers(
    field: &SpaceTimeField,
    centers: &[SpaceTimePoint],
    exponents: &ExponentSet,
    pq: PQPair,
    radii: &[f64],
    crit: &CriteriaConfig,
    cfg: &QuadratureConfig,
) -> Vec<Result<Assessment>> {
    centers
        .par_iter()
        .map(|z| assess_point(field, *z, exponents, pq, radii, crit, cfg))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayRecord {
    pub r: f64,
    pub theta: f64,
    pub alpha: f64,
    pub numerator: f64,
    pub denominator: f64,
    /// Empirical stand-in for the constant of the decay estimate.
    pub ratio: Ratio,
    pub flags: Vec<RatioFlag>,
}

/// `(C^{1/3}+D̃)(θr) / (θ^{1+α}(C^{1/3}(r)+D̃(r)+m_γ r^{β+1}))`.
#[allow(clippy::too_many_arguments)]
pub fn decay_diagnostic(
    field: &SpaceTimeField,
    z: SpaceTimePoint,
    exponents: &ExponentSet,
    r: f64,
    theta: f64,
    alpha: f64,
    morrey_value: f64,
    beta: f64,
    cfg: &QuadratureConfig,
) -> Result<DecayRecord> {
    if !(theta > 0.0 && theta < 0.5) {
        return Err(Error::domain("theta", theta, "(0, 1/2)"));
    }
    let small = CylinderEval::new(field, z, theta * r, cfg)?;
    let big = CylinderEval::new(field, z, r, cfg)?;
    let numerator = small.c().cbrt() + small.d_tilde(exponents);
    let denominator =
        theta.powf(1.0 + alpha) * (big.c().cbrt() + big.d_tilde(exponents) + morrey_value * r.powf(beta + 1.0));
    let mut flags = Vec::new();
    let ratio = if denominator > 0.0 {
        Ratio::Finite(numerator / denominator)
    } else if numerator == 0.0 {
        flags.push(RatioFlag::ZeroOverZero);
        Ratio::Finite(0.0)
    } else {
        flags.push(RatioFlag::Infinite);
        Ratio::Infinite
    };
    Ok(DecayRecord {
        r,
        theta,
        alpha,
        numerator,
        denominator,
        ratio,
        flags,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub radii: Vec<f64>,
    /// `s_k = C(θ^k r) + D̃₁(θ^k r)`.
    pub s: Vec<f64>,
    /// `(1/2)^k s_0 + tail`.
    pub envelope: Vec<f64>,
    pub tail: f64,
}

/// The sequence `C(θ^k r) + D̃₁(θ^k r)` for `k = 0..=k_max`, with the
/// reference envelope whose tail is `ε³/64`.
pub fn iteration_diagnostic(
    field: &SpaceTimeField,
    z: SpaceTimePoint,
    exponents: &ExponentSet,
    r: f64,
    theta: f64,
    k_max: usize,
    epsilon: f64,
    cfg: &QuadratureConfig,
) -> Result<IterationRecord> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::domain("theta", theta, "(0, 1)"));
    }
    let radii: Vec<f64> = (0..=k_max).map(|k| r * theta.powi(k as i32)).collect();
    let s = per_radius(field, z, &radii, cfg, |ev| Ok(ev.c() + ev.d1_tilde(exponents)))?
        .into_iter()
        .map(|q| q.1)
        .collect::<Vec<_>>();
    let tail = epsilon.powi(3) / 64.0;
    let envelope = (0..=k_max).map(|k| 0.5_f64.powi(k as i32) * s[0] + tail).collect();
    Ok(IterationRecord { radii, s, envelope, tail })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{generate_zero, GridSpec};
    use crate::functionals::dyadic_radii;

    fn zero() -> SpaceTimeField {
        generate_zero(GridSpec::half_space([20, 20, 12], 0.05, 0.0, 0.01, 30).unwrap()).unwrap()
    }

    #[test]
    fn zero_field_regular_everywhere() {
        let f = zero();
        let e = ExponentSet::from_lambda(1.5).unwrap();
        let z = SpaceTimePoint::new([0.0; 3], 0.25);
        let radii = dyadic_radii(0.4, 2);
        let cfg = QuadratureConfig::default();
        let crit = CriteriaConfig { k: 2, ..Default::default() };
        let a = assess_point(&f, z, &e, e.pq(), &radii, &crit, &cfg).unwrap();
        assert_eq!(a.status, Status::RegularByTh1);
        assert_eq!(a.mod_lemma.status, Status::RegularByModLemma);
        assert_eq!(a.ckn.status, Status::RegularByCkn);
        assert_eq!(evaluate_th1(&f, z, e.pq(), &radii, 0.05, 2, &cfg).unwrap().status, Status::RegularByTh1);
        let d = decay_diagnostic(&f, z, &e, 0.8, 0.25, 0.5, 0.0, 1.0, &cfg)
            .unwrap();
        assert_eq!(d.ratio, Ratio::Finite(0.0));
        assert_eq!(d.flags, vec![RatioFlag::ZeroOverZero]);
    }

    #[test]
    fn too_few_radii() {
        let f = zero();
        let e = ExponentSet::from_lambda(1.5).unwrap();
        let z = SpaceTimePoint::new([0.0; 3], 0.25);
        let err = evaluate_th1(&f, z, e.pq(), &[0.4, 0.2, 0.1], 0.05, 3, &QuadratureConfig::default());
        assert!(matches!(err, Err(Error::Resolution { .. })));
    }

    #[test]
    fn status_names() {
        assert_eq!(serde_json::to_string(&Status::RegularByTh1).unwrap(), "\"regular_by_TH1\"");
        assert_eq!(serde_json::to_string(&Status::FlaggedCandidate).unwrap(), "\"flagged_candidate\"");
        assert_eq!(Status::RegularByModLemma.as_str(), "regular_by_mod_lemma");
    }
}
