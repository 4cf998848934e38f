//! Candidate flagging, Vitali covering and parabolic Hausdorff premeasures.
//!
//! A cylinder `Q_{z,r}` is `B(x, r) × (t − r², t)`. The `5r` expansion of a
//! selected cylinder is the cylinder of radius `5r` whose top is lifted to
//! `t + r²`, i.e. `B(x, 5r) × (t − 24r², t + r²)`; every cylinder of radius
//! at most `r` meeting `Q_{z,r}` lies inside it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{singular_dimension, LMPair};
use crate::fields::{SpaceTimeField, SpaceTimePoint};
use crate::functionals::CylinderEval;
use crate::mixed_norms::{dist, speed, time_sample, CylinderQuadrature, ParabolicCylinder, QuadratureConfig, Source};

const GEOM_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub z: SpaceTimePoint,
    pub r_z: f64,
    pub witness_value: f64,
}

impl Candidate {
    pub fn new(z: SpaceTimePoint, r_z: f64, witness_value: f64) -> Self {
        Candidate { z, r_z, witness_value }
    }
}

/// Whether two cylinders `Q_{z,r}` share a point.
pub fn cylinders_intersect(a: &Candidate, b: &Candidate) -> bool {
    let space = dist(a.z.x, b.z.x) < a.r_z + b.r_z;
    let lo = (a.z.t - a.r_z * a.r_z).max(b.z.t - b.r_z * b.r_z);
    let hi = a.z.t.min(b.z.t);
    space && lo < hi
}

/// Whether `inner`'s cylinder lies in the `5r` expansion of `outer`.
pub fn inside_expansion(inner: &Candidate, outer: &Candidate) -> bool {
    let r = outer.r_z;
    let tol = GEOM_TOL * r.max(1.0);
    dist(inner.z.x, outer.z.x) + inner.r_z <= 5.0 * r + tol
        && inner.z.t - inner.r_z * inner.r_z >= outer.z.t - 24.0 * r * r - tol
        && inner.z.t <= outer.z.t + r * r + tol
}

/// Disjoint subfamily chosen greedily by descending radius.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverSkeleton {
    pub candidates: Vec<Candidate>,
    pub disjoint_family: Vec<Candidate>,
    pub covered: bool,
}

pub fn vitali_cover(candidates: &[Candidate]) -> CoverSkeleton {
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&i, &j| candidates[j].r_z.total_cmp(&candidates[i].r_z).then(i.cmp(&j)));
    let mut family: Vec<Candidate> = Vec::new();
    for i in order {
        let c = candidates[i];
        if family.iter().all(|s| !cylinders_intersect(s, &c)) {
            family.push(c);
        }
    }
    let covered = candidates
        .iter()
        .all(|c| family.iter().any(|s| inside_expansion(c, s)));
    CoverSkeleton {
        candidates: candidates.to_vec(),
        disjoint_family: family,
        covered,
    }
}

/// Exhaustive pairwise disjointness of a family.
pub fn pairwise_disjoint(family: &[Candidate]) -> bool {
    family
        .iter()
        .enumerate()
        .all(|(i, a)| family[i + 1..].iter().all(|b| !cylinders_intersect(a, b)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverEstimate {
    pub delta: f64,
    pub dimension: f64,
    pub disjoint_family: Vec<Candidate>,
    /// `Σ (5 r_j)^d` over the expanded cover.
    pub premeasure: f64,
    /// `Σ r_j^d` over the disjoint family.
    pub disjoint_sum: f64,
    pub covered: bool,
    pub candidate_count: usize,
}

pub fn premeasure(cover: &CoverSkeleton, d: f64, delta: f64) -> Result<CoverEstimate> {
    if !cover.covered {
        return Err(Error::Precondition(
            "premeasure needs a family whose 5r expansions cover every candidate".into(),
        ));
    }
    if !(d >= 0.0) {
        return Err(Error::domain("d", d, "[0, ∞)"));
    }
    let fam = &cover.disjoint_family;
    Ok(CoverEstimate {
        delta,
        dimension: d,
        disjoint_family: fam.clone(),
        premeasure: fam.iter().map(|c| (5.0 * c.r_z).powf(d)).sum(),
        disjoint_sum: fam.iter().map(|c| c.r_z.powf(d)).sum(),
        covered: true,
        candidate_count: cover.candidates.len(),
    })
}

/// Candidates found on a lattice together with per-centre failures.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FlagOutcome {
    pub candidates: Vec<Candidate>,
    pub failures: Vec<(SpaceTimePoint, String)>,
}

/// `r^{−ς} ‖u‖_{L^{l,m}(Q̃_r(z))}` with `ς = 3/l + 2/m − 1`.
pub fn scaled_lm_norm(field: &SpaceTimeField, z: SpaceTimePoint, r: f64, lm: LMPair, cfg: &QuadratureConfig) -> Result<f64> {
    let ev = CylinderEval::new(field, z, r, cfg)?;
    Ok(r.powf(-lm.varsigma()) * ev.velocity_norm(lm.as_pq()))
}

/// For each centre, the smallest radius below `δ` whose scaled norm reaches `ε₀`.
pub fn flag_candidates(
    field: &SpaceTimeField,
    centers: &[SpaceTimePoint],
    lm: LMPair,
    epsilon0: f64,
    delta: f64,
    radii: &[f64],
    cfg: &QuadratureConfig,
) -> Result<FlagOutcome> {
    singular_dimension(lm)?;
    let mut rs: Vec<f64> = radii.iter().copied().filter(|&r| r < delta).collect();
    rs.sort_by(|a, b| a.total_cmp(b));
    rs.dedup();
    let found: Vec<std::result::Result<Option<Candidate>, String>> = centers
        .par_iter()
        .map(|&z| {
            for &r in &rs {
                let v = scaled_lm_norm(field, z, r, lm, cfg).map_err(|e| e.to_string())?;
                if v >= epsilon0 {
                    return Ok(Some(Candidate::new(z, r, v)));
                }
            }
            Ok(None)
        })
        .collect();
    let mut out = FlagOutcome::default();
    for (z, f) in centers.iter().zip(found) {
        match f {
            Ok(Some(c)) => out.candidates.push(c),
            Ok(None) => {}
            Err(e) => out.failures.push((*z, e)),
        }
    }
    Ok(out)
}

/// Both ends and the middle of `ε₀^m Σ r_j^{ςm} ≤ Σ_j ‖u‖^m_{Q_j} ≤ ‖u‖^m_{L^{l,m}(∪Q_j)}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainRecord {
    pub lhs: f64,
    pub middle: f64,
    pub rhs: f64,
    /// The slab-wise rearrangement step needs `l ≤ m`.
    pub rearrangement_valid: bool,
    pub slack: f64,
    pub holds: bool,
}

pub const CHAIN_SLACK: f64 = 1.05;

/// Evaluates the covering chain on a disjoint family over one common time partition.
pub fn theorem_chain(
    field: &SpaceTimeField,
    lm: LMPair,
    epsilon0: f64,
    family: &[Candidate],
    cfg: &QuadratureConfig,
) -> Result<ChainRecord> {
    let (l, m) = (lm.l, lm.m);
    let sigma = lm.varsigma();
    let lhs = epsilon0.powf(m) * family.iter().map(|c| c.r_z.powf(sigma * m)).sum::<f64>();
    let g = *field.grid();
    let src = Source::for_field(field, cfg)?;
    let quads: Vec<CylinderQuadrature> = family
        .iter()
        .map(|c| {
            let cyl = ParabolicCylinder::for_grid(&g, c.z, c.r_z)?;
            CylinderQuadrature::new(&g, &cyl, cfg)
        })
        .collect::<Result<_>>()?;
    let mut cuts: Vec<f64> = (0..g.nt).map(|n| g.time(n)).collect();
    for c in family {
        cuts.push((c.z.t - c.r_z * c.r_z).max(g.t0));
        cuts.push(c.z.t.min(g.t_end()));
    }
    cuts.sort_by(|a, b| a.total_cmp(b));
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * g.dt);
    let ul = |p: &dyn crate::mixed_norms::Probe, i: usize| speed(p, i).powf(l);
    let (mut middle, mut rhs) = (0.0, 0.0);
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let tm = 0.5 * (a + b);
        let ts = time_sample(&g, tm, b - a);
        let mut sum = 0.0;
        for (c, q) in family.iter().zip(&quads) {
            if tm > c.z.t - c.r_z * c.r_z && tm < c.z.t {
                let s = q.slice_integral(src, ts, 0, &ul);
                middle += ts.weight * s.powf(m / l);
                sum += s;
            }
        }
        rhs += ts.weight * sum.powf(m / l);
    }
    Ok(ChainRecord {
        lhs,
        middle,
        rhs,
        rearrangement_valid: l <= m,
        slack: CHAIN_SLACK,
        holds: lhs <= CHAIN_SLACK * rhs,
    })
}

/// One point of a premeasure-versus-δ curve, with its chain check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub estimate: CoverEstimate,
    pub chain: Option<ChainRecord>,
    pub failures: Vec<(SpaceTimePoint, String)>,
}

/// Premeasure at `d = d(l, m)` for each `δ`.
#[allow(clippy::too_many_arguments)]
pub fn dimension_curve(
    field: &SpaceTimeField,
    centers: &[SpaceTimePoint],
    lm: LMPair,
    epsilon0: f64,
    deltas: &[f64],
    radii: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Vec<CurvePoint>> {
    let d = singular_dimension(lm)?;
    deltas
        .iter()
        .map(|&delta| {
            let flagged = flag_candidates(field, centers, lm, epsilon0, delta, radii, cfg)?;
            let cover = vitali_cover(&flagged.candidates);
            let estimate = premeasure(&cover, d, delta)?;
            let chain = if estimate.disjoint_family.is_empty() {
                None
            } else {
                Some(theorem_chain(field, lm, epsilon0, &estimate.disjoint_family, cfg)?)
            };
            Ok(CurvePoint {
                estimate,
                chain,
                failures: flagged.failures,
            })
        })
        .collect()
}

/// Whether premeasures do not increase as `δ` shrinks.
pub fn decreasing_in_delta(curve: &[CoverEstimate]) -> bool {
    let mut pts: Vec<(f64, f64)> = curve.iter().map(|c| (c.delta, c.premeasure)).collect();
    pts.sort_by(|a, b| b.0.total_cmp(&a.0));
    pts.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + 1e-12))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cand(x: f64, t: f64, r: f64) -> Candidate {
        Candidate::new(SpaceTimePoint::new([x, 0.0, 0.0], t), r, 1.0)
    }

    #[test]
    fn single_and_nested() {
        let c = vitali_cover(&[cand(0.0, 1.0, 0.3)]);
        assert_eq!(c.disjoint_family.len(), 1);
        assert!(c.covered);
        let c = vitali_cover(&[cand(0.0, 1.0, 0.5), cand(0.0, 1.0, 1.0)]);
        assert_eq!(c.disjoint_family, vec![cand(0.0, 1.0, 1.0)]);
        assert!(c.covered);
    }

    #[test]
    fn later_overlapping_cylinder_is_covered() {
        let big = cand(0.0, 1.0, 1.0);
        let late = cand(0.5, 1.9, 0.95);
        assert!(cylinders_intersect(&big, &late));
        assert!(inside_expansion(&late, &big));
        assert!(vitali_cover(&[big, late]).covered);
    }

    #[test]
    fn disjoint_in_time_only() {
        let a = cand(0.0, 1.0, 0.5);
        let b = cand(0.0, 1.25, 0.5);
        assert!(!cylinders_intersect(&a, &b));
        assert_eq!(vitali_cover(&[a, b]).disjoint_family.len(), 2);
    }

    #[test]
    fn premeasure_arithmetic() {
        let empty = vitali_cover(&[]);
        assert_eq!(premeasure(&empty, 0.5, 0.1).unwrap().premeasure, 0.0);
        let mut prev = f64::INFINITY;
        for delta in [0.2, 0.1, 0.05] {
            let cs: Vec<Candidate> = (0..4).map(|i| cand(i as f64 * 3.0, 1.0, delta / 2.0)).collect();
            let est = premeasure(&vitali_cover(&cs), 0.5, delta).unwrap();
            assert!((est.premeasure - 4.0 * (2.5 * delta).sqrt()).abs() < 1e-12);
            assert!(est.premeasure < prev);
            prev = est.premeasure;
        }
        let bad = CoverSkeleton {
            candidates: vec![cand(0.0, 1.0, 1.0)],
            disjoint_family: vec![],
            covered: false,
        };
        assert!(matches!(premeasure(&bad, 0.5, 0.1), Err(Error::Precondition(_))));
    }
}
