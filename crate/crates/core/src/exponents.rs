//! Exponent algebra for the mixed-norm criteria.
//!
//! Every relation here is pure arithmetic, checked at [`IDENTITY_TOL`].
//! Infinite exponents are an explicit [`Exponent::Infinite`] variant and
//! enter formulas through their reciprocal, `1/∞ = 0`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for exponent identities.
pub const IDENTITY_TOL: f64 = 1e-12;

/// A Lebesgue exponent in `[1, ∞]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ExponentRepr", into = "ExponentRepr")]
pub enum Exponent {
    Finite(f64),
    Infinite,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ExponentRepr {
    Number(f64),
    Text(String),
}

impl TryFrom<ExponentRepr> for Exponent {
    type Error = String;

    fn try_from(repr: ExponentRepr) -> std::result::Result<Self, String> {
        match repr {
            ExponentRepr::Number(v) if v.is_finite() => Ok(Exponent::Finite(v)),
            ExponentRepr::Number(v) => Err(format!("non-finite exponent {v}; write \"inf\"")),
            ExponentRepr::Text(s) => match s.trim() {
                "inf" | "infinity" | "∞" => Ok(Exponent::Infinite),
                other => other
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .map(Exponent::Finite)
                    .ok_or_else(|| format!("cannot parse exponent {other:?}")),
            },
        }
    }
}

impl From<Exponent> for ExponentRepr {
    fn from(e: Exponent) -> Self {
        match e {
            Exponent::Finite(v) => ExponentRepr::Number(v),
            Exponent::Infinite => ExponentRepr::Text("inf".to_string()),
        }
    }
}

impl Exponent {
    pub fn reciprocal(self) -> f64 {
        match self {
            Exponent::Finite(v) => 1.0 / v,
            Exponent::Infinite => 0.0,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinite)
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Exponent::Finite(v) => Some(v),
            Exponent::Infinite => None,
        }
    }

    fn approx_eq(self, other: Exponent) -> bool {
        match (self, other) {
            (Exponent::Infinite, Exponent::Infinite) => true,
            (Exponent::Finite(a), Exponent::Finite(b)) => (a - b).abs() <= IDENTITY_TOL * a.abs().max(1.0),
            _ => false,
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(v) => write!(f, "{v}"),
            Exponent::Infinite => write!(f, "inf"),
        }
    }
}

/// Spatial/temporal integrability pair `(p, q)` of a mixed norm `L^{p,q}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PQRepr")]
pub struct PQPair {
    pub p: Exponent,
    pub q: Exponent,
}

#[derive(Deserialize)]
struct PQRepr {
    p: Exponent,
    q: Exponent,
}

impl TryFrom<PQRepr> for PQPair {
    type Error = Error;

    fn try_from(r: PQRepr) -> Result<Self> {
        PQPair::new(r.p, r.q)
    }
}

impl PQPair {
    pub fn new(p: Exponent, q: Exponent) -> Result<Self> {
        for (name, e) in [("p", p), ("q", q)] {
            if let Exponent::Finite(v) = e {
                if !(v >= 1.0) || !v.is_finite() {
                    return Err(Error::domain(
                        if name == "p" { "p" } else { "q" },
                        v,
                        "[1, ∞]",
                    ));
                }
            }
        }
        Ok(PQPair { p, q })
    }

    pub fn finite(p: f64, q: f64) -> Result<Self> {
        Self::new(Exponent::Finite(p), Exponent::Finite(q))
    }

    /// `3/p + 2/q`, the scaling dimension of the norm.
    pub fn scaling_sum(&self) -> f64 {
        3.0 * self.p.reciprocal() + 2.0 * self.q.reciprocal()
    }
}

/// Spatial/temporal pair `(l, m)` of the integrability assumption used in the
/// singular-set dimension bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LMPair {
    pub l: f64,
    pub m: f64,
}

impl LMPair {
    pub fn new(l: f64, m: f64) -> Result<Self> {
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::domain("l", l, "(0, ∞)"));
        }
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::domain("m", m, "(0, ∞)"));
        }
        Ok(LMPair { l, m })
    }

    /// The norm exponent `ς = 3/l + 2/m − 1` of the scaled `L^{l,m}` quantity.
    pub fn varsigma(&self) -> f64 {
        3.0 / self.l + 2.0 / self.m - 1.0
    }

    pub fn as_pq(&self) -> PQPair {
        PQPair {
            p: Exponent::Finite(self.l),
            q: Exponent::Finite(self.m),
        }
    }
}

/// The linked exponents `(κ, κ*, λ, p, q)` of the pressure and velocity functionals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentSet {
    pub kappa: f64,
    pub kappa_star: f64,
    pub lambda: f64,
    pub p: f64,
    pub q: f64,
}

impl ExponentSet {
    /// Solves the four linking relations for a given `λ ∈ (1, 2)`.
    pub fn from_lambda(lambda: f64) -> Result<Self> {
        if !(lambda > 1.0 && lambda < 2.0) {
            return Err(Error::domain("lambda", lambda, "the open interval (1, 2)"));
        }
        // Closed forms with one rounding each, so rational anchors come out exact.
        let kappa = 3.0 * lambda / (4.0 * lambda - 2.0);
        let kappa_star = 3.0 * lambda / (3.0 * lambda - 2.0);
        let p = 1.5 * lambda;
        let q = lambda / (lambda - 1.0);
        let set = ExponentSet {
            kappa,
            kappa_star,
            lambda,
            p,
            q,
        };
        set.validate()?;
        Ok(set)
    }

    /// Largest absolute violation among the linking relations.
    pub fn identity_defect(&self) -> f64 {
        let r = [
            3.0 / self.kappa + 2.0 / self.lambda - 4.0,
            1.0 / self.kappa_star - (1.0 / self.kappa - 1.0 / 3.0),
            1.0 / self.p + 1.0 / self.kappa_star - 1.0,
            1.0 / self.q + 1.0 / self.lambda - 1.0,
            3.0 / self.p + 2.0 / self.q - 2.0,
        ];
        r.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn validate(&self) -> Result<()> {
        let defect = self.identity_defect();
        if defect > IDENTITY_TOL {
            return Err(Error::Config(format!(
                "exponent set {self:?} violates the linking relations by {defect:e}"
            )));
        }
        if !(self.lambda > 1.0 && self.lambda < 2.0) {
            return Err(Error::domain("lambda", self.lambda, "the open interval (1, 2)"));
        }
        if !(self.q > 2.0 && self.q.is_finite()) {
            return Err(Error::domain("q", self.q, "(2, ∞)"));
        }
        Ok(())
    }

    pub fn pq(&self) -> PQPair {
        PQPair {
            p: Exponent::Finite(self.p),
            q: Exponent::Finite(self.q),
        }
    }

    /// The spatial exponent `κ'` with `3/κ' + 2/λ = 2` used in the split-pressure bookkeeping.
    pub fn kappa_prime(&self) -> f64 {
        3.0 / (2.0 - 2.0 / self.lambda)
    }
}

/// Position of `(p, q)` relative to the criteria regions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionTag {
    /// Strictly inside the Prodi–Serrin class, `3/p + 2/q < 1`.
    I,
    /// `1 ≤ 3/p + 2/q ≤ 2`, `2 < q ≤ ∞`, `(p, q) ≠ (3/2, ∞)`.
    II,
    /// `(3/2, ∞)` or `(3, 2)`.
    ExcludedEndpoint,
    Outside,
}

/// Classifies `(p, q)`. The border `3/p + 2/q = 1` belongs to region II.
pub fn classify_region(pq: PQPair) -> RegionTag {
    let excluded = [
        (Exponent::Finite(1.5), Exponent::Infinite),
        (Exponent::Finite(3.0), Exponent::Finite(2.0)),
    ];
    if excluded.iter().any(|&(p, q)| pq.p.approx_eq(p) && pq.q.approx_eq(q)) {
        return RegionTag::ExcludedEndpoint;
    }
    let s = pq.scaling_sum();
    if s < 1.0 - IDENTITY_TOL {
        return RegionTag::I;
    }
    let q_ok = match pq.q {
        Exponent::Infinite => true,
        Exponent::Finite(q) => q > 2.0,
    };
    if s <= 2.0 + IDENTITY_TOL && q_ok {
        RegionTag::II
    } else {
        RegionTag::Outside
    }
}

/// Radius power `3/p + 2/q − 1` of the scaled criterion quantity.
pub fn criterion_exponent(pq: PQPair) -> Result<f64> {
    match classify_region(pq) {
        RegionTag::I | RegionTag::II => Ok(pq.scaling_sum() - 1.0),
        tag => Err(Error::domain(
            "(p, q)",
            format!("({}, {}) [{tag:?}]", pq.p, pq.q),
            "regions I or II",
        )),
    }
}

/// Membership in the triangular region V of the partial-regularity bound.
pub fn in_region_v(lm: LMPair) -> bool {
    let (l, m) = (lm.l, lm.m);
    3.0 / l + 2.0 / m > 1.0 && 1.0 / l + 1.0 / m < 0.5 && 3.0 / l + 1.0 / m < 1.0
}

fn region_v_error(lm: LMPair) -> Error {
    Error::domain(
        "(l, m)",
        format!("({}, {})", lm.l, lm.m),
        "region V: 3/l+2/m > 1, 1/l+1/m < 1/2, 3/l+1/m < 1",
    )
}

/// Parabolic Hausdorff dimension `d(l, m)` bounding the singular set.
pub fn singular_dimension(lm: LMPair) -> Result<f64> {
    if !in_region_v(lm) {
        return Err(region_v_error(lm));
    }
    Ok(dimension_formula(lm))
}

fn dimension_formula(lm: LMPair) -> f64 {
    let (l, m) = (lm.l, lm.m);
    if l > m {
        3.0 - m + 2.0 * m / l
    } else {
        2.0 - m + 3.0 * m / l
    }
}

/// Interpolation data of the two integrability cases.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum Sec4Interpolation {
    /// `l > m`: `‖u‖_{L^k}` is interpolated between `L^{l,m}` and `L^{2,∞}`.
    SpatialDominant { k: f64, sigma: f64 },
    /// `l ≤ m`: three-norm interpolation of `‖u‖_{L^4}`.
    TemporalDominant {
        alpha: f64,
        beta: f64,
        sigma: f64,
        /// Set when `3/l + 2/m = 5/4` zeroes the numerator of `α`.
        degenerate: bool,
    },
}

impl Sec4Interpolation {
    pub fn sigma(&self) -> f64 {
        match *self {
            Sec4Interpolation::SpatialDominant { sigma, .. } => sigma,
            Sec4Interpolation::TemporalDominant { sigma, .. } => sigma,
        }
    }
}

/// Exponents of the interpolation showing that `L^{l,m}` solutions are suitable.
pub fn interp_sec4_exponents(lm: LMPair) -> Result<Sec4Interpolation> {
    let (l, m) = (lm.l, lm.m);
    let above = 1.0 < 3.0 / l + 2.0 / m;
    if above && 2.0 / l + 2.0 / m < 1.0 && l > m {
        let k = 2.0 + m - 2.0 * m / l;
        return Ok(Sec4Interpolation::SpatialDominant { k, sigma: m / k });
    }
    if above && 3.0 / l + 1.0 / m < 1.0 && l <= m {
        return temporal_dominant_weights(l, m);
    }
    Err(Error::domain(
        "(l, m)",
        format!("({l}, {m})"),
        "either 1<3/l+2/m, 2/l+2/m<1, l>m or 1<3/l+2/m, 3/l+1/m<1, l<=m",
    ))
}

/// The `α, β, σ` formulas of the `l ≤ m` case, without the case test.
pub(crate) fn temporal_dominant_weights(l: f64, m: f64) -> Result<Sec4Interpolation> {
    let num = 3.0 / l + 2.0 / m - 1.25;
    let den_alpha = 1.0 / l + 1.0 / (2.0 * m) - 0.375;
    let den_beta = 3.0 * (1.0 / l + 1.0 / m - 0.5);
    if num.abs() <= IDENTITY_TOL {
        return Ok(Sec4Interpolation::TemporalDominant {
            alpha: 0.0,
            beta: 0.0,
            sigma: (4.0 - l) / 4.0,
            degenerate: true,
        });
    }
    if den_alpha.abs() <= IDENTITY_TOL || den_beta.abs() <= IDENTITY_TOL {
        return Err(Error::domain(
            "(l, m)",
            format!("({l}, {m})"),
            "pairs where the α and β denominators do not vanish",
        ));
    }
    let alpha = num / den_alpha;
    let beta = 4.0 * num / den_beta;
    let sigma = l * (4.0 - l) / (4.0 * (l - alpha));
    Ok(Sec4Interpolation::TemporalDominant {
        alpha,
        beta,
        sigma,
        degenerate: false,
    })
}

/// Weights of the three-norm `L^4` interpolation from a Prodi–Serrin pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct L4Weights {
    /// Weight on `‖u‖_{L^{r,s}}`.
    pub half: f64,
    /// Weight on `‖u‖_{L^{2,∞}}`.
    pub one_over_q: f64,
    /// Weight on `‖u‖_{L^{6,2}}`.
    pub three_over_2p: f64,
    /// The displayed weights name `p, q`; they are read as `p = r, q = s`.
    pub pairing_assumed: bool,
    /// `(r, s)` is one of the endpoints `(3, ∞)` or `(∞, 2)`.
    pub endpoint: bool,
}

impl L4Weights {
    /// Deviation of the weights from exact Hölder balance for the `L^4` norm.
    pub fn balance_defect(&self, rs: PQPair) -> f64 {
        let (ir, is) = (rs.p.reciprocal(), rs.q.reciprocal());
        let total = self.half + self.one_over_q + self.three_over_2p - 1.0;
        let space = self.half * ir + self.one_over_q / 2.0 + self.three_over_2p / 6.0 - 0.25;
        let time = self.half * is + self.three_over_2p / 2.0 - 0.25;
        total.abs().max(space.abs()).max(time.abs())
    }
}

pub fn interp_l4_exponents(rs: PQPair) -> Result<L4Weights> {
    if (rs.scaling_sum() - 1.0).abs() > IDENTITY_TOL {
        return Err(Error::domain(
            "(r, s)",
            format!("({}, {})", rs.p, rs.q),
            "the line 3/r + 2/s = 1",
        ));
    }
    let endpoint = match (rs.p, rs.q) {
        (Exponent::Finite(r), Exponent::Finite(_)) => {
            if !(r > 3.0) {
                return Err(Error::domain("r", r, "(3, ∞) on the line 3/r + 2/s = 1"));
            }
            false
        }
        _ => true,
    };
    Ok(L4Weights {
        half: 0.5,
        one_over_q: rs.q.reciprocal(),
        three_over_2p: 1.5 * rs.p.reciprocal(),
        pairing_assumed: true,
        endpoint,
    })
}
