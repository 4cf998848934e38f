//! Pressure Poisson solves and the interior split `p = p₁ + p₂ + mean`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{Exponent, ExponentSet, PQPair};
use crate::fields::{GridSpec, NodeData, ScalarSamples, SpaceTimeField, SpaceTimePoint, F1, P};
use crate::mixed_norms::{dist, norm3, Clip, CylinderQuadrature, ParabolicCylinder, Probe, QuadratureConfig, Source};

/// Relative max-norm residual the Poisson solves stop at.
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub iterations: usize,
    /// `‖Δ_h p − b‖_∞ / ‖b‖_∞` over the unknowns.
    pub residual: f64,
}

fn flat(dims: [usize; 3], i: usize, j: usize, k: usize) -> usize {
    (k * dims[1] + j) * dims[0] + i
}

/// 7-point Laplacian at an interior node of a box array.
pub fn laplacian(dims: [usize; 3], h: f64, v: &[f64], [i, j, k]: [usize; 3]) -> f64 {
    let c = v[flat(dims, i, j, k)];
    (v[flat(dims, i + 1, j, k)]
        + v[flat(dims, i - 1, j, k)]
        + v[flat(dims, i, j + 1, k)]
        + v[flat(dims, i, j - 1, k)]
        + v[flat(dims, i, j, k + 1)]
        + v[flat(dims, i, j, k - 1)]
        - 6.0 * c)
        / (h * h)
}

fn apply_neg_laplacian(dims: [usize; 3], h: f64, x: &[f64], out: &mut [f64]) {
    let [nx, ny, nz] = dims;
    for k in 1..nz - 1 {
        for j in 1..ny - 1 {
            for i in 1..nx - 1 {
                out[flat(dims, i, j, k)] = -laplacian(dims, h, x, [i, j, k]);
            }
        }
    }
}

fn interior_max(dims: [usize; 3], v: &[f64]) -> f64 {
    let mut m = 0.0_f64;
    for k in 1..dims[2] - 1 {
        for j in 1..dims[1] - 1 {
            for i in 1..dims[0] - 1 {
                m = m.max(v[flat(dims, i, j, k)].abs());
            }
        }
    }
    m
}

/// Solves `Δ_h p = rhs` on the interior nodes of a box with `p = 0` on its faces.
///
/// Conjugate gradients on `−Δ_h`, stopped when the max-norm residual falls to
/// `tol · ‖rhs‖_∞`. Values of `rhs` on face nodes are ignored.
pub fn solve_dirichlet(dims: [usize; 3], h: f64, rhs: &[f64], tol: f64, max_iter: usize) -> Result<(Vec<f64>, SolveStats)> {
    let n = dims[0] * dims[1] * dims[2];
    if dims.iter().any(|&d| d < 3) || rhs.len() != n {
        return Err(Error::Config(format!(
            "Poisson box {dims:?} needs at least 3 nodes per axis and {n} right-hand-side values"
        )));
    }
    let mut x = vec![0.0; n];
    let scale = interior_max(dims, rhs);
    if scale == 0.0 {
        return Ok((x, SolveStats::default()));
    }
    let interior = |idx: usize| {
        let i = idx % dims[0];
        let j = (idx / dims[0]) % dims[1];
        let k = idx / (dims[0] * dims[1]);
        i > 0 && j > 0 && k > 0 && i < dims[0] - 1 && j < dims[1] - 1 && k < dims[2] - 1
    };
    let mask: Vec<bool> = (0..n).map(interior).collect();
    let b: Vec<f64> = (0..n).map(|i| if mask[i] { -rhs[i] } else { 0.0 }).collect();
    let mut r = b.clone();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut rr = dot(&r, &r);
    let mut it = 0;
    loop {
        let res = interior_max(dims, &r) / scale;
        if res <= 0.5 * tol || it >= max_iter {
            // recompute the true residual before accepting
            apply_neg_laplacian(dims, h, &x, &mut ap);
            for i in 0..n {
                r[i] = if mask[i] { b[i] - ap[i] } else { 0.0 };
            }
            let true_res = interior_max(dims, &r) / scale;
            if true_res <= tol {
                return Ok((x, SolveStats { iterations: it, residual: true_res }));
            }
            if it >= max_iter {
                return Err(Error::Solver {
                    residual: true_res,
                    iterations: it,
                });
            }
            p.copy_from_slice(&r);
            rr = dot(&r, &r);
        }
        apply_neg_laplacian(dims, h, &p, &mut ap);
        let alpha = rr / dot(&p, &ap);
        for i in 0..n {
            if mask[i] {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = if mask[i] { r[i] + beta * p[i] } else { 0.0 };
        }
        it += 1;
    }
}

fn default_max_iter(dims: [usize; 3]) -> usize {
    20 * (dims[0] + dims[1] + dims[2]) + 200
}

/// First derivative along `axis` at a node: centred inside, one-sided
/// second order on grid faces.
fn node_derivative(data: &dyn NodeData, level: usize, idx: [usize; 3], comp: usize, axis: usize) -> f64 {
    let g = data.grid();
    let n = g.counts[axis];
    let at = |s: usize| {
        let mut j = idx;
        j[axis] = s;
        data.node(level, j, comp)
    };
    let i = idx[axis];
    if i == 0 {
        (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * g.h)
    } else if i == n - 1 {
        (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) / (2.0 * g.h)
    } else {
        (at(i + 1) - at(i - 1)) / (2.0 * g.h)
    }
}

/// Right-hand side `div_h(f − (u·∇)_h u)` on the node box `[lo, hi]` of one level.
///
/// Face nodes of the box get zero. Derivatives of the advection term fall
/// back to one-sided stencils on grid faces.
pub fn poisson_rhs(field: &SpaceTimeField, level: usize, lo: [usize; 3], hi: [usize; 3]) -> Vec<f64> {
    let dims = [0, 1, 2].map(|a| hi[a] - lo[a] + 1);
    let n = dims[0] * dims[1] * dims[2];
    let mut w = vec![[0.0; 3]; n];
    for k in 0..dims[2] {
        for j in 0..dims[1] {
            for i in 0..dims[0] {
                let idx = [lo[0] + i, lo[1] + j, lo[2] + k];
                let u = field.velocity_at(level, idx);
                let mut v = [0.0; 3];
                for (c, vc) in v.iter_mut().enumerate() {
                    let mut adv = 0.0;
                    for (d, ud) in u.iter().enumerate() {
                        if *ud != 0.0 {
                            adv += ud * node_derivative(field, level, idx, c, d);
                        }
                    }
                    *vc = field.value(level, idx, F1 + c) - adv;
                }
                w[flat(dims, i, j, k)] = v;
            }
        }
    }
    let h = field.grid().h;
    let mut rhs = vec![0.0; n];
    for k in 1..dims[2] - 1 {
        for j in 1..dims[1] - 1 {
            for i in 1..dims[0] - 1 {
                rhs[flat(dims, i, j, k)] = (w[flat(dims, i + 1, j, k)][0] - w[flat(dims, i - 1, j, k)][0]
                    + w[flat(dims, i, j + 1, k)][1]
                    - w[flat(dims, i, j - 1, k)][1]
                    + w[flat(dims, i, j, k + 1)][2]
                    - w[flat(dims, i, j, k - 1)][2])
                    / (2.0 * h);
            }
        }
    }
    rhs
}

/// Pressure of every level from the Poisson relation on the whole grid.
pub fn poisson_pressure(field: &SpaceTimeField, tol: f64) -> Result<Vec<Vec<f64>>> {
    let g = *field.grid();
    if g.counts.iter().any(|&c| c < 3) {
        return Err(Error::Config("Poisson pressure needs at least 3 nodes per axis".into()));
    }
    (0..g.nt)
        .into_par_iter()
        .map(|level| {
            let rhs = poisson_rhs(field, level, [0; 3], g.counts.map(|c| c - 1));
            solve_dirichlet(g.counts, g.h, &rhs, tol, default_max_iter(g.counts)).map(|(p, _)| p)
        })
        .collect()
}

/// Interior split of the pressure on a ball, one entry per time level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PressureSplit {
    pub center: SpaceTimePoint,
    pub rho: f64,
    /// Node box `[lo, hi]` (inclusive) of the solves, in grid indices.
    pub lo: [usize; 3],
    pub hi: [usize; 3],
    /// Grid levels covered, contiguous and increasing.
    pub levels: Vec<usize>,
    /// `p₁` per level, x1-fastest over the box.
    pub p1: Vec<Vec<f64>>,
    /// `p − p₁ − mean` per level.
    pub p2: Vec<Vec<f64>>,
    /// Node mean of `p − p₁` over the ball, per level.
    pub means: Vec<f64>,
    /// `max|Δ_h p₂| / max|Δ_h p|` over nodes whose stencil lies in the ball.
    pub harmonic_residual: f64,
    /// Largest relative solver residual among the levels.
    pub poisson_residual: f64,
    pub iterations: usize,
    grid: GridSpec,
}

impl PressureSplit {
    pub fn dims(&self) -> [usize; 3] {
        [0, 1, 2].map(|a| self.hi[a] - self.lo[a] + 1)
    }

    /// Grid of the box the split lives on.
    pub fn box_grid(&self) -> GridSpec {
        GridSpec {
            origin: self.grid.node_position(self.lo),
            h: self.grid.h,
            counts: self.dims(),
            t0: self.grid.time(self.levels[0]),
            dt: self.grid.dt,
            nt: self.levels.len(),
            half_space: false,
        }
    }

    fn in_ball(&self, idx: [usize; 3], margin: f64) -> bool {
        dist(self.grid.node_position(idx), self.center.x) <= self.rho - margin
    }

    /// Largest `|p₁ + p₂ + mean − p|` over ball nodes.
    pub fn reconstruction_error(&self, field: &SpaceTimeField) -> f64 {
        let dims = self.dims();
        let mut m = 0.0_f64;
        for (n, &level) in self.levels.iter().enumerate() {
            for k in 0..dims[2] {
                for j in 0..dims[1] {
                    for i in 0..dims[0] {
                        let idx = [self.lo[0] + i, self.lo[1] + j, self.lo[2] + k];
                        if !self.in_ball(idx, 0.0) {
                            continue;
                        }
                        let f = flat(dims, i, j, k);
                        let v = self.p1[n][f] + self.p2[n][f] + self.means[n];
                        m = m.max((v - field.value(level, idx, P)).abs());
                    }
                }
            }
        }
        m
    }

    /// Largest absolute node mean of `p₂` over the ball among the levels.
    pub fn p2_mean_defect(&self) -> f64 {
        let dims = self.dims();
        let mut worst = 0.0_f64;
        for p2 in &self.p2 {
            let (mut s, mut c) = (0.0, 0usize);
            for k in 0..dims[2] {
                for j in 0..dims[1] {
                    for i in 0..dims[0] {
                        if self.in_ball([self.lo[0] + i, self.lo[1] + j, self.lo[2] + k], 0.0) {
                            s += p2[flat(dims, i, j, k)];
                            c += 1;
                        }
                    }
                }
            }
            worst = worst.max((s / c.max(1) as f64).abs());
        }
        worst
    }

    fn samples(&self, parts: &[Vec<f64>]) -> ScalarSamples {
        ScalarSamples {
            grid: self.box_grid(),
            values: parts.concat(),
        }
    }

    pub fn p1_samples(&self) -> ScalarSamples {
        self.samples(&self.p1)
    }

    pub fn p2_samples(&self) -> ScalarSamples {
        self.samples(&self.p2)
    }
}

/// Splits `p` on `B_{x,ρ}` at every level of `[t − ρ², t]`.
///
/// `p₁` solves `Δ_h p₁ = div_h(f − (u·∇)_h u)` on the circumscribing node box
/// with zero face values; `p₂ = p − p₁` minus its node mean over the ball.
pub fn decompose_interior(field: &SpaceTimeField, z: SpaceTimePoint, rho: f64) -> Result<PressureSplit> {
    let g = *field.grid();
    if !(rho > 0.0) {
        return Err(Error::domain("rho", rho, "(0, ∞)"));
    }
    let mut lo = [0usize; 3];
    let mut hi = [0usize; 3];
    for a in 0..3 {
        let l = ((z.x[a] - rho - g.origin[a]) / g.h).floor() as isize;
        let u = ((z.x[a] + rho - g.origin[a]) / g.h).ceil() as isize;
        if l < 2 || u > g.counts[a] as isize - 3 {
            return Err(Error::Range(format!(
                "ball of radius {rho} around {:?} must stay two cells inside the grid along axis {}",
                z.x,
                a + 1
            )));
        }
        lo[a] = l as usize;
        hi[a] = u as usize;
    }
    let first = ((z.t - rho * rho - g.t0) / g.dt + 1e-9).floor().max(0.0) as usize;
    let last = (((z.t - g.t0) / g.dt - 1e-9).ceil().max(0.0) as usize).min(g.nt - 1);
    if z.t < g.t0 || z.t - rho * rho > g.t_end() || first > last {
        return Err(Error::Range(format!(
            "time window [{}, {}] misses the sampled levels",
            z.t - rho * rho,
            z.t
        )));
    }
    let levels: Vec<usize> = (first..=last).collect();
    let dims = [0, 1, 2].map(|a| hi[a] - lo[a] + 1);
    let solved: Vec<(Vec<f64>, SolveStats)> = levels
        .par_iter()
        .map(|&level| {
            let rhs = poisson_rhs(field, level, lo, hi);
            solve_dirichlet(dims, g.h, &rhs, DEFAULT_TOL, default_max_iter(dims))
        })
        .collect::<Result<_>>()?;

    let mut split = PressureSplit {
        center: z,
        rho,
        lo,
        hi,
        levels: levels.clone(),
        p1: Vec::with_capacity(levels.len()),
        p2: Vec::with_capacity(levels.len()),
        means: Vec::with_capacity(levels.len()),
        harmonic_residual: 0.0,
        poisson_residual: 0.0,
        iterations: 0,
        grid: g,
    };
    let (mut num, mut den) = (0.0_f64, 0.0_f64);
    for (&level, (p1, stats)) in levels.iter().zip(solved) {
        let mut raw = vec![0.0; p1.len()];
        let mut full = vec![0.0; p1.len()];
        let (mut s, mut c) = (0.0, 0usize);
        for k in 0..dims[2] {
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    let idx = [lo[0] + i, lo[1] + j, lo[2] + k];
                    let f = flat(dims, i, j, k);
                    full[f] = field.value(level, idx, P);
                    raw[f] = full[f] - p1[f];
                    if split.in_ball(idx, 0.0) {
                        s += raw[f];
                        c += 1;
                    }
                }
            }
        }
        let mean = if c > 0 { s / c as f64 } else { 0.0 };
        let p2: Vec<f64> = raw.iter().map(|v| v - mean).collect();
        for k in 1..dims[2] - 1 {
            for j in 1..dims[1] - 1 {
                for i in 1..dims[0] - 1 {
                    let idx = [lo[0] + i, lo[1] + j, lo[2] + k];
                    if !split.in_ball(idx, g.h) {
                        continue;
                    }
                    num = num.max(laplacian(dims, g.h, &p2, [i, j, k]).abs());
                    den = den.max(laplacian(dims, g.h, &full, [i, j, k]).abs());
                }
            }
        }
        split.poisson_residual = split.poisson_residual.max(stats.residual);
        split.iterations += stats.iterations;
        split.p1.push(p1);
        split.p2.push(p2);
        split.means.push(mean);
    }
    split.harmonic_residual = if num == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    };
    Ok(split)
}

/// Scaled gradient norms of the two split parts on `Q_{z,r}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitD1 {
    /// `(1/r)‖∇p₁‖_{κ,λ}`.
    pub d1_p1: f64,
    /// `(1/r)‖∇p₂‖_{κ,λ}`.
    pub d1_p2: f64,
    /// `κ'` with `3/κ' + 2/λ = 2`.
    pub kappa_prime: f64,
    /// `r ‖∇p₂‖_{κ',λ}`.
    pub p2_kappa_prime: f64,
}

pub fn d1_from_split(
    split: &PressureSplit,
    z: SpaceTimePoint,
    r: f64,
    exponents: &ExponentSet,
    cfg: &QuadratureConfig,
) -> Result<SplitD1> {
    if r > split.rho * (1.0 + 1e-12) {
        return Err(Error::Precondition(format!(
            "radius {r} exceeds the split radius {}",
            split.rho
        )));
    }
    let cyl = ParabolicCylinder::new(z, r, Clip::Interior)?;
    let grid = split.box_grid();
    let quad = CylinderQuadrature::new(&grid, &cyl, cfg)?;
    let grad = |p: &dyn Probe, _: usize| norm3(p.pressure_gradient());
    let kl = PQPair {
        p: Exponent::Finite(exponents.kappa),
        q: Exponent::Finite(exponents.lambda),
    };
    let kappa_prime = exponents.kappa_prime();
    let kpl = PQPair {
        p: Exponent::Finite(kappa_prime),
        q: Exponent::Finite(exponents.lambda),
    };
    let s1 = split.p1_samples();
    let s2 = split.p2_samples();
    Ok(SplitD1 {
        d1_p1: quad.mixed_norm(Source::Sampled(&s1), kl, &grad) / r,
        d1_p2: quad.mixed_norm(Source::Sampled(&s2), kl, &grad) / r,
        kappa_prime,
        p2_kappa_prime: r * quad.mixed_norm(Source::Sampled(&s2), kpl, &grad),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{generate_shear_heat, generate_zero};

    #[test]
    fn dirichlet_solve_reproduces_discrete_solution() {
        let dims = [9, 8, 7];
        let h = 0.1;
        let n = dims[0] * dims[1] * dims[2];
        let mut exact = vec![0.0; n];
        for k in 1..dims[2] - 1 {
            for j in 1..dims[1] - 1 {
                for i in 1..dims[0] - 1 {
                    exact[flat(dims, i, j, k)] = ((i * 7 + j * 3 + k) % 5) as f64 - 2.0;
                }
            }
        }
        let mut rhs = vec![0.0; n];
        for k in 1..dims[2] - 1 {
            for j in 1..dims[1] - 1 {
                for i in 1..dims[0] - 1 {
                    rhs[flat(dims, i, j, k)] = laplacian(dims, h, &exact, [i, j, k]);
                }
            }
        }
        let (x, stats) = solve_dirichlet(dims, h, &rhs, 1e-12, 1000).unwrap();
        assert!(stats.residual <= 1e-12);
        let err = x.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-9, "{err}");
    }

    #[test]
    fn zero_rhs_returns_zero() {
        let (x, stats) = solve_dirichlet([4, 4, 4], 1.0, &[0.0; 64], 1e-10, 10).unwrap();
        assert!(x.iter().all(|v| *v == 0.0));
        assert_eq!(stats.iterations, 0);
    }

    #[test]
    fn shear_split_is_zero() {
        let g = GridSpec::half_space([16, 16, 16], 0.05, 0.0, 0.01, 4).unwrap();
        let f = generate_shear_heat(g, 1.0, 2.0).unwrap();
        let z = SpaceTimePoint::new([0.0, 0.0, 0.4], 0.02);
        let s = decompose_interior(&f, z, 0.2).unwrap();
        assert!(s.p1.iter().flatten().all(|v| *v == 0.0));
        assert!(s.p2.iter().flatten().all(|v| *v == 0.0));
        assert_eq!(s.harmonic_residual, 0.0);
        assert_eq!(s.poisson_residual, 0.0);
    }

    #[test]
    fn ball_near_face_is_rejected() {
        let g = GridSpec::centered([12, 12, 12], 0.1, 0.0, 0.01, 3).unwrap();
        let f = generate_zero(g).unwrap();
        let z = SpaceTimePoint::new([0.0; 3], 0.02);
        assert!(matches!(decompose_interior(&f, z, 0.45), Err(Error::Range(_))));
        assert!(decompose_interior(&f, z, 0.25).is_ok());
    }
}
