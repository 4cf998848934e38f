#![allow(dead_code)]

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use cyllens_core::fields::{AnalyticField, GridSpec, SpaceTimeField, SpaceTimePoint};

/// Writes one acceptance line to stderr, bypassing the test harness's capture, and returns the verdict.
pub fn report(id: &str, pass: bool, detail: impl AsRef<str>) -> bool {
    let line = format!("{id} {}: {}\n", if pass { "PASS" } else { "FAIL" }, detail.as_ref());
    let _ = std::io::stderr().write_all(line.as_bytes());
    pass
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

/// `u ≡ c`, `p = 0`.
#[derive(Debug, Clone, Copy)]
pub struct ConstantFlow(pub [f64; 3]);

impl AnalyticField for ConstantFlow {
    fn velocity(&self, _: [f64; 3], _: f64) -> [f64; 3] {
        self.0
    }
    fn pressure(&self, _: [f64; 3], _: f64) -> Option<f64> {
        Some(0.0)
    }
    fn has_pressure(&self) -> bool {
        true
    }
    fn velocity_gradient(&self, _: [f64; 3], _: f64) -> [[f64; 3]; 3] {
        [[0.0; 3]; 3]
    }
}

/// Steady channel flow over the wall: `u1 = G x3 (2L − x3) / 2`, `p = −G x1`.
#[derive(Debug, Clone, Copy)]
pub struct Channel {
    pub g: f64,
    pub l: f64,
}

impl AnalyticField for Channel {
    fn velocity(&self, x: [f64; 3], _: f64) -> [f64; 3] {
        [0.5 * self.g * x[2] * (2.0 * self.l - x[2]), 0.0, 0.0]
    }
    fn pressure(&self, x: [f64; 3], _: f64) -> Option<f64> {
        Some(-self.g * x[0])
    }
    fn has_pressure(&self) -> bool {
        true
    }
    fn velocity_gradient(&self, x: [f64; 3], _: f64) -> [[f64; 3]; 3] {
        let mut g = [[0.0; 3]; 3];
        g[0][2] = self.g * (self.l - x[2]);
        g
    }
    fn pressure_gradient(&self, _: [f64; 3], _: f64) -> Option<[f64; 3]> {
        Some([-self.g, 0.0, 0.0])
    }
}

/// Decaying Taylor–Green vortex at unit viscosity, in `y = x + shift`:
/// `u = A e^{−2k²t} (sin ky1 cos ky2, −cos ky1 sin ky2, 0)`,
/// `p = A² e^{−4k²t} (cos 2ky1 + cos 2ky2) / 4`.
#[derive(Debug, Clone, Copy)]
pub struct TaylorGreen {
    pub a: f64,
    pub k: f64,
    pub shift: [f64; 2],
}

impl TaylorGreen {
    fn decay(&self, t: f64) -> f64 {
        self.a * (-2.0 * self.k * self.k * t).exp()
    }

    fn phases(&self, x: [f64; 3]) -> [f64; 2] {
        [self.k * (x[0] + self.shift[0]), self.k * (x[1] + self.shift[1])]
    }
}

impl AnalyticField for TaylorGreen {
    fn velocity(&self, x: [f64; 3], t: f64) -> [f64; 3] {
        let [y1, y2] = self.phases(x);
        let (s1, c1) = y1.sin_cos();
        let (s2, c2) = y2.sin_cos();
        let f = self.decay(t);
        [f * s1 * c2, -f * c1 * s2, 0.0]
    }
    fn pressure(&self, x: [f64; 3], t: f64) -> Option<f64> {
        let [y1, y2] = self.phases(x);
        let f = self.decay(t);
        Some(0.25 * f * f * ((2.0 * y1).cos() + (2.0 * y2).cos()))
    }
    fn has_pressure(&self) -> bool {
        true
    }
    fn velocity_gradient(&self, x: [f64; 3], t: f64) -> [[f64; 3]; 3] {
        let [y1, y2] = self.phases(x);
        let (s1, c1) = y1.sin_cos();
        let (s2, c2) = y2.sin_cos();
        let fk = self.decay(t) * self.k;
        [[fk * c1 * c2, -fk * s1 * s2, 0.0], [fk * s1 * s2, -fk * c1 * c2, 0.0], [0.0; 3]]
    }
    fn pressure_gradient(&self, x: [f64; 3], t: f64) -> Option<[f64; 3]> {
        let [y1, y2] = self.phases(x);
        let f = self.decay(t);
        let c = -0.5 * f * f * self.k;
        Some([c * (2.0 * y1).sin(), c * (2.0 * y2).sin(), 0.0])
    }
}

pub fn sample(grid: GridSpec, f: impl AnalyticField + 'static, label: &str) -> SpaceTimeField {
    SpaceTimeField::from_analytic(grid, Arc::new(f), 1e-12, 1e-12, label).unwrap()
}

/// `G` of the degree −1 swirl with amplitude `amp` for `(p, q) = (p, q)` on a full cylinder:
/// `amp · (I / (3 − p))^{1/p}` with `I = 2π ∫₀^π sin^{p+1}θ dθ`.
pub fn homogeneous_g(amp: f64, p: f64) -> f64 {
    let n = 200_000;
    let dth = PI / n as f64;
    let s: f64 = (0..n).map(|i| ((i as f64 + 0.5) * dth).sin().powf(p + 1.0)).sum::<f64>() * dth;
    amp * (2.0 * PI * s / (3.0 - p)).powf(1.0 / p)
}

/// Dense Riemann-sum reference for `‖g(u)‖_{L^{p,q}}` over `B(x, r) × (t − r², t)` clipped
/// to the grid box (and to `x3 > 0` when `half`), midpoint rule with spacing `h/sub`, `dt/sub`.
/// Returns one norm per `(p, q)` pair.
#[allow(clippy::too_many_arguments)]
pub fn oracle_mixed_norms(
    closure: &dyn AnalyticField,
    grid: &GridSpec,
    z: SpaceTimePoint,
    r: f64,
    half: bool,
    pairs: &[(f64, f64)],
    sub: usize,
    g: &dyn Fn([f64; 3]) -> f64,
) -> Vec<f64> {
    let hs = grid.h / sub as f64;
    let lo = grid.origin;
    let hi = grid.upper();
    let mut axes: Vec<Vec<f64>> = Vec::new();
    for a in 0..3 {
        let mut from = (z.x[a] - r).max(lo[a]);
        if a == 2 && half {
            from = from.max(0.0);
        }
        let to = (z.x[a] + r).min(hi[a]);
        // Sub-cells of the node lattice, so both rules see the same clipped box.
        let start = ((from - lo[a]) / hs).floor() as i64;
        let end = ((to - lo[a]) / hs).ceil() as i64;
        axes.push((start..end).map(|i| lo[a] + (i as f64 + 0.5) * hs).filter(|v| *v > from && *v < to).collect());
    }
    let mut points = Vec::new();
    for &x3 in &axes[2] {
        for &x2 in &axes[1] {
            for &x1 in &axes[0] {
                let d2 = (x1 - z.x[0]).powi(2) + (x2 - z.x[1]).powi(2) + (x3 - z.x[2]).powi(2);
                if d2 < r * r {
                    points.push([x1, x2, x3]);
                }
            }
        }
    }
    let t_from = (z.t - r * r).max(grid.t0);
    let t_to = z.t.min(grid.t_end());
    let nts = (((t_to - t_from) / grid.dt) * sub as f64).ceil().max(1.0) as usize;
    let dts = (t_to - t_from) / nts as f64;
    let mut totals = vec![0.0; pairs.len()];
    let mut vals = Vec::with_capacity(points.len());
    for it in 0..nts {
        let t = t_from + (it as f64 + 0.5) * dts;
        vals.clear();
        vals.extend(points.iter().map(|x| g(closure.velocity(*x, t)).abs()));
        for (k, &(p, q)) in pairs.iter().enumerate() {
            let slab: f64 = vals.iter().map(|v| v.powf(p)).sum::<f64>() * hs * hs * hs;
            totals[k] += dts * slab.powf(q / p);
        }
    }
    totals.iter().zip(pairs).map(|(t, &(_, q))| t.powf(1.0 / q)).collect()
}

pub fn speed(u: [f64; 3]) -> f64 {
    (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt()
}
