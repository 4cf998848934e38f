//! Closed-form fields used as generators and quadrature references.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// A field given by formulas rather than samples.
///
/// Gradients default to fourth-order central differences of the values.
pub trait AnalyticField: Send + Sync + fmt::Debug {
    fn velocity(&self, x: [f64; 3], t: f64) -> [f64; 3];

    fn pressure(&self, _x: [f64; 3], _t: f64) -> Option<f64> {
        None
    }

    fn has_pressure(&self) -> bool {
        false
    }

    fn forcing(&self, _x: [f64; 3], _t: f64) -> [f64; 3] {
        [0.0; 3]
    }

    /// `g[i][j] = ∂_j u_i`.
    fn velocity_gradient(&self, x: [f64; 3], t: f64) -> [[f64; 3]; 3] {
        let mut g = [[0.0; 3]; 3];
        for j in 0..3 {
            let d = fd4(|s| {
                let mut y = x;
                y[j] += s;
                self.velocity(y, t)
            }, fd_step(x[j]));
            for i in 0..3 {
                g[i][j] = d[i];
            }
        }
        g
    }

    fn pressure_gradient(&self, x: [f64; 3], t: f64) -> Option<[f64; 3]> {
        self.pressure(x, t)?;
        let mut g = [0.0; 3];
        for (j, gj) in g.iter_mut().enumerate() {
            let d = fd4(|s| {
                let mut y = x;
                y[j] += s;
                [self.pressure(y, t).unwrap_or(0.0), 0.0, 0.0]
            }, fd_step(x[j]));
            *gj = d[0];
        }
        Some(g)
    }
}

fn fd_step(x: f64) -> f64 {
    1e-3 * x.abs().max(1e-2)
}

fn fd4(f: impl Fn(f64) -> [f64; 3], s: f64) -> [f64; 3] {
    let (a, b, c, d) = (f(-2.0 * s), f(-s), f(s), f(2.0 * s));
    [0, 1, 2].map(|i| (a[i] - 8.0 * b[i] + 8.0 * c[i] - d[i]) / (12.0 * s))
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Zero;

impl AnalyticField for Zero {
    fn velocity(&self, _x: [f64; 3], _t: f64) -> [f64; 3] {
        [0.0; 3]
    }

    fn pressure(&self, _x: [f64; 3], _t: f64) -> Option<f64> {
        Some(0.0)
    }

    fn has_pressure(&self) -> bool {
        true
    }

    fn velocity_gradient(&self, _x: [f64; 3], _t: f64) -> [[f64; 3]; 3] {
        [[0.0; 3]; 3]
    }

    fn pressure_gradient(&self, _x: [f64; 3], _t: f64) -> Option<[f64; 3]> {
        Some([0.0; 3])
    }
}

/// Decaying shear `u = (A sin(a x3) e^{-a^2 t}, 0, 0)`, `p = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Shear {
    pub amplitude: f64,
    pub wavenumber: f64,
}

impl AnalyticField for Shear {
    fn velocity(&self, x: [f64; 3], t: f64) -> [f64; 3] {
        let a = self.wavenumber;
        [self.amplitude * (a * x[2]).sin() * (-a * a * t).exp(), 0.0, 0.0]
    }

    fn pressure(&self, _x: [f64; 3], _t: f64) -> Option<f64> {
        Some(0.0)
    }

    fn has_pressure(&self) -> bool {
        true
    }

    fn velocity_gradient(&self, x: [f64; 3], t: f64) -> [[f64; 3]; 3] {
        let a = self.wavenumber;
        let mut g = [[0.0; 3]; 3];
        g[0][2] = self.amplitude * a * (a * x[2]).cos() * (-a * a * t).exp();
        g
    }

    fn pressure_gradient(&self, _x: [f64; 3], _t: f64) -> Option<[f64; 3]> {
        Some([0.0; 3])
    }
}

/// Degree −1 swirl `u = A (−x2, x1, 0) / |x|^2`, singular at the origin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Homogeneous {
    pub amplitude: f64,
}

impl AnalyticField for Homogeneous {
    fn velocity(&self, x: [f64; 3], _t: f64) -> [f64; 3] {
        let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        let c = self.amplitude / r2;
        [-c * x[1], c * x[0], 0.0]
    }

    fn pressure(&self, _x: [f64; 3], _t: f64) -> Option<f64> {
        Some(0.0)
    }

    fn has_pressure(&self) -> bool {
        true
    }

    fn velocity_gradient(&self, x: [f64; 3], _t: f64) -> [[f64; 3]; 3] {
        let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        let a = self.amplitude;
        let mut g = [[0.0; 3]; 3];
        for j in 0..3 {
            let d1 = if j == 1 { 1.0 } else { 0.0 };
            let d0 = if j == 0 { 1.0 } else { 0.0 };
            g[0][j] = -a * (d1 / r2 - 2.0 * x[1] * x[j] / (r2 * r2));
            g[1][j] = a * (d0 / r2 - 2.0 * x[0] * x[j] / (r2 * r2));
        }
        g
    }

    fn pressure_gradient(&self, _x: [f64; 3], _t: f64) -> Option<[f64; 3]> {
        Some([0.0; 3])
    }
}

/// One Fourier mode `a cos(k·x + φ + ω t)` of a vector potential.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomMode {
    pub k: [f64; 3],
    pub a: [f64; 3],
    pub phase: f64,
    pub omega: f64,
}

/// `u = curl(τ(x3) A)` for a finite Fourier sum `A`; `τ = x3²/(1+x3²)` on the
/// half-space and `τ = 1` otherwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomCurl {
    pub modes: Vec<RandomMode>,
    pub tapered: bool,
}

impl RandomCurl {
    fn taper(&self, x3: f64) -> [f64; 3] {
        if !self.tapered {
            return [1.0, 0.0, 0.0];
        }
        let s = 1.0 + x3 * x3;
        [
            x3 * x3 / s,
            2.0 * x3 / (s * s),
            (2.0 - 6.0 * x3 * x3) / (s * s * s),
        ]
    }

    /// First and second derivatives of the tapered potential:
    /// `d1[i][j] = ∂_j Ψ_i`, `d2[i][j][l] = ∂_j ∂_l Ψ_i`.
    #[allow(clippy::type_complexity)]
    fn potential_derivatives(&self, x: [f64; 3], t: f64, second: bool) -> ([[f64; 3]; 3], [[[f64; 3]; 3]; 3]) {
        let mut s0 = [0.0; 3];
        let mut s1 = [[0.0; 3]; 3];
        let mut s2 = [[[0.0; 3]; 3]; 3];
        for m in &self.modes {
            let th = m.k[0] * x[0] + m.k[1] * x[1] + m.k[2] * x[2] + m.phase + m.omega * t;
            let (sn, cs) = th.sin_cos();
            for i in 0..3 {
                s0[i] += m.a[i] * cs;
                for j in 0..3 {
                    s1[i][j] -= m.a[i] * m.k[j] * sn;
                    if second {
                        for l in 0..3 {
                            s2[i][j][l] -= m.a[i] * m.k[j] * m.k[l] * cs;
                        }
                    }
                }
            }
        }
        let [tau, dtau, ddtau] = self.taper(x[2]);
        let mut d1 = [[0.0; 3]; 3];
        let mut d2 = [[[0.0; 3]; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                d1[i][j] = tau * s1[i][j] + if j == 2 { dtau * s0[i] } else { 0.0 };
                if second {
                    for l in 0..3 {
                        let mut v = tau * s2[i][j][l];
                        if l == 2 {
                            v += dtau * s1[i][j];
                        }
                        if j == 2 {
                            v += dtau * s1[i][l];
                        }
                        if j == 2 && l == 2 {
                            v += ddtau * s0[i];
                        }
                        d2[i][j][l] = v;
                    }
                }
            }
        }
        (d1, d2)
    }

    /// Bound `C` with `|div_h u| <= C h^2` for centred differences of the exact curl.
    pub fn divergence_constant(&self) -> f64 {
        24.0 * self
            .modes
            .iter()
            .map(|m| {
                let kmax = m.k.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
                (kmax + 1.0).powi(4) * m.a.iter().map(|v| v.abs()).sum::<f64>()
            })
            .sum::<f64>()
    }
}

impl AnalyticField for RandomCurl {
    fn velocity(&self, x: [f64; 3], t: f64) -> [f64; 3] {
        let (d, _) = self.potential_derivatives(x, t, false);
        [d[2][1] - d[1][2], d[0][2] - d[2][0], d[1][0] - d[0][1]]
    }

    fn velocity_gradient(&self, x: [f64; 3], t: f64) -> [[f64; 3]; 3] {
        let (_, d2) = self.potential_derivatives(x, t, true);
        let mut g = [[0.0; 3]; 3];
        for l in 0..3 {
            g[0][l] = d2[2][1][l] - d2[1][2][l];
            g[1][l] = d2[0][2][l] - d2[2][0][l];
            g[2][l] = d2[1][0][l] - d2[0][1][l];
        }
        g
    }
}

/// `u_s(x, t) = s u(s x, s² t)`, `p_s = s² p`, `f_s = s³ f`.
#[derive(Clone, Debug)]
pub struct Scaled {
    pub inner: Arc<dyn AnalyticField>,
    pub s: f64,
}

impl Scaled {
    fn map(&self, x: [f64; 3], t: f64) -> ([f64; 3], f64) {
        (x.map(|v| v * self.s), t * self.s * self.s)
    }
}

impl AnalyticField for Scaled {
    fn velocity(&self, x: [f64; 3], t: f64) -> [f64; 3] {
        let (y, tau) = self.map(x, t);
        self.inner.velocity(y, tau).map(|v| v * self.s)
    }

    fn pressure(&self, x: [f64; 3], t: f64) -> Option<f64> {
        let (y, tau) = self.map(x, t);
        self.inner.pressure(y, tau).map(|v| v * self.s * self.s)
    }

    fn has_pressure(&self) -> bool {
        self.inner.has_pressure()
    }

    fn forcing(&self, x: [f64; 3], t: f64) -> [f64; 3] {
        let (y, tau) = self.map(x, t);
        self.inner.forcing(y, tau).map(|v| v * self.s.powi(3))
    }

    fn velocity_gradient(&self, x: [f64; 3], t: f64) -> [[f64; 3]; 3] {
        let (y, tau) = self.map(x, t);
        let s2 = self.s * self.s;
        self.inner.velocity_gradient(y, tau).map(|row| row.map(|v| v * s2))
    }

    fn pressure_gradient(&self, x: [f64; 3], t: f64) -> Option<[f64; 3]> {
        let (y, tau) = self.map(x, t);
        let s3 = self.s.powi(3);
        self.inner.pressure_gradient(y, tau).map(|g| g.map(|v| v * s3))
    }
}

/// Synthetic forcing profiles for exercising Morrey norms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Forcing {
    Constant { value: [f64; 3] },
    GaussianBump { center: [f64; 3], width: f64, amplitude: [f64; 3] },
}

impl Forcing {
    pub fn eval(&self, x: [f64; 3]) -> [f64; 3] {
        match *self {
            Forcing::Constant { value } => value,
            Forcing::GaussianBump { center, width, amplitude } => {
                let d2: f64 = (0..3).map(|a| (x[a] - center[a]).powi(2)).sum();
                let w = (-d2 / (width * width)).exp();
                amplitude.map(|v| v * w)
            }
        }
    }
}

/// Any closed form with its forcing replaced by a synthetic profile.
#[derive(Clone, Debug)]
pub struct WithForcing {
    pub inner: Arc<dyn AnalyticField>,
    pub forcing: Forcing,
}

impl AnalyticField for WithForcing {
    fn velocity(&self, x: [f64; 3], t: f64) -> [f64; 3] {
        self.inner.velocity(x, t)
    }

    fn pressure(&self, x: [f64; 3], t: f64) -> Option<f64> {
        self.inner.pressure(x, t)
    }

    fn has_pressure(&self) -> bool {
        self.inner.has_pressure()
    }

    fn forcing(&self, x: [f64; 3], _t: f64) -> [f64; 3] {
        self.forcing.eval(x)
    }

    fn velocity_gradient(&self, x: [f64; 3], t: f64) -> [[f64; 3]; 3] {
        self.inner.velocity_gradient(x, t)
    }

    fn pressure_gradient(&self, x: [f64; 3], t: f64) -> Option<[f64; 3]> {
        self.inner.pressure_gradient(x, t)
    }
}
