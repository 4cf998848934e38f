use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{RatioContext, RatioRecord};
use crate::error::{Error, Result};
use crate::fields::{SpaceTimeField, SpaceTimePoint};
use crate::mixed_norms::{time_pieces, time_sample, CellProbe, Probe, TimeSample};

const BUMP_POWER: i32 = 8;

/// `(1−σ²)⁸` on `(−1, 1)` with its first two derivatives.
pub fn bump(s: f64) -> (f64, f64, f64) {
    let w = 1.0 - s * s;
    if w <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let k = BUMP_POWER as f64;
    let wk2 = w.powi(BUMP_POWER - 2);
    (
        wk2 * w * w,
        -2.0 * k * s * wk2 * w,
        -2.0 * k * wk2 * w + 4.0 * k * (k - 1.0) * s * s * wk2,
    )
}

/// Half-widths of the cutoff relative to the radius: `space·r` and `time·r²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    pub space: f64,
    pub time: f64,
}

impl Default for CutoffSpec {
    fn default() -> Self {
        CutoffSpec { space: 1.0, time: 1.0 }
    }
}

/// Product of one-dimensional bumps centred at a space-time point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bump {
    pub center: SpaceTimePoint,
    pub half_width: f64,
    pub half_time: f64,
}

impl Bump {
    /// `(φ, ∇φ, Δφ, ∂_tφ)`.
    pub fn eval(&self, x: [f64; 3], t: f64) -> (f64, [f64; 3], f64, f64) {
        let w = self.half_width;
        let f = [0, 1, 2].map(|a| bump((x[a] - self.center.x[a]) / w));
        let (tv, td, _) = bump((t - self.center.t) / self.half_time);
        let space = f[0].0 * f[1].0 * f[2].0;
        let phi = space * tv;
        let grad = [
            f[0].1 * f[1].0 * f[2].0 * tv / w,
            f[0].0 * f[1].1 * f[2].0 * tv / w,
            f[0].0 * f[1].0 * f[2].1 * tv / w,
        ];
        let lap = (f[0].2 * f[1].0 * f[2].0 + f[0].0 * f[1].2 * f[2].0 + f[0].0 * f[1].0 * f[2].2) * tv / (w * w);
        let dt = space * td / self.half_time;
        (phi, grad, lap, dt)
    }
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Local energy balance tested with a product bump of half-widths `space·r`, `time·r²`.
///
/// `lhs = ∫|u(t)|²φ + 2∫∫|∇u|²φ`, `rhs = ∫∫ |u|²(∂_tφ+Δφ) + (|u|²+2p)u·∇φ + 2f·uφ`,
/// with `defect = rhs − lhs`.
pub fn check_energy_inequality(
    field: &SpaceTimeField,
    z: SpaceTimePoint,
    r: f64,
    cutoff: CutoffSpec,
) -> Result<RatioRecord> {
    let g = *field.grid();
    if !(r > 0.0 && cutoff.space > 0.0 && cutoff.time > 0.0) {
        return Err(Error::Config(format!(
            "cutoff widths must be positive (r = {r}, space = {}, time = {})",
            cutoff.space, cutoff.time
        )));
    }
    let bumpf = Bump {
        center: z,
        half_width: cutoff.space * r,
        half_time: cutoff.time * r * r,
    };
    let t_lo = z.t - bumpf.half_time;
    let slack = 1e-9 * g.dt;
    if t_lo < g.t0 - slack || z.t > g.t_end() + slack {
        return Err(Error::Config(format!(
            "cutoff time support ({t_lo}, {}) leaves the sampled range [{}, {}]",
            z.t,
            g.t0,
            g.t_end()
        )));
    }
    let mut lo = [0usize; 3];
    let mut hi = [0usize; 3];
    for a in 0..3 {
        let w = bumpf.half_width;
        let l = ((z.x[a] - w - g.origin[a]) / g.h).floor() as isize;
        let u = ((z.x[a] + w - g.origin[a]) / g.h).ceil() as isize - 1;
        let last = g.counts[a] as isize - 2;
        let wall = a == 2 && g.half_space && z.x[2] >= 0.0;
        if (l < 0 && !wall) || u > last || u < 0 {
            return Err(Error::Config(format!(
                "cutoff support [{}, {}] along axis {} leaves the sampled box",
                z.x[a] - w,
                z.x[a] + w,
                a + 1
            )));
        }
        lo[a] = l.max(0) as usize;
        hi[a] = u as usize;
    }
    let mut cells = Vec::new();
    for k in lo[2]..=hi[2] {
        for j in lo[1]..=hi[1] {
            for i in lo[0]..=hi[0] {
                cells.push([i, j, k]);
            }
        }
    }
    let h3 = g.h.powi(3);
    let slice = |ts: TimeSample, f: &(dyn Fn(&CellProbe<'_>) -> f64 + Sync)| -> f64 {
        cells
            .par_chunks(256)
            .map(|chunk| {
                chunk
                    .iter()
                    .map(|&idx| f(&CellProbe::new(field, idx, ts)))
                    .sum::<f64>()
            })
            .collect::<Vec<_>>()
            .into_iter()
            .sum::<f64>()
            * h3
    };

    let end = time_sample(&g, z.t, 0.0);
    let mut lhs = slice(end, &|p| {
        let u = p.velocity();
        dot(u, u) * bumpf.eval(p.position(), z.t).0
    });
    let mut rhs = 0.0;
    for ts in time_pieces(&g, t_lo.max(g.t0), z.t) {
        let s = ts.time;
        lhs += ts.weight
            * slice(ts, &|p| {
                let gu = p.velocity_gradient();
                let e: f64 = gu.iter().map(|row| dot(*row, *row)).sum();
                2.0 * e * bumpf.eval(p.position(), s).0
            });
        rhs += ts.weight
            * slice(ts, &|p| {
                let (phi, grad, lap, dt) = bumpf.eval(p.position(), s);
                let u = p.velocity();
                let u2 = dot(u, u);
                u2 * (dt + lap) + (u2 + 2.0 * p.pressure()) * dot(u, grad) + 2.0 * dot(p.forcing(), u) * phi
            });
    }
    let mut rec = RatioRecord::new(
        "local_energy",
        r,
        lhs,
        rhs,
        RatioContext {
            center: Some(z),
            field: field.label.clone(),
            exponents: None,
            note: Some(format!("cutoff space {} time {}", cutoff.space, cutoff.time)),
        },
    );
    rec.defect = Some(rhs - lhs);
    Ok(rec)
}
