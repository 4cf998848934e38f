//! Cylinder quadrature on node-centred grids.
//!
//! Cells are weighted by the fraction of `subsample³` interior points that
//! fall inside the clipped ball. In sampled mode each cell contributes its
//! 8-node average (linear in time between levels); in analytic mode the
//! closed form is evaluated at every interior sub-point instead.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cylinder::{Clip, ParabolicCylinder};
use crate::error::{Error, Result};
use crate::exponents::{Exponent, PQPair};
use crate::fields::{AnalyticField, GridSpec, NodeData, SpaceTimeField, F1, P};

const CHUNK: usize = 256;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Evaluation {
    /// Cell averages of the node samples.
    #[default]
    Sampled,
    /// The analytic closure at each sub-point.
    Analytic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureConfig {
    /// Sub-points per axis and cell for the clipping indicator.
    pub subsample: u32,
    /// Smallest admissible radius in cells.
    pub min_cells: u32,
    pub evaluation: Evaluation,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            subsample: 4,
            min_cells: 4,
            evaluation: Evaluation::Sampled,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=8).contains(&self.subsample) {
            return Err(Error::Config(format!("subsample = {} must lie in [1, 8]", self.subsample)));
        }
        if self.min_cells < 4 {
            return Err(Error::Config(format!("min_cells = {} must be at least 4", self.min_cells)));
        }
        Ok(())
    }

    pub fn analytic(subsample: u32) -> Self {
        QuadratureConfig {
            subsample,
            evaluation: Evaluation::Analytic,
            ..Default::default()
        }
    }
}

/// How the clipped cylinder relates to the sampled region.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverageFlag {
    /// Part of `(t − r², t)` lies outside the sampled time range.
    TimeClipped,
    /// Part of the ball lies outside the sampled box.
    SpaceClipped,
    /// An interior cylinder crosses the wall of a half-space grid.
    TouchesBoundary,
}

/// A point in time between two sampled levels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeSample {
    pub level: usize,
    pub theta: f64,
    pub time: f64,
    /// Length of the sub-interval this sample represents.
    pub weight: f64,
}

#[derive(Clone, Copy, Debug)]
struct Cell {
    idx: [usize; 3],
    frac: f64,
}

/// Field values available at a quadrature point.
pub trait Probe {
    fn position(&self) -> [f64; 3];
    fn time(&self) -> f64;
    fn velocity(&self) -> [f64; 3];
    /// `g[i][j] = ∂_j u_i`.
    fn velocity_gradient(&self) -> [[f64; 3]; 3];
    fn pressure(&self) -> f64;
    fn pressure_gradient(&self) -> [f64; 3];
    fn forcing(&self) -> [f64; 3];
}

/// Integrand evaluated at a probe; the second argument is the time-sample index.
pub type Integrand<'a> = dyn Fn(&dyn Probe, usize) -> f64 + Sync + 'a;

/// Sample data a quadrature reads from.
#[derive(Clone, Copy)]
pub enum Source<'a> {
    Sampled(&'a dyn NodeData),
    Analytic {
        closure: &'a dyn AnalyticField,
        samples: &'a dyn NodeData,
    },
}

impl<'a> Source<'a> {
    /// Picks the source matching `cfg.evaluation` for a field.
    pub fn for_field(field: &'a SpaceTimeField, cfg: &QuadratureConfig) -> Result<Self> {
        match cfg.evaluation {
            Evaluation::Sampled => Ok(Source::Sampled(field)),
            Evaluation::Analytic => {
                let closure = field.analytic().ok_or_else(|| {
                    Error::Unsupported(format!(
                        "analytic evaluation requested but field {} has no closure",
                        field.label
                    ))
                })?;
                Ok(Source::Analytic {
                    closure: closure.as_ref(),
                    samples: field,
                })
            }
        }
    }

    fn samples(&self) -> &'a dyn NodeData {
        match *self {
            Source::Sampled(s) => s,
            Source::Analytic { samples, .. } => samples,
        }
    }
}

/// Cell-average probe with linear interpolation between two levels.
pub struct CellProbe<'a> {
    data: &'a dyn NodeData,
    h: f64,
    center: [f64; 3],
    idx: [usize; 3],
    ts: TimeSample,
}

impl<'a> CellProbe<'a> {
    pub fn new(data: &'a dyn NodeData, idx: [usize; 3], ts: TimeSample) -> Self {
        let g = data.grid();
        let c = g.node_position(idx).map(|v| v + 0.5 * g.h);
        CellProbe {
            data,
            h: g.h,
            center: c,
            idx,
            ts,
        }
    }

    fn corners(&self, comp: usize) -> [f64; 8] {
        let mut out = [0.0; 8];
        let [i, j, k] = self.idx;
        for (n, o) in out.iter_mut().enumerate() {
            let node = [i + (n & 1), j + ((n >> 1) & 1), k + ((n >> 2) & 1)];
            let mut v = self.data.node(self.ts.level, node, comp);
            if self.ts.theta != 0.0 {
                let w = self.data.node(self.ts.level + 1, node, comp);
                v += self.ts.theta * (w - v);
            }
            *o = v;
        }
        out
    }

    fn average(c: &[f64; 8]) -> f64 {
        c.iter().sum::<f64>() * 0.125
    }

    fn gradient(&self, c: &[f64; 8]) -> [f64; 3] {
        let mut g = [0.0; 3];
        for (d, gd) in g.iter_mut().enumerate() {
            let mut s = 0.0;
            for (n, v) in c.iter().enumerate() {
                if (n >> d) & 1 == 1 {
                    s += v;
                } else {
                    s -= v;
                }
            }
            *gd = s / (4.0 * self.h);
        }
        g
    }
}

impl Probe for CellProbe<'_> {
    fn position(&self) -> [f64; 3] {
        self.center
    }

    fn time(&self) -> f64 {
        self.ts.time
    }

    fn velocity(&self) -> [f64; 3] {
        [0, 1, 2].map(|c| Self::average(&self.corners(c)))
    }

    fn velocity_gradient(&self) -> [[f64; 3]; 3] {
        [0, 1, 2].map(|c| self.gradient(&self.corners(c)))
    }

    fn pressure(&self) -> f64 {
        Self::average(&self.corners(P))
    }

    fn pressure_gradient(&self) -> [f64; 3] {
        self.gradient(&self.corners(P))
    }

    fn forcing(&self) -> [f64; 3] {
        [0, 1, 2].map(|c| Self::average(&self.corners(F1 + c)))
    }
}

/// Closed-form probe; pressure falls back to the enclosing cell when the
/// closure does not provide one.
pub struct PointProbe<'a> {
    closure: &'a dyn AnalyticField,
    x: [f64; 3],
    cell: CellProbe<'a>,
}

impl Probe for PointProbe<'_> {
    fn position(&self) -> [f64; 3] {
        self.x
    }

    fn time(&self) -> f64 {
        self.cell.ts.time
    }

    fn velocity(&self) -> [f64; 3] {
        self.closure.velocity(self.x, self.cell.ts.time)
    }

    fn velocity_gradient(&self) -> [[f64; 3]; 3] {
        self.closure.velocity_gradient(self.x, self.cell.ts.time)
    }

    fn pressure(&self) -> f64 {
        self.closure
            .pressure(self.x, self.cell.ts.time)
            .unwrap_or_else(|| self.cell.pressure())
    }

    fn pressure_gradient(&self) -> [f64; 3] {
        self.closure
            .pressure_gradient(self.x, self.cell.ts.time)
            .unwrap_or_else(|| self.cell.pressure_gradient())
    }

    fn forcing(&self) -> [f64; 3] {
        self.closure.forcing(self.x, self.cell.ts.time)
    }
}

/// Quadrature rule for one clipped cylinder on one grid.
#[derive(Clone, Debug)]
pub struct CylinderQuadrature {
    grid: GridSpec,
    cyl: ParabolicCylinder,
    cfg: QuadratureConfig,
    cells: Vec<Cell>,
    pieces: Vec<TimeSample>,
    window: (f64, f64),
    flags: Vec<CoverageFlag>,
    measure: f64,
}

impl CylinderQuadrature {
    pub fn new(grid: &GridSpec, cyl: &ParabolicCylinder, cfg: &QuadratureConfig) -> Result<Self> {
        cfg.validate()?;
        let floor = cfg.min_cells as f64 * grid.h;
        if cyl.radius < floor * (1.0 - 1e-12) {
            return Err(Error::Resolution {
                radius: cyl.radius,
                floor,
                min_cells: cfg.min_cells,
                h: grid.h,
            });
        }
        let mut flags = Vec::new();

        let (a, b) = (cyl.t_start().max(grid.t0), cyl.center.t.min(grid.t_end()));
        if !(b > a) {
            return Err(Error::Range(format!(
                "time window ({}, {}) of the cylinder misses the sampled range [{}, {}]",
                cyl.t_start(),
                cyl.center.t,
                grid.t0,
                grid.t_end()
            )));
        }
        let tol_t = 1e-9 * grid.dt;
        if a > cyl.t_start() + tol_t || b < cyl.center.t - tol_t {
            flags.push(CoverageFlag::TimeClipped);
        }
        let pieces = time_pieces(grid, a, b);

        let (cells, space_flags) = clipped_cells(grid, cyl, cfg.subsample);
        flags.extend(space_flags);
        if cells.is_empty() {
            return Err(Error::Range(format!(
                "ball of radius {} around {:?} misses the sampled box",
                cyl.radius, cyl.center.x
            )));
        }
        let h3 = grid.h.powi(3);
        let measure = cells.iter().map(|c| c.frac * h3).sum();
        flags.sort();
        flags.dedup();
        Ok(CylinderQuadrature {
            grid: *grid,
            cyl: *cyl,
            cfg: *cfg,
            cells,
            pieces,
            window: (a, b),
            flags,
            measure,
        })
    }

    pub fn cylinder(&self) -> &ParabolicCylinder {
        &self.cyl
    }

    pub fn pieces(&self) -> &[TimeSample] {
        &self.pieces
    }

    pub fn flags(&self) -> &[CoverageFlag] {
        &self.flags
    }

    /// Volume of the clipped ball as seen by the rule.
    pub fn spatial_measure(&self) -> f64 {
        self.measure
    }

    /// Length of the sampled part of `(t − r², t)`.
    pub fn time_length(&self) -> f64 {
        self.window.1 - self.window.0
    }

    /// Time samples at both ends of the window and at every level in between.
    pub fn slice_times(&self) -> Vec<TimeSample> {
        let (a, b) = self.window;
        let mut times = vec![a];
        let first = ((a - self.grid.t0) / self.grid.dt).floor() as usize + 1;
        for level in first..self.grid.nt {
            let t = self.grid.time(level);
            if t >= b - 1e-12 * self.grid.dt {
                break;
            }
            if t > a + 1e-12 * self.grid.dt {
                times.push(t);
            }
        }
        times.push(b);
        times.into_iter().map(|t| time_sample(&self.grid, t, 0.0)).collect()
    }

    fn fold(&self, src: Source<'_>, ts: TimeSample, ti: usize, g: &Integrand<'_>, power: Option<f64>, max: bool) -> f64 {
        let data = src.samples();
        let h3 = self.grid.h.powi(3);
        let m = self.cfg.subsample as usize;
        let sub_w = h3 / (m * m * m) as f64;
        let tf = |v: f64| match power {
            Some(p) => v.abs().powf(p),
            None => v,
        };
        let cell_value = |c: &Cell| -> f64 {
            let probe = CellProbe::new(data, c.idx, ts);
            match src {
                Source::Sampled(_) => {
                    let v = tf(g(&probe, ti));
                    if max {
                        v
                    } else {
                        c.frac * h3 * v
                    }
                }
                Source::Analytic { closure, .. } => {
                    let base = self.grid.node_position(c.idx);
                    let mut acc = if max { f64::NEG_INFINITY } else { 0.0 };
                    let full = c.frac >= 1.0;
                    let mut pp = PointProbe {
                        closure,
                        x: base,
                        cell: probe,
                    };
                    for kk in 0..m {
                        for jj in 0..m {
                            for ii in 0..m {
                                let y = [
                                    base[0] + (ii as f64 + 0.5) * self.grid.h / m as f64,
                                    base[1] + (jj as f64 + 0.5) * self.grid.h / m as f64,
                                    base[2] + (kk as f64 + 0.5) * self.grid.h / m as f64,
                                ];
                                if !full && !inside(&self.cyl, y) {
                                    continue;
                                }
                                pp.x = y;
                                let v = tf(g(&pp, ti));
                                if max {
                                    acc = acc.max(v);
                                } else {
                                    acc += sub_w * v;
                                }
                            }
                        }
                    }
                    acc
                }
            }
        };
        let parts: Vec<f64> = self
            .cells
            .par_chunks(CHUNK)
            .map(|chunk| {
                if max {
                    chunk.iter().map(cell_value).fold(f64::NEG_INFINITY, f64::max)
                } else {
                    chunk.iter().map(cell_value).sum()
                }
            })
            .collect();
        if max {
            parts.into_iter().fold(0.0, f64::max)
        } else {
            parts.into_iter().sum()
        }
    }

    /// `∫ g` over the clipped ball at one time sample.
    pub fn slice_integral(&self, src: Source<'_>, ts: TimeSample, index: usize, g: &Integrand<'_>) -> f64 {
        self.fold(src, ts, index, g, None, false)
    }

    /// Spatial integrals at every time piece.
    pub fn piece_integrals(&self, src: Source<'_>, g: &Integrand<'_>) -> Vec<f64> {
        self.pieces
            .iter()
            .enumerate()
            .map(|(n, ts)| self.slice_integral(src, *ts, n, g))
            .collect()
    }

    /// Spatial means of `g` at every time piece.
    pub fn piece_means(&self, src: Source<'_>, g: &Integrand<'_>) -> Vec<f64> {
        self.piece_integrals(src, g)
            .into_iter()
            .map(|v| v / self.measure)
            .collect()
    }

    /// Space-time integral `∫∫ g`.
    pub fn integral(&self, src: Source<'_>, g: &Integrand<'_>) -> f64 {
        self.piece_integrals(src, g)
            .iter()
            .zip(&self.pieces)
            .map(|(v, ts)| v * ts.weight)
            .sum()
    }

    /// Largest spatial integral of `g` over the slice times.
    pub fn sup_in_time(&self, src: Source<'_>, g: &Integrand<'_>) -> f64 {
        self.slice_times()
            .iter()
            .enumerate()
            .map(|(n, ts)| self.slice_integral(src, *ts, n, g))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `‖g‖_{L^{p,q}}` over the clipped cylinder.
    pub fn mixed_norm(&self, src: Source<'_>, pq: PQPair, g: &Integrand<'_>) -> f64 {
        let slabs: Vec<f64> = self
            .pieces
            .iter()
            .enumerate()
            .map(|(n, ts)| match pq.p {
                Exponent::Finite(p) => self.fold(src, *ts, n, g, Some(p), false).powf(1.0 / p),
                Exponent::Infinite => self.fold(src, *ts, n, &|pr: &dyn Probe, i| g(pr, i).abs(), None, true),
            })
            .collect();
        match pq.q {
            Exponent::Finite(q) => slabs
                .iter()
                .zip(&self.pieces)
                .map(|(s, ts)| ts.weight * s.powf(q))
                .sum::<f64>()
                .powf(1.0 / q),
            Exponent::Infinite => slabs.into_iter().fold(0.0, f64::max),
        }
    }
}

fn inside(cyl: &ParabolicCylinder, y: [f64; 3]) -> bool {
    if cyl.clip == Clip::Half && y[2] <= 0.0 {
        return false;
    }
    let d2 = (y[0] - cyl.center.x[0]).powi(2) + (y[1] - cyl.center.x[1]).powi(2) + (y[2] - cyl.center.x[2]).powi(2);
    d2 < cyl.radius * cyl.radius
}

/// Sample at time `t`, interpolating between the two enclosing levels.
pub fn time_sample(grid: &GridSpec, t: f64, weight: f64) -> TimeSample {
    let top = grid.nt.saturating_sub(2);
    let s = ((t - grid.t0) / grid.dt).max(0.0);
    let level = (s.floor() as usize).min(top);
    let mut theta = (s - level as f64).clamp(0.0, 1.0);
    if theta < 1e-12 {
        theta = 0.0;
    }
    TimeSample {
        level,
        theta,
        time: t,
        weight,
    }
}

pub(crate) fn time_pieces(grid: &GridSpec, a: f64, b: f64) -> Vec<TimeSample> {
    let mut cuts = vec![a];
    for level in 0..grid.nt {
        let t = grid.time(level);
        if t > a + 1e-12 * grid.dt && t < b - 1e-12 * grid.dt {
            cuts.push(t);
        }
    }
    cuts.push(b);
    cuts.windows(2)
        .map(|w| time_sample(grid, 0.5 * (w[0] + w[1]), w[1] - w[0]))
        .collect()
}

fn clipped_cells(grid: &GridSpec, cyl: &ParabolicCylinder, m: u32) -> (Vec<Cell>, Vec<CoverageFlag>) {
    let x = cyl.center.x;
    let r = cyl.radius;
    let mut flags = Vec::new();
    let mut lo = [0usize; 3];
    let mut hi = [0usize; 3];
    for a in 0..3 {
        let ncell = grid.counts[a] as isize - 1;
        let l = ((x[a] - r - grid.origin[a]) / grid.h).floor() as isize;
        let u = ((x[a] + r - grid.origin[a]) / grid.h).ceil() as isize - 1;
        let wall = a == 2 && grid.half_space;
        if u < 0 || l > ncell - 1 {
            return (Vec::new(), flags);
        }
        if l < 0 {
            if !wall {
                flags.push(CoverageFlag::SpaceClipped);
            } else if cyl.clip == Clip::Interior && x[a] - r < -1e-12 * grid.h {
                flags.push(CoverageFlag::TouchesBoundary);
            }
        }
        if u > ncell - 1 {
            flags.push(CoverageFlag::SpaceClipped);
        }
        lo[a] = l.max(0) as usize;
        hi[a] = u.min(ncell - 1) as usize;
    }
    let mut cells = Vec::new();
    let mf = m as f64;
    let r2 = r * r;
    for k in lo[2]..=hi[2] {
        for j in lo[1]..=hi[1] {
            for i in lo[0]..=hi[0] {
                let base = grid.node_position([i, j, k]);
                let mut near = 0.0;
                let mut far = 0.0;
                for a in 0..3 {
                    let (c0, c1) = (base[a], base[a] + grid.h);
                    let dn = if x[a] < c0 {
                        c0 - x[a]
                    } else if x[a] > c1 {
                        x[a] - c1
                    } else {
                        0.0
                    };
                    let df = (x[a] - c0).abs().max((x[a] - c1).abs());
                    near += dn * dn;
                    far += df * df;
                }
                let half_ok = cyl.clip == Clip::Interior || base[2] >= 0.0;
                if near >= r2 {
                    continue;
                }
                let frac = if far < r2 && half_ok {
                    1.0
                } else {
                    let mut count = 0u32;
                    for kk in 0..m {
                        for jj in 0..m {
                            for ii in 0..m {
                                let y = [
                                    base[0] + (ii as f64 + 0.5) * grid.h / mf,
                                    base[1] + (jj as f64 + 0.5) * grid.h / mf,
                                    base[2] + (kk as f64 + 0.5) * grid.h / mf,
                                ];
                                if inside(cyl, y) {
                                    count += 1;
                                }
                            }
                        }
                    }
                    count as f64 / (mf * mf * mf)
                };
                if frac > 0.0 {
                    cells.push(Cell { idx: [i, j, k], frac });
                }
            }
        }
    }
    (cells, flags)
}
