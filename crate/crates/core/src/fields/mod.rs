//! Space-time fields on uniform 4-D grids.

mod analytic;
mod generators;
mod residual;
mod scaling;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use analytic::{
    AnalyticField, Forcing, Homogeneous, RandomCurl, RandomMode, Scaled, Shear, WithForcing, Zero,
};
pub use generators::{
    generate_divfree_random, generate_homogeneous_profile, generate_shear_heat, generate_zero,
    homogeneous_div_tol, with_forcing, PressureMode, RandomOptions,
};
pub use residual::{boundary_trace_max, divergence_max, nse_residual, shear_residual_bound};
pub use scaling::scale_field;

/// Number of stored components per node: `u1 u2 u3 p f1 f2 f3`.
pub const NCOMP: usize = 7;
pub const U1: usize = 0;
pub const P: usize = 3;
pub const F1: usize = 4;

/// Names of the stored components, in storage order.
pub const COMPONENT_NAMES: [&str; NCOMP] = ["u1", "u2", "u3", "p", "f1", "f2", "f3"];

/// A point `z = (x, t)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimePoint {
    pub x: [f64; 3],
    pub t: f64,
}

impl SpaceTimePoint {
    pub fn new(x: [f64; 3], t: f64) -> Self {
        SpaceTimePoint { x, t }
    }
}

impl fmt::Display for SpaceTimePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}; {})", self.x[0], self.x[1], self.x[2], self.t)
    }
}

/// Uniform node-centred grid: spacing `h` in all spatial axes, `dt` in time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub origin: [f64; 3],
    pub h: f64,
    pub counts: [usize; 3],
    pub t0: f64,
    pub dt: f64,
    pub nt: usize,
    /// Domain is `{x3 >= 0}` with the flat boundary on `x3 = 0`.
    pub half_space: bool,
}

impl GridSpec {
    pub fn new(
        origin: [f64; 3],
        h: f64,
        counts: [usize; 3],
        t0: f64,
        dt: f64,
        nt: usize,
        half_space: bool,
    ) -> Result<Self> {
        let g = GridSpec {
            origin,
            h,
            counts,
            t0,
            dt,
            nt,
            half_space,
        };
        g.validate()?;
        Ok(g)
    }

    /// Full-space grid whose spatial box is centred on the origin.
    ///
    /// With even counts the origin is a cell centre, never a node.
    pub fn centered(counts: [usize; 3], h: f64, t0: f64, dt: f64, nt: usize) -> Result<Self> {
        let origin = [0, 1, 2].map(|a| -0.5 * (counts[a] as f64 - 1.0) * h);
        Self::new(origin, h, counts, t0, dt, nt, false)
    }

    /// Half-space grid starting on `x3 = 0`, centred in `x1, x2`.
    pub fn half_space(counts: [usize; 3], h: f64, t0: f64, dt: f64, nt: usize) -> Result<Self> {
        let origin = [
            -0.5 * (counts[0] as f64 - 1.0) * h,
            -0.5 * (counts[1] as f64 - 1.0) * h,
            0.0,
        ];
        Self::new(origin, h, counts, t0, dt, nt, true)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::Config(format!("grid spacing h = {} must be positive", self.h)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("time step dt = {} must be positive", self.dt)));
        }
        if self.counts.iter().any(|&n| n < 2) || self.nt < 1 {
            return Err(Error::Config(format!(
                "grid counts {:?} x {} must be at least 2 per spatial axis and 1 in time",
                self.counts, self.nt
            )));
        }
        if self.origin.iter().chain([&self.t0]).any(|v| !v.is_finite()) {
            return Err(Error::Config("grid origin and t0 must be finite".into()));
        }
        if self.half_space && self.origin[2] != 0.0 {
            return Err(Error::Config(format!(
                "half-space grid must start at x3 = 0, got origin x3 = {}",
                self.origin[2]
            )));
        }
        Ok(())
    }

    pub fn nodes_per_level(&self) -> usize {
        self.counts[0] * self.counts[1] * self.counts[2]
    }

    pub fn total_values(&self) -> usize {
        self.nodes_per_level() * self.nt * NCOMP
    }

    /// Offset of a node's first component in the interleaved sample array.
    #[inline]
    pub fn offset(&self, level: usize, idx: [usize; 3]) -> usize {
        (((level * self.counts[2] + idx[2]) * self.counts[1] + idx[1]) * self.counts[0] + idx[0]) * NCOMP
    }

    #[inline]
    pub fn node_position(&self, idx: [usize; 3]) -> [f64; 3] {
        [0, 1, 2].map(|a| self.origin[a] + idx[a] as f64 * self.h)
    }

    #[inline]
    pub fn time(&self, level: usize) -> f64 {
        self.t0 + level as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.nt - 1)
    }

    pub fn upper(&self) -> [f64; 3] {
        [0, 1, 2].map(|a| self.origin[a] + (self.counts[a] - 1) as f64 * self.h)
    }

    /// Grid with the self-similar image under `x -> x/s`, `t -> t/s^2`.
    pub fn scaled(&self, s: f64) -> GridSpec {
        GridSpec {
            origin: self.origin.map(|o| o / s),
            h: self.h / s,
            counts: self.counts,
            t0: self.t0 / (s * s),
            dt: self.dt / (s * s),
            nt: self.nt,
            half_space: self.half_space,
        }
    }
}

/// Read access to node samples by component.
pub trait NodeData: Sync {
    fn grid(&self) -> &GridSpec;
    fn node(&self, level: usize, idx: [usize; 3], comp: usize) -> f64;
}

/// Where a field's pressure samples came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PressureSource {
    /// Sampled from the analytic closure.
    Analytic,
    /// Solved from the pressure Poisson relation on the grid.
    Poisson,
    /// Set to zero although the velocity would require a pressure.
    ZeroFlagged,
    /// Read from external data.
    External,
}

/// Velocity, pressure and forcing samples on a [`GridSpec`], optionally backed
/// by the closed form that produced them.
#[derive(Clone)]
pub struct SpaceTimeField {
    grid: GridSpec,
    data: Vec<f64>,
    analytic: Option<Arc<dyn AnalyticField>>,
    pub div_tol: f64,
    pub boundary_tol: f64,
    pub label: String,
    pub pressure_source: PressureSource,
}

impl fmt::Debug for SpaceTimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpaceTimeField")
            .field("label", &self.label)
            .field("grid", &self.grid)
            .field("analytic", &self.analytic)
            .field("div_tol", &self.div_tol)
            .field("boundary_tol", &self.boundary_tol)
            .field("pressure_source", &self.pressure_source)
            .finish_non_exhaustive()
    }
}

impl SpaceTimeField {
    /// Wraps raw interleaved samples, e.g. read from a file.
    pub fn from_samples(
        grid: GridSpec,
        data: Vec<f64>,
        div_tol: f64,
        boundary_tol: f64,
        label: impl Into<String>,
    ) -> Result<Self> {
        grid.validate()?;
        if data.len() != grid.total_values() {
            return Err(Error::Config(format!(
                "sample array has {} values, grid needs {}",
                data.len(),
                grid.total_values()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Config(format!("non-finite sample at flat index {pos}")));
        }
        Ok(SpaceTimeField {
            grid,
            data,
            analytic: None,
            div_tol,
            boundary_tol,
            label: label.into(),
            pressure_source: PressureSource::External,
        })
    }

    /// Samples a closed-form field at every node.
    ///
    /// Nodes where the closure has no pressure are filled with zero; callers
    /// decide how to replace them.
    pub fn from_analytic(
        grid: GridSpec,
        field: Arc<dyn AnalyticField>,
        div_tol: f64,
        boundary_tol: f64,
        label: impl Into<String>,
    ) -> Result<Self> {
        use rayon::prelude::*;

        grid.validate()?;
        let mut data = vec![0.0; grid.total_values()];
        let row = grid.counts[0] * NCOMP;
        let rows_per_level = grid.counts[1] * grid.counts[2];
        data.par_chunks_mut(row).enumerate().for_each(|(r, chunk)| {
            let level = r / rows_per_level;
            let k = (r % rows_per_level) / grid.counts[1];
            let j = r % grid.counts[1];
            let t = grid.time(level);
            for i in 0..grid.counts[0] {
                let x = grid.node_position([i, j, k]);
                let u = field.velocity(x, t);
                let p = field.pressure(x, t).unwrap_or(0.0);
                let f = field.forcing(x, t);
                let out = &mut chunk[i * NCOMP..(i + 1) * NCOMP];
                out[..3].copy_from_slice(&u);
                out[3] = p;
                out[4..].copy_from_slice(&f);
            }
        });
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Config(format!(
                "closure {field:?} produced a non-finite sample at flat index {pos}"
            )));
        }
        let pressure_source = if field.has_pressure() {
            PressureSource::Analytic
        } else {
            PressureSource::ZeroFlagged
        };
        Ok(SpaceTimeField {
            grid,
            data,
            analytic: Some(field),
            div_tol,
            boundary_tol,
            label: label.into(),
            pressure_source,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn analytic(&self) -> Option<&Arc<dyn AnalyticField>> {
        self.analytic.as_ref()
    }

    /// Attaches a closed form that the caller asserts matches the samples.
    pub fn attach_analytic(&mut self, field: Arc<dyn AnalyticField>) {
        self.analytic = Some(field);
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn value(&self, level: usize, idx: [usize; 3], comp: usize) -> f64 {
        self.data[self.grid.offset(level, idx) + comp]
    }

    pub fn velocity_at(&self, level: usize, idx: [usize; 3]) -> [f64; 3] {
        let o = self.grid.offset(level, idx);
        [self.data[o], self.data[o + 1], self.data[o + 2]]
    }

    /// Replaces the pressure samples of one time level, in x1-fastest node order.
    pub fn set_pressure_level(&mut self, level: usize, values: &[f64], source: PressureSource) -> Result<()> {
        if values.len() != self.grid.nodes_per_level() || level >= self.grid.nt {
            return Err(Error::Config(format!(
                "pressure level {level} needs {} values, got {}",
                self.grid.nodes_per_level(),
                values.len()
            )));
        }
        let base = level * self.grid.nodes_per_level();
        for (n, v) in values.iter().enumerate() {
            self.data[(base + n) * NCOMP + P] = *v;
        }
        self.pressure_source = source;
        Ok(())
    }

    /// Copy with the velocity samples multiplied by `factor` and the rest untouched.
    ///
    /// The analytic closure is dropped since it no longer describes the samples.
    pub fn with_scaled_velocity(&self, factor: f64) -> SpaceTimeField {
        let mut data = self.data.clone();
        for node in data.chunks_exact_mut(NCOMP) {
            for v in &mut node[..3] {
                *v *= factor;
            }
        }
        SpaceTimeField {
            grid: self.grid,
            data,
            analytic: None,
            div_tol: self.div_tol * factor.abs(),
            boundary_tol: self.boundary_tol * factor.abs(),
            label: format!("{}*u{factor}", self.label),
            pressure_source: self.pressure_source,
        }
    }

    /// Copy with the pressure samples replaced by `p + g(x, t)`; drops the closure.
    pub fn with_pressure_added(&self, g: impl Fn([f64; 3], f64) -> f64) -> SpaceTimeField {
        let mut data = self.data.clone();
        let grid = self.grid;
        for level in 0..grid.nt {
            for k in 0..grid.counts[2] {
                for j in 0..grid.counts[1] {
                    for i in 0..grid.counts[0] {
                        let o = grid.offset(level, [i, j, k]);
                        data[o + P] += g(grid.node_position([i, j, k]), grid.time(level));
                    }
                }
            }
        }
        SpaceTimeField {
            grid,
            data,
            analytic: None,
            div_tol: self.div_tol,
            boundary_tol: self.boundary_tol,
            label: format!("{}+dp", self.label),
            pressure_source: PressureSource::External,
        }
    }

    /// Checks the declared divergence and boundary-trace tolerances.
    pub fn check_invariants(&self) -> Result<()> {
        let div = divergence_max(self);
        if div > self.div_tol {
            return Err(Error::Precondition(format!(
                "field {}: discrete divergence {div:e} exceeds declared tolerance {:e}",
                self.label, self.div_tol
            )));
        }
        let trace = boundary_trace_max(self);
        if trace > self.boundary_tol {
            return Err(Error::Precondition(format!(
                "field {}: boundary trace {trace:e} exceeds declared tolerance {:e}",
                self.label, self.boundary_tol
            )));
        }
        Ok(())
    }
}

impl NodeData for SpaceTimeField {
    fn grid(&self) -> &GridSpec {
        &self.grid
    }

    #[inline]
    fn node(&self, level: usize, idx: [usize; 3], comp: usize) -> f64 {
        self.value(level, idx, comp)
    }
}

/// A single scalar per node on a grid, exposed as the pressure component.
#[derive(Clone, Debug)]
pub struct ScalarSamples {
    pub grid: GridSpec,
    /// Values in level-major, x1-fastest order.
    pub values: Vec<f64>,
}

impl NodeData for ScalarSamples {
    fn grid(&self) -> &GridSpec {
        &self.grid
    }

    #[inline]
    fn node(&self, level: usize, idx: [usize; 3], comp: usize) -> f64 {
        if comp != P {
            return 0.0;
        }
        self.values[self.grid.offset(level, idx) / NCOMP]
    }
}
