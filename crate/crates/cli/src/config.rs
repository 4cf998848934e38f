use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};

use cyllens_core::criteria::CriteriaConfig;
use cyllens_core::exponents::{ExponentSet, LMPair, PQPair};
use cyllens_core::fields::{GridSpec, PressureMode, RandomOptions, SpaceTimePoint};
use cyllens_core::QuadratureConfig;

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub counts: [usize; 3],
    pub h: f64,
    pub t0: f64,
    pub dt: f64,
    pub nt: usize,
    pub half_space: bool,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            counts: [32, 32, 16],
            h: 1.0 / 32.0,
            t0: 0.0,
            dt: 0.01,
            nt: 16,
            half_space: true,
        }
    }
}

impl GridConfig {
    pub fn spec(&self) -> cyllens_core::Result<GridSpec> {
        if self.half_space {
            GridSpec::half_space(self.counts, self.h, self.t0, self.dt, self.nt)
        } else {
            GridSpec::centered(self.counts, self.h, self.t0, self.dt, self.nt)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorName {
    Zero,
    Shear,
    Homogeneous,
    Random,
}

impl GeneratorName {
    pub fn as_str(self) -> &'static str {
        match self {
            GeneratorName::Zero => "zero",
            GeneratorName::Shear => "shear",
            GeneratorName::Homogeneous => "homogeneous",
            GeneratorName::Random => "random",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    pub name: GeneratorName,
    pub amplitude: f64,
    /// Shear wavenumber `a`.
    pub wavenumber: f64,
    pub seed: u64,
    pub modes: usize,
    pub kmax: f64,
    pub pressure: PressureMode,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            name: GeneratorName::Shear,
            amplitude: 1.0,
            wavenumber: std::f64::consts::PI,
            seed: 7,
            modes: 8,
            kmax: 2.0,
            pressure: PressureMode::Poisson,
        }
    }
}

impl GeneratorConfig {
    pub fn random_options(&self) -> RandomOptions {
        RandomOptions {
            amplitude: self.amplitude,
            kmax: self.kmax,
            pressure: self.pressure,
        }
    }
}

/// A regular lattice of spatial centres, `n[a]` points from `lo[a]` to `hi[a]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lattice {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
    pub n: [usize; 3],
}

impl Lattice {
    pub fn points(&self) -> Vec<[f64; 3]> {
        let coord = |a: usize, i: usize| {
            if self.n[a] <= 1 {
                self.lo[a]
            } else {
                self.lo[a] + (self.hi[a] - self.lo[a]) * i as f64 / (self.n[a] - 1) as f64
            }
        };
        let mut out = Vec::new();
        for k in 0..self.n[2] {
            for j in 0..self.n[1] {
                for i in 0..self.n[0] {
                    out.push([coord(0, i), coord(1, j), coord(2, k)]);
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub centers: Vec<[f64; 3]>,
    pub lattice: Option<Lattice>,
    /// Time of every centre; the last sampled level when absent.
    pub center_time: Option<f64>,
    pub radii: Vec<f64>,
    pub lambda: f64,
    /// Criterion pair; `(p, q)` of the exponent set when absent.
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub epsilon: f64,
    pub epsilon0: f64,
    pub k: usize,
    pub alpha: f64,
    pub gamma: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        let c = CriteriaConfig::default();
        AnalysisConfig {
            centers: vec![[0.0; 3]],
            lattice: None,
            center_time: None,
            radii: vec![0.5, 0.25, 0.125],
            lambda: 1.5,
            p: None,
            q: None,
            epsilon: c.epsilon,
            epsilon0: c.epsilon0,
            k: c.k,
            alpha: c.alpha,
            gamma: 0.5,
        }
    }
}

impl AnalysisConfig {
    pub fn exponents(&self) -> cyllens_core::Result<ExponentSet> {
        ExponentSet::from_lambda(self.lambda)
    }

    pub fn pq(&self) -> cyllens_core::Result<PQPair> {
        let e = self.exponents()?;
        PQPair::finite(self.p.unwrap_or(e.p), self.q.unwrap_or(e.q))
    }

    pub fn criteria(&self) -> CriteriaConfig {
        CriteriaConfig {
            epsilon: self.epsilon,
            epsilon0: self.epsilon0,
            k: self.k,
            alpha: self.alpha,
        }
    }

    pub fn center_points(&self, grid: &GridSpec) -> Vec<SpaceTimePoint> {
        let t = self.center_time.unwrap_or_else(|| grid.t_end());
        let mut xs = self.centers.clone();
        if let Some(l) = &self.lattice {
            xs.extend(l.points());
        }
        xs.into_iter().map(|x| SpaceTimePoint::new(x, t)).collect()
    }
}

pub const SUITES: [&str; 10] = [
    "exponents",
    "basic_l3",
    "interior_l3",
    "energy",
    "energy_consequence",
    "nonlinear",
    "pressure_bound",
    "pressure_split",
    "l4_interpolation",
    "integrability_interpolation",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub suites: Vec<String>,
    /// Centre for interior-only checks; boundary checks use `analysis` centres on the wall.
    pub interior_center: Option<[f64; 3]>,
    /// `(r, s)` on the line `3/r + 2/s = 1` for the `L⁴` interpolation.
    pub rs: [f64; 2],
    /// `(l, m)` pairs for the integrability interpolation.
    pub lm: Vec<[f64; 2]>,
    /// Ratio of the outer to the inner radius in the pressure bound, at least 4.
    pub pressure_ratio: f64,
    /// Absolute tolerance of the energy residual on exact solutions.
    pub energy_tol: f64,
    pub reconstruction_tol: f64,
    /// Half-widths of the energy cutoff relative to `r` and `r²`.
    pub cutoff_space: f64,
    pub cutoff_time: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            suites: SUITES.iter().map(|s| s.to_string()).collect(),
            interior_center: None,
            rs: [4.0, 8.0],
            lm: vec![[5.0, 4.0], [4.5, 4.5]],
            pressure_ratio: 4.0,
            energy_tol: 1e-3,
            reconstruction_tol: 1e-10,
            cutoff_space: 1.0,
            cutoff_time: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoverConfig {
    pub l: f64,
    pub m: f64,
    pub deltas: Vec<f64>,
}

impl Default for CoverConfig {
    fn default() -> Self {
        CoverConfig {
            l: 4.5,
            m: 4.5,
            deltas: vec![0.5, 0.25, 0.125],
        }
    }
}

impl CoverConfig {
    pub fn lm(&self) -> cyllens_core::Result<LMPair> {
        LMPair::new(self.l, self.m)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub generator: GeneratorConfig,
    pub quadrature: QuadratureConfig,
    pub analysis: AnalysisConfig,
    pub verify: VerifyConfig,
    pub cover: CoverConfig,
}

impl RunConfig {
    /// Reads a TOML file (or starts from defaults) and applies `key.path=value` overrides.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig, CliError> {
        let mut table: toml::Table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))
                    .map_err(CliError::Io)?;
                text.parse()
                    .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let cfg: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every parameter before any computation starts.
    pub fn validate(&self) -> Result<(), CliError> {
        let cfg = |e: cyllens_core::Error| CliError::Config(e.to_string());
        self.grid.spec().map_err(cfg)?;
        self.quadrature.validate().map_err(cfg)?;
        let a = &self.analysis;
        a.exponents().map_err(cfg)?;
        a.pq().map_err(cfg)?;
        a.criteria().validate().map_err(cfg)?;
        if a.radii.is_empty() || a.radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(CliError::Config("analysis.radii must be a non-empty list of positive radii".into()));
        }
        if a.centers.is_empty() && a.lattice.is_none() {
            return Err(CliError::Config("analysis needs at least one centre or a lattice".into()));
        }
        if let Some(l) = &a.lattice {
            if l.n.contains(&0) {
                return Err(CliError::Config("analysis.lattice.n must be positive on every axis".into()));
            }
        }
        if !(a.gamma > 0.0 && a.gamma <= 2.0) {
            return Err(CliError::Config(format!("analysis.gamma = {} must lie in (0, 2]", a.gamma)));
        }
        let g = &self.generator;
        if !(g.amplitude.is_finite() && g.wavenumber.is_finite() && g.kmax > 0.0 && g.modes > 0) {
            return Err(CliError::Config(
                "generator.amplitude and generator.wavenumber must be finite, generator.kmax positive, generator.modes at least 1".into(),
            ));
        }
        if g.name == GeneratorName::Homogeneous && self.grid.half_space {
            return Err(CliError::Config(
                "generator.name = homogeneous is interior-only; set grid.half_space = false".into(),
            ));
        }
        let v = &self.verify;
        for s in &v.suites {
            if !SUITES.contains(&s.as_str()) {
                return Err(CliError::Usage(format!(
                    "unknown suite {s:?}; known suites: {}",
                    SUITES.join(", ")
                )));
            }
        }
        if !(v.pressure_ratio >= 4.0) {
            return Err(CliError::Config(format!("verify.pressure_ratio = {} must be at least 4", v.pressure_ratio)));
        }
        if !(v.cutoff_space > 0.0 && v.cutoff_time > 0.0) {
            return Err(CliError::Config("verify.cutoff_space and verify.cutoff_time must be positive".into()));
        }
        PQPair::finite(v.rs[0], v.rs[1]).map_err(cfg)?;
        for lm in &v.lm {
            LMPair::new(lm[0], lm[1]).map_err(cfg)?;
        }
        let c = &self.cover;
        c.lm().map_err(cfg)?;
        if c.deltas.is_empty() || c.deltas.iter().any(|d| !(*d > 0.0)) {
            return Err(CliError::Config("cover.deltas must be a non-empty list of positive values".into()));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<(), CliError> {
    let Some((key, raw)) = assignment.split_once('=') else {
        return Err(CliError::Usage(format!("override {assignment:?} is not of the form key.path=value")));
    };
    let value = parse_value(raw.trim());
    let parts: Vec<&str> = key.trim().split('.').collect();
    let (last, path) = parts.split_last().expect("split yields one part");
    let mut cur = table;
    for p in path {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = match entry {
            toml::Value::Table(t) => t,
            _ => bail_usage(format!("override {key:?}: {p:?} is not a table"))?,
        };
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

fn bail_usage<T>(msg: String) -> Result<T, CliError> {
    Err(CliError::Usage(msg))
}

/// A TOML value when the text parses as one, otherwise a bare string.
fn parse_value(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}
