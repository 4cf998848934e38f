use std::path::{Path, PathBuf};

use serde::Serialize;

use cyllens_core::criteria::assess_centers;
use cyllens_core::exponents::{singular_dimension, LMPair, PQPair, IDENTITY_TOL};
use cyllens_core::fields::{
    generate_divfree_random, generate_homogeneous_profile, generate_shear_heat, generate_zero,
};
use cyllens_core::inequalities::{
    check_basiclemma, check_energy_consequence, check_energy_inequality, check_interior_l3, check_l4_interpolation,
    check_nonlinear_term, check_pressure_bound, check_sec4_interpolation, CutoffSpec, HolderExponents, Mode,
    RatioRecord,
};
use cyllens_core::mixed_norms::{infer_clip, morrey_norm, Clip, ParabolicCylinder};
use cyllens_core::pressure::decompose_interior;
use cyllens_core::singular_set::dimension_curve;
use cyllens_core::{SpaceTimeField, SpaceTimePoint};

use crate::config::{GeneratorName, RunConfig};
use crate::fieldio::{field_checksum, read_field, stem_of, write_field};
use crate::report::{csv_writer, fmt_point, FieldInfo, JsonLines};
use crate::CliError;

/// Field for a run: a file on disk, or the configured generator.
#[derive(Clone, Debug)]
pub enum FieldInput {
    File(PathBuf),
    Generator,
}

fn core_err(e: cyllens_core::Error) -> CliError {
    CliError::Config(e.to_string())
}

pub fn generate(cfg: &RunConfig) -> Result<SpaceTimeField, CliError> {
    let grid = cfg.grid.spec().map_err(core_err)?;
    let g = &cfg.generator;
    let f = match g.name {
        GeneratorName::Zero => generate_zero(grid),
        GeneratorName::Shear => generate_shear_heat(grid, g.amplitude, g.wavenumber),
        GeneratorName::Homogeneous => generate_homogeneous_profile(grid, g.amplitude),
        GeneratorName::Random => generate_divfree_random(grid, g.seed, g.modes, &g.random_options()),
    };
    f.map_err(core_err)
}

fn load(cfg: &RunConfig, input: &FieldInput) -> Result<(SpaceTimeField, FieldInfo), CliError> {
    match input {
        FieldInput::File(p) => {
            let (field, header) = read_field(p)?;
            let info = FieldInfo {
                source: format!("file:{}", stem_of(p).display()),
                label: header.label,
                checksum: header.checksum,
            };
            Ok((field, info))
        }
        FieldInput::Generator => {
            let field = generate(cfg)?;
            let info = FieldInfo {
                source: format!("generator:{}", cfg.generator.name.as_str()),
                label: field.label.clone(),
                checksum: field_checksum(&field),
            };
            Ok((field, info))
        }
    }
}

/// Writes the generated field to `stem` (`.bin` + `.hdr`); returns the checksum.
pub fn cmd_generate(cfg: &RunConfig, stem: &Path) -> Result<String, CliError> {
    let field = generate(cfg)?;
    Ok(write_field(&field, &stem_of(stem))?)
}

#[derive(Serialize)]
struct CenterError {
    center: SpaceTimePoint,
    message: String,
}

/// Functional sweeps and verdicts per centre: `analyze.jsonl` and `analyze_summary.csv`.
pub fn cmd_analyze(cfg: &RunConfig, input: &FieldInput, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let (field, info) = load(cfg, input)?;
    std::fs::create_dir_all(out)?;
    let a = &cfg.analysis;
    let e = a.exponents().map_err(core_err)?;
    let pq = a.pq().map_err(core_err)?;
    let centers = a.center_points(field.grid());
    let results = assess_centers(&field, &centers, &e, pq, &a.radii, &a.criteria(), &cfg.quadrature);

    let mut jl = JsonLines::create(&out.join("analyze.jsonl"))?;
    jl.header("analyze", cfg, &info)?;
    let csv_path = out.join("analyze_summary.csv");
    let mut csv = csv_writer(&csv_path)?;
    csv.write_record(["center", "r", "A", "C", "E", "G", "D_tilde", "D1_tilde", "criterion", "status"])
        .map_err(anyhow::Error::from)?;
    for (z, res) in centers.iter().zip(results) {
        match res {
            Ok(asmt) => {
                for rep in &asmt.reports {
                    csv.write_record([
                        fmt_point(z.x, z.t),
                        rep.radius.to_string(),
                        rep.a.to_string(),
                        rep.c.to_string(),
                        rep.e.to_string(),
                        rep.g.to_string(),
                        rep.d_tilde.to_string(),
                        rep.d1_tilde.to_string(),
                        rep.criterion.to_string(),
                        asmt.status.as_str().to_string(),
                    ])
                    .map_err(anyhow::Error::from)?;
                }
                jl.record("assessment", &asmt)?;
            }
            Err(err) => jl.record(
                "error",
                CenterError {
                    center: *z,
                    message: err.to_string(),
                },
            )?,
        }
    }
    csv.flush()?;
    Ok(vec![jl.finish()?, csv_path])
}

#[derive(Serialize)]
struct Assertion {
    name: String,
    value: f64,
    tolerance: f64,
    passed: bool,
    context: String,
}

#[derive(Serialize)]
struct SuiteError {
    suite: String,
    center: SpaceTimePoint,
    r: f64,
    message: String,
}

struct Verifier<'a> {
    jl: JsonLines,
    csv: csv::Writer<std::fs::File>,
    failures: Vec<String>,
    field: &'a SpaceTimeField,
}

impl Verifier<'_> {
    fn ratio(&mut self, suite: &str, z: SpaceTimePoint, r: f64, res: cyllens_core::Result<RatioRecord>) -> Result<(), CliError> {
        match res {
            Ok(rec) => {
                let flags: Vec<String> = rec
                    .flags
                    .iter()
                    .map(|f| serde_json::to_value(f).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default())
                    .collect();
                self.csv
                    .write_record([
                        suite.to_string(),
                        rec.name.clone(),
                        fmt_point(z.x, z.t),
                        rec.r.to_string(),
                        rec.lhs.to_string(),
                        rec.rhs_without_n.to_string(),
                        rec.ratio.value().map_or("inf".to_string(), |v| v.to_string()),
                        rec.defect.map_or(String::new(), |d| d.to_string()),
                        flags.join("|"),
                    ])
                    .map_err(anyhow::Error::from)?;
                self.jl.record("ratio", &rec)?;
            }
            Err(e) => self.jl.record(
                "error",
                SuiteError {
                    suite: suite.into(),
                    center: z,
                    r,
                    message: e.to_string(),
                },
            )?,
        }
        Ok(())
    }

    fn assert(&mut self, name: &str, value: f64, tolerance: f64, context: String) -> Result<(), CliError> {
        let passed = value.abs() <= tolerance;
        if !passed {
            self.failures.push(format!("{name} = {value:e} exceeds {tolerance:e} ({context})"));
        }
        self.jl.record(
            "assertion",
            Assertion {
                name: name.into(),
                value,
                tolerance,
                passed,
                context,
            },
        )?;
        Ok(())
    }

    fn is_exact_solution(&self) -> bool {
        let l = &self.field.label;
        l.starts_with("shear(") || l == "zero"
    }
}

/// Inequality suites on the configured field: `verify.jsonl` and `verify_summary.csv`.
///
/// Fails with [`CliError::Assertion`] when an exponent identity, a pressure
/// reconstruction, or the energy residual of an exact solution is out of tolerance.
pub fn cmd_verify(cfg: &RunConfig, input: &FieldInput, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let (field, info) = load(cfg, input)?;
    std::fs::create_dir_all(out)?;
    let a = &cfg.analysis;
    let v = &cfg.verify;
    let e = a.exponents().map_err(core_err)?;
    let q = &cfg.quadrature;
    let grid = *field.grid();
    let mut centers = a.center_points(&grid);
    if let Some(x) = v.interior_center {
        centers.push(SpaceTimePoint::new(x, centers.first().map_or(grid.t_end(), |c| c.t)));
    }

    let mut jl = JsonLines::create(&out.join("verify.jsonl"))?;
    jl.header("verify", cfg, &info)?;
    let csv_path = out.join("verify_summary.csv");
    let mut csv = csv_writer(&csv_path)?;
    csv.write_record(["suite", "name", "center", "r", "lhs", "rhs_without_n", "ratio", "defect", "flags"])
        .map_err(anyhow::Error::from)?;
    let mut ver = Verifier {
        jl,
        csv,
        failures: Vec::new(),
        field: &field,
    };
    let cutoff = CutoffSpec {
        space: v.cutoff_space,
        time: v.cutoff_time,
    };

    for suite in &v.suites {
        let s = suite.as_str();
        if s == "exponents" {
            let h = HolderExponents::new(&e);
            ver.assert("exponent_identities", e.identity_defect(), IDENTITY_TOL, format!("lambda = {}", e.lambda))?;
            ver.assert("holder_identities", h.defect(e.p), IDENTITY_TOL, format!("lambda = {}", e.lambda))?;
            continue;
        }
        for &z in &centers {
            let clip = infer_clip(&grid, z);
            let mode = if clip == Clip::Half { Mode::Boundary } else { Mode::Interior };
            if s == "pressure_split" {
                if clip == Clip::Interior {
                    let rho = a.radii.iter().copied().fold(0.0, f64::max);
                    match decompose_interior(&field, z, rho) {
                        Ok(split) => {
                            let ctx = format!("center {}, rho = {rho}", fmt_point(z.x, z.t));
                            ver.assert("pressure_reconstruction", split.reconstruction_error(&field), v.reconstruction_tol, ctx.clone())?;
                            ver.jl.record(
                                "pressure_split",
                                serde_json::json!({
                                    "center": z,
                                    "rho": rho,
                                    "harmonic_residual": split.harmonic_residual,
                                    "poisson_residual": split.poisson_residual,
                                    "iterations": split.iterations,
                                }),
                            )?;
                        }
                        Err(err) => ver.jl.record(
                            "error",
                            SuiteError {
                                suite: s.into(),
                                center: z,
                                r: rho,
                                message: err.to_string(),
                            },
                        )?,
                    }
                }
                continue;
            }
            for &r in &a.radii {
                match s {
                    "basic_l3" if clip == Clip::Half => ver.ratio(s, z, r, check_basiclemma(&field, z, r, &e, q))?,
                    "interior_l3" if clip == Clip::Interior => ver.ratio(s, z, r, check_interior_l3(&field, z, r, &e, q))?,
                    "basic_l3" | "interior_l3" => {}
                    "energy" => {
                        let res = check_energy_inequality(&field, z, r, cutoff);
                        if let (Ok(rec), true) = (&res, ver.is_exact_solution()) {
                            let d = rec.defect.unwrap_or(0.0);
                            ver.assert("energy_residual", d, v.energy_tol, format!("center {}, r = {r}", fmt_point(z.x, z.t)))?;
                        }
                        ver.ratio(s, z, r, res)?;
                    }
                    "energy_consequence" => {
                        let res = morrey_norm(&field, a.gamma, &[z], &[r], q)
                            .and_then(|m| check_energy_consequence(&field, z, r, a.gamma, m.value, &e, q));
                        ver.ratio(s, z, r, res)?;
                    }
                    "nonlinear" => ver.ratio(s, z, r, check_nonlinear_term(&field, z, r, &e, mode, q))?,
                    "pressure_bound" => {
                        let inner = r / v.pressure_ratio;
                        let res = morrey_norm(&field, a.gamma, &[z], &[r], q).and_then(|m| {
                            check_pressure_bound(&field, z, inner, r, &e, None, a.gamma, m.value, mode, q)
                        });
                        ver.ratio(s, z, inner, res)?;
                    }
                    "l4_interpolation" => {
                        let res = PQPair::finite(v.rs[0], v.rs[1]).and_then(|rs| {
                            let region = ParabolicCylinder::for_grid(&grid, z, r)?;
                            check_l4_interpolation(&field, &region, rs, q)
                        });
                        ver.ratio(s, z, r, res)?;
                    }
                    "integrability_interpolation" => {
                        for lm in &v.lm {
                            let res = LMPair::new(lm[0], lm[1]).and_then(|lm| {
                                let region = ParabolicCylinder::for_grid(&grid, z, r)?;
                                check_sec4_interpolation(&field, &region, lm, q)
                            });
                            ver.ratio(s, z, r, res)?;
                        }
                    }
                    other => return Err(CliError::Usage(format!("unknown suite {other:?}"))),
                }
            }
        }
    }
    ver.csv.flush()?;
    let paths = vec![ver.jl.finish()?, csv_path];
    if !ver.failures.is_empty() {
        return Err(CliError::Assertion(ver.failures.join("; ")));
    }
    Ok(paths)
}

#[derive(Serialize)]
struct PremeasureRow {
    delta: f64,
    dimension: f64,
    candidates: usize,
    family_size: usize,
    premeasure: f64,
    disjoint_sum: f64,
    chain_lhs: Option<f64>,
    chain_rhs: Option<f64>,
    chain_holds: Option<bool>,
}

/// Candidates, Vitali families and the premeasure curve: `cover.json` and `premeasure.csv`.
pub fn cmd_cover(cfg: &RunConfig, input: &FieldInput, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let lm = cfg.cover.lm().map_err(core_err)?;
    if let Err(e) = singular_dimension(lm) {
        return Err(CliError::Usage(e.to_string()));
    }
    let (field, info) = load(cfg, input)?;
    std::fs::create_dir_all(out)?;
    let a = &cfg.analysis;
    let centers = a.center_points(field.grid());
    let curve = dimension_curve(&field, &centers, lm, a.epsilon0, &cfg.cover.deltas, &a.radii, &cfg.quadrature)
        .map_err(core_err)?;
    let json_path = out.join("cover.json");
    let doc = serde_json::json!({
        "kind": "cover",
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "config_toml": cfg.to_toml(),
        "field": info,
        "dimension": singular_dimension(lm).map_err(core_err)?,
        "curve": curve,
    });
    std::fs::write(&json_path, serde_json::to_string_pretty(&doc).map_err(anyhow::Error::from)? + "\n")?;
    let csv_path = out.join("premeasure.csv");
    let mut csv = csv_writer(&csv_path)?;
    for p in &curve {
        csv.serialize(PremeasureRow {
            delta: p.estimate.delta,
            dimension: p.estimate.dimension,
            candidates: p.estimate.candidate_count,
            family_size: p.estimate.disjoint_family.len(),
            premeasure: p.estimate.premeasure,
            disjoint_sum: p.estimate.disjoint_sum,
            chain_lhs: p.chain.as_ref().map(|c| c.lhs),
            chain_rhs: p.chain.as_ref().map(|c| c.rhs),
            chain_holds: p.chain.as_ref().map(|c| c.holds),
        })
        .map_err(anyhow::Error::from)?;
    }
    csv.flush()?;
    Ok(vec![json_path, csv_path])
}
