//! Binary field files: a raw little-endian `f64` blob plus a `key: value` text header.
//!
//! Samples are ordered time level, then `x3`, `x2`, `x1`, then component
//! `u1, u2, u3, p, f1, f2, f3`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use sha2::{Digest, Sha256};

use cyllens_core::fields::{PressureSource, COMPONENT_NAMES, NCOMP};
use cyllens_core::{GridSpec, SpaceTimeField};

pub const MAGIC: &str = "CYLLENS1";

/// Header contents of a field file.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldHeader {
    pub grid: GridSpec,
    pub checksum: String,
    pub div_tol: f64,
    pub boundary_tol: f64,
    pub label: String,
    pub pressure_source: PressureSource,
}

pub fn header_path(stem: &Path) -> PathBuf {
    stem.with_extension("hdr")
}

pub fn blob_path(stem: &Path) -> PathBuf {
    stem.with_extension("bin")
}

/// Accepts either the stem or one of the two file names.
pub fn stem_of(path: &Path) -> PathBuf {
    match path.extension().and_then(|e| e.to_str()) {
        Some("hdr") | Some("bin") => path.with_extension(""),
        _ => path.to_path_buf(),
    }
}

pub fn encode(data: &[f64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(data.len() * 8);
    for v in data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn checksum(bytes: &[u8]) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(bytes)))
}

/// Checksum of the serialized samples of a field.
pub fn field_checksum(field: &SpaceTimeField) -> String {
    checksum(&encode(field.data()))
}

fn source_name(s: PressureSource) -> &'static str {
    match s {
        PressureSource::Analytic => "analytic",
        PressureSource::Poisson => "poisson",
        PressureSource::ZeroFlagged => "zero_flagged",
        PressureSource::External => "external",
    }
}

fn parse_source(s: &str) -> Result<PressureSource> {
    Ok(match s {
        "analytic" => PressureSource::Analytic,
        "poisson" => PressureSource::Poisson,
        "zero_flagged" => PressureSource::ZeroFlagged,
        "external" => PressureSource::External,
        other => bail!("unknown pressure_source {other:?}"),
    })
}

pub fn render_header(h: &FieldHeader) -> String {
    let g = &h.grid;
    let mut s = String::new();
    let mut line = |k: &str, v: String| {
        writeln!(s, "{k}: {v}").expect("writing to a string");
    };
    line("magic", MAGIC.into());
    line("dims", format!("{} {} {} {}", g.counts[0], g.counts[1], g.counts[2], g.nt));
    line("origin", format!("{:?} {:?} {:?}", g.origin[0], g.origin[1], g.origin[2]));
    line("spacing", format!("{:?}", g.h));
    line("t0", format!("{:?}", g.t0));
    line("dt", format!("{:?}", g.dt));
    line("half_space", g.half_space.to_string());
    line("components", COMPONENT_NAMES.join(","));
    line("endianness", "little".into());
    line("dtype", "f64".into());
    line("layout", "t,x3,x2,x1,component".into());
    line("checksum", h.checksum.clone());
    line("div_tol", format!("{:?}", h.div_tol));
    line("boundary_tol", format!("{:?}", h.boundary_tol));
    line("pressure_source", source_name(h.pressure_source).into());
    line("label", h.label.clone());
    s
}

pub fn parse_header(text: &str) -> Result<FieldHeader> {
    let mut kv = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let (k, v) = raw
            .split_once(':')
            .ok_or_else(|| anyhow!("header line {} has no ':' separator", n + 1))?;
        kv.insert(k.trim().to_string(), v.trim().to_string());
    }
    let get = |k: &str| kv.get(k).map(String::as_str).ok_or_else(|| anyhow!("header is missing {k:?}"));
    let num = |k: &str| -> Result<f64> { get(k)?.parse::<f64>().with_context(|| format!("header field {k:?}")) };
    let list = |k: &str| -> Result<Vec<String>> { Ok(get(k)?.split_whitespace().map(str::to_string).collect()) };

    if get("magic")? != MAGIC {
        bail!("not a field header: magic is {:?}, expected {MAGIC:?}", get("magic")?);
    }
    for (k, want) in [("endianness", "little"), ("dtype", "f64"), ("layout", "t,x3,x2,x1,component")] {
        if get(k)? != want {
            bail!("unsupported {k} {:?}, expected {want:?}", get(k)?);
        }
    }
    if get("components")? != COMPONENT_NAMES.join(",") {
        bail!("unsupported component list {:?}", get("components")?);
    }
    let dims: Vec<usize> = list("dims")?
        .iter()
        .map(|v| v.parse().with_context(|| format!("dims entry {v:?}")))
        .collect::<Result<_>>()?;
    let origin: Vec<f64> = list("origin")?
        .iter()
        .map(|v| v.parse().with_context(|| format!("origin entry {v:?}")))
        .collect::<Result<_>>()?;
    if dims.len() != 4 || origin.len() != 3 {
        bail!("dims needs 4 entries and origin 3, got {} and {}", dims.len(), origin.len());
    }
    let half_space = match get("half_space")? {
        "true" => true,
        "false" => false,
        other => bail!("half_space must be true or false, got {other:?}"),
    };
    let grid = GridSpec::new(
        [origin[0], origin[1], origin[2]],
        num("spacing")?,
        [dims[0], dims[1], dims[2]],
        num("t0")?,
        num("dt")?,
        dims[3],
        half_space,
    )?;
    Ok(FieldHeader {
        grid,
        checksum: get("checksum")?.to_string(),
        div_tol: num("div_tol")?,
        boundary_tol: num("boundary_tol")?,
        label: kv.get("label").cloned().unwrap_or_default(),
        pressure_source: parse_source(get("pressure_source")?)?,
    })
}

pub fn header_of(field: &SpaceTimeField, checksum: String) -> FieldHeader {
    FieldHeader {
        grid: *field.grid(),
        checksum,
        div_tol: field.div_tol,
        boundary_tol: field.boundary_tol,
        label: field.label.clone(),
        pressure_source: field.pressure_source,
    }
}

/// Writes `<stem>.bin` and `<stem>.hdr`; returns the checksum.
pub fn write_field(field: &SpaceTimeField, stem: &Path) -> Result<String> {
    if let Some(dir) = stem.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let bytes = encode(field.data());
    let sum = checksum(&bytes);
    let bin = blob_path(stem);
    std::fs::write(&bin, &bytes).with_context(|| format!("writing {}", bin.display()))?;
    let hdr = header_path(stem);
    std::fs::write(&hdr, render_header(&header_of(field, sum.clone())))
        .with_context(|| format!("writing {}", hdr.display()))?;
    Ok(sum)
}

/// Reads a field, verifying its size and checksum.
pub fn read_field(path: &Path) -> Result<(SpaceTimeField, FieldHeader)> {
    let stem = stem_of(path);
    let hdr = header_path(&stem);
    let text = std::fs::read_to_string(&hdr).with_context(|| format!("reading {}", hdr.display()))?;
    let header = parse_header(&text).with_context(|| format!("parsing {}", hdr.display()))?;
    let bin = blob_path(&stem);
    let bytes = std::fs::read(&bin).with_context(|| format!("reading {}", bin.display()))?;
    let want = header.grid.total_values() * 8;
    if bytes.len() != want {
        bail!("{} holds {} bytes, header dims need {want}", bin.display(), bytes.len());
    }
    let sum = checksum(&bytes);
    if sum != header.checksum {
        bail!("{}: checksum {sum} does not match header {}", bin.display(), header.checksum);
    }
    let data: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    debug_assert_eq!(data.len() % NCOMP, 0);
    let mut field = SpaceTimeField::from_samples(header.grid, data, header.div_tol, header.boundary_tol, header.label.clone())?;
    field.pressure_source = header.pressure_source;
    Ok((field, header))
}
