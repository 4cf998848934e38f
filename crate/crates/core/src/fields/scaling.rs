use std::sync::Arc;

use super::analytic::Scaled;
use super::{PressureSource, SpaceTimeField, P};
use crate::error::{Error, Result};

/// Resamples `s u(s x, s² t)`, `s² p`, `s³ f` on the self-similar image grid.
///
/// The new grid has the same counts with origin, `h`, `t0` and `dt` divided by
/// `s` or `s²`, so node `n` of the result corresponds to node `n` of the input.
/// Pressure samples without a closed form are carried over node by node.
pub fn scale_field(field: &SpaceTimeField, s: f64) -> Result<SpaceTimeField> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::domain("s", s, "(0, ∞)"));
    }
    let inner = field.analytic().ok_or_else(|| {
        Error::Unsupported(format!(
            "field {} has no analytic closure; scaling resamples from the closure",
            field.label
        ))
    })?;
    let closure = Arc::new(Scaled {
        inner: inner.clone(),
        s,
    });
    let grid = field.grid().scaled(s);
    let mut out = SpaceTimeField::from_analytic(
        grid,
        closure,
        field.div_tol * s * s,
        field.boundary_tol * s,
        format!("{}@s={s}", field.label),
    )?;
    if !inner.has_pressure() {
        let n = grid.nodes_per_level();
        for level in 0..grid.nt {
            let values: Vec<f64> = (0..n)
                .map(|node| field.data()[(level * n + node) * super::NCOMP + P] * s * s)
                .collect();
            out.set_pressure_level(level, &values, field.pressure_source)?;
        }
    } else {
        out.pressure_source = PressureSource::Analytic;
    }
    Ok(out)
}
