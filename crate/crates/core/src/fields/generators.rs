use std::f64::consts::TAU;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::analytic::{Forcing, Homogeneous, RandomCurl, RandomMode, Shear, WithForcing, Zero};
use super::{GridSpec, PressureSource, SpaceTimeField, F1, NCOMP};
use crate::error::{Error, Result};
use crate::pressure;

pub fn generate_zero(grid: GridSpec) -> Result<SpaceTimeField> {
    SpaceTimeField::from_analytic(grid, Arc::new(Zero), 0.0, 0.0, "zero")
}

/// Exact decaying shear flow over the half-space.
pub fn generate_shear_heat(grid: GridSpec, amplitude: f64, wavenumber: f64) -> Result<SpaceTimeField> {
    if !grid.half_space {
        return Err(Error::Config("shear generator needs a half-space grid".into()));
    }
    if !amplitude.is_finite() || !wavenumber.is_finite() {
        return Err(Error::Config("shear amplitude and wavenumber must be finite".into()));
    }
    let tol = 1e-14 * amplitude.abs().max(f64::MIN_POSITIVE);
    SpaceTimeField::from_analytic(
        grid,
        Arc::new(Shear { amplitude, wavenumber }),
        tol,
        tol,
        format!("shear(amplitude={amplitude},a={wavenumber})"),
    )
}

/// Declared divergence tolerance of the sampled swirl profile.
///
/// Each centred difference is bounded by `max|u| / h` and the nearest node
/// sits at distance `√3 h / 2` from the singular point.
pub fn homogeneous_div_tol(amplitude: f64, h: f64) -> f64 {
    4.0 * amplitude.abs() / (h * h)
}

/// Degree −1 swirl centred at the origin on a full-space grid.
pub fn generate_homogeneous_profile(grid: GridSpec, amplitude: f64) -> Result<SpaceTimeField> {
    if grid.half_space {
        return Err(Error::Config(
            "homogeneous profile is interior-only; use a full-space grid".into(),
        ));
    }
    let on_lattice = (0..3).all(|a| {
        let s = -grid.origin[a] / grid.h;
        (s - s.round()).abs() < 1e-9 && s.round() >= 0.0 && s.round() <= (grid.counts[a] - 1) as f64
    });
    if on_lattice {
        return Err(Error::Config(
            "homogeneous profile: the singular point x = 0 is a grid node; offset the grid by h/2".into(),
        ));
    }
    SpaceTimeField::from_analytic(
        grid,
        Arc::new(Homogeneous { amplitude }),
        homogeneous_div_tol(amplitude, grid.h),
        0.0,
        format!("homogeneous(amplitude={amplitude})"),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PressureMode {
    Poisson,
    Zero,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomOptions {
    pub amplitude: f64,
    /// Wavevector components are drawn from `[-kmax, kmax]`.
    pub kmax: f64,
    pub pressure: PressureMode,
}

impl Default for RandomOptions {
    fn default() -> Self {
        RandomOptions {
            amplitude: 1.0,
            kmax: 2.0,
            pressure: PressureMode::Poisson,
        }
    }
}

/// Seeded curl of a random Fourier potential, tapered to vanish on the wall.
pub fn generate_divfree_random(
    grid: GridSpec,
    seed: u64,
    modes: usize,
    opts: &RandomOptions,
) -> Result<SpaceTimeField> {
    if modes == 0 {
        return Err(Error::Config("random generator needs at least one mode".into()));
    }
    if !(opts.kmax > 0.0) || !opts.amplitude.is_finite() {
        return Err(Error::Config("random generator needs kmax > 0 and a finite amplitude".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let norm = opts.amplitude / (modes as f64).sqrt();
    let list: Vec<RandomMode> = (0..modes)
        .map(|_| {
            let k = [0; 3].map(|_| rng.random_range(-opts.kmax..=opts.kmax));
            let a = [0; 3].map(|_| norm * rng.sample::<f64, _>(StandardNormal));
            let phase = rng.random_range(0.0..TAU);
            let omega = rng.random_range(-1.0..=1.0);
            RandomMode { k, a, phase, omega }
        })
        .collect();
    let curl = RandomCurl {
        modes: list,
        tapered: grid.half_space,
    };
    let div_tol = 10.0 * grid.h * grid.h * curl.divergence_constant();
    let mut field = SpaceTimeField::from_analytic(
        grid,
        Arc::new(curl),
        div_tol,
        1e-14,
        format!("random(seed={seed},modes={modes})"),
    )?;
    if opts.pressure == PressureMode::Poisson {
        let levels = pressure::poisson_pressure(&field, pressure::DEFAULT_TOL)?;
        for (level, values) in levels.iter().enumerate() {
            field.set_pressure_level(level, values, PressureSource::Poisson)?;
        }
    }
    Ok(field)
}

/// Replaces the forcing samples by a synthetic profile.
pub fn with_forcing(field: &SpaceTimeField, forcing: Forcing) -> SpaceTimeField {
    let grid = *field.grid();
    let mut data = field.data().to_vec();
    for level in 0..grid.nt {
        for k in 0..grid.counts[2] {
            for j in 0..grid.counts[1] {
                for i in 0..grid.counts[0] {
                    let o = grid.offset(level, [i, j, k]);
                    let f = forcing.eval(grid.node_position([i, j, k]));
                    data[o + F1..o + NCOMP].copy_from_slice(&f);
                }
            }
        }
    }
    let mut out = SpaceTimeField::from_samples(grid, data, field.div_tol, field.boundary_tol, field.label.clone())
        .expect("same grid and finite samples");
    out.pressure_source = field.pressure_source;
    out.label = format!("{}+forcing", field.label);
    if let Some(inner) = field.analytic() {
        out.attach_analytic(Arc::new(WithForcing {
            inner: inner.clone(),
            forcing,
        }));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{boundary_trace_max, divergence_max};

    fn hs_grid(n: usize) -> GridSpec {
        GridSpec::half_space([n, n, n], 1.0 / (n - 1) as f64, 0.0, 0.01, 3).unwrap()
    }

    #[test]
    fn zero_field_is_zero() {
        let f = generate_zero(hs_grid(6)).unwrap();
        assert!(f.data().iter().all(|v| *v == 0.0));
        f.check_invariants().unwrap();
    }

    #[test]
    fn shear_trace_and_divergence() {
        let f = generate_shear_heat(hs_grid(9), 1.0, std::f64::consts::PI).unwrap();
        assert_eq!(boundary_trace_max(&f), 0.0);
        assert_eq!(divergence_max(&f), 0.0);
        f.check_invariants().unwrap();
        let c = GridSpec::centered([6, 6, 6], 0.1, 0.0, 0.1, 2).unwrap();
        assert!(generate_shear_heat(c, 1.0, 1.0).is_err());
    }

    #[test]
    fn homogeneous_rejects_half_space_and_lattice_origin() {
        assert!(generate_homogeneous_profile(hs_grid(6), 1.0).is_err());
        let odd = GridSpec::centered([5, 5, 5], 0.1, 0.0, 0.1, 2).unwrap();
        let err = generate_homogeneous_profile(odd, 1.0).unwrap_err();
        assert!(err.to_string().contains("grid node"), "{err}");
        let even = GridSpec::centered([8, 8, 8], 0.1, 0.0, 0.1, 2).unwrap();
        let f = generate_homogeneous_profile(even, 1.0).unwrap();
        f.check_invariants().unwrap();
    }

    #[test]
    fn random_is_reproducible_and_declares_tolerances() {
        let g = hs_grid(10);
        let opts = RandomOptions::default();
        let a = generate_divfree_random(g, 7, 4, &opts).unwrap();
        let b = generate_divfree_random(g, 7, 4, &opts).unwrap();
        assert_eq!(a.data(), b.data());
        a.check_invariants().unwrap();
        let c = generate_divfree_random(g, 8, 4, &opts).unwrap();
        assert_ne!(a.data(), c.data());
        assert_eq!(a.pressure_source, PressureSource::Poisson);
    }

    #[test]
    fn forcing_overlay_writes_samples() {
        let f = generate_zero(hs_grid(5)).unwrap();
        let g = with_forcing(&f, Forcing::Constant { value: [1.0, 2.0, 3.0] });
        assert_eq!(g.value(1, [2, 2, 2], F1 + 1), 2.0);
        assert_eq!(g.analytic().unwrap().forcing([0.0; 3], 0.0), [1.0, 2.0, 3.0]);
    }
}
