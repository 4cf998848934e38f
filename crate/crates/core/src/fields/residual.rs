use super::{SpaceTimeField, SpaceTimePoint, F1, P};
use crate::error::{Error, Result};

/// Centred-difference value of `u_t − Δu + (u·∇)u + ∇p − f` at the node nearest `point`.
pub fn nse_residual(field: &SpaceTimeField, point: SpaceTimePoint) -> Result<[f64; 3]> {
    let g = field.grid();
    let mut idx = [0usize; 3];
    for a in 0..3 {
        let s = ((point.x[a] - g.origin[a]) / g.h).round();
        if !(s >= 2.0 && s <= (g.counts[a] as f64) - 3.0) {
            return Err(Error::Range(format!(
                "residual stencil at {point} needs two cells of margin along axis {}",
                a + 1
            )));
        }
        idx[a] = s as usize;
    }
    let lv = ((point.t - g.t0) / g.dt).round();
    if !(lv >= 1.0 && lv <= (g.nt as f64) - 2.0) {
        return Err(Error::Range(format!(
            "residual stencil at {point} needs one time level on each side"
        )));
    }
    let l = lv as usize;
    let h = g.h;
    let shift = |d: usize, s: isize| {
        let mut j = idx;
        j[d] = (j[d] as isize + s) as usize;
        j
    };
    let mut res = [0.0; 3];
    let u0 = field.velocity_at(l, idx);
    for (c, rc) in res.iter_mut().enumerate() {
        let ut = (field.value(l + 1, idx, c) - field.value(l - 1, idx, c)) / (2.0 * g.dt);
        let mut lap = 0.0;
        let mut adv = 0.0;
        for d in 0..3 {
            let (up, dn) = (field.value(l, shift(d, 1), c), field.value(l, shift(d, -1), c));
            lap += (up - 2.0 * u0[c] + dn) / (h * h);
            adv += u0[d] * (up - dn) / (2.0 * h);
        }
        let dp = (field.value(l, shift(c, 1), P) - field.value(l, shift(c, -1), P)) / (2.0 * h);
        *rc = ut - lap + adv + dp - field.value(l, idx, F1 + c);
    }
    Ok(res)
}

/// Leading-order bound on [`nse_residual`] for the exact shear flow.
pub fn shear_residual_bound(amplitude: f64, wavenumber: f64, h: f64, dt: f64, t: f64) -> f64 {
    let a2 = wavenumber * wavenumber;
    let envelope = amplitude.abs() * (-a2 * (t - dt)).exp();
    1.05 * envelope * (a2 * a2 * h * h / 12.0 + a2 * a2 * a2 * dt * dt / 6.0)
}

/// Max-norm of the centred discrete divergence over nodes with a full stencil.
pub fn divergence_max(field: &SpaceTimeField) -> f64 {
    let g = field.grid();
    let [nx, ny, nz] = g.counts;
    let mut m = 0.0_f64;
    for l in 0..g.nt {
        for k in 1..nz - 1 {
            for j in 1..ny - 1 {
                for i in 1..nx - 1 {
                    let d = (field.value(l, [i + 1, j, k], 0) - field.value(l, [i - 1, j, k], 0)
                        + field.value(l, [i, j + 1, k], 1)
                        - field.value(l, [i, j - 1, k], 1)
                        + field.value(l, [i, j, k + 1], 2)
                        - field.value(l, [i, j, k - 1], 2))
                        / (2.0 * g.h);
                    m = m.max(d.abs());
                }
            }
        }
    }
    m
}

/// Largest velocity magnitude on the `x3 = 0` plane; zero for full-space grids.
pub fn boundary_trace_max(field: &SpaceTimeField) -> f64 {
    let g = field.grid();
    if !g.half_space {
        return 0.0;
    }
    let mut m = 0.0_f64;
    for l in 0..g.nt {
        for j in 0..g.counts[1] {
            for i in 0..g.counts[0] {
                let u = field.velocity_at(l, [i, j, 0]);
                m = m.max((u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt());
            }
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{generate_shear_heat, generate_zero, GridSpec};

    #[test]
    fn zero_residual() {
        let g = GridSpec::half_space([8, 8, 8], 0.1, 0.0, 0.01, 4).unwrap();
        let f = generate_zero(g).unwrap();
        let r = nse_residual(&f, SpaceTimePoint::new([0.0, 0.0, 0.35], 0.01)).unwrap();
        assert_eq!(r, [0.0; 3]);
    }

    #[test]
    fn shear_residual_is_second_order() {
        let a = std::f64::consts::PI;
        let mut prev: Option<f64> = None;
        for n in [17usize, 33] {
            let h = 1.0 / (n - 1) as f64;
            let dt = 0.5 * h * h;
            let g = GridSpec::half_space([n, n, n], h, 0.0, dt, 5).unwrap();
            let f = generate_shear_heat(g, 1.0, a).unwrap();
            let t = 2.0 * dt;
            let r = nse_residual(&f, SpaceTimePoint::new([0.0, 0.0, 0.3], t)).unwrap();
            let mag = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(mag <= shear_residual_bound(1.0, a, h, dt, t), "{mag}");
            if let Some(p) = prev {
                let order = (p / mag).log2();
                assert!(order > 1.8, "order {order}");
            }
            prev = Some(mag);
        }
    }

    #[test]
    fn residual_stencil_margin() {
        let g = GridSpec::half_space([8, 8, 8], 0.1, 0.0, 0.01, 4).unwrap();
        let f = generate_zero(g).unwrap();
        assert!(matches!(
            nse_residual(&f, SpaceTimePoint::new([0.0, 0.0, 0.1], 0.01)),
            Err(Error::Range(_))
        ));
        assert!(nse_residual(&f, SpaceTimePoint::new([0.0, 0.0, 0.3], 0.0)).is_err());
    }
}
