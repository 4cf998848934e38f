use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{GridSpec, SpaceTimePoint};

/// Spatial clipping of a cylinder.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Clip {
    /// Full ball `B_{x,r}`.
    Interior,
    /// Ball intersected with `{x3 > 0}`.
    Half,
}

/// `Q_{z,r} = B_{x,r} × (t − r², t)`, optionally clipped to the half-space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParabolicCylinder {
    pub center: SpaceTimePoint,
    pub radius: f64,
    pub clip: Clip,
}

impl ParabolicCylinder {
    pub fn new(center: SpaceTimePoint, radius: f64, clip: Clip) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::domain("r", radius, "(0, ∞)"));
        }
        Ok(ParabolicCylinder { center, radius, clip })
    }

    /// Half clip for centres on the wall of a half-space grid, interior otherwise.
    pub fn for_grid(grid: &GridSpec, center: SpaceTimePoint, radius: f64) -> Result<Self> {
        Self::new(center, radius, infer_clip(grid, center))
    }

    pub fn t_start(&self) -> f64 {
        self.center.t - self.radius * self.radius
    }

    /// Membership of the closed ball times the half-open interval `(t − r², t]`.
    pub fn contains(&self, x: [f64; 3], t: f64) -> bool {
        if !(t > self.t_start() && t <= self.center.t) {
            return false;
        }
        if self.clip == Clip::Half && x[2] < 0.0 {
            return false;
        }
        dist(x, self.center.x) <= self.radius
    }

    /// Same centre and clip with the radius multiplied by `factor`.
    pub fn rescaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.center, self.radius * factor, self.clip)
    }
}

pub fn infer_clip(grid: &GridSpec, center: SpaceTimePoint) -> Clip {
    if grid.half_space && center.x[2].abs() <= 1e-12 * grid.h {
        Clip::Half
    } else {
        Clip::Interior
    }
}

pub(crate) fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// `|x − x'| + |t − t'|^{1/2}`.
pub fn parabolic_distance(z: SpaceTimePoint, z2: SpaceTimePoint) -> f64 {
    dist(z.x, z2.x) + (z.t - z2.t).abs().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_examples() {
        let z = SpaceTimePoint::new([0.0; 3], 1.0);
        assert_eq!(parabolic_distance(z, z), 0.0);
        assert_eq!(parabolic_distance(z, SpaceTimePoint::new([1.0, 0.0, 0.0], 1.0)), 1.0);
        assert_eq!(parabolic_distance(z, SpaceTimePoint::new([0.0; 3], 5.0)), 2.0);
    }

    #[test]
    fn clip_inference() {
        let g = GridSpec::half_space([4, 4, 4], 0.1, 0.0, 0.1, 2).unwrap();
        assert_eq!(infer_clip(&g, SpaceTimePoint::new([0.0; 3], 0.1)), Clip::Half);
        assert_eq!(infer_clip(&g, SpaceTimePoint::new([0.0, 0.0, 0.1], 0.1)), Clip::Interior);
        let c = GridSpec::centered([4, 4, 4], 0.1, 0.0, 0.1, 2).unwrap();
        assert_eq!(infer_clip(&c, SpaceTimePoint::new([0.0; 3], 0.1)), Clip::Interior);
    }

    #[test]
    fn radius_must_be_positive() {
        let z = SpaceTimePoint::new([0.0; 3], 0.0);
        assert!(ParabolicCylinder::new(z, 0.0, Clip::Interior).is_err());
        assert!(ParabolicCylinder::new(z, f64::NAN, Clip::Interior).is_err());
    }
}
