//! Fixed baseline arrays: a uniform line and a uniform square grid.

use serde::{Deserialize, Serialize};

use crate::beamforming::{ArrayConfig, UavPose};
use crate::error::{Error, Result};
use crate::geometry::{AreaBounds, SphericalDir, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BaselineKind {
    /// Linear array perpendicular to the station azimuth.
    Laa,
    /// Square grid in the horizontal plane.
    Raa,
}

impl BaselineKind {
    pub fn layout(self, n: usize, wavelength: f64, center: Vec3, steer: SphericalDir) -> Result<ArrayConfig> {
        match self {
            BaselineKind::Laa => laa_layout(n, wavelength, center, steer),
            BaselineKind::Raa => raa_layout(n, wavelength, center, steer),
        }
    }
}

/// Horizontal unit vectors along and across the station azimuth.
fn azimuth_axes(steer: SphericalDir) -> (Vec3, Vec3) {
    let (s, c) = steer.phi.sin_cos();
    (Vec3::new(c, s, 0.0), Vec3::new(-s, c, 0.0))
}

fn offset(center: Vec3, a: Vec3, da: f64, b: Vec3, db: f64) -> Vec3 {
    Vec3::new(center.x + da * a.x + db * b.x, center.y + da * a.y + db * b.y, center.z)
}

/// `n` unit-excited elements at half-wavelength spacing on a horizontal line
/// through `center`, broadside to the station azimuth.
pub fn laa_layout(n: usize, wavelength: f64, center: Vec3, steer: SphericalDir) -> Result<ArrayConfig> {
    if n < 2 {
        return Err(Error::Config(format!("a linear array needs at least 2 elements, got {n}")));
    }
    let (along, across) = azimuth_axes(steer);
    let half = wavelength / 2.0;
    let mid = (n - 1) as f64 / 2.0;
    let poses = (0..n)
        .map(|k| UavPose::new(offset(center, along, 0.0, across, (k as f64 - mid) * half), 1.0))
        .collect();
    ArrayConfig::new(poses, wavelength)
}

/// `√n × √n` unit-excited grid at half-wavelength spacing in the horizontal
/// plane through `center`, rows perpendicular to the station azimuth.
pub fn raa_layout(n: usize, wavelength: f64, center: Vec3, steer: SphericalDir) -> Result<ArrayConfig> {
    let side = (n as f64).sqrt().round() as usize;
    if n < 4 || side * side != n {
        return Err(Error::Config(format!("a rectangular array needs a square element count of at least 4, got {n}")));
    }
    let (along, across) = azimuth_axes(steer);
    let half = wavelength / 2.0;
    let mid = (side - 1) as f64 / 2.0;
    let mut poses = Vec::with_capacity(n);
    for r in 0..side {
        for c in 0..side {
            let p = offset(center, along, (r as f64 - mid) * half, across, (c as f64 - mid) * half);
            poses.push(UavPose::new(p, 1.0));
        }
    }
    ArrayConfig::new(poses, wavelength)
}

/// Errors unless every element lies inside `area`.
pub fn check_in_area(layout: &ArrayConfig, area: &AreaBounds) -> Result<()> {
    for (i, p) in layout.poses.iter().enumerate() {
        if !area.contains(p.position) {
            let q = p.position;
            return Err(Error::LayoutOutOfBounds(format!("element {i} at ({:.3}, {:.3}, {:.3})", q.x, q.y, q.z)));
        }
    }
    Ok(())
}

/// Baseline placement: the area center at the lowest altitude.
pub fn baseline_center(area: &AreaBounds) -> Vec3 {
    let c = area.center();
    Vec3::new(c.x, c.y, area.h_min)
}

/// Baseline layout for a station at `bs`, checked against the flight area.
pub fn baseline_layout(kind: BaselineKind, n: usize, wavelength: f64, area: &AreaBounds, bs: Vec3) -> Result<ArrayConfig> {
    let center = baseline_center(area);
    let steer = crate::geometry::steering_angles(center, bs)?.dir;
    let layout = kind.layout(n, wavelength, center, steer)?;
    check_in_area(&layout, area)?;
    Ok(layout)
}
