//! Coordinate frames, steering angles, reference points and flight-box clamping.
//!
//! All positions are in meters in a right-handed Cartesian frame whose ground
//! plane is `z = 0` and whose flight box is centred on the origin.

use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Length of the projection onto the ground plane.
    pub fn horizontal_norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Vec3) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, rhs: Vec3) {
        *self = *self + rhs;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, rhs: f64) -> Vec3 {
        Vec3::new(self.x * rhs, self.y * rhs, self.z * rhs)
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, rhs: f64) -> Vec3 {
        Vec3::new(self.x / rhs, self.y / rhs, self.z / rhs)
    }
}

/// Direction on the unit sphere: `theta` is measured from the +z axis,
/// `phi` counter-clockwise from +x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphericalDir {
    pub theta: f64,
    pub phi: f64,
}

impl SphericalDir {
    pub fn new(theta: f64, phi: f64) -> Self {
        Self { theta, phi }
    }

    pub fn is_valid(&self) -> bool {
        (0.0..=PI).contains(&self.theta) && (-PI..=PI).contains(&self.phi)
    }

    /// Unit vector `(sinθ cosφ, sinθ sinφ, cosθ)`.
    pub fn unit_vector(&self) -> Vec3 {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        Vec3::new(st * cp, st * sp, ct)
    }
}

/// Steering direction from a UAV towards a ground station.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Steering {
    pub dir: SphericalDir,
    /// Set when the horizontal offset vanishes and the azimuth fell back to 0.
    pub azimuth_degenerate: bool,
}

/// Elevation and azimuth angles from `uav` towards `bs`.
///
/// The elevation is `acos(Δz / |Δ|)`; the azimuth uses the full-circle
/// arctangent of `(Δy, Δx)` so that stations behind the UAV (Δx < 0) resolve
/// to the correct quadrant. On the principal branch this agrees with
/// `asin(Δy / |Δ_h|)`.
pub fn steering_angles(uav: Vec3, bs: Vec3) -> Result<Steering> {
    let delta = bs - uav;
    let range = delta.norm();
    if !(range > 0.0) || !range.is_finite() {
        return Err(Error::Geometry(format!(
            "UAV and station coincide or are not finite ({uav:?}, {bs:?})"
        )));
    }
    let theta = (delta.z / range).clamp(-1.0, 1.0).acos();
    let horizontal = delta.horizontal_norm();
    let (phi, azimuth_degenerate) = if horizontal > 0.0 {
        (delta.y.atan2(delta.x), false)
    } else {
        (0.0, true)
    };
    Ok(Steering {
        dir: SphericalDir::new(theta, phi),
        azimuth_degenerate,
    })
}

/// Flight box `[-L/2, L/2]² × [h_min, h_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaBounds {
    pub half_length: f64,
    pub h_min: f64,
    pub h_max: f64,
}

impl AreaBounds {
    pub fn new(length: f64, h_min: f64, h_max: f64) -> Result<Self> {
        let area = Self {
            half_length: length / 2.0,
            h_min,
            h_max,
        };
        area.validate()?;
        Ok(area)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.half_length > 0.0) {
            return Err(Error::Config(format!(
                "area half length must be positive, got {}",
                self.half_length
            )));
        }
        if !(self.h_min > 0.0 && self.h_min < self.h_max) {
            return Err(Error::Config(format!(
                "altitude bounds must satisfy 0 < h_min < h_max, got [{}, {}]",
                self.h_min, self.h_max
            )));
        }
        Ok(())
    }

    pub fn length(&self) -> f64 {
        2.0 * self.half_length
    }

    pub fn height_span(&self) -> f64 {
        self.h_max - self.h_min
    }

    /// Length of the box's space diagonal.
    pub fn diagonal(&self) -> f64 {
        let l = self.length();
        (2.0 * l * l + self.height_span().powi(2)).sqrt()
    }

    pub fn center(&self) -> Vec3 {
        Vec3::new(0.0, 0.0, 0.5 * (self.h_min + self.h_max))
    }

    pub fn contains(&self, p: Vec3) -> bool {
        p.x.abs() <= self.half_length
            && p.y.abs() <= self.half_length
            && (self.h_min..=self.h_max).contains(&p.z)
    }

    /// Componentwise clamp into the box.
    pub fn clamp(&self, p: Vec3) -> Vec3 {
        Vec3::new(
            p.x.clamp(-self.half_length, self.half_length),
            p.y.clamp(-self.half_length, self.half_length),
            p.z.clamp(self.h_min, self.h_max),
        )
    }
}

/// Closest admissible UAV position to a ground station.
pub fn reference_point(bs: Vec3, area: &AreaBounds) -> Vec3 {
    area.clamp(bs)
}

/// Phase reference of the virtual array: the centroid of the element positions.
pub fn array_origin(positions: &[Vec3]) -> Result<Vec3> {
    if positions.is_empty() {
        return Err(Error::EmptyPositions);
    }
    let sum = positions.iter().fold(Vec3::ZERO, |acc, &p| acc + p);
    Ok(sum / positions.len() as f64)
}

/// Elevation of `bs` as seen from `from`, in degrees above the horizon.
pub fn elevation_deg(from: Vec3, bs: Vec3) -> f64 {
    let delta = from - bs;
    delta.z.atan2(delta.horizontal_norm()).to_degrees().clamp(0.0, 90.0)
}
