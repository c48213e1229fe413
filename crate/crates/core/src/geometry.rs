//! Small 3-vector type and the great-circle frame used by the detector
//! and Funk integrals.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const E1: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const E2: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const E3: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    /// Unit vector from polar angle (measured from +z) and azimuth.
    pub fn from_spherical(polar: f64, azimuth: f64) -> Self {
        let (sp, cp) = polar.sin_cos();
        let (sa, ca) = azimuth.sin_cos();
        Vec3::new(sp * ca, sp * sa, cp)
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalized(self) -> Vec3 {
        self * (1.0 / self.norm())
    }

    pub fn as_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// Component by zero-based index.
    pub fn get(self, i: usize) -> f64 {
        match i {
            0 => self.x,
            1 => self.y,
            2 => self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }

    /// (polar, azimuth) of a unit vector, azimuth in [0, 2π).
    pub fn to_spherical(self) -> (f64, f64) {
        let polar = self.z.clamp(-1.0, 1.0).acos();
        let mut az = self.y.atan2(self.x);
        if az < 0.0 {
            az += std::f64::consts::TAU;
        }
        (polar, az)
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        v.as_array()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Orthonormal pair (û, v̂) spanning the plane orthogonal to `theta`.
///
/// û = (−θ₂, θ₁, 0)/|θ′|, v̂ = (θ₁θ₃, θ₂θ₃, −|θ′|²)/|θ′| with θ′ = (θ₁, θ₂).
/// At the poles, where that frame is undefined, û = e₁ and v̂ = e₂.
pub fn great_circle_frame(theta: Vec3) -> (Vec3, Vec3) {
    let rho = theta.x.hypot(theta.y);
    if rho < 1e-14 {
        return (Vec3::E1, Vec3::E2);
    }
    let u = Vec3::new(-theta.y / rho, theta.x / rho, 0.0);
    let v = Vec3::new(theta.x * theta.z / rho, theta.y * theta.z / rho, -rho);
    (u, v)
}

/// `n` equally spaced points on the great circle orthogonal to `theta`.
pub fn great_circle_points(theta: Vec3, n: usize) -> Vec<Vec3> {
    let (u, v) = great_circle_frame(theta);
    (0..n)
        .map(|j| {
            let tau = std::f64::consts::TAU * j as f64 / n as f64;
            let (s, c) = tau.sin_cos();
            u * c + v * s
        })
        .collect()
}

/// Check that `dir` is a unit vector to within `tol`.
pub fn check_unit(dir: Vec3, tol: f64) -> crate::Result<()> {
    let n = dir.norm();
    if (n - 1.0).abs() > tol || !n.is_finite() {
        return Err(crate::Error::Domain(format!(
            "expected unit vector, got |v| = {n}"
        )));
    }
    Ok(())
}
