//! Sampling grids shared by the forward models, the reconstruction and the
//! range checks.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::geometry::Vec3;
use crate::{Error, Result};

/// Polar × azimuth grid on the unit sphere.
///
/// Polar angles are uniform on `[polar_min, polar_max]` (inclusive),
/// azimuths uniform on `[0, 2π)`. A hemisphere grid has
/// `polar_max = π/2` and represents an even function through φ(−α̂) = φ(α̂).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereGrid {
    pub n_polar: usize,
    pub n_az: usize,
    pub polar_min: f64,
    pub polar_max: f64,
}

impl SphereGrid {
    pub fn hemisphere(n_polar: usize, n_az: usize, polar_min: f64) -> Result<Self> {
        Self::new(n_polar, n_az, polar_min, FRAC_PI_2)
    }

    /// Grid symmetric about the equator, polar ∈ [polar_min, π − polar_min].
    pub fn full(n_polar: usize, n_az: usize, polar_min: f64) -> Result<Self> {
        Self::new(n_polar, n_az, polar_min, PI - polar_min)
    }

    pub fn new(n_polar: usize, n_az: usize, polar_min: f64, polar_max: f64) -> Result<Self> {
        if n_polar < 2 || n_az < 2 {
            return Err(Error::Domain(format!(
                "sphere grid needs at least 2x2 nodes, got {n_polar}x{n_az}"
            )));
        }
        if !(polar_min > 0.0 && polar_min < polar_max && polar_max < PI) {
            return Err(Error::Domain(format!(
                "polar range [{polar_min}, {polar_max}] must satisfy 0 < min < max < π"
            )));
        }
        Ok(SphereGrid {
            n_polar,
            n_az,
            polar_min,
            polar_max,
        })
    }

    pub fn is_hemisphere(&self) -> bool {
        (self.polar_max - FRAC_PI_2).abs() < 1e-12
    }

    pub fn len(&self) -> usize {
        self.n_polar * self.n_az
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn polar_step(&self) -> f64 {
        (self.polar_max - self.polar_min) / (self.n_polar - 1) as f64
    }

    pub fn az_step(&self) -> f64 {
        TAU / self.n_az as f64
    }

    pub fn polar(&self, i: usize) -> f64 {
        if i + 1 == self.n_polar {
            self.polar_max
        } else {
            self.polar_min + i as f64 * self.polar_step()
        }
    }

    pub fn azimuth(&self, j: usize) -> f64 {
        j as f64 * self.az_step()
    }

    pub fn dir(&self, i: usize, j: usize) -> Vec3 {
        Vec3::from_spherical(self.polar(i), self.azimuth(j))
    }

    /// All node directions in (polar-major, azimuth) order.
    pub fn dirs(&self) -> Vec<Vec3> {
        let mut out = Vec::with_capacity(self.len());
        for i in 0..self.n_polar {
            for j in 0..self.n_az {
                out.push(self.dir(i, j));
            }
        }
        out
    }

    /// Per-row quadrature weights: the area of the latitude band owned by
    /// each ring divided by the number of azimuths. The first (and, for a
    /// full grid, last) band extends to the pole, so the weights sum to the
    /// area covered by the grid: 2π for a hemisphere, 4π for a full grid.
    pub fn row_weights(&self) -> Vec<f64> {
        let full = !self.is_hemisphere();
        let daz = self.az_step();
        (0..self.n_polar)
            .map(|i| {
                let lo = if i == 0 {
                    0.0
                } else {
                    0.5 * (self.polar(i - 1) + self.polar(i))
                };
                let hi = if i + 1 == self.n_polar {
                    if full {
                        PI
                    } else {
                        FRAC_PI_2
                    }
                } else {
                    0.5 * (self.polar(i) + self.polar(i + 1))
                };
                (lo.cos() - hi.cos()) * daz
            })
            .collect()
    }

    /// Index of the antipodal node, when the grid contains it.
    pub fn antipode(&self, i: usize, j: usize) -> Option<(usize, usize)> {
        if self.is_hemisphere() || !self.n_az.is_multiple_of(2) {
            return None;
        }
        let sym = (self.polar_min + self.polar_max - PI).abs() < 1e-12;
        if !sym {
            return None;
        }
        Some((self.n_polar - 1 - i, (j + self.n_az / 2) % self.n_az))
    }
}

/// Bilinear interpolation of gridded sphere samples.
///
/// Azimuth wraps periodically. Inside the polar caps not covered by the
/// grid, values come from a cubic through the two outermost rings along the
/// meridian through the pole (at azimuths az and az + π). On a hemisphere
/// grid, lower-hemisphere points are mapped to their antipodes.
pub struct SphereInterpolator<'a> {
    grid: SphereGrid,
    values: &'a [f64],
}

impl<'a> SphereInterpolator<'a> {
    pub fn new(grid: SphereGrid, values: &'a [f64]) -> Self {
        assert_eq!(values.len(), grid.len());
        SphereInterpolator { grid, values }
    }

    /// Cubic along the meridian; `u` is the arc distance from the pole,
    /// rings `r0`, `r1` sit at arc distances `u0 < u1`.
    fn cap(&self, r0: usize, r1: usize, u0: f64, u1: f64, u: f64, az_pos: f64) -> f64 {
        let half = 0.5 * self.grid.n_az as f64;
        let nodes = [-u1, -u0, u0, u1];
        let vals = [
            self.ring(r1, az_pos + half),
            self.ring(r0, az_pos + half),
            self.ring(r0, az_pos),
            self.ring(r1, az_pos),
        ];
        let mut acc = 0.0;
        for a in 0..4 {
            let mut l = 1.0;
            for b in 0..4 {
                if a != b {
                    l *= (u - nodes[b]) / (nodes[a] - nodes[b]);
                }
            }
            acc += l * vals[a];
        }
        acc
    }

    fn ring(&self, i: usize, az_pos: f64) -> f64 {
        let n = self.grid.n_az;
        let j0 = az_pos.floor();
        let f = az_pos - j0;
        let j0 = (j0 as isize).rem_euclid(n as isize) as usize;
        let j1 = (j0 + 1) % n;
        let row = &self.values[i * n..(i + 1) * n];
        row[j0] * (1.0 - f) + row[j1] * f
    }

    pub fn sample(&self, dir: Vec3) -> f64 {
        let d = if self.grid.is_hemisphere() && dir.z < 0.0 {
            -dir
        } else {
            dir
        };
        let (polar, az) = d.to_spherical();
        self.sample_angles(polar, az)
    }

    pub fn sample_angles(&self, polar: f64, az: f64) -> f64 {
        let g = &self.grid;
        let az_pos = az / g.az_step();
        if polar < g.polar_min {
            return self.cap(0, 1, g.polar(0), g.polar(1), polar, az_pos);
        }
        if polar > g.polar_max {
            if g.is_hemisphere() {
                return self.ring(g.n_polar - 1, az_pos);
            }
            let n = g.n_polar;
            return self.cap(
                n - 1,
                n - 2,
                PI - g.polar(n - 1),
                PI - g.polar(n - 2),
                PI - polar,
                az_pos,
            );
        }
        let u = (polar - g.polar_min) / g.polar_step();
        let i0 = (u.floor() as usize).min(g.n_polar - 2);
        let f = u - i0 as f64;
        self.ring(i0, az_pos) * (1.0 - f) + self.ring(i0 + 1, az_pos) * f
    }
}

/// Samples of a function on the unit sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereFunction {
    pub grid: SphereGrid,
    pub values: Vec<f64>,
}

impl SphereFunction {
    pub fn zeros(grid: SphereGrid) -> Self {
        SphereFunction {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn<F: Fn(Vec3) -> f64>(grid: SphereGrid, f: F) -> Self {
        let values = grid.dirs().into_iter().map(f).collect();
        SphereFunction { grid, values }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.n_az + j]
    }

    pub fn interpolator(&self) -> SphereInterpolator<'_> {
        SphereInterpolator::new(self.grid, &self.values)
    }

    /// ∫_{S²} φ·w dS for an even φ (hemisphere grids integrate
    /// φ(α̂)(w(α̂) + w(−α̂)) over the stored half).
    pub fn integrate_against<F: Fn(Vec3) -> f64>(&self, w: F) -> f64 {
        let rw = self.grid.row_weights();
        let hemi = self.grid.is_hemisphere();
        let mut acc = 0.0;
        for (i, w_row) in rw.iter().enumerate() {
            let mut row = 0.0;
            for j in 0..self.grid.n_az {
                let d = self.grid.dir(i, j);
                let ww = if hemi { w(d) + w(-d) } else { w(d) };
                row += self.get(i, j) * ww;
            }
            acc += w_row * row;
        }
        acc
    }
}

/// What a [`DetectorData`] array holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[repr(u8)]
pub enum DataKind {
    /// Circular-detector signal P(θ̂, t).
    P = 0,
    /// Funk transform of a sphere-time function.
    FunkPhi = 1,
    /// Spherical Radon transform R_S f(α̂, t).
    SphericalRadon = 2,
    /// Boundary pressure p(r_det α̂, t).
    BoundaryPressure = 3,
    /// Time average g(θ̂, t) = t⁻¹∫₀ᵗ P.
    TimeAverage = 4,
    /// Composite transform R_P f = F(R_S f).
    Rp = 5,
}

impl DataKind {
    pub fn from_u8(v: u8) -> Result<Self> {
        Ok(match v {
            0 => DataKind::P,
            1 => DataKind::FunkPhi,
            2 => DataKind::SphericalRadon,
            3 => DataKind::BoundaryPressure,
            4 => DataKind::TimeAverage,
            5 => DataKind::Rp,
            _ => return Err(Error::Format(format!("unknown data kind tag {v}"))),
        })
    }
}

/// Sphere grid × uniform time grid on [0, t_max], with the detector radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereTimeGrid {
    pub sphere: SphereGrid,
    pub n_t: usize,
    pub t_max: f64,
    pub r_det: f64,
}

impl SphereTimeGrid {
    pub fn new(sphere: SphereGrid, n_t: usize, t_max: f64, r_det: f64) -> Result<Self> {
        if n_t < 2 || !(t_max > 0.0) || !(r_det > 0.0) {
            return Err(Error::Domain(format!(
                "invalid time grid: n_t={n_t}, t_max={t_max}, r_det={r_det}"
            )));
        }
        Ok(SphereTimeGrid {
            sphere,
            n_t,
            t_max,
            r_det,
        })
    }

    /// 50 polar angles on [π/25, π/2], 200 azimuths, 50 times on [0, 2],
    /// r_det = 1.
    pub fn standard() -> Self {
        let sphere = SphereGrid::hemisphere(50, 200, PI / 25.0).unwrap();
        SphereTimeGrid::new(sphere, 50, 2.0, 1.0).unwrap()
    }

    pub fn dt(&self) -> f64 {
        self.t_max / (self.n_t - 1) as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        if k + 1 == self.n_t {
            self.t_max
        } else {
            k as f64 * self.dt()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_t).map(|k| self.time(k)).collect()
    }

    pub fn len(&self) -> usize {
        self.sphere.len() * self.n_t
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Samples of a function on S² × [0, t_max], stored
/// (polar-major, azimuth, time) with time fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorData {
    pub grid: SphereTimeGrid,
    pub kind: DataKind,
    pub values: Vec<f64>,
}

impl DetectorData {
    pub fn zeros(grid: SphereTimeGrid, kind: DataKind) -> Self {
        DetectorData {
            grid,
            kind,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.grid.sphere.n_az + j) * self.grid.n_t + k
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.index(i, j, k)]
    }

    /// Time series at sphere node number `node` (= i·n_az + j).
    pub fn series(&self, node: usize) -> &[f64] {
        let n_t = self.grid.n_t;
        &self.values[node * n_t..(node + 1) * n_t]
    }

    pub fn slice(&self, k: usize) -> SphereFunction {
        let n_t = self.grid.n_t;
        SphereFunction {
            grid: self.grid.sphere,
            values: self.values.iter().skip(k).step_by(n_t).copied().collect(),
        }
    }

    pub fn set_slice(&mut self, k: usize, f: &SphereFunction) {
        let n_t = self.grid.n_t;
        for (node, &v) in f.values.iter().enumerate() {
            self.values[node * n_t + k] = v;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, c: f64) -> DetectorData {
        DetectorData {
            grid: self.grid,
            kind: self.kind,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }
}

/// Descriptor of an n³ voxel grid on [−h, h]³ with samples at cell centers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeSpec {
    pub n: usize,
    pub half_width: f64,
}

impl VolumeSpec {
    pub fn new(n: usize, half_width: f64) -> Result<Self> {
        if n < 2 || !(half_width > 0.0) {
            return Err(Error::Domain(format!(
                "invalid volume grid n={n}, half_width={half_width}"
            )));
        }
        Ok(VolumeSpec { n, half_width })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + (i as f64 + 0.5) * self.spacing()
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    pub fn point(&self, i: usize, j: usize, k: usize) -> Vec3 {
        Vec3::new(self.coord(i), self.coord(j), self.coord(k))
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Values on a [`VolumeSpec`] grid, x-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeGrid {
    pub spec: VolumeSpec,
    pub values: Vec<f64>,
}

impl VolumeGrid {
    pub fn zeros(spec: VolumeSpec) -> Self {
        VolumeGrid {
            spec,
            values: vec![0.0; spec.len()],
        }
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.spec.index(i, j, k)]
    }

    /// Trilinear interpolation; points outside the voxel-center lattice are
    /// clamped to it.
    pub fn sample(&self, p: Vec3) -> f64 {
        let n = self.spec.n;
        let pos = |c: f64| {
            let u = (c + self.spec.half_width) / self.spec.spacing() - 0.5;
            let u = u.clamp(0.0, (n - 1) as f64);
            let i0 = (u.floor() as usize).min(n - 2);
            (i0, u - i0 as f64)
        };
        let (i0, fx) = pos(p.x);
        let (j0, fy) = pos(p.y);
        let (k0, fz) = pos(p.z);
        let mut acc = 0.0;
        for (di, wx) in [(0, 1.0 - fx), (1, fx)] {
            for (dj, wy) in [(0, 1.0 - fy), (1, fy)] {
                for (dk, wz) in [(0, 1.0 - fz), (1, fz)] {
                    acc += wx * wy * wz * self.get(i0 + di, j0 + dj, k0 + dk);
                }
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hemisphere_weights_cover_half_sphere() {
        let g = SphereGrid::hemisphere(50, 200, PI / 25.0).unwrap();
        let total: f64 = g.row_weights().iter().sum::<f64>() * g.n_az as f64;
        assert!((total - TAU).abs() < 1e-12);
        let f = SphereGrid::full(99, 200, PI / 25.0).unwrap();
        let total: f64 = f.row_weights().iter().sum::<f64>() * f.n_az as f64;
        assert!((total - 2.0 * TAU).abs() < 1e-12);
    }

    #[test]
    fn interpolator_reproduces_nodes_and_evenness() {
        let g = SphereGrid::hemisphere(20, 40, 0.1).unwrap();
        let sf = SphereFunction::from_fn(g, |d| d.z * d.z + d.x * d.y);
        let it = sf.interpolator();
        for i in 0..20 {
            for j in 0..40 {
                let d = g.dir(i, j);
                assert!((it.sample(d) - sf.get(i, j)).abs() < 1e-12);
                assert!((it.sample(-d) - sf.get(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn antipodes_on_full_grid() {
        let g = SphereGrid::full(21, 40, 0.1).unwrap();
        for i in 0..21 {
            for j in 0..40 {
                let (a, b) = g.antipode(i, j).unwrap();
                assert!((g.dir(i, j) + g.dir(a, b)).norm() < 1e-12);
            }
        }
        assert!(SphereGrid::hemisphere(10, 10, 0.1)
            .unwrap()
            .antipode(0, 0)
            .is_none());
    }

    #[test]
    fn volume_trilinear_is_exact_on_linear_fields() {
        let spec = VolumeSpec::new(8, 1.0).unwrap();
        let mut v = VolumeGrid::zeros(spec);
        for i in 0..8 {
            for j in 0..8 {
                for k in 0..8 {
                    let p = spec.point(i, j, k);
                    v.values[spec.index(i, j, k)] = 1.0 + p.x - 2.0 * p.y + 0.5 * p.z;
                }
            }
        }
        let p = Vec3::new(0.1, -0.33, 0.4);
        assert!((v.sample(p) - (1.0 + 0.1 + 0.66 + 0.2)).abs() < 1e-12);
    }
}
