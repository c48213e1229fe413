//! The Funk-Minkowski transform Fφ(θ̂) = ∫_{θ̂·α̂=0} φ(α̂) dS(α̂) and its
//! inversion through the planar Radon transform.
//!
//! On the gnomonic chart x ↦ α̂ = (x, 1)/√(1+|x|²) the even function φ
//! becomes Φ(x) = 2φ(α̂)α₃², and G(ω̂, s) = (1+s²)^{-1/2} Fφ((ω̂, −s)/√(1+s²))
//! is exactly the planar Radon transform of Φ. Φ is then recovered by
//! filtered backprojection. Three charts, one per coordinate axis, are
//! blended with weights α_i^k so that no chart is used near its horizon.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::geometry::{great_circle_points, Vec3};
use crate::grid::{SphereFunction, SphereGrid};
use crate::radon2d::{
    backproject_point, fbp_invert, filter_sinogram, AngleTable, HilbertFilter, PlaneGrid,
    PlaneSpec, Sinogram2D, SinogramSpec,
};
use crate::{Error, Result};

/// ∫ φ over the great circle orthogonal to `theta`, by the uniform
/// `n_circle`-point rule.
pub fn funk_forward<F: Fn(Vec3) -> f64>(phi: F, theta: Vec3, n_circle: usize) -> f64 {
    let pts = great_circle_points(theta, n_circle);
    let sum: f64 = pts.into_iter().map(phi).sum();
    sum * std::f64::consts::TAU / n_circle as f64
}

/// [`funk_forward`] of gridded samples, read by bilinear interpolation.
pub fn funk_forward_gridded(phi: &SphereFunction, theta: Vec3, n_circle: usize) -> f64 {
    let interp = phi.interpolator();
    funk_forward(|d| interp.sample(d), theta, n_circle)
}

/// Fφ at every node of `out`, for a callable φ.
pub fn funk_forward_fn_sphere<F: Fn(Vec3) -> f64 + Sync>(
    phi: F,
    out: SphereGrid,
    n_circle: usize,
) -> SphereFunction {
    let values = out
        .dirs()
        .into_par_iter()
        .map(|d| funk_forward(&phi, d, n_circle))
        .collect();
    SphereFunction { grid: out, values }
}

/// Fφ at every node of `out`, for gridded φ.
pub fn funk_forward_sphere(
    phi: &SphereFunction,
    out: SphereGrid,
    n_circle: usize,
) -> SphereFunction {
    let interp = phi.interpolator();
    funk_forward_fn_sphere(|d| interp.sample(d), out, n_circle)
}

/// Coordinate axis whose component plays the role of α₃ in a chart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X1,
    X2,
    X3,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X1, Axis::X2, Axis::X3];

    pub fn from_index(i: usize) -> Result<Axis> {
        match i {
            1 => Ok(Axis::X1),
            2 => Ok(Axis::X2),
            3 => Ok(Axis::X3),
            _ => Err(Error::Domain(format!("axis must be 1, 2 or 3, got {i}"))),
        }
    }

    /// Cyclically permuted coordinates (a, b, c) with c the chart axis:
    /// X3 → (α₁, α₂, α₃), X1 → (α₂, α₃, α₁), X2 → (α₃, α₁, α₂).
    pub fn to_chart(self, v: Vec3) -> Vec3 {
        match self {
            Axis::X3 => v,
            Axis::X1 => Vec3::new(v.y, v.z, v.x),
            Axis::X2 => Vec3::new(v.z, v.x, v.y),
        }
    }

    pub fn from_chart(self, c: Vec3) -> Vec3 {
        match self {
            Axis::X3 => c,
            Axis::X1 => Vec3::new(c.z, c.x, c.y),
            Axis::X2 => Vec3::new(c.y, c.z, c.x),
        }
    }
}

/// Gnomonic chart α̂ ↦ α′/α_axis onto a plane grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GnomonicChart {
    pub axis: Axis,
    pub plane: PlaneSpec,
}

impl GnomonicChart {
    /// Chart coordinates of `dir`, if they fall inside the plane square.
    pub fn chart_point(&self, dir: Vec3) -> Option<(f64, f64)> {
        let c = self.axis.to_chart(dir);
        if c.z == 0.0 {
            return None;
        }
        let (x, y) = (c.x / c.z, c.y / c.z);
        self.plane.contains(x, y).then_some((x, y))
    }

    /// Unit vector with α_axis > 0 whose chart coordinates are (x, y).
    pub fn direction(&self, x: f64, y: f64) -> Vec3 {
        self.axis.from_chart(Vec3::new(x, y, 1.0).normalized())
    }
}

/// G(ω̂, s) = (1+s²)^{-1/2}·Fφ(θ̂) with θ̂ = (ω̂, −s)/√(1+s²) in the
/// permuted coordinates of `axis`.
pub fn funk_to_sinogram(f_phi: &SphereFunction, axis: Axis, spec: SinogramSpec) -> Sinogram2D {
    let interp = f_phi.interpolator();
    funk_to_sinogram_fn(|d| interp.sample(d), axis, spec)
}

/// [`funk_to_sinogram`] for a callable Fφ.
pub fn funk_to_sinogram_fn<F: Fn(Vec3) -> f64 + Sync>(
    f_phi: F,
    axis: Axis,
    spec: SinogramSpec,
) -> Sinogram2D {
    Sinogram2D::from_fn(spec, |psi, s| {
        let norm = (1.0 + s * s).sqrt();
        let theta = axis.from_chart(Vec3::new(psi.cos() / norm, psi.sin() / norm, -s / norm));
        f_phi(theta) / norm
    })
}

/// Single-chart inversion: Φ_axis ≈ 2φα_axis² on the chart plane.
pub fn funk_invert_axis(
    f_phi: &SphereFunction,
    chart: &GnomonicChart,
    sino: SinogramSpec,
) -> PlaneGrid {
    fbp_invert(&funk_to_sinogram(f_phi, chart.axis, sino), chart.plane)
}

/// Parameters of the chart-blended inversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FunkInversionParams {
    pub n_angles: usize,
    pub n_s: usize,
    /// Sinogram half-width; `None` takes cot(polar_min) of the data grid,
    /// the largest |s| whose great circle the grid still resolves.
    pub s_max: Option<f64>,
    /// Half-width of each chart plane.
    pub x_max: f64,
    /// Even weight exponent.
    pub k: u32,
    /// Continue each sinogram row beyond ±s_max by A/√(1+s²), matched to
    /// the edge sample, instead of by zero.
    pub tail_correction: bool,
}

impl Default for FunkInversionParams {
    fn default() -> Self {
        FunkInversionParams {
            n_angles: 360,
            n_s: 401,
            s_max: None,
            x_max: 2.5,
            k: 2,
            tail_correction: true,
        }
    }
}

impl FunkInversionParams {
    pub fn sinogram_spec(&self, grid: &SphereGrid) -> Result<SinogramSpec> {
        let s_max = self.s_max.unwrap_or(1.0 / grid.polar_min.tan());
        SinogramSpec::new(self.n_angles, self.n_s, s_max)
    }
}

struct ChartNode {
    node: usize,
    x: f64,
    y: f64,
    weight: f64,
}

/// Precomputed chart-blended inversion for a fixed sphere grid; reused
/// across time slices.
pub struct FunkInverter {
    grid: SphereGrid,
    sino: SinogramSpec,
    filter: HilbertFilter,
    table: AngleTable,
    charts: Vec<(Axis, Vec<ChartNode>)>,
    denom: Vec<f64>,
    tail: Option<Vec<f64>>,
}

impl FunkInverter {
    pub fn new(grid: SphereGrid, params: FunkInversionParams) -> Result<Self> {
        if !params.k.is_multiple_of(2) {
            return Err(Error::Domain(format!(
                "weight exponent k must be even, got {}",
                params.k
            )));
        }
        if !(params.x_max > 0.0) {
            return Err(Error::Domain(format!("chart half-width {}", params.x_max)));
        }
        let sino = params.sinogram_spec(&grid)?;
        let dirs = grid.dirs();
        let mut denom = vec![0.0; dirs.len()];
        let mut charts = Vec::with_capacity(3);
        for axis in Axis::ALL {
            let mut nodes = Vec::new();
            for (n, &d) in dirs.iter().enumerate() {
                let c = axis.to_chart(d);
                if c.z == 0.0 {
                    continue;
                }
                let (x, y) = (c.x / c.z, c.y / c.z);
                if x.abs() > params.x_max || y.abs() > params.x_max {
                    continue;
                }
                let w = c.z.abs().powi(params.k as i32);
                denom[n] += w * c.z * c.z;
                nodes.push(ChartNode {
                    node: n,
                    x,
                    y,
                    weight: w,
                });
            }
            charts.push((axis, nodes));
        }
        if let Some(n) = denom.iter().position(|&v| v == 0.0) {
            return Err(Error::Uncovered(dirs[n].as_array()));
        }
        Ok(FunkInverter {
            grid,
            sino,
            filter: HilbertFilter::new(sino.n_s),
            table: AngleTable::new(&sino),
            charts,
            denom,
            tail: params.tail_correction.then(|| tail_response(&sino)),
        })
    }

    pub fn grid(&self) -> SphereGrid {
        self.grid
    }

    pub fn sinogram_spec(&self) -> SinogramSpec {
        self.sino
    }

    /// φ on the inverter's grid from samples of Fφ (on any grid).
    pub fn invert(&self, f_phi: &SphereFunction) -> SphereFunction {
        let interp = f_phi.interpolator();
        self.invert_fn(|d| interp.sample(d))
    }

    /// φ on the inverter's grid from a callable Fφ.
    pub fn invert_fn<F: Fn(Vec3) -> f64 + Sync>(&self, f_phi: F) -> SphereFunction {
        let mut num = vec![0.0; self.grid.len()];
        for (axis, nodes) in &self.charts {
            let g = funk_to_sinogram_fn(&f_phi, *axis, self.sino);
            let mut filtered = filter_sinogram(&g, &self.filter);
            if let Some(tail) = &self.tail {
                add_tail(&g, &mut filtered, tail);
            }
            let est: Vec<f64> = nodes
                .par_iter()
                .map(|c| backproject_point(&filtered, &self.table, c.x, c.y).0 / (4.0 * PI))
                .collect();
            for (c, e) in nodes.iter().zip(est) {
                num[c.node] += c.weight * e;
            }
        }
        let values = num
            .iter()
            .zip(&self.denom)
            .map(|(n, d)| n / (2.0 * d))
            .collect();
        SphereFunction {
            grid: self.grid,
            values,
        }
    }
}

/// H applied to the derivative of 1/√(1+s²) restricted to s′ > s_max + Δs/2
/// (the part of the line beyond the last sample cell), at every grid offset.
///
/// Funk sinograms approach Fφ(pole)/√(1+s²) for large |s|, so scaling this
/// response by the edge values restores most of the truncated tail.
fn tail_response(spec: &SinogramSpec) -> Vec<f64> {
    let s0 = spec.s_max + 0.5 * spec.ds();
    (0..spec.n_s)
        .map(|i| {
            let si = spec.s(i);
            // s′ = s0/τ maps (0, 1] onto [s0, ∞)
            let g = |tau: f64| {
                if tau <= 0.0 {
                    return 0.0;
                }
                let sp = s0 / tau;
                let d = -sp / (1.0 + sp * sp).powf(1.5);
                d / (si - sp) * s0 / (tau * tau)
            };
            crate::quad::adaptive(g, 0.0, 1.0, 1e-14, 4000).unwrap_or_else(|e| match e {
                Error::Quadrature { .. } => {
                    crate::quad::GaussLegendre::new(200).integrate(0.0, 1.0, g)
                }
                _ => unreachable!(),
            }) / PI
        })
        .collect()
}

fn add_tail(g: &Sinogram2D, filtered: &mut Sinogram2D, tail: &[f64]) {
    let spec = g.spec;
    let n = spec.n_s;
    let edge = (1.0 + spec.s_max * spec.s_max).sqrt();
    for a in 0..spec.n_angles {
        let plus = g.get(a, n - 1) * edge;
        let minus = g.get(a, 0) * edge;
        let row = &mut filtered.values[a * n..(a + 1) * n];
        for i in 0..n {
            // the s < −s_max tail is the mirror image: response c(−s)·(−1)·(−1)
            row[i] += plus * tail[i] + minus * tail[n - 1 - i];
        }
    }
}

/// Chart-blended inversion φ = Σ α_i^k Φ_i(α′/α_i) / (2 Σ α_i^{k+2}) on
/// the grid of `f_phi`.
pub fn funk_invert_stabilized(f_phi: &SphereFunction, k: u32) -> Result<SphereFunction> {
    let params = FunkInversionParams {
        k,
        ..Default::default()
    };
    Ok(FunkInverter::new(f_phi.grid, params)?.invert(f_phi))
}
