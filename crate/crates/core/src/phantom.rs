//! Ball phantoms for the initial pressure and the closed-form acoustic
//! pressure they generate at points outside their support.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::Vec3;
use crate::grid::{VolumeGrid, VolumeSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BallKind {
    /// c·1{|x − x₀| < R}
    Sharp,
    /// c·φ(|x − x₀|²), flat on radius r, cubic C¹ blend to 0 at R.
    Smooth,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBall")]
pub struct BallComponent {
    pub kind: BallKind,
    pub center: Vec3,
    pub outer_radius: f64,
    pub inner_radius: f64,
    pub amplitude: f64,
}

#[derive(Deserialize)]
struct RawBall {
    kind: BallKind,
    center: [f64; 3],
    outer_radius: f64,
    inner_radius: Option<f64>,
    amplitude: f64,
}

impl TryFrom<RawBall> for BallComponent {
    type Error = Error;

    fn try_from(raw: RawBall) -> Result<Self> {
        let inner = match (raw.kind, raw.inner_radius) {
            (BallKind::Sharp, None) => raw.outer_radius,
            (BallKind::Smooth, None) => {
                return Err(Error::InvalidPhantom(
                    "smooth ball requires inner_radius".into(),
                ))
            }
            (_, Some(r)) => r,
        };
        let b = BallComponent {
            kind: raw.kind,
            center: raw.center.into(),
            outer_radius: raw.outer_radius,
            inner_radius: inner,
            amplitude: raw.amplitude,
        };
        b.validate()?;
        Ok(b)
    }
}

impl BallComponent {
    pub fn sharp(center: Vec3, radius: f64, amplitude: f64) -> Result<Self> {
        let b = BallComponent {
            kind: BallKind::Sharp,
            center,
            outer_radius: radius,
            inner_radius: radius,
            amplitude,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn smooth(center: Vec3, inner: f64, outer: f64, amplitude: f64) -> Result<Self> {
        let b = BallComponent {
            kind: BallKind::Smooth,
            center,
            outer_radius: outer,
            inner_radius: inner,
            amplitude,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        let (r, big_r) = (self.inner_radius, self.outer_radius);
        let finite = [
            self.center.x,
            self.center.y,
            self.center.z,
            r,
            big_r,
            self.amplitude,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidPhantom("non-finite parameter".into()));
        }
        match self.kind {
            BallKind::Sharp if !(big_r > 0.0 && r == big_r) => Err(Error::InvalidPhantom(format!(
                "sharp ball needs inner = outer > 0, got r={r}, R={big_r}"
            ))),
            BallKind::Smooth if !(r > 0.0 && r < big_r) => Err(Error::InvalidPhantom(format!(
                "smooth ball needs 0 < r < R, got r={r}, R={big_r}"
            ))),
            _ => Ok(()),
        }
    }

    pub fn mirrored(&self) -> Self {
        BallComponent {
            center: -self.center,
            ..*self
        }
    }

    /// Radial profile: value at distance `s` from the center.
    pub fn profile(&self, s: f64) -> f64 {
        let s = s.abs();
        match self.kind {
            BallKind::Sharp => {
                if s < self.outer_radius {
                    self.amplitude
                } else {
                    0.0
                }
            }
            BallKind::Smooth => {
                self.amplitude * smooth_blend(s, self.inner_radius, self.outer_radius)
            }
        }
    }

    pub fn eval(&self, x: Vec3) -> f64 {
        self.profile((x - self.center).norm())
    }

    /// Acoustic pressure at `x` (outside the ball) at time `t`.
    pub fn pressure(&self, x: Vec3, t: f64) -> Result<f64> {
        let d = (x - self.center).norm();
        if !(d > self.outer_radius) {
            return Err(Error::InsideBall {
                distance: d,
                radius: self.outer_radius,
            });
        }
        if t < 0.0 {
            return Err(Error::Domain(format!("negative time {t}")));
        }
        Ok(self.pressure_at_distance(d, t))
    }

    /// Pressure at distance `d > R` from the center, no checks.
    ///
    /// Both kinds share c·(d − t)/(2d)·φ(|d − t|); for the sharp ball φ is
    /// the indicator of |d − t| < R.
    #[inline]
    pub fn pressure_at_distance(&self, d: f64, t: f64) -> f64 {
        let s = d - t;
        if s.abs() >= self.outer_radius {
            return 0.0;
        }
        s / (2.0 * d) * self.profile(s)
    }
}

/// φ(s²) of the smooth phantom: 1 on |s| ≤ r, 1 − 3u² + 2u³ with
/// u = (|s| − r)/(R − r) on r < |s| < R, 0 beyond.
pub fn smooth_blend(s: f64, r: f64, big_r: f64) -> f64 {
    let s = s.abs();
    if s <= r {
        1.0
    } else if s < big_r {
        let u = (s - r) / (big_r - r);
        1.0 - 3.0 * u * u + 2.0 * u * u * u
    } else {
        0.0
    }
}

/// pressure for a sharp ball; errors if `x` is inside the ball.
pub fn pressure_sharp(ball: &BallComponent, x: Vec3, t: f64) -> Result<f64> {
    if ball.kind != BallKind::Sharp {
        return Err(Error::InvalidPhantom("expected a sharp ball".into()));
    }
    ball.pressure(x, t)
}

/// pressure for a smooth ball; errors if `x` is inside the ball.
pub fn pressure_smooth(ball: &BallComponent, x: Vec3, t: f64) -> Result<f64> {
    if ball.kind != BallKind::Smooth {
        return Err(Error::InvalidPhantom("expected a smooth ball".into()));
    }
    ball.pressure(x, t)
}

fn default_true() -> bool {
    true
}

/// An initial-pressure phantom: a sum of ball components, optionally
/// replaced by its even extension f(x) + f(−x).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhantomSpec {
    #[serde(default = "default_true")]
    pub symmetrize: bool,
    pub components: Vec<BallComponent>,
}

impl Default for PhantomSpec {
    fn default() -> Self {
        PhantomSpec {
            symmetrize: true,
            components: Vec::new(),
        }
    }
}

impl PhantomSpec {
    pub fn new(components: Vec<BallComponent>, symmetrize: bool) -> Self {
        PhantomSpec {
            symmetrize,
            components,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("phantom serializes")
    }

    /// Four sharp balls in the x₂x₃-plane.
    pub fn fig2() -> Self {
        Self::from_json(include_str!("../phantoms/fig2.json")).expect("bundled phantom")
    }

    /// The smooth counterpart of [`PhantomSpec::fig2`].
    pub fn fig3() -> Self {
        Self::from_json(include_str!("../phantoms/fig3.json")).expect("bundled phantom")
    }

    /// Components actually contributing to f, including mirrors when
    /// `symmetrize` is set.
    pub fn effective_components(&self) -> Vec<BallComponent> {
        let mut out = self.components.clone();
        if self.symmetrize {
            out.extend(self.components.iter().map(BallComponent::mirrored));
        }
        out
    }

    /// Whether every component has a mirror partner with center −x₀.
    pub fn is_even_symmetric(&self) -> bool {
        self.components.iter().all(|b| {
            self.components.iter().any(|o| {
                let m = o.mirrored();
                m.kind == b.kind
                    && (m.center - b.center).norm() < 1e-12
                    && m.outer_radius == b.outer_radius
                    && m.inner_radius == b.inner_radius
                    && m.amplitude == b.amplitude
            })
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.components.iter().try_for_each(BallComponent::validate)
    }

    /// Support problems relative to the detector sphere of radius `r_det`:
    /// one message per ball that is not strictly inside it.
    pub fn support_warnings(&self, r_det: f64) -> Vec<String> {
        self.components
            .iter()
            .enumerate()
            .filter(|(_, b)| b.center.norm() + b.outer_radius >= r_det)
            .map(|(i, b)| {
                format!(
                    "component {i} (|x0| + R = {:.4}) reaches the detector sphere r_det = {r_det}",
                    b.center.norm() + b.outer_radius
                )
            })
            .collect()
    }

    pub fn eval(&self, x: Vec3) -> f64 {
        let base = |p: Vec3| self.components.iter().map(|b| b.eval(p)).sum::<f64>();
        if self.symmetrize {
            base(x) + base(-x)
        } else {
            base(x)
        }
    }

    /// p(r_det·α̂, t), summed over the effective components.
    pub fn boundary_pressure(&self, alpha: Vec3, t: f64, r_det: f64) -> Result<f64> {
        let x = alpha * r_det;
        let mut acc = 0.0;
        for b in &self.components {
            acc += b.pressure(x, t)?;
        }
        if self.symmetrize {
            for b in &self.components {
                acc += b.mirrored().pressure(x, t)?;
            }
        }
        Ok(acc)
    }

    /// The phantom sampled at every voxel center.
    pub fn ground_truth_volume(&self, spec: VolumeSpec) -> VolumeGrid {
        let n = spec.n;
        let mut values = vec![0.0; spec.len()];
        values
            .par_chunks_mut(n * n)
            .enumerate()
            .for_each(|(i, plane)| {
                for j in 0..n {
                    for k in 0..n {
                        plane[j * n + k] = self.eval(spec.point(i, j, k));
                    }
                }
            });
        VolumeGrid { spec, values }
    }
}

/// Shorthand for evaluating f at a point.
pub fn eval_phantom(spec: &PhantomSpec, x: Vec3) -> f64 {
    spec.eval(x)
}
