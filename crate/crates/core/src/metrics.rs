//! Error measures between a reconstructed volume and the phantom.

use serde::{Deserialize, Serialize};

use crate::geometry::Vec3;
use crate::grid::VolumeGrid;
use crate::phantom::{BallKind, PhantomSpec};
use crate::{Error, Result};

fn check_same(a: &VolumeGrid, b: &VolumeGrid) -> Result<()> {
    if a.spec != b.spec {
        return Err(Error::GridMismatch(format!("{:?} vs {:?}", a.spec, b.spec)));
    }
    Ok(())
}

/// Voxels of the upper half-ball |x| < 1, x₃ > 0.
fn upper_half_ball(vol: &VolumeGrid) -> impl Iterator<Item = usize> + '_ {
    let s = vol.spec;
    (0..s.n).flat_map(move |i| {
        (0..s.n).flat_map(move |j| {
            (0..s.n).filter_map(move |k| {
                let x = s.point(i, j, k);
                (x.z > 0.0 && x.norm() < 1.0).then(|| s.index(i, j, k))
            })
        })
    })
}

/// ‖v − truth‖ / ‖truth‖ over the upper half-ball (0/0 ↦ 0).
pub fn relative_l2_upper(vol: &VolumeGrid, truth: &VolumeGrid) -> Result<f64> {
    check_same(vol, truth)?;
    let (mut num, mut den) = (0.0, 0.0);
    for idx in upper_half_ball(vol) {
        num += (vol.values[idx] - truth.values[idx]).powi(2);
        den += truth.values[idx].powi(2);
    }
    Ok(if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (num / den).sqrt()
    })
}

/// max |v − truth| over the upper half-ball.
pub fn max_error_upper(vol: &VolumeGrid, truth: &VolumeGrid) -> Result<f64> {
    check_same(vol, truth)?;
    Ok(upper_half_ball(vol)
        .map(|i| (vol.values[i] - truth.values[i]).abs())
        .fold(0.0, f64::max))
}

/// Reconstructed and expected value at the center of one ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CenterValue {
    pub center: Vec3,
    pub expected: f64,
    pub value: f64,
}

impl CenterValue {
    pub fn relative_error(&self) -> f64 {
        (self.value - self.expected).abs() / self.expected.abs()
    }
}

/// Trilinearly interpolated volume values at the listed ball centers
/// (the non-mirrored components).
pub fn center_values(vol: &VolumeGrid, spec: &PhantomSpec) -> Vec<CenterValue> {
    spec.components
        .iter()
        .map(|b| CenterValue {
            center: b.center,
            expected: spec.eval(b.center),
            value: vol.sample(b.center),
        })
        .collect()
}

/// Mean of the volume over voxels within half the radius of each sharp
/// ball, paired with the phantom's mean over the same voxels.
pub fn plateau_means(vol: &VolumeGrid, spec: &PhantomSpec) -> Vec<(f64, f64)> {
    let s = vol.spec;
    spec.components
        .iter()
        .filter(|b| b.kind == BallKind::Sharp)
        .map(|b| {
            let (mut sum, mut truth, mut n) = (0.0, 0.0, 0usize);
            for i in 0..s.n {
                for j in 0..s.n {
                    for k in 0..s.n {
                        let x = s.point(i, j, k);
                        if (x - b.center).norm() < 0.5 * b.outer_radius {
                            sum += vol.get(i, j, k);
                            truth += spec.eval(x);
                            n += 1;
                        }
                    }
                }
            }
            if n == 0 {
                (vol.sample(b.center), spec.eval(b.center))
            } else {
                (sum / n as f64, truth / n as f64)
            }
        })
        .collect()
}

/// Summary written by the metrics command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub relative_l2: f64,
    pub max_error: f64,
    pub centers: Vec<CenterValue>,
}

pub fn metrics_report(vol: &VolumeGrid, spec: &PhantomSpec) -> Result<MetricsReport> {
    let truth = spec.ground_truth_volume(vol.spec);
    Ok(MetricsReport {
        relative_l2: relative_l2_upper(vol, &truth)?,
        max_error: max_error_upper(vol, &truth)?,
        centers: center_values(vol, spec),
    })
}

impl MetricsReport {
    /// CSV with one `metric,value` row per quantity.
    pub fn to_csv(&self) -> String {
        let mut s = format!(
            "metric,value\nrelative_l2,{:.17e}\nmax_error,{:.17e}\n",
            self.relative_l2, self.max_error
        );
        for (i, c) in self.centers.iter().enumerate() {
            s += &format!(
                "center_{i}_value,{:.17e}\ncenter_{i}_expected,{:.17e}\n",
                c.value, c.expected
            );
        }
        s
    }
}
