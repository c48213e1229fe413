//! Seeded uniform measurement noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::DetectorData;
use crate::{Error, Result};

/// Adds independent uniform noise on [−level·A, level·A] to every sample,
/// with A = max|data| over the whole dataset. Samples are visited in storage
/// order (polar-major, then azimuth, then time), one draw each, from
/// ChaCha8 seeded with `seed`.
pub fn add_uniform_noise(data: &DetectorData, level: f64, seed: u64) -> Result<DetectorData> {
    if !(0.0..1.0).contains(&level) {
        return Err(Error::Domain(format!(
            "noise level must lie in [0, 1), got {level}"
        )));
    }
    let mut out = data.clone();
    if level == 0.0 {
        return Ok(out);
    }
    let amp = level * data.max_abs();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for v in &mut out.values {
        *v += amp * rng.gen_range(-1.0..=1.0);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{DataKind, SphereGrid, SphereTimeGrid};

    fn ones() -> DetectorData {
        let g = SphereTimeGrid::new(SphereGrid::hemisphere(10, 20, 0.1).unwrap(), 50, 2.0, 1.0)
            .unwrap();
        let mut d = DetectorData::zeros(g, DataKind::P);
        d.values
            .iter_mut()
            .enumerate()
            .for_each(|(i, v)| *v = ((i % 7) as f64 - 3.0) / 3.0);
        d
    }

    #[test]
    fn zero_level_is_identity() {
        let d = ones();
        assert_eq!(add_uniform_noise(&d, 0.0, 3).unwrap(), d);
        assert!(add_uniform_noise(&d, 1.0, 3).is_err());
        assert!(add_uniform_noise(&d, -0.1, 3).is_err());
    }

    #[test]
    fn bounded_and_seeded() {
        let d = ones();
        let a = add_uniform_noise(&d, 0.2, 7).unwrap();
        let b = add_uniform_noise(&d, 0.2, 7).unwrap();
        let c = add_uniform_noise(&d, 0.2, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let max_added = a
            .values
            .iter()
            .zip(&d.values)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!((0.19..=0.2).contains(&max_added), "{max_added}");
    }
}
