use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Axis-aligned sampling box in real coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleBox {
    pub center: Vec<f64>,
    pub half_width: f64,
}

impl SampleBox {
    pub fn around_origin(dim: usize, half_width: f64) -> Self {
        SampleBox {
            center: vec![0.0; dim],
            half_width,
        }
    }

    /// `count` points drawn uniformly from the box; a pure function of `seed`.
    pub fn sample(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = self.half_width;
        (0..count)
            .map(|_| {
                self.center
                    .iter()
                    .map(|c| c + if h > 0.0 { rng.random_range(-h..h) } else { 0.0 })
                    .collect()
            })
            .collect()
    }
}

/// Evaluates `f` at every point in parallel and returns results in point order.
pub fn map_points<T: Send>(
    points: &[Vec<f64>],
    f: impl Fn(&[f64]) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    points.par_iter().map(|p| f(p)).collect::<Vec<_>>().into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampling_is_seeded_and_bounded() {
        let b = SampleBox::around_origin(4, 0.5);
        let a = b.sample(20, 7);
        assert_eq!(a, b.sample(20, 7));
        assert_ne!(a, b.sample(20, 8));
        assert!(a.iter().flatten().all(|x| x.abs() <= 0.5));
    }

    #[test]
    fn parallel_map_keeps_order() {
        let pts: Vec<Vec<f64>> = (0..64).map(|i| vec![i as f64]).collect();
        let out = map_points(&pts, |p| Ok(p[0] * 2.0)).unwrap();
        assert!(out.iter().enumerate().all(|(i, v)| *v == 2.0 * i as f64));
    }
}
