//! Hiding entries of a complete matrix.

use std::fmt;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SquaredDistanceMatrix;
use crate::seed;
use crate::tree::{connected, mst_complete, AdjacencyMask, PartialDissimilarity};

/// Redraws allowed before random masking gives up on connectivity.
pub const RESAMPLE_CAP: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum MaskMode {
    /// Keep only the minimum spanning tree.
    Mst,
    /// Remove `⌊fraction · n(n-1)/2⌋` pairs uniformly at random.
    Random { fraction: f64 },
}

impl MaskMode {
    pub fn validate(&self) -> Result<()> {
        match *self {
            MaskMode::Random { fraction } if !(0.0..1.0).contains(&fraction) => {
                Err(Error::InvalidConfig(format!(
                    "missing fraction must lie in [0, 1), got {fraction}"
                )))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for MaskMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MaskMode::Mst => f.write_str("mst"),
            MaskMode::Random { fraction } => write!(f, "random-{fraction}"),
        }
    }
}

/// Number of pairs a random mask removes.
pub fn removed_count(n: usize, fraction: f64) -> usize {
    let pairs = n * n.saturating_sub(1) / 2;
    ((fraction * pairs as f64).floor() as usize).min(pairs)
}

/// Fraction of pairs hidden by the tree mask, `1 - (n-1) / (n(n-1)/2)`.
/// Zero when there are no pairs.
pub fn mst_missing_fraction(n: usize) -> f64 {
    let pairs = n * n.saturating_sub(1) / 2;
    if pairs == 0 {
        return 0.0;
    }
    1.0 - (n - 1) as f64 / pairs as f64
}

pub fn mask(d: &SquaredDistanceMatrix, mode: MaskMode, seed: u64) -> Result<PartialDissimilarity> {
    mode.validate()?;
    d.ensure_complete()?;
    let n = d.order();
    match mode {
        MaskMode::Mst => {
            let t = mst_complete(d)?.tree;
            PartialDissimilarity::restrict(d, AdjacencyMask::from_tree(&t))
        }
        MaskMode::Random { fraction } => {
            let mut pairs: Vec<(usize, usize)> = (0..n)
                .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
                .collect();
            let drop = removed_count(n, fraction);
            let mut rng = seed::rng(seed);
            for _ in 0..RESAMPLE_CAP {
                pairs.shuffle(&mut rng);
                let mut bits = vec![false; n * n];
                for &(i, j) in &pairs[drop..] {
                    bits[i * n + j] = true;
                    bits[j * n + i] = true;
                }
                if connected(n, |i, j| bits[i * n + j]) {
                    return PartialDissimilarity::restrict(d, AdjacencyMask::new(n, bits)?);
                }
            }
            Err(Error::Disconnected)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{edm, Matrix, PointConfiguration};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn uniform(n: usize, seed: u64) -> SquaredDistanceMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        edm(
            &PointConfiguration::new(Matrix::from_fn(n, 2, |_, _| rng.random_range(0.0..1.0)))
                .unwrap(),
        )
    }

    #[test]
    fn mst_mode_keeps_the_tree() {
        let d = uniform(20, 1);
        let p = mask(&d, MaskMode::Mst, 0).unwrap();
        let t = mst_complete(&d).unwrap().tree;
        assert_eq!(p.mask().pair_count(), 19);
        for e in t.edges() {
            assert_eq!(p.get(e.u, e.v), Some(d.values()[(e.u, e.v)]));
        }
    }

    #[test]
    fn tree_mask_missingness() {
        assert!((mst_missing_fraction(10) - 0.8).abs() < 1e-15);
        assert_eq!(mst_missing_fraction(2), 0.0);
        assert_eq!(mst_missing_fraction(1), 0.0);
        let p = mask(&uniform(10, 3), MaskMode::Mst, 0).unwrap();
        assert_eq!(p.mask().pair_count(), 45 - 36);
    }

    #[test]
    fn zero_fraction_keeps_everything() {
        let d = uniform(7, 2);
        let p = mask(&d, MaskMode::Random { fraction: 0.0 }, 3).unwrap();
        assert_eq!(p.to_matrix(), d);
    }

    #[test]
    fn ninety_percent_of_a_hundred() {
        assert_eq!(removed_count(100, 0.9), 4455);
        let d = uniform(100, 4);
        let p = mask(&d, MaskMode::Random { fraction: 0.9 }, 5).unwrap();
        assert_eq!(p.mask().pair_count(), 4950 - 4455);
        assert!(p.mask().is_connected());
    }

    #[test]
    fn counts_follow_the_floor_rule() {
        let d = uniform(13, 6);
        for q in [0.1, 0.25, 0.33, 0.5, 0.6] {
            let p = mask(&d, MaskMode::Random { fraction: q }, 7).unwrap();
            assert_eq!(p.mask().pair_count(), 78 - (q * 78.0_f64).floor() as usize);
        }
    }

    #[test]
    fn impossible_masks_fail() {
        let d = uniform(10, 8);
        // Eight pairs cannot connect ten points.
        assert!(matches!(
            mask(&d, MaskMode::Random { fraction: 0.83 }, 0),
            Err(Error::Disconnected)
        ));
        assert!(mask(&d, MaskMode::Random { fraction: 1.0 }, 0).is_err());
    }

    #[test]
    fn same_seed_same_mask() {
        let d = uniform(15, 9);
        let mode = MaskMode::Random { fraction: 0.5 };
        assert_eq!(mask(&d, mode, 11).unwrap(), mask(&d, mode, 11).unwrap());
        assert_ne!(mask(&d, mode, 11).unwrap(), mask(&d, mode, 12).unwrap());
    }
}
