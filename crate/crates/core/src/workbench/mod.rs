//! Data ingestion, synthetic data, masking, experiment grids and file
//! formats behind the command-line tool.

mod bench;
pub mod io;
mod mask;

pub use bench::{run_bench, Environment, RunRecord, RunSpec, Source, TrialRecord};
pub use io::{
    load_matrix, load_points, load_tree, save_json, save_matrix, save_points, save_tree,
    LabeledPoints,
};
pub use mask::{mask, mst_missing_fraction, removed_count, MaskMode, RESAMPLE_CAP};

use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::{Matrix, PointConfiguration};
use crate::seed;

/// `n` points uniform on `[0, 1]^p`, drawn row by row.
pub fn generate_uniform(n: usize, p: usize, seed: u64) -> Result<PointConfiguration> {
    if n == 0 || p == 0 {
        return Err(Error::InvalidConfig(format!(
            "need n, p >= 1, got n = {n}, p = {p}"
        )));
    }
    let mut rng = seed::rng(seed);
    PointConfiguration::new(Matrix::from_fn(n, p, |_, _| rng.random::<f64>()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_support_and_moments() {
        let x = generate_uniform(10_000, 2, 3).unwrap();
        assert!(x
            .coords()
            .as_slice()
            .iter()
            .all(|v| (0.0..=1.0).contains(v)));
        for k in 0..2 {
            let col = x.coords().column(k);
            let mean = col.iter().sum::<f64>() / 1e4;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 1e4;
            // σ of the mean is sqrt(1/12 / 10⁴).
            assert!((mean - 0.5).abs() < 4.0 * (1.0 / 12.0 / 1e4_f64).sqrt());
            assert!((var - 1.0 / 12.0).abs() < 0.05 / 12.0);
        }
    }

    #[test]
    fn uniform_is_deterministic() {
        assert_eq!(
            generate_uniform(20, 3, 9).unwrap(),
            generate_uniform(20, 3, 9).unwrap()
        );
        assert_ne!(
            generate_uniform(20, 3, 9).unwrap(),
            generate_uniform(20, 3, 10).unwrap()
        );
        assert!(generate_uniform(0, 3, 1).is_err());
    }
}
