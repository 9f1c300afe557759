use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};

/// Empirical mean of `shots` projective measurements of a `±1` observable
/// whose exact expectation is `ideal`.
pub fn sample_shots(ideal: f64, shots: u64, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_shots_with(ideal, shots, &mut rng)
}

pub fn sample_shots_with<R: rand::Rng + ?Sized>(ideal: f64, shots: u64, rng: &mut R) -> Result<f64> {
    if !(-1.0..=1.0).contains(&ideal) {
        return Err(Error::InvalidParameter(format!(
            "expectation {ideal} outside [-1, 1]"
        )));
    }
    if shots == 0 {
        return Err(Error::InvalidParameter("need at least one shot".into()));
    }
    let p_up = (1.0 + ideal) / 2.0;
    let ups = Binomial::new(shots, p_up)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?
        .sample(rng);
    Ok((2.0 * ups as f64 - shots as f64) / shots as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_outcomes() {
        assert_eq!(sample_shots(1.0, 17, 3).unwrap(), 1.0);
        assert_eq!(sample_shots(-1.0, 5, 3).unwrap(), -1.0);
        assert_eq!(sample_shots(0.3, 100, 9).unwrap(), sample_shots(0.3, 100, 9).unwrap());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(sample_shots(1.5, 10, 0).is_err());
        assert!(sample_shots(0.0, 0, 0).is_err());
    }

    #[test]
    fn zero_mean_concentrates() {
        // Hoeffding: P(|mean| >= 0.03) <= 2 exp(-2 * 20000 * 0.03^2 / 4) < 1e-7.
        for seed in 0..50 {
            assert!(sample_shots(0.0, 20_000, seed).unwrap().abs() < 0.03);
        }
    }
}
