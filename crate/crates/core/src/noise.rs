//! Phenomenological hardware noise on advice values, its least-squares fit
//! and shot-budget arithmetic.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::lightcone::CanonicalKey;
use crate::qaoa::fnv1a;

/// Noisy value `(1 - eta)^size * ideal + alpha + xi` with `xi ~ N(0, sigma)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseParams {
    eta: f64,
    alpha: f64,
    sigma: f64,
    seed: u64,
}

impl NoiseParams {
    pub fn new(eta: f64, alpha: f64, sigma: f64, seed: u64) -> Result<Self> {
        if !(0.0..1.0).contains(&eta) {
            return Err(Error::InvalidParameter(format!("eta {eta} outside [0, 1)")));
        }
        if !alpha.is_finite() {
            return Err(Error::InvalidParameter("alpha must be finite".into()));
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("sigma {sigma} must be finite and >= 0")));
        }
        Ok(NoiseParams { eta, alpha, sigma, seed })
    }

    /// Shrinking only: `alpha = sigma = 0`.
    pub fn shrink_only(eta: f64) -> Result<Self> {
        Self::new(eta, 0.0, 0.0, 0)
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_alpha(self, alpha: f64) -> Result<Self> {
        Self::new(self.eta, alpha, self.sigma, self.seed)
    }

    fn shrink(&self, ideal: f64, cone_size: usize) -> f64 {
        (1.0 - self.eta).powi(cone_size as i32) * ideal
    }
}

fn check_inputs(ideal: f64, cone_size: usize) -> Result<()> {
    if !(-1.0..=1.0).contains(&ideal) {
        return Err(Error::InvalidParameter(format!("expectation {ideal} outside [-1, 1]")));
    }
    if cone_size == 0 {
        return Err(Error::InvalidParameter("cone size must be positive".into()));
    }
    Ok(())
}

/// One noisy reading with a fresh offset drawn from `rng`.
pub fn apply_noise<R: Rng + ?Sized>(ideal: f64, cone_size: usize, params: &NoiseParams, rng: &mut R) -> Result<f64> {
    check_inputs(ideal, cone_size)?;
    Ok(params.shrink(ideal, cone_size) + params.alpha + gaussian(params.sigma, rng))
}

fn gaussian<R: Rng + ?Sized>(sigma: f64, rng: &mut R) -> f64 {
    if sigma == 0.0 {
        return 0.0;
    }
    Normal::new(0.0, sigma).expect("validated sigma").sample(rng)
}

/// A fixed draw of offsets, one per cone topology.
///
/// The offset of a key is a pure function of the seed and the key bytes,
/// so every run with the same parameters sees the same offsets. Offsets
/// loaded from a file take precedence.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseRealization {
    params: NoiseParams,
    table: HashMap<CanonicalKey, f64>,
}

impl NoiseRealization {
    pub fn new(params: NoiseParams) -> Self {
        NoiseRealization {
            params,
            table: HashMap::new(),
        }
    }

    pub fn params(&self) -> &NoiseParams {
        &self.params
    }

    pub fn offset(&self, key: &CanonicalKey) -> f64 {
        if let Some(&x) = self.table.get(key) {
            return x;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.params.seed ^ fnv1a(key.as_bytes()));
        gaussian(self.params.sigma, &mut rng)
    }

    pub fn apply(&self, ideal: f64, cone_size: usize, key: &CanonicalKey) -> Result<f64> {
        check_inputs(ideal, cone_size)?;
        Ok(self.params.shrink(ideal, cone_size) + self.params.alpha + self.offset(key))
    }

    /// Pins the offsets of `keys` into the table.
    pub fn materialize<'a>(&mut self, keys: impl IntoIterator<Item = &'a CanonicalKey>) {
        for k in keys {
            let x = self.offset(k);
            self.table.insert(k.clone(), x);
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_string())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let perr = |line: usize, msg: &str| Error::Parse {
            line: line + 1,
            msg: msg.to_string(),
        };
        let (i, header) = lines.next().ok_or_else(|| perr(0, "empty noise realization"))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 4 {
            return Err(perr(i, "expected header \"eta alpha sigma seed\""));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| perr(i, "bad number"));
        let seed = h[3].parse::<u64>().map_err(|_| perr(i, "bad seed"))?;
        let params = NoiseParams::new(num(h[0])?, num(h[1])?, num(h[2])?, seed)?;
        let mut table = HashMap::new();
        for (i, line) in lines {
            let w: Vec<&str> = line.split_whitespace().collect();
            if w.len() != 2 {
                return Err(perr(i, "expected \"cone_key offset\""));
            }
            let key = CanonicalKey::from_hex(w[0]).ok_or_else(|| perr(i, "bad cone key"))?;
            let x = w[1].parse::<f64>().map_err(|_| perr(i, "bad offset"))?;
            table.insert(key, x);
        }
        Ok(NoiseRealization { params, table })
    }
}

impl fmt::Display for NoiseRealization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.params;
        writeln!(f, "{} {} {} {}", p.eta, p.alpha, p.sigma, p.seed)?;
        let mut rows: Vec<_> = self.table.iter().collect();
        rows.sort_by(|a, b| a.0.cmp(b.0));
        for (k, x) in rows {
            writeln!(f, "{} {:.17e}", k.to_hex(), x)?;
        }
        Ok(())
    }
}

const ETA_MAX: f64 = 0.5;
const ETA_STEP: f64 = 1e-4;

/// Least-squares fit of `(ideal, noisy, cone_size)` triples.
///
/// Scans `eta` over `[0, 0.5]` in steps of `1e-4`; `alpha` is the
/// closed-form optimum at each `eta` and `sigma` is the root mean square
/// residual at the best one.
pub fn fit_noise(pairs: &[(f64, f64, usize)]) -> Result<NoiseParams> {
    if pairs.len() < 3 {
        return Err(Error::Degenerate("need at least 3 pairs".into()));
    }
    if pairs.iter().all(|p| p.2 == pairs[0].2) {
        return Err(Error::Degenerate("all cone sizes are equal".into()));
    }
    if pairs.iter().all(|p| p.0 == pairs[0].0) {
        return Err(Error::Degenerate("all ideal values are equal".into()));
    }
    let n = pairs.len() as f64;
    let steps = (ETA_MAX / ETA_STEP).round() as usize;
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for k in 0..=steps {
        let eta = k as f64 * ETA_STEP;
        let shrunk: Vec<f64> = pairs.iter().map(|&(x, _, s)| (1.0 - eta).powi(s as i32) * x).collect();
        let alpha = pairs.iter().zip(&shrunk).map(|(p, u)| p.1 - u).sum::<f64>() / n;
        let sse: f64 = pairs.iter().zip(&shrunk).map(|(p, u)| (p.1 - u - alpha).powi(2)).sum();
        if sse < best.0 {
            best = (sse, eta, alpha);
        }
    }
    let (sse, eta, alpha) = best;
    NoiseParams::new(eta, alpha, (sse / n).sqrt(), 0)
}

/// Shots needed so that `n` estimates all land within `gap` of their means
/// with probability at least `1 - eps`.
pub fn required_shots(n: usize, eps: f64, gap: f64) -> Result<u64> {
    if n == 0 {
        return Err(Error::InvalidParameter("problem size must be positive".into()));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps {eps} outside (0, 1)")));
    }
    if !(gap > 0.0 && gap.is_finite()) {
        return Err(Error::InvalidParameter(format!("gap {gap} must be positive")));
    }
    let m = ((n as f64 / eps).ln() / (gap * gap)).ceil();
    Ok((m as u64).max(1))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShotPlan {
    pub n: usize,
    pub eps: f64,
    pub gap: f64,
    pub shots: u64,
}

impl ShotPlan {
    pub fn new(n: usize, eps: f64, gap: f64) -> Result<Self> {
        Ok(ShotPlan {
            n,
            eps,
            gap,
            shots: required_shots(n, eps, gap)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lightcone::{canonical_key, LightCone};

    #[test]
    fn identity_without_noise() {
        let p = NoiseParams::new(0.0, 0.0, 0.0, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(apply_noise(0.37, 9, &p, &mut rng).unwrap(), 0.37);
    }

    #[test]
    fn shrink_and_shift() {
        let p = NoiseParams::new(0.03, -0.05, 0.0, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let v = apply_noise(0.5, 10, &p, &mut rng).unwrap();
        assert!((v - (0.97f64.powi(10) * 0.5 - 0.05)).abs() < 1e-15);
        assert!((v - 0.318704).abs() < 1e-5);
    }

    #[test]
    fn shrink_is_monotone() {
        let a = NoiseParams::shrink_only(0.02).unwrap();
        let b = NoiseParams::shrink_only(0.05).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut prev = f64::INFINITY;
        for s in 1..30 {
            let x = apply_noise(0.4, s, &a, &mut rng).unwrap();
            assert!(x < prev);
            assert!(apply_noise(0.4, s, &b, &mut rng).unwrap() < x);
            prev = x;
        }
    }

    #[test]
    fn parameter_domain() {
        assert!(NoiseParams::new(1.0, 0.0, 0.0, 0).is_err());
        assert!(NoiseParams::new(-0.1, 0.0, 0.0, 0).is_err());
        assert!(NoiseParams::new(0.1, 0.0, -1.0, 0).is_err());
        let p = NoiseParams::shrink_only(0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(apply_noise(1.5, 3, &p, &mut rng).is_err());
        assert!(apply_noise(0.5, 0, &p, &mut rng).is_err());
    }

    #[test]
    fn realization_is_deterministic_and_roundtrips() {
        let params = NoiseParams::new(0.03, -0.05, 0.04, 11).unwrap();
        let keys: Vec<CanonicalKey> = (1..=3).map(|p| canonical_key(&LightCone::regular_tree(p, 3))).collect();
        let a = NoiseRealization::new(params);
        let b = NoiseRealization::new(params);
        for k in &keys {
            assert_eq!(a.offset(k), b.offset(k));
        }
        assert_ne!(a.offset(&keys[0]), a.offset(&keys[1]));
        let mut m = a.clone();
        m.materialize(&keys);
        let dir = std::env::temp_dir().join(format!("qg-noise-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("r.txt");
        m.write(&path).unwrap();
        let back = NoiseRealization::read(&path).unwrap();
        assert_eq!(back, m);
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn fit_recovers_noiseless_parameters() {
        let params = NoiseParams::new(0.1, 0.2, 0.0, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pairs: Vec<(f64, f64, usize)> = (0..40)
            .map(|i| {
                let x = rng.gen_range(-1.0..1.0);
                let s = 1 + i % 9;
                (x, apply_noise(x, s, &params, &mut rng).unwrap(), s)
            })
            .collect();
        let fit = fit_noise(&pairs).unwrap();
        assert!((fit.eta() - 0.1).abs() < 1e-9);
        assert!((fit.alpha() - 0.2).abs() < 1e-9);
        assert!(fit.sigma() < 1e-9);

        let flat: Vec<_> = pairs.iter().map(|&(x, y, _)| (x, y, 4)).collect();
        assert!(matches!(fit_noise(&flat), Err(Error::Degenerate(_))));
        assert!(fit_noise(&pairs[..2]).is_err());
    }

    #[test]
    fn fit_of_identity_is_zero() {
        let pairs: Vec<_> = (0..10).map(|i| (i as f64 / 10.0 - 0.5, i as f64 / 10.0 - 0.5, 1 + i)).collect();
        let fit = fit_noise(&pairs).unwrap();
        assert_eq!(fit.eta(), 0.0);
        assert!(fit.alpha().abs() < 1e-12 && fit.sigma() < 1e-12);
    }

    #[test]
    fn shot_counts() {
        assert_eq!(required_shots(1, 0.5, 1.0).unwrap(), 1);
        assert_eq!(required_shots(1000, 0.05, 0.1).unwrap(), 991);
        assert_eq!(required_shots(1000, 0.01, 0.05).unwrap(), 4606);
        assert!(required_shots(1000, 0.05, 0.0).is_err());
        assert!(required_shots(0, 0.05, 0.1).is_err());
        assert!(required_shots(10, 1.0, 0.1).is_err());
        assert_eq!(ShotPlan::new(1000, 0.05, 0.1).unwrap().shots, 991);
    }
}
