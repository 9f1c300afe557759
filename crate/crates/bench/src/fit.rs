//! Two-parameter fits of ratio against depth.

use std::fmt;
use std::str::FromStr;

use anyhow::{bail, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurveModel {
    /// `a / p + b`
    InverseLinear,
    /// `c * p^d`
    Power,
}

impl fmt::Display for CurveModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CurveModel::InverseLinear => "a/p+b",
            CurveModel::Power => "c*p^d",
        })
    }
}

impl FromStr for CurveModel {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "a/p+b" | "inverse" => Ok(CurveModel::InverseLinear),
            "c*p^d" | "c·p^d" | "power" => Ok(CurveModel::Power),
            _ => bail!("unknown model {s:?}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurveFit {
    pub model: CurveModel,
    /// `(a, b)` or `(c, d)`.
    pub params: (f64, f64),
    /// Euclidean norm of the residual vector.
    pub residual: f64,
}

impl CurveFit {
    pub fn eval(&self, p: f64) -> f64 {
        let (x, y) = self.params;
        match self.model {
            CurveModel::InverseLinear => x / p + y,
            CurveModel::Power => x * p.powf(y),
        }
    }
}

fn residual(points: &[(f64, f64)], f: impl Fn(f64) -> f64) -> f64 {
    points.iter().map(|&(p, v)| (f(p) - v).powi(2)).sum::<f64>().sqrt()
}

/// Least-squares fit of `points` `(p, value)` to `model`.
///
/// `a/p + b` is linear and solved directly. For `c * p^d` the best `c` at
/// fixed `d` is closed form, so `d` is scanned on a grid over `[-4, 4]` and
/// refined by golden-section search around the best grid point.
pub fn fit_curve(points: &[(f64, f64)], model: CurveModel) -> Result<CurveFit> {
    if points.len() < 2 {
        bail!("need at least two points");
    }
    if points.iter().any(|&(p, v)| !(p > 0.0 && p.is_finite() && v.is_finite())) {
        bail!("depths must be positive and values finite");
    }
    if points.iter().all(|&(p, _)| p == points[0].0) {
        bail!("all points share one depth");
    }
    let params = match model {
        CurveModel::InverseLinear => {
            let n = points.len() as f64;
            let xs: Vec<f64> = points.iter().map(|&(p, _)| 1.0 / p).collect();
            let mx = xs.iter().sum::<f64>() / n;
            let my = points.iter().map(|&(_, v)| v).sum::<f64>() / n;
            let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
            let sxy: f64 = xs.iter().zip(points).map(|(x, &(_, v))| (x - mx) * (v - my)).sum();
            let a = sxy / sxx;
            (a, my - a * mx)
        }
        CurveModel::Power => {
            let best_c = |d: f64| {
                let num: f64 = points.iter().map(|&(p, v)| v * p.powf(d)).sum();
                let den: f64 = points.iter().map(|&(p, _)| p.powf(2.0 * d)).sum();
                num / den
            };
            let cost = |d: f64| {
                let c = best_c(d);
                residual(points, |p| c * p.powf(d))
            };
            let step = 0.01;
            let (mut d0, mut f0) = (0.0, f64::INFINITY);
            for k in -400..=400 {
                let d = k as f64 * step;
                let f = cost(d);
                if f < f0 {
                    (d0, f0) = (d, f);
                }
            }
            let (mut lo, mut hi) = (d0 - step, d0 + step);
            let g = (5f64.sqrt() - 1.0) / 2.0;
            for _ in 0..100 {
                let m1 = hi - g * (hi - lo);
                let m2 = lo + g * (hi - lo);
                if cost(m1) < cost(m2) {
                    hi = m2;
                } else {
                    lo = m1;
                }
            }
            let d = 0.5 * (lo + hi);
            let d = if cost(d) <= f0 { d } else { d0 };
            (best_c(d), d)
        }
    };
    if !(params.0.is_finite() && params.1.is_finite()) {
        bail!("fit did not converge");
    }
    let mut fit = CurveFit {
        model,
        params,
        residual: 0.0,
    };
    fit.residual = residual(points, |p| fit.eval(p));
    Ok(fit)
}
