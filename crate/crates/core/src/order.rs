//! Truncation-order certification by log-log slope fits.
//!
//! A probe evaluates an exact and a truncated expression on a geometric grid
//! of scale factors `lambda` and fits `log|exact - truncated|` against
//! `log lambda`. A truncation that is correct through order `k` in `1/lambda`
//! has residual slope `-k`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default pass threshold on the fit quality.
pub const DEFAULT_MIN_R_SQUARED: f64 = 0.99;
/// Default tolerance on `|slope - target|`.
pub const DEFAULT_SLOPE_TOLERANCE: f64 = 0.2;

/// Geometric grid of scale factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingGrid {
    lambdas: Vec<f64>,
}

impl ScalingGrid {
    pub fn new(lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.len() < 5 {
            return Err(Error::DegenerateProbe(format!(
                "grid needs at least 5 points, got {}",
                lambdas.len()
            )));
        }
        if lambdas.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::DegenerateProbe("grid entries must be finite and positive".into()));
        }
        for w in lambdas.windows(2) {
            if w[1] / w[0] < 2.0 * (1.0 - 1e-12) {
                return Err(Error::DegenerateProbe(format!(
                    "grid must increase by a ratio >= 2 ({} -> {})",
                    w[0], w[1]
                )));
            }
        }
        Ok(Self { lambdas })
    }

    pub fn geometric(start: f64, ratio: f64, count: usize) -> Result<Self> {
        Self::new((0..count).map(|i| start * ratio.powi(i as i32)).collect())
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }
}

impl Default for ScalingGrid {
    /// `{1, 2, 4, 8, 16, 32}`.
    fn default() -> Self {
        Self {
            lambdas: vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0],
        }
    }
}

/// Result of a slope fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum OrderFit {
    Fitted { slope: f64, r_squared: f64, points: usize },
    /// Every residual sat below `100 eps` relative to the compared values.
    ExactToPrecision,
}

/// A named pair of black-box evaluators and the order claimed for their difference.
pub struct ScalingProbe<'a> {
    pub name: String,
    pub grid: ScalingGrid,
    pub claimed_order: f64,
    exact: Box<dyn Fn(f64) -> Result<f64> + Sync + 'a>,
    truncated: Box<dyn Fn(f64) -> Result<f64> + Sync + 'a>,
}

impl<'a> ScalingProbe<'a> {
    pub fn new<E, T>(name: impl Into<String>, grid: ScalingGrid, claimed_order: f64, exact: E, truncated: T) -> Self
    where
        E: Fn(f64) -> Result<f64> + Sync + 'a,
        T: Fn(f64) -> Result<f64> + Sync + 'a,
    {
        Self {
            name: name.into(),
            grid,
            claimed_order,
            exact: Box::new(exact),
            truncated: Box::new(truncated),
        }
    }

    /// Probe on a residual that is already formed (the truncated side is zero).
    pub fn from_residual<R>(name: impl Into<String>, grid: ScalingGrid, claimed_order: f64, residual: R) -> Self
    where
        R: Fn(f64) -> Result<f64> + Sync + 'a,
    {
        Self::new(name, grid, claimed_order, residual, |_| Ok(0.0))
    }

    /// `(lambda, |exact - truncated|, scale)` for every grid point.
    pub fn samples(&self) -> Result<Vec<(f64, f64, f64)>> {
        self.grid
            .lambdas()
            .iter()
            .map(|&l| {
                let e = (self.exact)(l)?;
                let t = (self.truncated)(l)?;
                Ok((l, (e - t).abs(), e.abs().max(t.abs())))
            })
            .collect()
    }

    pub fn run(&self) -> Result<OrderFit> {
        residual_order_from_samples(&self.samples()?)
    }

    pub fn record(&self, slope_tolerance: f64, min_r_squared: f64) -> Result<ProbeRecord> {
        let fit = self.run()?;
        Ok(ProbeRecord::judge(&self.name, -self.claimed_order, fit, slope_tolerance, min_r_squared))
    }
}

/// Least-squares slope of `log residual` against `log lambda`.
pub fn residual_order(probe: &ScalingProbe<'_>) -> Result<OrderFit> {
    probe.run()
}

/// Slope fit over `(lambda, residual, magnitude)` samples.
///
/// Residuals at or below `100 eps * magnitude` are treated as zero. If every
/// point is below that floor the verdict is [`OrderFit::ExactToPrecision`];
/// fewer than four usable points otherwise is a degenerate probe.
pub fn residual_order_from_samples(samples: &[(f64, f64, f64)]) -> Result<OrderFit> {
    let floor = |mag: f64| 100.0 * f64::EPSILON * mag.max(f64::MIN_POSITIVE);
    let usable: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(_, r, mag)| r.is_finite() && *r > floor(*mag))
        .map(|(l, r, _)| (l.ln(), r.ln()))
        .collect();
    if usable.is_empty() {
        return Ok(OrderFit::ExactToPrecision);
    }
    if usable.len() < 4 {
        return Err(Error::DegenerateProbe(format!(
            "only {} of {} residuals above the precision floor",
            usable.len(),
            samples.len()
        )));
    }
    let (slope, r_squared) = linear_fit(&usable);
    Ok(OrderFit::Fitted {
        slope,
        r_squared,
        points: usable.len(),
    })
}

/// Ordinary least squares `y = a + b x`; returns `(b, r^2)`.
pub fn linear_fit(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    (slope, r_squared)
}

/// Observed convergence orders between successive `(h, error)` pairs.
pub fn observed_orders(rows: &[(f64, f64)]) -> Vec<f64> {
    rows.windows(2)
        .map(|w| (w[0].1 / w[1].1).ln() / (w[0].0 / w[1].0).ln())
        .collect()
}

/// PASS/FAIL row for reporting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRecord {
    pub name: String,
    /// Fitted slope; `None` for an exact-to-precision verdict.
    pub slope: Option<f64>,
    pub target: f64,
    pub r_squared: Option<f64>,
    pub pass: bool,
    pub exact_to_precision: bool,
}

impl ProbeRecord {
    pub fn judge(name: &str, target: f64, fit: OrderFit, slope_tolerance: f64, min_r_squared: f64) -> Self {
        match fit {
            OrderFit::Fitted { slope, r_squared, .. } => Self {
                name: name.to_string(),
                slope: Some(slope),
                target,
                r_squared: Some(r_squared),
                pass: (slope - target).abs() <= slope_tolerance && r_squared >= min_r_squared,
                exact_to_precision: false,
            },
            OrderFit::ExactToPrecision => Self {
                name: name.to_string(),
                slope: None,
                target,
                r_squared: None,
                pass: true,
                exact_to_precision: true,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sqrt_taylor_remainder_is_third_order() {
        let probe = ScalingProbe::new(
            "sqrt",
            ScalingGrid::default(),
            3.0,
            |l| {
                let x = 1.0 / l;
                Ok((1.0 - x).sqrt())
            },
            |l| {
                let x = 1.0 / l;
                Ok(1.0 - x / 2.0 - x * x / 8.0)
            },
        );
        // Near x = 1 the quartic and higher terms still matter; start at x = 1/4.
        let probe = ScalingProbe {
            grid: ScalingGrid::geometric(4.0, 2.0, 6).unwrap(),
            ..probe
        };
        match probe.run().unwrap() {
            OrderFit::Fitted { slope, r_squared, .. } => {
                assert!((slope + 3.0).abs() < 0.1, "slope {slope}");
                assert!(r_squared > 0.99);
            }
            f => panic!("unexpected {f:?}"),
        }
    }

    #[test]
    fn identical_evaluators_are_exact() {
        let probe = ScalingProbe::new("same", ScalingGrid::default(), 2.0, |l| Ok(l.sin()), |l| Ok(l.sin()));
        assert_eq!(probe.run().unwrap(), OrderFit::ExactToPrecision);
        let rec = probe.record(0.2, 0.99).unwrap();
        assert!(rec.pass && rec.exact_to_precision);
    }

    #[test]
    fn grid_validation() {
        assert!(ScalingGrid::new(vec![1.0, 2.0, 4.0, 8.0]).is_err());
        assert!(ScalingGrid::new(vec![1.0, 2.0, 3.0, 8.0, 16.0]).is_err());
        assert!(ScalingGrid::new(vec![1.0, 2.0, 4.0, 8.0, 16.0]).is_ok());
    }

    #[test]
    fn observed_orders_of_quadratic_error() {
        let rows = [(0.4, 0.16), (0.2, 0.04), (0.1, 0.01)];
        for o in observed_orders(&rows) {
            assert!((o - 2.0).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn slope_is_scale_equivariant(k in 0.5f64..6.0, scale in 1e-6f64..1e6, wiggle in 0.0f64..0.1) {
            let grid = ScalingGrid::default();
            let base: Vec<(f64, f64, f64)> = grid.lambdas().iter()
                .map(|&l| (l, l.powf(-k) * (1.0 + wiggle * (l * 1.3).sin()), 1.0))
                .collect();
            let scaled: Vec<(f64, f64, f64)> = base.iter().map(|&(l, r, m)| (l, r * scale, m * scale)).collect();
            let a = residual_order_from_samples(&base).unwrap();
            let b = residual_order_from_samples(&scaled).unwrap();
            match (a, b) {
                (OrderFit::Fitted { slope: s1, .. }, OrderFit::Fitted { slope: s2, .. }) => {
                    prop_assert!((s1 - s2).abs() < 1e-10);
                }
                _ => prop_assert!(false),
            }
        }
    }
}
