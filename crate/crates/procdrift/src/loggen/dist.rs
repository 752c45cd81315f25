//! Drift distributions: how quickly a change region hands over from the
//! old model to the new one.
//!
//! A distribution maps the offset `k` inside a change region to the
//! probability that trace `k` already follows the new model. The region
//! lasts until that probability exceeds 0.999, so its width is a pure
//! function of the distribution.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// The region ends at the first offset whose handover probability exceeds
/// this. The epsilon absorbs float error at exact boundaries such as
/// 0.001 * 999.
const CUTOFF: f64 = 0.999;
const CUTOFF_EPS: f64 = 1e-9;

/// Handover probability curve of a change region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DriftDistribution {
    /// cdf(k) = slope * k, clamped to 1.
    Linear { slope: f64 },
    /// cdf(k) = phi((k - mu) / sigma2); sigma2 acts as the curve's scale.
    Gaussian { mu: f64, sigma2: f64 },
    /// cdf(k) = 1 - exp(-lambda * k).
    Exponential { lambda: f64 },
    /// cdf(k) = p for the first n offsets, then 1.
    Constant { p: f64, n: usize },
}

impl DriftDistribution {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            DriftDistribution::Linear { slope } => slope > 0.0 && slope <= 1.0,
            DriftDistribution::Gaussian { mu, sigma2 } => mu >= 0.0 && sigma2 > 0.0,
            DriftDistribution::Exponential { lambda } => lambda > 0.0,
            DriftDistribution::Constant { p, .. } => p > 0.0 && p <= 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidDistribution(format!("{self}")))
        }
    }

    /// Probability that the trace at offset `k` of the region follows the
    /// new model.
    pub fn cdf(&self, k: usize) -> f64 {
        let kf = k as f64;
        match *self {
            DriftDistribution::Linear { slope } => (slope * kf).clamp(0.0, 1.0),
            DriftDistribution::Gaussian { mu, sigma2 } => {
                normal_cdf((kf - mu) / sigma2)
            }
            DriftDistribution::Exponential { lambda } => 1.0 - (-lambda * kf).exp(),
            DriftDistribution::Constant { p, n } => {
                if k < n {
                    p
                } else {
                    1.0
                }
            }
        }
    }

    /// True when the region is over at offset `k`.
    pub(crate) fn ends_at(&self, k: usize) -> bool {
        self.cdf(k) > CUTOFF + CUTOFF_EPS
    }

    /// Number of mixed traces the region emits.
    pub fn region_width(&self) -> usize {
        (0..).find(|&k| self.ends_at(k)).expect("cdf reaches 1")
    }
}

impl fmt::Display for DriftDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            DriftDistribution::Linear { slope } => write!(f, "linear:{slope}"),
            DriftDistribution::Gaussian { mu, sigma2 } => {
                write!(f, "gaussian:{mu}:{sigma2}")
            }
            DriftDistribution::Exponential { lambda } => {
                write!(f, "exponential:{lambda}")
            }
            DriftDistribution::Constant { p, n } => write!(f, "constant:{p}:{n}"),
        }
    }
}

impl FromStr for DriftDistribution {
    type Err = Error;

    /// Grammar: `linear:<slope>`, `gaussian:<mu>:<sigma2>`,
    /// `exponential:<lambda>`, `constant:<p>:<n>`.
    fn from_str(s: &str) -> Result<DriftDistribution> {
        let bad = || Error::InvalidDistribution(s.to_string());
        let mut parts = s.split(':');
        let kind = parts.next().ok_or_else(bad)?;
        let num = |p: Option<&str>| -> Result<f64> {
            p.and_then(|v| v.parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .ok_or_else(bad)
        };
        let dist = match kind {
            "linear" => DriftDistribution::Linear { slope: num(parts.next())? },
            "gaussian" => DriftDistribution::Gaussian {
                mu: num(parts.next())?,
                sigma2: num(parts.next())?,
            },
            "exponential" => {
                DriftDistribution::Exponential { lambda: num(parts.next())? }
            }
            "constant" => {
                let p = num(parts.next())?;
                let n = parts
                    .next()
                    .and_then(|v| v.parse::<usize>().ok())
                    .ok_or_else(bad)?;
                DriftDistribution::Constant { p, n }
            }
            _ => return Err(bad()),
        };
        if parts.next().is_some() {
            return Err(bad());
        }
        dist.validate()?;
        Ok(dist)
    }
}

/// Standard normal CDF via the Abramowitz-Stegun erf approximation;
/// absolute error below 1.5e-7, far inside the region-width margins.
fn normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + erf(z / std::f64::consts::SQRT_2))
}

fn erf(x: f64) -> f64 {
    let sign = if x < 0.0 { -1.0 } else { 1.0 };
    let x = x.abs();
    let t = 1.0 / (1.0 + 0.327_591_1 * x);
    let poly = t
        * (0.254_829_592
            + t * (-0.284_496_736
                + t * (1.421_413_741 + t * (-1.453_152_027 + t * 1.061_405_429))));
    sign * (1.0 - poly * (-x * x).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn region_widths_match_the_benchmark_grid() {
        let cases: [(&str, usize); 12] = [
            ("linear:0.001", 1000),
            ("linear:0.002", 500),
            ("linear:0.005", 200),
            ("linear:0.01", 100),
            ("gaussian:20:10", 51),
            ("gaussian:50:30", 143),
            ("exponential:0.05", 139),
            ("exponential:0.1", 70),
            ("exponential:0.5", 14),
            ("constant:0.5:100", 100),
            ("constant:0.5:200", 200),
            ("constant:0.5:500", 500),
        ];
        for (spec, width) in cases {
            let dist: DriftDistribution = spec.parse().unwrap();
            assert_eq!(dist.region_width(), width, "{spec}");
        }
    }

    #[test]
    fn degenerate_constant_region_is_an_instant_swap() {
        let dist: DriftDistribution = "constant:0.5:0".parse().unwrap();
        assert_eq!(dist.region_width(), 0);
    }

    #[test]
    fn parser_rejects_malformed_specs() {
        for bad in [
            "linear",
            "linear:0",
            "linear:-0.1",
            "linear:0.1:9",
            "gaussian:20",
            "gaussian:20:0",
            "exponential:abc",
            "constant:0.5",
            "constant:0:10",
            "constant:1.5:10",
            "constant:0.5:1.5",
            "weibull:1",
            "exponential:inf",
            "",
        ] {
            assert!(bad.parse::<DriftDistribution>().is_err(), "{bad:?} parsed");
        }
    }

    #[test]
    fn display_round_trips_through_the_parser() {
        for spec in [
            "linear:0.001",
            "gaussian:20:10",
            "exponential:0.5",
            "constant:0.5:200",
        ] {
            let dist: DriftDistribution = spec.parse().unwrap();
            assert_eq!(dist.to_string(), spec);
            assert_eq!(dist.to_string().parse::<DriftDistribution>().unwrap(), dist);
        }
    }

    #[test]
    fn normal_cdf_matches_table_values() {
        let close = |a: f64, b: f64| (a - b).abs() < 1e-6;
        assert!(close(normal_cdf(0.0), 0.5));
        assert!(close(normal_cdf(1.0), 0.841_345));
        assert!(close(normal_cdf(-1.0), 0.158_655));
        assert!(close(normal_cdf(3.090_2), 0.999_000));
    }

    proptest! {
        #[test]
        fn cdf_is_monotone_and_bounded(
            spec in prop_oneof![
                (0.0005f64..0.05).prop_map(|s| DriftDistribution::Linear { slope: s }),
                ((1.0f64..80.0), (1.0f64..40.0))
                    .prop_map(|(mu, sigma2)| DriftDistribution::Gaussian { mu, sigma2 }),
                (0.01f64..1.0).prop_map(|l| DriftDistribution::Exponential { lambda: l }),
                ((0.05f64..1.0), (0usize..300))
                    .prop_map(|(p, n)| DriftDistribution::Constant { p, n }),
            ],
            k in 0usize..2000,
        ) {
            let a = spec.cdf(k);
            let b = spec.cdf(k + 1);
            prop_assert!((0.0..=1.0).contains(&a));
            prop_assert!(a <= b + 1e-12);
            // the region always terminates
            prop_assert!(spec.region_width() <= 20_000);
        }
    }
}
