//! Ordinary least squares over an implicit index axis plus the two-sided
//! slope t-test used to flag trend changes in a metric series.
//!
//! The t distribution CDF is evaluated through the regularized incomplete
//! beta function, so the crate carries no statistics dependency.

use crate::{Error, Result};

/// Outcome of regressing a series against its indices 0, 1, 2, ...
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionResult {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope; 0 for a perfect fit.
    pub stderr_slope: f64,
    /// Undefined (`None`) when the standard error is 0.
    pub t_stat: Option<f64>,
    /// Two-sided p-value for slope != 0.
    pub p_value: f64,
    pub n_points: usize,
}

/// Relative residual threshold below which a fit counts as perfect.
const PERFECT_FIT_TOL: f64 = 1e-12;

/// Fits `y = a + b*x` with `x = 0..len` and tests the slope against zero.
///
/// A zero-residual fit has infinitely strong evidence: `p_value` is 0 when
/// the slope is nonzero and 1 when the series is constant. Two points always
/// fit exactly, so they follow the same rule.
pub fn regress(series: &[f64]) -> Result<RegressionResult> {
    let m = series.len();
    if m < 2 {
        return Err(Error::ShortSeries(m));
    }
    let mf = m as f64;
    let x_mean = (mf - 1.0) / 2.0;
    let y_mean = series.iter().sum::<f64>() / mf;
    // Index axis is fixed, so Sxx has the closed form m(m^2-1)/12.
    let sxx = mf * (mf * mf - 1.0) / 12.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (i, &y) in series.iter().enumerate() {
        let dx = i as f64 - x_mean;
        let dy = y - y_mean;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let sse = (syy - slope * sxy).max(0.0);

    if syy == 0.0 {
        // Constant series: zero slope, nothing to reject.
        return Ok(RegressionResult {
            slope: 0.0,
            intercept: y_mean,
            stderr_slope: 0.0,
            t_stat: None,
            p_value: 1.0,
            n_points: m,
        });
    }
    if m == 2 || sse <= PERFECT_FIT_TOL * syy {
        // Perfect nonconstant fit: slope is exact and nonzero.
        return Ok(RegressionResult {
            slope,
            intercept,
            stderr_slope: 0.0,
            t_stat: None,
            p_value: 0.0,
            n_points: m,
        });
    }

    let df = (m - 2) as f64;
    let stderr = (sse / df / sxx).sqrt();
    let t = slope / stderr;
    Ok(RegressionResult {
        slope,
        intercept,
        stderr_slope: stderr,
        t_stat: Some(t),
        p_value: t_two_sided_p(t, df),
        n_points: m,
    })
}

/// P(|T| >= |t|) for a Student t variable with `df` degrees of freedom.
///
/// Uses the identity 2*(1 - F(|t|)) = I_x(df/2, 1/2) with x = df/(df+t^2).
pub fn t_two_sided_p(t: f64, df: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    reg_inc_beta(df / 2.0, 0.5, df / (df + t * t))
}

/// ln Γ(x) for x > 0 (Lanczos approximation, accurate to ~1e-10).
fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 6] = [
        76.180_091_729_471_46,
        -86.505_320_329_416_77,
        24.014_098_240_830_91,
        -1.231_739_572_450_155,
        0.120_865_097_386_617_9e-2,
        -0.539_523_938_495_3e-5,
    ];
    let mut y = x;
    let tmp = x + 5.5;
    let tmp = tmp - (x + 0.5) * tmp.ln();
    let mut ser = 1.000_000_000_190_015;
    for c in COEF {
        y += 1.0;
        ser += c / y;
    }
    -tmp + (2.506_628_274_631_000_5 * ser / x).ln()
}

/// Regularized incomplete beta function I_x(a, b).
fn reg_inc_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_bt = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let bt = ln_bt.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        bt * beta_cf(a, b, x) / a
    } else {
        1.0 - bt * beta_cf(b, a, 1.0 - x) / b
    }
}

/// Continued fraction for the incomplete beta (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 300;
    const EPS: f64 = 3e-14;
    const FPMIN: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}
