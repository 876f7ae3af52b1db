//! Welch's unequal-variance t-test.
//!
//! Degrees of freedom follow Welch–Satterthwaite. The two-tailed p-value is
//! `I_x(df/2, 1/2)` with `x = df / (df + t²)`, where `I` is the regularized
//! incomplete beta function evaluated by its continued fraction (modified
//! Lentz).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::ScoreSeries;

const CF_TOLERANCE: f64 = 1e-10;
const CF_MAX_ITER: usize = 1000;
const TINY: f64 = 1e-300;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin().abs()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut sum = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        sum += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + sum.ln()
}

fn beta_continued_fraction(x: f64, a: f64, b: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;

        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;

        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let step = d * c;
        h *= step;
        if (step - 1.0).abs() < CF_TOLERANCE {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)` for `a, b > 0`, `x ∈ [0, 1]`.
pub fn regularized_incomplete_beta(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(x, a, b) / a
    } else {
        1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b
    }
}

/// `P(|T| ≥ |t|)` for Student's t with `df` degrees of freedom.
pub fn student_t_two_tailed(t: f64, df: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    if !t.is_finite() {
        return 0.0;
    }
    regularized_incomplete_beta(df / (df + t * t), 0.5 * df, 0.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary {
    pub mean: f64,
    pub sd: f64,
    pub n: usize,
}

impl SampleSummary {
    pub fn new(mean: f64, sd: f64, n: usize) -> Self {
        Self { mean, sd, n }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub t: f64,
    pub df: f64,
    pub p_two_tailed: f64,
    pub mean_a: f64,
    pub mean_b: f64,
    pub sd_a: f64,
    pub sd_b: f64,
    pub n_a: usize,
    pub n_b: usize,
}

pub fn welch_t_from_summary(a: SampleSummary, b: SampleSummary) -> Result<TTestResult> {
    if a.n < 2 || b.n < 2 {
        return Err(Error::Precondition(format!(
            "each sample needs at least 2 observations (got {} and {})",
            a.n, b.n
        )));
    }
    if a.sd < 0.0 || b.sd < 0.0 || !a.sd.is_finite() || !b.sd.is_finite() {
        return Err(Error::Precondition(
            "standard deviations must be finite and non-negative".into(),
        ));
    }
    if a.sd == 0.0 && b.sd == 0.0 {
        return Err(Error::DegenerateVariance);
    }
    let va = a.sd * a.sd / a.n as f64;
    let vb = b.sd * b.sd / b.n as f64;
    let t = (a.mean - b.mean) / (va + vb).sqrt();
    let df = (va + vb).powi(2) / (va * va / (a.n - 1) as f64 + vb * vb / (b.n - 1) as f64);
    Ok(TTestResult {
        t,
        df,
        p_two_tailed: student_t_two_tailed(t, df),
        mean_a: a.mean,
        mean_b: b.mean,
        sd_a: a.sd,
        sd_b: b.sd,
        n_a: a.n,
        n_b: b.n,
    })
}

/// Sample mean and standard deviation (n − 1 denominator).
pub fn summarize(values: &[f64]) -> Result<SampleSummary> {
    let n = values.len();
    if n < 2 {
        return Err(Error::Precondition(format!(
            "a series needs at least 2 scores for a t-test (got {n})"
        )));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Ok(SampleSummary::new(mean, var.sqrt(), n))
}

pub fn welch_t(a: &ScoreSeries, b: &ScoreSeries) -> Result<TTestResult> {
    welch_t_from_summary(summarize(&a.scores)?, summarize(&b.scores)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ln_gamma_known_values() {
        assert_relative_eq!(ln_gamma(1.0), 0.0, epsilon = 1e-13);
        assert_relative_eq!(ln_gamma(5.0), 24f64.ln(), max_relative = 1e-13);
        assert_relative_eq!(ln_gamma(0.5), std::f64::consts::PI.sqrt().ln(), max_relative = 1e-13);
        assert_relative_eq!(ln_gamma(0.1), 2.252_712_651_734_206, max_relative = 1e-12);
    }

    #[test]
    fn incomplete_beta_closed_forms() {
        // I_x(1, 1) = x; I_x(a, 1) = x^a; I_x(1, b) = 1 - (1-x)^b
        for &x in &[0.01, 0.3, 0.5, 0.77, 0.999] {
            assert_relative_eq!(regularized_incomplete_beta(x, 1.0, 1.0), x, max_relative = 1e-9);
            assert_relative_eq!(regularized_incomplete_beta(x, 3.0, 1.0), x.powi(3), max_relative = 1e-9);
            assert_relative_eq!(
                regularized_incomplete_beta(x, 1.0, 4.0),
                1.0 - (1.0 - x).powi(4),
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn t_tail_known_values() {
        // df = 1 is Cauchy: p = 1 - 2 atan(t)/pi
        for &t in &[0.3, 1.0, 4.0] {
            let expect = 1.0 - 2.0 * f64::atan(t) / std::f64::consts::PI;
            assert_relative_eq!(student_t_two_tailed(t, 1.0), expect, max_relative = 1e-9);
        }
        // df = 2: p = 1 - t / sqrt(2 + t^2)
        for &t in &[0.5f64, 2.0, 9.0] {
            let expect = 1.0 - t / (2.0 + t * t).sqrt();
            assert_relative_eq!(student_t_two_tailed(t, 2.0), expect, max_relative = 1e-9);
        }
        assert_eq!(student_t_two_tailed(0.0, 12.0), 1.0);
        assert_eq!(student_t_two_tailed(-3.0, 7.5), student_t_two_tailed(3.0, 7.5));
    }

    #[test]
    fn equal_samples_give_zero_t() {
        let s = SampleSummary::new(0.3, 0.05, 20);
        let r = welch_t_from_summary(s, s).unwrap();
        assert_eq!(r.t, 0.0);
        assert_eq!(r.p_two_tailed, 1.0);
    }

    #[test]
    fn degenerate_and_small_inputs() {
        let z = SampleSummary::new(1.0, 0.0, 5);
        assert!(matches!(welch_t_from_summary(z, z), Err(Error::DegenerateVariance)));
        let tiny = SampleSummary::new(1.0, 1.0, 1);
        assert!(matches!(welch_t_from_summary(tiny, z), Err(Error::Precondition(_))));
        assert!(summarize(&[0.5]).is_err());
    }
}
