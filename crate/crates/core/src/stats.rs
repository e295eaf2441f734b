//! Summary statistics for repeated trials.

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

pub fn mean(samples: &[f64]) -> f64 {
    samples.iter().sum::<f64>() / samples.len() as f64
}

/// Sample standard deviation (n - 1 denominator); zero for a single sample.
pub fn std_dev(samples: &[f64]) -> f64 {
    let n = samples.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(samples);
    let ss: f64 = samples.iter().map(|x| (x - m).powi(2)).sum();
    (ss / (n - 1) as f64).sqrt()
}

/// Two-sided Student-t confidence interval for the mean.
///
/// A single sample yields the degenerate interval `(x, x)`.
pub fn confidence_interval(samples: &[f64], level: f64) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(Error::contract("confidence interval of an empty sample"));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::contract(format!("confidence level {level} not in (0, 1)")));
    }
    let m = mean(samples);
    let n = samples.len();
    if n == 1 {
        return Ok((m, m));
    }
    let s = std_dev(samples);
    if s == 0.0 {
        return Ok((m, m));
    }
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .expect("degrees of freedom are positive")
        .inverse_cdf(1.0 - (1.0 - level) / 2.0);
    let half = t * s / (n as f64).sqrt();
    Ok((m - half, m + half))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_samples_have_zero_width() {
        assert_eq!(confidence_interval(&[5.0, 5.0, 5.0], 0.95).unwrap(), (5.0, 5.0));
    }

    #[test]
    fn single_sample_is_degenerate() {
        assert_eq!(confidence_interval(&[3.0], 0.95).unwrap(), (3.0, 3.0));
    }

    #[test]
    fn two_samples_use_t_with_one_dof() {
        // t(0.975, 1) = 12.706; s = 7.0711; half-width = 12.706 * 7.0711 / sqrt(2).
        let (lo, hi) = confidence_interval(&[0.0, 10.0], 0.95).unwrap();
        assert!((lo - -58.53).abs() < 0.01, "{lo}");
        assert!((hi - 68.53).abs() < 0.01, "{hi}");
    }

    #[test]
    fn empty_input_is_rejected() {
        assert!(confidence_interval(&[], 0.95).is_err());
    }

    #[test]
    fn interval_brackets_mean() {
        let xs = [1.0, 4.0, 2.5, 8.0, -3.0];
        let (lo, hi) = confidence_interval(&xs, 0.95).unwrap();
        let m = mean(&xs);
        assert!(lo < m && m < hi);
    }
}
