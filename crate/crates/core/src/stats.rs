//! Order-independent summary statistics for Monte Carlo estimates.

/// Pairwise (cascade) summation; deterministic for a given slice order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 16;
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Sample mean and standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

impl MeanEstimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return MeanEstimate { mean: f64::NAN, stderr: f64::NAN, samples: 0 };
        }
        let mean = pairwise_sum(xs) / n as f64;
        let stderr = if n > 1 {
            let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
            (pairwise_sum(&dev) / (n - 1) as f64 / n as f64).sqrt()
        } else {
            0.0
        };
        MeanEstimate { mean, stderr, samples: n }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_samples_have_zero_stderr() {
        let e = MeanEstimate::from_samples(&[2.5; 40]);
        assert_eq!(e.mean, 2.5);
        assert_eq!(e.stderr, 0.0);
    }

    #[test]
    fn stderr_matches_textbook_formula() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let e = MeanEstimate::from_samples(&xs);
        assert!((e.mean - 2.5).abs() < 1e-15);
        // sample variance 5/3, stderr sqrt(5/12)
        assert!((e.stderr - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn pairwise_sum_agrees_with_naive_sum() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64 * 0.5).collect();
        assert_eq!(pairwise_sum(&xs), 249750.0);
    }
}
