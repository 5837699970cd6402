//! Log-domain accumulation.

/// `ln Σ exp(x_i)`; `-∞` for an empty slice or all-`-∞` input.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Streaming `ln Σ exp`, mergeable in any order.
#[derive(Clone, Copy, Debug)]
pub struct LogSumExp {
    max: f64,
    scaled: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        LogSumExp { max: f64::NEG_INFINITY, scaled: 0.0 }
    }
}

impl LogSumExp {
    pub fn push(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x <= self.max {
            self.scaled += (x - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - x).exp() + 1.0;
            self.max = x;
        }
    }

    pub fn merge(&mut self, other: &LogSumExp) {
        if other.max == f64::NEG_INFINITY {
            return;
        }
        if self.max == f64::NEG_INFINITY {
            *self = *other;
        } else if other.max <= self.max {
            self.scaled += other.scaled * (other.max - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - other.max).exp() + other.scaled;
            self.max = other.max;
        }
    }

    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled.ln()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn handles_large_and_infinite_inputs() {
        let v = log_sum_exp(&[1234.0, 1232.0]);
        assert!((v - (1232.0 + (2f64.exp() + 1.0).ln())).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY, f64::NEG_INFINITY]), f64::NEG_INFINITY);
        assert!((log_sum_exp(&[f64::NEG_INFINITY, 0.0]) - 0.0).abs() < 1e-15);
    }

    #[test]
    fn streaming_matches_batch_and_merges() {
        let xs = [-3.0, 10.0, 0.5, 700.0, -800.0, 699.0];
        let mut acc = LogSumExp::default();
        xs.iter().for_each(|&x| acc.push(x));
        assert!((acc.value() - log_sum_exp(&xs)).abs() < 1e-12);

        let (mut left, mut right) = (LogSumExp::default(), LogSumExp::default());
        xs[..2].iter().for_each(|&x| left.push(x));
        xs[2..].iter().for_each(|&x| right.push(x));
        right.merge(&left);
        assert!((right.value() - log_sum_exp(&xs)).abs() < 1e-12);
        assert_eq!(LogSumExp::default().value(), f64::NEG_INFINITY);
    }
}
