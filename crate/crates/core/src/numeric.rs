//! Compensated-summation helpers shared across the crate.
//!
//! Distance residuals are checked down at 1e-16 stopping tolerances, so
//! squared-distance sums use Neumaier's variant of Kahan summation.

/// Neumaier compensated sum of a sequence of terms.
pub fn kahan_sum(terms: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - s) + t;
        } else {
            comp += (t - s) + sum;
        }
        sum = s;
    }
    sum + comp
}

/// Compensated dot product.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    kahan_sum(a.iter().zip(b).map(|(x, y)| x * y))
}

/// Compensated Euclidean norm.
pub fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_recovers_cancellation() {
        // Plain summation loses the 1.0 here; compensation keeps it.
        let terms = [1e16, 1.0, -1e16];
        assert_eq!(kahan_sum(terms), 1.0);
    }

    #[test]
    fn dot_matches_plain_sum_on_benign_input() {
        let a = [1.0, 2.0, 3.0];
        let b = [4.0, 5.0, 6.0];
        assert_eq!(dot(&a, &b), 32.0);
    }
}
