//! Small numeric helpers shared across modules.

/// log(exp(a) + exp(b)) without overflow.
pub fn logsumexp2(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY && b == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if a > b {
        a + (b - a).exp().ln_1p()
    } else {
        b + (a - b).exp().ln_1p()
    }
}

/// log Σ exp(x_k) over a slice, reduced left to right for determinism.
pub fn logsumexp(xs: &[f64]) -> f64 {
    let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = xs.iter().map(|&x| (x - max).exp()).sum();
    max + sum.ln()
}

/// log cosh(x), stable for large |x| where cosh itself overflows.
pub fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn logsumexp_matches_naive_at_small_magnitude() {
        let xs = [0.3f64, -1.2, 2.0];
        let naive = xs.iter().map(|x| x.exp()).sum::<f64>().ln();
        assert_abs_diff_eq!(logsumexp(&xs), naive, epsilon = 1e-14);
        assert_abs_diff_eq!(logsumexp2(0.3, 2.0), (0.3f64.exp() + 2.0f64.exp()).ln(), epsilon = 1e-14);
    }

    #[test]
    fn logsumexp_survives_large_inputs() {
        let v = logsumexp(&[1000.0, 1002.0]);
        assert_abs_diff_eq!(v, 1002.0 + (1.0 + (-2.0f64).exp()).ln(), epsilon = 1e-12);
    }

    #[test]
    fn logsumexp_of_empty_or_neg_inf() {
        assert_eq!(logsumexp(&[]), f64::NEG_INFINITY);
        assert_eq!(logsumexp(&[f64::NEG_INFINITY]), f64::NEG_INFINITY);
        assert_eq!(logsumexp2(f64::NEG_INFINITY, f64::NEG_INFINITY), f64::NEG_INFINITY);
    }

    #[test]
    fn ln_cosh_stable_and_even() {
        assert_abs_diff_eq!(ln_cosh(0.0), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ln_cosh(1.3), 1.3f64.cosh().ln(), epsilon = 1e-14);
        assert_abs_diff_eq!(ln_cosh(-1.3), ln_cosh(1.3), epsilon = 0.0);
        // cosh(800) overflows; ln_cosh must not
        assert_abs_diff_eq!(ln_cosh(800.0), 800.0 - std::f64::consts::LN_2, epsilon = 1e-12);
    }
}
