//! Small log-domain helpers shared by the modules.

/// Tolerance constants. Exact-path identities use [`IDENTITY_REL`]; anything
/// that touches a sampled weight grid uses [`GRID`].
pub mod tol {
    /// Relative agreement between two exact log-domain evaluations.
    pub const IDENTITY_REL: f64 = 1e-9;
    /// Absolute slack when comparing (log A, log B) against the bounds.
    pub const BOUND: f64 = 1e-9;
    /// Default tolerance for grid-based checks.
    pub const GRID: f64 = 1e-6;
    /// Golden-section termination width on ln t.
    pub const GOLDEN: f64 = 1e-10;
    /// Relative width used to decide that two running-max values are equal.
    pub const TREND_REL: f64 = 1e-9;
}

/// `|a - b| <= rel * max(|a|, |b|, 1)`.
pub fn close(a: f64, b: f64, rel: f64) -> bool {
    if a == b {
        return true;
    }
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

/// log(sum exp(x_i)), skipping -inf entries. Returns -inf for an empty or
/// all -inf input.
pub fn log_sum_exp<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let xs: Vec<f64> = xs.into_iter().filter(|x| *x != f64::NEG_INFINITY).collect();
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY || !m.is_finite() {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// ln(1 - e^{-x}) for x > 0, accurate for small and large x.
pub fn ln_one_minus_exp_neg(x: f64) -> f64 {
    if x > std::f64::consts::LN_2 {
        (-(-x).exp()).ln_1p()
    } else {
        (-(-x).exp_m1()).ln()
    }
}

/// ln(e^x - 1) for x > 0 without overflowing for large x.
pub fn ln_exp_minus_one(x: f64) -> f64 {
    x + ln_one_minus_exp_neg(x)
}

/// Maximize a unimodal `f` on `[a, b]` by golden-section search, stopping when
/// the bracket is narrower than `width`. Returns `(x, f(x))`.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, width: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > width {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Least-squares slope of `ys` against `xs`. `None` with fewer than two
/// points or a degenerate abscissa.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn lse_basics() {
        assert_eq!(log_sum_exp([]), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp([f64::NEG_INFINITY, f64::NEG_INFINITY]), f64::NEG_INFINITY);
        assert!((log_sum_exp([0.0, 0.0]) - 2f64.ln()).abs() < 1e-15);
        assert!((log_sum_exp([1000.0, 1000.0]) - (1000.0 + 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn ln_mu_minus_one() {
        assert!((ln_exp_minus_one(2f64.ln())).abs() < 1e-15);
        assert!((ln_exp_minus_one(3f64.ln()) - 2f64.ln()).abs() < 1e-15);
        assert!((ln_exp_minus_one(1e-8) - (1e-8f64).exp_m1().ln()).abs() < 1e-12);
        assert_eq!(ln_exp_minus_one(800.0), 800.0);
    }

    #[test]
    fn golden_finds_parabola_peak() {
        let (x, fx) = golden_section_max(|x| -(x - 0.3) * (x - 0.3), -1.0, 2.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-9);
        assert!(fx <= 0.0 && fx > -1e-18);
    }

    proptest! {
        #[test]
        fn lse_dominates_max(xs in proptest::collection::vec(-50.0f64..50.0, 1..20)) {
            let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let l = log_sum_exp(xs.iter().copied());
            prop_assert!(l >= m);
            prop_assert!(l <= m + (xs.len() as f64).ln() + 1e-12);
        }

        #[test]
        fn ln_one_minus_exp_neg_matches_naive(x in 1e-3f64..30.0) {
            let naive = (1.0 - (-x).exp()).ln();
            prop_assert!((ln_one_minus_exp_neg(x) - naive).abs() <= 1e-12 * naive.abs().max(1e-300) + 1e-15);
        }
    }
}
