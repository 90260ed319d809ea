//! Log-factorials and binomial rows.

/// n! for n ≤ 20; every entry is exactly representable in an f64.
const FACTORIALS: [f64; 21] = {
    let mut table = [1.0f64; 21];
    let mut i = 1;
    while i < 21 {
        table[i] = table[i - 1] * i as f64;
        i += 1;
    }
    table
};

/// ln(n!), from the exact table for n ≤ 20 and log-gamma above.
pub fn ln_factorial(n: usize) -> f64 {
    if n < FACTORIALS.len() {
        FACTORIALS[n].ln()
    } else {
        libm::lgamma(n as f64 + 1.0)
    }
}

pub fn ln_choose(n: usize, k: usize) -> f64 {
    debug_assert!(k <= n);
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Rows longer than this are evaluated in log-space.
const DIRECT_ROW_LIMIT: usize = 60;

/// The Binomial(n, p) mass function as a dense row of length n + 1.
pub fn binomial_row(n: usize, p: f64) -> Vec<f64> {
    let mut row = vec![0.0; n + 1];
    if p <= 0.0 {
        row[0] = 1.0;
        return row;
    }
    if p >= 1.0 {
        row[n] = 1.0;
        return row;
    }
    let q = 1.0 - p;
    if n <= DIRECT_ROW_LIMIT {
        let mut coeff = 1.0;
        for (k, slot) in row.iter_mut().enumerate() {
            *slot = coeff * p.powi(k as i32) * q.powi((n - k) as i32);
            coeff = coeff * (n - k) as f64 / (k + 1) as f64;
        }
    } else {
        let (lp, lq) = (p.ln(), (-p).ln_1p());
        for (k, slot) in row.iter_mut().enumerate() {
            *slot = (ln_choose(n, k) + k as f64 * lp + (n - k) as f64 * lq).exp();
        }
    }
    row
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorial_table_matches_lgamma() {
        for n in 0..=20 {
            let direct = FACTORIALS[n].ln();
            let lg = libm::lgamma(n as f64 + 1.0);
            assert!((direct - lg).abs() <= 1e-13 * lg.abs().max(1.0), "n = {n}");
        }
        assert_eq!(FACTORIALS[20], 2_432_902_008_176_640_000.0);
    }

    #[test]
    fn binomial_rows_sum_to_one() {
        for &n in &[0usize, 1, 5, 60, 61, 200] {
            for &p in &[0.0, 0.1, 0.5, 0.93, 1.0] {
                let s: f64 = binomial_row(n, p).iter().sum();
                assert!((s - 1.0).abs() < 1e-12, "n = {n}, p = {p}, sum = {s}");
            }
        }
    }

    #[test]
    fn direct_and_log_rows_agree_at_the_switch() {
        let p = 0.37;
        let direct = binomial_row(60, p);
        let q = 1.0 - p;
        for (k, &d) in direct.iter().enumerate() {
            let l = (ln_choose(60, k) + k as f64 * p.ln() + (60 - k) as f64 * q.ln()).exp();
            assert!((d - l).abs() <= 1e-12 * d.max(1e-300), "k = {k}");
        }
    }
}
