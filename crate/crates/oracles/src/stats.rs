//! Binomial confidence checks for Monte Carlo estimates.

/// Standard deviation of the empirical frequency of an event of probability
/// `p` over `n` independent trials.
pub fn binomial_sigma(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Whether `observed` lies within `k` binomial standard deviations of `p`.
/// For `p` in `{0, 1}` the estimate must be exact.
pub fn within_sigmas(observed: f64, p: f64, n: u64, k: f64) -> bool {
    let sigma = binomial_sigma(p, n);
    (observed - p).abs() <= k * sigma + 1e-15
}

/// `C(n, k)` as a float.
pub fn choose(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Expectation of the projection onto strings with exactly `m` ones in a
/// product of `n` copies, where each copy puts weight `p1` on one and `p0`
/// on zero. Summed term by term over all `2^n` strings.
pub fn string_sum(n: u32, m: u32, p1: f64, p0: f64) -> f64 {
    let mut total = 0.0;
    for s in 0u64..(1u64 << n) {
        if s.count_ones() != m {
            continue;
        }
        let mut w = 1.0;
        for bit in 0..n {
            w *= if s & (1 << bit) != 0 { p1 } else { p0 };
        }
        total += w;
    }
    total
}
