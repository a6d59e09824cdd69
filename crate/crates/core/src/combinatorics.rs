//! Log-domain combinatorics: factorials, binomials and sums of Stirling
//! numbers of the second kind.
//!
//! All values are natural logarithms.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use crate::error::{Error, Result};

const TABLE_LEN: usize = 1024;

/// Largest set size for which [`CombinatoricsCache::shared`] will build a
/// Stirling row. The DP is quadratic in the set size.
pub const DEFAULT_STIRLING_CAP: u64 = 50_000;

fn small_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = Vec::with_capacity(TABLE_LEN);
        // Compensated summation keeps the entries within an ulp or so.
        let (mut acc, mut carry) = (0.0f64, 0.0f64);
        table.push(0.0);
        for k in 1..TABLE_LEN {
            let y = (k as f64).ln() - carry;
            let t = acc + y;
            carry = (t - acc) - y;
            acc = t;
            table.push(acc);
        }
        table
    })
}

/// `ln(n!)`.
///
/// Exact summation below 1024, Stirling series with three correction terms
/// above (truncation error under 1e-24 there).
#[inline]
pub fn log_factorial(n: u64) -> f64 {
    if (n as usize) < TABLE_LEN {
        small_table()[n as usize]
    } else {
        let x = n as f64;
        let inv = 1.0 / x;
        let inv2 = inv * inv;
        x * x.ln() - x
            + 0.5 * (std::f64::consts::TAU * x).ln()
            + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0))
    }
}

/// `ln C(n, k)`; errors when `k > n`.
pub fn log_binomial(n: u64, k: u64) -> Result<f64> {
    if k > n {
        return Err(Error::Domain(format!("binomial C({n}, {k}) with k > n")));
    }
    Ok(ln_choose(n, k))
}

/// Unchecked `ln C(n, k)` for hot loops.
#[inline]
pub(crate) fn ln_choose(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    if k == 0 || k == n {
        0.0
    } else {
        log_factorial(n) - log_factorial(k) - log_factorial(n - k)
    }
}

/// `ln C(x + y, x)`: the log-factorial gain of pooling two counts.
#[inline]
pub(crate) fn pool_gain(x: u64, y: u64) -> f64 {
    if x == 0 || y == 0 {
        0.0
    } else {
        log_factorial(x + y) - log_factorial(x) - log_factorial(y)
    }
}

/// `ln C(total + parts - 1, parts - 1)`: number of ways to spread `total`
/// units over `parts` labelled bins. Zero parts hold nothing and count once.
#[inline]
pub(crate) fn ln_compositions(total: u64, parts: u64) -> f64 {
    if parts == 0 {
        0.0
    } else {
        ln_choose(total + parts - 1, parts - 1)
    }
}

#[inline]
fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Cache of `ln B(n, k)` rows, where `B(n, k) = Σ_{j ≤ k} S(n, j)` counts
/// the partitions of an `n`-set into at most `k` blocks.
///
/// Rows are built on first use by the log-domain recurrence
/// `S(n, k) = k S(n-1, k) + S(n-1, k-1)` and shared behind a lock.
#[derive(Debug)]
pub struct CombinatoricsCache {
    cap: u64,
    rows: RwLock<HashMap<u64, Arc<Vec<f64>>>>,
}

impl CombinatoricsCache {
    pub fn new(cap: u64) -> Self {
        Self { cap, rows: RwLock::new(HashMap::new()) }
    }

    /// Process-wide cache with [`DEFAULT_STIRLING_CAP`].
    pub fn shared() -> &'static CombinatoricsCache {
        static SHARED: OnceLock<CombinatoricsCache> = OnceLock::new();
        SHARED.get_or_init(|| CombinatoricsCache::new(DEFAULT_STIRLING_CAP))
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    /// Row `r` with `r[k] = ln B(n, k)` for `k = 0..=n` (`r[0]` is `-inf`
    /// for `n ≥ 1`).
    pub fn log_bell_row(&self, n: u64) -> Result<Arc<Vec<f64>>> {
        if n > self.cap {
            return Err(Error::Domain(format!(
                "Stirling table for n = {n} exceeds the configured cap {}",
                self.cap
            )));
        }
        if let Some(row) = self.rows.read().expect("stirling cache poisoned").get(&n) {
            return Ok(Arc::clone(row));
        }
        let row = Arc::new(build_log_bell_row(n as usize));
        let mut rows = self.rows.write().expect("stirling cache poisoned");
        Ok(Arc::clone(rows.entry(n).or_insert(row)))
    }

    /// `ln B(n, kmax)`.
    pub fn log_sum_stirling(&self, n: u64, kmax: u64) -> Result<f64> {
        if kmax < 1 {
            return Err(Error::Domain("kmax must be at least 1".into()));
        }
        if kmax > n {
            return Err(Error::Domain(format!("kmax = {kmax} exceeds n = {n}")));
        }
        Ok(self.log_bell_row(n)?[kmax as usize])
    }
}

fn build_log_bell_row(n: usize) -> Vec<f64> {
    // stirling[k] holds ln S(row, k); updated in place from high k to low k.
    let mut stirling = vec![f64::NEG_INFINITY; n + 1];
    stirling[0] = 0.0;
    for row in 1..=n {
        for k in (1..=row).rev() {
            let stay = if k < row { (k as f64).ln() + stirling[k] } else { f64::NEG_INFINITY };
            stirling[k] = log_add_exp(stay, stirling[k - 1]);
        }
        stirling[0] = f64::NEG_INFINITY;
    }
    let mut cumulative = vec![f64::NEG_INFINITY; n + 1];
    if n == 0 {
        cumulative[0] = 0.0;
        return cumulative;
    }
    let mut acc = f64::NEG_INFINITY;
    for k in 1..=n {
        acc = log_add_exp(acc, stirling[k]);
        cumulative[k] = acc;
    }
    cumulative
}

/// `ln B(n, kmax)` through the shared cache.
pub fn log_sum_stirling(n: u64, kmax: u64) -> Result<f64> {
    CombinatoricsCache::shared().log_sum_stirling(n, kmax)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn log_factorial_small_values() {
        assert_eq!(log_factorial(0), 0.0);
        assert_eq!(log_factorial(1), 0.0);
        assert!(close(log_factorial(5), 120f64.ln(), 1e-14));
    }

    #[test]
    fn log_factorial_is_continuous_across_the_table_edge() {
        let below = log_factorial(TABLE_LEN as u64 - 1);
        let above = log_factorial(TABLE_LEN as u64);
        assert!(close(above - below, (TABLE_LEN as f64).ln(), 1e-12));
    }

    #[test]
    fn binomial_domain() {
        assert!(close(log_binomial(5, 2).unwrap(), 10f64.ln(), 1e-14));
        assert_eq!(log_binomial(9, 0).unwrap(), 0.0);
        assert!(matches!(log_binomial(2, 3), Err(Error::Domain(_))));
    }

    #[test]
    fn stirling_sums_small_cases() {
        assert_eq!(log_sum_stirling(1, 1).unwrap(), 0.0);
        assert!(close(log_sum_stirling(3, 2).unwrap(), 4f64.ln(), 1e-12));
        assert!(close(log_sum_stirling(4, 4).unwrap(), 15f64.ln(), 1e-12));
        assert!(matches!(log_sum_stirling(3, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn stirling_cap_fails_loudly() {
        let cache = CombinatoricsCache::new(10);
        assert!(cache.log_sum_stirling(10, 3).is_ok());
        assert!(matches!(cache.log_sum_stirling(11, 3), Err(Error::Domain(_))));
    }

    #[test]
    fn single_block_is_free() {
        for n in 1..40 {
            assert!(log_sum_stirling(n, 1).unwrap().abs() < 1e-12);
        }
    }
}
