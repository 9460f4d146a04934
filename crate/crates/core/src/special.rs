//! Log-space factorials and binomials.
//!
//! Factorials up to 170! fit in an `f64`; their logarithms are tabulated
//! from the running product. Larger arguments use the Stirling series for
//! `ln Γ(n + 1)`, whose truncation error at n > 170 is far below one ulp.

use std::f64::consts::PI;
use std::sync::OnceLock;

const TABLE_LIMIT: usize = 170;

fn small_table() -> &'static [f64; TABLE_LIMIT + 1] {
    static TABLE: OnceLock<[f64; TABLE_LIMIT + 1]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = [0.0; TABLE_LIMIT + 1];
        let mut product = 1.0f64;
        for (k, slot) in table.iter_mut().enumerate().skip(1) {
            product *= k as f64;
            *slot = product.ln();
        }
        table
    })
}

fn stirling(n: f64) -> f64 {
    let inv = 1.0 / n;
    let inv2 = inv * inv;
    let series = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
    n * n.ln() - n + 0.5 * (2.0 * PI * n).ln() + series
}

/// `ln(n!)`.
pub fn ln_factorial(n: u64) -> f64 {
    if n as usize <= TABLE_LIMIT {
        small_table()[n as usize]
    } else {
        stirling(n as f64)
    }
}

/// `ln C(n, k)`; `-inf` when `k > n`.
pub fn ln_choose(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Precomputed `ln(k!)` for `k = 0..=max`, for hot loops that evaluate many
/// binomials over the same population.
#[derive(Debug, Clone)]
pub struct LnFactorialTable {
    values: Vec<f64>,
}

impl LnFactorialTable {
    pub fn new(max: u64) -> Self {
        Self {
            values: (0..=max).map(ln_factorial).collect(),
        }
    }

    pub fn max(&self) -> u64 {
        self.values.len() as u64 - 1
    }

    #[inline]
    pub fn get(&self, n: u64) -> f64 {
        self.values[n as usize]
    }

    #[inline]
    pub fn ln_choose(&self, n: u64, k: u64) -> f64 {
        if k > n {
            return f64::NEG_INFINITY;
        }
        self.get(n) - self.get(k) - self.get(n - k)
    }
}

/// Numerically stable `ln(Σ exp(xᵢ))`.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}
