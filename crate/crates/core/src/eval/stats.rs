use statrs::function::erf::erfc;

use crate::error::{Error, Result};

fn ln_falling_ratio(top: usize, count: usize) -> f64 {
    (1..=count)
        .map(|i| ((top + 1 - i) as f64 / i as f64).ln())
        .sum()
}

fn falling_ratio(top: usize, count: usize) -> f64 {
    (1..=count).fold(1.0, |acc, i| acc * (top + 1 - i) as f64 / i as f64)
}

/// Probability of `k` marked elements among `q` drawn without replacement
/// from `n` elements of which `m` are marked.
///
/// Evaluated as
/// `Π_{i≤k}((m+1)/i − 1) · Π_{i≤q−k}((p+1)/i − 1) / Π_{i≤q}((n+1)/i − 1)`
/// with `p = n − m`, directly while the products stay finite and in log
/// domain beyond. Out-of-range `k` gives 0.
pub fn hypergeom_pmf(k: usize, n: usize, m: usize, q: usize) -> f64 {
    if m > n || q > n || k > q || k > m || q - k > n - m {
        return 0.0;
    }
    let p = n - m;
    let (a, b, c) = (falling_ratio(m, k), falling_ratio(p, q - k), falling_ratio(n, q));
    let direct = a * b / c;
    if a.is_finite() && b.is_finite() && c.is_finite() && direct.is_finite() && direct > 0.0 {
        return direct;
    }
    (ln_falling_ratio(m, k) + ln_falling_ratio(p, q - k) - ln_falling_ratio(n, q)).exp()
}

/// `q·m/n`.
pub fn hypergeom_mean(n: usize, m: usize, q: usize) -> f64 {
    (q * m) as f64 / n as f64
}

/// Variance of the hit count, summed over the exact pmf.
pub fn hypergeom_variance(n: usize, m: usize, q: usize) -> f64 {
    let mean = hypergeom_mean(n, m, q);
    (0..=q.min(m))
        .map(|k| (k as f64 - mean).powi(2) * hypergeom_pmf(k, n, m, q))
        .sum()
}

/// Standard normal upper tail `P(Z > z)`.
pub fn normal_upper_tail(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineTest {
    pub null_mean: f64,
    pub null_variance: f64,
    pub z: f64,
    /// One-sided: small when the hits exceed the random expectation.
    pub p_value: f64,
    pub significant: bool,
}

/// z-test of the mean hit count against the exact hypergeometric null.
pub fn random_baseline_test(
    hits: &[f64],
    n: usize,
    m: usize,
    q: usize,
    significance: f64,
) -> Result<BaselineTest> {
    if hits.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: hits.len(),
        });
    }
    if m > n || q > n {
        return Err(Error::InvalidArgument(format!(
            "need m <= N and q <= N, got N={n} m={m} q={q}"
        )));
    }
    let null_mean = hypergeom_mean(n, m, q);
    let null_variance = hypergeom_variance(n, m, q);
    let mean = hits.iter().sum::<f64>() / hits.len() as f64;
    let se = (null_variance / hits.len() as f64).sqrt();
    let z = if se > 0.0 {
        (mean - null_mean) / se
    } else if mean > null_mean {
        f64::INFINITY
    } else if mean < null_mean {
        f64::NEG_INFINITY
    } else {
        0.0
    };
    let p_value = normal_upper_tail(z);
    Ok(BaselineTest {
        null_mean,
        null_variance,
        z,
        p_value,
        significant: p_value < significance,
    })
}

/// Which side of a paired comparison won more often.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    First,
    Second,
    Even,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignTest {
    pub first_wins: usize,
    pub second_wins: usize,
    pub ties: usize,
    /// Two-sided binomial p-value; 1 when every pair tied.
    pub p_value: f64,
    pub direction: Direction,
    /// Set when every pair tied.
    pub incomparable: bool,
    pub significant: bool,
}

fn ln_choose(n: usize, k: usize) -> f64 {
    ln_falling_ratio(n, k)
}

/// `P(X ≤ k)` for `X ~ Bin(n, 1/2)`.
pub fn binomial_half_cdf(k: usize, n: usize) -> f64 {
    let ln_half_n = n as f64 * 0.5f64.ln();
    (0..=k.min(n))
        .map(|i| (ln_choose(n, i) + ln_half_n).exp())
        .sum::<f64>()
        .min(1.0)
}

/// Paired sign test; ties are dropped.
pub fn sign_test(pairs: &[(f64, f64)], significance: f64) -> SignTest {
    let first_wins = pairs.iter().filter(|(a, b)| a > b).count();
    let second_wins = pairs.iter().filter(|(a, b)| a < b).count();
    let ties = pairs.len() - first_wins - second_wins;
    let n = first_wins + second_wins;
    let direction = match first_wins.cmp(&second_wins) {
        std::cmp::Ordering::Greater => Direction::First,
        std::cmp::Ordering::Less => Direction::Second,
        std::cmp::Ordering::Equal => Direction::Even,
    };
    let p_value = if n == 0 {
        1.0
    } else {
        (2.0 * binomial_half_cdf(first_wins.min(second_wins), n)).min(1.0)
    };
    SignTest {
        first_wins,
        second_wins,
        ties,
        p_value,
        direction,
        incomparable: n == 0,
        significant: n > 0 && p_value < significance,
    }
}
