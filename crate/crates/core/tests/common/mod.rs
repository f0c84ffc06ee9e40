//! Reference computations kept independent of the library's quadrature.
#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};

/// Nodes and weights of the `m`-point Gauss–Laguerre rule for
/// `int_0^inf e^{-u} g(u) du`, from the eigen-decomposition of the Jacobi
/// matrix.
pub fn gauss_laguerre(m: usize) -> Vec<(f64, f64)> {
    let mut jacobi = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        jacobi[(i, i)] = (2 * i + 1) as f64;
        if i + 1 < m {
            let b = (i + 1) as f64;
            jacobi[(i, i + 1)] = b;
            jacobi[(i + 1, i)] = b;
        }
    }
    let eig = SymmetricEigen::new(jacobi);
    let mut rule: Vec<(f64, f64)> = (0..m)
        .map(|i| (eig.eigenvalues[i], eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    rule.sort_by(|a, b| a.0.total_cmp(&b.0));
    rule
}

pub fn laguerre_integral(rule: &[(f64, f64)], g: impl Fn(f64) -> f64) -> f64 {
    rule.iter().map(|&(u, w)| w * g(u)).sum()
}

pub fn log2_1p(x: f64) -> f64 {
    (1.0 + x).log2()
}

/// Closed-form analog rate evaluated with Gauss–Laguerre after `u = x - zeta`.
pub fn analog_rate_oracle(n: usize, s: usize) -> f64 {
    let rule = gauss_laguerre(64);
    let zeta = -(s as f64 / n as f64).ln();
    let cond = laguerre_integral(&rule, |u| {
        s as f64 * log2_1p(zeta + u) * (1.0 - (-u).exp()).powi(s as i32 - 1)
    });
    (1.0 - (1.0 - s as f64 / n as f64).powi(n as i32)) * cond
}

/// `E[log2(1 + max of n gains); max >= zeta]` by Gauss–Laguerre, using
/// `d/dx (1 - e^{-x})^n = n e^{-x} (1 - e^{-x})^{n-1}` and `x = zeta + u`.
pub fn order_statistic_rate_oracle(n: usize, zeta: f64) -> f64 {
    let rule = gauss_laguerre(64);
    let nf = n as f64;
    laguerre_integral(&rule, |u| {
        let x = zeta + u;
        nf * (-zeta).exp() * log2_1p(x) * (1.0 - (-x).exp()).powi(n as i32 - 1)
    })
}

/// CDF of the largest of `n` unit-mean exponential gains, conditioned on it
/// exceeding `zeta`.
pub fn conditional_order_statistic_cdf(x: f64, n: usize, zeta: f64) -> f64 {
    if x < zeta {
        return 0.0;
    }
    let f = |t: f64| (1.0 - (-t).exp()).powi(n as i32);
    (f(x) - f(zeta)) / (1.0 - f(zeta))
}

/// CDF of the largest of `s` gains each conditioned on exceeding `zeta`.
pub fn fixed_count_max_cdf(x: f64, s: usize, zeta: f64) -> f64 {
    if x < zeta {
        0.0
    } else {
        (1.0 - (zeta - x).exp()).powi(s as i32)
    }
}

/// Kolmogorov–Smirnov distance between a sample and a continuous CDF.
pub fn ks_distance(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(|a, b| a.total_cmp(b));
    let m = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / m).abs().max(((i + 1) as f64 / m - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Probability that the highest occupied digital interval is `j` (0-based,
/// ascending thresholds `-ln(s(k-j)/n)`), computed from occupancy counts:
/// interval `j` occupied and every interval above it empty.
pub fn highest_interval_probability(n: usize, s: usize, k: usize, j: usize) -> f64 {
    let level = |i: usize| -> f64 {
        if i >= k {
            f64::INFINITY
        } else {
            -((s * (k - i)) as f64 / n as f64).ln()
        }
    };
    let ccdf = |x: f64| if x.is_infinite() { 0.0 } else { (-x).exp() };
    // P(no gain >= level(j+1)) - P(no gain >= level(j)).
    let none_above = |x: f64| (1.0 - ccdf(x)).powi(n as i32);
    none_above(level(j + 1)) - none_above(level(j))
}

/// Composite Simpson rule with `intervals` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let h = (b - a) / intervals as f64;
    let inner: f64 = (1..intervals)
        .map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 })
        .sum();
    (f(a) + f(b) + inner) * h / 3.0
}
