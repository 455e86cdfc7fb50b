//! Numerical inversion of Laplace transforms.
//!
//! The default inverter is the unified Euler scheme of Abate and Whitt: a
//! trapezoidal discretization of the Bromwich integral whose alternating tail
//! is accelerated by binomial (Euler) averaging. The fixed Talbot contour is
//! kept as an independent cross-check.
//!
//! Euler averaging cannot accelerate the slowly decaying, non-alternating
//! series produced by a jump away from the evaluation point (a point mass,
//! say). CDF recovery therefore falls back to a damped Fourier series summed
//! with Wynn's ε-algorithm, i.e. a Padé approximant in the Fourier variable,
//! in the manner of de Hoog, Knight and Stokes.

use std::f64::consts::{LN_10, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A Laplace transform that can be evaluated off the real axis.
///
/// Implementations must be analytic for `Re s > 0`; transforms of probability
/// laws satisfy `|L(s)| ≤ 1` there.
pub trait LaplaceEvaluator: Sync {
    fn eval(&self, s: Complex64) -> Complex64;

    fn eval_real(&self, s: f64) -> f64 {
        self.eval(Complex64::new(s, 0.0)).re
    }
}

impl<F> LaplaceEvaluator for F
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    fn eval(&self, s: Complex64) -> Complex64 {
        self(s)
    }
}

/// Choice of Bromwich-integral discretization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Inverter {
    /// Euler summation with `terms = 2M + 1` transform evaluations.
    Euler { terms: usize },
    /// Fixed Talbot contour with `nodes` evaluations.
    Talbot { nodes: usize },
    /// Damped Fourier series with `terms` coefficients and ε-algorithm
    /// acceleration.
    FourierPade { terms: usize },
}

impl Default for Inverter {
    fn default() -> Self {
        Inverter::Euler { terms: 41 }
    }
}

/// Absolute disagreement tolerated between two Euler orders before the
/// CDF inversion is declared unsettled.
pub const SETTLE_TOL: f64 = 1e-6;

/// Inverts `f` at `t > 0`.
pub fn invert<F: Fn(Complex64) -> Complex64>(f: F, t: f64, method: Inverter) -> f64 {
    match method {
        Inverter::Euler { terms } => euler(&f, t, terms.saturating_sub(1) / 2),
        Inverter::Talbot { nodes } => talbot(&f, t, nodes),
        Inverter::FourierPade { terms } => fourier_pade(&f, t, terms),
    }
}

fn euler<F: Fn(Complex64) -> Complex64>(f: &F, t: f64, m: usize) -> f64 {
    let m = m.max(1);
    let weights = euler_weights(m);
    let a = m as f64 * LN_10 / 3.0;
    let sum: f64 = weights
        .iter()
        .enumerate()
        .map(|(k, &eta)| eta * f(Complex64::new(a, PI * k as f64) / t).re)
        .sum();
    10f64.powf(m as f64 / 3.0) / t * sum
}

fn euler_weights(m: usize) -> Vec<f64> {
    let mut xi = vec![1.0; 2 * m + 1];
    xi[0] = 0.5;
    let scale = 0.5f64.powi(m as i32);
    xi[2 * m] = scale;
    let mut binom = 1.0;
    for k in 1..m {
        binom *= (m - k + 1) as f64 / k as f64;
        xi[2 * m - k] = xi[2 * m - k + 1] + scale * binom;
    }
    xi.iter()
        .enumerate()
        .map(|(k, &x)| if k % 2 == 0 { x } else { -x })
        .collect()
}

fn talbot<F: Fn(Complex64) -> Complex64>(f: &F, t: f64, m: usize) -> f64 {
    let m = m.max(2);
    let mf = m as f64;
    let d0 = 2.0 * mf / 5.0;
    let mut sum = 0.5 * d0.exp() * f(Complex64::new(d0 / t, 0.0)).re;
    for k in 1..m {
        let th = k as f64 * PI / mf;
        let cot = th.cos() / th.sin();
        let delta = Complex64::new(2.0 * k as f64 * PI / 5.0 * cot, 2.0 * k as f64 * PI / 5.0);
        let gamma = Complex64::new(1.0, th * (1.0 + cot * cot) - cot) * delta.exp();
        sum += (gamma * f(delta / t)).re;
    }
    2.0 / (5.0 * t) * sum
}

fn fourier_pade<F: Fn(Complex64) -> Complex64>(f: &F, t: f64, terms: usize) -> f64 {
    // Period 2T with T = t; damping puts the aliasing error near 1e-12.
    let period = t;
    let a = -(1e-12f64).ln() / (2.0 * period);
    let z = Complex64::from_polar(1.0, PI * t / period);
    let mut partial = Vec::with_capacity(terms.max(3));
    let mut acc = f(Complex64::new(a, 0.0)) * 0.5;
    partial.push(acc);
    let mut zk = Complex64::new(1.0, 0.0);
    for k in 1..terms.max(3) {
        zk *= z;
        acc += f(Complex64::new(a, PI * k as f64 / period)) * zk;
        partial.push(acc);
    }
    (a * t).exp() / period * wynn_epsilon(&partial).re
}

/// Limit estimate of a sequence by Wynn's ε-algorithm (last even column).
fn wynn_epsilon(seq: &[Complex64]) -> Complex64 {
    let mut prev = vec![Complex64::new(0.0, 0.0); seq.len() + 1];
    let mut cur = seq.to_vec();
    let mut best = *seq.last().expect("nonempty sequence");
    let mut column = 0;
    while cur.len() > 1 {
        column += 1;
        let next: Vec<Complex64> = (0..cur.len() - 1)
            .map(|j| {
                let mut d = cur[j + 1] - cur[j];
                if d.norm() == 0.0 {
                    d = Complex64::new(1e-300, 0.0);
                }
                prev[j + 1] + 1.0 / d
            })
            .collect();
        prev = cur;
        cur = next;
        if column % 2 == 0 {
            let candidate = *cur.last().expect("nonempty column");
            if candidate.is_finite() {
                best = candidate;
            }
        }
    }
    best
}

/// CDF at `theta` of a nonnegative random variable with transform `l`,
/// recovered by inverting `L(s)/s`.
///
/// `terms` is the Euler term count. A second inversion with four fewer terms
/// must agree within [`SETTLE_TOL`]; if it does not, the Padé-accelerated
/// Fourier series is tried under the same rule, and failing both the sum is
/// reported as not settled. The result is clamped to `[0, 1]`.
pub fn inverse_laplace_cdf<L: LaplaceEvaluator + ?Sized>(l: &L, theta: f64, terms: usize) -> Result<f64> {
    if !(theta > 0.0) || !theta.is_finite() {
        return Err(Error::Domain {
            function: "inverse_laplace_cdf",
            detail: format!("theta must be positive and finite, got {theta}"),
        });
    }
    if terms < 9 {
        return Err(Error::Domain {
            function: "inverse_laplace_cdf",
            detail: format!("need at least 9 terms, got {terms}"),
        });
    }
    let g = |s: Complex64| l.eval(s) / s;
    let fine = invert(g, theta, Inverter::Euler { terms });
    let coarse = invert(g, theta, Inverter::Euler { terms: terms - 4 });
    if fine.is_finite() && (fine - coarse).abs() <= SETTLE_TOL {
        return Ok(fine.clamp(0.0, 1.0));
    }
    let fine = invert(g, theta, Inverter::FourierPade { terms });
    let coarse = invert(g, theta, Inverter::FourierPade { terms: terms - 4 });
    if fine.is_finite() && (fine - coarse).abs() <= SETTLE_TOL {
        return Ok(fine.clamp(0.0, 1.0));
    }
    Err(Error::Inversion {
        t: theta,
        a: fine,
        b: coarse,
    })
}
