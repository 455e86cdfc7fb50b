//! Laplace transform and mean of the generalized `n`th-incomplete shot noise
//!
//! `I_(n) = Ŵ_n ‖X_n‖^{-α} + Σ_{k>n} W_k ‖X_k‖^{-α}` over a homogeneous PPP of
//! intensity `λ`, where `X_k` is the `k`th nearest point to the origin and
//! `‖X‖^{-α} = |X|^{-α} 1(|X| ≥ 1)`.
//!
//! Conditioning on `x = |X_n|²`, which is Gamma(`n`, `πλ`), gives a
//! one-dimensional integral. The closed form commonly quoted starts that
//! integral at `x = 1` and so drops the event `|X_n| < 1`. On that event the
//! head term is cut off, yet the points beyond the unit circle still
//! contribute. [`shotnoise_laplace`] and [`shotnoise_mean`] include this
//! near-field complement, so `L(0+) = 1` and the mean is the Campbell value.
//! The far-field parts alone are available separately.
//!
//! The head mark enters through `L_Ŵ(s x^{-α/2})`: the head term at squared
//! distance `x` is `Ŵ x^{-α/2}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use statrs::function::gamma::{gamma, gamma_lr, gamma_ur, ln_gamma};

use crate::error::{Error, Result};
use crate::specfun::{interference_integral, quad, upper_incomplete_gamma, LaplaceEvaluator, QuadSpec};

/// Distribution of a nonnegative mark.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MarkLaw {
    Exponential { mean: f64 },
    Gamma { shape: f64, scale: f64 },
    Deterministic { value: f64 },
}

impl MarkLaw {
    pub fn mean(&self) -> f64 {
        match *self {
            MarkLaw::Exponential { mean } => mean,
            MarkLaw::Gamma { shape, scale } => shape * scale,
            MarkLaw::Deterministic { value } => value,
        }
    }

    /// `E[W^p]` for `p > -shape`.
    pub fn moment(&self, p: f64) -> f64 {
        match *self {
            MarkLaw::Exponential { mean } => gamma(1.0 + p) * mean.powf(p),
            MarkLaw::Gamma { shape, scale } => {
                (ln_gamma(shape + p) - ln_gamma(shape)).exp() * scale.powf(p)
            }
            MarkLaw::Deterministic { value } => value.powf(p),
        }
    }

    /// The same law with every value multiplied by `c`.
    pub fn scaled(&self, c: f64) -> MarkLaw {
        match *self {
            MarkLaw::Exponential { mean } => MarkLaw::Exponential { mean: mean * c },
            MarkLaw::Gamma { shape, scale } => MarkLaw::Gamma {
                shape,
                scale: scale * c,
            },
            MarkLaw::Deterministic { value } => MarkLaw::Deterministic { value: value * c },
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            MarkLaw::Exponential { mean } => mean > 0.0,
            MarkLaw::Gamma { shape, scale } => shape > 0.0 && scale > 0.0,
            MarkLaw::Deterministic { value } => value >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid("marks", format!("invalid mark law {self:?}")))
        }
    }
}

impl LaplaceEvaluator for MarkLaw {
    fn eval(&self, s: Complex64) -> Complex64 {
        match *self {
            MarkLaw::Exponential { mean } => 1.0 / (1.0 + s * mean),
            MarkLaw::Gamma { shape, scale } => (1.0 + s * scale).powf(-shape),
            MarkLaw::Deterministic { value } => (-s * value).exp(),
        }
    }

    fn eval_real(&self, s: f64) -> f64 {
        match *self {
            MarkLaw::Exponential { mean } => 1.0 / (1.0 + s * mean),
            MarkLaw::Gamma { shape, scale } => (-shape * (s * scale).ln_1p()).exp(),
            MarkLaw::Deterministic { value } => (-s * value).exp(),
        }
    }
}

/// Marks of the shot noise: `W` for the tail points and `Ŵ` for the head.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkModel {
    pub tail: MarkLaw,
    pub head: MarkLaw,
}

impl MarkModel {
    pub fn new(tail: MarkLaw, head: MarkLaw) -> Self {
        MarkModel { tail, head }
    }

    /// Unit-mean exponential marks for head and tail.
    pub fn unit_exponential() -> Self {
        let e = MarkLaw::Exponential { mean: 1.0 };
        MarkModel { tail: e, head: e }
    }

    pub fn scaled(&self, c: f64) -> Self {
        MarkModel {
            tail: self.tail.scaled(c),
            head: self.head.scaled(c),
        }
    }
}

fn check_inputs(n: u32, lambda: f64, alpha: f64, marks: &MarkModel) -> Result<()> {
    if n < 1 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid("lambda", "must be positive"));
    }
    if !(alpha > 2.0 && alpha.is_finite()) {
        return Err(Error::invalid("alpha", "must exceed 2"));
    }
    marks.tail.validate()?;
    marks.head.validate()
}

fn spec() -> QuadSpec {
    QuadSpec::new(1e-14, 1e-10)
}

/// `J(x, s) = ∫_0^x L_W(s v^{-α/2}) dv`.
fn mark_integral(x: f64, s: f64, alpha: f64, law: &MarkLaw) -> Result<f64> {
    if let MarkLaw::Exponential { mean } = *law {
        // v^{α/2} / (v^{α/2} + s·mean) = 1 - 1/(1 + (v/c)^{α/2}), c = (s·mean)^{2/α}
        let c = (s * mean).powf(2.0 / alpha);
        return Ok(x - c * interference_integral(x / c, alpha)?);
    }
    let f = |v: f64| {
        if v == 0.0 {
            0.0
        } else {
            law.eval_real(s * v.powf(-alpha / 2.0))
        }
    };
    Ok(quad(f, 0.0, x, &spec())?.value)
}

/// `C(s) = s^{2/α} Γ(1 - 2/α) E[W^{2/α}] = ∫_0^∞ (1 - L_W(s v^{-α/2})) dv`.
fn full_exponent(s: f64, alpha: f64, law: &MarkLaw) -> f64 {
    s.powf(2.0 / alpha) * gamma(1.0 - 2.0 / alpha) * law.moment(2.0 / alpha)
}

/// Upper end of the `x`-integral: the Gamma(`n`, `πλ`) tail beyond it is below 1e-10.
fn upper_cutoff(n: u32, p: f64) -> f64 {
    let nf = n as f64;
    let mut x = (nf + 10.0 * nf.sqrt() + 30.0) / p;
    while gamma_ur(nf, p * x) > 1e-10 {
        x *= 1.5;
    }
    x
}

/// The contribution of `|X_n| ≥ 1` to `E[e^{-s I_(n)}]`.
pub fn shotnoise_laplace_far_field(
    n: u32,
    s: f64,
    lambda: f64,
    alpha: f64,
    marks: &MarkModel,
) -> Result<f64> {
    check_inputs(n, lambda, alpha, marks)?;
    if !(s > 0.0) {
        return Err(Error::invalid("s", "must be positive"));
    }
    let p = PI * lambda;
    let c = full_exponent(s, alpha, &marks.tail);
    let log_norm = n as f64 * p.ln() - ln_gamma(n as f64);
    let mut failure = None;
    let integrand = |x: f64| {
        let j = match mark_integral(x, s, alpha, &marks.tail) {
            Ok(j) => j,
            Err(e) => {
                failure.get_or_insert(e);
                return 0.0;
            }
        };
        let head = marks.head.eval_real(s * x.powf(-alpha / 2.0));
        head * (log_norm + (n as f64 - 1.0) * x.ln() - p * (c + j)).exp()
    };
    let hi = upper_cutoff(n, p);
    let value = quad(integrand, 1.0, hi, &spec())?.value;
    match failure {
        Some(e) => Err(e),
        None => Ok(value),
    }
}

/// `E[e^{-s I_(n)}]`, including the event that the `n`th point lies inside
/// the unit disk.
pub fn shotnoise_laplace(n: u32, s: f64, lambda: f64, alpha: f64, marks: &MarkModel) -> Result<f64> {
    let far = shotnoise_laplace_far_field(n, s, lambda, alpha, marks)?;
    let p = PI * lambda;
    let inside = gamma_lr(n as f64, p);
    let c = full_exponent(s, alpha, &marks.tail);
    let j1 = mark_integral(1.0, s, alpha, &marks.tail)?;
    Ok((far + inside * (-p * (c - 1.0 + j1)).exp()).clamp(0.0, 1.0))
}

/// `E[I_(n) 1(|X_n| ≥ 1)]`, the closed form that integrates from `x = 1`.
pub fn shotnoise_mean_far_field(n: u32, lambda: f64, alpha: f64, marks: &MarkModel) -> Result<f64> {
    check_inputs(n, lambda, alpha, marks)?;
    let p = PI * lambda;
    let nf = n as f64;
    let (ew, ewh) = (marks.tail.mean(), marks.head.mean());
    let g = upper_incomplete_gamma(nf - alpha / 2.0, p)?;
    let bracket = (ewh - (alpha - 2.0 * nf) * ew / (alpha - 2.0)) * g
        + 2.0 * ew * (-p + (nf - alpha / 2.0) * p.ln()).exp() / (alpha - 2.0);
    Ok((alpha / 2.0 * p.ln() - ln_gamma(nf)).exp() * bracket)
}

/// `E[I_(n)]`: the far-field closed form plus `E[W] P(n, πλ) 2πλ/(α-2)`,
/// the mean of the tail beyond the unit circle when `|X_n| < 1`.
pub fn shotnoise_mean(n: u32, lambda: f64, alpha: f64, marks: &MarkModel) -> Result<f64> {
    let far = shotnoise_mean_far_field(n, lambda, alpha, marks)?;
    let p = PI * lambda;
    Ok(far + marks.tail.mean() * gamma_lr(n as f64, p) * 2.0 * p / (alpha - 2.0))
}

/// Special case `n = 1`, `α = 4`, `W ~ exp(1)`:
/// `πλ√s ∫_{1/√s}^∞ L_Ŵ(1/y²) e^{-πλ√s (y - arctan y + π/2)} dy` plus the
/// near-field complement `(1 - e^{-πλ}) e^{-πλ√s arctan(√s)}`.
pub fn shotnoise_laplace_alpha4_exponential(s: f64, lambda: f64, head: &MarkLaw) -> Result<f64> {
    if !(s > 0.0 && lambda > 0.0) {
        return Err(Error::invalid("s, lambda", "must be positive"));
    }
    let p = PI * lambda;
    let rs = s.sqrt();
    let k = p * rs;
    let f = |y: f64| head.eval_real(1.0 / (y * y)) * (-k * (y - y.atan() + PI / 2.0)).exp();
    let lo = 1.0 / rs;
    let hi = lo + (40.0 + 10.0 / k) / k;
    let far = k * quad(f, lo, hi, &spec())?.value;
    let near = -(-p).exp_m1() * (-k * rs.atan()).exp();
    Ok(far + near)
}

/// Expressions exactly as they are commonly printed, kept so the tests can
/// show which of them a direct simulation supports.
pub mod as_printed {
    use super::*;

    /// Far-field transform with the head-mark argument `s^{-α/2} x`.
    pub fn laplace_head_argument(n: u32, s: f64, lambda: f64, alpha: f64, marks: &MarkModel) -> Result<f64> {
        check_inputs(n, lambda, alpha, marks)?;
        let p = PI * lambda;
        let c = full_exponent(s, alpha, &marks.tail);
        let log_norm = n as f64 * p.ln() - ln_gamma(n as f64);
        let integrand = |x: f64| {
            let j = mark_integral(x, s, alpha, &marks.tail).unwrap_or(f64::NAN);
            let head = marks.head.eval_real(s.powf(-alpha / 2.0) * x);
            head * (log_norm + (n as f64 - 1.0) * x.ln() - p * (c + j)).exp()
        };
        Ok(quad(integrand, 1.0, upper_cutoff(n, p), &spec())?.value)
    }

    /// `πλ√s ∫_1^∞ L_Ŵ(y) e^{-πλ√s (y - arctan y + π/2)} dy`.
    pub fn laplace_alpha4_exponential(s: f64, lambda: f64, head: &MarkLaw) -> Result<f64> {
        let k = PI * lambda * s.sqrt();
        let f = |y: f64| head.eval_real(y) * (-k * (y - y.atan() + PI / 2.0)).exp();
        Ok(k * quad(f, 1.0, 1.0 + (40.0 + 10.0 / k) / k, &spec())?.value)
    }

    /// `(πλ/2) e^{-πλ}` for `n = 1`, `α = 4` and unit-mean marks.
    pub fn mean_alpha4_unit_marks(lambda: f64) -> f64 {
        let p = PI * lambda;
        0.5 * p * (-p).exp()
    }
}
