//! `∫_0^x dt / (1 + t^{α/2})` and its complement.
//!
//! With `b = α/2` and `y = x^b / (1 + x^b)` the integral equals
//! `(1/b) B(y; 1/b, 1 - 1/b)`, i.e. the full value `(2π/α)/sin(2π/α)` times a
//! regularized incomplete beta. Whichever of the head and the tail is smaller
//! is computed directly so both keep full relative accuracy.

use std::f64::consts::PI;

use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 2.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            function: "interference_integral",
            detail: format!("path-loss exponent must exceed 2, got {alpha}"),
        })
    }
}

/// `∫_0^∞ dt / (1 + t^{α/2}) = (2π/α) / sin(2π/α)`.
pub fn interference_constant(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let z = 2.0 * PI / alpha;
    Ok(z / z.sin())
}

/// `∫_0^x dt / (1 + t^{α/2})`; `x = ∞` gives [`interference_constant`].
pub fn interference_integral(x: f64, alpha: f64) -> Result<f64> {
    let total = interference_constant(alpha)?;
    if !(x >= 0.0) {
        return Err(Error::Domain {
            function: "interference_integral",
            detail: format!("upper limit must be nonnegative, got {x}"),
        });
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(total);
    }
    if alpha == 4.0 {
        return Ok(x.atan());
    }
    if x <= 1.0 {
        Ok(head(x, alpha, total))
    } else {
        Ok(total - tail(x, alpha, total))
    }
}

/// `∫_x^∞ dt / (1 + t^{α/2})`, accurate also when it is tiny.
pub fn interference_tail(x: f64, alpha: f64) -> Result<f64> {
    let total = interference_constant(alpha)?;
    if !(x >= 0.0) {
        return Err(Error::Domain {
            function: "interference_tail",
            detail: format!("lower limit must be nonnegative, got {x}"),
        });
    }
    if x == 0.0 {
        return Ok(total);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    if alpha == 4.0 {
        // π/2 - arctan(x) = arctan(1/x)
        return Ok((1.0 / x).atan());
    }
    if x <= 1.0 {
        Ok(total - head(x, alpha, total))
    } else {
        Ok(tail(x, alpha, total))
    }
}

fn head(x: f64, alpha: f64, total: f64) -> f64 {
    let b = alpha / 2.0;
    let xb = x.powf(b);
    let y = xb / (1.0 + xb);
    total * beta_reg(1.0 / b, 1.0 - 1.0 / b, y)
}

fn tail(x: f64, alpha: f64, total: f64) -> f64 {
    let b = alpha / 2.0;
    let z = 1.0 / (1.0 + x.powf(b));
    total * beta_reg(1.0 - 1.0 / b, 1.0 / b, z)
}
