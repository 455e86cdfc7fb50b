//! Direct draws of the `n`th-incomplete shot noise.

use std::f64::consts::PI;

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use rayon::prelude::*;
use serde::Serialize;

use super::trial_rng;
use crate::error::{Error, Result};
use crate::shot_noise::{MarkLaw, MarkModel};

/// Points summed explicitly beyond the head; the rest is replaced by its
/// conditional mean.
pub const EXPLICIT_TERMS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShotNoiseDraw {
    pub value: f64,
    /// Whether the `n`th point lies outside the unit disk.
    pub head_far: bool,
}

fn sample_mark(law: &MarkLaw, rng: &mut ChaCha8Rng) -> Result<f64> {
    Ok(match *law {
        MarkLaw::Exponential { mean } => {
            let e: f64 = Exp1.sample(rng);
            mean * e
        }
        MarkLaw::Gamma { shape, scale } => Gamma::new(shape, scale)
            .map_err(|e| Error::Simulation(format!("mark law {law:?}: {e}")))?
            .sample(rng),
        MarkLaw::Deterministic { value } => value,
    })
}

/// One draw of `I_(n)` over a PPP of intensity `lambda`.
///
/// Squared distances are generated in increasing order as arrival times of
/// a Poisson process of rate `πλ`. The first `n - 1` points are dropped, the
/// `n`th carries the head mark, and after [`EXPLICIT_TERMS`] further points
/// the remainder is replaced by its mean given the last squared distance
/// `X`, which is `E[W] πλ X^{1-α/2}/(α/2 - 1)`.
pub fn draw_shot_noise(
    n: u32,
    lambda: f64,
    alpha: f64,
    marks: &MarkModel,
    rng: &mut ChaCha8Rng,
) -> Result<ShotNoiseDraw> {
    let p = PI * lambda;
    let half = alpha / 2.0;
    let gain = |x: f64| if x < 1.0 { 0.0 } else { x.powf(-half) };
    let mut x = 0.0;
    for _ in 0..n {
        let e: f64 = Exp1.sample(rng);
        x += e / p;
    }
    let head_far = x >= 1.0;
    let mut value = sample_mark(&marks.head, rng)? * gain(x);
    for _ in 0..EXPLICIT_TERMS {
        let e: f64 = Exp1.sample(rng);
        x += e / p;
        value += sample_mark(&marks.tail, rng)? * gain(x);
    }
    let edge = x.max(1.0);
    value += marks.tail.mean() * p * edge.powf(1.0 - half) / (half - 1.0);
    Ok(ShotNoiseDraw { value, head_far })
}

/// `draws` independent draws; draw `i` uses stream `i` of `seed`.
pub fn sample_shot_noise(
    n: u32,
    lambda: f64,
    alpha: f64,
    marks: &MarkModel,
    draws: usize,
    seed: u64,
) -> Result<Vec<ShotNoiseDraw>> {
    if n < 1 || !(lambda > 0.0) || !(alpha > 2.0) {
        return Err(Error::invalid("shot noise", "need n ≥ 1, λ > 0 and α > 2"));
    }
    if draws == 0 {
        return Err(Error::invalid("draws", "must be positive"));
    }
    (0..draws as u64)
        .into_par_iter()
        .map(|i| draw_shot_noise(n, lambda, alpha, marks, &mut trial_rng(seed, i)))
        .collect()
}
