//! Adaptive Gauss–Kronrod quadrature.
//!
//! A 21-point Kronrod rule with its embedded 10-point Gauss rule gives the
//! local error estimate. Subintervals are refined worst-first until the summed
//! estimate meets the requested tolerance. Semi-infinite ranges are mapped onto
//! a finite one with `t = a + c·u/(1-u)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_931_896_941,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the odd-indexed Kronrod abscissae.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Tolerances for adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Tail mass below which callers with an explicit tail bound may truncate
    /// a semi-infinite domain.
    pub truncation_threshold: f64,
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec {
            abs_tol: 1e-13,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
            truncation_threshold: 1e-12,
        }
    }
}

impl QuadSpec {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        QuadSpec {
            abs_tol,
            rel_tol,
            ..QuadSpec::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let in_unit = |v: f64| v > 0.0 && v < 1.0;
        if !in_unit(self.abs_tol) {
            return Err(Error::invalid("abs_tol", "must lie in (0, 1)"));
        }
        if !in_unit(self.rel_tol) {
            return Err(Error::invalid("rel_tol", "must lie in (0, 1)"));
        }
        if self.max_subdivisions < 8 {
            return Err(Error::invalid("max_subdivisions", "must be at least 8"));
        }
        if !(self.truncation_threshold > 0.0) {
            return Err(Error::invalid("truncation_threshold", "must be positive"));
        }
        Ok(())
    }
}

/// Integral estimate with its error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[10] * fc;
    let mut gauss = 0.0;
    let mut finite = fc.is_finite();
    for j in 0..10 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        finite &= pair.is_finite();
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    if !finite {
        return Err(Error::Domain {
            function: "quadrature",
            detail: format!("integrand not finite on [{a:e}, {b:e}]"),
        });
    }
    Ok((kronrod * h, ((kronrod - gauss) * h).abs()))
}

/// Integrates `f` over the finite interval `[a, b]`.
pub fn quad<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, spec: &QuadSpec) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult { value: 0.0, error: 0.0 });
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain {
            function: "quad",
            detail: "interval endpoints must be finite".into(),
        });
    }
    let (value, error) = gk21(&mut f, a, b)?;
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    let mut pieces = 1;
    loop {
        if total_err <= spec.abs_tol.max(spec.rel_tol * total.abs()) {
            break;
        }
        if pieces >= spec.max_subdivisions {
            return Err(Error::Quadrature {
                value: total,
                error: total_err,
            });
        }
        let worst = heap.pop().expect("heap holds at least one segment");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval cannot be split further in floating point.
            return Err(Error::Quadrature {
                value: total,
                error: total_err,
            });
        }
        let (v1, e1) = gk21(&mut f, worst.a, mid)?;
        let (v2, e2) = gk21(&mut f, mid, worst.b)?;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2 });
        pieces += 1;
    }
    // Resum to shed the drift of the incremental updates.
    let (value, error) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
    Ok(QuadResult { value, error })
}

/// Integrates `f` over `(a, ∞)` using `t = a + scale·u/(1-u)`.
///
/// `scale` should be of the order of the integrand's decay length.
pub fn quad_half_line<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    scale: f64,
    spec: &QuadSpec,
) -> Result<QuadResult> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::Domain {
            function: "quad_half_line",
            detail: format!("scale must be positive and finite, got {scale}"),
        });
    }
    quad(
        |u: f64| {
            let w = 1.0 - u;
            let t = a + scale * u / w;
            let jac = scale / (w * w);
            if t.is_infinite() {
                return 0.0;
            }
            let v = f(t);
            if v == 0.0 {
                0.0
            } else {
                v * jac
            }
        },
        0.0,
        1.0,
        spec,
    )
}

/// Integrates `f` over `(0, ∞)`.
pub fn quad_semi_infinite<F: FnMut(f64) -> f64>(f: F, spec: &QuadSpec) -> Result<QuadResult> {
    quad_half_line(f, 0.0, 1.0, spec)
}
