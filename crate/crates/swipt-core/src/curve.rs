//! Tabulated curves and their CSV form.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};

/// Tolerance on the monotonicity of CDF-valued curves.
pub const CDF_MONOTONE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    AnalyticalLowerBound,
    AnalyticalLimit,
    /// An analytical value that is not a bound, e.g. a mean.
    Analytical,
    Empirical,
}

/// One curve over a grid of abscissae.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveTable {
    pub name: String,
    pub kind: CurveKind,
    pub abscissae: Vec<f64>,
    pub values: Vec<f64>,
    /// 95% confidence half-widths, for empirical curves.
    pub ci_halfwidth: Option<Vec<f64>>,
    /// Whether the values are a CDF in the abscissa.
    pub is_cdf: bool,
}

impl CurveTable {
    pub fn new(name: impl Into<String>, kind: CurveKind, abscissae: Vec<f64>, values: Vec<f64>) -> Self {
        CurveTable {
            name: name.into(),
            kind,
            abscissae,
            values,
            ci_halfwidth: None,
            is_cdf: false,
        }
    }

    pub fn with_ci(mut self, half: Vec<f64>) -> Self {
        self.ci_halfwidth = Some(half);
        self
    }

    pub fn as_cdf(mut self) -> Self {
        self.is_cdf = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Err(Error::invalid(format!("curve `{}`", self.name), reason));
        if self.abscissae.len() != self.values.len() {
            return bad(format!("{} abscissae but {} values", self.abscissae.len(), self.values.len()));
        }
        if let Some(ci) = &self.ci_halfwidth {
            if ci.len() != self.values.len() {
                return bad("confidence half-widths do not match the values".into());
            }
            if ci.iter().any(|h| !(*h >= 0.0)) {
                return bad("confidence half-widths must be nonnegative".into());
            }
        }
        if self.abscissae.windows(2).any(|w| !(w[1] > w[0])) {
            return bad("abscissae must be strictly increasing".into());
        }
        if self.is_cdf {
            if self.values.iter().any(|v| !(-CDF_MONOTONE_TOL..=1.0 + CDF_MONOTONE_TOL).contains(v)) {
                return bad("CDF values must lie in [0, 1]".into());
            }
            if self.values.windows(2).any(|w| w[1] < w[0] - CDF_MONOTONE_TOL) {
                return bad("CDF values must be nondecreasing".into());
            }
        }
        Ok(())
    }
}

/// Curves sharing one abscissa column.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub abscissa: String,
    pub curves: Vec<CurveTable>,
}

impl Table {
    pub fn new(abscissa: impl Into<String>) -> Self {
        Table {
            abscissa: abscissa.into(),
            curves: Vec::new(),
        }
    }

    pub fn push(&mut self, curve: CurveTable) {
        self.curves.push(curve);
    }

    pub fn validate(&self) -> Result<()> {
        let Some(first) = self.curves.first() else {
            return Err(Error::invalid("table", "no curves"));
        };
        for c in &self.curves {
            c.validate()?;
            if c.abscissae != first.abscissae {
                return Err(Error::invalid(
                    format!("curve `{}`", c.name),
                    "abscissae differ from the first curve",
                ));
            }
        }
        Ok(())
    }

    /// Writes one row per abscissa. Empirical curves get a `<name>_ci95`
    /// column next to their values.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        self.validate()?;
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec![self.abscissa.clone()];
        for c in &self.curves {
            header.push(c.name.clone());
            if c.ci_halfwidth.is_some() {
                header.push(format!("{}_ci95", c.name));
            }
        }
        w.write_record(&header).map_err(io_error)?;
        for i in 0..self.curves[0].abscissae.len() {
            let mut row = vec![self.curves[0].abscissae[i].to_string()];
            for c in &self.curves {
                row.push(c.values[i].to_string());
                if let Some(ci) = &c.ci_halfwidth {
                    row.push(ci[i].to_string());
                }
            }
            w.write_record(&row).map_err(io_error)?;
        }
        w.flush().map_err(|e| Error::Simulation(format!("writing CSV: {e}")))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
    }
}

fn io_error(e: csv::Error) -> Error {
    Error::Simulation(format!("writing CSV: {e}"))
}

/// `n` points from `lo` to `hi`, evenly spaced in logarithm.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && n >= 2) {
        return Err(Error::invalid("grid", format!("need 0 < lo < hi and n ≥ 2, got {lo}, {hi}, {n}")));
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..n)
        .map(|i| match i {
            0 => lo,
            _ if i == n - 1 => hi,
            _ => (a + (b - a) * i as f64 / (n - 1) as f64).exp(),
        })
        .collect())
}

/// `n` evenly spaced points from `lo` to `hi`.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(hi > lo && n >= 2) {
        return Err(Error::invalid("grid", format!("need lo < hi and n ≥ 2, got {lo}, {hi}, {n}")));
    }
    Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect())
}
