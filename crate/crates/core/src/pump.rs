//! Pump-ratio envelopes.
//!
//! The dimensionless pump ratio `g(t) = 4 |alpha_0(t) gamma| / (hbar Gamma)`
//! measures pumping against loss; `g = 1` is the critical rate at which
//! photon injection balances decay. Envelopes are evaluated on the scaled
//! time axis `tau = Gamma t`, which is also the unit used for the Gaussian
//! width and center and for sampled data.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PumpError {
    #[error("peak pump ratio must be finite and >= 0, got {0}")]
    InvalidPeak(f64),
    #[error("gaussian width must be finite and > 0, got {0}")]
    InvalidWidth(f64),
    #[error("gaussian center must be finite, got {0}")]
    InvalidCenter(f64),
    #[error("pump phase must be finite, got {0}")]
    InvalidPhase(f64),
    #[error("sampled envelope needs at least one (t, g) pair")]
    EmptySamples,
    #[error("sample times must be strictly increasing (violated at index {0})")]
    NonIncreasingSamples(usize),
    #[error("sample values must be finite and >= 0 (violated at index {0})")]
    InvalidSample(usize),
    #[error("csv: {0}")]
    Csv(String),
}

/// Functional form of the envelope.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum PumpShape {
    /// `g = 0` for `tau < 0`, `g = g0` for `tau >= 0` (step turn-on).
    Constant { g0: f64 },
    /// `g = g0 exp[-(tau - t_center)^2 / (2 sigma^2)]` for all `tau`.
    Gaussian { g0: f64, sigma: f64, t_center: f64 },
    /// Piecewise-linear interpolation of ordered `(tau, g)` pairs with flat
    /// extrapolation outside the sampled range.
    Sampled { samples: Vec<(f64, f64)> },
}

/// Validated, immutable pump envelope. Evaluation is pure and reentrant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PumpEnvelope {
    pub shape: PumpShape,
    /// Pump phase theta in radians (phase of `alpha_0 gamma`).
    pub theta: f64,
}

impl PumpEnvelope {
    pub fn new(shape: PumpShape, theta: f64) -> Result<Self, PumpError> {
        if !theta.is_finite() {
            return Err(PumpError::InvalidPhase(theta));
        }
        match &shape {
            PumpShape::Constant { g0 } => {
                if !g0.is_finite() || *g0 < 0.0 {
                    return Err(PumpError::InvalidPeak(*g0));
                }
            }
            PumpShape::Gaussian { g0, sigma, t_center } => {
                if !g0.is_finite() || *g0 < 0.0 {
                    return Err(PumpError::InvalidPeak(*g0));
                }
                if !sigma.is_finite() || *sigma <= 0.0 {
                    return Err(PumpError::InvalidWidth(*sigma));
                }
                if !t_center.is_finite() {
                    return Err(PumpError::InvalidCenter(*t_center));
                }
            }
            PumpShape::Sampled { samples } => {
                if samples.is_empty() {
                    return Err(PumpError::EmptySamples);
                }
                for (i, (t, g)) in samples.iter().enumerate() {
                    if !t.is_finite() || !g.is_finite() || *g < 0.0 {
                        return Err(PumpError::InvalidSample(i));
                    }
                    if i > 0 && samples[i - 1].0 >= *t {
                        return Err(PumpError::NonIncreasingSamples(i));
                    }
                }
            }
        }
        Ok(Self { shape, theta })
    }

    pub fn constant(g0: f64, theta: f64) -> Result<Self, PumpError> {
        Self::new(PumpShape::Constant { g0 }, theta)
    }

    pub fn gaussian(g0: f64, sigma: f64, t_center: f64, theta: f64) -> Result<Self, PumpError> {
        Self::new(PumpShape::Gaussian { g0, sigma, t_center }, theta)
    }

    pub fn sampled(samples: Vec<(f64, f64)>, theta: f64) -> Result<Self, PumpError> {
        Self::new(PumpShape::Sampled { samples }, theta)
    }

    /// Load a sampled envelope from two-column CSV with header `t,g`.
    pub fn sampled_from_csv<R: std::io::Read>(reader: R, theta: f64) -> Result<Self, PumpError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        {
            let headers = rdr.headers().map_err(|e| PumpError::Csv(e.to_string()))?;
            if headers.len() < 2 || headers[0].trim() != "t" || headers[1].trim() != "g" {
                return Err(PumpError::Csv(format!(
                    "expected header `t,g`, got `{}`",
                    headers.iter().collect::<Vec<_>>().join(",")
                )));
            }
        }
        let mut samples = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| PumpError::Csv(e.to_string()))?;
            let parse = |field: &str| {
                field
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| PumpError::Csv(format!("row {}: {e}", i + 1)))
            };
            samples.push((parse(&rec[0])?, parse(&rec[1])?));
        }
        Self::sampled(samples, theta)
    }

    /// Pump ratio at scaled time `tau = Gamma t`.
    pub fn eval_g(&self, tau: f64) -> f64 {
        match &self.shape {
            PumpShape::Constant { g0 } => {
                if tau >= 0.0 {
                    *g0
                } else {
                    0.0
                }
            }
            PumpShape::Gaussian { g0, sigma, t_center } => {
                let z = (tau - t_center) / sigma;
                g0 * (-0.5 * z * z).exp()
            }
            PumpShape::Sampled { samples } => {
                let first = samples[0];
                let last = samples[samples.len() - 1];
                if tau <= first.0 {
                    return first.1;
                }
                if tau >= last.0 {
                    return last.1;
                }
                // partition_point returns the first index with t > tau
                let hi = samples.partition_point(|(t, _)| *t <= tau);
                let (t0, g0) = samples[hi - 1];
                let (t1, g1) = samples[hi];
                g0 + (g1 - g0) * (tau - t0) / (t1 - t0)
            }
        }
    }

    /// Peak value of the envelope (supremum over `tau >= 0`).
    pub fn peak(&self) -> f64 {
        match &self.shape {
            PumpShape::Constant { g0 } => *g0,
            PumpShape::Gaussian { g0, .. } => *g0,
            PumpShape::Sampled { samples } => {
                samples.iter().map(|(_, g)| *g).fold(0.0, f64::max)
            }
        }
    }
}
