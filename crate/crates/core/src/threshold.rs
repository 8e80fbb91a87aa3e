//! Waterfall threshold of a scheme from its AWGN detection or error behaviour.
//!
//! For a detection probability `pd(g)` the threshold is the reciprocal of the
//! area under `pd(g) / g^2`. When only an error probability is available above
//! a point `g'` where detection first becomes possible, the same quantity is
//! `1/g' - integral of pe(g) / g^2` over `[g', inf)`; on a measured, equally
//! spaced grid the integral becomes a Riemann sum and `g'` the midpoint between
//! the last all-error point and the first point with a success.

use std::fmt;
use std::io::Write;

use crate::channel::Snr;
use crate::error::{Error, Result};
use crate::montecarlo::{FerCurve, FerPoint};
use crate::numerics::{integrate_finite, integrate_semi_infinite, QuadratureConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdMethod {
    ClosedForm,
    ContinuousErrorForm,
    SampleBased,
}

impl fmt::Display for ThresholdMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ThresholdMethod::ClosedForm => "closed_form",
            ThresholdMethod::ContinuousErrorForm => "continuous_error_form",
            ThresholdMethod::SampleBased => "sample_based",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaterfallThreshold {
    pub gamma_w: Snr,
    pub method: ThresholdMethod,
    pub inputs_digest: String,
    /// 1-based index of the first grid point with a successful frame.
    pub k_index: Option<usize>,
}

impl WaterfallThreshold {
    fn new(
        inverse: f64,
        method: ThresholdMethod,
        inputs_digest: String,
        k_index: Option<usize>,
    ) -> Result<Self> {
        if !(inverse > 0.0) || !inverse.is_finite() {
            return Err(Error::DegenerateInput(format!(
                "threshold integral evaluated to {inverse}, expected a positive finite value"
            )));
        }
        Ok(Self {
            gamma_w: Snr::from_linear(1.0 / inverse)?,
            method,
            inputs_digest,
            k_index,
        })
    }

    /// A threshold known from elsewhere, e.g. a decoder convergence threshold.
    pub fn from_snr(gamma_w: Snr, inputs_digest: impl Into<String>) -> Result<Self> {
        Self::new(
            1.0 / gamma_w.linear(),
            ThresholdMethod::ClosedForm,
            inputs_digest.into(),
            None,
        )
    }

    /// `key = value` lines: method, gamma_w_linear, gamma_w_db, k_index.
    pub fn write_record<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "method = {}", self.method)?;
        writeln!(out, "gamma_w_linear = {}", self.gamma_w.linear())?;
        writeln!(
            out,
            "gamma_w_db = {}",
            format_significant(self.gamma_w.db(), 4)
        )?;
        match self.k_index {
            Some(k) => writeln!(out, "k_index = {k}")?,
            None => writeln!(out, "k_index = none")?,
        }
        Ok(())
    }
}

/// Formats `x` with `digits` significant figures.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (digits as i32 - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Threshold from a detection probability: `(integral_0^inf pd(g)/g^2 dg)^-1`.
///
/// The integral is split at `g = 1`; the upper part uses the `1/g` substitution.
/// `pd(g)/g^2` must be integrable at the origin.
pub fn waterfall_from_pd<F>(pd: F, cfg: &QuadratureConfig) -> Result<WaterfallThreshold>
where
    F: Fn(f64) -> f64,
{
    let integrand = |g: f64| {
        let p = pd(g);
        if p == 0.0 {
            0.0
        } else {
            p / (g * g)
        }
    };
    let low = integrate_finite(integrand, 0.0, 1.0, cfg)?;
    let high = integrate_semi_infinite(integrand, 1.0, cfg)?;
    WaterfallThreshold::new(
        low + high,
        ThresholdMethod::ClosedForm,
        "detection probability, adaptive quadrature".into(),
        None,
    )
}

/// Threshold from an error probability with `pe = 1` below `gamma_prime`:
/// `(1/g' - integral_{g'}^inf pe(g)/g^2 dg)^-1`.
pub fn waterfall_from_pe_continuous<F>(
    pe: F,
    gamma_prime: Snr,
    cfg: &QuadratureConfig,
) -> Result<WaterfallThreshold>
where
    F: Fn(f64) -> f64,
{
    let gp = gamma_prime.linear();
    if !(gp > 0.0) || !gp.is_finite() {
        return Err(Error::InvalidSnr(gp));
    }
    let tail = integrate_semi_infinite(
        |g: f64| {
            let p = pe(g);
            if p == 0.0 {
                0.0
            } else {
                p / (g * g)
            }
        },
        gp,
        cfg,
    )?;
    let bracket = 1.0 / gp - tail;
    if bracket <= 2.0 * cfg.tolerance_for(1.0 / gp) {
        return Err(Error::DegenerateInput(format!(
            "1/g' - tail integral = {bracket} is not positive; pe does not decay above g' = {gp}"
        )));
    }
    WaterfallThreshold::new(
        bracket,
        ThresholdMethod::ContinuousErrorForm,
        format!("error probability above g' = {gp}, adaptive quadrature"),
        None,
    )
}

/// Indexed access to FER samples; lets callers observe how often samples are read.
pub trait FerSamples {
    fn len(&self) -> usize;
    fn sample(&self, index: usize) -> FerPoint;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl FerSamples for FerCurve {
    fn len(&self) -> usize {
        self.points().len()
    }

    fn sample(&self, index: usize) -> FerPoint {
        self.points()[index]
    }
}

/// Guard against a grid that stops before the FER has decayed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailCheck {
    /// Require `fer(g_N)/g_N <= ratio * bracket`, which bounds the truncated
    /// tail integral relative to the result.
    Ratio(f64),
    Disabled,
}

impl Default for TailCheck {
    fn default() -> Self {
        TailCheck::Ratio(0.01)
    }
}

/// Sample-based threshold with the default tail check.
pub fn waterfall_from_fer_samples<S: FerSamples + ?Sized>(curve: &S) -> Result<WaterfallThreshold> {
    waterfall_from_fer_samples_with(curve, TailCheck::default())
}

/// Sample-based threshold on an equally spaced grid:
/// `(2/(g_{k-1} + g_k) - sum_{i>=k} fer_i/g_i^2 * dg)^-1`, where `k` is the
/// first point with at least one successful frame. Reads each sample once.
pub fn waterfall_from_fer_samples_with<S: FerSamples + ?Sized>(
    curve: &S,
    tail_check: TailCheck,
) -> Result<WaterfallThreshold> {
    let n = curve.len();
    if n == 0 {
        return Err(Error::EmptyCurve);
    }
    let first = curve.sample(0);
    if !first.saturated() {
        return Err(Error::NoWaterfallRegion);
    }

    let mut prev = first;
    let mut step = None;
    let mut k: Option<usize> = None;
    let mut midpoint_inverse = 0.0;
    let mut weighted_sum = 0.0;
    let mut frames = first.frames;
    for i in 1..n {
        let p = curve.sample(i);
        let d = p.snr.linear() - prev.snr.linear();
        match step {
            None => {
                if !(d > 0.0) {
                    return Err(Error::InvalidParameter(
                        "FER grid must be strictly increasing".into(),
                    ));
                }
                step = Some(d);
            }
            Some(s) => {
                if !(d > 0.0) || ((d - s) / s).abs() >= 1e-9 {
                    return Err(Error::InvalidParameter(format!(
                        "FER grid must be equally spaced in linear SNR (step {s}, found {d})"
                    )));
                }
            }
        }
        if k.is_none() && !p.saturated() {
            k = Some(i);
            midpoint_inverse = 2.0 / (prev.snr.linear() + p.snr.linear());
        }
        if k.is_some() {
            let g = p.snr.linear();
            weighted_sum += p.fer / (g * g);
        }
        frames += p.frames;
        prev = p;
    }
    let Some(k) = k else {
        return Err(Error::NoConvergedRegion);
    };
    let step = step.expect("at least two points when k exists");
    let bracket = midpoint_inverse - weighted_sum * step;
    if !(bracket > 0.0) {
        return Err(Error::DegenerateInput(format!(
            "2/(g_(k-1) + g_k) - sum = {bracket} is not positive; extend the grid to higher SNR"
        )));
    }
    if let TailCheck::Ratio(ratio) = tail_check {
        let tail_bound = prev.fer / prev.snr.linear();
        if tail_bound > ratio * bracket {
            return Err(Error::DegenerateInput(format!(
                "FER at the last grid point ({} at g = {}) leaves a tail bound {tail_bound} above \
                 {ratio} x {bracket}; extend the grid to higher SNR",
                prev.fer,
                prev.snr.linear()
            )));
        }
    }
    WaterfallThreshold::new(
        bracket,
        ThresholdMethod::SampleBased,
        format!("FER samples: N={n}, step={step}, frames={frames}"),
        Some(k + 1),
    )
}
