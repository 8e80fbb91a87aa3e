//! Average FER on the quasi-static Rayleigh channel: the exact fading average
//! of an AWGN error curve, the threshold approximation
//! `1 - exp(-gamma_w / avg_snr)`, and normalized detection-probability curves.

use std::io::Write;

use crate::channel::{fading_snr_pdf, Snr};
use crate::error::{Error, Result};
use crate::montecarlo::{FerCurve, FerPoint};
use crate::numerics::{integrate_finite, integrate_semi_infinite, QuadratureConfig};
use crate::threshold::{waterfall_from_fer_samples, FerSamples, WaterfallThreshold};

/// Upper integration limit of [`exact_fer`] in units of the average SNR; the
/// fading density beyond it carries `exp(-40)` of probability.
pub const FADING_SPAN: f64 = 40.0;

/// Threshold approximation of the average FER.
pub fn approx_fer(avg_snr: Snr, threshold: &WaterfallThreshold) -> f64 {
    -(-threshold.gamma_w.linear() / avg_snr.linear()).exp_m1()
}

/// Average of the AWGN error probability `pe` over the fading density.
pub fn exact_fer<F>(pe: F, avg_snr: Snr, cfg: &QuadratureConfig) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let avg = avg_snr.linear();
    if !(avg > 0.0) || !avg.is_finite() {
        return Err(Error::InvalidSnr(avg));
    }
    let integrand = |g: f64| {
        let snr = Snr::from_linear(g).expect("nonnegative");
        pe(g) * fading_snr_pdf(snr, avg_snr)
    };
    // Features of pe live on the absolute SNR scale while the density spreads
    // over `avg`; octave breakpoints keep both resolved.
    let upper = FADING_SPAN * avg;
    let mut total = 0.0;
    let mut lo = 0.0;
    let mut hi = (upper / 1024.0).min(1e-3);
    loop {
        total += integrate_finite(integrand, lo, hi, cfg)?;
        if hi >= upper {
            break;
        }
        lo = hi;
        hi = (2.0 * hi).min(upper);
    }
    Ok(total.clamp(0.0, 1.0))
}

/// Result of [`exact_fer_from_samples`]; `tail` is the part contributed by the
/// extrapolation beyond the last sample and is already included in `fer`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampledFer {
    pub fer: f64,
    pub tail: f64,
}

/// `1 - exp(-x) (1 + x)`, accurate for small `x`.
fn one_minus_exp_poly(x: f64) -> f64 {
    if x < 1e-3 {
        let x2 = x * x;
        x2 * (0.5 - x / 3.0 + x2 / 8.0 - x2 * x / 30.0)
    } else {
        -(-x).exp_m1() - x * (-x).exp()
    }
}

/// Fading average of a piecewise model of sampled AWGN FER values:
/// `pe = 1` below the first sample, log-linear between samples (linear where a
/// sample is zero) and `pe_N (g_N/g) exp(-(g - g_N))` beyond the last sample.
///
/// Segments are integrated in closed form; the tail uses quadrature.
pub fn exact_fer_from_samples<S: FerSamples + ?Sized>(
    curve: &S,
    avg_snr: Snr,
) -> Result<SampledFer> {
    let n = curve.len();
    if n == 0 {
        return Err(Error::EmptyCurve);
    }
    let avg = avg_snr.linear();
    if !(avg > 0.0) || !avg.is_finite() {
        return Err(Error::InvalidSnr(avg));
    }

    let first = curve.sample(0);
    let mut total = -(-first.snr.linear() / avg).exp_m1();
    let mut prev = first;
    for i in 1..n {
        let p = curve.sample(i);
        total += segment_integral(&prev, &p, avg);
        prev = p;
    }

    let (g_n, pe_n) = (prev.snr.linear(), prev.fer);
    let tail = if pe_n > 0.0 && g_n > 0.0 {
        let rate = 1.0 + 1.0 / avg;
        let scale = pe_n * g_n * (-g_n / avg).exp() / avg;
        integrate_semi_infinite(
            |g: f64| {
                let e = (-(g - g_n) * rate).exp();
                if e == 0.0 {
                    0.0
                } else {
                    scale * e / g
                }
            },
            g_n,
            &QuadratureConfig::default(),
        )?
    } else {
        0.0
    };
    Ok(SampledFer {
        fer: (total + tail).clamp(0.0, 1.0),
        tail,
    })
}

fn segment_integral(a: &FerPoint, b: &FerPoint, avg: f64) -> f64 {
    let (g0, g1) = (a.snr.linear(), b.snr.linear());
    let h = g1 - g0;
    if h <= 0.0 {
        return 0.0;
    }
    let (p0, p1) = (a.fer, b.fer);
    let weight = (-g0 / avg).exp();
    if p0 == 0.0 && p1 == 0.0 {
        0.0
    } else if p0 == 0.0 || p1 == 0.0 {
        let m = (p1 - p0) / h;
        let x = h / avg;
        weight * (p0 * -(-x).exp_m1() + m * avg * one_minus_exp_poly(x))
    } else {
        let (l0, l1) = (p0.ln(), p1.ln());
        let c = (l1 - l0) / h - 1.0 / avg;
        let ch = c * h;
        let integral = if ch.abs() < 1e-12 { h } else { ch.exp_m1() / c };
        (l0 - g0 / avg).exp() / avg * integral
    }
}

/// Approximate FER at every average SNR from one sample-based threshold.
pub fn approx_fer_curve<S: FerSamples + ?Sized>(curve: &S, avg_snrs: &[Snr]) -> Result<Vec<f64>> {
    let threshold = waterfall_from_fer_samples(curve)?;
    Ok(avg_snrs
        .iter()
        .map(|&a| approx_fer(a, &threshold))
        .collect())
}

/// Exact sampled FER at every average SNR.
pub fn exact_fer_curve_from_samples<S: FerSamples + ?Sized>(
    curve: &S,
    avg_snrs: &[Snr],
) -> Result<Vec<f64>> {
    avg_snrs
        .iter()
        .map(|&a| exact_fer_from_samples(curve, a).map(|r| r.fer))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveSource {
    Analytic,
    MonteCarlo,
}

/// Probability of successful frame detection versus SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionCurve {
    points: Vec<(Snr, f64)>,
    source: CurveSource,
}

impl DetectionCurve {
    pub fn new(points: Vec<(Snr, f64)>, source: CurveSource) -> Result<Self> {
        if points
            .windows(2)
            .any(|w| w[1].0.linear() <= w[0].0.linear())
        {
            return Err(Error::InvalidParameter(
                "detection curve SNRs must be strictly increasing".into(),
            ));
        }
        if let Some((_, p)) = points.iter().find(|(_, p)| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidParameter(format!(
                "detection probability {p} outside [0, 1]"
            )));
        }
        Ok(Self { points, source })
    }

    pub fn analytic<F: Fn(f64) -> f64>(grid: &[Snr], pd: F) -> Result<Self> {
        Self::new(
            grid.iter().map(|&g| (g, pd(g.linear()))).collect(),
            CurveSource::Analytic,
        )
    }

    /// `pd = 1 - fer` at every measured point.
    pub fn from_fer_curve(curve: &FerCurve) -> Result<Self> {
        Self::new(
            curve
                .points()
                .iter()
                .map(|p| (p.snr, 1.0 - p.fer))
                .collect(),
            CurveSource::MonteCarlo,
        )
    }

    pub fn points(&self) -> &[(Snr, f64)] {
        &self.points
    }

    pub fn source(&self) -> CurveSource {
        self.source
    }
}

/// `pd/g^2` and the ideal envelope `1/g^2` on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedCurves {
    pub normalized: Vec<(f64, f64)>,
    pub envelope: Vec<(f64, f64)>,
}

impl NormalizedCurves {
    /// Trapezoid-rule area under the normalized curve.
    pub fn area(&self) -> f64 {
        trapezoid(&self.normalized)
    }

    pub fn envelope_area(&self) -> f64 {
        trapezoid(&self.envelope)
    }
}

fn trapezoid(points: &[(f64, f64)]) -> f64 {
    points
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum()
}

pub fn normalized_detection_curve(curve: &DetectionCurve) -> Result<NormalizedCurves> {
    if curve.points.iter().any(|(g, _)| g.linear() == 0.0) {
        return Err(Error::DegenerateInput(
            "normalized detection curve needs g > 0".into(),
        ));
    }
    let normalized = curve
        .points
        .iter()
        .map(|&(g, p)| (g.linear(), p / (g.linear() * g.linear())))
        .collect();
    let envelope = curve
        .points
        .iter()
        .map(|&(g, _)| (g.linear(), 1.0 / (g.linear() * g.linear())))
        .collect();
    Ok(NormalizedCurves {
        normalized,
        envelope,
    })
}

/// Average SNR (dB) where a decreasing FER curve crosses `level`,
/// interpolating `ln FER` linearly in dB.
pub fn snr_at_fer(curve: &[(Snr, f64)], level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::LevelNotBracketed(level));
    }
    for w in curve.windows(2) {
        let ((s0, f0), (s1, f1)) = (w[0], w[1]);
        if f0 >= level && f1 <= level && f0 > f1 {
            let (x0, x1) = (s0.db(), s1.db());
            let t = if f1 > 0.0 {
                (f0.ln() - level.ln()) / (f0.ln() - f1.ln())
            } else {
                (f0 - level) / (f0 - f1)
            };
            return Ok(x0 + t * (x1 - x0));
        }
        if f0 == level {
            return Ok(s0.db());
        }
    }
    if let Some(&(s, f)) = curve.last() {
        if f == level {
            return Ok(s.db());
        }
    }
    Err(Error::LevelNotBracketed(level))
}

/// Horizontal distance `b - a` in dB between two FER curves at `fer_level`.
pub fn snr_gap_at_fer(
    curve_a: &[(Snr, f64)],
    curve_b: &[(Snr, f64)],
    fer_level: f64,
) -> Result<f64> {
    Ok(snr_at_fer(curve_b, fer_level)? - snr_at_fer(curve_a, fer_level)?)
}

/// `gamma_linear,gamma_db,value` rows preceded by a `# quantity:` comment.
pub fn write_value_csv<W: Write>(mut out: W, quantity: &str, points: &[(f64, f64)]) -> Result<()> {
    writeln!(out, "# quantity: {quantity}")?;
    writeln!(out, "gamma_linear,gamma_db,value")?;
    for &(g, v) in points {
        writeln!(out, "{},{},{}", g, 10.0 * g.log10(), v)?;
    }
    Ok(())
}
