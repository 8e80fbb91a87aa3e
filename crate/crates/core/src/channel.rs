//! BPSK over AWGN and the quasi-static Rayleigh fading channel.
//!
//! With perfect channel knowledge, coherent detection of a frame faded by `h`
//! is equivalent to detection in real AWGN at SNR `|h|^2 Es/N0`. Quasi-static
//! frames are therefore simulated by drawing that instantaneous SNR and running
//! the AWGN chain at it; no complex coefficient is carried.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// A nonnegative signal-to-noise ratio, stored in linear scale.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Snr(f64);

impl Snr {
    pub fn from_linear(value: f64) -> Result<Self> {
        if value.is_nan() || value < 0.0 {
            return Err(Error::InvalidSnr(value));
        }
        Ok(Self(value))
    }

    pub fn from_db(db: f64) -> Result<Self> {
        if db.is_nan() {
            return Err(Error::InvalidSnr(db));
        }
        Self::from_linear(10f64.powf(db / 10.0))
    }

    pub fn linear(self) -> f64 {
        self.0
    }

    pub fn db(self) -> f64 {
        10.0 * self.0.log10()
    }
}

impl std::fmt::Display for Snr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.4} dB", self.db())
    }
}

/// BPSK symbols `±sqrt(Es)` for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulatedFrame {
    pub symbols: Vec<f64>,
    pub symbol_energy: f64,
}

/// Matched-filter outputs for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedFrame {
    pub samples: Vec<f64>,
    pub instantaneous_snr: Snr,
}

/// Maps bit 0 to `+sqrt(Es)` and bit 1 to `-sqrt(Es)`.
pub fn bpsk_modulate(bits: &[u8], symbol_energy: f64) -> Result<ModulatedFrame> {
    if !(symbol_energy > 0.0) || !symbol_energy.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "symbol energy must be positive, got {symbol_energy}"
        )));
    }
    let amp = symbol_energy.sqrt();
    let symbols = bits
        .iter()
        .map(|&b| if b == 0 { amp } else { -amp })
        .collect();
    Ok(ModulatedFrame {
        symbols,
        symbol_energy,
    })
}

/// Adds real Gaussian noise of variance `Es / (2 snr)` to every symbol.
pub fn add_awgn<R: Rng + ?Sized>(
    frame: &ModulatedFrame,
    snr: Snr,
    rng: &mut R,
) -> Result<ReceivedFrame> {
    if snr.linear() == 0.0 {
        return Err(Error::InvalidSnr(0.0));
    }
    let sigma = (frame.symbol_energy / (2.0 * snr.linear())).sqrt();
    let samples = frame
        .symbols
        .iter()
        .map(|&s| {
            let z: f64 = rng.sample(StandardNormal);
            s + sigma * z
        })
        .collect();
    Ok(ReceivedFrame {
        samples,
        instantaneous_snr: snr,
    })
}

/// Draws an instantaneous SNR from the exponential law with mean `avg_snr`
/// (chi-square with two degrees of freedom under Rayleigh fading).
pub fn sample_instantaneous_snr<R: Rng + ?Sized>(avg_snr: Snr, rng: &mut R) -> Result<Snr> {
    if avg_snr.linear() == 0.0 {
        return Err(Error::InvalidSnr(0.0));
    }
    // (0, 1] so that ln(u) is finite.
    let u = 1.0 - rng.random::<f64>();
    Snr::from_linear(-avg_snr.linear() * u.ln())
}

/// Density of the instantaneous SNR, `exp(-g / avg) / avg` for `g >= 0`.
pub fn fading_snr_pdf(gamma: Snr, avg_snr: Snr) -> f64 {
    let avg = avg_snr.linear();
    (-gamma.linear() / avg).exp() / avg
}
