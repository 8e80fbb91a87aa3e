//! Transmission schemes: uncoded BPSK, the (1, 17/15) RSC code and the
//! (1, 5/7, 5/7) turbo code.

pub mod conv;
pub mod interleaver;
pub mod turbo;

use rand::Rng;

use crate::channel::{add_awgn, bpsk_modulate, Snr};
use crate::error::{Error, Result};
use crate::numerics::q_function;

pub use conv::{bcjr_decode, rsc_encode, viterbi_decode, BcjrOutput, ConvCodeSpec, RscCodeword};
pub use interleaver::{make_interleaver, Interleaver};
pub use turbo::{turbo_decode, turbo_encode, TurboCodeSpec, TurboCodeword};

/// LLR magnitudes are clipped here so that noiseless frames stay finite.
pub const LLR_LIMIT: f64 = 1e10;

/// Channel log-likelihood ratios, positive values favouring bit 0.
#[derive(Debug, Clone, PartialEq)]
pub struct LlrFrame(Vec<f64>);

impl LlrFrame {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `4 snr * r / sqrt(Es)` for every matched-filter sample `r`.
    pub fn from_samples(samples: &[f64], snr: Snr, symbol_energy: f64) -> Self {
        let scale = 4.0 * snr.linear() / symbol_energy.sqrt();
        Self(
            samples
                .iter()
                .map(|&r| {
                    let l = scale * r;
                    if l.is_nan() {
                        0.0
                    } else {
                        l.clamp(-LLR_LIMIT, LLR_LIMIT)
                    }
                })
                .collect(),
        )
    }
}

/// Probability that all `frame_length` uncoded BPSK bits are detected
/// correctly at SNR `gamma`: `(1 - Q(sqrt(2 gamma)))^L`.
pub fn uncoded_detection_probability(gamma: Snr, frame_length: usize) -> f64 {
    let q = q_function((2.0 * gamma.linear()).sqrt());
    (frame_length as f64 * (-q).ln_1p()).exp()
}

/// `1 - uncoded_detection_probability`, without cancellation at high SNR.
pub fn uncoded_error_probability(gamma: Snr, frame_length: usize) -> f64 {
    let q = q_function((2.0 * gamma.linear()).sqrt());
    -(frame_length as f64 * (-q).ln_1p()).exp_m1()
}

#[derive(Debug, Clone, PartialEq)]
pub enum SchemeKind {
    Uncoded,
    Convolutional(ConvCodeSpec),
    Turbo(TurboCodeSpec),
}

/// A complete transmission chain with its information frame length.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeSpec {
    kind: SchemeKind,
    frame_length: usize,
}

impl SchemeSpec {
    pub fn new(kind: SchemeKind, frame_length: usize) -> Result<Self> {
        if frame_length == 0 {
            return Err(Error::InvalidParameter(
                "frame length must be at least 1".into(),
            ));
        }
        if let SchemeKind::Turbo(t) = &kind {
            if t.frame_length() != frame_length {
                return Err(Error::InvalidParameter(format!(
                    "interleaver length {} differs from frame length {frame_length}",
                    t.frame_length()
                )));
            }
        }
        Ok(Self { kind, frame_length })
    }

    pub fn uncoded(frame_length: usize) -> Result<Self> {
        Self::new(SchemeKind::Uncoded, frame_length)
    }

    pub fn convolutional(code: ConvCodeSpec, frame_length: usize) -> Result<Self> {
        Self::new(SchemeKind::Convolutional(code), frame_length)
    }

    pub fn turbo(code: TurboCodeSpec) -> Result<Self> {
        let len = code.frame_length();
        Self::new(SchemeKind::Turbo(code), len)
    }

    pub fn kind(&self) -> &SchemeKind {
        &self.kind
    }

    pub fn frame_length(&self) -> usize {
        self.frame_length
    }

    /// Information bits per transmitted symbol.
    pub fn rate(&self) -> f64 {
        let l = self.frame_length as f64;
        match &self.kind {
            SchemeKind::Uncoded => 1.0,
            SchemeKind::Convolutional(c) => l / (2 * c.steps(self.frame_length)) as f64,
            SchemeKind::Turbo(t) => l / t.codeword_length() as f64,
        }
    }

    pub fn name(&self) -> String {
        match &self.kind {
            SchemeKind::Uncoded => format!("uncoded L={}", self.frame_length),
            SchemeKind::Convolutional(c) => format!(
                "convolutional (1,{:o}/{:o}) L={}",
                c.feedforward(),
                c.feedback(),
                self.frame_length
            ),
            SchemeKind::Turbo(t) => format!(
                "turbo (1,{0:o}/{1:o},{0:o}/{1:o}) L={2} it={3}",
                t.constituent().feedforward(),
                t.constituent().feedback(),
                self.frame_length,
                t.iterations()
            ),
        }
    }
}

/// One AWGN frame trial at per-symbol SNR `gamma`; true if every information
/// bit is decoded correctly (termination tails are not counted).
pub fn transmit_and_detect<R: Rng + ?Sized>(
    scheme: &SchemeSpec,
    gamma: Snr,
    rng: &mut R,
) -> Result<bool> {
    const ES: f64 = 1.0;
    let bits: Vec<u8> = (0..scheme.frame_length)
        .map(|_| rng.random::<bool>() as u8)
        .collect();
    let code = match &scheme.kind {
        SchemeKind::Uncoded => bits.clone(),
        SchemeKind::Convolutional(c) => rsc_encode(&bits, c).interleaved(),
        SchemeKind::Turbo(t) => turbo_encode(&bits, t)?.concatenated(),
    };
    let rx = add_awgn(&bpsk_modulate(&code, ES)?, gamma, rng)?;
    let decoded = match &scheme.kind {
        SchemeKind::Uncoded => rx.samples.iter().map(|&r| (r < 0.0) as u8).collect(),
        SchemeKind::Convolutional(c) => {
            viterbi_decode(&LlrFrame::from_samples(&rx.samples, gamma, ES), c)?
        }
        SchemeKind::Turbo(t) => turbo_decode(&LlrFrame::from_samples(&rx.samples, gamma, ES), t)?,
    };
    Ok(decoded == bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn snr(v: f64) -> Snr {
        Snr::from_linear(v).unwrap()
    }

    #[test]
    fn detection_probability_edge_values() {
        assert!((uncoded_detection_probability(snr(0.0), 1) - 0.5).abs() < 1e-15);
        let p = uncoded_detection_probability(snr(0.0), 256);
        assert!((p / 0.5f64.powi(256) - 1.0).abs() < 1e-12);
        // 5.782 dB, L = 256: per-bit error Q(sqrt(2 * 3.7862)) ~ 2.9e-3.
        let g = Snr::from_db(5.782).unwrap();
        let q = q_function((2.0 * g.linear()).sqrt());
        let direct = (1.0 - q).powi(256);
        assert!((uncoded_detection_probability(g, 256) - direct).abs() < 1e-12);
        assert!(uncoded_detection_probability(snr(f64::INFINITY), 1024) == 1.0);
    }

    #[test]
    fn llr_scaling() {
        let llrs = LlrFrame::from_samples(&[1.0, -0.5], snr(2.0), 1.0);
        assert_eq!(llrs.values(), &[8.0, -4.0]);
        let inf = LlrFrame::from_samples(&[1.0, -1.0], snr(f64::INFINITY), 1.0);
        assert_eq!(inf.values(), &[LLR_LIMIT, -LLR_LIMIT]);
    }

    #[test]
    fn scheme_validation() {
        assert!(SchemeSpec::uncoded(0).is_err());
        let t = TurboCodeSpec::rsc_5_7(make_interleaver(16, 0).unwrap());
        assert!(SchemeSpec::new(SchemeKind::Turbo(t.clone()), 32).is_err());
        assert_eq!(SchemeSpec::turbo(t).unwrap().frame_length(), 16);
    }

    #[test]
    fn noiseless_trials_succeed() {
        let inf = snr(f64::INFINITY);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let schemes = [
            SchemeSpec::uncoded(256).unwrap(),
            SchemeSpec::convolutional(ConvCodeSpec::rsc_17_15(), 64).unwrap(),
            SchemeSpec::turbo(TurboCodeSpec::rsc_5_7(make_interleaver(64, 2).unwrap())).unwrap(),
        ];
        for s in &schemes {
            for _ in 0..5 {
                assert!(
                    transmit_and_detect(s, inf, &mut rng).unwrap(),
                    "{}",
                    s.name()
                );
            }
        }
    }

    #[test]
    fn trials_are_deterministic() {
        let s = SchemeSpec::convolutional(ConvCodeSpec::rsc_17_15(), 128).unwrap();
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(77);
            (0..50)
                .map(|_| transmit_and_detect(&s, snr(0.8), &mut rng).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn rates() {
        assert_eq!(SchemeSpec::uncoded(8).unwrap().rate(), 1.0);
        let c = SchemeSpec::convolutional(ConvCodeSpec::rsc_17_15(), 253).unwrap();
        assert!((c.rate() - 0.5 * 253.0 / 256.0).abs() < 1e-15);
    }
}
