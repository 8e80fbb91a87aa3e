//! Rate-1/3 parallel concatenated code with two identical RSC constituents.
//!
//! Encoder 1 is terminated and encoder 2 is left open. The LLR frame layout is
//! `[systematic (L+m) | parity1 (L+m) | parity2 (L)]`.

use crate::error::{Error, Result};

use super::conv::{bcjr_streams, encode_with, ConvCodeSpec};
use super::interleaver::Interleaver;
use super::LlrFrame;

#[derive(Debug, Clone, PartialEq)]
pub struct TurboCodeSpec {
    constituent: ConvCodeSpec,
    interleaver: Interleaver,
    iterations: usize,
}

impl TurboCodeSpec {
    pub const DEFAULT_ITERATIONS: usize = 8;

    pub fn new(
        constituent: ConvCodeSpec,
        interleaver: Interleaver,
        iterations: usize,
    ) -> Result<Self> {
        if iterations == 0 {
            return Err(Error::InvalidParameter(
                "turbo iterations must be at least 1".into(),
            ));
        }
        Ok(Self {
            constituent: constituent.with_termination(true),
            interleaver,
            iterations,
        })
    }

    /// The (1, 5/7, 5/7) code with eight decoding iterations.
    pub fn rsc_5_7(interleaver: Interleaver) -> Self {
        Self::new(
            ConvCodeSpec::rsc_5_7(true),
            interleaver,
            Self::DEFAULT_ITERATIONS,
        )
        .expect("valid parameters")
    }

    pub fn constituent(&self) -> &ConvCodeSpec {
        &self.constituent
    }

    pub fn interleaver(&self) -> &Interleaver {
        &self.interleaver
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn with_iterations(&self, iterations: usize) -> Result<Self> {
        Self::new(self.constituent, self.interleaver.clone(), iterations)
    }

    pub fn frame_length(&self) -> usize {
        self.interleaver.len()
    }

    pub fn codeword_length(&self) -> usize {
        3 * self.frame_length() + 2 * self.constituent.memory()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TurboCodeword {
    pub systematic: Vec<u8>,
    pub parity1: Vec<u8>,
    pub parity2: Vec<u8>,
}

impl TurboCodeword {
    pub fn concatenated(&self) -> Vec<u8> {
        let mut out =
            Vec::with_capacity(self.systematic.len() + self.parity1.len() + self.parity2.len());
        out.extend_from_slice(&self.systematic);
        out.extend_from_slice(&self.parity1);
        out.extend_from_slice(&self.parity2);
        out
    }
}

pub fn turbo_encode(bits: &[u8], spec: &TurboCodeSpec) -> Result<TurboCodeword> {
    if bits.len() != spec.frame_length() {
        return Err(Error::LengthMismatch {
            expected: spec.frame_length(),
            actual: bits.len(),
        });
    }
    let trellis = spec.constituent.trellis();
    let first = encode_with(&trellis, bits, true);
    let second = encode_with(&trellis, &spec.interleaver.interleave(bits), false);
    Ok(TurboCodeword {
        systematic: first.systematic,
        parity1: first.parity,
        parity2: second.parity,
    })
}

/// Iterative log-MAP decoding; returns hard decisions on the information bits.
pub fn turbo_decode(llrs: &LlrFrame, spec: &TurboCodeSpec) -> Result<Vec<u8>> {
    Ok(turbo_decode_soft(llrs, spec)?
        .iter()
        .map(|&l| (l < 0.0) as u8)
        .collect())
}

/// Final a-posteriori LLRs of the information bits, in natural order.
pub fn turbo_decode_soft(llrs: &LlrFrame, spec: &TurboCodeSpec) -> Result<Vec<f64>> {
    if llrs.len() != spec.codeword_length() {
        return Err(Error::LengthMismatch {
            expected: spec.codeword_length(),
            actual: llrs.len(),
        });
    }
    let len = spec.frame_length();
    let m = spec.constituent.memory();
    let v = llrs.values();
    let (sys, rest) = v.split_at(len + m);
    let (par1, par2) = rest.split_at(len + m);

    let il = &spec.interleaver;
    let trellis = spec.constituent.trellis();
    let sys2 = il.interleave(&sys[..len]);

    let mut apriori1 = vec![0.0; len];
    let mut app = vec![0.0; len];
    for _ in 0..spec.iterations {
        let dec1 = bcjr_streams(&trellis, true, sys, par1, &apriori1);
        let apriori2 = il.interleave(&dec1.extrinsic);
        let dec2 = bcjr_streams(&trellis, false, &sys2, par2, &apriori2);
        apriori1 = il.deinterleave(&dec2.extrinsic);
        app = il.deinterleave(&dec2.aposteriori);
    }
    Ok(app)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codecs::conv::rsc_encode;
    use crate::codecs::interleaver::make_interleaver;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn noiseless(code: &[u8]) -> LlrFrame {
        LlrFrame::new(
            code.iter()
                .map(|&c| if c == 0 { 20.0 } else { -20.0 })
                .collect(),
        )
    }

    #[test]
    fn all_zero_input() {
        let spec = TurboCodeSpec::rsc_5_7(make_interleaver(64, 1).unwrap());
        let cw = turbo_encode(&[0; 64], &spec).unwrap();
        assert!(cw.concatenated().iter().all(|&b| b == 0));
    }

    #[test]
    fn stream_lengths() {
        let spec = TurboCodeSpec::rsc_5_7(make_interleaver(100, 1).unwrap());
        let cw = turbo_encode(&[1; 100], &spec).unwrap();
        assert_eq!(cw.systematic.len(), 102);
        assert_eq!(cw.parity1.len(), 102);
        assert_eq!(cw.parity2.len(), 100);
        assert_eq!(cw.concatenated().len(), spec.codeword_length());
    }

    #[test]
    fn identity_interleaver_gives_matching_parities() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let bits: Vec<u8> = (0..50).map(|_| rng.random::<bool>() as u8).collect();
        let spec = TurboCodeSpec::rsc_5_7(Interleaver::identity(50).unwrap());
        let cw = turbo_encode(&bits, &spec).unwrap();
        assert_eq!(cw.parity1[..50], cw.parity2[..]);
        assert_eq!(cw.systematic[..50], bits[..]);
        let first = rsc_encode(&bits, &ConvCodeSpec::rsc_5_7(true));
        assert_eq!(cw.parity1, first.parity);
    }

    #[test]
    fn encode_length_mismatch() {
        let spec = TurboCodeSpec::rsc_5_7(make_interleaver(8, 1).unwrap());
        assert_eq!(
            turbo_encode(&[0; 7], &spec),
            Err(Error::LengthMismatch {
                expected: 8,
                actual: 7
            })
        );
        assert!(turbo_decode(&LlrFrame::new(vec![0.0; 10]), &spec).is_err());
    }

    #[test]
    fn noiseless_recovery() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for il in [
            Interleaver::identity(40).unwrap(),
            make_interleaver(256, 3).unwrap(),
        ] {
            let len = il.len();
            let spec = TurboCodeSpec::rsc_5_7(il);
            let bits: Vec<u8> = (0..len).map(|_| rng.random::<bool>() as u8).collect();
            let cw = turbo_encode(&bits, &spec).unwrap();
            assert_eq!(
                turbo_decode(&noiseless(&cw.concatenated()), &spec).unwrap(),
                bits
            );
        }
    }

    #[test]
    fn zero_iterations_are_rejected() {
        assert!(TurboCodeSpec::new(
            ConvCodeSpec::rsc_5_7(true),
            Interleaver::identity(4).unwrap(),
            0
        )
        .is_err());
    }
}
