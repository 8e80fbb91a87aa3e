//! Recursive systematic convolutional codes: encoder, soft-input Viterbi
//! decoder and exact log-MAP (BCJR) decoder.
//!
//! Generators are given in octal with the most significant bit as the `D^0`
//! coefficient, so `15` is `1 + D + D^3` and `17` is `1 + D + D^2 + D^3`.
//! A state holds the last `memory` register values with the newest one in the
//! most significant position.

use crate::error::{Error, Result};

use super::LlrFrame;

/// Parameters of a rate-1/2 RSC code `(1, feedforward/feedback)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvCodeSpec {
    feedforward: u32,
    feedback: u32,
    memory: usize,
    terminated: bool,
}

impl ConvCodeSpec {
    /// `feedforward` and `feedback` are the generator values (write them as
    /// octal literals, e.g. `0o17`).
    pub fn new(feedforward: u32, feedback: u32, memory: usize, terminated: bool) -> Result<Self> {
        if memory == 0 || memory > 16 {
            return Err(Error::InvalidParameter(format!(
                "memory must be in 1..=16, got {memory}"
            )));
        }
        let limit = 1u32 << (memory + 1);
        if feedforward == 0 || feedforward >= limit || feedback >= limit {
            return Err(Error::InvalidParameter(format!(
                "generators {feedforward:o}/{feedback:o} do not fit in {} bits",
                memory + 1
            )));
        }
        if feedback & (1 << memory) == 0 {
            return Err(Error::InvalidParameter(format!(
                "feedback polynomial {feedback:o} must have a unit leading coefficient"
            )));
        }
        Ok(Self {
            feedforward,
            feedback,
            memory,
            terminated,
        })
    }

    /// Parses octal generator strings such as `"17"` and `"15"`.
    pub fn from_octal(
        feedforward: &str,
        feedback: &str,
        memory: usize,
        terminated: bool,
    ) -> Result<Self> {
        let parse = |s: &str| {
            u32::from_str_radix(s.trim(), 8)
                .map_err(|_| Error::InvalidParameter(format!("not an octal generator: {s:?}")))
        };
        Self::new(parse(feedforward)?, parse(feedback)?, memory, terminated)
    }

    /// The (1, 17/15) code, terminated.
    pub fn rsc_17_15() -> Self {
        Self::new(0o17, 0o15, 3, true).expect("valid generators")
    }

    /// The (1, 5/7) turbo constituent.
    pub fn rsc_5_7(terminated: bool) -> Self {
        Self::new(0o5, 0o7, 2, terminated).expect("valid generators")
    }

    pub fn feedforward(&self) -> u32 {
        self.feedforward
    }

    pub fn feedback(&self) -> u32 {
        self.feedback
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn terminated(&self) -> bool {
        self.terminated
    }

    pub fn with_termination(self, terminated: bool) -> Self {
        Self { terminated, ..self }
    }

    pub fn num_states(&self) -> usize {
        1 << self.memory
    }

    /// Number of trellis steps for `info_len` information bits.
    pub fn steps(&self, info_len: usize) -> usize {
        info_len + if self.terminated { self.memory } else { 0 }
    }

    /// Information length implied by a codeword of `llr_len` values (two per step).
    pub fn info_len_for(&self, llr_len: usize) -> Result<usize> {
        let tail = if self.terminated { self.memory } else { 0 };
        if llr_len % 2 != 0 || llr_len / 2 <= tail {
            let steps = (llr_len / 2).max(tail + 1);
            return Err(Error::LengthMismatch {
                expected: 2 * steps,
                actual: llr_len,
            });
        }
        Ok(llr_len / 2 - tail)
    }

    pub fn trellis(&self) -> Trellis {
        Trellis::new(self)
    }
}

fn parity_of(x: u32) -> u8 {
    (x.count_ones() & 1) as u8
}

/// Precomputed state transitions of an RSC code.
#[derive(Debug, Clone)]
pub struct Trellis {
    memory: usize,
    num_states: usize,
    /// `next[s][u]`
    next: Vec<[usize; 2]>,
    /// `parity[s][u]`
    parity: Vec<[u8; 2]>,
    /// The input that zeroes the register feedback from state `s`.
    tail_input: Vec<u8>,
}

impl Trellis {
    fn new(spec: &ConvCodeSpec) -> Self {
        let m = spec.memory;
        let n = spec.num_states();
        let mut next = Vec::with_capacity(n);
        let mut parity = Vec::with_capacity(n);
        let mut tail_input = Vec::with_capacity(n);
        for s in 0..n {
            let fb = parity_of(s as u32 & spec.feedback);
            let mut nx = [0usize; 2];
            let mut par = [0u8; 2];
            for u in 0..2u8 {
                let w = u ^ fb;
                let augmented = ((w as u32) << m) | s as u32;
                nx[u as usize] = (augmented >> 1) as usize;
                par[u as usize] = parity_of(augmented & spec.feedforward);
            }
            next.push(nx);
            parity.push(par);
            tail_input.push(fb);
        }
        Self {
            memory: m,
            num_states: n,
            next,
            parity,
            tail_input,
        }
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn next_state(&self, state: usize, input: u8) -> usize {
        self.next[state][input as usize]
    }

    pub fn parity(&self, state: usize, input: u8) -> u8 {
        self.parity[state][input as usize]
    }

    pub fn tail_input(&self, state: usize) -> u8 {
        self.tail_input[state]
    }
}

/// Output of [`rsc_encode`]: equal-length systematic and parity streams.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RscCodeword {
    pub systematic: Vec<u8>,
    pub parity: Vec<u8>,
    pub final_state: usize,
}

impl RscCodeword {
    /// Transmission order `s0 p0 s1 p1 ...`.
    pub fn interleaved(&self) -> Vec<u8> {
        self.systematic
            .iter()
            .zip(&self.parity)
            .flat_map(|(&s, &p)| [s, p])
            .collect()
    }
}

pub(crate) fn encode_with(trellis: &Trellis, bits: &[u8], terminate: bool) -> RscCodeword {
    let tail = if terminate { trellis.memory } else { 0 };
    let mut systematic = Vec::with_capacity(bits.len() + tail);
    let mut parity = Vec::with_capacity(bits.len() + tail);
    let mut state = 0;
    for &b in bits {
        let u = b & 1;
        systematic.push(u);
        parity.push(trellis.parity(state, u));
        state = trellis.next_state(state, u);
    }
    for _ in 0..tail {
        let u = trellis.tail_input(state);
        systematic.push(u);
        parity.push(trellis.parity(state, u));
        state = trellis.next_state(state, u);
    }
    RscCodeword {
        systematic,
        parity,
        final_state: state,
    }
}

/// Encodes `bits`; a terminated code appends `memory` tail steps that return
/// the register to the zero state.
pub fn rsc_encode(bits: &[u8], spec: &ConvCodeSpec) -> RscCodeword {
    encode_with(&spec.trellis(), bits, spec.terminated)
}

/// Maximum-likelihood sequence decoding of an interleaved `s p s p ...` LLR
/// frame. Maximizes `sum llr_i * (1 - 2 c_i)`; on equal metrics the path from
/// the smaller state index survives.
pub fn viterbi_decode(llrs: &LlrFrame, spec: &ConvCodeSpec) -> Result<Vec<u8>> {
    let info_len = spec.info_len_for(llrs.len())?;
    let trellis = spec.trellis();
    let steps = spec.steps(info_len);
    let n = trellis.num_states;
    let v = llrs.values();

    let mut metric = vec![f64::NEG_INFINITY; n];
    metric[0] = 0.0;
    let mut next_metric = vec![f64::NEG_INFINITY; n];
    // Per step and destination state: (predecessor, input).
    let mut decisions: Vec<(u32, u8)> = vec![(0, 0); steps * n];

    for k in 0..steps {
        let (ls, lp) = (v[2 * k], v[2 * k + 1]);
        next_metric.iter_mut().for_each(|m| *m = f64::NEG_INFINITY);
        let row = &mut decisions[k * n..(k + 1) * n];
        for s in 0..n {
            let base = metric[s];
            if base == f64::NEG_INFINITY {
                continue;
            }
            let inputs: &[u8] = if k < info_len {
                &[0, 1]
            } else {
                std::slice::from_ref(&trellis.tail_input[s])
            };
            for &u in inputs {
                let p = trellis.parity(s, u);
                let bm = ls * antipodal(u) + lp * antipodal(p);
                let ns = trellis.next_state(s, u);
                let cand = base + bm;
                if cand > next_metric[ns] {
                    next_metric[ns] = cand;
                    row[ns] = (s as u32, u);
                }
            }
        }
        std::mem::swap(&mut metric, &mut next_metric);
    }

    let mut state = if spec.terminated {
        0
    } else {
        let mut best = 0;
        for s in 1..n {
            if metric[s] > metric[best] {
                best = s;
            }
        }
        best
    };
    let mut inputs = vec![0u8; steps];
    for k in (0..steps).rev() {
        let (prev, u) = decisions[k * n + state];
        inputs[k] = u;
        state = prev as usize;
    }
    inputs.truncate(info_len);
    Ok(inputs)
}

#[inline]
fn antipodal(bit: u8) -> f64 {
    1.0 - 2.0 * bit as f64
}

/// Jacobian logarithm `ln(e^a + e^b)`.
#[inline]
pub fn max_star(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    a.max(b) + (-(a - b).abs()).exp().ln_1p()
}

/// Per-information-bit soft outputs of the log-MAP decoder.
#[derive(Debug, Clone, PartialEq)]
pub struct BcjrOutput {
    pub aposteriori: Vec<f64>,
    pub extrinsic: Vec<f64>,
}

/// Exact log-MAP decoding over separate systematic and parity LLR streams.
///
/// `systematic` and `parity` cover every trellis step (tail included);
/// `apriori` covers the information bits only.
pub(crate) fn bcjr_streams(
    trellis: &Trellis,
    terminated: bool,
    systematic: &[f64],
    parity: &[f64],
    apriori: &[f64],
) -> BcjrOutput {
    let n = trellis.num_states;
    let steps = systematic.len();
    let info_len = apriori.len();
    debug_assert_eq!(parity.len(), steps);

    // Branch metrics gamma[k][s][u] = ((a + ls)(1 - 2u) + lp(1 - 2p)) / 2;
    // tail steps only allow the termination input.
    let branch = |k: usize, s: usize, u: u8| -> f64 {
        if k >= info_len && u != trellis.tail_input[s] {
            return f64::NEG_INFINITY;
        }
        let a = if k < info_len { apriori[k] } else { 0.0 };
        let p = trellis.parity(s, u);
        0.5 * ((a + systematic[k]) * antipodal(u) + parity[k] * antipodal(p))
    };

    let mut alpha = vec![f64::NEG_INFINITY; (steps + 1) * n];
    alpha[0] = 0.0;
    for k in 0..steps {
        let (cur, nxt) = alpha.split_at_mut((k + 1) * n);
        let cur = &cur[k * n..];
        let nxt = &mut nxt[..n];
        for s in 0..n {
            if cur[s] == f64::NEG_INFINITY {
                continue;
            }
            for u in 0..2u8 {
                let g = branch(k, s, u);
                if g == f64::NEG_INFINITY {
                    continue;
                }
                let ns = trellis.next_state(s, u);
                nxt[ns] = max_star(nxt[ns], cur[s] + g);
            }
        }
        let norm = nxt.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if norm.is_finite() {
            nxt.iter_mut().for_each(|x| *x -= norm);
        }
    }

    let mut beta = vec![f64::NEG_INFINITY; n];
    if terminated {
        beta[0] = 0.0;
    } else {
        beta.iter_mut().for_each(|b| *b = 0.0);
    }
    let mut prev_beta = vec![f64::NEG_INFINITY; n];
    let mut aposteriori = vec![0.0; info_len];

    for k in (0..steps).rev() {
        let a = &alpha[k * n..(k + 1) * n];
        let mut num = [f64::NEG_INFINITY; 2];
        prev_beta.iter_mut().for_each(|b| *b = f64::NEG_INFINITY);
        for s in 0..n {
            for u in 0..2u8 {
                let g = branch(k, s, u);
                if g == f64::NEG_INFINITY {
                    continue;
                }
                let ns = trellis.next_state(s, u);
                let gb = g + beta[ns];
                prev_beta[s] = max_star(prev_beta[s], gb);
                if k < info_len {
                    num[u as usize] = max_star(num[u as usize], a[s] + gb);
                }
            }
        }
        if k < info_len {
            aposteriori[k] = num[0] - num[1];
        }
        let norm = prev_beta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if norm.is_finite() {
            prev_beta.iter_mut().for_each(|x| *x -= norm);
        }
        std::mem::swap(&mut beta, &mut prev_beta);
    }

    let extrinsic = aposteriori
        .iter()
        .zip(apriori)
        .zip(systematic)
        .map(|((&app, &a), &ls)| app - a - ls)
        .collect();
    BcjrOutput {
        aposteriori,
        extrinsic,
    }
}

/// Exact log-MAP decoding of an interleaved `s p s p ...` LLR frame.
pub fn bcjr_decode(llrs: &LlrFrame, apriori: &[f64], spec: &ConvCodeSpec) -> Result<BcjrOutput> {
    let info_len = spec.info_len_for(llrs.len())?;
    if apriori.len() != info_len {
        return Err(Error::LengthMismatch {
            expected: info_len,
            actual: apriori.len(),
        });
    }
    let (systematic, parity): (Vec<f64>, Vec<f64>) =
        llrs.values().chunks_exact(2).map(|c| (c[0], c[1])).unzip();
    Ok(bcjr_streams(
        &spec.trellis(),
        spec.terminated,
        &systematic,
        &parity,
        apriori,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_bits(rng: &mut impl Rng, n: usize) -> Vec<u8> {
        (0..n).map(|_| rng.random::<bool>() as u8).collect()
    }

    fn noiseless_llrs(code: &[u8], mag: f64) -> LlrFrame {
        LlrFrame::new(code.iter().map(|&c| mag * antipodal(c)).collect())
    }

    fn correlation(llrs: &[f64], code: &[u8]) -> f64 {
        llrs.iter().zip(code).map(|(l, &c)| l * antipodal(c)).sum()
    }

    /// Bit-serial shift register, written independently of [`Trellis`].
    fn reference_encode(bits: &[u8], ff: &[u8], fb: &[u8], terminate: bool) -> (Vec<u8>, Vec<u8>) {
        let m = fb.len() - 1;
        let mut reg = vec![0u8; m];
        let (mut sys, mut par) = (vec![], vec![]);
        let step = |u: Option<u8>, reg: &mut Vec<u8>| {
            let feedback: u8 = (1..=m).map(|j| fb[j] & reg[j - 1]).fold(0, |a, b| a ^ b);
            let u = u.unwrap_or(feedback);
            let w = u ^ feedback;
            let p = (ff[0] & w) ^ (1..=m).map(|j| ff[j] & reg[j - 1]).fold(0, |a, b| a ^ b);
            reg.insert(0, w);
            reg.pop();
            (u, p)
        };
        for &b in bits {
            let (u, p) = step(Some(b), &mut reg);
            sys.push(u);
            par.push(p);
        }
        if terminate {
            for _ in 0..m {
                let (u, p) = step(None, &mut reg);
                sys.push(u);
                par.push(p);
            }
            assert!(reg.iter().all(|&r| r == 0));
        }
        (sys, par)
    }

    #[test]
    fn code_parameter_validation() {
        assert!(ConvCodeSpec::new(0o17, 0o15, 3, true).is_ok());
        assert!(ConvCodeSpec::new(0o17, 0o15, 2, true).is_err());
        assert!(ConvCodeSpec::new(0o5, 0o3, 2, true).is_err());
        assert!(ConvCodeSpec::new(0, 0o7, 2, true).is_err());
        assert_eq!(
            ConvCodeSpec::from_octal("17", "15", 3, true).unwrap(),
            ConvCodeSpec::rsc_17_15()
        );
        assert!(ConvCodeSpec::from_octal("19", "15", 3, true).is_err());
    }

    #[test]
    fn all_zero_input_gives_all_zero_output() {
        for spec in [ConvCodeSpec::rsc_17_15(), ConvCodeSpec::rsc_5_7(true)] {
            let cw = rsc_encode(&[0; 20], &spec);
            assert!(cw.systematic.iter().chain(&cw.parity).all(|&b| b == 0));
            assert_eq!(cw.systematic.len(), 20 + spec.memory());
        }
    }

    #[test]
    fn impulse_response_of_5_over_7() {
        // Hand-simulated: (1 + D^2) / (1 + D + D^2) = 1 + D + D^2 + D^4 + D^5 + D^7 + ...
        // (period-3 pattern 0 1 1 after the first step).
        let mut bits = vec![0u8; 12];
        bits[0] = 1;
        let cw = rsc_encode(&bits, &ConvCodeSpec::rsc_5_7(false));
        assert_eq!(cw.parity, vec![1, 1, 1, 0, 1, 1, 0, 1, 1, 0, 1, 1]);
        assert_eq!(cw.systematic, bits);
    }

    #[test]
    fn encoder_matches_reference_shift_register() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let bits = random_bits(&mut rng, 40);
            for terminated in [false, true] {
                let spec = ConvCodeSpec::rsc_17_15().with_termination(terminated);
                let cw = rsc_encode(&bits, &spec);
                let (s, p) = reference_encode(&bits, &[1, 1, 1, 1], &[1, 1, 0, 1], terminated);
                assert_eq!(cw.systematic, s);
                assert_eq!(cw.parity, p);
            }
        }
    }

    #[test]
    fn termination_returns_to_zero_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for spec in [ConvCodeSpec::rsc_17_15(), ConvCodeSpec::rsc_5_7(true)] {
            for _ in 0..1000 {
                let len = rng.random_range(1..64);
                let cw = rsc_encode(&random_bits(&mut rng, len), &spec);
                assert_eq!(cw.final_state, 0);
                assert_eq!(
                    cw.systematic.len() + cw.parity.len(),
                    2 * (len + spec.memory())
                );
            }
        }
    }

    proptest! {
        #[test]
        fn unterminated_encoder_is_linear(
            a in proptest::collection::vec(0u8..2, 1..80),
            seed in any::<u64>(),
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let b = random_bits(&mut rng, a.len());
            let x: Vec<u8> = a.iter().zip(&b).map(|(p, q)| p ^ q).collect();
            for spec in [ConvCodeSpec::rsc_17_15().with_termination(false), ConvCodeSpec::rsc_5_7(false)] {
                let (ca, cb, cx) = (rsc_encode(&a, &spec), rsc_encode(&b, &spec), rsc_encode(&x, &spec));
                let sum: Vec<u8> = ca.parity.iter().zip(&cb.parity).map(|(p, q)| p ^ q).collect();
                prop_assert_eq!(sum, cx.parity);
            }
        }
    }

    #[test]
    fn viterbi_recovers_noiseless_codeword() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for spec in [
            ConvCodeSpec::rsc_17_15(),
            ConvCodeSpec::rsc_17_15().with_termination(false),
            ConvCodeSpec::rsc_5_7(true),
        ] {
            let bits = random_bits(&mut rng, 100);
            let cw = rsc_encode(&bits, &spec);
            let decoded = viterbi_decode(&noiseless_llrs(&cw.interleaved(), 3.0), &spec).unwrap();
            assert_eq!(decoded, bits);
        }
    }

    fn exhaustive_ml(llrs: &[f64], spec: &ConvCodeSpec, len: usize) -> Vec<u8> {
        let mut best = (f64::NEG_INFINITY, vec![]);
        for word in 0..(1u32 << len) {
            let bits: Vec<u8> = (0..len).map(|i| ((word >> i) & 1) as u8).collect();
            let m = correlation(llrs, &rsc_encode(&bits, spec).interleaved());
            if m > best.0 {
                best = (m, bits);
            }
        }
        best.1
    }

    #[test]
    fn viterbi_equals_exhaustive_ml() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for spec in [
            ConvCodeSpec::rsc_17_15(),
            ConvCodeSpec::rsc_17_15().with_termination(false),
            ConvCodeSpec::rsc_5_7(true),
        ] {
            for trial in 0..200 {
                let len = 1 + trial % 8;
                let n = 2 * spec.steps(len);
                let llrs: Vec<f64> = (0..n).map(|_| rng.random_range(-4.0..4.0)).collect();
                let frame = LlrFrame::new(llrs.clone());
                assert_eq!(
                    viterbi_decode(&frame, &spec).unwrap(),
                    exhaustive_ml(&llrs, &spec, len),
                    "spec {spec:?} len {len}"
                );
            }
        }
    }

    #[test]
    fn viterbi_all_zero_llrs_is_stable() {
        let spec = ConvCodeSpec::rsc_17_15();
        let frame = LlrFrame::new(vec![0.0; 2 * spec.steps(10)]);
        let first = viterbi_decode(&frame, &spec).unwrap();
        for _ in 0..5 {
            assert_eq!(viterbi_decode(&frame, &spec).unwrap(), first);
        }
        // Smaller predecessor states always win ties, so the all-zero path survives.
        assert_eq!(first, vec![0; 10]);
    }

    #[test]
    fn viterbi_length_errors() {
        let spec = ConvCodeSpec::rsc_17_15();
        assert!(matches!(
            viterbi_decode(&LlrFrame::new(vec![0.0; 7]), &spec),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            viterbi_decode(&LlrFrame::new(vec![0.0; 6]), &spec),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn max_star_is_log_sum_exp() {
        for (a, b) in [(0.0, 0.0), (1.0, -3.0), (-20.0, 15.5), (700.0, 699.0)] {
            let direct = if a > 600.0 {
                a + (1.0 + (b - a as f64).exp()).ln()
            } else {
                ((a as f64).exp() + (b as f64).exp()).ln()
            };
            assert!((max_star(a, b) - direct).abs() < 1e-12);
        }
        assert_eq!(max_star(f64::NEG_INFINITY, 2.0), 2.0);
        assert_eq!(
            max_star(f64::NEG_INFINITY, f64::NEG_INFINITY),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn bcjr_zero_input_gives_zero_extrinsic() {
        let spec = ConvCodeSpec::rsc_5_7(true);
        let out = bcjr_decode(
            &LlrFrame::new(vec![0.0; 2 * spec.steps(8)]),
            &[0.0; 8],
            &spec,
        )
        .unwrap();
        assert!(out.extrinsic.iter().all(|e| e.abs() < 1e-12));
        assert!(out.aposteriori.iter().all(|e| e.abs() < 1e-12));
    }

    /// Bit-wise posterior probabilities P(u_k = 0 | llrs, apriori) by enumeration.
    fn brute_force_marginals(llrs: &[f64], apriori: &[f64], spec: &ConvCodeSpec) -> Vec<f64> {
        let len = apriori.len();
        let mut zero = vec![0.0; len];
        let mut total = 0.0;
        for word in 0..(1u32 << len) {
            let bits: Vec<u8> = (0..len).map(|i| ((word >> i) & 1) as u8).collect();
            let code = rsc_encode(&bits, spec).interleaved();
            let metric = 0.5 * correlation(llrs, &code) + 0.5 * correlation(apriori, &bits);
            let w = metric.exp();
            total += w;
            for k in 0..len {
                if bits[k] == 0 {
                    zero[k] += w;
                }
            }
        }
        zero.iter().map(|z| z / total).collect()
    }

    #[test]
    fn bcjr_marginals_equal_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for spec in [
            ConvCodeSpec::rsc_5_7(true),
            ConvCodeSpec::rsc_5_7(false),
            ConvCodeSpec::rsc_17_15(),
        ] {
            for trial in 0..300 {
                let len = 1 + trial % 4;
                let n = 2 * spec.steps(len);
                let llrs: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
                let apriori: Vec<f64> = (0..len).map(|_| rng.random_range(-2.0..2.0)).collect();
                let out = bcjr_decode(&LlrFrame::new(llrs.clone()), &apriori, &spec).unwrap();
                let oracle = brute_force_marginals(&llrs, &apriori, &spec);
                for k in 0..len {
                    let p0 = 1.0 / (1.0 + (-out.aposteriori[k]).exp());
                    assert!(
                        (p0 - oracle[k]).abs() < 1e-8,
                        "{spec:?} bit {k}: {p0} vs {}",
                        oracle[k]
                    );
                    let sys = llrs[2 * k];
                    assert!(
                        (out.extrinsic[k] - (out.aposteriori[k] - apriori[k] - sys)).abs() < 1e-12
                    );
                }
            }
        }
    }

    #[test]
    fn bcjr_saturated_input_matches_codeword_signs() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let spec = ConvCodeSpec::rsc_17_15();
        let bits = random_bits(&mut rng, 64);
        let cw = rsc_encode(&bits, &spec);
        let out = bcjr_decode(
            &noiseless_llrs(&cw.interleaved(), 50.0),
            &vec![0.0; 64],
            &spec,
        )
        .unwrap();
        for (l, &b) in out.aposteriori.iter().zip(&bits) {
            assert_eq!(*l < 0.0, b == 1);
        }
    }

    #[test]
    fn bcjr_length_errors() {
        let spec = ConvCodeSpec::rsc_5_7(true);
        let frame = LlrFrame::new(vec![0.0; 2 * spec.steps(4)]);
        assert!(matches!(
            bcjr_decode(&frame, &[0.0; 3], &spec),
            Err(Error::LengthMismatch {
                expected: 4,
                actual: 3
            })
        ));
        assert!(bcjr_decode(&LlrFrame::new(vec![0.0; 5]), &[0.0; 1], &spec).is_err());
    }
}
