//! End-to-end acceptance checks shared by `waterfall validate` and the
//! acceptance test target.
//!
//! Each check returns an [`Outcome`] with the expected and measured values as
//! text; a failing computation is reported as a failed check, not a panic.

use std::cell::Cell;
use std::io::Write;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{add_awgn, bpsk_modulate, Snr};
use crate::codecs::{
    bcjr_decode, make_interleaver, rsc_encode, uncoded_detection_probability,
    uncoded_error_probability, viterbi_decode, ConvCodeSpec, LlrFrame, SchemeSpec, TurboCodeSpec,
};
use crate::error::Result;
use crate::fer_model::{
    approx_fer, approx_fer_curve, exact_fer, exact_fer_curve_from_samples,
    normalized_detection_curve, snr_at_fer, DetectionCurve,
};
use crate::montecarlo::{
    binomial_ci, measure_awgn_fer, measure_qsf_fer, FerCurve, FerPoint, SimulationPlan,
};
use crate::numerics::QuadratureConfig;
use crate::threshold::{
    waterfall_from_fer_samples, waterfall_from_pd, FerSamples, WaterfallThreshold,
};

/// Which checks to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    /// Closed-form and decoder checks; a few seconds.
    Analytic,
    /// Everything, including the Monte-Carlo threshold and fading runs.
    Full,
}

pub const ANALYTIC_IDS: [u8; 5] = [1, 2, 7, 8, 9];
pub const ALL_IDS: [u8; 9] = [1, 2, 3, 4, 5, 6, 7, 8, 9];

pub fn criterion_ids(scope: Scope) -> &'static [u8] {
    match scope {
        Scope::Analytic => &ANALYTIC_IDS,
        Scope::Full => &ALL_IDS,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub id: u8,
    pub title: &'static str,
    pub expected: String,
    pub measured: String,
    pub passed: bool,
    pub elapsed: Duration,
}

impl Outcome {
    /// One line: `PASS [3] title: measured (expected ...) in 1.2s`.
    pub fn line(&self) -> String {
        format!(
            "{} [{}] {}: {} (expected {}) in {:.2?}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.measured,
            self.expected,
            self.elapsed
        )
    }
}

struct Check {
    expected: String,
    measured: String,
    passed: bool,
}

pub fn title(id: u8) -> &'static str {
    match id {
        1 => "uncoded analytic thresholds",
        2 => "step detection curve identity",
        3 => "convolutional (1,17/15) thresholds",
        4 => "turbo (1,5/7,5/7) thresholds",
        5 => "approximation vs fading simulation gap",
        6 => "exact fading FER vs simulation",
        7 => "decoder oracles",
        8 => "normalized curve area",
        9 => "sample access counts",
        _ => "unknown",
    }
}

fn budget(id: u8) -> Duration {
    Duration::from_secs(match id {
        1 | 2 | 9 => 1,
        7 => 60,
        3 => 600,
        4 => 1800,
        5 => 1200,
        _ => 3600,
    })
}

/// Runs one check. `seed` drives every random draw.
pub fn run_criterion(id: u8, seed: u64) -> Outcome {
    let start = Instant::now();
    let result = match id {
        1 => uncoded_thresholds(),
        2 => step_identity(),
        3 => convolutional_thresholds(seed),
        4 => turbo_thresholds(seed),
        5 => approximation_gap(seed),
        6 => exact_vs_simulation(seed),
        7 => decoder_oracles(seed),
        8 => normalized_area(),
        9 => access_counts(),
        _ => Ok(Check {
            expected: "a known criterion".into(),
            measured: format!("unknown id {id}"),
            passed: false,
        }),
    };
    let elapsed = start.elapsed();
    let (expected, measured, mut passed) = match result {
        Ok(c) => (c.expected, c.measured, c.passed),
        Err(e) => ("no error".into(), format!("error: {e}"), false),
    };
    let mut measured = measured;
    if elapsed > budget(id) {
        passed = false;
        measured.push_str(&format!("; over the {:?} budget", budget(id)));
    }
    Outcome {
        id,
        title: title(id),
        expected,
        measured,
        passed,
        elapsed,
    }
}

pub fn run_all(scope: Scope, seed: u64) -> Vec<Outcome> {
    criterion_ids(scope)
        .iter()
        .map(|&id| run_criterion(id, seed))
        .collect()
}

/// Fixed-width table of outcomes, one row per check.
pub fn write_table<W: Write>(mut out: W, outcomes: &[Outcome]) -> Result<()> {
    writeln!(
        out,
        "{:<4} {:<6} {:<40} {:>10}  result",
        "id", "status", "check", "time"
    )?;
    for o in outcomes {
        writeln!(
            out,
            "{:<4} {:<6} {:<40} {:>10.2?}  {} (expected {})",
            o.id,
            if o.passed { "PASS" } else { "FAIL" },
            o.title,
            o.elapsed,
            o.measured,
            o.expected
        )?;
    }
    Ok(())
}

fn uncoded_thresholds() -> Result<Check> {
    let cfg = QuadratureConfig::default();
    let mut measured = vec![];
    let mut passed = true;
    for (len, target) in [(256usize, 5.782), (1024, 7.083)] {
        let th = waterfall_from_pd(|g| uncoded_detection_probability(snr_of(g), len), &cfg)?;
        let db = th.gamma_w.db();
        passed &= (db - target).abs() <= 0.005;
        measured.push(format!("L={len}: {db:.4} dB"));
    }
    Ok(Check {
        expected: "5.782 and 7.083 dB within 0.005 dB".into(),
        measured: measured.join(", "),
        passed,
    })
}

fn step_identity() -> Result<Check> {
    let cfg = QuadratureConfig::default();
    let mut worst: f64 = 0.0;
    for th in [0.1, 1.0, 10.0] {
        let w = waterfall_from_pd(|g| if g >= th { 1.0 } else { 0.0 }, &cfg)?;
        worst = worst.max((w.gamma_w.linear() - th).abs() / th);
    }
    Ok(Check {
        expected: "relative error <= 1e-6 at 0.1, 1, 10".into(),
        measured: format!("worst relative error {worst:.2e}"),
        passed: worst <= 1e-6,
    })
}

fn thresholds_for(
    schemes: &[(usize, SchemeSpec)],
    plan: &SimulationPlan,
) -> Result<Vec<(usize, WaterfallThreshold, u64)>> {
    schemes
        .iter()
        .map(|(len, scheme)| {
            let curve = measure_awgn_fer(scheme, plan)?;
            Ok((
                *len,
                waterfall_from_fer_samples(&curve)?,
                curve.total_frames(),
            ))
        })
        .collect()
}

fn convolutional_thresholds(seed: u64) -> Result<Check> {
    let plan = SimulationPlan::default_convolutional(seed);
    let schemes = [256, 1024]
        .map(|len| SchemeSpec::convolutional(ConvCodeSpec::rsc_17_15(), len).map(|s| (len, s)))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let results = thresholds_for(&schemes, &plan)?;
    let mut passed = true;
    let mut measured = vec![];
    for ((len, th, frames), target) in results.iter().zip([-0.983, 0.023]) {
        let db = th.gamma_w.db();
        passed &= (db - target).abs() <= 0.3;
        measured.push(format!("L={len}: {db:.3} dB ({frames} frames)"));
    }
    Ok(Check {
        expected: "-0.983 and 0.023 dB within 0.3 dB".into(),
        measured: measured.join(", "),
        passed,
    })
}

/// Turbo scheme with a seeded random interleaver of length `len`.
pub fn turbo_scheme(len: usize, interleaver_seed: u64, iterations: usize) -> Result<SchemeSpec> {
    let code = TurboCodeSpec::rsc_5_7(make_interleaver(len, interleaver_seed)?)
        .with_iterations(iterations)?;
    SchemeSpec::turbo(code)
}

fn turbo_thresholds(seed: u64) -> Result<Check> {
    let plan = SimulationPlan::default_turbo(seed);
    let schemes = [256, 1024]
        .map(|len| turbo_scheme(len, seed, TurboCodeSpec::DEFAULT_ITERATIONS).map(|s| (len, s)))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let results = thresholds_for(&schemes, &plan)?;
    let mut passed = true;
    let mut measured = vec![];
    let mut dbs = vec![];
    for ((len, th, frames), target) in results.iter().zip([-4.401, -4.312]) {
        let db = th.gamma_w.db();
        passed &= (db - target).abs() <= 0.3;
        dbs.push(db);
        measured.push(format!("L={len}: {db:.3} dB ({frames} frames)"));
    }
    let spread = (dbs[0] - dbs[1]).abs();
    passed &= spread < 0.3;
    measured.push(format!("difference {spread:.3} dB"));
    Ok(Check {
        expected: "-4.401 and -4.312 dB within 0.3 dB, difference < 0.3 dB".into(),
        measured: measured.join(", "),
        passed,
    })
}

/// Gap between the threshold approximation and a measured fading curve at
/// `level`, and half the spread of the Wilson-bound curves there.
fn gap_at_level(approx: &[(Snr, f64)], measured: &FerCurve, level: f64) -> Result<(f64, f64)> {
    let mut mid = vec![];
    let mut low = vec![];
    let mut high = vec![];
    for p in measured.points() {
        let (lo, hi) = binomial_ci(p.errors, p.frames, 0.95)?;
        mid.push((p.snr, p.fer));
        low.push((p.snr, lo));
        high.push((p.snr, hi));
    }
    let gap = snr_at_fer(&mid, level)? - snr_at_fer(approx, level)?;
    let half_width = 0.5 * (snr_at_fer(&high, level)? - snr_at_fer(&low, level)?).abs();
    Ok((gap, half_width))
}

fn approximation_gap(seed: u64) -> Result<Check> {
    const FRAMES: u64 = 10_000;
    let avg_grid = (0..=36)
        .map(|d| Snr::from_db(d as f64))
        .collect::<Result<Vec<_>>>()?;

    let uncoded = SchemeSpec::uncoded(256)?;
    let uncoded_th = waterfall_from_pd(
        |g| uncoded_detection_probability(snr_of(g), 256),
        &QuadratureConfig::default(),
    )?;
    let conv = SchemeSpec::convolutional(ConvCodeSpec::rsc_17_15(), 256)?;
    let conv_curve = measure_awgn_fer(&conv, &SimulationPlan::default_convolutional(seed))?;
    let conv_th = waterfall_from_fer_samples(&conv_curve)?;

    let mut passed = true;
    let mut measured = vec![];
    for (name, scheme, th) in [
        ("uncoded", &uncoded, &uncoded_th),
        ("conv", &conv, &conv_th),
    ] {
        let sim = measure_qsf_fer(scheme, &avg_grid, FRAMES, seed)?;
        let approx: Vec<(Snr, f64)> = avg_grid.iter().map(|&a| (a, approx_fer(a, th))).collect();
        for level in [1e-1, 1e-2] {
            let (gap, half) = gap_at_level(&approx, &sim, level)?;
            passed &= gap.abs() <= 0.4 + half;
            measured.push(format!("{name} @{level}: {gap:+.3} dB (+-{half:.3})"));
        }
    }
    Ok(Check {
        expected: "|gap| <= 0.4 dB + half CI width".into(),
        measured: measured.join(", "),
        passed,
    })
}

fn exact_vs_simulation(seed: u64) -> Result<Check> {
    const FRAMES: u64 = 10_000;
    let len = 256;
    let avg_grid = [10.0, 15.0, 20.0, 25.0, 30.0]
        .iter()
        .map(|&d| Snr::from_db(d))
        .collect::<Result<Vec<_>>>()?;
    let sim = measure_qsf_fer(&SchemeSpec::uncoded(len)?, &avg_grid, FRAMES, seed)?;
    let cfg = QuadratureConfig::default();
    let mut passed = true;
    let mut measured = vec![];
    for p in sim.points() {
        let exact = exact_fer(|g| uncoded_error_probability(snr_of(g), len), p.snr, &cfg)?;
        let (lo, hi) = binomial_ci(p.errors, p.frames, 0.95)?;
        let inside = lo <= exact && exact <= hi;
        passed &= inside;
        measured.push(format!(
            "{:.0} dB: {exact:.5} in [{lo:.5}, {hi:.5}]{}",
            p.snr.db(),
            if inside { "" } else { " no" }
        ));
    }
    Ok(Check {
        expected: "exact value inside every 95% Wilson interval".into(),
        measured: measured.join(", "),
        passed,
    })
}

fn antipodal(bit: u8) -> f64 {
    1.0 - 2.0 * bit as f64
}

fn correlation(llrs: &[f64], code: &[u8]) -> f64 {
    llrs.iter().zip(code).map(|(l, &c)| l * antipodal(c)).sum()
}

fn all_words(len: usize) -> impl Iterator<Item = Vec<u8>> {
    (0..1u32 << len).map(move |w| (0..len).map(|i| ((w >> i) & 1) as u8).collect())
}

/// Maximum-likelihood information word by enumeration.
pub fn exhaustive_ml(llrs: &[f64], spec: &ConvCodeSpec, len: usize) -> Vec<u8> {
    let mut best = (f64::NEG_INFINITY, vec![]);
    for bits in all_words(len) {
        let m = correlation(llrs, &rsc_encode(&bits, spec).interleaved());
        if m > best.0 {
            best = (m, bits);
        }
    }
    best.1
}

/// Posterior LLRs `ln P(u_k = 0) / P(u_k = 1)` by enumeration.
pub fn brute_force_posteriors(llrs: &[f64], apriori: &[f64], spec: &ConvCodeSpec) -> Vec<f64> {
    let len = apriori.len();
    let words: Vec<(Vec<u8>, f64)> = all_words(len)
        .map(|bits| {
            let code = rsc_encode(&bits, spec).interleaved();
            let metric = 0.5 * correlation(llrs, &code) + 0.5 * correlation(apriori, &bits);
            (bits, metric)
        })
        .collect();
    let peak = words.iter().map(|w| w.1).fold(f64::NEG_INFINITY, f64::max);
    (0..len)
        .map(|k| {
            let (mut zero, mut one) = (0.0, 0.0);
            for (bits, m) in &words {
                let w = (m - peak).exp();
                if bits[k] == 0 {
                    zero += w;
                } else {
                    one += w;
                }
            }
            zero.ln() - one.ln()
        })
        .collect()
}

fn noisy_frame(rng: &mut ChaCha8Rng, spec: &ConvCodeSpec, len: usize) -> Result<Vec<f64>> {
    let bits: Vec<u8> = (0..len).map(|_| rng.random::<bool>() as u8).collect();
    let gamma = Snr::from_linear(rng.random_range(0.3..3.0))?;
    let rx = add_awgn(
        &bpsk_modulate(&rsc_encode(&bits, spec).interleaved(), 1.0)?,
        gamma,
        rng,
    )?;
    Ok(LlrFrame::from_samples(&rx.samples, gamma, 1.0)
        .values()
        .to_vec())
}

fn decoder_oracles(seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let specs = [
        ConvCodeSpec::rsc_17_15(),
        ConvCodeSpec::rsc_5_7(true),
        ConvCodeSpec::rsc_5_7(false),
    ];
    let mut mismatches = 0;
    for trial in 0..1000 {
        let spec = &specs[trial % specs.len()];
        let len = 1 + trial % 8;
        let llrs = noisy_frame(&mut rng, spec, len)?;
        if viterbi_decode(&LlrFrame::new(llrs.clone()), spec)? != exhaustive_ml(&llrs, spec, len) {
            mismatches += 1;
        }
    }
    let mut worst: f64 = 0.0;
    for trial in 0..1000 {
        let spec = &specs[trial % specs.len()];
        let len = 1 + trial % 4;
        let llrs = noisy_frame(&mut rng, spec, len)?;
        let apriori: Vec<f64> = (0..len).map(|_| rng.random_range(-2.0..2.0)).collect();
        let out = bcjr_decode(&LlrFrame::new(llrs.clone()), &apriori, spec)?;
        for (app, oracle) in out
            .aposteriori
            .iter()
            .zip(brute_force_posteriors(&llrs, &apriori, spec))
        {
            let p = |l: f64| 1.0 / (1.0 + (-l).exp());
            worst = worst.max((p(*app) - p(oracle)).abs());
        }
    }
    Ok(Check {
        expected: "0 Viterbi mismatches, BCJR marginal error <= 1e-8".into(),
        measured: format!(
            "{mismatches} mismatches in 1000 frames, worst marginal error {worst:.1e}"
        ),
        passed: mismatches == 0 && worst <= 1e-8,
    })
}

fn normalized_area() -> Result<Check> {
    let len = 256;
    let th = waterfall_from_pd(
        |g| uncoded_detection_probability(snr_of(g), len),
        &QuadratureConfig::default(),
    )?;
    let points = 20_001;
    let grid = (0..points)
        .map(|i| Snr::from_linear(10f64.powf(-2.0 + 6.0 * i as f64 / (points - 1) as f64)))
        .collect::<Result<Vec<_>>>()?;
    let curve = DetectionCurve::analytic(&grid, |g| uncoded_detection_probability(snr_of(g), len))?;
    let area = normalized_detection_curve(&curve)?.area();
    let target = 1.0 / th.gamma_w.linear();
    let rel = (area - target).abs() / target;
    Ok(Check {
        expected: format!("area = 1/gamma_w = {target:.6} within 1%"),
        measured: format!("area {area:.6}, relative difference {rel:.2e}"),
        passed: rel <= 0.01,
    })
}

/// Wraps a curve and counts sample reads.
pub struct CountingSamples<'a> {
    inner: &'a FerCurve,
    reads: Cell<u64>,
}

impl<'a> CountingSamples<'a> {
    pub fn new(inner: &'a FerCurve) -> Self {
        Self {
            inner,
            reads: Cell::new(0),
        }
    }

    pub fn reads(&self) -> u64 {
        self.reads.get()
    }

    pub fn reset(&self) {
        self.reads.set(0);
    }
}

impl FerSamples for CountingSamples<'_> {
    fn len(&self) -> usize {
        self.inner.len()
    }

    fn sample(&self, index: usize) -> FerPoint {
        self.reads.set(self.reads.get() + 1);
        self.inner.sample(index)
    }
}

fn access_counts() -> Result<Check> {
    let (n, m) = (1000usize, 1000usize);
    let len = 256;
    let grid = (1..=n)
        .map(|i| Snr::from_linear(0.01 * i as f64))
        .collect::<Result<Vec<_>>>()?;
    let curve = FerCurve::analytic(&grid, |g| uncoded_error_probability(snr_of(g), len))?;
    let avgs = (0..m)
        .map(|j| Snr::from_db(40.0 * j as f64 / m as f64))
        .collect::<Result<Vec<_>>>()?;

    let counting = CountingSamples::new(&curve);
    approx_fer_curve(&counting, &avgs)?;
    let approx_reads = counting.reads();
    counting.reset();
    exact_fer_curve_from_samples(&counting, &avgs)?;
    let exact_reads = counting.reads();

    let (n, m) = (n as u64, m as u64);
    Ok(Check {
        expected: format!("approximation <= {}, exact grid >= {}", n + 10 * m, n * m),
        measured: format!("approximation {approx_reads}, exact grid {exact_reads}"),
        passed: approx_reads <= n + 10 * m && exact_reads >= n * m,
    })
}

fn snr_of(g: f64) -> Snr {
    Snr::from_linear(g).expect("integration nodes are nonnegative")
}
