//! Reproducible Monte-Carlo FER measurement.
//!
//! The random stream of frame `j` at grid point `i` is a pure function of
//! `(seed, i, j)`: a ChaCha8 generator keyed by the master seed, with the
//! 64-bit stream id carrying the point and frame indices. Frames are run in
//! fixed-size batches and tallied in frame order, so the counts do not depend
//! on the number of worker threads.

use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::channel::{sample_instantaneous_snr, Snr};
use crate::codecs::{transmit_and_detect, SchemeSpec};
use crate::error::{Error, Result};

const BATCH: u64 = 64;
const MAX_POINTS: usize = 1 << 22;
const MAX_FRAMES: u64 = 1 << 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Experiment {
    Awgn = 0,
    QuasiStatic = 1,
}

/// Generator for one frame trial.
pub fn frame_rng(seed: u64, point: usize, frame: u64) -> ChaCha8Rng {
    frame_rng_for(Experiment::Awgn, seed, point, frame)
}

fn frame_rng_for(exp: Experiment, seed: u64, point: usize, frame: u64) -> ChaCha8Rng {
    debug_assert!(point < MAX_POINTS && frame < MAX_FRAMES);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((exp as u64) << 62) | ((point as u64) << 40) | frame);
    rng
}

/// Grid and stopping rule for an AWGN FER measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationPlan {
    snr_grid: Vec<Snr>,
    min_frames: u64,
    max_frames: u64,
    target_errors: u64,
    seed: u64,
}

impl SimulationPlan {
    pub fn new(
        snr_grid: Vec<Snr>,
        min_frames: u64,
        max_frames: u64,
        target_errors: u64,
        seed: u64,
    ) -> Result<Self> {
        let plan = Self {
            snr_grid,
            min_frames,
            max_frames,
            target_errors,
            seed,
        };
        plan.validate()?;
        Ok(plan)
    }

    /// `points` values `start, start + step, ...` in linear SNR.
    pub fn linear_grid(
        start: f64,
        step: f64,
        points: usize,
        min_frames: u64,
        max_frames: u64,
        target_errors: u64,
        seed: u64,
    ) -> Result<Self> {
        if !(start > 0.0) || !(step > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "grid start and step must be positive, got start={start} step={step}"
            )));
        }
        let grid = (0..points)
            .map(|i| Snr::from_linear(start + i as f64 * step))
            .collect::<Result<Vec<_>>>()?;
        Self::new(grid, min_frames, max_frames, target_errors, seed)
    }

    /// Turbo default: `0.05, 0.10, ..., 1.0`, 2000 frames per point.
    pub fn default_turbo(seed: u64) -> Self {
        Self::linear_grid(0.05, 0.05, 20, 2000, 2000, u64::MAX, seed).expect("valid plan")
    }

    /// Convolutional default: `0.1, 0.2, ..., 3.0`, 2000 frames per point.
    pub fn default_convolutional(seed: u64) -> Self {
        Self::linear_grid(0.1, 0.1, 30, 2000, 2000, u64::MAX, seed).expect("valid plan")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.snr_grid.is_empty() {
            return bad("SNR grid is empty".into());
        }
        if self.snr_grid.len() > MAX_POINTS {
            return bad(format!("SNR grid has more than {MAX_POINTS} points"));
        }
        if self.snr_grid[0].linear() <= 0.0 {
            return bad("SNR grid values must be positive".into());
        }
        check_equal_spacing(&self.snr_grid)?;
        if self.min_frames < 1 {
            return bad("min_frames must be at least 1".into());
        }
        if self.max_frames < self.min_frames || self.max_frames > MAX_FRAMES {
            return bad(format!(
                "max_frames must lie in [min_frames, 2^40], got {}",
                self.max_frames
            ));
        }
        if self.target_errors < 1 {
            return bad("target_errors must be at least 1".into());
        }
        Ok(())
    }

    pub fn snr_grid(&self) -> &[Snr] {
        &self.snr_grid
    }

    pub fn min_frames(&self) -> u64 {
        self.min_frames
    }

    pub fn max_frames(&self) -> u64 {
        self.max_frames
    }

    pub fn target_errors(&self) -> u64 {
        self.target_errors
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Strictly increasing with relative spacing deviation below 1e-9.
fn check_equal_spacing(grid: &[Snr]) -> Result<f64> {
    if grid.len() < 2 {
        return Ok(0.0);
    }
    let step = grid[1].linear() - grid[0].linear();
    if !(step > 0.0) {
        return Err(Error::InvalidParameter(
            "SNR grid must be strictly increasing".into(),
        ));
    }
    for w in grid.windows(2) {
        let d = w[1].linear() - w[0].linear();
        if !(d > 0.0) {
            return Err(Error::InvalidParameter(
                "SNR grid must be strictly increasing".into(),
            ));
        }
        if ((d - step) / step).abs() >= 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "SNR grid must be equally spaced in linear scale (step {step}, found {d})"
            )));
        }
    }
    Ok(step)
}

/// One grid point of a measured or sampled FER curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FerPoint {
    pub snr: Snr,
    pub frames: u64,
    pub errors: u64,
    pub fer: f64,
}

impl FerPoint {
    pub fn measured(snr: Snr, frames: u64, errors: u64) -> Self {
        debug_assert!(errors <= frames && frames > 0);
        Self {
            snr,
            frames,
            errors,
            fer: errors as f64 / frames as f64,
        }
    }

    /// A point whose FER comes from a model rather than counted frames.
    pub fn analytic(snr: Snr, fer: f64) -> Self {
        Self {
            snr,
            frames: 0,
            errors: 0,
            fer: fer.clamp(0.0, 1.0),
        }
    }

    /// No successful frame among those observed (or a modelled FER of exactly 1).
    pub fn saturated(&self) -> bool {
        self.fer >= 1.0
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    snr_linear: f64,
    snr_db: f64,
    frames: u64,
    errors: u64,
    fer: f64,
}

/// FER versus SNR on an ordered grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FerCurve {
    points: Vec<FerPoint>,
}

impl FerCurve {
    pub fn new(points: Vec<FerPoint>) -> Result<Self> {
        for p in &points {
            if !(0.0..=1.0).contains(&p.fer) {
                return Err(Error::InvalidParameter(format!(
                    "FER {} outside [0, 1]",
                    p.fer
                )));
            }
        }
        if points
            .windows(2)
            .any(|w| w[1].snr.linear() <= w[0].snr.linear())
        {
            return Err(Error::InvalidParameter(
                "FER curve SNRs must be strictly increasing".into(),
            ));
        }
        Ok(Self { points })
    }

    /// Samples a model FER on `grid`.
    pub fn analytic<F: Fn(f64) -> f64>(grid: &[Snr], pe: F) -> Result<Self> {
        Self::new(
            grid.iter()
                .map(|&g| FerPoint::analytic(g, pe(g.linear())))
                .collect(),
        )
    }

    pub fn points(&self) -> &[FerPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Grid spacing in linear SNR, validated to be constant.
    pub fn spacing(&self) -> Result<f64> {
        let grid: Vec<Snr> = self.points.iter().map(|p| p.snr).collect();
        check_equal_spacing(&grid)
    }

    pub fn total_frames(&self) -> u64 {
        self.points.iter().map(|p| p.frames).sum()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for p in &self.points {
            w.serialize(CsvRow {
                snr_linear: p.snr.linear(),
                snr_db: p.snr.db(),
                frames: p.frames,
                errors: p.errors,
                fer: p.fer,
            })
            .map_err(|e| Error::Io(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(input);
        let headers = r.headers().map_err(|e| Error::Io(e.to_string()))?.clone();
        if headers
            != csv::StringRecord::from(vec!["snr_linear", "snr_db", "frames", "errors", "fer"])
        {
            return Err(Error::InvalidConfig(format!(
                "unexpected FER curve header {headers:?}"
            )));
        }
        let mut points = Vec::new();
        for row in r.deserialize::<CsvRow>() {
            let row = row.map_err(|e| Error::Io(e.to_string()))?;
            let snr = Snr::from_linear(row.snr_linear)?;
            if row.frames > 0 {
                if row.errors > row.frames {
                    return Err(Error::InvalidConfig(
                        "errors exceed frames in FER curve".into(),
                    ));
                }
                points.push(FerPoint::measured(snr, row.frames, row.errors));
            } else {
                points.push(FerPoint::analytic(snr, row.fer));
            }
        }
        Self::new(points)
    }
}

/// Runs frames `0..` at one point until the stopping rule fires.
fn run_point<F>(plan_min: u64, plan_max: u64, target: u64, trial: F) -> Result<(u64, u64)>
where
    F: Fn(u64) -> Result<bool> + Sync,
{
    let (mut frames, mut errors) = (0u64, 0u64);
    while frames < plan_max {
        let end = (frames + BATCH).min(plan_max);
        let outcomes = (frames..end)
            .into_par_iter()
            .map(&trial)
            .collect::<Result<Vec<bool>>>()?;
        for ok in outcomes {
            frames += 1;
            if !ok {
                errors += 1;
            }
            if errors >= target && frames >= plan_min {
                return Ok((frames, errors));
            }
        }
    }
    Ok((frames, errors))
}

/// AWGN frame error rate of `scheme` at every point of the plan.
pub fn measure_awgn_fer(scheme: &SchemeSpec, plan: &SimulationPlan) -> Result<FerCurve> {
    plan.validate()?;
    let points = plan
        .snr_grid
        .iter()
        .enumerate()
        .map(|(i, &gamma)| {
            let (frames, errors) =
                run_point(plan.min_frames, plan.max_frames, plan.target_errors, |j| {
                    let mut rng = frame_rng_for(Experiment::Awgn, plan.seed, i, j);
                    transmit_and_detect(scheme, gamma, &mut rng)
                })?;
            Ok(FerPoint::measured(gamma, frames, errors))
        })
        .collect::<Result<Vec<_>>>()?;
    FerCurve::new(points)
}

/// Quasi-static fading FER: every frame draws its own instantaneous SNR.
pub fn measure_qsf_fer(
    scheme: &SchemeSpec,
    avg_snr_grid: &[Snr],
    frames_per_point: u64,
    seed: u64,
) -> Result<FerCurve> {
    if frames_per_point < 1 || frames_per_point > MAX_FRAMES {
        return Err(Error::InvalidParameter(
            "frames_per_point must be in 1..=2^40".into(),
        ));
    }
    if avg_snr_grid.is_empty() {
        return Err(Error::InvalidParameter("average SNR grid is empty".into()));
    }
    let points = avg_snr_grid
        .iter()
        .enumerate()
        .map(|(i, &avg)| {
            if avg.linear() <= 0.0 {
                return Err(Error::InvalidSnr(avg.linear()));
            }
            let (frames, errors) = run_point(frames_per_point, frames_per_point, u64::MAX, |j| {
                let mut rng = frame_rng_for(Experiment::QuasiStatic, seed, i, j);
                let gamma = sample_instantaneous_snr(avg, &mut rng)?;
                if gamma.linear() == 0.0 {
                    return Ok(false);
                }
                transmit_and_detect(scheme, gamma, &mut rng)
            })?;
            Ok(FerPoint::measured(avg, frames, errors))
        })
        .collect::<Result<Vec<_>>>()?;
    FerCurve::new(points)
}

/// Wilson score interval for `errors` out of `trials` at two-sided `confidence`.
pub fn binomial_ci(errors: u64, trials: u64, confidence: f64) -> Result<(f64, f64)> {
    if trials == 0 || errors > trials {
        return Err(Error::InvalidParameter(format!(
            "need 0 <= errors <= trials and trials >= 1, got {errors}/{trials}"
        )));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "confidence {confidence} not in (0, 1)"
        )));
    }
    let z = Normal::standard().inverse_cdf(0.5 + 0.5 * confidence);
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    Ok(((center - half).max(0.0), (center + half).min(1.0)))
}
