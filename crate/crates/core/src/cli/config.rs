//! Experiment configuration, read from a TOML file.
//!
//! ```toml
//! [scheme]
//! kind = "convolutional"      # uncoded | convolutional | turbo
//! frame_length = 256
//! feedforward = "17"          # octal, optional for the default codes
//! feedback = "15"
//!
//! [plan]                      # AWGN grid, equally spaced in linear SNR
//! start_db = -10.0
//! stop_db = 4.771
//! points = 30
//! min_frames = 2000
//! seed = 1
//!
//! [average]                   # average SNR grid for fer and simulate
//! start_db = 0.0
//! stop_db = 40.0
//! points = 41
//!
//! [output]
//! directory = "out"
//! format = "structured"       # csv | structured
//! ```
//!
//! SNR values are in dB and converted to linear once, here.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::channel::Snr;
use crate::codecs::{make_interleaver, ConvCodeSpec, SchemeSpec, TurboCodeSpec};
use crate::error::{Error, Result};
use crate::montecarlo::SimulationPlan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Structured,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKindName {
    Uncoded,
    Convolutional,
    Turbo,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    pub kind: SchemeKindName,
    pub frame_length: usize,
    pub feedforward: Option<String>,
    pub feedback: Option<String>,
    pub terminated: Option<bool>,
    pub iterations: Option<usize>,
    pub interleaver_seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanSection {
    pub start_db: f64,
    pub stop_db: f64,
    pub points: usize,
    pub min_frames: u64,
    pub max_frames: Option<u64>,
    pub target_errors: Option<u64>,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AverageSection {
    pub start_db: f64,
    pub stop_db: f64,
    pub points: usize,
}

impl Default for AverageSection {
    fn default() -> Self {
        Self {
            start_db: 0.0,
            stop_db: 40.0,
            points: 41,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateSection {
    pub frames_per_point: u64,
    pub confidence: f64,
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self {
            frames_per_point: 10_000,
            confidence: 0.95,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PerfplotSection {
    /// Frame lengths to plot; defaults to the scheme's own.
    pub frame_lengths: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub directory: PathBuf,
    pub format: ReportFormat,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            format: ReportFormat::Structured,
        }
    }
}

fn default_seed() -> u64 {
    1
}

/// Raw file contents; [`ExperimentConfig::validate`] turns it into an [`Experiment`].
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scheme: SchemeSection,
    pub plan: Option<PlanSection>,
    #[serde(default)]
    pub average: AverageSection,
    #[serde(default)]
    pub simulate: SimulateSection,
    #[serde(default)]
    pub perfplot: PerfplotSection,
    #[serde(default)]
    pub output: OutputSection,
}

/// A validated configuration with linear SNR grids.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub scheme: SchemeSpec,
    pub plan: SimulationPlan,
    pub average_grid: Vec<Snr>,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidConfig(msg.into())
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| invalid(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Builds the scheme at `frame_length`, keeping every other setting.
    pub fn scheme_with_length(&self, frame_length: usize) -> Result<SchemeSpec> {
        let s = &self.scheme;
        if frame_length == 0 {
            return Err(invalid("scheme.frame_length must be at least 1"));
        }
        let generators = |ff: &str, fb: &str| -> Result<ConvCodeSpec> {
            let ff = s.feedforward.as_deref().unwrap_or(ff);
            let fb = s.feedback.as_deref().unwrap_or(fb);
            let fb_value = u32::from_str_radix(fb.trim(), 8)
                .map_err(|_| invalid(format!("scheme.feedback is not octal: {fb:?}")))?;
            if fb_value < 2 {
                return Err(invalid("scheme.feedback must have memory of at least 1"));
            }
            let memory = (u32::BITS - fb_value.leading_zeros() - 1) as usize;
            ConvCodeSpec::from_octal(ff, fb, memory, s.terminated.unwrap_or(true))
                .map_err(|e| invalid(format!("scheme generators: {e}")))
        };
        let spec = match s.kind {
            SchemeKindName::Uncoded => {
                if s.feedforward.is_some() || s.feedback.is_some() || s.iterations.is_some() {
                    return Err(invalid("uncoded scheme takes no generators or iterations"));
                }
                SchemeSpec::uncoded(frame_length)
            }
            SchemeKindName::Convolutional => {
                if s.iterations.is_some() || s.interleaver_seed.is_some() {
                    return Err(invalid(
                        "convolutional scheme takes no iterations or interleaver",
                    ));
                }
                SchemeSpec::convolutional(generators("17", "15")?, frame_length)
            }
            SchemeKindName::Turbo => {
                if s.terminated == Some(false) {
                    return Err(invalid("turbo constituent codes are always terminated"));
                }
                let interleaver = make_interleaver(frame_length, s.interleaver_seed.unwrap_or(1))?;
                let iterations = s.iterations.unwrap_or(TurboCodeSpec::DEFAULT_ITERATIONS);
                TurboCodeSpec::new(generators("5", "7")?, interleaver, iterations)
                    .and_then(SchemeSpec::turbo)
            }
        };
        spec.map_err(|e| match e {
            Error::InvalidConfig(_) => e,
            other => invalid(format!("scheme: {other}")),
        })
    }

    fn build_plan(&self) -> Result<SimulationPlan> {
        let Some(p) = &self.plan else {
            return Ok(match self.scheme.kind {
                SchemeKindName::Turbo => SimulationPlan::default_turbo(default_seed()),
                SchemeKindName::Convolutional => {
                    SimulationPlan::default_convolutional(default_seed())
                }
                SchemeKindName::Uncoded => SimulationPlan::linear_grid(
                    0.1,
                    0.1,
                    200,
                    2000,
                    2000,
                    u64::MAX,
                    default_seed(),
                )?,
            });
        };
        if !(p.start_db.is_finite() && p.stop_db.is_finite()) {
            return Err(invalid("plan.start_db and plan.stop_db must be finite"));
        }
        if p.points < 2 {
            return Err(invalid("plan.points must be at least 2"));
        }
        if p.stop_db <= p.start_db {
            return Err(invalid("plan.stop_db must exceed plan.start_db"));
        }
        let start = Snr::from_db(p.start_db)?.linear();
        let stop = Snr::from_db(p.stop_db)?.linear();
        let step = (stop - start) / (p.points - 1) as f64;
        SimulationPlan::linear_grid(
            start,
            step,
            p.points,
            p.min_frames,
            p.max_frames.unwrap_or(p.min_frames),
            p.target_errors.unwrap_or(u64::MAX),
            p.seed,
        )
        .map_err(|e| invalid(format!("plan: {e}")))
    }

    /// Average SNR grid, equally spaced in dB.
    pub fn average_grid(&self, start_db: f64, stop_db: f64, points: usize) -> Result<Vec<Snr>> {
        if !(start_db.is_finite() && stop_db.is_finite()) {
            return Err(invalid("average SNR range must be finite"));
        }
        if points == 0 {
            return Err(invalid("average SNR grid is empty"));
        }
        if points > 1 && stop_db <= start_db {
            return Err(invalid("average stop_db must exceed start_db"));
        }
        let step = if points > 1 {
            (stop_db - start_db) / (points - 1) as f64
        } else {
            0.0
        };
        (0..points)
            .map(|i| Snr::from_db(start_db + i as f64 * step))
            .collect()
    }

    pub fn validate(self) -> Result<Experiment> {
        let scheme = self.scheme_with_length(self.scheme.frame_length)?;
        let plan = self.build_plan()?;
        let a = &self.average;
        let average_grid = self.average_grid(a.start_db, a.stop_db, a.points)?;
        let sim = &self.simulate;
        if sim.frames_per_point == 0 {
            return Err(invalid("simulate.frames_per_point must be at least 1"));
        }
        if !(sim.confidence > 0.0 && sim.confidence < 1.0) {
            return Err(invalid("simulate.confidence must lie in (0, 1)"));
        }
        for &len in &self.perfplot.frame_lengths {
            self.scheme_with_length(len)?;
        }
        Ok(Experiment {
            config: self,
            scheme,
            plan,
            average_grid,
        })
    }
}

impl Experiment {
    pub fn from_path(path: &Path) -> Result<Self> {
        ExperimentConfig::load(path)?.validate()
    }

    pub fn is_uncoded(&self) -> bool {
        self.config.scheme.kind == SchemeKindName::Uncoded
    }

    /// Frame lengths for `perfplot`.
    pub fn perfplot_lengths(&self) -> Vec<usize> {
        if self.config.perfplot.frame_lengths.is_empty() {
            vec![self.scheme.frame_length()]
        } else {
            self.config.perfplot.frame_lengths.clone()
        }
    }
}
