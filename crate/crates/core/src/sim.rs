//! Monte Carlo evaluation of the encode → synthesize → decode loop.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codec::{self, CodePlan, MagneticDecode, SymbolWord};
use crate::error::{Error, Result};
use crate::noise::NoiseConfig;
use crate::surface::TextureModel;
use crate::SimRng;

/// z for a two-sided 95% interval.
const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let (k, n) = (k as f64, n as f64);
    let p = k / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorTally {
    pub errors: u64,
    pub rate: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
}

impl ErrorTally {
    fn new(errors: u64, trials: u64) -> Self {
        let (wilson_lo, wilson_hi) = wilson_interval(errors, trials);
        Self {
            errors,
            rate: errors as f64 / trials as f64,
            wilson_lo,
            wilson_hi,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub trials: u64,
    pub rng_seed: u64,
    pub electrical: ErrorTally,
    pub magnetic: ErrorTally,
    pub surface: ErrorTally,
    /// A word fails if any channel fails.
    pub word: ErrorTally,
    /// Magnetic traces that fell below the detection floor (counted as errors).
    pub magnetic_no_detection: u64,
    pub noise: NoiseConfig,
}

/// Per-trial outcome, the rows of the optional CSV matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub true_word: u32,
    pub decoded_word: Option<u32>,
    pub electrical_ok: bool,
    pub magnetic_ok: bool,
    pub surface_ok: bool,
}

impl TrialRecord {
    pub fn word_ok(&self) -> bool {
        self.electrical_ok && self.magnetic_ok && self.surface_ok
    }
}

/// Generator for trial `i`: fresh ChaCha stream `i` of the master seed, so
/// results do not depend on scheduling.
fn trial_rng(seed: u64, trial: u64) -> SimRng {
    let mut rng = SimRng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn run_one(
    plan: &CodePlan,
    model: &TextureModel,
    noise: &NoiseConfig,
    trial: u64,
    word: Option<u32>,
    seed: u64,
) -> Result<(TrialRecord, bool)> {
    let mut rng = trial_rng(seed, trial);
    let a = &plan.allocation;
    let value = word.unwrap_or_else(|| rng.random_range(0..a.word_count()));
    let truth = SymbolWord::from_value(value, a)?;
    let spec = codec::encode(&truth, plan)?;
    let traces = codec::synthesize(&spec, plan, noise, &mut rng)?;

    let s_e = codec::decode_electrical(&traces.frames, plan)?;
    let mag = codec::decode_magnetic(&traces.trace, plan)?;
    let s_s = codec::decode_surface(&traces.clip, plan, model)?;
    let s_m = match mag {
        MagneticDecode::State(s) => Some(s as u32),
        MagneticDecode::NoDetection => None,
    };
    let decoded = s_m.map(|s_m| {
        SymbolWord {
            s_e: s_e as u32,
            s_m,
            s_s: s_s as u32,
        }
        .value(a)
    });
    Ok((
        TrialRecord {
            trial,
            true_word: value,
            decoded_word: decoded,
            electrical_ok: s_e as u32 == truth.s_e,
            magnetic_ok: s_m == Some(truth.s_m),
            surface_ok: s_s as u32 == truth.s_s,
        },
        s_m.is_none(),
    ))
}

fn run(
    plan: &CodePlan,
    model: &TextureModel,
    noise: &NoiseConfig,
    words: &[Option<u32>],
    seed: u64,
) -> Result<(TrialReport, Vec<TrialRecord>)> {
    if words.is_empty() {
        return Err(Error::Config("Monte Carlo needs >= 1 trial".into()));
    }
    plan.validate()?;
    codec::check_model(plan, model)?;
    noise.validate()?;
    let outcomes: Vec<(TrialRecord, bool)> = words
        .par_iter()
        .enumerate()
        .map(|(i, w)| run_one(plan, model, noise, i as u64, *w, seed))
        .collect::<Result<_>>()?;
    let n = outcomes.len() as u64;
    let count = |f: &dyn Fn(&TrialRecord) -> bool| outcomes.iter().filter(|(r, _)| !f(r)).count() as u64;
    let report = TrialReport {
        trials: n,
        rng_seed: seed,
        electrical: ErrorTally::new(count(&|r| r.electrical_ok), n),
        magnetic: ErrorTally::new(count(&|r| r.magnetic_ok), n),
        surface: ErrorTally::new(count(&|r| r.surface_ok), n),
        word: ErrorTally::new(count(&|r| r.word_ok()), n),
        magnetic_no_detection: outcomes.iter().filter(|(_, nd)| *nd).count() as u64,
        noise: noise.clone(),
    };
    Ok((report, outcomes.into_iter().map(|(r, _)| r).collect()))
}

/// `trials` uniformly random words, each with independent noise draws.
pub fn run_monte_carlo(
    plan: &CodePlan,
    model: &TextureModel,
    noise: &NoiseConfig,
    trials: u64,
    rng_seed: u64,
) -> Result<TrialReport> {
    Ok(run_monte_carlo_records(plan, model, noise, trials, rng_seed)?.0)
}

pub fn run_monte_carlo_records(
    plan: &CodePlan,
    model: &TextureModel,
    noise: &NoiseConfig,
    trials: u64,
    rng_seed: u64,
) -> Result<(TrialReport, Vec<TrialRecord>)> {
    run(plan, model, noise, &vec![None; trials as usize], rng_seed)
}

/// Every word of the plan exactly once, in order.
pub fn run_exhaustive(
    plan: &CodePlan,
    model: &TextureModel,
    noise: &NoiseConfig,
    rng_seed: u64,
) -> Result<(TrialReport, Vec<TrialRecord>)> {
    let words: Vec<Option<u32>> = (0..plan.allocation.word_count()).map(Some).collect();
    run(plan, model, noise, &words, rng_seed)
}

pub fn write_records_csv(path: impl AsRef<Path>, records: &[TrialRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub report: TrialReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub field: String,
    pub points: Vec<SweepPoint>,
    /// Whether each channel's error rate never drops as the swept value grows.
    pub non_decreasing: ChannelFlags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelFlags {
    pub electrical: bool,
    pub magnetic: bool,
    pub surface: bool,
    pub word: bool,
}

/// One Monte Carlo run per value of the named [`NoiseConfig`] field, all
/// with the same seed so that the runs share their random draws.
pub fn sensitivity_sweep(
    plan: &CodePlan,
    model: &TextureModel,
    base: &NoiseConfig,
    field: &str,
    values: &[f64],
    trials: u64,
    rng_seed: u64,
) -> Result<SensitivityReport> {
    base.get_field(field)?;
    let points = values
        .iter()
        .map(|&value| {
            let mut noise = base.clone();
            noise.set_field(field, value)?;
            Ok(SweepPoint {
                value,
                report: run_monte_carlo(plan, model, &noise, trials, rng_seed)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let monotone = |f: fn(&TrialReport) -> u64| points.windows(2).all(|w| f(&w[1].report) >= f(&w[0].report));
    let non_decreasing = ChannelFlags {
        electrical: monotone(|r| r.electrical.errors),
        magnetic: monotone(|r| r.magnetic.errors),
        surface: monotone(|r| r.surface.errors),
        word: monotone(|r| r.word.errors),
    };
    Ok(SensitivityReport {
        field: field.to_string(),
        points,
        non_decreasing,
    })
}
