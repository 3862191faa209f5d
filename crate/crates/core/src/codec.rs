//! Bit budgets to state ladders, words to material targets, and sensor
//! traces back to words.

use std::collections::BTreeMap;
use std::path::Path;

use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::capacity::geometric_capacity;
use crate::contact::{FingerModel, SKIN_RESISTIVITY_OHM_M};
use crate::electrical::{
    self, ElectricalLadder, MaterialPixel, SensingConfig, SweepFrame, CHLORELLA_RESISTIVITY_OHM_M,
};
use crate::error::{Channel, Error, Result};
use crate::magnetic::{self, MagSample, MagnetPixel, MagneticLadder};
use crate::noise::{NoiseConfig, NOMINAL_CONTACT_DISTANCE_M};
use crate::quantities::{EARTH_FIELD_T, FRIDGE_FIELD_T};
use crate::surface::{self, AudioClip, ClassTable, TextureModel, SWIPE_DURATION_S};
use crate::SimRng;

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_VOTE_FRAMES: usize = 30;
/// Length of a synthesized magnetometer trace (s).
pub const TRACE_DURATION_S: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitAllocation {
    pub electrical_bits: u32,
    pub magnetic_bits: u32,
    pub surface_bits: u32,
}

impl Default for BitAllocation {
    fn default() -> Self {
        Self {
            electrical_bits: 5,
            magnetic_bits: 3,
            surface_bits: 4,
        }
    }
}

impl BitAllocation {
    pub fn total(&self) -> u32 {
        self.electrical_bits + self.magnetic_bits + self.surface_bits
    }

    pub fn word_count(&self) -> u32 {
        1 << self.total()
    }

    fn validate(&self) -> Result<()> {
        if self.total() > 24 {
            return Err(Error::Config(format!(
                "{} total bits is beyond any channel's reach",
                self.total()
            )));
        }
        Ok(())
    }
}

/// Geometric bounds of one channel: lowest value, highest value, read margin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelBounds {
    pub lo: f64,
    pub hi: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanBounds {
    /// Resistivity range (Ω·m) from the skin to pure chlorella.
    pub electrical: ChannelBounds,
    /// Sensor reading range (T) from the Earth field to the fridge-magnet field.
    pub magnetic: ChannelBounds,
    pub surface: ClassTable,
}

impl Default for PlanBounds {
    fn default() -> Self {
        Self {
            electrical: ChannelBounds {
                lo: SKIN_RESISTIVITY_OHM_M,
                hi: CHLORELLA_RESISTIVITY_OHM_M,
                margin: 1.68,
            },
            magnetic: ChannelBounds {
                lo: EARTH_FIELD_T,
                hi: FRIDGE_FIELD_T,
                margin: 1.81,
            },
            surface: ClassTable::default(),
        }
    }
}

/// Physical setup the forward models are evaluated in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorSetup {
    pub pixel: MaterialPixel,
    pub magnet: MagnetPixel,
    pub finger: FingerModel,
    pub sensing: SensingConfig,
    pub nominal_distance_m: f64,
    pub vote_frames: usize,
}

impl Default for SensorSetup {
    fn default() -> Self {
        Self {
            pixel: MaterialPixel::default(),
            magnet: MagnetPixel::default(),
            finger: FingerModel::default(),
            sensing: SensingConfig::default(),
            nominal_distance_m: NOMINAL_CONTACT_DISTANCE_M,
            vote_frames: DEFAULT_VOTE_FRAMES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodePlan {
    pub schema_version: u32,
    pub allocation: BitAllocation,
    pub electrical: ElectricalLadder,
    pub magnetic: MagneticLadder,
    pub surface: ClassTable,
    /// Band-mean S11 boundaries (dB), descending; state = thresholds above the value.
    pub electrical_thresholds_db: Vec<f64>,
    /// Peak-excess boundaries (T), ascending.
    pub magnetic_thresholds_t: Vec<f64>,
    pub vote_frames: usize,
    pub setup: SensorSetup,
}

impl CodePlan {
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "plan schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let a = &self.allocation;
        let counts = [
            (
                Channel::Electrical,
                self.electrical.n_states,
                1usize << a.electrical_bits,
                self.electrical_thresholds_db.len(),
            ),
            (
                Channel::Magnetic,
                self.magnetic.n_states,
                1 << a.magnetic_bits,
                self.magnetic_thresholds_t.len(),
            ),
            (
                Channel::Surface,
                self.surface.len(),
                1 << a.surface_bits,
                self.surface.len() - 1,
            ),
        ];
        for (channel, states, needed, thresholds) in counts {
            if states != needed || thresholds + 1 != states {
                return Err(Error::Config(format!(
                    "{channel}: {states} states and {thresholds} thresholds do not match {needed} symbols"
                )));
            }
        }
        if !self.electrical_thresholds_db.windows(2).all(|w| w[1] < w[0]) {
            return Err(Error::Config(
                "electrical thresholds must be strictly decreasing".into(),
            ));
        }
        if !self.magnetic_thresholds_t.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::Config("magnetic thresholds must be strictly increasing".into()));
        }
        if self.vote_frames == 0 {
            return Err(Error::Config("vote_frames must be >= 1".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let plan: CodePlan = serde_json::from_str(text)?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    /// Noiseless band-mean S11 of electrical state `k`.
    pub fn electrical_statistic(&self, k: usize) -> Result<f64> {
        electrical_statistic(&self.setup, &self.electrical, k)
    }

    /// Noiseless peak excess of magnetic state `k` at the nominal distance.
    pub fn magnetic_statistic(&self, k: usize) -> Result<f64> {
        magnetic_statistic(&self.setup, &self.magnetic, k)
    }
}

fn electrical_statistic(setup: &SensorSetup, ladder: &ElectricalLadder, k: usize) -> Result<f64> {
    let pixel = setup.pixel.with_resistivity(ladder.resistivity(k));
    let mut rng = SimRng::seed_from_u64(0);
    electrical::synth_frame(
        &setup.sensing,
        &pixel,
        &setup.finger,
        &NoiseConfig::zero(),
        0.0,
        &mut rng,
    )?
    .band_mean(setup.sensing.band_hz)
}

fn magnetic_statistic(setup: &SensorSetup, ladder: &MagneticLadder, k: usize) -> Result<f64> {
    let b_r = magnetic::remanence_for_reading(&setup.magnet, ladder.reading(k), setup.nominal_distance_m)?;
    let trace = magnetic::synth_magnetometer_trace(
        b_r,
        &setup.magnet,
        setup.nominal_distance_m,
        TRACE_DURATION_S,
        &NoiseConfig::zero(),
        0,
    )?;
    magnetic::peak_excess(&trace)
}

/// Midpoint in log space; values of opposite sign or zero fall back to the mean.
fn geometric_midpoint(a: f64, b: f64) -> f64 {
    if a * b > 0.0 {
        a.signum() * (a * b).sqrt()
    } else {
        0.5 * (a + b)
    }
}

fn check_capacity(channel: Channel, bits: u32, b: &ChannelBounds) -> Result<usize> {
    let needed = 1usize << bits;
    let cap = geometric_capacity(b.hi, b.lo, b.margin).map_err(|e| e.on(channel))?;
    if cap.states < needed {
        return Err(Error::Capacity {
            channel,
            needed,
            available: cap.states,
        });
    }
    Ok(needed)
}

pub fn plan(alloc: &BitAllocation, bounds: &PlanBounds) -> Result<CodePlan> {
    plan_with(alloc, bounds, &SensorSetup::default())
}

/// Builds geometric ladders at exactly 2^bits states and places decision
/// thresholds at log-midpoints of the noiseless state statistics.
///
/// A class table shorter than 2^surface_bits lowers the surface allocation
/// to what the table can fill, with a warning.
pub fn plan_with(alloc: &BitAllocation, bounds: &PlanBounds, setup: &SensorSetup) -> Result<CodePlan> {
    alloc.validate()?;
    let n_e = check_capacity(Channel::Electrical, alloc.electrical_bits, &bounds.electrical)?;
    let n_m = check_capacity(Channel::Magnetic, alloc.magnetic_bits, &bounds.magnetic)?;

    let mut allocation = *alloc;
    let table_bits = bounds.surface.len().ilog2();
    if table_bits < alloc.surface_bits {
        log::warn!(
            "class table has {} classes; surface channel reduced from {} to {} bits",
            bounds.surface.len(),
            alloc.surface_bits,
            table_bits
        );
        allocation.surface_bits = table_bits;
    }
    let surface = bounds.surface.truncated(1 << allocation.surface_bits)?;

    let electrical = ElectricalLadder {
        sigma0_s_per_m: 1.0 / bounds.electrical.hi,
        ratio: bounds.electrical.margin,
        n_states: n_e,
    };
    let magnetic = MagneticLadder {
        b_lo_t: bounds.magnetic.lo,
        ratio: bounds.magnetic.margin,
        n_states: n_m,
    };

    let e_stats = (0..n_e)
        .map(|k| electrical_statistic(setup, &electrical, k))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.on(Channel::Electrical))?;
    if let Some(k) = e_stats.windows(2).position(|w| !(w[1] < w[0])) {
        return Err(Error::Config(format!(
            "electrical states {k} and {} have indistinguishable band means ({:e} dB)",
            k + 1,
            e_stats[k]
        ))
        .on(Channel::Electrical));
    }
    let m_stats = (0..n_m)
        .map(|k| magnetic_statistic(setup, &magnetic, k))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.on(Channel::Magnetic))?;
    if let Some(k) = m_stats.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::Config(format!("magnetic states {k} and {} overlap", k + 1)).on(Channel::Magnetic));
    }

    let plan = CodePlan {
        schema_version: SCHEMA_VERSION,
        allocation,
        electrical,
        magnetic,
        surface,
        electrical_thresholds_db: e_stats.windows(2).map(|w| geometric_midpoint(w[0], w[1])).collect(),
        magnetic_thresholds_t: m_stats.windows(2).map(|w| geometric_midpoint(w[0], w[1])).collect(),
        vote_frames: setup.vote_frames,
        setup: setup.clone(),
    };
    plan.validate()?;
    Ok(plan)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymbolWord {
    pub s_e: u32,
    pub s_m: u32,
    pub s_s: u32,
}

impl SymbolWord {
    pub fn new(s_e: u32, s_m: u32, s_s: u32, alloc: &BitAllocation) -> Result<Self> {
        let w = Self { s_e, s_m, s_s };
        w.check(alloc)?;
        Ok(w)
    }

    fn check(&self, a: &BitAllocation) -> Result<()> {
        let fields = [
            (Channel::Electrical, self.s_e, a.electrical_bits),
            (Channel::Magnetic, self.s_m, a.magnetic_bits),
            (Channel::Surface, self.s_s, a.surface_bits),
        ];
        for (channel, v, bits) in fields {
            if (v as u64) >= 1u64 << bits {
                return Err(Error::Domain(format!(
                    "{channel} symbol {v} needs more than {bits} bits"
                )));
            }
        }
        Ok(())
    }

    /// (s_e << (mb + sb)) | (s_m << sb) | s_s
    pub fn value(&self, a: &BitAllocation) -> u32 {
        (self.s_e << (a.magnetic_bits + a.surface_bits)) | (self.s_m << a.surface_bits) | self.s_s
    }

    pub fn from_value(value: u32, a: &BitAllocation) -> Result<Self> {
        if value >= a.word_count() {
            return Err(Error::Domain(format!("word {value} exceeds {} bits", a.total())));
        }
        let mask = |bits: u32| (1u32 << bits) - 1;
        Ok(Self {
            s_e: value >> (a.magnetic_bits + a.surface_bits),
            s_m: (value >> a.surface_bits) & mask(a.magnetic_bits),
            s_s: value & mask(a.surface_bits),
        })
    }
}

/// Fabrication targets for one pixel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialSpec {
    pub target_conductivity_s_per_m: f64,
    pub target_remanence_t: f64,
    /// Sensor reading the remanence produces at the nominal distance.
    pub target_reading_t: f64,
    pub surface_class_id: u32,
}

pub fn encode(word: &SymbolWord, plan: &CodePlan) -> Result<MaterialSpec> {
    word.check(&plan.allocation)?;
    let reading = plan.magnetic.reading(word.s_m as usize);
    Ok(MaterialSpec {
        target_conductivity_s_per_m: plan.electrical.conductivity(word.s_e as usize),
        target_remanence_t: magnetic::remanence_for_reading(
            &plan.setup.magnet,
            reading,
            plan.setup.nominal_distance_m,
        )?,
        target_reading_t: reading,
        surface_class_id: plan.surface.classes()[word.s_s as usize].class_id,
    })
}

/// Sensor data for one touch-and-swipe of a pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct WordTraces {
    pub frames: Vec<SweepFrame>,
    pub trace: Vec<MagSample>,
    pub clip: AudioClip,
}

/// Forward-simulates all three sensors for a pixel built to `spec`.
pub fn synthesize(spec: &MaterialSpec, plan: &CodePlan, noise: &NoiseConfig, rng: &mut SimRng) -> Result<WordTraces> {
    let setup = &plan.setup;
    let pixel = setup.pixel.with_resistivity(1.0 / spec.target_conductivity_s_per_m);
    let frames = (0..plan.vote_frames)
        .map(|i| {
            let t = i as f64 / setup.sensing.sweep_rate_hz;
            electrical::synth_frame(&setup.sensing, &pixel, &setup.finger, noise, t, rng)
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.on(Channel::Electrical))?;
    let distance = noise.sample_distance(rng);
    let trace = magnetic::synth_trace_with(
        spec.target_remanence_t,
        &setup.magnet,
        distance,
        TRACE_DURATION_S,
        noise,
        rng,
    )
    .map_err(|e| e.on(Channel::Magnetic))?;
    let cls = plan.surface.get(spec.surface_class_id).ok_or_else(|| {
        Error::Domain(format!("class {} is not in the plan", spec.surface_class_id)).on(Channel::Surface)
    })?;
    let clip = surface::synth_swipe_noisy(cls, SWIPE_DURATION_S, noise, rng).map_err(|e| e.on(Channel::Surface))?;
    Ok(WordTraces { frames, trace, clip })
}

/// State index for a band-mean value: the number of thresholds it falls below.
fn electrical_state(value: f64, thresholds: &[f64]) -> usize {
    thresholds.iter().filter(|&&t| value < t).count()
}

/// Majority vote of per-frame threshold decisions over the first
/// `vote_frames` frames; ties go to the larger summed distance from the
/// state's boundaries, then the lower index.
pub fn decode_electrical(frames: &[SweepFrame], plan: &CodePlan) -> Result<usize> {
    if frames.is_empty() {
        return Err(Error::domain("no sweep frames to decode"));
    }
    let th = &plan.electrical_thresholds_db;
    let n = plan.electrical.n_states;
    let mut votes = vec![0usize; n];
    let mut margin = vec![0.0; n];
    for frame in frames.iter().take(plan.vote_frames) {
        let v = frame.band_mean(plan.setup.sensing.band_hz)?;
        let s = electrical_state(v, th);
        votes[s] += 1;
        let upper = if s > 0 { (th[s - 1] - v).abs() } else { f64::INFINITY };
        let lower = th.get(s).map_or(f64::INFINITY, |t| (v - t).abs());
        let m = upper.min(lower);
        margin[s] += if m.is_finite() { m } else { 0.0 };
    }
    Ok((0..n)
        .max_by(|&a, &b| {
            votes[a]
                .cmp(&votes[b])
                .then(margin[a].total_cmp(&margin[b]))
                .then(b.cmp(&a))
        })
        .expect("at least one state"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MagneticDecode {
    State(usize),
    /// Peak excess below half the state-0 reading: no tag under the finger.
    NoDetection,
}

pub fn decode_magnetic(trace: &[MagSample], plan: &CodePlan) -> Result<MagneticDecode> {
    let x = magnetic::peak_excess(trace)?;
    if x < 0.5 * plan.magnetic.reading(0) {
        return Ok(MagneticDecode::NoDetection);
    }
    Ok(MagneticDecode::State(
        plan.magnetic_thresholds_t.iter().filter(|&&t| x > t).count(),
    ))
}

pub fn decode_surface(clip: &AudioClip, plan: &CodePlan, model: &TextureModel) -> Result<usize> {
    check_model(plan, model)?;
    let id = surface::classify(model, clip, clip.duration_s())?;
    plan.surface
        .position(id)
        .ok_or_else(|| Error::Domain(format!("classifier returned class {id}, which the plan does not use")))
}

/// Every plan class must have a hyperplane in the model.
pub fn check_model(plan: &CodePlan, model: &TextureModel) -> Result<()> {
    model.validate()?;
    match plan
        .surface
        .classes()
        .iter()
        .find(|c| model.table.get(c.class_id).is_none())
    {
        Some(c) => Err(Error::Config(format!(
            "texture model has no class {} required by the plan",
            c.class_id
        ))),
        None => Ok(()),
    }
}

pub fn decode_word(
    frames: &[SweepFrame],
    trace: &[MagSample],
    clip: &AudioClip,
    plan: &CodePlan,
    model: &TextureModel,
) -> Result<SymbolWord> {
    let s_e = decode_electrical(frames, plan).map_err(|e| e.on(Channel::Electrical))?;
    let s_m = match decode_magnetic(trace, plan).map_err(|e| e.on(Channel::Magnetic))? {
        MagneticDecode::State(s) => s,
        MagneticDecode::NoDetection => {
            return Err(Error::domain("no magnetic tag detected").on(Channel::Magnetic));
        }
    };
    let s_s = decode_surface(clip, plan, model).map_err(|e| e.on(Channel::Surface))?;
    Ok(SymbolWord {
        s_e: s_e as u32,
        s_m: s_m as u32,
        s_s: s_s as u32,
    })
}

/// Word ↔ label bindings read from `word_value,label` CSV.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabelMap {
    by_word: BTreeMap<u32, String>,
}

#[derive(Deserialize, Serialize)]
struct LabelRow {
    word_value: u32,
    label: String,
}

impl LabelMap {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path)?;
        let headers = reader.headers()?.clone();
        let mut by_word = BTreeMap::new();
        let mut labels = std::collections::HashSet::new();
        for record in reader.records() {
            let record = record.map_err(Error::csv_at)?;
            let line = record.position().map_or(0, |p| p.line());
            let row: LabelRow = record.deserialize(Some(&headers)).map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
            if !labels.insert(row.label.clone()) || by_word.insert(row.word_value, row.label).is_some() {
                return Err(Error::Parse {
                    line,
                    message: "duplicate word or label".into(),
                });
            }
        }
        Ok(Self { by_word })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for (word_value, label) in &self.by_word {
            w.serialize(LabelRow {
                word_value: *word_value,
                label: label.clone(),
            })?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn insert(&mut self, word: u32, label: impl Into<String>) {
        self.by_word.insert(word, label.into());
    }

    pub fn label(&self, word: u32) -> Option<&str> {
        self.by_word.get(&word).map(String::as_str)
    }

    pub fn word(&self, label: &str) -> Option<u32> {
        self.by_word.iter().find(|(_, l)| l.as_str() == label).map(|(w, _)| *w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::OnceLock;

    fn default_plan() -> &'static CodePlan {
        static PLAN: OnceLock<CodePlan> = OnceLock::new();
        PLAN.get_or_init(|| plan(&BitAllocation::default(), &PlanBounds::default()).unwrap())
    }

    #[test]
    fn default_plan_shape() {
        let p = default_plan();
        assert_eq!(p.electrical.n_states, 32);
        assert_eq!(p.magnetic.n_states, 8);
        assert_eq!(p.surface.len(), 16);
        assert_eq!(p.allocation.word_count(), 4096);
        assert_eq!(p.electrical_thresholds_db.len(), 31);
        assert_eq!(p.magnetic_thresholds_t.len(), 7);
    }

    #[test]
    fn capacity_gate_names_channel() {
        let alloc = BitAllocation {
            electrical_bits: 6,
            ..Default::default()
        };
        let err = plan(&alloc, &PlanBounds::default()).unwrap_err();
        assert!(matches!(
            err,
            Error::Capacity {
                channel: Channel::Electrical,
                needed: 64,
                available: 32
            }
        ));
        assert!(err.to_string().contains("electrical capacity 32 < 64"));
    }

    #[test]
    fn short_table_degrades_surface_bits() {
        let bounds = PlanBounds {
            surface: ClassTable::demonstrated(),
            ..Default::default()
        };
        let p = plan(&BitAllocation::default(), &bounds).unwrap();
        assert_eq!(p.allocation.surface_bits, 3);
        assert_eq!(p.surface.len(), 8);
    }

    #[test]
    fn thresholds_sit_between_state_statistics() {
        let p = default_plan();
        for k in 0..31 {
            let (a, b) = (
                p.electrical_statistic(k).unwrap(),
                p.electrical_statistic(k + 1).unwrap(),
            );
            let t = p.electrical_thresholds_db[k];
            assert!(b < t && t < a, "electrical {k}");
        }
        for k in 0..7 {
            let (a, b) = (p.magnetic_statistic(k).unwrap(), p.magnetic_statistic(k + 1).unwrap());
            let t = p.magnetic_thresholds_t[k];
            assert!(a < t && t < b, "magnetic {k}");
        }
    }

    #[test]
    fn word_packing() {
        let a = BitAllocation::default();
        assert_eq!(SymbolWord::new(1, 0, 0, &a).unwrap().value(&a), 128);
        assert_eq!(SymbolWord::new(31, 7, 15, &a).unwrap().value(&a), 4095);
        for v in 0..4096 {
            assert_eq!(SymbolWord::from_value(v, &a).unwrap().value(&a), v);
        }
        assert!(SymbolWord::from_value(4096, &a).is_err());
        assert!(SymbolWord::new(32, 0, 0, &a).is_err());
    }

    #[test]
    fn word_zero_targets_ladder_bases() {
        let p = default_plan();
        let spec = encode(&SymbolWord::from_value(0, &p.allocation).unwrap(), p).unwrap();
        assert!((spec.target_conductivity_s_per_m / 5.37e-9 - 1.0).abs() < 0.01);
        assert_eq!(spec.target_reading_t, 5e-5);
        assert_eq!(spec.surface_class_id, 0);
    }

    #[test]
    fn surface_symbol_does_not_touch_other_targets() {
        let p = default_plan();
        let a = encode(&SymbolWord { s_e: 9, s_m: 4, s_s: 2 }, p).unwrap();
        let b = encode(
            &SymbolWord {
                s_e: 9,
                s_m: 4,
                s_s: 13,
            },
            p,
        )
        .unwrap();
        assert_eq!(a.target_conductivity_s_per_m, b.target_conductivity_s_per_m);
        assert_eq!(a.target_remanence_t, b.target_remanence_t);
        assert_ne!(a.surface_class_id, b.surface_class_id);
    }

    fn frames_for(p: &CodePlan, k: usize, n: usize) -> Vec<SweepFrame> {
        let spec = encode(
            &SymbolWord {
                s_e: k as u32,
                s_m: 0,
                s_s: 0,
            },
            p,
        )
        .unwrap();
        let mut rng = SimRng::seed_from_u64(k as u64);
        let mut t = synthesize(&spec, p, &NoiseConfig::zero(), &mut rng).unwrap();
        t.frames.truncate(n);
        t.frames
    }

    #[test]
    fn electrical_noiseless_round_trip() {
        let p = default_plan();
        for k in 0..32 {
            assert_eq!(decode_electrical(&frames_for(p, k, 30), p).unwrap(), k);
            assert_eq!(decode_electrical(&frames_for(p, k, 1), p).unwrap(), k);
        }
    }

    #[test]
    fn electrical_vote_semantics() {
        let p = default_plan();
        let mut frames: Vec<SweepFrame> = frames_for(p, 12, 6);
        frames.extend(frames_for(p, 13, 4));
        assert_eq!(decode_electrical(&frames, p).unwrap(), 12);
        frames.reverse();
        assert_eq!(decode_electrical(&frames, p).unwrap(), 12);
        frames.extend(frames_for(p, 12, 5));
        assert_eq!(decode_electrical(&frames, p).unwrap(), 12);
        assert!(decode_electrical(&[], p).is_err());
    }

    #[test]
    fn magnetic_noiseless_round_trip_and_sentinel() {
        let p = default_plan();
        for k in 0..8 {
            let spec = encode(&SymbolWord { s_e: 0, s_m: k, s_s: 0 }, p).unwrap();
            let mut rng = SimRng::seed_from_u64(100 + k as u64);
            let t = synthesize(&spec, p, &NoiseConfig::zero(), &mut rng).unwrap();
            assert_eq!(decode_magnetic(&t.trace, p).unwrap(), MagneticDecode::State(k as usize));
        }
        let empty =
            magnetic::synth_magnetometer_trace(0.0, &p.setup.magnet, 2.5e-3, 2.0, &NoiseConfig::default(), 1).unwrap();
        assert_eq!(decode_magnetic(&empty, p).unwrap(), MagneticDecode::NoDetection);
        assert!(decode_magnetic(&empty[..5], p).is_err());
    }

    #[test]
    fn plan_json_round_trip_is_byte_identical() {
        let p = default_plan();
        let text = p.to_json().unwrap();
        let back = CodePlan::from_json(&text).unwrap();
        assert_eq!(&back, p);
        assert_eq!(back.to_json().unwrap(), text);
        assert!(text.contains("\"schema_version\": 1"));
        let bumped = text.replacen("\"schema_version\": 1", "\"schema_version\": 2", 1);
        assert!(matches!(CodePlan::from_json(&bumped), Err(Error::Config(_))));
    }

    #[test]
    fn label_map_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("labels.csv");
        let mut m = LabelMap::default();
        m.insert(4095, "exit");
        m.insert(7, "stairs");
        m.save(&path).unwrap();
        let back = LabelMap::load(&path).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.word("exit"), Some(4095));
        assert_eq!(back.label(7), Some("stairs"));
        std::fs::write(&path, "word_value,label\n1,a\n2,a\n").unwrap();
        assert!(matches!(LabelMap::load(&path), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn midpoint_handles_signs() {
        assert!((geometric_midpoint(-1.0, -4.0) + 2.0).abs() < 1e-15);
        assert!((geometric_midpoint(1.0, 4.0) - 2.0).abs() < 1e-15);
        assert_eq!(geometric_midpoint(-1.0, 1.0), 0.0);
    }
}
