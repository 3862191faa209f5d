use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use imat_core::calibration::{
    fraction_for_property, load_table, parse_table, percolation_threshold, property_for_fraction, save_table,
    CalibrationTable, PropertyKind, MAX_WEIGHT_FRACTION,
};
use imat_core::codec::{self, plan_with, LabelMap, MagneticDecode, SensorSetup};
use imat_core::electrical::electrical_capacity;
use imat_core::io::{read_sweeps, read_trace, write_jsonl};
use imat_core::magnetic::magnetic_capacity;
use imat_core::sim::{run_exhaustive, run_monte_carlo_records, sensitivity_sweep, write_records_csv};
use imat_core::surface::{self, read_manifest, read_wav, write_wav, TrainConfig};
use imat_core::{
    BitAllocation, ClassTable, CodePlan, Error, NoiseConfig, PlanBounds, SimRng, SymbolWord, TextureModel,
};
use log::{info, warn};
use rand::SeedableRng;
use serde::Serialize;

use crate::{
    CalibArgs, ChannelArg, DecodeArgs, EncodeArgs, KindArg, ModelArgs, NoiseArgs, NoisePreset, PlanArgs, SimulateArgs,
    SweepArgs, SynthArgs, TrainArgs, WordArgs,
};

const STARTER_CONDUCTIVITY: &str = include_str!("../../../data/graphite_conductivity.csv");
const STARTER_REMANENCE: &str = include_str!("../../../data/magnetite_remanence.csv");

const SWEEPS_FILE: &str = "sweeps.jsonl";
const TRACE_FILE: &str = "trace.jsonl";
const CLIP_FILE: &str = "swipe.wav";

/// Synthetic clips per class when a command has to train its own model.
const FALLBACK_CLIPS_PER_CLASS: usize = 20;

fn require_file(path: &Path) -> Result<()> {
    if !path.is_file() {
        return Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("{} does not exist", path.display()),
        ))
        .into());
    }
    Ok(())
}

fn parse_override(kv: &str) -> Result<(&str, f64)> {
    let Some((key, value)) = kv.split_once('=') else {
        return Err(Error::Config(format!("override `{kv}` is not KEY=VALUE")).into());
    };
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("override `{kv}` has a non-numeric value")))?;
    Ok((key.trim(), value))
}

fn noise_config(args: &NoiseArgs) -> Result<NoiseConfig> {
    let mut noise = match args.noise {
        NoisePreset::Default => NoiseConfig::default(),
        NoisePreset::Zero => NoiseConfig::zero(),
        NoisePreset::Pessimistic => NoiseConfig::pessimistic(),
    };
    for kv in &args.overrides {
        let (key, value) = parse_override(kv)?;
        noise.set_field(key, value)?;
    }
    noise.validate()?;
    Ok(noise)
}

fn parse_alloc(text: &str) -> Result<BitAllocation> {
    let parts: Vec<u32> = text
        .split('/')
        .map(|p| p.trim().parse())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Config(format!("allocation `{text}` is not E/M/S bits")))?;
    let [electrical_bits, magnetic_bits, surface_bits] = parts[..] else {
        return Err(Error::Config(format!("allocation `{text}` is not E/M/S bits")).into());
    };
    Ok(BitAllocation {
        electrical_bits,
        magnetic_bits,
        surface_bits,
    })
}

const PLAN_KEYS: &[&str] = &[
    "electrical_lo",
    "electrical_hi",
    "electrical_margin",
    "magnetic_lo",
    "magnetic_hi",
    "magnetic_margin",
    "nominal_distance_m",
    "vote_frames",
];

fn apply_plan_override(bounds: &mut PlanBounds, setup: &mut SensorSetup, key: &str, value: f64) -> Result<()> {
    match key {
        "electrical_lo" => bounds.electrical.lo = value,
        "electrical_hi" => bounds.electrical.hi = value,
        "electrical_margin" => bounds.electrical.margin = value,
        "magnetic_lo" => bounds.magnetic.lo = value,
        "magnetic_hi" => bounds.magnetic.hi = value,
        "magnetic_margin" => bounds.magnetic.margin = value,
        "nominal_distance_m" => setup.nominal_distance_m = value,
        "vote_frames" => {
            if !(value >= 1.0 && value.fract() == 0.0) {
                return Err(Error::Config(format!("vote_frames must be a positive integer, got {value}")).into());
            }
            setup.vote_frames = value as usize;
        }
        other => {
            return Err(Error::Config(format!(
                "unknown plan key `{other}` (expected one of {})",
                PLAN_KEYS.join(", ")
            ))
            .into())
        }
    }
    Ok(())
}

pub fn plan(args: PlanArgs) -> Result<()> {
    let alloc = parse_alloc(&args.alloc)?;
    let mut bounds = PlanBounds::default();
    let mut setup = SensorSetup::default();
    for kv in &args.overrides {
        let (key, value) = parse_override(kv)?;
        apply_plan_override(&mut bounds, &mut setup, key, value)?;
    }
    if let Some(path) = &args.classes {
        require_file(path)?;
        bounds.surface = serde_json::from_str::<ClassTable>(&fs::read_to_string(path).map_err(Error::Io)?)
            .map_err(Error::Json)
            .with_context(|| format!("reading {}", path.display()))?;
    }
    let e = electrical_capacity(bounds.electrical.hi, bounds.electrical.lo, bounds.electrical.margin)?;
    let m = magnetic_capacity(bounds.magnetic.hi, bounds.magnetic.lo, bounds.magnetic.margin)?;
    println!("electrical: {} states / {} bits", e.states, e.bits);
    println!("magnetic: {} states / {} bits", m.states, m.bits);
    let s = bounds.surface.len();
    println!("surface: {} classes / {} bits", s, s.max(1).ilog2());
    let p = plan_with(&alloc, &bounds, &setup)?;
    println!(
        "allocation: {}/{}/{} bits, {} words",
        p.allocation.electrical_bits,
        p.allocation.magnetic_bits,
        p.allocation.surface_bits,
        p.allocation.word_count()
    );
    if let Some(out) = &args.out {
        p.save(out)?;
        info!("wrote {}", out.display());
    }
    Ok(())
}

fn load_plan(path: &Path) -> Result<CodePlan> {
    require_file(path)?;
    CodePlan::load(path).with_context(|| format!("loading plan {}", path.display()))
}

fn load_labels(path: &Path) -> Result<LabelMap> {
    require_file(path)?;
    LabelMap::load(path).with_context(|| format!("loading labels {}", path.display()))
}

fn resolve_word(args: &WordArgs, plan: &CodePlan) -> Result<SymbolWord> {
    let value = match (&args.word, &args.label) {
        (Some(w), _) => *w,
        (None, Some(label)) => {
            let map = load_labels(args.labels.as_deref().expect("clap requires --labels"))?;
            map.word(label)
                .ok_or_else(|| Error::Config(format!("label `{label}` is not in the mapping")))?
        }
        (None, None) => bail!(Error::Config("give --word or --label".into())),
    };
    Ok(SymbolWord::from_value(value, &plan.allocation)?)
}

fn table_or_starter(path: Option<&Path>, starter: &str, kind: PropertyKind) -> Result<CalibrationTable> {
    Ok(match path {
        Some(p) => {
            require_file(p)?;
            load_table(p, kind).with_context(|| format!("loading table {}", p.display()))?
        }
        None => parse_table(starter.as_bytes(), kind)?,
    })
}

#[derive(Serialize)]
struct Recipe {
    word: u32,
    spec: imat_core::MaterialSpec,
    graphite_weight_fraction: f64,
    magnetite_weight_fraction: f64,
}

pub fn encode(args: EncodeArgs) -> Result<()> {
    let plan = load_plan(&args.plan)?;
    let conductivity = table_or_starter(
        args.conductivity_table.as_deref(),
        STARTER_CONDUCTIVITY,
        PropertyKind::ConductivitySPerM,
    )?;
    let remanence = table_or_starter(
        args.remanence_table.as_deref(),
        STARTER_REMANENCE,
        PropertyKind::RemanenceT,
    )?;
    let word = resolve_word(&args.word, &plan)?;
    let spec = codec::encode(&word, &plan)?;
    let graphite = fraction_for_property(&conductivity, spec.target_conductivity_s_per_m)
        .context("graphite fraction for the conductivity target")?;
    let magnetite = fraction_for_property(&remanence, spec.target_remanence_t)
        .context("magnetite fraction for the remanence target")?;
    let value = word.value(&plan.allocation);
    let cls = plan
        .surface
        .get(spec.surface_class_id)
        .expect("encode picks a plan class");
    println!(
        "word: {value} (electrical {}, magnetic {}, surface {})",
        word.s_e, word.s_m, word.s_s
    );
    println!("conductivity target: {:.6e} S/m", spec.target_conductivity_s_per_m);
    println!(
        "remanence target: {:.6e} T (reading {:.6e} T at {} mm)",
        spec.target_remanence_t,
        spec.target_reading_t,
        plan.setup.nominal_distance_m * 1e3
    );
    println!(
        "surface class: {} ({} {}{})",
        cls.class_id,
        cls.texture,
        cls.energy.as_str(),
        if cls.demonstrated { "" } else { ", extended" }
    );
    println!("graphite: {:.3} wt%", graphite * 100.0);
    println!("magnetite: {:.3} wt%", magnetite * 100.0);
    if let Some(out) = &args.out {
        let recipe = Recipe {
            word: value,
            spec,
            graphite_weight_fraction: graphite,
            magnetite_weight_fraction: magnetite,
        };
        fs::write(out, serde_json::to_string_pretty(&recipe)? + "\n").map_err(Error::Io)?;
    }
    Ok(())
}

pub fn synth(args: SynthArgs) -> Result<()> {
    let plan = load_plan(&args.plan)?;
    let noise = noise_config(&args.noise)?;
    let word = resolve_word(&args.word, &plan)?;
    let spec = codec::encode(&word, &plan)?;
    fs::create_dir_all(&args.out_dir).map_err(Error::Io)?;
    let mut rng = SimRng::seed_from_u64(args.seed);
    let traces = codec::synthesize(&spec, &plan, &noise, &mut rng)?;
    let all = args.channel == ChannelArg::All;
    if all || args.channel == ChannelArg::Electrical {
        write_jsonl(args.out_dir.join(SWEEPS_FILE), &traces.frames)?;
    }
    if all || args.channel == ChannelArg::Magnetic {
        write_jsonl(args.out_dir.join(TRACE_FILE), &traces.trace)?;
    }
    if all || args.channel == ChannelArg::Surface {
        write_wav(args.out_dir.join(CLIP_FILE), &traces.clip)?;
    }
    println!(
        "synthesized word {} into {}",
        word.value(&plan.allocation),
        args.out_dir.display()
    );
    Ok(())
}

fn obtain_model(args: &ModelArgs, plan: &CodePlan) -> Result<TextureModel> {
    let model = match &args.model {
        Some(path) => {
            require_file(path)?;
            let text = fs::read_to_string(path).map_err(Error::Io)?;
            let model: TextureModel = serde_json::from_str(&text)
                .map_err(Error::Json)
                .with_context(|| format!("loading model {}", path.display()))?;
            model.validate()?;
            model
        }
        None => {
            warn!(
                "no --model given; training a synthetic texture model (seed {})",
                args.seed
            );
            surface::train_on_synthetic(
                &plan.surface,
                FALLBACK_CLIPS_PER_CLASS,
                &NoiseConfig::default(),
                args.seed,
            )?
        }
    };
    codec::check_model(plan, &model)?;
    Ok(model)
}

pub fn decode(args: DecodeArgs) -> Result<()> {
    let plan = load_plan(&args.plan)?;
    for p in [&args.sweeps, &args.trace, &args.clip].into_iter().flatten() {
        require_file(p)?;
    }
    let labels = args.labels.as_deref().map(load_labels).transpose()?;
    let (Some(sweeps), Some(trace), Some(clip)) = (&args.sweeps, &args.trace, &args.clip) else {
        if args.sweeps.is_none() && args.trace.is_none() && args.clip.is_none() {
            bail!(Error::Config("give at least one of --sweeps, --trace, --clip".into()));
        }
        if let Some(p) = &args.sweeps {
            let frames = read_sweeps(p).with_context(|| format!("reading {}", p.display()))?;
            println!("electrical: {}", codec::decode_electrical(&frames, &plan)?);
        }
        if let Some(p) = &args.trace {
            let samples = read_trace(p).with_context(|| format!("reading {}", p.display()))?;
            match codec::decode_magnetic(&samples, &plan)? {
                MagneticDecode::State(s) => println!("magnetic: {s}"),
                MagneticDecode::NoDetection => println!("magnetic: no detection"),
            }
        }
        if let Some(p) = &args.clip {
            let clip = read_wav(p).with_context(|| format!("reading {}", p.display()))?;
            let model = obtain_model(&args.model, &plan)?;
            println!("surface: {}", codec::decode_surface(&clip, &plan, &model)?);
        }
        return Ok(());
    };
    let frames = read_sweeps(sweeps).with_context(|| format!("reading {}", sweeps.display()))?;
    let samples = read_trace(trace).with_context(|| format!("reading {}", trace.display()))?;
    let audio = read_wav(clip).with_context(|| format!("reading {}", clip.display()))?;
    let model = obtain_model(&args.model, &plan)?;
    let word = codec::decode_word(&frames, &samples, &audio, &plan, &model)?;
    let value = word.value(&plan.allocation);
    println!(
        "word: {value} (electrical {}, magnetic {}, surface {})",
        word.s_e, word.s_m, word.s_s
    );
    if let Some(map) = labels {
        match map.label(value) {
            Some(l) => println!("label: {l}"),
            None => println!("label: (none)"),
        }
    }
    Ok(())
}

fn manifest_corpus(path: &Path, plan: &CodePlan) -> Result<Vec<(imat_core::AudioClip, u32)>> {
    require_file(path)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let entries = read_manifest(path).with_context(|| format!("reading manifest {}", path.display()))?;
    let mut corpus = Vec::with_capacity(entries.len());
    for e in entries {
        if plan.surface.get(e.class_id).is_none() {
            bail!(Error::Config(format!(
                "manifest class {} is not in the plan",
                e.class_id
            )));
        }
        let clip_path: PathBuf = base.join(&e.path);
        let clip = read_wav(&clip_path).with_context(|| format!("reading {}", clip_path.display()))?;
        corpus.push((clip, e.class_id));
    }
    Ok(corpus)
}

pub fn train(args: TrainArgs) -> Result<()> {
    let plan = load_plan(&args.plan)?;
    let noise = noise_config(&args.noise)?;
    let model = match &args.manifest {
        Some(path) => {
            let corpus = manifest_corpus(path, &plan)?;
            let cfg = TrainConfig {
                seed: args.seed,
                augment_window_s: Some(0.2),
                ..Default::default()
            };
            surface::train_classifier_with(&plan.surface, &corpus, &cfg)?
        }
        None => surface::train_on_synthetic(&plan.surface, args.clips_per_class, &noise, args.seed)?,
    };
    let unconverged = model.svms.iter().filter(|s| !s.converged).count();
    if unconverged > 0 {
        warn!("{unconverged} hyperplanes hit the epoch limit");
    }
    fs::write(&args.out, serde_json::to_string(&model)? + "\n").map_err(Error::Io)?;
    println!("trained {} classes into {}", model.svms.len(), args.out.display());
    Ok(())
}

fn emit_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match out {
        Some(p) => fs::write(p, text).map_err(Error::Io)?,
        None => print!("{text}"),
    }
    Ok(())
}

pub fn simulate(args: SimulateArgs) -> Result<()> {
    let plan = load_plan(&args.plan)?;
    let noise = noise_config(&args.noise)?;
    if !args.exhaustive && args.trials == 0 {
        bail!(Error::Config("trials must be >= 1".into()));
    }
    let model = obtain_model(&args.model, &plan)?;
    let seed = args.model.seed;
    let (report, records) = if args.exhaustive {
        run_exhaustive(&plan, &model, &noise, seed)?
    } else {
        run_monte_carlo_records(&plan, &model, &noise, args.trials, seed)?
    };
    if let Some(path) = &args.records {
        write_records_csv(path, &records)?;
    }
    emit_json(&report, args.out.as_deref())
}

pub fn sweep(args: SweepArgs) -> Result<()> {
    let plan = load_plan(&args.plan)?;
    let noise = noise_config(&args.noise)?;
    noise.get_field(&args.field)?;
    let model = obtain_model(&args.model, &plan)?;
    let report = sensitivity_sweep(
        &plan,
        &model,
        &noise,
        &args.field,
        &args.values,
        args.trials,
        args.model.seed,
    )?;
    emit_json(&report, args.out.as_deref())
}

pub fn calib(args: CalibArgs) -> Result<()> {
    require_file(&args.table)?;
    let kind = match args.kind {
        KindArg::Conductivity => PropertyKind::ConductivitySPerM,
        KindArg::Remanence => PropertyKind::RemanenceT,
    };
    let table = load_table(&args.table, kind).with_context(|| format!("loading table {}", args.table.display()))?;
    if args.fraction.is_none() && args.target.is_none() && !args.percolation && args.series.is_none() {
        bail!(Error::Config(
            "give --fraction, --target, --percolation or --series".into()
        ));
    }
    if let Some(f) = args.fraction {
        println!("value at {f}: {:.6e}", property_for_fraction(&table, f)?);
    }
    if let Some(t) = args.target {
        println!("fraction for {t:e}: {:.6}", fraction_for_property(&table, t)?);
    }
    if args.percolation {
        match percolation_threshold(&table)? {
            Some((lo, hi)) => println!("percolation between {lo} and {hi}"),
            None => println!("percolation: none"),
        }
    }
    if let Some(path) = &args.series {
        if args.series_points < 2 {
            bail!(Error::Config("series needs >= 2 points".into()));
        }
        let (f0, f1) = (
            table.points()[0].0,
            table.points()[table.points().len() - 1].0.min(MAX_WEIGHT_FRACTION),
        );
        let step = (f1 - f0) / (args.series_points - 1) as f64;
        let points = (0..args.series_points)
            .map(|i| {
                let f = if i + 1 == args.series_points {
                    f1
                } else {
                    f0 + step * i as f64
                };
                property_for_fraction(&table, f).map(|v| (f, v))
            })
            .collect::<imat_core::Result<Vec<_>>>()?;
        save_table(path, &CalibrationTable::new(kind, points)?)?;
    }
    Ok(())
}
