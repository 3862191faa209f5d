use std::sync::OnceLock;

use imat_core::codec::{decode_word, encode, plan, synthesize, CodePlan};
use imat_core::sim::{run_monte_carlo, sensitivity_sweep};
use imat_core::surface::train_on_synthetic;
use imat_core::{BitAllocation, NoiseConfig, PlanBounds, SimRng, SymbolWord, TextureModel};
use rand::{Rng, SeedableRng};

fn fixture() -> &'static (CodePlan, TextureModel) {
    static CELL: OnceLock<(CodePlan, TextureModel)> = OnceLock::new();
    CELL.get_or_init(|| {
        let p = plan(&BitAllocation::default(), &PlanBounds::default()).unwrap();
        let model = train_on_synthetic(&p.surface, 20, &NoiseConfig::default(), 1).unwrap();
        (p, model)
    })
}

#[test]
fn sampled_words_round_trip_without_noise() {
    let (p, model) = fixture();
    let mut pick = SimRng::seed_from_u64(64);
    for _ in 0..64 {
        let value = pick.random_range(0..4096);
        let word = SymbolWord::from_value(value, &p.allocation).unwrap();
        let spec = encode(&word, p).unwrap();
        let mut rng = SimRng::seed_from_u64(value as u64);
        let t = synthesize(&spec, p, &NoiseConfig::zero(), &mut rng).unwrap();
        let got = decode_word(&t.frames, &t.trace, &t.clip, p, model).unwrap();
        assert_eq!(got.value(&p.allocation), value);
    }
}

#[test]
fn monte_carlo_report_is_reproducible_across_thread_counts() {
    let (p, model) = fixture();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| run_monte_carlo(p, model, &NoiseConfig::default(), 40, 11).unwrap())
    };
    let a = serde_json::to_string(&run(1)).unwrap();
    let b = serde_json::to_string(&run(4)).unwrap();
    assert_eq!(a, b);
    assert_ne!(
        a,
        serde_json::to_string(&run_monte_carlo(p, model, &NoiseConfig::default(), 40, 12).unwrap()).unwrap()
    );
}

#[test]
fn magnetic_and_surface_survive_default_noise() {
    let (p, model) = fixture();
    let r = run_monte_carlo(p, model, &NoiseConfig::default(), 200, 5).unwrap();
    assert_eq!(r.trials, 200);
    assert_eq!(r.magnetic.errors, 0);
    assert!(r.surface.rate < 0.02, "surface rate {}", r.surface.rate);
}

#[test]
fn distance_sweep_degrades_magnetic_monotonically() {
    let (p, model) = fixture();
    let r = sensitivity_sweep(
        p,
        model,
        &NoiseConfig::default(),
        "contact_distance_hi_m",
        &[3.5e-3, 5e-3, 10e-3],
        60,
        9,
    )
    .unwrap();
    assert_eq!(r.points.len(), 3);
    assert!(r.non_decreasing.magnetic);
    assert!(r.points[2].report.magnetic.errors > 0);
}

#[test]
fn s11_noise_sweep_degrades_electrical_monotonically() {
    let (p, model) = fixture();
    let r = sensitivity_sweep(
        p,
        model,
        &NoiseConfig::default(),
        "s11_noise_db",
        &[0.0, 0.5, 2.0],
        60,
        9,
    )
    .unwrap();
    assert!(r.non_decreasing.electrical);
    assert!(r.points[0].report.electrical.errors < r.points[2].report.electrical.errors);
}

#[test]
fn empty_sweep_and_unknown_field() {
    let (p, model) = fixture();
    let r = sensitivity_sweep(p, model, &NoiseConfig::default(), "mag_noise_t", &[], 10, 0).unwrap();
    assert!(r.points.is_empty());
    assert!(sensitivity_sweep(p, model, &NoiseConfig::default(), "nope", &[1.0], 10, 0).is_err());
}
