//! Shared fixtures for the criterion benches.

use imat_core::codec::{encode, plan, synthesize, WordTraces};
use imat_core::surface::train_on_synthetic;
use imat_core::{BitAllocation, CodePlan, NoiseConfig, PlanBounds, SimRng, SymbolWord, TextureModel};
use rand::SeedableRng;

/// Default plan with a small synthetic texture model.
pub fn plan_and_model() -> (CodePlan, TextureModel) {
    let p = plan(&BitAllocation::default(), &PlanBounds::default()).expect("default plan");
    let model = train_on_synthetic(&p.surface, 6, &NoiseConfig::default(), 0).expect("synthetic model");
    (p, model)
}

/// Noisy traces for one word.
pub fn traces(p: &CodePlan, value: u32, seed: u64) -> WordTraces {
    let word = SymbolWord::from_value(value, &p.allocation).expect("word in range");
    let spec = encode(&word, p).expect("encodable word");
    synthesize(&spec, p, &NoiseConfig::default(), &mut SimRng::seed_from_u64(seed)).expect("synthesis")
}
