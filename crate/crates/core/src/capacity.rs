//! Geometric-ladder capacity: how many states fit between two bounds at a read margin.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Capacity {
    pub states: usize,
    pub bits: u32,
}

/// states = ⌊log(hi/lo) / log(margin)⌋ clamped to ≥ 1, bits = ⌊log2 states⌋.
pub fn geometric_capacity(hi: f64, lo: f64, margin: f64) -> Result<Capacity> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::Domain(format!(
            "capacity bounds need hi > lo > 0, got hi={hi}, lo={lo}"
        )));
    }
    if !(margin > 1.0 && margin.is_finite()) {
        return Err(Error::Domain(format!("read margin must be > 1, got {margin}")));
    }
    let raw = ((hi / lo).ln() / margin.ln()).floor();
    let states = if raw < 1.0 { 1 } else { raw as usize };
    Ok(Capacity {
        states,
        bits: states.ilog2(),
    })
}
