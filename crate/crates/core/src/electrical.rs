//! Conductivity channel: contact and material impedance, S11 synthesis, state ladder.
//!
//! A touch puts the finger's bio-impedance, the contact constriction and the
//! material in series. The bio-impedance cancels in the touch-induced change
//! ΔZ, and the contact term dominates for thin pixels.

use std::f64::consts::{LN_10, PI};

use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::capacity::{geometric_capacity, Capacity};
use crate::contact::{self, FingerModel, SKIN_RESISTIVITY_OHM_M};
use crate::error::{Error, Result};
use crate::noise::{gaussian, NoiseConfig};
use crate::quantities::{default_grid, magnitude, Complex, FrequencyGrid, EPS0};
use crate::SimRng;

/// Lowest frequency at which ΔZ ≈ Z_contact is claimed (Hz).
pub const MIN_MODEL_FREQUENCY_HZ: f64 = 1e6;
/// Clamp for a perfect match, which would otherwise be −∞ dB.
pub const S11_FLOOR_DB: f64 = -120.0;
/// Decode band (Hz).
pub const DECODE_BAND_HZ: (f64, f64) = (80e6, 180e6);
/// Characterized resistivity of pure chlorella (Ω·m).
pub const CHLORELLA_RESISTIVITY_OHM_M: f64 = 1.86e8;

/// One encodable surface element of the conductive material.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialPixel {
    pub length_m: f64,
    pub width_m: f64,
    pub thickness_m: f64,
    pub resistivity_ohm_m: f64,
    pub relative_permittivity: f64,
}

impl Default for MaterialPixel {
    fn default() -> Self {
        Self {
            length_m: 0.015,
            width_m: 0.015,
            thickness_m: 0.001,
            resistivity_ohm_m: CHLORELLA_RESISTIVITY_OHM_M,
            relative_permittivity: 1.0,
        }
    }
}

impl MaterialPixel {
    pub fn with_resistivity(self, resistivity_ohm_m: f64) -> Self {
        Self {
            resistivity_ohm_m,
            ..self
        }
    }

    /// Face area A = L·W (m²).
    pub fn area_m2(&self) -> f64 {
        self.length_m * self.width_m
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length_m > 0.0 && self.width_m > 0.0 && self.thickness_m > 0.0) {
            return Err(Error::domain("pixel dimensions must be > 0"));
        }
        if self.thickness_m > self.length_m.min(self.width_m) {
            return Err(Error::domain("pixel must be thin: thickness <= min(length, width)"));
        }
        if !(self.resistivity_ohm_m > 0.0) {
            return Err(Error::domain("pixel resistivity must be > 0"));
        }
        if !(self.relative_permittivity > 0.0) {
            return Err(Error::domain("relative permittivity must be > 0"));
        }
        Ok(())
    }
}

/// Geometric conductivity ladder σ_k = σ0·ratio^k.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElectricalLadder {
    pub sigma0_s_per_m: f64,
    pub ratio: f64,
    pub n_states: usize,
}

impl Default for ElectricalLadder {
    fn default() -> Self {
        Self {
            sigma0_s_per_m: 5.37e-9,
            ratio: 1.68,
            n_states: 32,
        }
    }
}

impl ElectricalLadder {
    /// Eight-sample sweep with a doubling step, as used in the full-wave study.
    pub fn simulation() -> Self {
        Self {
            sigma0_s_per_m: 5.37e-9,
            ratio: 2.0,
            n_states: 8,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma0_s_per_m > 0.0 && self.ratio > 1.0 && self.n_states >= 1) {
            return Err(Error::domain("ladder needs sigma0 > 0, ratio > 1, n_states >= 1"));
        }
        Ok(())
    }

    pub fn conductivity(&self, k: usize) -> f64 {
        self.sigma0_s_per_m * self.ratio.powi(k as i32)
    }

    pub fn resistivity(&self, k: usize) -> f64 {
        1.0 / self.conductivity(k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderState {
    pub index: usize,
    pub conductivity_s_per_m: f64,
    pub resistivity_ohm_m: f64,
}

pub fn ladder_states(ladder: &ElectricalLadder) -> Vec<LadderState> {
    (0..ladder.n_states)
        .map(|k| {
            let sigma = ladder.conductivity(k);
            LadderState {
                index: k,
                conductivity_s_per_m: sigma,
                resistivity_ohm_m: 1.0 / sigma,
            }
        })
        .collect()
}

/// Bio-impedance sensing front end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensingConfig {
    pub grid: FrequencyGrid,
    /// Series bio-impedance offset; cancels in ΔZ, only sets absolute S11 levels.
    pub z_bio_ohm: f64,
    pub z0_ohm: f64,
    pub band_hz: (f64, f64),
    pub sweep_rate_hz: f64,
}

impl Default for SensingConfig {
    fn default() -> Self {
        Self {
            grid: default_grid(),
            z_bio_ohm: 600.0,
            z0_ohm: 50.0,
            band_hz: DECODE_BAND_HZ,
            sweep_rate_hz: 30.0,
        }
    }
}

/// One VNA sweep. Serializes as `{"t": .., "f_hz": [..], "s11_db": [..]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepFrame {
    #[serde(rename = "t")]
    pub timestamp_s: f64,
    #[serde(rename = "f_hz")]
    pub grid: FrequencyGrid,
    pub s11_db: Vec<f64>,
}

impl SweepFrame {
    pub fn new(timestamp_s: f64, grid: FrequencyGrid, s11_db: Vec<f64>) -> Result<Self> {
        let frame = Self {
            timestamp_s,
            grid,
            s11_db,
        };
        frame.validate()?;
        Ok(frame)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.len() != self.s11_db.len() {
            return Err(Error::Domain(format!(
                "sweep has {} frequencies but {} S11 values",
                self.grid.len(),
                self.s11_db.len()
            )));
        }
        if !self.timestamp_s.is_finite() || self.s11_db.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("sweep values must be finite"));
        }
        Ok(())
    }

    /// Mean S11 over grid points inside `[lo, hi]` Hz.
    pub fn band_mean(&self, (lo, hi): (f64, f64)) -> Result<f64> {
        let idx = self.grid.band_indices(lo, hi);
        if idx.is_empty() {
            return Err(Error::Domain(format!(
                "sweep grid has no points in [{lo:e}, {hi:e}] Hz"
            )));
        }
        let n = idx.len() as f64;
        Ok(self.s11_db[idx].iter().sum::<f64>() / n)
    }
}

/// Z_contact = (ρ_skin + ρ_material)/(4a), the diffuse spreading impedance.
pub fn contact_impedance(rho_material_ohm_m: f64, a_m: f64) -> Result<f64> {
    if !(rho_material_ohm_m > 0.0 && a_m > 0.0) {
        return Err(Error::domain("contact impedance needs resistivity > 0 and radius > 0"));
    }
    contact::spreading_impedance(SKIN_RESISTIVITY_OHM_M, rho_material_ohm_m, a_m, 0.0)
}

/// Z_material = (t/A)·(1/σ + ω/(jω²ε₀ε_r − σ)).
pub fn material_impedance(pixel: &MaterialPixel, f_hz: f64) -> Result<Complex> {
    if !(f_hz > 0.0) {
        return Err(Error::Domain(format!("frequency must be > 0, got {f_hz}")));
    }
    pixel.validate()?;
    Ok(material_impedance_unchecked(pixel, f_hz))
}

fn material_impedance_unchecked(pixel: &MaterialPixel, f_hz: f64) -> Complex {
    let sigma = 1.0 / pixel.resistivity_ohm_m;
    let omega = 2.0 * PI * f_hz;
    let geometry = pixel.thickness_m / pixel.area_m2();
    let reactive = Complex::new(omega, 0.0) / Complex::new(-sigma, omega * omega * EPS0 * pixel.relative_permittivity);
    (Complex::new(pixel.resistivity_ohm_m, 0.0) + reactive) * geometry
}

/// Touch-induced impedance change. With `include_material = false` this is the
/// contact term alone, which is what the decoder's model assumes.
pub fn delta_z(pixel: &MaterialPixel, a_m: f64, f_hz: f64, include_material: bool) -> Result<Complex> {
    if !(f_hz >= MIN_MODEL_FREQUENCY_HZ) {
        return Err(Error::Domain(format!("ΔZ model is valid above 1 MHz, got {f_hz} Hz")));
    }
    pixel.validate()?;
    let contact = Complex::new(contact_impedance(pixel.resistivity_ohm_m, a_m)?, 0.0);
    Ok(if include_material {
        contact + material_impedance_unchecked(pixel, f_hz)
    } else {
        contact
    })
}

/// Reflection magnitude 20·log10|(Z − Z0)/(Z + Z0)| in dB, clamped at [`S11_FLOOR_DB`].
///
/// Uses |Γ|² = 1 − 4·Re(Z)·Z0/|Z + Z0|², which stays accurate when |Γ| is
/// within 1e-9 of one.
pub fn s11_db(z: Complex, z0_ohm: f64) -> Result<f64> {
    if !(z0_ohm > 0.0) {
        return Err(Error::domain("reference impedance must be > 0"));
    }
    let denom = magnitude(z + z0_ohm);
    if denom == 0.0 {
        return Err(Error::domain("load Z = −Z0 makes the reflection coefficient singular"));
    }
    if z.re.is_infinite() || z.im.is_infinite() {
        return Ok(0.0);
    }
    let absorbed = 4.0 * z0_ohm * (z.re / denom) / denom;
    if absorbed >= 1.0 {
        return Ok(S11_FLOOR_DB);
    }
    let db = 10.0 * (-absorbed).ln_1p() / LN_10;
    Ok(db.max(S11_FLOOR_DB))
}

/// One sweep with default sensing configuration at t = 0.
pub fn synth_sweep(
    pixel: &MaterialPixel,
    finger: &FingerModel,
    noise: &NoiseConfig,
    rng_seed: u64,
) -> Result<SweepFrame> {
    let mut rng = SimRng::seed_from_u64(rng_seed);
    synth_frame(&SensingConfig::default(), pixel, finger, noise, 0.0, &mut rng)
}

/// `n_frames` consecutive sweeps at the configured sweep rate, one seeded stream.
pub fn synth_sweeps(
    sensing: &SensingConfig,
    pixel: &MaterialPixel,
    finger: &FingerModel,
    noise: &NoiseConfig,
    n_frames: usize,
    rng_seed: u64,
) -> Result<Vec<SweepFrame>> {
    let mut rng = SimRng::seed_from_u64(rng_seed);
    (0..n_frames)
        .map(|i| {
            let t = i as f64 / sensing.sweep_rate_hz;
            synth_frame(sensing, pixel, finger, noise, t, &mut rng)
        })
        .collect()
}

pub(crate) fn synth_frame(
    sensing: &SensingConfig,
    pixel: &MaterialPixel,
    finger: &FingerModel,
    noise: &NoiseConfig,
    timestamp_s: f64,
    rng: &mut SimRng,
) -> Result<SweepFrame> {
    pixel.validate()?;
    finger.validate()?;
    noise.validate()?;
    let force = noise.sample_force(rng);
    let radius =
        contact::radius_unchecked(force, finger, finger.nominal_modulus_pa()) * noise.sample_radius_factor(rng);
    let s11 = sensing
        .grid
        .as_slice()
        .iter()
        .map(|&f| {
            let z = delta_z(pixel, radius, f, true)? + sensing.z_bio_ohm;
            Ok(s11_db(z, sensing.z0_ohm)? + gaussian(rng, noise.s11_noise_db))
        })
        .collect::<Result<Vec<f64>>>()?;
    SweepFrame::new(timestamp_s, sensing.grid.clone(), s11)
}

/// Number of distinguishable resistivity states between two bounds.
pub fn electrical_capacity(rho_hi: f64, rho_lo: f64, margin: f64) -> Result<Capacity> {
    geometric_capacity(rho_hi, rho_lo, margin)
}
