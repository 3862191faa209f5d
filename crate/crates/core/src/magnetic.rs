//! Magnetization channel: saturation physics, on-axis cuboid field, state
//! ladder and magnetometer trace synthesis.
//!
//! The pixel is a cuboid magnetized through its thickness (poles on the
//! top and bottom faces); the field is evaluated on the axis above the
//! centre of the top face.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::capacity::{geometric_capacity, Capacity};
use crate::error::{Error, Result};
use crate::noise::{gaussian, NoiseConfig};
use crate::quantities::{AVOGADRO, BOHR_MAGNETON, EARTH_FIELD_T, FRIDGE_FIELD_T, MU0};
use crate::SimRng;

/// Magnetometer output data rate (Hz).
pub const MAG_SAMPLE_RATE_HZ: f64 = 10.0;
/// Samples at the start of a trace recorded before the finger is in range.
pub const BASELINE_SAMPLES: usize = 5;
/// Minimum trace duration (s).
pub const MIN_TRACE_DURATION_S: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagnetPixel {
    pub length_m: f64,
    pub width_m: f64,
    pub thickness_m: f64,
    /// Residual flux density B_r (T).
    pub remanence_t: f64,
}

impl Default for MagnetPixel {
    fn default() -> Self {
        Self {
            length_m: 0.02,
            width_m: 0.02,
            thickness_m: 0.005,
            remanence_t: 0.125,
        }
    }
}

impl MagnetPixel {
    pub fn with_remanence(self, remanence_t: f64) -> Self {
        Self { remanence_t, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length_m > 0.0 && self.width_m > 0.0 && self.thickness_m > 0.0) {
            return Err(Error::domain("magnet dimensions must be > 0"));
        }
        if !(self.remanence_t >= 0.0) {
            return Err(Error::domain("remanence must be >= 0"));
        }
        Ok(())
    }
}

/// Magnetic filler composition for the saturation estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagneticComposition {
    /// Bohr magnetons per magnetic atom, n_B ∈ [4, 6.7] for Fe²⁺.
    pub bohr_magnetons_per_atom: f64,
    /// Partial density of the magnetic phase (g/m³).
    pub density_g_per_m3: f64,
    pub molar_mass_g_per_mol: f64,
}

impl Default for MagneticComposition {
    /// 20 wt% Fe3O4 in chlorella.
    fn default() -> Self {
        Self {
            bohr_magnetons_per_atom: 4.0,
            density_g_per_m3: 1.03e6,
            molar_mass_g_per_mol: 231.533,
        }
    }
}

impl MagneticComposition {
    pub fn new(bohr_magnetons_per_atom: f64, density_g_per_m3: f64, molar_mass_g_per_mol: f64) -> Result<Self> {
        if !(4.0..=6.7).contains(&bohr_magnetons_per_atom) {
            return Err(Error::domain("n_B must lie in [4, 6.7]"));
        }
        if !(density_g_per_m3 > 0.0 && molar_mass_g_per_mol > 0.0) {
            return Err(Error::domain("density and molar mass must be > 0"));
        }
        Ok(Self {
            bohr_magnetons_per_atom,
            density_g_per_m3,
            molar_mass_g_per_mol,
        })
    }
}

/// M_sat = n_B·μ_B·D·N_A / M (A/m).
pub fn saturation_magnetization(c: &MagneticComposition) -> f64 {
    c.bohr_magnetons_per_atom * BOHR_MAGNETON * c.density_g_per_m3 * AVOGADRO / c.molar_mass_g_per_mol
}

/// B_sat = μ0·M_sat (T).
pub fn saturation_induction(m_sat_a_per_m: f64) -> f64 {
    MU0 * m_sat_a_per_m
}

/// On-axis flux density at height `x_m` above the top face:
///
/// B(X) = (B_r/π)·[atan(LW / (2X√(4X² + L² + W²))) − atan(LW / (2(t+X)√(4(t+X)² + L² + W²)))]
///
/// The difference of arctangents is folded into one `atan2` so that wide
/// pixels (both arguments huge) do not lose the result to cancellation.
pub fn flux_density(pixel: &MagnetPixel, x_m: f64) -> Result<f64> {
    if !(x_m > 0.0) {
        return Err(Error::Domain(format!("distance above the face must be > 0, got {x_m}")));
    }
    pixel.validate()?;
    Ok(pixel.remanence_t * unit_flux(pixel, x_m))
}

fn unit_flux(pixel: &MagnetPixel, x: f64) -> f64 {
    let (l, w, t) = (pixel.length_m, pixel.width_m, pixel.thickness_m);
    let arg = |h: f64| l * w / (2.0 * h * (4.0 * h * h + l * l + w * w).sqrt());
    let (near, far) = (arg(x), arg(x + t));
    (near - far).atan2(1.0 + near * far) / PI
}

/// Independent check of [`flux_density`] via the surface-charge model: the
/// top face carries +B_r/μ0 and the bottom face −B_r/μ0, each integrated
/// with a `grid_n`×`grid_n` midpoint rule.
pub fn flux_density_reference(pixel: &MagnetPixel, x_m: f64, grid_n: usize) -> Result<f64> {
    if grid_n < 64 {
        return Err(Error::Domain(format!("quadrature grid must be >= 64, got {grid_n}")));
    }
    if !(x_m > 0.0) {
        return Err(Error::Domain(format!("distance above the face must be > 0, got {x_m}")));
    }
    pixel.validate()?;
    let (dx, dy) = (pixel.length_m / grid_n as f64, pixel.width_m / grid_n as f64);
    // on-axis field of a charged sheet at height h: (σ/4π)∫∫ h/(r² + h²)^{3/2} dA
    let sheet = |h: f64| -> f64 {
        let mut sum = 0.0;
        for i in 0..grid_n {
            let px = -0.5 * pixel.length_m + (i as f64 + 0.5) * dx;
            let mut row = 0.0;
            for j in 0..grid_n {
                let py = -0.5 * pixel.width_m + (j as f64 + 0.5) * dy;
                let r2 = px * px + py * py + h * h;
                row += h / (r2 * r2.sqrt());
            }
            sum += row;
        }
        sum * dx * dy
    };
    let top = sheet(x_m);
    let bottom = sheet(x_m + pixel.thickness_m);
    Ok(pixel.remanence_t * (top - bottom) / (4.0 * PI))
}

/// Remanence that makes the on-axis reading at `distance_m` equal `reading_t`.
pub fn remanence_for_reading(pixel: &MagnetPixel, reading_t: f64, distance_m: f64) -> Result<f64> {
    let unit = flux_density(&pixel.with_remanence(1.0), distance_m)?;
    Ok(reading_t / unit)
}

/// Geometric ladder of sensor readings B_k = b_lo·ratio^k (T).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagneticLadder {
    pub b_lo_t: f64,
    pub ratio: f64,
    pub n_states: usize,
}

impl Default for MagneticLadder {
    fn default() -> Self {
        Self {
            b_lo_t: EARTH_FIELD_T,
            ratio: 1.81,
            n_states: 8,
        }
    }
}

impl MagneticLadder {
    pub fn validate(&self) -> Result<()> {
        if !(self.b_lo_t > 0.0 && self.ratio > 1.0 && self.n_states >= 1) {
            return Err(Error::domain(
                "magnetic ladder needs b_lo > 0, ratio > 1, n_states >= 1",
            ));
        }
        Ok(())
    }

    pub fn reading(&self, k: usize) -> f64 {
        self.b_lo_t * self.ratio.powi(k as i32)
    }

    pub fn readings(&self) -> Vec<f64> {
        (0..self.n_states).map(|k| self.reading(k)).collect()
    }

    pub fn top_within_fridge_bound(&self) -> bool {
        self.reading(self.n_states - 1) <= FRIDGE_FIELD_T
    }
}

pub fn magnetic_capacity(b_hi: f64, b_lo: f64, margin: f64) -> Result<Capacity> {
    geometric_capacity(b_hi, b_lo, margin)
}

/// One 3-axis magnetometer sample. Serializes as `{"t": .., "b_t": [bx, by, bz]}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagSample {
    pub t: f64,
    pub b_t: [f64; 3],
}

/// Finger-to-pixel distance for sample `i` of `n`; `None` while out of range.
fn distance_profile(i: usize, n: usize, contact_m: f64) -> Option<f64> {
    if i < BASELINE_SAMPLES {
        None
    } else if i == BASELINE_SAMPLES || i + 1 == n {
        Some(2.0 * contact_m)
    } else {
        Some(contact_m)
    }
}

/// 10 Hz trace of a touch: out of range for the first half second, a
/// one-sample approach, contact at `contact_distance_m`, one-sample retract.
/// A constant Earth field of random orientation and per-axis Gaussian noise
/// are added; the pixel field points along the sensor z axis.
pub fn synth_magnetometer_trace(
    state_b_r: f64,
    pixel: &MagnetPixel,
    contact_distance_m: f64,
    duration_s: f64,
    noise: &NoiseConfig,
    rng_seed: u64,
) -> Result<Vec<MagSample>> {
    let mut rng = SimRng::seed_from_u64(rng_seed);
    synth_trace_with(state_b_r, pixel, contact_distance_m, duration_s, noise, &mut rng)
}

pub(crate) fn synth_trace_with(
    state_b_r: f64,
    pixel: &MagnetPixel,
    contact_distance_m: f64,
    duration_s: f64,
    noise: &NoiseConfig,
    rng: &mut SimRng,
) -> Result<Vec<MagSample>> {
    if !(duration_s >= MIN_TRACE_DURATION_S) {
        return Err(Error::Domain(format!(
            "trace duration must be >= 1 s, got {duration_s}"
        )));
    }
    if !(contact_distance_m > 0.0) {
        return Err(Error::domain("contact distance must be > 0"));
    }
    noise.validate()?;
    let pixel = pixel.with_remanence(state_b_r);
    pixel.validate()?;

    let earth = random_direction(rng).map(|c| c * EARTH_FIELD_T);
    let n = (duration_s * MAG_SAMPLE_RATE_HZ).round() as usize;
    (0..n)
        .map(|i| {
            let bz = match distance_profile(i, n, contact_distance_m) {
                Some(d) => flux_density(&pixel, d)?,
                None => 0.0,
            };
            let field = [earth[0], earth[1], earth[2] + bz];
            let b_t = field.map(|c| c + gaussian(rng, noise.mag_noise_t));
            Ok(MagSample {
                t: i as f64 / MAG_SAMPLE_RATE_HZ,
                b_t,
            })
        })
        .collect()
}

fn random_direction<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    let z: f64 = 2.0 * rng.random::<f64>() - 1.0;
    let phi: f64 = 2.0 * PI * rng.random::<f64>();
    let s = (1.0 - z * z).max(0.0).sqrt();
    [s * phi.cos(), s * phi.sin(), z]
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Peak field excess over the pre-touch baseline (T).
///
/// The baseline is the per-axis median of the first [`BASELINE_SAMPLES`]
/// samples, so any constant background vector cancels exactly.
pub fn peak_excess(trace: &[MagSample]) -> Result<f64> {
    let min_len = (MIN_TRACE_DURATION_S * MAG_SAMPLE_RATE_HZ) as usize;
    if trace.len() < min_len {
        return Err(Error::Domain(format!(
            "magnetometer trace needs >= {min_len} samples, got {}",
            trace.len()
        )));
    }
    let mut baseline = [0.0; 3];
    for (axis, b) in baseline.iter_mut().enumerate() {
        let mut column: Vec<f64> = trace[..BASELINE_SAMPLES].iter().map(|s| s.b_t[axis]).collect();
        *b = median(&mut column);
    }
    Ok(trace
        .iter()
        .map(|s| {
            let d = [s.b_t[0] - baseline[0], s.b_t[1] - baseline[1], s.b_t[2] - baseline[2]];
            (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
        })
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn saturation_worked_example() {
        let m = saturation_magnetization(&MagneticComposition::default());
        assert!(rel(m, 0.997e5) < 0.01);
        assert!(rel(m, 99_302.582_353_271_46) < 1e-12);
        assert!(rel(saturation_induction(m), 0.125) < 0.01);
    }

    #[test]
    fn saturation_trivial_cases() {
        let zero = MagneticComposition {
            bohr_magnetons_per_atom: 0.0,
            ..Default::default()
        };
        assert_eq!(saturation_magnetization(&zero), 0.0);
        let hi = MagneticComposition::new(6.7, 1.03e6, 231.533).unwrap();
        let base = saturation_magnetization(&MagneticComposition::default());
        assert!(rel(saturation_magnetization(&hi), base * 6.7 / 4.0) < 1e-12);
        assert_eq!(saturation_induction(0.0), 0.0);
        assert!(rel(saturation_induction(1.0 / MU0), 1.0) < 1e-15);
        assert!(MagneticComposition::new(3.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn flux_examples() {
        let p = MagnetPixel::default();
        let b = flux_density(&p, 2.5e-3).unwrap();
        // 30-digit evaluation of the arctan expression
        assert!(rel(b, 0.125 * 0.169_212_542_804_445_57) < 1e-12);
        let ratio = flux_density(&p, 10e-3).unwrap() / b;
        assert!(rel(ratio, 0.396_601_374_171_968_7) < 1e-12);
        let near = flux_density(&p, 3.5e-3).unwrap() / b;
        assert!(rel(near, 0.902_653_563_269_557_4) < 1e-12);
        assert!(flux_density(&p, 1e3).unwrap() < 1e-10);
        assert!(flux_density(&p, 0.0).is_err());
    }

    #[test]
    fn reference_agrees_and_converges() {
        let p = MagnetPixel::default();
        for x in [2.5e-3, 5e-3, 2e-2] {
            let exact = flux_density(&p, x).unwrap();
            let q512 = flux_density_reference(&p, x, 512).unwrap();
            let q256 = flux_density_reference(&p, x, 256).unwrap();
            assert!(rel(q512, exact) < 1e-4, "x = {x}");
            assert!(rel(q512, q256) < 1e-5, "x = {x}");
        }
        assert!(flux_density_reference(&p, 2.5e-3, 32).is_err());
    }

    #[test]
    fn reference_is_linear_in_remanence() {
        let p = MagnetPixel::default();
        let a = flux_density_reference(&p.with_remanence(0.1), 4e-3, 64).unwrap();
        let b = flux_density_reference(&p.with_remanence(0.2), 4e-3, 64).unwrap();
        assert!(rel(b, 2.0 * a) < 1e-12);
    }

    #[test]
    fn infinite_sheet_field_vanishes() {
        // The exterior field of a uniformly magnetized slab is zero; for a
        // finite square of side L the residue is ≈ (B_r/π)·2√2·t/L.
        let wide = |side: f64| MagnetPixel {
            length_m: side,
            width_m: side,
            thickness_m: 5e-3,
            remanence_t: 1.0,
        };
        let asymptote = |side: f64| 2.0 * 2f64.sqrt() * 5e-3 / (PI * side);
        for side in [1e3, 1e4] {
            let b = flux_density(&wide(side), 2.5e-3).unwrap();
            assert!(rel(b, asymptote(side)) < 1e-3, "side = {side}");
        }
        assert!(flux_density(&wide(1e4), 2.5e-3).unwrap() < 1e-6);
    }

    #[test]
    fn capacity_examples() {
        assert_eq!(
            magnetic_capacity(1e-2, 5e-5, 1.81).unwrap(),
            Capacity { states: 8, bits: 3 }
        );
        assert_eq!(
            magnetic_capacity(5e-5 * 1.81, 5e-5, 1.81).unwrap(),
            Capacity { states: 1, bits: 0 }
        );
        assert_eq!(
            magnetic_capacity(1e-2, 5e-5, 2.0).unwrap(),
            Capacity { states: 7, bits: 2 }
        );
    }

    #[test]
    fn default_ladder_within_bounds() {
        let l = MagneticLadder::default();
        assert!(l.top_within_fridge_bound());
        assert_eq!(l.reading(0), 5e-5);
    }

    #[test]
    fn zero_remanence_trace_sits_at_earth_field() {
        let t = synth_magnetometer_trace(0.0, &MagnetPixel::default(), 2.5e-3, 1.0, &NoiseConfig::zero(), 3).unwrap();
        assert_eq!(t.len(), 10);
        for s in &t {
            let m = (s.b_t.iter().map(|c| c * c).sum::<f64>()).sqrt();
            assert!(rel(m, EARTH_FIELD_T) < 1e-12);
        }
        assert_eq!(peak_excess(&t).unwrap(), 0.0);
    }

    #[test]
    fn ladder_states_are_ordered_with_ratio() {
        let pixel = MagnetPixel::default();
        let ladder = MagneticLadder::default();
        let excess: Vec<f64> = (0..8)
            .map(|k| {
                let br = remanence_for_reading(&pixel, ladder.reading(k), 2.5e-3).unwrap();
                let t = synth_magnetometer_trace(br, &pixel, 2.5e-3, 1.0, &NoiseConfig::zero(), 11).unwrap();
                peak_excess(&t).unwrap()
            })
            .collect();
        for (k, w) in excess.windows(2).enumerate() {
            assert!(w[1] > w[0], "state {k}");
            assert!((w[1] / w[0] - 1.81).abs() < 1e-6);
        }
        assert!(rel(excess[0], 5e-5) < 1e-9);
    }

    #[test]
    fn trace_is_deterministic_and_validates() {
        let p = MagnetPixel::default();
        let n = NoiseConfig::default();
        let a = synth_magnetometer_trace(0.01, &p, 3e-3, 2.0, &n, 42).unwrap();
        let b = synth_magnetometer_trace(0.01, &p, 3e-3, 2.0, &n, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 20);
        assert!(synth_magnetometer_trace(0.01, &p, 3e-3, 0.5, &n, 42).is_err());
        assert!(peak_excess(&a[..9]).is_err());
    }

    #[test]
    fn constant_offset_does_not_move_excess() {
        let p = MagnetPixel::default();
        let t = synth_magnetometer_trace(0.01, &p, 3e-3, 1.5, &NoiseConfig::default(), 9).unwrap();
        let shifted: Vec<MagSample> = t
            .iter()
            .map(|s| MagSample {
                t: s.t,
                b_t: [s.b_t[0] + 1e-4, s.b_t[1] - 3e-5, s.b_t[2] + 2e-5],
            })
            .collect();
        assert!(rel(peak_excess(&shifted).unwrap(), peak_excess(&t).unwrap()) < 1e-9);
    }

    proptest! {
        #[test]
        fn flux_positive_and_decreasing(x in 1e-4f64..0.5, step in 1e-5f64..0.1) {
            let p = MagnetPixel::default();
            let b1 = flux_density(&p, x).unwrap();
            let b2 = flux_density(&p, x + step).unwrap();
            prop_assert!(b1 > 0.0 && b1 < p.remanence_t);
            prop_assert!(b2 < b1);
        }

        #[test]
        fn saturation_scaling(k in 0.1f64..10.0) {
            let c = MagneticComposition::default();
            let m = saturation_magnetization(&c);
            let nb = MagneticComposition { bohr_magnetons_per_atom: c.bohr_magnetons_per_atom * k, ..c };
            let d = MagneticComposition { density_g_per_m3: c.density_g_per_m3 * k, ..c };
            let mm = MagneticComposition { molar_mass_g_per_mol: c.molar_mass_g_per_mol * k, ..c };
            prop_assert!(rel(saturation_magnetization(&nb), m * k) < 1e-12);
            prop_assert!(rel(saturation_magnetization(&d), m * k) < 1e-12);
            prop_assert!(rel(saturation_magnetization(&mm), m / k) < 1e-12);
        }
    }
}
