//! Hertzian finger contact and Maxwell/Wexler spreading resistance.
//!
//! The counter-surface is taken as rigid and flat, so the effective curvature
//! is the finger's own and the material modulus drops out of the effective
//! modulus.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Resistivity of the living epidermis at 1 MHz (Ω·m).
pub const SKIN_RESISTIVITY_OHM_M: f64 = 11.0;

/// Above this mean-free-path to radius ratio the Sharvin (ballistic) term is included.
pub const SHARVIN_RATIO_THRESHOLD: f64 = 1e-3;

/// Elastic and electrical parameters of the touching finger pad.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FingerModel {
    pub poisson: f64,
    /// Young's modulus interval of skin tissue (Pa).
    pub modulus_lo_pa: f64,
    pub modulus_hi_pa: f64,
    pub curvature_radius_m: f64,
    pub tap_force_mean_n: f64,
    pub tap_force_sd_n: f64,
    pub skin_resistivity_ohm_m: f64,
}

impl Default for FingerModel {
    fn default() -> Self {
        Self {
            poisson: 0.48,
            modulus_lo_pa: 2e5,
            modulus_hi_pa: 4.6e6,
            curvature_radius_m: 0.01,
            tap_force_mean_n: 0.50,
            tap_force_sd_n: 0.09,
            skin_resistivity_ohm_m: SKIN_RESISTIVITY_OHM_M,
        }
    }
}

impl FingerModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.poisson > 0.0 && self.poisson < 0.5) {
            return Err(Error::domain("Poisson ratio must lie in (0, 0.5)"));
        }
        if !(self.modulus_lo_pa > 0.0 && self.modulus_lo_pa <= self.modulus_hi_pa) {
            return Err(Error::domain("modulus interval must satisfy 0 < lo <= hi"));
        }
        if !(self.curvature_radius_m > 0.0) {
            return Err(Error::domain("finger curvature radius must be > 0"));
        }
        if !(self.tap_force_mean_n > 0.0 && self.tap_force_sd_n >= 0.0) {
            return Err(Error::domain("tap force mean must be > 0 and sd >= 0"));
        }
        if !(self.skin_resistivity_ohm_m > 0.0) {
            return Err(Error::domain("skin resistivity must be > 0"));
        }
        Ok(())
    }

    /// Geometric mean of the modulus interval; the single modulus used for synthesis.
    pub fn nominal_modulus_pa(&self) -> f64 {
        (self.modulus_lo_pa * self.modulus_hi_pa).sqrt()
    }

    fn check_modulus(&self, modulus_pa: f64) -> Result<()> {
        // a little slack so interval endpoints computed elsewhere are accepted
        let tol = 1e-12 * self.modulus_hi_pa;
        if modulus_pa < self.modulus_lo_pa - tol || modulus_pa > self.modulus_hi_pa + tol {
            return Err(Error::Domain(format!(
                "modulus {modulus_pa} Pa outside finger interval [{}, {}]",
                self.modulus_lo_pa, self.modulus_hi_pa
            )));
        }
        Ok(())
    }
}

/// Circular contact patch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactGeometry {
    pub radius_m: f64,
    pub area_m2: f64,
}

impl ContactGeometry {
    pub fn from_radius(radius_m: f64) -> Self {
        Self {
            radius_m,
            area_m2: PI * radius_m * radius_m,
        }
    }
}

/// E* with 1/E* = (3/4)(1 − ν²)/E against a rigid counter-surface.
pub fn effective_modulus(finger: &FingerModel, modulus_pa: f64) -> Result<f64> {
    finger.check_modulus(modulus_pa)?;
    Ok(effective_modulus_unchecked(finger.poisson, modulus_pa))
}

pub(crate) fn effective_modulus_unchecked(poisson: f64, modulus_pa: f64) -> f64 {
    4.0 * modulus_pa / (3.0 * (1.0 - poisson * poisson))
}

/// Contact radius a = [9 F R (1 − ν²) / (16 E)]^(1/3).
pub fn contact_radius(force_n: f64, finger: &FingerModel, modulus_pa: f64) -> Result<ContactGeometry> {
    if !(force_n >= 0.0) {
        return Err(Error::Domain(format!("tap force must be >= 0, got {force_n}")));
    }
    finger.check_modulus(modulus_pa)?;
    Ok(ContactGeometry::from_radius(radius_unchecked(
        force_n, finger, modulus_pa,
    )))
}

pub(crate) fn radius_unchecked(force_n: f64, finger: &FingerModel, modulus_pa: f64) -> f64 {
    let nu2 = finger.poisson * finger.poisson;
    (9.0 * force_n * finger.curvature_radius_m * (1.0 - nu2) / (16.0 * modulus_pa)).cbrt()
}

/// Contact radius range at the mean tap force over the modulus interval, as (min, max).
pub fn contact_radius_bounds(finger: &FingerModel) -> (f64, f64) {
    let f = finger.tap_force_mean_n;
    let stiff = radius_unchecked(f, finger, finger.modulus_hi_pa);
    let soft = radius_unchecked(f, finger, finger.modulus_lo_pa);
    (stiff.min(soft), stiff.max(soft))
}

/// Spreading impedance of a circular constriction between two bodies.
///
/// Diffuse term ρ*/(2a) with ρ* = (ρ1 + ρ2)/2. The Sharvin term 4ρ*lₑ/(3πa²)
/// is added only once lₑ/a exceeds [`SHARVIN_RATIO_THRESHOLD`]; the
/// interpolation function v(lₑ/a) is held at its diffuse limit of 1.
pub fn spreading_impedance(rho1_ohm_m: f64, rho2_ohm_m: f64, a_m: f64, mean_free_path_m: f64) -> Result<f64> {
    if !(a_m > 0.0) {
        return Err(Error::Domain(format!("contact radius must be > 0, got {a_m}")));
    }
    if !(rho1_ohm_m >= 0.0 && rho2_ohm_m >= 0.0 && mean_free_path_m >= 0.0) {
        return Err(Error::domain("resistivities and mean free path must be >= 0"));
    }
    let rho_star = 0.5 * (rho1_ohm_m + rho2_ohm_m);
    let diffuse = rho_star / (2.0 * a_m);
    if mean_free_path_m / a_m <= SHARVIN_RATIO_THRESHOLD {
        Ok(diffuse)
    } else {
        Ok(diffuse + 4.0 * rho_star * mean_free_path_m / (3.0 * PI * a_m * a_m))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn effective_modulus_examples() {
        let f = FingerModel::default();
        // frozen from 30-digit evaluation of 4E / (3(1 − ν²))
        assert!(rel(effective_modulus(&f, 1e6).unwrap(), 1_732_501.732_501_732_5) < 1e-12);
        assert!(rel(effective_modulus(&f, 2e5).unwrap(), 346_500.346_500_346_5) < 1e-12);
        assert!(rel(effective_modulus_unchecked(0.0, 3e6), 4e6) < 1e-15);
    }

    #[test]
    fn modulus_outside_interval_is_rejected() {
        let f = FingerModel::default();
        assert!(matches!(effective_modulus(&f, 1e5), Err(Error::Domain(_))));
        assert!(matches!(contact_radius(0.5, &f, 5e6), Err(Error::Domain(_))));
    }

    #[test]
    fn contact_radius_examples() {
        let f = FingerModel::default();
        assert_eq!(contact_radius(0.0, &f, 1e6).unwrap().radius_m, 0.0);
        let g = contact_radius(0.5, &f, 1e6).unwrap();
        assert!(rel(g.radius_m, 1.293_557_872_470_824_8e-3) < 1e-12);
        assert!(rel(g.area_m2, PI * g.radius_m * g.radius_m) < 1e-12);
        assert!(matches!(contact_radius(-0.1, &f, 1e6), Err(Error::Domain(_))));
    }

    #[test]
    fn bounds_match_formula_and_published_window() {
        let (lo, hi) = contact_radius_bounds(&FingerModel::default());
        assert!(rel(lo, 7.777_975_774_643_456e-4) < 1e-12);
        assert!(rel(hi, 2.211_952_847_559_393e-3) < 1e-12);
        // published (0.84 mm, 2.40 mm); the formula lands ~8% low on both ends
        assert!(rel(lo, 0.84e-3) <= 0.10);
        assert!(rel(hi, 2.40e-3) <= 0.10);
    }

    #[test]
    fn bounds_degenerate_interval_and_force_scaling() {
        let f = FingerModel {
            modulus_lo_pa: 1e6,
            modulus_hi_pa: 1e6,
            ..Default::default()
        };
        let (lo, hi) = contact_radius_bounds(&f);
        assert_eq!(lo, hi);

        let base = FingerModel::default();
        let mut doubled = base;
        doubled.tap_force_mean_n *= 2.0;
        let (l0, h0) = contact_radius_bounds(&base);
        let (l1, h1) = contact_radius_bounds(&doubled);
        let k = 2f64.cbrt();
        assert!(rel(l1, l0 * k) < 1e-12);
        assert!(rel(h1, h0 * k) < 1e-12);
    }

    #[test]
    fn spreading_examples() {
        assert_eq!(spreading_impedance(0.0, 0.0, 1e-3, 0.0).unwrap(), 0.0);
        assert!(rel(spreading_impedance(11.0, 11.0, 1e-3, 0.0).unwrap(), 5500.0) < 1e-12);
        let z = spreading_impedance(11.0, 1.86e8, 0.84e-3, 0.0).unwrap();
        assert!(rel(z, 55_357_146_130.952_38) < 1e-12);
        assert!(spreading_impedance(11.0, 11.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn sharvin_term_only_outside_diffuse_regime() {
        let a = 1e-3;
        let diffuse = spreading_impedance(11.0, 11.0, a, 0.0).unwrap();
        assert_eq!(spreading_impedance(11.0, 11.0, a, 1e-6).unwrap(), diffuse);
        let lp = 1e-5;
        let z = spreading_impedance(11.0, 11.0, a, lp).unwrap();
        assert!(rel(z, diffuse + 4.0 * 11.0 * lp / (3.0 * PI * a * a)) < 1e-12);
    }

    proptest! {
        #[test]
        fn radius_monotone_in_force_radius_and_modulus(
            force in 0.05f64..2.0,
            r in 0.005f64..0.02,
            e in 2e5f64..3.0e6,
            bump in 1.01f64..1.5,
        ) {
            let f = FingerModel {
                curvature_radius_m: r,
                ..Default::default()
            };
            let a = radius_unchecked(force, &f, e);
            prop_assert!(radius_unchecked(force * bump, &f, e) > a);
            prop_assert!(radius_unchecked(force, &f, e * bump) < a);
            let mut g = f;
            g.curvature_radius_m = r * bump;
            prop_assert!(radius_unchecked(force, &g, e) > a);
        }

        #[test]
        fn cube_root_law(force in 0.01f64..5.0, e in 2e5f64..4.6e6) {
            let f = FingerModel::default();
            let c1 = radius_unchecked(force, &f, e) * force.powf(-1.0 / 3.0);
            let c2 = radius_unchecked(1.0, &f, e);
            prop_assert!((c1 - c2).abs() / c2 < 1e-9);
        }

        #[test]
        fn spreading_symmetric_and_inverse_in_radius(
            r1 in 0.0f64..1e9, r2 in 0.0f64..1e9, a in 1e-4f64..1e-2, k in 0.1f64..10.0,
        ) {
            let z = spreading_impedance(r1, r2, a, 0.0).unwrap();
            prop_assert_eq!(z, spreading_impedance(r2, r1, a, 0.0).unwrap());
            let zk = spreading_impedance(r1, r2, a * k, 0.0).unwrap();
            prop_assert!((zk * k - z).abs() <= 1e-12 * z.max(1e-300));
        }
    }
}
