//! Touch-noise configuration shared by all synthesizers.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Every stochastic perturbation applied when synthesizing sensor traces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// Tap force, Gaussian truncated to > 0 (N).
    pub force_mean_n: f64,
    pub force_sd_n: f64,
    /// Half-width of the uniform multiplicative contact-radius jitter (pitch angle).
    pub contact_radius_jitter: f64,
    /// Additive Gaussian noise on every S11 point (dB).
    pub s11_noise_db: f64,
    /// Uniform finger-to-magnet distance range (m).
    pub contact_distance_m: [f64; 2],
    /// Per-axis Gaussian magnetometer noise (T).
    pub mag_noise_t: f64,
    /// Additive white noise relative to clip RMS; `None` means noiseless.
    pub audio_snr_db: Option<f64>,
    /// Uniform swipe speed range (m/s).
    pub swipe_speed_m_per_s: [f64; 2],
}

pub const NOMINAL_CONTACT_DISTANCE_M: f64 = 2.5e-3;
pub const NOMINAL_SWIPE_SPEED_M_PER_S: f64 = 0.2;

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            force_mean_n: 0.50,
            force_sd_n: 0.09,
            contact_radius_jitter: 0.15,
            s11_noise_db: 0.5,
            contact_distance_m: [2.5e-3, 3.5e-3],
            mag_noise_t: 2e-7,
            audio_snr_db: Some(20.0),
            swipe_speed_m_per_s: [0.18, 0.22],
        }
    }
}

pub const FIELD_NAMES: &[&str] = &[
    "force_mean_n",
    "force_sd_n",
    "contact_radius_jitter",
    "s11_noise_db",
    "contact_distance_lo_m",
    "contact_distance_hi_m",
    "mag_noise_t",
    "audio_snr_db",
    "swipe_speed_lo_m_per_s",
    "swipe_speed_hi_m_per_s",
];

impl NoiseConfig {
    /// All spreads zero; distance and speed pinned at their nominal values.
    pub fn zero() -> Self {
        Self {
            force_mean_n: 0.50,
            force_sd_n: 0.0,
            contact_radius_jitter: 0.0,
            s11_noise_db: 0.0,
            contact_distance_m: [NOMINAL_CONTACT_DISTANCE_M; 2],
            mag_noise_t: 0.0,
            audio_snr_db: None,
            swipe_speed_m_per_s: [NOMINAL_SWIPE_SPEED_M_PER_S; 2],
        }
    }

    /// Worst-case finger-to-magnet distance band (2.5 to 10 mm).
    pub fn pessimistic() -> Self {
        Self {
            contact_distance_m: [2.5e-3, 10e-3],
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let spreads = [
            self.force_sd_n,
            self.contact_radius_jitter,
            self.s11_noise_db,
            self.mag_noise_t,
        ];
        if spreads.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return Err(Error::Config("noise spreads must be finite and >= 0".into()));
        }
        if !(self.force_mean_n > 0.0) {
            return Err(Error::Config("force mean must be > 0".into()));
        }
        if self.contact_radius_jitter >= 1.0 {
            return Err(Error::Config("contact radius jitter must be < 1".into()));
        }
        let [dlo, dhi] = self.contact_distance_m;
        if !(dlo > 0.0 && dlo <= dhi) {
            return Err(Error::Config(
                "contact distance bounds must satisfy 0 < lo <= hi".into(),
            ));
        }
        let [vlo, vhi] = self.swipe_speed_m_per_s;
        if !(vlo > 0.0 && vlo <= vhi) {
            return Err(Error::Config("swipe speed bounds must satisfy 0 < lo <= hi".into()));
        }
        if let Some(snr) = self.audio_snr_db {
            if snr.is_nan() {
                return Err(Error::Config("audio SNR must be a number".into()));
            }
        }
        Ok(())
    }

    /// Sets one named field; `audio_snr_db` accepts `inf` for noiseless audio.
    pub fn set_field(&mut self, name: &str, value: f64) -> Result<()> {
        match name {
            "force_mean_n" => self.force_mean_n = value,
            "force_sd_n" => self.force_sd_n = value,
            "contact_radius_jitter" => self.contact_radius_jitter = value,
            "s11_noise_db" => self.s11_noise_db = value,
            "contact_distance_lo_m" => self.contact_distance_m[0] = value,
            "contact_distance_hi_m" => self.contact_distance_m[1] = value,
            "mag_noise_t" => self.mag_noise_t = value,
            "audio_snr_db" => {
                self.audio_snr_db = if value.is_infinite() && value > 0.0 {
                    None
                } else {
                    Some(value)
                }
            }
            "swipe_speed_lo_m_per_s" => self.swipe_speed_m_per_s[0] = value,
            "swipe_speed_hi_m_per_s" => self.swipe_speed_m_per_s[1] = value,
            other => {
                return Err(Error::Config(format!(
                    "unknown noise field `{other}` (expected one of {})",
                    FIELD_NAMES.join(", ")
                )))
            }
        }
        Ok(())
    }

    pub fn get_field(&self, name: &str) -> Result<f64> {
        Ok(match name {
            "force_mean_n" => self.force_mean_n,
            "force_sd_n" => self.force_sd_n,
            "contact_radius_jitter" => self.contact_radius_jitter,
            "s11_noise_db" => self.s11_noise_db,
            "contact_distance_lo_m" => self.contact_distance_m[0],
            "contact_distance_hi_m" => self.contact_distance_m[1],
            "mag_noise_t" => self.mag_noise_t,
            "audio_snr_db" => self.audio_snr_db.unwrap_or(f64::INFINITY),
            "swipe_speed_lo_m_per_s" => self.swipe_speed_m_per_s[0],
            "swipe_speed_hi_m_per_s" => self.swipe_speed_m_per_s[1],
            other => return Err(Error::Config(format!("unknown noise field `{other}`"))),
        })
    }

    pub(crate) fn sample_force<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let z: f64 = rng.sample(StandardNormal);
            let f = self.force_mean_n + self.force_sd_n * z;
            if f > 0.0 {
                return f;
            }
        }
    }

    pub(crate) fn sample_radius_factor<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        1.0 + self.contact_radius_jitter * (2.0 * u - 1.0)
    }

    pub(crate) fn sample_distance<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        uniform_in(rng, self.contact_distance_m)
    }

    pub(crate) fn sample_speed<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        uniform_in(rng, self.swipe_speed_m_per_s)
    }
}

fn uniform_in<R: Rng + ?Sized>(rng: &mut R, [lo, hi]: [f64; 2]) -> f64 {
    let u: f64 = rng.random();
    lo + (hi - lo) * u
}

pub(crate) fn gaussian<R: Rng + ?Sized>(rng: &mut R, sd: f64) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    sd * z
}
