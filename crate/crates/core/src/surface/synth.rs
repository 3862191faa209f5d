use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_distr::{Distribution, Exp};

use rayon::prelude::*;

use super::{AudioClip, ClassTable, Energy, SurfaceClass, DEFAULT_SAMPLE_RATE_HZ};
use crate::error::{Error, Result};
use crate::noise::{gaussian, NoiseConfig};
use crate::SimRng;

/// Level of the broadband friction noise present in every swipe.
pub const FRICTION_NOISE_DBFS: f64 = -30.0;
/// Default length of a full swipe (s).
pub const SWIPE_DURATION_S: f64 = 1.0;

const SPEED_RANGE_M_PER_S: (f64, f64) = (0.05, 0.3);
const DURATION_RANGE_S: (f64, f64) = (0.2, 3.0);
/// Peak level of the harmonic series for amplitude 1.
const HARMONIC_LEVEL: f64 = 0.3;
const HARMONICS: usize = 4;
const LOW_ENERGY_HARMONIC_GAIN: f64 = 0.6;
const STICK_SLIP_RATE_HZ: f64 = 30.0;
const BURST_CARRIER_HZ: (f64, f64) = (2500.0, 3500.0);
const BURST_SIGMA_S: f64 = 1e-3;
const BURST_LEVEL: f64 = 0.2;

/// Synthesizes the contact-microphone signal of one swipe at constant speed.
///
/// Textured classes emit a fundamental at speed/wavelength plus three
/// harmonics with 1/k decay; low-energy surfaces lose 40% of that amplitude
/// and add Poisson stick-slip bursts around 3 kHz.
pub fn synth_swipe(cls: &SurfaceClass, speed_m_per_s: f64, duration_s: f64, rng_seed: u64) -> Result<AudioClip> {
    let mut rng = SimRng::seed_from_u64(rng_seed);
    render(cls, speed_m_per_s, duration_s, &mut rng)
}

/// Swipe with speed drawn from `noise` and white noise added at its audio SNR.
pub fn synth_swipe_noisy<R: RngCore>(
    cls: &SurfaceClass,
    duration_s: f64,
    noise: &NoiseConfig,
    rng: &mut R,
) -> Result<AudioClip> {
    noise.validate()?;
    let speed = noise.sample_speed(rng);
    let mut clip = render(cls, speed, duration_s, rng)?;
    if let Some(snr_db) = noise.audio_snr_db {
        let sd = clip.rms() * 10f64.powf(-snr_db / 20.0);
        for s in &mut clip.samples {
            *s += gaussian(rng, sd);
        }
    }
    Ok(clip)
}

/// `clips_per_class` noisy swipes per table class, class-major order; clip
/// `i` of class position `k` uses stream `k·clips_per_class + i` of `seed`.
pub fn synth_corpus(
    table: &ClassTable,
    clips_per_class: usize,
    duration_s: f64,
    noise: &NoiseConfig,
    seed: u64,
) -> Result<Vec<(AudioClip, u32)>> {
    let jobs: Vec<(usize, usize)> = (0..table.len())
        .flat_map(|k| (0..clips_per_class).map(move |i| (k, i)))
        .collect();
    jobs.par_iter()
        .map(|&(k, i)| {
            let cls = &table.classes()[k];
            let mut rng = SimRng::seed_from_u64(seed);
            rng.set_stream((k * clips_per_class + i) as u64);
            Ok((synth_swipe_noisy(cls, duration_s, noise, &mut rng)?, cls.class_id))
        })
        .collect()
}

fn render<R: RngCore + ?Sized>(cls: &SurfaceClass, speed: f64, duration_s: f64, rng: &mut R) -> Result<AudioClip> {
    if !(SPEED_RANGE_M_PER_S.0..=SPEED_RANGE_M_PER_S.1).contains(&speed) {
        return Err(Error::Domain(format!("swipe speed {speed} m/s outside [0.05, 0.3]")));
    }
    if !(DURATION_RANGE_S.0..=DURATION_RANGE_S.1).contains(&duration_s) {
        return Err(Error::Domain(format!("swipe duration {duration_s} s outside [0.2, 3]")));
    }
    cls.validate()?;
    let fs = DEFAULT_SAMPLE_RATE_HZ as f64;
    let n = (duration_s * fs).round() as usize;

    let floor = 10f64.powf(FRICTION_NOISE_DBFS / 20.0);
    let mut samples: Vec<f64> = (0..n).map(|_| gaussian(rng, floor)).collect();

    let low = cls.energy == Energy::Low;
    if let Some(wavelength) = cls.spatial_wavelength_m {
        let f0 = speed / wavelength;
        let gain = HARMONIC_LEVEL * cls.amplitude * if low { LOW_ENERGY_HARMONIC_GAIN } else { 1.0 };
        for k in 1..=HARMONICS {
            let f = f0 * k as f64;
            if f >= 0.5 * fs {
                break;
            }
            let amp = gain / k as f64;
            let phase = 2.0 * PI * rng.random::<f64>();
            // unit phasor stepped by rotation; renormalized to stop drift
            let step = Complex64::from_polar(1.0, 2.0 * PI * f / fs);
            let mut z = Complex64::from_polar(1.0, phase);
            for (i, s) in samples.iter_mut().enumerate() {
                *s += amp * z.im;
                z *= step;
                if i % 1024 == 1023 {
                    z /= z.norm();
                }
            }
        }
    }

    if low {
        let gap = Exp::new(STICK_SLIP_RATE_HZ).expect("positive rate");
        let mut t = gap.sample(rng);
        while t < duration_s {
            let carrier = rng.random_range(BURST_CARRIER_HZ.0..BURST_CARRIER_HZ.1);
            let phase = 2.0 * PI * rng.random::<f64>();
            add_burst(&mut samples, fs, t, carrier, phase);
            t += gap.sample(rng);
        }
    }

    for s in &mut samples {
        *s = s.clamp(-1.0, 1.0);
    }
    AudioClip::new(DEFAULT_SAMPLE_RATE_HZ, samples)
}

/// Gaussian-windowed tone burst centred at `t0`, truncated at ±4σ.
fn add_burst(samples: &mut [f64], fs: f64, t0: f64, carrier_hz: f64, phase: f64) {
    let half = (4.0 * BURST_SIGMA_S * fs).ceil() as isize;
    let centre = (t0 * fs).round() as isize;
    for i in (centre - half).max(0)..(centre + half).min(samples.len() as isize) {
        let dt = (i - centre) as f64 / fs;
        let env = (-0.5 * (dt / BURST_SIGMA_S).powi(2)).exp();
        samples[i as usize] += BURST_LEVEL * env * (2.0 * PI * carrier_hz * dt + phase).sin();
    }
}
