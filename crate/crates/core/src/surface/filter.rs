use std::f64::consts::PI;

use super::AudioClip;
use crate::error::{Error, Result};
use crate::quantities::Complex;

/// Mains hum and sensor interference lines removed before feature extraction.
pub const NOTCH_FREQUENCIES_HZ: [f64; 4] = [60.0, 8000.0, 14000.0, 16000.0];
pub const NOTCH_Q: f64 = 10.0;

/// Second-order IIR section with a0 normalized to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 2],
}

impl Biquad {
    /// Notch from the RBJ audio-EQ cookbook: zeros on the unit circle at `f0`.
    pub fn notch(f0_hz: f64, q: f64, sample_rate_hz: f64) -> Result<Self> {
        if !(f0_hz > 0.0 && f0_hz < 0.5 * sample_rate_hz) {
            return Err(Error::Domain(format!(
                "notch frequency {f0_hz} Hz must lie in (0, {}) Hz",
                0.5 * sample_rate_hz
            )));
        }
        if !(q > 0.0) {
            return Err(Error::domain("notch Q must be > 0"));
        }
        let w0 = 2.0 * PI * f0_hz / sample_rate_hz;
        let alpha = w0.sin() / (2.0 * q);
        let a0 = 1.0 + alpha;
        let c = -2.0 * w0.cos();
        Ok(Self {
            b: [1.0 / a0, c / a0, 1.0 / a0],
            a: [c / a0, (1.0 - alpha) / a0],
        })
    }

    /// Magnitude response at `f_hz` (dB).
    pub fn gain_db(&self, f_hz: f64, sample_rate_hz: f64) -> f64 {
        let z1 = Complex::from_polar(1.0, -2.0 * PI * f_hz / sample_rate_hz);
        let z2 = z1 * z1;
        let num = self.b[0] + z1 * self.b[1] + z2 * self.b[2];
        let den = 1.0 + z1 * self.a[0] + z2 * self.a[1];
        20.0 * (num.norm() / den.norm()).log10()
    }

    /// Filters from rest (transposed direct form II).
    pub fn process(&self, input: &[f64]) -> Vec<f64> {
        let (mut s1, mut s2) = (0.0, 0.0);
        input
            .iter()
            .map(|&x| {
                let y = self.b[0] * x + s1;
                s1 = self.b[1] * x - self.a[0] * y + s2;
                s2 = self.b[2] * x - self.a[1] * y;
                y
            })
            .collect()
    }
}

pub fn notch_filter(clip: &AudioClip, f0_hz: f64, q: f64) -> Result<AudioClip> {
    let fs = clip.sample_rate_hz as f64;
    let bq = Biquad::notch(f0_hz, q, fs)?;
    Ok(AudioClip {
        sample_rate_hz: clip.sample_rate_hz,
        samples: bq.process(&clip.samples),
    })
}

/// The four interference notches in order, Q = 10 each.
pub fn preprocess(clip: &AudioClip) -> Result<AudioClip> {
    NOTCH_FREQUENCIES_HZ
        .iter()
        .try_fold(clip.clone(), |c, &f| notch_filter(&c, f, NOTCH_Q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const FS: u32 = 44_100;

    fn tone(f: f64, seconds: f64) -> AudioClip {
        let n = (seconds * FS as f64) as usize;
        let samples = (0..n)
            .map(|i| 0.5 * (2.0 * PI * f * i as f64 / FS as f64).sin())
            .collect();
        AudioClip::new(FS, samples).unwrap()
    }

    /// RMS ratio (dB) over the second half, after the filter transient.
    fn steady_gain_db(input: &AudioClip, output: &AudioClip) -> f64 {
        let half = input.samples.len() / 2;
        let rms = |s: &[f64]| (s.iter().map(|x| x * x).sum::<f64>() / s.len() as f64).sqrt();
        20.0 * (rms(&output.samples[half..]) / rms(&input.samples[half..])).log10()
    }

    #[test]
    fn rejects_each_interference_line() {
        for f in NOTCH_FREQUENCIES_HZ {
            let x = tone(f, 2.0);
            let y = notch_filter(&x, f, NOTCH_Q).unwrap();
            assert!(steady_gain_db(&x, &y) <= -30.0, "{f} Hz");
        }
    }

    #[test]
    fn eight_khz_example() {
        let x = tone(8000.0, 1.0);
        let y = notch_filter(&x, 8000.0, 10.0).unwrap();
        let half = x.samples.len() / 2;
        let rms = |s: &[f64]| (s.iter().map(|v| v * v).sum::<f64>() / s.len() as f64).sqrt();
        assert!(rms(&y.samples[half..]) <= 0.0316 * rms(&x.samples[half..]));
        assert_eq!(y.samples.len(), x.samples.len());
    }

    #[test]
    fn passes_tones_two_octaves_away() {
        for f in NOTCH_FREQUENCIES_HZ {
            for probe in [f / 4.0, f * 4.0] {
                if probe >= 0.5 * FS as f64 {
                    continue;
                }
                let x = tone(probe, 2.0);
                let y = notch_filter(&x, f, NOTCH_Q).unwrap();
                assert!(steady_gain_db(&x, &y).abs() <= 1.0, "notch {f}, probe {probe}");
            }
        }
        let x = tone(1000.0, 1.0);
        assert!(steady_gain_db(&x, &notch_filter(&x, 8000.0, 10.0).unwrap()).abs() <= 1.0);
    }

    #[test]
    fn unity_at_dc_and_near_nyquist() {
        let fs = FS as f64;
        for f in NOTCH_FREQUENCIES_HZ {
            let bq = Biquad::notch(f, NOTCH_Q, fs).unwrap();
            assert!(bq.gain_db(0.0, fs).abs() < 1e-9);
            assert!(bq.gain_db(fs / 2.2, fs).abs() <= 1.0);
            assert!(bq.gain_db(f, fs) <= -30.0);
        }
    }

    #[test]
    fn zeros_in_zeros_out_and_bad_frequency() {
        let z = AudioClip::new(FS, vec![0.0; 4096]).unwrap();
        assert!(preprocess(&z).unwrap().samples.iter().all(|&s| s == 0.0));
        assert!(notch_filter(&z, 22_050.0, 10.0).is_err());
        assert!(notch_filter(&z, 1000.0, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn preprocess_is_linear(seed in any::<u64>(), k in -3.0f64..3.0) {
            use rand::{Rng, SeedableRng};
            let mut rng = crate::SimRng::seed_from_u64(seed);
            let a: Vec<f64> = (0..2048).map(|_| rng.random_range(-1.0..1.0)).collect();
            let b: Vec<f64> = (0..2048).map(|_| rng.random_range(-1.0..1.0)).collect();
            let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + k * y).collect();
            let pa = preprocess(&AudioClip::new(FS, a).unwrap()).unwrap();
            let pb = preprocess(&AudioClip::new(FS, b).unwrap()).unwrap();
            let ps = preprocess(&AudioClip::new(FS, sum).unwrap()).unwrap();
            for i in 0..2048 {
                prop_assert!((ps.samples[i] - pa.samples[i] - k * pb.samples[i]).abs() < 1e-9);
            }
        }
    }
}
