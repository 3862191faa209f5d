use std::f64::consts::PI;

use rustfft::{num_complex::Complex, FftPlanner};

use super::AudioClip;
use crate::error::{Error, Result};

pub const WINDOW_LENGTH: usize = 2048;
pub const HOP_LENGTH: usize = 1024;
pub const MEL_BANDS: usize = 40;
/// Floor applied before the natural log.
pub const LOG_FLOOR: f64 = 1e-10;
/// Per-band mean followed by per-band standard deviation.
pub const FEATURE_DIM: usize = 2 * MEL_BANDS;

pub fn mel_from_hz(f_hz: f64) -> f64 {
    2595.0 * (1.0 + f_hz / 700.0).log10()
}

fn hz_from_mel(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Triangular filters with unit peak, edges equally spaced in mel from 0 to Nyquist.
fn mel_filterbank(sample_rate_hz: f64) -> Vec<Vec<(usize, f64)>> {
    let n_bins = WINDOW_LENGTH / 2 + 1;
    let top = mel_from_hz(0.5 * sample_rate_hz);
    let edges: Vec<f64> = (0..MEL_BANDS + 2)
        .map(|i| hz_from_mel(top * i as f64 / (MEL_BANDS + 1) as f64))
        .collect();
    (0..MEL_BANDS)
        .map(|m| {
            let (lo, mid, hi) = (edges[m], edges[m + 1], edges[m + 2]);
            (0..n_bins)
                .filter_map(|k| {
                    let f = k as f64 * sample_rate_hz / WINDOW_LENGTH as f64;
                    let w = if f > lo && f <= mid {
                        (f - lo) / (mid - lo)
                    } else if f > mid && f < hi {
                        (hi - f) / (hi - mid)
                    } else {
                        0.0
                    };
                    (w > 0.0).then_some((k, w))
                })
                .collect()
        })
        .collect()
}

/// Log-mel magnitude spectrogram, one row of [`MEL_BANDS`] values per frame.
///
/// Frames: floor((N − 2048)/1024) + 1, periodic Hann window.
pub fn spectrogram(clip: &AudioClip) -> Result<Vec<Vec<f64>>> {
    clip.validate()?;
    let n = clip.samples.len();
    if n < WINDOW_LENGTH {
        return Err(Error::Domain(format!(
            "clip of {n} samples is shorter than one {WINDOW_LENGTH}-sample window"
        )));
    }
    let window: Vec<f64> = (0..WINDOW_LENGTH)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / WINDOW_LENGTH as f64).cos())
        .collect();
    let bank = mel_filterbank(clip.sample_rate_hz as f64);
    let fft = FftPlanner::new().plan_fft_forward(WINDOW_LENGTH);
    let mut buf = vec![Complex::new(0.0, 0.0); WINDOW_LENGTH];
    let mut scratch = vec![Complex::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let frames = (n - WINDOW_LENGTH) / HOP_LENGTH + 1;

    Ok((0..frames)
        .map(|f| {
            let start = f * HOP_LENGTH;
            for (b, (x, w)) in buf
                .iter_mut()
                .zip(clip.samples[start..start + WINDOW_LENGTH].iter().zip(&window))
            {
                *b = Complex::new(x * w, 0.0);
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            bank.iter()
                .map(|tri| {
                    let e: f64 = tri.iter().map(|&(k, w)| w * buf[k].norm()).sum();
                    e.max(LOG_FLOOR).ln()
                })
                .collect()
        })
        .collect())
}

/// Per-band mean and standard deviation of the log-mel spectrogram.
///
/// The clip is first scaled to unit RMS (silent clips are left alone), so
/// the features do not depend on recording gain.
pub fn features(clip: &AudioClip) -> Result<Vec<f64>> {
    let rms = clip.rms();
    let spec = if rms > 0.0 {
        spectrogram(&clip.scaled(1.0 / rms))?
    } else {
        spectrogram(clip)?
    };
    let frames = spec.len() as f64;
    let mut out = vec![0.0; FEATURE_DIM];
    for b in 0..MEL_BANDS {
        let mean = spec.iter().map(|row| row[b]).sum::<f64>() / frames;
        let var = spec.iter().map(|row| (row[b] - mean).powi(2)).sum::<f64>() / frames;
        out[b] = mean;
        out[MEL_BANDS + b] = var.sqrt();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(f: f64, n: usize) -> AudioClip {
        AudioClip::new(
            44_100,
            (0..n)
                .map(|i| 0.3 * (2.0 * PI * f * i as f64 / 44_100.0).sin())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn mel_of_one_khz() {
        assert!((mel_from_hz(1000.0) - 999.99).abs() < 0.01);
        assert!((hz_from_mel(mel_from_hz(3210.0)) - 3210.0).abs() < 1e-9);
    }

    #[test]
    fn frame_count_contract() {
        for n in [2048usize, 2049, 3071, 3072, 44_100] {
            let s = spectrogram(&AudioClip::new(44_100, vec![0.0; n]).unwrap()).unwrap();
            assert_eq!(s.len(), (n - 2048) / 1024 + 1);
            assert!(s.iter().all(|r| r.len() == MEL_BANDS));
        }
        assert!(spectrogram(&AudioClip::new(44_100, vec![0.0; 2047]).unwrap()).is_err());
    }

    #[test]
    fn silence_sits_on_the_floor() {
        let clip = AudioClip::new(44_100, vec![0.0; 8192]).unwrap();
        let s = spectrogram(&clip).unwrap();
        assert!(s.iter().flatten().all(|&v| v == LOG_FLOOR.ln()));
        let f = features(&clip).unwrap();
        assert!(f[..MEL_BANDS].iter().all(|&v| (v - LOG_FLOOR.ln()).abs() < 1e-12));
        assert!(f[MEL_BANDS..].iter().all(|&v| v.abs() < 1e-12));
    }

    #[test]
    fn tone_argmax_band_is_stationary() {
        let s = spectrogram(&tone(1000.0, 44_100)).unwrap();
        let argmax = |r: &Vec<f64>| r.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        let first = argmax(&s[0]);
        assert!(s.iter().all(|r| argmax(r) == first));
    }

    #[test]
    fn features_are_deterministic_and_gain_free() {
        let c = tone(700.0, 20_000);
        assert_eq!(features(&c).unwrap(), features(&c).unwrap());
        let a = features(&c).unwrap();
        let b = features(&c.scaled(1.7)).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-9);
        }
        assert_eq!(a.len(), FEATURE_DIM);
    }

    #[test]
    fn filterbank_covers_the_band() {
        let bank = mel_filterbank(44_100.0);
        assert_eq!(bank.len(), MEL_BANDS);
        assert!(bank.iter().all(|tri| !tri.is_empty()));
    }
}
