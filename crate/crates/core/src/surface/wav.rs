use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AudioClip, Energy, Texture};
use crate::error::{Error, Result};

/// Reads a mono 16-bit PCM WAV file into [-1, 1) samples.
pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioClip> {
    let mut reader = hound::WavReader::open(path)?;
    let spec = reader.spec();
    if spec.channels != 1 || spec.bits_per_sample != 16 || spec.sample_format != hound::SampleFormat::Int {
        return Err(Error::Domain(format!(
            "expected mono 16-bit PCM, got {} channel(s) of {}-bit {:?}",
            spec.channels, spec.bits_per_sample, spec.sample_format
        )));
    }
    let samples = reader
        .samples::<i16>()
        .map(|s| s.map(|v| v as f64 / 32_768.0))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    AudioClip::new(spec.sample_rate, samples)
}

/// Writes a clip as mono 16-bit PCM, clipping to full scale.
pub fn write_wav(path: impl AsRef<Path>, clip: &AudioClip) -> Result<()> {
    clip.validate()?;
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: clip.sample_rate_hz,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::create(path, spec)?;
    for s in &clip.samples {
        writer.write_sample((s.clamp(-1.0, 1.0) * 32_767.0).round() as i16)?;
    }
    writer.finalize()?;
    Ok(())
}

/// One row of a corpus manifest (`path,class_id,texture,energy`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub class_id: u32,
    pub texture: Texture,
    pub energy: Energy,
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>> {
    let mut reader = csv::Reader::from_path(path)?;
    reader.deserialize().map(|row| row.map_err(Error::csv_at)).collect()
}

pub fn write_manifest(path: impl AsRef<Path>, entries: &[ManifestEntry]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    for e in entries {
        writer.serialize(e)?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wav_round_trip_within_quantization() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.wav");
        let clip = AudioClip::new(44_100, (0..1000).map(|i| ((i as f64) * 0.01).sin() * 0.9).collect()).unwrap();
        write_wav(&path, &clip).unwrap();
        let back = read_wav(&path).unwrap();
        assert_eq!(back.sample_rate_hz, 44_100);
        assert_eq!(back.samples.len(), 1000);
        for (a, b) in clip.samples.iter().zip(&back.samples) {
            assert!((a - b).abs() < 1e-4);
        }
    }

    #[test]
    fn manifest_round_trip_and_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let entries = vec![
            ManifestEntry {
                path: "a.wav".into(),
                class_id: 4,
                texture: Texture::SubtleGuide,
                energy: Energy::High,
            },
            ManifestEntry {
                path: "b.wav".into(),
                class_id: 9,
                texture: Texture::Rough,
                energy: Energy::Low,
            },
        ];
        write_manifest(&path, &entries).unwrap();
        assert_eq!(read_manifest(&path).unwrap(), entries);
        assert!(std::fs::read_to_string(&path)
            .unwrap()
            .starts_with("path,class_id,texture,energy"));

        std::fs::write(
            &path,
            "path,class_id,texture,energy\na.wav,1,smooth,low\nb.wav,x,rough,high\n",
        )
        .unwrap();
        match read_manifest(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }
}
