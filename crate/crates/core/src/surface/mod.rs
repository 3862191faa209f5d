//! Texture and surface-energy channel.
//!
//! Swipe audio is synthesized per class, notch-filtered, reduced to log-mel
//! statistics and classified with a one-vs-rest linear SVM. t-SNE is
//! provided for inspecting the feature space.

mod classifier;
mod filter;
mod spectral;
mod synth;
mod tsne;
mod wav;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use classifier::{
    classify, decision_values, train_classifier, train_classifier_with, vote, LinearSvm, TextureModel, TrainConfig,
};
pub use filter::{notch_filter, preprocess, Biquad, NOTCH_FREQUENCIES_HZ, NOTCH_Q};
pub use spectral::{features, mel_from_hz, spectrogram, FEATURE_DIM, HOP_LENGTH, LOG_FLOOR, MEL_BANDS, WINDOW_LENGTH};
pub use synth::{synth_corpus, synth_swipe, synth_swipe_noisy, FRICTION_NOISE_DBFS, SWIPE_DURATION_S};
pub use tsne::{cluster_purity, kmeans, tsne_embed, Embedding, TsneConfig};
pub use wav::{read_manifest, read_wav, write_manifest, write_wav, ManifestEntry};

pub const DEFAULT_SAMPLE_RATE_HZ: u32 = 44_100;
/// Lowest rate that still represents the 0–20 kHz swipe band.
pub const MIN_SAMPLE_RATE_HZ: u32 = 40_000;
/// Mesoscale texture band (m).
pub const WAVELENGTH_BAND_M: (f64, f64) = (2e-4, 1e-3);

/// Seven geometric steps across the mesoscale band, 2e-4·5^(j/6).
pub const TEXTURE_WAVELENGTHS_M: [f64; 7] = [
    2e-4,
    2.615_320_972_023_661_4e-4,
    3.419_951_893_353_394e-4,
    4.472_135_954_999_58e-4,
    5.848_035_476_425_733e-4,
    7.647_244_913_317_301e-4,
    1e-3,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Texture {
    Smooth,
    Velvet,
    SubtleGuide,
    Grippy,
    Rough,
}

impl Texture {
    pub const ALL: [Texture; 5] = [
        Texture::Smooth,
        Texture::Velvet,
        Texture::SubtleGuide,
        Texture::Grippy,
        Texture::Rough,
    ];

    /// Relative roughness used by the synthesizer.
    pub fn amplitude(self) -> f64 {
        match self {
            Texture::Smooth => 0.0,
            Texture::Velvet => 0.3,
            Texture::SubtleGuide => 0.5,
            Texture::Grippy => 0.7,
            Texture::Rough => 1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Texture::Smooth => "smooth",
            Texture::Velvet => "velvet",
            Texture::SubtleGuide => "subtle_guide",
            Texture::Grippy => "grippy",
            Texture::Rough => "rough",
        }
    }
}

impl fmt::Display for Texture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Texture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Texture::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::Domain(format!("unknown texture '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Energy {
    High,
    Low,
}

impl Energy {
    pub fn as_str(self) -> &'static str {
        match self {
            Energy::High => "high",
            Energy::Low => "low",
        }
    }
}

impl fmt::Display for Energy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Energy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "high" => Ok(Energy::High),
            "low" => Ok(Energy::Low),
            _ => Err(Error::Domain(format!("unknown energy '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceClass {
    pub class_id: u32,
    pub texture: Texture,
    pub energy: Energy,
    /// Texture period; `None` for smooth surfaces.
    pub spatial_wavelength_m: Option<f64>,
    pub amplitude: f64,
    /// Whether the class belongs to the ten physically demonstrated ones.
    #[serde(default = "yes")]
    pub demonstrated: bool,
}

fn yes() -> bool {
    true
}

impl SurfaceClass {
    pub fn new(class_id: u32, texture: Texture, energy: Energy, spatial_wavelength_m: Option<f64>) -> Result<Self> {
        let c = Self {
            class_id,
            texture,
            energy,
            spatial_wavelength_m,
            amplitude: texture.amplitude(),
            demonstrated: true,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.amplitude) {
            return Err(Error::Domain(format!(
                "class {}: amplitude outside [0, 1]",
                self.class_id
            )));
        }
        match (self.texture, self.spatial_wavelength_m) {
            (Texture::Smooth, Some(_)) => Err(Error::Domain(format!(
                "class {}: smooth surfaces have no wavelength",
                self.class_id
            ))),
            (Texture::Smooth, None) => Ok(()),
            (_, None) => Err(Error::Domain(format!(
                "class {}: textured class needs a wavelength",
                self.class_id
            ))),
            (_, Some(l)) if !(WAVELENGTH_BAND_M.0..=WAVELENGTH_BAND_M.1).contains(&l) => Err(Error::Domain(format!(
                "class {}: wavelength {l} m outside the mesoscale band",
                self.class_id
            ))),
            _ => Ok(()),
        }
    }
}

/// Ordered set of surface classes; position in the table is the channel symbol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<SurfaceClass>", into = "Vec<SurfaceClass>")]
pub struct ClassTable {
    classes: Vec<SurfaceClass>,
}

impl TryFrom<Vec<SurfaceClass>> for ClassTable {
    type Error = Error;

    fn try_from(classes: Vec<SurfaceClass>) -> Result<Self> {
        Self::new(classes)
    }
}

impl From<ClassTable> for Vec<SurfaceClass> {
    fn from(t: ClassTable) -> Self {
        t.classes
    }
}

impl Default for ClassTable {
    /// Sixteen slots: the ten demonstrated classes followed by six classes
    /// at the intermediate wavelengths, flagged as not demonstrated.
    fn default() -> Self {
        let mut classes = Self::demonstrated().classes;
        let extended = [(Texture::Velvet, 1), (Texture::SubtleGuide, 3), (Texture::Grippy, 5)];
        for (texture, j) in extended {
            for energy in [Energy::High, Energy::Low] {
                classes.push(SurfaceClass {
                    class_id: classes.len() as u32,
                    texture,
                    energy,
                    spatial_wavelength_m: Some(TEXTURE_WAVELENGTHS_M[j]),
                    amplitude: texture.amplitude(),
                    demonstrated: false,
                });
            }
        }
        Self { classes }
    }
}

impl ClassTable {
    pub fn new(classes: Vec<SurfaceClass>) -> Result<Self> {
        if classes.is_empty() {
            return Err(Error::domain("class table is empty"));
        }
        let mut seen = std::collections::HashSet::new();
        for c in &classes {
            c.validate()?;
            if !seen.insert(c.class_id) {
                return Err(Error::Domain(format!("duplicate class_id {}", c.class_id)));
            }
        }
        Ok(Self { classes })
    }

    /// Five textures × two surface energies, ids 0..10 ordered texture-major.
    pub fn demonstrated() -> Self {
        let wavelength = |t: Texture| match t {
            Texture::Smooth => None,
            Texture::Velvet => Some(TEXTURE_WAVELENGTHS_M[0]),
            Texture::SubtleGuide => Some(TEXTURE_WAVELENGTHS_M[2]),
            Texture::Grippy => Some(TEXTURE_WAVELENGTHS_M[4]),
            Texture::Rough => Some(TEXTURE_WAVELENGTHS_M[6]),
        };
        let mut classes = Vec::with_capacity(10);
        for texture in Texture::ALL {
            for energy in [Energy::High, Energy::Low] {
                classes.push(SurfaceClass {
                    class_id: classes.len() as u32,
                    texture,
                    energy,
                    spatial_wavelength_m: wavelength(texture),
                    amplitude: texture.amplitude(),
                    demonstrated: true,
                });
            }
        }
        Self { classes }
    }

    pub fn classes(&self) -> &[SurfaceClass] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn get(&self, class_id: u32) -> Option<&SurfaceClass> {
        self.classes.iter().find(|c| c.class_id == class_id)
    }

    pub fn position(&self, class_id: u32) -> Option<usize> {
        self.classes.iter().position(|c| c.class_id == class_id)
    }

    /// First `n` entries as a new table.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        Self::new(self.classes.iter().take(n).copied().collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    pub sample_rate_hz: u32,
    pub samples: Vec<f64>,
}

impl AudioClip {
    pub fn new(sample_rate_hz: u32, samples: Vec<f64>) -> Result<Self> {
        let clip = Self {
            sample_rate_hz,
            samples,
        };
        clip.validate()?;
        Ok(clip)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sample_rate_hz < MIN_SAMPLE_RATE_HZ {
            return Err(Error::Domain(format!(
                "sample rate {} Hz cannot represent 0-20 kHz",
                self.sample_rate_hz
            )));
        }
        if let Some(i) = self.samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::Domain(format!("sample {i} is not finite")));
        }
        Ok(())
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }

    pub fn rms(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        (self.samples.iter().map(|s| s * s).sum::<f64>() / self.samples.len() as f64).sqrt()
    }

    pub fn scaled(&self, gain: f64) -> Self {
        Self {
            sample_rate_hz: self.sample_rate_hz,
            samples: self.samples.iter().map(|s| s * gain).collect(),
        }
    }

    /// Samples `[start, start + len)` as a new clip.
    pub fn segment(&self, start: usize, len: usize) -> Self {
        Self {
            sample_rate_hz: self.sample_rate_hz,
            samples: self.samples[start..start + len].to_vec(),
        }
    }

    /// Consecutive non-overlapping windows of `window_s`; the remainder is dropped.
    pub fn windows(&self, window_s: f64) -> Vec<Self> {
        let len = (window_s * self.sample_rate_hz as f64).round() as usize;
        if len == 0 || len >= self.samples.len() {
            return vec![self.clone()];
        }
        (0..self.samples.len() / len)
            .map(|w| self.segment(w * len, len))
            .collect()
    }
}

/// Trains a model on a fresh synthetic corpus of `table` swipes, with each
/// clip also contributing its 0.2 s windows.
pub fn train_on_synthetic(
    table: &ClassTable,
    clips_per_class: usize,
    noise: &crate::noise::NoiseConfig,
    seed: u64,
) -> Result<TextureModel> {
    let corpus = synth_corpus(table, clips_per_class, SWIPE_DURATION_S, noise, seed)?;
    let cfg = TrainConfig {
        seed,
        augment_window_s: Some(0.2),
        ..Default::default()
    };
    train_classifier_with(table, &corpus, &cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demonstrated_table_has_ten_unique_classes() {
        let t = ClassTable::demonstrated();
        assert_eq!(t.len(), 10);
        assert!(t.classes().iter().all(|c| c.demonstrated));
        assert_eq!(t.get(0).unwrap().texture, Texture::Smooth);
        assert_eq!(t.get(9).unwrap().texture, Texture::Rough);
        assert_eq!(t.get(9).unwrap().energy, Energy::Low);
    }

    #[test]
    fn default_table_extends_to_sixteen() {
        let t = ClassTable::default();
        assert_eq!(t.len(), 16);
        assert_eq!(t.classes().iter().filter(|c| c.demonstrated).count(), 10);
        let mut wl: Vec<f64> = t.classes().iter().filter_map(|c| c.spatial_wavelength_m).collect();
        wl.sort_by(f64::total_cmp);
        wl.dedup();
        assert_eq!(wl.len(), 7);
    }

    #[test]
    fn table_rejects_duplicates_and_bad_wavelengths() {
        let mut classes = ClassTable::demonstrated().classes;
        classes[1].class_id = 0;
        assert!(ClassTable::new(classes).is_err());
        assert!(SurfaceClass::new(0, Texture::Rough, Energy::High, Some(2e-3)).is_err());
        assert!(SurfaceClass::new(0, Texture::Smooth, Energy::High, Some(5e-4)).is_err());
        assert!(SurfaceClass::new(0, Texture::Grippy, Energy::Low, None).is_err());
    }

    #[test]
    fn table_json_round_trip() {
        let t = ClassTable::default();
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(serde_json::from_str::<ClassTable>(&s).unwrap(), t);
        assert!(s.contains("subtle_guide"));
    }

    #[test]
    fn clip_validation_and_windows() {
        assert!(AudioClip::new(32_000, vec![0.0; 10]).is_err());
        assert!(AudioClip::new(44_100, vec![f64::NAN]).is_err());
        let c = AudioClip::new(44_100, vec![0.5; 44_100]).unwrap();
        assert_eq!(c.windows(0.2).len(), 5);
        assert_eq!(c.windows(2.0).len(), 1);
        assert!((c.rms() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn texture_and_energy_parse() {
        for t in Texture::ALL {
            assert_eq!(t.as_str().parse::<Texture>().unwrap(), t);
        }
        assert_eq!("low".parse::<Energy>().unwrap(), Energy::Low);
        assert!("wavy".parse::<Texture>().is_err());
    }
}
