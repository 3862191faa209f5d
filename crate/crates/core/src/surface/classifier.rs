use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{features, preprocess, AudioClip, ClassTable, FEATURE_DIM};
use crate::error::{Error, Result};
use crate::SimRng;

/// Shortest window the classifier will score (s).
const MIN_WINDOW_S: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Hinge-loss weight C.
    pub c: f64,
    /// Stop when every projected dual gradient is below this.
    pub tolerance: f64,
    pub max_epochs: usize,
    pub seed: u64,
    /// Also train on the non-overlapping windows of this length cut from each clip.
    pub augment_window_s: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            tolerance: 1e-4,
            max_epochs: 10_000,
            seed: 0,
            augment_window_s: None,
        }
    }
}

/// One-vs-rest hyperplane for a single class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvm {
    pub class_id: u32,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub epochs: usize,
    pub converged: bool,
}

impl LinearSvm {
    pub fn decision(&self, z: &[f64]) -> f64 {
        dot(&self.weights, z) + self.bias
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextureModel {
    pub table: ClassTable,
    pub feature_mean: Vec<f64>,
    pub feature_scale: Vec<f64>,
    pub svms: Vec<LinearSvm>,
}

impl TextureModel {
    pub fn validate(&self) -> Result<()> {
        let dims_ok = self.feature_mean.len() == FEATURE_DIM
            && self.feature_scale.len() == FEATURE_DIM
            && self.svms.iter().all(|s| s.weights.len() == FEATURE_DIM);
        if !dims_ok {
            return Err(Error::Config(format!(
                "texture model must be {FEATURE_DIM}-dimensional"
            )));
        }
        if self.svms.len() != self.table.len()
            || self
                .svms
                .iter()
                .zip(self.table.classes())
                .any(|(s, c)| s.class_id != c.class_id)
        {
            return Err(Error::Config(
                "texture model needs one hyperplane per table class".into(),
            ));
        }
        Ok(())
    }

    pub fn normalize(&self, raw: &[f64]) -> Vec<f64> {
        raw.iter()
            .zip(self.feature_mean.iter().zip(&self.feature_scale))
            .map(|(x, (m, s))| (x - m) / s)
            .collect()
    }

    pub fn class_ids(&self) -> Vec<u32> {
        self.svms.iter().map(|s| s.class_id).collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn clip_features(clip: &AudioClip) -> Result<Vec<f64>> {
    features(&preprocess(clip)?)
}

pub fn train_classifier(table: &ClassTable, corpus: &[(AudioClip, u32)]) -> Result<TextureModel> {
    train_classifier_with(table, corpus, &TrainConfig::default())
}

/// Fits one L2-regularized hinge-loss SVM per class by dual coordinate
/// descent, with the bias folded in as a constant feature.
///
/// The model's table keeps only the classes present in the corpus, in table order.
pub fn train_classifier_with(
    table: &ClassTable,
    corpus: &[(AudioClip, u32)],
    cfg: &TrainConfig,
) -> Result<TextureModel> {
    if !(cfg.c > 0.0 && cfg.tolerance > 0.0 && cfg.max_epochs > 0) {
        return Err(Error::Training("C, tolerance and max_epochs must be positive".into()));
    }
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for (_, id) in corpus {
        if table.get(*id).is_none() {
            return Err(Error::Training(format!("class {id} is not in the class table")));
        }
        *counts.entry(*id).or_default() += 1;
    }
    if counts.len() < 2 {
        return Err(Error::Training(format!(
            "need >= 2 classes, corpus has {}",
            counts.len()
        )));
    }
    if let Some((id, n)) = counts.iter().find(|(_, &n)| n < 4) {
        return Err(Error::Training(format!("class {id} has {n} examples, need >= 4")));
    }
    let present = ClassTable::new(
        table
            .classes()
            .iter()
            .filter(|c| counts.contains_key(&c.class_id))
            .copied()
            .collect(),
    )?;

    let examples: Vec<(AudioClip, u32)> = match cfg.augment_window_s {
        Some(w) => corpus
            .iter()
            .flat_map(|(clip, id)| {
                let mut v = vec![(clip.clone(), *id)];
                let parts = clip.windows(w);
                if parts.len() > 1 {
                    v.extend(parts.into_iter().map(|p| (p, *id)));
                }
                v
            })
            .collect(),
        None => corpus.to_vec(),
    };
    let raw: Vec<Vec<f64>> = examples
        .par_iter()
        .map(|(clip, _)| clip_features(clip))
        .collect::<Result<_>>()
        .map_err(|e| Error::Training(format!("feature extraction failed: {e}")))?;
    let labels: Vec<u32> = examples.iter().map(|(_, id)| *id).collect();

    let n = raw.len() as f64;
    let mut mean = vec![0.0; FEATURE_DIM];
    for x in &raw {
        for (m, v) in mean.iter_mut().zip(x) {
            *m += v / n;
        }
    }
    let mut scale = vec![0.0; FEATURE_DIM];
    for x in &raw {
        for ((s, v), m) in scale.iter_mut().zip(x).zip(&mean) {
            *s += (v - m).powi(2) / n;
        }
    }
    for s in &mut scale {
        *s = if *s > 0.0 { s.sqrt() } else { 1.0 };
    }
    let z: Vec<Vec<f64>> = raw
        .iter()
        .map(|x| {
            x.iter()
                .zip(mean.iter().zip(&scale))
                .map(|(v, (m, s))| (v - m) / s)
                .collect()
        })
        .collect();

    let svms = present
        .classes()
        .par_iter()
        .enumerate()
        .map(|(k, cls)| {
            let y: Vec<f64> = labels
                .iter()
                .map(|&l| if l == cls.class_id { 1.0 } else { -1.0 })
                .collect();
            let mut rng = SimRng::seed_from_u64(cfg.seed);
            rng.set_stream(k as u64);
            let svm = dual_cd(&z, &y, cfg, &mut rng);
            if !svm.converged {
                log::warn!(
                    "class {} SVM stopped at {} epochs without converging",
                    cls.class_id,
                    svm.epochs
                );
            }
            LinearSvm {
                class_id: cls.class_id,
                ..svm
            }
        })
        .collect();

    Ok(TextureModel {
        table: present,
        feature_mean: mean,
        feature_scale: scale,
        svms,
    })
}

fn dual_cd(x: &[Vec<f64>], y: &[f64], cfg: &TrainConfig, rng: &mut SimRng) -> LinearSvm {
    let dim = x[0].len();
    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let mut alpha = vec![0.0; x.len()];
    let q: Vec<f64> = x.iter().map(|xi| dot(xi, xi) + 1.0).collect();
    let mut order: Vec<usize> = (0..x.len()).collect();
    let mut converged = false;
    let mut epochs = 0;

    while epochs < cfg.max_epochs {
        epochs += 1;
        order.shuffle(rng);
        let mut worst: f64 = 0.0;
        for &i in &order {
            let g = y[i] * (dot(&w, &x[i]) + b) - 1.0;
            let pg = if alpha[i] <= 0.0 {
                g.min(0.0)
            } else if alpha[i] >= cfg.c {
                g.max(0.0)
            } else {
                g
            };
            worst = worst.max(pg.abs());
            if pg != 0.0 {
                let next = (alpha[i] - g / q[i]).clamp(0.0, cfg.c);
                let step = (next - alpha[i]) * y[i];
                alpha[i] = next;
                for (wj, xj) in w.iter_mut().zip(&x[i]) {
                    *wj += step * xj;
                }
                b += step;
            }
        }
        if worst < cfg.tolerance {
            converged = true;
            break;
        }
    }
    LinearSvm {
        class_id: 0,
        weights: w,
        bias: b,
        epochs,
        converged,
    }
}

/// Decision value of every class hyperplane for one clip, in model order.
pub fn decision_values(model: &TextureModel, clip: &AudioClip) -> Result<Vec<f64>> {
    let z = model.normalize(&clip_features(clip)?);
    Ok(model.svms.iter().map(|s| s.decision(&z)).collect())
}

/// Majority vote over per-window argmax decisions.
///
/// Ties go to the larger summed decision value, then the lowest class id.
pub fn vote(rows: &[Vec<f64>], class_ids: &[u32]) -> Result<u32> {
    if rows.is_empty() || class_ids.is_empty() || rows.iter().any(|r| r.len() != class_ids.len()) {
        return Err(Error::domain("vote needs >= 1 row with one value per class"));
    }
    let mut votes = vec![0usize; class_ids.len()];
    let mut sums = vec![0.0; class_ids.len()];
    for row in rows {
        let best = (0..row.len())
            .max_by(|&a, &b| row[a].total_cmp(&row[b]).then(class_ids[b].cmp(&class_ids[a])))
            .expect("non-empty row");
        votes[best] += 1;
        for (s, v) in sums.iter_mut().zip(row) {
            *s += v;
        }
    }
    let winner = (0..class_ids.len())
        .max_by(|&a, &b| {
            votes[a]
                .cmp(&votes[b])
                .then(sums[a].total_cmp(&sums[b]))
                .then(class_ids[b].cmp(&class_ids[a]))
        })
        .expect("non-empty class list");
    Ok(class_ids[winner])
}

/// Classifies `clip` by voting over non-overlapping windows of `window_s`;
/// a window at least as long as the clip scores the clip whole.
pub fn classify(model: &TextureModel, clip: &AudioClip, window_s: f64) -> Result<u32> {
    if !(window_s >= MIN_WINDOW_S - 1e-12) {
        return Err(Error::Domain(format!("window must be >= 0.2 s, got {window_s}")));
    }
    clip.validate()?;
    let windows = clip.windows(window_s);
    let rows: Vec<Vec<f64>> = windows
        .iter()
        .map(|w| decision_values(model, w))
        .collect::<Result<_>>()?;
    vote(&rows, &model.class_ids())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{synth_swipe, ClassTable};

    #[test]
    fn vote_majority_then_sum_then_lowest_id() {
        let ids = [3, 5, 7];
        let rows = vec![vec![1.0, 0.0, 0.0], vec![0.0, 2.0, 0.0], vec![0.9, 0.0, 0.0]];
        assert_eq!(vote(&rows, &ids).unwrap(), 3);
        // one vote each; class 5 has the larger summed decision value
        let rows = vec![vec![1.0, 0.0, -1.0], vec![0.0, 2.0, -1.0]];
        assert_eq!(vote(&rows, &ids).unwrap(), 5);
        // identical rows with tied top values → lowest id
        let rows = vec![vec![0.5, 0.5, 0.1], vec![0.5, 0.5, 0.1]];
        assert_eq!(vote(&rows, &ids).unwrap(), 3);
        assert!(vote(&[], &ids).is_err());
    }

    #[test]
    fn vote_ignores_row_order() {
        let ids = [0, 1, 2, 3];
        let rows = vec![
            vec![0.1, 0.9, 0.0, 0.2],
            vec![0.8, 0.1, 0.0, 0.2],
            vec![0.0, 0.7, 0.3, 0.2],
            vec![0.0, 0.0, 0.3, 0.9],
        ];
        let expected = vote(&rows, &ids).unwrap();
        let mut r = rows.clone();
        r.reverse();
        assert_eq!(vote(&r, &ids).unwrap(), expected);
        r.swap(0, 2);
        assert_eq!(vote(&r, &ids).unwrap(), expected);
    }

    #[test]
    fn separable_pair_trains_to_full_accuracy() {
        let table = ClassTable::demonstrated();
        let (smooth, rough) = (*table.get(0).unwrap(), *table.get(8).unwrap());
        let corpus: Vec<(AudioClip, u32)> = (0..6)
            .flat_map(|s| {
                [
                    (synth_swipe(&smooth, 0.2, 0.5, s).unwrap(), 0),
                    (synth_swipe(&rough, 0.2, 0.5, 100 + s).unwrap(), 8),
                ]
            })
            .collect();
        let model = train_classifier(&table, &corpus).unwrap();
        model.validate().unwrap();
        assert_eq!(model.table.len(), 2);
        assert!(model.svms.iter().all(|s| s.converged));
        for (clip, id) in &corpus {
            assert_eq!(classify(&model, clip, 10.0).unwrap(), *id);
        }
    }

    #[test]
    fn degenerate_corpora_are_rejected() {
        let table = ClassTable::demonstrated();
        let cls = *table.get(2).unwrap();
        let clip = synth_swipe(&cls, 0.2, 0.2, 0).unwrap();
        let one_class: Vec<_> = (0..5).map(|_| (clip.clone(), 2)).collect();
        assert!(matches!(train_classifier(&table, &one_class), Err(Error::Training(_))));
        let mut thin = one_class.clone();
        thin.push((clip.clone(), 3));
        assert!(matches!(train_classifier(&table, &thin), Err(Error::Training(_))));
        let unknown: Vec<_> = (0..4).map(|_| (clip.clone(), 99)).collect();
        assert!(matches!(train_classifier(&table, &unknown), Err(Error::Training(_))));
    }
}
