use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::gaussian;
use crate::SimRng;

const EXAGGERATION: f64 = 12.0;
const EXAGGERATION_ITERS: usize = 250;
const MOMENTUM: (f64, f64) = (0.5, 0.8);
const MIN_GAIN: f64 = 0.01;
const INIT_SD: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TsneConfig {
    pub perplexity: f64,
    pub learning_rate: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for TsneConfig {
    fn default() -> Self {
        Self {
            perplexity: 10.0,
            learning_rate: 200.0,
            iterations: 1000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    pub points: Vec<[f64; 2]>,
    /// KL(P‖Q) after every iteration, measured against the unexaggerated P.
    pub kl_history: Vec<f64>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

/// Row of conditional probabilities p(j|i) whose entropy matches ln(perplexity).
fn conditional_row(d: &[f64], i: usize, perplexity: f64) -> Vec<f64> {
    let target = perplexity.ln();
    let (mut beta, mut lo, mut hi) = (1.0, 0.0, f64::INFINITY);
    let mut p = vec![0.0; d.len()];
    // distances relative to the nearest neighbour keep exp() in range
    let d_min = d
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, &v)| v)
        .fold(f64::INFINITY, f64::min);
    for _ in 0..100 {
        let mut sum = 0.0;
        let mut weighted = 0.0;
        for (j, (pj, &dj)) in p.iter_mut().zip(d).enumerate() {
            *pj = if j == i { 0.0 } else { (-(dj - d_min) * beta).exp() };
            sum += *pj;
            weighted += (dj - d_min) * *pj;
        }
        let entropy = sum.ln() + beta * weighted / sum;
        for pj in p.iter_mut() {
            *pj /= sum;
        }
        let diff = entropy - target;
        if diff.abs() < 1e-5 {
            break;
        }
        if diff > 0.0 {
            lo = beta;
            beta = if hi.is_finite() { 0.5 * (beta + hi) } else { 2.0 * beta };
        } else {
            hi = beta;
            beta = 0.5 * (beta + lo);
        }
    }
    p
}

/// Exact t-SNE into two dimensions.
pub fn tsne_embed(features: &[Vec<f64>], cfg: &TsneConfig) -> Result<Embedding> {
    let n = features.len();
    if !(cfg.perplexity > 0.0 && cfg.learning_rate > 0.0) {
        return Err(Error::domain("perplexity and learning rate must be > 0"));
    }
    if (n as f64) < 3.0 * cfg.perplexity {
        return Err(Error::Domain(format!(
            "t-SNE needs >= 3·perplexity = {} points, got {n}",
            3.0 * cfg.perplexity
        )));
    }
    let dim = features[0].len();
    if features
        .iter()
        .any(|f| f.len() != dim || f.iter().any(|v| !v.is_finite()))
    {
        return Err(Error::domain("t-SNE inputs must be finite and of equal length"));
    }

    let mut p = vec![0.0; n * n];
    for i in 0..n {
        let d: Vec<f64> = features.iter().map(|f| sq_dist(&features[i], f)).collect();
        p[i * n..(i + 1) * n].copy_from_slice(&conditional_row(&d, i, cfg.perplexity));
    }
    for i in 0..n {
        for j in 0..i {
            let s = ((p[i * n + j] + p[j * n + i]) / (2.0 * n as f64)).max(1e-12);
            p[i * n + j] = s;
            p[j * n + i] = s;
        }
        p[i * n + i] = 0.0;
    }

    let mut rng = SimRng::seed_from_u64(cfg.seed);
    let mut y: Vec<[f64; 2]> = (0..n)
        .map(|_| [gaussian(&mut rng, INIT_SD), gaussian(&mut rng, INIT_SD)])
        .collect();
    let mut update = vec![[0.0; 2]; n];
    let mut gains = vec![[1.0f64; 2]; n];
    let mut num = vec![0.0; n * n];
    let mut kl_history = Vec::with_capacity(cfg.iterations);

    for it in 0..cfg.iterations {
        let exaggeration = if it < EXAGGERATION_ITERS { EXAGGERATION } else { 1.0 };
        let momentum = if it < EXAGGERATION_ITERS {
            MOMENTUM.0
        } else {
            MOMENTUM.1
        };

        let mut z = 0.0;
        for i in 0..n {
            for j in 0..n {
                let v = if i == j {
                    0.0
                } else {
                    1.0 / (1.0 + sq_dist(&y[i], &y[j]))
                };
                num[i * n + j] = v;
                z += v;
            }
        }

        let mut kl = 0.0;
        for i in 0..n {
            let mut grad = [0.0; 2];
            for j in 0..n {
                if i == j {
                    continue;
                }
                let pij = p[i * n + j];
                let qij = (num[i * n + j] / z).max(1e-12);
                kl += pij * (pij / qij).ln();
                let m = 4.0 * (exaggeration * pij - qij) * num[i * n + j];
                grad[0] += m * (y[i][0] - y[j][0]);
                grad[1] += m * (y[i][1] - y[j][1]);
            }
            for d in 0..2 {
                gains[i][d] = if (grad[d] > 0.0) != (update[i][d] > 0.0) {
                    gains[i][d] + 0.2
                } else {
                    (gains[i][d] * 0.8).max(MIN_GAIN)
                };
                update[i][d] = momentum * update[i][d] - cfg.learning_rate * gains[i][d] * grad[d];
            }
        }
        kl_history.push(kl);

        for (yi, ui) in y.iter_mut().zip(&update) {
            yi[0] += ui[0];
            yi[1] += ui[1];
        }
        let centre = y
            .iter()
            .fold([0.0; 2], |c, v| [c[0] + v[0] / n as f64, c[1] + v[1] / n as f64]);
        for yi in &mut y {
            yi[0] -= centre[0];
            yi[1] -= centre[1];
        }
    }
    Ok(Embedding { points: y, kl_history })
}

/// Lloyd's k-means with k-means++ seeding; returns a cluster index per point.
pub fn kmeans(points: &[[f64; 2]], k: usize, seed: u64) -> Result<Vec<usize>> {
    if k == 0 || points.len() < k {
        return Err(Error::Domain(format!(
            "k-means needs 1 <= k <= {} points",
            points.len()
        )));
    }
    let mut rng = SimRng::seed_from_u64(seed);
    let mut centres = vec![points[rng.random_range(0..points.len())]];
    while centres.len() < k {
        let d: Vec<f64> = points
            .iter()
            .map(|p| centres.iter().map(|c| sq_dist(p, c)).fold(f64::INFINITY, f64::min))
            .collect();
        let total: f64 = d.iter().sum();
        let mut r = rng.random::<f64>() * total;
        let mut pick = points.len() - 1;
        for (i, di) in d.iter().enumerate() {
            if r < *di {
                pick = i;
                break;
            }
            r -= di;
        }
        centres.push(points[pick]);
    }
    let mut assign = vec![usize::MAX; points.len()];
    for _ in 0..300 {
        let next: Vec<usize> = points
            .iter()
            .map(|p| {
                (0..k)
                    .min_by(|&a, &b| sq_dist(p, &centres[a]).total_cmp(&sq_dist(p, &centres[b])))
                    .expect("k >= 1")
            })
            .collect();
        if next == assign {
            break;
        }
        assign = next;
        for (c, centre) in centres.iter_mut().enumerate() {
            let members: Vec<&[f64; 2]> = points
                .iter()
                .zip(&assign)
                .filter(|(_, &a)| a == c)
                .map(|(p, _)| p)
                .collect();
            if !members.is_empty() {
                let m = members.len() as f64;
                *centre = members.iter().fold([0.0; 2], |s, p| [s[0] + p[0] / m, s[1] + p[1] / m]);
            }
        }
    }
    Ok(assign)
}

/// Fraction of points whose label is the majority label of their cluster.
pub fn cluster_purity(assign: &[usize], labels: &[usize]) -> f64 {
    use std::collections::HashMap;
    let mut table: HashMap<usize, HashMap<usize, usize>> = HashMap::new();
    for (&a, &l) in assign.iter().zip(labels) {
        *table.entry(a).or_default().entry(l).or_default() += 1;
    }
    let hits: usize = table.values().map(|m| m.values().copied().max().unwrap_or(0)).sum();
    hits as f64 / assign.len().max(1) as f64
}
