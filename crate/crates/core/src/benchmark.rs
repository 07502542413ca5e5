//! Joint multimodal versus per-modality autoencoder compression.
//!
//! For every target compression ratio two schemes are trained on the same
//! seeded 80/20 split: `M-SAE` compresses the concatenation of all
//! modalities through a single bottleneck, `SM` trains one model per
//! modality. Both report per-modality PRD on the held-out records.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::sae::{self, init_sae, layer_sizes_for, pooled_prd, train_standardized, Activation, SaeError, TrainConfig};
use crate::signal::MultimodalSet;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub train: TrainConfig,
    pub activation: Activation,
    pub train_fraction: f64,
    /// Insert a geometric-mean hidden layer between input and code.
    pub hidden_layer: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            train: TrainConfig {
                learning_rate: 0.5,
                epochs: 100,
                batch_size: 8,
                ..TrainConfig::default()
            },
            activation: Activation::Tanh,
            train_fraction: 0.8,
            hidden_layer: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "M-SAE")]
    Joint,
    #[serde(rename = "SM")]
    Separate,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Joint => "M-SAE",
            Scheme::Separate => "SM",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub cr: usize,
    pub scheme: Scheme,
    pub modality: String,
    pub code_dim: usize,
    pub prd: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchTable {
    pub rows: Vec<BenchRow>,
    pub n_train: usize,
    pub n_test: usize,
}

impl BenchTable {
    pub fn prd(&self, cr: usize, scheme: Scheme, modality: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.cr == cr && r.scheme == scheme && r.modality == modality)
            .map(|r| r.prd)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("cr,scheme,modality,code_dim,prd\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{:.6}",
                r.cr,
                r.scheme.as_str(),
                r.modality,
                r.code_dim,
                r.prd
            );
        }
        out
    }
}

/// Ratios for which both the joint and every per-modality bottleneck are
/// whole numbers (excluding the trivial ratio 1).
pub fn achievable_ratios(modality_dim: usize, n_modalities: usize) -> Vec<usize> {
    (2..=modality_dim)
        .filter(|cr| modality_dim % cr == 0 && (modality_dim * n_modalities) % cr == 0)
        .collect()
}

/// Seeded train/test split of record indices.
pub fn split_indices(n: usize, train_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = ((n as f64 * train_fraction).round() as usize).clamp(1, n.saturating_sub(1).max(1));
    let test = idx.split_off(n_train);
    (idx, test)
}

fn fit_and_reconstruct(
    train: &[Vec<f64>],
    test: &[Vec<f64>],
    code_dim: usize,
    cfg: &BenchConfig,
) -> Result<Vec<Vec<f64>>, SaeError> {
    let sizes = if cfg.hidden_layer {
        layer_sizes_for(train[0].len(), code_dim)
    } else {
        vec![train[0].len(), code_dim]
    };
    let model = init_sae(&sizes, cfg.activation, cfg.train.seed, cfg.train.weight_init_scale)?;
    let (trained, _) = train_standardized(&model, train, &cfg.train)?;
    test.iter().map(|x| trained.reconstruct(x)).collect()
}

pub fn run_modality_benchmark(
    mm: &MultimodalSet,
    cr_list: &[usize],
    cfg: &BenchConfig,
) -> Result<BenchTable, SaeError> {
    cfg.train.validate()?;
    let mods = mm.modalities();
    if mods.len() != 2 {
        return Err(SaeError::InvalidConfig(format!(
            "expected two modalities, found {}",
            mods.len()
        )));
    }
    let dim = mm.record_len();
    let n = mm.n_records();
    if n < 2 {
        return Err(SaeError::InvalidConfig("need at least two records to split".into()));
    }
    let achievable = achievable_ratios(dim, mods.len());
    if let Some(&cr) = cr_list.iter().find(|cr| !achievable.contains(cr)) {
        return Err(SaeError::UnachievableRatio { cr, achievable });
    }
    let (train_idx, test_idx) = split_indices(n, cfg.train_fraction, cfg.train.seed);
    let pick = |data: &[Vec<f64>], idx: &[usize]| -> Vec<Vec<f64>> { idx.iter().map(|&i| data[i].clone()).collect() };
    let joint = |idx: &[usize]| -> Vec<Vec<f64>> {
        idx.iter()
            .map(|&i| mods.iter().flat_map(|m| m.data[i].iter().copied()).collect())
            .collect()
    };
    let joint_train = joint(&train_idx);
    let joint_test = joint(&test_idx);

    let mut rows = Vec::new();
    for &cr in cr_list {
        let total = dim * mods.len();
        let recon = fit_and_reconstruct(&joint_train, &joint_test, total / cr, cfg)?;
        for (k, m) in mods.iter().enumerate() {
            let truth = pick(&m.data, &test_idx);
            let part: Vec<Vec<f64>> = recon.iter().map(|r| r[k * dim..(k + 1) * dim].to_vec()).collect();
            rows.push(BenchRow {
                cr,
                scheme: Scheme::Joint,
                modality: m.name.clone(),
                code_dim: total / cr,
                prd: pooled_prd(&truth, &part)?,
            });
        }
        for m in mods {
            let train = pick(&m.data, &train_idx);
            let test = pick(&m.data, &test_idx);
            let recon = fit_and_reconstruct(&train, &test, dim / cr, cfg)?;
            rows.push(BenchRow {
                cr,
                scheme: Scheme::Separate,
                modality: m.name.clone(),
                code_dim: dim / cr,
                prd: sae::pooled_prd(&test, &recon)?,
            });
        }
    }
    Ok(BenchTable {
        rows,
        n_train: train_idx.len(),
        n_test: test_idx.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::gen_synthetic_multimodal;

    #[test]
    fn achievable_ratio_listing() {
        assert_eq!(achievable_ratios(12, 2), vec![2, 3, 4, 6, 12]);
    }

    #[test]
    fn unachievable_ratio_lists_alternatives() {
        let mm = gen_synthetic_multimodal(10, 16, 0.5, 0.1, 1).unwrap();
        let err = run_modality_benchmark(&mm, &[3], &BenchConfig::default()).unwrap_err();
        assert_eq!(
            err,
            SaeError::UnachievableRatio {
                cr: 3,
                achievable: vec![2, 4, 8, 16]
            }
        );
    }

    #[test]
    fn split_is_seeded_partition() {
        let (a, b) = split_indices(50, 0.8, 3);
        assert_eq!((a.len(), b.len()), (40, 10));
        let mut all: Vec<usize> = a.iter().chain(&b).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..50).collect::<Vec<_>>());
        assert_eq!(split_indices(50, 0.8, 3), (a, b));
    }
}
