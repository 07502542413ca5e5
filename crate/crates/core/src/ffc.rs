//! Frequency-feature threshold classifier and its evaluation harness.
//!
//! Each of the five features is min-max scaled with bounds learned on the
//! training data and clamped to `[0, 1]`; the score is their mean. A record
//! is `Normal` when `score <= gamma` and `Seizure` otherwise.
//!
//! Cross-validation is stratified and seeded. Two learned baselines
//! (nearest-neighbour and Gaussian naive Bayes) run through the same folds.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::signal::Label;
use crate::spectral::FeatureVector;

pub const DEFAULT_GRID_STEP: f64 = 0.01;

#[derive(Debug, Error, PartialEq)]
pub enum FfcError {
    #[error("no feature vectors to fit")]
    Empty,
    #[error("training data contains a single class")]
    SingleClass,
    #[error("record {0} has no class label")]
    Unlabeled(usize),
    #[error("class {class} has {count} members, fewer than the {k} folds")]
    TooFewMembers { class: Status, count: usize, k: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, FfcError>;

/// Classifier output. `Seizure` is the positive class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Normal,
    Seizure,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Normal => 0,
            Status::Seizure => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Status::Normal),
            1 => Some(Status::Seizure),
            _ => None,
        }
    }

    pub fn from_label(label: Label) -> Option<Self> {
        match label {
            Label::Normal => Some(Status::Normal),
            Label::Seizure => Some(Status::Seizure),
            Label::Unlabeled => None,
        }
    }

    pub fn label(self) -> Label {
        match self {
            Status::Normal => Label::Normal,
            Status::Seizure => Label::Seizure,
        }
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label().as_str())
    }
}

/// Per-feature `(min, max)` learned from training data, in
/// `[mu, med, peak, rms, energy]` order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizationBounds {
    pub min: [f64; 5],
    pub max: [f64; 5],
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizedFeatures {
    pub values: [f64; 5],
    pub score: f64,
}

impl NormalizedFeatures {
    /// Builds from already-scaled values; the score is their mean.
    pub fn from_values(values: [f64; 5]) -> Self {
        Self {
            values,
            score: values.iter().sum::<f64>() / 5.0,
        }
    }

    /// A vector whose five values all equal `score`.
    pub fn with_score(score: f64) -> Self {
        Self::from_values([score; 5])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FfcModel {
    pub gamma: f64,
    pub bounds: NormalizationBounds,
}

impl FfcModel {
    pub fn new(gamma: f64, bounds: NormalizationBounds) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(FfcError::InvalidParameter(format!("gamma {gamma} outside [0, 1]")));
        }
        for i in 0..5 {
            if !(bounds.max[i] >= bounds.min[i]) {
                return Err(FfcError::InvalidParameter(format!(
                    "bound for {} has max < min",
                    FeatureVector::NAMES[i]
                )));
            }
        }
        Ok(Self { gamma, bounds })
    }

    pub fn predict(&self, fv: &FeatureVector) -> (NormalizedFeatures, Status) {
        let nf = normalize(fv, &self.bounds);
        let status = classify(&nf, self);
        (nf, status)
    }
}

pub fn fit_bounds(features: &[FeatureVector]) -> Result<NormalizationBounds> {
    let first = features.first().ok_or(FfcError::Empty)?.to_array();
    let mut bounds = NormalizationBounds { min: first, max: first };
    for fv in &features[1..] {
        for (i, v) in fv.to_array().into_iter().enumerate() {
            bounds.min[i] = bounds.min[i].min(v);
            bounds.max[i] = bounds.max[i].max(v);
        }
    }
    Ok(bounds)
}

pub fn normalize(fv: &FeatureVector, bounds: &NormalizationBounds) -> NormalizedFeatures {
    let raw = fv.to_array();
    let mut values = [0.0; 5];
    for i in 0..5 {
        let span = bounds.max[i] - bounds.min[i];
        values[i] = if span > 0.0 {
            ((raw[i] - bounds.min[i]) / span).clamp(0.0, 1.0)
        } else {
            0.0
        };
    }
    NormalizedFeatures::from_values(values)
}

/// `Normal` iff `score <= gamma`.
pub fn classify(nf: &NormalizedFeatures, model: &FfcModel) -> Status {
    if nf.score <= model.gamma {
        Status::Normal
    } else {
        Status::Seizure
    }
}

/// Threshold candidates `0, step, 2*step, ..., 1`. When `1/step` is an
/// integer the points are computed as `i / n` so that e.g. `0.3` is exact.
pub fn gamma_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= 0.5) {
        return Err(FfcError::InvalidParameter(format!("grid step {step} outside (0, 0.5]")));
    }
    let n = (1.0 / step).round();
    if ((1.0 / step) - n).abs() < 1e-9 {
        let n = n as usize;
        return Ok((0..=n).map(|i| i as f64 / n as f64).collect());
    }
    let mut grid: Vec<f64> = (0..).map(|i| i as f64 * step).take_while(|g| *g < 1.0).collect();
    grid.push(1.0);
    Ok(grid)
}

fn check_both_classes<T>(samples: &[(T, Status)]) -> Result<()> {
    let seizure = samples.iter().filter(|(_, s)| *s == Status::Seizure).count();
    if seizure == 0 || seizure == samples.len() {
        return Err(FfcError::SingleClass);
    }
    Ok(())
}

pub fn threshold_accuracy(samples: &[(NormalizedFeatures, Status)], gamma: f64) -> f64 {
    let correct = samples
        .iter()
        .filter(|(nf, truth)| (nf.score <= gamma) == (*truth == Status::Normal))
        .count();
    correct as f64 / samples.len() as f64
}

/// Grid search for the threshold maximizing training accuracy; the smallest
/// maximizer wins ties.
pub fn train_gamma(
    samples: &[(NormalizedFeatures, Status)],
    grid_step: f64,
    bounds: NormalizationBounds,
) -> Result<FfcModel> {
    let grid = gamma_grid(grid_step)?;
    check_both_classes(samples)?;
    let mut best = (grid[0], threshold_accuracy(samples, grid[0]));
    for &gamma in &grid[1..] {
        let acc = threshold_accuracy(samples, gamma);
        if acc > best.1 {
            best = (gamma, acc);
        }
    }
    FfcModel::new(best.0, bounds)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ClassifierKind {
    /// Threshold rule with a trained gamma.
    Ffc { grid_step: f64 },
    /// Threshold rule with a fixed gamma (sweep points).
    FixedGamma { gamma: f64 },
    /// k-nearest-neighbour vote on normalized features.
    Knn { neighbors: usize },
    /// Gaussian naive Bayes on normalized features.
    Gnb,
}

impl ClassifierKind {
    pub fn name(&self) -> String {
        match self {
            ClassifierKind::Ffc { .. } => "ffc".into(),
            ClassifierKind::FixedGamma { gamma } => format!("ffc(gamma={gamma})"),
            ClassifierKind::Knn { neighbors } => format!("knn(k={neighbors})"),
            ClassifierKind::Gnb => "gnb".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
struct KnnModel {
    points: Vec<([f64; 5], Status)>,
    neighbors: usize,
}

impl KnnModel {
    fn predict(&self, x: &[f64; 5]) -> Status {
        let mut dist: Vec<(f64, usize)> = self
            .points
            .iter()
            .enumerate()
            .map(|(i, (p, _))| (p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i))
            .collect();
        dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let k = self.neighbors.min(dist.len());
        let seizure = dist[..k]
            .iter()
            .filter(|(_, i)| self.points[*i].1 == Status::Seizure)
            .count();
        let normal = k - seizure;
        match seizure.cmp(&normal) {
            std::cmp::Ordering::Greater => Status::Seizure,
            std::cmp::Ordering::Less => Status::Normal,
            std::cmp::Ordering::Equal => self.points[dist[0].1].1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
struct GnbModel {
    // indexed by Status::code
    log_prior: [f64; 2],
    mean: [[f64; 5]; 2],
    var: [[f64; 5]; 2],
}

impl GnbModel {
    fn fit(points: &[([f64; 5], Status)]) -> Self {
        let mut count = [0usize; 2];
        let mut mean = [[0.0; 5]; 2];
        for (x, s) in points {
            let c = s.code() as usize;
            count[c] += 1;
            for i in 0..5 {
                mean[c][i] += x[i];
            }
        }
        for c in 0..2 {
            for m in &mut mean[c] {
                *m /= count[c] as f64;
            }
        }
        let mut var = [[0.0; 5]; 2];
        for (x, s) in points {
            let c = s.code() as usize;
            for i in 0..5 {
                var[c][i] += (x[i] - mean[c][i]).powi(2);
            }
        }
        // variance floor proportional to the largest overall feature variance
        let n = points.len() as f64;
        let mut max_var: f64 = 0.0;
        for i in 0..5 {
            let mu = points.iter().map(|(x, _)| x[i]).sum::<f64>() / n;
            let v = points.iter().map(|(x, _)| (x[i] - mu).powi(2)).sum::<f64>() / n;
            max_var = max_var.max(v);
        }
        let floor = 1e-9 * max_var.max(1e-12);
        for c in 0..2 {
            for v in &mut var[c] {
                *v = *v / count[c] as f64 + floor;
            }
        }
        let log_prior = [(count[0] as f64 / n).ln(), (count[1] as f64 / n).ln()];
        Self { log_prior, mean, var }
    }

    fn log_posterior(&self, c: usize, x: &[f64; 5]) -> f64 {
        let mut lp = self.log_prior[c];
        for i in 0..5 {
            let v = self.var[c][i];
            lp -= 0.5 * (2.0 * std::f64::consts::PI * v).ln() + (x[i] - self.mean[c][i]).powi(2) / (2.0 * v);
        }
        lp
    }

    fn predict(&self, x: &[f64; 5]) -> Status {
        if self.log_posterior(1, x) > self.log_posterior(0, x) {
            Status::Seizure
        } else {
            Status::Normal
        }
    }
}

/// A classifier fitted on one training split, bounds included.
#[derive(Clone, Debug, PartialEq)]
enum Fitted {
    Threshold(FfcModel),
    Knn(NormalizationBounds, KnnModel),
    Gnb(NormalizationBounds, GnbModel),
}

impl Fitted {
    fn fit(kind: ClassifierKind, train: &[LabeledFeatures]) -> Result<Self> {
        let raw: Vec<FeatureVector> = train.iter().map(|s| s.features).collect();
        let bounds = fit_bounds(&raw)?;
        let normalized: Vec<(NormalizedFeatures, Status)> = train
            .iter()
            .map(|s| (normalize(&s.features, &bounds), s.status))
            .collect();
        Ok(match kind {
            ClassifierKind::Ffc { grid_step } => Fitted::Threshold(train_gamma(&normalized, grid_step, bounds)?),
            ClassifierKind::FixedGamma { gamma } => Fitted::Threshold(FfcModel::new(gamma, bounds)?),
            ClassifierKind::Knn { neighbors } => Fitted::Knn(
                bounds,
                KnnModel {
                    points: normalized.iter().map(|(nf, s)| (nf.values, *s)).collect(),
                    neighbors,
                },
            ),
            ClassifierKind::Gnb => {
                let points: Vec<_> = normalized.iter().map(|(nf, s)| (nf.values, *s)).collect();
                Fitted::Gnb(bounds, GnbModel::fit(&points))
            }
        })
    }

    fn predict(&self, fv: &FeatureVector) -> Status {
        match self {
            Fitted::Threshold(model) => model.predict(fv).1,
            Fitted::Knn(bounds, knn) => knn.predict(&normalize(fv, bounds).values),
            Fitted::Gnb(bounds, gnb) => gnb.predict(&normalize(fv, bounds).values),
        }
    }
}

/// A feature vector with its ground-truth status.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledFeatures {
    pub features: FeatureVector,
    pub status: Status,
}

impl LabeledFeatures {
    /// Pairs features with labels; unlabeled records are rejected.
    pub fn from_rows(rows: impl IntoIterator<Item = (FeatureVector, Label)>) -> Result<Vec<Self>> {
        rows.into_iter()
            .enumerate()
            .map(|(i, (features, label))| {
                let status = Status::from_label(label).ok_or(FfcError::Unlabeled(i))?;
                Ok(Self { features, status })
            })
            .collect()
    }
}

/// Test-fold indices of a stratified split. Each class is shuffled with
/// the seeded generator (normal first, then seizure) and dealt round-robin
/// onto the folds; indices within a fold are ascending.
pub fn stratified_folds(statuses: &[Status], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(FfcError::InvalidParameter(format!("fold count {k} must be at least 2")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    for class in [Status::Normal, Status::Seizure] {
        let mut members: Vec<usize> = statuses
            .iter()
            .enumerate()
            .filter(|(_, s)| **s == class)
            .map(|(i, _)| i)
            .collect();
        if members.len() < k {
            return Err(FfcError::TooFewMembers {
                class,
                count: members.len(),
                k,
            });
        }
        members.shuffle(&mut rng);
        for (j, idx) in members.into_iter().enumerate() {
            folds[j % k].push(idx);
        }
    }
    for fold in &mut folds {
        fold.sort_unstable();
    }
    Ok(folds)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    pub fn record(&mut self, truth: Status, predicted: Status) {
        match (truth, predicted) {
            (Status::Seizure, Status::Seizure) => self.tp += 1,
            (Status::Normal, Status::Normal) => self.tn += 1,
            (Status::Normal, Status::Seizure) => self.fp += 1,
            (Status::Seizure, Status::Normal) => self.fn_ += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn accuracy(&self) -> f64 {
        (self.tp + self.tn) as f64 / self.total() as f64
    }

    fn add(&mut self, other: &Confusion) {
        self.tp += other.tp;
        self.tn += other.tn;
        self.fp += other.fp;
        self.fn_ += other.fn_;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub classifier: String,
    pub k: usize,
    pub seed: u64,
    pub fold_accuracy: Vec<f64>,
    pub mean_accuracy: f64,
    pub confusion: Confusion,
}

impl CvReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("classifier,k,seed,fold,accuracy\n");
        for (i, acc) in self.fold_accuracy.iter().enumerate() {
            let _ = writeln!(out, "{},{},{},{},{:.9}", self.classifier, self.k, self.seed, i, acc);
        }
        let c = &self.confusion;
        let _ = writeln!(
            out,
            "{},{},{},all,{:.9}\n# tp={} tn={} fp={} fn={}",
            self.classifier, self.k, self.seed, self.mean_accuracy, c.tp, c.tn, c.fp, c.fn_
        );
        out
    }
}

fn run_folds(set: &[LabeledFeatures], k: usize, kind: ClassifierKind, seed: u64) -> Result<CvReport> {
    let statuses: Vec<Status> = set.iter().map(|s| s.status).collect();
    let folds = stratified_folds(&statuses, k, seed)?;
    let mut in_test = vec![usize::MAX; set.len()];
    for (f, fold) in folds.iter().enumerate() {
        for &i in fold {
            in_test[i] = f;
        }
    }
    let mut confusion = Confusion::default();
    let mut fold_accuracy = Vec::with_capacity(k);
    for (f, fold) in folds.iter().enumerate() {
        let train: Vec<LabeledFeatures> = set
            .iter()
            .zip(&in_test)
            .filter(|(_, t)| **t != f)
            .map(|(s, _)| *s)
            .collect();
        let fitted = Fitted::fit(kind, &train)?;
        let mut fold_confusion = Confusion::default();
        for &i in fold {
            fold_confusion.record(set[i].status, fitted.predict(&set[i].features));
        }
        fold_accuracy.push(fold_confusion.accuracy());
        confusion.add(&fold_confusion);
    }
    Ok(CvReport {
        classifier: kind.name(),
        k,
        seed,
        fold_accuracy,
        mean_accuracy: confusion.accuracy(),
        confusion,
    })
}

/// Stratified k-fold evaluation: bounds and the classifier are refit on the
/// training folds of every split.
pub fn cross_validate(set: &[LabeledFeatures], k: usize, classifier: ClassifierKind, seed: u64) -> Result<CvReport> {
    if let ClassifierKind::Knn { neighbors: 0 } = classifier {
        return Err(FfcError::InvalidParameter("neighbour count must be at least 1".into()));
    }
    run_folds(set, k, classifier, seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub gamma: f64,
    pub accuracy: f64,
}

/// Cross-validated accuracy of the threshold rule at each fixed gamma.
pub fn eval_gamma_sweep(set: &[LabeledFeatures], k: usize, gammas: &[f64], seed: u64) -> Result<Vec<SweepPoint>> {
    gammas
        .iter()
        .map(|&gamma| {
            let report = run_folds(set, k, ClassifierKind::FixedGamma { gamma }, seed)?;
            Ok(SweepPoint {
                gamma,
                accuracy: report.mean_accuracy,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Band;

    fn fv(values: [f64; 5]) -> FeatureVector {
        FeatureVector::from_array(values, Band::default())
    }

    fn unit_bounds() -> NormalizationBounds {
        NormalizationBounds {
            min: [0.0; 5],
            max: [1.0; 5],
        }
    }

    #[test]
    fn singleton_bounds() {
        let v = fv([1.0, 2.0, 3.0, 4.0, 5.0]);
        let b = fit_bounds(&[v]).unwrap();
        assert_eq!(b.min, v.to_array());
        assert_eq!(b.max, v.to_array());
        assert_eq!(fit_bounds(&[]), Err(FfcError::Empty));
    }

    #[test]
    fn zero_one_bounds() {
        let b = fit_bounds(&[fv([0.0; 5]), fv([1.0; 5])]).unwrap();
        assert_eq!(b, unit_bounds());
    }

    #[test]
    fn normalize_boundaries_and_clamp() {
        let b = NormalizationBounds {
            min: [1.0, 2.0, 3.0, 4.0, 5.0],
            max: [2.0, 4.0, 6.0, 8.0, 10.0],
        };
        let lo = normalize(&fv(b.min), &b);
        assert_eq!(lo.values, [0.0; 5]);
        assert_eq!(lo.score, 0.0);
        let hi = normalize(&fv(b.max), &b);
        assert_eq!(hi.values, [1.0; 5]);
        assert_eq!(hi.score, 1.0);
        let over = normalize(&fv([100.0, 2.0, 3.0, 4.0, 5.0]), &b);
        assert_eq!(over.values[0], 1.0);
        assert!((over.score - 0.2).abs() < 1e-12);
    }

    #[test]
    fn degenerate_feature_maps_to_zero() {
        let b = NormalizationBounds {
            min: [1.0; 5],
            max: [1.0, 2.0, 2.0, 2.0, 2.0],
        };
        let nf = normalize(&fv([5.0, 2.0, 2.0, 2.0, 2.0]), &b);
        assert_eq!(nf.values, [0.0, 1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn equality_is_normal() {
        let model = FfcModel::new(0.70, unit_bounds()).unwrap();
        assert_eq!(classify(&NormalizedFeatures::with_score(0.70), &model), Status::Normal);
        assert_eq!(classify(&NormalizedFeatures::with_score(0.71), &model), Status::Seizure);
        for g in [0.0, 0.3, 1.0] {
            let m = FfcModel::new(g, unit_bounds()).unwrap();
            assert_eq!(classify(&NormalizedFeatures::with_score(0.0), &m), Status::Normal);
        }
    }

    #[test]
    fn model_validation() {
        assert!(FfcModel::new(1.2, unit_bounds()).is_err());
        assert!(FfcModel::new(-0.1, unit_bounds()).is_err());
        let mut bad = unit_bounds();
        bad.max[2] = -1.0;
        assert!(FfcModel::new(0.5, bad).is_err());
    }

    #[test]
    fn grid_contains_exact_endpoints() {
        let g = gamma_grid(0.01).unwrap();
        assert_eq!(g.len(), 101);
        assert_eq!(g[30], 0.3);
        assert_eq!(g[70], 0.7);
        assert_eq!(*g.last().unwrap(), 1.0);
        let g = gamma_grid(0.3).unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(*g.last().unwrap(), 1.0);
        assert!(gamma_grid(0.0).is_err());
        assert!(gamma_grid(0.6).is_err());
    }

    #[test]
    fn identical_scores_return_zero_gamma() {
        let mut s = vec![(NormalizedFeatures::with_score(0.0), Status::Normal); 6];
        s.extend(vec![(NormalizedFeatures::with_score(0.0), Status::Seizure); 3]);
        let m = train_gamma(&s, 0.01, unit_bounds()).unwrap();
        assert_eq!(m.gamma, 0.0);
        for g in gamma_grid(0.01).unwrap() {
            assert!((threshold_accuracy(&s, g) - 6.0 / 9.0).abs() < 1e-15);
        }
    }

    #[test]
    fn single_class_training_fails() {
        let s = vec![(NormalizedFeatures::with_score(0.2), Status::Normal); 4];
        assert_eq!(train_gamma(&s, 0.01, unit_bounds()), Err(FfcError::SingleClass));
    }

    #[test]
    fn folds_are_stratified_and_cover_everything() {
        let mut statuses = vec![Status::Normal; 20];
        statuses.extend(vec![Status::Seizure; 10]);
        let folds = stratified_folds(&statuses, 5, 3).unwrap();
        let mut all: Vec<usize> = folds.iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..30).collect::<Vec<_>>());
        for fold in &folds {
            let seizure = fold.iter().filter(|&&i| statuses[i] == Status::Seizure).count();
            assert_eq!((fold.len(), seizure), (6, 2));
        }
        assert!(matches!(
            stratified_folds(&statuses[..24], 5, 3),
            Err(FfcError::TooFewMembers {
                class: Status::Seizure,
                count: 4,
                k: 5
            })
        ));
        assert!(stratified_folds(&statuses, 1, 3).is_err());
    }

    #[test]
    fn knn_tie_falls_back_to_nearest() {
        let knn = KnnModel {
            points: vec![([0.0; 5], Status::Normal), ([1.0; 5], Status::Seizure)],
            neighbors: 2,
        };
        assert_eq!(knn.predict(&[0.9; 5]), Status::Seizure);
        assert_eq!(knn.predict(&[0.1; 5]), Status::Normal);
    }

    #[test]
    fn gnb_separates_distinct_clusters() {
        let mut points = Vec::new();
        for i in 0..10 {
            let d = i as f64 * 0.01;
            points.push(([0.1 + d; 5], Status::Normal));
            points.push(([0.8 + d; 5], Status::Seizure));
        }
        let gnb = GnbModel::fit(&points);
        assert_eq!(gnb.predict(&[0.12; 5]), Status::Normal);
        assert_eq!(gnb.predict(&[0.85; 5]), Status::Seizure);
    }

    #[test]
    fn unlabeled_rows_are_rejected() {
        let rows = vec![(fv([0.0; 5]), Label::Normal), (fv([0.0; 5]), Label::Unlabeled)];
        assert_eq!(LabeledFeatures::from_rows(rows), Err(FfcError::Unlabeled(1)));
    }
}
