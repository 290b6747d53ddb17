//! Kernel ridge regression on precomputed Gram matrices, train/test
//! splitting and F1 scoring.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::kernels::GramMatrix;
use crate::ranking::OrderedPartition;
use crate::rng;

/// Default ridge strength, scaled by the training-set size.
pub const DEFAULT_REGULARIZATION: f64 = 1e-3;

const JITTER_LADDER: [f64; 6] = [0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6];

/// Class label, `+1` or `−1`.
pub type Label = i8;

fn check_labels(labels: &[Label]) -> Result<()> {
    match labels.iter().find(|&&y| y != 1 && y != -1) {
        Some(y) => Err(Error::InvalidArgument(format!("label {y} is not +1 or -1"))),
        None => Ok(()),
    }
}

/// Rankings paired with ±1 labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledRankingDataset {
    pub rankings: Vec<OrderedPartition>,
    pub labels: Vec<Label>,
}

impl LabeledRankingDataset {
    pub fn new(rankings: Vec<OrderedPartition>, labels: Vec<Label>) -> Result<Self> {
        if rankings.len() != labels.len() {
            return Err(Error::DimensionMismatch { left: rankings.len(), right: labels.len() });
        }
        check_labels(&labels)?;
        if let Some(first) = rankings.first() {
            if let Some(r) = rankings.iter().find(|r| r.n() != first.n()) {
                return Err(Error::UniverseMismatch { expected: first.n(), found: r.n() });
            }
        }
        Ok(LabeledRankingDataset { rankings, labels })
    }

    pub fn len(&self) -> usize {
        self.rankings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rankings.is_empty()
    }

    /// Universe size, if the dataset is non-empty.
    pub fn n(&self) -> Option<usize> {
        self.rankings.first().map(OrderedPartition::n)
    }
}

/// Shuffled split into `(train, test)` row ids, each sorted ascending.
/// The test set holds `round(m · test_fraction)` rows.
pub fn split(labels: &[Label], test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!("test fraction {test_fraction} not in (0, 1)")));
    }
    check_labels(labels)?;
    let m = labels.len();
    let test_size = (m as f64 * test_fraction).round() as usize;
    if test_size == 0 || test_size >= m {
        return Err(Error::DegenerateSplit(format!("{test_size} test rows out of {m}")));
    }
    let mut ids: Vec<usize> = (0..m).collect();
    ids.shuffle(&mut rng::seeded(seed));
    let mut test = ids[..test_size].to_vec();
    let mut train = ids[test_size..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    for class in [1, -1] {
        if !train.iter().any(|&i| labels[i] == class) {
            return Err(Error::DegenerateSplit(format!("class {class:+} absent from training rows")));
        }
    }
    Ok((train, test))
}

/// Dual solution of kernel ridge regression.
#[derive(Debug, Clone, PartialEq)]
pub struct KrrModel {
    pub dual_coefficients: Vec<f64>,
    pub regularization: f64,
    pub training_ids: Vec<usize>,
    /// Extra diagonal jitter needed for the factorization to succeed.
    pub jitter: f64,
    /// Max-norm residual of the solved system.
    pub residual: f64,
}

/// Solves `(K + reg·m·I) c = y` by Cholesky factorization, escalating a
/// diagonal jitter up to `1e−6` when the factorization fails.
pub fn train_krr(k_train: &[f64], y: &[Label], reg: f64) -> Result<KrrModel> {
    let m = y.len();
    if k_train.len() != m * m {
        return Err(Error::DimensionMismatch { left: m * m, right: k_train.len() });
    }
    if !(reg > 0.0 && reg.is_finite()) {
        return Err(Error::InvalidArgument(format!("regularization {reg} must be positive")));
    }
    check_labels(y)?;
    if k_train.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("training kernel".into()));
    }
    let kernel = DMatrix::from_row_slice(m, m, k_train);
    let target = DVector::from_iterator(m, y.iter().map(|&v| f64::from(v)));
    for jitter in JITTER_LADDER {
        let system = &kernel + DMatrix::<f64>::identity(m, m) * (reg * m as f64 + jitter);
        if let Some(chol) = system.clone().cholesky() {
            let c = chol.solve(&target);
            let residual = (&system * &c - &target).amax();
            if residual > 1e-8 {
                return Err(Error::Factorization(format!("residual {residual:e} exceeds 1e-8")));
            }
            return Ok(KrrModel {
                dual_coefficients: c.iter().copied().collect(),
                regularization: reg,
                training_ids: (0..m).collect(),
                jitter,
                residual,
            });
        }
    }
    Err(Error::Factorization("kernel matrix not positive definite after jitter 1e-6".into()))
}

/// Real-valued scores `K_cross · c` for a `rows × train` cross kernel.
pub fn decision_scores(model: &KrrModel, k_cross: &[f64], rows: usize) -> Result<Vec<f64>> {
    let cols = model.dual_coefficients.len();
    if k_cross.len() != rows * cols {
        return Err(Error::DimensionMismatch { left: rows * cols, right: k_cross.len() });
    }
    Ok(k_cross
        .chunks(cols.max(1))
        .take(rows)
        .map(|row| row.iter().zip(&model.dual_coefficients).map(|(k, c)| k * c).sum())
        .collect())
}

/// Sign of the decision scores; a zero score maps to `+1`.
pub fn predict(model: &KrrModel, k_cross: &[f64], rows: usize) -> Result<Vec<Label>> {
    Ok(decision_scores(model, k_cross, rows)?.into_iter().map(|s| if s < 0.0 { -1 } else { 1 }).collect())
}

/// F1 score of `predicted` against `actual` for `positive`; 0 when
/// precision and recall are both undefined or zero.
pub fn f1_score(predicted: &[Label], actual: &[Label], positive: Label) -> f64 {
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for (&p, &a) in predicted.iter().zip(actual) {
        match (p == positive, a == positive) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    let denom = 2 * tp + fp + fn_;
    if denom == 0 {
        0.0
    } else {
        2.0 * tp as f64 / denom as f64
    }
}

/// Uniform coin-flip labels, the reference floor for F1 comparisons.
pub fn dummy_predictions(len: usize, seed: u64) -> Vec<Label> {
    let mut stream = rng::seeded(seed);
    (0..len).map(|_| if stream.random_bool(0.5) { 1 } else { -1 }).collect()
}

/// Outcome of one split/train/predict round.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub f1: f64,
    pub train_ids: Vec<usize>,
    pub test_ids: Vec<usize>,
    pub predictions: Vec<Label>,
}

/// Splits, trains on the training block of `gram`, predicts the test rows
/// and scores F1 for class `+1`.
pub fn evaluate(gram: &GramMatrix, labels: &[Label], test_fraction: f64, seed: u64, reg: f64) -> Result<Evaluation> {
    if gram.size() != labels.len() {
        return Err(Error::DimensionMismatch { left: gram.size(), right: labels.len() });
    }
    let (train_ids, test_ids) = split(labels, test_fraction, seed)?;
    let y_train: Vec<Label> = train_ids.iter().map(|&i| labels[i]).collect();
    let mut model = train_krr(&gram.submatrix(&train_ids, &train_ids), &y_train, reg)?;
    model.training_ids = train_ids.clone();
    let predictions = predict(&model, &gram.submatrix(&test_ids, &train_ids), test_ids.len())?;
    let actual: Vec<Label> = test_ids.iter().map(|&i| labels[i]).collect();
    Ok(Evaluation { f1: f1_score(&predictions, &actual, 1), train_ids, test_ids, predictions })
}
