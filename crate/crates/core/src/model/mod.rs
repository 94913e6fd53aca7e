//! Classifiers over profile feature vectors: logistic regression, linear
//! hinge-loss SVM, and a Gini random forest, plus prediction and JSON
//! persistence. Optimizers are full-batch and deterministic; the forest
//! derives one seed per tree so results do not depend on build order.

mod forest;
mod linear;

pub use forest::{Tree, TreeNode};
pub use linear::logistic_loss_gradient;

use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::ClassLabel;
use crate::scalar::{sigmoid, Scalar};

const MODEL_FORMAT: &str = "model.v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Logreg,
    Svm,
    RandomForest,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Logreg, Algorithm::Svm, Algorithm::RandomForest];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Logreg => "logreg",
            Algorithm::Svm => "svm",
            Algorithm::RandomForest => "rf",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "logreg" | "lr" => Ok(Algorithm::Logreg),
            "svm" => Ok(Algorithm::Svm),
            "rf" | "random_forest" => Ok(Algorithm::RandomForest),
            other => Err(Error::UnknownName {
                what: "algorithm",
                value: other.to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub algorithm: Algorithm,
    /// L2 penalty weight for the linear models.
    pub l2_strength: f64,
    pub max_iters: usize,
    /// Gradient-norm stopping threshold (logistic regression).
    pub tolerance: f64,
    /// Forest size.
    pub trees: usize,
    /// `None` grows trees until pure or unsplittable.
    pub max_depth: Option<usize>,
    /// Candidate features per split; `None` means `ceil(sqrt(d))`.
    pub features_per_split: Option<usize>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            algorithm: Algorithm::Logreg,
            l2_strength: 1.0,
            max_iters: 1000,
            tolerance: 1e-6,
            trees: 100,
            max_depth: None,
            features_per_split: None,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn for_algorithm(algorithm: Algorithm) -> Self {
        TrainConfig {
            algorithm,
            ..TrainConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 || self.trees == 0 {
            return Err(Error::validation("iteration and tree counts must be positive"));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::validation("tolerance must be > 0"));
        }
        if !(self.l2_strength > 0.0) {
            return Err(Error::validation("l2_strength must be > 0"));
        }
        if self.features_per_split == Some(0) {
            return Err(Error::validation("features_per_split must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModelKind<S> {
    Linear { weights: Vec<S>, bias: S },
    Forest { trees: Vec<Tree<S>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel<S> {
    pub algorithm: Algorithm,
    /// Feature dimension the model was fitted on.
    pub dim: usize,
    pub kind: ModelKind<S>,
    /// Column names when the features came from a sparse token space.
    pub feature_names: Option<Vec<String>>,
    pub config: TrainConfig,
    /// Logistic regression: gradient norm reached `tolerance`.
    pub converged: bool,
    pub iterations: usize,
}

fn check_training_input<S: Scalar>(x: &[Vec<S>], y: &[ClassLabel]) -> Result<usize> {
    if x.is_empty() || x.len() != y.len() {
        return Err(Error::validation(
            "training set must be non-empty with one label per row",
        ));
    }
    let d = x[0].len();
    if d == 0 {
        return Err(Error::validation("feature dimension must be >= 1"));
    }
    for row in x {
        if row.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: row.len(),
            });
        }
    }
    let gang = y.iter().filter(|&&l| l == ClassLabel::Gang).count();
    if gang == 0 || gang == y.len() {
        return Err(Error::DegenerateLabels);
    }
    Ok(d)
}

/// Fit the configured classifier. Requires both classes present and a
/// consistent feature dimension.
pub fn train<S: Scalar>(
    x: &[Vec<S>],
    y: &[ClassLabel],
    config: &TrainConfig,
) -> Result<TrainedModel<S>> {
    config.validate()?;
    let d = check_training_input(x, y)?;
    let (kind, converged, iterations) = match config.algorithm {
        Algorithm::Logreg => {
            let fit = linear::train_logreg(x, y, config);
            (
                ModelKind::Linear {
                    weights: fit.weights,
                    bias: fit.bias,
                },
                fit.converged,
                fit.iterations,
            )
        }
        Algorithm::Svm => {
            let fit = linear::train_svm(x, y, config);
            (
                ModelKind::Linear {
                    weights: fit.weights,
                    bias: fit.bias,
                },
                fit.converged,
                fit.iterations,
            )
        }
        Algorithm::RandomForest => {
            let trees = forest::train_forest(x, y, config);
            (ModelKind::Forest { trees }, true, config.trees)
        }
    };
    Ok(TrainedModel {
        algorithm: config.algorithm,
        dim: d,
        kind,
        feature_names: None,
        config: config.clone(),
        converged,
        iterations,
    })
}

/// Per-row score: gang-class probability for logreg and the forest, signed
/// margin for the SVM. The label is gang only when the score strictly
/// crosses the threshold (0.5 / 0); ties go to non-gang.
pub fn predict<S: Scalar>(
    model: &TrainedModel<S>,
    x: &[Vec<S>],
) -> Result<Vec<(ClassLabel, S)>> {
    let mut out = Vec::with_capacity(x.len());
    for row in x {
        if row.len() != model.dim {
            return Err(Error::DimensionMismatch {
                expected: model.dim,
                got: row.len(),
            });
        }
        let (label, score) = match &model.kind {
            ModelKind::Linear { weights, bias } => {
                let z = weights
                    .iter()
                    .zip(row)
                    .fold(*bias, |acc, (&w, &v)| acc + w * v);
                match model.algorithm {
                    Algorithm::Logreg => {
                        let p = sigmoid(z);
                        (threshold(p, S::from_f64_cfg(0.5)), p)
                    }
                    _ => (threshold(z, S::zero()), z),
                }
            }
            ModelKind::Forest { trees } => {
                let mut acc = S::zero();
                for tree in trees {
                    acc += tree.prob_gang(row);
                }
                let p = acc / S::from_usize(trees.len()).expect("tree count fits scalar");
                (threshold(p, S::from_f64_cfg(0.5)), p)
            }
        };
        out.push((label, score));
    }
    Ok(out)
}

fn threshold<S: Scalar>(score: S, cut: S) -> ClassLabel {
    if score > cut {
        ClassLabel::Gang
    } else {
        ClassLabel::NonGang
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile<S> {
    format: String,
    model: TrainedModel<S>,
}

pub fn save_model<S: Scalar>(model: &TrainedModel<S>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = BufWriter::new(file);
    let envelope = ModelFile {
        format: MODEL_FORMAT.to_string(),
        model: model.clone(),
    };
    serde_json::to_writer(&mut writer, &envelope)
        .map_err(|e| Error::validation(format!("serialize model: {e}")))?;
    writer.flush().map_err(|e| Error::io(path, e))
}

pub fn load_model<S: Scalar>(path: impl AsRef<Path>) -> Result<TrainedModel<S>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let envelope: ModelFile<S> = serde_json::from_reader(BufReader::new(file))
        .map_err(|e| Error::parse(0, format!("model file: {e}")))?;
    if envelope.format != MODEL_FORMAT {
        return Err(Error::FormatVersion(envelope.format));
    }
    Ok(envelope.model)
}
