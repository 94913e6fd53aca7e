//! Leakage-safe 10-fold cross-validation over the full pipeline.
//!
//! Per fold, the vocabulary, embeddings, and idf table are built from the
//! training profiles only; a built-in guard verifies that no token unique to
//! the fold's test set entered either. Metrics are reported per class under
//! two aggregate scopes: pooled (sum confusions, then compute) and macro
//! (mean of per-fold metrics).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::embed::{train_skipgram_with_workers, EmbeddingModel, Hyperparams};
use crate::error::{Error, Result};
use crate::features::{
    aggregate, baseline_tf_vector, build_idf, compute_term_stats, AggregationMethod,
    FeatureValues, IdfTable,
};
use crate::ingest::{ClassLabel, ProfileCollection};
use crate::model::{self, Algorithm, TrainConfig};
use crate::preprocess::{preprocess_profile, PreprocessConfig, TokenizedProfile};
use crate::scalar::Scalar;
use crate::seeding;

const REPORT_FORMAT: &str = "report.v1";

/// Assignment of every labeled profile to exactly one fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldPlan {
    k: usize,
    seed: u64,
    stratified: bool,
    assignment: BTreeMap<String, usize>,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stratified(&self) -> bool {
        self.stratified
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn fold_of(&self, id: &str) -> Option<usize> {
        self.assignment.get(id).copied()
    }

    /// (id, fold) pairs in id order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> {
        self.assignment.iter().map(|(id, &fold)| (id.as_str(), fold))
    }
}

/// Stratified by default: seeded shuffle within each class, round-robin
/// assignment, so per-fold class counts differ by at most one.
pub fn make_folds(
    labels: &BTreeMap<String, ClassLabel>,
    k: usize,
    seed: u64,
    stratified: bool,
) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::validation(
            "fold count must be at least 2 (otherwise no held-out data)",
        ));
    }
    let mut gang: Vec<&String> = Vec::new();
    let mut non_gang: Vec<&String> = Vec::new();
    for (id, &label) in labels {
        match label {
            ClassLabel::Gang => gang.push(id),
            ClassLabel::NonGang => non_gang.push(id),
        }
    }
    if gang.is_empty() || non_gang.is_empty() {
        return Err(Error::DegenerateLabels);
    }
    for (class, ids) in [("gang", &gang), ("non_gang", &non_gang)] {
        if k > ids.len() {
            return Err(Error::FoldCount {
                k,
                class: class.to_string(),
                class_size: ids.len(),
            });
        }
    }
    let mut rng = seeding::rng_from_seed(seeding::derive_seed(seed, "folds"));
    let mut assignment = BTreeMap::new();
    if stratified {
        for ids in [&mut gang, &mut non_gang] {
            ids.shuffle(&mut rng);
            for (i, id) in ids.iter().enumerate() {
                assignment.insert((*id).clone(), i % k);
            }
        }
    } else {
        let mut all: Vec<&String> = labels.keys().collect();
        all.shuffle(&mut rng);
        for (i, id) in all.iter().enumerate() {
            assignment.insert((*id).clone(), i % k);
        }
    }
    Ok(FoldPlan {
        k,
        seed,
        stratified,
        assignment,
    })
}

/// Confusion counts with gang as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub true_pos: u64,
    pub false_pos: u64,
    pub true_neg: u64,
    pub false_neg: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.true_pos + self.false_pos + self.true_neg + self.false_neg
    }

    pub fn add(&mut self, other: &ConfusionCounts) {
        self.true_pos += other.true_pos;
        self.false_pos += other.false_pos;
        self.true_neg += other.true_neg;
        self.false_neg += other.false_neg;
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PerClassMetrics {
    pub gang: ClassMetrics,
    pub non_gang: ClassMetrics,
}

fn ratio(numerator: u64, denominator: u64, what: &str) -> f64 {
    if denominator == 0 {
        log::warn!("0/0 form in {what}; defining as 0");
        0.0
    } else {
        numerator as f64 / denominator as f64
    }
}

fn harmonic(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Precision, recall, and F1 for both classes; 0/0 forms define to 0.
pub fn compute_metrics(c: &ConfusionCounts) -> PerClassMetrics {
    let gang_p = ratio(c.true_pos, c.true_pos + c.false_pos, "gang precision");
    let gang_r = ratio(c.true_pos, c.true_pos + c.false_neg, "gang recall");
    let non_p = ratio(c.true_neg, c.true_neg + c.false_neg, "non-gang precision");
    let non_r = ratio(c.true_neg, c.true_neg + c.false_pos, "non-gang recall");
    PerClassMetrics {
        gang: ClassMetrics {
            precision: gang_p,
            recall: gang_r,
            f1: harmonic(gang_p, gang_r),
        },
        non_gang: ClassMetrics {
            precision: non_p,
            recall: non_r,
            f1: harmonic(non_p, non_r),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineDescriptor {
    pub method: AggregationMethod,
    pub algorithm: Algorithm,
    pub folds: usize,
    pub stratified: bool,
    pub require_all_channels: bool,
    pub fold_seed: u64,
    pub hyperparams: Hyperparams,
    pub train: TrainConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub confusion: ConfusionCounts,
    pub metrics: PerClassMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PooledMetrics {
    pub confusion: ConfusionCounts,
    pub metrics: PerClassMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub descriptor: PipelineDescriptor,
    pub folds: Vec<FoldReport>,
    /// Sum confusions across folds, then compute metrics.
    pub pooled: PooledMetrics,
    /// Mean of per-fold metrics (each per-fold F1 is the harmonic mean within
    /// its fold; the macro F1 generally is not the harmonic mean of macro P
    /// and R).
    pub macro_avg: PerClassMetrics,
}

/// Build a report from per-fold confusions; every stored number is
/// recomputable from them.
pub fn assemble_report(
    descriptor: PipelineDescriptor,
    confusions: &[ConfusionCounts],
) -> Result<EvaluationReport> {
    if confusions.is_empty() {
        return Err(Error::NoFolds);
    }
    let folds: Vec<FoldReport> = confusions
        .iter()
        .enumerate()
        .map(|(fold, &confusion)| FoldReport {
            fold,
            confusion,
            metrics: compute_metrics(&confusion),
        })
        .collect();
    let mut pooled_confusion = ConfusionCounts::default();
    for c in confusions {
        pooled_confusion.add(c);
    }
    let n = folds.len() as f64;
    let mean = |pick: &dyn Fn(&FoldReport) -> ClassMetrics| -> ClassMetrics {
        let mut acc = ClassMetrics::default();
        for fold in &folds {
            let m = pick(fold);
            acc.precision += m.precision;
            acc.recall += m.recall;
            acc.f1 += m.f1;
        }
        ClassMetrics {
            precision: acc.precision / n,
            recall: acc.recall / n,
            f1: acc.f1 / n,
        }
    };
    let macro_avg = PerClassMetrics {
        gang: mean(&|f| f.metrics.gang),
        non_gang: mean(&|f| f.metrics.non_gang),
    };
    Ok(EvaluationReport {
        descriptor,
        folds,
        pooled: PooledMetrics {
            confusion: pooled_confusion,
            metrics: compute_metrics(&pooled_confusion),
        },
        macro_avg,
    })
}

/// Ratio of pooled gang-class F1 between two runs (the "improvement" number
/// when comparing a candidate against a baseline).
pub fn improvement_ratio(candidate: &EvaluationReport, baseline: &EvaluationReport) -> Option<f64> {
    let denom = baseline.pooled.metrics.gang.f1;
    (denom > 0.0).then(|| candidate.pooled.metrics.gang.f1 / denom)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Table,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "table" | "text" => Ok(ReportFormat::Table),
            other => Err(Error::UnknownName {
                what: "report format",
                value: other.to_string(),
            }),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ReportFile {
    format: String,
    report: EvaluationReport,
}

pub fn report_to_json(report: &EvaluationReport) -> Result<String> {
    let envelope = ReportFile {
        format: REPORT_FORMAT.to_string(),
        report: report.clone(),
    };
    serde_json::to_string_pretty(&envelope)
        .map_err(|e| Error::validation(format!("serialize report: {e}")))
}

pub fn write_report_json(path: impl AsRef<Path>, report: &EvaluationReport) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = BufWriter::new(file);
    let json = report_to_json(report)?;
    writer
        .write_all(json.as_bytes())
        .and_then(|()| writer.write_all(b"\n"))
        .map_err(|e| Error::io(path, e))?;
    writer.flush().map_err(|e| Error::io(path, e))
}

pub fn read_report_json(path: impl AsRef<Path>) -> Result<EvaluationReport> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let envelope: ReportFile = serde_json::from_reader(BufReader::new(file))
        .map_err(|e| Error::parse(0, format!("report file: {e}")))?;
    if envelope.format != REPORT_FORMAT {
        return Err(Error::FormatVersion(envelope.format));
    }
    Ok(envelope.report)
}

fn metrics_cells(m: &PerClassMetrics) -> String {
    format!(
        "{:>10.4}{:>9.4}{:>9.4} |{:>10.4}{:>9.4}{:>9.4}",
        m.gang.precision, m.gang.recall, m.gang.f1, m.non_gang.precision, m.non_gang.recall,
        m.non_gang.f1
    )
}

const TABLE_HEADER: &str =
    "Method           Classifier |    Gang P   Gang R  Gang F1 |  NonG P   NonG R  NonG F1";

/// Rows = method x algorithm, columns = per-class precision/recall/F1, one
/// block per aggregation scope.
pub fn render_comparison_table(reports: &[EvaluationReport]) -> Result<String> {
    if reports.is_empty() || reports.iter().any(|r| r.folds.is_empty()) {
        return Err(Error::NoFolds);
    }
    let mut out = String::new();
    for (title, pick) in [
        (
            "Pooled over folds",
            &(|r: &EvaluationReport| r.pooled.metrics) as &dyn Fn(&EvaluationReport) -> PerClassMetrics,
        ),
        ("Macro (mean of per-fold metrics)", &|r: &EvaluationReport| {
            r.macro_avg
        }),
    ] {
        writeln!(out, "== {title} ==").expect("write to string");
        writeln!(out, "{TABLE_HEADER}").expect("write to string");
        writeln!(out, "{}", "-".repeat(TABLE_HEADER.len())).expect("write to string");
        for report in reports {
            writeln!(
                out,
                "{:<17}{:<11} |{}",
                report.descriptor.method.as_str(),
                report.descriptor.algorithm.as_str(),
                metrics_cells(&pick(report))
            )
            .expect("write to string");
        }
        writeln!(out).expect("write to string");
    }
    Ok(out)
}

/// Render one report as JSON or as a human table with per-fold rows plus the
/// two aggregate scopes.
pub fn render_report(report: &EvaluationReport, format: ReportFormat) -> Result<String> {
    if report.folds.is_empty() {
        return Err(Error::NoFolds);
    }
    match format {
        ReportFormat::Json => report_to_json(report),
        ReportFormat::Table => {
            let mut out = String::new();
            let d = &report.descriptor;
            writeln!(
                out,
                "method={} algorithm={} folds={} stratified={} seed={}",
                d.method, d.algorithm, d.folds, d.stratified, d.fold_seed
            )
            .expect("write to string");
            writeln!(
                out,
                "{:>5} {:>6} {:>6} {:>6} {:>6} |{}",
                "fold", "tp", "fp", "tn", "fn",
                "    Gang P   Gang R  Gang F1 |  NonG P   NonG R  NonG F1"
            )
            .expect("write to string");
            for fold in &report.folds {
                let c = &fold.confusion;
                writeln!(
                    out,
                    "{:>5} {:>6} {:>6} {:>6} {:>6} |{}",
                    fold.fold,
                    c.true_pos,
                    c.false_pos,
                    c.true_neg,
                    c.false_neg,
                    metrics_cells(&fold.metrics)
                )
                .expect("write to string");
            }
            writeln!(out, "{:<28} |{}", "pooled", metrics_cells(&report.pooled.metrics))
                .expect("write to string");
            writeln!(out, "{:<28} |{}", "macro", metrics_cells(&report.macro_avg))
                .expect("write to string");
            Ok(out)
        }
    }
}

/// Keep only profiles whose five channels are all non-empty after
/// preprocessing (the restricted-baseline filter).
pub fn filter_complete_profiles(
    profiles: &ProfileCollection,
    config: &PreprocessConfig,
) -> Result<ProfileCollection> {
    let records = profiles
        .records()
        .iter()
        .filter(|record| preprocess_profile(record, config).all_channels_populated())
        .cloned()
        .collect();
    ProfileCollection::new(records)
}

/// Per-fold artifacts: everything derived from the training split only.
pub struct FoldContext<S: Scalar> {
    pub fold: usize,
    pub embedding: EmbeddingModel<S>,
    pub idf: IdfTable<S>,
    pub train_ids: Vec<String>,
    pub test_ids: Vec<String>,
}

/// Train the fold's embedding and idf table from its training split and run
/// the leakage guard: no token unique to the test split may appear in the
/// vocabulary or the idf table.
pub fn build_fold_context<S: Scalar>(
    tokenized: &BTreeMap<String, TokenizedProfile>,
    plan: &FoldPlan,
    fold: usize,
    hp: &Hyperparams,
    workers: usize,
) -> Result<FoldContext<S>> {
    let mut train_ids = Vec::new();
    let mut test_ids = Vec::new();
    for (id, assigned) in plan.iter() {
        if assigned == fold {
            test_ids.push(id.to_string());
        } else {
            train_ids.push(id.to_string());
        }
    }
    let train_profiles: Vec<&TokenizedProfile> = train_ids
        .iter()
        .map(|id| tokenized.get(id).expect("validated id"))
        .collect();
    let streams: Vec<Vec<String>> = train_profiles
        .iter()
        .map(|p| p.merged_tokens().map(str::to_string).collect())
        .collect();
    let mut fold_hp = hp.clone();
    fold_hp.seed = seeding::derive_seed_indexed(hp.seed, "fold-embed", fold as u64);
    let embedding = train_skipgram_with_workers::<S>(&streams, &fold_hp, workers)
        .map_err(|e| e.in_fold(fold))?;
    let idf = build_idf::<S>(&train_profiles, embedding.vocab()).map_err(|e| e.in_fold(fold))?;

    // leakage guard
    let train_tokens: BTreeSet<&str> = train_profiles
        .iter()
        .flat_map(|p| p.merged_tokens())
        .collect();
    for id in &test_ids {
        let profile = tokenized.get(id).expect("validated id");
        for token in profile.merged_tokens() {
            if !train_tokens.contains(token)
                && (embedding.vocab().contains(token) || idf.contains(token))
            {
                return Err(Error::Leakage {
                    fold,
                    token: token.to_string(),
                });
            }
        }
    }
    Ok(FoldContext {
        fold,
        embedding,
        idf,
        train_ids,
        test_ids,
    })
}

fn featurize<S: Scalar>(
    profile: &TokenizedProfile,
    ctx: &FoldContext<S>,
    method: AggregationMethod,
) -> Result<Vec<S>> {
    if method == AggregationMethod::BaselineTf {
        let sparse = baseline_tf_vector::<S>(profile, ctx.embedding.vocab());
        let mut dense = vec![S::zero(); ctx.embedding.vocab().len()];
        if let FeatureValues::Sparse(map) = &sparse.values {
            for (token, &count) in map {
                let idx = ctx.embedding.vocab().get(token).expect("vocab token");
                dense[idx] = S::from_u32(count).expect("count fits scalar");
            }
        }
        Ok(dense)
    } else {
        let stats = compute_term_stats(profile, ctx.embedding.vocab(), &ctx.idf);
        let vector = aggregate(profile, &stats, &ctx.embedding, method)?;
        Ok(match vector.values {
            FeatureValues::Dense(v) => v,
            FeatureValues::Sparse(_) => unreachable!("embedding methods are dense"),
        })
    }
}

fn eval_cell<S: Scalar>(
    ctx: &FoldContext<S>,
    tokenized: &BTreeMap<String, TokenizedProfile>,
    method: AggregationMethod,
    config: &TrainConfig,
) -> Result<ConfusionCounts> {
    let mut x_train = Vec::with_capacity(ctx.train_ids.len());
    let mut y_train = Vec::with_capacity(ctx.train_ids.len());
    for id in &ctx.train_ids {
        let profile = tokenized.get(id).expect("validated id");
        x_train.push(featurize(profile, ctx, method)?);
        y_train.push(profile.label.expect("labeled"));
    }
    let mut fold_config = config.clone();
    fold_config.seed = seeding::derive_seed_indexed(
        config.seed,
        &format!("clf-{}-{}", method, config.algorithm),
        ctx.fold as u64,
    );
    let classifier = model::train(&x_train, &y_train, &fold_config)?;

    let mut confusion = ConfusionCounts::default();
    for id in &ctx.test_ids {
        let profile = tokenized.get(id).expect("validated id");
        let features = featurize(profile, ctx, method)?;
        let (predicted, _) = model::predict(&classifier, std::slice::from_ref(&features))?
            .pop()
            .expect("one prediction per row");
        let truth = profile.label.expect("labeled");
        match (truth, predicted) {
            (ClassLabel::Gang, ClassLabel::Gang) => confusion.true_pos += 1,
            (ClassLabel::NonGang, ClassLabel::Gang) => confusion.false_pos += 1,
            (ClassLabel::NonGang, ClassLabel::NonGang) => confusion.true_neg += 1,
            (ClassLabel::Gang, ClassLabel::NonGang) => confusion.false_neg += 1,
        }
    }
    Ok(confusion)
}

#[derive(Debug, Clone)]
pub struct CvOptions {
    pub workers: usize,
    pub require_all_channels: bool,
}

impl Default for CvOptions {
    fn default() -> Self {
        CvOptions {
            workers: 1,
            require_all_channels: false,
        }
    }
}

/// Run cross-validation for every (method, train-config) cell, training each
/// fold's embedding and idf table once and reusing them across cells.
/// Reports come back in methods-major order.
pub fn run_cv_grid<S: Scalar>(
    profiles: &ProfileCollection,
    pre_config: &PreprocessConfig,
    hp: &Hyperparams,
    methods: &[AggregationMethod],
    train_configs: &[TrainConfig],
    plan: &FoldPlan,
    options: &CvOptions,
) -> Result<Vec<EvaluationReport>> {
    if methods.is_empty() || train_configs.is_empty() {
        return Err(Error::validation("need at least one method and one classifier"));
    }
    let by_id: BTreeMap<&str, &crate::ingest::ProfileRecord> = profiles
        .records()
        .iter()
        .map(|r| (r.id.as_str(), r))
        .collect();
    let mut tokenized: BTreeMap<String, TokenizedProfile> = BTreeMap::new();
    for (id, fold) in plan.iter() {
        debug_assert!(fold < plan.k());
        let record = by_id.get(id).ok_or_else(|| {
            Error::validation(format!("fold plan references unknown profile id '{id}'"))
        })?;
        if record.label.is_none() {
            return Err(Error::validation(format!(
                "fold plan references unlabeled profile id '{id}'"
            )));
        }
        tokenized.insert(id.to_string(), preprocess_profile(record, pre_config));
    }

    let cells = methods.len() * train_configs.len();
    let mut confusions: Vec<Vec<ConfusionCounts>> = vec![Vec::with_capacity(plan.k()); cells];
    for fold in 0..plan.k() {
        let ctx = build_fold_context::<S>(&tokenized, plan, fold, hp, options.workers)?;
        for (mi, &method) in methods.iter().enumerate() {
            for (ai, config) in train_configs.iter().enumerate() {
                let confusion = eval_cell(&ctx, &tokenized, method, config)
                    .map_err(|e| e.in_fold(fold))?;
                confusions[mi * train_configs.len() + ai].push(confusion);
            }
        }
    }

    let mut reports = Vec::with_capacity(cells);
    for (mi, &method) in methods.iter().enumerate() {
        for (ai, config) in train_configs.iter().enumerate() {
            let descriptor = PipelineDescriptor {
                method,
                algorithm: config.algorithm,
                folds: plan.k(),
                stratified: plan.stratified(),
                require_all_channels: options.require_all_channels,
                fold_seed: plan.seed(),
                hyperparams: hp.clone(),
                train: config.clone(),
            };
            reports.push(assemble_report(
                descriptor,
                &confusions[mi * train_configs.len() + ai],
            )?);
        }
    }
    Ok(reports)
}

/// Single-cell convenience wrapper around [`run_cv_grid`].
pub fn run_cv<S: Scalar>(
    profiles: &ProfileCollection,
    pre_config: &PreprocessConfig,
    hp: &Hyperparams,
    method: AggregationMethod,
    train_config: &TrainConfig,
    plan: &FoldPlan,
) -> Result<EvaluationReport> {
    let mut reports = run_cv_grid::<S>(
        profiles,
        pre_config,
        hp,
        &[method],
        std::slice::from_ref(train_config),
        plan,
        &CvOptions::default(),
    )?;
    Ok(reports.pop().expect("one cell"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(n_gang: usize, n_non: usize) -> BTreeMap<String, ClassLabel> {
        let mut out = BTreeMap::new();
        for i in 0..n_gang {
            out.insert(format!("g{i:05}"), ClassLabel::Gang);
        }
        for i in 0..n_non {
            out.insert(format!("n{i:05}"), ClassLabel::NonGang);
        }
        out
    }

    #[test]
    fn folds_match_paper_scale_counts() {
        let plan = make_folds(&labels(400, 2865), 10, 3, true).unwrap();
        let mut gang_per_fold = vec![0usize; 10];
        let mut non_per_fold = vec![0usize; 10];
        for (id, fold) in plan.iter() {
            if id.starts_with('g') {
                gang_per_fold[fold] += 1;
            } else {
                non_per_fold[fold] += 1;
            }
        }
        assert!(gang_per_fold.iter().all(|&c| c == 40), "{gang_per_fold:?}");
        assert!(
            non_per_fold.iter().all(|&c| c == 286 || c == 287),
            "{non_per_fold:?}"
        );
        assert_eq!(non_per_fold.iter().sum::<usize>(), 2865);
        assert_eq!(plan.len(), 3265);
    }

    #[test]
    fn fold_k1_rejected() {
        assert!(make_folds(&labels(5, 5), 1, 0, true).is_err());
    }

    #[test]
    fn folds_deterministic() {
        let l = labels(20, 30);
        assert_eq!(
            make_folds(&l, 5, 9, true).unwrap(),
            make_folds(&l, 5, 9, true).unwrap()
        );
        assert_ne!(
            make_folds(&l, 5, 9, true).unwrap(),
            make_folds(&l, 5, 10, true).unwrap()
        );
    }

    #[test]
    fn fold_count_exceeding_class_rejected() {
        match make_folds(&labels(3, 50), 5, 0, true) {
            Err(Error::FoldCount { class, class_size, .. }) => {
                assert_eq!(class, "gang");
                assert_eq!(class_size, 3);
            }
            other => panic!("expected fold count error, got {other:?}"),
        }
    }

    #[test]
    fn folds_need_both_classes() {
        assert!(matches!(
            make_folds(&labels(10, 0), 2, 0, true),
            Err(Error::DegenerateLabels)
        ));
    }

    #[test]
    fn metrics_direct_formula() {
        let m = compute_metrics(&ConfusionCounts {
            true_pos: 5,
            false_pos: 5,
            true_neg: 0,
            false_neg: 0,
        });
        assert_eq!(m.gang.precision, 0.5);
        assert_eq!(m.gang.recall, 1.0);
        assert!((m.gang.f1 - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn metrics_zero_conventions() {
        let m = compute_metrics(&ConfusionCounts {
            true_pos: 0,
            false_pos: 0,
            true_neg: 10,
            false_neg: 0,
        });
        assert_eq!(m.gang.precision, 0.0);
        assert_eq!(m.gang.recall, 0.0);
        assert_eq!(m.gang.f1, 0.0);
        assert_eq!(m.non_gang.precision, 1.0);
        assert_eq!(m.non_gang.recall, 1.0);
        assert_eq!(m.non_gang.f1, 1.0);
    }

    #[test]
    fn harmonic_mean_of_published_numbers() {
        // differs from the published table's 0.7835, which averaged per fold
        let f1 = harmonic(0.8490, 0.7327);
        assert!((f1 - 0.7866).abs() < 5e-5, "{f1}");
    }

    fn dummy_descriptor() -> PipelineDescriptor {
        PipelineDescriptor {
            method: AggregationMethod::AvgSumCount,
            algorithm: Algorithm::Logreg,
            folds: 2,
            stratified: true,
            require_all_channels: false,
            fold_seed: 7,
            hyperparams: Hyperparams::default(),
            train: TrainConfig::default(),
        }
    }

    #[test]
    fn report_assembly_and_scopes() {
        let confusions = [
            ConfusionCounts {
                true_pos: 8,
                false_pos: 2,
                true_neg: 85,
                false_neg: 5,
            },
            ConfusionCounts {
                true_pos: 4,
                false_pos: 6,
                true_neg: 82,
                false_neg: 8,
            },
        ];
        let report = assemble_report(dummy_descriptor(), &confusions).unwrap();
        assert_eq!(report.folds.len(), 2);

        // pooled recomputable from stored confusions
        let mut pooled = ConfusionCounts::default();
        for fold in &report.folds {
            pooled.add(&fold.confusion);
        }
        assert_eq!(pooled, report.pooled.confusion);
        assert_eq!(compute_metrics(&pooled), report.pooled.metrics);

        // pooled f1 is the harmonic mean of pooled p and r
        let m = &report.pooled.metrics.gang;
        assert!((m.f1 - harmonic(m.precision, m.recall)).abs() < 1e-12);

        // macro is the mean of per-fold metrics
        let mean_f1 = report.folds.iter().map(|f| f.metrics.gang.f1).sum::<f64>() / 2.0;
        assert!((report.macro_avg.gang.f1 - mean_f1).abs() < 1e-12);
    }

    #[test]
    fn one_fold_macro_equals_pooled() {
        let confusions = [ConfusionCounts {
            true_pos: 7,
            false_pos: 3,
            true_neg: 88,
            false_neg: 2,
        }];
        let report = assemble_report(dummy_descriptor(), &confusions).unwrap();
        assert_eq!(report.macro_avg, report.pooled.metrics);
    }

    #[test]
    fn empty_fold_list_is_error() {
        assert!(matches!(
            assemble_report(dummy_descriptor(), &[]),
            Err(Error::NoFolds)
        ));
        assert!(matches!(render_comparison_table(&[]), Err(Error::NoFolds)));
    }

    #[test]
    fn report_json_round_trip() {
        let confusions = [ConfusionCounts {
            true_pos: 7,
            false_pos: 3,
            true_neg: 88,
            false_neg: 2,
        }];
        let report = assemble_report(dummy_descriptor(), &confusions).unwrap();
        let file = tempfile::NamedTempFile::new().unwrap();
        write_report_json(file.path(), &report).unwrap();
        let reloaded = read_report_json(file.path()).unwrap();
        assert_eq!(report, reloaded);
        assert!(render_report(&report, ReportFormat::Table).unwrap().contains("pooled"));
    }
}
