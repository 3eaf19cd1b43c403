//! k-fold cross-validation, RMSE in absolute and percent form, and
//! with/without-selection scenario comparison.

use std::str::FromStr;
use std::time::Duration;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::DataMatrix;
use crate::error::{Error, Result};
use crate::regress::stepwise_eliminate;
use crate::select::{best_first_select, locally_predictive_pass};
use crate::sim::ltef;
use crate::stats::CorrelationMatrix;

/// How rows are dealt into folds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FoldScheme {
    Contiguous,
    Shuffled,
    /// Rows sorted by target value and dealt round-robin, so every fold
    /// spans the target's range.
    TargetStratified,
}

impl FromStr for FoldScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "contiguous" => Ok(FoldScheme::Contiguous),
            "shuffled" => Ok(FoldScheme::Shuffled),
            "target_stratified" => Ok(FoldScheme::TargetStratified),
            other => Err(Error::Config(format!("unknown fold scheme '{other}'"))),
        }
    }
}

/// A complete, balanced assignment of rows to folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    pub k: usize,
    /// Fold index per row.
    pub assignments: Vec<usize>,
    pub seed: u64,
    pub scheme: FoldScheme,
}

impl FoldPlan {
    pub fn n_rows(&self) -> usize {
        self.assignments.len()
    }

    /// Row indices of one fold, ascending.
    pub fn fold_rows(&self, fold: usize) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter(|(_, &f)| f == fold)
            .map(|(r, _)| r)
            .collect()
    }
}

/// Deal `targets.len()` rows into `k` folds whose sizes differ by at most 1.
/// `targets` supplies the values for stratification (and the row count for
/// the other schemes). Deterministic given the seed.
pub fn make_folds(k: usize, scheme: FoldScheme, seed: u64, targets: &[f64]) -> Result<FoldPlan> {
    let n = targets.len();
    if k < 2 || k > n {
        return Err(Error::Contract(format!(
            "k must satisfy 2 <= k <= {n}, got {k}"
        )));
    }
    let mut assignments = vec![0usize; n];
    match scheme {
        FoldScheme::Contiguous => {
            // first n % k folds get the extra row
            let base = n / k;
            let extra = n % k;
            let mut row = 0;
            for fold in 0..k {
                let size = base + usize::from(fold < extra);
                for _ in 0..size {
                    assignments[row] = fold;
                    row += 1;
                }
            }
        }
        FoldScheme::Shuffled => {
            let mut order: Vec<usize> = (0..n).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            order.shuffle(&mut rng);
            for (i, &row) in order.iter().enumerate() {
                assignments[row] = i % k;
            }
        }
        FoldScheme::TargetStratified => {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| targets[a].total_cmp(&targets[b]).then(a.cmp(&b)));
            for (i, &row) in order.iter().enumerate() {
                assignments[row] = i % k;
            }
        }
    }
    Ok(FoldPlan {
        k,
        assignments,
        seed,
        scheme,
    })
}

/// RMSE in target units and, when the actual mean is nonzero, as a
/// percentage of it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rmse {
    pub absolute: f64,
    pub percent: Option<f64>,
}

pub fn rmse(predictions: &[f64], actuals: &[f64]) -> Result<Rmse> {
    if predictions.len() != actuals.len() {
        return Err(Error::Contract(format!(
            "rmse: {} predictions vs {} actuals",
            predictions.len(),
            actuals.len()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::Contract("rmse of zero predictions".into()));
    }
    let mse: f64 = predictions
        .iter()
        .zip(actuals)
        .map(|(p, a)| (p - a) * (p - a))
        .sum::<f64>()
        / predictions.len() as f64;
    let absolute = mse.sqrt();
    let mean_actual = actuals.iter().sum::<f64>() / actuals.len() as f64;
    let percent = if mean_actual == 0.0 {
        None
    } else {
        Some(100.0 * absolute / mean_actual.abs())
    };
    Ok(Rmse { absolute, percent })
}

/// Cross-validation outcome: errors pooled over all held-out rows, not
/// averaged per fold.
#[derive(Debug, Clone)]
pub struct CvResult {
    pub pooled: Rmse,
    pub per_fold: Vec<Rmse>,
    pub mean_build_time: Duration,
}

/// Train a stepwise model on k-1 folds and score the held-out fold, for
/// every fold; pool the squared errors over all held-out rows in row order.
pub fn cross_validate(matrix: &DataMatrix, features: &[u32], plan: &FoldPlan) -> Result<CvResult> {
    if plan.n_rows() != matrix.n_rows() {
        return Err(Error::Contract(format!(
            "fold plan covers {} rows, matrix has {}",
            plan.n_rows(),
            matrix.n_rows()
        )));
    }
    let actuals = matrix.target_column();
    // predictions keyed by row index so pooling order is fixed
    let mut predictions = vec![f64::NAN; matrix.n_rows()];
    let mut per_fold = Vec::with_capacity(plan.k);
    let mut total_build = Duration::ZERO;

    for fold in 0..plan.k {
        let held: Vec<usize> = plan.fold_rows(fold);
        let train: Vec<usize> = (0..matrix.n_rows())
            .filter(|r| plan.assignments[*r] != fold)
            .collect();
        if train.len() < features.len() + 2 {
            return Err(Error::FoldTooSmall(format!(
                "fold {fold} leaves {} training rows for {} features",
                train.len(),
                features.len()
            )));
        }
        let train_matrix = matrix.subset_rows(&train)?;
        let model = stepwise_eliminate(&train_matrix, features)?;
        total_build += model.build_time;

        let mut fold_pred = Vec::with_capacity(held.len());
        let mut fold_act = Vec::with_capacity(held.len());
        for &r in &held {
            let p = model.predict_row(matrix, r)?;
            predictions[r] = p;
            fold_pred.push(p);
            fold_act.push(actuals[r]);
        }
        per_fold.push(rmse(&fold_pred, &fold_act)?);
    }

    let pooled = rmse(&predictions, &actuals)?;
    Ok(CvResult {
        pooled,
        per_fold,
        mean_build_time: total_build / plan.k as u32,
    })
}

/// One Table-style row: a scenario evaluated with and (optionally)
/// without sensor selection.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub scenario: String,
    pub n_sensors: usize,
    pub n_train: usize,
    pub k: usize,
    pub selected_ids: Option<Vec<u32>>,
    pub rmse_all: Rmse,
    pub rmse_selected: Option<Rmse>,
    /// Life-time extension factor: total sensors / participating sensors.
    pub ltef: Option<f64>,
    pub build_time_all: Duration,
    pub build_time_selected: Option<Duration>,
}

/// Fold count by training size: small windows get k=2, mid-size k=5,
/// large k=10.
pub fn auto_k(n_rows: usize) -> usize {
    if n_rows < 100 {
        2
    } else if n_rows < 3000 {
        5
    } else {
        10
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioOptions {
    pub scenario: String,
    /// None = pick by `auto_k`.
    pub k: Option<usize>,
    pub scheme: FoldScheme,
    pub seed: u64,
    pub stall_limit: usize,
}

impl Default for ScenarioOptions {
    fn default() -> Self {
        ScenarioOptions {
            scenario: "scenario".into(),
            k: None,
            scheme: FoldScheme::TargetStratified,
            seed: 0,
            stall_limit: crate::select::DEFAULT_STALL_LIMIT,
        }
    }
}

/// Evaluate one window with all sensors and, when `with_selection` is set,
/// with the CFS-selected subset as well, sharing one fold plan.
///
/// Selection runs once on the whole window, not per fold, mirroring a
/// single selected set per scenario; the resulting optimism is noted in
/// the emitted summary.
pub fn run_scenario(
    matrix: &DataMatrix,
    opts: &ScenarioOptions,
    with_selection: bool,
) -> Result<ExperimentReport> {
    let k = opts.k.unwrap_or_else(|| auto_k(matrix.n_rows()));
    let plan = make_folds(k, opts.scheme, opts.seed, &matrix.target_column())?;

    let all_features = matrix.feature_ids();
    let cv_all = cross_validate(matrix, &all_features, &plan)?;

    let (selected_ids, rmse_selected, ltef_value, build_selected) = if with_selection {
        let corr = CorrelationMatrix::from_data(matrix)?;
        let base = best_first_select(&corr, matrix.target_id(), opts.stall_limit)?;
        let refined = locally_predictive_pass(&base, &corr, matrix.target_id())?;
        let cv_sel = cross_validate(matrix, &refined.selected, &plan)?;
        let factor = ltef(matrix.n_cols(), refined.selected.len())?;
        (
            Some(refined.selected),
            Some(cv_sel.pooled),
            Some(factor),
            Some(cv_sel.mean_build_time),
        )
    } else {
        (None, None, None, None)
    };

    Ok(ExperimentReport {
        scenario: opts.scenario.clone(),
        n_sensors: matrix.n_cols(),
        n_train: matrix.n_rows(),
        k,
        selected_ids,
        rmse_all: cv_all.pooled,
        rmse_selected,
        ltef: ltef_value,
        build_time_all: cv_all.mean_build_time,
        build_time_selected: build_selected,
    })
}
