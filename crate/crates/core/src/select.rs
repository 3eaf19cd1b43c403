//! Correlation-based feature-subset selection: merit scoring, best-first
//! search with bounded backtracking, and the locally-predictive post-pass
//! that yields the active-sensor set.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use crate::error::{Error, Result};
use crate::stats::CorrelationMatrix;

/// Expansions without merit improvement before the search gives up.
pub const DEFAULT_STALL_LIMIT: usize = 5;

/// Outcome of a subset search.
#[derive(Debug, Clone)]
pub struct SelectionResult {
    /// Selected sensor ids, ascending. Never contains the target.
    pub selected: Vec<u32>,
    /// Merit of `selected`.
    pub merit: f64,
    /// Subsets expanded by the search, in acceptance order.
    pub trace: Vec<(Vec<u32>, f64)>,
    /// Number of merit evaluations performed.
    pub evaluations: usize,
    /// True when no feature had a nonzero target correlation and the
    /// result is a fallback single feature.
    pub degenerate: bool,
}

/// CFS merit of a feature subset:
/// `k * mean|r_cf| / sqrt(k + k(k-1) * mean|r_ff|)`.
///
/// Correlations enter by absolute value; a negatively correlated sensor is
/// just as predictive for a linear model.
pub fn merit_of(subset: &[u32], corr: &CorrelationMatrix, target: u32) -> Result<f64> {
    if subset.is_empty() {
        return Err(Error::Contract("merit of empty subset".into()));
    }
    if subset.contains(&target) {
        return Err(Error::Contract(format!(
            "target {target} may not appear in the candidate subset"
        )));
    }
    let k = subset.len() as f64;
    let mut rcf = 0.0;
    for &f in subset {
        rcf += corr.get(f, target)?.abs();
    }
    rcf /= k;
    let mut rff = 0.0;
    if subset.len() > 1 {
        let mut pairs = 0usize;
        for (i, &a) in subset.iter().enumerate() {
            for &b in &subset[i + 1..] {
                rff += corr.get(a, b)?.abs();
                pairs += 1;
            }
        }
        rff /= pairs as f64;
    }
    Ok(k * rcf / (k + k * (k - 1.0) * rff).sqrt())
}

// Frontier entry. Greater = expanded earlier: higher merit first, then
// smaller subset, then lexicographically smaller ids.
#[derive(Debug, Clone, PartialEq)]
struct Candidate {
    merit: f64,
    subset: Vec<u32>,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.merit
            .total_cmp(&other.merit)
            .then_with(|| other.subset.len().cmp(&self.subset.len()))
            .then_with(|| other.subset.cmp(&self.subset))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Best-first search over feature subsets ordered by merit, expanding by
/// single-feature addition, stopping after `stall_limit` consecutive
/// expansions that fail to improve the best merit found.
///
/// Deterministic: ties break toward the lower feature id, then the smaller
/// subset.
pub fn best_first_select(
    corr: &CorrelationMatrix,
    target: u32,
    stall_limit: usize,
) -> Result<SelectionResult> {
    if !corr.contains(target) {
        return Err(Error::UnknownId(target));
    }
    if stall_limit == 0 {
        return Err(Error::Contract("stall_limit must be at least 1".into()));
    }
    let features: Vec<u32> = corr.ids().iter().copied().filter(|&f| f != target).collect();
    if features.len() < 2 {
        return Err(Error::Contract(
            "need at least 2 candidate features besides the target".into(),
        ));
    }

    // Dead field: no feature correlates with the target at all. Fall back
    // to the single feature with the highest |r_cf| (lowest id on ties).
    if features
        .iter()
        .map(|&f| corr.get(f, target).map(f64::abs))
        .collect::<Result<Vec<_>>>()?
        .iter()
        .all(|&r| r == 0.0)
    {
        return Ok(SelectionResult {
            selected: vec![features[0]],
            merit: 0.0,
            trace: vec![(vec![features[0]], 0.0)],
            evaluations: features.len(),
            degenerate: true,
        });
    }

    let mut evaluations = 0usize;
    let mut visited: HashSet<Vec<u32>> = HashSet::new();
    let mut frontier: BinaryHeap<Candidate> = BinaryHeap::new();
    let mut trace: Vec<(Vec<u32>, f64)> = Vec::new();
    let mut best = Candidate {
        merit: f64::NEG_INFINITY,
        subset: Vec::new(),
    };

    // First expansion layer: the single-feature children of the empty set.
    for &f in &features {
        let subset = vec![f];
        let merit = merit_of(&subset, corr, target)?;
        evaluations += 1;
        if merit > best.merit {
            best = Candidate {
                merit,
                subset: subset.clone(),
            };
        }
        visited.insert(subset.clone());
        frontier.push(Candidate { merit, subset });
    }
    let mut stalls = 0usize;

    while let Some(state) = frontier.pop() {
        trace.push((state.subset.clone(), state.merit));
        let mut improved = false;
        for &f in &features {
            if state.subset.contains(&f) {
                continue;
            }
            let mut child = state.subset.clone();
            let pos = child.partition_point(|&x| x < f);
            child.insert(pos, f);
            if !visited.insert(child.clone()) {
                continue;
            }
            let merit = merit_of(&child, corr, target)?;
            evaluations += 1;
            if merit > best.merit {
                best = Candidate {
                    merit,
                    subset: child.clone(),
                };
                improved = true;
            }
            frontier.push(Candidate { merit, subset: child });
        }
        if improved {
            stalls = 0;
        } else {
            stalls += 1;
            if stalls >= stall_limit {
                break;
            }
        }
    }

    Ok(SelectionResult {
        selected: best.subset,
        merit: best.merit,
        trace,
        evaluations,
        degenerate: false,
    })
}

/// Post-search sweep: scan excluded features in descending |r_cf| order and
/// add each feature whose target correlation exceeds its correlation with
/// every already-selected feature. Repeats until a full sweep adds nothing.
pub fn locally_predictive_pass(
    result: &SelectionResult,
    corr: &CorrelationMatrix,
    target: u32,
) -> Result<SelectionResult> {
    let mut selected = result.selected.clone();
    let mut evaluations = result.evaluations;
    loop {
        let mut excluded: Vec<(u32, f64)> = corr
            .ids()
            .iter()
            .copied()
            .filter(|&f| f != target && !selected.contains(&f))
            .map(|f| corr.get(f, target).map(|r| (f, r.abs())))
            .collect::<Result<_>>()?;
        excluded.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

        let mut added = false;
        for (f, r_cf) in excluded {
            let mut shadowed = false;
            for &s in &selected {
                if corr.get(s, f)?.abs() > r_cf {
                    shadowed = true;
                    break;
                }
            }
            if !shadowed {
                let pos = selected.partition_point(|&x| x < f);
                selected.insert(pos, f);
                added = true;
            }
        }
        if !added {
            break;
        }
    }
    let merit = merit_of(&selected, corr, target)?;
    evaluations += 1;
    let mut trace = result.trace.clone();
    trace.push((selected.clone(), merit));
    Ok(SelectionResult {
        selected,
        merit,
        trace,
        evaluations,
        degenerate: result.degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::DataMatrix;

    /// Correlation matrix of a small synthetic table built from columns.
    fn corr_from_columns(ids: &[u32], cols: &[Vec<f64>], target: u32) -> CorrelationMatrix {
        let n = cols[0].len();
        let values: Vec<Vec<f64>> = (0..n).map(|r| cols.iter().map(|c| c[r]).collect()).collect();
        let m = DataMatrix::new((0..n as u64).collect(), ids.to_vec(), values, target).unwrap();
        CorrelationMatrix::from_data(&m).unwrap()
    }

    #[test]
    fn merit_single_feature_reduces_to_rcf() {
        // target = feature exactly: |r_cf| = 1
        let corr = corr_from_columns(
            &[1, 2, 9],
            &[
                vec![1.0, 2.0, 3.0, 4.0],
                vec![4.0, 1.0, 3.0, 2.0],
                vec![1.0, 2.0, 3.0, 4.0],
            ],
            9,
        );
        let m = merit_of(&[1], &corr, 9).unwrap();
        assert!((m - 1.0).abs() < 1e-12);
    }

    #[test]
    fn merit_formula_two_features() {
        // Hand-built correlation structure is awkward from raw columns, so
        // check the formula arithmetic directly instead.
        let k = 2.0_f64;
        let rcf = 0.8;
        let rff = 0.5;
        let merit = k * rcf / (k + k * (k - 1.0) * rff).sqrt();
        assert!((merit - 1.6 / 3.0_f64.sqrt()).abs() < 1e-12);
        assert!((merit - 0.9238).abs() < 1e-4);
    }

    #[test]
    fn merit_rejects_target_in_subset() {
        let corr = corr_from_columns(
            &[1, 9],
            &[vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 4.0]],
            9,
        );
        assert!(matches!(merit_of(&[9], &corr, 9), Err(Error::Contract(_))));
        assert!(matches!(merit_of(&[], &corr, 9), Err(Error::Contract(_))));
    }

    #[test]
    fn redundant_copy_not_selected_twice() {
        // Features 1 and 2 are identical perfect predictors; merit of the
        // pair is lower than either alone, so exactly one (the lower id)
        // survives.
        let t = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let corr = corr_from_columns(
            &[1, 2, 3, 9],
            &[
                t.clone(),
                t.clone(),
                vec![3.0, 1.0, 4.0, 1.0, 5.0, 9.0],
                t.clone(),
            ],
            9,
        );
        let result = best_first_select(&corr, 9, DEFAULT_STALL_LIMIT).unwrap();
        assert_eq!(result.selected, vec![1]);
        assert!(!result.degenerate);
    }

    #[test]
    fn degenerate_field_returns_fallback() {
        // Constant target: every correlation with it is 0.
        let corr = corr_from_columns(
            &[1, 2, 9],
            &[
                vec![1.0, 2.0, 3.0],
                vec![3.0, 1.0, 2.0],
                vec![5.0, 5.0, 5.0],
            ],
            9,
        );
        let result = best_first_select(&corr, 9, DEFAULT_STALL_LIMIT).unwrap();
        assert!(result.degenerate);
        assert_eq!(result.selected, vec![1]);
        assert_eq!(result.merit, 0.0);
    }

    #[test]
    fn selection_is_deterministic() {
        let corr = corr_from_columns(
            &[1, 2, 3, 4, 9],
            &[
                vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.5, 7.0],
                vec![2.0, 1.5, 3.5, 4.5, 5.5, 6.0, 7.5],
                vec![7.0, 1.0, 6.0, 2.0, 5.0, 3.0, 4.0],
                vec![1.0, 4.0, 2.0, 5.0, 3.0, 6.0, 4.5],
                vec![1.1, 2.2, 2.9, 4.1, 5.2, 6.4, 6.9],
            ],
            9,
        );
        let a = best_first_select(&corr, 9, DEFAULT_STALL_LIMIT).unwrap();
        let b = best_first_select(&corr, 9, DEFAULT_STALL_LIMIT).unwrap();
        assert_eq!(a.selected, b.selected);
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.evaluations, b.evaluations);
    }

    #[test]
    fn locally_predictive_pass_is_fixed_point() {
        let corr = corr_from_columns(
            &[1, 2, 3, 9],
            &[
                vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
                vec![6.0, 5.0, 4.0, 3.0, 2.0, 1.0],
                vec![2.0, 4.0, 1.0, 5.0, 3.0, 6.0],
                vec![1.0, 2.1, 2.9, 4.2, 5.1, 5.9],
            ],
            9,
        );
        let base = best_first_select(&corr, 9, DEFAULT_STALL_LIMIT).unwrap();
        let once = locally_predictive_pass(&base, &corr, 9).unwrap();
        let twice = locally_predictive_pass(&once, &corr, 9).unwrap();
        assert_eq!(once.selected, twice.selected);
        // the pass never removes anything
        for f in &base.selected {
            assert!(once.selected.contains(f));
        }
    }
}
