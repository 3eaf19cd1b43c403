//! Ordinary-least-squares prediction of the sink sensor with
//! Akaike-criterion stepwise attribute elimination.

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};

use crate::dataset::DataMatrix;
use crate::error::{Error, Result};
use crate::stats::sample_sd;

/// Singular values below `PIVOT_TOL * largest` are treated as zero,
/// giving the minimum-norm solution on rank-deficient designs
/// (duplicate sensors produce collinear columns in real logs).
const PIVOT_TOL: f64 = 1e-10;

/// Fitted linear predictor for the sink sensor.
#[derive(Debug, Clone)]
pub struct LinearModel {
    /// Retained sensor ids, in fit order.
    pub attribute_ids: Vec<u32>,
    /// One coefficient per retained attribute.
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    /// Residual sum of squares on the training rows.
    pub rss: f64,
    pub aic: f64,
    pub n_train: usize,
    /// Wall-clock time of the fit (for stepwise fits, the whole procedure).
    pub build_time: Duration,
}

impl LinearModel {
    /// `intercept + sum(coefficient * value)` over the retained attributes.
    pub fn predict(&self, row: &HashMap<u32, f64>) -> Result<f64> {
        let mut y = self.intercept;
        for (id, coef) in self.attribute_ids.iter().zip(&self.coefficients) {
            let v = row
                .get(id)
                .ok_or_else(|| Error::Contract(format!("row is missing attribute {id}")))?;
            y += coef * v;
        }
        Ok(y)
    }

    /// Predict from a matrix row by column lookup.
    pub fn predict_row(&self, matrix: &DataMatrix, row: usize) -> Result<f64> {
        let mut y = self.intercept;
        for (id, coef) in self.attribute_ids.iter().zip(&self.coefficients) {
            y += coef * matrix.value(row, matrix.column_index(*id)?);
        }
        Ok(y)
    }
}

/// AIC in the least-squares form `n * ln(rss/n) + 2p`, with `p` counting
/// the intercept. A perfect fit (rss = 0) returns negative infinity so it
/// dominates every comparison.
pub fn aic_of(rss: f64, n: usize, p: usize) -> Result<f64> {
    if p < 1 || n <= p {
        return Err(Error::Contract(format!(
            "aic requires n > p >= 1, got n={n} p={p}"
        )));
    }
    if rss < 0.0 {
        return Err(Error::Contract("negative rss".into()));
    }
    if rss == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(n as f64 * (rss / n as f64).ln() + 2.0 * p as f64)
}

/// Least-squares fit of the target on `features` plus an intercept.
/// Rank-deficient designs get the minimum-norm solution.
pub fn fit_ols(matrix: &DataMatrix, features: &[u32]) -> Result<LinearModel> {
    let start = Instant::now();
    let n = matrix.n_rows();
    let p = features.len();
    if features.contains(&matrix.target_id()) {
        return Err(Error::Contract("target cannot be a regressor".into()));
    }
    if n < p + 1 {
        return Err(Error::Underdetermined(format!(
            "{n} rows cannot determine {p} coefficients plus an intercept"
        )));
    }

    let cols: Vec<Vec<f64>> = features
        .iter()
        .map(|&id| matrix.column_by_id(id))
        .collect::<Result<_>>()?;
    let design = DMatrix::from_fn(n, p + 1, |r, c| if c == 0 { 1.0 } else { cols[c - 1][r] });
    let y = DVector::from_vec(matrix.target_column());

    let svd = design.clone().svd(true, true);
    let max_sv = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let beta = svd
        .solve(&y, PIVOT_TOL * max_sv)
        .map_err(|e| Error::Contract(format!("svd solve failed: {e}")))?;

    let residuals = &y - &design * &beta;
    let rss = residuals.norm_squared();
    let aic = aic_of(rss, n, p + 1).unwrap_or(f64::NEG_INFINITY);

    Ok(LinearModel {
        attribute_ids: features.to_vec(),
        coefficients: beta.iter().skip(1).copied().collect(),
        intercept: beta[0],
        rss,
        aic,
        n_train: n,
        build_time: start.elapsed(),
    })
}

/// Backward stepwise elimination under AIC.
///
/// Each step removes, tentatively, the attribute with the smallest
/// absolute standardized coefficient (coefficient times the feature's
/// sample standard deviation, ties to the lower id) and keeps the removal
/// iff AIC strictly decreases. Stops at the first non-improving removal
/// or when one attribute remains.
pub fn stepwise_eliminate(matrix: &DataMatrix, features: &[u32]) -> Result<LinearModel> {
    let start = Instant::now();
    let mut feats = features.to_vec();
    let mut model = fit_ols(matrix, &feats)?;

    while feats.len() > 1 {
        // smallest |coefficient * sd|, tie toward the lower sensor id
        let mut victim: Option<(usize, f64)> = None;
        for (i, (&id, &coef)) in feats.iter().zip(&model.coefficients).enumerate() {
            let sd = sample_sd(&matrix.column_by_id(id)?);
            let score = (coef * sd).abs();
            let better = match victim {
                None => true,
                Some((vi, vs)) => score < vs || (score == vs && id < feats[vi]),
            };
            if better {
                victim = Some((i, score));
            }
        }
        let (idx, _) = victim.expect("non-empty feature list");

        let mut reduced = feats.clone();
        reduced.remove(idx);
        let candidate = fit_ols(matrix, &reduced)?;
        if candidate.aic < model.aic {
            feats = reduced;
            model = candidate;
        } else {
            break;
        }
    }

    model.build_time = start.elapsed();
    Ok(model)
}

/// Write a model as delimited text: one header line
/// `target_id,intercept,aic,n_train`, then `sensor_id,coefficient` lines.
pub fn write_model<W: Write>(model: &LinearModel, target_id: u32, mut out: W) -> Result<()> {
    writeln!(
        out,
        "{target_id},{},{},{}",
        model.intercept, model.aic, model.n_train
    )?;
    for (id, coef) in model.attribute_ids.iter().zip(&model.coefficients) {
        writeln!(out, "{id},{coef}")?;
    }
    Ok(())
}

/// Read a model written by [`write_model`]. Returns (target_id, model);
/// the stored model carries no rss or build time.
pub fn read_model<R: BufRead>(reader: R) -> Result<(u32, LinearModel)> {
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::parse(1, "empty model file"))??;
    let parts: Vec<&str> = header.split(',').collect();
    if parts.len() != 4 {
        return Err(Error::parse(1, "expected target_id,intercept,aic,n_train"));
    }
    let target_id: u32 = parts[0]
        .parse()
        .map_err(|_| Error::parse(1, "bad target id"))?;
    let intercept: f64 = parts[1]
        .parse()
        .map_err(|_| Error::parse(1, "bad intercept"))?;
    let aic: f64 = parts[2].parse().map_err(|_| Error::parse(1, "bad aic"))?;
    let n_train: usize = parts[3]
        .parse()
        .map_err(|_| Error::parse(1, "bad n_train"))?;
    let mut attribute_ids = Vec::new();
    let mut coefficients = Vec::new();
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (id, coef) = line
            .split_once(',')
            .ok_or_else(|| Error::parse(lineno, "expected sensor_id,coefficient"))?;
        attribute_ids.push(
            id.parse()
                .map_err(|_| Error::parse(lineno, "bad sensor id"))?,
        );
        coefficients.push(
            coef.parse()
                .map_err(|_| Error::parse(lineno, "bad coefficient"))?,
        );
    }
    Ok((
        target_id,
        LinearModel {
            attribute_ids,
            coefficients,
            intercept,
            rss: f64::NAN,
            aic,
            n_train,
            build_time: Duration::ZERO,
        },
    ))
}
