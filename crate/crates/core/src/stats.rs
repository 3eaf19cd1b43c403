//! Deterministic numeric primitives shared by selection and regression:
//! means, standard deviations, Pearson correlation, standardization and
//! cached correlation matrices.

use std::collections::HashMap;

use crate::dataset::DataMatrix;
use crate::error::{Error, Result};

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (n-1 convention).
pub fn sample_sd(values: &[f64]) -> f64 {
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (values.len() as f64 - 1.0)).sqrt()
}

/// Product-moment correlation coefficient.
///
/// A constant vector carries no linear information, so correlation against
/// it is defined as exactly 0. That keeps dead sensors out of selection
/// without a divide-by-zero.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Dimension(format!(
            "pearson: lengths {} and {} differ",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::Dimension(
            "pearson: need at least 2 observations".into(),
        ));
    }
    let mx = mean(x);
    let my = mean(y);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - mx;
        let dy = yi - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(0.0);
    }
    // Clamp: rounding can push |r| a hair past 1 on exactly collinear input.
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Shift to mean 0 and scale to sample standard deviation 1.
/// Constant input maps to all-zeros.
pub fn standardize(x: &[f64]) -> Result<Vec<f64>> {
    if x.len() < 2 {
        return Err(Error::Dimension(
            "standardize: need at least 2 observations".into(),
        ));
    }
    let m = mean(x);
    let sd = sample_sd(x);
    if sd == 0.0 {
        return Ok(vec![0.0; x.len()]);
    }
    Ok(x.iter().map(|v| (v - m) / sd).collect())
}

/// All pairwise Pearson coefficients of a matrix's columns, computed once.
#[derive(Debug, Clone)]
pub struct CorrelationMatrix {
    ids: Vec<u32>,
    r: Vec<Vec<f64>>,
    index: HashMap<u32, usize>,
}

impl CorrelationMatrix {
    pub fn from_data(matrix: &DataMatrix) -> Result<Self> {
        let ids = matrix.sensor_ids().to_vec();
        if ids.len() < 2 {
            return Err(Error::Dimension(
                "correlation matrix needs at least 2 columns".into(),
            ));
        }
        let cols: Vec<Vec<f64>> = (0..ids.len()).map(|c| matrix.column(c)).collect();
        let n = ids.len();
        let mut r = vec![vec![0.0; n]; n];
        for i in 0..n {
            r[i][i] = if sample_sd(&cols[i]) == 0.0 { 0.0 } else { 1.0 };
            for j in (i + 1)..n {
                let v = pearson(&cols[i], &cols[j])?;
                r[i][j] = v;
                r[j][i] = v;
            }
        }
        let index = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        Ok(CorrelationMatrix { ids, r, index })
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn contains(&self, id: u32) -> bool {
        self.index.contains_key(&id)
    }

    /// Coefficient between two column ids.
    pub fn get(&self, a: u32, b: u32) -> Result<f64> {
        let ia = *self.index.get(&a).ok_or(Error::UnknownId(a))?;
        let ib = *self.index.get(&b).ok_or(Error::UnknownId(b))?;
        Ok(self.r[ia][ib])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pearson_perfect_positive() {
        let r = pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pearson_perfect_negative() {
        let r = pearson(&[1.0, 2.0, 3.0], &[6.0, 4.0, 2.0]).unwrap();
        assert!((r + 1.0).abs() < 1e-12);
    }

    #[test]
    fn pearson_hand_computed() {
        // Frozen from direct evaluation of the product-moment formula.
        let r = pearson(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert!((r - 0.8).abs() < 1e-12);
    }

    #[test]
    fn pearson_constant_vector_is_zero() {
        let r = pearson(&[5.0, 5.0, 5.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn pearson_length_mismatch() {
        assert!(pearson(&[1.0, 2.0], &[1.0]).is_err());
        assert!(pearson(&[1.0], &[2.0]).is_err());
    }

    #[test]
    fn standardize_two_points() {
        // mean 2, sample sd sqrt(2)
        let z = standardize(&[1.0, 3.0]).unwrap();
        let e = 1.0 / 2.0_f64.sqrt();
        assert!((z[0] + e).abs() < 1e-12);
        assert!((z[1] - e).abs() < 1e-12);
    }

    #[test]
    fn standardize_constant() {
        assert_eq!(standardize(&[5.0, 5.0, 5.0]).unwrap(), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn standardize_idempotent() {
        let x = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0];
        let once = standardize(&x).unwrap();
        let twice = standardize(&once).unwrap();
        for (a, b) in once.iter().zip(&twice) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
