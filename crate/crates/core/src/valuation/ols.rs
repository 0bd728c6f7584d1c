//! Ordinary least squares via a sequential Householder QR.
//!
//! Columns are processed left to right; a column whose component orthogonal
//! to the already retained columns is negligible relative to its own norm is
//! dropped and reported in [`RegressionFit::dropped`]. With an intercept in
//! the first column this drops, e.g., the second copy of a duplicated column
//! or the last dummy of a complete set.

use indexmap::IndexMap;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Relative residual norm below which a column counts as linearly dependent.
const RANK_TOL: f64 = 1e-9;
const CONDITION_LIMIT: f64 = 1e10;

/// Named design matrix (rows are observations).
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub names: Vec<String>,
    pub matrix: DMatrix<f64>,
}

impl Design {
    /// Builds a design from named columns of equal length.
    pub fn from_columns(columns: Vec<(String, Vec<f64>)>) -> Result<Self> {
        let rows = columns.first().map_or(0, |c| c.1.len());
        if columns.iter().any(|c| c.1.len() != rows) {
            return Err(Error::Dimension("columns differ in length".into()));
        }
        let names = columns.iter().map(|c| c.0.clone()).collect();
        let matrix = DMatrix::from_fn(rows, columns.len(), |i, j| columns[j].1[i]);
        Ok(Self { names, matrix })
    }

    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    /// Subset of rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Design {
        Design {
            names: self.names.clone(),
            matrix: self.matrix.select_rows(rows.iter()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionFit {
    pub coefficients: IndexMap<String, f64>,
    pub standard_errors: IndexMap<String, f64>,
    /// Terms removed because they were linearly dependent on earlier ones.
    pub dropped: Vec<String>,
    pub r2: f64,
    pub adjusted_r2: f64,
    pub n_obs: usize,
    pub n_params: usize,
    pub condition_warning: Option<String>,
    pub warnings: Vec<String>,
}

impl RegressionFit {
    /// Predictions for a design whose columns carry the fitted term names.
    /// Dropped and unknown terms contribute nothing.
    pub fn predict(&self, design: &Design) -> Vec<f64> {
        let weights: Vec<f64> = design
            .names
            .iter()
            .map(|n| self.coefficients.get(n).copied().unwrap_or(0.0))
            .collect();
        (0..design.rows())
            .map(|i| {
                weights
                    .iter()
                    .enumerate()
                    .map(|(j, b)| b * design.matrix[(i, j)])
                    .sum()
            })
            .collect()
    }

    pub fn coefficient(&self, term: &str) -> Option<f64> {
        self.coefficients.get(term).copied()
    }

    pub fn std_error(&self, term: &str) -> Option<f64> {
        self.standard_errors.get(term).copied()
    }
}

/// Least-squares fit of `response` on `design` with classical standard
/// errors. R² is measured around the response mean.
pub fn ols_fit(design: &Design, response: &[f64]) -> Result<RegressionFit> {
    let (n, p) = design.matrix.shape();
    if response.len() != n {
        return Err(Error::Dimension(format!(
            "design has {n} rows but response has {}",
            response.len()
        )));
    }
    if n <= p {
        return Err(Error::InsufficientData(format!(
            "{n} observations for {p} parameters"
        )));
    }
    if design.names.len() != p {
        return Err(Error::Dimension("one name per design column required".into()));
    }

    let mut a = design.matrix.clone();
    let mut qty = DVector::from_column_slice(response);
    let mut retained: Vec<usize> = Vec::with_capacity(p);
    let mut dropped = Vec::new();
    let mut warnings = Vec::new();

    for j in 0..p {
        let r = retained.len();
        let original = design.matrix.column(j).norm();
        let tail_norm = a.column(j).rows(r, n - r).norm();
        if original == 0.0 || tail_norm <= RANK_TOL * original {
            dropped.push(design.names[j].clone());
            continue;
        }
        // Householder reflector H = I - 2 v v^T / (v^T v) zeroing a[r+1.., j].
        let alpha = if a[(r, j)] > 0.0 { -tail_norm } else { tail_norm };
        let mut v: DVector<f64> = a.column(j).rows(r, n - r).into_owned();
        v[0] -= alpha;
        let vtv = v.dot(&v);
        if vtv > 0.0 {
            for col in j..p {
                let mut c = a.column_mut(col);
                let mut c = c.rows_mut(r, n - r);
                let s = 2.0 * v.dot(&c) / vtv;
                c.axpy(-s, &v, 1.0);
            }
            let mut tail = qty.rows_mut(r, n - r);
            let s = 2.0 * v.dot(&tail) / vtv;
            tail.axpy(-s, &v, 1.0);
        }
        retained.push(j);
    }
    if !dropped.is_empty() {
        let msg = format!("dropped linearly dependent terms: {}", dropped.join(", "));
        tracing::warn!("{msg}");
        warnings.push(msg);
    }

    let q = retained.len();
    let r_mat = DMatrix::from_fn(q, q, |i, k| if i <= k { a[(i, retained[k])] } else { 0.0 });
    let beta = back_substitute(&r_mat, &qty.rows(0, q).into_owned());

    let fitted: Vec<f64> = (0..n)
        .map(|i| {
            retained
                .iter()
                .zip(beta.iter())
                .map(|(&j, b)| b * design.matrix[(i, j)])
                .sum()
        })
        .collect();
    let sse: f64 = response.iter().zip(&fitted).map(|(y, f)| (y - f).powi(2)).sum();
    let mean = response.iter().sum::<f64>() / n as f64;
    let sst: f64 = response.iter().map(|y| (y - mean).powi(2)).sum();
    let dof = (n - q) as f64;

    let mut coefficients: IndexMap<String, f64> = retained
        .iter()
        .zip(beta.iter())
        .map(|(&j, &b)| (design.names[j].clone(), b))
        .collect();
    let sigma2 = sse / dof;
    let r_inv = back_substitute_matrix(&r_mat);
    let mut standard_errors: IndexMap<String, f64> = retained
        .iter()
        .enumerate()
        .map(|(row, &j)| {
            let v: f64 = r_inv.row(row).iter().map(|x| x * x).sum();
            (design.names[j].clone(), (sigma2 * v).sqrt())
        })
        .collect();

    let r2 = if sst > 0.0 {
        1.0 - sse / sst
    } else {
        let msg = "zero-variance response; slopes set to zero".to_string();
        tracing::warn!("{msg}");
        warnings.push(msg);
        let intercept = retained.iter().copied().find(|&j| is_constant_nonzero(&design.matrix, j));
        for (&j, value) in retained.iter().zip(coefficients.values_mut()) {
            *value = match intercept {
                Some(c) if c == j => mean / design.matrix[(0, j)],
                _ => 0.0,
            };
        }
        for se in standard_errors.values_mut() {
            *se = 0.0;
        }
        0.0
    };
    let adjusted_r2 = 1.0 - (1.0 - r2) * (n as f64 - 1.0) / dof;

    let diag: Vec<f64> = (0..q).map(|i| r_mat[(i, i)].abs()).collect();
    let condition_warning = match (
        diag.iter().copied().fold(f64::NAN, f64::max),
        diag.iter().copied().fold(f64::NAN, f64::min),
    ) {
        (hi, lo) if lo > 0.0 && hi / lo > CONDITION_LIMIT => Some(format!(
            "ill-conditioned design (diagonal ratio {:.3e})",
            hi / lo
        )),
        _ => None,
    };

    Ok(RegressionFit {
        coefficients,
        standard_errors,
        dropped,
        r2,
        adjusted_r2,
        n_obs: n,
        n_params: q,
        condition_warning,
        warnings,
    })
}

fn is_constant_nonzero(m: &DMatrix<f64>, j: usize) -> bool {
    let first = m[(0, j)];
    first != 0.0 && m.column(j).iter().all(|&x| x == first)
}

fn back_substitute(r: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let q = r.nrows();
    let mut x = DVector::zeros(q);
    for i in (0..q).rev() {
        let s: f64 = (i + 1..q).map(|k| r[(i, k)] * x[k]).sum();
        x[i] = (b[i] - s) / r[(i, i)];
    }
    x
}

fn back_substitute_matrix(r: &DMatrix<f64>) -> DMatrix<f64> {
    let q = r.nrows();
    let mut inv = DMatrix::zeros(q, q);
    for c in 0..q {
        let e = DVector::from_fn(q, |i, _| if i == c { 1.0 } else { 0.0 });
        inv.set_column(c, &back_substitute(r, &e));
    }
    inv
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn design(cols: &[(&str, &[f64])]) -> Design {
        Design::from_columns(cols.iter().map(|(n, v)| (n.to_string(), v.to_vec())).collect()).unwrap()
    }

    /// Normal-equations solve via Gauss-Jordan, used only as an oracle.
    fn normal_equations(x: &DMatrix<f64>, y: &[f64]) -> Vec<f64> {
        let xtx = x.transpose() * x;
        let xty = x.transpose() * DVector::from_column_slice(y);
        let p = xtx.nrows();
        let mut aug = DMatrix::from_fn(p, p + 1, |i, j| if j < p { xtx[(i, j)] } else { xty[i] });
        for c in 0..p {
            let piv = (c..p).max_by(|&a, &b| aug[(a, c)].abs().total_cmp(&aug[(b, c)].abs())).unwrap();
            aug.swap_rows(c, piv);
            let d = aug[(c, c)];
            for j in 0..=p {
                aug[(c, j)] /= d;
            }
            for i in 0..p {
                if i != c {
                    let f = aug[(i, c)];
                    for j in 0..=p {
                        aug[(i, j)] -= f * aug[(c, j)];
                    }
                }
            }
        }
        (0..p).map(|i| aug[(i, p)]).collect()
    }

    #[test]
    fn exact_line() {
        let d = design(&[("const", &[1.0, 1.0, 1.0]), ("x", &[0.0, 1.0, 2.0])]);
        let f = ols_fit(&d, &[1.0, 3.0, 5.0]).unwrap();
        assert!((f.coefficients["const"] - 1.0).abs() < 1e-12);
        assert!((f.coefficients["x"] - 2.0).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
        assert!(f.adjusted_r2 <= f.r2 + 1e-15);
    }

    #[test]
    fn constant_response() {
        let d = design(&[("const", &[1.0; 4]), ("x", &[0.0, 1.0, 2.0, 5.0])]);
        let f = ols_fit(&d, &[3.0; 4]).unwrap();
        assert_eq!(f.coefficients["x"], 0.0);
        assert_eq!(f.coefficients["const"], 3.0);
        assert_eq!(f.r2, 0.0);
        assert!(!f.warnings.is_empty());
    }

    #[test]
    fn duplicated_column_is_dropped() {
        let x = [0.0, 1.0, 2.0, 3.0, 7.0];
        let z = [1.0, 0.0, 1.0, 1.0, 0.0];
        let y = [1.0, 2.5, 2.9, 4.2, 8.1];
        let full = design(&[("const", &[1.0; 5]), ("x", &x), ("x_copy", &x), ("z", &z)]);
        let reduced = design(&[("const", &[1.0; 5]), ("x", &x), ("z", &z)]);
        let f = ols_fit(&full, &y).unwrap();
        assert_eq!(f.dropped, vec!["x_copy".to_string()]);
        let oracle = normal_equations(&reduced.matrix, &y);
        for (name, expected) in ["const", "x", "z"].iter().zip(oracle) {
            assert!((f.coefficients[*name] - expected).abs() < 1e-10, "{name}");
        }
        assert!(!f.coefficients.contains_key("x_copy"));
    }

    #[test]
    fn too_few_rows_is_an_error() {
        let d = design(&[("const", &[1.0, 1.0]), ("x", &[0.0, 1.0])]);
        assert!(matches!(ols_fit(&d, &[1.0, 2.0]), Err(Error::InsufficientData(_))));
        assert!(matches!(ols_fit(&d, &[1.0]), Err(Error::Dimension(_))));
    }

    #[test]
    fn standard_errors_match_textbook_slope_formula() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let y = [1.2, 1.9, 3.2, 3.8, 5.3, 5.9];
        let f = ols_fit(&design(&[("const", &[1.0; 6]), ("x", &x)]), &y).unwrap();
        let mx = x.iter().sum::<f64>() / 6.0;
        let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
        let pred = f.predict(&design(&[("const", &[1.0; 6]), ("x", &x)]));
        let sse: f64 = y.iter().zip(&pred).map(|(a, b)| (a - b).powi(2)).sum();
        let se = (sse / 4.0 / sxx).sqrt();
        assert!((f.standard_errors["x"] - se).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn residuals_orthogonal_to_design(
            rows in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0), 6..40)
        ) {
            let n = rows.len();
            let x1: Vec<f64> = rows.iter().map(|r| r.0).collect();
            let x2: Vec<f64> = rows.iter().map(|r| r.1).collect();
            let y: Vec<f64> = rows.iter().map(|r| r.2).collect();
            let d = design(&[("const", &vec![1.0; n]), ("a", &x1), ("b", &x2)]);
            let f = ols_fit(&d, &y).unwrap();
            let pred = f.predict(&d);
            let resid: Vec<f64> = y.iter().zip(&pred).map(|(a, b)| a - b).collect();
            for j in 0..3 {
                if f.dropped.contains(&d.names[j]) { continue; }
                let dot: f64 = (0..n).map(|i| d.matrix[(i, j)] * resid[i]).sum();
                prop_assert!(dot.abs() < 1e-8);
            }
            prop_assert!(f.adjusted_r2 <= f.r2 + 1e-12 && f.r2 <= 1.0 + 1e-12);
        }

        #[test]
        fn consistent_extra_rows_leave_coefficients_unchanged(
            rows in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0, -0.5f64..0.5), 8..30),
            extra in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 1..10)
        ) {
            let n = rows.len();
            let x1: Vec<f64> = rows.iter().map(|r| r.0).collect();
            let x2: Vec<f64> = rows.iter().map(|r| r.1).collect();
            let y: Vec<f64> = rows.iter().map(|r| 1.0 + 2.0 * r.0 - r.1 + r.2).collect();
            let f = ols_fit(&design(&[("const", &vec![1.0; n]), ("a", &x1), ("b", &x2)]), &y).unwrap();
            prop_assume!(f.dropped.is_empty());

            let (c, a, b) = (f.coefficients["const"], f.coefficients["a"], f.coefficients["b"]);
            let mut x1e = x1.clone();
            let mut x2e = x2.clone();
            let mut ye = y.clone();
            for (u, v) in &extra {
                x1e.push(*u);
                x2e.push(*v);
                ye.push(c + a * u + b * v);
            }
            let g = ols_fit(&design(&[("const", &vec![1.0; x1e.len()]), ("a", &x1e), ("b", &x2e)]), &ye).unwrap();
            for t in ["const", "a", "b"] {
                prop_assert!((g.coefficients[t] - f.coefficients[t]).abs() < 1e-10);
            }
        }
    }
}
