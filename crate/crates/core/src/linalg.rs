//! Dense least-squares helpers shared by the regression models.

use nalgebra::{DMatrix, DVector};

/// Rank cutoff: machine epsilon × largest dimension × largest singular value.
pub fn pinv_tolerance(rows: usize, cols: usize, largest_singular_value: f64) -> f64 {
    f64::EPSILON * rows.max(cols) as f64 * largest_singular_value
}

#[derive(Debug, Clone)]
pub struct MinNormSolution {
    pub weights: DVector<f64>,
    pub rank: usize,
    /// All singular values, nonincreasing.
    pub singular_values: Vec<f64>,
    pub tolerance: f64,
}

/// Minimum-norm minimizer of `||a w - b||` via the SVD.
///
/// Singular values at or below [`pinv_tolerance`] are treated as zero, so
/// the result lies in the numerical row space of `a`.
pub fn min_norm_lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> MinNormSolution {
    let (rows, cols) = a.shape();
    assert_eq!(rows, b.len(), "right-hand side length must match row count");
    if rows == 0 || cols == 0 {
        return MinNormSolution { weights: DVector::zeros(cols), rank: 0, singular_values: Vec::new(), tolerance: 0.0 };
    }
    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let largest = order.first().map_or(0.0, |&i| svd.singular_values[i]);
    let tolerance = pinv_tolerance(rows, cols, largest);

    let mut weights = DVector::zeros(cols);
    let mut rank = 0;
    for &k in &order {
        let s = svd.singular_values[k];
        if s <= tolerance {
            break;
        }
        rank += 1;
        let coef = u.column(k).dot(b) / s;
        weights.axpy(coef, &v_t.row(k).transpose(), 1.0);
    }
    let singular_values = order.iter().map(|&k| svd.singular_values[k]).collect();
    MinNormSolution { weights, rank, singular_values, tolerance }
}
