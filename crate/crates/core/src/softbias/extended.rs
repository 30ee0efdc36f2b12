//! Kernel-form ridge solve carried out in 320-bit binary floating point.
//!
//! At very small noise variance the primal normal equations of a degree-150
//! basis are hopeless in double precision. The dual system
//! `(K0 + 2σ²I) a = y`, `K0 = X Λ⁻¹ Xᵀ`, only has `n` unknowns, and with
//! enough working bits its solution is accurate even when `K0` is
//! numerically singular at 53 bits.

use dashu_float::{round::mode::HalfEven, FBig};

use crate::error::{domain, Result};

type Big = FBig<HalfEven, 2>;

pub(crate) const WORKING_BITS: usize = 320;

fn big(x: f64) -> Big {
    Big::try_from(x).expect("finite input").with_precision(WORKING_BITS).value()
}

fn to_f64(x: &Big) -> f64 {
    x.to_f64().value()
}

/// Coefficients split as `hi + lo` with `|lo| ≤ ulp(hi)/2`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct DoubleDouble {
    pub hi: Vec<f64>,
    pub lo: Vec<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct DualSystem {
    /// Active column indices into the full coefficient vector.
    active: Vec<usize>,
    /// Powers `x_i^j` for active columns, row-major over samples.
    powers: Vec<Vec<Big>>,
    inv_penalty: Vec<Big>,
    gram: Vec<Vec<Big>>,
    targets: Vec<Big>,
    coefficient_count: usize,
}

impl DualSystem {
    /// `penalties` must be strictly positive on every column in `active`.
    pub fn new(scaled_inputs: &[f64], targets: &[f64], penalties: &[f64], active: Vec<usize>) -> Self {
        let max_power = active.iter().copied().max().unwrap_or(0);
        let powers: Vec<Vec<Big>> = scaled_inputs
            .iter()
            .map(|&x| {
                let xb = big(x);
                let mut all = Vec::with_capacity(max_power + 1);
                let mut p = big(1.0);
                for _ in 0..=max_power {
                    all.push(p.clone());
                    p = &p * &xb;
                }
                active.iter().map(|&j| all[j].clone()).collect()
            })
            .collect();
        let one = big(1.0);
        let inv_penalty: Vec<Big> = active.iter().map(|&j| &one / &big(penalties[j])).collect();

        let n = scaled_inputs.len();
        let weighted: Vec<Vec<Big>> =
            powers.iter().map(|row| row.iter().zip(&inv_penalty).map(|(p, d)| p * d).collect()).collect();
        let mut gram = vec![vec![big(0.0); n]; n];
        for i in 0..n {
            for k in i..n {
                let mut acc = big(0.0);
                for (a, b) in weighted[i].iter().zip(&powers[k]) {
                    acc += a * b;
                }
                gram[k][i] = acc.clone();
                gram[i][k] = acc;
            }
        }
        Self {
            active,
            powers,
            inv_penalty,
            gram,
            targets: targets.iter().map(|&y| big(y)).collect(),
            coefficient_count: penalties.len(),
        }
    }

    /// Minimizer of `(1/(2σ²))‖y − Xw‖² + Σ λ_j w_j²` in double-double form,
    /// together with the training residuals `y − Xw`.
    pub fn solve(&self, noise_variance: f64) -> Result<(DoubleDouble, Vec<f64>)> {
        let shift = big(2.0 * noise_variance);
        let mut m: Vec<Vec<Big>> = self.gram.clone();
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = &row[i] + &shift;
        }
        let a = lu_solve(m, self.targets.clone())?;

        let mut hi = vec![0.0; self.coefficient_count];
        let mut lo = vec![0.0; self.coefficient_count];
        for (c, (&j, inv)) in self.active.iter().zip(&self.inv_penalty).enumerate() {
            let mut acc = big(0.0);
            for (row, ai) in self.powers.iter().zip(&a) {
                acc += &row[c] * ai;
            }
            let w = &acc * inv;
            let h = to_f64(&w);
            hi[j] = h;
            lo[j] = to_f64(&(&w - &big(h)));
        }
        // y − K0 a = 2σ² a exactly in the dual construction.
        let residuals = a.iter().map(|ai| to_f64(&(ai * &shift))).collect();
        Ok((DoubleDouble { hi, lo }, residuals))
    }
}

/// Gaussian elimination with partial pivoting. Pivot magnitudes are
/// compared through their f64 images, which is enough to choose rows.
fn lu_solve(mut m: Vec<Vec<Big>>, mut b: Vec<Big>) -> Result<Vec<Big>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| to_f64(&m[r][col]).abs().total_cmp(&to_f64(&m[s][col]).abs()))
            .expect("nonempty range");
        if to_f64(&m[pivot][col]) == 0.0 {
            return domain("dual system is singular at working precision");
        }
        m.swap(col, pivot);
        b.swap(col, pivot);
        let (upper, lower) = m.split_at_mut(col + 1);
        let prow = &upper[col];
        for (offset, row) in lower.iter_mut().enumerate() {
            let factor = &row[col] / &prow[col];
            for k in col + 1..n {
                row[k] = &row[k] - &(&factor * &prow[k]);
            }
            let r = col + 1 + offset;
            b[r] = &b[r] - &(&factor * &b[col]);
        }
    }
    let mut x = vec![big(0.0); n];
    for i in (0..n).rev() {
        let mut acc = b[i].clone();
        for k in i + 1..n {
            acc = &acc - &(&m[i][k] * &x[k]);
        }
        x[i] = &acc / &m[i][i];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_dual_matches_closed_form() {
        // x=1, y=1, λ=0.5, σ²=0.5: w = 1/(1 + 2·0.5·0.5) = 2/3.
        let sys = DualSystem::new(&[1.0], &[1.0], &[0.5], vec![0]);
        let (w, r) = sys.solve(0.5).unwrap();
        assert!((w.hi[0] + w.lo[0] - 2.0 / 3.0).abs() < 1e-16);
        assert!((r[0] - 1.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn inactive_columns_stay_zero() {
        let sys = DualSystem::new(&[0.5, -0.5], &[1.0, 2.0], &[1.0, 1e300, 4.0], vec![0, 2]);
        let (w, _) = sys.solve(1e-3).unwrap();
        assert_eq!(w.hi[1], 0.0);
        assert_eq!(w.lo[1], 0.0);
    }

    #[test]
    fn lu_solves_permuted_system() {
        let m = vec![vec![big(0.0), big(2.0)], vec![big(3.0), big(1.0)]];
        let x = lu_solve(m, vec![big(4.0), big(5.0)]).unwrap();
        assert_eq!(to_f64(&x[0]), 1.0);
        assert_eq!(to_f64(&x[1]), 2.0);
    }
}
