//! Independent reference implementations used as test oracles. None of
//! these share code with the library routines they check.

#![allow(dead_code)]

pub type Mat = Vec<Vec<f64>>;

pub fn mat_vec(a: &Mat, x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}

pub fn transpose(a: &Mat) -> Mat {
    if a.is_empty() {
        return Vec::new();
    }
    (0..a[0].len()).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let bt = transpose(b);
    a.iter().map(|r| bt.iter().map(|c| r.iter().zip(c).map(|(p, q)| p * q).sum()).collect()).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Gauss–Jordan with partial pivoting; returns `A⁻¹` or `None`.
pub fn invert(a: &Mat) -> Option<Mat> {
    let n = a.len();
    let mut m: Mat = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))?;
        if m[p][c] == 0.0 {
            return None;
        }
        m.swap(c, p);
        let piv = m[c][c];
        for v in m[c].iter_mut() {
            *v /= piv;
        }
        for r in 0..n {
            if r != c {
                let f = m[r][c];
                if f != 0.0 {
                    for k in 0..2 * n {
                        m[r][k] -= f * m[c][k];
                    }
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Determinant by elimination.
pub fn determinant(a: &Mat) -> f64 {
    let n = a.len();
    let mut m = a.clone();
    let mut det = 1.0;
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())).unwrap();
        if m[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            m.swap(c, p);
            det = -det;
        }
        det *= m[c][c];
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            for k in c..n {
                m[r][k] -= f * m[c][k];
            }
        }
    }
    det
}

/// Conjugate gradients on `H w = g` for symmetric positive definite `H`,
/// restarted from the current iterate to wash out rounding drift.
pub fn conjugate_gradient(h: &Mat, g: &[f64]) -> Vec<f64> {
    let n = g.len();
    let tol = 1e-15 * norm(g).max(1e-300);
    let mut w = vec![0.0; n];
    for _restart in 0..50 {
        let hw = mat_vec(h, &w);
        let mut r: Vec<f64> = g.iter().zip(&hw).map(|(a, b)| a - b).collect();
        let mut rr = dot(&r, &r);
        if rr.sqrt() <= tol {
            break;
        }
        let mut p = r.clone();
        for _ in 0..4 * n {
            let hp = mat_vec(h, &p);
            let php = dot(&p, &hp);
            if php <= 0.0 {
                break;
            }
            let a = rr / php;
            for i in 0..n {
                w[i] += a * p[i];
                r[i] -= a * hp[i];
            }
            let rr_new = dot(&r, &r);
            if rr_new.sqrt() <= tol {
                break;
            }
            let b = rr_new / rr;
            rr = rr_new;
            for i in 0..n {
                p[i] = r[i] + b * p[i];
            }
        }
    }
    w
}

/// Minimizer of `(1/(2σ²))‖Xw − y‖² + Σ λ_j w_j²` by conjugate gradients on
/// its gradient equation `(XᵀX/σ² + 2Λ) w = Xᵀy/σ²`.
pub fn iterative_ridge(x: &Mat, y: &[f64], penalties: &[f64], sigma2: f64) -> Vec<f64> {
    let xt = transpose(x);
    let mut h = mat_mul(&xt, x);
    for (j, row) in h.iter_mut().enumerate() {
        for v in row.iter_mut() {
            *v /= sigma2;
        }
        row[j] += 2.0 * penalties[j];
    }
    let g: Vec<f64> = mat_vec(&xt, y).iter().map(|v| v / sigma2).collect();
    conjugate_gradient(&h, &g)
}

/// `w = Xᵀ (X Xᵀ)⁻¹ y` for full-row-rank `X`.
pub fn dual_min_norm(x: &Mat, y: &[f64]) -> Vec<f64> {
    let xt = transpose(x);
    let gram = mat_mul(x, &xt);
    let z = mat_vec(&invert(&gram).expect("full row rank"), y);
    mat_vec(&xt, &z)
}

/// Zero-mean multivariate normal log density from the explicit inverse and
/// determinant of the covariance.
pub fn mvn_log_density(cov: &Mat, y: &[f64]) -> f64 {
    let inv = invert(cov).expect("invertible covariance");
    let quad = dot(y, &mat_vec(&inv, y));
    let n = y.len() as f64;
    -0.5 * quad - 0.5 * determinant(cov).ln() - 0.5 * n * (2.0 * std::f64::consts::PI).ln()
}

/// Composite midpoint rule.
pub fn midpoint(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels).map(|i| f(a + (i as f64 + 0.5) * h)).sum::<f64>() * h
}

/// Marchenko–Pastur CDF by midpoint quadrature in `x` (with `x = u²`
/// near a zero lower edge to tame the `1/√x` singularity).
pub fn mp_cdf_oracle(ratio: f64, variance: f64, x: f64) -> f64 {
    let a = variance * (1.0 - ratio.sqrt()).powi(2);
    let b = variance * (1.0 + ratio.sqrt()).powi(2);
    let atom = if ratio > 1.0 { 1.0 - 1.0 / ratio } else { 0.0 };
    if x < 0.0 {
        return 0.0;
    }
    if x <= a {
        return atom;
    }
    let hi = x.min(b);
    let dens = |t: f64| {
        if t <= a || t >= b {
            0.0
        } else {
            ((b - t) * (t - a)).sqrt() / (2.0 * std::f64::consts::PI * variance * ratio * t)
        }
    };
    let cont = if a == 0.0 {
        midpoint(|u| 2.0 * u * dens(u * u), 0.0, hi.sqrt(), 400_000)
    } else {
        midpoint(dens, a, hi, 400_000)
    };
    atom + cont
}

pub struct Lcg(pub u64);

impl Lcg {
    /// Uniform on [0, 1).
    pub fn next(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next()
    }

    /// Box–Muller.
    pub fn normal(&mut self) -> f64 {
        let u = self.next().max(1e-300);
        let v = self.next();
        (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
    }
}
