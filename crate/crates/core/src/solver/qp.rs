//! Dense convex QP: minimize ½θᵀHθ + fᵀθ subject to linear equalities and
//! `≤` rows. Equalities are eliminated through an SVD nullspace basis and
//! the reduced problem goes to a Goldfarb–Idnani dual active-set solver.

use nalgebra::{DMatrix, DVector};

const RANK_TOL: f64 = 1e-10;
const FEAS_TOL: f64 = 1e-9;

pub(crate) struct Qp {
    pub h: DMatrix<f64>,
    pub f: DVector<f64>,
    /// (row, rhs) with row·θ = rhs.
    pub eq: Vec<(Vec<f64>, f64)>,
    /// (row, rhs) with row·θ ≤ rhs.
    pub le: Vec<(Vec<f64>, f64)>,
}

impl Qp {
    pub fn new(h: DMatrix<f64>, f: DVector<f64>) -> Self {
        Self { h, f, eq: Vec::new(), le: Vec::new() }
    }

    /// Distance objective ‖θ − target‖².
    pub fn distance(target: &[f64]) -> Self {
        let n = target.len();
        Self::new(DMatrix::identity(n, n) * 2.0, DVector::from_iterator(n, target.iter().map(|t| -2.0 * t)))
    }

    /// Adds `lower ≤ row·θ ≤ upper` (infinite sides are skipped).
    pub fn bounded(&mut self, row: &[f64], lower: f64, upper: f64) {
        if lower == upper {
            self.eq.push((row.to_vec(), lower));
            return;
        }
        if upper.is_finite() {
            self.le.push((row.to_vec(), upper));
        }
        if lower.is_finite() {
            self.le.push((row.iter().map(|a| -a).collect(), -lower));
        }
    }

    pub fn solve(&self) -> Option<Vec<f64>> {
        let n = self.f.len();
        if n == 0 {
            let ok = self.eq.iter().all(|(_, b)| b.abs() <= FEAS_TOL) && self.le.iter().all(|(_, b)| *b >= -FEAS_TOL);
            return ok.then(Vec::new);
        }
        let (theta_p, basis) = self.affine_solution_set()?;
        let k = basis.ncols();
        let g_rows: Vec<(DVector<f64>, f64)> = self
            .le
            .iter()
            .map(|(row, b)| {
                let r = DVector::from_column_slice(row);
                let scale = r.norm().max(1e-300);
                ((basis.transpose() * &r) / scale, (b - r.dot(&theta_p)) / scale)
            })
            .collect();
        if k == 0 {
            return g_rows.iter().all(|(_, slack)| *slack >= -FEAS_TOL).then(|| theta_p.as_slice().to_vec());
        }
        let mut amat = Vec::new();
        let mut bvec = Vec::new();
        for (row, slack) in &g_rows {
            if row.norm() <= 1e-12 {
                if *slack < -FEAS_TOL {
                    return None;
                }
                continue;
            }
            amat.extend(row.iter());
            // a little slack keeps rows that are tight at the start feasible
            bvec.push(slack + 1e-13);
        }
        let hr = basis.transpose() * &self.h * &basis;
        let hr = (&hr + hr.transpose()) * 0.5;
        let fr = basis.transpose() * (&self.h * &theta_p + &self.f);
        // quadprog wants row-major; hr is symmetric
        let mut q: Vec<f64> = hr.as_slice().to_vec();
        let sol = quadprog::solve_qp(&mut q, fr.as_slice(), &amat, &bvec, 0, false).ok()?;
        let z = DVector::from_vec(sol.sol);
        let theta = theta_p + basis * z;
        let worst = self
            .le
            .iter()
            .map(|(row, b)| (row.iter().zip(theta.iter()).map(|(a, t)| a * t).sum::<f64>() - b) / norm(row).max(1e-300))
            .fold(0.0, f64::max);
        (worst <= 1e-7).then(|| theta.as_slice().to_vec())
    }

    /// A particular solution of the equalities and a nullspace basis, or
    /// `None` when the equalities are inconsistent.
    fn affine_solution_set(&self) -> Option<(DVector<f64>, DMatrix<f64>)> {
        let n = self.f.len();
        let mut rows: Vec<(Vec<f64>, f64)> = Vec::with_capacity(self.eq.len());
        for (row, b) in &self.eq {
            let s = norm(row);
            if s <= 1e-14 {
                if b.abs() > FEAS_TOL {
                    return None;
                }
                continue;
            }
            rows.push((row.iter().map(|a| a / s).collect(), b / s));
        }
        if rows.is_empty() {
            return Some((DVector::zeros(n), DMatrix::identity(n, n)));
        }
        let m = rows.len();
        let e = DMatrix::from_fn(m, n, |i, j| rows[i].0[j]);
        let b = DVector::from_iterator(m, rows.iter().map(|r| r.1));
        // pad to at least n rows so the SVD returns a full V
        let padded = if m < n { e.clone().resize_vertically(n, 0.0) } else { e.clone() };
        let svd = padded.svd(true, true);
        let v_t = svd.v_t.as_ref().expect("requested V");
        let u = svd.u.as_ref().expect("requested U");
        let smax = svd.singular_values.max();
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        let rank = order.iter().filter(|&&i| svd.singular_values[i] > RANK_TOL * smax.max(1.0)).count();
        let mut theta = DVector::zeros(n);
        let b_pad = if m < n { b.clone().resize_vertically(n, 0.0) } else { b.clone() };
        for &i in &order[..rank] {
            let coef = u.column(i).dot(&b_pad) / svd.singular_values[i];
            theta += v_t.row(i).transpose() * coef;
        }
        if (&e * &theta - &b).amax() > 1e-9 {
            return None;
        }
        let basis = DMatrix::from_fn(n, n - rank, |r, c| v_t[(order[rank + c], r)]);
        Some((theta, basis))
    }
}

fn norm(row: &[f64]) -> f64 {
    row.iter().map(|a| a * a).sum::<f64>().sqrt()
}
