//! Column-pivoted modified Gram–Schmidt and orthonormal completion.

use crate::matrix::Matrix;
use crate::scalar::Real;

/// `A P = Q R` restricted to the selected columns.
#[derive(Debug, Clone, PartialEq)]
pub struct PivotedQr<F> {
    /// `m x r` with orthonormal columns.
    pub q: Matrix<F>,
    /// `r x r` upper triangular, positive diagonal.
    pub r: Matrix<F>,
    /// Selected column indices of `A`, in pivot order.
    pub columns: Vec<usize>,
}

impl<F: Real> PivotedQr<F> {
    pub fn rank(&self) -> usize {
        self.columns.len()
    }

    /// Column permutation as an `ncols x r` selection matrix `P`.
    pub fn selection(&self, ncols: usize) -> Matrix<F> {
        let mut p = Matrix::zeros(ncols, self.rank());
        for (t, &c) in self.columns.iter().enumerate() {
            p[(c, t)] = F::one();
        }
        p
    }

    /// `P R^{-1}`, so that `A P R^{-1} = Q` when `A` has full column rank.
    pub fn right_inverse_factor(&self, ncols: usize) -> Matrix<F> {
        let rinv = upper_triangular_inverse(&self.r);
        self.selection(ncols).mul(&rinv).expect("shapes agree")
    }
}

fn dot<F: Real>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).fold(F::zero(), |acc, (x, y)| acc + *x * *y)
}

fn norm<F: Real>(a: &[F]) -> F {
    dot(a, a).sqrt()
}

/// Pivoted MGS with one reorthogonalization pass. Stops after `max_rank`
/// columns or once every remaining column norm falls to `tol` times the
/// largest initial norm.
pub fn pivoted_mgs<F: Real>(a: &Matrix<F>, tol: f64, max_rank: usize) -> PivotedQr<F> {
    let (m, ncols) = (a.nrows(), a.ncols());
    let mut work: Vec<Vec<F>> = (0..ncols).map(|c| a.column(c)).collect();
    let scale = work.iter().map(|c| norm(c).as_f64()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut remaining: Vec<usize> = (0..ncols).collect();
    let mut qs: Vec<Vec<F>> = Vec::new();
    let mut columns = Vec::new();
    let mut rcoef: Vec<Vec<F>> = Vec::new();
    let limit = max_rank.min(ncols).min(m);
    while columns.len() < limit {
        let (pos, best) = remaining
            .iter()
            .enumerate()
            .map(|(pos, &c)| (pos, norm(&work[c]).as_f64()))
            .fold((usize::MAX, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if pos == usize::MAX || best <= tol * scale {
            break;
        }
        let c = remaining.remove(pos);
        let mut v = work[c].clone();
        for q in &qs {
            let d = dot(q, &v);
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi = *vi - d * *qi;
            }
        }
        let nv = norm(&v);
        let q: Vec<F> = v.iter().map(|x| *x / nv).collect();
        let mut row = vec![F::zero(); ncols];
        for &other in remaining.iter() {
            let d = dot(&q, &work[other]);
            row[other] = d;
            for (wi, qi) in work[other].iter_mut().zip(&q) {
                *wi = *wi - d * *qi;
            }
        }
        qs.push(q);
        columns.push(c);
        rcoef.push(row);
    }
    let r = columns.len();
    let q = Matrix::from_columns(&qs).unwrap_or_else(|_| Matrix::zeros(m, 0));
    let q = if r == 0 { Matrix::zeros(m, 0) } else { q };
    // R in pivot order: R[t][t] = q_t . a_{c_t}, R[t][u] from the sweep.
    let mut rm = Matrix::zeros(r, r);
    for t in 0..r {
        for u in 0..r {
            if u == t {
                rm[(t, t)] = dot(&qs[t], &a.column(columns[t]));
            } else if u > t {
                rm[(t, u)] = rcoef[t][columns[u]];
            }
        }
    }
    PivotedQr { q, r: rm, columns }
}

pub fn upper_triangular_inverse<F: Real>(r: &Matrix<F>) -> Matrix<F> {
    let n = r.nrows();
    let mut inv = Matrix::zeros(n, n);
    for c in 0..n {
        for i in (0..=c).rev() {
            let mut acc = if i == c { F::one() } else { F::zero() };
            for t in i + 1..=c {
                acc = acc - r[(i, t)] * inv[(t, c)];
            }
            inv[(i, c)] = acc / r[(i, i)];
        }
    }
    inv
}

/// Extends the orthonormal columns of `q` (`m x r`) to an orthogonal
/// `m x m` matrix whose first `r` columns are `q`. Standard basis vectors are
/// added greedily, largest residual first.
pub fn complete_orthonormal<F: Real>(q: &Matrix<F>) -> Matrix<F> {
    let m = q.nrows();
    let mut basis: Vec<Vec<F>> = (0..q.ncols()).map(|c| q.column(c)).collect();
    while basis.len() < m {
        let mut best: Option<(f64, Vec<F>)> = None;
        for e in 0..m {
            let mut v = vec![F::zero(); m];
            v[e] = F::one();
            for _ in 0..2 {
                for b in &basis {
                    let d = dot(b, &v);
                    for (vi, bi) in v.iter_mut().zip(b) {
                        *vi = *vi - d * *bi;
                    }
                }
            }
            let nv = norm(&v).as_f64();
            if best.as_ref().is_none_or(|(bn, _)| nv > *bn) {
                best = Some((nv, v));
            }
        }
        let (nv, v) = best.expect("m > 0");
        let nv = F::from_f64_lossy(nv);
        basis.push(v.into_iter().map(|x| x / nv).collect());
    }
    Matrix::from_columns(&basis).expect("equal lengths")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn orthogonality_defect(q: &Matrix<f64>) -> f64 {
        let qtq = q.transpose().mul(q).unwrap();
        let n = qtq.nrows();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let e = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((qtq[(i, j)] - e).abs());
            }
        }
        worst
    }

    #[test]
    fn single_column() {
        let a = Matrix::<f64>::from_rows(vec![vec![2.0], vec![0.0]]).unwrap();
        let qr = pivoted_mgs(&a, 1e-12, 1);
        assert_eq!(qr.columns, vec![0]);
        assert!((qr.r[(0, 0)] - 2.0).abs() < 1e-15);
        let b = qr.right_inverse_factor(1);
        assert!((b[(0, 0)] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn picks_largest_column_first() {
        let a = Matrix::<f64>::from_rows(vec![vec![1.0, 0.0], vec![0.0, 3.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(pivoted_mgs(&a, 1e-12, 2).columns, vec![1, 0]);
    }

    #[test]
    fn detects_rank_deficiency() {
        let a = Matrix::<f64>::from_rows(vec![vec![1.0, 2.0], vec![1.0, 2.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(pivoted_mgs(&a, 1e-10, 2).rank(), 1);
    }

    proptest! {
        #[test]
        fn factorization_holds(entries in prop::collection::vec(-3.0f64..3.0, 12)) {
            let a = Matrix::from_rows(entries.chunks(3).map(<[f64]>::to_vec).collect()).unwrap();
            let qr = pivoted_mgs(&a, 1e-10, 3);
            prop_assume!(qr.rank() == 3);
            prop_assert!(orthogonality_defect(&qr.q) < 1e-12);
            let aq = a.mul(&qr.right_inverse_factor(3)).unwrap();
            for i in 0..4 {
                for j in 0..3 {
                    prop_assert!((aq[(i, j)] - qr.q[(i, j)]).abs() < 1e-9);
                }
            }
            let full = complete_orthonormal(&qr.q);
            prop_assert!(orthogonality_defect(&full) < 1e-12);
            for i in 0..4 {
                for j in 0..3 {
                    prop_assert_eq!(full[(i, j)], qr.q[(i, j)]);
                }
            }
        }
    }
}
