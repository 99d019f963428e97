//! Lorentzian linear algebra on `R^{1,n}`: the inner product
//! `<x, y> = -x0*y0 + x1*y1 + ... + xn*yn`, vector and subspace likeness,
//! and Lorentz transformations for testing invariance.
//!
//! Subspace likeness is decided by the inertia of the Gram matrix: a subspace
//! is time-like iff the restricted form has a negative direction, space-like
//! iff it is positive definite, and light-like iff it is positive
//! semidefinite and singular.

use std::fmt;
use std::ops::Index;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{Real, Scalar};

/// A point or direction of `R^{1,n}`; index 0 is the time coordinate.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<S>", into = "Vec<S>")]
#[serde(bound(serialize = "S: Scalar + Serialize", deserialize = "S: Scalar + Deserialize<'de>"))]
pub struct Vector<S>(Vec<S>);

impl<S: Scalar> Vector<S> {
    pub fn new(coords: Vec<S>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::InvalidConfig(format!(
                "a vector of R^{{1,n}} needs n >= 1, got {} coordinates",
                coords.len()
            )));
        }
        Ok(Vector(coords))
    }

    pub fn zeros(n: usize) -> Self {
        Vector(vec![S::zero(); n + 1])
    }

    /// Unit vector `e_i` of `R^{1,n}`.
    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[i] = S::one();
        v
    }

    pub fn from_ints(coords: &[i64]) -> Result<Self> {
        Self::new(coords.iter().map(|&c| crate::scalar::int(c)).collect())
    }

    pub fn coords(&self) -> &[S] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<S> {
        self.0
    }

    /// Ambient index `n` (the vector has `n + 1` coordinates).
    pub fn n(&self) -> usize {
        self.0.len() - 1
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.is_zero())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_len(self.len(), other.len())?;
        Ok(Vector(self.0.iter().zip(&other.0).map(|(a, b)| a.clone() - b.clone()).collect()))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_len(self.len(), other.len())?;
        Ok(Vector(self.0.iter().zip(&other.0).map(|(a, b)| a.clone() + b.clone()).collect()))
    }

    pub fn scale(&self, c: &S) -> Self {
        Vector(self.0.iter().map(|a| a.clone() * c.clone()).collect())
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Vector<T> {
        Vector(self.0.iter().map(f).collect())
    }

    pub fn to_real<F: Real>(&self) -> Vector<F> {
        self.map(F::from_scalar)
    }
}

impl<S> Index<usize> for Vector<S> {
    type Output = S;

    fn index(&self, i: usize) -> &S {
        &self.0[i]
    }
}

impl<S: Scalar> TryFrom<Vec<S>> for Vector<S> {
    type Error = Error;

    fn try_from(coords: Vec<S>) -> Result<Self> {
        Vector::new(coords)
    }
}

impl<S> From<Vector<S>> for Vec<S> {
    fn from(v: Vector<S>) -> Self {
        v.0
    }
}

impl<S: fmt::Debug> fmt::Debug for Vector<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Vector").field(&self.0).finish()
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Causal character of a nonzero vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VectorClass {
    SpaceLike,
    LightLike,
    TimeLike,
}

/// Likeness of a nonzero subspace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Likeness {
    TimeLike,
    SpaceLike,
    LightLike,
}

impl Likeness {
    pub fn as_str(self) -> &'static str {
        match self {
            Likeness::TimeLike => "time_like",
            Likeness::SpaceLike => "space_like",
            Likeness::LightLike => "light_like",
        }
    }

    /// Likeness read off the sign of `s - 1` where `s` is a sum of squares
    /// compared against the light-cone radius.
    pub fn from_unit_comparison(sign: i8) -> Self {
        match sign {
            1 => Likeness::TimeLike,
            -1 => Likeness::SpaceLike,
            _ => Likeness::LightLike,
        }
    }
}

impl fmt::Display for Likeness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `-x0*y0 + sum_{i>=1} xi*yi`.
pub fn lorentz_inner<S: Scalar>(x: &Vector<S>, y: &Vector<S>) -> Result<S> {
    lorentz_inner_slices(x.coords(), y.coords())
}

pub(crate) fn lorentz_inner_slices<S: Scalar>(x: &[S], y: &[S]) -> Result<S> {
    check_len(x.len(), y.len())?;
    let space = x[1..]
        .iter()
        .zip(&y[1..])
        .fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone());
    Ok(space - x[0].clone() * y[0].clone())
}

/// Euclidean dot product.
pub fn euclid_inner<S: Scalar>(x: &Vector<S>, y: &Vector<S>) -> Result<S> {
    check_len(x.len(), y.len())?;
    Ok(x.coords()
        .iter()
        .zip(y.coords())
        .fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone()))
}

pub fn vector_likeness<S: Scalar>(v: &Vector<S>) -> Result<VectorClass> {
    if v.is_zero() {
        return Err(Error::ZeroVector);
    }
    Ok(match lorentz_inner(v, v)?.sign_class() {
        1 => VectorClass::SpaceLike,
        0 => VectorClass::LightLike,
        _ => VectorClass::TimeLike,
    })
}

/// Light cone membership: light-like vectors together with the origin.
pub fn on_light_cone<S: Scalar>(v: &Vector<S>) -> bool {
    v.is_zero() || matches!(vector_likeness(v), Ok(VectorClass::LightLike))
}

/// The metric `J = diag(-1, 1, ..., 1)` of `R^{1,n}`.
pub fn metric<S: Scalar>(n: usize) -> Matrix<S> {
    let mut j = Matrix::identity(n + 1);
    j[(0, 0)] = -S::one();
    j
}

/// A list of linearly independent vectors spanning a subspace of `R^{1,n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis<S> {
    n: usize,
    vectors: Vec<Vector<S>>,
}

impl<S: Scalar> SubspaceBasis<S> {
    pub fn new(vectors: Vec<Vector<S>>) -> Result<Self> {
        let first = vectors.first().ok_or(Error::EmptyBasis)?;
        let n = first.n();
        for v in &vectors {
            check_len(n + 1, v.len())?;
        }
        let basis = SubspaceBasis { n, vectors };
        let rank = S::echelon_of(&basis.matrix()).pivots.len();
        if rank != basis.vectors.len() {
            return Err(Error::DependentBasis { rank, count: basis.vectors.len() });
        }
        Ok(basis)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[Vector<S>] {
        &self.vectors
    }

    /// `(n+1) x m` matrix whose columns are the basis vectors.
    pub fn matrix(&self) -> Matrix<S> {
        let cols: Vec<Vec<S>> = self.vectors.iter().map(|v| v.coords().to_vec()).collect();
        Matrix::from_columns(&cols).expect("equal lengths checked")
    }

    /// Applies a linear map (given as a matrix acting on columns) to every
    /// basis vector.
    pub fn transform(&self, g: &Matrix<S>) -> Result<Self> {
        let vectors = self
            .vectors
            .iter()
            .map(|v| Vector::new(g.mul_vec(v.coords())?))
            .collect::<Result<Vec<_>>>()?;
        SubspaceBasis::new(vectors)
    }
}

/// Gram matrix of the Lorentzian form restricted to the basis.
pub fn gram_matrix<S: Scalar>(basis: &SubspaceBasis<S>) -> Matrix<S> {
    gram_of(basis.vectors())
}

pub(crate) fn gram_of<S: Scalar>(vectors: &[Vector<S>]) -> Matrix<S> {
    let m = vectors.len();
    let mut g = Matrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let v = lorentz_inner(&vectors[i], &vectors[j]).expect("equal lengths");
            g[(i, j)] = v.clone();
            g[(j, i)] = v;
        }
    }
    g
}

/// Signature counts of a symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Inertia {
    pub positive: usize,
    pub zero: usize,
    pub negative: usize,
    /// Smallest magnitude met while deciding signs; for floats a value near
    /// the zero band means the verdict is fragile.
    pub min_abs_pivot: f64,
}

impl Inertia {
    pub fn likeness(&self) -> Likeness {
        if self.negative > 0 {
            Likeness::TimeLike
        } else if self.zero > 0 {
            Likeness::LightLike
        } else {
            Likeness::SpaceLike
        }
    }
}

/// Sylvester inertia by symmetric congruence diagonalisation.
///
/// Each step picks the largest diagonal entry as pivot. When the remaining
/// diagonal vanishes but an off-diagonal entry `a_ij` does not, adding row
/// and column `j` to row and column `i` produces the diagonal entry
/// `2 a_ij` and the elimination continues.
pub fn inertia<S: Scalar>(symmetric: &Matrix<S>) -> Result<Inertia> {
    if !symmetric.is_square() {
        return Err(Error::DimensionMismatch {
            expected: symmetric.nrows(),
            found: symmetric.ncols(),
        });
    }
    let m = symmetric.nrows();
    let mut a = symmetric.clone();
    let mut out = Inertia { positive: 0, zero: 0, negative: 0, min_abs_pivot: f64::INFINITY };
    for t in 0..m {
        let (mut pivot, diag_abs) = (t..m)
            .map(|i| (i, a[(i, i)].abs()))
            .fold((t, S::zero()), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if diag_abs.is_negligible() {
            let mut best = (t, t, S::zero());
            for i in t..m {
                for j in i + 1..m {
                    let v = a[(i, j)].abs();
                    if v > best.2 {
                        best = (i, j, v);
                    }
                }
            }
            let (i, j, off_abs) = best;
            if off_abs.is_negligible() {
                let residual = diag_abs.as_f64().max(off_abs.as_f64());
                out.min_abs_pivot = out.min_abs_pivot.min(residual);
                out.zero += m - t;
                break;
            }
            for c in 0..m {
                let v = a[(j, c)].clone();
                a[(i, c)] = a[(i, c)].clone() + v;
            }
            for r in 0..m {
                let v = a[(r, j)].clone();
                a[(r, i)] = a[(r, i)].clone() + v;
            }
            pivot = i;
        }
        a.swap_rows(t, pivot);
        a.swap_columns(t, pivot);
        let p = a[(t, t)].clone();
        out.min_abs_pivot = out.min_abs_pivot.min(p.as_f64().abs());
        if p.is_positive() {
            out.positive += 1;
        } else {
            out.negative += 1;
        }
        for r in t + 1..m {
            let f = a[(r, t)].clone() / p.clone();
            if f.is_zero() {
                continue;
            }
            for c in t + 1..m {
                let d = f.clone() * a[(t, c)].clone();
                a[(r, c)] = a[(r, c)].clone() - d;
            }
        }
        for r in t + 1..m {
            a[(r, t)] = S::zero();
            a[(t, r)] = S::zero();
        }
    }
    Ok(out)
}

/// Likeness of the subspace spanned by `basis`.
pub fn subspace_likeness<S: Scalar>(basis: &SubspaceBasis<S>) -> Likeness {
    subspace_inertia(basis).likeness()
}

pub fn subspace_inertia<S: Scalar>(basis: &SubspaceBasis<S>) -> Inertia {
    inertia(&gram_matrix(basis)).expect("Gram matrix is square")
}

/// Likeness of the hyperplane `-x0 + a1*x1 + ... + an*xn = 0`, decided by
/// comparing `sum a_i^2` with 1.
pub fn hyperplane_likeness<S: Scalar>(alpha: &[S]) -> Likeness {
    let s = alpha.iter().fold(S::zero(), |acc, a| acc + a.clone() * a.clone());
    Likeness::from_unit_comparison((s - S::one()).sign_class())
}

/// A basis of the hyperplane `-x0 + sum a_i x_i = 0`: the vectors
/// `(a_i, e_i)` for `i = 1..n`.
pub fn hyperplane_basis<S: Scalar>(alpha: &[S]) -> Result<SubspaceBasis<S>> {
    let n = alpha.len();
    let vectors = (1..=n)
        .map(|i| {
            let mut v = Vector::<S>::basis(n, i);
            v.0[0] = alpha[i - 1].clone();
            v
        })
        .collect();
    SubspaceBasis::new(vectors)
}

/// Boost with the given rapidity in the `(x0, x_axis)` plane.
pub fn boost<F: Real>(n: usize, axis: usize, rapidity: F) -> Matrix<F> {
    assert!((1..=n).contains(&axis), "boost axis must be spatial");
    let mut g = Matrix::identity(n + 1);
    let (c, s) = (rapidity.cosh(), rapidity.sinh());
    g[(0, 0)] = c;
    g[(axis, axis)] = c;
    g[(0, axis)] = s;
    g[(axis, 0)] = s;
    g
}

/// Rotation by `angle` in the spatial `(x_a, x_b)` plane.
pub fn rotation<F: Real>(n: usize, a: usize, b: usize, angle: F) -> Matrix<F> {
    assert!(a != b && a >= 1 && b >= 1 && a <= n && b <= n, "rotation plane must be spatial");
    let mut g = Matrix::identity(n + 1);
    let (c, s) = (angle.cos(), angle.sin());
    g[(a, a)] = c;
    g[(b, b)] = c;
    g[(a, b)] = -s;
    g[(b, a)] = s;
    g
}

/// Seeded random element of the Lorentz group: `n` rounds of a spatial
/// rotation followed by a boost with rapidity in `[-1.5, 1.5]`.
pub fn random_lorentz_transform<F: Real>(n: usize, seed: u64) -> Matrix<F> {
    assert!(n >= 1, "n must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = Matrix::<F>::identity(n + 1);
    for _ in 0..n {
        if n >= 2 {
            let a = rng.gen_range(1..=n);
            let mut b = rng.gen_range(1..n);
            if b >= a {
                b += 1;
            }
            let angle = rng.gen_range(0.0..std::f64::consts::TAU);
            g = g.mul(&rotation(n, a, b, F::from_f64_lossy(angle))).expect("square");
        }
        let axis = rng.gen_range(1..=n);
        let rapidity = rng.gen_range(-1.5..=1.5);
        g = g.mul(&boost(n, axis, F::from_f64_lossy(rapidity))).expect("square");
    }
    g
}

/// `max |Gᵀ J G - J|`.
pub fn lorentz_defect<F: Real>(g: &Matrix<F>) -> f64 {
    let n = g.nrows() - 1;
    let j = metric::<F>(n);
    let gtjg = g.transpose().mul(&j).and_then(|m| m.mul(g)).expect("square");
    let mut worst = 0.0f64;
    for r in 0..=n {
        for c in 0..=n {
            worst = worst.max((gtjg[(r, c)] - j[(r, c)]).as_f64().abs());
        }
    }
    worst
}
