//! Explicit A-equivalence witnesses `H ∘ L ∘ h = N`.
//!
//! The source `h` is one affine map of `R^{n+1}`, kept alongside the factors
//! it was composed from. The target `H` is an ordered chain of elementary
//! maps of `R^{k+1}` (affine maps and quadratic shears), applied first to
//! last. Points are column vectors throughout.
//!
//! Pipeline for `j = dim V > 0`:
//!
//! 1. `P`: reorder `p_1..p_k` so a maximal independent prefix comes first.
//! 2. `H1` (target): `Y_i = (X_0 - X_{i+1} + <d,d>)/2`, last `Y_k = X_0`.
//! 3. `H2` (source): `x -> (-x_0 + p_00, x_1 + p_01, ...)`; the first forms
//!    become `d_i . x` and the last `-x_0^2 + sum x_i^2`.
//! 4. `E` (target): subtract the dependent forms, leaving zeros.
//! 5. `H3`/`H4`: orthonormalize the spatial part; forms `α_i x_0 + x_i`.
//! 6. Complete the square in `x_0` (`H5..H8'`), or the special and
//!    inclusion shears.
//! 7. `τ` (target): move the quadratic slot to index `j`.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lorentz::{lorentz_inner, euclid_inner, Likeness, Vector};
use crate::mappings::{
    classify_euclid, classify_lorentz, contains_time_axis, eval_euclid_dsq, eval_lorentz_dsq,
    recognition_subspace, Branch, NormalForm, PointConfig,
};
use crate::matrix::Matrix;
use crate::qr::{complete_orthonormal, pivoted_mgs};
use crate::scalar::{Real, Scalar};

/// Magnitude below which a divisor trips a guard.
pub const GUARD: f64 = 1e-12;

/// Relative rank tolerance for the floating QR steps.
const QR_TOL: f64 = 1e-10;

fn lit<F: Real>(x: f64) -> F {
    F::from_f64_lossy(x)
}

/// `x -> linear * x + translation` on `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Real + Serialize", deserialize = "F: Real + DeserializeOwned"))]
pub struct AffineMap<F> {
    pub linear: Matrix<F>,
    pub translation: Vec<F>,
}

impl<F: Real> AffineMap<F> {
    pub fn new(linear: Matrix<F>, translation: Vec<F>) -> Result<Self> {
        if !linear.is_square() {
            return Err(Error::DimensionMismatch { expected: linear.nrows(), found: linear.ncols() });
        }
        if translation.len() != linear.nrows() {
            return Err(Error::DimensionMismatch { expected: linear.nrows(), found: translation.len() });
        }
        Ok(AffineMap { linear, translation })
    }

    pub fn identity(dim: usize) -> Self {
        AffineMap { linear: Matrix::identity(dim), translation: vec![F::zero(); dim] }
    }

    pub fn linear(linear: Matrix<F>) -> Self {
        let d = linear.nrows();
        AffineMap { linear, translation: vec![F::zero(); d] }
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    pub fn apply(&self, x: &[F]) -> Result<Vec<F>> {
        let y = self.linear.mul_vec(x)?;
        Ok(y.into_iter().zip(&self.translation).map(|(a, b)| a + *b).collect())
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &AffineMap<F>) -> Result<AffineMap<F>> {
        let linear = self.linear.mul(&inner.linear)?;
        let translation = self.apply(&inner.translation)?;
        AffineMap::new(linear, translation)
    }

    pub fn inverse(&self) -> Result<AffineMap<F>> {
        let inv = self.linear.inverse()?;
        let t = inv.mul_vec(&self.translation)?;
        AffineMap::new(inv, t.into_iter().map(|v| -v).collect())
    }

    pub fn det(&self) -> F {
        self.linear.determinant().unwrap_or_else(|_| F::zero())
    }

    /// Permutation `y_i = x_{perm[i]}`.
    pub fn permutation(perm: &[usize]) -> Self {
        let mut m = Matrix::zeros(perm.len(), perm.len());
        for (i, &p) in perm.iter().enumerate() {
            m[(i, p)] = F::one();
        }
        Self::linear(m)
    }
}

/// `c + l.x + x^T Q x`, stored as one symmetric matrix acting on `(1, x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
#[serde(bound(serialize = "F: Real + Serialize", deserialize = "F: Real + DeserializeOwned"))]
pub struct QuadraticPoly<F> {
    pub matrix: Matrix<F>,
}

impl<F: Real> QuadraticPoly<F> {
    pub fn zero(dim: usize) -> Self {
        QuadraticPoly { matrix: Matrix::zeros(dim + 1, dim + 1) }
    }

    /// Number of variables.
    pub fn dim(&self) -> usize {
        self.matrix.nrows() - 1
    }

    pub fn new(constant: F, linear: &[F], quad: &Matrix<F>) -> Self {
        let d = linear.len();
        let mut m = Matrix::zeros(d + 1, d + 1);
        m[(0, 0)] = constant;
        let half = lit::<F>(0.5);
        for i in 0..d {
            m[(0, i + 1)] = linear[i] * half;
            m[(i + 1, 0)] = linear[i] * half;
            for j in 0..d {
                m[(i + 1, j + 1)] = (quad[(i, j)] + quad[(j, i)]) * half;
            }
        }
        QuadraticPoly { matrix: m }
    }

    pub fn linear_form(constant: F, linear: &[F]) -> Self {
        Self::new(constant, linear, &Matrix::zeros(linear.len(), linear.len()))
    }

    /// The coordinate function `x_i`.
    pub fn coordinate(dim: usize, i: usize) -> Self {
        let mut l = vec![F::zero(); dim];
        l[i] = F::one();
        Self::linear_form(F::zero(), &l)
    }

    /// `sum w_i x_i^2`.
    pub fn diagonal(weights: &[F]) -> Self {
        Self::new(F::zero(), &vec![F::zero(); weights.len()], &Matrix::diagonal(weights))
    }

    pub fn eval(&self, x: &[F]) -> Result<F> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: x.len() });
        }
        let mut hom = Vec::with_capacity(x.len() + 1);
        hom.push(F::one());
        hom.extend_from_slice(x);
        self.matrix.quadratic_form(&hom)
    }

    pub fn scale(&self, c: F) -> Self {
        QuadraticPoly { matrix: self.matrix.map(|v| *v * c) }
    }

    /// Whether the polynomial ignores variable `i`.
    pub fn independent_of(&self, i: usize) -> bool {
        (0..=self.dim()).all(|c| self.matrix[(i + 1, c)] == F::zero())
    }
}

/// One factor of the target chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[serde(bound(serialize = "F: Real + Serialize", deserialize = "F: Real + DeserializeOwned"))]
pub enum TargetElementary<F> {
    Affine(AffineMap<F>),
    /// `X_index <- sign * X_index + q(X)`, `q` free of `X_index`.
    QuadShear { index: usize, sign: i8, q: QuadraticPoly<F> },
}

impl<F: Real> TargetElementary<F> {
    pub fn dim(&self) -> usize {
        match self {
            TargetElementary::Affine(a) => a.dim(),
            TargetElementary::QuadShear { q, .. } => q.dim(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            TargetElementary::Affine(a) => {
                if a.det().abs().as_f64() <= GUARD {
                    return Err(Error::Singular("target affine factor".into()));
                }
            }
            TargetElementary::QuadShear { index, sign, q } => {
                if *index >= q.dim() || !q.independent_of(*index) || sign.abs() != 1 {
                    return Err(Error::InvalidConfig(format!(
                        "malformed quadratic shear on coordinate {index}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn apply(&self, y: &[F]) -> Result<Vec<F>> {
        match self {
            TargetElementary::Affine(a) => a.apply(y),
            TargetElementary::QuadShear { index, sign, q } => {
                let shift = q.eval(y)?;
                let mut out = y.to_vec();
                out[*index] = F::from_i8(*sign).expect("sign") * y[*index] + shift;
                Ok(out)
            }
        }
    }

    pub fn inverse(&self) -> Result<TargetElementary<F>> {
        match self {
            TargetElementary::Affine(a) => Ok(TargetElementary::Affine(a.inverse()?)),
            TargetElementary::QuadShear { index, sign, q } => {
                let s = F::from_i8(*sign).expect("sign");
                Ok(TargetElementary::QuadShear { index: *index, sign: *sign, q: q.scale(-s) })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Real + Serialize", deserialize = "F: Real + DeserializeOwned"))]
pub struct SourceStage<F> {
    pub stage: String,
    pub map: AffineMap<F>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Real + Serialize", deserialize = "F: Real + DeserializeOwned"))]
pub struct TargetStage<F> {
    pub stage: String,
    pub map: TargetElementary<F>,
}

/// Expected closed form of `T_{<t} ∘ L ∘ h_{<s}` after a named stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Real + Serialize", deserialize = "F: Real + DeserializeOwned"))]
pub struct Checkpoint<F> {
    pub stage: String,
    /// Number of leading source factors applied.
    pub source_prefix: usize,
    /// Number of leading target factors applied.
    pub target_prefix: usize,
    pub components: Vec<QuadraticPoly<F>>,
}

/// Which distance-squared mapping a witness normalizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Lorentz,
    Euclid,
}

/// `H ∘ L ∘ h = N` with `h = source` and `H = target` applied in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Real + Serialize", deserialize = "F: Real + DeserializeOwned"))]
pub struct Witness<F> {
    pub metric: Metric,
    pub n: usize,
    pub k: usize,
    pub normal_form: NormalForm,
    pub case: String,
    pub likeness: Option<Likeness>,
    pub source: AffineMap<F>,
    pub source_stages: Vec<SourceStage<F>>,
    pub target: Vec<TargetStage<F>>,
    #[serde(default)]
    pub checkpoints: Vec<Checkpoint<F>>,
    #[serde(default)]
    pub alpha: Option<Vec<F>>,
}


impl<F: Real> Witness<F> {
    /// Structural checks for witnesses read from outside.
    pub fn validate(&self) -> Result<()> {
        self.normal_form.validate()?;
        if self.normal_form.n != self.n || self.normal_form.k() != self.k {
            return Err(Error::InvalidConfig("normal form does not match witness dimensions".into()));
        }
        if self.source.dim() != self.n + 1 || self.source.linear.ncols() != self.n + 1 {
            return Err(Error::DimensionMismatch { expected: self.n + 1, found: self.source.dim() });
        }
        for t in &self.target {
            if t.map.dim() != self.k + 1 {
                return Err(Error::DimensionMismatch { expected: self.k + 1, found: t.map.dim() });
            }
            t.map.validate()?;
        }
        for s in &self.source_stages {
            if s.map.dim() != self.n + 1 {
                return Err(Error::DimensionMismatch { expected: self.n + 1, found: s.map.dim() });
            }
        }
        Ok(())
    }

    /// `H(y)`.
    pub fn apply_target(&self, y: &[F]) -> Result<Vec<F>> {
        self.apply_target_prefix(y, self.target.len())
    }

    pub fn apply_target_prefix(&self, y: &[F], count: usize) -> Result<Vec<F>> {
        if y.len() != self.k + 1 {
            return Err(Error::DimensionMismatch { expected: self.k + 1, found: y.len() });
        }
        self.target[..count].iter().try_fold(y.to_vec(), |acc, t| t.map.apply(&acc))
    }

    /// Composition of the first `count` source factors.
    pub fn source_prefix(&self, count: usize) -> Result<AffineMap<F>> {
        self.source_stages[..count]
            .iter()
            .try_fold(AffineMap::identity(self.n + 1), |acc, s| acc.compose(&s.map))
    }

    /// The Lorentz factor `H4`, when the branch has one.
    pub fn h4(&self) -> Option<&AffineMap<F>> {
        self.source_stages.iter().find(|s| s.stage == "H4").map(|s| &s.map)
    }

    /// `L(x)` or `D(x)` according to the metric.
    pub fn distance_values(&self, config: &PointConfig<F>, x: &Vector<F>) -> Result<Vec<F>> {
        match self.metric {
            Metric::Lorentz => eval_lorentz_dsq(config, x),
            Metric::Euclid => eval_euclid_dsq(config, x),
        }
    }
}

/// `H(L(h(x)))`.
pub fn apply_witness<F: Real>(witness: &Witness<F>, config: &PointConfig<F>, x: &[F]) -> Result<Vec<F>> {
    if config.n() != witness.n || config.k() != witness.k {
        return Err(Error::DimensionMismatch { expected: witness.k + 1, found: config.k() + 1 });
    }
    let hx = Vector::new(witness.source.apply(x)?)?;
    witness.apply_target(&witness.distance_values(config, &hx)?)
}

/// `T_{<t}(L(h_{<s}(x)))` for a checkpoint.
pub fn apply_checkpoint<F: Real>(
    witness: &Witness<F>,
    config: &PointConfig<F>,
    checkpoint: &Checkpoint<F>,
    x: &[F],
) -> Result<Vec<F>> {
    let h = witness.source_prefix(checkpoint.source_prefix)?;
    let hx = Vector::new(h.apply(x)?)?;
    witness.apply_target_prefix(&witness.distance_values(config, &hx)?, checkpoint.target_prefix)
}

pub fn invert_source<F: Real>(witness: &Witness<F>) -> Result<AffineMap<F>> {
    witness.source.inverse()
}

/// `H^{-1}(y)`, undoing the chain factor by factor in reverse.
pub fn invert_target_point<F: Real>(witness: &Witness<F>, y: &[F]) -> Result<Vec<F>> {
    if y.len() != witness.k + 1 {
        return Err(Error::DimensionMismatch { expected: witness.k + 1, found: y.len() });
    }
    witness.target.iter().rev().try_fold(y.to_vec(), |acc, t| t.map.inverse()?.apply(&acc))
}

fn inner<F: Real>(metric: Metric, a: &Vector<F>, b: &Vector<F>) -> F {
    match metric {
        Metric::Lorentz => lorentz_inner(a, b),
        Metric::Euclid => euclid_inner(a, b),
    }
    .expect("equal lengths")
}

fn h1_for<F: Real>(config: &PointConfig<F>, metric: Metric) -> TargetElementary<F> {
    let k = config.k();
    let half = lit::<F>(0.5);
    let mut m = Matrix::zeros(k + 1, k + 1);
    let mut t = vec![F::zero(); k + 1];
    for (i, d) in config.differences().iter().enumerate() {
        m[(i, 0)] = half;
        m[(i, i + 1)] = -half;
        t[i] = half * inner(metric, d, d);
    }
    m[(k, 0)] = F::one();
    TargetElementary::Affine(AffineMap { linear: m, translation: t })
}

/// `H1`: component `i < k` is `(X_0 - X_{i+1} + <p_0 - p_{i+1}, p_0 - p_{i+1}>)/2`,
/// component `k` is `X_0`.
pub fn step1_target<F: Real>(config: &PointConfig<F>) -> TargetElementary<F> {
    h1_for(config, Metric::Lorentz)
}

/// `H2(x) = (-x_0 + p_00, x_1 + p_01, ..., x_n + p_0n)`.
pub fn step2_source<F: Real>(config: &PointConfig<F>) -> AffineMap<F> {
    let n = config.n();
    let mut m = Matrix::identity(n + 1);
    m[(0, 0)] = -F::one();
    AffineMap { linear: m, translation: config.points()[0].coords().to_vec() }
}

/// Which Step 3 construction applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Step3Case {
    /// `e_0 ∉ V`.
    Generic,
    /// `e_0 ∈ V`.
    Special,
}

/// Output of the orthonormalization step.
#[derive(Debug, Clone, PartialEq)]
pub struct Step3<F> {
    pub case: Step3Case,
    pub n: usize,
    pub k: usize,
    pub j: usize,
    /// `j x j`, with `A B` having the promised shape.
    pub b: Matrix<F>,
    /// `n x n` orthogonal completion.
    pub c: Matrix<F>,
    /// First row of `A B`; generic case only.
    pub alpha: Option<Vec<F>>,
    pub h3: TargetElementary<F>,
    pub h4: AffineMap<F>,
}

/// Target map replacing forms `0..j` by `B^T` applied to them.
fn block_transpose<F: Real>(b: &Matrix<F>, k: usize) -> TargetElementary<F> {
    let j = b.nrows();
    let mut m = Matrix::identity(k + 1);
    for r in 0..j {
        for c in 0..j {
            m[(r, c)] = b[(c, r)];
        }
    }
    TargetElementary::Affine(AffineMap::linear(m))
}

fn lorentz_embed<F: Real>(c: &Matrix<F>) -> AffineMap<F> {
    let n = c.nrows();
    let mut m = Matrix::identity(n + 1);
    for r in 0..n {
        for s in 0..n {
            m[(r + 1, s + 1)] = c[(r, s)];
        }
    }
    AffineMap::linear(m)
}

fn spatial_rows<F: Real>(a: &Matrix<F>) -> Matrix<F> {
    a.select_rows(&(1..a.nrows()).collect::<Vec<_>>())
}

/// Orthonormalization for forms `a_s . x` (columns of `a`, `(n+1) x j`)
/// inside a target of dimension `k + 1`.
fn orthonormalize<F: Real>(a: &Matrix<F>, case: Step3Case, k: usize) -> Result<Step3<F>> {
    let (n, j) = (a.nrows() - 1, a.ncols());
    let tilde = spatial_rows(a);
    let guard = |detail: String| Error::Guard { stage: "H3".into(), detail };
    match case {
        Step3Case::Generic => {
            let qr = pivoted_mgs(&tilde, QR_TOL, j);
            if qr.rank() < j {
                return Err(guard(format!("spatial block has rank {} < {j}", qr.rank())));
            }
            let b = qr.right_inverse_factor(j);
            let ab = a.mul(&b)?;
            let alpha = ab.row(0).to_vec();
            let c = complete_orthonormal(&qr.q);
            Ok(Step3 {
                case,
                n,
                k,
                j,
                h3: block_transpose(&b, k),
                h4: lorentz_embed(&c),
                b,
                c,
                alpha: Some(alpha),
            })
        }
        Step3Case::Special => {
            let qt = pivoted_mgs(&tilde, 0.0, j - 1);
            if qt.rank() < j - 1 {
                return Err(guard(format!("spatial block has rank {} < {}", qt.rank(), j - 1)));
            }
            let mut w = Matrix::zeros(n + 1, j);
            w[(0, 0)] = F::one();
            for c in 0..j - 1 {
                for r in 0..n {
                    w[(r + 1, c + 1)] = qt.q[(r, c)];
                }
            }
            let qa = pivoted_mgs(a, QR_TOL, j);
            if qa.rank() < j {
                return Err(guard(format!("forms have rank {} < {j}", qa.rank())));
            }
            let b = qa.right_inverse_factor(j).mul(&qa.q.transpose())?.mul(&w)?;
            let c = complete_orthonormal(&qt.q);
            Ok(Step3 {
                case,
                n,
                k,
                j,
                h3: block_transpose(&b, k),
                h4: lorentz_embed(&c),
                b,
                c,
                alpha: None,
            })
        }
    }
}

/// Step 3 for a configuration in general position.
pub fn step3_orthonormalize<F: Real>(config: &PointConfig<F>, case: Step3Case) -> Result<Step3<F>> {
    let rec = recognition_subspace(config);
    if rec.dim != config.k() || rec.dim > config.n() {
        return Err(Error::Precondition(format!(
            "orthonormalization needs dim V = k <= n (k={}, n={}, dim V={})",
            config.k(),
            config.n(),
            rec.dim
        )));
    }
    orthonormalize(&config.difference_matrix(), case, config.k())
}

/// `sum α_i^2`; exceeds 1 exactly when `V` is time-like.
pub fn lemma4_quantity<F: Real>(alpha: &[F]) -> F {
    alpha.iter().fold(F::zero(), |acc, a| acc + *a * *a)
}

/// A factor emitted by the reduction step.
#[derive(Debug, Clone, PartialEq)]
pub enum Factor<F> {
    Source(SourceStage<F>),
    Target(TargetStage<F>),
}

fn src<F>(stage: &str, map: AffineMap<F>) -> Factor<F> {
    Factor::Source(SourceStage { stage: stage.into(), map })
}

fn tgt<F>(stage: &str, map: TargetElementary<F>) -> Factor<F> {
    Factor::Target(TargetStage { stage: stage.into(), map })
}

fn shear<F: Real>(k: usize, quad: Matrix<F>) -> TargetElementary<F> {
    TargetElementary::QuadShear {
        index: k,
        sign: 1,
        q: QuadraticPoly::new(F::zero(), &vec![F::zero(); k + 1], &quad),
    }
}

/// `w_i = u_i - α_i u_0` for `i = 1..=j`.
fn h5<F: Real>(n: usize, alpha: &[F]) -> AffineMap<F> {
    let mut m = Matrix::identity(n + 1);
    for (i, a) in alpha.iter().enumerate() {
        m[(i + 1, 0)] = -*a;
    }
    AffineMap::linear(m)
}

/// Completes the construction after Step 3.
pub fn step4_reduce<F: Real>(state: &Step3<F>, likeness: Likeness) -> Result<Vec<Factor<F>>> {
    let Step3 { n, k, j, .. } = *state;
    let mut out = Vec::new();
    let alpha = match (state.case, &state.alpha) {
        (Step3Case::Special, _) => {
            // last + X_0^2 - sum_{i<j} X_i^2, then (x_1..x_j, x_0, ...)
            let mut quad = Matrix::zeros(k + 1, k + 1);
            quad[(0, 0)] = F::one();
            for i in 1..j {
                quad[(i, i)] = -F::one();
            }
            out.push(tgt("H~5", shear(k, quad)));
            let perm: Vec<usize> = (1..=j).chain([0]).chain(j + 1..=n).collect();
            out.push(src("H~6", AffineMap::permutation(&perm)));
            return Ok(out);
        }
        (Step3Case::Generic, Some(alpha)) => alpha.clone(),
        (Step3Case::Generic, None) => {
            return Err(Error::Precondition("generic step 3 without α".into()));
        }
    };
    let s = lemma4_quantity(&alpha);
    let s1 = s - F::one();
    match likeness {
        Likeness::TimeLike | Likeness::SpaceLike => {
            if s1.abs().as_f64() <= GUARD {
                return Err(Error::Guard { stage: "H6".into(), detail: format!("|s - 1| = {:e}", s1.as_f64()) });
            }
            out.push(src("H5", h5(n, &alpha)));
            // last + (sum α_i X_{i-1})^2/(s-1) - sum X_{i-1}^2
            let mut quad = Matrix::zeros(k + 1, k + 1);
            for a in 0..j {
                for b in 0..j {
                    quad[(a, b)] = alpha[a] * alpha[b] / s1;
                }
                quad[(a, a)] = quad[(a, a)] - F::one();
            }
            out.push(tgt("H6", shear(k, quad)));
            let mut m = Matrix::identity(n + 1);
            m[(0, 0)] = F::one() / s1.abs().sqrt();
            for (i, a) in alpha.iter().enumerate() {
                m[(0, i + 1)] = *a / s1;
            }
            out.push(src("H7", AffineMap::linear(m)));
            if likeness == Likeness::SpaceLike && j == n {
                let mut flip = vec![F::one(); k + 1];
                flip[k] = -F::one();
                out.push(tgt("flip", TargetElementary::Affine(AffineMap::linear(Matrix::diagonal(&flip)))));
            }
        }
        Likeness::LightLike => {
            let mut alpha = alpha;
            let p = (0..j)
                .fold(0, |best, i| if alpha[i].abs() > alpha[best].abs() { i } else { best });
            if p != 0 {
                let mut sperm: Vec<usize> = (0..=n).collect();
                sperm.swap(1, p + 1);
                out.push(src("swap", AffineMap::permutation(&sperm)));
                let mut tperm: Vec<usize> = (0..=k).collect();
                tperm.swap(0, p);
                out.push(tgt("swap", TargetElementary::Affine(AffineMap::permutation(&tperm))));
                alpha.swap(0, p);
            }
            let a1 = alpha[0];
            if a1.abs().as_f64() <= GUARD {
                return Err(Error::Guard { stage: "H7'".into(), detail: format!("α_1 = {:e}", a1.as_f64()) });
            }
            out.push(src("H5", h5(n, &alpha)));
            let mut quad = Matrix::zeros(k + 1, k + 1);
            for a in 0..j {
                quad[(a, a)] = -F::one();
            }
            out.push(tgt("H6'", shear(k, quad)));
            // u_1 = -v_1/(2 α_1) - sum_{i>=2} α_i v_i / α_1
            let mut m = Matrix::identity(n + 1);
            m[(1, 1)] = -F::one() / (lit::<F>(2.0) * a1);
            for i in 1..j {
                m[(1, i + 1)] = -alpha[i] / a1;
            }
            out.push(src("H7'", AffineMap::linear(m)));
            // X_0 <- -2 (α_1 X_0 + sum_{i=1}^{j-1} α_{i+1} X_i)
            let mut t = Matrix::identity(k + 1);
            for i in 0..j {
                t[(0, i)] = lit::<F>(-2.0) * alpha[i];
            }
            out.push(tgt("H8'", TargetElementary::Affine(AffineMap::linear(t))));
        }
    }
    Ok(out)
}

struct Chain<F> {
    metric: Metric,
    n: usize,
    k: usize,
    source: Vec<SourceStage<F>>,
    target: Vec<TargetStage<F>>,
    checkpoints: Vec<Checkpoint<F>>,
}

impl<F: Real> Chain<F> {
    fn new(metric: Metric, n: usize, k: usize) -> Self {
        Chain { metric, n, k, source: Vec::new(), target: Vec::new(), checkpoints: Vec::new() }
    }

    fn src(&mut self, stage: &str, map: AffineMap<F>) {
        self.source.push(SourceStage { stage: stage.into(), map });
    }

    fn tgt(&mut self, stage: &str, map: TargetElementary<F>) {
        self.target.push(TargetStage { stage: stage.into(), map });
    }

    fn push(&mut self, factors: Vec<Factor<F>>) {
        for f in factors {
            match f {
                Factor::Source(s) => self.source.push(s),
                Factor::Target(t) => self.target.push(t),
            }
        }
    }

    fn checkpoint(&mut self, stage: &str, components: Vec<QuadraticPoly<F>>) {
        debug_assert_eq!(components.len(), self.k + 1);
        self.checkpoints.push(Checkpoint {
            stage: stage.into(),
            source_prefix: self.source.len(),
            target_prefix: self.target.len(),
            components,
        });
    }

    /// `-x_0^2 + sum x_i^2`, or the plain sum of squares.
    fn square(&self) -> QuadraticPoly<F> {
        let mut w = vec![F::one(); self.n + 1];
        if self.metric == Metric::Lorentz {
            w[0] = -F::one();
        }
        QuadraticPoly::diagonal(&w)
    }

    /// Forms `rows[i] . x`, zeros up to `k`, then the square.
    fn linear_shape(&self, rows: &[Vec<F>]) -> Vec<QuadraticPoly<F>> {
        let d = self.n + 1;
        let mut out: Vec<_> = rows.iter().map(|r| QuadraticPoly::linear_form(F::zero(), r)).collect();
        out.resize(self.k, QuadraticPoly::zero(d));
        out.push(self.square());
        out
    }

    fn finish(self, normal_form: NormalForm, case: String, likeness: Option<Likeness>, alpha: Option<Vec<F>>) -> Result<Witness<F>> {
        let source = self
            .source
            .iter()
            .try_fold(AffineMap::identity(self.n + 1), |acc, s| acc.compose(&s.map))?;
        Ok(Witness {
            metric: self.metric,
            n: self.n,
            k: self.k,
            normal_form,
            case,
            likeness,
            source,
            source_stages: self.source,
            target: self.target,
            checkpoints: self.checkpoints,
            alpha,
        })
    }
}

fn unit_rows<F: Real>(d: usize, indices: impl Iterator<Item = usize>) -> Vec<Vec<F>> {
    indices
        .map(|i| {
            let mut r = vec![F::zero(); d];
            r[i] = F::one();
            r
        })
        .collect()
}

/// Steps common to both metrics: point reordering, `H1`, translation,
/// elimination of dependent forms. Returns the reordered configuration in
/// the exact scalar and the independent forms in `F`.
fn prepare<S: Scalar, F: Real>(
    chain: &mut Chain<F>,
    config: &PointConfig<S>,
) -> Result<(PointConfig<S>, Matrix<F>, usize)> {
    let (n, k) = (config.n(), config.k());
    let rec = recognition_subspace(config);
    let j = rec.dim;
    let order: Vec<usize> = rec.independent.iter().copied().chain(rec.dependent()).collect();
    let cfg = config.permute_tail(&order)?;
    if order.iter().enumerate().any(|(i, &o)| o != i + 1) {
        let perm: Vec<usize> = [0].into_iter().chain(order.iter().copied()).collect();
        chain.tgt("P", TargetElementary::Affine(AffineMap::permutation(&perm)));
    }
    let cfg_f: PointConfig<F> = cfg.to_real();
    chain.tgt("H1", h1_for(&cfg_f, chain.metric));
    let p0 = &cfg_f.points()[0];
    let jp0: Vec<F> = match chain.metric {
        Metric::Lorentz => {
            let mut v = p0.coords().to_vec();
            v[0] = -v[0];
            v
        }
        Metric::Euclid => p0.coords().to_vec(),
    };
    let mut shape: Vec<QuadraticPoly<F>> = cfg_f
        .differences()
        .iter()
        .map(|d| {
            let mut l = d.coords().to_vec();
            if chain.metric == Metric::Lorentz {
                l[0] = -l[0];
            }
            QuadraticPoly::linear_form(-inner(chain.metric, p0, d), &l)
        })
        .collect();
    let mut w = vec![F::one(); n + 1];
    if chain.metric == Metric::Lorentz {
        w[0] = -F::one();
    }
    let lin: Vec<F> = jp0.iter().map(|v| lit::<F>(-2.0) * *v).collect();
    shape.push(QuadraticPoly::new(inner(chain.metric, p0, p0), &lin, &Matrix::diagonal(&w)));
    chain.checkpoint("step1", shape);

    match chain.metric {
        Metric::Lorentz => chain.src("H2", step2_source(&cfg_f)),
        Metric::Euclid => chain.src("H2", AffineMap::new(Matrix::identity(n + 1), p0.coords().to_vec())?),
    }
    let diffs: Vec<Vec<F>> = cfg_f.differences().into_iter().map(Vector::into_coords).collect();
    chain.checkpoint("step2", chain.linear_shape(&diffs));

    let a_exact = cfg.difference_matrix();
    let independent: Vec<usize> = (0..j).collect();
    let a_s = a_exact.select_columns(&independent);
    if j < k {
        let mut e = Matrix::<F>::identity(k + 1);
        for col in j..k {
            let c = a_s.solve_consistent(&a_exact.column(col)).ok_or_else(|| Error::Guard {
                stage: "E".into(),
                detail: format!("difference {} is not in the span of the independent prefix", col + 1),
            })?;
            for (s, cs) in c.iter().enumerate() {
                e[(col, s)] = -F::from_scalar(cs);
            }
        }
        chain.tgt("E", TargetElementary::Affine(AffineMap::linear(e)));
        chain.checkpoint("reduce", chain.linear_shape(&diffs[..j]));
    }
    let exact_inverse = if j == n + 1 { Some(a_s.inverse()?) } else { None };
    let a_f = a_s.map(F::from_scalar);
    let a_use = match exact_inverse {
        Some(inv) => inv.map(F::from_scalar),
        None => a_f,
    };
    Ok((cfg, a_use, j))
}

/// Moves the quadratic slot from `k` to `j`.
fn tau<F: Real>(chain: &mut Chain<F>, j: usize) {
    let k = chain.k;
    if j < k {
        let perm: Vec<usize> = (0..j).chain([k]).chain(j..k).collect();
        chain.tgt("tau", TargetElementary::Affine(AffineMap::permutation(&perm)));
    }
}

/// Inclusion branch: forms become `x_0..x_n` and the square is removed.
fn inclusion<F: Real>(chain: &mut Chain<F>, a_inv: &Matrix<F>) {
    let (n, k) = (chain.n, chain.k);
    chain.tgt("H3", block_transpose(a_inv, k));
    let rows = unit_rows(n + 1, 0..=n);
    chain.checkpoint("step3", chain.linear_shape(&rows));
    let mut quad = Matrix::zeros(k + 1, k + 1);
    for i in 0..=n {
        quad[(i, i)] = -F::one();
    }
    if chain.metric == Metric::Lorentz {
        quad[(0, 0)] = F::one();
    }
    chain.tgt("H~5", shear(k, quad));
}

fn same_point<S: Scalar, F: Real>(config: &PointConfig<S>) -> Result<Witness<F>> {
    let report = classify_lorentz(config);
    let (n, k) = (config.n(), config.k());
    let mut chain = Chain::new(Metric::Lorentz, n, k);
    let mut m = Matrix::identity(k + 1);
    for i in 1..=k {
        m[(i, 0)] = -F::one();
    }
    chain.tgt("S", TargetElementary::Affine(AffineMap::linear(m)));
    let p0: Vec<F> = config.points()[0].coords().iter().map(F::from_scalar).collect();
    chain.src("T", AffineMap::new(Matrix::identity(n + 1), p0)?);
    chain.finish(report.normal_form, report.theorem_case, None, None)
}

/// Builds the witness for `L` in `f64`.
pub fn build_witness<S: Scalar>(config: &PointConfig<S>) -> Result<Witness<f64>> {
    build_witness_in(config)
}

/// Builds the witness for `L`; rank and case decisions use `S`, the
/// numerical factors use `F`.
pub fn build_witness_in<S: Scalar, F: Real>(config: &PointConfig<S>) -> Result<Witness<F>> {
    let report = classify_lorentz(config);
    let (n, k, j) = (report.n, report.k, report.recognition_dim);
    if j == 0 {
        return same_point(config);
    }
    let likeness = report.likeness.expect("j > 0");
    let mut chain = Chain::new(Metric::Lorentz, n, k);
    let (cfg, a, j) = prepare::<S, F>(&mut chain, config)?;
    let mut alpha = None;
    if Branch::of(j, k, n) == Branch::Spanning {
        inclusion(&mut chain, &a);
    } else {
        let head = PointConfig::new(n, cfg.points()[..=j].to_vec())?;
        let case = if contains_time_axis(&head) { Step3Case::Special } else { Step3Case::Generic };
        let state = orthonormalize(&a, case, k)?;
        chain.tgt("H3", state.h3.clone());
        chain.src("H4", state.h4.clone());
        let rows: Vec<Vec<F>> = match (&state.alpha, case) {
            (Some(al), Step3Case::Generic) => al
                .iter()
                .enumerate()
                .map(|(i, a)| {
                    let mut r = vec![F::zero(); n + 1];
                    r[0] = *a;
                    r[i + 1] = F::one();
                    r
                })
                .collect(),
            _ => unit_rows(n + 1, 0..j),
        };
        chain.checkpoint("step3", chain.linear_shape(&rows));
        if let Some(al) = &state.alpha {
            check_lemma4(al, likeness)?;
        }
        chain.push(step4_reduce(&state, likeness)?);
        alpha = state.alpha;
        tau(&mut chain, j);
    }
    chain.finish(report.normal_form, report.theorem_case, Some(likeness), alpha)
}

fn check_lemma4<F: Real>(alpha: &[F], likeness: Likeness) -> Result<()> {
    let s1 = (lemma4_quantity(alpha) - F::one()).as_f64();
    let ok = match likeness {
        Likeness::TimeLike => s1 > GUARD,
        Likeness::SpaceLike => s1 < -GUARD,
        Likeness::LightLike => s1.abs() < 1e-8,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Guard {
            stage: "lemma4".into(),
            detail: format!("sum of α^2 - 1 = {s1:e} disagrees with {likeness}"),
        })
    }
}

/// Witness for the Euclidean mapping `D`, in `f64`.
pub fn build_euclid_witness<S: Scalar>(config: &PointConfig<S>) -> Result<Witness<f64>> {
    build_euclid_witness_in(config)
}

pub fn build_euclid_witness_in<S: Scalar, F: Real>(config: &PointConfig<S>) -> Result<Witness<F>> {
    let report = classify_euclid(config)?;
    let (n, k) = (report.n, report.k);
    let mut chain = Chain::new(Metric::Euclid, n, k);
    let (_, a, j) = prepare::<S, F>(&mut chain, config)?;
    if j == n + 1 {
        inclusion(&mut chain, &a);
    } else {
        let qr = pivoted_mgs(&a, QR_TOL, j);
        if qr.rank() < j {
            return Err(Error::Guard { stage: "H3".into(), detail: "forms are rank deficient".into() });
        }
        let b = qr.right_inverse_factor(j);
        chain.tgt("H3", block_transpose(&b, k));
        // z = Q_full u with u = (w_1..w_j, w_0, w_{j+1}, ...)
        let full = complete_orthonormal(&qr.q);
        let perm: Vec<usize> = (1..=j).chain([0]).chain(j + 1..=n).collect();
        let h4 = AffineMap::linear(full).compose(&AffineMap::permutation(&perm))?;
        chain.src("H4", h4);
        chain.checkpoint("step3", chain.linear_shape(&unit_rows(n + 1, 1..=j)));
        let mut quad = Matrix::zeros(k + 1, k + 1);
        for i in 0..j {
            quad[(i, i)] = -F::one();
        }
        chain.tgt("H5", shear(k, quad));
    }
    chain.finish(report.normal_form, report.theorem_case, None, None)
}
