//! Distance-squared mappings, their normal forms, and the classification
//! dispatch.
//!
//! For points `p_0, ..., p_k` of `R^{1,n}` the Lorentzian mapping is
//! `L(x) = (<x-p_0, x-p_0>, ..., <x-p_k, x-p_k>)` and the Euclidean mapping
//! `D` uses the dot product instead. The class of `L` up to A-equivalence is
//! determined by `j = dim V` where `V` is spanned by the differences
//! `p_i - p_0`, together with the likeness of `V`:
//!
//! | configuration          | time-like         | space-like          | light-like                  |
//! |------------------------|-------------------|---------------------|-----------------------------|
//! | `j = 0`                | same point        |                     |                             |
//! | `j = k < n`            | `Φ_k`             | `Ψ_k`               | `(x_1..x_k, x_0 x_1 + …)`   |
//! | `j = k = n`            | `Φ_n`             | `Φ_n`               | `(x_1..x_n, x_0 x_1)`       |
//! | `j = n + 1`            | inclusion         |                     |                             |
//! | `0 < j < k`, `j < n`   | `τ∘Φ_j`           | `τ∘Ψ_j`             | padded light-like fold      |
//! | `0 < j = n < k`        | `τ∘Φ_n`           | `τ∘Φ_n`             | `(x_1..x_n, x_0 x_1, 0..0)` |

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lorentz::{euclid_inner, lorentz_inner, subspace_inertia, Likeness, SubspaceBasis, Vector};
use crate::matrix::Matrix;
use crate::scalar::{Real, Scalar};

/// Threshold under which a float pivot makes a verdict borderline.
pub const BORDERLINE_TOLERANCE: f64 = 1e-9;

/// The points `p_0, ..., p_k` of `R^{1,n}`, `k >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointConfig<S> {
    n: usize,
    points: Vec<Vector<S>>,
}

impl<S: Scalar> PointConfig<S> {
    pub fn new(n: usize, points: Vec<Vector<S>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig("ambient index n must be at least 1".into()));
        }
        if points.len() < 2 {
            return Err(Error::InvalidConfig(format!(
                "need at least two points, got {}",
                points.len()
            )));
        }
        for p in &points {
            if p.len() != n + 1 {
                return Err(Error::DimensionMismatch { expected: n + 1, found: p.len() });
            }
        }
        Ok(PointConfig { n, points })
    }

    /// Builds a configuration from integer coordinates; `n` is inferred.
    pub fn from_ints(points: &[&[i64]]) -> Result<Self> {
        let n = points.first().map_or(0, |p| p.len().saturating_sub(1));
        let points = points.iter().map(|p| Vector::from_ints(p)).collect::<Result<_>>()?;
        Self::new(n, points)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of points minus one.
    pub fn k(&self) -> usize {
        self.points.len() - 1
    }

    pub fn points(&self) -> &[Vector<S>] {
        &self.points
    }

    /// The differences `p_i - p_0` for `i = 1..=k`.
    pub fn differences(&self) -> Vec<Vector<S>> {
        self.points[1..]
            .iter()
            .map(|p| p.sub(&self.points[0]).expect("lengths validated"))
            .collect()
    }

    /// `(n+1) x k` matrix with columns `p_i - p_0`.
    pub fn difference_matrix(&self) -> Matrix<S> {
        let cols: Vec<Vec<S>> = self.differences().into_iter().map(Vector::into_coords).collect();
        Matrix::from_columns(&cols).expect("lengths validated")
    }

    pub fn to_real<F: Real>(&self) -> PointConfig<F> {
        PointConfig { n: self.n, points: self.points.iter().map(Vector::to_real).collect() }
    }

    pub fn translate(&self, shift: &Vector<S>) -> Result<Self> {
        let points = self.points.iter().map(|p| p.add(shift)).collect::<Result<_>>()?;
        Self::new(self.n, points)
    }

    /// Applies a linear map to every point.
    pub fn transform(&self, g: &Matrix<S>) -> Result<Self> {
        let points = self
            .points
            .iter()
            .map(|p| Vector::new(g.mul_vec(p.coords())?))
            .collect::<Result<_>>()?;
        Self::new(self.n, points)
    }

    /// Reorders `p_1..p_k` so that `order[i]` becomes the new `p_{i+1}`
    /// (entries are 1-based point indices); `p_0` stays first.
    pub fn permute_tail(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.k() + 1];
        let mut points = vec![self.points[0].clone()];
        for &i in order {
            if i == 0 || i > self.k() || seen[i] {
                return Err(Error::InvalidConfig(format!("bad permutation {order:?}")));
            }
            seen[i] = true;
            points.push(self.points[i].clone());
        }
        Self::new(self.n, points)
    }
}

fn check_point<S: Scalar>(config: &PointConfig<S>, x: &[S]) -> Result<()> {
    if x.len() != config.n + 1 {
        return Err(Error::DimensionMismatch { expected: config.n + 1, found: x.len() });
    }
    Ok(())
}

/// `L(x)`: component `i` is `<x - p_i, x - p_i>`.
pub fn eval_lorentz_dsq<S: Scalar>(config: &PointConfig<S>, x: &Vector<S>) -> Result<Vec<S>> {
    check_point(config, x.coords())?;
    config
        .points
        .iter()
        .map(|p| {
            let d = x.sub(p)?;
            lorentz_inner(&d, &d)
        })
        .collect()
}

/// `D(x)`: component `i` is `(x - p_i) . (x - p_i)`.
pub fn eval_euclid_dsq<S: Scalar>(config: &PointConfig<S>, x: &Vector<S>) -> Result<Vec<S>> {
    check_point(config, x.coords())?;
    config
        .points
        .iter()
        .map(|p| {
            let d = x.sub(p)?;
            euclid_inner(&d, &d)
        })
        .collect()
}

/// The recognition subspace `V = span{p_i - p_0}` with its exact dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct RecognitionSubspace<S> {
    pub differences: Vec<Vector<S>>,
    /// `dim V`.
    pub dim: usize,
    /// Greedy maximal independent subset, as 1-based point indices in
    /// increasing order.
    pub independent: Vec<usize>,
    pub min_abs_pivot: f64,
}

impl<S: Scalar> RecognitionSubspace<S> {
    /// Basis of `V` from the independent differences; `None` when `V = {0}`.
    pub fn basis(&self) -> Option<SubspaceBasis<S>> {
        if self.dim == 0 {
            return None;
        }
        let vectors = self.independent.iter().map(|&i| self.differences[i - 1].clone()).collect();
        Some(SubspaceBasis::new(vectors).expect("independent by construction"))
    }

    /// Indices `1..=k` not in the independent subset.
    pub fn dependent(&self) -> Vec<usize> {
        (1..=self.differences.len()).filter(|i| !self.independent.contains(i)).collect()
    }
}

pub fn recognition_subspace<S: Scalar>(config: &PointConfig<S>) -> RecognitionSubspace<S> {
    let echelon = S::echelon_of(&config.difference_matrix());
    RecognitionSubspace {
        differences: config.differences(),
        dim: echelon.pivots.len(),
        independent: echelon.pivots.iter().map(|c| c + 1).collect(),
        min_abs_pivot: echelon.min_abs_pivot,
    }
}

/// `dim V = k`.
pub fn is_general_position<S: Scalar>(config: &PointConfig<S>) -> bool {
    recognition_subspace(config).dim == config.k()
}

/// Whether the time axis `T = span{e_0}` lies in `V`.
pub fn contains_time_axis<S: Scalar>(config: &PointConfig<S>) -> bool {
    let rec = recognition_subspace(config);
    if rec.dim == 0 {
        return false;
    }
    let mut cols: Vec<Vec<S>> =
        rec.independent.iter().map(|&i| rec.differences[i - 1].coords().to_vec()).collect();
    cols.push(Vector::<S>::basis(config.n, 0).into_coords());
    let m = Matrix::from_columns(&cols).expect("equal lengths");
    S::echelon_of(&m).pivots.len() == rec.dim
}

/// Normal form shapes, each with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FormKind {
    /// `(x_1..x_k, x_0^2 + sum_{i>k} x_i^2)`, `k <= n`.
    DefiniteFold { k: usize },
    /// `(x_1..x_k, -x_0^2 + sum_{i>k} x_i^2)`, `k < n`.
    IndefiniteFold { k: usize },
    /// `(x_1..x_k, x_0 x_1 + sum_{i>k} x_i^2)`, `k <= n`.
    LightLikeFold { k: usize },
    /// `(x_0..x_n, 0..0)` into `R^{k+1}`, `k > n`.
    Inclusion { k: usize },
    /// Definite fold of rank `j` padded with zeros into `R^{k+1}`.
    DegenerateDefinite { j: usize, k: usize },
    DegenerateIndefinite { j: usize, k: usize },
    DegenerateLightLike { j: usize, k: usize },
    /// `(-x_0^2 + sum x_i^2, 0..0)` into `R^{k+1}`.
    SamePoint { k: usize },
}

/// A normal form on `R^{1,n}` together with its ambient index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "NormalFormDoc", into = "NormalFormDoc")]
pub struct NormalForm {
    pub n: usize,
    pub kind: FormKind,
}

#[derive(Clone, Copy)]
enum Core {
    Fold(bool),
    Light,
}

impl NormalForm {
    pub fn new(n: usize, kind: FormKind) -> Result<Self> {
        let nf = NormalForm { n, kind };
        nf.validate()?;
        Ok(nf)
    }

    pub fn validate(&self) -> Result<()> {
        use FormKind::*;
        let n = self.n;
        let ok = n >= 1
            && match self.kind {
                DefiniteFold { k } | LightLikeFold { k } => (1..=n).contains(&k),
                IndefiniteFold { k } => k >= 1 && k < n,
                Inclusion { k } => k > n,
                DegenerateDefinite { j, k } | DegenerateLightLike { j, k } => {
                    j >= 1 && j < k && j <= n
                }
                DegenerateIndefinite { j, k } => j >= 1 && j < k && j < n,
                SamePoint { k } => k >= 1,
            };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidNormalForm(format!("{:?} with n = {n}", self.kind)))
        }
    }

    /// `k`, so that the form maps into `R^{k+1}`.
    pub fn k(&self) -> usize {
        use FormKind::*;
        match self.kind {
            DefiniteFold { k }
            | IndefiniteFold { k }
            | LightLikeFold { k }
            | Inclusion { k }
            | DegenerateDefinite { k, .. }
            | DegenerateIndefinite { k, .. }
            | DegenerateLightLike { k, .. }
            | SamePoint { k } => k,
        }
    }

    pub fn tag(&self) -> &'static str {
        use FormKind::*;
        match self.kind {
            DefiniteFold { .. } => "definite_fold",
            IndefiniteFold { .. } => "indefinite_fold",
            LightLikeFold { .. } => "lightlike_fold",
            Inclusion { .. } => "inclusion",
            DegenerateDefinite { .. } => "degenerate_definite_fold",
            DegenerateIndefinite { .. } => "degenerate_indefinite_fold",
            DegenerateLightLike { .. } => "degenerate_lightlike_fold",
            SamePoint { .. } => "same_point",
        }
    }

    pub fn params(&self) -> BTreeMap<String, usize> {
        use FormKind::*;
        let mut p = BTreeMap::new();
        p.insert("n".to_string(), self.n);
        p.insert("k".to_string(), self.k());
        match self.kind {
            DegenerateDefinite { j, .. }
            | DegenerateIndefinite { j, .. }
            | DegenerateLightLike { j, .. } => {
                p.insert("j".to_string(), j);
            }
            _ => {}
        }
        p
    }

    /// Evaluates the normal form at `x`.
    pub fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        use FormKind::*;
        self.validate()?;
        if x.len() != self.n + 1 {
            return Err(Error::DimensionMismatch { expected: self.n + 1, found: x.len() });
        }
        let k = self.k();
        let mut out = match self.kind {
            DefiniteFold { k } => core_form(x, k, Core::Fold(true)),
            IndefiniteFold { k } => core_form(x, k, Core::Fold(false)),
            LightLikeFold { k } => core_form(x, k, Core::Light),
            DegenerateDefinite { j, .. } => core_form(x, j, Core::Fold(true)),
            DegenerateIndefinite { j, .. } => core_form(x, j, Core::Fold(false)),
            DegenerateLightLike { j, .. } => core_form(x, j, Core::Light),
            Inclusion { .. } => x.to_vec(),
            SamePoint { .. } => {
                let q = x[1..].iter().fold(-(x[0].clone() * x[0].clone()), |acc, v| {
                    acc + v.clone() * v.clone()
                });
                vec![q]
            }
        };
        out.resize(k + 1, S::zero());
        Ok(out)
    }
}

/// `(x_1..x_j, q)` where `q` is `±x_0^2` or `x_0 x_1`, plus `sum_{i>j} x_i^2`.
fn core_form<S: Scalar>(x: &[S], j: usize, core: Core) -> Vec<S> {
    let tail = x[j + 1..].iter().fold(S::zero(), |acc, v| acc + v.clone() * v.clone());
    let head = match core {
        Core::Fold(true) => x[0].clone() * x[0].clone(),
        Core::Fold(false) => -(x[0].clone() * x[0].clone()),
        Core::Light => x[0].clone() * x[1].clone(),
    };
    let mut out: Vec<S> = x[1..=j].to_vec();
    out.push(head + tail);
    out
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.tag())?;
        let params: Vec<String> = self.params().iter().map(|(k, v)| format!("{k}={v}")).collect();
        write!(f, "({})", params.join(", "))
    }
}

#[derive(Serialize, Deserialize)]
struct NormalFormDoc {
    tag: String,
    params: BTreeMap<String, usize>,
}

impl From<NormalForm> for NormalFormDoc {
    fn from(nf: NormalForm) -> Self {
        NormalFormDoc { tag: nf.tag().to_string(), params: nf.params() }
    }
}

impl TryFrom<NormalFormDoc> for NormalForm {
    type Error = Error;

    fn try_from(doc: NormalFormDoc) -> Result<Self> {
        use FormKind::*;
        let get = |name: &str| {
            doc.params
                .get(name)
                .copied()
                .ok_or_else(|| Error::Parse(format!("normal form missing parameter {name}")))
        };
        let (n, k) = (get("n")?, get("k")?);
        let kind = match doc.tag.as_str() {
            "definite_fold" => DefiniteFold { k },
            "indefinite_fold" => IndefiniteFold { k },
            "lightlike_fold" => LightLikeFold { k },
            "inclusion" => Inclusion { k },
            "degenerate_definite_fold" => DegenerateDefinite { j: get("j")?, k },
            "degenerate_indefinite_fold" => DegenerateIndefinite { j: get("j")?, k },
            "degenerate_lightlike_fold" => DegenerateLightLike { j: get("j")?, k },
            "same_point" => SamePoint { k },
            other => return Err(Error::Parse(format!("unknown normal form tag {other:?}"))),
        };
        NormalForm::new(n, kind)
    }
}

pub fn eval_normal_form<S: Scalar>(nf: &NormalForm, x: &Vector<S>) -> Result<Vec<S>> {
    nf.eval(x.coords())
}

/// Which branch of the classification a configuration falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `j = k < n`.
    GeneralBelow,
    /// `j = k = n`.
    GeneralFull,
    /// `j = n + 1`.
    Spanning,
    /// `0 < j < k`, `j < n`.
    DegenerateBelow,
    /// `0 < j = n < k`.
    DegenerateFull,
    /// `j = 0`.
    SamePoint,
}

impl Branch {
    pub fn of(j: usize, k: usize, n: usize) -> Branch {
        if j == 0 {
            Branch::SamePoint
        } else if j == n + 1 {
            Branch::Spanning
        } else if j == k && k < n {
            Branch::GeneralBelow
        } else if j == k {
            Branch::GeneralFull
        } else if j < n {
            Branch::DegenerateBelow
        } else {
            Branch::DegenerateFull
        }
    }
}

/// Result of classifying a configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub k: usize,
    pub n: usize,
    pub recognition_dim: usize,
    pub general_position: bool,
    /// `None` when `V = {0}`, and for Euclidean classifications.
    pub likeness: Option<Likeness>,
    pub normal_form: NormalForm,
    pub theorem_case: String,
    pub borderline: bool,
}

fn case_label(branch: Branch, likeness: Likeness) -> &'static str {
    use Likeness::*;
    match (branch, likeness) {
        (Branch::GeneralBelow, TimeLike) => "Theorem 1(1a)",
        (Branch::GeneralBelow, SpaceLike) => "Theorem 1(1b)",
        (Branch::GeneralBelow, LightLike) => "Theorem 1(1c)",
        (Branch::GeneralFull, LightLike) => "Theorem 1(2b)",
        (Branch::GeneralFull, _) => "Theorem 1(2a)",
        (Branch::Spanning, _) => "Theorem 1(3)",
        (Branch::DegenerateBelow, TimeLike) => "Appendix (1a)",
        (Branch::DegenerateBelow, SpaceLike) => "Appendix (1b)",
        (Branch::DegenerateBelow, LightLike) => "Appendix (1c)",
        (Branch::DegenerateFull, LightLike) => "Appendix (2b)",
        (Branch::DegenerateFull, _) => "Appendix (2a)",
        (Branch::SamePoint, _) => "Appendix (3)",
    }
}

/// Normal form selected by `(j, k, n, likeness)`.
pub fn select_normal_form(j: usize, k: usize, n: usize, likeness: Likeness) -> NormalForm {
    use FormKind::*;
    use Likeness::*;
    let kind = match (Branch::of(j, k, n), likeness) {
        (Branch::SamePoint, _) => SamePoint { k },
        (Branch::Spanning, _) => Inclusion { k },
        (Branch::GeneralBelow, TimeLike) => DefiniteFold { k },
        (Branch::GeneralBelow, SpaceLike) => IndefiniteFold { k },
        (Branch::GeneralBelow, LightLike) => LightLikeFold { k },
        (Branch::GeneralFull, LightLike) => LightLikeFold { k },
        (Branch::GeneralFull, _) => DefiniteFold { k },
        (Branch::DegenerateBelow, TimeLike) => DegenerateDefinite { j, k },
        (Branch::DegenerateBelow, SpaceLike) => DegenerateIndefinite { j, k },
        (Branch::DegenerateBelow, LightLike) => DegenerateLightLike { j, k },
        (Branch::DegenerateFull, LightLike) => DegenerateLightLike { j, k },
        (Branch::DegenerateFull, _) => DegenerateDefinite { j, k },
    };
    NormalForm { n, kind }
}

/// `|sum α^2 - 1|` on the independent prefix, when `e_0 ∉ V`.
fn lemma4_margin<S: Scalar>(config: &PointConfig<S>, rec: &RecognitionSubspace<S>) -> Option<f64> {
    let mut points = vec![config.points()[0].clone()];
    points.extend(rec.independent.iter().map(|&i| config.points()[i].clone()));
    let head: PointConfig<f64> = PointConfig::new(config.n(), points).ok()?.to_real();
    if contains_time_axis(&head) {
        return None;
    }
    let state = crate::normalizer::step3_orthonormalize(&head, crate::normalizer::Step3Case::Generic).ok()?;
    let alpha = state.alpha?;
    Some((crate::normalizer::lemma4_quantity(&alpha) - 1.0).abs())
}

/// Classifies `L` up to A-equivalence. Total on all configurations.
pub fn classify_lorentz<S: Scalar>(config: &PointConfig<S>) -> ClassificationReport {
    let (k, n) = (config.k(), config.n());
    let rec = recognition_subspace(config);
    let j = rec.dim;
    let mut fragile = rec.dim > 0 && rec.min_abs_pivot < BORDERLINE_TOLERANCE;
    let likeness = rec.basis().map(|basis| {
        let inertia = subspace_inertia(&basis);
        fragile |= inertia.min_abs_pivot < BORDERLINE_TOLERANCE;
        inertia.likeness()
    });
    if !S::EXACT && j >= 1 && j <= n {
        fragile |= lemma4_margin(config, &rec).is_some_and(|m| m < BORDERLINE_TOLERANCE);
    }
    let branch = Branch::of(j, k, n);
    // same point: any likeness selects the same cell
    let effective = likeness.unwrap_or(Likeness::SpaceLike);
    ClassificationReport {
        k,
        n,
        recognition_dim: j,
        general_position: j == k,
        likeness,
        normal_form: select_normal_form(j, k, n, effective),
        theorem_case: case_label(branch, effective).to_string(),
        borderline: !S::EXACT && fragile,
    }
}

/// Classifies the Euclidean mapping `D`; defined only when `dim V = k <= n`
/// or `dim V = n + 1`.
pub fn classify_euclid<S: Scalar>(config: &PointConfig<S>) -> Result<ClassificationReport> {
    let (k, n) = (config.k(), config.n());
    let rec = recognition_subspace(config);
    let j = rec.dim;
    let (kind, case) = if j == k && k <= n && j > 0 {
        (FormKind::DefiniteFold { k }, "Proposition 1(1)")
    } else if j == n + 1 {
        (FormKind::Inclusion { k }, "Proposition 1(2)")
    } else {
        return Err(Error::EuclideanNotCovered { k, n, dim: j });
    };
    Ok(ClassificationReport {
        k,
        n,
        recognition_dim: j,
        general_position: j == k,
        likeness: None,
        normal_form: NormalForm { n, kind },
        theorem_case: case.to_string(),
        borderline: !S::EXACT && rec.min_abs_pivot < BORDERLINE_TOLERANCE,
    })
}

/// Whether `L` and `D` are A-equivalent, for configurations with
/// `j = k <= n` or `j = n + 1`.
pub fn equivalent_to_euclidean<S: Scalar>(config: &PointConfig<S>) -> Result<bool> {
    let report = classify_lorentz(config);
    let (j, k, n) = (report.recognition_dim, report.k, report.n);
    match Branch::of(j, k, n) {
        Branch::GeneralBelow => Ok(report.likeness == Some(Likeness::TimeLike)),
        Branch::GeneralFull => Ok(report.likeness != Some(Likeness::LightLike)),
        Branch::Spanning => Ok(true),
        _ => Err(Error::ComparisonNotCovered { k, n, dim: j }),
    }
}
