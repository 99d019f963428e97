//! Numerical validation of witnesses and likeness cross-checks.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lorentz::{
    hyperplane_likeness, lorentz_defect, subspace_likeness, vector_likeness, Likeness,
    SubspaceBasis, Vector, VectorClass,
};
use crate::mappings::{contains_time_axis, recognition_subspace, PointConfig};
use crate::normalizer::{
    apply_checkpoint, apply_witness, lemma4_quantity, step3_orthonormalize, Step3Case, Witness,
};
use crate::scalar::Scalar;

pub const DEFAULT_SAMPLES: usize = 100;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub source_det: f64,
    pub source_roundtrip_max: f64,
    pub target_roundtrip_max: f64,
    /// `max |H4^T J H4 - J|`, when the branch has an `H4` factor.
    pub lorentz_defect_h4: Option<f64>,
    pub checkpoint_residuals: BTreeMap<String, f64>,
    pub verdict: Verdict,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Seeded uniform points of `[-1, 1]^{n+1}`.
pub fn sample_points(n: usize, samples: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples).map(|_| (0..=n).map(|_| rng.gen_range(-1.0..=1.0)).collect()).collect()
}

/// Checks `H ∘ L ∘ h = N` at seeded sample points.
pub fn verify_witness<S: Scalar>(
    config: &PointConfig<S>,
    witness: &Witness<f64>,
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<VerificationReport> {
    if samples == 0 {
        return Err(Error::Precondition("need at least one sample".into()));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Precondition(format!("tolerance must be positive, got {tol}")));
    }
    if config.n() != witness.n {
        return Err(Error::DimensionMismatch { expected: witness.n + 1, found: config.n() + 1 });
    }
    if config.k() != witness.k {
        return Err(Error::DimensionMismatch { expected: witness.k + 1, found: config.k() + 1 });
    }
    witness.validate()?;
    let cf: PointConfig<f64> = config.to_real();
    let h_inv = witness.source.inverse();
    let mut report = VerificationReport {
        samples,
        seed,
        tol,
        max_residual: 0.0,
        mean_residual: 0.0,
        source_det: witness.source.det(),
        source_roundtrip_max: 0.0,
        target_roundtrip_max: 0.0,
        lorentz_defect_h4: witness.h4().map(|h| lorentz_defect(&h.linear)),
        checkpoint_residuals: BTreeMap::new(),
        verdict: Verdict::Fail,
    };
    let mut total = 0.0;
    for x in sample_points(config.n(), samples, seed) {
        let got = apply_witness(witness, &cf, &x)?;
        let r = sup_distance(&got, &witness.normal_form.eval(&x)?);
        report.max_residual = report.max_residual.max(r);
        total += r;

        let hx = witness.source.apply(&x)?;
        report.source_roundtrip_max = match &h_inv {
            Ok(inv) => report.source_roundtrip_max.max(sup_distance(&inv.apply(&hx)?, &x)),
            Err(_) => f64::INFINITY,
        };
        let y = witness.distance_values(&cf, &Vector::new(hx)?)?;
        let back = crate::normalizer::invert_target_point(witness, &witness.apply_target(&y)?);
        report.target_roundtrip_max = match back {
            Ok(b) => report.target_roundtrip_max.max(sup_distance(&b, &y)),
            Err(_) => f64::INFINITY,
        };

        for cp in &witness.checkpoints {
            let got = apply_checkpoint(witness, &cf, cp, &x)?;
            let want = cp.components.iter().map(|q| q.eval(&x)).collect::<Result<Vec<_>>>()?;
            let entry = report.checkpoint_residuals.entry(cp.stage.clone()).or_insert(0.0);
            *entry = entry.max(sup_distance(&got, &want));
        }
    }
    report.mean_residual = total / samples as f64;
    let pass = report.max_residual < tol
        && report.source_roundtrip_max < tol
        && report.target_roundtrip_max < tol
        && report.source_det.abs() > 0.0
        && report.source_det.is_finite();
    report.verdict = if pass { Verdict::Pass } else { Verdict::Fail };
    Ok(report)
}

/// Three independent likeness verdicts for a generic configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LikenessAgreement {
    pub inertia: Likeness,
    pub lemma4: Likeness,
    pub hyperplane: Likeness,
    /// `sum α_i^2`.
    pub s: f64,
    pub agree: bool,
}

/// Band around 1 inside which `sum α^2` reads as light-like.
const LEMMA4_BAND: f64 = 1e-9;

/// Gram inertia against `sum α^2` against the hyperplane spanned by
/// `(α_i, e_i)` with `α` padded by zeros to length `n`.
pub fn crosscheck_likeness<S: Scalar>(config: &PointConfig<S>) -> Result<LikenessAgreement> {
    let rec = recognition_subspace(config);
    let (k, n) = (config.k(), config.n());
    if rec.dim != k || k > n || contains_time_axis(config) {
        return Err(Error::Precondition(format!(
            "cross-check needs dim V = k <= n and e_0 outside V (k={k}, n={n}, dim V={})",
            rec.dim
        )));
    }
    let inertia = subspace_likeness(&rec.basis().expect("k >= 1"));
    let state = step3_orthonormalize(&config.to_real::<f64>(), Step3Case::Generic)?;
    let mut alpha = state.alpha.expect("generic case");
    let s = lemma4_quantity(&alpha);
    let lemma4 = if (s - 1.0).abs() <= LEMMA4_BAND {
        Likeness::LightLike
    } else if s > 1.0 {
        Likeness::TimeLike
    } else {
        Likeness::SpaceLike
    };
    alpha.resize(n, 0.0);
    let hyperplane = hyperplane_likeness(&alpha);
    Ok(LikenessAgreement { inertia, lemma4, hyperplane, s, agree: inertia == lemma4 && lemma4 == hyperplane })
}

/// What an exhaustive search over small integer combinations found.
#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceEvidence<S> {
    pub time_like: Option<Vector<S>>,
    pub light_like: Vec<Vector<S>>,
    pub examined: usize,
}

impl<S: Scalar> BruteForceEvidence<S> {
    /// Strongest likeness the evidence supports on its own.
    pub fn lower_bound(&self) -> Likeness {
        if self.time_like.is_some() {
            Likeness::TimeLike
        } else if !self.light_like.is_empty() {
            Likeness::LightLike
        } else {
            Likeness::SpaceLike
        }
    }

    /// One-sided check: a time-like witness forces `TimeLike`, and a
    /// `SpaceLike` verdict tolerates no non-space-like combination.
    pub fn consistent_with(&self, likeness: Likeness) -> bool {
        match likeness {
            Likeness::TimeLike => true,
            Likeness::LightLike => self.time_like.is_none(),
            Likeness::SpaceLike => self.time_like.is_none() && self.light_like.is_empty(),
        }
    }
}

/// Classifies every nonzero combination `sum c_i v_i` with `c in [-r, r]^m`.
pub fn brute_force_likeness_oracle<S: Scalar>(basis: &SubspaceBasis<S>, radius: u32) -> BruteForceEvidence<S> {
    let m = basis.dim();
    let r = i64::from(radius);
    let mut coeffs = vec![-r; m];
    let mut evidence = BruteForceEvidence { time_like: None, light_like: Vec::new(), examined: 0 };
    loop {
        if coeffs.iter().any(|&c| c != 0) {
            let mut v = Vector::<S>::zeros(basis.n());
            for (c, b) in coeffs.iter().zip(basis.vectors()) {
                v = v.add(&b.scale(&S::from_i64(*c).expect("small"))).expect("same length");
            }
            evidence.examined += 1;
            if !v.is_zero() {
                match vector_likeness(&v).expect("nonzero") {
                    VectorClass::TimeLike => {
                        if evidence.time_like.is_none() {
                            evidence.time_like = Some(v);
                        }
                    }
                    VectorClass::LightLike => evidence.light_like.push(v),
                    VectorClass::SpaceLike => {}
                }
            }
        }
        let mut i = 0;
        while i < m && coeffs[i] == r {
            coeffs[i] = -r;
            i += 1;
        }
        if i == m {
            break;
        }
        coeffs[i] += 1;
    }
    evidence
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalizer::build_witness;
    use crate::scalar::Rational;

    fn cfg(points: &[&[i64]]) -> PointConfig<Rational> {
        PointConfig::from_ints(points).unwrap()
    }

    fn basis(vs: &[&[i64]]) -> SubspaceBasis<Rational> {
        SubspaceBasis::new(vs.iter().map(|v| Vector::from_ints(v).unwrap()).collect()).unwrap()
    }

    #[test]
    fn example_one_one_passes() {
        let c = cfg(&[&[0, 0, 0], &[1, 2, 0]]);
        let w = build_witness(&c).unwrap();
        let r = verify_witness(&c, &w, 100, 1e-8, 42).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(r.checkpoint_residuals.values().all(|v| *v < 1e-10));
        assert!(r.lorentz_defect_h4.unwrap() < 1e-10);
        assert_eq!(r, verify_witness(&c, &w, 100, 1e-8, 42).unwrap());
    }

    #[test]
    fn corrupted_translation_fails() {
        let c = cfg(&[&[0, 0, 0], &[1, 2, 0]]);
        let mut w = build_witness(&c).unwrap();
        w.source.translation[0] += 1.0;
        let r = verify_witness(&c, &w, 100, 1e-8, 42).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(r.max_residual > 0.1);
    }

    #[test]
    fn same_point_is_exact() {
        let c = cfg(&[&[1, -2, 3], &[1, -2, 3], &[1, -2, 3]]);
        let r = verify_witness(&c, &build_witness(&c).unwrap(), 100, 1e-8, 5).unwrap();
        assert!(r.max_residual < 1e-12 && r.passed());
    }

    #[test]
    fn rejects_bad_arguments() {
        let c = cfg(&[&[0, 0, 0], &[1, 2, 0]]);
        let w = build_witness(&c).unwrap();
        assert!(verify_witness(&c, &w, 0, 1e-8, 1).is_err());
        assert!(verify_witness(&c, &w, 10, 0.0, 1).is_err());
        let other = cfg(&[&[0, 0, 0, 0], &[1, 2, 0, 0]]);
        assert!(verify_witness(&other, &w, 10, 1e-8, 1).is_err());
    }

    #[test]
    fn crosscheck_examples() {
        let expect = [
            (&[&[0i64, 0, 0][..], &[1, 2, 0]], Likeness::SpaceLike),
            (&[&[0, 0, 0], &[1, 1, 0]], Likeness::LightLike),
            (&[&[0, 0, 0], &[2, 1, 0]], Likeness::TimeLike),
        ];
        for (pts, want) in expect {
            let a = crosscheck_likeness(&cfg(pts)).unwrap();
            assert!(a.agree, "{a:?}");
            assert_eq!(a.inertia, want);
        }
        assert!(crosscheck_likeness(&cfg(&[&[0, 0, 0], &[1, 0, 0]])).is_err());
    }

    #[test]
    fn oracle_examples() {
        let e = brute_force_likeness_oracle(&basis(&[&[2, 1, 0]]), 1);
        let found = e.time_like.unwrap();
        assert!(found == Vector::from_ints(&[2, 1, 0]).unwrap() || found == Vector::from_ints(&[-2, -1, 0]).unwrap());
        let e = brute_force_likeness_oracle(&basis(&[&[0, 1, 0]]), 3);
        assert_eq!(e.lower_bound(), Likeness::SpaceLike);
        let e = brute_force_likeness_oracle(&basis(&[&[1, 1, 0], &[0, 0, 1]]), 2);
        assert!(e.time_like.is_none());
        assert!(e.light_like.contains(&Vector::from_ints(&[1, 1, 0]).unwrap()));
        assert!(e.consistent_with(Likeness::LightLike));
        assert_eq!(e.examined, 24);
    }
}
