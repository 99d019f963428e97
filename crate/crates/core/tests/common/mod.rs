//! Seeded generators of rational configurations with a prescribed branch.
#![allow(dead_code)]

use ldsq_core::lorentz::{lorentz_inner, subspace_likeness, Likeness, SubspaceBasis, Vector};
use ldsq_core::mappings::{classify_lorentz, contains_time_axis, recognition_subspace, PointConfig};
use ldsq_core::scalar::{rational, Rational};
use ldsq_core::Matrix;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Coordinate box for generated configurations.
pub const BOX: i64 = 3;

pub struct Gen {
    pub rng: ChaCha8Rng,
}

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// Rational in `[-half, half]` with denominator at most 4.
    pub fn rat(&mut self, half: &Rational) -> Rational {
        let den: i64 = self.rng.gen_range(1..=4);
        let top = (half * Rational::from_integer(den.into())).floor().to_integer();
        let top: i64 = top.try_into().expect("small");
        rational(self.rng.gen_range(-top..=top), den)
    }

    pub fn vector(&mut self, len: usize, half: &Rational) -> Vector<Rational> {
        Vector::new((0..len).map(|_| self.rat(half)).collect()).unwrap()
    }

    pub fn pick<T: Clone>(&mut self, items: &[T]) -> T {
        items.choose(&mut self.rng).unwrap().clone()
    }

    /// Rational null vector `(1, s)` with `|s| = 1`, via inverse stereographic
    /// projection.
    pub fn null_vector(&mut self, n: usize) -> Vector<Rational> {
        if n == 1 {
            let s = if self.rng.gen_bool(0.5) { 1 } else { -1 };
            return Vector::new(vec![Rational::one(), rational(s, 1)]).unwrap();
        }
        let t: Vec<Rational> = (0..n - 1).map(|_| self.rat(&rational(2, 1))).collect();
        let norm2 = t.iter().fold(Rational::zero(), |a, x| a + x * x);
        let den = &norm2 + Rational::one();
        let mut v = vec![Rational::one()];
        v.extend(t.iter().map(|x| Rational::from_integer(2.into()) * x / &den));
        v.push((&norm2 - Rational::one()) / &den);
        let mut v = Vector::new(v).unwrap();
        if self.rng.gen_bool(0.5) {
            v = v.scale(&rational(-1, 1));
        }
        v
    }

    /// Basis of a `dim`-dimensional subspace of `R^{1,n}` with the requested
    /// likeness; with `time_axis`, the subspace contains `e_0`.
    pub fn subspace(&mut self, n: usize, dim: usize, likeness: Likeness, time_axis: bool) -> Vec<Vector<Rational>> {
        assert!(dim >= 1 && dim <= n + 1);
        let half = rational(1, 1);
        loop {
            let mut basis: Vec<Vector<Rational>> = match (likeness, time_axis) {
                (Likeness::LightLike, _) => {
                    let l = self.null_vector(n);
                    let mut b = vec![l.clone()];
                    for _ in 1..dim {
                        // project a random vector into l^perp
                        let r = self.vector(n + 1, &rational(1, 2));
                        let c = lorentz_inner(&r, &l).unwrap();
                        b.push(r.add(&Vector::basis(n, 0).scale(&c)).unwrap());
                    }
                    b
                }
                (_, true) => {
                    let mut b = vec![Vector::basis(n, 0).scale(&self.nonzero(&half))];
                    b.extend((1..dim).map(|_| self.vector(n + 1, &half)));
                    b
                }
                (Likeness::TimeLike, false) => {
                    let mut t = self.vector(n + 1, &rational(1, 2));
                    let sign = if self.rng.gen_bool(0.5) { 1 } else { -1 };
                    t = t.add(&Vector::basis(n, 0).scale(&rational(sign, 1))).unwrap();
                    let mut b = vec![t];
                    b.extend((1..dim).map(|_| self.vector(n + 1, &half)));
                    b
                }
                (Likeness::SpaceLike, false) => (0..dim)
                    .map(|_| {
                        let mut v = self.vector(n + 1, &half);
                        let t = self.rat(&rational(1, 4));
                        v = Vector::new([&[t][..], &v.coords()[1..]].concat()).unwrap();
                        v
                    })
                    .collect(),
            };
            self.mix(&mut basis);
            let Ok(sb) = SubspaceBasis::new(basis.clone()) else { continue };
            if subspace_likeness(&sb) != likeness {
                continue;
            }
            if dim <= n && has_time_axis(&basis) != time_axis {
                continue;
            }
            return basis;
        }
    }

    fn nonzero(&mut self, half: &Rational) -> Rational {
        loop {
            let r = self.rat(half);
            if !r.is_zero() {
                return r;
            }
        }
    }

    /// Adds small multiples of later vectors to earlier ones.
    fn mix(&mut self, basis: &mut [Vector<Rational>]) {
        for i in 0..basis.len() {
            for j in i + 1..basis.len() {
                if self.rng.gen_bool(0.5) {
                    let c = self.pick(&[rational(1, 2), rational(-1, 2), rational(1, 1)]);
                    basis[i] = basis[i].add(&basis[j].scale(&c)).unwrap();
                }
            }
        }
    }

    /// Points `p_0, p_0 + b_i`, and `extra` dependent points, tail shuffled.
    pub fn config_from_basis(&mut self, n: usize, basis: &[Vector<Rational>], extra: usize) -> PointConfig<Rational> {
        let p0 = self.vector(n + 1, &rational(1, 1));
        let mut tail: Vec<Vector<Rational>> = basis.iter().map(|b| p0.add(b).unwrap()).collect();
        for _ in 0..extra {
            let mut p = p0.clone();
            for b in basis {
                let c = self.pick(&[rational(0, 1), rational(1, 2), rational(-1, 2)]);
                p = p.add(&b.scale(&c)).unwrap();
            }
            tail.push(p);
        }
        tail.shuffle(&mut self.rng);
        let mut points = vec![p0];
        points.extend(tail);
        PointConfig::new(n, points).unwrap()
    }
}

fn has_time_axis(basis: &[Vector<Rational>]) -> bool {
    let mut cols: Vec<Vec<Rational>> = basis.iter().map(|v| v.coords().to_vec()).collect();
    let r = Matrix::from_columns(&cols).unwrap().rank();
    cols.push(Vector::<Rational>::basis(basis[0].n(), 0).into_coords());
    Matrix::from_columns(&cols).unwrap().rank() == r
}

pub fn in_box(config: &PointConfig<Rational>) -> bool {
    let b = Rational::from_integer(BOX.into());
    config.points().iter().all(|p| p.coords().iter().all(|x| x.abs() <= b))
}

/// Branches of the complete classification, with the generic/special split
/// of the `j = k < n` case and both sub-cases of the full-dimensional ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case {
    Below(Likeness),
    BelowTimeAxis,
    Full(Likeness),
    Spanning,
    DegenerateBelow(Likeness),
    DegenerateFull(Likeness),
    SamePoint,
}

impl Case {
    pub const ALL: [Case; 15] = [
        Case::Below(Likeness::TimeLike),
        Case::Below(Likeness::SpaceLike),
        Case::Below(Likeness::LightLike),
        Case::BelowTimeAxis,
        Case::Full(Likeness::TimeLike),
        Case::Full(Likeness::SpaceLike),
        Case::Full(Likeness::LightLike),
        Case::Spanning,
        Case::DegenerateBelow(Likeness::TimeLike),
        Case::DegenerateBelow(Likeness::SpaceLike),
        Case::DegenerateBelow(Likeness::LightLike),
        Case::DegenerateFull(Likeness::TimeLike),
        Case::DegenerateFull(Likeness::SpaceLike),
        Case::DegenerateFull(Likeness::LightLike),
        Case::SamePoint,
    ];

    /// Expected `theorem_case` string.
    pub fn label(self) -> &'static str {
        use Likeness::*;
        match self {
            Case::Below(TimeLike) | Case::BelowTimeAxis => "Theorem 1(1a)",
            Case::Below(SpaceLike) => "Theorem 1(1b)",
            Case::Below(LightLike) => "Theorem 1(1c)",
            Case::Full(LightLike) => "Theorem 1(2b)",
            Case::Full(_) => "Theorem 1(2a)",
            Case::Spanning => "Theorem 1(3)",
            Case::DegenerateBelow(TimeLike) => "Appendix (1a)",
            Case::DegenerateBelow(SpaceLike) => "Appendix (1b)",
            Case::DegenerateBelow(LightLike) => "Appendix (1c)",
            Case::DegenerateFull(LightLike) => "Appendix (2b)",
            Case::DegenerateFull(_) => "Appendix (2a)",
            Case::SamePoint => "Appendix (3)",
        }
    }

    pub fn name(self) -> String {
        match self {
            Case::BelowTimeAxis => format!("{} time axis in V", self.label()),
            Case::Full(l) | Case::DegenerateFull(l) if l != Likeness::LightLike => {
                format!("{} {}", self.label(), l.as_str())
            }
            _ => self.label().to_string(),
        }
    }

    /// Whether the witness goes through the generic orthonormalization, so
    /// that the hyperplane coefficients are recorded.
    pub fn is_generic(self) -> bool {
        matches!(self, Case::Below(_) | Case::Full(_))
    }
}

/// Random configuration in the box, `n <= 6`, in the given branch.
pub fn branch_config(g: &mut Gen, case: Case) -> PointConfig<Rational> {
    loop {
        let config = match case {
            Case::Below(l) => {
                let n = g.rng.gen_range(2..=6);
                let j = g.rng.gen_range(1..n);
                let b = g.subspace(n, j, l, false);
                g.config_from_basis(n, &b, 0)
            }
            Case::BelowTimeAxis => {
                let n = g.rng.gen_range(2..=6);
                let j = g.rng.gen_range(1..n);
                let b = g.subspace(n, j, Likeness::TimeLike, true);
                g.config_from_basis(n, &b, 0)
            }
            Case::Full(l) => {
                let n = g.rng.gen_range(1..=6);
                let axis = l == Likeness::TimeLike && g.rng.gen_bool(0.25);
                let b = g.subspace(n, n, l, axis);
                g.config_from_basis(n, &b, 0)
            }
            Case::Spanning => {
                let n = g.rng.gen_range(1..=5);
                let b = g.subspace(n, n + 1, Likeness::TimeLike, false);
                let extra = g.rng.gen_range(0..=2);
                g.config_from_basis(n, &b, extra)
            }
            Case::DegenerateBelow(l) => {
                let n = g.rng.gen_range(2..=6);
                let j = g.rng.gen_range(1..n);
                let axis = l == Likeness::TimeLike && g.rng.gen_bool(0.25);
                let b = g.subspace(n, j, l, axis);
                let extra = g.rng.gen_range(1..=2);
                g.config_from_basis(n, &b, extra)
            }
            Case::DegenerateFull(l) => {
                let n = g.rng.gen_range(1..=6);
                let axis = l == Likeness::TimeLike && g.rng.gen_bool(0.25);
                let b = g.subspace(n, n, l, axis);
                let extra = g.rng.gen_range(1..=2);
                g.config_from_basis(n, &b, extra)
            }
            Case::SamePoint => {
                let n = g.rng.gen_range(1..=6);
                let k = g.rng.gen_range(1..=3);
                let p = g.vector(n + 1, &rational(BOX, 1));
                PointConfig::new(n, vec![p; k + 1]).unwrap()
            }
        };
        if !in_box(&config) {
            continue;
        }
        let report = classify_lorentz(&config);
        if report.theorem_case != case.label() {
            continue;
        }
        if matches!(case, Case::Below(_)) && contains_time_axis(&config) {
            continue;
        }
        if case == Case::BelowTimeAxis && !contains_time_axis(&config) {
            continue;
        }
        if matches!(case, Case::DegenerateBelow(_) | Case::DegenerateFull(_))
            && recognition_subspace(&config).dim >= config.k()
        {
            continue;
        }
        return config;
    }
}

/// Random `m`-vector basis of a subspace of `R^{1,n}`, any likeness; a third
/// of the draws are light-like.
pub fn random_basis(g: &mut Gen, n: usize, m: usize) -> SubspaceBasis<Rational> {
    loop {
        let vectors = if m <= n && g.rng.gen_ratio(1, 3) {
            g.subspace(n, m, Likeness::LightLike, false)
        } else {
            (0..m).map(|_| g.vector(n + 1, &rational(2, 1))).collect()
        };
        if let Ok(b) = SubspaceBasis::new(vectors) {
            return b;
        }
    }
}
