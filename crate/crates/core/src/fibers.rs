//! Fibers of `L` for `n`-point configurations (`k = n - 1`).
//!
//! In normal coordinates a regular fiber lies in the `(x_0, x_n)` plane
//! with the other coordinates fixed, and is a circle, an equilateral
//! hyperbola or a parabola according to the likeness of `V`. Samples are
//! drawn there and carried back by the source map `h`.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lorentz::{Likeness, Vector};
use crate::mappings::{classify_lorentz, eval_lorentz_dsq, PointConfig};
use crate::normalizer::{build_witness, Witness};
use crate::scalar::Scalar;

/// Threshold below which a fiber parameter counts as singular.
const SINGULAR: f64 = 1e-12;

/// Largest accepted `|L(x) - y|` for a returned sample.
pub const FIBER_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConicType {
    Circle,
    EquilateralHyperbola,
    Parabola,
}

impl From<Likeness> for ConicType {
    fn from(l: Likeness) -> Self {
        match l {
            Likeness::TimeLike => ConicType::Circle,
            Likeness::SpaceLike => ConicType::EquilateralHyperbola,
            Likeness::LightLike => ConicType::Parabola,
        }
    }
}

impl From<ConicType> for Likeness {
    fn from(c: ConicType) -> Self {
        match c {
            ConicType::Circle => Likeness::TimeLike,
            ConicType::EquilateralHyperbola => Likeness::SpaceLike,
            ConicType::Parabola => Likeness::LightLike,
        }
    }
}

/// Parameter windows for emitted samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberWindow {
    /// Hyperbola rapidities lie in `[-rapidity, rapidity]`.
    pub rapidity: f64,
    /// Parabola `x_n` values lie in `[-span, span]`.
    pub span: f64,
}

impl Default for FiberWindow {
    fn default() -> Self {
        FiberWindow { rapidity: 3.0, span: 3.0 }
    }
}

fn check_shape<S: Scalar>(config: &PointConfig<S>) -> Result<Likeness> {
    let (k, n) = (config.k(), config.n());
    if k + 1 != n {
        return Err(Error::Precondition(format!(
            "fibers need exactly n points (k = n - 1), got k={k}, n={n}"
        )));
    }
    let report = classify_lorentz(config);
    if !report.general_position {
        return Err(Error::Precondition(format!(
            "fibers need points in general position, dim V = {} < k = {k}",
            report.recognition_dim
        )));
    }
    Ok(report.likeness.expect("k >= 1 in general position"))
}

pub fn fiber_conic_type<S: Scalar>(config: &PointConfig<S>) -> Result<ConicType> {
    check_shape(config).map(ConicType::from)
}

/// `count` points on `L^{-1}(y)` with the default window.
pub fn sample_fiber<S: Scalar>(config: &PointConfig<S>, y: &[f64], count: usize) -> Result<Vec<Vector<f64>>> {
    sample_fiber_with(config, y, count, FiberWindow::default())
}

pub fn sample_fiber_with<S: Scalar>(
    config: &PointConfig<S>,
    y: &[f64],
    count: usize,
    window: FiberWindow,
) -> Result<Vec<Vector<f64>>> {
    let conic = fiber_conic_type(config)?;
    let witness = build_witness(config)?;
    sample_with_witness(config, &witness, conic, y, count, window)
}

/// Normal-coordinate points `(x_0, x_n)` of the fiber `{N = z}`.
fn plane_points(conic: ConicType, z: &[f64], count: usize, window: FiberWindow) -> Result<Vec<(f64, f64)>> {
    let c = *z.last().expect("k >= 1");
    let grid = |i: usize, m: usize, half: f64| {
        if m <= 1 {
            0.0
        } else {
            -half + 2.0 * half * i as f64 / (m - 1) as f64
        }
    };
    match conic {
        ConicType::Circle => {
            if c <= SINGULAR {
                return Err(Error::SingularFiber(format!("circle radius squared {c:e} is not positive")));
            }
            let r = c.sqrt();
            Ok((0..count)
                .map(|i| {
                    let t = TAU * i as f64 / count as f64;
                    (r * t.cos(), r * t.sin())
                })
                .collect())
        }
        ConicType::EquilateralHyperbola => {
            if c.abs() <= SINGULAR {
                return Err(Error::SingularFiber("hyperbola degenerates to the light cone (c = 0)".into()));
            }
            let r = c.abs().sqrt();
            let per_branch = count.div_ceil(2);
            Ok((0..count)
                .map(|i| {
                    let t = grid(i / 2, per_branch, window.rapidity);
                    let side = if i % 2 == 0 { 1.0 } else { -1.0 };
                    if c > 0.0 {
                        (r * t.sinh(), side * r * t.cosh())
                    } else {
                        (side * r * t.cosh(), r * t.sinh())
                    }
                })
                .collect())
        }
        ConicType::Parabola => {
            let x1 = z[0];
            if x1.abs() <= SINGULAR {
                return Err(Error::SingularFiber("parabola with x_1 = 0 in normal coordinates".into()));
            }
            Ok((0..count)
                .map(|i| {
                    let xn = grid(i, count, window.span);
                    ((c - xn * xn) / x1, xn)
                })
                .collect())
        }
    }
}

fn sample_with_witness<S: Scalar>(
    config: &PointConfig<S>,
    witness: &Witness<f64>,
    conic: ConicType,
    y: &[f64],
    count: usize,
    window: FiberWindow,
) -> Result<Vec<Vector<f64>>> {
    let n = config.n();
    if y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: y.len() });
    }
    let z = witness.apply_target(y)?;
    let cf: PointConfig<f64> = config.to_real();
    let scale = y.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut out = Vec::with_capacity(count);
    for (x0, xn) in plane_points(conic, &z, count, window)? {
        // normal coordinates: x_1..x_{n-1} = z_0..z_{n-2}
        let mut v = Vec::with_capacity(n + 1);
        v.push(x0);
        v.extend_from_slice(&z[..n - 1]);
        v.push(xn);
        let x = Vector::new(witness.source.apply(&v)?)?;
        let l = eval_lorentz_dsq(&cf, &x)?;
        let err = l.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if err >= FIBER_TOL * scale {
            return Err(Error::Guard {
                stage: "fiber".into(),
                detail: format!("sample misses the fiber by {err:e}"),
            });
        }
        out.push(x);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn cfg(points: &[&[i64]]) -> PointConfig<Rational> {
        PointConfig::from_ints(points).unwrap()
    }

    fn l_at(c: &PointConfig<Rational>, x: &[f64]) -> Vec<f64> {
        eval_lorentz_dsq(&c.to_real(), &Vector::new(x.to_vec()).unwrap()).unwrap()
    }

    #[test]
    fn conic_types_follow_likeness() {
        assert_eq!(fiber_conic_type(&cfg(&[&[0, 0, 0], &[2, 1, 0]])).unwrap(), ConicType::Circle);
        assert_eq!(fiber_conic_type(&cfg(&[&[0, 0, 0], &[1, 2, 0]])).unwrap(), ConicType::EquilateralHyperbola);
        assert_eq!(fiber_conic_type(&cfg(&[&[0, 0, 0], &[1, 1, 0]])).unwrap(), ConicType::Parabola);
        assert!(fiber_conic_type(&cfg(&[&[0, 0, 0], &[0, 0, 0]])).is_err());
        assert!(fiber_conic_type(&cfg(&[&[0, 0, 0], &[1, 0, 0], &[0, 1, 0]])).is_err());
    }

    #[test]
    fn samples_lie_on_the_fiber() {
        for pts in [
            &[&[0i64, 0, 0][..], &[1, 2, 0]][..],
            &[&[0, 0, 0], &[2, 1, 0]],
            &[&[0, 0, 0], &[1, 1, 0]],
            &[&[0, 0, 0, 0], &[0, 1, 0, 0], &[0, 0, 1, 0]],
        ] {
            let c = cfg(pts);
            let n = c.n();
            let mut p: Vec<f64> = (0..=n).map(|i| 0.3 - 0.25 * i as f64).collect();
            p[n] = 1.0;
            let y = l_at(&c, &p);
            let xs = sample_fiber(&c, &y, 16).unwrap();
            assert_eq!(xs.len(), 16);
            for x in xs {
                let got = l_at(&c, x.coords());
                assert!(got.iter().zip(&y).all(|(a, b)| (a - b).abs() < 1e-8), "{pts:?}");
            }
        }
    }

    #[test]
    fn circle_fiber_with_unit_radius() {
        let c = cfg(&[&[0, 0, 0], &[2, 1, 0]]);
        let w = build_witness(&c).unwrap();
        // pick y whose normal-form value has last component 1
        let inv = crate::normalizer::invert_target_point(&w, &[0.25, 1.0]).unwrap();
        let xs = sample_fiber(&c, &inv, 12).unwrap();
        assert_eq!(xs.len(), 12);
    }

    #[test]
    fn singular_fibers_rejected() {
        let c = cfg(&[&[0, 0, 0], &[1, 1, 0]]);
        let w = build_witness(&c).unwrap();
        let y = crate::normalizer::invert_target_point(&w, &[0.0, 1.0]).unwrap();
        assert!(matches!(sample_fiber(&c, &y, 4), Err(Error::SingularFiber(_))));
        let c = cfg(&[&[0, 0, 0], &[2, 1, 0]]);
        let w = build_witness(&c).unwrap();
        let y = crate::normalizer::invert_target_point(&w, &[0.5, -1.0]).unwrap();
        assert!(matches!(sample_fiber(&c, &y, 4), Err(Error::SingularFiber(_))));
    }
}
