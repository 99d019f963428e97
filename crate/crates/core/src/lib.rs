//! Classification of Lorentzian distance-squared mappings up to
//! A-equivalence, with explicit witnesses and their numerical verification.
//!
//! Classification and rank decisions run on any [`scalar::Scalar`]: exact
//! rationals or floats. Witnesses are built and checked in floating point.
//!
//! ```
//! use ldsq_core::{classify_lorentz, build_witness, verify_witness, ConfigQ, FormKind};
//!
//! let config = ConfigQ::from_ints(&[&[0, 0, 0], &[1, 1, 0]]).unwrap();
//! let report = classify_lorentz(&config);
//! assert_eq!(report.normal_form.kind, FormKind::LightLikeFold { k: 1 });
//!
//! let witness = build_witness(&config).unwrap();
//! assert!(verify_witness(&config, &witness, 100, 1e-8, 42).unwrap().passed());
//! ```

pub mod document;
pub mod error;
pub mod fibers;
pub mod lorentz;
pub mod mappings;
pub mod matrix;
pub mod normalizer;
pub mod qr;
pub mod scalar;
pub mod verifier;

pub use error::{Error, Result};
pub use fibers::{fiber_conic_type, sample_fiber, ConicType};
pub use lorentz::{lorentz_inner, subspace_likeness, vector_likeness, Likeness, SubspaceBasis, Vector, VectorClass};
pub use mappings::{
    classify_euclid, classify_lorentz, equivalent_to_euclidean, eval_lorentz_dsq, ClassificationReport, FormKind,
    NormalForm, PointConfig,
};
pub use matrix::Matrix;
pub use normalizer::{apply_witness, build_euclid_witness, build_witness, Witness};
pub use scalar::{Rational, Real, Scalar};
pub use verifier::{verify_witness, VerificationReport};

pub type Vector64 = Vector<f64>;
pub type VectorQ = Vector<Rational>;
pub type Matrix64 = Matrix<f64>;
pub type MatrixQ = Matrix<Rational>;
pub type Config64 = PointConfig<f64>;
pub type ConfigQ = PointConfig<Rational>;
pub type Config32 = PointConfig<f32>;
pub type Witness64 = Witness<f64>;
pub type Witness32 = Witness<f32>;
