//! Exact computations around Bernoulli convolutions with algebraic parameter
//! `θ ∈ (1, 2)`: classification, power-sum enumeration, cylinder measure
//! bounds, branching counts and trace statistics.

pub mod algebraic;
pub mod cache;
pub mod config;
pub mod error;
pub mod field;
pub mod interval;
pub mod measure;
pub mod poly;
pub mod powersum;
pub mod roots;
pub mod spectra;

pub use algebraic::{AlgebraicNumber, ClassificationReport, ModulusClass, Verdict};
pub use config::Settings;
pub use error::{Error, Result};
pub use field::FieldElem;
pub use interval::{ComplexInterval, Enclosed, Interval};
pub use poly::{parse_polynomial, IntPolynomial};
pub use powersum::{DigitAlphabet, LevelSet};
