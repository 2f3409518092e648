//! Minimax polynomial approximation on [-1, 1].
//!
//! The crate computes best uniform approximations from `Π_n` with the Remez
//! exchange algorithm, evaluates the classical derivative bounds on the
//! approximation error, and decides whether a function saturates the upper
//! bound (which happens exactly for polynomials of degree `n + 1`).
//!
//! ```
//! use saturex::expr::parse;
//! use saturex::saturation::{theorem_verdict, Verdict};
//!
//! let f = parse("x^3 - x").unwrap();
//! let report = theorem_verdict(&f, 2, 1e-6).unwrap();
//! assert_eq!(report.verdict, Verdict::Saturating);
//! ```

pub mod cheb;
pub mod cli;
pub mod expr;
pub mod jet;
pub mod remez;
pub mod saturation;

pub use cheb::{ChebSeries, NodeSet};
pub use expr::{parse, Expr, PolyInfo};
pub use jet::{DerivativeRange, Jet, Univariate};
pub use remez::{remez, EquioscillationCertificate, ReferenceSet, RemezOptions, RemezResult};
pub use saturation::{theorem_verdict, SaturationReport, Verdict};
