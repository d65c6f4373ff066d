//! Exact classification of the differential Galois order of planar polynomial
//! vector fields `dx2/dx1 = X2/X1`, with Liouvillian first-integral
//! certificates for the solvable cases.
//!
//! The pipeline: parse the field ([`expr`]), compute its B-sequence
//! ([`field`]), search for rational witnesses level by level
//! ([`witness`]), build and symbolically verify a certificate tower
//! ([`certificate`]), cross-check it numerically ([`numeric`]) and
//! summarise the run ([`report`]).

pub mod certificate;
pub mod darboux;
pub mod error;
pub mod expr;
pub mod field;
mod gcd;
pub mod groebner;
pub mod index;
pub mod jet;
pub mod linalg;
pub mod numeric;
pub mod poly;
pub mod rat;
pub mod sample;
pub mod selftest;
pub mod ratfunc;
pub mod report;
pub mod witness;

pub use error::{Error, Result};
pub use expr::{parse_poly, parse_ratfunc, print_canonical, Printable};
pub use field::{apply_x, compute_b, BSequence, VectorField};
pub use linalg::{QMatrix, QVector};
pub use poly::{Mono, Poly, Var};
pub use rat::Rat;
pub use ratfunc::RatFunc;
pub use certificate::{certify, verify_tower, BasePoint, CertificateTower, Node, NodeExpr};
pub use darboux::{find_darboux, DarbouxConfig, DarbouxPair, DarbouxSearch};
pub use index::{IndexSet, MultiIndex};
pub use jet::{DerivationSystem, JetExpr, JetMode, Sym};
pub use numeric::{check_constancy, eval_tower, flow, NumericReport, Trajectory};
pub use report::{run, RunOptions, RunReport};
pub use witness::{
    assemble_level3_cleared, classify, classify_with_hints, verify_witness, Classification, ClearedEquation,
    LinearPDEProblem, SearchBounds, Status, Witness,
};
