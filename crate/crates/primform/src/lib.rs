//! Exact machinery for one-variable Landau-Ginzburg models: Milnor rings and
//! residue pairings, Frobenius structures with flat coordinates and
//! potentials, a localized Gauss-Manin calculus that certifies primitive
//! forms, and genus-0 gravitational-descendant towers with an A-side /
//! B-side mirror comparison for the projective line.
//!
//! Everything is computed in exact arithmetic: arbitrary-precision rationals
//! with formal parameters (`q`, `E1 = exp(t^1)`) and, where a cross-check
//! wants it, an adjoined square root.
//!
//! Start with [`lg::LGSystem`] (builtins: [`lg::LGSystem::cp1`],
//! [`lg::LGSystem::a_n`]) and the pipeline entry points
//! [`milnor::MilnorRing::build`], [`frobenius::FrobeniusData::build`],
//! [`brieskorn::verify_primitive_form`], and [`descend::MirrorComparison`].

pub mod brieskorn;
pub mod cli;
pub mod descend;
pub mod error;
pub mod frobenius;
pub mod lg;
pub mod milnor;
pub mod poly;
pub mod ratfunc;
pub mod report;
pub mod scalar;
pub mod specfile;
pub mod spectrum;

pub use error::PrimformError;
