//! Simulation engines for broadcasting a weak nonlinearity from a source
//! oscillator onto a target oscillator through pulsed QND interactions.
//!
//! Two engines cover the same protocol family at different fidelity levels:
//!
//! * a symbolic **moment engine** ([`poly`], [`gaussian`], [`protocol`]) that
//!   propagates quadrature observables as polynomials over a registry of
//!   Gaussian input variables and evaluates moments exactly via the Wick
//!   (Isserlis) expansion, including a compositional model of lossy
//!   mediator-based QND gates;
//! * a truncated **Fock engine** ([`fock`]) with exact gate unitaries, a
//!   Lindblad master-equation integrator and Wigner-function diagnostics.
//!
//! On top of both sit the nonlinear-variance analysis tools ([`nlv`],
//! [`envelope`]): the quadratic nonlinear variance σ(λ), nonclassicality and
//! non-Gaussianity thresholds, and derivative-free optimization of NLV
//! envelopes over gate controls.  [`oracle`] provides an independent
//! Monte-Carlo estimator used to validate the symbolic engine.
//!
//! Conventions used throughout: ħ = 2, so [q̂, p̂] = [X̂, Ŷ] = 2i, the ground
//! state has unit variance in every quadrature, and X̂ = â + â†,
//! Ŷ = −i(â − â†).  Source quadratures are written (q, p), target quadratures
//! (X, Y).  The nonlinear variance is σ(λ) = Var(Ŷ + λV′(X̂)) with
//! V(x) = xⁿ/n, which puts the minimum of a broadcast state at λ = γgⁿ > 0.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod envelope;
pub mod fock;
pub mod gaussian;
pub mod linalg;
pub mod nlv;
pub mod optim;
pub mod oracle;
pub mod poly;
pub mod protocol;

pub use gaussian::GaussianEnsemble;
pub use nlv::NlvParabola;
pub use poly::{QuadPoly, Role, VarId};
pub use protocol::{Regime, SymbolicState};
