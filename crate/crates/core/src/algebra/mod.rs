//! The graded algebra of auxiliary theta functions in its canonical basis
//! `theta~_J[A]` of level `M`, and the operators `E_kl`, `D_ma`, `Delta_nb`.
//!
//! On basis symbols the operators act by
//!
//! ```text
//! E_kl     (M, J, A) = M_kl (M, J, A)
//! D_ma     (M, J, A) = sum_l M_ml J_la (M, J - eps_la, A)
//! Delta_nb (M, J, A) = (M, J + eps_nb, A)
//! ```
//!
//! and these satisfy `[D_ma, Delta_nb] = delta_ab E_mn` with every other
//! bracket zero.

mod element;
mod eval;
mod operator;
mod symbol;

pub use element::{AlgebraElement, Coefficient, Element, ExactElement};
pub use eval::{evaluate_element, ElementEvaluator};
pub use operator::{apply, apply_delta_power, commutator, in_theta_subalgebra, Operator};
pub use symbol::BasisSymbol;
