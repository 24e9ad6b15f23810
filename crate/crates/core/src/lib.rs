//! Ducci dynamics on `Z_m^n`.
//!
//! The Ducci map sends `(x_1, ..., x_n)` to `(x_1 + x_2, ..., x_n + x_1)` with
//! entries reduced mod `m`. This crate iterates it, measures pre-periods and
//! periods, solves for predecessors, enumerates the cycle subgroup, computes
//! the coefficient table of `D^r`, evaluates binomials modulo powers of two,
//! exports transition graphs, and runs exhaustive checks of the known
//! structure theorems (notably `L_{2^l}(2^k) = (l + 1) 2^{k-1}`).

pub mod cli;
pub mod coeff;
pub mod error;
pub mod graph;
pub mod orbit;
pub mod system;
pub mod theorems;

pub use coeff::{
    apply_coeff_expansion, binom_mod_pow2, coeff_at, coeff_table, coeff_view, CoeffTable,
    CoeffView, Pow2Binomial,
};
pub use error::{Error, Result};
pub use graph::{build_graph, TransitionGraph};
pub use orbit::{
    basic_len_per, kernel_set, orbit_summary, predecessors, vanishes, Caps, KernelSet,
    OrbitSummary,
};
pub use system::{DucciSystem, ResidueTuple};
