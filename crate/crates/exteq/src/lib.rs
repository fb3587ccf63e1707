//! Equation systems over central extensions `1 -> A -> E -> G -> 1` of
//! hyperbolic groups: cocycle arithmetic, predicting automata and the
//! reduction to constrained systems over a free lift group and an abelian
//! group.

pub mod abelian;
pub mod words;
pub mod extension;
pub mod automata;
pub mod lrational;
pub mod fpa_ppa;
pub mod reduction;
pub mod invariants;
pub mod io;
