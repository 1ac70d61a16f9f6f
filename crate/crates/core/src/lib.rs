//! Exact computer algebra for Landau–Ginzburg orbifolds: polynomial and
//! cyclotomic arithmetic, GIT phases, state spaces and residue pairings,
//! matrix factorizations with their Chern characters, polynomial de Rham
//! forms on simplices, and checks of cohomological-field-theory axioms.

pub mod exactalg;
pub mod glsm;
pub mod orbifold;
pub mod statespace;
pub mod matfact;
pub mod simplicial;
pub mod cohft;
