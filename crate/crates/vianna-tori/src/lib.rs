//! Exact-arithmetic engine for the disk potentials of lifted Vianna tori.
//!
//! Starting from the Clifford potential `x_1 + ... + x_n + 1/(x_1 ... x_n)`
//! in `n >= 2` variables, the crate walks the Markov tree of triples
//! `(a, b, c)` with `a^2 + b^2 + c^2 = 3abc` and applies one algebraic
//! mutation per tree edge, producing for every triple a Laurent polynomial
//! whose Newton polytope is a Fano simplex. The [`lattice`] module measures
//! these polytopes exactly (faces, affine edge lengths, Fano tests,
//! unimodular equivalence), and [`verify`] bundles the expected
//! combinatorial structure — simplex shape, one triangular 2-face with edge
//! lengths `{a, b, c}`, unit lengths elsewhere, binomial edge coefficients —
//! into machine-checkable reports and pairwise non-equivalence certificates.
//!
//! All arithmetic is exact: coefficients and Markov entries are big
//! integers, polytope predicates are integer determinant signs, and no
//! floating point enters any computation (figures are drawn, not measured).
//!
//! The crate is primarily a library; see the `examples/` directory for one
//! runnable program per capability, and the thin `vianna-tori` binary for a
//! scriptable front end.

pub mod batch;
pub mod lattice;
pub mod laurent;
pub(crate) mod mat;
pub mod markov;
pub mod potentials;
pub mod render;
pub mod verify;

pub use lattice::{
    affine_length, combinatorial_mutate, invariants, is_fano, is_simplex, newton_polytope,
    normalized_volume, unimodular_equivalent, FanoReport, LatticeError, LatticePolytope,
    PolytopeInvariants,
};
pub use laurent::{LaurentError, LaurentPoly, MutationDatum, MutationSign, UnimodularMap};
pub use markov::{
    enumerate_tree, is_markov, mutate_triple, parent_triple, MarkovError, MarkovNode, MarkovTriple,
};
pub use potentials::{
    chekanov, check_lift_structure, clifford, replay, seed_candidates, vianna, LiftReport,
    PotentialCache, PotentialError, PotentialRecord,
};
pub use verify::{
    distinguish, verify_theorem, wall_crossing_check, DistinguishMatrix, PairVerdict,
    VerificationReport, VerifyError, WallCrossingReport,
};
