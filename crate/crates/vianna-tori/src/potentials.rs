//! Disk potentials of Clifford, Chekanov and general lifted Vianna tori.
//!
//! The construction walks the Markov tree from `(1, 1, 1)`. At each edge it
//! inspects the distinguished triangle of the current Newton polytope,
//! derives one candidate mutation datum per triangle edge, keeps those whose
//! graded pieces pass the exact divisibility test, and selects the one whose
//! combinatorial mutation produces the child triple's edge lengths. The
//! coordinates are then rotated so the chosen datum becomes the normalized
//! one (grade by `y = x_2`, factor `1 + x_1`) and the algebraic mutation is
//! applied in that frame. The cumulative change of basis is kept on the
//! record, so raw and normalized forms interconvert exactly.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::lattice::{
    combinatorial_mutate, is_fano, newton_polytope, LatticeError, LatticePolytope,
};
use crate::laurent::{LaurentError, LaurentPoly, MutationDatum, MutationSign, UnimodularMap};
use crate::markov::{canonical_node, mutate_triple, MarkovError, MarkovTriple};
use crate::mat;

#[derive(Clone, Debug)]
pub enum PotentialError {
    DimensionTooSmall { dim: usize },
    /// No divisibility-passing seed reproduces the child triple at this
    /// step; indicates a convention error rather than bad input.
    SeedNotFound { step: usize, target: MarkovTriple },
    /// The potential does not have the expected lifted shape; `clause`
    /// numbers the violated condition.
    StructureViolation { clause: u8, detail: String },
    Markov(MarkovError),
    Laurent(LaurentError),
    Lattice(LatticeError),
}

impl fmt::Display for PotentialError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PotentialError::DimensionTooSmall { dim } => {
                write!(f, "potentials need dimension >= 2, got {dim}")
            }
            PotentialError::SeedNotFound { step, target } => {
                write!(f, "no mutation seed reaches {target} at step {step}")
            }
            PotentialError::StructureViolation { clause, detail } => {
                write!(f, "lift structure violated (clause {clause}): {detail}")
            }
            PotentialError::Markov(e) => write!(f, "{e}"),
            PotentialError::Laurent(e) => write!(f, "{e}"),
            PotentialError::Lattice(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for PotentialError {}

impl From<MarkovError> for PotentialError {
    fn from(e: MarkovError) -> Self {
        PotentialError::Markov(e)
    }
}

impl From<LaurentError> for PotentialError {
    fn from(e: LaurentError) -> Self {
        PotentialError::Laurent(e)
    }
}

impl From<LatticeError> for PotentialError {
    fn from(e: LatticeError) -> Self {
        PotentialError::Lattice(e)
    }
}

/// Snapshot of a Newton polytope taken before and after each mutation step.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewtonSummary {
    pub vertices: Vec<Vec<i64>>,
    pub triangle_lengths: Vec<u64>,
    pub fano: bool,
}

/// One edge of the walk: the seed in pre-step coordinates, the basis
/// rotation that normalizes it, and polytope snapshots on both sides.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MutationStep {
    pub datum: MutationDatum,
    pub normalizer: UnimodularMap,
    pub pre: NewtonSummary,
    pub post: NewtonSummary,
}

/// A constructed disk potential together with its provenance: the Markov
/// triple (ordered as reached by the canonical path), the cumulative basis
/// change, and the replayable step log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialRecord {
    pub triple: MarkovTriple,
    pub dim: usize,
    pub poly: LaurentPoly,
    pub basis: UnimodularMap,
    pub steps: Vec<MutationStep>,
}

/// The Clifford potential `x_1 + ... + x_n + 1/(x_1 ... x_n)`.
pub fn clifford(n: usize) -> Result<PotentialRecord, PotentialError> {
    if n < 2 {
        return Err(PotentialError::DimensionTooSmall { dim: n });
    }
    let mut terms: Vec<(Vec<i64>, i64)> = Vec::with_capacity(n + 1);
    for i in 0..n {
        let mut e = vec![0i64; n];
        e[i] = 1;
        terms.push((e, 1));
    }
    terms.push((vec![-1; n], 1));
    Ok(PotentialRecord {
        triple: MarkovTriple::root(),
        dim: n,
        poly: LaurentPoly::from_terms(n, terms)?,
        basis: UnimodularMap::identity(n),
        steps: Vec::new(),
    })
}

/// The Chekanov potential, one mutation away from Clifford:
/// `x_2 + ... + x_n + (1 + x_1)^2 / (x_1 x_2^2 x_3 ... x_n)`.
pub fn chekanov(n: usize) -> Result<PotentialRecord, PotentialError> {
    vianna(&MarkovTriple::from_u64(1, 1, 2).expect("(1,1,2) is Markov"), n)
}

/// The distinguished triangle of a lifted potential: the Newton polytope of
/// the potential with its unit `z`-terms removed.
pub fn distinguished_triangle(
    poly: &LaurentPoly,
) -> Result<LatticePolytope, PotentialError> {
    let n = poly.dim();
    let mut remainder = poly.clone();
    for r in 2..n {
        let mut e = vec![0i64; n];
        e[r] = 1;
        let coef = poly.coeff(&e);
        if coef != BigInt::from(1) {
            return Err(PotentialError::StructureViolation {
                clause: 1,
                detail: format!("expected unit term at variable {}, found {coef}", r + 1),
            });
        }
        remainder = remainder.sub(&LaurentPoly::monomial(e, 1))?;
    }
    let tri = newton_polytope(&remainder)?;
    if tri.vertex_count() != 3 || tri.affine_dim() != 2 {
        return Err(PotentialError::StructureViolation {
            clause: 1,
            detail: format!(
                "distinguished face has {} vertices and affine dimension {}",
                tri.vertex_count(),
                tri.affine_dim()
            ),
        });
    }
    Ok(tri)
}

fn summarize(poly: &LaurentPoly) -> Result<NewtonSummary, PotentialError> {
    let newton = newton_polytope(poly)?;
    let tri = distinguished_triangle(poly)?;
    Ok(NewtonSummary {
        vertices: newton.vertices().to_vec(),
        triangle_lengths: tri.edge_length_multiset(),
        fano: is_fano(&newton).is_fano(),
    })
}

/// Candidate mutation data for the current potential: one per edge of the
/// distinguished triangle, oriented so the edge sits at the maximal grading
/// level, filtered by the exact divisibility test, and sorted by `(u, w)`.
pub fn seed_candidates(p: &PotentialRecord) -> Result<Vec<MutationDatum>, PotentialError> {
    let n = p.dim;
    let tri = distinguished_triangle(&p.poly)?;
    let verts = tri.vertices();
    let mut out = Vec::new();
    for (a, b) in [(0usize, 1usize), (0, 2), (1, 2)] {
        let third = 3 - a - b;
        let Some(u) = mat::primitive_canonical(&mat::sub_vec(&verts[b], &verts[a])) else {
            continue;
        };
        // Grading: orthogonal to the edge and to every inert z-vertex, at
        // its maximum on the edge.
        let mut rows = vec![u.clone()];
        for r in 2..n {
            let mut e = vec![0i64; n];
            e[r] = 1;
            rows.push(e);
        }
        let Some(w) = mat::generalized_cross(&rows) else {
            continue;
        };
        let edge_level = mat::dot(&w, &verts[a]);
        let third_level = mat::dot(&w, &verts[third]);
        let w = match edge_level.cmp(&third_level) {
            std::cmp::Ordering::Greater => w,
            std::cmp::Ordering::Less => w.iter().map(|x| -x).collect(),
            std::cmp::Ordering::Equal => continue,
        };
        let datum = MutationDatum::new(w, u, MutationSign::Neg)?;
        match p.poly.mutate(&datum) {
            Ok(_) => out.push(datum),
            Err(LaurentError::NotMutable { .. }) => {}
            Err(e) => return Err(e.into()),
        }
    }
    out.sort_by(|x, y| (&x.u, &x.w).cmp(&(&y.u, &y.w)));
    Ok(out)
}

/// The unimodular frame rotation taking a seed `(w, u)` to the normalized
/// datum: the grading becomes the second coordinate, the factor exponent
/// becomes `e_1`, and the inert coordinates `e_3 ... e_n` are fixed.
fn normalizer_for(datum: &MutationDatum, n: usize) -> Result<UnimodularMap, PotentialError> {
    let (w, u) = (&datum.w, &datum.u);
    if w[2..].iter().any(|&x| x != 0) {
        return Err(PotentialError::StructureViolation {
            clause: 1,
            detail: format!("seed grading {w:?} touches inert coordinates"),
        });
    }
    let bad_seed = |why: String| PotentialError::StructureViolation { clause: 1, detail: why };
    let (alpha, beta) = mat::solve_pair(u[0], u[1], 1)
        .ok_or_else(|| bad_seed(format!("factor {u:?} does not project primitively")))?;
    // Columns: (alpha, w1, p...), (beta, w2, q...), then the fixed e_r.
    let mut cols: Vec<Vec<i64>> = vec![vec![0; n]; n];
    cols[0][0] = alpha;
    cols[0][1] = w[0];
    cols[1][0] = beta;
    cols[1][1] = w[1];
    for r in 2..n {
        let (p_r, q_r) = mat::solve_pair(u[0], u[1], -u[r])
            .ok_or_else(|| bad_seed(format!("factor {u:?} does not project primitively")))?;
        cols[0][r] = p_r;
        cols[1][r] = q_r;
        cols[r][r] = 1;
    }
    let rows: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect();
    let m = UnimodularMap::new(rows).map_err(PotentialError::Laurent)?;
    debug_assert_eq!(m.row(1), w.as_slice());
    debug_assert_eq!(m.apply(u), {
        let mut e1 = vec![0i64; n];
        e1[0] = 1;
        e1
    });
    Ok(m)
}

/// Extend a record by one tree edge: the mutation index `k` applies to the
/// record's ordered triple.
fn extend_one(
    record: &PotentialRecord,
    k: usize,
    step_index: usize,
) -> Result<PotentialRecord, PotentialError> {
    let n = record.dim;
    let child = mutate_triple(&record.triple, k);
    let target: Vec<BigInt> = {
        let mut entries = child.entries().to_vec();
        entries.sort();
        entries
    };
    let tri = distinguished_triangle(&record.poly)?;
    let candidates = seed_candidates(record)?;
    let mut chosen = None;
    for datum in &candidates {
        let Ok(mutated_tri) = combinatorial_mutate(&tri, datum) else {
            continue;
        };
        let lengths: Vec<BigInt> = mutated_tri
            .edge_length_multiset()
            .into_iter()
            .map(BigInt::from)
            .collect();
        if lengths == target {
            chosen = Some(datum.clone());
            break;
        }
    }
    let datum = chosen.ok_or(PotentialError::SeedNotFound {
        step: step_index,
        target: child.clone(),
    })?;
    let normalizer = normalizer_for(&datum, n)?;
    let aligned = record.poly.apply_unimodular(&normalizer)?;
    let standard = MutationDatum::standard(n, MutationSign::Neg);
    let pre = summarize(&aligned)?;
    let post_poly = aligned.mutate(&standard)?;
    let post = summarize(&post_poly)?;
    let mut steps = record.steps.clone();
    steps.push(MutationStep {
        datum,
        normalizer: normalizer.clone(),
        pre,
        post,
    });
    Ok(PotentialRecord {
        triple: child,
        dim: n,
        poly: post_poly,
        basis: normalizer.compose(&record.basis),
        steps,
    })
}

/// Construct the disk potential of the lifted torus for `t` in dimension
/// `n` by walking the canonical tree path from `(1, 1, 1)`.
pub fn vianna(t: &MarkovTriple, n: usize) -> Result<PotentialRecord, PotentialError> {
    if n < 2 {
        return Err(PotentialError::DimensionTooSmall { dim: n });
    }
    let node = canonical_node(t)?;
    let mut record = clifford(n)?;
    for (i, &k) in node.path.iter().enumerate() {
        record = extend_one(&record, k as usize, i)?;
    }
    Ok(record)
}

/// Rebuild the polynomial from the step log; must reproduce `record.poly`
/// exactly.
pub fn replay(record: &PotentialRecord) -> Result<LaurentPoly, PotentialError> {
    let mut poly = clifford(record.dim)?.poly;
    let standard = MutationDatum::standard(record.dim, MutationSign::Neg);
    for step in &record.steps {
        poly = poly.apply_unimodular(&step.normalizer)?;
        poly = poly.mutate(&standard)?;
    }
    Ok(poly)
}

// ---------------------------------------------------------------------------
// Lift-structure checks.
// ---------------------------------------------------------------------------

/// Witnesses for the three lifted-shape clauses; returned when all pass.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LiftReport {
    /// Clause 1: the potential minus its z-terms has a planar triangular
    /// Newton polytope.
    pub triangle_vertices: Vec<Vec<i64>>,
    /// Clause 2: the affine-linear law on z-exponents as a function of the
    /// grading level, in cross-multiplied form `(dz, di, base)` per inert
    /// variable: `(z - base) * di == dz * (level - level_0)`.
    pub z_laws: Vec<(i64, i64, i64)>,
    /// Whether clause 2 held in the record's own frame; the Clifford record
    /// needs one seed rotation first, since its triangle plane does not
    /// contain the factor direction.
    pub z_law_in_own_frame: bool,
    /// Clause 3: the constant shift observed when all z are set to 1.
    pub projection_constant: i64,
}

fn strip_z_units(poly: &LaurentPoly) -> Result<LaurentPoly, PotentialError> {
    let n = poly.dim();
    let mut stripped = poly.clone();
    for r in 2..n {
        let mut e = vec![0i64; n];
        e[r] = 1;
        stripped = stripped.sub(&LaurentPoly::monomial(e, 1))?;
    }
    Ok(stripped)
}

/// Unique z-exponent pattern per grading level; `Err` carries a clause-2
/// violation.
fn z_patterns_by_level(
    stripped: &LaurentPoly,
) -> Result<std::collections::BTreeMap<i64, Vec<i64>>, PotentialError> {
    let mut by_level: std::collections::BTreeMap<i64, Vec<i64>> = std::collections::BTreeMap::new();
    for e in stripped.support() {
        let level = e[1];
        let zpart = e[2..].to_vec();
        match by_level.get(&level) {
            None => {
                by_level.insert(level, zpart);
            }
            Some(existing) if *existing == zpart => {}
            Some(existing) => {
                return Err(PotentialError::StructureViolation {
                    clause: 2,
                    detail: format!(
                        "level {level} carries z-exponents {existing:?} and {zpart:?}"
                    ),
                });
            }
        }
    }
    Ok(by_level)
}

/// The affine-linear law fitting the per-level z-patterns, or a clause-2
/// violation.
fn fit_z_laws(
    by_level: &std::collections::BTreeMap<i64, Vec<i64>>,
    zvars: usize,
) -> Result<Vec<(i64, i64, i64)>, PotentialError> {
    let (&i0, z0) = by_level.iter().next().expect("potential is nonzero");
    let (&i1, z1) = by_level.iter().next_back().expect("potential is nonzero");
    if i0 == i1 {
        return Err(PotentialError::StructureViolation {
            clause: 2,
            detail: "single grading level cannot fix the linear law".into(),
        });
    }
    let laws: Vec<(i64, i64, i64)> = (0..zvars).map(|r| (z1[r] - z0[r], i1 - i0, z0[r])).collect();
    for (&i, z) in by_level {
        for r in 0..zvars {
            let (dz, di, base) = laws[r];
            if (z[r] - base) as i128 * di as i128 != dz as i128 * (i - i0) as i128 {
                return Err(PotentialError::StructureViolation {
                    clause: 2,
                    detail: format!(
                        "z{}-exponent {} at level {i} breaks the linear law",
                        r + 1,
                        z[r]
                    ),
                });
            }
        }
    }
    Ok(laws)
}

/// Verify the lifted shape of a potential in dimension `n >= 3`:
/// (1) its z-stripped Newton polytope is a planar triangle, (2) z-exponents
/// depend affine-linearly on the grading level (after a seed rotation when
/// the record's frame is not factor-aligned), (3) setting all `z = 1`
/// recovers the 2-dimensional potential plus `n - 2`.
pub fn check_lift_structure(p: &PotentialRecord) -> Result<LiftReport, PotentialError> {
    let n = p.dim;
    if n < 3 {
        return Err(PotentialError::DimensionTooSmall { dim: n });
    }
    let stripped = strip_z_units(&p.poly)?;

    // Clause 2, uniqueness half: a level carrying two z-patterns is corrupt
    // in every frame, so diagnose it before the shape test.
    let by_level = z_patterns_by_level(&stripped)?;

    // Clause 1: planar triangle.
    let tri = distinguished_triangle(&p.poly)?;

    // Clause 2, linearity half, possibly after one normalizing rotation.
    let (z_laws, z_law_in_own_frame) = match fit_z_laws(&by_level, n - 2) {
        Ok(laws) => (laws, true),
        Err(own_frame_err) => {
            let candidates = seed_candidates(p)?;
            let Some(first) = candidates.first() else {
                return Err(own_frame_err);
            };
            let rotated = p.poly.apply_unimodular(&normalizer_for(first, n)?)?;
            let by_level = z_patterns_by_level(&strip_z_units(&rotated)?)?;
            (fit_z_laws(&by_level, n - 2)?, false)
        }
    };

    // Clause 3: specializing all z to 1 gives the planar potential plus n-2.
    let planar = vianna(&p.triple, 2)?;
    let vars: Vec<usize> = (2..n).collect();
    let projected = p.poly.specialize_units(&vars)?;
    let expected = planar
        .poly
        .add(&LaurentPoly::constant(2, (n - 2) as i64))?;
    if projected != expected {
        let diff = projected.sub(&expected)?;
        return Err(PotentialError::StructureViolation {
            clause: 3,
            detail: format!("projection differs from the planar potential by {diff}"),
        });
    }

    Ok(LiftReport {
        triangle_vertices: tri.vertices().to_vec(),
        z_laws,
        z_law_in_own_frame,
        projection_constant: (n - 2) as i64,
    })
}

// ---------------------------------------------------------------------------
// Memoized construction.
// ---------------------------------------------------------------------------

type CacheKey = ([BigInt; 3], usize);

/// Thread-safe memo store keyed by (sorted triple, dimension). Walks reuse
/// the longest cached prefix, so deepening the tree never recomputes.
#[derive(Default)]
pub struct PotentialCache {
    map: Mutex<HashMap<CacheKey, Arc<PotentialRecord>>>,
}

impl PotentialCache {
    pub fn new() -> PotentialCache {
        PotentialCache::default()
    }

    fn key(t: &MarkovTriple, n: usize) -> CacheKey {
        (t.sorted().entries().clone(), n)
    }

    /// Insert an externally obtained record (e.g. from a disk cache).
    pub fn insert(&self, record: Arc<PotentialRecord>) {
        let key = Self::key(&record.triple, record.dim);
        self.map.lock().unwrap().entry(key).or_insert(record);
    }

    pub fn get_or_build(
        &self,
        t: &MarkovTriple,
        n: usize,
    ) -> Result<Arc<PotentialRecord>, PotentialError> {
        if n < 2 {
            return Err(PotentialError::DimensionTooSmall { dim: n });
        }
        if let Some(hit) = self.map.lock().unwrap().get(&Self::key(t, n)) {
            return Ok(hit.clone());
        }
        let node = canonical_node(t)?;
        // Ordered triples along the canonical path.
        let mut prefix_triples = vec![MarkovTriple::root()];
        for &k in &node.path {
            let last = prefix_triples.last().expect("nonempty");
            prefix_triples.push(mutate_triple(last, k as usize));
        }
        // Longest cached prefix.
        let mut start = 0;
        let mut record: Option<Arc<PotentialRecord>> = None;
        for (i, triple) in prefix_triples.iter().enumerate().rev() {
            if let Some(hit) = self.map.lock().unwrap().get(&Self::key(triple, n)) {
                start = i;
                record = Some(hit.clone());
                break;
            }
        }
        let mut current: Arc<PotentialRecord> = match record {
            Some(r) => r,
            None => {
                let base = Arc::new(clifford(n)?);
                self.map
                    .lock()
                    .unwrap()
                    .entry(Self::key(&MarkovTriple::root(), n))
                    .or_insert_with(|| base.clone());
                base
            }
        };
        for (i, &k) in node.path.iter().enumerate().skip(start) {
            let next = Arc::new(extend_one(&current, k as usize, i)?);
            self.map
                .lock()
                .unwrap()
                .entry(Self::key(&next.triple, n))
                .or_insert_with(|| next.clone());
            current = next;
        }
        Ok(current)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(dim: usize, terms: &[(&[i64], i64)]) -> LaurentPoly {
        LaurentPoly::from_terms(dim, terms.iter().map(|(e, c)| (e.to_vec(), *c))).unwrap()
    }

    fn triple(a: u64, b: u64, c: u64) -> MarkovTriple {
        MarkovTriple::from_u64(a, b, c).unwrap()
    }

    fn expected_clifford(n: usize) -> LaurentPoly {
        let mut terms: Vec<(Vec<i64>, i64)> = Vec::new();
        for i in 0..n {
            let mut e = vec![0i64; n];
            e[i] = 1;
            terms.push((e, 1));
        }
        terms.push((vec![-1; n], 1));
        LaurentPoly::from_terms(n, terms).unwrap()
    }

    fn expected_chekanov(n: usize) -> LaurentPoly {
        // x_2 + ... + x_n + (1 + x_1)^2 / (x_1 x_2^2 x_3 ... x_n)
        let mut terms: Vec<(Vec<i64>, i64)> = Vec::new();
        for i in 1..n {
            let mut e = vec![0i64; n];
            e[i] = 1;
            terms.push((e, 1));
        }
        for (j, c) in [(0i64, 1i64), (1, 2), (2, 1)] {
            let mut e = vec![-1i64; n];
            e[1] = -2;
            e[0] = j - 1;
            terms.push((e, c));
        }
        LaurentPoly::from_terms(n, terms).unwrap()
    }

    #[test]
    fn clifford_ground_truth() {
        for n in 2..=5 {
            let record = clifford(n).unwrap();
            assert_eq!(record.poly, expected_clifford(n));
            assert!(record.steps.is_empty());
            let newton = newton_polytope(&record.poly).unwrap();
            assert!(crate::lattice::is_simplex(&newton));
            assert!(is_fano(&newton).is_fano());
        }
        assert!(matches!(
            clifford(1),
            Err(PotentialError::DimensionTooSmall { dim: 1 })
        ));
    }

    #[test]
    fn chekanov_ground_truth() {
        for n in 2..=5 {
            let record = chekanov(n).unwrap();
            assert_eq!(
                record.poly,
                expected_chekanov(n),
                "dimension {n} potential must match the one-mutation form verbatim"
            );
            assert_eq!(record.steps.len(), 1);
            assert_eq!(record.triple, triple(2, 1, 1));
        }
    }

    #[test]
    fn chekanov_newton_vertices_at_n3() {
        let record = chekanov(3).unwrap();
        let newton = newton_polytope(&record.poly).unwrap();
        assert_eq!(
            newton.vertices(),
            &[vec![-1, -2, -1], vec![0, 0, 1], vec![0, 1, 0], vec![1, -2, -1]]
        );
    }

    #[test]
    fn seed_candidates_on_the_small_potentials() {
        // Clifford: all three triangle edges pass divisibility.
        let c2 = clifford(2).unwrap();
        let seeds = seed_candidates(&c2).unwrap();
        assert_eq!(seeds.len(), 3);

        // Chekanov: three candidates whose mutations reach {1,1,1} once and
        // {1,2,5} twice.
        let k2 = chekanov(2).unwrap();
        let seeds = seed_candidates(&k2).unwrap();
        assert_eq!(seeds.len(), 3);
        let tri = distinguished_triangle(&k2.poly).unwrap();
        let mut reached: Vec<Vec<u64>> = seeds
            .iter()
            .map(|d| {
                combinatorial_mutate(&tri, d)
                    .unwrap()
                    .edge_length_multiset()
            })
            .collect();
        reached.sort();
        assert_eq!(reached, vec![vec![1, 1, 1], vec![1, 2, 5], vec![1, 2, 5]]);
    }

    #[test]
    fn walk_reaches_the_first_exotic_triples() {
        let p = vianna(&triple(1, 2, 5), 2).unwrap();
        let tri = newton_polytope(&p.poly).unwrap();
        assert_eq!(tri.edge_length_multiset(), vec![1, 2, 5]);
        // The potential found by one further mutation of the Chekanov form:
        // y + 2 (1+x)^2 / y^2 + (1+x)^5 / (x y^5).
        let expected = poly(
            2,
            &[
                (&[0, 1], 1),
                (&[0, -2], 2),
                (&[1, -2], 4),
                (&[2, -2], 2),
                (&[-1, -5], 1),
                (&[0, -5], 5),
                (&[1, -5], 10),
                (&[2, -5], 10),
                (&[3, -5], 5),
                (&[4, -5], 1),
            ],
        );
        assert_eq!(p.poly, expected);

        let p = vianna(&triple(1, 5, 13), 3).unwrap();
        let newton = newton_polytope(&p.poly).unwrap();
        assert!(crate::lattice::is_simplex(&newton));
        let tri = distinguished_triangle(&p.poly).unwrap();
        assert_eq!(tri.edge_length_multiset(), vec![1, 5, 13]);
        assert!(is_fano(&newton).is_fano());
    }

    #[test]
    fn replay_reproduces_the_polynomial() {
        for (t, n) in [(triple(1, 2, 5), 2), (triple(1, 5, 13), 3), (triple(2, 5, 29), 4)] {
            let record = vianna(&t, n).unwrap();
            assert_eq!(replay(&record).unwrap(), record.poly);
            // The recorded raw datum corresponds to the normalizer rows.
            for step in &record.steps {
                assert_eq!(step.normalizer.row(1), step.datum.w.as_slice());
            }
        }
    }

    #[test]
    fn lift_structure_of_small_lifts() {
        for (t, n) in [
            (triple(1, 1, 2), 3),
            (triple(1, 1, 2), 5),
            (triple(1, 2, 5), 3),
            (triple(1, 5, 13), 4),
        ] {
            let record = vianna(&t, n).unwrap();
            let report = check_lift_structure(&record).unwrap();
            assert_eq!(report.projection_constant, (n - 2) as i64);
            assert_eq!(report.triangle_vertices.len(), 3);
        }
        // Clifford itself passes with the plain simplex triangle.
        let report = check_lift_structure(&clifford(3).unwrap()).unwrap();
        assert_eq!(report.triangle_vertices.len(), 3);
    }

    #[test]
    fn corrupted_lift_fails_clause_two() {
        let mut record = chekanov(3).unwrap();
        // Bump one z-exponent off the linear law.
        let mut terms: Vec<(Vec<i64>, BigInt)> = record
            .poly
            .terms()
            .map(|(e, c)| (e.clone(), c.clone()))
            .collect();
        for (e, _) in &mut terms {
            if e == &vec![1, -2, -1] {
                e[2] = 1;
            }
        }
        record.poly = LaurentPoly::from_terms(3, terms).unwrap();
        match check_lift_structure(&record) {
            Err(PotentialError::StructureViolation { clause: 2, .. }) => {}
            other => panic!("expected clause-2 violation, got {other:?}"),
        }
    }

    #[test]
    fn cache_reuses_prefixes() {
        let cache = PotentialCache::new();
        let a = cache.get_or_build(&triple(1, 2, 5), 3).unwrap();
        let b = cache.get_or_build(&triple(1, 2, 5), 3).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        // The prefix (1,1,2) was stored along the way.
        let k = cache.get_or_build(&triple(1, 1, 2), 3).unwrap();
        assert_eq!(k.poly, chekanov(3).unwrap().poly);
        // Deepening from the cached prefix.
        let deeper = cache.get_or_build(&triple(2, 5, 29), 3).unwrap();
        assert_eq!(deeper.steps.len(), 3);
        assert_eq!(
            vianna(&triple(2, 5, 29), 3).unwrap().poly,
            deeper.poly,
            "cached walk must agree with the direct construction"
        );
    }

    #[test]
    fn intermediate_newtons_are_fano_and_extremal_piece_is_monomial() {
        let record = vianna(&triple(5, 13, 194), 3).unwrap();
        for step in &record.steps {
            assert!(step.pre.fano, "pre-mutation polytope must be Fano");
            assert!(step.post.fano, "post-mutation polytope must be Fano");
        }
        // In the construction frame, one extremal graded piece is a single
        // monomial.
        let pieces = record.poly.grade(&[0, 1, 0]).unwrap();
        let top = pieces.values().next_back().unwrap();
        let bottom = pieces.values().next().unwrap();
        assert!(top.num_terms() == 1 || bottom.num_terms() == 1);
    }
}
