//! Exact lattice-polytope geometry: Newton polytopes, face structure, Fano
//! tests, affine lengths, combinatorial mutation, and unimodular
//! equivalence.
//!
//! Everything is integer arithmetic. Points are `i64` vectors; facet
//! normals, determinants and all derived quantities are `BigInt`, so there
//! is no floating point and no rounding anywhere.
//!
//! The convex hull is computed incrementally (beneath-beyond with strict
//! visibility and a final coplanar-merge pass). Input supports can be large
//! — potentials carry tens of thousands of terms — but the hulls themselves
//! stay tiny, which keeps every insertion cheap.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::laurent::{LaurentError, LaurentPoly, MutationDatum, MutationSign, UnimodularMap};
use crate::mat;

#[derive(Clone, Debug, PartialEq)]
pub enum LatticeError {
    EmptyPolynomial,
    EmptyPointSet,
    DimensionMismatch { expected: usize, got: usize },
    DegenerateSegment,
    /// Combinatorial mutation failed its width precondition at this level.
    NotMutable { level: i64 },
    /// The operation is only defined for (or implemented on) a restricted
    /// shape class; carries a human-readable reason.
    UnsupportedShape(String),
    Laurent(LaurentError),
}

impl fmt::Display for LatticeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LatticeError::EmptyPolynomial => write!(f, "the zero polynomial has no Newton polytope"),
            LatticeError::EmptyPointSet => write!(f, "empty point set"),
            LatticeError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            LatticeError::DegenerateSegment => write!(f, "affine length needs two distinct points"),
            LatticeError::NotMutable { level } => {
                write!(f, "polytope is not mutable: level {level} is too narrow")
            }
            LatticeError::UnsupportedShape(why) => write!(f, "unsupported shape: {why}"),
            LatticeError::Laurent(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for LatticeError {}

impl From<LaurentError> for LatticeError {
    fn from(e: LaurentError) -> Self {
        LatticeError::Laurent(e)
    }
}

/// One facet inequality `<normal, x> <= offset` with a primitive outward
/// normal. Only stored for full-dimensional polytopes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Facet {
    pub normal: Vec<BigInt>,
    pub offset: BigInt,
    /// Indices into the polytope's vertex list.
    pub vertices: Vec<usize>,
}

/// Exact convex hull of a set of integer points: hull vertices plus cached
/// face data.
#[derive(Clone)]
pub struct LatticePolytope {
    ambient_dim: usize,
    affine_dim: usize,
    vertices: Vec<Vec<i64>>,
    edges: Vec<(usize, usize)>,
    two_faces: Vec<Vec<usize>>,
    facets: Vec<Facet>,
}

impl PartialEq for LatticePolytope {
    fn eq(&self, other: &Self) -> bool {
        self.ambient_dim == other.ambient_dim && self.vertices == other.vertices
    }
}

impl Eq for LatticePolytope {}

impl fmt::Debug for LatticePolytope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LatticePolytope(dim {} in R^{}, vertices {:?})",
            self.affine_dim, self.ambient_dim, self.vertices)
    }
}

/// The Newton polytope: convex hull of the support of `f`.
pub fn newton_polytope(f: &LaurentPoly) -> Result<LatticePolytope, LatticeError> {
    if f.is_zero() {
        return Err(LatticeError::EmptyPolynomial);
    }
    LatticePolytope::from_points(f.dim(), f.support().cloned().collect())
}

/// Lattice-affine length of the segment `[p, q]`: the number of lattice
/// points on it minus one, i.e. the gcd of the coordinate differences.
pub fn affine_length(p: &[i64], q: &[i64]) -> Result<u64, LatticeError> {
    if p.len() != q.len() {
        return Err(LatticeError::DimensionMismatch {
            expected: p.len(),
            got: q.len(),
        });
    }
    let g = mat::gcd_slice(&mat::sub_vec(q, p));
    if g == 0 {
        Err(LatticeError::DegenerateSegment)
    } else {
        Ok(g as u64)
    }
}

impl LatticePolytope {
    /// Exact hull of arbitrary integer points (duplicates and interior
    /// points welcome).
    pub fn from_points(
        ambient_dim: usize,
        points: Vec<Vec<i64>>,
    ) -> Result<LatticePolytope, LatticeError> {
        if points.is_empty() {
            return Err(LatticeError::EmptyPointSet);
        }
        for p in &points {
            if p.len() != ambient_dim {
                return Err(LatticeError::DimensionMismatch {
                    expected: ambient_dim,
                    got: p.len(),
                });
            }
        }
        let mut pts = points;
        pts.sort();
        pts.dedup();

        // Large inputs are reduced first: the hull of a union is the hull of
        // the per-chunk hull vertices, and chunks of a potential's support
        // are low-dimensional slabs with tiny hulls.
        const CHUNK: usize = 512;
        while pts.len() > 2 * CHUNK {
            let mut reduced: Vec<Vec<i64>> = Vec::new();
            for chunk in pts.chunks(CHUNK) {
                let part = LatticePolytope::from_points(ambient_dim, chunk.to_vec())?;
                reduced.extend(part.vertices.iter().cloned());
            }
            reduced.sort();
            reduced.dedup();
            if reduced.len() >= pts.len() {
                break;
            }
            pts = reduced;
        }

        // Affine dimension via a greedy independent set of difference
        // vectors, tracked in an incrementally reduced echelon.
        let anchor = pts[0].clone();
        let mut echelon = Echelon::new(ambient_dim);
        let mut indep: Vec<Vec<i64>> = Vec::new();
        for p in &pts[1..] {
            let d = mat::sub_vec(p, &anchor);
            if echelon.insert(&d) {
                indep.push(d);
            }
            if indep.len() == ambient_dim {
                break;
            }
        }
        let affine_dim = indep.len();

        // Chart: identity when full-dimensional, else coordinates in a
        // Hermite basis of the difference span (injective, so extremality
        // is preserved).
        let chart: Vec<Vec<i64>> = if affine_dim == ambient_dim {
            pts.clone()
        } else {
            let diffs: Vec<Vec<i64>> = pts.iter().map(|p| mat::sub_vec(p, &anchor)).collect();
            let basis = mat::hnf_span(&diffs, ambient_dim);
            debug_assert_eq!(basis.len(), affine_dim);
            diffs
                .iter()
                .map(|d| mat::solve_in_span(&basis, d).expect("diff lies in its own span"))
                .collect()
        };

        let structure = hull_structure(&chart, affine_dim);

        // Map hull vertex ids to ambient points and sort them.
        let mut verts: Vec<Vec<i64>> = structure.vertex_ids.iter().map(|&i| pts[i].clone()).collect();
        verts.sort();
        let relabel: BTreeMap<usize, usize> = structure
            .vertex_ids
            .iter()
            .map(|&old| {
                let pos = verts.binary_search(&pts[old]).expect("vertex present");
                (old, pos)
            })
            .collect();

        let mut edges: Vec<(usize, usize)> = structure
            .edges
            .iter()
            .map(|&(a, b)| {
                let (x, y) = (relabel[&a], relabel[&b]);
                (x.min(y), x.max(y))
            })
            .collect();
        edges.sort();
        edges.dedup();

        let mut two_faces: Vec<Vec<usize>> = structure
            .two_faces
            .iter()
            .map(|f| {
                let mut v: Vec<usize> = f.iter().map(|i| relabel[i]).collect();
                v.sort();
                v
            })
            .collect();
        two_faces.sort();
        two_faces.dedup();

        // Facet inequalities live in ambient coordinates and are only
        // meaningful for full-dimensional polytopes (identity chart).
        let mut facets: Vec<Facet> = if affine_dim == ambient_dim {
            structure
                .facets
                .iter()
                .map(|f| {
                    let mut vs: Vec<usize> = f.vertex_ids.iter().map(|i| relabel[i]).collect();
                    vs.sort();
                    Facet {
                        normal: f.normal.clone(),
                        offset: f.offset.clone(),
                        vertices: vs,
                    }
                })
                .collect()
        } else {
            Vec::new()
        };
        facets.sort_by(|a, b| (&a.normal, &a.offset).cmp(&(&b.normal, &b.offset)));

        Ok(LatticePolytope {
            ambient_dim,
            affine_dim,
            vertices: verts,
            edges,
            two_faces,
            facets,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn affine_dim(&self) -> usize {
        self.affine_dim
    }

    pub fn is_full_dim(&self) -> bool {
        self.affine_dim == self.ambient_dim
    }

    /// Hull vertices in lexicographic order.
    pub fn vertices(&self) -> &[Vec<i64>] {
        &self.vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Edges as pairs of vertex indices.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// 2-faces as sorted sets of vertex indices.
    pub fn two_faces(&self) -> &[Vec<usize>] {
        &self.two_faces
    }

    /// Facet inequalities; empty unless the polytope is full-dimensional.
    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    /// Affine lengths of all edges, sorted ascending.
    pub fn edge_length_multiset(&self) -> Vec<u64> {
        let mut lengths: Vec<u64> = self
            .edges
            .iter()
            .map(|&(a, b)| {
                affine_length(&self.vertices[a], &self.vertices[b]).expect("edges are nondegenerate")
            })
            .collect();
        lengths.sort_unstable();
        lengths
    }

    /// Apply a unimodular exponent map to every vertex.
    pub fn apply_unimodular(&self, m: &UnimodularMap) -> Result<LatticePolytope, LatticeError> {
        if m.dim() != self.ambient_dim {
            return Err(LatticeError::DimensionMismatch {
                expected: self.ambient_dim,
                got: m.dim(),
            });
        }
        LatticePolytope::from_points(
            self.ambient_dim,
            self.vertices.iter().map(|v| m.apply(v)).collect(),
        )
    }
}

/// Row echelon over `BigInt` used for incremental rank tests; rows are kept
/// gcd-normalized so entries stay small.
struct Echelon {
    width: usize,
    rows: Vec<(usize, Vec<BigInt>)>, // (pivot column, row)
}

impl Echelon {
    fn new(width: usize) -> Echelon {
        Echelon { width, rows: Vec::new() }
    }

    /// Insert `v` if it enlarges the span; returns whether it did.
    fn insert(&mut self, v: &[i64]) -> bool {
        let mut row: Vec<BigInt> = v.iter().map(|&x| BigInt::from(x)).collect();
        for (pivot_col, pivot_row) in &self.rows {
            if !row[*pivot_col].is_zero() {
                let a = pivot_row[*pivot_col].clone();
                let b = row[*pivot_col].clone();
                for c in 0..self.width {
                    row[c] = &row[c] * &a - &pivot_row[c] * &b;
                }
            }
        }
        let Some(pivot_col) = row.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let g = row
            .iter()
            .fold(BigInt::zero(), |acc, x| num_integer::Integer::gcd(&acc, &x.abs()));
        for x in row.iter_mut() {
            *x = &*x / &g;
        }
        let at = self
            .rows
            .iter()
            .position(|(pc, _)| *pc > pivot_col)
            .unwrap_or(self.rows.len());
        self.rows.insert(at, (pivot_col, row));
        true
    }
}

// ---------------------------------------------------------------------------
// Hull machinery (chart coordinates, full-dimensional by construction).
// ---------------------------------------------------------------------------

struct ChartFacet {
    normal: Vec<BigInt>,
    offset: BigInt,
    vertex_ids: Vec<usize>,
}

struct HullStructure {
    vertex_ids: Vec<usize>,
    edges: Vec<(usize, usize)>,
    two_faces: Vec<Vec<usize>>,
    facets: Vec<ChartFacet>,
}

fn hull_structure(pts: &[Vec<i64>], dim: usize) -> HullStructure {
    match dim {
        0 => HullStructure {
            vertex_ids: vec![0],
            edges: Vec::new(),
            two_faces: Vec::new(),
            facets: Vec::new(),
        },
        1 => {
            let lo = (0..pts.len()).min_by_key(|&i| pts[i][0]).unwrap();
            let hi = (0..pts.len()).max_by_key(|&i| pts[i][0]).unwrap();
            HullStructure {
                vertex_ids: vec![lo, hi],
                edges: vec![(lo, hi)],
                two_faces: Vec::new(),
                facets: Vec::new(),
            }
        }
        2 => {
            let ring = hull_2d_ring(pts);
            let edges = ring
                .iter()
                .zip(ring.iter().cycle().skip(1))
                .take(ring.len())
                .map(|(&a, &b)| (a, b))
                .collect();
            HullStructure {
                vertex_ids: ring.clone(),
                edges,
                two_faces: vec![ring.clone()],
                facets: facets_2d(pts, &ring),
            }
        }
        _ => hull_incremental(pts, dim),
    }
}

fn cross2(o: &[i64], a: &[i64], b: &[i64]) -> i128 {
    let (ax, ay) = ((a[0] - o[0]) as i128, (a[1] - o[1]) as i128);
    let (bx, by) = ((b[0] - o[0]) as i128, (b[1] - o[1]) as i128);
    ax * by - ay * bx
}

/// Andrew's monotone chain; returns hull vertex ids as a counterclockwise
/// ring starting from the lexicographic minimum. Input must span 2 dims.
fn hull_2d_ring(pts: &[Vec<i64>]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.sort_by(|&a, &b| pts[a].cmp(&pts[b]));
    let build = |iter: &mut dyn Iterator<Item = usize>| {
        let mut chain: Vec<usize> = Vec::new();
        for i in iter {
            while chain.len() >= 2
                && cross2(
                    &pts[chain[chain.len() - 2]],
                    &pts[chain[chain.len() - 1]],
                    &pts[i],
                ) <= 0
            {
                chain.pop();
            }
            chain.push(i);
        }
        chain
    };
    let lower = build(&mut order.iter().copied());
    let mut upper = build(&mut order.iter().rev().copied());
    let mut ring = lower;
    ring.pop();
    upper.pop();
    ring.extend(upper);
    ring
}

fn facets_2d(pts: &[Vec<i64>], ring: &[usize]) -> Vec<ChartFacet> {
    let n = ring.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        let d = mat::sub_vec(&pts[b], &pts[a]);
        // Outward normal of a ccw ring edge: rotate the direction by -90.
        let normal = mat::primitive_canonical(&[d[1], -d[0]]).expect("edge is nondegenerate");
        let normal: Vec<BigInt> = normal.into_iter().map(BigInt::from).collect();
        let offset = mat::big_dot(&normal, &pts[a]);
        // Orientation check against the third ring point.
        let probe = ring[(i + 2) % n];
        let (normal, offset) = if mat::big_dot(&normal, &pts[probe]) > offset {
            (normal.iter().map(|x| -x).collect(), -offset)
        } else {
            (normal, offset)
        };
        out.push(ChartFacet {
            normal,
            offset,
            vertex_ids: vec![a, b],
        });
    }
    out
}

/// Beneath-beyond incremental hull for `dim >= 3`, exact, with a coplanar
/// merge and a tight-rank vertex filter at the end.
fn hull_incremental(pts: &[Vec<i64>], dim: usize) -> HullStructure {
    // Seed simplex: anchor plus a greedy affinely independent set.
    let mut seed = vec![0usize];
    let mut indep: Vec<Vec<i64>> = Vec::new();
    for (i, p) in pts.iter().enumerate().skip(1) {
        let d = mat::sub_vec(p, &pts[0]);
        indep.push(d);
        if mat::rank(&indep) < indep.len() {
            indep.pop();
        } else {
            seed.push(i);
        }
        if indep.len() == dim {
            break;
        }
    }
    assert_eq!(seed.len(), dim + 1, "input must span the chart dimension");

    // Strictly interior reference point: the seed centroid, kept as an
    // unnormalised integer sum.
    let centroid_sum: Vec<i64> = (0..dim)
        .map(|c| {
            seed.iter()
                .map(|&i| pts[i][c])
                .try_fold(0i64, i64::checked_add)
                .expect("centroid sum overflow")
        })
        .collect();
    let centroid_den = BigInt::from(seed.len() as i64);

    #[derive(Clone)]
    struct BFacet {
        verts: Vec<usize>,
        normal: Vec<BigInt>,
        offset: BigInt,
    }

    let make_facet = |verts: Vec<usize>| -> BFacet {
        let diffs: Vec<Vec<i64>> = verts[1..]
            .iter()
            .map(|&i| mat::sub_vec(&pts[i], &pts[verts[0]]))
            .collect();
        let normal = big_cross(&diffs);
        let offset = mat::big_dot(&normal, &pts[verts[0]]);
        // Outward: centroid strictly beneath.
        let lhs = mat::big_dot(&normal, &centroid_sum);
        let rhs = &offset * &centroid_den;
        let (normal, offset) = if lhs > rhs {
            (normal.iter().map(|x| -x).collect(), -offset)
        } else {
            assert!(lhs < rhs, "interior reference on a facet hyperplane");
            (normal, offset)
        };
        BFacet { verts, normal, offset }
    };

    let mut facets: Vec<BFacet> = Vec::new();
    for skip in 0..=dim {
        let verts: Vec<usize> = seed
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != skip)
            .map(|(_, &i)| i)
            .collect();
        facets.push(make_facet(verts));
    }

    let seed_set: BTreeSet<usize> = seed.iter().copied().collect();
    for (i, p) in pts.iter().enumerate() {
        if seed_set.contains(&i) {
            continue;
        }
        let visible: Vec<usize> = (0..facets.len())
            .filter(|&f| mat::big_dot(&facets[f].normal, p) > facets[f].offset)
            .collect();
        if visible.is_empty() {
            continue;
        }
        let visible_set: BTreeSet<usize> = visible.iter().copied().collect();
        // Horizon ridges: (dim-1)-subsets shared between a visible and an
        // invisible facet.
        let mut ridge_owner: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for (f, facet) in facets.iter().enumerate() {
            for skip in 0..facet.verts.len() {
                let mut ridge: Vec<usize> = facet
                    .verts
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| *k != skip)
                    .map(|(_, &v)| v)
                    .collect();
                ridge.sort_unstable();
                ridge_owner.entry(ridge).or_default().push(f);
            }
        }
        let mut new_facets: Vec<BFacet> = Vec::new();
        for (ridge, owners) in &ridge_owner {
            let n_vis = owners.iter().filter(|f| visible_set.contains(f)).count();
            if n_vis >= 1 && owners.len() - n_vis >= 1 {
                let mut verts = ridge.clone();
                verts.push(i);
                new_facets.push(make_facet(verts));
            }
        }
        let mut kept: Vec<BFacet> = facets
            .into_iter()
            .enumerate()
            .filter(|(f, _)| !visible_set.contains(f))
            .map(|(_, f)| f)
            .collect();
        kept.extend(new_facets);
        facets = kept;
    }

    // Merge coplanar simplicial facets into true facets.
    let mut merged: BTreeMap<(Vec<BigInt>, BigInt), BTreeSet<usize>> = BTreeMap::new();
    for f in &facets {
        merged
            .entry((f.normal.clone(), f.offset.clone()))
            .or_default()
            .extend(f.verts.iter().copied());
    }

    // Candidate vertices, then keep those whose tight normals span everything.
    let candidates: BTreeSet<usize> = merged.values().flatten().copied().collect();
    let mut vertex_ids: Vec<usize> = Vec::new();
    for &c in &candidates {
        let tight: Vec<Vec<BigInt>> = merged
            .iter()
            .filter(|((normal, offset), _)| mat::big_dot(normal, &pts[c]) == *offset)
            .map(|((normal, _), _)| normal.clone())
            .collect();
        if mat::rank_big(&tight) == dim {
            vertex_ids.push(c);
        }
    }

    let chart_facets: Vec<ChartFacet> = merged
        .into_iter()
        .map(|((normal, offset), _)| {
            let vertex_ids: Vec<usize> = vertex_ids
                .iter()
                .copied()
                .filter(|&v| mat::big_dot(&normal, &pts[v]) == offset)
                .collect();
            ChartFacet {
                normal,
                offset,
                vertex_ids,
            }
        })
        .collect();

    // Face enumeration from tight facet sets.
    let tight_sets: BTreeMap<usize, Vec<usize>> = vertex_ids
        .iter()
        .map(|&v| {
            let t: Vec<usize> = chart_facets
                .iter()
                .enumerate()
                .filter(|(_, f)| f.vertex_ids.contains(&v))
                .map(|(k, _)| k)
                .collect();
            (v, t)
        })
        .collect();
    let normals_of = |set: &[usize]| -> Vec<Vec<BigInt>> {
        set.iter().map(|&k| chart_facets[k].normal.clone()).collect()
    };
    let common = |a: &[usize], b: &[usize]| -> Vec<usize> {
        a.iter().copied().filter(|x| b.contains(x)).collect()
    };

    let mut edges = Vec::new();
    for (ai, &a) in vertex_ids.iter().enumerate() {
        for &b in &vertex_ids[ai + 1..] {
            let t = common(&tight_sets[&a], &tight_sets[&b]);
            if mat::rank_big(&normals_of(&t)) != dim - 1 {
                continue;
            }
            let face_members = vertex_ids
                .iter()
                .filter(|&&v| t.iter().all(|&k| chart_facets[k].vertex_ids.contains(&v)))
                .count();
            if face_members == 2 {
                edges.push((a, b));
            }
        }
    }

    let mut two_faces: BTreeSet<Vec<usize>> = BTreeSet::new();
    for (ai, &a) in vertex_ids.iter().enumerate() {
        for (bi, &b) in vertex_ids.iter().enumerate().skip(ai + 1) {
            for &c in &vertex_ids[bi + 1..] {
                let t = common(&common(&tight_sets[&a], &tight_sets[&b]), &tight_sets[&c]);
                if mat::rank_big(&normals_of(&t)) != dim - 2 {
                    continue;
                }
                let mut members: Vec<usize> = vertex_ids
                    .iter()
                    .copied()
                    .filter(|&v| t.iter().all(|&k| chart_facets[k].vertex_ids.contains(&v)))
                    .collect();
                members.sort_unstable();
                two_faces.insert(members);
            }
        }
    }

    HullStructure {
        vertex_ids,
        edges,
        two_faces: two_faces.into_iter().collect(),
        facets: chart_facets,
    }
}

/// Primitive normal to `dim - 1` difference vectors via signed minors.
fn big_cross(diffs: &[Vec<i64>]) -> Vec<BigInt> {
    let d = diffs.first().map_or(1, |r| r.len());
    assert_eq!(diffs.len() + 1, d);
    let mut out = Vec::with_capacity(d);
    for j in 0..d {
        let minor: Vec<Vec<BigInt>> = diffs
            .iter()
            .map(|r| {
                (0..d)
                    .filter(|&c| c != j)
                    .map(|c| BigInt::from(r[c]))
                    .collect()
            })
            .collect();
        let m = if d == 1 {
            BigInt::from(1)
        } else {
            mat::big_det(&minor)
        };
        out.push(if j % 2 == 0 { m } else { -m });
    }
    assert!(
        out.iter().any(|x| !x.is_zero()),
        "facet spanning set is degenerate"
    );
    let g = out
        .iter()
        .fold(BigInt::zero(), |acc, x| num_integer::Integer::gcd(&acc, &x.abs()));
    out.into_iter().map(|x| x / &g).collect()
}

// ---------------------------------------------------------------------------
// Reports and invariants.
// ---------------------------------------------------------------------------

/// Outcome of the Fano test: convexity is structural, the origin must lie
/// strictly inside, and every vertex must be primitive.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FanoReport {
    pub full_dimensional: bool,
    pub origin_interior: bool,
    pub vertices_primitive: bool,
    pub failing_vertex: Option<Vec<i64>>,
}

impl FanoReport {
    pub fn is_fano(&self) -> bool {
        self.full_dimensional && self.origin_interior && self.vertices_primitive
    }
}

/// Detailed Fano check; total (never errors).
pub fn is_fano(p: &LatticePolytope) -> FanoReport {
    let full_dimensional = p.is_full_dim();
    let origin_interior = full_dimensional
        && p.facets
            .iter()
            .all(|f| f.offset.is_positive());
    let failing_vertex = p
        .vertices
        .iter()
        .find(|v| mat::gcd_slice(v) != 1)
        .cloned();
    FanoReport {
        full_dimensional,
        origin_interior,
        vertices_primitive: failing_vertex.is_none(),
        failing_vertex,
    }
}

/// Full-dimensional simplex test: exactly `dim + 1` vertices spanning.
pub fn is_simplex(p: &LatticePolytope) -> bool {
    p.is_full_dim() && p.vertex_count() == p.ambient_dim + 1
}

/// GL(n, Z)-invariant fingerprint used as a fast non-equivalence
/// certificate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolytopeInvariants {
    pub vertex_count: usize,
    pub edge_lengths: Vec<u64>,
    pub normalized_volume: String,
}

/// Edge-length multiset, normalized volume and vertex count.
pub fn invariants(p: &LatticePolytope) -> Result<PolytopeInvariants, LatticeError> {
    if !p.is_full_dim() {
        return Err(LatticeError::UnsupportedShape(
            "invariants need a full-dimensional polytope".into(),
        ));
    }
    Ok(PolytopeInvariants {
        vertex_count: p.vertex_count(),
        edge_lengths: p.edge_length_multiset(),
        normalized_volume: normalized_volume(p).to_string(),
    })
}

/// Lattice-normalized volume (`d! *` Euclidean volume). For a simplex this
/// is `|det|` of the edge matrix; in general we cone over facets.
pub fn normalized_volume(p: &LatticePolytope) -> BigInt {
    normalized_volume_points(p.ambient_dim, p.vertices.clone())
}

fn normalized_volume_points(ambient: usize, verts: Vec<Vec<i64>>) -> BigInt {
    // Project to a saturated chart of the affine span so lattice volumes are
    // measured against the full intersection lattice.
    let anchor = verts[0].clone();
    let diffs: Vec<Vec<i64>> = verts.iter().map(|v| mat::sub_vec(v, &anchor)).collect();
    let basis = mat::saturate_span(&diffs, ambient);
    let d = basis.len();
    if d == 0 {
        return BigInt::from(1);
    }
    let chart: Vec<Vec<i64>> = diffs
        .iter()
        .map(|x| mat::solve_in_span(&basis, x).expect("saturation contains the span"))
        .collect();
    let poly = LatticePolytope::from_points(d, chart).expect("nonempty");
    debug_assert!(poly.is_full_dim());
    if poly.vertex_count() == d + 1 {
        let rows: Vec<Vec<BigInt>> = poly.vertices[1..]
            .iter()
            .map(|v| {
                mat::sub_vec(v, &poly.vertices[0])
                    .into_iter()
                    .map(BigInt::from)
                    .collect()
            })
            .collect();
        return mat::big_det(&rows).abs();
    }
    // Cone over facets avoiding vertex 0.
    let v0 = &poly.vertices[0];
    let mut total = BigInt::zero();
    for f in &poly.facets {
        let h = &f.offset - mat::big_dot(&f.normal, v0);
        if h.is_zero() {
            continue;
        }
        let face_verts: Vec<Vec<i64>> = f.vertices.iter().map(|&i| poly.vertices[i].clone()).collect();
        total += h.abs() * normalized_volume_points(d, face_verts);
    }
    total
}

// ---------------------------------------------------------------------------
// Combinatorial mutation.
// ---------------------------------------------------------------------------

/// Combinatorial mutation of `p` along the datum `d`: slices along the
/// grading are stretched or shrunk by multiples of the factor segment
/// `[0, u]`. On Newton polytopes of mutable polynomials this matches the
/// algebraic mutation exactly.
///
/// Implemented for the shapes that occur here: every vertex on a nonzero
/// grading level must lie in a single affine 2-plane containing `u` (all
/// polygons qualify, as do the simplices built by the potential walk, whose
/// remaining vertices sit at level zero).
pub fn combinatorial_mutate(
    p: &LatticePolytope,
    d: &MutationDatum,
) -> Result<LatticePolytope, LatticeError> {
    d.validate()?;
    if d.dim() != p.ambient_dim {
        return Err(LatticeError::DimensionMismatch {
            expected: p.ambient_dim,
            got: d.dim(),
        });
    }
    let levels: Vec<i64> = p.vertices.iter().map(|v| mat::dot(&d.w, v)).collect();
    if levels.iter().all(|&l| l == 0) {
        return Ok(p.clone()); // factor^0
    }
    let plane_pts: Vec<Vec<i64>> = p
        .vertices
        .iter()
        .zip(&levels)
        .filter(|(_, &l)| l != 0)
        .map(|(v, _)| v.clone())
        .collect();
    let anchor = plane_pts[0].clone();
    let mut dirs: Vec<Vec<i64>> = plane_pts
        .iter()
        .map(|v| mat::sub_vec(v, &anchor))
        .collect();
    dirs.push(d.u.clone());
    let span = mat::saturate_span(&dirs, p.ambient_dim);
    if span.len() > 2 {
        return Err(LatticeError::UnsupportedShape(
            "vertices at nonzero grading levels span more than a 2-plane".into(),
        ));
    }

    // Level-zero vertices split into the mutation plane and inert ones.
    let mut polygon: Vec<Vec<i64>> = plane_pts;
    let mut inert: Vec<Vec<i64>> = Vec::new();
    for (v, &l) in p.vertices.iter().zip(&levels) {
        if l != 0 {
            continue;
        }
        if mat::solve_in_span(&span, &mat::sub_vec(v, &anchor)).is_some() {
            polygon.push(v.clone());
        } else {
            inert.push(v.clone());
        }
    }

    let mutated_plane = mutate_polygon(&polygon, d, &span, &anchor)?;
    let mut cloud = mutated_plane;
    cloud.extend(inert);
    LatticePolytope::from_points(p.ambient_dim, cloud)
}

/// Mutate the convex hull of `polygon` (vertices of a polytope lying in
/// `anchor + span`, with `u` in the span) and return the new vertex cloud.
fn mutate_polygon(
    polygon: &[Vec<i64>],
    d: &MutationDatum,
    span: &[Vec<i64>],
    anchor: &[i64],
) -> Result<Vec<Vec<i64>>, LatticeError> {
    let eps: i64 = match d.sign {
        MutationSign::Neg => -1,
        MutationSign::Pos => 1,
    };
    // The shear sending each point v to v + eps * <w, v> * u.
    let shear = |v: &[i64]| -> Vec<i64> {
        let l = mat::dot(&d.w, v);
        mat::add_vec(v, &mat::scale_vec(&d.u, eps * l))
    };

    let u_chart = mat::solve_in_span(span, &d.u).expect("u lies in the saturated span");
    let tau_fn = mat::bezout_functional(&u_chart).expect("u is primitive in the plane lattice");
    let coords: Vec<(i64, i64)> = polygon
        .iter()
        .map(|v| {
            let y = mat::solve_in_span(span, &mat::sub_vec(v, anchor)).expect("point in plane");
            (mat::dot(&d.w, v), mat::dot(&tau_fn, &y))
        })
        .collect();

    let lambda_min = coords.iter().map(|c| c.0).min().unwrap();
    let lambda_max = coords.iter().map(|c| c.0).max().unwrap();

    // Levels constant on the plane part: the single slice is the whole part.
    if lambda_min == lambda_max {
        let level = lambda_min;
        let shrink = match d.sign {
            MutationSign::Neg => level,
            MutationSign::Pos => -level,
        };
        if shrink <= 0 {
            // Pure Minkowski expansion by |level| * [0, u].
            let mut cloud: Vec<Vec<i64>> = polygon.to_vec();
            cloud.extend(polygon.iter().map(|v| shear(v)));
            return Ok(cloud);
        }
        // Shrinking a single slice: it must be a chord along u.
        let along_u = polygon
            .iter()
            .all(|v| {
                let diff = mat::sub_vec(v, &polygon[0]);
                mat::gcd_slice(&diff) == 0
                    || mat::primitive_canonical(&diff) == mat::primitive_canonical(&d.u)
            });
        if !along_u {
            return Err(LatticeError::UnsupportedShape(
                "cannot shrink a slice that is not a segment along the factor".into(),
            ));
        }
        let width = coords.iter().map(|c| c.1).max().unwrap()
            - coords.iter().map(|c| c.1).min().unwrap();
        if width < shrink {
            return Err(LatticeError::NotMutable { level });
        }
        let lo = polygon[coords.iter().enumerate().min_by_key(|(_, c)| c.1).unwrap().0].clone();
        let hi = polygon[coords.iter().enumerate().max_by_key(|(_, c)| c.1).unwrap().0].clone();
        return Ok(vec![lo, shear(&hi)]);
    }

    // The width precondition is concave minus linear, so it binds only at
    // the extreme levels on the divided side.
    let mut width_checks: Vec<(i64, i64)> = Vec::new(); // (level, required width)
    match d.sign {
        MutationSign::Neg => {
            if lambda_max > 0 {
                width_checks.push((lambda_max, lambda_max));
            }
            if lambda_min > 0 {
                width_checks.push((lambda_min, lambda_min));
            }
        }
        MutationSign::Pos => {
            if lambda_min < 0 {
                width_checks.push((lambda_min, -lambda_min));
            }
            if lambda_max < 0 {
                width_checks.push((lambda_max, -lambda_max));
            }
        }
    }
    for (level, needed) in width_checks {
        let taus: Vec<i64> = coords
            .iter()
            .filter(|c| c.0 == level)
            .map(|c| c.1)
            .collect();
        let width = taus.iter().max().unwrap() - taus.iter().min().unwrap();
        if width < needed {
            return Err(LatticeError::NotMutable { level });
        }
    }

    // Chain classification: a vertex on the lower (min-tau) boundary stays,
    // one on the upper boundary is sheared; extreme-level vertices can be
    // both.
    let mut cloud: Vec<Vec<i64>> = Vec::new();
    for (i, &(li, ti)) in coords.iter().enumerate() {
        let mut upper = true;
        let mut lower = true;
        for (j, &(lj, tj)) in coords.iter().enumerate() {
            if i == j {
                continue;
            }
            if lj == li {
                if tj > ti {
                    upper = false;
                }
                if tj < ti {
                    lower = false;
                }
            }
        }
        for &(la, ta) in &coords {
            for &(lb, tb) in &coords {
                if la < li && li < lb {
                    // Compare t_i with the chord value at level l_i.
                    let lhs = BigInt::from(ti) * BigInt::from(lb - la);
                    let rhs =
                        BigInt::from(ta) * BigInt::from(lb - li) + BigInt::from(tb) * BigInt::from(li - la);
                    match lhs.cmp(&rhs) {
                        std::cmp::Ordering::Less => upper = false,
                        std::cmp::Ordering::Greater => lower = false,
                        std::cmp::Ordering::Equal => {}
                    }
                }
            }
        }
        assert!(upper || lower, "polygon vertex off its own boundary");
        if lower {
            cloud.push(polygon[i].clone());
        }
        if upper {
            cloud.push(shear(&polygon[i]));
        }
    }
    Ok(cloud)
}

// ---------------------------------------------------------------------------
// Unimodular equivalence of simplices.
// ---------------------------------------------------------------------------

/// Search for `M` in GL(n, Z) with `M * vertices(p) = vertices(q)` as sets.
/// Sound and complete for full-dimensional simplices; other shapes are
/// rejected. No translations: the origin is pinned by the Fano condition.
pub fn unimodular_equivalent(
    p: &LatticePolytope,
    q: &LatticePolytope,
) -> Result<Option<UnimodularMap>, LatticeError> {
    if !is_simplex(p) || !is_simplex(q) || p.ambient_dim != q.ambient_dim {
        return Err(LatticeError::UnsupportedShape(
            "equivalence search is restricted to full-dimensional simplices of equal dimension"
                .into(),
        ));
    }
    // Fast invariant screen; sound because both are GL(n, Z)-invariant.
    if p.edge_length_multiset() != q.edge_length_multiset()
        || normalized_volume(p) != normalized_volume(q)
    {
        return Ok(None);
    }
    let n = p.ambient_dim;
    // A linearly independent n-subset of p's vertices, greedily.
    let mut base_ids: Vec<usize> = Vec::new();
    let mut rows: Vec<Vec<i64>> = Vec::new();
    for (i, v) in p.vertices.iter().enumerate() {
        rows.push(v.clone());
        if mat::rank(&rows) < rows.len() {
            rows.pop();
        } else {
            base_ids.push(i);
        }
        if base_ids.len() == n {
            break;
        }
    }
    if base_ids.len() < n {
        return Err(LatticeError::UnsupportedShape(
            "simplex vertices do not linearly span".into(),
        ));
    }
    let spare_id = (0..=n).find(|i| !base_ids.contains(i)).expect("one left over");

    // Columns of the base matrix are the chosen vertices.
    let p_cols: Vec<Vec<BigInt>> = base_ids
        .iter()
        .map(|&i| p.vertices[i].iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    let det_p = mat::big_det(&transpose_big(&p_cols, n));
    debug_assert!(!det_p.is_zero());
    let adj_p = adjugate_from_cols(&p_cols, n);

    let q_count = q.vertices.len();
    let mut selection: Vec<usize> = Vec::new();
    let mut used = vec![false; q_count];
    let result = search_assignment(p, q, n, spare_id, &adj_p, &det_p, &mut selection, &mut used);
    Ok(result)
}

#[allow(clippy::too_many_arguments)]
fn search_assignment(
    p: &LatticePolytope,
    q: &LatticePolytope,
    n: usize,
    spare_id: usize,
    adj_p: &[Vec<BigInt>],
    det_p: &BigInt,
    selection: &mut Vec<usize>,
    used: &mut [bool],
) -> Option<UnimodularMap> {
    if selection.len() == n {
        // M = Q_cols * adj(P) / det(P).
        let mut rows = vec![vec![BigInt::zero(); n]; n];
        for r in 0..n {
            for c in 0..n {
                let mut acc = BigInt::zero();
                for (k, &qi) in selection.iter().enumerate() {
                    acc += BigInt::from(q.vertices[qi][r]) * &adj_p[k][c];
                }
                if (&acc % det_p).is_zero() {
                    rows[r][c] = acc / det_p;
                } else {
                    return None;
                }
            }
        }
        let det_m = mat::big_det(&rows);
        if !det_m.abs().is_one() {
            return None;
        }
        let rows_i64: Vec<Vec<i64>> = rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|x| x.to_i64().expect("witness entry out of i64 range"))
                    .collect()
            })
            .collect();
        let m = UnimodularMap::new(rows_i64).expect("determinant checked");
        // The leftover vertex must land on the unused q vertex.
        let image = m.apply(&p.vertices[spare_id]);
        let leftover = (0..q.vertices.len()).find(|i| !used[*i]).expect("one vertex unused");
        if q.vertices[leftover] == image {
            return Some(m);
        }
        return None;
    }
    for cand in 0..q.vertices.len() {
        if used[cand] {
            continue;
        }
        used[cand] = true;
        selection.push(cand);
        if let Some(m) = search_assignment(p, q, n, spare_id, adj_p, det_p, selection, used) {
            return Some(m);
        }
        selection.pop();
        used[cand] = false;
    }
    None
}

fn transpose_big(cols: &[Vec<BigInt>], n: usize) -> Vec<Vec<BigInt>> {
    (0..n)
        .map(|r| cols.iter().map(|col| col[r].clone()).collect())
        .collect()
}

/// Adjugate of the matrix whose columns are `cols`, returned in the layout
/// `adj[k][c] = adj(P)[k][c]` so that `(Q * adj)[r][c] = sum_k Q[r][k] adj[k][c]`.
fn adjugate_from_cols(cols: &[Vec<BigInt>], n: usize) -> Vec<Vec<BigInt>> {
    let m = transpose_big(cols, n); // m[r][c] entry of P
    let mut adj = vec![vec![BigInt::zero(); n]; n];
    for r in 0..n {
        for c in 0..n {
            // adj[r][c] = cofactor(c, r)
            let minor: Vec<Vec<BigInt>> = (0..n)
                .filter(|&i| i != c)
                .map(|i| {
                    (0..n)
                        .filter(|&j| j != r)
                        .map(|j| m[i][j].clone())
                        .collect()
                })
                .collect();
            let det = if n == 1 {
                BigInt::from(1)
            } else {
                mat::big_det(&minor)
            };
            adj[r][c] = if (r + c) % 2 == 0 { det } else { -det };
        }
    }
    adj
}

// ---------------------------------------------------------------------------
// Serialization: vertices only, faces are recomputed on load.
// ---------------------------------------------------------------------------

impl Serialize for LatticePolytope {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("LatticePolytope", 2)?;
        s.serialize_field("dim", &self.ambient_dim)?;
        s.serialize_field("vertices", &self.vertices)?;
        s.end()
    }
}

impl<'de> Deserialize<'de> for LatticePolytope {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            dim: usize,
            vertices: Vec<Vec<i64>>,
        }
        let repr = Repr::deserialize(deserializer)?;
        LatticePolytope::from_points(repr.dim, repr.vertices).map_err(D::Error::custom)
    }
}
