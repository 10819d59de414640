//! Exact sparse Laurent polynomial algebra over the integers, unimodular
//! changes of variables, gradings, and algebraic mutation.
//!
//! A polynomial is a finite map from exponent vectors in `Z^n` to nonzero
//! `BigInt` coefficients. The map is kept in a `BTreeMap` so iteration (and
//! hence serialization) is always in lexicographic exponent order.
//!
//! The central operation is [`LaurentPoly::mutate`]: split `f` into graded
//! pieces `f_i` along a primitive grading vector `w`, then divide or
//! multiply each piece by `(1 + x^u)^i` for a primitive factor exponent `u`
//! orthogonal to `w`. With the negative sign, positively graded pieces must
//! be exactly divisible; the failure carries the offending degree and
//! remainder so callers can tell a non-seed basis from a bug.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::mat::{self, SquareMat};

#[derive(Clone, Debug, PartialEq)]
pub enum LaurentError {
    DimensionMismatch { left: usize, right: usize },
    NotUnimodular { det: BigInt },
    /// A graded piece failed the exact-divisibility precondition of a
    /// mutation; carries the degree and the division remainder.
    NotMutable { degree: i64, remainder: LaurentPoly },
    /// The grading/factor pair is not a valid mutation datum.
    InvalidDatum(String),
    ZeroGrading,
    BadVariableSet(String),
}

impl fmt::Display for LaurentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LaurentError::DimensionMismatch { left, right } => {
                write!(f, "dimension mismatch: {left} vs {right}")
            }
            LaurentError::NotUnimodular { det } => {
                write!(f, "matrix is not unimodular (det = {det})")
            }
            LaurentError::NotMutable { degree, remainder } => write!(
                f,
                "graded piece at degree {degree} is not divisible (remainder {remainder})"
            ),
            LaurentError::InvalidDatum(why) => write!(f, "invalid mutation datum: {why}"),
            LaurentError::ZeroGrading => write!(f, "grading vector must be nonzero"),
            LaurentError::BadVariableSet(why) => write!(f, "bad variable set: {why}"),
        }
    }
}

impl std::error::Error for LaurentError {}

// ---------------------------------------------------------------------------
// Unimodular exponent maps.
// ---------------------------------------------------------------------------

/// An integer `n x n` matrix with determinant `±1`, acting on exponent
/// vectors by left multiplication.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct UnimodularMap {
    mat: SquareMat,
}

impl UnimodularMap {
    pub fn new(rows: Vec<Vec<i64>>) -> Result<UnimodularMap, LaurentError> {
        let mat = SquareMat::new(rows).ok_or_else(|| {
            LaurentError::InvalidDatum("matrix must be square and nonempty".into())
        })?;
        let det = mat.det();
        if det.abs().is_one() {
            Ok(UnimodularMap { mat })
        } else {
            Err(LaurentError::NotUnimodular { det })
        }
    }

    pub fn identity(n: usize) -> UnimodularMap {
        UnimodularMap {
            mat: SquareMat::identity(n),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.size()
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        self.mat.rows()
    }

    pub fn row(&self, i: usize) -> &[i64] {
        self.mat.row(i)
    }

    pub fn apply(&self, v: &[i64]) -> Vec<i64> {
        self.mat.apply(v)
    }

    pub fn inverse(&self) -> UnimodularMap {
        UnimodularMap {
            mat: self
                .mat
                .inverse_unimodular()
                .expect("unimodular by construction"),
        }
    }

    /// `self` after `other`: `(self.compose(other)).apply(v) =
    /// self.apply(other.apply(v))`.
    pub fn compose(&self, other: &UnimodularMap) -> UnimodularMap {
        UnimodularMap {
            mat: self.mat.mul(&other.mat),
        }
    }

    pub fn det(&self) -> BigInt {
        self.mat.det()
    }

    pub fn is_identity(&self) -> bool {
        self.mat == SquareMat::identity(self.mat.size())
    }
}

impl Serialize for UnimodularMap {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.mat.rows().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for UnimodularMap {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<i64>>::deserialize(deserializer)?;
        UnimodularMap::new(rows).map_err(D::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// Mutation data.
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MutationSign {
    /// Divide positively graded pieces by `(1 + x^u)^i`, multiply negatively
    /// graded ones.
    Neg,
    /// Multiply positively graded pieces, divide negatively graded ones.
    /// Inverse of [`MutationSign::Neg`] on its domain.
    Pos,
}

impl MutationSign {
    pub fn opposite(self) -> MutationSign {
        match self {
            MutationSign::Neg => MutationSign::Pos,
            MutationSign::Pos => MutationSign::Neg,
        }
    }
}

/// Grading vector `w`, factor exponent `u` (both primitive, `<w, u> = 0`)
/// and a direction flag.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutationDatum {
    pub w: Vec<i64>,
    pub u: Vec<i64>,
    pub sign: MutationSign,
}

impl MutationDatum {
    pub fn new(w: Vec<i64>, u: Vec<i64>, sign: MutationSign) -> Result<MutationDatum, LaurentError> {
        let d = MutationDatum { w, u, sign };
        d.validate()?;
        Ok(d)
    }

    /// The normalized datum: grade by the second coordinate, factor
    /// `1 + x_1`.
    pub fn standard(dim: usize, sign: MutationSign) -> MutationDatum {
        assert!(dim >= 2);
        let mut w = vec![0i64; dim];
        w[1] = 1;
        let mut u = vec![0i64; dim];
        u[0] = 1;
        MutationDatum { w, u, sign }
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }

    pub fn opposite(&self) -> MutationDatum {
        MutationDatum {
            w: self.w.clone(),
            u: self.u.clone(),
            sign: self.sign.opposite(),
        }
    }

    pub fn validate(&self) -> Result<(), LaurentError> {
        if self.w.len() != self.u.len() {
            return Err(LaurentError::DimensionMismatch {
                left: self.w.len(),
                right: self.u.len(),
            });
        }
        if !mat::is_primitive(&self.w) {
            return Err(LaurentError::InvalidDatum(format!(
                "grading vector {:?} is not primitive",
                self.w
            )));
        }
        if !mat::is_primitive(&self.u) {
            return Err(LaurentError::InvalidDatum(format!(
                "factor exponent {:?} is not primitive",
                self.u
            )));
        }
        if mat::dot(&self.w, &self.u) != 0 {
            return Err(LaurentError::InvalidDatum(format!(
                "grading {:?} and factor {:?} are not orthogonal",
                self.w, self.u
            )));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// The polynomial type.
// ---------------------------------------------------------------------------

/// Sparse Laurent polynomial in `dim` variables with `BigInt` coefficients.
/// No zero coefficient is ever stored.
#[derive(Clone, PartialEq, Eq)]
pub struct LaurentPoly {
    dim: usize,
    terms: BTreeMap<Vec<i64>, BigInt>,
}

impl LaurentPoly {
    pub fn zero(dim: usize) -> LaurentPoly {
        LaurentPoly {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: impl Into<BigInt>) -> LaurentPoly {
        let mut p = LaurentPoly::zero(dim);
        p.add_term(vec![0; dim], c.into());
        p
    }

    pub fn monomial(exp: Vec<i64>, c: impl Into<BigInt>) -> LaurentPoly {
        let dim = exp.len();
        let mut p = LaurentPoly::zero(dim);
        p.add_term(exp, c.into());
        p
    }

    /// Build from `(exponent, coefficient)` pairs, merging duplicates.
    pub fn from_terms<I, C>(dim: usize, terms: I) -> Result<LaurentPoly, LaurentError>
    where
        I: IntoIterator<Item = (Vec<i64>, C)>,
        C: Into<BigInt>,
    {
        let mut p = LaurentPoly::zero(dim);
        for (exp, c) in terms {
            if exp.len() != dim {
                return Err(LaurentError::DimensionMismatch {
                    left: dim,
                    right: exp.len(),
                });
            }
            p.add_term(exp, c.into());
        }
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i64>, &BigInt)> {
        self.terms.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &Vec<i64>> {
        self.terms.keys()
    }

    pub fn coeff(&self, exp: &[i64]) -> BigInt {
        self.terms.get(exp).cloned().unwrap_or_else(BigInt::zero)
    }

    fn add_term(&mut self, exp: Vec<i64>, c: BigInt) {
        debug_assert_eq!(exp.len(), self.dim);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exp) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    fn check_dim(&self, other: &LaurentPoly) -> Result<(), LaurentError> {
        if self.dim != other.dim {
            Err(LaurentError::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            })
        } else {
            Ok(())
        }
    }

    pub fn add(&self, other: &LaurentPoly) -> Result<LaurentPoly, LaurentError> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (exp, c) in &other.terms {
            out.add_term(exp.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> LaurentPoly {
        LaurentPoly {
            dim: self.dim,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &LaurentPoly) -> Result<LaurentPoly, LaurentError> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &LaurentPoly) -> Result<LaurentPoly, LaurentError> {
        self.check_dim(other)?;
        let mut out = LaurentPoly::zero(self.dim);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                out.add_term(mat::add_vec(e1, e2), c1 * c2);
            }
        }
        Ok(out)
    }

    /// Multiply by the single term `c * x^exp`.
    pub fn mul_monomial(&self, exp: &[i64], c: impl Into<BigInt>) -> Result<LaurentPoly, LaurentError> {
        if exp.len() != self.dim {
            return Err(LaurentError::DimensionMismatch {
                left: self.dim,
                right: exp.len(),
            });
        }
        let c = c.into();
        let mut out = LaurentPoly::zero(self.dim);
        for (e, k) in &self.terms {
            out.add_term(mat::add_vec(e, exp), k * &c);
        }
        Ok(out)
    }

    /// Replace every exponent `v` by `M v`. Bijective on terms, so the term
    /// count is preserved.
    pub fn apply_unimodular(&self, m: &UnimodularMap) -> Result<LaurentPoly, LaurentError> {
        if m.dim() != self.dim {
            return Err(LaurentError::DimensionMismatch {
                left: self.dim,
                right: m.dim(),
            });
        }
        let mut out = LaurentPoly::zero(self.dim);
        for (e, c) in &self.terms {
            out.add_term(m.apply(e), c.clone());
        }
        debug_assert_eq!(out.num_terms(), self.num_terms());
        Ok(out)
    }

    /// Split into graded pieces along `<w, exponent> = i`. The pieces keep
    /// their full exponents, so summing them reassembles `self`; keys are
    /// exactly the occupied degrees.
    pub fn grade(&self, w: &[i64]) -> Result<BTreeMap<i64, LaurentPoly>, LaurentError> {
        if w.len() != self.dim {
            return Err(LaurentError::DimensionMismatch {
                left: self.dim,
                right: w.len(),
            });
        }
        if mat::is_zero_vec(w) {
            return Err(LaurentError::ZeroGrading);
        }
        let mut pieces: BTreeMap<i64, LaurentPoly> = BTreeMap::new();
        for (e, c) in &self.terms {
            let level = mat::dot(w, e);
            pieces
                .entry(level)
                .or_insert_with(|| LaurentPoly::zero(self.dim))
                .add_term(e.clone(), c.clone());
        }
        Ok(pieces)
    }

    /// `(1 + x^u)^k` expanded as a binomial row.
    pub fn binomial_factor(dim: usize, u: &[i64], k: u32) -> LaurentPoly {
        let mut p = LaurentPoly::zero(dim);
        let mut coef = BigInt::one();
        for j in 0..=k {
            p.add_term(mat::scale_vec(u, j as i64), coef.clone());
            if j < k {
                coef = coef * (k - j) / (j + 1);
            }
        }
        p
    }

    /// Exact division by `(1 + x^u)`, treating `self` as univariate along the
    /// lattice direction `u`. Errors with the remainder when not divisible.
    fn divide_by_factor(&self, u: &[i64]) -> Result<LaurentPoly, LaurentPoly> {
        // Partition terms into translation classes `rep + k*u` using a
        // functional lambda with <lambda, u> = 1.
        let lambda = mat::bezout_functional(u).expect("factor exponent is primitive");
        let mut classes: BTreeMap<Vec<i64>, BTreeMap<i64, BigInt>> = BTreeMap::new();
        for (e, c) in &self.terms {
            let k = mat::dot(&lambda, e);
            let rep = mat::sub_vec(e, &mat::scale_vec(u, k));
            classes.entry(rep).or_default().insert(k, c.clone());
        }
        let mut quotient = LaurentPoly::zero(self.dim);
        let mut remainder = LaurentPoly::zero(self.dim);
        for (rep, coeffs) in classes {
            let lo = *coeffs.keys().next().expect("class is nonempty");
            let hi = *coeffs.keys().next_back().expect("class is nonempty");
            // Divide sum c_k T^k by (1 + T): q_lo = c_lo, q_k = c_k - q_{k-1};
            // the leading carry must vanish.
            let mut carry = BigInt::zero();
            for k in lo..=hi {
                let c = coeffs.get(&k).cloned().unwrap_or_else(BigInt::zero);
                let q = c - &carry;
                if k == hi {
                    carry = q;
                } else {
                    quotient.add_term(
                        mat::add_vec(&rep, &mat::scale_vec(u, k)),
                        q.clone(),
                    );
                    carry = q;
                }
            }
            if !carry.is_zero() {
                remainder.add_term(mat::add_vec(&rep, &mat::scale_vec(u, hi)), carry);
            }
        }
        if remainder.is_zero() {
            Ok(quotient)
        } else {
            Err(remainder)
        }
    }

    /// Algebraic mutation: `sum_i (1 + x^u)^(±i) f_i` over the graded pieces
    /// `f_i` of `self` along `w`. Mutating the result with the opposite sign
    /// restores `self` exactly.
    pub fn mutate(&self, d: &MutationDatum) -> Result<LaurentPoly, LaurentError> {
        d.validate()?;
        if d.dim() != self.dim {
            return Err(LaurentError::DimensionMismatch {
                left: self.dim,
                right: d.dim(),
            });
        }
        let pieces = self.grade(&d.w)?;
        let mut out = LaurentPoly::zero(self.dim);
        for (level, piece) in pieces {
            // With sign Neg the exponent of the factor is -level; with Pos
            // it is +level. Negative exponents mean exact division.
            let power = match d.sign {
                MutationSign::Neg => -level,
                MutationSign::Pos => level,
            };
            let transformed = if power >= 0 {
                let factor =
                    LaurentPoly::binomial_factor(self.dim, &d.u, u32::try_from(power).unwrap());
                piece.mul(&factor)?
            } else {
                let mut q = piece;
                for _ in 0..(-power) {
                    q = q.divide_by_factor(&d.u).map_err(|remainder| {
                        LaurentError::NotMutable {
                            degree: level,
                            remainder,
                        }
                    })?;
                }
                q
            };
            out = out.add(&transformed)?;
        }
        Ok(out)
    }

    /// Substitute `1` for the listed variables (0-based indices), returning
    /// an exact polynomial in the remaining ones.
    pub fn specialize_units(&self, vars: &[usize]) -> Result<LaurentPoly, LaurentError> {
        let mut drop = vec![false; self.dim];
        for &v in vars {
            if v >= self.dim {
                return Err(LaurentError::BadVariableSet(format!(
                    "index {v} out of range for dimension {}",
                    self.dim
                )));
            }
            if drop[v] {
                return Err(LaurentError::BadVariableSet(format!("duplicate index {v}")));
            }
            drop[v] = true;
        }
        let new_dim = self.dim - vars.len();
        let mut out = LaurentPoly::zero(new_dim);
        for (e, c) in &self.terms {
            let reduced: Vec<i64> = e
                .iter()
                .zip(&drop)
                .filter(|(_, &d)| !d)
                .map(|(&x, _)| x)
                .collect();
            out.add_term(reduced, c.clone());
        }
        Ok(out)
    }

    /// Coefficients at the lattice points `p, p + s, ..., q` where
    /// `s = (q - p) / gcd(q - p)`; zero entries are reported as `0`.
    /// For `p == q` this is the single coefficient at `p`.
    pub fn coefficients_along_segment(
        &self,
        p: &[i64],
        q: &[i64],
    ) -> Result<Vec<BigInt>, LaurentError> {
        if p.len() != self.dim || q.len() != self.dim {
            return Err(LaurentError::DimensionMismatch {
                left: self.dim,
                right: p.len().max(q.len()),
            });
        }
        let diff = mat::sub_vec(q, p);
        let g = mat::gcd_slice(&diff);
        if g == 0 {
            return Ok(vec![self.coeff(p)]);
        }
        let step: Vec<i64> = diff.iter().map(|&x| x / g).collect();
        let mut out = Vec::with_capacity((g + 1) as usize);
        let mut point = p.to_vec();
        for k in 0..=g {
            out.push(self.coeff(&point));
            if k < g {
                point = mat::add_vec(&point, &step);
            }
        }
        Ok(out)
    }

    /// Render with the given variable names.
    pub fn to_string_with(&self, names: &[String]) -> String {
        assert_eq!(names.len(), self.dim);
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (e, c)) in self.terms.iter().enumerate() {
            let mut factors = Vec::new();
            for (j, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => factors.push(names[j].clone()),
                    _ => factors.push(format!("{}^{}", names[j], k)),
                }
            }
            let body = factors.join("*");
            if i == 0 {
                if c.is_negative() {
                    out.push_str("-");
                }
            } else if c.is_negative() {
                out.push_str(" - ");
            } else {
                out.push_str(" + ");
            }
            let mag = c.magnitude();
            if body.is_empty() {
                out.push_str(&mag.to_string());
            } else if mag.is_one() {
                out.push_str(&body);
            } else {
                out.push_str(&format!("{mag}*{body}"));
            }
        }
        out
    }

    /// Default variable names `x1 ... xn`.
    pub fn default_names(dim: usize) -> Vec<String> {
        (1..=dim).map(|i| format!("x{i}")).collect()
    }

    /// Variable names `x, y, z1 ... z{n-2}` used for disk potentials.
    pub fn potential_names(dim: usize) -> Vec<String> {
        assert!(dim >= 2);
        let mut names = vec!["x".to_string(), "y".to_string()];
        for i in 1..=dim - 2 {
            names.push(format!("z{i}"));
        }
        names
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_string_with(&LaurentPoly::default_names(self.dim)))
    }
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    exp: Vec<i64>,
    coef: String,
}

impl Serialize for LaurentPoly {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let terms: Vec<TermRepr> = self
            .terms
            .iter()
            .map(|(e, c)| TermRepr {
                exp: e.clone(),
                coef: c.to_string(),
            })
            .collect();
        let mut s = serializer.serialize_struct("LaurentPoly", 2)?;
        s.serialize_field("dim", &self.dim)?;
        s.serialize_field("terms", &terms)?;
        s.end()
    }
}

impl<'de> Deserialize<'de> for LaurentPoly {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            dim: usize,
            terms: Vec<TermRepr>,
        }
        let repr = Repr::deserialize(deserializer)?;
        let mut terms = Vec::with_capacity(repr.terms.len());
        for t in repr.terms {
            let coef = BigInt::from_str(&t.coef).map_err(D::Error::custom)?;
            terms.push((t.exp, coef));
        }
        LaurentPoly::from_terms(repr.dim, terms).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn poly(dim: usize, terms: &[(&[i64], i64)]) -> LaurentPoly {
        LaurentPoly::from_terms(dim, terms.iter().map(|(e, c)| (e.to_vec(), *c))).unwrap()
    }

    #[test]
    fn ring_operations() {
        // add(x + y, -x) = y
        let f = poly(2, &[(&[1, 0], 1), (&[0, 1], 1)]);
        let g = poly(2, &[(&[1, 0], -1)]);
        assert_eq!(f.add(&g).unwrap(), poly(2, &[(&[0, 1], 1)]));

        // (1 + x)^2 = 1 + 2x + x^2
        let h = poly(2, &[(&[0, 0], 1), (&[1, 0], 1)]);
        assert_eq!(
            h.mul(&h).unwrap(),
            poly(2, &[(&[0, 0], 1), (&[1, 0], 2), (&[2, 0], 1)])
        );

        // (x + y) * x^{-1} = 1 + y/x
        let f = poly(2, &[(&[1, 0], 1), (&[0, 1], 1)]);
        assert_eq!(
            f.mul_monomial(&[-1, 0], 1).unwrap(),
            poly(2, &[(&[0, 0], 1), (&[-1, 1], 1)])
        );

        // Cancellation drops terms entirely.
        let f = poly(1, &[(&[0], 1), (&[1], 1)]);
        let g = poly(1, &[(&[0], 1), (&[1], -1)]);
        assert_eq!(f.mul(&g).unwrap(), poly(1, &[(&[0], 1), (&[2], -1)]));

        assert!(f.add(&poly(2, &[(&[0, 0], 1)])).is_err());
    }

    #[test]
    fn unimodular_change_of_variables() {
        // x + y + 1/(xy) under [[1,0],[1,1]] becomes xy + y + x^{-1}y^{-2}.
        let f = poly(2, &[(&[1, 0], 1), (&[0, 1], 1), (&[-1, -1], 1)]);
        let m = UnimodularMap::new(vec![vec![1, 0], vec![1, 1]]).unwrap();
        let g = f.apply_unimodular(&m).unwrap();
        assert_eq!(g, poly(2, &[(&[1, 1], 1), (&[0, 1], 1), (&[-1, -2], 1)]));
        assert_eq!(g.apply_unimodular(&m.inverse()).unwrap(), f);

        let id = UnimodularMap::identity(2);
        assert_eq!(f.apply_unimodular(&id).unwrap(), f);

        assert!(matches!(
            UnimodularMap::new(vec![vec![2, 0], vec![0, 1]]),
            Err(LaurentError::NotUnimodular { .. })
        ));
    }

    #[test]
    fn grading_decomposition() {
        let f = poly(2, &[(&[1, 1], 1), (&[0, 1], 1), (&[-1, -2], 1)]);
        let pieces = f.grade(&[0, 1]).unwrap();
        assert_eq!(
            pieces.keys().copied().collect::<Vec<_>>(),
            vec![-2, 1],
            "keys are exactly the occupied degrees"
        );
        assert_eq!(pieces[&1], poly(2, &[(&[1, 1], 1), (&[0, 1], 1)]));
        assert_eq!(pieces[&-2], poly(2, &[(&[-1, -2], 1)]));
        let mut sum = LaurentPoly::zero(2);
        for p in pieces.values() {
            sum = sum.add(p).unwrap();
        }
        assert_eq!(sum, f, "pieces reassemble the polynomial");

        // A monomial occupies a single degree.
        let m = poly(2, &[(&[3, -2], 7)]);
        assert_eq!(m.grade(&[1, 1]).unwrap().len(), 1);

        assert!(matches!(f.grade(&[0, 0]), Err(LaurentError::ZeroGrading)));
    }

    #[test]
    fn mutation_reproduces_the_chekanov_potential() {
        // Clifford in the mutable basis: xy + y + x^{-1}y^{-2}.
        let f = poly(2, &[(&[1, 1], 1), (&[0, 1], 1), (&[-1, -2], 1)]);
        let d = MutationDatum::new(vec![0, 1], vec![1, 0], MutationSign::Neg).unwrap();
        let g = f.mutate(&d).unwrap();
        // y + (1 + x)^2 / (x y^2)
        let chekanov = poly(
            2,
            &[(&[0, 1], 1), (&[-1, -2], 1), (&[0, -2], 2), (&[1, -2], 1)],
        );
        assert_eq!(g, chekanov);
        // Opposite sign restores the input exactly.
        assert_eq!(g.mutate(&d.opposite()).unwrap(), f);
    }

    #[test]
    fn mutation_of_level_zero_content_is_identity() {
        let f = poly(2, &[(&[2, 0], 5), (&[-3, 0], 1)]);
        let d = MutationDatum::new(vec![0, 1], vec![1, 0], MutationSign::Neg).unwrap();
        assert_eq!(f.mutate(&d).unwrap(), f);
    }

    #[test]
    fn standard_basis_clifford_is_not_mutable() {
        let f = poly(2, &[(&[1, 0], 1), (&[0, 1], 1), (&[-1, -1], 1)]);
        let d = MutationDatum::new(vec![0, 1], vec![1, 0], MutationSign::Neg).unwrap();
        match f.mutate(&d) {
            Err(LaurentError::NotMutable { degree, remainder }) => {
                assert_eq!(degree, 1);
                assert!(!remainder.is_zero());
            }
            other => panic!("expected NotMutable, got {other:?}"),
        }
    }

    #[test]
    fn specialization_examples() {
        // Chekanov at n=3 with z set to 1: y + (1+x)^2/(xy^2) + 1.
        let chek3 = poly(
            3,
            &[
                (&[0, 1, 0], 1),
                (&[0, 0, 1], 1),
                (&[-1, -2, -1], 1),
                (&[0, -2, -1], 2),
                (&[1, -2, -1], 1),
            ],
        );
        let projected = chek3.specialize_units(&[2]).unwrap();
        let expected = poly(
            2,
            &[
                (&[0, 1], 1),
                (&[0, 0], 1),
                (&[-1, -2], 1),
                (&[0, -2], 2),
                (&[1, -2], 1),
            ],
        );
        assert_eq!(projected, expected);
        assert!(projected.num_terms() <= chek3.num_terms());

        // Variables that do not occur just reduce the dimension.
        let f = poly(3, &[(&[1, 2, 0], 4)]);
        assert_eq!(f.specialize_units(&[2]).unwrap(), poly(2, &[(&[1, 2], 4)]));

        assert!(f.specialize_units(&[3]).is_err());
        assert!(f.specialize_units(&[1, 1]).is_err());
    }

    #[test]
    fn segment_coefficients() {
        let chekanov = poly(
            2,
            &[(&[0, 1], 1), (&[-1, -2], 1), (&[0, -2], 2), (&[1, -2], 1)],
        );
        let row = chekanov
            .coefficients_along_segment(&[-1, -2], &[1, -2])
            .unwrap();
        assert_eq!(row, vec![BigInt::from(1), BigInt::from(2), BigInt::from(1)]);

        // Clifford edge without interior lattice points.
        let clifford = poly(2, &[(&[1, 0], 1), (&[0, 1], 1), (&[-1, -1], 1)]);
        let row = clifford.coefficients_along_segment(&[1, 0], &[0, 1]).unwrap();
        assert_eq!(row, vec![BigInt::from(1), BigInt::from(1)]);

        // Degenerate segment: single coefficient.
        let row = clifford.coefficients_along_segment(&[1, 0], &[1, 0]).unwrap();
        assert_eq!(row, vec![BigInt::from(1)]);

        // Zeros are reported along gaps.
        let gap = poly(1, &[(&[0], 1), (&[2], 1)]);
        assert_eq!(
            gap.coefficients_along_segment(&[0], &[2]).unwrap(),
            vec![BigInt::from(1), BigInt::zero(), BigInt::from(1)]
        );
    }

    #[test]
    fn serialization_is_lexicographic_and_round_trips() {
        let f = poly(2, &[(&[0, 1], 1), (&[-1, -2], 1), (&[1, -2], -3)]);
        let json = serde_json::to_string(&f).unwrap();
        assert_eq!(
            json,
            r#"{"dim":2,"terms":[{"exp":[-1,-2],"coef":"1"},{"exp":[0,1],"coef":"1"},{"exp":[1,-2],"coef":"-3"}]}"#
        );
        let back: LaurentPoly = serde_json::from_str(&json).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn display_uses_variable_names() {
        let f = poly(2, &[(&[0, 1], 1), (&[-1, -2], 2), (&[1, 0], -1)]);
        assert_eq!(f.to_string(), "2*x1^-1*x2^-2 + x2 - x1");
        assert_eq!(
            f.to_string_with(&LaurentPoly::potential_names(2)),
            "2*x^-1*y^-2 + y - x"
        );
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(256))]

        /// mutate with sign Neg then Pos is the identity on its domain.
        #[test]
        fn mutation_involution(seed_terms in proptest::collection::vec(
            (proptest::collection::vec(-3i64..4, 2), -4i64..5),
            1..6,
        )) {
            // Build a mutable polynomial by construction: terms at level l
            // carry a factor (1 + x)^max(l, 0).
            let mut f = LaurentPoly::zero(2);
            for (e, c) in &seed_terms {
                let level = e[1];
                let base = LaurentPoly::monomial(e.clone(), *c);
                let factor = LaurentPoly::binomial_factor(2, &[1, 0], level.max(0) as u32);
                f = f.add(&base.mul(&factor).unwrap()).unwrap();
            }
            let d = MutationDatum::new(vec![0, 1], vec![1, 0], MutationSign::Neg).unwrap();
            if !f.is_zero() {
                let g = f.mutate(&d).unwrap();
                proptest::prop_assert_eq!(g.mutate(&d.opposite()).unwrap(), f);
            }
        }

        /// Grading degrees add under multiplication.
        #[test]
        fn grade_respects_products(
            terms1 in proptest::collection::vec((proptest::collection::vec(-3i64..4, 3), -3i64..4), 1..5),
            terms2 in proptest::collection::vec((proptest::collection::vec(-3i64..4, 3), -3i64..4), 1..5),
            w in proptest::collection::vec(-2i64..3, 3),
        ) {
            proptest::prop_assume!(w.iter().any(|&x| x != 0));
            let f = LaurentPoly::from_terms(3, terms1).unwrap();
            let g = LaurentPoly::from_terms(3, terms2).unwrap();
            let product = f.mul(&g).unwrap();
            let by_pieces = {
                let mut acc = LaurentPoly::zero(3);
                if !f.is_zero() && !g.is_zero() {
                    for (_, fi) in f.grade(&w).unwrap() {
                        for (_, gj) in g.grade(&w).unwrap() {
                            acc = acc.add(&fi.mul(&gj).unwrap()).unwrap();
                        }
                    }
                }
                acc
            };
            proptest::prop_assert_eq!(product, by_pieces);

            // And the grading of a product is supported on sums of degrees.
            if !f.is_zero() && !g.is_zero() {
                let fg = f.mul(&g).unwrap();
                if !fg.is_zero() {
                    let degrees: std::collections::BTreeSet<i64> =
                        fg.grade(&w).unwrap().keys().copied().collect();
                    let sums: std::collections::BTreeSet<i64> = f
                        .grade(&w).unwrap().keys()
                        .flat_map(|i| g.grade(&w).unwrap().keys().map(|j| i + j).collect::<Vec<_>>())
                        .collect();
                    proptest::prop_assert!(degrees.is_subset(&sums));
                }
            }
        }
    }
}
