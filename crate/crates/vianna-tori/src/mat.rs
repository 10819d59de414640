//! Exact integer linear algebra on the exponent lattice.
//!
//! Dimensions are tiny (ambient n <= 6 or so), so the algorithms favour
//! clarity over asymptotics. Vectors carry `i64` entries; every computation
//! that can grow (determinants, minors, Hermite reductions) runs through
//! `BigInt` and converts back with an explicit range check.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

pub fn gcd_slice(v: &[i64]) -> i64 {
    v.iter().fold(0i64, |g, &x| g.gcd(&x))
}

pub fn is_primitive(v: &[i64]) -> bool {
    gcd_slice(v) == 1
}

pub fn is_zero_vec(v: &[i64]) -> bool {
    v.iter().all(|&x| x == 0)
}

/// Divide by the gcd and orient so the first nonzero entry is positive.
/// Returns `None` for the zero vector.
pub fn primitive_canonical(v: &[i64]) -> Option<Vec<i64>> {
    let g = gcd_slice(v);
    if g == 0 {
        return None;
    }
    let mut out: Vec<i64> = v.iter().map(|&x| x / g).collect();
    if let Some(&first) = out.iter().find(|&&x| x != 0) {
        if first < 0 {
            for x in &mut out {
                *x = -*x;
            }
        }
    }
    Some(out)
}

/// Exact dot product; panics on (out-of-domain) overflow.
pub fn dot(a: &[i64], b: &[i64]) -> i64 {
    debug_assert_eq!(a.len(), b.len());
    let acc: i128 = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| (x as i128) * (y as i128))
        .sum();
    i64::try_from(acc).expect("integer overflow in lattice dot product")
}

pub fn big_dot(a: &[BigInt], b: &[i64]) -> BigInt {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, &y)| x * BigInt::from(y)).sum()
}

pub fn sub_vec(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| x.checked_sub(y).expect("integer overflow in vector subtraction"))
        .collect()
}

pub fn add_vec(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| x.checked_add(y).expect("integer overflow in vector addition"))
        .collect()
}

pub fn scale_vec(a: &[i64], c: i64) -> Vec<i64> {
    a.iter()
        .map(|&x| x.checked_mul(c).expect("integer overflow in vector scaling"))
        .collect()
}

/// Extended gcd: returns `(g, x, y)` with `a*x + b*y = g` and `g >= 0`.
pub fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        if a < 0 {
            (-a, -1, 0)
        } else {
            (a, 1, 0)
        }
    } else {
        let r = a.rem_euclid(b);
        let q = (a - r) / b;
        let (g, x, y) = ext_gcd(b, r);
        (g, y, x - q * y)
    }
}

/// Solve `a*x + b*y = c` over the integers with a fixed gauge: when `a != 0`
/// the solution with `y` in `[0, |a/g|)` is returned, otherwise the one with
/// `x` in `[0, |b/g|)`. Returns `None` when `gcd(a, b)` does not divide `c`.
pub fn solve_pair(a: i64, b: i64, c: i64) -> Option<(i64, i64)> {
    let (g, x0, y0) = ext_gcd(a, b);
    if g == 0 {
        return if c == 0 { Some((0, 0)) } else { None };
    }
    if c % g != 0 {
        return None;
    }
    let k = c / g;
    let mut x = x0.checked_mul(k).expect("overflow in solve_pair");
    let mut y = y0.checked_mul(k).expect("overflow in solve_pair");
    // General solution: (x + t*b/g, y - t*a/g).
    if a != 0 {
        let step = (a / g).abs();
        let r = y.rem_euclid(step);
        let t = (y - r) / step; // y - t*step = r
        y = r;
        x += t * (b / g) * (a / g).signum();
    } else {
        let step = (b / g).abs();
        let r = x.rem_euclid(step);
        let t = (x - r) / step;
        x = r;
        y += t * (a / g) * (b / g).signum();
    }
    debug_assert_eq!(a as i128 * x as i128 + b as i128 * y as i128, c as i128);
    Some((x, y))
}

/// Functional `lambda` with `<lambda, u> = 1`; exists iff `u` is primitive.
pub fn bezout_functional(u: &[i64]) -> Option<Vec<i64>> {
    let mut lambda = vec![0i64; u.len()];
    let mut g = 0i64;
    for (i, &ui) in u.iter().enumerate() {
        let (g2, x, y) = ext_gcd(g, ui);
        for l in lambda.iter_mut() {
            *l = l.checked_mul(x).expect("overflow in bezout functional");
        }
        lambda[i] = y;
        g = g2;
    }
    if g == 1 {
        debug_assert_eq!(dot(&lambda, u), 1);
        Some(lambda)
    } else {
        None
    }
}

// ---------------------------------------------------------------------------
// Square integer matrices (exponent-lattice maps).
// ---------------------------------------------------------------------------

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SquareMat {
    n: usize,
    rows: Vec<Vec<i64>>,
}

impl SquareMat {
    pub fn new(rows: Vec<Vec<i64>>) -> Option<SquareMat> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return None;
        }
        Some(SquareMat { n, rows })
    }

    pub fn identity(n: usize) -> SquareMat {
        let rows = (0..n)
            .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
            .collect();
        SquareMat { n, rows }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[i64] {
        &self.rows[i]
    }

    pub fn apply(&self, v: &[i64]) -> Vec<i64> {
        assert_eq!(v.len(), self.n, "matrix/vector size mismatch");
        self.rows.iter().map(|r| dot(r, v)).collect()
    }

    pub fn mul(&self, other: &SquareMat) -> SquareMat {
        assert_eq!(self.n, other.n);
        let rows = (0..self.n)
            .map(|i| {
                (0..self.n)
                    .map(|j| {
                        let acc: i128 = (0..self.n)
                            .map(|k| self.rows[i][k] as i128 * other.rows[k][j] as i128)
                            .sum();
                        i64::try_from(acc).expect("integer overflow in matrix product")
                    })
                    .collect()
            })
            .collect();
        SquareMat { n: self.n, rows }
    }

    pub fn det(&self) -> BigInt {
        let big: Vec<Vec<BigInt>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        big_det(&big)
    }

    /// Inverse of a determinant-`±1` matrix; `None` otherwise.
    pub fn inverse_unimodular(&self) -> Option<SquareMat> {
        let d = self.det();
        if d.magnitude().to_u64() != Some(1) {
            return None;
        }
        let sign = if d.is_negative() { -1i64 } else { 1i64 };
        let n = self.n;
        let mut rows = vec![vec![0i64; n]; n];
        for i in 0..n {
            for j in 0..n {
                // Adjugate entry (i, j) = cofactor (j, i).
                let minor: Vec<Vec<BigInt>> = (0..n)
                    .filter(|&r| r != j)
                    .map(|r| {
                        (0..n)
                            .filter(|&c| c != i)
                            .map(|c| BigInt::from(self.rows[r][c]))
                            .collect()
                    })
                    .collect();
                let m = if n == 1 { BigInt::from(1) } else { big_det(&minor) };
                let s = if (i + j) % 2 == 0 { 1 } else { -1 };
                rows[i][j] = (m * BigInt::from(s) * BigInt::from(sign))
                    .to_i64()
                    .expect("unimodular inverse entry out of i64 range");
            }
        }
        Some(SquareMat { n, rows })
    }
}

// ---------------------------------------------------------------------------
// BigInt elimination kernels.
// ---------------------------------------------------------------------------

/// Fraction-free (Bareiss) determinant.
pub fn big_det(rows: &[Vec<BigInt>]) -> BigInt {
    let n = rows.len();
    if n == 0 {
        return BigInt::from(1);
    }
    let mut m: Vec<Vec<BigInt>> = rows.to_vec();
    let mut sign = BigInt::from(1);
    let mut prev = BigInt::from(1);
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = num / &prev;
            }
            m[i][k] = BigInt::zero();
        }
        prev = m[k][k].clone();
    }
    sign * m[n - 1][n - 1].clone()
}

/// Rank of an integer matrix given as rows.
pub fn rank(rows: &[Vec<i64>]) -> usize {
    let big: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    rank_big(&big)
}

pub fn rank_big(rows: &[Vec<BigInt>]) -> usize {
    let width = rows.first().map_or(0, |r| r.len());
    let mut h = rows.to_vec();
    hermite_reduce(&mut h, width, None);
    h.iter().filter(|r| r.iter().any(|x| !x.is_zero())).count()
}

/// Row-reduce `mat` (height x width) to echelon form by unimodular row
/// operations. When `transform` is supplied it receives the same row
/// operations, so `U * mat = H`; the transform is quadratic in the height,
/// so large inputs must pass `None`.
fn hermite_reduce(
    h: &mut Vec<Vec<BigInt>>,
    width: usize,
    mut transform: Option<&mut Vec<Vec<BigInt>>>,
) {
    let height = h.len();
    let mut pivot_row = 0;
    for col in 0..width {
        loop {
            // Smallest nonzero magnitude in this column at or below pivot_row.
            let mut best: Option<usize> = None;
            for r in pivot_row..height {
                if !h[r][col].is_zero()
                    && best.is_none_or(|b| h[r][col].magnitude() < h[b][col].magnitude())
                {
                    best = Some(r);
                }
            }
            let Some(b) = best else { break };
            h.swap(pivot_row, b);
            if let Some(u) = transform.as_deref_mut() {
                u.swap(pivot_row, b);
            }
            let mut cleared = true;
            for r in pivot_row + 1..height {
                if h[r][col].is_zero() {
                    continue;
                }
                let q = h[r][col].div_floor(&h[pivot_row][col]);
                if !q.is_zero() {
                    for c in 0..width {
                        let delta = &h[pivot_row][c] * &q;
                        h[r][c] -= delta;
                    }
                    if let Some(u) = transform.as_deref_mut() {
                        for c in 0..u[r].len() {
                            let delta = &u[pivot_row][c] * &q;
                            u[r][c] -= delta;
                        }
                    }
                }
                if !h[r][col].is_zero() {
                    cleared = false;
                }
            }
            if cleared {
                // Orient the pivot positive.
                if h[pivot_row][col].is_negative() {
                    for x in h[pivot_row].iter_mut() {
                        *x = -x.clone();
                    }
                    if let Some(u) = transform.as_deref_mut() {
                        for x in u[pivot_row].iter_mut() {
                            *x = -x.clone();
                        }
                    }
                }
                // Reduce entries above the pivot.
                let pivot = h[pivot_row][col].clone();
                for r in 0..pivot_row {
                    let q = h[r][col].div_floor(&pivot);
                    if !q.is_zero() {
                        for c in 0..width {
                            let delta = &h[pivot_row][c] * &q;
                            h[r][c] -= delta;
                        }
                        if let Some(u) = transform.as_deref_mut() {
                            for c in 0..u[r].len() {
                                let delta = &u[pivot_row][c] * &q;
                                u[r][c] -= delta;
                            }
                        }
                    }
                }
                pivot_row += 1;
                break;
            }
        }
        if pivot_row == height {
            break;
        }
    }
}

fn hermite_with_transform(
    mat: Vec<Vec<BigInt>>,
    width: usize,
) -> (Vec<Vec<BigInt>>, Vec<Vec<BigInt>>) {
    let height = mat.len();
    let mut h = mat;
    let mut u: Vec<Vec<BigInt>> = (0..height)
        .map(|i| {
            (0..height)
                .map(|j| if i == j { BigInt::from(1) } else { BigInt::zero() })
                .collect()
        })
        .collect();
    hermite_reduce(&mut h, width, Some(&mut u));
    (h, u)
}

fn to_i64_rows(rows: Vec<Vec<BigInt>>, context: &str) -> Vec<Vec<i64>> {
    rows.into_iter()
        .map(|r| {
            r.into_iter()
                .map(|x| x.to_i64().unwrap_or_else(|| panic!("{context}: entry out of i64 range")))
                .collect()
        })
        .collect()
}

/// Echelon Z-basis (Hermite form) of the span of `vecs` inside `Z^width`.
pub fn hnf_span(vecs: &[Vec<i64>], width: usize) -> Vec<Vec<i64>> {
    let mut h: Vec<Vec<BigInt>> = vecs
        .iter()
        .map(|v| {
            assert_eq!(v.len(), width);
            v.iter().map(|&x| BigInt::from(x)).collect()
        })
        .collect();
    hermite_reduce(&mut h, width, None);
    let nonzero: Vec<Vec<BigInt>> = h
        .into_iter()
        .filter(|r| r.iter().any(|x| !x.is_zero()))
        .collect();
    to_i64_rows(nonzero, "Hermite basis")
}

/// Coordinates of `v` in an echelon (Hermite) basis, or `None` if `v` is not
/// in the Z-span.
pub fn solve_in_span(basis: &[Vec<i64>], v: &[i64]) -> Option<Vec<i64>> {
    let width = v.len();
    let mut rem: Vec<BigInt> = v.iter().map(|&x| BigInt::from(x)).collect();
    let mut coords = vec![0i64; basis.len()];
    for (i, b) in basis.iter().enumerate() {
        let pc = b.iter().position(|&x| x != 0)?;
        let pivot = BigInt::from(b[pc]);
        if (&rem[pc] % &pivot).is_zero() {
            let q = &rem[pc] / &pivot;
            coords[i] = q.to_i64()?;
            for c in 0..width {
                let delta = &q * BigInt::from(b[c]);
                rem[c] -= delta;
            }
        }
    }
    if rem.iter().all(|x| x.is_zero()) {
        Some(coords)
    } else {
        None
    }
}

/// Basis of the integer kernel `{x in Z^width : rows * x = 0}`. Kernels are
/// saturated by construction.
pub fn kernel_basis(rows: &[Vec<i64>], width: usize) -> Vec<Vec<i64>> {
    // Reduce the transpose with a transformation record: U * A^T = H; rows of
    // U matching zero rows of H generate the kernel of A.
    let transpose: Vec<Vec<BigInt>> = (0..width)
        .map(|c| rows.iter().map(|r| BigInt::from(r[c])).collect())
        .collect();
    let (h, u) = hermite_with_transform(transpose, rows.len());
    let kernel: Vec<Vec<BigInt>> = h
        .iter()
        .zip(u)
        .filter(|(hr, _)| hr.iter().all(|x| x.is_zero()))
        .map(|(_, ur)| ur)
        .collect();
    to_i64_rows(kernel, "kernel basis")
}

/// Saturation of the Z-span of `vecs` inside `Z^width`: the lattice of all
/// integer points in the rational span, as an echelon basis.
pub fn saturate_span(vecs: &[Vec<i64>], width: usize) -> Vec<Vec<i64>> {
    let orth = kernel_basis(vecs, width);
    hnf_span(&kernel_basis(&orth, width), width)
}

/// Signed maximal minors of a `(d-1) x d` integer matrix: a vector orthogonal
/// to every row, spanning the kernel when the rows have full rank, reduced to
/// primitive form. Returns `None` when all minors vanish.
pub fn generalized_cross(rows: &[Vec<i64>]) -> Option<Vec<i64>> {
    let d = rows.first().map_or(1, |r| r.len());
    assert!(d >= 1 && rows.len() + 1 == d, "need d-1 rows of length d");
    let mut out = Vec::with_capacity(d);
    for j in 0..d {
        let minor: Vec<Vec<BigInt>> = rows
            .iter()
            .map(|r| {
                (0..d)
                    .filter(|&c| c != j)
                    .map(|c| BigInt::from(r[c]))
                    .collect()
            })
            .collect();
        let m = if d == 1 { BigInt::from(1) } else { big_det(&minor) };
        let s = if j % 2 == 0 { m } else { -m };
        out.push(s);
    }
    if out.iter().all(|x| x.is_zero()) {
        return None;
    }
    let g = out.iter().fold(BigInt::zero(), |acc, x| acc.gcd(&x.abs()));
    Some(
        out.into_iter()
            .map(|x| (x / &g).to_i64().expect("cross-product entry out of i64 range"))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ext_gcd_small_cases() {
        for (a, b) in [(12, 18), (-4, 6), (0, 5), (7, 0), (1, -1), (-3, -9)] {
            let (g, x, y) = ext_gcd(a, b);
            assert!(g >= 0);
            assert_eq!(a * x + b * y, g);
            assert_eq!(g, (a as i64).gcd(&b));
        }
    }

    #[test]
    fn solve_pair_gauge() {
        // Gauge: second coordinate reduced modulo |a/g| when a != 0.
        assert_eq!(solve_pair(1, -1, 1), Some((1, 0)));
        assert_eq!(solve_pair(1, -3, 1), Some((1, 0)));
        assert_eq!(solve_pair(2, 4, 1), None);
        assert_eq!(solve_pair(0, 3, 6), Some((2, 0)).map(|(x, y)| (y, x)));
        let (x, y) = solve_pair(2, 3, 1).unwrap();
        assert_eq!(2 * x + 3 * y, 1);
        assert!((0..2).contains(&y));
    }

    #[test]
    fn bezout_functional_hits_one() {
        let u = vec![2, 1, 1];
        let l = bezout_functional(&u).unwrap();
        assert_eq!(dot(&l, &u), 1);
        assert!(bezout_functional(&[2, 4]).is_none());
    }

    #[test]
    fn determinant_and_inverse() {
        let m = SquareMat::new(vec![vec![1, 0, 0], vec![3, 1, 0], vec![1, 0, 1]]).unwrap();
        assert_eq!(m.det(), BigInt::from(1));
        let inv = m.inverse_unimodular().unwrap();
        assert_eq!(m.mul(&inv), SquareMat::identity(3));
        assert_eq!(inv.mul(&m), SquareMat::identity(3));

        let sing = SquareMat::new(vec![vec![2, 0], vec![0, 1]]).unwrap();
        assert_eq!(sing.det(), BigInt::from(2));
        assert!(sing.inverse_unimodular().is_none());
    }

    #[test]
    fn hermite_span_and_solve() {
        let basis = hnf_span(&[vec![2, 0, 1], vec![0, 3, 1], vec![2, 3, 2]], 3);
        assert_eq!(basis.len(), 2);
        let v = vec![4, 3, 3]; // 2*(2,0,1) + (0,3,1)
        let coords = solve_in_span(&basis, &v).unwrap();
        let rebuilt: Vec<i64> = (0..3)
            .map(|c| basis.iter().zip(&coords).map(|(b, &k)| b[c] * k).sum())
            .collect();
        assert_eq!(rebuilt, v);
        assert!(solve_in_span(&basis, &[1, 0, 0]).is_none());
    }

    #[test]
    fn kernel_and_saturation() {
        let k = kernel_basis(&[vec![1, -3, 0], vec![0, 0, 1]], 3);
        assert_eq!(k.len(), 1);
        assert_eq!(primitive_canonical(&k[0]).unwrap(), vec![3, 1, 0]);

        // Span of (2,0),(0,2) saturates to all of Z^2.
        let sat = saturate_span(&[vec![2, 0], vec![0, 2]], 2);
        assert_eq!(sat.len(), 2);
        assert!(solve_in_span(&sat, &[1, 0]).is_some());
        assert!(solve_in_span(&sat, &[0, 1]).is_some());

        // Saturation of a 2-plane in Z^3 that the raw span misses.
        let sat = saturate_span(&[vec![2, 0, 0], vec![-1, -6, -2]], 3);
        assert!(solve_in_span(&sat, &[0, -3, -1]).is_some());
        assert!(solve_in_span(&sat, &[1, 0, 0]).is_some());
        assert!(solve_in_span(&sat, &[0, 1, 0]).is_none());
    }

    #[test]
    fn generalized_cross_is_orthogonal() {
        let rows = vec![vec![1, -3, -1], vec![0, 0, 1]];
        let nu = generalized_cross(&rows).unwrap();
        for r in &rows {
            assert_eq!(dot(&nu, r), 0);
        }
        assert!(is_primitive(&nu));
    }
}
