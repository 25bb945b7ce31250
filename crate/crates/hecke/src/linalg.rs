//! Exact integer linear algebra at a fixed prime p.
//!
//! Everything here works on plain integer matrices.  That is enough for the
//! coset layers above: a left coset of matrices with |det| = p^m is determined
//! by its rows modulo p^m, so integer representatives lose nothing, and the
//! Hermite form over Z of such a matrix *is* its p-local Hermite form (the
//! diagonal entries multiply to p^m, hence each is a p-power).
//!
//! Conventions: the unimodular action is on the LEFT (row operations), the
//! Hermite form is upper triangular with positive p-power diagonal, and the
//! off-diagonal entries of column j are reduced into [0, p^{e_j}).

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;

use crate::{Error, Result};

/// Arbitrary-precision integer scalar used throughout the crate.
pub type PInt = BigInt;

/// Square integer matrix tied to a prime p.
///
/// The prime travels with the matrix because every canonical form and every
/// coset notion downstream is p-local; mixing primes is a bug and is asserted
/// against in the arithmetic operations.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct PMatrix {
    p: u64,
    n: usize,
    e: Vec<PInt>, // row-major, n*n entries
}

impl PMatrix {
    pub fn new(p: u64, n: usize, entries: Vec<PInt>) -> Self {
        assert_eq!(entries.len(), n * n, "entry count must be n^2");
        PMatrix { p, n, e: entries }
    }

    /// Convenience constructor from machine integers (tests, generators).
    pub fn from_i64(p: u64, n: usize, entries: &[i64]) -> Self {
        Self::new(p, n, entries.iter().map(|&x| PInt::from(x)).collect())
    }

    pub fn identity(p: u64, n: usize) -> Self {
        let mut e = vec![PInt::zero(); n * n];
        for i in 0..n {
            e[i * n + i] = PInt::one();
        }
        PMatrix { p, n, e }
    }

    pub fn diag(p: u64, d: &[PInt]) -> Self {
        let n = d.len();
        let mut m = Self::identity(p, n);
        for i in 0..n {
            m.e[i * n + i] = d[i].clone();
        }
        m
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn at(&self, i: usize, j: usize) -> &PInt {
        &self.e[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[PInt] {
        &self.e[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<PInt>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn entries(&self) -> &[PInt] {
        &self.e
    }

    /// Matrix product; both factors must share the prime and the dimension.
    pub fn mul(&self, rhs: &PMatrix) -> PMatrix {
        assert_eq!(self.p, rhs.p, "mixed primes");
        assert_eq!(self.n, rhs.n, "mixed dimensions");
        let n = self.n;
        let mut e = vec![PInt::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                let mut s = PInt::zero();
                for k in 0..n {
                    s += self.at(i, k) * rhs.at(k, j);
                }
                e[i * n + j] = s;
            }
        }
        PMatrix { p: self.p, n, e }
    }

    /// Exact determinant by Laplace expansion along the first row.
    /// Dimensions stay tiny here (r ≤ 3 in every system), so this is fine.
    pub fn det(&self) -> PInt {
        det_rows(&self.rows())
    }

    /// Row-vector times matrix, used for the Heisenberg translation part.
    pub fn row_apply(&self, v: &[PInt]) -> Vec<PInt> {
        assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|j| (0..self.n).map(|i| &v[i] * self.at(i, j)).sum())
            .collect()
    }

    /// Diagonal entries, the leading data of the canonical total order.
    pub fn diagonal(&self) -> Vec<PInt> {
        (0..self.n).map(|i| self.at(i, i).clone()).collect()
    }

    pub fn is_upper_triangular(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.at(i, j).is_zero()))
    }
}

/// Total order used for canonical keys: diagonal entries first, then the full
/// row-major entry list.  Dimension and prime sort before either so the order
/// is total on all values.
impl Ord for PMatrix {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n
            .cmp(&other.n)
            .then_with(|| self.p.cmp(&other.p))
            .then_with(|| self.diagonal().cmp(&other.diagonal()))
            .then_with(|| self.e.cmp(&other.e))
    }
}

impl PartialOrd for PMatrix {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.n {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "[")?;
            for j in 0..self.n {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", self.at(i, j))?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

fn det_rows(rows: &[Vec<PInt>]) -> PInt {
    let n = rows.len();
    if n == 0 {
        return PInt::one();
    }
    if n == 1 {
        return rows[0][0].clone();
    }
    let mut acc = PInt::zero();
    for j in 0..n {
        if rows[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<PInt>> = rows[1..]
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|&(c, _)| c != j)
                    .map(|(_, x)| x.clone())
                    .collect()
            })
            .collect();
        let term = &rows[0][j] * det_rows(&minor);
        if j % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// Ascending elementary-divisor exponents (e_1 ≤ … ≤ e_r), the double-coset
/// label of the lattice system.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct ExpVector(Vec<u32>);

impl ExpVector {
    /// Wrap an ascending exponent list.
    pub fn from_sorted(exps: Vec<u32>) -> Self {
        assert!(exps.windows(2).all(|w| w[0] <= w[1]), "exponents must ascend");
        ExpVector(exps)
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }
}

impl fmt::Display for ExpVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// Trial-division primality test; the primes here are desk-scale.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// p-adic valuation of a nonzero integer.
pub fn valuation(n: &PInt, p: u64) -> Result<u32> {
    if n.is_zero() {
        return Err(Error::ZeroValuation);
    }
    let p = PInt::from(p);
    let mut v = 0u32;
    let mut m = n.abs();
    loop {
        let (q, r) = m.div_rem(&p);
        if !r.is_zero() {
            return Ok(v);
        }
        v += 1;
        m = q;
    }
}

/// p^k as a PInt.
pub fn p_pow(p: u64, k: u32) -> PInt {
    let mut acc = PInt::one();
    let p = PInt::from(p);
    for _ in 0..k {
        acc *= &p;
    }
    acc
}

/// Checks |d| = p^m exactly and returns m.
fn p_power_valuation(d: &PInt, p: u64) -> Result<u32> {
    if d.is_zero() {
        return Err(Error::SingularMatrix);
    }
    let m = valuation(d, p)?;
    if d.abs() != p_pow(p, m) {
        return Err(Error::NotPPower {
            det: d.clone(),
            p,
        });
    }
    Ok(m)
}

/// Row Hermite form of a stack of rows spanning a finite-index sublattice of
/// Z^n: returns the unique upper-triangular basis with positive diagonal and
/// column-j entries reduced into [0, diag_j).  Fails on rank deficiency.
fn row_hnf(mut rows: Vec<Vec<PInt>>, n: usize) -> Result<Vec<Vec<PInt>>> {
    let m = rows.len();
    let mut pivot = 0usize;
    for col in 0..n {
        loop {
            // Smallest nonzero entry in this column becomes the pivot.
            let best = (pivot..m)
                .filter(|&i| !rows[i][col].is_zero())
                .min_by_key(|&i| rows[i][col].abs());
            let Some(best) = best else {
                return Err(Error::SingularMatrix);
            };
            rows.swap(pivot, best);
            let mut clean = true;
            for i in pivot + 1..m {
                if rows[i][col].is_zero() {
                    continue;
                }
                let q = rows[i][col].div_floor(&rows[pivot][col]);
                if !q.is_zero() {
                    for l in col..n {
                        let t = &q * &rows[pivot][l];
                        rows[i][l] -= t;
                    }
                }
                if !rows[i][col].is_zero() {
                    clean = false;
                }
            }
            if clean {
                break;
            }
        }
        pivot += 1;
    }
    let mut top: Vec<Vec<PInt>> = rows.into_iter().take(n).collect();
    // Positive diagonal (negating a row is a unimodular move).
    for i in 0..n {
        if top[i][i].is_negative() {
            for l in 0..n {
                top[i][l] = -top[i][l].clone();
            }
        }
    }
    // Reduce the entries above each pivot into [0, diag).
    for j in 0..n {
        for i in 0..j {
            let q = top[i][j].div_floor(&top[j][j]);
            if !q.is_zero() {
                for l in j..n {
                    let t = &q * &top[j][l];
                    top[i][l] -= t;
                }
            }
        }
    }
    Ok(top)
}

fn from_rows(p: u64, rows: Vec<Vec<PInt>>) -> PMatrix {
    let n = rows.len();
    PMatrix::new(p, n, rows.into_iter().flatten().collect())
}

/// p-local Hermite form of a matrix with |det| = ±p^m: the unique canonical
/// left-coset representative U·A (U unimodular).  Idempotent.
pub fn hnf_p(a: &PMatrix) -> Result<PMatrix> {
    p_power_valuation(&a.det(), a.p())?;
    // With a p-power determinant, the integer Hermite form is the p-local one:
    // the diagonal entries multiply to p^m, so each is itself a p-power.
    let rows = row_hnf(a.rows(), a.n())?;
    Ok(from_rows(a.p(), rows))
}

/// p-local Hermite form for any nonzero determinant: saturates the row lattice
/// at p by adjoining p^m·Z^n (m = v_p(det)), which strips unit factors off the
/// determinant.  Agrees with `hnf_p` whenever |det| is a p-power.
pub fn hnf_p_saturated(a: &PMatrix) -> Result<PMatrix> {
    let d = a.det();
    if d.is_zero() {
        return Err(Error::SingularMatrix);
    }
    let m = valuation(&d, a.p())?;
    let pm = p_pow(a.p(), m);
    let mut rows = a.rows();
    for i in 0..a.n() {
        let mut r = vec![PInt::zero(); a.n()];
        r[i] = pm.clone();
        rows.push(r);
    }
    let rows = row_hnf(rows, a.n())?;
    Ok(from_rows(a.p(), rows))
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        // Advance the combination odometer.
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Ascending elementary-divisor exponents of A via determinantal divisors:
/// e_1 + … + e_i = v_p(gcd of all i×i minors).
pub fn snf_exponents(a: &PMatrix) -> Result<ExpVector> {
    let m = p_power_valuation(&a.det(), a.p())?;
    let n = a.n();
    let rows = a.rows();
    let mut exps = Vec::with_capacity(n);
    let mut prev = 0u32;
    for i in 1..=n {
        let v = if i == n {
            m // gcd of the single n×n minor is |det| = p^m
        } else {
            let mut g = PInt::zero();
            'outer: for ri in combinations(n, i) {
                for ci in combinations(n, i) {
                    let sub: Vec<Vec<PInt>> = ri
                        .iter()
                        .map(|&r| ci.iter().map(|&c| rows[r][c].clone()).collect())
                        .collect();
                    g = g.gcd(&det_rows(&sub));
                    if g.is_one() {
                        break 'outer;
                    }
                }
            }
            valuation(&g, a.p())?
        };
        exps.push(v - prev);
        prev = v;
    }
    Ok(ExpVector::from_sorted(exps))
}

/// All canonical Hermite forms with determinant p^k in dimension r, sorted.
/// For r = 2 the count is 1 + p + … + p^k, the number of index-p^k sublattices.
pub fn enumerate_hnf(r: usize, p: u64, k: u32) -> Vec<PMatrix> {
    let mut out = Vec::new();
    let mut comp = vec![0u32; r];
    enumerate_comp(r, p, k, 0, &mut comp, &mut out);
    out.sort();
    out
}

fn enumerate_comp(r: usize, p: u64, k: u32, pos: usize, comp: &mut Vec<u32>, out: &mut Vec<PMatrix>) {
    if pos == r {
        emit_hnfs(r, p, comp, out);
        return;
    }
    if pos == r - 1 {
        comp[pos] = k - comp[..pos].iter().sum::<u32>();
        emit_hnfs(r, p, comp, out);
        return;
    }
    let used: u32 = comp[..pos].iter().sum();
    for a in 0..=(k - used) {
        comp[pos] = a;
        enumerate_comp(r, p, k, pos + 1, comp, out);
    }
}

/// Emit every HNF with the given diagonal exponents: the (i,j) entry above the
/// diagonal ranges over [0, p^{e_j}).
fn emit_hnfs(r: usize, p: u64, exps: &[u32], out: &mut Vec<PMatrix>) {
    let slots: Vec<(usize, usize)> = (0..r)
        .flat_map(|i| (i + 1..r).map(move |j| (i, j)))
        .collect();
    let radix: Vec<u64> = slots
        .iter()
        .map(|&(_, j)| {
            p_pow(p, exps[j])
                .to_u64()
                .expect("off-diagonal modulus fits u64 at desk scale")
        })
        .collect();
    let mut vals = vec![0u64; slots.len()];
    loop {
        let mut m = PMatrix::diag(p, &exps.iter().map(|&e| p_pow(p, e)).collect::<Vec<_>>());
        for (s, &(i, j)) in slots.iter().enumerate() {
            m.e[i * r + j] = PInt::from(vals[s]);
        }
        out.push(m);
        // Odometer over the off-diagonal residues.
        let mut s = slots.len();
        loop {
            if s == 0 {
                return;
            }
            s -= 1;
            vals[s] += 1;
            if vals[s] < radix[s] {
                break;
            }
            vals[s] = 0;
            if s == 0 {
                return;
            }
        }
    }
}

/// Canonical representative of c modulo the row lattice of a Hermite form H:
/// reduce coordinate j with row j, top to bottom, landing every coordinate in
/// [0, p^{e_j}).  Idempotent and constant on c + Z^n·H.
pub fn lattice_reduce(h: &PMatrix, c: &[PInt]) -> Vec<PInt> {
    assert!(h.is_upper_triangular(), "lattice_reduce needs a Hermite form");
    assert_eq!(c.len(), h.n());
    let n = h.n();
    let mut v = c.to_vec();
    for j in 0..n {
        let q = v[j].div_floor(h.at(j, j));
        if !q.is_zero() {
            for l in j..n {
                let t = &q * h.at(j, l);
                v[l] -= t;
            }
        }
    }
    v
}

/// Gaussian binomial coefficient ∏_{j=0}^{i-1} (p^{r-j} − 1)/(p^{j+1} − 1),
/// the number of i-dimensional subspaces of F_p^r.
pub fn gaussian_binomial(r: u32, i: u32, p: u64) -> PInt {
    assert!(i <= r, "gaussian_binomial needs 0 ≤ i ≤ r");
    let mut num = PInt::one();
    let mut den = PInt::one();
    for j in 0..i {
        num *= p_pow(p, r - j) - 1;
        den *= p_pow(p, j + 1) - 1;
    }
    let (q, rem) = num.div_rem(&den);
    assert!(rem.is_zero(), "gaussian binomial must divide exactly");
    q
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m2(p: u64, a: i64, b: i64, c: i64, d: i64) -> PMatrix {
        PMatrix::from_i64(p, 2, &[a, b, c, d])
    }

    #[test]
    fn valuation_basics() {
        assert_eq!(valuation(&PInt::from(12), 2).unwrap(), 2);
        assert_eq!(valuation(&PInt::from(1), 5).unwrap(), 0);
        assert_eq!(valuation(&PInt::from(-250), 5).unwrap(), 3);
        assert!(valuation(&PInt::zero(), 3).is_err());
    }

    #[test]
    fn hnf_swaps_rows() {
        for p in [2u64, 3, 5] {
            let a = m2(p, 0, 1, p as i64, 0);
            let h = hnf_p(&a).unwrap();
            assert_eq!(h, m2(p, p as i64, 0, 0, 1));
        }
    }

    #[test]
    fn hnf_leaves_canonical_forms_alone() {
        let a = m2(3, 1, 7, 0, 9);
        assert_eq!(hnf_p(&a).unwrap(), a);
        for h in enumerate_hnf(2, 3, 3) {
            assert_eq!(hnf_p(&h).unwrap(), h);
        }
    }

    #[test]
    fn hnf_rejects_non_p_power() {
        let a = m2(2, 3, 0, 0, 1);
        assert!(matches!(hnf_p(&a), Err(Error::NotPPower { .. })));
        let s = m2(2, 2, 4, 1, 2);
        assert!(matches!(hnf_p(&s), Err(Error::SingularMatrix)));
    }

    #[test]
    fn saturation_strips_unit_factors() {
        // det = 2, a unit at p = 3, so the 3-local lattice is all of Z².
        let a = m2(3, 2, 0, 0, 1);
        assert_eq!(hnf_p_saturated(&a).unwrap(), PMatrix::identity(3, 2));
        // det = 2·3: saturation keeps only the 3-part.
        let b = m2(3, 2, 0, 0, 3);
        assert_eq!(hnf_p_saturated(&b).unwrap(), m2(3, 1, 0, 0, 3));
        // On p-power determinants it agrees with hnf_p.
        for h in enumerate_hnf(2, 2, 2) {
            let u = m2(2, 3, 1, 2, 1); // det 1
            let m = u.mul(&h);
            assert_eq!(hnf_p_saturated(&m).unwrap(), hnf_p(&m).unwrap());
        }
    }

    #[test]
    fn snf_examples() {
        for p in [2u64, 3, 5] {
            let b = (p as i64) - 1;
            assert_eq!(
                snf_exponents(&m2(p, 1, b, 0, p as i64)).unwrap().exps(),
                &[0, 1]
            );
            assert_eq!(
                snf_exponents(&m2(p, p as i64, 0, 0, p as i64)).unwrap().exps(),
                &[1, 1]
            );
            assert_eq!(
                snf_exponents(&m2(p, p as i64, 1, 0, p as i64)).unwrap().exps(),
                &[0, 2]
            );
        }
    }

    #[test]
    fn snf_sum_is_det_valuation() {
        for p in [2u64, 3] {
            for k in 0..=3 {
                for h in enumerate_hnf(2, p, k) {
                    assert_eq!(snf_exponents(&h).unwrap().sum(), k);
                }
            }
        }
    }

    #[test]
    fn enumeration_counts() {
        for p in [2u64, 3, 5] {
            assert_eq!(enumerate_hnf(2, p, 0), vec![PMatrix::identity(p, 2)]);
            let q = p as usize;
            assert_eq!(enumerate_hnf(2, p, 1).len(), q + 1);
            assert_eq!(enumerate_hnf(2, p, 2).len(), 1 + q + q * q);
        }
    }

    #[test]
    fn enumeration_is_sorted_and_distinct() {
        let l = enumerate_hnf(2, 3, 2);
        for w in l.windows(2) {
            assert!(w[0] < w[1]);
        }
    }

    #[test]
    fn lattice_reduce_examples() {
        for p in [2u64, 3, 5] {
            let h = m2(p, 1, 0, 0, p as i64);
            let zero = vec![PInt::zero(), PInt::zero()];
            assert_eq!(lattice_reduce(&h, &[PInt::zero(), PInt::from(p)]), zero);
            assert_eq!(
                lattice_reduce(&h, &[PInt::zero(), PInt::one()]),
                vec![PInt::zero(), PInt::one()]
            );
        }
    }

    #[test]
    fn lattice_reduce_mod_rows() {
        let h = m2(2, 2, 1, 0, 4);
        let c = vec![PInt::from(-7), PInt::from(23)];
        let r = lattice_reduce(&h, &c);
        // Adding any row combination of H must not change the result.
        let shifted = vec![&c[0] + 3 * h.at(0, 0) - 2 * h.at(1, 0), &c[1] + 3 * h.at(0, 1) - 2 * h.at(1, 1)];
        assert_eq!(lattice_reduce(&h, &shifted), r);
        assert_eq!(lattice_reduce(&h, &r), r);
    }

    #[test]
    fn gaussian_binomials() {
        for p in [2u64, 3, 5] {
            assert_eq!(gaussian_binomial(2, 1, p), PInt::from(p + 1));
        }
        assert_eq!(gaussian_binomial(3, 1, 2), PInt::from(7));
        assert_eq!(gaussian_binomial(3, 2, 2), PInt::from(7));
        assert_eq!(gaussian_binomial(3, 0, 2), PInt::one());
        assert_eq!(gaussian_binomial(3, 3, 2), PInt::one());
    }

    #[test]
    fn matrix_order_is_diagonal_first() {
        // diag (1,4) sorts before diag (2,2) even though row-major order says otherwise.
        let a = m2(2, 1, 0, 0, 4);
        let b = m2(2, 2, 0, 0, 2);
        assert!(a < b);
    }
}
