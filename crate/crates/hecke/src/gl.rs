//! The lattice coset system: Γ = GL_r(Z_p) acting on Δ = M_r(Z_p) ∩ GL_r(Q_p).
//!
//! Double cosets are classified by ascending elementary-divisor exponents
//! (`ExpVector`), left cosets by Hermite forms.  The generating series
//! P(X) = Σ T(p^k) X^k is killed by the degree-r polynomial
//!
//!   f(X) = Σ_{i=0}^{r} (−1)^i p^{i(i−1)/2} T^{(i)} X^i,
//!
//! where T^{(i)} is the class of diag(1,…,1,p,…,p) with i entries p; for r = 2
//! that reads f(X) = 1 − T^{(1)} X + p T^{(2)} X².  `verify_rationality` checks
//! f·P = 1 coefficient by coefficient.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::cache::ProductStore;
use crate::coset::{hecke_series, series_mul, CosetSystem, HeckeElement, TruncSeries};
use crate::doc;
use crate::linalg::{
    enumerate_hnf, hnf_p, is_prime, p_pow, snf_exponents, valuation, ExpVector, PInt, PMatrix,
};
use crate::report::Report;
use crate::{Error, Result};

/// Double-coset label of the lattice system: ascending SNF exponents.
pub type GLKey = ExpVector;

/// Stable series/cache tag of the lattice system at (r, p).
pub fn gl_tag(r: usize, p: u64) -> String {
    format!("gl(r={r},p={p})")
}

/// The lattice coset system at dimension r and prime p, with memoized left
/// cosets and structure constants and an optional persistent product store.
pub struct GlSystem {
    r: usize,
    p: u64,
    check: bool,
    lefts: Mutex<HashMap<GLKey, Arc<Vec<PMatrix>>>>,
    memo: Mutex<HashMap<(GLKey, GLKey), Vec<(GLKey, PInt)>>>,
    store: Mutex<Option<Arc<dyn ProductStore>>>,
}

/// Build the lattice system; r ≥ 1 and p must be prime.
pub fn gl_system(r: usize, p: u64) -> GlSystem {
    GlSystem::new(r, p)
}

impl GlSystem {
    pub fn new(r: usize, p: u64) -> Self {
        assert!(r >= 1, "dimension must be positive");
        assert!(is_prime(p), "p = {p} is not prime");
        GlSystem {
            r,
            p,
            check: true,
            lefts: Mutex::new(HashMap::new()),
            memo: Mutex::new(HashMap::new()),
            store: Mutex::new(None),
        }
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// Disable the per-product uniformity check (CLI speed flag).
    pub fn set_check_uniformity(&mut self, check: bool) {
        self.check = check;
    }

    /// Attach a persistent structure-constant store.
    pub fn set_store(&self, store: Arc<dyn ProductStore>) {
        *self.store.lock().unwrap() = Some(store);
    }

    /// All-zero key of the identity double coset.
    pub fn zero_key(&self) -> GLKey {
        ExpVector::from_sorted(vec![0; self.r])
    }
}

impl CosetSystem for GlSystem {
    type Elt = PMatrix;
    type Key = GLKey;

    fn p(&self) -> u64 {
        self.p
    }

    fn tag(&self) -> String {
        gl_tag(self.r, self.p)
    }

    fn identity(&self) -> PMatrix {
        PMatrix::identity(self.p, self.r)
    }

    fn elt_mul(&self, x: &PMatrix, y: &PMatrix) -> PMatrix {
        x.mul(y)
    }

    fn canonical_left(&self, x: &PMatrix) -> PMatrix {
        hnf_p(x).expect("lattice elements keep p-power determinants")
    }

    fn index_valuation(&self, x: &PMatrix) -> u32 {
        valuation(&x.det(), self.p).expect("lattice elements are nonsingular")
    }

    fn key_valuation(&self, k: &GLKey) -> u32 {
        k.sum()
    }

    fn double_key(&self, x: &PMatrix) -> GLKey {
        snf_exponents(x).expect("lattice elements keep p-power determinants")
    }

    fn left_cosets(&self, k: &GLKey) -> Vec<PMatrix> {
        if let Some(v) = self.lefts.lock().unwrap().get(k) {
            return v.as_ref().clone();
        }
        // Filter the full Hermite enumeration at this determinant by SNF key;
        // exhaustive, hence also an oracle for transversal sizes.
        let v: Vec<PMatrix> = enumerate_hnf(self.r, self.p, k.sum())
            .into_iter()
            .filter(|h| &snf_exponents(h).expect("enumerated forms are valid") == k)
            .collect();
        self.lefts
            .lock()
            .unwrap()
            .insert(k.clone(), Arc::new(v.clone()));
        v
    }

    fn all_doubles(&self, v: u32) -> Vec<GLKey> {
        let mut out = Vec::new();
        let mut cur = vec![0u32; self.r];
        ascending_partitions(self.r, v, 0, 0, &mut cur, &mut out);
        out
    }

    fn check_uniformity(&self) -> bool {
        self.check
    }

    fn cached_product(&self, a: &GLKey, b: &GLKey) -> Option<Vec<(GLKey, PInt)>> {
        if let Some(v) = self.memo.lock().unwrap().get(&(a.clone(), b.clone())) {
            return Some(v.clone());
        }
        let store = self.store.lock().unwrap().clone()?;
        let payload = store.get(&self.tag(), &doc::gl_key_str(a), &doc::gl_key_str(b))?;
        let v = doc::gl_terms_from_json(&payload, self.r)?;
        self.memo
            .lock()
            .unwrap()
            .insert((a.clone(), b.clone()), v.clone());
        Some(v)
    }

    fn store_product(&self, a: &GLKey, b: &GLKey, v: &[(GLKey, PInt)]) {
        self.memo
            .lock()
            .unwrap()
            .insert((a.clone(), b.clone()), v.to_vec());
        if let Some(store) = self.store.lock().unwrap().clone() {
            store.put(
                &self.tag(),
                &doc::gl_key_str(a),
                &doc::gl_key_str(b),
                &doc::gl_terms_to_json(v),
            );
        }
    }
}

/// Partitions of v into r ascending parts, in lexicographic key order.
fn ascending_partitions(
    r: usize,
    v: u32,
    pos: usize,
    min: u32,
    cur: &mut Vec<u32>,
    out: &mut Vec<GLKey>,
) {
    let used: u32 = cur[..pos].iter().sum();
    let remaining = v - used;
    if pos == r - 1 {
        if remaining >= min {
            cur[pos] = remaining;
            out.push(ExpVector::from_sorted(cur.clone()));
        }
        return;
    }
    let rest = (r - pos - 1) as u32;
    let mut e = min;
    // Later parts are each ≥ e, so e is feasible only while e·(rest+1) ≤ remaining.
    while e * (rest + 1) <= remaining {
        cur[pos] = e;
        ascending_partitions(r, v, pos + 1, e, cur, out);
        e += 1;
    }
}

/// T^{(i)}: the double coset of diag(1,…,1,p,…,p) with i entries equal to p.
pub fn t_elementary(r: usize, p: u64, i: usize) -> Result<HeckeElement<GLKey>> {
    debug_assert!(is_prime(p));
    if i < 1 || i > r {
        return Err(Error::Usage(format!(
            "elementary index i = {i} out of range 1..={r}"
        )));
    }
    let mut exps = vec![0u32; r - i];
    exps.extend(std::iter::repeat(1).take(i));
    Ok(HeckeElement::from_key(ExpVector::from_sorted(exps)))
}

/// f(X) = Σ_{i=0}^{r} (−1)^i p^{i(i−1)/2} T^{(i)} X^i, zero-padded to degree N.
pub fn f_poly(r: usize, p: u64, n: u32) -> Result<TruncSeries<GLKey>> {
    if n < r as u32 {
        return Err(Error::Truncation {
            have: n,
            need: r as u32,
        });
    }
    let mut coeffs = Vec::with_capacity(n as usize + 1);
    coeffs.push(HeckeElement::from_key(ExpVector::from_sorted(vec![0; r])));
    for i in 1..=r {
        let mut c = p_pow(p, (i * (i - 1) / 2) as u32);
        if i % 2 == 1 {
            c = -c;
        }
        coeffs.push(t_elementary(r, p, i)?.scaled(&c));
    }
    coeffs.resize((n + 1) as usize, HeckeElement::zero());
    Ok(TruncSeries::new(gl_tag(r, p), coeffs))
}

/// Check f(X)·P(X) = 1 up to X^N, one report line per coefficient.
pub fn verify_rationality(r: usize, p: u64, n: u32) -> Result<Report> {
    if r < 1 || !is_prime(p) {
        return Err(Error::Usage(format!("need r ≥ 1 and p prime, got r={r} p={p}")));
    }
    if n < 1 {
        return Err(Error::Usage("truncation degree N must be ≥ 1".into()));
    }
    let sys = gl_system(r, p);
    let f = f_poly(r, p, n)?;
    let series = hecke_series(&sys, n);
    let prod = series_mul(&sys, &f, &series)?;
    let unit = HeckeElement::from_key(sys.zero_key());
    let mut report = Report::new("rationality", format!("r={r} p={p} N={n}"));
    for k in 0..=n {
        let got = prod.coeff(k);
        let want = if k == 0 { unit.clone() } else { HeckeElement::zero() };
        let name = format!("coefficient of X^{k} in f·P");
        if got == &want {
            report.pass(name);
        } else {
            report.fail(name, format!("expected {want}, got {got}"));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coset::{degree, element_degree, hecke_mul, key_mul, t_index};
    use crate::linalg::gaussian_binomial;

    fn ev(e: &[u32]) -> GLKey {
        ExpVector::from_sorted(e.to_vec())
    }

    #[test]
    fn elementary_keys() {
        assert_eq!(t_elementary(2, 3, 1).unwrap().keys().next().unwrap(), &ev(&[0, 1]));
        assert_eq!(t_elementary(2, 3, 2).unwrap().keys().next().unwrap(), &ev(&[1, 1]));
        assert_eq!(
            t_elementary(3, 2, 2).unwrap().keys().next().unwrap(),
            &ev(&[0, 1, 1])
        );
        assert!(t_elementary(2, 3, 0).is_err());
        assert!(t_elementary(2, 3, 3).is_err());
    }

    #[test]
    fn doubles_are_partitions() {
        let sys = gl_system(2, 5);
        assert_eq!(sys.all_doubles(2), vec![ev(&[0, 2]), ev(&[1, 1])]);
        assert_eq!(sys.all_doubles(3), vec![ev(&[0, 3]), ev(&[1, 2])]);
        let sys3 = gl_system(3, 2);
        assert_eq!(
            sys3.all_doubles(2),
            vec![ev(&[0, 0, 2]), ev(&[0, 1, 1])]
        );
    }

    #[test]
    fn left_coset_counts() {
        for p in [2u64, 3, 5] {
            let sys = gl_system(2, p);
            assert_eq!(sys.left_cosets(&ev(&[0, 1])).len() as u64, p + 1);
            assert_eq!(sys.left_cosets(&ev(&[1, 1])).len(), 1);
        }
    }

    #[test]
    fn elementary_degrees_match_gaussian_binomials() {
        for p in [2u64, 3] {
            for r in 1..=3usize {
                let sys = gl_system(r, p);
                for i in 1..=r {
                    let key = t_elementary(r, p, i).unwrap().keys().next().unwrap().clone();
                    assert_eq!(degree(&sys, &key), gaussian_binomial(r as u32, i as u32, p));
                }
            }
        }
    }

    #[test]
    fn square_of_first_elementary() {
        for p in [2u64, 3, 5] {
            let sys = gl_system(2, p);
            let prod = key_mul(&sys, &ev(&[0, 1]), &ev(&[0, 1])).unwrap();
            assert_eq!(
                prod,
                vec![
                    (ev(&[0, 2]), PInt::from(1)),
                    (ev(&[1, 1]), PInt::from(p + 1))
                ]
            );
        }
    }

    #[test]
    fn degree_is_conserved() {
        let sys = gl_system(2, 3);
        let a = t_index(&sys, 2);
        let b = t_index(&sys, 1);
        let prod = hecke_mul(&sys, &a, &b).unwrap();
        assert_eq!(
            element_degree(&sys, &prod),
            element_degree(&sys, &a) * element_degree(&sys, &b)
        );
    }

    #[test]
    fn hecke_recursion_at_rank_two() {
        // T(p^k) = T(1,p)·T(p^{k−1}) − p·T(p,p)·T(p^{k−2}), the f·P identity
        // rearranged degree by degree.
        let p = 2u64;
        let sys = gl_system(2, p);
        let t1 = t_elementary(2, p, 1).unwrap();
        let tpp = t_elementary(2, p, 2).unwrap();
        for k in 2u32..=4 {
            let lhs = t_index(&sys, k);
            let a = hecke_mul(&sys, &t1, &t_index(&sys, k - 1)).unwrap();
            let b = hecke_mul(&sys, &tpp, &t_index(&sys, k - 2)).unwrap();
            assert_eq!(lhs, a.sub(&b.scaled(&PInt::from(p))));
        }
    }

    #[test]
    fn generators_commute() {
        let sys = gl_system(2, 3);
        let a = t_elementary(2, 3, 1).unwrap();
        let b = HeckeElement::from_key(ev(&[0, 2]));
        assert_eq!(
            hecke_mul(&sys, &a, &b).unwrap(),
            hecke_mul(&sys, &b, &a).unwrap()
        );
    }

    #[test]
    fn rationality_small() {
        assert!(verify_rationality(2, 2, 3).unwrap().passed());
        assert!(verify_rationality(2, 3, 2).unwrap().passed());
    }

    #[test]
    fn f_poly_needs_room() {
        assert!(matches!(
            f_poly(3, 2, 2),
            Err(Error::Truncation { have: 2, need: 3 })
        ));
    }
}
