//! The Heisenberg coset system.
//!
//! Endomorphisms of the Heisenberg Lie algebra (basis x, y, z with [x,y] = z)
//! that are invertible after tensoring with Q_p are the pairs (A, a) with
//! A ∈ M_2(Z_p) ∩ GL_2(Q_p) and a ∈ Z_p²: on basis elements,
//! α(x) = A₁₁x + A₂₁y + a₁z, α(y) = A₁₂x + A₂₂y + a₂z, α(z) = det(A)·z.
//! Composing two of them forces the product law
//!
//!   (A, a)·(B, b) = (A·B, a·B + det(A)·b),
//!
//! with identity (I, 0).  The image lattice has index |det A|², so the index
//! valuation is 2·v_p(det A) — always even, which is why the generating series
//! of this system lives in X².
//!
//! The automorphism group Γ consists of the pairs (U, u) with U ∈ GL_2(Z_p).
//! Canonical left-coset forms are pairs (H, c) with H a Hermite form and c a
//! lattice-reduced translation; double cosets are finite orbits of left cosets
//! under right multiplication by a generator set of Γ, computed by BFS.
//!
//! The maps to and from the lattice ring — s (A ↦ (A,0)), φ ((A,a) ↦ A) and
//! the dilation θ ((A,a) ↦ (A,pa), conjugation by (pI,0)) — are the induced
//! maps on Hecke rings, i.e. left-coset pushforwards with checked uniform
//! fibers.  They make the Heisenberg ring a module (not an algebra) over the
//! polynomial ring R[θ] of the lattice ring, via (a·θ^j)·m = s(a)·θ^j(m).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use num_integer::Integer;
use num_traits::{One, Zero};

use crate::cache::ProductStore;
use crate::coset::{hecke_mul, pushforward, t_index, CosetSystem, HeckeElement};
use crate::doc;
use crate::gl::{t_elementary, GLKey, GlSystem};
use crate::linalg::{
    enumerate_hnf, hnf_p_saturated, is_prime, lattice_reduce, p_pow, valuation, PInt, PMatrix,
};
use crate::report::Report;
use crate::{Error, Result};

/// A Heisenberg endomorphism (A, a): 2×2 matrix part and z-component row.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct HeisElt {
    pub mat: PMatrix,
    pub tr: Vec<PInt>,
}

impl HeisElt {
    pub fn new(mat: PMatrix, tr: Vec<PInt>) -> Self {
        assert_eq!(mat.n(), 2, "the Heisenberg matrix part is 2×2");
        assert_eq!(tr.len(), 2, "the translation part has two coordinates");
        HeisElt { mat, tr }
    }

    pub fn from_i64(p: u64, m: [i64; 4], t: [i64; 2]) -> Self {
        Self::new(
            PMatrix::from_i64(p, 2, &m),
            t.iter().map(|&x| PInt::from(x)).collect(),
        )
    }

    pub fn identity(p: u64) -> Self {
        Self::new(PMatrix::identity(p, 2), vec![PInt::zero(), PInt::zero()])
    }
}

impl fmt::Display for HeisElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({};({},{}))", self.mat, self.tr[0], self.tr[1])
    }
}

/// Composition (A,a)·(B,b) = (AB, aB + det(A)·b).
pub fn heis_mul(x: &HeisElt, y: &HeisElt) -> HeisElt {
    let mat = x.mat.mul(&y.mat);
    let d = x.mat.det();
    let ab = y.mat.row_apply(&x.tr);
    let tr = ab
        .into_iter()
        .zip(y.tr.iter())
        .map(|(l, r)| l + &d * r)
        .collect();
    HeisElt { mat, tr }
}

/// Inverse of a modulo m ≥ 1 (m = 1 gives 0), for a coprime to m.
fn mod_inverse(a: &PInt, m: &PInt) -> PInt {
    if m.is_one() {
        return PInt::zero();
    }
    let g = a.extended_gcd(m);
    assert!(g.gcd.is_one(), "mod_inverse of a non-unit");
    g.x.mod_floor(m)
}

/// Canonical representative of the left coset Γ·(A,a): the pair (H, c) with
/// H the p-local Hermite form of A and c the translation reduced against the
/// row lattice of H.  Constant on left cosets and idempotent.
///
/// The translation picks up the determinant of the unimodular move U₀ with
/// U₀·A = H; p-adically det U₀ = det(H)/det(A) = u^{-1} for the unit part u of
/// det A, which modulo the row lattice is the integer inverse of u mod p^m.
pub fn heis_canonical_left(x: &HeisElt) -> HeisElt {
    let p = x.mat.p();
    let d = x.mat.det();
    assert!(!d.is_zero(), "Heisenberg elements are nonsingular");
    let m = valuation(&d, p).expect("nonzero determinant");
    let h = hnf_p_saturated(&x.mat).expect("nonzero determinant");
    let pm = p_pow(p, m);
    let unit = &d / &pm; // d = unit·p^m with p ∤ unit
    let w = mod_inverse(&unit, &pm);
    let scaled: Vec<PInt> = x.tr.iter().map(|t| t * &w).collect();
    let c = lattice_reduce(&h, &scaled);
    HeisElt { mat: h, tr: c }
}

/// Canonical double-coset label: the lexicographically minimal canonical
/// left-coset form in the orbit.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct HeisKey(pub HeisElt);

impl fmt::Display for HeisKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

struct OrbitInfo {
    key: HeisKey,
    members: Vec<HeisElt>, // sorted canonical left-coset forms
}

/// The Heisenberg coset system at p, with its embedded rank-2 lattice system
/// (the target of φ and source of s), orbit and product memo tables, and an
/// optional persistent product store.
pub struct HeisSystem {
    p: u64,
    gl: GlSystem,
    check: bool,
    gens: Vec<HeisElt>,
    orbits: Mutex<HashMap<HeisElt, Arc<OrbitInfo>>>,
    memo: Mutex<HashMap<(HeisKey, HeisKey), Vec<(HeisKey, PInt)>>>,
    store: Mutex<Option<Arc<dyn ProductStore>>>,
}

/// Build the Heisenberg system; p must be prime.
pub fn heis_system(p: u64) -> HeisSystem {
    HeisSystem::new(p)
}

impl HeisSystem {
    pub fn new(p: u64) -> Self {
        assert!(is_prime(p), "p = {p} is not prime");
        HeisSystem {
            p,
            gl: GlSystem::new(2, p),
            check: true,
            gens: generator_set(p),
            orbits: Mutex::new(HashMap::new()),
            memo: Mutex::new(HashMap::new()),
            store: Mutex::new(None),
        }
    }

    /// The rank-2 lattice system sharing this prime.
    pub fn gl(&self) -> &GlSystem {
        &self.gl
    }

    pub fn set_check_uniformity(&mut self, check: bool) {
        self.check = check;
        self.gl.set_check_uniformity(check);
    }

    pub fn set_store(&self, store: Arc<dyn ProductStore>) {
        self.gl.set_store(store.clone());
        *self.store.lock().unwrap() = Some(store);
    }

    /// Orbit of a canonical left-coset form under right multiplication by the
    /// Γ generators: breadth-first closure with lexicographically ordered
    /// frontiers.  The result is the full left-coset decomposition of the
    /// double coset; its minimal member is the key.
    fn orbit(&self, start: &HeisElt) -> Arc<OrbitInfo> {
        if let Some(o) = self.orbits.lock().unwrap().get(start) {
            return o.clone();
        }
        let mut seen: BTreeSet<HeisElt> = BTreeSet::new();
        seen.insert(start.clone());
        let mut frontier: BTreeSet<HeisElt> = seen.clone();
        while !frontier.is_empty() {
            let mut next = BTreeSet::new();
            for e in &frontier {
                for g in &self.gens {
                    let img = heis_canonical_left(&heis_mul(e, g));
                    if !seen.contains(&img) {
                        seen.insert(img.clone());
                        next.insert(img);
                    }
                }
            }
            frontier = next;
        }
        let members: Vec<HeisElt> = seen.into_iter().collect();
        let info = Arc::new(OrbitInfo {
            key: HeisKey(members[0].clone()),
            members,
        });
        let mut map = self.orbits.lock().unwrap();
        for m in &info.members {
            map.insert(m.clone(), info.clone());
        }
        info
    }
}

/// Right-multiplication generator set of Γ: the elementary matrices E₁₂(1)
/// and E₂₁(1), the swap, diagonal units (a lifted primitive root for odd p,
/// the pair {−1, 5} for p = 2), and the two coordinate translations.  The
/// translations act trivially on left cosets and are kept as a cross-check.
fn generator_set(p: u64) -> Vec<HeisElt> {
    let mut mats = vec![
        [1, 1, 0, 1],
        [1, 0, 1, 1],
        [0, 1, 1, 0],
    ];
    for u in unit_generators(p) {
        mats.push([u, 0, 0, 1]);
        mats.push([1, 0, 0, u]);
    }
    let mut gens: Vec<HeisElt> = mats
        .into_iter()
        .map(|m| HeisElt::from_i64(p, m, [0, 0]))
        .collect();
    gens.push(HeisElt::from_i64(p, [1, 0, 0, 1], [1, 0]));
    gens.push(HeisElt::from_i64(p, [1, 0, 0, 1], [0, 1]));
    gens
}

/// Generators of the unit groups (Z/p^m)^* for every m ≥ 1 at once:
/// a primitive root mod p² stays primitive mod every p^m; for p = 2 the
/// classes of −1 and 5 generate.
fn unit_generators(p: u64) -> Vec<i64> {
    if p == 2 {
        return vec![-1, 5];
    }
    vec![primitive_root_mod_p2(p) as i64]
}

fn primitive_root_mod_p2(p: u64) -> u64 {
    let phi = p - 1;
    let mut prime_factors = Vec::new();
    let mut m = phi;
    let mut d = 2;
    while d * d <= m {
        if m % d == 0 {
            prime_factors.push(d);
            while m % d == 0 {
                m /= d;
            }
        }
        d += 1;
    }
    if m > 1 {
        prime_factors.push(m);
    }
    let pow_mod = |mut b: u128, mut e: u64, md: u128| -> u128 {
        let mut acc = 1u128;
        b %= md;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * b % md;
            }
            b = b * b % md;
            e >>= 1;
        }
        acc
    };
    for g in 2..p {
        if prime_factors
            .iter()
            .all(|&q| pow_mod(g as u128, phi / q, p as u128) != 1)
        {
            // g generates mod p; ensure it also generates mod p².
            let p2 = (p as u128) * (p as u128);
            return if pow_mod(g as u128, phi, p2) == 1 { g + p } else { g };
        }
    }
    unreachable!("every prime has a primitive root");
}

/// Full left-coset decomposition of the double coset of x (BFS orbit closure).
pub fn heis_double_orbit(sys: &HeisSystem, x: &HeisElt) -> Vec<HeisElt> {
    sys.orbit(&heis_canonical_left(x)).members.clone()
}

impl CosetSystem for HeisSystem {
    type Elt = HeisElt;
    type Key = HeisKey;

    fn p(&self) -> u64 {
        self.p
    }

    fn tag(&self) -> String {
        format!("heis(p={})", self.p)
    }

    fn identity(&self) -> HeisElt {
        HeisElt::identity(self.p)
    }

    fn elt_mul(&self, x: &HeisElt, y: &HeisElt) -> HeisElt {
        heis_mul(x, y)
    }

    fn canonical_left(&self, x: &HeisElt) -> HeisElt {
        heis_canonical_left(x)
    }

    fn index_valuation(&self, x: &HeisElt) -> u32 {
        2 * valuation(&x.mat.det(), self.p).expect("nonsingular")
    }

    fn key_valuation(&self, k: &HeisKey) -> u32 {
        2 * valuation(&k.0.mat.det(), self.p).expect("nonsingular")
    }

    fn double_key(&self, x: &HeisElt) -> HeisKey {
        self.orbit(&heis_canonical_left(x)).key.clone()
    }

    fn left_cosets(&self, k: &HeisKey) -> Vec<HeisElt> {
        self.orbit(&k.0).members.clone()
    }

    /// Index valuation v = 2k: enumerate every canonical (H, c) with
    /// det H = p^k and partition into orbits.  Odd valuations carry nothing.
    fn all_doubles(&self, v: u32) -> Vec<HeisKey> {
        if v % 2 == 1 {
            return Vec::new();
        }
        let mut keys = BTreeSet::new();
        for e in enumerate_left_cosets(self.p, v / 2) {
            keys.insert(self.double_key(&e));
        }
        keys.into_iter().collect()
    }

    fn check_uniformity(&self) -> bool {
        self.check
    }

    fn cached_product(&self, a: &HeisKey, b: &HeisKey) -> Option<Vec<(HeisKey, PInt)>> {
        if let Some(v) = self.memo.lock().unwrap().get(&(a.clone(), b.clone())) {
            return Some(v.clone());
        }
        let store = self.store.lock().unwrap().clone()?;
        let payload = store.get(&self.tag(), &doc::heis_key_str(a), &doc::heis_key_str(b))?;
        let v = doc::heis_terms_from_json(&payload, self.p)?;
        self.memo
            .lock()
            .unwrap()
            .insert((a.clone(), b.clone()), v.clone());
        Some(v)
    }

    fn store_product(&self, a: &HeisKey, b: &HeisKey, v: &[(HeisKey, PInt)]) {
        self.memo
            .lock()
            .unwrap()
            .insert((a.clone(), b.clone()), v.to_vec());
        if let Some(store) = self.store.lock().unwrap().clone() {
            store.put(
                &self.tag(),
                &doc::heis_key_str(a),
                &doc::heis_key_str(b),
                &doc::heis_terms_to_json(v),
            );
        }
    }
}

/// Every canonical left-coset form (H, c) with det H = p^k: H runs over the
/// Hermite enumeration and c over the box [0, H₁₁) × [0, H₂₂).  There are
/// p^k translations per matrix, p^k·(1 + p + … + p^k) forms in total.
pub fn enumerate_left_cosets(p: u64, k: u32) -> Vec<HeisElt> {
    let mut out = Vec::new();
    for h in enumerate_hnf(2, p, k) {
        let d0 = h.at(0, 0).clone();
        let d1 = h.at(1, 1).clone();
        let mut c0 = PInt::zero();
        while c0 < d0 {
            let mut c1 = PInt::zero();
            while c1 < d1 {
                out.push(HeisElt::new(h.clone(), vec![c0.clone(), c1.clone()]));
                c1 += 1;
            }
            c0 += 1;
        }
    }
    out.sort();
    out
}

/// s: the lattice ring embeds via A ↦ (A, 0) (left-coset pushforward).
pub fn s_map(sys: &HeisSystem, x: &HeckeElement<GLKey>) -> Result<HeckeElement<HeisKey>> {
    pushforward(sys.gl(), sys, x, "s", |a| {
        HeisElt::new(a.clone(), vec![PInt::zero(), PInt::zero()])
    })
}

/// φ: projection onto the matrix part, (A, a) ↦ A (left-coset pushforward
/// with uniform fiber count — checked, never assumed).
pub fn phi_map(sys: &HeisSystem, x: &HeckeElement<HeisKey>) -> Result<HeckeElement<GLKey>> {
    pushforward(sys, sys.gl(), x, "phi", |e| e.mat.clone())
}

/// θ: the dilation (A, a) ↦ (A, p·a), conjugation by (pI, 0).
pub fn theta_map(sys: &HeisSystem, x: &HeckeElement<HeisKey>) -> Result<HeckeElement<HeisKey>> {
    let p = PInt::from(sys.p());
    pushforward(sys, sys, x, "theta", |e| {
        HeisElt::new(e.mat.clone(), e.tr.iter().map(|t| t * &p).collect())
    })
}

/// A polynomial Σ_j a_j θ^j with lattice-ring coefficients.  It acts on the
/// Heisenberg ring but is never multiplied inside it.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct ThetaPoly {
    terms: BTreeMap<u32, HeckeElement<GLKey>>,
}

impl ThetaPoly {
    pub fn new() -> Self {
        Self::default()
    }

    /// The monomial a·θ^j.
    pub fn monomial(j: u32, a: HeckeElement<GLKey>) -> Self {
        let mut q = Self::new();
        q.add(j, a);
        q
    }

    pub fn add(&mut self, j: u32, a: HeckeElement<GLKey>) {
        if a.is_zero() {
            return;
        }
        let slot = self.terms.entry(j).or_default();
        *slot = slot.add(&a);
        if slot.is_zero() {
            self.terms.remove(&j);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&u32, &HeckeElement<GLKey>)> {
        self.terms.iter()
    }
}

/// Module action (Σ_j a_j θ^j)·m = Σ_j s(a_j)·θ^j(m), with s(a_j) multiplied
/// on the LEFT.
pub fn module_action(
    sys: &HeisSystem,
    q: &ThetaPoly,
    m: &HeckeElement<HeisKey>,
) -> Result<HeckeElement<HeisKey>> {
    let mut acc = HeckeElement::zero();
    let mut power = m.clone(); // θ^cur applied to m
    let mut cur = 0u32;
    for (&j, a) in q.terms() {
        while cur < j {
            power = theta_map(sys, &power)?;
            cur += 1;
        }
        acc = acc.add(&hecke_mul(sys, &s_map(sys, a)?, &power)?);
    }
    Ok(acc)
}

/// Check the square-index series identity at p: with g(θ; Y) = θ² − T(1,p)·θ·Y
/// + p·T(p,p)·Y² evaluated at Y = pX², the product g(θ; pX²)·P(X) is 1.
/// Written out per even degree 2m ≤ N:
///
///   θ²(T(p^{2m})) − p·s(T(1,p))·θ(T(p^{2m−2})) + p³·s(T(p,p))·T(p^{2m−4})
///     = δ_{m,0}·unit,
///
/// with negative-exponent terms omitted; odd-degree coefficients vanish.
pub fn verify_heis_identity(p: u64, n: u32) -> Result<Report> {
    if !is_prime(p) {
        return Err(Error::Usage(format!("p = {p} is not prime")));
    }
    if n % 2 != 0 {
        return Err(Error::Usage(format!(
            "truncation degree must be even, got N = {n}"
        )));
    }
    let sys = heis_system(p);
    let mut report = Report::new("heisenberg", format!("p={p} N={n}"));

    for k in (1..=n).step_by(2) {
        let t = t_index(&sys, k);
        if t.is_zero() {
            report.pass(format!("coefficient of X^{k} vanishes (odd index)"));
        } else {
            report.fail(
                format!("coefficient of X^{k} vanishes (odd index)"),
                format!("got {t}"),
            );
        }
    }

    // The three coefficients of g(θ; pX²), as θ-polynomials at X⁰, X², X⁴.
    let unit_gl = HeckeElement::from_key(sys.gl().zero_key());
    let g = [
        (0u32, ThetaPoly::monomial(2, unit_gl)),
        (
            2,
            ThetaPoly::monomial(1, t_elementary(2, p, 1)?.scaled(&-PInt::from(p))),
        ),
        (
            4,
            ThetaPoly::monomial(0, t_elementary(2, p, 2)?.scaled(&p_pow(p, 3))),
        ),
    ];
    let unit = HeckeElement::from_key(sys.identity_key());
    for m in 0..=(n / 2) {
        let mut got = HeckeElement::zero();
        for (deg, q) in &g {
            if 2 * m >= *deg {
                got = got.add(&module_action(&sys, q, &t_index(&sys, 2 * m - deg))?);
            }
        }
        let want = if m == 0 { unit.clone() } else { HeckeElement::zero() };
        let name = format!("coefficient of X^{} in g(θ;pX²)·P", 2 * m);
        if got == want {
            report.pass(name);
        } else {
            report.fail(name, format!("expected {want}, got {got}"));
        }
    }
    Ok(report)
}

/// Report-only search for a noncommuting pair of double cosets with combined
/// index valuation at most `max_val`.  Nothing is asserted either way; the
/// first witness in key order is recorded if one exists.
pub fn noncommutativity_probe(p: u64, max_val: u32) -> Result<Report> {
    let sys = heis_system(p);
    let mut keys: Vec<HeisKey> = Vec::new();
    for v in (2..=max_val).step_by(2) {
        keys.extend(sys.all_doubles(v));
    }
    let mut witness = None;
    'search: for a in &keys {
        for b in &keys {
            if sys.key_valuation(a) + sys.key_valuation(b) > max_val || b < a {
                continue;
            }
            let ta = HeckeElement::from_key(a.clone());
            let tb = HeckeElement::from_key(b.clone());
            let ab = hecke_mul(&sys, &ta, &tb)?;
            let ba = hecke_mul(&sys, &tb, &ta)?;
            if ab != ba {
                witness = Some((a.clone(), b.clone(), ab, ba));
                break 'search;
            }
        }
    }
    let mut report = Report::new("noncommutativity", format!("p={p} max-valuation={max_val}"));
    match witness {
        Some((a, b, ab, ba)) => report.note(
            "noncommuting pair",
            format!("T{a}·T{b} = {ab} but T{b}·T{a} = {ba}"),
        ),
        None => report.note(
            "noncommuting pair",
            "none found in the searched range".to_string(),
        ),
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coset::degree;

    fn elt(p: u64, m: [i64; 4], t: [i64; 2]) -> HeisElt {
        HeisElt::from_i64(p, m, t)
    }

    #[test]
    fn composition_law() {
        let p = 3;
        let x = elt(p, [1, 0, 0, 1], [2, 5]);
        let y = elt(p, [1, 0, 0, 1], [-1, 1]);
        assert_eq!(heis_mul(&x, &y), elt(p, [1, 0, 0, 1], [1, 6]));
        // (diag(1,p), 0)·(I, (0,1)) = (diag(1,p), (0,p)): the det(A) factor.
        let a = elt(p, [1, 0, 0, 3], [0, 0]);
        let b = elt(p, [1, 0, 0, 1], [0, 1]);
        assert_eq!(heis_mul(&a, &b), elt(p, [1, 0, 0, 3], [0, 3]));
    }

    #[test]
    fn identity_is_two_sided() {
        let p = 2;
        let e = HeisElt::identity(p);
        let x = elt(p, [2, 1, 0, 4], [3, -1]);
        assert_eq!(heis_mul(&e, &x), x);
        assert_eq!(heis_mul(&x, &e), x);
    }

    #[test]
    fn dilation_is_conjugation_by_scalar() {
        // (pI,0)·(A,a) = (A,pa)·(pI,0), the denominator-free form of
        // conjugation by (pI,0).
        let p = 3;
        let x = elt(p, [3, 1, 0, 9], [2, 7]);
        let scalar = elt(p, [3, 0, 0, 3], [0, 0]);
        let dilated = elt(p, [3, 1, 0, 9], [6, 21]);
        assert_eq!(heis_mul(&scalar, &x), heis_mul(&dilated, &scalar));
    }

    #[test]
    fn canonical_left_examples() {
        let p = 5;
        // Translation by a lattice row vanishes.
        let x = elt(p, [1, 0, 0, 5], [0, 5]);
        assert_eq!(heis_canonical_left(&x), elt(p, [1, 0, 0, 5], [0, 0]));
        let y = elt(p, [1, 0, 0, 5], [0, 1]);
        assert_eq!(heis_canonical_left(&y), y);
        // Idempotence.
        let z = elt(p, [0, 5, 5, 0], [3, 4]);
        let c = heis_canonical_left(&z);
        assert_eq!(heis_canonical_left(&c), c);
    }

    #[test]
    fn canonical_left_absorbs_unit_determinants() {
        // (U, u)·x lands in the same left coset for unimodular U.
        let p = 2;
        let x = elt(p, [2, 1, 0, 2], [1, 0]);
        let g = elt(p, [1, 1, 0, 1], [1, 1]);
        assert_eq!(
            heis_canonical_left(&heis_mul(&g, &x)),
            heis_canonical_left(&x)
        );
        // Left moves with det U = −1 and det U = 5 (units at p = 2).
        let g2 = elt(p, [-1, 0, 0, 1], [0, 1]);
        assert_eq!(
            heis_canonical_left(&heis_mul(&g2, &x)),
            heis_canonical_left(&x)
        );
        let g3 = elt(p, [5, 0, 0, 1], [0, 0]);
        assert_eq!(
            heis_canonical_left(&heis_mul(&g3, &x)),
            heis_canonical_left(&x)
        );
    }

    #[test]
    fn index_valuation_is_even_and_additive() {
        let sys = heis_system(2);
        let x = elt(2, [2, 1, 0, 2], [1, 1]);
        let y = elt(2, [1, 0, 0, 4], [0, 3]);
        assert_eq!(sys.index_valuation(&x), 4);
        assert_eq!(sys.index_valuation(&y), 4);
        assert_eq!(
            sys.index_valuation(&heis_mul(&x, &y)),
            sys.index_valuation(&x) + sys.index_valuation(&y)
        );
    }

    #[test]
    fn orbit_census_at_first_level() {
        for p in [2u64, 3] {
            let sys = heis_system(p);
            let zero = sys.double_key(&elt(p, [1, 0, 0, p as i64], [0, 0]));
            let one = sys.double_key(&elt(p, [1, 0, 0, p as i64], [0, 1]));
            assert_ne!(zero, one);
            assert_eq!(degree(&sys, &zero), PInt::from(p + 1));
            assert_eq!(degree(&sys, &one), PInt::from((p + 1) * (p - 1)));
            assert_eq!(sys.all_doubles(2).len(), 2);
            assert!(sys.all_doubles(3).is_empty());
        }
    }

    #[test]
    fn translations_fix_left_cosets() {
        let p = 3;
        let sys = heis_system(p);
        for key in sys.all_doubles(2) {
            for m in sys.left_cosets(&key) {
                for v in [[1i64, 0], [0, 1]] {
                    let t = elt(p, [1, 0, 0, 1], v);
                    assert_eq!(heis_canonical_left(&heis_mul(&m, &t)), m);
                }
            }
        }
    }

    #[test]
    fn theta_collapses_translations() {
        let p = 2;
        let sys = heis_system(p);
        let nonzero = sys.double_key(&elt(p, [1, 0, 0, 2], [0, 1]));
        let zero = sys.double_key(&elt(p, [1, 0, 0, 2], [0, 0]));
        let img = theta_map(&sys, &HeckeElement::from_key(nonzero)).unwrap();
        assert_eq!(img, HeckeElement::from_key(zero));
    }

    #[test]
    fn morphism_identities_smoke() {
        let p = 2;
        let sys = heis_system(p);
        let t1 = t_elementary(2, p, 1).unwrap();
        let s1 = s_map(&sys, &t1).unwrap();
        assert_eq!(phi_map(&sys, &s1).unwrap(), t1);
        assert_eq!(theta_map(&sys, &s1).unwrap(), s1);
        // φ(T_H(p²)) = p·T(p) on the index-p² sum.
        let th = t_index(&sys, 2);
        let img = phi_map(&sys, &th).unwrap();
        assert_eq!(img, t_index(sys.gl(), 1).scaled(&PInt::from(p)));
    }

    #[test]
    fn local_identity_tiny() {
        assert!(verify_heis_identity(2, 2).unwrap().passed());
    }

    #[test]
    fn odd_truncation_rejected() {
        assert!(verify_heis_identity(2, 3).is_err());
    }

    #[test]
    fn primitive_roots() {
        assert_eq!(primitive_root_mod_p2(3), 2);
        assert_eq!(primitive_root_mod_p2(5), 2);
        assert_eq!(primitive_root_mod_p2(7), 3);
    }
}
