//! The generic Hecke-ring engine.
//!
//! A `CosetSystem` describes a monoid Δ together with a subgroup Γ acting by
//! left and right multiplication: elements, canonical left-coset forms, double
//! cosets and their left-coset decompositions.  On top of that contract this
//! module provides the ring of formal integer combinations of double cosets,
//! with the classical tally product: to multiply ΓαΓ by ΓβΓ, decompose both
//! into left cosets Γα_i, Γβ_j, canonicalize every product α_i·β_j, and read
//! off the number of pairs landing in each left coset.  That tally is constant
//! across the left cosets of each output double coset; the engine checks this
//! uniformity (and the completeness of each output orbit) unless a system opts
//! out for speed.
//!
//! The tally check is not a formality: the same machinery implements maps
//! between different systems (`pushforward`), where constancy of the fiber
//! count is exactly well-definedness of the induced map on Hecke rings.

use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::hash::Hash;

use crate::linalg::PInt;
use crate::{Error, Result};

/// Behavioral contract of a coset system (Γ, Δ) at a prime p.
///
/// Implementations must keep `canonical_left` idempotent and constant on left
/// cosets, return `left_cosets` sorted ascending and pairwise distinct, and
/// make `index_valuation` additive under `elt_mul`.
pub trait CosetSystem {
    /// Monoid element (a concrete matrix-like representative).
    type Elt: Clone + Ord + fmt::Debug;
    /// Canonical double-coset label.
    type Key: Clone + Ord + Hash + fmt::Debug + fmt::Display;

    fn p(&self) -> u64;
    /// Stable identifier, e.g. `gl(r=2,p=3)`; used in error messages, series
    /// compatibility checks and cache records.
    fn tag(&self) -> String;
    fn identity(&self) -> Self::Elt;
    fn elt_mul(&self, x: &Self::Elt, y: &Self::Elt) -> Self::Elt;
    fn canonical_left(&self, x: &Self::Elt) -> Self::Elt;
    /// v_p of the lattice index [L_p : L_p^x].
    fn index_valuation(&self, x: &Self::Elt) -> u32;
    /// Index valuation shared by every element of the double coset.
    fn key_valuation(&self, k: &Self::Key) -> u32;
    fn double_key(&self, x: &Self::Elt) -> Self::Key;
    /// Every canonical left-coset representative of the double coset, sorted.
    fn left_cosets(&self, k: &Self::Key) -> Vec<Self::Elt>;
    /// Every double-coset key of the given index valuation, sorted.
    fn all_doubles(&self, v: u32) -> Vec<Self::Key>;

    fn identity_key(&self) -> Self::Key {
        self.double_key(&self.identity())
    }
    /// Whether products verify tally uniformity (on by default; a CLI flag
    /// disables it for speed).
    fn check_uniformity(&self) -> bool {
        true
    }
    /// Memo hook: a previously computed key product, if any.
    fn cached_product(&self, _a: &Self::Key, _b: &Self::Key) -> Option<Vec<(Self::Key, PInt)>> {
        None
    }
    /// Memo hook: record a computed key product.
    fn store_product(&self, _a: &Self::Key, _b: &Self::Key, _v: &[(Self::Key, PInt)]) {}
}

/// Finitely supported integer combination of double-coset keys; the element
/// of the Hecke ring.  Zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct HeckeElement<K: Ord + Clone> {
    terms: BTreeMap<K, PInt>,
}

impl<K: Ord + Clone> HeckeElement<K> {
    pub fn zero() -> Self {
        HeckeElement { terms: BTreeMap::new() }
    }

    /// The basis element T(key) with coefficient 1.
    pub fn from_key(k: K) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(k, PInt::one());
        HeckeElement { terms }
    }

    pub fn from_terms<I: IntoIterator<Item = (K, PInt)>>(it: I) -> Self {
        let mut e = Self::zero();
        for (k, c) in it {
            e.add_term(k, c);
        }
        e
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, k: &K) -> PInt {
        self.terms.get(k).cloned().unwrap_or_else(PInt::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&K, &PInt)> {
        self.terms.iter()
    }

    pub fn keys(&self) -> impl Iterator<Item = &K> {
        self.terms.keys()
    }

    /// Accumulate c·T(k), dropping the term if the coefficient cancels.
    pub fn add_term(&mut self, k: K, c: PInt) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(k) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in rhs.terms() {
            out.add_term(k.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in rhs.terms() {
            out.add_term(k.clone(), -c.clone());
        }
        out
    }

    pub fn scaled(&self, c: &PInt) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        HeckeElement {
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect(),
        }
    }
}

impl<K: Ord + Clone> Default for HeckeElement<K> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<K: Ord + Clone + fmt::Display> fmt::Display for HeckeElement<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (k, c)) in self.terms.iter().enumerate() {
            let neg = c < &PInt::zero();
            let mag = if neg { -c.clone() } else { c.clone() };
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if !mag.is_one() {
                write!(f, "{mag}·")?;
            }
            write!(f, "T{k}")?;
        }
        Ok(())
    }
}

/// Structure constants of T(a)·T(b): the sorted list of (key, coefficient).
///
/// Consults the system's memo hooks first; on a miss, tallies all pairwise
/// left-coset products.  With uniformity checking on, the tally is verified to
/// be constant and complete on every output double coset — a non-uniform tally
/// is an engine invariant breach, reported as `Error::IllDefined`.
pub fn key_mul<S: CosetSystem>(s: &S, a: &S::Key, b: &S::Key) -> Result<Vec<(S::Key, PInt)>> {
    if let Some(v) = s.cached_product(a, b) {
        return Ok(v);
    }
    let la = s.left_cosets(a);
    let lb = s.left_cosets(b);
    let mut tally: BTreeMap<S::Elt, u64> = BTreeMap::new();
    for x in &la {
        for y in &lb {
            let c = s.canonical_left(&s.elt_mul(x, y));
            *tally.entry(c).or_insert(0) += 1;
        }
    }
    let mut groups: BTreeMap<S::Key, BTreeMap<S::Elt, u64>> = BTreeMap::new();
    for (e, c) in tally {
        groups.entry(s.double_key(&e)).or_default().insert(e, c);
    }
    let mut out = Vec::with_capacity(groups.len());
    for (k, g) in groups {
        let c0 = *g.values().next().expect("group is nonempty");
        if s.check_uniformity() {
            let lefts = s.left_cosets(&k);
            let uniform = g.values().all(|&c| c == c0);
            let complete = g.len() == lefts.len() && lefts.iter().all(|e| g.contains_key(e));
            if !uniform || !complete {
                return Err(Error::IllDefined(format!(
                    "tally not constant on left cosets of {k} in T{a}·T{b} over {}",
                    s.tag()
                )));
            }
        }
        // Without the check, c0 is still deterministic: the tally at the
        // minimal left-coset representative present.
        out.push((k, PInt::from(c0)));
    }
    s.store_product(a, b, &out);
    Ok(out)
}

/// Ring product of two Hecke elements (bilinear extension of `key_mul`).
pub fn hecke_mul<S: CosetSystem>(
    s: &S,
    x: &HeckeElement<S::Key>,
    y: &HeckeElement<S::Key>,
) -> Result<HeckeElement<S::Key>> {
    let mut out = HeckeElement::zero();
    for (ka, ca) in x.terms() {
        for (kb, cb) in y.terms() {
            let cc = ca * cb;
            for (k, c) in key_mul(s, ka, kb)? {
                out.add_term(k, c * &cc);
            }
        }
    }
    Ok(out)
}

/// T(p^k): the sum, with coefficient 1, of every double coset of index
/// valuation k.  Empty (zero) when no such coset exists.
pub fn t_index<S: CosetSystem>(s: &S, k: u32) -> HeckeElement<S::Key> {
    HeckeElement::from_terms(s.all_doubles(k).into_iter().map(|k| (k, PInt::one())))
}

/// Number of left cosets inside the double coset — its degree.
pub fn degree<S: CosetSystem>(s: &S, k: &S::Key) -> PInt {
    PInt::from(s.left_cosets(k).len() as u64)
}

/// Degree extended linearly: Σ c_k · deg(k).  Conserved under multiplication.
pub fn element_degree<S: CosetSystem>(s: &S, x: &HeckeElement<S::Key>) -> PInt {
    x.terms().map(|(k, c)| c * degree(s, k)).sum()
}

/// Power series truncated at degree N with Hecke-element coefficients.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TruncSeries<K: Ord + Clone> {
    tag: String,
    coeffs: Vec<HeckeElement<K>>,
}

impl<K: Ord + Clone> TruncSeries<K> {
    /// Wrap explicit coefficients 0..=N (the vector length is N+1).
    pub fn new(tag: String, coeffs: Vec<HeckeElement<K>>) -> Self {
        assert!(!coeffs.is_empty(), "a truncated series has at least X^0");
        TruncSeries { tag, coeffs }
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn truncation(&self) -> u32 {
        (self.coeffs.len() - 1) as u32
    }

    pub fn coeff(&self, k: u32) -> &HeckeElement<K> {
        &self.coeffs[k as usize]
    }

    pub fn coeffs(&self) -> &[HeckeElement<K>] {
        &self.coeffs
    }
}

/// P(X) = Σ_{k=0}^{N} T(p^k)·X^k, the generating series of the system.
pub fn hecke_series<S: CosetSystem>(s: &S, n: u32) -> TruncSeries<S::Key> {
    TruncSeries::new(s.tag(), (0..=n).map(|k| t_index(s, k)).collect())
}

/// Truncated Cauchy product with the left factor's coefficients multiplied on
/// the LEFT — the ring may be noncommutative, so order is preserved.
/// Series from different systems or with different truncations are rejected.
pub fn series_mul<S: CosetSystem>(
    s: &S,
    a: &TruncSeries<S::Key>,
    b: &TruncSeries<S::Key>,
) -> Result<TruncSeries<S::Key>> {
    if a.tag() != b.tag() {
        return Err(Error::Mismatch(format!(
            "series belong to different systems: {} vs {}",
            a.tag(),
            b.tag()
        )));
    }
    if a.truncation() != b.truncation() {
        return Err(Error::Mismatch(format!(
            "series have different truncations: {} vs {}",
            a.truncation(),
            b.truncation()
        )));
    }
    let n = a.truncation();
    let mut coeffs = Vec::with_capacity(n as usize + 1);
    for k in 0..=n {
        let mut c = HeckeElement::zero();
        for i in 0..=k {
            c = c.add(&hecke_mul(s, a.coeff(i), b.coeff(k - i))?);
        }
        coeffs.push(c);
    }
    Ok(TruncSeries::new(a.tag().to_string(), coeffs))
}

/// Image of a Hecke element under the map induced by a Γ-compatible monoid map
/// ω: push every left coset Γx_i of each key to Γ'ω(x_i) and tally.
///
/// The induced map sends T(key) to Σ_γ m_γ·T(γ), where m_γ is the (checked)
/// constant number of source left cosets landing on each left coset of γ.
/// Non-constant fibers mean the candidate ω does not induce a map on Hecke
/// rings at all — that is reported as `Error::IllDefined`, tagged with
/// `label`, and must never fire for the shipped maps.
pub fn pushforward<S: CosetSystem, T: CosetSystem>(
    src: &S,
    dst: &T,
    x: &HeckeElement<S::Key>,
    label: &str,
    f: impl Fn(&S::Elt) -> T::Elt,
) -> Result<HeckeElement<T::Key>> {
    let mut out = HeckeElement::zero();
    for (k, c) in x.terms() {
        let mut tally: BTreeMap<T::Elt, u64> = BTreeMap::new();
        for e in &src.left_cosets(k) {
            *tally.entry(dst.canonical_left(&f(e))).or_insert(0) += 1;
        }
        let mut groups: BTreeMap<T::Key, BTreeMap<T::Elt, u64>> = BTreeMap::new();
        for (e, t) in tally {
            groups.entry(dst.double_key(&e)).or_default().insert(e, t);
        }
        for (gk, g) in groups {
            let lefts = dst.left_cosets(&gk);
            let c0 = *g.values().next().expect("group is nonempty");
            let uniform = g.values().all(|&t| t == c0);
            let complete = g.len() == lefts.len() && lefts.iter().all(|e| g.contains_key(e));
            if !uniform || !complete {
                return Err(Error::IllDefined(format!(
                    "{label}: fiber over {gk} is not uniform (source key {k})"
                )));
            }
            out.add_term(gk, PInt::from(c0) * c);
        }
    }
    Ok(out)
}
