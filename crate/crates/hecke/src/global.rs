//! The everywhere-local ('global') layer.
//!
//! A full-rank subring α·L of a lattice or Heisenberg algebra decomposes
//! prime by prime, so its double cosets are finitely supported maps
//! p ↦ local key, and the global Hecke element T̂(n) (all images of index n)
//! is the tensor product over p^v ∥ n of the local index sums.  Coefficients
//! of the associated Dirichlet series Σ T̂(n)·n^{-s} are multiplicative —
//! T̂(m)·T̂(n) = T̂(mn) for coprime m, n — and the series factors as an Euler
//! product of the local generating series.
//!
//! The local maps s, φ, θ extend componentwise to ŝ, φ̂, θ̂_p; the dilations
//! at different primes commute.  ψ̂ forgets the θ's (evaluates every θ_p at
//! 1).  The square-index Heisenberg series D̂_H is inverted by a θ-twisted
//! Euler product Î₂(θ), and untwisting recovers the classical rank-2
//! inversion: ψ̂(Î₂(θ)) is Î₂ reindexed n ↦ n² with weight n, φ̂(D̂_H) is the
//! lattice series reindexed the same way, and their product is 1.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::coset::{key_mul, t_index, CosetSystem, HeckeElement};
use crate::gl::{t_elementary, GLKey, GlSystem};
use crate::heis::{phi_map, s_map, theta_map, HeisKey, HeisSystem};
use crate::linalg::{p_pow, PInt};
use crate::report::Report;
use crate::{Error, Result};

/// A finitely supported choice of local double cosets; identity components
/// are never stored.  The empty key is the global unit.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct GlobalKey<K: Ord>(pub BTreeMap<u64, K>);

impl<K: Ord> GlobalKey<K> {
    pub fn unit() -> Self {
        GlobalKey(BTreeMap::new())
    }
}

impl<K: Ord + fmt::Display> fmt::Display for GlobalKey<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.0.iter().map(|(p, k)| format!("p{p}:{k}")).collect();
        write!(f, "{}", parts.join("·"))
    }
}

pub type GlobalElement<K> = HeckeElement<GlobalKey<K>>;

/// A family of local coset systems, one per prime, with a shared tag.
pub trait GlobalSystem {
    type Local: CosetSystem;
    fn tag(&self) -> String;
    fn local(&self, p: u64) -> Arc<Self::Local>;
    /// Whether indices are forced to be perfect squares (the Heisenberg case).
    fn squares_only(&self) -> bool {
        false
    }
}

/// Full lattices in Z^r at every prime.
pub struct GlobalGl {
    r: usize,
    locals: Mutex<HashMap<u64, Arc<GlSystem>>>,
}

impl GlobalGl {
    pub fn new(r: usize) -> Self {
        assert!(r >= 1);
        GlobalGl {
            r,
            locals: Mutex::new(HashMap::new()),
        }
    }

    pub fn r(&self) -> usize {
        self.r
    }
}

impl GlobalSystem for GlobalGl {
    type Local = GlSystem;

    fn tag(&self) -> String {
        format!("gl(r={})", self.r)
    }

    fn local(&self, p: u64) -> Arc<GlSystem> {
        self.locals
            .lock()
            .unwrap()
            .entry(p)
            .or_insert_with(|| Arc::new(GlSystem::new(self.r, p)))
            .clone()
    }
}

/// Heisenberg images at every prime, with the rank-2 lattice family riding
/// along as the coefficient ring of θ-polynomials.
pub struct GlobalHeis {
    locals: Mutex<HashMap<u64, Arc<HeisSystem>>>,
    gl: GlobalGl,
}

impl GlobalHeis {
    pub fn new() -> Self {
        GlobalHeis {
            locals: Mutex::new(HashMap::new()),
            gl: GlobalGl::new(2),
        }
    }

    /// The rank-2 lattice family underlying ŝ, φ̂ and θ-coefficients.
    pub fn gl(&self) -> &GlobalGl {
        &self.gl
    }
}

impl Default for GlobalHeis {
    fn default() -> Self {
        Self::new()
    }
}

impl GlobalSystem for GlobalHeis {
    type Local = HeisSystem;

    fn tag(&self) -> String {
        "heis".to_string()
    }

    fn local(&self, p: u64) -> Arc<HeisSystem> {
        self.locals
            .lock()
            .unwrap()
            .entry(p)
            .or_insert_with(|| Arc::new(HeisSystem::new(p)))
            .clone()
    }

    fn squares_only(&self) -> bool {
        true
    }
}

pub fn primes_upto(b: u64) -> Vec<u64> {
    let mut sieve = vec![true; (b + 1) as usize];
    let mut out = Vec::new();
    for n in 2..=b as usize {
        if sieve[n] {
            out.push(n as u64);
            let mut m = n * n;
            while m <= b as usize {
                sieve[m] = false;
                m += n;
            }
        }
    }
    out
}

fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    assert!(n >= 1);
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            let mut v = 0;
            while n % d == 0 {
                n /= d;
                v += 1;
            }
            out.push((d, v));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn isqrt(n: u64) -> u64 {
    let mut i = 0u64;
    while (i + 1) * (i + 1) <= n {
        i += 1;
    }
    i
}

/// Tensor a local element into a running list of partial global terms.
fn tensor_expand<K: Ord + Clone>(
    acc: Vec<(BTreeMap<u64, K>, PInt)>,
    p: u64,
    identity: &K,
    terms: &[(K, PInt)],
) -> Vec<(BTreeMap<u64, K>, PInt)> {
    let mut out = Vec::with_capacity(acc.len() * terms.len());
    for (gk, c) in &acc {
        for (k, ck) in terms {
            let mut g2 = gk.clone();
            if k != identity {
                g2.insert(p, k.clone());
            }
            out.push((g2, c * ck));
        }
    }
    out
}

fn collect_terms<K: Ord + Clone>(acc: Vec<(BTreeMap<u64, K>, PInt)>) -> GlobalElement<K> {
    HeckeElement::from_terms(acc.into_iter().map(|(gk, c)| (GlobalKey(gk), c)))
}

/// T̂(n): the sum of all double cosets of index exactly n, as the tensor
/// product over p^v ∥ n of the local index sums.  Zero when some local sum is
/// empty (odd local valuation in the Heisenberg family).
pub fn global_t<G: GlobalSystem>(g: &G, n: u64) -> GlobalElement<<G::Local as CosetSystem>::Key> {
    let mut acc = vec![(BTreeMap::new(), PInt::one())];
    for (p, v) in factorize(n) {
        let local = g.local(p);
        let t = t_index(&*local, v);
        if t.is_zero() {
            return HeckeElement::zero();
        }
        let id = local.identity_key();
        let terms: Vec<_> = t.terms().map(|(k, c)| (k.clone(), c.clone())).collect();
        acc = tensor_expand(acc, p, &id, &terms);
    }
    collect_terms(acc)
}

/// Product of two global elements: componentwise local products, distributed
/// over every choice of local output.
pub fn global_mul<G: GlobalSystem>(
    g: &G,
    x: &GlobalElement<<G::Local as CosetSystem>::Key>,
    y: &GlobalElement<<G::Local as CosetSystem>::Key>,
) -> Result<GlobalElement<<G::Local as CosetSystem>::Key>> {
    let mut out = HeckeElement::zero();
    for (ka, ca) in x.terms() {
        for (kb, cb) in y.terms() {
            let primes: BTreeSet<u64> = ka.0.keys().chain(kb.0.keys()).copied().collect();
            let mut acc = vec![(BTreeMap::new(), ca * cb)];
            for p in primes {
                let local = g.local(p);
                let id = local.identity_key();
                let k1 = ka.0.get(&p).unwrap_or(&id);
                let k2 = kb.0.get(&p).unwrap_or(&id);
                let terms = if *k1 == id {
                    vec![(k2.clone(), PInt::one())]
                } else if *k2 == id {
                    vec![(k1.clone(), PInt::one())]
                } else {
                    key_mul(&*local, k1, k2)?
                };
                acc = tensor_expand(acc, p, &id, &terms);
            }
            out = out.add(&collect_terms(acc));
        }
    }
    Ok(out)
}

// ---- truncated Dirichlet series ------------------------------------------

/// A Dirichlet series known through index `bound`; coefficients of any
/// additive type with a zero (`Default`).  Zero coefficients are not stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirichletTrunc<C: Clone + PartialEq + Default> {
    tag: String,
    bound: u64,
    coeffs: BTreeMap<u64, C>,
}

impl<C: Clone + PartialEq + Default> DirichletTrunc<C> {
    pub fn new(tag: impl Into<String>, bound: u64) -> Self {
        assert!(bound >= 1);
        DirichletTrunc {
            tag: tag.into(),
            bound,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn unit(tag: impl Into<String>, bound: u64, one: C) -> Self {
        let mut s = Self::new(tag, bound);
        s.set(1, one);
        s
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn set(&mut self, n: u64, c: C) {
        assert!(1 <= n && n <= self.bound, "index {n} out of range");
        if c == C::default() {
            self.coeffs.remove(&n);
        } else {
            self.coeffs.insert(n, c);
        }
    }

    pub fn coeff(&self, n: u64) -> C {
        self.coeffs.get(&n).cloned().unwrap_or_default()
    }

    pub fn support(&self) -> impl Iterator<Item = (u64, &C)> + '_ {
        self.coeffs.iter().map(|(n, c)| (*n, c))
    }

    /// Dirichlet convolution against a series with possibly different
    /// coefficient type: c(n) = Σ_{d·e=n} mul(a(d), b(e)), truncated at the
    /// smaller bound.  `self` acts on the left.
    pub fn mul_with<D, E, FM, FA>(
        &self,
        other: &DirichletTrunc<D>,
        tag: impl Into<String>,
        mut mulf: FM,
        addf: FA,
    ) -> Result<DirichletTrunc<E>>
    where
        D: Clone + PartialEq + Default,
        E: Clone + PartialEq + Default,
        FM: FnMut(&C, &D) -> Result<E>,
        FA: Fn(&E, &E) -> E,
    {
        let bound = self.bound.min(other.bound);
        let mut slots: BTreeMap<u64, E> = BTreeMap::new();
        for (na, ca) in self.coeffs.iter() {
            for (nb, cb) in other.coeffs.iter() {
                let n = na * nb;
                if n > bound {
                    continue;
                }
                let prod = mulf(ca, cb)?;
                match slots.get(&n) {
                    Some(cur) => {
                        let merged = addf(cur, &prod);
                        slots.insert(n, merged);
                    }
                    None => {
                        slots.insert(n, prod);
                    }
                }
            }
        }
        let mut out = DirichletTrunc::new(tag, bound);
        for (n, c) in slots {
            out.set(n, c);
        }
        Ok(out)
    }

    pub fn map_coeffs<D, F>(
        &self,
        tag: impl Into<String>,
        mut f: F,
    ) -> Result<DirichletTrunc<D>>
    where
        D: Clone + PartialEq + Default,
        F: FnMut(&C) -> Result<D>,
    {
        let mut out = DirichletTrunc::new(tag, self.bound);
        for (n, c) in self.coeffs.iter() {
            out.set(*n, f(c)?);
        }
        Ok(out)
    }
}

/// The series Σ_{n ≤ B} T̂(n)·n^{-s}.
pub fn dirichlet_trunc<G: GlobalSystem>(
    g: &G,
    bound: u64,
) -> DirichletTrunc<GlobalElement<<G::Local as CosetSystem>::Key>> {
    let mut out = DirichletTrunc::new(g.tag(), bound);
    for n in 1..=bound {
        out.set(n, global_t(g, n));
    }
    out
}

/// Convolution of two series over the same global system (tags must agree);
/// the left factor acts first in every coefficient product.
pub fn dirichlet_mul<G: GlobalSystem>(
    g: &G,
    a: &DirichletTrunc<GlobalElement<<G::Local as CosetSystem>::Key>>,
    b: &DirichletTrunc<GlobalElement<<G::Local as CosetSystem>::Key>>,
) -> Result<DirichletTrunc<GlobalElement<<G::Local as CosetSystem>::Key>>> {
    if a.tag() != b.tag() {
        return Err(Error::Mismatch(format!(
            "cannot convolve series over {} with series over {}",
            a.tag(),
            b.tag()
        )));
    }
    a.mul_with(b, a.tag(), |x, y| global_mul(g, x, y), |x, y| x.add(y))
}

fn track_range<K: Ord + Clone>(max_abs: &mut PInt, e: &GlobalElement<K>) {
    for (_, c) in e.terms() {
        let a = c.abs();
        if a > *max_abs {
            *max_abs = a;
        }
    }
}

/// Check T̂(m)·T̂(n) = T̂(mn) for every coprime pair with 2 ≤ m ≤ n, mn ≤ B.
pub fn verify_multiplicativity<G: GlobalSystem>(g: &G, bound: u64) -> Result<Report> {
    let mut report = Report::new("multiplicativity", format!("system={} B={bound}", g.tag()));
    let mut max_abs = PInt::zero();
    for n in 2..=bound {
        let want = global_t(g, n);
        track_range(&mut max_abs, &want);
        let mut splits = 0;
        let mut failure: Option<String> = None;
        for m in 2..=isqrt(n) {
            if n % m != 0 || m.gcd(&(n / m)) != 1 {
                continue;
            }
            splits += 1;
            let got = global_mul(g, &global_t(g, m), &global_t(g, n / m))?;
            track_range(&mut max_abs, &got);
            if got != want && failure.is_none() {
                failure = Some(format!(
                    "T({m})·T({}) = {got}, but T({n}) = {want}",
                    n / m
                ));
            }
        }
        if splits == 0 {
            continue; // prime powers have no coprime splitting
        }
        let name = format!("T(m)·T(n/m) = T({n}) for {splits} coprime splittings");
        match failure {
            None => report.pass(name),
            Some(d) => report.fail(name, d),
        }
    }
    if g.squares_only() {
        let mut ok = true;
        for n in 2..=bound {
            let sq = isqrt(n);
            if sq * sq != n && !global_t(g, n).is_zero() {
                report.fail(
                    "support lies on perfect squares",
                    format!("T({n}) is nonzero"),
                );
                ok = false;
                break;
            }
        }
        if ok {
            report.pass("support lies on perfect squares");
        }
    }
    report.note("coefficient range", format!("|c| <= {max_abs}"));
    Ok(report)
}

/// One Euler factor: Σ_{k ≤ N, p^k ≤ B} T_p(p^k)·(p^k)^{-s}.
fn euler_factor<G: GlobalSystem>(
    g: &G,
    p: u64,
    bound: u64,
    n_max: u32,
) -> DirichletTrunc<GlobalElement<<G::Local as CosetSystem>::Key>> {
    let local = g.local(p);
    let id = local.identity_key();
    let mut out = DirichletTrunc::new(g.tag(), bound);
    let mut n = 1u64;
    for k in 0..=n_max {
        if k > 0 {
            match n.checked_mul(p) {
                Some(m) if m <= bound => n = m,
                _ => break,
            }
        }
        let t = t_index(&*local, k);
        if t.is_zero() {
            continue;
        }
        let terms: Vec<_> = t.terms().map(|(k2, c)| (k2.clone(), c.clone())).collect();
        out.set(n, collect_terms(tensor_expand(
            vec![(BTreeMap::new(), PInt::one())],
            p,
            &id,
            &terms,
        )));
    }
    out
}

/// Compare the truncated series against the product of its Euler factors.
/// N must be deep enough that no p^k ≤ B is lost (N ≥ v_p(n) for all n ≤ B).
pub fn verify_euler_product<G: GlobalSystem>(g: &G, bound: u64, n_max: u32) -> Result<Report> {
    for p in primes_upto(bound) {
        let mut k = 0u32;
        let mut m = 1u64;
        while m <= bound / p {
            m *= p;
            k += 1;
        }
        if k > n_max {
            return Err(Error::Usage(format!(
                "truncation depth N={n_max} loses p^{k} = {m} <= {bound}; need N >= {k}"
            )));
        }
    }
    let mut report = Report::new("euler", format!("system={} B={bound} N={n_max}", g.tag()));
    let series = dirichlet_trunc(g, bound);
    let one = HeckeElement::from_key(GlobalKey::unit());
    let mut product = DirichletTrunc::unit(g.tag(), bound, one);
    for p in primes_upto(bound) {
        product = dirichlet_mul(g, &product, &euler_factor(g, p, bound, n_max))?;
    }
    let mut max_abs = PInt::zero();
    for n in 1..=bound {
        let want = series.coeff(n);
        let got = product.coeff(n);
        track_range(&mut max_abs, &got);
        let name = format!("coefficient at n={n} matches the factor product");
        if got == want {
            report.pass(name);
        } else {
            report.fail(name, format!("product gives {got}, series has {want}"));
        }
    }
    report.note("coefficient range", format!("|c| <= {max_abs}"));
    Ok(report)
}

// ---- componentwise morphisms ---------------------------------------------

fn hat_map<KS, KT>(
    x: &GlobalElement<KS>,
    mut local_image: impl FnMut(u64, &KS) -> Result<Vec<(KT, PInt)>>,
    identity_of: impl Fn(u64) -> KT,
) -> Result<GlobalElement<KT>>
where
    KS: Ord + Clone,
    KT: Ord + Clone,
{
    let mut out = HeckeElement::zero();
    for (gk, c) in x.terms() {
        let mut acc = vec![(BTreeMap::new(), c.clone())];
        for (p, k) in gk.0.iter() {
            let terms = local_image(*p, k)?;
            acc = tensor_expand(acc, *p, &identity_of(*p), &terms);
        }
        out = out.add(&collect_terms(acc));
    }
    Ok(out)
}

/// ŝ: the lattice family embeds componentwise, A ↦ (A, 0) at each prime.
pub fn s_hat(gh: &GlobalHeis, x: &GlobalElement<GLKey>) -> Result<GlobalElement<HeisKey>> {
    hat_map(
        x,
        |p, k| {
            let local = gh.local(p);
            let img = s_map(&local, &HeckeElement::from_key(k.clone()))?;
            Ok(img.terms().map(|(k2, c)| (k2.clone(), c.clone())).collect())
        },
        |p| gh.local(p).identity_key(),
    )
}

/// φ̂: componentwise projection onto matrix parts.
pub fn phi_hat(gh: &GlobalHeis, x: &GlobalElement<HeisKey>) -> Result<GlobalElement<GLKey>> {
    hat_map(
        x,
        |p, k| {
            let local = gh.local(p);
            let img = phi_map(&local, &HeckeElement::from_key(k.clone()))?;
            Ok(img.terms().map(|(k2, c)| (k2.clone(), c.clone())).collect())
        },
        |p| gh.local(p).gl().identity_key(),
    )
}

/// θ̂_p: the dilation at one prime; components away from p are untouched.
pub fn theta_hat_p(
    gh: &GlobalHeis,
    p: u64,
    x: &GlobalElement<HeisKey>,
) -> Result<GlobalElement<HeisKey>> {
    let local = gh.local(p);
    let id = local.identity_key();
    let mut out = HeckeElement::zero();
    for (gk, c) in x.terms() {
        match gk.0.get(&p) {
            None => out = out.add(&HeckeElement::from_terms(vec![(gk.clone(), c.clone())])),
            Some(k) => {
                let img = theta_map(&local, &HeckeElement::from_key(k.clone()))?;
                for (k2, c2) in img.terms() {
                    let mut g2 = gk.0.clone();
                    if *k2 == id {
                        g2.remove(&p);
                    } else {
                        g2.insert(p, k2.clone());
                    }
                    out = out.add(&HeckeElement::from_terms(vec![(GlobalKey(g2), c * c2)]));
                }
            }
        }
    }
    Ok(out)
}

// ---- θ-polynomials --------------------------------------------------------

/// A product ∏ θ_p^{e_p} of dilations at distinct primes; zero exponents are
/// not stored, so the empty monomial is 1.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct ThetaMonomial(pub BTreeMap<u64, u32>);

impl fmt::Display for ThetaMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(p, e)| {
                if *e == 1 {
                    format!("θ{p}")
                } else {
                    format!("θ{p}^{e}")
                }
            })
            .collect();
        write!(f, "{}", parts.join("·"))
    }
}

fn mono_mul(a: &ThetaMonomial, b: &ThetaMonomial) -> ThetaMonomial {
    let mut out = a.0.clone();
    for (p, e) in b.0.iter() {
        *out.entry(*p).or_insert(0) += e;
    }
    ThetaMonomial(out)
}

/// A polynomial in the commuting dilations θ_p with global lattice
/// coefficients.  It acts on global Heisenberg elements; ψ̂ evaluates every
/// θ_p at 1.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct GlobalTheta {
    terms: BTreeMap<ThetaMonomial, GlobalElement<GLKey>>,
}

impl GlobalTheta {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn unit() -> Self {
        Self::monomial(ThetaMonomial::default(), HeckeElement::from_key(GlobalKey::unit()))
    }

    pub fn monomial(m: ThetaMonomial, a: GlobalElement<GLKey>) -> Self {
        let mut q = Self::new();
        q.add(m, a);
        q
    }

    pub fn add(&mut self, m: ThetaMonomial, a: GlobalElement<GLKey>) {
        if a.is_zero() {
            return;
        }
        let slot = self.terms.entry(m.clone()).or_default();
        *slot = slot.add(&a);
        if slot.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ThetaMonomial, &GlobalElement<GLKey>)> {
        self.terms.iter()
    }
}

/// Product of θ-polynomials: exponents add, coefficients multiply in the
/// global lattice family.
pub fn theta_poly_mul(gl: &GlobalGl, a: &GlobalTheta, b: &GlobalTheta) -> Result<GlobalTheta> {
    let mut out = GlobalTheta::new();
    for (ma, ea) in a.terms() {
        for (mb, eb) in b.terms() {
            out.add(mono_mul(ma, mb), global_mul(gl, ea, eb)?);
        }
    }
    Ok(out)
}

/// ψ̂: evaluate every θ_p at 1, keeping the coefficient sum.
pub fn psi_hat(q: &GlobalTheta) -> GlobalElement<GLKey> {
    let mut out = HeckeElement::zero();
    for (_, a) in q.terms() {
        out = out.add(a);
    }
    out
}

/// Action of a θ-polynomial on a global Heisenberg element:
/// (Σ a·∏θ_p^{e_p})·m = Σ ŝ(a)·(∏θ̂_p^{e_p})(m), coefficients on the left.
pub fn theta_act(
    gh: &GlobalHeis,
    q: &GlobalTheta,
    m: &GlobalElement<HeisKey>,
) -> Result<GlobalElement<HeisKey>> {
    let mut out = HeckeElement::zero();
    for (mono, a) in q.terms() {
        let mut img = m.clone();
        for (p, e) in mono.0.iter() {
            for _ in 0..*e {
                img = theta_hat_p(gh, *p, &img)?;
            }
        }
        out = out.add(&global_mul(gh, &s_hat(gh, a)?, &img)?);
    }
    Ok(out)
}

// ---- inverting Euler products --------------------------------------------

/// Î_r: the product over p ≤ B of Σ_{i ≤ r} (−1)^i p^{i(i−1)/2} T_p^{(i)}
/// at n = p^i.  Convolving with the rank-r series gives 1 up to B.
pub fn i_r_trunc(g: &GlobalGl, bound: u64) -> Result<DirichletTrunc<GlobalElement<GLKey>>> {
    let r = g.r();
    let one = HeckeElement::from_key(GlobalKey::unit());
    let mut out = DirichletTrunc::unit(g.tag(), bound, one);
    for p in primes_upto(bound) {
        let mut factor = DirichletTrunc::new(g.tag(), bound);
        let mut n = 1u64;
        for i in 0..=r as u32 {
            if i > 0 {
                match n.checked_mul(p) {
                    Some(m) if m <= bound => n = m,
                    _ => break,
                }
            }
            let t = if i == 0 {
                HeckeElement::from_key(g.local(p).identity_key())
            } else {
                t_elementary(r, p, i as usize)?
            };
            let sign = if i % 2 == 0 { PInt::one() } else { -PInt::one() };
            let scale = sign * p_pow(p, i * (i.saturating_sub(1)) / 2);
            let terms: Vec<_> = t
                .terms()
                .map(|(k, c)| (k.clone(), c * &scale))
                .collect();
            let id = g.local(p).identity_key();
            factor.set(
                n,
                collect_terms(tensor_expand(
                    vec![(BTreeMap::new(), PInt::one())],
                    p,
                    &id,
                    &terms,
                )),
            );
        }
        out = dirichlet_mul(g, &out, &factor)?;
    }
    Ok(out)
}

/// Î₂(θ): the product over p² ≤ B of
/// θ_p² − p·T_p(1,p)·θ_p·(p²)^{-s} + p³·T_p(p,p)·(p⁴)^{-s},
/// a Dirichlet series with θ-polynomial coefficients.  Only primes whose
/// square clears the truncation appear; deeper primes contribute θ_p² ≡ 1
/// after ψ̂ anyway.
pub fn i2_theta_trunc(gh: &GlobalHeis, bound: u64) -> Result<DirichletTrunc<GlobalTheta>> {
    let gl = gh.gl();
    let mut out = DirichletTrunc::unit(gh.tag(), bound, GlobalTheta::unit());
    for p in primes_upto(isqrt(bound)) {
        let mut factor = DirichletTrunc::new(gh.tag(), bound);
        let theta1 = ThetaMonomial(BTreeMap::from([(p, 1u32)]));
        let theta2 = ThetaMonomial(BTreeMap::from([(p, 2u32)]));
        factor.set(
            1,
            GlobalTheta::monomial(theta2, HeckeElement::from_key(GlobalKey::unit())),
        );
        let t1 = single_prime(p, &t_elementary(2, p, 1)?, &-PInt::from(p));
        factor.set(p * p, GlobalTheta::monomial(theta1, t1));
        if let Some(p4) = (p * p).checked_mul(p * p) {
            if p4 <= bound {
                let t2 = single_prime(p, &t_elementary(2, p, 2)?, &p_pow(p, 3));
                factor.set(p4, GlobalTheta::monomial(ThetaMonomial::default(), t2));
            }
        }
        out = out.mul_with(
            &factor,
            gh.tag(),
            |a, b| theta_poly_mul(gl, a, b),
            |a, b| {
                let mut s = a.clone();
                for (m, e) in b.terms() {
                    s.add(m.clone(), e.clone());
                }
                s
            },
        )?;
    }
    Ok(out)
}

fn single_prime(p: u64, t: &HeckeElement<GLKey>, scale: &PInt) -> GlobalElement<GLKey> {
    HeckeElement::from_terms(t.terms().map(|(k, c)| {
        (GlobalKey(BTreeMap::from([(p, k.clone())])), c * scale)
    }))
}

/// Î₂(θ)·D̂_H = 1 up to B, coefficient by coefficient.
pub fn verify_global_identity(bound: u64) -> Result<Report> {
    let gh = GlobalHeis::new();
    let mut report = Report::new("global", format!("B={bound}"));
    let d_h = dirichlet_trunc(&gh, bound);
    let i2 = i2_theta_trunc(&gh, bound)?;
    let product = i2.mul_with(
        &d_h,
        gh.tag(),
        |q, m| theta_act(&gh, q, m),
        |a, b| a.add(b),
    )?;
    let unit = HeckeElement::from_key(GlobalKey::unit());
    let mut max_abs = PInt::zero();
    for n in 1..=bound {
        let got = product.coeff(n);
        track_range(&mut max_abs, &got);
        let want = if n == 1 { unit.clone() } else { HeckeElement::zero() };
        let name = format!("coefficient at n={n} of Î₂(θ)·D̂_H");
        if got == want {
            report.pass(name);
        } else {
            report.fail(name, format!("expected {want}, got {got}"));
        }
    }
    report.note("coefficient range", format!("|c| <= {max_abs}"));
    Ok(report)
}

/// Reindex n ↦ n² with weight n: the image of evaluating a series at 2s−1.
fn reindex_square(
    src: &DirichletTrunc<GlobalElement<GLKey>>,
    bound: u64,
    tag: &str,
) -> DirichletTrunc<GlobalElement<GLKey>> {
    let mut out = DirichletTrunc::new(tag, bound);
    for (n, c) in src.support() {
        if let Some(n2) = n.checked_mul(n) {
            if n2 <= bound {
                out.set(n2, c.scaled(&PInt::from(n)));
            }
        }
    }
    out
}

/// Untwisting the θ's recovers the rank-2 lattice inversion:
///  (i)  ψ̂(Î₂(θ)) is Î₂ reindexed n ↦ n² with weight n;
///  (ii) φ̂(D̂_H) is the rank-2 series reindexed the same way;
///  (iii) their product is 1 up to B.
pub fn verify_recovery(bound: u64) -> Result<Report> {
    let gh = GlobalHeis::new();
    let gl = gh.gl();
    let mut report = Report::new("recovery", format!("B={bound}"));
    let mut max_abs = PInt::zero();

    let i2 = i2_theta_trunc(&gh, bound)?;
    let psi_side = i2.map_coeffs(gl.tag(), |q| Ok(psi_hat(q)))?;
    let reindexed_i2 = reindex_square(&i_r_trunc(gl, isqrt(bound))?, bound, &gl.tag());
    let mut clause = |report: &mut Report,
                      name: String,
                      lhs: &DirichletTrunc<GlobalElement<GLKey>>,
                      rhs: &DirichletTrunc<GlobalElement<GLKey>>| {
        let mut failure = None;
        for n in 1..=bound {
            let a = lhs.coeff(n);
            let b = rhs.coeff(n);
            track_range(&mut max_abs, &a);
            if a != b && failure.is_none() {
                failure = Some(format!("at n={n}: {a} vs {b}"));
            }
        }
        match failure {
            None => report.pass(name),
            Some(d) => report.fail(name, d),
        }
    };

    clause(
        &mut report,
        "ψ̂(Î₂(θ)) equals Î₂ at 2s−1".to_string(),
        &psi_side,
        &reindexed_i2,
    );

    let d_h = dirichlet_trunc(&gh, bound);
    let phi_side = d_h.map_coeffs(gl.tag(), |c| phi_hat(&gh, c))?;
    let reindexed_d = reindex_square(&dirichlet_trunc(gl, isqrt(bound)), bound, &gl.tag());
    clause(
        &mut report,
        "φ̂(D̂_H) equals D̂_{Z²} at 2s−1".to_string(),
        &phi_side,
        &reindexed_d,
    );

    let product = dirichlet_mul(gl, &psi_side, &phi_side)?;
    let unit = DirichletTrunc::unit(
        gl.tag(),
        bound,
        HeckeElement::from_key(GlobalKey::<GLKey>::unit()),
    );
    clause(
        &mut report,
        "ψ̂(Î₂(θ))·φ̂(D̂_H) = 1".to_string(),
        &product,
        &unit,
    );

    report.note("coefficient range", format!("|c| <= {max_abs}"));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ExpVector;

    fn ev(e: &[u32]) -> GLKey {
        ExpVector::from_sorted(e.to_vec())
    }

    fn gkey(entries: &[(u64, GLKey)]) -> GlobalKey<GLKey> {
        GlobalKey(entries.iter().cloned().collect())
    }

    #[test]
    fn global_t_small_values() {
        let g = GlobalGl::new(2);
        assert_eq!(
            global_t(&g, 1),
            HeckeElement::from_key(GlobalKey::unit())
        );
        let t4 = global_t(&g, 4);
        assert_eq!(
            t4,
            HeckeElement::from_terms(vec![
                (gkey(&[(2, ev(&[0, 2]))]), PInt::one()),
                (gkey(&[(2, ev(&[1, 1]))]), PInt::one()),
            ])
        );
        let t6 = global_t(&g, 6);
        assert_eq!(
            t6,
            HeckeElement::from_key(gkey(&[(2, ev(&[0, 1])), (3, ev(&[0, 1]))]))
        );
    }

    #[test]
    fn heis_support_is_squares() {
        let g = GlobalHeis::new();
        assert!(global_t(&g, 12).is_zero());
        assert!(global_t(&g, 2).is_zero());
        assert!(!global_t(&g, 36).is_zero());
    }

    #[test]
    fn coprime_multiplicativity_example() {
        let g = GlobalGl::new(2);
        let got = global_mul(&g, &global_t(&g, 4), &global_t(&g, 9)).unwrap();
        assert_eq!(got, global_t(&g, 36));
    }

    #[test]
    fn euler_product_tiny() {
        let g = GlobalGl::new(2);
        assert!(verify_euler_product(&g, 20, 4).unwrap().passed());
        assert!(verify_euler_product(&g, 20, 2).is_err()); // 16 = 2⁴ lost
    }

    #[test]
    fn i_r_inverts_the_series() {
        for r in [1usize, 2] {
            let g = GlobalGl::new(r);
            let inv = i_r_trunc(&g, 20).unwrap();
            let series = dirichlet_trunc(&g, 20);
            let prod = dirichlet_mul(&g, &inv, &series).unwrap();
            for n in 1..=20 {
                let want = if n == 1 {
                    HeckeElement::from_key(GlobalKey::unit())
                } else {
                    HeckeElement::zero()
                };
                assert_eq!(prod.coeff(n), want, "r={r}, n={n}");
            }
        }
    }

    #[test]
    fn i2_theta_coefficient_at_four() {
        let gh = GlobalHeis::new();
        let i2 = i2_theta_trunc(&gh, 25).unwrap();
        // Primes with p² ≤ 25 are 2, 3, 5; the branch at n=4 takes the θ₂
        // term and the θ_q² constants elsewhere.
        let c4 = i2.coeff(4);
        let mono = ThetaMonomial(BTreeMap::from([(2, 1u32), (3, 2), (5, 2)]));
        let want = GlobalTheta::monomial(
            mono,
            HeckeElement::from_terms(vec![(gkey(&[(2, ev(&[0, 1]))]), PInt::from(-2))]),
        );
        assert_eq!(c4, want);
    }

    #[test]
    fn phi_hat_weights_by_index_root() {
        let gh = GlobalHeis::new();
        let got = phi_hat(&gh, &global_t(&gh, 4)).unwrap();
        let want = global_t(gh.gl(), 2).scaled(&PInt::from(2));
        assert_eq!(got, want);
    }

    #[test]
    fn psi_forgets_thetas() {
        let mono = ThetaMonomial(BTreeMap::from([(2, 3u32)]));
        let a = HeckeElement::from_key(gkey(&[(3, ev(&[0, 1]))]));
        let mut q = GlobalTheta::monomial(mono, a.clone());
        q.add(
            ThetaMonomial::default(),
            HeckeElement::from_key(GlobalKey::unit()),
        );
        let flat = psi_hat(&q);
        assert_eq!(
            flat,
            a.add(&HeckeElement::from_key(GlobalKey::unit()))
        );
    }

    #[test]
    fn theta_hats_commute_across_primes() {
        let gh = GlobalHeis::new();
        let x = global_t(&gh, 36);
        let a = theta_hat_p(&gh, 2, &theta_hat_p(&gh, 3, &x).unwrap()).unwrap();
        let b = theta_hat_p(&gh, 3, &theta_hat_p(&gh, 2, &x).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn factorization_helpers() {
        assert_eq!(factorize(1), vec![]);
        assert_eq!(factorize(360), vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(primes_upto(20), vec![2, 3, 5, 7, 11, 13, 17, 19]);
        assert_eq!(isqrt(99), 9);
        assert_eq!(isqrt(100), 10);
    }
}
