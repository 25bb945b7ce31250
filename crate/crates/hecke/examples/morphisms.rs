//! The section, projection, and dilation maps between the two rings.
//!
//! s embeds the lattice ring into the pair ring (translation part zero), φ
//! forgets translations, and θ dilates them by p — conjugation by the scalar
//! pair (pI, 0).  All three are computed as left-coset pushforwards, so the
//! engine checks on every call that the image tally is constant across the
//! fibers.  φ∘s = id, θ∘s = s, φ∘θ = φ, and on full index sums φ picks up a
//! weight: φ(T_H(p^{2k})) = p^k·T(p^k).

use hecke::{
    heis_system, module_action, phi_map, s_map, t_elementary, t_index, theta_map, HeckeElement,
    PInt, ThetaPoly,
};

fn main() -> hecke::Result<()> {
    let p = 2u64;
    let sys = heis_system(p);
    let t1 = t_elementary(2, p, 1)?;

    let lifted = s_map(&sys, &t1)?;
    println!("s(T(0,1))       = {lifted}");
    println!("φ(s(T(0,1)))    = {}", phi_map(&sys, &lifted)?);
    println!("θ(s(T(0,1)))    = {}", theta_map(&sys, &lifted)?);

    let th2 = t_index(&sys, 2);
    println!("T_H(p²)         = {th2}");
    println!("θ(T_H(p²))      = {}", theta_map(&sys, &th2)?);
    println!("φ(T_H(p²))      = {}", phi_map(&sys, &th2)?);
    for k in 1..=3u32 {
        let lhs = phi_map(&sys, &t_index(&sys, 2 * k))?;
        let rhs = t_index(sys.gl(), k).scaled(&PInt::from(p).pow(k));
        assert_eq!(lhs, rhs);
        println!("φ(T_H(p^{})) = p^{k}·T(p^{k})", 2 * k);
    }

    // The pair ring is a module over the lattice ring adjoined θ: a·θ^j
    // sends m to s(a)·θ^j(m).
    let mut q = ThetaPoly::new();
    q.add(0, t1.clone());
    q.add(1, HeckeElement::from_key(hecke::ExpVector::from_sorted(vec![0, 0])));
    let acted = module_action(&sys, &q, &th2)?;
    println!("(T(0,1) + θ)·T_H(p²) = {acted}");
    Ok(())
}
