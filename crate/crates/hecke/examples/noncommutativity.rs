//! The pair ring is not commutative.
//!
//! Unlike the lattice ring — where Hermite-form tallies make every product
//! symmetric — the pair ring has classes whose products depend on the order.
//! The probe walks class pairs in canonical order and reports the first
//! witness together with both expansions.

use hecke::heis::noncommutativity_probe;
use hecke::{hecke_mul, heis_system, CosetSystem, HeckeElement};

fn main() -> hecke::Result<()> {
    let p = 2u64;
    let sys = heis_system(p);
    let keys = sys.all_doubles(2);
    let a = HeckeElement::from_key(keys[0].clone());
    let b = HeckeElement::from_key(keys[1].clone());
    println!("a·b = {}", hecke_mul(&sys, &a, &b)?);
    println!("b·a = {}", hecke_mul(&sys, &b, &a)?);

    print!("{}", noncommutativity_probe(p, 6)?.render_text());
    Ok(())
}
