//! Products in the lattice Hecke ring.
//!
//! A double coset is named by the ascending valuations of its elementary
//! divisors, so `T(0,1)` is the class of diag(1,p) and `T(1,1)` the class of
//! p·I.  The product re-expands in that basis by tallying, for each output
//! class, how many pairs of left cosets multiply into one fixed left coset;
//! the engine asserts that count is the same for every choice of target.

use hecke::{element_degree, gl_system, hecke_mul, t_elementary, t_index, HeckeElement, PInt};

fn main() -> hecke::Result<()> {
    let p = 3u64;
    let sys = gl_system(2, p);
    let t1 = t_elementary(2, p, 1)?; // class of diag(1,p)
    let tpp = t_elementary(2, p, 2)?; // class of p·I

    let sq = hecke_mul(&sys, &t1, &t1)?;
    println!("T(0,1)² = {sq}");

    let cube = hecke_mul(&sys, &sq, &t1)?;
    println!("T(0,1)³ = {cube}");

    // The central class only shifts keys: multiplying by p·I adds (1,1).
    println!("T(1,1)·T(0,1)² = {}", hecke_mul(&sys, &tpp, &sq)?);

    // Degrees (left-coset counts) are multiplicative through products.
    let t4 = t_index(&sys, 2); // sum of all classes at index p²
    println!(
        "deg T(0,1) = {}, deg T(0,1)² = {} = {}²",
        element_degree(&sys, &t1),
        element_degree(&sys, &sq),
        element_degree(&sys, &t1),
    );
    println!("T(p²) as an index sum: {t4}");

    // The same recursion the rationality proof uses: T(p^k) in terms of the
    // two generators.
    let t2 = t_index(&sys, 2);
    let rhs = hecke_mul(&sys, &t1, &t_index(&sys, 1))?.sub(
        &hecke_mul(&sys, &tpp, &HeckeElement::from_key(sys.zero_key()))?.scaled(&PInt::from(p)),
    );
    println!("T(1,p)·T(p) − p·T(p,p)·T(1) = {rhs}");
    assert_eq!(t2, rhs);
    Ok(())
}
