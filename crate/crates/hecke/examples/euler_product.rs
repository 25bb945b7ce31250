//! Global index sums, multiplicativity, and Euler factorization.
//!
//! A global element stores one local double-coset key per prime that acts
//! nontrivially.  The index sums T̂(n) are multiplicative — T̂(m)·T̂(n) =
//! T̂(mn) for coprime m, n — so their formal Dirichlet series factors into
//! local Euler factors; the bundled verifiers check both statements
//! coefficient by coefficient.

use hecke::global::{
    dirichlet_trunc, global_mul, global_t, verify_euler_product, verify_multiplicativity,
    GlobalGl, GlobalHeis,
};

fn main() -> hecke::Result<()> {
    let g = GlobalGl::new(2);
    println!("T̂(4)  = {}", global_t(&g, 4));
    println!("T̂(9)  = {}", global_t(&g, 9));
    let prod = global_mul(&g, &global_t(&g, 4), &global_t(&g, 9))?;
    println!("T̂(4)·T̂(9) = {prod}");
    assert_eq!(prod, global_t(&g, 36));

    // At a prime power the product is genuinely non-trivial.
    println!("T̂(2)·T̂(2) = {}", global_mul(&g, &global_t(&g, 2), &global_t(&g, 2))?);

    let series = dirichlet_trunc(&g, 20);
    println!("series support up to 20: n ∈ {:?}", series.support().map(|(n, _)| n).collect::<Vec<_>>());

    let brief = |r: &hecke::Report| {
        format!(
            "{} — {} ({} checks)",
            r.target,
            if r.passed() { "ok" } else { "FAILED" },
            r.checks.len()
        )
    };
    println!("{}", brief(&verify_multiplicativity(&g, 100)?));
    println!("{}", brief(&verify_euler_product(&g, 100, 6)?));

    // The pair-ring series lives on perfect squares only.
    let gh = GlobalHeis::new();
    let pair = dirichlet_trunc(&gh, 40);
    println!(
        "pair-ring support up to 40: n ∈ {:?}",
        pair.support().map(|(n, _)| n).collect::<Vec<_>>()
    );
    println!("{}", brief(&verify_multiplicativity(&gh, 100)?));
    println!("{}", brief(&verify_euler_product(&gh, 100, 6)?));
    Ok(())
}
