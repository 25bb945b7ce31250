//! Recovering the lattice identity from the pair identity.
//!
//! Setting every dilation θ̂_p to 1 (the map ψ̂) turns the θ̂-weighted pair
//! inverse into a plain series, and forgetting translations (φ̂) turns the
//! pair series into a lattice series.  Both land on the rank-2 lattice data
//! reindexed n ↦ n² — the substitution s ↦ 2s−1 in classical notation — and
//! their product is the unit series again.

use hecke::global::{
    dirichlet_mul, dirichlet_trunc, i2_theta_trunc, phi_hat, psi_hat, verify_recovery, GlobalGl,
    GlobalHeis, GlobalSystem,
};

fn main() -> hecke::Result<()> {
    let gh = GlobalHeis::new();
    let g = GlobalGl::new(2);
    let bound = 100u64;

    let collapsed = i2_theta_trunc(&gh, bound)?.map_coeffs(g.tag(), |q| Ok(psi_hat(q)))?;
    println!("ψ̂ of the pair inverse series, small support:");
    for (n, c) in collapsed.support().take(4) {
        println!("  n={n}: {c}");
    }

    let projected = dirichlet_trunc(&gh, bound).map_coeffs(g.tag(), |c| phi_hat(&gh, c))?;
    println!("φ̂ of the pair series, small support:");
    for (n, c) in projected.support().take(4) {
        println!("  n={n}: {c}");
    }

    let product = dirichlet_mul(&g, &collapsed, &projected)?;
    let unit_only = (2..=bound).all(|n| product.coeff(n).is_zero());
    println!("ψ̂(inverse)·φ̂(series) has unit coefficient at n=1 and zero beyond: {unit_only}");

    let report = verify_recovery(100)?;
    println!(
        "full recovery check to 100: {} ({} checks)",
        if report.passed() { "ok" } else { "FAILED" },
        report.checks.len()
    );
    Ok(())
}
