//! The global inverse identity for the pair ring.
//!
//! The lattice series has a genuine Dirichlet inverse Î₂ built from local
//! annihilator coefficients.  The pair-ring analogue Î₂(θ̂) carries monomials
//! in the per-prime dilations θ̂_p; acting with it on the pair series D̂_H
//! through the module structure collapses every coefficient 2 ≤ n ≤ B to
//! zero, leaving the unit.

use hecke::global::{
    dirichlet_trunc, i2_theta_trunc, i_r_trunc, theta_act, verify_global_identity, GlobalGl,
    GlobalHeis,
};

fn main() -> hecke::Result<()> {
    let g = GlobalGl::new(2);
    let inv = i_r_trunc(&g, 20)?;
    println!("lattice inverse series coefficients:");
    for (n, c) in inv.support() {
        println!("  n={n}: {c}");
    }

    let gh = GlobalHeis::new();
    let inv_theta = i2_theta_trunc(&gh, 30)?;
    println!("pair inverse series (θ̂-weighted) up to 30:");
    for (n, q) in inv_theta.support() {
        for (mono, a) in q.terms() {
            println!("  n={n}: [{mono}]·({a})");
        }
    }

    // Multiply the two series: Cauchy convolution with the θ̂-action as the
    // coefficient product.
    let pair = dirichlet_trunc(&gh, 30);
    let mut residual_ok = true;
    for n in 2..=30u64 {
        let mut acc = hecke::HeckeElement::zero();
        for (d, q) in inv_theta.support() {
            if n % d == 0 && n / d <= pair.bound() {
                acc = acc.add(&theta_act(&gh, q, &pair.coeff(n / d))?);
            }
        }
        residual_ok &= acc.is_zero();
    }
    println!("hand-rolled convolution vanishes for 2 ≤ n ≤ 30: {residual_ok}");

    let report = verify_global_identity(100)?;
    println!(
        "full verification to 100: {} ({} checks)",
        if report.passed() { "ok" } else { "FAILED" },
        report.checks.len()
    );
    Ok(())
}
