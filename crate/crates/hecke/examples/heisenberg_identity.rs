//! The twisted rationality identity for the pair ring.
//!
//! The pair-ring series Σ T_H(p^{2k})·X^{2k} is not killed by a polynomial
//! with plain ring coefficients: the annihilator lives over the polynomial
//! ring in the dilation endomorphism θ.  Acting with
//! θ² − p·T(0,1)·θ·X² + p³·T(1,1)·X⁴ through the module structure telescopes
//! the series to the unit in degree zero and kills every higher even degree.

use hecke::{hecke_series, heis_system, module_action, t_elementary, verify_heis_identity, PInt,
    HeckeElement, ThetaPoly};

fn main() -> hecke::Result<()> {
    let p = 2u64;
    let sys = heis_system(p);
    let series = hecke_series(&sys, 4);
    println!("pair-ring index sums at p = {p}:");
    for k in [0u32, 2, 4] {
        println!("  X^{k}: {}", series.coeff(k));
    }

    // The three θ-weighted coefficients of the annihilator.
    let unit = HeckeElement::from_key(hecke::ExpVector::from_sorted(vec![0, 0]));
    let mut g0 = ThetaPoly::new();
    g0.add(2, unit);
    let mut g1 = ThetaPoly::new();
    g1.add(1, t_elementary(2, p, 1)?.scaled(&-PInt::from(p)));
    let mut g2 = ThetaPoly::new();
    g2.add(0, t_elementary(2, p, 2)?.scaled(&PInt::from(p * p * p)));

    // Degree-2 coefficient of the product: g0 acts on T_H(p²), g1 on T_H(1).
    let c2 = module_action(&sys, &g0, series.coeff(2))?
        .add(&module_action(&sys, &g1, series.coeff(0))?);
    println!("degree-2 coefficient of the annihilated series: {c2}");
    let _ = g2;

    print!("{}", verify_heis_identity(2, 6)?.render_text());
    print!("{}", verify_heis_identity(3, 4)?.render_text());
    Ok(())
}
