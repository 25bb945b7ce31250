//! Census of double cosets by index valuation.
//!
//! Lattice side: classes at valuation v are ascending partitions of v into at
//! most r parts, and each class's degree (left-coset count) is a polynomial
//! in p — Gaussian binomials for the elementary classes.  Pair side: classes
//! exist only at even valuations, and the first even level splits into
//! exactly two orbits of degrees p+1 and (p+1)(p−1).

use hecke::{degree, gaussian_binomial, gl_system, heis_system, CosetSystem};

fn main() {
    let p = 3u64;
    let gl = gl_system(2, p);
    println!("lattice classes at p = {p}:");
    for v in 0..=4u32 {
        let keys = gl.all_doubles(v);
        let row: Vec<String> = keys
            .iter()
            .map(|k| format!("T{k} deg {}", degree(&gl, k)))
            .collect();
        println!("  v={v}: {}", row.join(", "));
    }
    println!(
        "elementary degrees are Gaussian binomials: deg T(0,1) = {}, deg T(0,1,1) at r=3: {}",
        gaussian_binomial(2, 1, p),
        gaussian_binomial(3, 2, p),
    );

    let heis = heis_system(p);
    println!("pair classes at p = {p} (odd levels are empty):");
    for v in 0..=6u32 {
        let keys = heis.all_doubles(v);
        if keys.is_empty() {
            println!("  v={v}: —");
            continue;
        }
        let row: Vec<String> = keys
            .iter()
            .map(|k| format!("T{k} deg {}", degree(&heis, k)))
            .collect();
        println!("  v={v}: {}", row.join(", "));
    }
    println!(
        "first even level: degrees {} and {} = (p+1)(p−1)",
        p + 1,
        (p + 1) * (p - 1)
    );
}
