//! The `hecke` command-line tool: exact products, truncated series, coset
//! censuses, and the verification battery.
//!
//! Output on stdout is byte-deterministic for a given invocation — documents
//! carry no timestamps and iteration happens in key order, so repeated runs
//! (cold or warm cache, one worker thread or many) print identical bytes.
//! Timing and diagnostics go to stderr.
//!
//! Exit codes: 0 all checks pass, 1 a verification found a counterexample,
//! 2 usage or parse error, 3 an internal well-definedness invariant broke
//! (a tally failed to be constant on the left cosets of a double coset —
//! this should never happen and always deserves a bug report).

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::cache::{default_cache_dir, DiskCache, ProductStore};
use crate::coset::{degree, hecke_mul, hecke_series, CosetSystem, HeckeElement};
use crate::doc;
use crate::gl::{verify_rationality, GlSystem};
use crate::global::{
    verify_euler_product, verify_global_identity, verify_multiplicativity, verify_recovery,
    GlobalGl, GlobalHeis,
};
use crate::heis::{noncommutativity_probe, verify_heis_identity, HeisSystem};
use crate::linalg::is_prime;
use crate::report::Report;
use crate::{Error, Result};

#[derive(Parser)]
#[command(
    name = "hecke",
    version,
    about = "Exact double-coset Hecke rings over p-adic matrix monoids"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,

    /// Emit JSON documents instead of text
    #[arg(long, global = true)]
    json: bool,

    /// Product cache directory (default: $HECKE_CACHE_DIR, then the user
    /// cache directory)
    #[arg(long, global = true, value_name = "DIR")]
    cache_dir: Option<PathBuf>,

    /// Skip the left-coset uniformity re-check during products
    /// (mul/series/double-cosets only; verification always checks)
    #[arg(long, global = true)]
    no_uniformity_check: bool,

    /// Worker threads for independent verification targets
    #[arg(long, global = true, default_value_t = 1, value_name = "K")]
    threads: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SystemKind {
    Gl,
    Heis,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VerifyTarget {
    Rationality,
    Heisenberg,
    Multiplicativity,
    Euler,
    Global,
    Recovery,
    All,
}

#[derive(Subcommand)]
enum Cmd {
    /// Multiply two double cosets and print the structure constants
    Mul {
        #[arg(long, value_enum, default_value_t = SystemKind::Gl)]
        system: SystemKind,
        /// Lattice rank (gl only; heis is rank 2)
        #[arg(long, default_value_t = 2)]
        r: usize,
        #[arg(long, default_value_t = 2)]
        p: u64,
        /// First key: exponents "0,1" (gl) or "a,b,c,d;x,y" (heis)
        key1: String,
        /// Second key, same syntax
        key2: String,
    },
    /// Print the index-generating series Σ T(p^k)·X^k up to X^N
    Series {
        #[arg(long, value_enum, default_value_t = SystemKind::Gl)]
        system: SystemKind,
        #[arg(long, default_value_t = 2)]
        r: usize,
        #[arg(long, default_value_t = 2)]
        p: u64,
        #[arg(long = "N", default_value_t = 6)]
        n: u32,
    },
    /// List the double cosets at one index valuation, with degrees
    DoubleCosets {
        #[arg(long, value_enum, default_value_t = SystemKind::Gl)]
        system: SystemKind,
        #[arg(long, default_value_t = 2)]
        r: usize,
        #[arg(long, default_value_t = 2)]
        p: u64,
        /// Index valuation to enumerate
        #[arg(long = "N")]
        n: u32,
    },
    /// Run a verification battery and report each identity checked
    Verify {
        #[arg(value_enum)]
        target: VerifyTarget,
        #[arg(long)]
        r: Option<usize>,
        #[arg(long)]
        p: Option<u64>,
        #[arg(long = "N")]
        n: Option<u32>,
        /// Dirichlet truncation for the global targets
        #[arg(long, default_value_t = 100)]
        bound: u64,
    },
}

struct Ctx {
    json: bool,
    check: bool,
    threads: usize,
    store: Arc<DiskCache>,
}

pub fn run() -> i32 {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::IllDefined(_) => 3,
                _ => 2,
            }
        }
    }
}

fn execute(cli: Cli) -> Result<i32> {
    let dir = cli
        .cache_dir
        .clone()
        .or_else(|| {
            std::env::var("HECKE_CACHE_DIR")
                .ok()
                .filter(|s| !s.is_empty())
                .map(PathBuf::from)
        })
        .unwrap_or_else(default_cache_dir);
    let ctx = Ctx {
        json: cli.json,
        check: !cli.no_uniformity_check,
        threads: cli.threads.max(1),
        store: Arc::new(DiskCache::new(dir)),
    };
    match cli.cmd {
        Cmd::Mul {
            system,
            r,
            p,
            key1,
            key2,
        } => {
            print!("{}", cmd_mul(&ctx, system, r, p, &key1, &key2)?);
            Ok(0)
        }
        Cmd::Series { system, r, p, n } => {
            print!("{}", cmd_series(&ctx, system, r, p, n)?);
            Ok(0)
        }
        Cmd::DoubleCosets { system, r, p, n } => {
            print!("{}", cmd_double_cosets(&ctx, system, r, p, n)?);
            Ok(0)
        }
        Cmd::Verify {
            target,
            r,
            p,
            n,
            bound,
        } => cmd_verify(&ctx, target, r, p, n, bound),
    }
}

fn ensure_prime(p: u64) -> Result<()> {
    if !is_prime(p) {
        return Err(Error::Usage(format!("p = {p} is not prime")));
    }
    Ok(())
}

fn gl_sys(ctx: &Ctx, r: usize, p: u64) -> Result<GlSystem> {
    ensure_prime(p)?;
    if r < 1 {
        return Err(Error::Usage("rank r must be at least 1".into()));
    }
    let mut sys = GlSystem::new(r, p);
    sys.set_check_uniformity(ctx.check);
    sys.set_store(ctx.store.clone() as Arc<dyn ProductStore>);
    Ok(sys)
}

fn heis_sys(ctx: &Ctx, r: usize, p: u64) -> Result<HeisSystem> {
    ensure_prime(p)?;
    if r != 2 {
        return Err(Error::Usage(format!(
            "the Heisenberg system is rank 2; got --r {r}"
        )));
    }
    let mut sys = HeisSystem::new(p);
    sys.set_check_uniformity(ctx.check);
    sys.set_store(ctx.store.clone() as Arc<dyn ProductStore>);
    Ok(sys)
}

fn cmd_mul(
    ctx: &Ctx,
    system: SystemKind,
    r: usize,
    p: u64,
    key1: &str,
    key2: &str,
) -> Result<String> {
    match system {
        SystemKind::Gl => {
            let sys = gl_sys(ctx, r, p)?;
            let k1 = doc::parse_gl_key(key1, r)?;
            let k2 = doc::parse_gl_key(key2, r)?;
            let prod = hecke_mul(
                &sys,
                &HeckeElement::from_key(k1),
                &HeckeElement::from_key(k2),
            )?;
            if ctx.json {
                Ok(format!(
                    "{}\n",
                    doc::to_json(&doc::element_doc(&sys.tag(), &prod, doc::gl_key_str))
                ))
            } else {
                Ok(format!("{prod}\n"))
            }
        }
        SystemKind::Heis => {
            let sys = heis_sys(ctx, r, p)?;
            let k1 = sys.double_key(&doc::parse_heis_elt(key1, p)?);
            let k2 = sys.double_key(&doc::parse_heis_elt(key2, p)?);
            let prod = hecke_mul(
                &sys,
                &HeckeElement::from_key(k1),
                &HeckeElement::from_key(k2),
            )?;
            if ctx.json {
                Ok(format!(
                    "{}\n",
                    doc::to_json(&doc::element_doc(&sys.tag(), &prod, doc::heis_key_str))
                ))
            } else {
                Ok(format!("{prod}\n"))
            }
        }
    }
}

fn render_series<S: CosetSystem>(
    ctx: &Ctx,
    sys: &S,
    n: u32,
    key_str: impl Fn(&S::Key) -> String,
) -> Result<String> {
    let series = hecke_series(sys, n);
    if ctx.json {
        let coeffs = (0..=n)
            .map(|k| doc::terms_doc(series.coeff(k), &key_str))
            .collect();
        let docu = doc::SeriesDoc {
            schema: doc::SCHEMA_SERIES.to_string(),
            engine: doc::ENGINE.to_string(),
            system: sys.tag(),
            coeffs,
        };
        return Ok(format!("{}\n", doc::to_json(&docu)));
    }
    let mut out = format!("series {} N={n}\n", sys.tag());
    for k in 0..=n {
        out.push_str(&format!("X^{k}: {}\n", series.coeff(k)));
    }
    Ok(out)
}

fn cmd_series(ctx: &Ctx, system: SystemKind, r: usize, p: u64, n: u32) -> Result<String> {
    match system {
        SystemKind::Gl => {
            let sys = gl_sys(ctx, r, p)?;
            render_series(ctx, &sys, n, doc::gl_key_str)
        }
        SystemKind::Heis => {
            let sys = heis_sys(ctx, r, p)?;
            render_series(ctx, &sys, n, doc::heis_key_str)
        }
    }
}

fn render_cosets<S: CosetSystem>(
    ctx: &Ctx,
    sys: &S,
    v: u32,
    key_str: impl Fn(&S::Key) -> String,
) -> String {
    let keys = sys.all_doubles(v);
    if ctx.json {
        let cosets = keys
            .iter()
            .map(|k| doc::CosetDoc {
                key: key_str(k),
                degree: degree(sys, k).to_string(),
            })
            .collect();
        let docu = doc::CosetListDoc {
            schema: doc::SCHEMA_COSETS.to_string(),
            engine: doc::ENGINE.to_string(),
            system: sys.tag(),
            valuation: v,
            cosets,
        };
        return format!("{}\n", doc::to_json(&docu));
    }
    let mut out = format!("double-cosets {} N={v}\n", sys.tag());
    for k in &keys {
        out.push_str(&format!("{k} degree={}\n", degree(sys, k)));
    }
    out
}

fn cmd_double_cosets(ctx: &Ctx, system: SystemKind, r: usize, p: u64, v: u32) -> Result<String> {
    match system {
        SystemKind::Gl => Ok(render_cosets(ctx, &gl_sys(ctx, r, p)?, v, doc::gl_key_str)),
        SystemKind::Heis => Ok(render_cosets(
            ctx,
            &heis_sys(ctx, r, p)?,
            v,
            doc::heis_key_str,
        )),
    }
}

// ---- verify ---------------------------------------------------------------

type Job = Box<dyn FnOnce() -> Result<Report> + Send>;

/// Depth needed so the Euler factors of every prime reach the bound.
fn needed_depth(bound: u64) -> u32 {
    let mut k = 0;
    let mut m = 1u64;
    while m <= bound / 2 {
        m *= 2;
        k += 1;
    }
    k
}

fn verify_jobs(
    target: VerifyTarget,
    r: Option<usize>,
    p: Option<u64>,
    n: Option<u32>,
    bound: u64,
) -> Result<Vec<(String, Job)>> {
    if bound < 1 {
        return Err(Error::Usage("--bound must be at least 1".into()));
    }
    let mut jobs: Vec<(String, Job)> = Vec::new();
    let rationality = |jobs: &mut Vec<(String, Job)>, r: usize, p: u64, n: u32| {
        jobs.push((
            format!("rationality r={r} p={p} N={n}"),
            Box::new(move || verify_rationality(r, p, n)),
        ));
    };
    let heisenberg = |jobs: &mut Vec<(String, Job)>, p: u64, n: u32| {
        jobs.push((
            format!("heisenberg p={p} N={n}"),
            Box::new(move || verify_heis_identity(p, n)),
        ));
    };
    let multiplicativity = |jobs: &mut Vec<(String, Job)>, r: usize, b: u64| {
        jobs.push((
            format!("multiplicativity gl(r={r}) B={b}"),
            Box::new(move || verify_multiplicativity(&GlobalGl::new(r), b)),
        ));
        jobs.push((
            format!("multiplicativity heis B={b}"),
            Box::new(move || verify_multiplicativity(&GlobalHeis::new(), b)),
        ));
    };
    let euler = |jobs: &mut Vec<(String, Job)>, r: usize, b: u64, depth: u32| {
        jobs.push((
            format!("euler gl(r={r}) B={b} N={depth}"),
            Box::new(move || verify_euler_product(&GlobalGl::new(r), b, depth)),
        ));
        jobs.push((
            format!("euler heis B={b} N={depth}"),
            Box::new(move || verify_euler_product(&GlobalHeis::new(), b, depth)),
        ));
    };
    match target {
        VerifyTarget::Rationality => {
            rationality(&mut jobs, r.unwrap_or(2), p.unwrap_or(2), n.unwrap_or(5));
        }
        VerifyTarget::Heisenberg => {
            heisenberg(&mut jobs, p.unwrap_or(2), n.unwrap_or(6));
        }
        VerifyTarget::Multiplicativity => {
            multiplicativity(&mut jobs, r.unwrap_or(2), bound);
        }
        VerifyTarget::Euler => {
            euler(
                &mut jobs,
                r.unwrap_or(2),
                bound,
                n.unwrap_or_else(|| needed_depth(bound)),
            );
        }
        VerifyTarget::Global => {
            jobs.push((
                format!("global B={bound}"),
                Box::new(move || verify_global_identity(bound)),
            ));
        }
        VerifyTarget::Recovery => {
            jobs.push((
                format!("recovery B={bound}"),
                Box::new(move || verify_recovery(bound)),
            ));
        }
        VerifyTarget::All => {
            for (r2, p2, n2) in [(2, 2, 5), (2, 3, 5), (2, 5, 5), (3, 2, 3)] {
                rationality(&mut jobs, r2, p2, n2);
            }
            heisenberg(&mut jobs, 2, 6);
            heisenberg(&mut jobs, 3, 4);
            multiplicativity(&mut jobs, 2, bound);
            euler(&mut jobs, 2, bound, needed_depth(bound));
            jobs.push((
                format!("global B={bound}"),
                Box::new(move || verify_global_identity(bound)),
            ));
            jobs.push((
                format!("recovery B={bound}"),
                Box::new(move || verify_recovery(bound)),
            ));
            jobs.push((
                "noncommutativity p=2 val<=6".to_string(),
                Box::new(|| noncommutativity_probe(2, 6)),
            ));
        }
    }
    Ok(jobs)
}

/// Run jobs on up to `threads` workers; results come back in job order, so
/// the rendered output is independent of the thread count.
fn run_jobs(jobs: Vec<(String, Job)>, threads: usize) -> Vec<(String, Result<Report>, f64)> {
    let n = jobs.len();
    let mut labels = Vec::with_capacity(n);
    let slots: Vec<Mutex<Option<Job>>> = jobs
        .into_iter()
        .map(|(label, job)| {
            labels.push(label);
            Mutex::new(Some(job))
        })
        .collect();
    let results: Vec<Mutex<Option<(Result<Report>, f64)>>> =
        (0..n).map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..threads.min(n).max(1) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= n {
                    break;
                }
                let job = slots[i].lock().unwrap().take().expect("job taken once");
                let t0 = Instant::now();
                let out = job();
                *results[i].lock().unwrap() = Some((out, t0.elapsed().as_secs_f64()));
            });
        }
    });
    labels
        .into_iter()
        .zip(results)
        .map(|(label, slot)| {
            let (out, dt) = slot.into_inner().unwrap().expect("job ran");
            (label, out, dt)
        })
        .collect()
}

#[derive(Serialize)]
struct ReportListDoc {
    schema: String,
    engine: String,
    reports: Vec<Report>,
}

fn cmd_verify(
    ctx: &Ctx,
    target: VerifyTarget,
    r: Option<usize>,
    p: Option<u64>,
    n: Option<u32>,
    bound: u64,
) -> Result<i32> {
    let jobs = verify_jobs(target, r, p, n, bound)?;
    let outcomes = run_jobs(jobs, ctx.threads);
    let mut reports = Vec::with_capacity(outcomes.len());
    for (label, out, dt) in outcomes {
        eprintln!("# {label}: {dt:.3}s");
        reports.push(out?);
    }
    let ok = reports.iter().all(|r| r.passed());
    if ctx.json {
        let docu = ReportListDoc {
            schema: doc::SCHEMA_REPORT.to_string(),
            engine: doc::ENGINE.to_string(),
            reports,
        };
        println!("{}", doc::to_json(&docu));
    } else {
        let mut first = true;
        for r in &reports {
            if !first {
                println!();
            }
            first = false;
            print!("{}", r.render_text());
        }
    }
    Ok(if ok { 0 } else { 1 })
}
