//! Batch runner: one JSON config in, one CSV table per problem out.
//!
//! Exit codes: 0 success, 1 config or I/O error, 2 a problem that needs a
//! certificate has none, 3 a bound was violated during a run.

pub mod config;
pub mod table;

use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::Error;
use crate::maps::{empirical_lip_lower_bound, MapRef};
use crate::solver::{
    certified_iterates, find_p_certificate, find_sup_certificate, generalized_iterates,
    secelean_iterates, solve_gcfp, truncation_study, ContractionCertificate,
};

pub use config::{ConfigFile, Mode, ProblemConfig};
pub use table::{emit_trace, fmt_f64, parse_trace, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_UNCERTIFIED: i32 = 2;
pub const EXIT_BOUND: i32 = 3;

/// Random pairs sampled for the empirical Lipschitz check in `certify` mode.
const CERTIFY_TRIALS: usize = 2_000;

#[derive(Debug, Clone)]
pub struct RunArgs {
    pub config: PathBuf,
    pub out: PathBuf,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemOutcome {
    pub id: String,
    pub mode: Mode,
    pub result: Result<(String, Table), (i32, String)>,
}

impl ProblemOutcome {
    pub fn summary(&self) -> String {
        match &self.result {
            Ok((s, _)) => format!("{} {} {}", self.id, self.mode.as_str(), s),
            Err((_, reason)) => format!("{} {} FAILED {}", self.id, self.mode.as_str(), reason),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match &self.result {
            Ok(_) => EXIT_OK,
            Err((code, _)) => *code,
        }
    }
}

fn failure(e: Error) -> (i32, String) {
    let code = match e {
        Error::Uncertified(_) => EXIT_UNCERTIFIED,
        Error::BoundViolation(_) => EXIT_BOUND,
        _ => EXIT_CONFIG,
    };
    (code, e.to_string())
}

/// The certificate a problem runs under: the configured `q` for linear maps,
/// otherwise whatever [`find_sup_certificate`] derives.
fn certificate_for(p: &ProblemConfig, f: &MapRef) -> Result<Option<ContractionCertificate>, Error> {
    if let (Some(q), Some(lin)) = (p.q, f.as_linear()) {
        let l = lin.lip_sq(q)?;
        return Ok(ContractionCertificate::sup_q(q, l).ok());
    }
    Ok(find_sup_certificate(f.as_ref()))
}

fn require_certificate(p: &ProblemConfig, f: &MapRef) -> Result<ContractionCertificate, Error> {
    certificate_for(p, f)?.ok_or_else(|| {
        Error::Uncertified(match p.q {
            Some(q) => format!("L_s,q >= 1 at the configured q = {q}"),
            None => "no q with L_s,q < 1 could be established".into(),
        })
    })
}

/// Runs one problem in memory.
pub fn run_problem(p: &ProblemConfig, seed: u64) -> ProblemOutcome {
    ProblemOutcome {
        id: p.id.clone(),
        mode: p.mode,
        result: execute(p, seed).map_err(failure),
    }
}

fn execute(p: &ProblemConfig, seed: u64) -> Result<(String, Table), Error> {
    let f = p.build_map()?;
    let x0 = p.initial_seq()?;
    match p.mode {
        Mode::Certify => certify(p, &f, seed),
        Mode::Solve => {
            let cert = require_certificate(p, &f)?;
            let sol = solve_gcfp(f.as_ref(), &x0, &cert, p.tolerance)?;
            Ok((
                format!("x_star={} k_used={}", fmt_f64(sol.x_star), sol.k_used),
                table::trace_table(&sol.trace),
            ))
        }
        Mode::Trace => trace(p, &f),
        Mode::Secelean => secelean(p, &f),
        Mode::Truncate => {
            let cert = require_certificate(p, &f)?;
            let report = truncation_study(&f, &cert, p.base(), p.n_max(), p.tolerance)?;
            let mut t = Table::new(&["n", "x_star_n", "error", "bound"]);
            for r in &report.rows {
                t.push(vec![
                    r.n.to_string(),
                    fmt_f64(r.x_star_n),
                    fmt_f64(r.error),
                    fmt_f64(r.bound),
                ]);
            }
            Ok((
                format!(
                    "x_star={} k_used={}",
                    fmt_f64(report.x_star),
                    report.rows.len()
                ),
                t,
            ))
        }
        Mode::Compare => compare(p, &f),
    }
}

fn certify(p: &ProblemConfig, f: &MapRef, seed: u64) -> Result<(String, Table), Error> {
    let mut t = Table::new(&["kind", "p", "q", "lipschitz", "empirical"]);
    let Some(cert) = certificate_for(p, f)? else {
        return Ok(("uncertified".into(), t));
    };
    let empirical = empirical_lip_lower_bound(f.as_ref(), cert.metric(), CERTIFY_TRIALS, seed)?;
    if empirical > cert.lipschitz() * (1.0 + 1e-9) + 1e-12 {
        return Err(Error::BoundViolation(format!(
            "sampled ratio {empirical} exceeds certified L = {}",
            cert.lipschitz()
        )));
    }
    t.push(vec![
        "sup".into(),
        String::new(),
        fmt_f64(cert.q()),
        fmt_f64(cert.lipschitz()),
        fmt_f64(empirical),
    ]);
    let mut summary = format!("q={} L={}", fmt_f64(cert.q()), fmt_f64(cert.lipschitz()));
    if let Some(lin) = f.as_linear() {
        if let Some(
            pc @ ContractionCertificate::PQ {
                p: pe,
                q,
                lipschitz,
            },
        ) = find_p_certificate(lin, p.q0())?
        {
            let emp = empirical_lip_lower_bound(lin, pc.metric(), CERTIFY_TRIALS, seed)?;
            t.push(vec![
                "p".into(),
                fmt_f64(pe.get()),
                fmt_f64(q),
                fmt_f64(lipschitz),
                fmt_f64(emp),
            ]);
            summary.push_str(&format!(" p={}", pe.get()));
        }
    }
    Ok((format!("certified {summary}"), t))
}

fn trace(p: &ProblemConfig, f: &MapRef) -> Result<(String, Table), Error> {
    let x0 = p.initial_seq()?;
    let k_max = p.k_max();
    let trace = match certificate_for(p, f)? {
        Some(cert) => {
            let trace = certified_iterates(f.as_ref(), &x0, &cert, k_max)?;
            let reference = solve_gcfp(f.as_ref(), &x0, &cert, p.tolerance * 1e-3)?.x_star;
            let slack = p.tolerance * 1e-3 + 1e-12 * (1.0 + reference.abs());
            for r in &trace.rows {
                let bound = r.bound.expect("certified rows carry bounds");
                if (r.x - reference).abs() > bound + slack {
                    return Err(Error::BoundViolation(format!(
                        "|x^{} - x*| = {} exceeds a priori bound {bound}",
                        r.k,
                        (r.x - reference).abs()
                    )));
                }
            }
            trace
        }
        None => generalized_iterates(f.as_ref(), &x0, k_max)?,
    };
    let last = trace.last().expect("k_max >= 1");
    Ok((
        format!("x_k={} k_used={}", fmt_f64(last.x), last.k),
        table::trace_table(&trace),
    ))
}

/// Fixed point of `t ↦ f(t, t, ...)` by Picard iteration, with its error bound.
fn diagonal_fixed_point(f: &MapRef, start: f64, lip: f64) -> Result<(f64, f64), Error> {
    let first = f.diagonal_eval(start)?;
    let gap = (first - start).abs();
    let mut t = first;
    let mut err = lip / (1.0 - lip) * gap;
    let mut n = 1;
    while err > 1e-15 * (1.0 + t.abs()) && n < 10_000 {
        t = f.diagonal_eval(t)?;
        err *= lip;
        n += 1;
    }
    Ok((t, err))
}

fn secelean(p: &ProblemConfig, f: &MapRef) -> Result<(String, Table), Error> {
    let x0 = p.initial_seq()?;
    let steps = secelean_iterates(f.as_ref(), &x0, p.k_max(), None)?;
    let lip = f
        .sup_lipschitz()
        .expect("secelean_iterates checked the constant");
    let (x_star, ref_err) = diagonal_fixed_point(f, x0.tail(), lip)?;
    let mut t = Table::new(&["k", "y_k", "bound"]);
    for s in &steps {
        let slack = ref_err + 1e-12 * (1.0 + x_star.abs());
        if (s.y - x_star).abs() > s.bound + slack {
            return Err(Error::BoundViolation(format!(
                "|y_{} - x*| = {} exceeds bound {}",
                s.k,
                (s.y - x_star).abs(),
                s.bound
            )));
        }
        t.push(vec![s.k.to_string(), fmt_f64(s.y), fmt_f64(s.bound)]);
    }
    let last = steps.last().expect("k_max >= 0");
    Ok((format!("y_k={} k_used={}", fmt_f64(last.y), last.k), t))
}

fn compare(p: &ProblemConfig, f: &MapRef) -> Result<(String, Table), Error> {
    let x0 = p.initial_seq()?;
    let k_max = p.k_max();
    let generalized = generalized_iterates(f.as_ref(), &x0, k_max)?;
    let secelean = secelean_iterates(f.as_ref(), &x0, k_max, None)?;
    let mut t = Table::new(&["k", "generalized", "secelean", "secelean_bound"]);
    for (g, s) in generalized.rows.iter().zip(&secelean[1..]) {
        t.push(vec![
            g.k.to_string(),
            fmt_f64(g.x),
            fmt_f64(s.y),
            fmt_f64(s.bound),
        ]);
    }
    let g_last = generalized.last().expect("k_max >= 1").x;
    let s_last = secelean.last().expect("k_max >= 1").y;
    Ok((
        format!(
            "generalized={} secelean={} k_used={k_max}",
            fmt_f64(g_last),
            fmt_f64(s_last)
        ),
        t,
    ))
}

/// Runs every problem in the config (concurrently), writes `<out>/<id>.csv`
/// for each success, prints one summary line per problem in config order,
/// and returns the most severe exit code.
pub fn run(args: &RunArgs, stdout: &mut dyn Write) -> i32 {
    let bytes = match std::fs::read(&args.config) {
        Ok(b) => b,
        Err(e) => {
            let _ = writeln!(stdout, "error: {}: {e}", args.config.display());
            return EXIT_CONFIG;
        }
    };
    let cfg = match ConfigFile::from_json_slice(&bytes) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(stdout, "error: {}: {e}", args.config.display());
            return EXIT_CONFIG;
        }
    };
    run_config(&cfg, &args.out, args.seed, stdout)
}

pub fn run_config(cfg: &ConfigFile, out: &Path, seed: u64, stdout: &mut dyn Write) -> i32 {
    if cfg.problems.is_empty() {
        return EXIT_OK;
    }
    if let Err(e) = std::fs::create_dir_all(out) {
        let _ = writeln!(stdout, "error: {}: {e}", out.display());
        return EXIT_CONFIG;
    }
    let outcomes: Vec<ProblemOutcome> = cfg
        .problems
        .par_iter()
        .map(|p| {
            let mut o = run_problem(p, seed);
            if let Ok((_, table)) = &o.result {
                let path = out.join(format!("{}.csv", p.id));
                if let Err(e) = table.write_to(&path) {
                    o.result = Err((EXIT_CONFIG, e.to_string()));
                }
            }
            o
        })
        .collect();
    let mut code = EXIT_OK;
    for o in &outcomes {
        let _ = writeln!(stdout, "{}", o.summary());
        code = code.max(o.exit_code());
    }
    code
}
