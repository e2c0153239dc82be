//! Benchmark protocol: LRTP against LPT, MULTIFIT and DJMS per class.

use std::path::Path;
use std::time::Instant;

use log::{info, warn};
use num_traits::ToPrimitive;
use rayon::prelude::*;

use super::{lrtp_solve, LrtpConfig};
use crate::baselines::{djms, lpt, multifit, MultifitParams};
use crate::instance::{family_classes, generate_class, ClassSpec, Family};
use crate::Rational;

pub const CSV_HEADER: [&str; 8] = ["family", "m", "n", "U", "better", "equal", "avg_quot", "avg_time"];

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub family: Family,
    pub m: usize,
    pub n: usize,
    /// Processing time interval, e.g. `[1,20]`.
    pub u: String,
    pub better: usize,
    pub equal: usize,
    /// LRTP makespan sum over the smallest baseline makespan sum.
    pub avg_quot: f64,
    /// Mean LRTP wall time in seconds.
    pub avg_time: f64,
    pub instances: usize,
    /// Instances where LRTP returned an error; left out of the other columns.
    pub failures: usize,
}

/// `(better, equal, quotient)` from per-instance makespans.
pub fn summarize(lrtp: &[Rational], lpt: &[Rational], mf: &[Rational], djms: &[Rational]) -> (usize, usize, f64) {
    let mut better = 0;
    let mut equal = 0;
    for k in 0..lrtp.len() {
        let base = [&lpt[k], &mf[k], &djms[k]].into_iter().min().unwrap();
        if lrtp[k] < *base {
            better += 1;
        } else if lrtp[k] == *base {
            equal += 1;
        }
    }
    let sum = |v: &[Rational]| v.iter().cloned().sum::<Rational>();
    let base = [sum(lpt), sum(mf), sum(djms)].into_iter().min().unwrap();
    let quot = if base == Rational::from_integer(0.into()) {
        1.0
    } else {
        (sum(lrtp) / base).to_f64().unwrap_or(f64::NAN)
    };
    (better, equal, quot)
}

struct Run {
    lrtp: Option<(Rational, f64)>,
    lpt: Rational,
    mf: Rational,
    djms: Rational,
}

pub fn bench_class(spec: &ClassSpec, cfg: &LrtpConfig) -> BenchRow {
    let instances = generate_class::<Rational>(spec);
    let runs: Vec<Run> = instances
        .par_iter()
        .enumerate()
        .map(|(k, inst)| {
            let start = Instant::now();
            let lrtp = match lrtp_solve(inst, cfg) {
                Ok(rep) => Some((rep.schedule.makespan(), start.elapsed().as_secs_f64())),
                Err(e) => {
                    warn!("{} m={} n={} instance {k}: {e}", spec.family, spec.m, spec.n);
                    None
                }
            };
            Run {
                lrtp,
                lpt: lpt(inst).makespan(),
                mf: multifit(inst, MultifitParams::default()).makespan(),
                djms: djms(inst).makespan(),
            }
        })
        .collect();
    let ok: Vec<&Run> = runs.iter().filter(|r| r.lrtp.is_some()).collect();
    let col = |f: &dyn Fn(&Run) -> Rational| ok.iter().map(|r| f(r)).collect::<Vec<_>>();
    let lr = col(&|r| r.lrtp.as_ref().unwrap().0.clone());
    let (better, equal, avg_quot) = summarize(&lr, &col(&|r| r.lpt.clone()), &col(&|r| r.mf.clone()), &col(&|r| r.djms.clone()));
    let avg_time = if ok.is_empty() { 0.0 } else { ok.iter().map(|r| r.lrtp.as_ref().unwrap().1).sum::<f64>() / ok.len() as f64 };
    BenchRow {
        family: spec.family,
        m: spec.m,
        n: spec.n,
        u: spec.interval(),
        better,
        equal,
        avg_quot,
        avg_time,
        instances: runs.len(),
        failures: runs.len() - ok.len(),
    }
}

/// Thread pool sized by `PCMAX_WORKERS` when set.
pub fn worker_pool() -> rayon::ThreadPool {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = std::env::var("PCMAX_WORKERS").ok().and_then(|v| v.parse::<usize>().ok()) {
        b = b.num_threads(n);
    }
    b.build().expect("thread pool")
}

/// Runs every class in order and writes the CSV to `out`.
pub fn bench_run(classes: &[ClassSpec], cfg: &LrtpConfig, out: &Path) -> Result<Vec<BenchRow>, csv::Error> {
    let pool = worker_pool();
    let mut rows = Vec::with_capacity(classes.len());
    for spec in classes {
        let row = pool.install(|| bench_class(spec, cfg));
        info!("{} m={} n={} {}: better {} equal {} quot {:.4}", row.family, row.m, row.n, row.u, row.better, row.equal, row.avg_quot);
        rows.push(row);
    }
    let mut w = csv::Writer::from_path(out)?;
    w.write_record(CSV_HEADER)?;
    for r in &rows {
        w.write_record([
            r.family.to_string(),
            r.m.to_string(),
            r.n.to_string(),
            r.u.clone(),
            r.better.to_string(),
            r.equal.to_string(),
            format!("{:.2}", r.avg_quot),
            format!("{:.3}", r.avg_time),
        ])?;
    }
    w.flush()?;
    Ok(rows)
}

/// Class list: `family m n lo hi [count [seed]]` per line, or a bare
/// `family [seed]` for all classes of that family. `#` starts a comment.
pub fn parse_classes(text: &str) -> Result<Vec<ClassSpec>, String> {
    let mut out = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let err = |m: String| format!("line {}: {m}", no + 1);
        let tok: Vec<&str> = line.split_whitespace().collect();
        let family: Family = tok[0].parse().map_err(err)?;
        let num = |k: usize| -> Result<u64, String> { tok[k].parse().map_err(|_| err(format!("bad number {:?}", tok[k]))) };
        match tok.len() {
            1 | 2 => {
                let seed = if tok.len() == 2 { num(1)? } else { 0 };
                out.extend(family_classes(family, seed));
            }
            5..=7 => {
                let mut spec = ClassSpec::new(family, num(1)? as usize, num(2)? as usize, num(3)?, num(4)?);
                if tok.len() > 5 {
                    spec.count = num(5)? as usize;
                }
                if tok.len() > 6 {
                    spec.seed = num(6)?;
                }
                spec.validate().map_err(err)?;
                out.push(spec);
            }
            _ => return Err(err("expected `family m n lo hi [count [seed]]` or `family [seed]`".into())),
        }
    }
    Ok(out)
}
