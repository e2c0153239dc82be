use std::fs;
use std::path::PathBuf;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use log::warn;

use pcmax::driver::{best_baseline, bench_run, parse_classes, SolveError};
use pcmax::instance::{generate_class, ClassSpec, Family};
use pcmax::rounding::{emit_milp, optimize_scheme, scheme_feasible, RoundingScheme};
use pcmax::scalar::{parse_rational, rational_to_decimal};
use pcmax::{lrtp_solve, parse_instance, write_instance, LrtpConfig, Rational};

#[derive(Parser)]
#[command(name = "pcmax", version, about = "Makespan scheduling on identical parallel machines")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve one instance file with LRTP.
    Solve {
        #[arg(long)]
        input: PathBuf,
        /// Target precision, e.g. 1/4 or 0.2. Taken from the scheme when --scheme is given.
        #[arg(long, value_parser = rational)]
        eps: Option<Rational>,
        #[arg(long, value_parser = rational)]
        eps_prime: Option<Rational>,
        /// Rounding scheme file written by `optimize-rounding --out`.
        #[arg(long)]
        scheme: Option<PathBuf>,
        /// Largest padded FFT volume per solver level.
        #[arg(long)]
        max_fft_volume: Option<u128>,
        /// Wall-clock limit in seconds for the search.
        #[arg(long)]
        time_limit: Option<u64>,
    },
    /// Write random instances of one class to a directory.
    Generate {
        #[arg(long)]
        family: Family,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        lo: u64,
        #[arg(long)]
        hi: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the benchmark protocol over a class file and write a CSV.
    Bench {
        #[arg(long)]
        classes: PathBuf,
        #[arg(long, value_parser = rational)]
        eps: Rational,
        #[arg(long, value_parser = rational)]
        eps_prime: Option<Rational>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Search for the smallest ε admitting a rounding scheme with d sizes.
    OptimizeRounding {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        l: usize,
        #[arg(long, value_parser = rational, default_value = "1/1000000")]
        tol: Rational,
        #[arg(long, value_parser = rational, default_value = "1/10")]
        eps_lo: Rational,
        #[arg(long, value_parser = rational, default_value = "3/10")]
        eps_hi: Rational,
        /// Skip the search and test this ε only.
        #[arg(long, value_parser = rational)]
        eps: Option<Rational>,
        /// Also write the design MILP in LP format.
        #[arg(long)]
        emit_lp: Option<PathBuf>,
        /// Write the witness scheme here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s).ok_or_else(|| format!("not a number: {s:?}"))
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().cmd {
        Cmd::Solve { input, eps, eps_prime, scheme, max_fft_volume, time_limit } => {
            let text = fs::read_to_string(&input).with_context(|| format!("reading {}", input.display()))?;
            let inst = parse_instance(&text).with_context(|| format!("parsing {}", input.display()))?;
            let mut cfg = match (scheme, eps) {
                (Some(path), _) => {
                    let t = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                    let s = RoundingScheme::from_text(&t).with_context(|| format!("parsing {}", path.display()))?;
                    LrtpConfig::new(s.eps().clone()).with_scheme(s)
                }
                (None, Some(e)) => LrtpConfig::new(e),
                (None, None) => bail!("either --eps or --scheme is required"),
            };
            if let Some(e) = eps_prime {
                cfg.eps_prime = e;
            }
            if let Some(v) = max_fft_volume {
                cfg.max_fft_volume = v;
            }
            cfg.time_limit = time_limit.map(Duration::from_secs);
            let schedule = match lrtp_solve(&inst, &cfg) {
                Ok(rep) => rep.schedule,
                Err(SolveError::Resource(msg)) => {
                    warn!("{msg}; printing the best baseline schedule");
                    best_baseline(&inst)
                }
                Err(e) => return Err(e.into()),
            };
            print!("{schedule}");
        }
        Cmd::Generate { family, m, n, lo, hi, count, seed, out } => {
            let spec = ClassSpec { family, m, n, lo, hi, count, seed };
            spec.validate().map_err(anyhow::Error::msg)?;
            fs::create_dir_all(&out)?;
            for (k, inst) in generate_class::<Rational>(&spec).iter().enumerate() {
                let path = out.join(format!("{}_m{m}_n{n}_{lo}-{hi}_{k:03}.txt", family.name()));
                fs::write(&path, write_instance(inst)).with_context(|| format!("writing {}", path.display()))?;
            }
            println!("wrote {count} instances to {}", out.display());
        }
        Cmd::Bench { classes, eps, eps_prime, out } => {
            let text = fs::read_to_string(&classes).with_context(|| format!("reading {}", classes.display()))?;
            let specs = parse_classes(&text).map_err(anyhow::Error::msg)?;
            let mut cfg = LrtpConfig::new(eps);
            if let Some(e) = eps_prime {
                cfg.eps_prime = e;
            }
            cfg.validate()?;
            let rows = bench_run(&specs, &cfg, &out)?;
            for r in &rows {
                let failed = if r.failures > 0 { format!("  ({} failed)", r.failures) } else { String::new() };
                println!(
                    "{:<4}m={:<4}n={:<5}{:<11}better {:>3}  equal {:>3}  quot {:.2}  time {:.3}s{failed}",
                    r.family, r.m, r.n, r.u, r.better, r.equal, r.avg_quot, r.avg_time
                );
            }
            println!("wrote {}", out.display());
        }
        Cmd::OptimizeRounding { d, l, tol, eps_lo, eps_hi, eps, emit_lp, out } => {
            let (eps, scheme) = match eps {
                Some(e) => {
                    let (x, lps) = scheme_feasible(d, l, &e);
                    println!("eps {} feasible {} ({lps} LPs)", rational_to_decimal(&e, 12), x.is_some());
                    (e, None)
                }
                None => {
                    let res = optimize_scheme(d, l, &eps_lo, &eps_hi, &tol)?;
                    println!("eps {} ({} LPs)", rational_to_decimal(&res.eps, 12), res.lps);
                    print!("{}", res.scheme.to_text());
                    (res.eps, Some(res.scheme))
                }
            };
            if let Some(path) = emit_lp {
                fs::write(&path, emit_milp(d, l, &eps)).with_context(|| format!("writing {}", path.display()))?;
            }
            if let Some(path) = out {
                let Some(s) = scheme else { bail!("--out needs a search (drop --eps)") };
                fs::write(&path, s.to_text()).with_context(|| format!("writing {}", path.display()))?;
            }
        }
    }
    Ok(())
}
