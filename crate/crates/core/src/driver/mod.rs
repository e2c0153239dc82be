//! LRTP: the dual-approximation binary search around the rounding,
//! configuration IP and IP solver pipeline, plus the exact oracle and the
//! benchmark harness.

mod bench;
mod exact;

pub use bench::{bench_class, bench_run, parse_classes, summarize, worker_pool, BenchRow, CSV_HEADER};
pub use exact::{exact_opt, ExactError, EXACT_MAX_JOBS};

use std::collections::HashMap;
use std::time::{Duration, Instant};

use log::{debug, warn};
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::baselines::{djms, lpt, multifit, MultifitParams};
use crate::configip::{build_reduced_ip, expand_solution, schedule_from_configs, ConfSolution};
use crate::instance::{lower_bound, Instance, Schedule};
use crate::jrsolver::{solve_ip, JrError, JrOptions, Strategy};
use crate::preprocess::{classify, pair_huge, HugePairing, JobPartition};
use crate::rounding::{round_jobs, standard_scheme, RoundedInstance, RoundingScheme};
use crate::scalar::ratio;
use crate::Rational;

#[derive(Clone, Debug)]
pub enum SchemeSource {
    /// The boundaries `2^i εT + k ε² 2^i T` with the parity triples.
    Standard,
    /// A precomputed scheme; its sizes are rescaled to every guess `T`.
    Loaded(RoundingScheme),
}

#[derive(Clone, Debug)]
pub struct LrtpConfig {
    pub eps: Rational,
    /// The search stops once `R <= (1+ε′)L`.
    pub eps_prime: Rational,
    pub scheme: SchemeSource,
    pub strategy: Strategy,
    pub max_fft_volume: u128,
    pub max_pair_work: u128,
    pub time_limit: Option<Duration>,
}

impl LrtpConfig {
    pub fn new(eps: Rational) -> Self {
        Self {
            eps,
            eps_prime: ratio(1, 10_000),
            scheme: SchemeSource::Standard,
            strategy: Strategy::Auto,
            max_fft_volume: 1 << 24,
            max_pair_work: 1 << 28,
            time_limit: None,
        }
    }

    /// Uses `scheme` and takes ε from it.
    pub fn with_scheme(mut self, scheme: RoundingScheme) -> Self {
        self.eps = scheme.eps().clone();
        self.scheme = SchemeSource::Loaded(scheme);
        self
    }

    pub fn validate(&self) -> Result<(), SolveError> {
        let half = ratio(1, 2);
        if !self.eps.is_positive() || self.eps >= half {
            return Err(SolveError::Config("ε must lie in (0, 1/2)".into()));
        }
        if !self.eps_prime.is_positive() {
            return Err(SolveError::Config("ε′ must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SolveError {
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("bad configuration: {0}")]
    Config(String),
    #[error("internal inconsistency: {0}")]
    Internal(String),
}

impl From<JrError> for SolveError {
    fn from(e: JrError) -> Self {
        match e {
            JrError::Resource { .. } => SolveError::Resource(e.to_string()),
            other => SolveError::Internal(other.to_string()),
        }
    }
}

/// Reduced IP results keyed by the normalized scheme and the right-hand
/// side; guesses `T` that round the same way share one IP.
#[derive(Default, Debug)]
pub struct IpCache {
    map: HashMap<(String, Vec<i64>), Option<Vec<u64>>>,
    pub hits: usize,
    pub misses: usize,
}

fn scheme_at(cfg: &LrtpConfig, t: &Rational) -> Result<RoundingScheme, SolveError> {
    match &cfg.scheme {
        SchemeSource::Standard => standard_scheme(&cfg.eps, t).map_err(|e| SolveError::Config(e.to_string())),
        SchemeSource::Loaded(s) => Ok(s.scaled(t)),
    }
}

/// One guess of the search: a schedule of makespan at most `(1+ε)T`, or
/// `None` when the IP has no solution (read as `T < OPT`).
pub fn feasible_schedule(
    inst: &Instance<Rational>,
    t: &Rational,
    cfg: &LrtpConfig,
    cache: &mut IpCache,
) -> Result<Option<Schedule<Rational>>, SolveError> {
    if inst.pmax() > *t {
        return Ok(None);
    }
    let mut part: JobPartition<Rational> = classify(inst, t, &cfg.eps).map_err(|e| SolveError::Config(e.to_string()))?;
    // With (1-2ε)T <= T/2 two huge jobs of exactly T/2 fit together, and
    // swapping machine contents shows they may as well share a machine.
    let halves: Vec<usize> = part.huge.iter().copied().filter(|&j| &inst.p()[j] * ratio(2, 1) == *t).collect();
    let doubled: Vec<(usize, Option<usize>)> = halves.chunks_exact(2).map(|c| (c[0], Some(c[1]))).collect();
    part.huge.retain(|j| !doubled.iter().any(|&(a, b)| *j == a || Some(*j) == b));
    let mut pairing = pair_huge(inst, &part);
    for &(a, b) in doubled.iter().rev() {
        pairing.partner.insert(0, (a, b));
    }
    if pairing.partner.len() > inst.m() {
        return Ok(None);
    }
    let scheme = scheme_at(cfg, t)?;
    // Below the smallest size of a loaded scheme a job is treated as small.
    let smallest = scheme.sizes().last().cloned();
    let mut large = Vec::new();
    for &j in &part.large {
        if pairing.consumed.contains(&j) {
            continue;
        }
        match &smallest {
            Some(x) if inst.p()[j] >= *x => large.push((j, inst.p()[j].clone())),
            _ => part.small.push(j),
        }
    }
    let m_eff = inst.m() - pairing.partner.len();
    let (conf, rounded): (ConfSolution, RoundedInstance) = if large.is_empty() {
        (Vec::new(), RoundedInstance { histogram: vec![], job_map: vec![], m_effective: m_eff })
    } else {
        let rounded = round_jobs(&large, &scheme, m_eff).map_err(|e| SolveError::Internal(e.to_string()))?;
        let keep: Vec<bool> = rounded.histogram.iter().map(|&c| c > 0).collect();
        let (small_scheme, map) = scheme.restrict(&keep);
        let rounded = rounded.remap(&map, small_scheme.d());
        let ip = build_reduced_ip(&small_scheme, &rounded);
        let key = (small_scheme.scaled(&Rational::one()).to_text(), ip.rhs().to_vec());
        let sol = match cache.map.get(&key) {
            Some(s) => {
                cache.hits += 1;
                s.clone()
            }
            None => {
                cache.misses += 1;
                let n = inst.n() as u64;
                let opts = JrOptions {
                    l1_bound: n + small_scheme.d() as u64 * n + inst.m() as u64,
                    max_column_l1: None,
                    strategy: cfg.strategy,
                    max_fft_volume: cfg.max_fft_volume,
                    max_pair_work: cfg.max_pair_work,
                };
                let out = solve_ip(&ip.matrix(), ip.rhs(), &opts)?;
                debug!("T={t}: levels {:?}", out.level_counts);
                cache.map.insert(key, out.solution.clone());
                out.solution
            }
        };
        let Some(x) = sol else { return Ok(None) };
        (expand_solution(&ip, &x).map_err(|e| SolveError::Internal(e.to_string()))?, rounded)
    };
    finish(inst, t, cfg, &conf, &rounded, &pairing, &part)
}

fn finish(
    inst: &Instance<Rational>,
    t: &Rational,
    cfg: &LrtpConfig,
    conf: &ConfSolution,
    rounded: &RoundedInstance,
    pairing: &HugePairing,
    part: &JobPartition<Rational>,
) -> Result<Option<Schedule<Rational>>, SolveError> {
    let sched = schedule_from_configs(inst, conf, rounded, pairing, part).map_err(|e| SolveError::Internal(e.to_string()))?;
    // Greedy small jobs only overshoot when every machine already exceeds T.
    let bound = (Rational::one() + &cfg.eps) * t;
    if sched.makespan() > bound {
        debug!("T={t}: makespan {} above (1+ε)T", sched.makespan());
        return Ok(None);
    }
    Ok(Some(sched))
}

/// Result of a full LRTP run.
#[derive(Clone, Debug)]
pub struct LrtpReport {
    pub schedule: Schedule<Rational>,
    /// Final bracket.
    pub l: Rational,
    pub r: Rational,
    /// Every guess with its outcome, in order.
    pub guesses: Vec<(Rational, bool)>,
    /// True when the schedule came from a baseline after a failed first guess.
    pub fallback: bool,
    pub cache_hits: usize,
}

/// Best of LPT, MULTIFIT and DJMS (first on ties).
pub fn best_baseline(inst: &Instance<Rational>) -> Schedule<Rational> {
    let mut best = lpt(inst);
    for s in [multifit(inst, MultifitParams::default()), djms(inst)] {
        if s.makespan() < best.makespan() {
            best = s;
        }
    }
    best
}

/// Binary search over `T` in `[LB, 2 LB]`, returning the schedule of the
/// smallest successful guess.
pub fn lrtp_solve(inst: &Instance<Rational>, cfg: &LrtpConfig) -> Result<LrtpReport, SolveError> {
    cfg.validate()?;
    let start = Instant::now();
    let lb = lower_bound(inst);
    let mut l = lb.clone();
    let mut r = &lb * ratio(2, 1);
    let mut cache = IpCache::default();
    let mut guesses = Vec::new();
    let fallback = |l: Rational, r: Rational, guesses: Vec<(Rational, bool)>, why: &str| {
        warn!("{why}; returning the best baseline schedule");
        Ok(LrtpReport { schedule: best_baseline(inst), l, r, guesses, fallback: true, cache_hits: 0 })
    };
    if lb.is_zero() {
        let schedule = lpt(inst);
        return Ok(LrtpReport { schedule, l: lb.clone(), r: lb, guesses, fallback: false, cache_hits: 0 });
    }
    let mut best = match feasible_schedule(inst, &r, cfg, &mut cache) {
        Ok(Some(s)) => {
            guesses.push((r.clone(), true));
            s
        }
        Ok(None) => return fallback(l, r, guesses, "the guess 2·LB was rejected"),
        Err(SolveError::Resource(msg)) => return fallback(l, r, guesses, &format!("resource limit at 2·LB: {msg}")),
        Err(e) => return Err(e),
    };
    let grow = Rational::one() + &cfg.eps_prime;
    while &grow * &l < r {
        if let Some(limit) = cfg.time_limit {
            if start.elapsed() > limit {
                return Err(SolveError::Resource(format!("time limit of {limit:?} reached")));
            }
        }
        let t = (&l + &r) / ratio(2, 1);
        match feasible_schedule(inst, &t, cfg, &mut cache)? {
            Some(s) => {
                guesses.push((t.clone(), true));
                best = s;
                r = t;
            }
            None => {
                guesses.push((t.clone(), false));
                l = t;
            }
        }
    }
    Ok(LrtpReport { schedule: best, l, r, guesses, fallback: false, cache_hits: cache.hits })
}
