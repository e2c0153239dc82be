//! Machine configurations and the compressed configuration IP.
//!
//! A configuration is a multiplicity vector over the sizes of a rounding
//! scheme whose total fits into the capacity. The full configuration IP
//! covers the rounded jobs with at most `m` configurations. The reduced IP
//! keeps only irreducible configurations and adds one column per reduction
//! triple, which turns two jobs into one virtual job of the summed size.
//! Both directions of the translation between the two systems live here.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;

use thiserror::Error;

use crate::instance::{Instance, PartialSchedule, Schedule};
use crate::preprocess::{assign_small_greedy, HugePairing, JobPartition};
use crate::rounding::{walk_irreducible, RoundedInstance, RoundingScheme, Triple};
use crate::Rational;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigIpError {
    #[error("no configuration holds size {size} for reduction {triple:?}")]
    NoPartner { triple: Triple, size: usize },
    #[error("configuration {0:?} is not a column of the reduced IP")]
    MissingColumn(Vec<u32>),
    #[error("solution does not cover size {0}")]
    Shortfall(usize),
    #[error("solution uses more machines than available")]
    TooManyMachines,
    #[error("solution vector has the wrong length")]
    BadSolution,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    pub counts: Vec<u32>,
}

impl Configuration {
    pub fn l1(&self) -> usize {
        self.counts.iter().map(|&c| c as usize).sum()
    }

    pub fn load(&self, sizes: &[Rational]) -> Rational {
        self.counts.iter().zip(sizes).map(|(&c, x)| x * Rational::from_integer(c.into())).sum()
    }

    /// First triple whose two sources are both present.
    pub fn reducible_by(&self, triples: &[Triple]) -> Option<Triple> {
        triples.iter().copied().find(|t| {
            if t.a == t.b {
                self.counts[t.a] >= 2
            } else {
                self.counts[t.a] >= 1 && self.counts[t.b] >= 1
            }
        })
    }
}

/// All configurations of `scheme` sizes within capacity `t`, optionally with
/// at most `support_cap` jobs, in lexicographic order of the count vectors.
pub fn enumerate_configs(scheme: &RoundingScheme, t: &Rational, support_cap: Option<usize>) -> Vec<Configuration> {
    fn rec(
        sizes: &[Rational],
        i: usize,
        room: &Rational,
        left: usize,
        cur: &mut Vec<u32>,
        out: &mut Vec<Configuration>,
    ) {
        if i == sizes.len() {
            if cur.iter().any(|&c| c > 0) {
                out.push(Configuration { counts: cur.clone() });
            }
            return;
        }
        let mut room = room.clone();
        let mut k = 0u32;
        loop {
            cur[i] = k;
            rec(sizes, i + 1, &room, left - k as usize, cur, out);
            if (k as usize) == left || sizes[i] > room {
                break;
            }
            room -= &sizes[i];
            k += 1;
        }
        cur[i] = 0;
    }
    let d = scheme.d();
    let mut out = Vec::new();
    let mut cur = vec![0; d];
    rec(scheme.sizes(), 0, t, support_cap.unwrap_or(usize::MAX / 2), &mut cur, &mut out);
    out
}

/// Configurations without a reducible pair, in lexicographic order.
pub fn irreducible_configs(scheme: &RoundingScheme, t: &Rational) -> Vec<Configuration> {
    let mut out = Vec::new();
    walk_irreducible(scheme.sizes(), &scheme.reducible_pairs(), t, None, &mut |counts, _| {
        out.push(Configuration { counts: counts.iter().map(|&c| c as u32).collect() });
        true
    });
    out.sort();
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ColumnKind {
    Config(Configuration),
    Reduction(Triple),
    /// `-1` on a size row.
    Surplus(usize),
    /// `+1` on the machine row.
    MachineSlack,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Column {
    pub kind: ColumnKind,
    pub entries: Vec<i64>,
}

/// Equality system `A x = b` over `d` size rows and one machine row.
#[derive(Clone, Debug)]
pub struct ReducedIp {
    scheme: RoundingScheme,
    columns: Vec<Column>,
    rhs: Vec<i64>,
}

pub type IpSolution = Vec<u64>;

/// A configuration multiset, i.e. a solution of the full configuration IP.
pub type ConfSolution = Vec<(Configuration, u64)>;

fn reduction_entries(t: &Triple, rows: usize) -> Vec<i64> {
    let mut e = vec![0; rows];
    e[t.a] += 1;
    e[t.b] += 1;
    e[t.target] -= 1;
    e
}

impl ReducedIp {
    pub fn scheme(&self) -> &RoundingScheme {
        &self.scheme
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn rhs(&self) -> &[i64] {
        &self.rhs
    }

    pub fn rows(&self) -> usize {
        self.rhs.len()
    }

    /// Row-major matrix.
    pub fn matrix(&self) -> Vec<Vec<i64>> {
        (0..self.rows()).map(|r| self.columns.iter().map(|c| c.entries[r]).collect()).collect()
    }

    pub fn config_count(&self) -> usize {
        self.columns.iter().filter(|c| matches!(c.kind, ColumnKind::Config(_))).count()
    }

    pub fn reduction_count(&self) -> usize {
        self.columns.iter().filter(|c| matches!(c.kind, ColumnKind::Reduction(_))).count()
    }

    pub fn is_solution(&self, x: &[u64]) -> bool {
        x.len() == self.columns.len()
            && (0..self.rows()).all(|r| {
                let s: i64 = self.columns.iter().zip(x).map(|(c, &v)| c.entries[r] * v as i64).sum();
                s == self.rhs[r]
            })
    }

    /// Text dump: one line per column (tag, then entries), then the rhs.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "rows {} cols {}", self.rows(), self.columns.len());
        for c in &self.columns {
            let tag = match &c.kind {
                ColumnKind::Config(_) => "config".to_string(),
                ColumnKind::Reduction(t) => format!("reduction({},{},{})", t.a, t.b, t.target),
                ColumnKind::Surplus(r) => format!("surplus({r})"),
                ColumnKind::MachineSlack => "machine".to_string(),
            };
            let e: Vec<String> = c.entries.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(s, "{tag} {}", e.join(" "));
        }
        let b: Vec<String> = self.rhs.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "rhs {}", b.join(" "));
        s
    }
}

fn assemble(scheme: &RoundingScheme, rounded: &RoundedInstance, configs: Vec<Configuration>, with_reductions: bool) -> ReducedIp {
    let d = scheme.d();
    let rows = d + 1;
    let mut columns = Vec::new();
    for c in configs {
        let mut e: Vec<i64> = c.counts.iter().map(|&v| v as i64).collect();
        e.push(1);
        columns.push(Column { kind: ColumnKind::Config(c), entries: e });
    }
    if with_reductions {
        for t in scheme.triples() {
            columns.push(Column { kind: ColumnKind::Reduction(*t), entries: reduction_entries(t, rows) });
        }
    }
    for r in 0..d {
        let mut e = vec![0; rows];
        e[r] = -1;
        columns.push(Column { kind: ColumnKind::Surplus(r), entries: e });
    }
    let mut e = vec![0; rows];
    e[d] = 1;
    columns.push(Column { kind: ColumnKind::MachineSlack, entries: e });
    let mut rhs: Vec<i64> = rounded.histogram.iter().map(|&v| v as i64).collect();
    rhs.push(rounded.m_effective as i64);
    ReducedIp { scheme: scheme.clone(), columns, rhs }
}

/// Reduced system: irreducible configurations with at most `L` jobs, one
/// column per triple, a surplus column per size row and a machine slack.
///
/// The scheme must already be scaled to the capacity in use.
pub fn build_reduced_ip(scheme: &RoundingScheme, rounded: &RoundedInstance) -> ReducedIp {
    let l = scheme.support();
    let configs = irreducible_configs(scheme, scheme.capacity()).into_iter().filter(|c| c.l1() <= l).collect();
    assemble(scheme, rounded, configs, true)
}

/// Uncompressed system: every configuration, no reduction columns.
pub fn build_full_ip(scheme: &RoundingScheme, rounded: &RoundedInstance) -> ReducedIp {
    let configs = enumerate_configs(scheme, scheme.capacity(), None);
    assemble(scheme, rounded, configs, false)
}

/// Column counts of the two systems for a scheme at its own capacity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColumnCounts {
    pub all_configs: usize,
    pub configs_within_support: usize,
    pub irreducible: usize,
    pub triples: usize,
}

impl ColumnCounts {
    /// Configuration plus reduction columns of the reduced system.
    pub fn reduced_total(&self) -> usize {
        self.irreducible + self.triples
    }
}

pub fn column_counts(scheme: &RoundingScheme) -> ColumnCounts {
    let t = scheme.capacity();
    ColumnCounts {
        all_configs: enumerate_configs(scheme, t, None).len(),
        configs_within_support: enumerate_configs(scheme, t, Some(scheme.support())).len(),
        irreducible: irreducible_configs(scheme, t).len(),
        triples: scheme.triples().len(),
    }
}

/// Turns reduction columns back into configurations, largest merged size
/// first: each use of `x_a + x_b = x_t` replaces one configuration holding
/// `t` by the same configuration with `t` split into `a` and `b`.
pub fn expand_solution(ip: &ReducedIp, sol: &[u64]) -> Result<ConfSolution, ConfigIpError> {
    if sol.len() != ip.columns.len() {
        return Err(ConfigIpError::BadSolution);
    }
    let mut configs: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
    let mut reductions: Vec<(Triple, u64)> = Vec::new();
    for (c, &x) in ip.columns.iter().zip(sol) {
        if x == 0 {
            continue;
        }
        match &c.kind {
            ColumnKind::Config(cfg) => *configs.entry(cfg.counts.clone()).or_default() += x,
            ColumnKind::Reduction(t) => reductions.push((*t, x)),
            _ => {}
        }
    }
    reductions.sort_by_key(|(t, _)| (t.target, t.a, t.b));
    for (t, uses) in reductions {
        for _ in 0..uses {
            let host = configs
                .iter()
                .find(|(c, &mult)| mult > 0 && c[t.target] > 0)
                .map(|(c, _)| c.clone())
                .ok_or(ConfigIpError::NoPartner { triple: t, size: t.target })?;
            let m = configs.get_mut(&host).unwrap();
            *m -= 1;
            if *m == 0 {
                configs.remove(&host);
            }
            let mut split = host;
            split[t.target] -= 1;
            split[t.a] += 1;
            split[t.b] += 1;
            *configs.entry(split).or_default() += 1;
        }
    }
    Ok(configs.into_iter().map(|(counts, m)| (Configuration { counts }, m)).collect())
}

/// Maps a configuration multiset onto the reduced system by merging
/// reducible pairs until every configuration is a column; each merge lowers
/// the ℓ1 norm by one and records one reduction use. Slacks absorb the
/// remaining surplus.
pub fn reduce_solution(conf: &ConfSolution, ip: &ReducedIp) -> Result<IpSolution, ConfigIpError> {
    let d = ip.scheme.d();
    let triples = ip.scheme.triples();
    let mut index: HashMap<&[u32], usize> = HashMap::new();
    let mut red_index: HashMap<Triple, usize> = HashMap::new();
    let mut surplus_index = vec![0; d];
    let mut machine_index = 0;
    for (k, c) in ip.columns.iter().enumerate() {
        match &c.kind {
            ColumnKind::Config(cfg) => {
                index.insert(&cfg.counts, k);
            }
            ColumnKind::Reduction(t) => {
                red_index.insert(*t, k);
            }
            ColumnKind::Surplus(r) => surplus_index[*r] = k,
            ColumnKind::MachineSlack => machine_index = k,
        }
    }
    let mut x = vec![0u64; ip.columns.len()];
    let mut used = 0u64;
    for (cfg, mult) in conf {
        if *mult == 0 {
            continue;
        }
        let mut c = cfg.clone();
        while index.get(c.counts.as_slice()).is_none() {
            let t = c.reducible_by(triples).ok_or_else(|| ConfigIpError::MissingColumn(c.counts.clone()))?;
            c.counts[t.a] -= 1;
            c.counts[t.b] -= 1;
            c.counts[t.target] += 1;
            let k = *red_index.get(&t).ok_or_else(|| ConfigIpError::MissingColumn(c.counts.clone()))?;
            x[k] += mult;
        }
        x[index[c.counts.as_slice()]] += mult;
        used += mult;
    }
    let m_eff = ip.rhs[d] as u64;
    if used > m_eff {
        return Err(ConfigIpError::TooManyMachines);
    }
    x[machine_index] = m_eff - used;
    for r in 0..d {
        let cover: i64 = ip.columns.iter().zip(&x).map(|(c, &v)| c.entries[r] * v as i64).sum();
        let extra = cover - ip.rhs[r];
        if extra < 0 {
            return Err(ConfigIpError::Shortfall(r));
        }
        x[surplus_index[r]] = extra as u64;
    }
    Ok(x)
}

/// Coverage of a configuration multiset per size, and the machines it uses.
pub fn coverage(conf: &ConfSolution, d: usize) -> (Vec<u64>, u64) {
    let mut cov = vec![0u64; d];
    let mut machines = 0;
    for (c, m) in conf {
        for (s, &k) in c.counts.iter().enumerate() {
            cov[s] += k as u64 * m;
        }
        machines += m;
    }
    (cov, machines)
}

/// Final assignment: huge jobs (with partners) first, one machine each, then
/// one machine per configuration filled with jobs of the matching rounded
/// sizes, then the small jobs greedily.
pub fn schedule_from_configs(
    inst: &Instance<Rational>,
    conf: &ConfSolution,
    rounded: &RoundedInstance,
    pairing: &HugePairing,
    partition: &JobPartition<Rational>,
) -> Result<Schedule<Rational>, ConfigIpError> {
    let mut sched = PartialSchedule::empty(inst);
    let mut machine = 0;
    for &(h, partner) in &pairing.partner {
        if machine >= inst.m() {
            return Err(ConfigIpError::TooManyMachines);
        }
        sched.assign(inst, h, machine);
        if let Some(j) = partner {
            sched.assign(inst, j, machine);
        }
        machine += 1;
    }
    let d = rounded.histogram.len();
    let mut queues: Vec<VecDeque<usize>> = (0..d).map(|s| rounded.jobs_of(s).into()).collect();
    for (c, mult) in conf {
        for _ in 0..*mult {
            if machine >= inst.m() {
                return Err(ConfigIpError::TooManyMachines);
            }
            for (s, &k) in c.counts.iter().enumerate() {
                for _ in 0..k {
                    if let Some(j) = queues[s].pop_front() {
                        sched.assign(inst, j, machine);
                    }
                }
            }
            machine += 1;
        }
    }
    if let Some(s) = queues.iter().position(|q| !q.is_empty()) {
        return Err(ConfigIpError::Shortfall(s));
    }
    let sched = assign_small_greedy(inst, sched, &partition.small);
    sched.finish().map_err(|missing| ConfigIpError::Shortfall(missing[0]))
}
