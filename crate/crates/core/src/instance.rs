//! Problem instances, schedules, the plain-text format and the random
//! instance families used by the benchmark harness.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::scalar::{format_rational, parse_rational, Scalar};
use crate::Rational;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InstanceError {
    #[error("instance needs at least one machine")]
    NoMachines,
    #[error("instance needs at least one job")]
    NoJobs,
    #[error("job {0} has a non-positive processing time")]
    NonPositive(usize),
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub msg: String,
}

/// `m` identical machines and the processing times of `n` jobs.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance<S> {
    m: usize,
    p: Vec<S>,
}

impl<S: Scalar> Instance<S> {
    pub fn new(m: usize, p: Vec<S>) -> Result<Self, InstanceError> {
        if m == 0 {
            return Err(InstanceError::NoMachines);
        }
        if p.is_empty() {
            return Err(InstanceError::NoJobs);
        }
        if let Some(j) = p.iter().position(|x| !x.is_positive()) {
            return Err(InstanceError::NonPositive(j));
        }
        Ok(Self { m, p })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.p.len()
    }

    pub fn p(&self) -> &[S] {
        &self.p
    }

    pub fn total(&self) -> S {
        self.p.iter().cloned().sum()
    }

    pub fn pmax(&self) -> S {
        self.p.iter().cloned().fold(S::zero(), |a, b| if b > a { b } else { a })
    }

    /// Same jobs on a different number of machines.
    pub fn with_machines(&self, m: usize) -> Result<Self, InstanceError> {
        Self::new(m, self.p.clone())
    }

    /// Job indices sorted by non-increasing processing time, ties by index.
    pub fn order_desc(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.n()).collect();
        idx.sort_by(|&a, &b| self.p[b].partial_cmp(&self.p[a]).unwrap_or(std::cmp::Ordering::Equal));
        idx
    }

    /// Converts processing times to another scalar type through `f64`.
    pub fn map_scalar<T: Scalar>(&self) -> Instance<T> {
        Instance {
            m: self.m,
            p: self.p.iter().map(|x| T::from_f64(x.to_f64().unwrap_or(f64::NAN)).unwrap()).collect(),
        }
    }
}

/// `max(p_max, Σp/m)`, a lower bound on the optimal makespan.
pub fn lower_bound<S: Scalar>(inst: &Instance<S>) -> S {
    let avg = inst.total() / S::of_usize(inst.m());
    let pmax = inst.pmax();
    if pmax > avg {
        pmax
    } else {
        avg
    }
}

/// A complete assignment of jobs to machines (machines are 0-based).
#[derive(Clone, Debug, PartialEq)]
pub struct Schedule<S> {
    assignment: Vec<usize>,
    loads: Vec<S>,
}

impl<S: Scalar> Schedule<S> {
    /// Builds a schedule and derives the loads.
    ///
    /// Panics when an entry of `assignment` is not a machine of `inst`.
    pub fn from_assignment(inst: &Instance<S>, assignment: Vec<usize>) -> Self {
        assert_eq!(assignment.len(), inst.n(), "one machine per job");
        let mut loads = vec![S::zero(); inst.m()];
        for (j, &i) in assignment.iter().enumerate() {
            assert!(i < inst.m(), "machine {i} out of range");
            loads[i] = loads[i].clone() + inst.p()[j].clone();
        }
        Self { assignment, loads }
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn loads(&self) -> &[S] {
        &self.loads
    }

    pub fn makespan(&self) -> S {
        self.loads.iter().cloned().fold(S::zero(), |a, b| if b > a { b } else { a })
    }

    /// Re-derives loads from the instance and compares them.
    pub fn is_valid_for(&self, inst: &Instance<S>) -> bool {
        if self.assignment.len() != inst.n() || self.loads.len() != inst.m() {
            return false;
        }
        if self.assignment.iter().any(|&i| i >= inst.m()) {
            return false;
        }
        let fresh = Schedule::from_assignment(inst, self.assignment.clone());
        fresh.loads.iter().zip(&self.loads).all(|(a, b)| (a.clone() - b.clone()).approx_zero())
    }
}

impl<S: Scalar> fmt::Display for Schedule<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "makespan {}", self.makespan())?;
        for (i, load) in self.loads.iter().enumerate() {
            let jobs: Vec<String> = self
                .assignment
                .iter()
                .enumerate()
                .filter(|(_, &k)| k == i)
                .map(|(j, _)| j.to_string())
                .collect();
            writeln!(f, "machine {} load {}: {}", i + 1, load, jobs.join(" "))?;
        }
        Ok(())
    }
}

/// Schedule under construction; jobs may still be unassigned.
#[derive(Clone, Debug)]
pub struct PartialSchedule<S> {
    assignment: Vec<Option<usize>>,
    loads: Vec<S>,
}

impl<S: Scalar> PartialSchedule<S> {
    pub fn empty(inst: &Instance<S>) -> Self {
        Self { assignment: vec![None; inst.n()], loads: vec![S::zero(); inst.m()] }
    }

    pub fn assign(&mut self, inst: &Instance<S>, job: usize, machine: usize) {
        assert!(self.assignment[job].is_none(), "job {job} assigned twice");
        self.assignment[job] = Some(machine);
        self.loads[machine] = self.loads[machine].clone() + inst.p()[job].clone();
    }

    pub fn machine_of(&self, job: usize) -> Option<usize> {
        self.assignment[job]
    }

    pub fn loads(&self) -> &[S] {
        &self.loads
    }

    pub fn unassigned(&self) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&j| self.assignment[j].is_none()).collect()
    }

    /// Completes the schedule, or returns the jobs still missing.
    pub fn finish(self) -> Result<Schedule<S>, Vec<usize>> {
        let missing = self.unassigned();
        if !missing.is_empty() {
            return Err(missing);
        }
        Ok(Schedule { assignment: self.assignment.into_iter().map(|a| a.unwrap()).collect(), loads: self.loads })
    }
}

/// Reads `"m n"` followed by `n` processing times (integers, decimals or fractions).
pub fn parse_instance(text: &str) -> Result<Instance<Rational>, ParseError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (hl, header) = lines.next().ok_or(ParseError { line: 1, msg: "missing header".into() })?;
    let head: Vec<&str> = header.split_whitespace().collect();
    let err = |line: usize, msg: String| ParseError { line: line + 1, msg };
    if head.len() != 2 {
        return Err(err(hl, format!("expected \"m n\", found {header:?}")));
    }
    let m: usize = head[0].parse().map_err(|_| err(hl, format!("bad machine count {:?}", head[0])))?;
    let n: usize = head[1].parse().map_err(|_| err(hl, format!("bad job count {:?}", head[1])))?;
    if m == 0 {
        return Err(err(hl, "machine count must be positive".into()));
    }
    if n == 0 {
        return Err(err(hl, "job count must be positive".into()));
    }
    let mut p = Vec::with_capacity(n);
    let mut last = hl + 1;
    for (ln, line) in lines {
        last = ln;
        for tok in line.split_whitespace() {
            let v = parse_rational(tok).ok_or_else(|| err(ln, format!("bad processing time {tok:?}")))?;
            if v <= Rational::from_integer(0.into()) {
                return Err(err(ln, format!("processing time {tok} is not positive")));
            }
            p.push(v);
        }
    }
    if p.len() != n {
        return Err(err(last, format!("expected {n} jobs, found {}", p.len())));
    }
    Ok(Instance { m, p })
}

pub fn write_instance(inst: &Instance<Rational>) -> String {
    let jobs: Vec<String> = inst.p().iter().map(format_rational).collect();
    format!("{} {}\n{}\n", inst.m(), inst.n(), jobs.join(" "))
}

/// Instance families of the benchmark protocol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    E1,
    E2,
    E3,
    E4,
    Big,
}

impl Family {
    pub const ALL: [Family; 5] = [Family::E1, Family::E2, Family::E3, Family::E4, Family::Big];

    pub fn name(self) -> &'static str {
        match self {
            Family::E1 => "E1",
            Family::E2 => "E2",
            Family::E3 => "E3",
            Family::E4 => "E4",
            Family::Big => "BIG",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown family {s:?} (expected E1, E2, E3, E4 or BIG)"))
    }
}

/// One benchmark class: `count` instances with `n` jobs drawn from `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassSpec {
    pub family: Family,
    pub m: usize,
    pub n: usize,
    pub lo: u64,
    pub hi: u64,
    pub count: usize,
    pub seed: u64,
}

impl ClassSpec {
    pub fn new(family: Family, m: usize, n: usize, lo: u64, hi: u64) -> Self {
        Self { family, m, n, lo, hi, count: 100, seed: 0 }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.m == 0 || self.n == 0 {
            return Err("m and n must be positive".into());
        }
        if self.lo < 1 || self.hi < self.lo {
            return Err(format!("bad interval [{},{}]", self.lo, self.hi));
        }
        Ok(())
    }

    pub fn interval(&self) -> String {
        format!("[{},{}]", self.lo, self.hi)
    }
}

/// Instance `k` of a class is drawn from ChaCha8 seeded with `seed ^ k`.
pub fn instance_rng(seed: u64, k: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ k as u64)
}

pub fn generate_class<S: Scalar>(spec: &ClassSpec) -> Vec<Instance<S>> {
    (0..spec.count)
        .map(|k| {
            let mut rng = instance_rng(spec.seed, k);
            let p = (0..spec.n).map(|_| S::of_u64(rng.random_range(spec.lo..=spec.hi))).collect();
            Instance::new(spec.m, p).expect("generated instance is valid")
        })
        .collect()
}

/// All classes of a family as listed in the instance-family overview.
pub fn family_classes(family: Family, seed: u64) -> Vec<ClassSpec> {
    let mut out = Vec::new();
    let mut push = |m: usize, n: usize, lo: u64, hi: u64| {
        out.push(ClassSpec { family, m, n, lo, hi, count: 100, seed });
    };
    match family {
        Family::E1 => {
            for m in [3, 4, 5] {
                for n in [2 * m, 3 * m, 5 * m] {
                    for (lo, hi) in [(1, 20), (20, 50)] {
                        push(m, n, lo, hi);
                    }
                }
            }
        }
        Family::E2 => {
            for m in [2, 3] {
                for n in [10, 30, 50, 100] {
                    push(m, n, 100, 800);
                }
            }
            for m in [4, 6, 8, 10] {
                for n in [30, 50, 100] {
                    push(m, n, 100, 800);
                }
            }
        }
        Family::E3 => {
            for m in [3, 5, 8, 10] {
                for n in [3 * m + 1, 3 * m + 2, 4 * m + 1, 4 * m + 2, 5 * m + 1, 5 * m + 2] {
                    for (lo, hi) in [(1, 100), (100, 200)] {
                        push(m, n, lo, hi);
                    }
                }
            }
        }
        Family::E4 => {
            for (m, n) in [(2, 10), (3, 9)] {
                for (lo, hi) in [(1, 20), (20, 50), (1, 100), (50, 100), (100, 200), (100, 800)] {
                    push(m, n, lo, hi);
                }
            }
        }
        Family::Big => {
            for m in [25, 50, 75, 100] {
                push(m, 4 * m, 1, 1000);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    fn r(v: i64) -> Rational {
        ratio(v, 1)
    }

    #[test]
    fn parse_examples() {
        let i = parse_instance("2 5\n3 3 2 2 2").unwrap();
        assert_eq!(i.m(), 2);
        assert_eq!(i.p(), &[r(3), r(3), r(2), r(2), r(2)]);
        let i = parse_instance("1 1\n5").unwrap();
        assert_eq!((i.m(), i.p().to_vec()), (1, vec![r(5)]));
        let e = parse_instance("2 3\n3 3").unwrap_err();
        assert!(e.msg.contains("expected 3 jobs, found 2"), "{e}");
        assert_eq!(e.line, 2);
    }

    #[test]
    fn parse_errors_name_the_line() {
        assert_eq!(parse_instance("2\n1 2").unwrap_err().line, 1);
        assert_eq!(parse_instance("2 2\n1 0").unwrap_err().line, 2);
        assert_eq!(parse_instance("2 2\n1 x").unwrap_err().line, 2);
        assert!(parse_instance("").is_err());
        assert!(parse_instance("0 1\n1").is_err());
    }

    #[test]
    fn parse_accepts_rationals() {
        let i = parse_instance("1 3\n2.5 7/3 1").unwrap();
        assert_eq!(i.p(), &[ratio(5, 2), ratio(7, 3), r(1)]);
        assert_eq!(parse_instance(&write_instance(&i)).unwrap(), i);
    }

    #[test]
    fn write_examples() {
        assert_eq!(write_instance(&Instance::new(1, vec![r(5)]).unwrap()), "1 1\n5\n");
        let i = Instance::new(2, vec![r(3), r(3), r(2), r(2), r(2)]).unwrap();
        assert_eq!(write_instance(&i), "2 5\n3 3 2 2 2\n");
    }

    #[test]
    fn lower_bound_examples() {
        let lb = |m, p: &[i64]| lower_bound(&Instance::new(m, p.iter().map(|&v| r(v)).collect()).unwrap());
        assert_eq!(lb(2, &[3, 3, 2, 2, 2]), r(6));
        assert_eq!(lb(1, &[5]), r(5));
        assert_eq!(lb(4, &[9, 1, 1, 1]), r(9));
        assert_eq!(lb(2, &[1, 2]), ratio(2, 1));
        assert_eq!(lb(2, &[1, 1, 1]), ratio(3, 2));
    }

    #[test]
    fn invalid_instances() {
        assert_eq!(Instance::<f64>::new(0, vec![1.0]).unwrap_err(), InstanceError::NoMachines);
        assert_eq!(Instance::<f64>::new(1, vec![]).unwrap_err(), InstanceError::NoJobs);
        assert_eq!(Instance::new(1, vec![1.0, -1.0]).unwrap_err(), InstanceError::NonPositive(1));
    }

    #[test]
    fn family_tables() {
        let e1 = family_classes(Family::E1, 7);
        assert_eq!(e1.len(), 18);
        assert_eq!((e1[0].m, e1[0].n, e1[0].lo, e1[0].hi), (3, 6, 1, 20));
        let big = family_classes(Family::Big, 0);
        assert_eq!(big.iter().map(|c| (c.m, c.n)).collect::<Vec<_>>(), vec![(25, 100), (50, 200), (75, 300), (100, 400)]);
        assert!(big.iter().all(|c| c.lo == 1 && c.hi == 1000));
        assert_eq!(family_classes(Family::E2, 0).len(), 20);
        assert_eq!(family_classes(Family::E3, 0).len(), 48);
        assert_eq!(family_classes(Family::E4, 0).len(), 12);
        for f in Family::ALL {
            assert!(family_classes(f, 0).iter().all(|c| c.n >= c.m && c.validate().is_ok()));
        }
    }

    #[test]
    fn generation_is_deterministic_and_in_range() {
        let spec = ClassSpec { family: Family::E1, m: 3, n: 6, lo: 1, hi: 20, count: 30, seed: 42 };
        let a: Vec<Instance<Rational>> = generate_class(&spec);
        let b: Vec<Instance<Rational>> = generate_class(&spec);
        assert_eq!(a, b);
        assert_eq!(a.len(), 30);
        for inst in &a {
            assert_eq!((inst.m(), inst.n()), (3, 6));
            assert!(inst.p().iter().all(|p| p.is_integer() && *p >= r(1) && *p <= r(20)));
        }
        let other: Vec<Instance<Rational>> = generate_class(&ClassSpec { seed: 43, ..spec.clone() });
        assert_ne!(a, other);
        // Sub-seeding: instance k of seed s equals instance 0 of seed s ^ k.
        let shifted: Vec<Instance<Rational>> = generate_class(&ClassSpec { seed: 42 ^ 5, count: 1, ..spec });
        assert_eq!(shifted[0], a[5]);
    }

    #[test]
    fn schedule_display_and_validity() {
        let inst = Instance::new(2, vec![3.0, 3.0, 2.0]).unwrap();
        let s = Schedule::from_assignment(&inst, vec![0, 1, 0]);
        assert_eq!(s.loads(), &[5.0, 3.0]);
        assert_eq!(s.makespan(), 5.0);
        assert!(s.is_valid_for(&inst));
        assert!(s.to_string().starts_with("makespan 5"));
        let mut ps = PartialSchedule::empty(&inst);
        ps.assign(&inst, 0, 1);
        assert_eq!(ps.clone().finish().unwrap_err(), vec![1, 2]);
        ps.assign(&inst, 1, 0);
        ps.assign(&inst, 2, 0);
        assert_eq!(ps.finish().unwrap().loads(), &[5.0, 3.0]);
    }
}
