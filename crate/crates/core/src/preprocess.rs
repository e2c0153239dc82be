//! Job classification for a makespan guess `T`, pairing of huge jobs and
//! greedy placement of small jobs.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap};

use thiserror::Error;

use crate::instance::{Instance, PartialSchedule};
use crate::Scalar;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PreprocessError {
    #[error("ε must lie strictly between 0 and 1/2")]
    EpsilonOutOfRange,
    #[error("T must be positive")]
    NonPositiveCapacity,
}

/// Small: `p <= εT`; huge: `p >= (1-2ε)T`; large: everything between.
#[derive(Clone, Debug, PartialEq)]
pub struct JobPartition<S> {
    pub small: Vec<usize>,
    pub large: Vec<usize>,
    pub huge: Vec<usize>,
    pub t: S,
    pub eps: S,
}

pub fn classify<S: Scalar>(inst: &Instance<S>, t: &S, eps: &S) -> Result<JobPartition<S>, PreprocessError> {
    let half = S::one().half();
    if !eps.is_positive() || *eps >= half {
        return Err(PreprocessError::EpsilonOutOfRange);
    }
    if !t.is_positive() {
        return Err(PreprocessError::NonPositiveCapacity);
    }
    let small_cut = eps.clone() * t.clone();
    let two = S::one() + S::one();
    let huge_cut = (S::one() - two * eps.clone()) * t.clone();
    let mut part = JobPartition { small: vec![], large: vec![], huge: vec![], t: t.clone(), eps: eps.clone() };
    for (j, p) in inst.p().iter().enumerate() {
        if *p <= small_cut {
            part.small.push(j);
        } else if *p >= huge_cut {
            part.huge.push(j);
        } else {
            part.large.push(j);
        }
    }
    Ok(part)
}

/// Partner of each huge job (`None` when it runs alone).
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct HugePairing {
    pub partner: Vec<(usize, Option<usize>)>,
    pub consumed: BTreeSet<usize>,
}

fn desc<S: Scalar>(inst: &Instance<S>, ids: &[usize]) -> Vec<usize> {
    let mut v = ids.to_vec();
    v.sort_by(|&a, &b| inst.p()[b].partial_cmp(&inst.p()[a]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
    v
}

/// Huge jobs in non-increasing order each take the largest unused large job
/// that still fits next to them.
pub fn pair_huge<S: Scalar>(inst: &Instance<S>, part: &JobPartition<S>) -> HugePairing {
    let candidates = desc(inst, &part.large);
    let mut used = vec![false; candidates.len()];
    let mut out = HugePairing::default();
    for h in desc(inst, &part.huge) {
        let room = part.t.clone() - inst.p()[h].clone();
        let pick = (0..candidates.len()).find(|&k| !used[k] && inst.p()[candidates[k]] <= room);
        let partner = pick.map(|k| {
            used[k] = true;
            candidates[k]
        });
        if let Some(j) = partner {
            out.consumed.insert(j);
        }
        out.partner.push((h, partner));
    }
    out
}

struct Slot<S>(S, usize);

impl<S: Scalar> PartialEq for Slot<S> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<S: Scalar> Eq for Slot<S> {}
impl<S: Scalar> PartialOrd for Slot<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<S: Scalar> Ord for Slot<S> {
    // Reversed so that `BinaryHeap` pops the least-loaded, lowest-index machine.
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.partial_cmp(&self.0).unwrap_or(Ordering::Equal).then(other.1.cmp(&self.1))
    }
}

/// Places each small job, in the given order, on a least-loaded machine.
pub fn assign_small_greedy<S: Scalar>(inst: &Instance<S>, mut sched: PartialSchedule<S>, small: &[usize]) -> PartialSchedule<S> {
    let mut heap: BinaryHeap<Slot<S>> = sched.loads().iter().cloned().enumerate().map(|(i, l)| Slot(l, i)).collect();
    for &j in small {
        let Slot(load, i) = heap.pop().expect("at least one machine");
        sched.assign(inst, j, i);
        heap.push(Slot(load + inst.p()[j].clone(), i));
    }
    sched
}
