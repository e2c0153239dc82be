//! Non-approximation-scheme comparison algorithms: LPT, First-Fit-Decreasing,
//! MULTIFIT and DJMS.

use crate::instance::{lower_bound, Instance, Schedule};
use crate::Scalar;

/// Round cap for MULTIFIT's capacity search on non-integral inputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MultifitParams {
    pub rounds: usize,
}

impl Default for MultifitParams {
    fn default() -> Self {
        Self { rounds: 30 }
    }
}

fn least_loaded<S: Scalar>(loads: &[S]) -> usize {
    let mut best = 0;
    for i in 1..loads.len() {
        if loads[i] < loads[best] {
            best = i;
        }
    }
    best
}

/// Longest processing time first.
pub fn lpt<S: Scalar>(inst: &Instance<S>) -> Schedule<S> {
    let mut loads = vec![S::zero(); inst.m()];
    let mut assignment = vec![0; inst.n()];
    for j in inst.order_desc() {
        let i = least_loaded(&loads);
        loads[i] = loads[i].clone() + inst.p()[j].clone();
        assignment[j] = i;
    }
    Schedule::from_assignment(inst, assignment)
}

/// First-Fit-Decreasing with capacity `t`; `None` when some job fits nowhere.
pub fn ffd_pack<S: Scalar>(inst: &Instance<S>, t: &S) -> Option<Schedule<S>> {
    let mut loads = vec![S::zero(); inst.m()];
    let mut assignment = vec![0; inst.n()];
    for j in inst.order_desc() {
        let p = &inst.p()[j];
        let i = (0..inst.m()).find(|&i| (loads[i].clone() + p.clone()).approx_le(t))?;
        loads[i] = loads[i].clone() + p.clone();
        assignment[j] = i;
    }
    Some(Schedule::from_assignment(inst, assignment))
}

/// `max(Σp/m, p_1, p_m + p_{m+1})` with the last term only when `n > m`.
pub fn multifit_lower_bound<S: Scalar>(inst: &Instance<S>) -> S {
    let mut lb = lower_bound(inst);
    if inst.n() > inst.m() {
        let order = inst.order_desc();
        let pair = inst.p()[order[inst.m() - 1]].clone() + inst.p()[order[inst.m()]].clone();
        if pair > lb {
            lb = pair;
        }
    }
    lb
}

pub fn multifit<S: Scalar>(inst: &Instance<S>, params: MultifitParams) -> Schedule<S> {
    let fallback = lpt(inst);
    multifit_capped(inst, params, fallback)
}

/// MULTIFIT searching capacities in `[ℓ, makespan(upper)]`; `upper` is returned
/// when no FFD packing is confirmed.
fn multifit_capped<S: Scalar>(inst: &Instance<S>, params: MultifitParams, upper: Schedule<S>) -> Schedule<S> {
    let u = upper.makespan();
    let l = multifit_lower_bound(inst);
    let mut best: Option<Schedule<S>> = None;
    if inst.p().iter().all(|p| p.is_integral()) {
        let mut lo = l.ceil_val();
        let mut hi = u;
        while lo < hi {
            let mid = (lo.clone() + hi.clone()).half().floor_val();
            match ffd_pack(inst, &mid) {
                Some(s) => {
                    hi = mid;
                    best = Some(s);
                }
                None => lo = mid + S::one(),
            }
        }
        if best.is_none() {
            best = ffd_pack(inst, &lo);
        }
    } else {
        let mut lo = l;
        let mut hi = u;
        for _ in 0..params.rounds.max(1) {
            let mid = (lo.clone() + hi.clone()).half();
            match ffd_pack(inst, &mid) {
                Some(s) => {
                    hi = mid;
                    best = Some(s);
                }
                None => lo = mid,
            }
        }
    }
    match best {
        Some(s) if s.makespan() <= upper.makespan() => s,
        _ => upper,
    }
}

/// Iterated LPT/MULTIFIT that closes machines reaching the lower bound.
pub fn djms<S: Scalar>(inst: &Instance<S>) -> Schedule<S> {
    let mut assignment = vec![usize::MAX; inst.n()];
    let mut active_jobs: Vec<usize> = (0..inst.n()).collect();
    let mut active_machines: Vec<usize> = (0..inst.m()).collect();
    while !active_machines.is_empty() {
        if active_jobs.is_empty() {
            break;
        }
        let sub = Instance::new(active_machines.len(), active_jobs.iter().map(|&j| inst.p()[j].clone()).collect())
            .expect("active sub-instance is valid");
        let upper = lpt(&sub);
        let sched = multifit_capped(&sub, MultifitParams::default(), upper);
        let bound = multifit_lower_bound(&sub);
        let loads = sched.loads();
        let reached = (0..loads.len()).filter(|&i| loads[i] >= bound);
        let pick = reached.fold(None::<usize>, |acc, i| match acc {
            Some(a) if loads[a] <= loads[i] => Some(a),
            _ => Some(i),
        });
        // Stall guard: close the fullest machine when none reaches the bound.
        let pick = pick.unwrap_or_else(|| {
            (1..loads.len()).fold(0, |a, i| if loads[i] > loads[a] { i } else { a })
        });
        let level = loads[pick].clone();
        let closing: Vec<usize> = (0..loads.len()).filter(|&i| loads[i] == level).collect();
        let mut still_jobs = Vec::new();
        for (k, &j) in active_jobs.iter().enumerate() {
            let local = sched.assignment()[k];
            if closing.contains(&local) {
                assignment[j] = active_machines[local];
            } else {
                still_jobs.push(j);
            }
        }
        active_machines = (0..active_machines.len())
            .filter(|i| !closing.contains(i))
            .map(|i| active_machines[i])
            .collect();
        active_jobs = still_jobs;
    }
    debug_assert!(assignment.iter().all(|&i| i != usize::MAX));
    Schedule::from_assignment(inst, assignment)
}
