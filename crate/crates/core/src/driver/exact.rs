//! Exact optimum by branch and bound, for small instances.

use thiserror::Error;

use crate::baselines::lpt;
use crate::instance::{lower_bound, Instance};
use crate::Scalar;

pub const EXACT_MAX_JOBS: usize = 16;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExactError {
    #[error("{0} jobs exceed the exact solver cap of {EXACT_MAX_JOBS}")]
    TooLarge(usize),
}

struct Search<'a, S> {
    p: Vec<&'a S>,
    loads: Vec<S>,
    best: S,
    lb: S,
}

impl<S: Scalar> Search<'_, S> {
    fn go(&mut self, k: usize, current: &S) {
        if self.best <= self.lb {
            return;
        }
        if k == self.p.len() {
            if *current < self.best {
                self.best = current.clone();
            }
            return;
        }
        let job = self.p[k];
        for i in 0..self.loads.len() {
            // Machines with equal load are interchangeable.
            if self.loads[..i].iter().any(|l| *l == self.loads[i]) {
                continue;
            }
            let load = self.loads[i].clone() + job.clone();
            if load >= self.best {
                continue;
            }
            let prev = std::mem::replace(&mut self.loads[i], load.clone());
            let next = if load > *current { load } else { current.clone() };
            self.go(k + 1, &next);
            self.loads[i] = prev;
        }
    }
}

/// Optimal makespan. Jobs go largest first; LPT seeds the incumbent and the
/// lower bound ends the search early.
pub fn exact_opt<S: Scalar>(inst: &Instance<S>) -> Result<S, ExactError> {
    if inst.n() > EXACT_MAX_JOBS {
        return Err(ExactError::TooLarge(inst.n()));
    }
    let mut s = Search {
        p: inst.order_desc().into_iter().map(|j| &inst.p()[j]).collect(),
        loads: vec![S::zero(); inst.m()],
        best: lpt(inst).makespan(),
        lb: lower_bound(inst),
    };
    s.go(0, &S::zero());
    Ok(s.best)
}
