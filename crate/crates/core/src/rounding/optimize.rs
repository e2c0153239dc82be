//! Search for rounding schemes with few sizes and small ε.
//!
//! For fixed `(d, L, ε)` the question is whether sizes
//! `x_0 >= … >= x_{d-1}` exist (normalized to `T = 1`) that satisfy the range
//! and gap constraints, such that every multiset of `L+1` sizes either
//! overflows the capacity or contains a pair `x_a + x_b = x_t`.
//! The discrete part (which equalities hold, which multisets overflow) is
//! explored by branch and bound; each node is an exact rational LP. Multisets
//! are only added when the current LP point violates them.

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use super::{RoundingScheme, Triple};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::scalar::ratio;
use crate::Rational;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OptimizeError {
    #[error("no feasible scheme with d={d}, L={l} for ε up to {eps_hi}")]
    Infeasible { d: usize, l: usize, eps_hi: String },
    #[error("bad parameters: {0}")]
    BadParameters(String),
}

#[derive(Clone, Debug)]
pub struct OptimizeOutcome {
    pub eps: Rational,
    pub scheme: RoundingScheme,
    /// LPs solved over the whole search.
    pub lps: usize,
}

/// Which collections of `L+1` sizes must overflow or contain an identity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SetModel {
    /// Multisets, sizes may repeat. This is what the closure property needs.
    Multiset,
    /// Sets of distinct indices only; a repeated size counts as its own pair.
    Distinct,
}

struct Problem {
    d: usize,
    eps: Rational,
    multisets: Vec<Vec<usize>>,
    pairs: Vec<Vec<(usize, usize)>>,
    lps: usize,
}

type Eq3 = (usize, usize, usize);

impl Problem {
    fn new(d: usize, l: usize, eps: &Rational, model: SetModel) -> Self {
        let mut multisets = Vec::new();
        let mut cur = Vec::with_capacity(l + 1);
        fn rec(d: usize, k: usize, start: usize, step: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == k {
                out.push(cur.clone());
                return;
            }
            for s in start..d {
                cur.push(s);
                rec(d, k, s + step, step, cur, out);
                cur.pop();
            }
        }
        let step = usize::from(model == SetModel::Distinct);
        rec(d, l + 1, 0, step, &mut cur, &mut multisets);
        let pairs = multisets
            .iter()
            .map(|x| {
                let mut ps = BTreeSet::new();
                for i in 0..x.len() {
                    for j in i + 1..x.len() {
                        ps.insert((x[i], x[j]));
                    }
                    if model == SetModel::Distinct {
                        ps.insert((x[i], x[i]));
                    }
                }
                ps.into_iter().collect()
            })
            .collect();
        Self { d, eps: eps.clone(), multisets, pairs, lps: 0 }
    }

    /// Maximizes the overflow margin `s` of the multisets in `big`.
    /// `Some((x, s))` when feasible with `s > 0` (or `big` empty).
    fn lp(&mut self, eqs: &[Eq3], big: &[usize]) -> Option<(Vec<Rational>, Rational)> {
        self.lps += 1;
        let d = self.d;
        let one = Rational::one();
        let e = &self.eps;
        let grow = &one + e;
        let top = &one - ratio(2, 1) * e;
        let mut lp = LinearProgram::<Rational>::new(d + 1);
        lp.objective[d] = one.clone();
        lp.add_sparse(&[(0, grow.clone())], Relation::Ge, top.clone());
        lp.add_sparse(&[(0, one.clone())], Relation::Le, top);
        lp.add_sparse(&[(d - 1, one.clone())], Relation::Le, e * &grow);
        for i in 0..d - 1 {
            lp.add_sparse(&[(i, one.clone()), (i + 1, -grow.clone())], Relation::Le, Rational::zero());
            lp.add_sparse(&[(i + 1, one.clone()), (i, -one.clone())], Relation::Le, Rational::zero());
        }
        lp.add_sparse(&[(d, one.clone())], Relation::Le, one.clone());
        for &(a, b, t) in eqs {
            lp.add_sparse(&[(a, one.clone()), (b, one.clone()), (t, -one.clone())], Relation::Eq, Rational::zero());
        }
        for &k in big {
            let mut terms: Vec<(usize, Rational)> = self.multisets[k].iter().map(|&s| (s, one.clone())).collect();
            terms.push((d, -one.clone()));
            lp.add_sparse(&terms, Relation::Ge, one.clone());
        }
        match lp.solve() {
            LpOutcome::Optimal { mut x, value } => {
                if !big.is_empty() && !value.is_positive() {
                    return None;
                }
                x.truncate(d);
                Some((x, value))
            }
            _ => None,
        }
    }

    fn dfs(&mut self, eqs: &mut Vec<Eq3>, forbidden: &BTreeSet<Eq3>, big: &mut Vec<usize>) -> Option<Vec<Rational>> {
        let (x, _) = self.lp(eqs, big)?;
        let eq_pairs: BTreeSet<(usize, usize)> = eqs.iter().map(|&(a, b, _)| (a, b)).collect();
        let one = Rational::one();
        let mut best: Option<((usize, Rational), usize, Vec<Eq3>)> = None;
        for k in 0..self.multisets.len() {
            if big.contains(&k) || self.pairs[k].iter().any(|p| eq_pairs.contains(p)) {
                continue;
            }
            let sum: Rational = self.multisets[k].iter().map(|&s| x[s].clone()).sum();
            if sum > one {
                continue;
            }
            let opts: Vec<Eq3> = self.pairs[k]
                .iter()
                .flat_map(|&(a, b)| (0..a).map(move |t| (a, b, t)))
                .filter(|e| !forbidden.contains(e))
                .collect();
            let key = (opts.len(), sum);
            if best.as_ref().is_none_or(|(bk, _, _)| key < *bk) {
                best = Some((key, k, opts));
            }
        }
        let Some((_, k, opts)) = best else { return Some(x) };
        let mut forb = forbidden.clone();
        for e in opts {
            eqs.push(e);
            let found = self.dfs(eqs, &forb, big);
            eqs.pop();
            if found.is_some() {
                return found;
            }
            forb.insert(e);
        }
        big.push(k);
        let found = self.dfs(eqs, &forb, big);
        big.pop();
        found
    }
}

/// Sizes (normalized to capacity 1) of a feasible scheme for `(d, L, ε)`, if
/// one exists, and the number of LPs solved.
pub fn scheme_feasible(d: usize, l: usize, eps: &Rational) -> (Option<Vec<Rational>>, usize) {
    scheme_feasible_with(d, l, eps, SetModel::Multiset)
}

pub fn scheme_feasible_with(d: usize, l: usize, eps: &Rational, model: SetModel) -> (Option<Vec<Rational>>, usize) {
    let mut p = Problem::new(d, l, eps, model);
    let x = p.dfs(&mut Vec::new(), &BTreeSet::new(), &mut Vec::new());
    (x, p.lps)
}

/// Builds the scheme from LP sizes: equal sizes merged, every exact identity
/// `x_a + x_b = x_t` recorded as a triple.
pub fn witness_scheme(x: &[Rational], l: usize, eps: &Rational) -> RoundingScheme {
    let mut sizes: Vec<Rational> = x.to_vec();
    sizes.dedup();
    let mut triples = Vec::new();
    for a in 0..sizes.len() {
        for b in a..sizes.len() {
            let s = &sizes[a] + &sizes[b];
            if let Some(t) = sizes[..a].iter().position(|v| *v == s) {
                triples.push(Triple { a, b, target: t });
            }
        }
    }
    RoundingScheme::new(sizes, triples, l, eps.clone(), Rational::one()).expect("witness sizes are consistent")
}

/// Smallest ε in `[eps_lo, eps_hi]` (to within `tol`) admitting a scheme with
/// at most `d` sizes and support bound `l`, by bisection.
pub fn optimize_scheme(
    d: usize,
    l: usize,
    eps_lo: &Rational,
    eps_hi: &Rational,
    tol: &Rational,
) -> Result<OptimizeOutcome, OptimizeError> {
    if d == 0 || l == 0 {
        return Err(OptimizeError::BadParameters("d and L must be positive".into()));
    }
    if d > 16 {
        return Err(OptimizeError::BadParameters("d is limited to 16".into()));
    }
    if !eps_lo.is_positive() || eps_lo >= eps_hi || *eps_hi >= ratio(1, 2) || !tol.is_positive() {
        return Err(OptimizeError::BadParameters("need 0 < eps_lo < eps_hi < 1/2 and tol > 0".into()));
    }
    let mut lps = 0;
    let (x, n) = scheme_feasible(d, l, eps_hi);
    lps += n;
    let mut witness = x.ok_or_else(|| OptimizeError::Infeasible {
        d,
        l,
        eps_hi: crate::scalar::rational_to_decimal(eps_hi, 9),
    })?;
    let mut lo = eps_lo.clone();
    let mut hi = eps_hi.clone();
    while &hi - &lo > *tol {
        let mid = (&lo + &hi) / ratio(2, 1);
        let (x, n) = scheme_feasible(d, l, &mid);
        lps += n;
        match x {
            Some(x) => {
                witness = x;
                hi = mid;
            }
            None => lo = mid,
        }
    }
    let scheme = witness_scheme(&witness, l, &hi);
    Ok(OptimizeOutcome { eps: hi, scheme, lps })
}
