//! Rounding of large jobs onto a finite set of sizes.
//!
//! A [`RoundingScheme`] is a strictly decreasing list of sizes together with
//! reduction triples `x_a + x_b = x_t`. Two jobs whose sizes form a triple can
//! be merged into one virtual job, which bounds the number of jobs any
//! irreducible machine configuration holds (the support bound `L`).

mod milp;
mod optimize;

use std::fmt::Write as _;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::scalar::{ceil_log2, format_rational, parse_rational, ratio};
use crate::Rational;

pub use milp::emit_milp;
pub use optimize::{optimize_scheme, scheme_feasible, scheme_feasible_with, witness_scheme, OptimizeError, OptimizeOutcome, SetModel};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RoundingError {
    #[error("ε must lie strictly between 0 and 1/2")]
    EpsilonOutOfRange,
    #[error("job {job} lies outside the large-job range")]
    OutsideLargeRange { job: usize },
    #[error("invalid scheme: {0}")]
    InvalidScheme(String),
    #[error("scheme file line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Reduction triple `x_a + x_b = x_target` with `a <= b` (indices into the sizes).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub a: usize,
    pub b: usize,
    pub target: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoundingScheme {
    sizes: Vec<Rational>,
    labels: Option<Vec<(u32, u32)>>,
    triples: Vec<Triple>,
    support: usize,
    eps: Rational,
    capacity: Rational,
}

impl RoundingScheme {
    /// Checks ordering, triple identities and indices.
    pub fn new(
        sizes: Vec<Rational>,
        triples: Vec<Triple>,
        support: usize,
        eps: Rational,
        capacity: Rational,
    ) -> Result<Self, RoundingError> {
        let bad = |m: String| Err(RoundingError::InvalidScheme(m));
        if sizes.windows(2).any(|w| w[0] <= w[1]) {
            return bad("sizes must be strictly decreasing".into());
        }
        if sizes.last().is_some_and(|x| *x <= Rational::zero()) {
            return bad("sizes must be positive".into());
        }
        for t in &triples {
            if t.a > t.b || t.b >= sizes.len() || t.target >= sizes.len() {
                return bad(format!("malformed triple {t:?}"));
            }
            if &sizes[t.a] + &sizes[t.b] != sizes[t.target] {
                return bad(format!("triple {t:?} violates x_a + x_b = x_target"));
            }
        }
        let mut triples = triples;
        triples.sort();
        triples.dedup();
        Ok(Self { sizes, labels: None, triples, support, eps, capacity })
    }

    pub fn empty(eps: Rational, capacity: Rational) -> Self {
        Self { sizes: vec![], labels: Some(vec![]), triples: vec![], support: 0, eps, capacity }
    }

    pub fn sizes(&self) -> &[Rational] {
        &self.sizes
    }

    pub fn d(&self) -> usize {
        self.sizes.len()
    }

    /// `(i, k)` of each size for the standard scheme.
    pub fn labels(&self) -> Option<&[(u32, u32)]> {
        self.labels.as_deref()
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn support(&self) -> usize {
        self.support
    }

    pub fn eps(&self) -> &Rational {
        &self.eps
    }

    pub fn capacity(&self) -> &Rational {
        &self.capacity
    }

    /// The same scheme for capacity `t` (all sizes scaled by `t / capacity`).
    pub fn scaled(&self, t: &Rational) -> Self {
        let f = t / &self.capacity;
        Self {
            sizes: self.sizes.iter().map(|x| x * &f).collect(),
            capacity: t.clone(),
            ..self.clone()
        }
    }

    /// `reducible[a][b]`: sizes `a` and `b` appear together as a triple source.
    pub fn reducible_pairs(&self) -> Vec<Vec<bool>> {
        let d = self.d();
        let mut r = vec![vec![false; d]; d];
        for t in &self.triples {
            r[t.a][t.b] = true;
            r[t.b][t.a] = true;
        }
        r
    }

    /// Keeps the sizes flagged in `keep` and the triples among them. The
    /// support bound becomes the largest irreducible configuration of the
    /// restricted sizes. Returns the scheme and the old-to-new index map.
    pub fn restrict(&self, keep: &[bool]) -> (Self, Vec<Option<usize>>) {
        assert_eq!(keep.len(), self.d());
        let mut map = vec![None; self.d()];
        let mut sizes = Vec::new();
        let mut labels = Vec::new();
        for i in 0..self.d() {
            if keep[i] {
                map[i] = Some(sizes.len());
                sizes.push(self.sizes[i].clone());
                if let Some(l) = &self.labels {
                    labels.push(l[i]);
                }
            }
        }
        let triples: Vec<Triple> = self
            .triples
            .iter()
            .filter_map(|t| Some(Triple { a: map[t.a]?, b: map[t.b]?, target: map[t.target]? }))
            .collect();
        let mut out = Self {
            sizes,
            labels: self.labels.as_ref().map(|_| labels),
            triples,
            support: 0,
            eps: self.eps.clone(),
            capacity: self.capacity.clone(),
        };
        out.support = max_irreducible_support(&out.sizes, &out.reducible_pairs(), &out.capacity);
        (out, map)
    }

    /// Index of the largest size not exceeding `p`.
    pub fn round_down(&self, p: &Rational) -> Option<usize> {
        // Sizes are decreasing, so the answer is the first index with x <= p.
        let k = self.sizes.partition_point(|x| x > p);
        (k < self.sizes.len()).then_some(k)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# rounding scheme");
        let _ = writeln!(s, "eps {}", format_rational(&self.eps));
        let _ = writeln!(s, "capacity {}", format_rational(&self.capacity));
        let _ = writeln!(s, "support {}", self.support);
        let _ = writeln!(s, "sizes {}", self.sizes.len());
        for x in &self.sizes {
            let _ = writeln!(s, "{}", format_rational(x));
        }
        let _ = writeln!(s, "triples {}", self.triples.len());
        for t in &self.triples {
            let _ = writeln!(s, "{} {} {}", t.a, t.b, t.target);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, RoundingError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let perr = |line: usize, msg: &str| RoundingError::Parse { line, msg: msg.to_string() };
        let mut next_kv = |key: &str| -> Result<(usize, String), RoundingError> {
            let (ln, l) = lines.next().ok_or_else(|| perr(0, &format!("missing {key}")))?;
            let (k, v) = l.split_once(char::is_whitespace).ok_or_else(|| perr(ln, &format!("expected {key}")))?;
            if k != key {
                return Err(perr(ln, &format!("expected {key}, found {k}")));
            }
            Ok((ln, v.trim().to_string()))
        };
        let rat = |ln: usize, v: &str| parse_rational(v).ok_or_else(|| perr(ln, &format!("bad number {v:?}")));
        let int = |ln: usize, v: &str| v.parse::<usize>().map_err(|_| perr(ln, &format!("bad integer {v:?}")));
        let (ln, v) = next_kv("eps")?;
        let eps = rat(ln, &v)?;
        let (ln, v) = next_kv("capacity")?;
        let capacity = rat(ln, &v)?;
        let (ln, v) = next_kv("support")?;
        let support = int(ln, &v)?;
        let (ln, v) = next_kv("sizes")?;
        let d = int(ln, &v)?;
        let mut sizes = Vec::with_capacity(d);
        for _ in 0..d {
            let (ln, l) = lines.next().ok_or_else(|| perr(0, "missing size"))?;
            sizes.push(rat(ln, l)?);
        }
        let (ln, v) = lines
            .next()
            .and_then(|(ln, l)| l.strip_prefix("triples").map(|v| (ln, v.trim().to_string())))
            .ok_or_else(|| perr(0, "expected triples"))?;
        let nt = int(ln, &v)?;
        let mut triples = Vec::with_capacity(nt);
        for _ in 0..nt {
            let (ln, l) = lines.next().ok_or_else(|| perr(0, "missing triple"))?;
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 3 {
                return Err(perr(ln, "triple needs three indices"));
            }
            triples.push(Triple { a: int(ln, f[0])?, b: int(ln, f[1])?, target: int(ln, f[2])? });
        }
        Self::new(sizes, triples, support, eps, capacity)
    }
}

/// Boundaries `b_{i,k} = 2^i εT + k ε² 2^i T` below `(1-2ε)T`, with all
/// same-parity triples `b_{i,k1} + b_{i,k2} = b_{i+1,(k1+k2)/2}`.
///
/// For `1/3 <= ε < 1/2` the large range is empty and so is the scheme.
pub fn standard_scheme(eps: &Rational, t: &Rational) -> Result<RoundingScheme, RoundingError> {
    let one = Rational::one();
    if *eps <= Rational::zero() || *eps >= ratio(1, 2) {
        return Err(RoundingError::EpsilonOutOfRange);
    }
    if *eps >= ratio(1, 3) {
        return Ok(RoundingScheme::empty(eps.clone(), t.clone()));
    }
    let two = ratio(2, 1);
    let top = (&one - &two * eps) * t;
    let imax = ceil_log2(&((&one - &two * eps) / eps));
    let kmax = (&one / eps).ceil().to_integer();
    let kmax: u32 = u32::try_from(kmax).expect("1/ε fits in u32") - 1;
    let mut labelled: Vec<((u32, u32), Rational)> = Vec::new();
    let mut pow = one.clone();
    for i in 0..=imax {
        for k in 0..=kmax {
            let b = &pow * eps * t + ratio(k as i64, 1) * eps * eps * &pow * t;
            if b < top {
                labelled.push(((i, k), b));
            }
        }
        pow = &pow * &two;
    }
    labelled.sort_by(|a, b| b.1.cmp(&a.1));
    let index_of = |i: u32, k: u32| labelled.iter().position(|(l, _)| *l == (i, k));
    let mut triples = Vec::new();
    for (idx1, ((i, k1), _)) in labelled.iter().enumerate() {
        for (idx2, ((i2, k2), _)) in labelled.iter().enumerate() {
            if i != i2 || k1 > k2 || (k1 + k2) % 2 != 0 {
                continue;
            }
            if let Some(target) = index_of(i + 1, (k1 + k2) / 2) {
                let (a, b) = if idx1 <= idx2 { (idx1, idx2) } else { (idx2, idx1) };
                triples.push(Triple { a, b, target });
            }
        }
    }
    let intervals: std::collections::BTreeSet<u32> = labelled.iter().map(|((i, _), _)| *i).collect();
    let labels: Vec<(u32, u32)> = labelled.iter().map(|(l, _)| *l).collect();
    let sizes: Vec<Rational> = labelled.into_iter().map(|(_, b)| b).collect();
    let mut scheme = RoundingScheme::new(sizes, triples, 0, eps.clone(), t.clone())?;
    let tight = max_irreducible_support(&scheme.sizes, &scheme.reducible_pairs(), t);
    scheme.support = (2 * intervals.len()).max(tight);
    scheme.labels = Some(labels);
    Ok(scheme)
}

/// Rounded large jobs: a histogram over scheme sizes plus the job-to-size map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundedInstance {
    pub histogram: Vec<usize>,
    pub job_map: Vec<(usize, usize)>,
    pub m_effective: usize,
}

impl RoundedInstance {
    /// Jobs (ids) rounded to size `s`, in input order.
    pub fn jobs_of(&self, s: usize) -> Vec<usize> {
        self.job_map.iter().filter(|(_, k)| *k == s).map(|(j, _)| *j).collect()
    }

    /// Re-indexes sizes through `map` (as returned by [`RoundingScheme::restrict`]).
    pub fn remap(&self, map: &[Option<usize>], d_new: usize) -> Self {
        let mut histogram = vec![0; d_new];
        let job_map: Vec<(usize, usize)> = self
            .job_map
            .iter()
            .map(|&(j, s)| {
                let t = map[s].expect("sizes in use are kept");
                histogram[t] += 1;
                (j, t)
            })
            .collect();
        Self { histogram, job_map, m_effective: self.m_effective }
    }
}

/// Rounds each `(id, p)` down to the largest scheme size `<= p`. Every `p` must
/// lie strictly inside `(εT, (1-2ε)T)` and not below the smallest size.
pub fn round_jobs(
    jobs: &[(usize, Rational)],
    scheme: &RoundingScheme,
    m_effective: usize,
) -> Result<RoundedInstance, RoundingError> {
    let t = &scheme.capacity;
    let lo = &scheme.eps * t;
    let hi = (Rational::one() - ratio(2, 1) * &scheme.eps) * t;
    let mut histogram = vec![0; scheme.d()];
    let mut job_map = Vec::with_capacity(jobs.len());
    for (j, p) in jobs {
        if *p <= lo || *p >= hi {
            return Err(RoundingError::OutsideLargeRange { job: *j });
        }
        let s = scheme.round_down(p).ok_or(RoundingError::OutsideLargeRange { job: *j })?;
        histogram[s] += 1;
        job_map.push((*j, s));
    }
    Ok(RoundedInstance { histogram, job_map, m_effective })
}

/// Depth-first walk over irreducible multisets (non-decreasing size indices)
/// with total at most `cap`. `visit` gets the counts and the ℓ1 norm and
/// returns false to stop the walk.
pub fn walk_irreducible(
    sizes: &[Rational],
    reducible: &[Vec<bool>],
    cap: &Rational,
    max_len: Option<usize>,
    visit: &mut dyn FnMut(&[usize], usize) -> bool,
) {
    fn rec(
        sizes: &[Rational],
        reducible: &[Vec<bool>],
        start: usize,
        room: &Rational,
        counts: &mut Vec<usize>,
        len: usize,
        max_len: Option<usize>,
        visit: &mut dyn FnMut(&[usize], usize) -> bool,
    ) -> bool {
        if max_len.is_some_and(|m| len >= m) {
            return true;
        }
        for s in start..sizes.len() {
            if sizes[s] > *room {
                continue;
            }
            // Adding s must not create a reducible pair with what is present.
            let clash = (0..sizes.len()).any(|o| counts[o] > 0 && reducible[s][o]) || (counts[s] > 0 && reducible[s][s]);
            if clash {
                continue;
            }
            counts[s] += 1;
            let rest = room - &sizes[s];
            let go = visit(counts, len + 1) && rec(sizes, reducible, s, &rest, counts, len + 1, max_len, visit);
            counts[s] -= 1;
            if !go {
                return false;
            }
        }
        true
    }
    let mut counts = vec![0; sizes.len()];
    rec(sizes, reducible, 0, cap, &mut counts, 0, max_len, visit);
}

/// Largest ℓ1 norm of an irreducible configuration.
pub fn max_irreducible_support(sizes: &[Rational], reducible: &[Vec<bool>], cap: &Rational) -> usize {
    let mut best = 0;
    walk_irreducible(sizes, reducible, cap, None, &mut |_, len| {
        best = best.max(len);
        true
    });
    best
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    NotDecreasing(usize),
    TripleIdentity(Triple),
    /// `(1+ε) x_0 < (1-2ε) T`
    TopTooLow,
    /// `x_{d-1} > ε(1+ε) T`
    BottomTooHigh,
    /// `(1+ε) x_{i+1} < x_i`
    Gap(usize),
    /// A multiset of more than `L` sizes that fits and has no reducible pair.
    Closure(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct VerifyReport {
    pub violations: Vec<Violation>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the range, gap and closure properties against capacity `t`.
/// The closure check is repetition-aware.
pub fn verify_scheme(scheme: &RoundingScheme, eps: &Rational, t: &Rational) -> VerifyReport {
    let mut v = Vec::new();
    let x = &scheme.sizes;
    let one = Rational::one();
    let grow = &one + eps;
    for i in 1..x.len() {
        if x[i - 1] <= x[i] {
            v.push(Violation::NotDecreasing(i));
        }
    }
    for tr in &scheme.triples {
        if tr.b >= x.len() || tr.target >= x.len() || &x[tr.a] + &x[tr.b] != x[tr.target] {
            v.push(Violation::TripleIdentity(*tr));
        }
    }
    if let (Some(first), Some(last)) = (x.first(), x.last()) {
        if &grow * first < (&one - ratio(2, 1) * eps) * t {
            v.push(Violation::TopTooLow);
        }
        if *last > eps * &grow * t {
            v.push(Violation::BottomTooHigh);
        }
    }
    for i in 1..x.len() {
        if &grow * &x[i] < x[i - 1] {
            v.push(Violation::Gap(i - 1));
        }
    }
    if v.iter().all(|e| !matches!(e, Violation::TripleIdentity(_))) {
        let l = scheme.support;
        let mut witness = None;
        walk_irreducible(x, &scheme.reducible_pairs(), t, Some(l + 1), &mut |counts, len| {
            if len > l {
                witness = Some(counts.iter().enumerate().flat_map(|(s, &c)| std::iter::repeat_n(s, c)).collect());
                return false;
            }
            true
        });
        if let Some(w) = witness {
            v.push(Violation::Closure(w));
        }
    }
    VerifyReport { violations: v }
}
