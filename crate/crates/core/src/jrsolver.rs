//! Feasibility of `A x = b, x ∈ ℤ≥0` by repeated doubling.
//!
//! Any solution of ℓ1 norm at most `2^K` splits into two halves whose images
//! lie close to `b/2`, and recursively so. Level `K` holds `0` and the single
//! columns near `b/2^K`; level `j` holds the pairwise sums of level `j+1`
//! that lie in the box around `b/2^j`. The box width comes from a bound on
//! the hereditary discrepancy of `A`, which depends only on the largest
//! column ℓ1 norm. Pairwise sums are formed either directly or by a
//! multidimensional FFT of the level's indicator array.

use std::collections::HashMap;

use num_complex::Complex;
use thiserror::Error;

use crate::convolution::{fast_length, fft_convolve, MultiArray};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum JrError {
    #[error("column {column} has l1 norm {norm} above the declared bound {bound}")]
    NormExceeded { column: usize, norm: u64, bound: u64 },
    #[error("right-hand side entry {0} is negative")]
    NegativeRhs(usize),
    #[error("matrix rows and right-hand side disagree in length")]
    Shape,
    #[error("level {level} needs {needed} units of work, limit {limit}")]
    Resource { level: usize, needed: u128, limit: u128 },
    #[error("reconstructed solution does not satisfy the system")]
    Unsound,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Fft,
    Direct,
    /// Direct while the level is sparse relative to its box, FFT otherwise.
    Auto,
}

#[derive(Clone, Debug)]
pub struct JrOptions {
    /// Upper bound on the ℓ1 norm of some solution.
    pub l1_bound: u64,
    /// Declared column norm bound; computed from `A` when absent.
    pub max_column_l1: Option<u64>,
    pub strategy: Strategy,
    /// Largest padded FFT volume per level.
    pub max_fft_volume: u128,
    /// Largest number of pair sums per level on the direct path.
    pub max_pair_work: u128,
}

impl JrOptions {
    pub fn new(l1_bound: u64) -> Self {
        Self {
            l1_bound,
            max_column_l1: None,
            strategy: Strategy::Auto,
            max_fft_volume: 1 << 24,
            max_pair_work: 1 << 28,
        }
    }

    pub fn with_strategy(mut self, s: Strategy) -> Self {
        self.strategy = s;
        self
    }
}

/// Side length of the lattice box for column ℓ1 norm `t`.
pub fn side_length(t: u64) -> u64 {
    match t {
        0 | 1 => 3,
        2 => 7,
        t => 4 * t - 7,
    }
}

/// Lattice points of the closed cube of side length `side` centred at
/// `b / 2^level`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HypercubeBox {
    pub level: u32,
    pub side: i64,
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
}

impl HypercubeBox {
    pub fn new(b: &[i64], level: u32, side: i64) -> Self {
        // b/2^l ± side/2 over the common denominator 2^(l+1)
        let den = 1i128 << (level + 1);
        let w = side as i128 * (1i128 << level);
        let lo = b.iter().map(|&v| -((-(2 * v as i128 - w)).div_euclid(den)) as i64).collect();
        let hi = b.iter().map(|&v| (2 * v as i128 + w).div_euclid(den) as i64).collect();
        Self { level, side, lo, hi }
    }

    /// Intersects row `r` with `[lo, hi]`.
    pub fn clip(&mut self, r: usize, lo: i64, hi: i64) {
        self.lo[r] = self.lo[r].max(lo);
        self.hi[r] = self.hi[r].min(hi);
    }

    pub fn extents(&self) -> Vec<usize> {
        self.lo.iter().zip(&self.hi).map(|(l, h)| (h - l + 1).max(0) as usize).collect()
    }

    pub fn volume(&self) -> u128 {
        self.extents().iter().map(|&e| e as u128).product()
    }

    pub fn contains(&self, p: &[i64]) -> bool {
        p.iter().zip(&self.lo).zip(&self.hi).all(|((v, l), h)| l <= v && v <= h)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Witness {
    Zero,
    Column(usize),
    /// Indices into the next level's points.
    Pair(usize, usize),
    /// Found by convolution; the pair is searched for when unwinding.
    Deferred,
}

/// Attainable points of one level with their witnesses.
#[derive(Clone, Debug)]
pub struct LevelTable {
    pub level: u32,
    pub cube: HypercubeBox,
    pub points: Vec<Vec<i64>>,
    pub witness: Vec<Witness>,
    index: HashMap<Vec<i64>, usize>,
}

impl LevelTable {
    fn new(cube: HypercubeBox) -> Self {
        Self { level: cube.level, cube, points: Vec::new(), witness: Vec::new(), index: HashMap::new() }
    }

    fn insert(&mut self, p: Vec<i64>, w: Witness) {
        if !self.index.contains_key(&p) {
            self.index.insert(p.clone(), self.points.len());
            self.points.push(p);
            self.witness.push(w);
        }
    }

    pub fn find(&self, p: &[i64]) -> Option<usize> {
        self.index.get(p).copied()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct JrOutcome {
    pub solution: Option<Vec<u64>>,
    /// Attainable point counts, level `K` first.
    pub level_counts: Vec<usize>,
    pub side: u64,
}

fn column(a: &[Vec<i64>], k: usize) -> Vec<i64> {
    a.iter().map(|row| row[k]).collect()
}

fn ceil_log2(u: u64) -> u32 {
    if u <= 1 {
        0
    } else {
        64 - (u - 1).leading_zeros()
    }
}

fn combine_direct(prev: &LevelTable, cube: HypercubeBox) -> LevelTable {
    let mut next = LevelTable::new(cube);
    for i in 0..prev.len() {
        for k in i..prev.len() {
            let s: Vec<i64> = prev.points[i].iter().zip(&prev.points[k]).map(|(x, y)| x + y).collect();
            if next.cube.contains(&s) {
                next.insert(s, Witness::Pair(i, k));
            }
        }
    }
    next
}

fn combine_fft(prev: &LevelTable, cube: HypercubeBox) -> LevelTable {
    if prev.is_empty() {
        return LevelTable::new(cube);
    }
    let dims = prev.cube.extents();
    let lo = &prev.cube.lo;
    let mut f = MultiArray::<f64>::zeros(&dims);
    for p in &prev.points {
        let idx: Vec<usize> = p.iter().zip(lo).map(|(v, l)| (v - l) as usize).collect();
        f.set(&idx, Complex::new(1.0, 0.0));
    }
    let g = fft_convolve(&f, &f).expect("self convolution");
    let gd = g.dims().to_vec();
    let mut next = LevelTable::new(cube);
    let ext = next.cube.extents();
    if ext.contains(&0) {
        return next;
    }
    let mut cur = next.cube.lo.clone();
    let mut idx = vec![0usize; cur.len()];
    'outer: loop {
        let mut inside = true;
        for (d, &c) in cur.iter().enumerate() {
            let k = c - 2 * lo[d];
            if k < 0 || k as usize >= gd[d] {
                inside = false;
                break;
            }
            idx[d] = k as usize;
        }
        if inside && g.get(&idx).re >= 0.5 {
            next.insert(cur.clone(), Witness::Deferred);
        }
        for d in (0..cur.len()).rev() {
            if cur[d] < next.cube.hi[d] {
                cur[d] += 1;
                continue 'outer;
            }
            cur[d] = next.cube.lo[d];
        }
        break;
    }
    next
}

fn fft_volume(cube: &HypercubeBox) -> u128 {
    cube.extents().iter().map(|&e| fast_length((2 * e).saturating_sub(1).max(1)) as u128).product()
}

/// Builds all level tables, level `K` first.
pub fn build_levels(a: &[Vec<i64>], b: &[i64], opts: &JrOptions) -> Result<(Vec<LevelTable>, u64), JrError> {
    if a.len() != b.len() {
        return Err(JrError::Shape);
    }
    if let Some(r) = b.iter().position(|&v| v < 0) {
        return Err(JrError::NegativeRhs(r));
    }
    let cols = a.first().map_or(0, |r| r.len());
    let norms: Vec<u64> = (0..cols).map(|k| a.iter().map(|row| row[k].unsigned_abs()).sum()).collect();
    if let Some(bound) = opts.max_column_l1 {
        if let Some((column, &norm)) = norms.iter().enumerate().find(|(_, &n)| n > bound) {
            return Err(JrError::NormExceeded { column, norm, bound });
        }
    }
    let t = opts.max_column_l1.unwrap_or_else(|| norms.iter().copied().max().unwrap_or(1)).max(1);
    let side = side_length(t);
    let top = ceil_log2(opts.l1_bound.max(1));
    // Rows without negative entries keep every partial sum inside [0, b_r],
    // rows without positive entries inside [b_r, 0].
    let bounds: Vec<Option<(i64, i64)>> = a
        .iter()
        .zip(b)
        .map(|(row, &rhs)| {
            if row.iter().all(|&v| v >= 0) {
                Some((0, rhs))
            } else if row.iter().all(|&v| v <= 0) {
                Some((rhs.min(0), 0))
            } else {
                None
            }
        })
        .collect();
    let make_box = |level: u32| {
        let mut c = HypercubeBox::new(b, level, side as i64);
        for (r, bd) in bounds.iter().enumerate() {
            if let Some((lo, hi)) = bd {
                c.clip(r, *lo, *hi);
            }
        }
        c
    };
    let mut table = LevelTable::new(make_box(top));
    let zero = vec![0; b.len()];
    if table.cube.contains(&zero) {
        table.insert(zero, Witness::Zero);
    }
    for (k, &n) in norms.iter().enumerate() {
        let c = column(a, k);
        if n > 0 && table.cube.contains(&c) {
            table.insert(c, Witness::Column(k));
        }
    }
    let mut tables = vec![table];
    for level in (0..top).rev() {
        let prev = tables.last().unwrap();
        let cube = make_box(level);
        let pairs = (prev.len() as u128) * (prev.len() as u128 + 1) / 2;
        let vol = fft_volume(&prev.cube);
        let fft_cost = vol.saturating_mul(prev.cube.extents().len() as u128 + 4) + cube.volume();
        let use_fft = match opts.strategy {
            Strategy::Fft => true,
            Strategy::Direct => false,
            Strategy::Auto => pairs > fft_cost && vol <= opts.max_fft_volume || pairs > opts.max_pair_work,
        };
        let next = if use_fft {
            if vol > opts.max_fft_volume {
                return Err(JrError::Resource { level: level as usize, needed: vol, limit: opts.max_fft_volume });
            }
            combine_fft(prev, cube)
        } else {
            if pairs > opts.max_pair_work {
                return Err(JrError::Resource { level: level as usize, needed: pairs, limit: opts.max_pair_work });
            }
            combine_direct(prev, cube)
        };
        tables.push(next);
    }
    Ok((tables, side))
}

fn split_point(prev: &LevelTable, q: &[i64]) -> Option<(usize, usize)> {
    prev.points.iter().enumerate().find_map(|(i, p)| {
        let r: Vec<i64> = q.iter().zip(p).map(|(a, b)| a - b).collect();
        prev.find(&r).map(|k| (i.min(k), i.max(k)))
    })
}

/// Column multiplicities behind point `i` of table `pos` (tables level `K` first).
pub fn unwind(tables: &[LevelTable], pos: usize, i: usize, cols: usize) -> Vec<u64> {
    let mut x = vec![0u64; cols];
    let mut stack = vec![(pos, i)];
    while let Some((p, i)) = stack.pop() {
        match tables[p].witness[i] {
            Witness::Zero => {}
            Witness::Column(k) => x[k] += 1,
            Witness::Pair(u, v) => {
                stack.push((p - 1, u));
                stack.push((p - 1, v));
            }
            Witness::Deferred => {
                let (u, v) = split_point(&tables[p - 1], &tables[p].points[i]).expect("convolution hit has a pair");
                stack.push((p - 1, u));
                stack.push((p - 1, v));
            }
        }
    }
    x
}

pub fn satisfies(a: &[Vec<i64>], b: &[i64], x: &[u64]) -> bool {
    a.iter().zip(b).all(|(row, &rhs)| row.iter().zip(x).map(|(&c, &v)| c * v as i64).sum::<i64>() == rhs)
}

/// Decides feasibility and reconstructs a solution when one is found.
pub fn solve_ip(a: &[Vec<i64>], b: &[i64], opts: &JrOptions) -> Result<JrOutcome, JrError> {
    let (tables, side) = build_levels(a, b, opts)?;
    let level_counts = tables.iter().map(LevelTable::len).collect();
    let last = tables.len() - 1;
    let cols = a.first().map_or(0, |r| r.len());
    let solution = match tables[last].find(b) {
        Some(i) => {
            let x = unwind(&tables, last, i, cols);
            if !satisfies(a, b, &x) {
                return Err(JrError::Unsound);
            }
            Some(x)
        }
        None => None,
    };
    Ok(JrOutcome { solution, level_counts, side })
}

/// Exhaustive search over `x` with `‖x‖₁ <= l1_cap`.
pub fn brute_force_ip(a: &[Vec<i64>], b: &[i64], l1_cap: u64) -> Option<Vec<u64>> {
    fn rec(a: &[Vec<i64>], k: usize, left: u64, rest: &mut Vec<i64>, x: &mut Vec<u64>) -> bool {
        if k == x.len() {
            return rest.iter().all(|&v| v == 0);
        }
        for v in 0..=left {
            x[k] = v;
            if rec(a, k + 1, left - v, rest, x) {
                return true;
            }
            for (r, row) in a.iter().enumerate() {
                rest[r] -= row[k];
            }
        }
        for (r, row) in a.iter().enumerate() {
            rest[r] += row[k] * (left as i64 + 1);
        }
        x[k] = 0;
        false
    }
    let cols = a.first().map_or(0, |r| r.len());
    let mut rest = b.to_vec();
    let mut x = vec![0; cols];
    rec(a, 0, l1_cap, &mut rest, &mut x).then_some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solve(a: &[Vec<i64>], b: &[i64], u: u64, s: Strategy) -> Option<Vec<u64>> {
        solve_ip(a, b, &JrOptions::new(u).with_strategy(s)).unwrap().solution
    }

    #[test]
    fn side_lengths() {
        assert_eq!(side_length(3), 5);
        assert_eq!(side_length(1), 3);
        assert_eq!(side_length(2), 7);
        assert_eq!(side_length(4), 9);
        assert!((1..20).all(|t| side_length(t) % 2 == 1));
    }

    #[test]
    fn examples() {
        for s in [Strategy::Direct, Strategy::Fft] {
            assert_eq!(solve(&[vec![1]], &[3], 4, s), Some(vec![3]));
            assert_eq!(solve(&[vec![2]], &[3], 4, s), None);
            assert_eq!(solve(&[vec![2, 1], vec![0, 1]], &[3, 1], 4, s), Some(vec![1, 1]));
            let x = solve(&[vec![1, -1]], &[0], 4, s).unwrap();
            assert!(satisfies(&[vec![1, -1]], &[0], &x));
        }
    }

    #[test]
    fn brute_force_examples() {
        assert_eq!(brute_force_ip(&[vec![1, -1]], &[0], 3), Some(vec![0, 0]));
        assert_eq!(brute_force_ip(&[vec![2]], &[3], 5), None);
        let x = brute_force_ip(&[vec![2, 1], vec![0, 1]], &[3, 1], 2).unwrap();
        assert_eq!(x, vec![1, 1]);
        assert_eq!(brute_force_ip(&[vec![1]], &[3], 2), None);
    }

    #[test]
    fn boxes() {
        // centre (1.5, 0), half-width 2.5
        let c = HypercubeBox::new(&[3, 0], 1, 5);
        assert_eq!(c.lo, vec![-1, -2]);
        assert_eq!(c.hi, vec![4, 2]);
        assert_eq!(c.extents(), vec![6, 5]);
        assert!(c.contains(&[0, 0]) && !c.contains(&[5, 0]));
    }

    #[test]
    fn level_count_and_witness_chains() {
        let a = vec![vec![1, 0, 2], vec![0, 1, 1]];
        let b = [5, 3];
        let (tables, _) = build_levels(&a, &b, &JrOptions::new(8)).unwrap();
        assert_eq!(tables.len(), 4);
        for (p, t) in tables.iter().enumerate() {
            for (i, pt) in t.points.iter().enumerate() {
                let x = unwind(&tables, p, i, 3);
                let img: Vec<i64> = a.iter().map(|row| row.iter().zip(&x).map(|(c, v)| c * *v as i64).sum()).collect();
                assert_eq!(&img, pt);
            }
        }
    }

    #[test]
    fn strategies_agree() {
        let a = vec![vec![1, 2, -1], vec![1, 0, 1]];
        for b0 in 0..6 {
            for b1 in 0..6 {
                let d = solve(&a, &[b0, b1], 16, Strategy::Direct).is_some();
                let f = solve(&a, &[b0, b1], 16, Strategy::Fft).is_some();
                assert_eq!(d, f, "{b0} {b1}");
            }
        }
    }

    #[test]
    fn errors() {
        let o = JrOptions { max_column_l1: Some(1), ..JrOptions::new(4) };
        assert_eq!(solve_ip(&[vec![2]], &[2], &o).unwrap_err(), JrError::NormExceeded { column: 0, norm: 2, bound: 1 });
        assert_eq!(solve_ip(&[vec![1]], &[-1], &JrOptions::new(4)).unwrap_err(), JrError::NegativeRhs(0));
        let tight = JrOptions { max_fft_volume: 1, ..JrOptions::new(4).with_strategy(Strategy::Fft) };
        assert!(matches!(solve_ip(&[vec![1]], &[3], &tight), Err(JrError::Resource { .. })));
    }
}
