//! Dense two-phase simplex over any [`Scalar`].
//!
//! Sized for the rounding optimizer (a dozen variables, up to a few hundred
//! rows). With exact rationals the verdicts are exact; Bland's rule keeps the
//! method finite.

use crate::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint<S> {
    pub coeffs: Vec<S>,
    pub rel: Relation,
    pub rhs: S,
}

/// `max c·x` subject to the constraints and `x >= 0`.
#[derive(Clone, Debug)]
pub struct LinearProgram<S> {
    pub n: usize,
    pub objective: Vec<S>,
    pub constraints: Vec<Constraint<S>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome<S> {
    Optimal { x: Vec<S>, value: S },
    Infeasible,
    Unbounded,
}

impl<S: Scalar> LpOutcome<S> {
    pub fn is_feasible(&self) -> bool {
        !matches!(self, LpOutcome::Infeasible)
    }
}

impl<S: Scalar> LinearProgram<S> {
    pub fn new(n: usize) -> Self {
        Self { n, objective: vec![S::zero(); n], constraints: Vec::new() }
    }

    pub fn add(&mut self, coeffs: Vec<S>, rel: Relation, rhs: S) {
        assert_eq!(coeffs.len(), self.n);
        self.constraints.push(Constraint { coeffs, rel, rhs });
    }

    /// Adds `Σ coef·x_var  rel  rhs` from sparse terms.
    pub fn add_sparse(&mut self, terms: &[(usize, S)], rel: Relation, rhs: S) {
        let mut coeffs = vec![S::zero(); self.n];
        for (v, c) in terms {
            coeffs[*v] = coeffs[*v].clone() + c.clone();
        }
        self.add(coeffs, rel, rhs);
    }

    pub fn solve(&self) -> LpOutcome<S> {
        Tableau::build(self).run(&self.objective)
    }
}

struct Tableau<S> {
    rows: Vec<Vec<S>>,
    rhs: Vec<S>,
    basis: Vec<usize>,
    n_orig: usize,
    n_cols: usize,
    artificial_start: usize,
}

impl<S: Scalar> Tableau<S> {
    fn build(lp: &LinearProgram<S>) -> Self {
        let m = lp.constraints.len();
        let n_slack = lp.constraints.iter().filter(|c| c.rel != Relation::Eq).count();
        let artificial_start = lp.n + n_slack;
        let mut rows = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut slack = lp.n;
        let mut art = artificial_start;
        let mut needs_art = Vec::with_capacity(m);
        for c in &lp.constraints {
            let flip = c.rhs.is_negative();
            let mut row: Vec<S> = c.coeffs.iter().map(|a| if flip { -a.clone() } else { a.clone() }).collect();
            let b = if flip { -c.rhs.clone() } else { c.rhs.clone() };
            let rel = match (c.rel, flip) {
                (Relation::Le, true) => Relation::Ge,
                (Relation::Ge, true) => Relation::Le,
                (r, _) => r,
            };
            row.resize(artificial_start, S::zero());
            let direct = match rel {
                Relation::Le => {
                    row[slack] = S::one();
                    slack += 1;
                    Some(slack - 1)
                }
                Relation::Ge => {
                    row[slack] = -S::one();
                    slack += 1;
                    None
                }
                Relation::Eq => None,
            };
            match direct {
                Some(col) => basis.push(col),
                None => {
                    basis.push(art);
                    art += 1;
                }
            }
            needs_art.push(direct.is_none());
            rows.push(row);
            rhs.push(b);
        }
        let n_cols = art;
        let mut a_idx = artificial_start;
        for (row, need) in rows.iter_mut().zip(&needs_art) {
            row.resize(n_cols, S::zero());
            if *need {
                row[a_idx] = S::one();
                a_idx += 1;
            }
        }
        Tableau { rows, rhs, basis, n_orig: lp.n, n_cols, artificial_start }
    }

    fn pivot(&mut self, r: usize, c: usize, obj: &mut [S], obj_val: &mut S) {
        let p = self.rows[r][c].clone();
        if !p.is_one() {
            for v in self.rows[r].iter_mut() {
                if !v.is_zero() {
                    *v = v.clone() / p.clone();
                }
            }
            self.rhs[r] = self.rhs[r].clone() / p;
        }
        let prow = self.rows[r].clone();
        let pb = self.rhs[r].clone();
        let nz: Vec<usize> = (0..self.n_cols).filter(|&j| !prow[j].is_zero()).collect();
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let f = self.rows[i][c].clone();
            if f.is_zero() {
                continue;
            }
            for &j in &nz {
                let v = self.rows[i][j].clone() - f.clone() * prow[j].clone();
                self.rows[i][j] = if v.approx_zero() { S::zero() } else { v };
            }
            self.rows[i][c] = S::zero();
            self.rhs[i] = self.rhs[i].clone() - f * pb.clone();
            if self.rhs[i].is_negative() && self.rhs[i].approx_zero() {
                self.rhs[i] = S::zero();
            }
        }
        let f = obj[c].clone();
        if !f.is_zero() {
            for &j in &nz {
                obj[j] = obj[j].clone() - f.clone() * prow[j].clone();
            }
            obj[c] = S::zero();
            *obj_val = obj_val.clone() - f * pb;
        }
        self.basis[r] = c;
    }

    /// Maximizes with reduced-cost row `obj` (entries are `-c_j` adjusted
    /// for the basis) over columns `< limit`. Returns false when unbounded.
    fn optimize(&mut self, obj: &mut [S], obj_val: &mut S, limit: usize) -> bool {
        loop {
            let neg_tol = -S::tolerance();
            let enter = (0..limit).find(|&j| obj[j] < neg_tol);
            let Some(c) = enter else { return true };
            let mut best: Option<(usize, S)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][c];
                if *a > S::tolerance() {
                    let ratio = self.rhs[i].clone() / a.clone();
                    let better = match &best {
                        None => true,
                        Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            let Some((r, _)) = best else { return false };
            self.pivot(r, c, obj, obj_val);
        }
    }

    fn reduced_row(&self, cost: &[S]) -> (Vec<S>, S) {
        let mut obj: Vec<S> = (0..self.n_cols).map(|j| -cost.get(j).cloned().unwrap_or_else(S::zero)).collect();
        let mut val = S::zero();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = cost.get(b).cloned().unwrap_or_else(S::zero);
            if cb.is_zero() {
                continue;
            }
            for j in 0..self.n_cols {
                obj[j] = obj[j].clone() + cb.clone() * self.rows[i][j].clone();
            }
            val = val + cb * self.rhs[i].clone();
        }
        (obj, val)
    }

    fn run(mut self, objective: &[S]) -> LpOutcome<S> {
        if self.n_cols > self.artificial_start {
            let mut cost = vec![S::zero(); self.n_cols];
            for c in cost.iter_mut().skip(self.artificial_start) {
                *c = -S::one();
            }
            let (mut obj, mut val) = self.reduced_row(&cost);
            let n_cols = self.n_cols;
            self.optimize(&mut obj, &mut val, n_cols);
            if val < -S::tolerance() {
                return LpOutcome::Infeasible;
            }
            // Drive remaining artificials out of the basis; drop redundant rows.
            let mut i = 0;
            while i < self.rows.len() {
                if self.basis[i] >= self.artificial_start {
                    let col = (0..self.artificial_start).find(|&j| !self.rows[i][j].approx_zero());
                    match col {
                        Some(c) => self.pivot(i, c, &mut obj, &mut val),
                        None => {
                            self.rows.remove(i);
                            self.rhs.remove(i);
                            self.basis.remove(i);
                            continue;
                        }
                    }
                }
                i += 1;
            }
        }
        let (mut obj, mut val) = self.reduced_row(objective);
        let limit = self.artificial_start;
        if !self.optimize(&mut obj, &mut val, limit) {
            return LpOutcome::Unbounded;
        }
        let mut x = vec![S::zero(); self.n_orig];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.n_orig {
                x[b] = self.rhs[i].clone();
            }
        }
        LpOutcome::Optimal { x, value: val }
    }
}
