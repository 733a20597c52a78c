//! Dense two-phase tableau simplex for small linear programs.
//!
//! Maximizes `c^T x` subject to linear rows and `x >= 0`. Dantzig pricing is
//! used until a run of degenerate pivots is seen, after which the solver
//! switches to Bland's rule for the rest of the phase.

use alloc::vec;
use alloc::vec::Vec;

const PIVOT_EPS: f64 = 1e-9;
const FEAS_EPS: f64 = 1e-7;
const DEGENERATE_RUN: usize = 50;
const MAX_ITERATIONS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum LpError {
    #[error("infeasible")]
    Infeasible,
    #[error("unbounded")]
    Unbounded,
    #[error("iteration limit reached")]
    IterationLimit,
    #[error("coefficient is not finite")]
    NonFinite,
}

#[derive(Debug, Clone)]
struct Row {
    terms: Vec<(usize, f64)>,
    rel: Relation,
    rhs: f64,
}

#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    vars: usize,
    objective: Vec<f64>,
    rows: Vec<Row>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

impl LinearProgram {
    pub fn new(vars: usize) -> Self {
        LinearProgram {
            vars,
            objective: vec![0.0; vars],
            rows: Vec::new(),
        }
    }

    pub fn var_count(&self) -> usize {
        self.vars
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn set_objective(&mut self, var: usize, coef: f64) {
        self.objective[var] = coef;
    }

    /// Adds `sum terms (relation) rhs`. Repeated variables are summed.
    pub fn add_row(&mut self, terms: Vec<(usize, f64)>, rel: Relation, rhs: f64) {
        self.rows.push(Row { terms, rel, rhs });
    }

    pub fn solve(&self) -> Result<LpSolution, LpError> {
        if self.objective.iter().any(|c| !c.is_finite())
            || self
                .rows
                .iter()
                .any(|r| !r.rhs.is_finite() || r.terms.iter().any(|t| !t.1.is_finite()))
        {
            return Err(LpError::NonFinite);
        }
        Tableau::build(self).run(self)
    }
}

struct Tableau {
    m: usize,
    /// Structural plus slack columns; artificial columns follow.
    real_cols: usize,
    width: usize,
    data: Vec<f64>,
    obj: Vec<f64>,
    basis: Vec<usize>,
    artificial_rows: Vec<usize>,
    iterations: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let m = lp.rows.len();
        let slack_count = lp.rows.iter().filter(|r| r.rel != Relation::Eq).count();
        let mut needs_art = Vec::with_capacity(m);
        for r in &lp.rows {
            // After flipping to rhs >= 0, a `<=` row keeps a +1 slack as its basis.
            let flipped = r.rhs < 0.0;
            let rel = match (r.rel, flipped) {
                (Relation::Le, true) => Relation::Ge,
                (Relation::Ge, true) => Relation::Le,
                (rel, _) => rel,
            };
            needs_art.push(rel != Relation::Le);
        }
        let art_count = needs_art.iter().filter(|&&a| a).count();
        let real_cols = lp.vars + slack_count;
        let cols = real_cols + art_count;
        let width = cols + 1;
        let mut data = vec![0.0; m * width];
        let mut basis = vec![0; m];
        let mut artificial_rows = Vec::new();

        let mut slack = lp.vars;
        let mut art = real_cols;
        for (i, r) in lp.rows.iter().enumerate() {
            let sign = if r.rhs < 0.0 { -1.0 } else { 1.0 };
            let row = &mut data[i * width..(i + 1) * width];
            for &(j, a) in &r.terms {
                row[j] += sign * a;
            }
            row[cols] = sign * r.rhs;
            if r.rel != Relation::Eq {
                let s = if r.rel == Relation::Le { 1.0 } else { -1.0 };
                row[slack] = sign * s;
                if !needs_art[i] {
                    basis[i] = slack;
                }
                slack += 1;
            }
            if needs_art[i] {
                row[art] = 1.0;
                basis[i] = art;
                artificial_rows.push(i);
                art += 1;
            }
        }
        Tableau {
            m,
            real_cols,
            width,
            data,
            obj: vec![0.0; width],
            basis,
            artificial_rows,
            iterations: 0,
        }
    }

    fn rhs_col(&self) -> usize {
        self.width - 1
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width + j]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let p = self.at(r, c);
        {
            let row = &mut self.data[r * w..(r + 1) * w];
            for v in row.iter_mut() {
                *v /= p;
            }
            row[c] = 1.0;
        }
        let (before, rest) = self.data.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        for row in before.chunks_exact_mut(w).chain(after.chunks_exact_mut(w)) {
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(prow.iter()) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        let f = self.obj[c];
        if f != 0.0 {
            for (v, pv) in self.obj.iter_mut().zip(prow.iter()) {
                *v -= f * pv;
            }
            self.obj[c] = 0.0;
        }
        self.basis[r] = c;
        self.iterations += 1;
    }

    /// Primal simplex on the current objective row over columns `0..cols`.
    fn optimize(&mut self, cols: usize) -> Result<(), LpError> {
        let rhs = self.rhs_col();
        let mut bland = false;
        let mut degenerate = 0usize;
        loop {
            if self.iterations > MAX_ITERATIONS {
                return Err(LpError::IterationLimit);
            }
            let entering = if bland {
                (0..cols).find(|&j| self.obj[j] < -PIVOT_EPS)
            } else {
                let mut best = None;
                let mut best_v = -PIVOT_EPS;
                for j in 0..cols {
                    if self.obj[j] < best_v {
                        best_v = self.obj[j];
                        best = Some(j);
                    }
                }
                best
            };
            let Some(c) = entering else { return Ok(()) };

            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let a = self.at(i, c);
                if a <= PIVOT_EPS {
                    continue;
                }
                let ratio = self.at(i, rhs) / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - PIVOT_EPS || (ratio <= lr + PIVOT_EPS && self.basis[i] < self.basis[li]) {
                            Some((i, ratio))
                        } else {
                            Some((li, lr))
                        }
                    }
                };
            }
            let Some((r, ratio)) = leave else {
                return Err(LpError::Unbounded);
            };
            if ratio.abs() <= PIVOT_EPS {
                degenerate += 1;
                if degenerate >= DEGENERATE_RUN {
                    bland = true;
                }
            } else {
                degenerate = 0;
            }
            self.pivot(r, c);
        }
    }

    fn set_objective(&mut self, costs: &[f64]) {
        // Reduced costs z_j - c_j for the current basis.
        self.obj.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..costs.len() {
            self.obj[j] = -costs[j];
        }
        for i in 0..self.m {
            let cb = costs.get(self.basis[i]).copied().unwrap_or(0.0);
            if cb != 0.0 {
                let w = self.width;
                for j in 0..w {
                    self.obj[j] += cb * self.data[i * w + j];
                }
            }
        }
    }

    fn run(mut self, lp: &LinearProgram) -> Result<LpSolution, LpError> {
        let cols = self.width - 1;
        if !self.artificial_rows.is_empty() {
            let mut phase1 = vec![0.0; cols];
            for c in self.real_cols..cols {
                phase1[c] = -1.0;
            }
            self.set_objective(&phase1);
            self.optimize(cols)?;
            let infeasibility = -self.obj[self.rhs_col()];
            let scale = lp.rows.iter().map(|r| r.rhs.abs()).fold(1.0, f64::max);
            if infeasibility > FEAS_EPS * scale {
                return Err(LpError::Infeasible);
            }
            self.evict_artificials();
        }

        let mut costs = vec![0.0; self.real_cols];
        costs[..lp.vars].copy_from_slice(&lp.objective);
        self.set_objective(&costs);
        self.optimize(self.real_cols)?;

        let rhs = self.rhs_col();
        let mut x = vec![0.0; lp.vars];
        for i in 0..self.m {
            let b = self.basis[i];
            if b < lp.vars {
                x[b] = self.at(i, rhs).max(0.0);
            }
        }
        let objective = x.iter().zip(&lp.objective).map(|(a, c)| a * c).sum();
        Ok(LpSolution {
            x,
            objective,
            iterations: self.iterations,
        })
    }

    /// Pivots zero-level artificials out of the basis; rows where that is
    /// impossible are redundant and dropped.
    fn evict_artificials(&mut self) {
        let mut i = 0;
        while i < self.m {
            if self.basis[i] >= self.real_cols {
                let col = (0..self.real_cols).find(|&j| self.at(i, j).abs() > PIVOT_EPS);
                match col {
                    Some(j) => self.pivot(i, j),
                    None => {
                        self.drop_row(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }

    fn drop_row(&mut self, i: usize) {
        let w = self.width;
        self.data.drain(i * w..(i + 1) * w);
        self.basis.remove(i);
        self.m -= 1;
    }
}
