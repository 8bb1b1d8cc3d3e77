//! Exact linear programming over rationals.
//!
//! Two-phase tableau simplex with Bland's rule. Every optimal outcome carries
//! a dual vector expressed against the caller's constraint list, and the
//! primal/dual pair is re-checked by substitution (feasibility, equal
//! objective values, complementary slackness) before it is returned.

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("constraint {row} has {found} coefficients, expected {expected}")]
    DimensionMismatch {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("variable index {index} out of range for {vars} variables")]
    VariableOutOfRange { index: usize, vars: usize },
    #[error("optimality certificate failed re-verification: {0}")]
    CertificateRejected(String),
}

/// `maximize objective · x` subject to the constraints, with `x_j ≥ 0` for
/// every variable flagged nonnegative and `x_j` free otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    objective: Vec<Rational>,
    constraints: Vec<Constraint>,
    nonnegative: Vec<bool>,
}

impl LinearProgram {
    /// All variables start out nonnegative.
    pub fn maximize(objective: Vec<Rational>) -> Self {
        let n = objective.len();
        Self {
            objective,
            constraints: Vec::new(),
            nonnegative: vec![true; n],
        }
    }

    pub fn var_count(&self) -> usize {
        self.objective.len()
    }

    pub fn objective(&self) -> &[Rational] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn is_nonnegative(&self, var: usize) -> bool {
        self.nonnegative[var]
    }

    pub fn set_free(&mut self, var: usize) -> Result<(), LpError> {
        let vars = self.var_count();
        let slot = self
            .nonnegative
            .get_mut(var)
            .ok_or(LpError::VariableOutOfRange { index: var, vars })?;
        *slot = false;
        Ok(())
    }

    pub fn add_constraint(
        &mut self,
        coeffs: Vec<Rational>,
        relation: Relation,
        rhs: Rational,
    ) -> Result<(), LpError> {
        if coeffs.len() != self.var_count() {
            return Err(LpError::DimensionMismatch {
                row: self.constraints.len(),
                expected: self.var_count(),
                found: coeffs.len(),
            });
        }
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Solver result. `primal`, `dual` and `value` are meaningful only when the
/// status is [`LpStatus::Optimal`]; otherwise they are empty and zero.
#[derive(Debug, Clone, PartialEq)]
pub struct LpOutcome {
    pub status: LpStatus,
    pub primal: Vec<Rational>,
    /// One multiplier per constraint, in the caller's order: `≥ 0` for `≤`
    /// rows, `≤ 0` for `≥` rows, free for `=` rows.
    pub dual: Vec<Rational>,
    pub value: Rational,
}

impl LpOutcome {
    fn without_solution(status: LpStatus) -> Self {
        Self {
            status,
            primal: Vec::new(),
            dual: Vec::new(),
            value: Rational::zero(),
        }
    }
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    /// reduced costs `z_j - c_j`
    cost: Vec<Rational>,
    value: Rational,
    basis: Vec<usize>,
}

enum PivotOutcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn price(&mut self, c: &[Rational]) {
        let ncols = c.len();
        let mut cost: Vec<Rational> = c.iter().map(|cj| -cj).collect();
        let mut value = Rational::zero();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = &c[b];
            if cb.is_zero() {
                continue;
            }
            for (j, slot) in cost.iter_mut().enumerate().take(ncols) {
                let a = &self.rows[i][j];
                if !a.is_zero() {
                    *slot += cb * a;
                }
            }
            value += cb * &self.rhs[i];
        }
        self.cost = cost;
        self.value = value;
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.rows[row][col].clone();
        if !p.is_one() {
            for a in self.rows[row].iter_mut() {
                if !a.is_zero() {
                    *a /= &p;
                }
            }
            self.rhs[row] /= &p;
        }
        let support: Vec<usize> = self.rows[row]
            .iter()
            .enumerate()
            .filter(|(_, a)| !a.is_zero())
            .map(|(j, _)| j)
            .collect();
        let pivot_row = self.rows[row].clone();
        let pivot_rhs = self.rhs[row].clone();
        for i in 0..self.rows.len() {
            if i == row {
                continue;
            }
            let factor = self.rows[i][col].clone();
            if factor.is_zero() {
                continue;
            }
            for &j in &support {
                let delta = &factor * &pivot_row[j];
                self.rows[i][j] -= delta;
            }
            self.rhs[i] -= &factor * &pivot_rhs;
        }
        let factor = self.cost[col].clone();
        if !factor.is_zero() {
            for &j in &support {
                let delta = &factor * &pivot_row[j];
                self.cost[j] -= delta;
            }
            self.value -= &factor * &pivot_rhs;
        }
        self.basis[row] = col;
    }

    /// Bland's rule: lowest-index improving column enters; among tied ratios
    /// the row whose basic variable has the lowest index leaves.
    fn run(&mut self, may_enter: &[bool]) -> PivotOutcome {
        loop {
            let entering =
                (0..self.cost.len()).find(|&j| may_enter[j] && self.cost[j].is_negative());
            let Some(col) = entering else {
                return PivotOutcome::Optimal;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / a;
                let better = match &leave {
                    None => true,
                    Some((r, best)) => {
                        ratio < *best || (ratio == *best && self.basis[i] < self.basis[*r])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                None => return PivotOutcome::Unbounded,
                Some((row, _)) => self.pivot(row, col),
            }
        }
    }
}

/// Solves `lp` exactly.
pub fn solve(lp: &LinearProgram) -> Result<LpOutcome, LpError> {
    let nvars = lp.var_count();
    for (row, c) in lp.constraints.iter().enumerate() {
        if c.coeffs.len() != nvars {
            return Err(LpError::DimensionMismatch {
                row,
                expected: nvars,
                found: c.coeffs.len(),
            });
        }
    }

    // structural columns: one per nonnegative variable, a +/- pair per free one
    let mut var_cols: Vec<(usize, Option<usize>)> = Vec::with_capacity(nvars);
    let mut ncols = 0;
    for j in 0..nvars {
        if lp.nonnegative[j] {
            var_cols.push((ncols, None));
            ncols += 1;
        } else {
            var_cols.push((ncols, Some(ncols + 1)));
            ncols += 2;
        }
    }

    // normalize each row to a nonnegative right-hand side; a zero rhs `≥` row
    // is flipped to `≤` so it can start from its slack
    let m = lp.constraints.len();
    let mut signs = Vec::with_capacity(m);
    let mut relations = Vec::with_capacity(m);
    for c in &lp.constraints {
        let flip = c.rhs.is_negative() || (c.rhs.is_zero() && c.relation == Relation::Ge);
        signs.push(if flip { -1 } else { 1 });
        relations.push(match (c.relation, flip) {
            (Relation::Le, true) => Relation::Ge,
            (Relation::Ge, true) => Relation::Le,
            (r, _) => r,
        });
    }
    let mut unit_col = vec![0usize; m];
    let mut surplus_col = vec![None; m];
    let mut artificial = Vec::new();
    for i in 0..m {
        match relations[i] {
            Relation::Le => {
                unit_col[i] = ncols;
                ncols += 1;
            }
            Relation::Ge => {
                surplus_col[i] = Some(ncols);
                unit_col[i] = ncols + 1;
                artificial.push(ncols + 1);
                ncols += 2;
            }
            Relation::Eq => {
                unit_col[i] = ncols;
                artificial.push(ncols);
                ncols += 1;
            }
        }
    }
    let mut is_artificial = vec![false; ncols];
    for &a in &artificial {
        is_artificial[a] = true;
    }

    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for (i, c) in lp.constraints.iter().enumerate() {
        let s = Rational::from_integer(signs[i].into());
        let mut row = vec![Rational::zero(); ncols];
        for (j, a) in c.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let (pos, neg) = var_cols[j];
            row[pos] = &s * a;
            if let Some(neg) = neg {
                row[neg] = -(&s * a);
            }
        }
        if let Some(sc) = surplus_col[i] {
            row[sc] = -Rational::one();
        }
        row[unit_col[i]] = Rational::one();
        rows.push(row);
        rhs.push(&s * &c.rhs);
    }
    let mut tableau = Tableau {
        rows,
        rhs,
        cost: Vec::new(),
        value: Rational::zero(),
        basis: unit_col.clone(),
    };

    if !artificial.is_empty() {
        let phase1: Vec<Rational> = (0..ncols)
            .map(|j| {
                if is_artificial[j] {
                    -Rational::one()
                } else {
                    Rational::zero()
                }
            })
            .collect();
        tableau.price(&phase1);
        let everyone = vec![true; ncols];
        tableau.run(&everyone);
        if tableau.value.is_negative() {
            return Ok(LpOutcome::without_solution(LpStatus::Infeasible));
        }
        // drive zero-level artificials out where a real column can replace them;
        // rows where none can are redundant and keep their artificial at zero
        for i in 0..m {
            if !is_artificial[tableau.basis[i]] {
                continue;
            }
            if let Some(col) =
                (0..ncols).find(|&j| !is_artificial[j] && !tableau.rows[i][j].is_zero())
            {
                tableau.pivot(i, col);
            }
        }
    }

    let mut c = vec![Rational::zero(); ncols];
    for (j, obj) in lp.objective.iter().enumerate() {
        let (pos, neg) = var_cols[j];
        c[pos] = obj.clone();
        if let Some(neg) = neg {
            c[neg] = -obj;
        }
    }
    tableau.price(&c);
    let may_enter: Vec<bool> = is_artificial.iter().map(|a| !a).collect();
    if let PivotOutcome::Unbounded = tableau.run(&may_enter) {
        return Ok(LpOutcome::without_solution(LpStatus::Unbounded));
    }

    let mut column_value = vec![Rational::zero(); ncols];
    for (i, &b) in tableau.basis.iter().enumerate() {
        column_value[b] = tableau.rhs[i].clone();
    }
    let primal: Vec<Rational> = var_cols
        .iter()
        .map(|&(pos, neg)| match neg {
            None => column_value[pos].clone(),
            Some(neg) => &column_value[pos] - &column_value[neg],
        })
        .collect();
    // z_j of the unit column e_i is the i-th entry of c_B B^-1
    let dual: Vec<Rational> = (0..m)
        .map(|i| {
            let y = tableau.cost[unit_col[i]].clone();
            if signs[i] < 0 {
                -y
            } else {
                y
            }
        })
        .collect();
    let outcome = LpOutcome {
        status: LpStatus::Optimal,
        primal,
        dual,
        value: tableau.value.clone(),
    };
    verify_certificate(lp, &outcome).map_err(LpError::CertificateRejected)?;
    Ok(outcome)
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .filter(|(x, y)| !x.is_zero() && !y.is_zero())
        .fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

/// Checks an optimal outcome by substitution: primal and dual feasibility,
/// equal objective values and complementary slackness, all exactly.
pub fn verify_certificate(lp: &LinearProgram, outcome: &LpOutcome) -> Result<(), String> {
    let x = &outcome.primal;
    let y = &outcome.dual;
    if x.len() != lp.var_count() || y.len() != lp.constraints.len() {
        return Err("certificate has the wrong shape".into());
    }
    for (j, xj) in x.iter().enumerate() {
        if lp.nonnegative[j] && xj.is_negative() {
            return Err(format!("primal variable {j} is negative"));
        }
    }
    for (i, c) in lp.constraints.iter().enumerate() {
        let lhs = dot(&c.coeffs, x);
        let ok = match c.relation {
            Relation::Le => lhs <= c.rhs,
            Relation::Ge => lhs >= c.rhs,
            Relation::Eq => lhs == c.rhs,
        };
        if !ok {
            return Err(format!("primal violates constraint {i}"));
        }
        let sign_ok = match c.relation {
            Relation::Le => !y[i].is_negative(),
            Relation::Ge => !y[i].is_positive(),
            Relation::Eq => true,
        };
        if !sign_ok {
            return Err(format!("dual multiplier {i} has the wrong sign"));
        }
        if !(&y[i] * (&c.rhs - &lhs)).is_zero() {
            return Err(format!("complementary slackness fails on constraint {i}"));
        }
    }
    for (j, xj) in x.iter().enumerate() {
        let column: Rational = lp
            .constraints
            .iter()
            .zip(y)
            .filter(|(c, yi)| !c.coeffs[j].is_zero() && !yi.is_zero())
            .fold(Rational::zero(), |acc, (c, yi)| acc + &c.coeffs[j] * yi);
        let reduced = &column - &lp.objective[j];
        if lp.nonnegative[j] {
            if reduced.is_negative() {
                return Err(format!("dual violates the column of variable {j}"));
            }
            if !(&reduced * xj).is_zero() {
                return Err(format!("complementary slackness fails on variable {j}"));
            }
        } else if !reduced.is_zero() {
            return Err(format!("dual violates the column of free variable {j}"));
        }
    }
    let primal_value = dot(&lp.objective, x);
    let rhs: Vec<Rational> = lp.constraints.iter().map(|c| c.rhs.clone()).collect();
    let dual_value = dot(&rhs, y);
    if primal_value != outcome.value || dual_value != outcome.value {
        return Err("primal and dual objective values differ".into());
    }
    Ok(())
}
