//! Exact phase-one simplex for rational feasibility problems.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearConstraint {
    pub coeffs: Vec<BigRational>,
    pub relation: Relation,
    pub rhs: BigRational,
}

/// A conjunction of linear constraints over variables that are either
/// nonnegative (the default) or free.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearSystem {
    free: Vec<bool>,
    constraints: Vec<LinearConstraint>,
}

impl LinearSystem {
    pub fn new(num_vars: usize) -> Self {
        Self {
            free: vec![false; num_vars],
            constraints: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.free.len()
    }

    pub fn set_free(&mut self, var: usize) {
        self.free[var] = true;
    }

    pub fn constraints(&self) -> &[LinearConstraint] {
        &self.constraints
    }

    pub fn add(
        &mut self,
        coeffs: Vec<BigRational>,
        relation: Relation,
        rhs: BigRational,
    ) -> Result<()> {
        if coeffs.len() != self.num_vars() {
            return Err(Error::DimensionMismatch(format!(
                "constraint has {} coefficients, system has {} variables",
                coeffs.len(),
                self.num_vars()
            )));
        }
        self.constraints.push(LinearConstraint {
            coeffs,
            relation,
            rhs,
        });
        Ok(())
    }

    /// Adds `M x (rel) rhs` row by row for an integer matrix `M`.
    pub fn add_int_rows(
        &mut self,
        rows: &[Vec<BigInt>],
        relation: Relation,
        rhs: &[BigRational],
    ) -> Result<()> {
        for (row, b) in rows.iter().zip(rhs) {
            let coeffs = row.iter().cloned().map(BigRational::from_integer).collect();
            self.add(coeffs, relation, b.clone())?;
        }
        Ok(())
    }

    pub fn is_satisfied_by(&self, x: &[BigRational]) -> bool {
        if x.len() != self.num_vars() {
            return false;
        }
        let signs_ok = x
            .iter()
            .zip(&self.free)
            .all(|(v, &free)| free || !v.is_negative());
        signs_ok
            && self.constraints.iter().all(|c| {
                let lhs = c
                    .coeffs
                    .iter()
                    .zip(x)
                    .fold(BigRational::zero(), |acc, (a, v)| acc + a * v);
                match c.relation {
                    Relation::Le => lhs <= c.rhs,
                    Relation::Ge => lhs >= c.rhs,
                    Relation::Eq => lhs == c.rhs,
                }
            })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Feasibility {
    Feasible(Vec<BigRational>),
    Infeasible,
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }

    pub fn witness(self) -> Option<Vec<BigRational>> {
        match self {
            Feasibility::Feasible(x) => Some(x),
            Feasibility::Infeasible => None,
        }
    }
}

/// Decides feasibility exactly and returns a vertex witness when feasible.
///
/// Free variables are split into two nonnegative parts, every row gets an
/// artificial variable, and the sum of artificials is minimised with Bland's
/// rule, which cannot cycle.
pub fn lp_feasible(sys: &LinearSystem) -> Feasibility {
    let n = sys.num_vars();
    // column index of the positive part (and negative part for free vars)
    let mut var_cols = Vec::with_capacity(n);
    let mut ncols = 0;
    for &free in &sys.free {
        var_cols.push((ncols, free.then_some(ncols + 1)));
        ncols += if free { 2 } else { 1 };
    }
    let structural = ncols;
    let slack_count = sys
        .constraints
        .iter()
        .filter(|c| c.relation != Relation::Eq)
        .count();
    let rows = sys.constraints.len();
    let art_start = structural + slack_count;
    let total = art_start + rows;
    let rhs_col = total;

    let mut tab: Vec<Vec<BigRational>> = Vec::with_capacity(rows + 1);
    let mut next_slack = structural;
    for (i, c) in sys.constraints.iter().enumerate() {
        let mut row = vec![BigRational::zero(); total + 1];
        for (j, a) in c.coeffs.iter().enumerate() {
            let (pos, neg) = var_cols[j];
            row[pos] = a.clone();
            if let Some(neg) = neg {
                row[neg] = -a.clone();
            }
        }
        match c.relation {
            Relation::Le => {
                row[next_slack] = BigRational::from_integer(1.into());
                next_slack += 1;
            }
            Relation::Ge => {
                row[next_slack] = BigRational::from_integer((-1).into());
                next_slack += 1;
            }
            Relation::Eq => {}
        }
        row[rhs_col] = c.rhs.clone();
        if c.rhs.is_negative() {
            for v in row.iter_mut() {
                *v = -v.clone();
            }
        }
        row[art_start + i] = BigRational::from_integer(1.into());
        tab.push(row);
    }
    let mut obj = vec![BigRational::zero(); total + 1];
    for row in &tab {
        for j in 0..art_start {
            obj[j] -= &row[j];
        }
        obj[rhs_col] -= &row[rhs_col];
    }
    tab.push(obj);
    let mut basis: Vec<usize> = (art_start..total).collect();

    loop {
        let Some(enter) = (0..total).find(|&j| tab[rows][j].is_negative()) else {
            break;
        };
        let mut leave: Option<(usize, BigRational)> = None;
        for i in 0..rows {
            let a = &tab[i][enter];
            if !a.is_positive() {
                continue;
            }
            let ratio = &tab[i][rhs_col] / a;
            let better = match &leave {
                None => true,
                Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
            };
            if better {
                leave = Some((i, ratio));
            }
        }
        // Phase one is bounded below by zero, so some row always qualifies.
        let (pr, _) = leave.expect("phase-one objective is bounded");
        pivot(&mut tab, pr, enter);
        basis[pr] = enter;
    }

    if !tab[rows][rhs_col].is_zero() {
        return Feasibility::Infeasible;
    }
    let mut values = vec![BigRational::zero(); total];
    for (i, &b) in basis.iter().enumerate() {
        values[b] = tab[i][rhs_col].clone();
    }
    let x: Vec<BigRational> = var_cols
        .iter()
        .map(|&(pos, neg)| match neg {
            Some(neg) => &values[pos] - &values[neg],
            None => values[pos].clone(),
        })
        .collect();
    debug_assert!(sys.is_satisfied_by(&x));
    Feasibility::Feasible(x)
}

fn pivot(tab: &mut [Vec<BigRational>], pr: usize, pc: usize) {
    let inv = tab[pr][pc].recip();
    for v in tab[pr].iter_mut() {
        *v = &*v * &inv;
    }
    let prow = tab[pr].clone();
    for (i, row) in tab.iter_mut().enumerate() {
        if i == pr || row[pc].is_zero() {
            continue;
        }
        let f = row[pc].clone();
        for (v, p) in row.iter_mut().zip(&prow) {
            if !p.is_zero() {
                *v -= &f * p;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn contradictory_bounds() {
        let mut s = LinearSystem::new(1);
        s.add(vec![q(1)], Relation::Le, q(-1)).unwrap();
        assert_eq!(lp_feasible(&s), Feasibility::Infeasible);
    }

    #[test]
    fn simplex_equation() {
        let mut s = LinearSystem::new(2);
        s.add(vec![q(1), q(1)], Relation::Eq, q(1)).unwrap();
        let x = lp_feasible(&s).witness().unwrap();
        assert!(s.is_satisfied_by(&x));
    }

    #[test]
    fn negated_column_outside_cone() {
        // A = [[1,2],[2,1]]; -(1,2) is not a nonnegative combination.
        let mut s = LinearSystem::new(2);
        s.add(vec![q(1), q(2)], Relation::Eq, q(-1)).unwrap();
        s.add(vec![q(2), q(1)], Relation::Eq, q(-2)).unwrap();
        assert_eq!(lp_feasible(&s), Feasibility::Infeasible);
    }

    #[test]
    fn free_variables_can_go_negative() {
        let mut s = LinearSystem::new(2);
        s.set_free(0);
        s.add(vec![q(1), q(0)], Relation::Le, q(-3)).unwrap();
        s.add(vec![q(1), q(1)], Relation::Ge, q(2)).unwrap();
        let x = lp_feasible(&s).witness().unwrap();
        assert!(x[0] <= q(-3));
        assert!(s.is_satisfied_by(&x));
    }

    #[test]
    fn degenerate_redundant_rows() {
        let mut s = LinearSystem::new(3);
        s.add(vec![q(1), q(1), q(1)], Relation::Eq, q(2)).unwrap();
        s.add(vec![q(2), q(2), q(2)], Relation::Eq, q(4)).unwrap();
        s.add(vec![q(1), q(0), q(-1)], Relation::Eq, q(0)).unwrap();
        let x = lp_feasible(&s).witness().unwrap();
        assert!(s.is_satisfied_by(&x));
    }

    #[test]
    fn empty_system_is_feasible() {
        let s = LinearSystem::new(2);
        assert_eq!(lp_feasible(&s), Feasibility::Feasible(vec![q(0), q(0)]));
    }

    #[test]
    fn wrong_arity_rejected() {
        let mut s = LinearSystem::new(2);
        assert!(s.add(vec![q(1)], Relation::Eq, q(0)).is_err());
    }
}
