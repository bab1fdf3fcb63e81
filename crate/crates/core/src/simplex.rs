//! Dense two-phase tableau simplex with Bland's rule. Small problems only;
//! exact when run over rationals.

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

/// `minimize objective · x` subject to `rows`, `x ≥ 0`.
#[derive(Debug, Clone)]
pub struct LinearProgram<S> {
    pub objective: Vec<S>,
    pub rows: Vec<(Vec<S>, Relation, S)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome<S> {
    Optimal { value: S, x: Vec<S> },
    Infeasible,
    Unbounded,
}

struct Tableau<S> {
    /// `m` rows of `cols + 1` entries; last entry is the right-hand side.
    t: Vec<Vec<S>>,
    basis: Vec<usize>,
    cols: usize,
}

impl<S: Scalar> Tableau<S> {
    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.t[row][col].clone();
        for v in self.t[row].iter_mut() {
            *v = v.clone() / p.clone();
        }
        let pivot_row = self.t[row].clone();
        for (r, line) in self.t.iter_mut().enumerate() {
            if r == row || line[col].approx_zero() {
                continue;
            }
            let f = line[col].clone();
            for (v, pv) in line.iter_mut().zip(&pivot_row) {
                *v = v.clone() - f.clone() * pv.clone();
            }
        }
        self.basis[row] = col;
    }

    fn reduced_costs(&self, cost: &[S], allowed: &[bool]) -> Vec<Option<S>> {
        (0..self.cols)
            .map(|j| {
                if !allowed[j] {
                    return None;
                }
                let zj = self
                    .basis
                    .iter()
                    .enumerate()
                    .fold(S::zero(), |a, (r, &b)| a + cost[b].clone() * self.t[r][j].clone());
                Some(cost[j].clone() - zj)
            })
            .collect()
    }

    /// Bland's rule: lowest-index improving column, lowest-index basic
    /// variable among tied ratios. Returns `false` if unbounded.
    fn optimize(&mut self, cost: &[S], allowed: &[bool]) -> bool {
        loop {
            let rc = self.reduced_costs(cost, allowed);
            let Some(enter) = rc.iter().position(|r| r.as_ref().is_some_and(|v| v.is_neg())) else {
                return true;
            };
            let mut leave: Option<(usize, S)> = None;
            for (r, line) in self.t.iter().enumerate() {
                if !line[enter].is_pos() {
                    continue;
                }
                let ratio = line[self.cols].clone() / line[enter].clone();
                let better = match &leave {
                    None => true,
                    Some((lr, best)) => {
                        ratio < *best || (ratio == *best && self.basis[r] < self.basis[*lr])
                    }
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, enter),
                None => return false,
            }
        }
    }

    fn objective_value(&self, cost: &[S]) -> S {
        self.basis
            .iter()
            .enumerate()
            .fold(S::zero(), |a, (r, &b)| a + cost[b].clone() * self.t[r][self.cols].clone())
    }
}

impl<S: Scalar> LinearProgram<S> {
    pub fn solve(&self) -> LpOutcome<S> {
        let n = self.objective.len();
        // normalize to nonnegative right-hand sides
        let rows: Vec<(Vec<S>, Relation, S)> = self
            .rows
            .iter()
            .map(|(a, rel, b)| {
                if b.is_neg() {
                    let flipped = match rel {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (a.iter().map(|v| -v.clone()).collect(), flipped, -b.clone())
                } else {
                    (a.clone(), *rel, b.clone())
                }
            })
            .collect();
        let m = rows.len();
        let slack_count = rows.iter().filter(|r| r.1 != Relation::Eq).count();
        let art_count = rows.iter().filter(|r| r.1 != Relation::Le).count();
        let cols = n + slack_count + art_count;
        let art_start = n + slack_count;

        let mut t = vec![vec![S::zero(); cols + 1]; m];
        let mut basis = vec![0; m];
        let (mut s, mut a) = (n, art_start);
        for (r, (coef, rel, rhs)) in rows.iter().enumerate() {
            for (j, v) in coef.iter().enumerate() {
                t[r][j] = v.clone();
            }
            t[r][cols] = rhs.clone();
            match rel {
                Relation::Le => {
                    t[r][s] = S::one();
                    basis[r] = s;
                    s += 1;
                }
                Relation::Ge => {
                    t[r][s] = -S::one();
                    s += 1;
                    t[r][a] = S::one();
                    basis[r] = a;
                    a += 1;
                }
                Relation::Eq => {
                    t[r][a] = S::one();
                    basis[r] = a;
                    a += 1;
                }
            }
        }
        let mut tab = Tableau { t, basis, cols };

        // phase one: minimize the artificial sum
        let phase1: Vec<S> = (0..cols).map(|j| if j >= art_start { S::one() } else { S::zero() }).collect();
        let all = vec![true; cols];
        tab.optimize(&phase1, &all);
        if tab.objective_value(&phase1).is_pos() {
            return LpOutcome::Infeasible;
        }
        // drive remaining artificials out; drop redundant rows
        let mut r = 0;
        while r < tab.t.len() {
            if tab.basis[r] >= art_start {
                match (0..art_start).find(|&j| !tab.t[r][j].approx_zero()) {
                    Some(j) => tab.pivot(r, j),
                    None => {
                        tab.t.remove(r);
                        tab.basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }

        let mut phase2: Vec<S> = vec![S::zero(); cols];
        phase2[..n].clone_from_slice(&self.objective);
        let allowed: Vec<bool> = (0..cols).map(|j| j < art_start).collect();
        if !tab.optimize(&phase2, &allowed) {
            return LpOutcome::Unbounded;
        }
        let mut x = vec![S::zero(); n];
        for (r, &b) in tab.basis.iter().enumerate() {
            if b < n {
                x[b] = tab.t[r][cols].clone();
            }
        }
        LpOutcome::Optimal { value: tab.objective_value(&phase2), x }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn q(n: i64) -> Rational {
        Rational::from_ratio(n, 1)
    }

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18  -> 36 at (2, 6)
        let lp = LinearProgram {
            objective: vec![q(-3), q(-5)],
            rows: vec![
                (vec![q(1), q(0)], Relation::Le, q(4)),
                (vec![q(0), q(2)], Relation::Le, q(12)),
                (vec![q(3), q(2)], Relation::Le, q(18)),
            ],
        };
        assert_eq!(lp.solve(), LpOutcome::Optimal { value: q(-36), x: vec![q(2), q(6)] });
    }

    #[test]
    fn equality_rows_with_redundancy() {
        // 2x2 transport with a redundant marginal row
        let half = Rational::from_ratio(1, 2);
        let lp = LinearProgram {
            objective: vec![q(0), q(1), q(1), q(0)],
            rows: vec![
                (vec![q(1), q(1), q(0), q(0)], Relation::Eq, half.clone()),
                (vec![q(0), q(0), q(1), q(1)], Relation::Eq, half.clone()),
                (vec![q(1), q(0), q(1), q(0)], Relation::Eq, half.clone()),
                (vec![q(0), q(1), q(0), q(1)], Relation::Eq, half.clone()),
            ],
        };
        match lp.solve() {
            LpOutcome::Optimal { value, x } => {
                assert_eq!(value, q(0));
                assert_eq!(x, vec![half.clone(), q(0), q(0), half]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        let lp = LinearProgram {
            objective: vec![q(1)],
            rows: vec![(vec![q(1)], Relation::Ge, q(2)), (vec![q(1)], Relation::Le, q(1))],
        };
        assert_eq!(lp.solve(), LpOutcome::Infeasible);
        let lp = LinearProgram { objective: vec![q(-1)], rows: vec![(vec![q(1)], Relation::Ge, q(1))] };
        assert_eq!(lp.solve(), LpOutcome::Unbounded);
    }
}
