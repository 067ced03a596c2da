use num_traits::{One, Signed, Zero};

use super::{dot, Constraint, LinearProgram, LpError, LpSolution, LpStatus, Relation, Sense};
use crate::rational::Rational;

/// Dense simplex tableau. Each row stores its coefficients followed by the
/// right-hand side.
struct Tableau {
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    ncols: usize,
    pivots: Vec<(usize, usize)>,
}

enum Outcome {
    Optimal,
    Unbounded,
}

/// Column layout produced by [`build`].
struct Layout {
    /// Column holding the identity vector of each row in the initial basis.
    initial_basis: Vec<usize>,
    /// Rows negated so that their right-hand side is nonnegative.
    flipped: Vec<bool>,
    /// First artificial column; all later columns are artificial.
    artificial_start: usize,
}

impl Tableau {
    fn rhs(&self, row: usize) -> &Rational {
        &self.rows[row][self.ncols]
    }

    fn reduced_cost(&self, cost: &[Rational], col: usize) -> Rational {
        let mut d = cost[col].clone();
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            if !cost[b].is_zero() && !row[col].is_zero() {
                d -= &cost[b] * &row[col];
            }
        }
        d
    }

    fn value(&self, cost: &[Rational]) -> Rational {
        self.basis
            .iter()
            .enumerate()
            .map(|(i, &b)| &cost[b] * self.rhs(i))
            .sum()
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let inv = Rational::one() / &self.rows[row][col];
        for v in self.rows[row].iter_mut() {
            if !v.is_zero() {
                *v *= &inv;
            }
        }
        let pivot_row = self.rows[row].clone();
        for (i, other) in self.rows.iter_mut().enumerate() {
            if i == row || other[col].is_zero() {
                continue;
            }
            let factor = other[col].clone();
            for (v, p) in other.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &factor * p;
                }
            }
        }
        self.basis[row] = col;
        self.pivots.push((row, col));
    }

    /// Maximizes `cost·x` from the current basis with Bland's rule:
    /// lowest-index improving column enters, ratio ties leave by lowest
    /// basic column index.
    fn optimize(&mut self, cost: &[Rational], allowed: impl Fn(usize) -> bool) -> Outcome {
        loop {
            let entering = (0..self.ncols)
                .filter(|&j| allowed(j))
                .find(|&j| self.reduced_cost(cost, j).is_positive());
            let Some(col) = entering else {
                return Outcome::Optimal;
            };
            let mut leaving: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(i) / a;
                let better = match &leaving {
                    None => true,
                    Some((r, best)) => ratio < *best || (ratio == *best && self.basis[i] < self.basis[*r]),
                };
                if better {
                    leaving = Some((i, ratio));
                }
            }
            match leaving {
                Some((row, _)) => self.pivot(row, col),
                None => return Outcome::Unbounded,
            }
        }
    }

    fn point(&self, num_vars: usize) -> Vec<Rational> {
        let mut x = vec![Rational::zero(); num_vars];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < num_vars {
                x[b] = self.rhs(i).clone();
            }
        }
        x
    }
}

fn build(num_vars: usize, constraints: &[Constraint]) -> (Tableau, Layout) {
    let mut flipped = Vec::with_capacity(constraints.len());
    let mut normalized = Vec::with_capacity(constraints.len());
    for c in constraints {
        if c.rhs.is_negative() {
            flipped.push(true);
            normalized.push((
                c.coefficients.iter().map(|v| -v).collect::<Vec<_>>(),
                c.relation.flipped(),
                -&c.rhs,
            ));
        } else {
            flipped.push(false);
            normalized.push((c.coefficients.clone(), c.relation, c.rhs.clone()));
        }
    }
    let slack_count = normalized.iter().filter(|(_, rel, _)| *rel != Relation::Eq).count();
    let artificial_count = normalized.iter().filter(|(_, rel, _)| *rel != Relation::Le).count();
    let artificial_start = num_vars + slack_count;
    let ncols = artificial_start + artificial_count;

    let mut rows = Vec::with_capacity(normalized.len());
    let mut basis = Vec::with_capacity(normalized.len());
    let mut next_slack = num_vars;
    let mut next_artificial = artificial_start;
    for (coeffs, rel, rhs) in normalized {
        let mut row = vec![Rational::zero(); ncols + 1];
        row[..num_vars].clone_from_slice(&coeffs);
        row[ncols] = rhs;
        match rel {
            Relation::Le => {
                row[next_slack] = Rational::one();
                basis.push(next_slack);
                next_slack += 1;
            }
            Relation::Ge => {
                row[next_slack] = -Rational::one();
                next_slack += 1;
                row[next_artificial] = Rational::one();
                basis.push(next_artificial);
                next_artificial += 1;
            }
            Relation::Eq => {
                row[next_artificial] = Rational::one();
                basis.push(next_artificial);
                next_artificial += 1;
            }
        }
        rows.push(row);
    }
    let initial_basis = basis.clone();
    (
        Tableau {
            rows,
            basis,
            ncols,
            pivots: Vec::new(),
        },
        Layout {
            initial_basis,
            flipped,
            artificial_start,
        },
    )
}

/// Phase 1: drives the artificial columns to zero. Returns the minimal sum
/// of artificials (zero iff feasible); on success every removable
/// artificial has been pivoted out of the basis.
fn phase_one(tab: &mut Tableau, layout: &Layout) -> Rational {
    let start = layout.artificial_start;
    if start == tab.ncols {
        return Rational::zero();
    }
    let cost: Vec<Rational> = (0..tab.ncols)
        .map(|j| if j >= start { -Rational::one() } else { Rational::zero() })
        .collect();
    // bounded above by zero, never unbounded
    let _ = tab.optimize(&cost, |_| true);
    let infeasibility = -tab.value(&cost);
    if infeasibility.is_positive() {
        return infeasibility;
    }
    for row in 0..tab.rows.len() {
        if tab.basis[row] < start {
            continue;
        }
        if let Some(col) = (0..start).find(|&j| !tab.rows[row][j].is_zero()) {
            tab.pivot(row, col);
        }
        // otherwise the row is redundant; its artificial stays basic at zero
    }
    Rational::zero()
}

pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    lp.check()?;
    let n = lp.num_vars();
    let (mut tab, layout) = build(n, &lp.constraints);

    let infeasibility = phase_one(&mut tab, &layout);
    if infeasibility.is_positive() {
        return Ok(LpSolution {
            status: LpStatus::Infeasible,
            primal: Vec::new(),
            dual: Vec::new(),
            objective_value: Rational::zero(),
            pivots: tab.pivots,
        });
    }

    let mut cost = vec![Rational::zero(); tab.ncols];
    for (j, c) in lp.objective.iter().enumerate() {
        cost[j] = match lp.sense {
            Sense::Maximize => c.clone(),
            Sense::Minimize => -c,
        };
    }
    let start = layout.artificial_start;
    if let Outcome::Unbounded = tab.optimize(&cost, |j| j < start) {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            primal: Vec::new(),
            dual: Vec::new(),
            objective_value: Rational::zero(),
            pivots: tab.pivots,
        });
    }

    let primal = tab.point(n);
    // y = c_B B^{-1}; column `initial_basis[r]` of the tableau is B^{-1} e_r
    let dual: Vec<Rational> = layout
        .initial_basis
        .iter()
        .zip(&layout.flipped)
        .map(|(&col, &flipped)| {
            let mut y: Rational = tab
                .basis
                .iter()
                .zip(&tab.rows)
                .map(|(&b, row)| &cost[b] * &row[col])
                .sum();
            if flipped {
                y = -y;
            }
            if lp.sense == Sense::Minimize {
                y = -y;
            }
            y
        })
        .collect();
    let objective_value = dot(&lp.objective, &primal);
    assert_eq!(
        lp.dual_objective(&dual),
        objective_value,
        "strong duality violated: simplex bookkeeping is inconsistent"
    );
    Ok(LpSolution {
        status: LpStatus::Optimal,
        primal,
        dual,
        objective_value,
        pivots: tab.pivots,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Feasibility {
    Feasible(Vec<Rational>),
    /// Positive phase-1 optimum: the least total violation achievable.
    Infeasible { phase_one_optimum: Rational },
}

impl Feasibility {
    pub fn point(&self) -> Option<&[Rational]> {
        match self {
            Feasibility::Feasible(p) => Some(p),
            Feasibility::Infeasible { .. } => None,
        }
    }
}

/// Any exact point satisfying `constraints` with all `num_vars` variables
/// nonnegative.
pub fn find_feasible_point(num_vars: usize, constraints: &[Constraint]) -> Result<Feasibility, LpError> {
    for (row, c) in constraints.iter().enumerate() {
        if c.coefficients.len() != num_vars {
            return Err(LpError::RowWidth {
                row,
                expected: num_vars,
                actual: c.coefficients.len(),
            });
        }
    }
    let (mut tab, layout) = build(num_vars, constraints);
    let infeasibility = phase_one(&mut tab, &layout);
    if infeasibility.is_positive() {
        return Ok(Feasibility::Infeasible {
            phase_one_optimum: infeasibility,
        });
    }
    Ok(Feasibility::Feasible(tab.point(num_vars)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn lp1(sense: Sense, c: i64) -> LinearProgram {
        LinearProgram::new(sense, vec![int(c)])
    }

    #[test]
    fn maximize_single_bound() {
        let mut lp = lp1(Sense::Maximize, 1);
        lp.push(vec![int(1)], Relation::Le, int(1));
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.primal, vec![int(1)]);
        assert_eq!(s.objective_value, int(1));
        assert_eq!(s.dual, vec![int(1)]);
    }

    #[test]
    fn infeasible_bound() {
        let mut lp = lp1(Sense::Maximize, 1);
        lp.push(vec![int(1)], Relation::Le, int(-1));
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_ray() {
        let mut lp = LinearProgram::new(Sense::Maximize, vec![int(1), int(1)]);
        lp.push(vec![int(1), int(-1)], Relation::Le, int(1));
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Unbounded);
        let lp = LinearProgram::new(Sense::Maximize, vec![int(1)]);
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Unbounded);
        let lp = LinearProgram::new(Sense::Minimize, vec![int(1)]);
        let s = solve_lp(&lp).unwrap();
        assert_eq!((s.status, s.objective_value), (LpStatus::Optimal, int(0)));
    }

    #[test]
    fn minimization_with_ge_rows_and_duals() {
        // min 2x + 3y  s.t.  x + y >= 2,  x - y = 0
        let mut lp = LinearProgram::new(Sense::Minimize, vec![int(2), int(3)]);
        lp.push(vec![int(1), int(1)], Relation::Ge, int(2));
        lp.push(vec![int(1), int(-1)], Relation::Eq, int(0));
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.primal, vec![int(1), int(1)]);
        assert_eq!(s.objective_value, int(5));
        assert!(lp.is_dual_feasible(&s.dual));
        assert_eq!(s.dual, vec![ratio(5, 2), ratio(-1, 2)]);
    }

    #[test]
    fn negative_rhs_rows_are_normalized() {
        // max -x s.t. -x <= -3  (x >= 3)
        let mut lp = lp1(Sense::Maximize, -1);
        lp.push(vec![int(-1)], Relation::Le, int(-3));
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.primal, vec![int(3)]);
        assert_eq!(s.objective_value, int(-3));
        assert_eq!(s.dual, vec![int(1)]);
        assert!(lp.is_dual_feasible(&s.dual));
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::new(Sense::Maximize, vec![int(1), int(2)]);
        lp.push(vec![int(1), int(1)], Relation::Eq, int(1));
        lp.push(vec![int(2), int(2)], Relation::Eq, int(2));
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.objective_value, int(2));
        assert!(lp.is_dual_feasible(&s.dual));
    }

    #[test]
    fn degenerate_duplicate_rows() {
        let mut lp = lp1(Sense::Maximize, 1);
        lp.push(vec![int(1)], Relation::Le, int(1));
        lp.push(vec![int(1)], Relation::Le, int(1));
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.objective_value, int(1));
        assert!(lp.is_dual_feasible(&s.dual));
    }

    #[test]
    fn feasible_points() {
        let row = |c: Vec<i64>, rel, rhs| Constraint::new(c.into_iter().map(int).collect(), rel, int(rhs));
        let f = find_feasible_point(2, &[row(vec![1, 1], Relation::Eq, 1)]).unwrap();
        let p = f.point().unwrap();
        assert_eq!(&p[0] + &p[1], int(1));
        let f = find_feasible_point(1, &[row(vec![1], Relation::Eq, 2), row(vec![1], Relation::Le, 1)]).unwrap();
        match f {
            Feasibility::Infeasible { phase_one_optimum } => assert!(phase_one_optimum > int(0)),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn ql_nowe_support_system_has_the_half_solution() {
        // variables: x1ab, x1empty, x2a, x2b
        let row = |c: [i64; 4]| Constraint::new(c.into_iter().map(int).collect(), Relation::Eq, int(1));
        let system = [row([1, 1, 0, 0]), row([0, 0, 1, 1]), row([1, 0, 1, 0]), row([1, 0, 0, 1])];
        let f = find_feasible_point(4, &system).unwrap();
        let half = ratio(1, 2);
        assert_eq!(f.point().unwrap(), &[half.clone(), half.clone(), half.clone(), half][..]);
    }

    #[test]
    fn identical_inputs_pivot_identically() {
        let mut lp = LinearProgram::new(Sense::Maximize, vec![int(3), int(2), int(4)]);
        lp.push(vec![int(1), int(1), int(2)], Relation::Le, int(4));
        lp.push(vec![int(2), int(0), int(3)], Relation::Le, int(5));
        lp.push(vec![int(2), int(1), int(3)], Relation::Ge, int(1));
        let a = solve_lp(&lp).unwrap();
        let b = solve_lp(&lp.clone()).unwrap();
        assert_eq!(a, b);
        assert!(!a.pivots.is_empty());
    }
}
