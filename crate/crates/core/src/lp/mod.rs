//! Exact-rational linear programming.
//!
//! Programs are dense, every variable is bounded below by zero and
//! unbounded above. [`solve_lp`] runs a two-phase tableau simplex with
//! Bland's rule; [`vertex_enumerate`] is an independent brute-force oracle
//! used by tests.

mod simplex;
mod vertex;

use std::collections::HashSet;
use std::fmt;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::rational::{format_rational, Rational};

pub use simplex::{find_feasible_point, solve_lp, Feasibility};
pub use vertex::{vertex_enumerate, vertex_optimum, Vertex, VERTEX_LIMIT};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("row {row} has {actual} coefficients, expected {expected}")]
    RowWidth {
        row: usize,
        expected: usize,
        actual: usize,
    },
    #[error("expected {expected} {what} labels, got {actual}")]
    LabelCount {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),
    #[error("program too large for vertex enumeration ({vars} variables, {rows} rows; limit {limit})")]
    TooLarge { vars: usize, rows: usize, limit: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    pub fn symbol(&self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }

    pub(crate) fn flipped(&self) -> Relation {
        match self {
            Relation::Le => Relation::Ge,
            Relation::Eq => Relation::Eq,
            Relation::Ge => Relation::Le,
        }
    }

    pub fn holds(&self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Relation::Le => lhs <= rhs,
            Relation::Eq => lhs == rhs,
            Relation::Ge => lhs >= rhs,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub coefficients: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl Constraint {
    pub fn new(coefficients: Vec<Rational>, relation: Relation, rhs: Rational) -> Self {
        Self {
            coefficients,
            relation,
            rhs,
        }
    }

    pub fn lhs(&self, point: &[Rational]) -> Rational {
        dot(&self.coefficients, point)
    }

    pub fn is_satisfied_by(&self, point: &[Rational]) -> bool {
        self.relation.holds(&self.lhs(point), &self.rhs)
    }
}

/// `sense objective·x` subject to the constraints and `x >= 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
    pub column_labels: Vec<String>,
    pub row_labels: Vec<String>,
}

impl LinearProgram {
    /// Program with default labels `x0, x1, ...`.
    pub fn new(sense: Sense, objective: Vec<Rational>) -> Self {
        let column_labels = (0..objective.len()).map(|k| format!("x{k}")).collect();
        Self {
            sense,
            objective,
            constraints: Vec::new(),
            column_labels,
            row_labels: Vec::new(),
        }
    }

    pub fn with_column_labels(mut self, labels: Vec<String>) -> Self {
        self.column_labels = labels;
        self
    }

    pub fn add_constraint(&mut self, label: impl Into<String>, constraint: Constraint) {
        self.row_labels.push(label.into());
        self.constraints.push(constraint);
    }

    /// Adds a constraint labelled `r<k>`.
    pub fn push(&mut self, coefficients: Vec<Rational>, relation: Relation, rhs: Rational) {
        let label = format!("r{}", self.constraints.len());
        self.add_constraint(label, Constraint::new(coefficients, relation, rhs));
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.constraints.len()
    }

    pub fn check(&self) -> Result<(), LpError> {
        let n = self.objective.len();
        for (row, c) in self.constraints.iter().enumerate() {
            if c.coefficients.len() != n {
                return Err(LpError::RowWidth {
                    row,
                    expected: n,
                    actual: c.coefficients.len(),
                });
            }
        }
        if self.column_labels.len() != n {
            return Err(LpError::LabelCount {
                what: "column",
                expected: n,
                actual: self.column_labels.len(),
            });
        }
        if self.row_labels.len() != self.constraints.len() {
            return Err(LpError::LabelCount {
                what: "row",
                expected: self.constraints.len(),
                actual: self.row_labels.len(),
            });
        }
        let mut seen = HashSet::new();
        for label in self.column_labels.iter().chain(&self.row_labels) {
            if !seen.insert(label.as_str()) {
                return Err(LpError::DuplicateLabel(label.clone()));
            }
        }
        Ok(())
    }

    pub fn objective_at(&self, point: &[Rational]) -> Rational {
        dot(&self.objective, point)
    }

    pub fn is_feasible(&self, point: &[Rational]) -> bool {
        point.len() == self.num_vars()
            && point.iter().all(|x| !x.is_negative())
            && self.constraints.iter().all(|c| c.is_satisfied_by(point))
    }

    /// Whether `dual` is feasible for the dual program, under the sign
    /// conventions documented on [`LpSolution::dual`].
    pub fn is_dual_feasible(&self, dual: &[Rational]) -> bool {
        if dual.len() != self.num_rows() {
            return false;
        }
        let sign_ok = self.constraints.iter().zip(dual).all(|(c, y)| {
            let (nonneg_rel, nonpos_rel) = match self.sense {
                Sense::Maximize => (Relation::Le, Relation::Ge),
                Sense::Minimize => (Relation::Ge, Relation::Le),
            };
            if c.relation == nonneg_rel {
                !y.is_negative()
            } else if c.relation == nonpos_rel {
                !y.is_positive()
            } else {
                true
            }
        });
        sign_ok
            && (0..self.num_vars()).all(|j| {
                let reduced: Rational = self
                    .constraints
                    .iter()
                    .zip(dual)
                    .map(|(c, y)| &c.coefficients[j] * y)
                    .sum();
                match self.sense {
                    Sense::Maximize => reduced >= self.objective[j],
                    Sense::Minimize => reduced <= self.objective[j],
                }
            })
    }

    pub fn dual_objective(&self, dual: &[Rational]) -> Rational {
        self.constraints.iter().zip(dual).map(|(c, y)| &c.rhs * y).sum()
    }
}

pub(crate) fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn write_terms(f: &mut fmt::Formatter<'_>, coefficients: &[Rational], labels: &[String]) -> fmt::Result {
    let mut first = true;
    for (c, label) in coefficients.iter().zip(labels) {
        if c.is_zero() {
            continue;
        }
        let magnitude = format_rational(&c.abs());
        match (first, c.is_negative()) {
            (true, false) => write!(f, "{magnitude} {label}")?,
            (true, true) => write!(f, "-{magnitude} {label}")?,
            (false, false) => write!(f, " + {magnitude} {label}")?,
            (false, true) => write!(f, " - {magnitude} {label}")?,
        }
        first = false;
    }
    if first {
        f.write_str("0")?;
    }
    Ok(())
}

/// Textual dump: the objective line first, then one line per row,
/// `label: c1 x1 + ... REL rhs`. Zero coefficients are omitted.
impl fmt::Display for LinearProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sense = match self.sense {
            Sense::Maximize => "maximize",
            Sense::Minimize => "minimize",
        };
        write!(f, "{sense}: ")?;
        write_terms(f, &self.objective, &self.column_labels)?;
        writeln!(f)?;
        for (label, c) in self.row_labels.iter().zip(&self.constraints) {
            write!(f, "{label}: ")?;
            write_terms(f, &c.coefficients, &self.column_labels)?;
            writeln!(f, " {} {}", c.relation.symbol(), format_rational(&c.rhs))?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

impl LpStatus {
    pub fn label(&self) -> &'static str {
        match self {
            LpStatus::Optimal => "optimal",
            LpStatus::Infeasible => "infeasible",
            LpStatus::Unbounded => "unbounded",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Optimal point; empty unless optimal.
    pub primal: Vec<Rational>,
    /// One multiplier per row; empty unless optimal. For a maximization,
    /// `<=` rows carry `y >= 0`, `>=` rows `y <= 0` and `A^T y >= c`; a
    /// minimization mirrors the signs with `A^T y <= c`.
    pub dual: Vec<Rational>,
    pub objective_value: Rational,
    /// Every `(row, entering column)` pivot, in order, across both phases.
    pub pivots: Vec<(usize, usize)>,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    pub fn render(&self, lp: &LinearProgram) -> String {
        let mut out = format!("status: {}\n", self.status.label());
        if self.is_optimal() {
            out.push_str(&format!("objective_value: {}\n", format_rational(&self.objective_value)));
            for (label, v) in lp.column_labels.iter().zip(&self.primal) {
                out.push_str(&format!("primal {label} = {}\n", format_rational(v)));
            }
            for (label, v) in lp.row_labels.iter().zip(&self.dual) {
                out.push_str(&format!("dual {label} = {}\n", format_rational(v)));
            }
        }
        out
    }
}
