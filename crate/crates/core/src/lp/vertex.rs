use num_traits::{Signed, Zero};

use super::{LinearProgram, LpError, Relation, Sense};
use crate::rational::Rational;

/// Largest variable and row count accepted by [`vertex_enumerate`].
pub const VERTEX_LIMIT: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Vertex {
    pub point: Vec<Rational>,
    pub value: Rational,
}

/// Row-reduces `[A | b]` in place and returns the independent rows, or
/// `None` when the system is inconsistent.
fn independent_rows(mut rows: Vec<Vec<Rational>>, width: usize) -> Option<Vec<Vec<Rational>>> {
    let mut rank = 0;
    for col in 0..width {
        let Some(pivot) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let lead = rows[rank][col].clone();
        for v in rows[rank].iter_mut() {
            *v /= &lead;
        }
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && !row[col].is_zero() {
                let factor = row[col].clone();
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v -= &factor * p;
                }
            }
        }
        rank += 1;
    }
    if rows[rank..].iter().any(|row| !row[width].is_zero()) {
        return None;
    }
    rows.truncate(rank);
    Some(rows)
}

/// Solves the square system on `columns`, or `None` if singular.
fn solve_basis(rows: &[Vec<Rational>], columns: &[usize], width: usize) -> Option<Vec<Rational>> {
    let k = columns.len();
    let mut m: Vec<Vec<Rational>> = rows
        .iter()
        .map(|row| {
            let mut r: Vec<Rational> = columns.iter().map(|&c| row[c].clone()).collect();
            r.push(row[width].clone());
            r
        })
        .collect();
    for col in 0..k {
        let pivot = (col..k).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        let lead = m[col][col].clone();
        for v in m[col].iter_mut() {
            *v /= &lead;
        }
        let pivot_row = m[col].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != col && !row[col].is_zero() {
                let factor = row[col].clone();
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v -= &factor * p;
                }
            }
        }
    }
    Some(m.into_iter().map(|row| row[k].clone()).collect())
}

fn combinations(n: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        visit(&idx);
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Every basic feasible solution, found by trying all bases of the
/// slack-augmented system. Independent of the simplex code path. Vertices
/// come back sorted and deduplicated.
pub fn vertex_enumerate(lp: &LinearProgram) -> Result<Vec<Vertex>, LpError> {
    lp.check()?;
    let n = lp.num_vars();
    if n > VERTEX_LIMIT || lp.num_rows() > VERTEX_LIMIT {
        return Err(LpError::TooLarge {
            vars: n,
            rows: lp.num_rows(),
            limit: VERTEX_LIMIT,
        });
    }
    let slacks = lp.constraints.iter().filter(|c| c.relation != Relation::Eq).count();
    let width = n + slacks;
    let mut rows = Vec::with_capacity(lp.num_rows());
    let mut slack = n;
    for c in &lp.constraints {
        let mut row = vec![Rational::zero(); width + 1];
        row[..n].clone_from_slice(&c.coefficients);
        match c.relation {
            Relation::Le => {
                row[slack] = Rational::from_integer(1.into());
                slack += 1;
            }
            Relation::Ge => {
                row[slack] = Rational::from_integer((-1).into());
                slack += 1;
            }
            Relation::Eq => {}
        }
        row[width] = c.rhs.clone();
        rows.push(row);
    }
    let Some(rows) = independent_rows(rows, width) else {
        return Ok(Vec::new());
    };
    let mut vertices = Vec::new();
    combinations(width, rows.len(), |columns| {
        if let Some(values) = solve_basis(&rows, columns, width) {
            if values.iter().all(|v| !v.is_negative()) {
                let mut full = vec![Rational::zero(); width];
                for (&c, v) in columns.iter().zip(values) {
                    full[c] = v;
                }
                full.truncate(n);
                let value = lp.objective_at(&full);
                vertices.push(Vertex { point: full, value });
            }
        }
    });
    vertices.sort();
    vertices.dedup();
    Ok(vertices)
}

/// Best objective value over all vertices, or `None` without vertices.
pub fn vertex_optimum(lp: &LinearProgram) -> Result<Option<Rational>, LpError> {
    let values = vertex_enumerate(lp)?.into_iter().map(|v| v.value);
    Ok(match lp.sense {
        Sense::Maximize => values.max(),
        Sense::Minimize => values.min(),
    })
}
