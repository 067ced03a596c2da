//! Zero-gap price search over the price box.
//!
//! A coarse grid locates low-gap regions, local refinement zooms in, and a
//! linearized support step turns a nearby price into an exact zero: with
//! the induced LP's current optimum held fixed and every utility curve
//! frozen on its current linear piece, the smallest gap upper bound is an
//! LP over `(p, u)`.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use super::SolveOptions;
use crate::config_lp::{duality_gap, GapCertificate};
use crate::error::{Error, Result};
use crate::lp::{solve_lp, Constraint, LinearProgram, Relation, Sense};
use crate::model::{AuctionInstance, Bundle, PriceVector, UtilityFunction};
use crate::rational::{format_rational, Rational};

/// Most grid points evaluated in one pass.
pub const GRID_LIMIT: u64 = 200_000;
/// Starting points for local steps, per pass.
const BEAM: usize = 4;
const STEP_LIMIT: usize = 8;
const TATONNEMENT_ROUNDS: usize = 24;

#[derive(Clone, Debug)]
pub struct SearchResult {
    /// Every zero-gap price found, in lexicographic price order.
    pub zeros: Vec<GapCertificate>,
    /// The first zero if any, otherwise the smallest gap (ties broken
    /// lexicographically).
    pub best: GapCertificate,
    pub visited: usize,
}

type Key = (Rational, PriceVector);

fn key(cert: &GapCertificate) -> Key {
    (cert.gap.clone(), cert.prices.clone())
}

#[derive(Default)]
struct Visited {
    certs: BTreeMap<PriceVector, GapCertificate>,
}

impl Visited {
    fn evaluate(&mut self, instance: &AuctionInstance, points: Vec<PriceVector>) -> Result<()> {
        let mut fresh: Vec<PriceVector> = points.into_iter().filter(|p| !self.certs.contains_key(p)).collect();
        fresh.sort();
        fresh.dedup();
        let certs = fresh
            .par_iter()
            .map(|p| duality_gap(instance, p))
            .collect::<Result<Vec<_>>>()?;
        self.absorb(certs);
        Ok(())
    }

    fn absorb(&mut self, certs: impl IntoIterator<Item = GapCertificate>) {
        for cert in certs {
            self.certs.entry(cert.prices.clone()).or_insert(cert);
        }
    }

    fn has_zero(&self) -> bool {
        self.certs.values().any(GapCertificate::is_zero)
    }

    /// The `count` best certificates by `(gap, prices)`.
    fn best(&self, count: usize) -> Vec<GapCertificate> {
        let mut all: Vec<&GapCertificate> = self.certs.values().collect();
        all.sort_by_key(|c| key(c));
        all.into_iter().take(count).cloned().collect()
    }
}

fn grid_axis(cap: &Rational, k: usize) -> Vec<Rational> {
    if cap.is_zero() {
        return vec![Rational::zero()];
    }
    let last = Rational::from_integer((k - 1).into());
    (0..k)
        .map(|t| cap * Rational::from_integer(t.into()) / &last)
        .collect()
}

fn product(axes: &[Vec<Rational>]) -> Vec<PriceVector> {
    let mut out = vec![Vec::new()];
    for axis in axes {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<Rational>| {
                axis.iter().map(move |v| {
                    let mut next = prefix.clone();
                    next.push(v.clone());
                    next
                })
            })
            .collect();
    }
    out.into_iter().map(PriceVector::new).collect()
}

fn grid_size(per_axis: usize, m: usize) -> Result<()> {
    (per_axis as u64)
        .checked_pow(m as u32)
        .filter(|s| *s <= GRID_LIMIT)
        .map(|_| ())
        .ok_or_else(|| Error::TooLarge(format!("{per_axis}^{m} grid points")))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Left,
    Right,
}

/// `u_i(S, q) = intercept + slope * q` for `q` in `[lo, hi]` around the
/// current payment.
struct Piece {
    intercept: Rational,
    slope: Rational,
    interval: Option<(Rational, Rational)>,
}

fn frozen_piece(instance: &AuctionInstance, bidder: usize, bundle: &Bundle, payment: &Rational, side: Side) -> Piece {
    match &instance.bidders[bidder].utility {
        UtilityFunction::TabulatedPwl { curves } => {
            let curve = &curves[bundle];
            let mut idx = curve.piece_index(payment).expect("payment inside the curve's domain");
            if side == Side::Right && idx + 1 < curve.piece_count() && payment == &curve.piece_interval(idx).1 {
                idx += 1;
            }
            let (intercept, slope) = curve.piece(idx);
            Piece {
                intercept,
                slope,
                interval: Some(curve.piece_interval(idx)),
            }
        }
        _ => {
            let intercept = crate::model::evaluate_utility(instance, bidder, bundle, &Rational::zero())
                .expect("quasilinear utility is defined at zero payment");
            Piece {
                intercept,
                slope: -Rational::one(),
                interval: None,
            }
        }
    }
}

/// One linearized support step from `start`. Variables are `p` then `u`.
fn support_step(instance: &AuctionInstance, start: &GapCertificate, side: Side) -> Result<Option<PriceVector>> {
    let m = instance.item_count();
    let n = instance.bidder_count();
    let bundles = instance.bundles();
    let x = &start.allocation;
    let mut objective = vec![Rational::zero(); m + n];
    for (j, c) in objective.iter_mut().enumerate().take(m) {
        *c = Rational::one() - x.item_mass(j);
    }
    let mut lp_rows = Vec::new();
    let mut lo = vec![Rational::zero(); bundles.len()];
    let mut hi = vec![instance.horizon(); bundles.len()];
    for i in 0..n {
        objective[m + i] = x.bidder_total(i);
        for bundle in &bundles {
            let payment = bundle.items().map(|j| start.prices.get(j)).sum::<Rational>();
            let piece = frozen_piece(instance, i, bundle, &payment, side);
            let weight = x.weights[i].get(bundle).cloned().unwrap_or_else(Rational::zero);
            let mut row = vec![Rational::zero(); m + n];
            row[m + i] = Rational::one();
            for j in bundle.items() {
                objective[j] -= &piece.slope * &weight;
                row[j] = -piece.slope.clone();
            }
            lp_rows.push(Constraint::new(row, Relation::Ge, piece.intercept));
            if let Some((a, b)) = piece.interval {
                let k = bundle.index();
                if a > lo[k] {
                    lo[k] = a;
                }
                if b < hi[k] {
                    hi[k] = b;
                }
            }
        }
    }
    let mut lp = LinearProgram::new(Sense::Minimize, objective);
    for c in lp_rows {
        lp.push(c.coefficients, c.relation, c.rhs);
    }
    let horizon = instance.horizon();
    for bundle in bundles.iter().filter(|b| !b.is_empty()) {
        let mut row = vec![Rational::zero(); m + n];
        for j in bundle.items() {
            row[j] = Rational::one();
        }
        let k = bundle.index();
        if lo[k].is_positive() {
            lp.push(row.clone(), Relation::Ge, lo[k].clone());
        }
        if hi[k] < horizon {
            lp.push(row, Relation::Le, hi[k].clone());
        }
    }
    for j in 0..m {
        let mut row = vec![Rational::zero(); m + n];
        row[j] = Rational::one();
        lp.push(row, Relation::Le, instance.price_cap.clone());
    }
    let solution = solve_lp(&lp)?;
    if !solution.is_optimal() {
        return Ok(None);
    }
    let next = PriceVector::new(solution.primal[..m].to_vec());
    Ok((next != start.prices).then_some(next))
}

/// Repeated support steps from `start` while the true gap decreases.
/// Returns every certificate evaluated on the way.
fn descend(instance: &AuctionInstance, start: &GapCertificate) -> Result<Vec<GapCertificate>> {
    let mut path = Vec::new();
    let mut current = start.clone();
    for _ in 0..STEP_LIMIT {
        if current.is_zero() {
            break;
        }
        let mut best: Option<GapCertificate> = None;
        for side in [Side::Left, Side::Right] {
            let Some(p) = support_step(instance, &current, side)? else {
                continue;
            };
            if best.as_ref().is_some_and(|b| b.prices == p) {
                continue;
            }
            let cert = duality_gap(instance, &p)?;
            path.push(cert.clone());
            if best.as_ref().is_none_or(|b| key(&cert) < key(b)) {
                best = Some(cert);
            }
        }
        match best {
            Some(b) if b.gap < current.gap => current = b,
            _ => break,
        }
    }
    Ok(path)
}

fn descend_from(instance: &AuctionInstance, visited: &mut Visited, starts: Vec<GapCertificate>) -> Result<()> {
    let paths = starts
        .par_iter()
        .map(|s| descend(instance, s))
        .collect::<Result<Vec<_>>>()?;
    visited.absorb(paths.into_iter().flatten());
    Ok(())
}

/// Price adjustment driven by the first demanded bundle of each bidder:
/// over-demanded items get dearer, unsold items cheaper.
fn tatonnement_path(instance: &AuctionInstance, base_step: &Rational) -> Result<Vec<PriceVector>> {
    let m = instance.item_count();
    let mut p = PriceVector::zeros(m);
    let mut path = vec![p.clone()];
    for round in 0..TATONNEMENT_ROUNDS {
        let demand = crate::demand::all_demand_sets(instance, &p)?;
        let step = base_step / Rational::from_integer((round + 1).into());
        let next = (0..m)
            .map(|j| {
                let wanted = demand.iter().filter(|d| d.bundles[0].contains(j)).count() as i64;
                let moved = p.get(j) + &step * Rational::from_integer((wanted - 1).into());
                moved.clamp(Rational::zero(), instance.price_cap.clone())
            })
            .collect();
        p = PriceVector::new(next);
        path.push(p.clone());
    }
    Ok(path)
}

/// Moves one coordinate at a time by `±step` while the gap drops.
fn polish(instance: &AuctionInstance, visited: &mut Visited, mut step: Rational, sweeps: usize) -> Result<()> {
    let Some(mut current) = visited.best(1).pop() else {
        return Ok(());
    };
    for _ in 0..sweeps {
        let mut neighbours = Vec::new();
        for j in 0..instance.item_count() {
            for sign in [-1i64, 1] {
                let mut v = current.prices.clone().into_vec();
                v[j] += &step * Rational::from_integer(sign.into());
                if !v[j].is_negative() && v[j] <= instance.price_cap {
                    neighbours.push(PriceVector::new(v));
                }
            }
        }
        visited.evaluate(instance, neighbours.clone())?;
        let best = neighbours
            .iter()
            .map(|p| &visited.certs[p])
            .min_by_key(|c| key(c))
            .cloned();
        match best {
            Some(b) if b.gap < current.gap => current = b,
            _ => step /= Rational::from_integer(2.into()),
        }
        if current.is_zero() {
            break;
        }
    }
    descend_from(instance, visited, vec![current])
}

pub fn search_zero_gap(instance: &AuctionInstance, options: &SolveOptions) -> Result<SearchResult> {
    if options.grid_k < 2 {
        return Err(Error::InvalidStep(format!("grid_k must be at least 2, got {}", options.grid_k)));
    }
    let m = instance.item_count();
    let k = options.grid_k;
    let cap = &instance.price_cap;
    let mut visited = Visited::default();

    visited.evaluate(instance, vec![PriceVector::zeros(m)])?;
    let start = visited.best(1);
    descend_from(instance, &mut visited, start)?;
    let settled = |v: &Visited| v.has_zero() && instance.is_quasilinear();

    let mut step = if cap.is_zero() {
        Rational::zero()
    } else {
        cap / Rational::from_integer((k - 1).into())
    };
    if !settled(&visited) && options.tatonnement {
        visited.evaluate(instance, tatonnement_path(instance, &step)?)?;
        let starts = visited.best(BEAM);
        descend_from(instance, &mut visited, starts)?;
    }
    if !settled(&visited) {
        grid_size(k, m)?;
        let axis = grid_axis(cap, k);
        visited.evaluate(instance, product(&vec![axis; m]))?;
        let starts = visited.best(BEAM);
        descend_from(instance, &mut visited, starts)?;
    }
    let half = (k / 2) as i64;
    for _ in 0..options.refinements {
        if visited.has_zero() || step.is_zero() {
            break;
        }
        step /= Rational::from_integer(k.into());
        grid_size(2 * half as usize + 1, m)?;
        let mut points = Vec::new();
        for center in visited.best(BEAM) {
            let axes: Vec<Vec<Rational>> = (0..m)
                .map(|j| {
                    (-half..=half)
                        .map(|t| center.prices.get(j) + &step * Rational::from_integer(t.into()))
                        .filter(|v| !v.is_negative() && v <= cap)
                        .collect()
                })
                .collect();
            points.extend(product(&axes));
        }
        visited.evaluate(instance, points)?;
        let starts = visited.best(BEAM);
        descend_from(instance, &mut visited, starts)?;
    }
    if !visited.has_zero() && !step.is_zero() {
        polish(instance, &mut visited, step, 4 * m.max(1))?;
    }

    let zeros: Vec<GapCertificate> = visited.certs.values().filter(|c| c.is_zero()).cloned().collect();
    let best = zeros
        .first()
        .cloned()
        .or_else(|| visited.best(1).pop())
        .expect("the zero price vector is always visited");
    debug_assert!(best.gap >= Rational::zero(), "gap {}", format_rational(&best.gap));
    Ok(SearchResult {
        zeros,
        best,
        visited: visited.certs.len(),
    })
}
