//! Equilibrium verification, zero-gap price search and integral
//! equilibrium extraction.

mod search;

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::config_lp::{for_each_assignment, integral_optimum, GapCertificate};
use crate::demand::{all_demand_sets, DemandSet};
use crate::error::{Error, Result};
use crate::model::{AuctionInstance, Bundle, FractionalAllocation, IntegralAllocation, PriceVector};
use crate::rational::{format_rational, ratio, Rational};

pub use search::{search_zero_gap, SearchResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Condition {
    Feasibility,
    Satisfaction,
    Clearance,
    Distribution,
}

impl Condition {
    pub fn label(&self) -> &'static str {
        match self {
            Condition::Feasibility => "feasibility",
            Condition::Satisfaction => "satisfaction",
            Condition::Clearance => "clearance",
            Condition::Distribution => "distribution",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub condition: Condition,
    /// `bidder <name>`, `item <name>` or `allocation`.
    pub subject: String,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violated at {}: {}", self.condition.label(), self.subject, self.detail)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Verdict {
    pub violations: Vec<Violation>,
}

impl Verdict {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, condition: Condition) -> bool {
        self.violations.iter().any(|v| v.condition == condition)
    }

    fn push(&mut self, condition: Condition, subject: String, detail: String) {
        self.violations.push(Violation {
            condition,
            subject,
            detail,
        });
    }
}

fn bidder_subject(instance: &AuctionInstance, i: usize) -> String {
    format!("bidder {}", instance.bidders[i].name)
}

fn item_subject(instance: &AuctionInstance, j: usize) -> String {
    format!("item {}", instance.items[j])
}

fn fits_instance(instance: &AuctionInstance, bundle: &Bundle) -> bool {
    bundle.item_count() == instance.item_count() && bundle.fits(instance.item_count())
}

fn demand_sets_for(instance: &AuctionInstance, prices: &PriceVector) -> Result<Vec<DemandSet>> {
    if prices.len() != instance.item_count() {
        return Err(Error::Dimension {
            what: "prices",
            expected: instance.item_count(),
            actual: prices.len(),
        });
    }
    all_demand_sets(instance, prices)
}

/// Checks an integral allocation at `prices`: item-disjoint bundles, each
/// one demanded by its bidder, every positively priced item sold.
pub fn verify_we(instance: &AuctionInstance, prices: &PriceVector, alloc: &IntegralAllocation) -> Result<Verdict> {
    let demand = demand_sets_for(instance, prices)?;
    let mut verdict = Verdict::default();
    if alloc.bundles.len() != instance.bidder_count() {
        verdict.push(
            Condition::Feasibility,
            "allocation".into(),
            format!("{} bundles for {} bidders", alloc.bundles.len(), instance.bidder_count()),
        );
        return Ok(verdict);
    }
    if let Some(bad) = alloc.bundles.iter().position(|b| !fits_instance(instance, b)) {
        verdict.push(
            Condition::Feasibility,
            bidder_subject(instance, bad),
            "bundle does not fit the instance's items".into(),
        );
        return Ok(verdict);
    }
    let counts = alloc.item_counts(instance.item_count());
    for (j, &count) in counts.iter().enumerate() {
        if count > 1 {
            verdict.push(
                Condition::Feasibility,
                item_subject(instance, j),
                format!("allocated to {count} bidders"),
            );
        }
    }
    for (i, bundle) in alloc.bundles.iter().enumerate() {
        if !demand[i].contains(bundle) {
            verdict.push(
                Condition::Satisfaction,
                bidder_subject(instance, i),
                format!(
                    "{} is not demanded; best utility is {}",
                    instance.show_bundle(bundle),
                    format_rational(&demand[i].max_utility)
                ),
            );
        }
    }
    for (j, &count) in counts.iter().enumerate() {
        if prices.get(j).is_positive() && count == 0 {
            verdict.push(
                Condition::Clearance,
                item_subject(instance, j),
                format!("price {} but unsold", format_rational(prices.get(j))),
            );
        }
    }
    Ok(verdict)
}

/// Checks a fractional allocation at `prices`: unit weight per bidder,
/// item mass at most 1, support inside demand sets, and full sale of every
/// positively priced item.
pub fn verify_fractional_we(
    instance: &AuctionInstance,
    prices: &PriceVector,
    frac: &FractionalAllocation,
) -> Result<Verdict> {
    let demand = demand_sets_for(instance, prices)?;
    let mut verdict = Verdict::default();
    if frac.weights.len() != instance.bidder_count() {
        verdict.push(
            Condition::Distribution,
            "allocation".into(),
            format!("{} distributions for {} bidders", frac.weights.len(), instance.bidder_count()),
        );
        return Ok(verdict);
    }
    for (i, weights) in frac.weights.iter().enumerate() {
        if let Some(bundle) = weights.keys().find(|b| !fits_instance(instance, b)) {
            verdict.push(
                Condition::Feasibility,
                bidder_subject(instance, i),
                format!("bundle mask {} does not fit the instance's items", bundle.mask()),
            );
            return Ok(verdict);
        }
        if let Some((bundle, w)) = weights.iter().find(|(_, w)| w.is_negative()) {
            verdict.push(
                Condition::Distribution,
                bidder_subject(instance, i),
                format!("negative weight {} on {}", format_rational(w), instance.show_bundle(bundle)),
            );
        }
        let total = frac.bidder_total(i);
        if !total.is_one() {
            verdict.push(
                Condition::Distribution,
                bidder_subject(instance, i),
                format!("weights sum to {}", format_rational(&total)),
            );
        }
    }
    for j in 0..instance.item_count() {
        let mass = frac.item_mass(j);
        if mass > Rational::one() {
            verdict.push(
                Condition::Feasibility,
                item_subject(instance, j),
                format!("allocated mass {}", format_rational(&mass)),
            );
        }
    }
    for (i, d) in demand.iter().enumerate() {
        for (bundle, _) in frac.support(i) {
            if !d.contains(bundle) {
                verdict.push(
                    Condition::Satisfaction,
                    bidder_subject(instance, i),
                    format!(
                        "{} is not demanded; best utility is {}",
                        instance.show_bundle(bundle),
                        format_rational(&d.max_utility)
                    ),
                );
            }
        }
    }
    for j in 0..instance.item_count() {
        let mass = frac.item_mass(j);
        if prices.get(j).is_positive() && !mass.is_one() {
            verdict.push(
                Condition::Clearance,
                item_subject(instance, j),
                format!(
                    "price {} but allocated mass {}",
                    format_rational(prices.get(j)),
                    format_rational(&mass)
                ),
            );
        }
    }
    Ok(verdict)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveOptions {
    /// Grid points per axis on the first pass over `[0, cap]^m`.
    pub grid_k: usize,
    /// Local refinement rounds, each dividing the step by `grid_k`.
    pub refinements: usize,
    /// Reported alongside a failed search; never used to claim an
    /// equilibrium.
    pub eps: Rational,
    /// Also seed the search with a demand-driven price adjustment path.
    pub tatonnement: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            grid_k: 5,
            refinements: 3,
            eps: ratio(1, 1000),
            tatonnement: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    WeFound,
    NoWeConclusive,
    NoWeAtVisitedPrices,
    FracOnly,
    NotFound,
}

impl SolveStatus {
    pub fn label(&self) -> &'static str {
        match self {
            SolveStatus::WeFound => "we_found",
            SolveStatus::NoWeConclusive => "no_we_conclusive",
            SolveStatus::NoWeAtVisitedPrices => "no_we_at_visited_prices",
            SolveStatus::FracOnly => "frac_only",
            SolveStatus::NotFound => "not_found",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub prices: PriceVector,
    /// Present whenever `gap` is zero.
    pub frac: Option<FractionalAllocation>,
    /// Present only for [`SolveStatus::WeFound`].
    pub integral: Option<IntegralAllocation>,
    pub gap: Rational,
    /// Distinct price vectors whose gap was evaluated.
    pub visited: usize,
    /// Distinct zero-gap price vectors found.
    pub zero_gap_prices: usize,
    pub conclusiveness_reason: String,
}

fn not_found(options: &SolveOptions, search: &SearchResult) -> SolveOutcome {
    let best = &search.best;
    let relation = if best.gap <= options.eps { "within" } else { "above" };
    SolveOutcome {
        status: SolveStatus::NotFound,
        prices: best.prices.clone(),
        frac: None,
        integral: None,
        gap: best.gap.clone(),
        visited: search.visited,
        zero_gap_prices: 0,
        conclusiveness_reason: format!(
            "no zero-gap price found; best gap {} is {relation} eps {}",
            format_rational(&best.gap),
            format_rational(&options.eps)
        ),
    }
}

fn with_zero(status: SolveStatus, cert: &GapCertificate, search: &SearchResult, reason: String) -> SolveOutcome {
    SolveOutcome {
        status,
        prices: cert.prices.clone(),
        frac: Some(cert.allocation.clone()),
        integral: None,
        gap: cert.gap.clone(),
        visited: search.visited,
        zero_gap_prices: search.zeros.len(),
        conclusiveness_reason: reason,
    }
}

/// Searches `[0, cap]^m` for a price with zero duality gap and returns the
/// fractional equilibrium read off the induced LP there.
pub fn solve_fractional_we(instance: &AuctionInstance, options: &SolveOptions) -> Result<SolveOutcome> {
    let search = search_zero_gap(instance, options)?;
    Ok(match search.zeros.first() {
        None => not_found(options, &search),
        Some(cert) => with_zero(
            SolveStatus::FracOnly,
            cert,
            &search,
            "zero duality gap: the induced LP's optimal primal is a fractional equilibrium".into(),
        ),
    })
}

/// Looks for an integral optimum of the induced LP at every zero-gap price
/// found, in lexicographic price order.
pub fn solve_we(instance: &AuctionInstance, options: &SolveOptions) -> Result<SolveOutcome> {
    let search = search_zero_gap(instance, options)?;
    let Some(first) = search.zeros.first() else {
        return Ok(not_found(options, &search));
    };
    for cert in &search.zeros {
        let opt = integral_optimum(instance, &cert.prices)?;
        let Some(alloc) = opt.allocation else {
            continue;
        };
        let verdict = verify_we(instance, &cert.prices, &alloc)?;
        debug_assert!(verdict.ok(), "integral LP optimum at a zero-gap price must be an equilibrium");
        if verdict.ok() {
            let mut outcome = with_zero(
                SolveStatus::WeFound,
                cert,
                &search,
                "integral optimum of the induced LP at a zero-gap price".into(),
            );
            outcome.integral = Some(alloc);
            return Ok(outcome);
        }
    }
    Ok(if instance.is_quasilinear() {
        with_zero(
            SolveStatus::NoWeConclusive,
            first,
            &search,
            "quasilinear: the induced LP does not depend on prices and has no integral optimum".into(),
        )
    } else {
        with_zero(
            SolveStatus::NoWeAtVisitedPrices,
            first,
            &search,
            format!(
                "no integral optimum at any of the {} zero-gap prices visited; not a proof of non-existence",
                search.zeros.len()
            ),
        )
    })
}

/// Largest `(cap/step + 1)^m * (n+1)^m` accepted by [`brute_force_we`].
pub const BRUTE_FORCE_LIMIT: u64 = 10_000_000;

/// Every `(prices, allocation)` equilibrium with prices on the grid
/// `{0, step, ..., cap}^m`. Prices come in lexicographic order, and
/// allocations within one price vector in canonical assignment order.
pub fn brute_force_we(instance: &AuctionInstance, step: &Rational) -> Result<Vec<(PriceVector, IntegralAllocation)>> {
    if !step.is_positive() {
        return Err(Error::InvalidStep(format!("{} is not positive", format_rational(step))));
    }
    let ticks = &instance.price_cap / step;
    if !ticks.is_integer() {
        return Err(Error::InvalidStep(format!(
            "{} does not divide the price cap {}",
            format_rational(step),
            format_rational(&instance.price_cap)
        )));
    }
    let m = instance.item_count() as u32;
    let n = instance.bidder_count() as u64;
    let too_large = || {
        Error::TooLarge(format!(
            "({}+1)^{m} grid prices times ({n}+1)^{m} assignments",
            format_rational(&ticks)
        ))
    };
    let per_axis: u64 = (ticks.to_integer() + 1u32).try_into().map_err(|_| too_large())?;
    let work = per_axis
        .checked_pow(m)
        .and_then(|g| (n + 1).checked_pow(m).and_then(|a| g.checked_mul(a)))
        .filter(|w| *w <= BRUTE_FORCE_LIMIT)
        .ok_or_else(too_large)?;
    debug_assert!(work <= BRUTE_FORCE_LIMIT);

    let mut found = Vec::new();
    let mut digits = vec![0u64; m as usize];
    loop {
        let prices = PriceVector::new(digits.iter().map(|&t| step * Rational::from_integer(t.into())).collect());
        let demand = all_demand_sets(instance, &prices)?;
        for_each_assignment(instance.item_count(), instance.bidder_count(), |bundles| {
            let demanded = bundles.iter().zip(&demand).all(|(b, d)| d.contains(b));
            let cleared = (0..instance.item_count())
                .all(|j| prices.get(j).is_zero() || bundles.iter().any(|b| b.contains(j)));
            if demanded && cleared {
                found.push((prices.clone(), IntegralAllocation::new(bundles.to_vec())));
            }
        })?;
        // last item moves fastest: lexicographic order
        let Some(pos) = (0..digits.len()).rev().find(|&j| digits[j] + 1 < per_axis) else {
            break;
        };
        digits[pos] += 1;
        for d in digits.iter_mut().skip(pos + 1) {
            *d = 0;
        }
    }
    Ok(found)
}
