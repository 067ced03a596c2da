//! The configuration LP induced at a price vector, its dual, the duality
//! gap of the utility/price pair, and exhaustive integral optima.

use num_traits::{One, Zero};

use crate::demand::max_utility;
use crate::error::{Error, Result};
use crate::lp::{solve_lp, Constraint, LinearProgram, LpSolution, Relation, Sense};
use crate::model::{
    bundle_price, evaluate_utility, AuctionInstance, Bundle, FractionalAllocation, IntegralAllocation, PriceVector,
};
use crate::rational::Rational;

/// Guard for [`integral_optimum`]: at most this many item assignments.
pub const ASSIGNMENT_LIMIT: u64 = 10_000_000;

/// `u_i(S, p*(S)) + p*(S)`: the value a quasilinear bidder would need to
/// make the same choices at `pstar`. For `∅` this is `u_i(∅, 0)`.
pub fn equivalent_ql_value(
    instance: &AuctionInstance,
    bidder: usize,
    bundle: &Bundle,
    pstar: &PriceVector,
) -> Result<Rational> {
    let payment = bundle_price(bundle, pstar)?;
    Ok(evaluate_utility(instance, bidder, bundle, &payment)? + payment)
}

/// Equivalent values for every bidder, indexed `[bidder][bundle index]`.
pub fn value_table(instance: &AuctionInstance, pstar: &PriceVector) -> Result<Vec<Vec<Rational>>> {
    let bundles = instance.bundles();
    (0..instance.bidder_count())
        .map(|i| {
            bundles
                .iter()
                .map(|b| equivalent_ql_value(instance, i, b, pstar))
                .collect()
        })
        .collect()
}

fn bundle_tag(instance: &AuctionInstance, bundle: &Bundle) -> String {
    if bundle.is_empty() {
        "empty".to_string()
    } else {
        instance.bundle_names(bundle).join("+")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InducedLp {
    pub at_prices: PriceVector,
    pub lp: LinearProgram,
    /// `(bidder, bundle)` for each column: bidder-major, canonical bundle
    /// order within a bidder.
    pub columns: Vec<(usize, Bundle)>,
}

/// Welfare maximization over `x_{i,S} >= 0` with one `<= 1` row per bidder
/// followed by one `<= 1` row per item.
pub fn build_induced_lp(instance: &AuctionInstance, pstar: &PriceVector) -> Result<InducedLp> {
    let values = value_table(instance, pstar)?;
    let bundles = instance.bundles();
    let n = instance.bidder_count();
    let m = instance.item_count();
    let columns: Vec<(usize, Bundle)> = (0..n)
        .flat_map(|i| bundles.iter().map(move |b| (i, *b)))
        .collect();
    let objective = columns.iter().map(|(i, b)| values[*i][b.index()].clone()).collect();
    let labels = columns
        .iter()
        .map(|(i, b)| format!("x[{},{}]", instance.bidders[*i].name, bundle_tag(instance, b)))
        .collect();
    let mut lp = LinearProgram::new(Sense::Maximize, objective).with_column_labels(labels);
    let indicator = |pred: &dyn Fn(usize, &Bundle) -> bool| -> Vec<Rational> {
        columns
            .iter()
            .map(|(i, b)| if pred(*i, b) { Rational::one() } else { Rational::zero() })
            .collect()
    };
    for i in 0..n {
        lp.add_constraint(
            format!("bidder[{}]", instance.bidders[i].name),
            Constraint::new(indicator(&|k, _| k == i), Relation::Le, Rational::one()),
        );
    }
    for j in 0..m {
        lp.add_constraint(
            format!("item[{}]", instance.items[j]),
            Constraint::new(indicator(&|_, b| b.contains(j)), Relation::Le, Rational::one()),
        );
    }
    Ok(InducedLp {
        at_prices: pstar.clone(),
        lp,
        columns,
    })
}

/// The dual over `(u_1..u_n, p_1..p_m)`: minimize `∑u + ∑p` subject to
/// `u_i + p(S) >= v_i^{p*}(S)` for every bidder and bundle.
pub fn build_dual_lp(instance: &AuctionInstance, pstar: &PriceVector) -> Result<LinearProgram> {
    let values = value_table(instance, pstar)?;
    let n = instance.bidder_count();
    let m = instance.item_count();
    let labels = instance
        .bidders
        .iter()
        .map(|b| format!("u[{}]", b.name))
        .chain(instance.items.iter().map(|item| format!("p[{item}]")))
        .collect();
    let mut lp = LinearProgram::new(Sense::Minimize, vec![Rational::one(); n + m]).with_column_labels(labels);
    for i in 0..n {
        for bundle in instance.bundles() {
            let mut row = vec![Rational::zero(); n + m];
            row[i] = Rational::one();
            for j in bundle.items() {
                row[n + j] = Rational::one();
            }
            lp.add_constraint(
                format!("c[{},{}]", instance.bidders[i].name, bundle_tag(instance, &bundle)),
                Constraint::new(row, Relation::Ge, values[i][bundle.index()].clone()),
            );
        }
    }
    Ok(lp)
}

/// Turns an optimal primal of the induced LP into per-bidder distributions,
/// topping each bidder up to total weight 1 with `∅`.
pub fn fractional_from_primal(
    instance: &AuctionInstance,
    induced: &InducedLp,
    primal: &[Rational],
) -> FractionalAllocation {
    let mut frac = FractionalAllocation::new(instance.bidder_count());
    for ((i, bundle), x) in induced.columns.iter().zip(primal) {
        frac.add(*i, *bundle, x.clone());
    }
    for i in 0..instance.bidder_count() {
        let slack = Rational::one() - frac.bidder_total(i);
        frac.add(i, instance.empty_bundle(), slack);
    }
    frac
}

/// `(u*, p)` with `u*_i` the bidder's best utility at `p` is always
/// feasible for the dual at `p* = p`; `gap` measures how far it is from
/// optimal. Zero gap certifies `p` as a fractional equilibrium price.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GapCertificate {
    pub prices: PriceVector,
    pub max_utilities: Vec<Rational>,
    pub lp_optimum: Rational,
    pub gap: Rational,
    /// The solver's optimal primal, `∅`-padded to unit weight per bidder.
    pub allocation: FractionalAllocation,
}

impl GapCertificate {
    pub fn is_zero(&self) -> bool {
        self.gap.is_zero()
    }
}

pub(crate) fn solve_induced(instance: &AuctionInstance, p: &PriceVector) -> Result<(InducedLp, LpSolution)> {
    let induced = build_induced_lp(instance, p)?;
    let solution = solve_lp(&induced.lp)?;
    // bounded (all x <= 1) and feasible (x = 0)
    debug_assert!(solution.is_optimal());
    Ok((induced, solution))
}

pub fn duality_gap(instance: &AuctionInstance, p: &PriceVector) -> Result<GapCertificate> {
    let max_utilities = (0..instance.bidder_count())
        .map(|i| max_utility(instance, i, p))
        .collect::<Result<Vec<_>>>()?;
    let (induced, solution) = solve_induced(instance, p)?;
    let lp_optimum = solution.objective_value.clone();
    let gap = max_utilities.iter().sum::<Rational>() + p.total() - &lp_optimum;
    debug_assert!(gap >= Rational::zero(), "weak duality violated");
    let allocation = fractional_from_primal(instance, &induced, &solution.primal);
    Ok(GapCertificate {
        prices: p.clone(),
        max_utilities,
        lp_optimum,
        gap,
        allocation,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegralOptimum {
    /// Present iff the best integral value equals the LP optimum.
    pub allocation: Option<IntegralAllocation>,
    pub best_integral_value: Rational,
    pub best_assignment: IntegralAllocation,
    pub lp_optimum: Rational,
}

/// Calls `visit` for every assignment of items to a bidder or to nobody,
/// in canonical order: item 0 is the fastest-moving digit, digit 0 means
/// unsold and digit `k` means bidder `k - 1`.
pub fn for_each_assignment(
    item_count: usize,
    bidder_count: usize,
    mut visit: impl FnMut(&[Bundle]),
) -> Result<()> {
    let base = bidder_count as u64 + 1;
    let total = base
        .checked_pow(item_count as u32)
        .filter(|t| *t <= ASSIGNMENT_LIMIT)
        .ok_or_else(|| Error::TooLarge(format!("({bidder_count}+1)^{item_count} assignments")))?;
    let mut digits = vec![0usize; item_count];
    let mut bundles = vec![Bundle::empty(item_count); bidder_count];
    for _ in 0..total {
        for b in bundles.iter_mut() {
            *b = Bundle::empty(item_count);
        }
        for (j, &d) in digits.iter().enumerate() {
            if d > 0 {
                bundles[d - 1] = bundles[d - 1].with(j);
            }
        }
        visit(&bundles);
        for d in digits.iter_mut() {
            *d += 1;
            if *d < base as usize {
                break;
            }
            *d = 0;
        }
    }
    Ok(())
}

/// Best integral solution of the induced LP at `p`, by enumerating all
/// `(n+1)^m` assignments. The first maximizer in canonical order wins.
pub fn integral_optimum(instance: &AuctionInstance, p: &PriceVector) -> Result<IntegralOptimum> {
    let values = value_table(instance, p)?;
    let (_, solution) = solve_induced(instance, p)?;
    let mut best: Option<(Rational, Vec<Bundle>)> = None;
    for_each_assignment(instance.item_count(), instance.bidder_count(), |bundles| {
        let score: Rational = bundles
            .iter()
            .enumerate()
            .map(|(i, b)| &values[i][b.index()])
            .sum();
        if best.as_ref().is_none_or(|(v, _)| score > *v) {
            best = Some((score, bundles.to_vec()));
        }
    })?;
    let (best_integral_value, bundles) = best.expect("at least one assignment");
    let best_assignment = IntegralAllocation::new(bundles);
    let allocation = (best_integral_value == solution.objective_value).then(|| best_assignment.clone());
    Ok(IntegralOptimum {
        allocation,
        best_integral_value,
        best_assignment,
        lp_optimum: solution.objective_value,
    })
}
