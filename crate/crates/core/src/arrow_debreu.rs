//! The exchange market behind an auction: one seller endowed with every
//! item, `n` buyers endowed with money only, and money as the last,
//! divisible commodity.

use num_traits::{One, Signed, Zero};

use crate::equilibrium::{verify_we, Condition, Verdict, Violation};
use crate::error::{Error, Result};
use crate::lp::{find_feasible_point, Constraint, Relation};
use crate::model::{
    bundle_price, evaluate_utility, AuctionInstance, Bundle, IntegralAllocation, PriceVector, UtilityFunction,
};
use crate::rational::{format_rational, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdMarket {
    pub instance: AuctionInstance,
    /// Total money: strictly above the bidders' combined utility for
    /// everything at no cost, and large enough that every buyer can afford
    /// any payment it would accept over staying out.
    pub z: Rational,
    /// One row per agent, buyers first and the seller last; one column per
    /// item and a final money column.
    pub endowments: Vec<Vec<Rational>>,
}

impl AdMarket {
    /// `m + 1`: the items, then money.
    pub fn commodity_count(&self) -> usize {
        self.instance.item_count() + 1
    }

    /// `n + 1`: the buyers, then the seller.
    pub fn agent_count(&self) -> usize {
        self.instance.bidder_count() + 1
    }

    pub fn seller(&self) -> usize {
        self.instance.bidder_count()
    }

    pub fn money(&self) -> usize {
        self.instance.item_count()
    }

    /// Per-buyer money endowment `Z / n`.
    pub fn buyer_money(&self) -> Rational {
        &self.z / Rational::from_integer(self.instance.bidder_count().into())
    }

    /// Total endowment of each commodity: `(1, ..., 1, Z)`.
    pub fn supply(&self) -> Vec<Rational> {
        (0..self.commodity_count())
            .map(|c| self.endowments.iter().map(|e| &e[c]).sum())
            .collect()
    }
}

/// One agent's holdings: an item set and an amount of money.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AdAllocation {
    pub items: Bundle,
    pub money: Rational,
}

impl AdAllocation {
    pub fn vector(&self) -> Vec<Rational> {
        let mut v: Vec<Rational> = (0..self.items.item_count())
            .map(|j| if self.items.contains(j) { Rational::one() } else { Rational::zero() })
            .collect();
        v.push(self.money.clone());
        v
    }
}

pub fn reduce(instance: &AuctionInstance) -> Result<AdMarket> {
    let n = instance.bidder_count();
    let m = instance.item_count();
    if n == 0 {
        return Err(Error::InvalidInstance("no bidders".into()));
    }
    let full = instance.full_bundle();
    let mut z = Rational::one();
    let mut bound = Rational::zero();
    for i in 0..n {
        z += evaluate_utility(instance, i, &full, &Rational::zero())?;
        bound = bound.max(acceptable_payment(instance, i)?);
    }
    z = z.max(bound * Rational::from_integer(n.into()));
    let share = &z / Rational::from_integer(n.into());
    let mut endowments = Vec::with_capacity(n + 1);
    for _ in 0..n {
        let mut row = vec![Rational::zero(); m];
        row.push(share.clone());
        endowments.push(row);
    }
    let mut seller = vec![Rational::one(); m];
    seller.push(Rational::zero());
    endowments.push(seller);
    Ok(AdMarket {
        instance: instance.clone(),
        z,
        endowments,
    })
}

/// Largest payment in `[0, horizon]` at which some bundle is still worth
/// at least `u_i(∅, 0)` to the bidder. Utilities fall with payment, so
/// beyond this bound every bundle loses to staying out.
fn acceptable_payment(instance: &AuctionInstance, bidder: usize) -> Result<Rational> {
    let horizon = instance.horizon();
    let empty = instance.empty_bundle();
    let outside = evaluate_utility(instance, bidder, &empty, &Rational::zero())?;
    let mut best = Rational::zero();
    for bundle in instance.bundles() {
        let mut knots = vec![Rational::zero(), horizon.clone()];
        if let UtilityFunction::TabulatedPwl { curves } = &instance.bidder(bidder)?.utility {
            if let Some(curve) = curves.get(&bundle) {
                knots.extend(curve.points().iter().map(|(y, _)| y.clone()).filter(|y| y <= &horizon));
            }
        }
        knots.sort();
        knots.dedup();
        let values = knots
            .iter()
            .map(|y| evaluate_utility(instance, bidder, &bundle, y))
            .collect::<Result<Vec<_>>>()?;
        let Some(k) = values.iter().rposition(|u| u >= &outside) else {
            continue;
        };
        let reach = if k + 1 == knots.len() {
            knots[k].clone()
        } else {
            let (y0, y1) = (&knots[k], &knots[k + 1]);
            let (u0, u1) = (&values[k], &values[k + 1]);
            y0 + (u0 - &outside) * (y1 - y0) / (u0 - u1)
        };
        best = best.max(reach);
    }
    Ok(best)
}

fn check_ptilde(market: &AdMarket, ptilde: &[Rational]) -> Result<()> {
    if ptilde.len() != market.commodity_count() {
        return Err(Error::Dimension {
            what: "market prices",
            expected: market.commodity_count(),
            actual: ptilde.len(),
        });
    }
    if ptilde.iter().any(Signed::is_negative) {
        return Err(Error::Parse("market prices must be nonnegative".into()));
    }
    if ptilde[market.money()].is_zero() {
        return Err(Error::ZeroMoneyPrice);
    }
    Ok(())
}

fn item_prices(market: &AdMarket, ptilde: &[Rational]) -> PriceVector {
    PriceVector::new(ptilde[..market.money()].to_vec())
}

/// Utility-maximizing holdings of `agent` at market prices `ptilde`.
/// Buyers keep all unspent money; the seller sells everything and holds
/// no items.
pub fn ad_demand_set(market: &AdMarket, agent: usize, ptilde: &[Rational]) -> Result<Vec<AdAllocation>> {
    check_ptilde(market, ptilde)?;
    let p_money = &ptilde[market.money()];
    let items = item_prices(market, ptilde);
    let instance = &market.instance;
    if agent == market.seller() {
        let budget: Rational = items.total();
        return Ok(vec![AdAllocation {
            items: instance.empty_bundle(),
            money: budget / p_money,
        }]);
    }
    if agent > market.seller() {
        return Err(Error::UnknownBidder(agent));
    }
    let share = market.buyer_money();
    let mut best: Option<Rational> = None;
    let mut argmax = Vec::new();
    for bundle in instance.bundles() {
        let payment = bundle_price(&bundle, &items)? / p_money;
        if payment > share {
            continue;
        }
        let utility = evaluate_utility(instance, agent, &bundle, &payment)?;
        let holding = AdAllocation {
            items: bundle,
            money: &share - &payment,
        };
        match &best {
            Some(b) if &utility < b => {}
            Some(b) if &utility == b => argmax.push(holding),
            _ => {
                best = Some(utility);
                argmax = vec![holding];
            }
        }
    }
    Ok(argmax)
}

fn agent_subject(market: &AdMarket, agent: usize) -> String {
    if agent == market.seller() {
        "seller".into()
    } else {
        format!("bidder {}", market.instance.bidders[agent].name)
    }
}

fn commodity_subject(market: &AdMarket, c: usize) -> String {
    if c == market.money() {
        "money".into()
    } else {
        format!("item {}", market.instance.items[c])
    }
}

/// Checks demand satisfaction for every agent and clearance of every
/// positively priced commodity. The seller may keep zero-priced items.
pub fn verify_gme(market: &AdMarket, ptilde: &[Rational], allocs: &[AdAllocation]) -> Result<Verdict> {
    check_ptilde(market, ptilde)?;
    let mut violations = Vec::new();
    if allocs.len() != market.agent_count() {
        violations.push(Violation {
            condition: Condition::Feasibility,
            subject: "allocation".into(),
            detail: format!("{} holdings for {} agents", allocs.len(), market.agent_count()),
        });
        return Ok(Verdict { violations });
    }
    let m = market.instance.item_count();
    for (agent, holding) in allocs.iter().enumerate() {
        if holding.items.item_count() != m || !holding.items.fits(m) || holding.money.is_negative() {
            violations.push(Violation {
                condition: Condition::Feasibility,
                subject: agent_subject(market, agent),
                detail: "holding is not a subset of the items with nonnegative money".into(),
            });
            return Ok(Verdict { violations });
        }
    }
    for (agent, holding) in allocs.iter().enumerate() {
        let demanded = ad_demand_set(market, agent, ptilde)?;
        let ok = if agent == market.seller() {
            holding.money == demanded[0].money && holding.items.items().all(|j| ptilde[j].is_zero())
        } else {
            demanded.contains(holding)
        };
        if !ok {
            violations.push(Violation {
                condition: Condition::Satisfaction,
                subject: agent_subject(market, agent),
                detail: format!(
                    "holding ({}, {}) is not demanded",
                    market.instance.show_bundle(&holding.items),
                    format_rational(&holding.money)
                ),
            });
        }
    }
    let supply = market.supply();
    for (c, endowed) in supply.iter().enumerate() {
        let total: Rational = allocs.iter().map(|h| h.vector()[c].clone()).sum();
        if &total > endowed {
            violations.push(Violation {
                condition: Condition::Feasibility,
                subject: commodity_subject(market, c),
                detail: format!("allocated {} of {}", format_rational(&total), format_rational(endowed)),
            });
        } else if ptilde[c].is_positive() && &total != endowed {
            violations.push(Violation {
                condition: Condition::Clearance,
                subject: commodity_subject(market, c),
                detail: format!("allocated {} of {}", format_rational(&total), format_rational(endowed)),
            });
        }
    }
    Ok(Verdict { violations })
}

/// Forward translation: market prices `(p, 1)`, each buyer keeps its bundle
/// and unspent money, the seller collects all payments.
pub fn we_to_gme(
    instance: &AuctionInstance,
    prices: &PriceVector,
    alloc: &IntegralAllocation,
) -> Result<(AdMarket, Vec<Rational>, Vec<AdAllocation>)> {
    let verdict = verify_we(instance, prices, alloc)?;
    if !verdict.ok() {
        return Err(Error::NotAnEquilibrium(verdict.violations[0].to_string()));
    }
    let market = reduce(instance)?;
    let mut ptilde = prices.as_slice().to_vec();
    ptilde.push(Rational::one());
    let share = market.buyer_money();
    let mut allocs = alloc
        .bundles
        .iter()
        .map(|b| {
            Ok(AdAllocation {
                items: *b,
                money: &share - bundle_price(b, prices)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    allocs.push(AdAllocation {
        items: instance.empty_bundle(),
        money: prices.total(),
    });
    Ok((market, ptilde, allocs))
}

/// Backward translation: prices normalized by the money price, buyers'
/// item sets as the allocation.
pub fn gme_to_we(
    market: &AdMarket,
    ptilde: &[Rational],
    allocs: &[AdAllocation],
) -> Result<(PriceVector, IntegralAllocation)> {
    let verdict = verify_gme(market, ptilde, allocs)?;
    if !verdict.ok() {
        return Err(Error::NotAMarketEquilibrium(verdict.violations[0].to_string()));
    }
    let p_money = &ptilde[market.money()];
    let prices = PriceVector::new(ptilde[..market.money()].iter().map(|p| p / p_money).collect());
    let alloc = IntegralAllocation::new(allocs[..market.seller()].iter().map(|h| h.items).collect());
    Ok((prices, alloc))
}

/// A point `(p̃, d)` of price and aggregate-demand space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixedPointCandidate {
    pub ptilde: Vec<Rational>,
    pub d: Vec<Rational>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FixedPointCheck {
    pub is_fixed: bool,
    /// `p̃` maximizes the value of excess demand `d - supply`.
    pub f_ok: bool,
    /// `d` is a sum of points from the convex hulls of the agents' demands.
    pub d_ok: bool,
}

/// The candidate attached to an equilibrium: prices `(p, 1)` and demand
/// equal to items sold plus all money `Z`.
pub fn fixed_point_candidate(
    instance: &AuctionInstance,
    prices: &PriceVector,
    alloc: &IntegralAllocation,
) -> Result<FixedPointCandidate> {
    let market = reduce(instance)?;
    let mut ptilde = prices.as_slice().to_vec();
    ptilde.push(Rational::one());
    let mut d: Vec<Rational> = alloc
        .item_counts(instance.item_count())
        .into_iter()
        .map(|c| Rational::from_integer(c.into()))
        .collect();
    d.push(market.z);
    Ok(FixedPointCandidate { ptilde, d })
}

pub fn check_fixed_point(instance: &AuctionInstance, candidate: &FixedPointCandidate) -> Result<FixedPointCheck> {
    let market = reduce(instance)?;
    let ptilde = &candidate.ptilde;
    check_ptilde(&market, ptilde)?;
    let supply = market.supply();
    if candidate.d.len() != supply.len() {
        return Err(Error::Dimension {
            what: "demand coordinates",
            expected: supply.len(),
            actual: candidate.d.len(),
        });
    }
    let f_ok = candidate
        .d
        .iter()
        .zip(&supply)
        .zip(ptilde)
        .all(|((d, s), p)| d <= s && (p * (s - d)).is_zero());

    let mut vectors: Vec<(usize, Vec<Rational>)> = Vec::new();
    for agent in 0..market.agent_count() {
        for holding in ad_demand_set(&market, agent, ptilde)? {
            vectors.push((agent, holding.vector()));
        }
    }
    let width = vectors.len();
    let mut rows = Vec::new();
    for agent in 0..market.agent_count() {
        let coefficients = vectors
            .iter()
            .map(|(a, _)| if *a == agent { Rational::one() } else { Rational::zero() })
            .collect();
        rows.push(Constraint::new(coefficients, Relation::Eq, Rational::one()));
    }
    for (c, target) in candidate.d.iter().enumerate() {
        let coefficients = vectors.iter().map(|(_, v)| v[c].clone()).collect();
        rows.push(Constraint::new(coefficients, Relation::Eq, target.clone()));
    }
    let d_ok = find_feasible_point(width, &rows)?.point().is_some();
    Ok(FixedPointCheck {
        is_fixed: f_ok && d_ok,
        f_ok,
        d_ok,
    })
}

/// Buyer utilities `u_i(x, Z/n - y)` of every affordable holding, for
/// reports.
pub fn buyer_utility(market: &AdMarket, agent: usize, holding: &AdAllocation) -> Result<Rational> {
    let payment = market.buyer_money() - &holding.money;
    evaluate_utility(&market.instance, agent, &holding.items, &payment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rational::{int, ratio};
    use proptest::prelude::*;

    fn r(v: &[(i64, i64)]) -> Vec<Rational> {
        v.iter().map(|&(n, d)| ratio(n, d)).collect()
    }

    fn b2(items: &[usize]) -> Bundle {
        Bundle::from_items(2, items.iter().copied())
    }

    fn ql_ud_we() -> (AuctionInstance, PriceVector, IntegralAllocation) {
        (
            fixtures::ql_ud(),
            PriceVector::new(vec![int(1), int(1)]),
            IntegralAllocation::new(vec![b2(&[0]), b2(&[1])]),
        )
    }

    #[test]
    fn reduce_examples() {
        let market = reduce(&fixtures::ql_ud()).unwrap();
        assert_eq!((market.commodity_count(), market.agent_count()), (3, 3));
        assert_eq!(market.z, int(5));
        assert_eq!(market.endowments[0], r(&[(0, 1), (0, 1), (5, 2)]));
        assert_eq!(market.endowments[1], r(&[(0, 1), (0, 1), (5, 2)]));
        assert_eq!(market.endowments[2], r(&[(1, 1), (1, 1), (0, 1)]));
        assert_eq!(market.supply(), r(&[(1, 1), (1, 1), (5, 1)]));

        let market = reduce(&fixtures::single_item(5, 6)).unwrap();
        assert_eq!(market.z, int(6));
        assert_eq!(market.endowments[0], r(&[(0, 1), (6, 1)]));

        let mut empty = fixtures::ql_ud();
        empty.bidders.clear();
        assert!(reduce(&empty).is_err());
    }

    #[test]
    fn money_covers_every_acceptable_payment() {
        // u(ab, y) = 8 - y up to 4, then falls by 3 per unit: zero at 16/3
        assert_eq!(acceptable_payment(&fixtures::nql_2(), 0).unwrap(), ratio(16, 3));
        assert_eq!(reduce(&fixtures::nql_2()).unwrap().z, int(9));

        // bidder 1 pays 8 at this equilibrium, above (1 + 8) / 2
        let inst = AuctionInstance {
            items: vec!["g".into()],
            bidders: vec![
                crate::model::Bidder {
                    name: "1".into(),
                    utility: UtilityFunction::UnitDemand { item_values: vec![int(8)] },
                },
                crate::model::Bidder {
                    name: "2".into(),
                    utility: UtilityFunction::UnitDemand { item_values: vec![int(0)] },
                },
            ],
            price_cap: int(9),
        };
        let p = PriceVector::new(vec![int(8)]);
        let x = IntegralAllocation::new(vec![Bundle::full(1), Bundle::empty(1)]);
        let (market, ptilde, allocs) = we_to_gme(&inst, &p, &x).unwrap();
        assert_eq!(market.z, int(16));
        assert!(verify_gme(&market, &ptilde, &allocs).unwrap().ok());
        assert_eq!(gme_to_we(&market, &ptilde, &allocs).unwrap(), (p, x));
    }

    #[test]
    fn demand_examples() {
        let market = reduce(&fixtures::ql_ud()).unwrap();
        let p = r(&[(1, 1), (1, 1), (1, 1)]);
        let buyer = ad_demand_set(&market, 0, &p).unwrap();
        assert_eq!(
            buyer,
            vec![AdAllocation {
                items: b2(&[0]),
                money: ratio(3, 2)
            }]
        );
        assert_eq!(buyer_utility(&market, 0, &buyer[0]).unwrap(), int(1));
        let seller = ad_demand_set(&market, 2, &p).unwrap();
        assert_eq!(
            seller,
            vec![AdAllocation {
                items: b2(&[]),
                money: int(2)
            }]
        );
        let dear = ad_demand_set(&market, 1, &r(&[(9, 1), (9, 1), (1, 1)])).unwrap();
        assert_eq!(
            dear,
            vec![AdAllocation {
                items: b2(&[]),
                money: ratio(5, 2)
            }]
        );
        assert!(matches!(
            ad_demand_set(&market, 0, &r(&[(1, 1), (1, 1), (0, 1)])),
            Err(Error::ZeroMoneyPrice)
        ));
    }

    #[test]
    fn forward_translation() {
        let (inst, p, x) = ql_ud_we();
        let (market, ptilde, allocs) = we_to_gme(&inst, &p, &x).unwrap();
        assert_eq!(ptilde, r(&[(1, 1), (1, 1), (1, 1)]));
        let money: Vec<Rational> = allocs.iter().map(|h| h.money.clone()).collect();
        assert_eq!(money, r(&[(3, 2), (3, 2), (2, 1)]));
        assert!(verify_gme(&market, &ptilde, &allocs).unwrap().ok());
        assert_eq!(money.iter().sum::<Rational>(), market.z);

        let mut poorer = allocs.clone();
        poorer[2].money -= int(1);
        let v = verify_gme(&market, &ptilde, &poorer).unwrap();
        assert!(v.has(Condition::Clearance));

        let mut greedy = allocs.clone();
        greedy[0] = AdAllocation {
            items: b2(&[]),
            money: ratio(5, 2),
        };
        assert!(verify_gme(&market, &ptilde, &greedy).unwrap().has(Condition::Satisfaction));

        let inst = fixtures::single_item(5, 6);
        let p = PriceVector::new(vec![int(1)]);
        let x = IntegralAllocation::new(vec![Bundle::full(1)]);
        let (_, _, allocs) = we_to_gme(&inst, &p, &x).unwrap();
        assert_eq!((allocs[0].money.clone(), allocs[1].money.clone()), (int(5), int(1)));

        let bad = IntegralAllocation::new(vec![b2(&[1]), b2(&[0])]);
        assert!(matches!(
            we_to_gme(&fixtures::ql_ud(), &PriceVector::new(vec![int(1), int(1)]), &bad),
            Err(Error::NotAnEquilibrium(_))
        ));
    }

    #[test]
    fn zero_price_equilibrium_pays_the_seller_nothing() {
        let mut inst = fixtures::ql_ud();
        inst.bidders.truncate(1);
        let p = PriceVector::new(vec![int(0), int(0)]);
        let x = IntegralAllocation::new(vec![b2(&[0])]);
        let (market, ptilde, allocs) = we_to_gme(&inst, &p, &x).unwrap();
        assert_eq!(allocs[1].money, int(0));
        assert!(verify_gme(&market, &ptilde, &allocs).unwrap().ok());
        let mut keeps = allocs.clone();
        keeps[1].items = b2(&[1]);
        assert!(verify_gme(&market, &ptilde, &keeps).unwrap().ok());
    }

    #[test]
    fn round_trip_and_normalization() {
        let (inst, p, x) = ql_ud_we();
        let (market, ptilde, allocs) = we_to_gme(&inst, &p, &x).unwrap();
        assert_eq!(gme_to_we(&market, &ptilde, &allocs).unwrap(), (p.clone(), x.clone()));

        let doubled: Vec<Rational> = ptilde.iter().map(|v| v * int(2)).collect();
        assert_eq!(gme_to_we(&market, &doubled, &allocs).unwrap(), (p, x));
        assert!(matches!(
            gme_to_we(&market, &r(&[(1, 1), (1, 1), (0, 1)]), &allocs),
            Err(Error::ZeroMoneyPrice)
        ));
    }

    #[test]
    fn fixed_point_examples() {
        let (inst, p, x) = ql_ud_we();
        let candidate = fixed_point_candidate(&inst, &p, &x).unwrap();
        assert_eq!(candidate.d, r(&[(1, 1), (1, 1), (5, 1)]));
        let check = check_fixed_point(&inst, &candidate).unwrap();
        assert!(check.is_fixed && check.f_ok && check.d_ok);

        let over = FixedPointCandidate {
            ptilde: candidate.ptilde.clone(),
            d: r(&[(1, 1), (3, 2), (5, 1)]),
        };
        assert!(!check_fixed_point(&inst, &over).unwrap().f_ok);

        // nobody buys b at price 3
        let unwanted = FixedPointCandidate {
            ptilde: r(&[(1, 1), (3, 1), (1, 1)]),
            d: r(&[(1, 1), (1, 1), (5, 1)]),
        };
        let check = check_fixed_point(&inst, &unwanted).unwrap();
        assert!(!check.d_ok && !check.is_fixed);

        let broke = FixedPointCandidate {
            ptilde: r(&[(1, 1), (1, 1), (0, 1)]),
            d: candidate.d,
        };
        assert!(matches!(check_fixed_point(&inst, &broke), Err(Error::ZeroMoneyPrice)));
    }

    proptest! {
        #[test]
        fn verification_is_scale_invariant(num in 1i64..20, den in 1i64..20) {
            let (inst, p, x) = ql_ud_we();
            let (market, ptilde, mut allocs) = we_to_gme(&inst, &p, &x).unwrap();
            let lambda = ratio(num, den);
            let scaled: Vec<Rational> = ptilde.iter().map(|v| v * &lambda).collect();
            prop_assert!(verify_gme(&market, &scaled, &allocs).unwrap().ok());
            allocs[0].money += ratio(1, 3);
            prop_assert_eq!(
                verify_gme(&market, &scaled, &allocs).unwrap(),
                verify_gme(&market, &ptilde, &allocs).unwrap()
            );
        }
    }
}
