//! Exhaustive demand oracle: all utility-maximizing bundles at given prices.

use crate::error::Result;
use crate::model::{bundle_price, evaluate_utility, AuctionInstance, Bundle, PriceVector};
use crate::rational::Rational;

/// Every bundle maximizing `u_i(S, p(S))`, in canonical order. Ties are
/// never broken.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DemandSet {
    pub bidder: usize,
    pub prices: PriceVector,
    pub bundles: Vec<Bundle>,
    pub max_utility: Rational,
}

impl DemandSet {
    pub fn contains(&self, bundle: &Bundle) -> bool {
        self.bundles.binary_search(bundle).is_ok()
    }
}

/// `u_i(S, p(S))` for every bundle, indexed by canonical bundle index.
pub fn bundle_utilities(instance: &AuctionInstance, bidder: usize, prices: &PriceVector) -> Result<Vec<Rational>> {
    instance
        .bundles()
        .iter()
        .map(|bundle| evaluate_utility(instance, bidder, bundle, &bundle_price(bundle, prices)?))
        .collect()
}

pub fn demand_set(instance: &AuctionInstance, bidder: usize, prices: &PriceVector) -> Result<DemandSet> {
    let utilities = bundle_utilities(instance, bidder, prices)?;
    let max_utility = utilities
        .iter()
        .max()
        .cloned()
        .expect("at least the empty bundle");
    let bundles = instance
        .bundles()
        .into_iter()
        .zip(&utilities)
        .filter(|(_, u)| **u == max_utility)
        .map(|(b, _)| b)
        .collect();
    Ok(DemandSet {
        bidder,
        prices: prices.clone(),
        bundles,
        max_utility,
    })
}

pub fn max_utility(instance: &AuctionInstance, bidder: usize, prices: &PriceVector) -> Result<Rational> {
    Ok(demand_set(instance, bidder, prices)?.max_utility)
}

/// Demand sets for every bidder, in bidder order.
pub fn all_demand_sets(instance: &AuctionInstance, prices: &PriceVector) -> Result<Vec<DemandSet>> {
    (0..instance.bidder_count())
        .map(|i| demand_set(instance, i, prices))
        .collect()
}
