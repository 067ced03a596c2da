//! The three worked-example instances shipped as JSON under `fixtures/`.
//! Built here in code so tests do not depend on the working directory.

use std::collections::BTreeMap;

use crate::model::{AuctionInstance, Bidder, Bundle, PwlCurve, UtilityFunction};
use crate::rational::int;

/// Two unit-demand quasilinear bidders over `{a, b}`:
/// bidder 1 values `(a: 2, b: 1)`, bidder 2 values `(a: 1, b: 2)`, cap 4.
pub fn ql_ud() -> AuctionInstance {
    AuctionInstance {
        items: vec!["a".into(), "b".into()],
        bidders: vec![
            Bidder {
                name: "1".into(),
                utility: UtilityFunction::UnitDemand {
                    item_values: vec![int(2), int(1)],
                },
            },
            Bidder {
                name: "2".into(),
                utility: UtilityFunction::UnitDemand {
                    item_values: vec![int(1), int(2)],
                },
            },
        ],
        price_cap: int(4),
    }
}

/// Quasilinear instance without a Walrasian equilibrium: bidder 1 wants
/// only `{a,b}` (value 3), bidder 2 values any nonempty bundle at 2.
pub fn ql_nowe() -> AuctionInstance {
    let values = |f: fn(u32) -> i64| -> BTreeMap<Bundle, _> {
        (0..4u32).map(|mask| (Bundle::from_mask(2, mask), int(f(mask)))).collect()
    };
    AuctionInstance {
        items: vec!["a".into(), "b".into()],
        bidders: vec![
            Bidder {
                name: "1".into(),
                utility: UtilityFunction::Quasilinear {
                    bundle_values: values(|mask| if mask == 3 { 3 } else { 0 }),
                },
            },
            Bidder {
                name: "2".into(),
                utility: UtilityFunction::Quasilinear {
                    bundle_values: values(|mask| if mask == 0 { 0 } else { 2 }),
                },
            },
        ],
        price_cap: int(4),
    }
}

/// One tabulated bidder with values `v(a) = v(b) = 4`, `v(ab) = 8` and a
/// convex money disutility: slope 1 up to payment 4, slope 3 after. Cap 5.
pub fn nql_2() -> AuctionInstance {
    let curve = |value: i64| {
        PwlCurve::new(vec![
            (int(0), int(value)),
            (int(4), int(value - 4)),
            (int(10), int(value - 22)),
        ])
    };
    let curves = [0i64, 4, 4, 8]
        .iter()
        .enumerate()
        .map(|(mask, &v)| (Bundle::from_mask(2, mask as u32), curve(v)))
        .collect();
    AuctionInstance {
        items: vec!["a".into(), "b".into()],
        bidders: vec![Bidder {
            name: "1".into(),
            utility: UtilityFunction::TabulatedPwl { curves },
        }],
        price_cap: int(5),
    }
}

/// One bidder, one item `g`, quasilinear value 5, cap 6.
pub fn single_item(value: i64, cap: i64) -> AuctionInstance {
    let bundle_values = [
        (Bundle::empty(1), int(0)),
        (Bundle::full(1), int(value)),
    ]
    .into_iter()
    .collect();
    AuctionInstance {
        items: vec!["g".into()],
        bidders: vec![Bidder {
            name: "1".into(),
            utility: UtilityFunction::Quasilinear { bundle_values },
        }],
        price_cap: int(cap),
    }
}
