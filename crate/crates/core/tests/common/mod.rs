//! Seeded random instance generators shared by the integration suites.
#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use walras::model::{AuctionInstance, Bidder, Bundle, PwlCurve, UtilityFunction};
use walras::rational::{int, ratio, Rational};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn item_names(m: usize) -> Vec<String> {
    (0..m).map(|j| ((b'a' + j as u8) as char).to_string()).collect()
}

/// Monotone bundle values: each bundle adds a random increment on top of
/// its best proper subset.
pub fn monotone_values(rng: &mut ChaCha8Rng, m: usize, step_max: i64) -> Vec<i64> {
    let mut v = vec![0i64; 1 << m];
    for mask in 1..(1usize << m) {
        let base = (0..m)
            .filter(|j| mask & (1 << j) != 0)
            .map(|j| v[mask & !(1 << j)])
            .max()
            .unwrap_or(0);
        v[mask] = base + rng.gen_range(0..=step_max);
    }
    v
}

pub fn quasilinear_bidder(name: String, m: usize, values: &[i64]) -> Bidder {
    let bundle_values = (0..(1u32 << m))
        .map(|mask| (Bundle::from_mask(m, mask), int(values[mask as usize])))
        .collect();
    Bidder {
        name,
        utility: UtilityFunction::Quasilinear { bundle_values },
    }
}

pub fn unit_demand_bidder(name: String, values: Vec<i64>) -> Bidder {
    Bidder {
        name,
        utility: UtilityFunction::UnitDemand {
            item_values: values.into_iter().map(int).collect(),
        },
    }
}

/// `u(S, q) = v(S) - c_{|S|}(q)` with increasing piecewise-linear money
/// costs on shared breakpoints. On every segment the cost slope is
/// nonincreasing in bundle size, so a superset never loses to a subset at
/// equal payment.
pub fn pwl_bidder(rng: &mut ChaCha8Rng, name: String, m: usize, values: &[i64], horizon: &Rational) -> Bidder {
    let slopes = [ratio(1, 2), int(1), ratio(3, 2), int(2), int(3)];
    let interior = rng.gen_range(0..=3);
    let mut breaks: Vec<Rational> = (0..interior)
        .map(|_| horizon * ratio(rng.gen_range(1..16), 16))
        .collect();
    breaks.push(int(0));
    breaks.push(horizon.clone());
    breaks.sort();
    breaks.dedup();
    let segments = breaks.len() - 1;
    let mut rate: Vec<Vec<Rational>> = Vec::new();
    for k in 0..=m {
        let row: Vec<Rational> = (0..segments)
            .map(|seg| {
                let s = slopes[rng.gen_range(0..slopes.len())].clone();
                match rate.last() {
                    Some(prev) if k > 0 => s.min(prev[seg].clone()),
                    _ => s,
                }
            })
            .collect();
        rate.push(row);
    }
    let cost: Vec<Vec<Rational>> = rate
        .iter()
        .map(|row| {
            let mut acc = vec![int(0)];
            for (seg, s) in row.iter().enumerate() {
                let next = acc[seg].clone() + s * (&breaks[seg + 1] - &breaks[seg]);
                acc.push(next);
            }
            acc
        })
        .collect();
    let curves: BTreeMap<Bundle, PwlCurve> = (0..(1u32 << m))
        .map(|mask| {
            let bundle = Bundle::from_mask(m, mask);
            let points = breaks
                .iter()
                .zip(&cost[bundle.size()])
                .map(|(q, c)| (q.clone(), int(values[mask as usize]) - c))
                .collect();
            (bundle, PwlCurve::new(points))
        })
        .collect();
    Bidder {
        name,
        utility: UtilityFunction::TabulatedPwl { curves },
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Quasilinear,
    UnitDemand,
    Pwl,
}

pub const KINDS: [Kind; 3] = [Kind::Quasilinear, Kind::UnitDemand, Kind::Pwl];

/// A random instance with `m` items and `n` bidders of one kind. The cap
/// is high enough that no bidder wants any bundle at a price of `cap` per
/// item.
pub fn random_instance(rng: &mut ChaCha8Rng, kind: Kind, m: usize, n: usize) -> AuctionInstance {
    let items = item_names(m);
    let max_value = 8i64;
    let cap = match kind {
        Kind::Pwl => int(2 * max_value + 1),
        _ => int(max_value + 1),
    };
    let horizon = &cap * int(m as i64);
    let bidders = (0..n)
        .map(|i| {
            let name = (i + 1).to_string();
            match kind {
                Kind::UnitDemand => unit_demand_bidder(name, (0..m).map(|_| rng.gen_range(0..=max_value)).collect()),
                Kind::Quasilinear => {
                    let v = capped(monotone_values(rng, m, 3), max_value);
                    quasilinear_bidder(name, m, &v)
                }
                Kind::Pwl => {
                    let v = capped(monotone_values(rng, m, 3), max_value);
                    pwl_bidder(rng, name, m, &v, &horizon)
                }
            }
        })
        .collect();
    AuctionInstance {
        items,
        bidders,
        price_cap: cap,
    }
}

fn capped(values: Vec<i64>, max: i64) -> Vec<i64> {
    values.into_iter().map(|v| v.min(max)).collect()
}
