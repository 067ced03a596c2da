//! Instance files, JSON reports and the compact command-line syntaxes for
//! prices and allocations.
//!
//! Rationals are always strings (`"3"`, `"-7/2"`), so documents never hold
//! floating-point numbers.

use std::collections::{BTreeMap, BTreeSet};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{
    validate_instance, AuctionInstance, Bidder, Bundle, FractionalAllocation, IntegralAllocation, PriceVector,
    PwlCurve, UtilityFunction, MAX_ITEMS,
};
use crate::rational::{format_rational, parse_rational, parse_rational_list, Rational};

/// Curve key for the empty bundle.
pub const EMPTY_KEY: &str = "empty";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub items: Vec<String>,
    pub price_cap: String,
    pub bidders: Vec<BidderFile>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BidderFile {
    pub name: String,
    pub utility: UtilityFile,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum UtilityFile {
    Quasilinear { values: Vec<BundleValueFile> },
    UnitDemand { item_values: IndexMap<String, String> },
    /// Keys are comma-joined item names, or `"empty"`.
    TabulatedPwl { curves: IndexMap<String, Vec<(String, String)>> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleValueFile {
    pub bundle: Vec<String>,
    pub value: String,
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.')
}

fn check_names(kind: &str, names: &[&str]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for name in names {
        if !valid_name(name) {
            return Err(Error::Parse(format!(
                "{kind} name {name:?} must be nonempty and use only letters, digits, '_', '-' or '.'"
            )));
        }
        if !seen.insert(*name) {
            return Err(Error::Parse(format!("duplicate {kind} name {name:?}")));
        }
    }
    Ok(())
}

fn rational_field(what: &str, text: &str) -> Result<Rational> {
    parse_rational(text).map_err(|e| Error::Parse(format!("{what}: {e}")))
}

fn bundle_of(items: &[String], names: &[String]) -> Result<Bundle> {
    let mut bundle = Bundle::empty(items.len());
    for name in names {
        let j = items
            .iter()
            .position(|item| item == name)
            .ok_or_else(|| Error::UnknownItem(name.clone()))?;
        if bundle.contains(j) {
            return Err(Error::Parse(format!("item {name:?} repeated in a bundle")));
        }
        bundle = bundle.with(j);
    }
    Ok(bundle)
}

fn curve_key_bundle(items: &[String], key: &str) -> Result<Bundle> {
    if key == EMPTY_KEY {
        return Ok(Bundle::empty(items.len()));
    }
    let names: Vec<String> = key.split(',').map(str::to_string).collect();
    bundle_of(items, &names)
}

pub fn curve_key(instance: &AuctionInstance, bundle: &Bundle) -> String {
    if bundle.is_empty() {
        EMPTY_KEY.to_string()
    } else {
        instance.bundle_names(bundle).join(",")
    }
}

impl InstanceFile {
    pub fn into_instance(self) -> Result<AuctionInstance> {
        let items = self.items;
        if items.len() > MAX_ITEMS {
            return Err(Error::TooLarge(format!("{} items; at most {MAX_ITEMS} supported", items.len())));
        }
        check_names("item", &items.iter().map(String::as_str).collect::<Vec<_>>())?;
        if items.iter().any(|i| i == EMPTY_KEY) {
            return Err(Error::Parse(format!("{EMPTY_KEY:?} is reserved and cannot name an item")));
        }
        check_names("bidder", &self.bidders.iter().map(|b| b.name.as_str()).collect::<Vec<_>>())?;
        let price_cap = rational_field("price_cap", &self.price_cap)?;
        let mut bidders = Vec::with_capacity(self.bidders.len());
        for b in self.bidders {
            let ctx = |what: &str| format!("bidder {:?} {what}", b.name);
            let utility = match b.utility {
                UtilityFile::Quasilinear { values } => {
                    let mut bundle_values = BTreeMap::new();
                    for entry in values {
                        let bundle = bundle_of(&items, &entry.bundle)?;
                        let value = rational_field(&ctx("value"), &entry.value)?;
                        if bundle_values.insert(bundle, value).is_some() {
                            return Err(Error::Parse(ctx("lists a bundle twice")));
                        }
                    }
                    UtilityFunction::Quasilinear { bundle_values }
                }
                UtilityFile::UnitDemand { item_values } => {
                    for name in item_values.keys() {
                        if !items.contains(name) {
                            return Err(Error::UnknownItem(name.clone()));
                        }
                    }
                    let item_values = items
                        .iter()
                        .map(|item| {
                            let text = item_values
                                .get(item)
                                .ok_or_else(|| Error::Parse(ctx(&format!("has no value for item {item:?}"))))?;
                            rational_field(&ctx("item value"), text)
                        })
                        .collect::<Result<Vec<_>>>()?;
                    UtilityFunction::UnitDemand { item_values }
                }
                UtilityFile::TabulatedPwl { curves } => {
                    let mut parsed = BTreeMap::new();
                    for (key, points) in curves {
                        let bundle = curve_key_bundle(&items, &key)?;
                        let points = points
                            .iter()
                            .map(|(p, u)| Ok((rational_field(&ctx("payment"), p)?, rational_field(&ctx("utility"), u)?)))
                            .collect::<Result<Vec<_>>>()?;
                        if parsed.insert(bundle, PwlCurve::new(points)).is_some() {
                            return Err(Error::Parse(ctx(&format!("has two curves for {key:?}"))));
                        }
                    }
                    UtilityFunction::TabulatedPwl { curves: parsed }
                }
            };
            bidders.push(Bidder { name: b.name, utility });
        }
        Ok(AuctionInstance {
            items,
            bidders,
            price_cap,
        })
    }

    pub fn from_instance(instance: &AuctionInstance) -> Self {
        let bidders = instance
            .bidders
            .iter()
            .map(|b| {
                let utility = match &b.utility {
                    UtilityFunction::Quasilinear { bundle_values } => UtilityFile::Quasilinear {
                        values: bundle_values
                            .iter()
                            .map(|(bundle, v)| BundleValueFile {
                                bundle: instance.bundle_names(bundle),
                                value: format_rational(v),
                            })
                            .collect(),
                    },
                    UtilityFunction::UnitDemand { item_values } => UtilityFile::UnitDemand {
                        item_values: instance
                            .items
                            .iter()
                            .zip(item_values)
                            .map(|(item, v)| (item.clone(), format_rational(v)))
                            .collect(),
                    },
                    UtilityFunction::TabulatedPwl { curves } => UtilityFile::TabulatedPwl {
                        curves: curves
                            .iter()
                            .map(|(bundle, curve)| {
                                let points = curve
                                    .points()
                                    .iter()
                                    .map(|(p, u)| (format_rational(p), format_rational(u)))
                                    .collect();
                                (curve_key(instance, bundle), points)
                            })
                            .collect(),
                    },
                };
                BidderFile {
                    name: b.name.clone(),
                    utility,
                }
            })
            .collect();
        InstanceFile {
            items: instance.items.clone(),
            price_cap: format_rational(&instance.price_cap),
            bidders,
        }
    }
}

/// Parses an instance document without validating utility invariants.
pub fn parse_instance(text: &str) -> Result<AuctionInstance> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.into_instance()
}

/// Parses and validates; any violation becomes [`Error::InvalidInstance`].
pub fn load_instance(text: &str) -> Result<AuctionInstance> {
    let instance = parse_instance(text)?;
    let report = validate_instance(&instance);
    if !report.is_ok() {
        let lines: Vec<String> = report.violations.iter().map(ToString::to_string).collect();
        return Err(Error::InvalidInstance(lines.join("; ")));
    }
    Ok(instance)
}

pub fn print_instance(instance: &AuctionInstance) -> String {
    let mut text = serde_json::to_string_pretty(&InstanceFile::from_instance(instance)).expect("serializable");
    text.push('\n');
    text
}

/// Compact canonical serialization: the bytes hashed by [`instance_digest`].
pub fn canonical_instance(instance: &AuctionInstance) -> String {
    serde_json::to_string(&InstanceFile::from_instance(instance)).expect("serializable")
}

/// Hex SHA-256 of the canonical serialization.
pub fn instance_digest(instance: &AuctionInstance) -> String {
    hex::encode(Sha256::digest(canonical_instance(instance).as_bytes()))
}

/// `"1,3/2"`: one rational per item, checked against the price cap.
pub fn parse_prices(instance: &AuctionInstance, text: &str) -> Result<PriceVector> {
    instance.price_vector(parse_rational_list(text)?)
}

fn parse_bundle_arg(instance: &AuctionInstance, text: &str) -> Result<Bundle> {
    if text.is_empty() || text == "-" {
        return Ok(instance.empty_bundle());
    }
    let names: Vec<String> = text.split('+').map(str::to_string).collect();
    bundle_of(&instance.items, &names)
}

fn split_entries(text: &str) -> impl Iterator<Item = &str> {
    text.split(',').filter(|s| !s.is_empty())
}

fn split_bidder<'a>(instance: &AuctionInstance, entry: &'a str) -> Result<(usize, &'a str)> {
    let (name, rest) = entry
        .split_once(':')
        .ok_or_else(|| Error::Parse(format!("expected bidder:bundle, got {entry:?}")))?;
    let bidder = instance
        .bidders
        .iter()
        .position(|b| b.name == name)
        .ok_or_else(|| Error::UnknownBidderName(name.to_string()))?;
    Ok((bidder, rest))
}

/// `"1:a+b,2:b"`. Bidders left out receive nothing; `"1:-"` or `"1:"`
/// spells the empty bundle.
pub fn parse_alloc(instance: &AuctionInstance, text: &str) -> Result<IntegralAllocation> {
    let mut bundles = vec![None; instance.bidder_count()];
    for entry in split_entries(text) {
        let (bidder, bundle_arg) = split_bidder(instance, entry)?;
        if bundles[bidder].is_some() {
            return Err(Error::Parse(format!(
                "bidder {:?} listed twice",
                instance.bidders[bidder].name
            )));
        }
        bundles[bidder] = Some(parse_bundle_arg(instance, bundle_arg)?);
    }
    Ok(IntegralAllocation::new(
        bundles
            .into_iter()
            .map(|b| b.unwrap_or_else(|| instance.empty_bundle()))
            .collect(),
    ))
}

/// `"1:a+b@1/2,1:@1/2,2:a@1"`: weighted bundles per bidder.
pub fn parse_frac(instance: &AuctionInstance, text: &str) -> Result<FractionalAllocation> {
    let mut frac = FractionalAllocation::new(instance.bidder_count());
    let mut seen = BTreeSet::new();
    for entry in split_entries(text) {
        let (bidder, rest) = split_bidder(instance, entry)?;
        let (bundle_arg, weight) = rest
            .split_once('@')
            .ok_or_else(|| Error::Parse(format!("expected bundle@weight, got {rest:?}")))?;
        let bundle = parse_bundle_arg(instance, bundle_arg)?;
        let weight = parse_rational(weight)?;
        if !seen.insert((bidder, bundle)) {
            return Err(Error::Parse(format!("{entry:?} repeats a bidder and bundle")));
        }
        frac.weights[bidder].insert(bundle, weight);
    }
    Ok(frac)
}

/// Item names in instance order.
pub fn bundle_json(instance: &AuctionInstance, bundle: &Bundle) -> Vec<String> {
    instance.bundle_names(bundle)
}

pub fn prices_json(instance: &AuctionInstance, prices: &PriceVector) -> IndexMap<String, String> {
    instance
        .items
        .iter()
        .zip(prices.as_slice())
        .map(|(item, p)| (item.clone(), format_rational(p)))
        .collect()
}

pub fn alloc_json(instance: &AuctionInstance, alloc: &IntegralAllocation) -> IndexMap<String, Vec<String>> {
    instance
        .bidders
        .iter()
        .zip(&alloc.bundles)
        .map(|(b, bundle)| (b.name.clone(), bundle_json(instance, bundle)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedBundle {
    pub bundle: Vec<String>,
    pub weight: String,
}

pub fn frac_json(instance: &AuctionInstance, frac: &FractionalAllocation) -> IndexMap<String, Vec<WeightedBundle>> {
    instance
        .bidders
        .iter()
        .zip(&frac.weights)
        .map(|(b, weights)| {
            let entries = weights
                .iter()
                .map(|(bundle, w)| WeightedBundle {
                    bundle: bundle_json(instance, bundle),
                    weight: format_rational(w),
                })
                .collect();
            (b.name.clone(), entries)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rational::{int, ratio};
    use proptest::prelude::*;

    const QL_UD: &str = r#"{
        "items": ["a", "b"],
        "price_cap": "4",
        "bidders": [
            {"name": "1", "utility": {"kind": "unit_demand", "item_values": {"a": "2", "b": "1"}}},
            {"name": "2", "utility": {"kind": "unit_demand", "item_values": {"b": "2", "a": "1"}}}
        ]
    }"#;

    #[test]
    fn parses_unit_demand_fixture() {
        assert_eq!(load_instance(QL_UD).unwrap(), fixtures::ql_ud());
    }

    #[test]
    fn fixtures_round_trip() {
        for inst in [fixtures::ql_ud(), fixtures::ql_nowe(), fixtures::nql_2(), fixtures::single_item(5, 6)] {
            let text = print_instance(&inst);
            assert_eq!(parse_instance(&text).unwrap(), inst);
            assert!(!text.contains('.'));
            assert_eq!(instance_digest(&inst), instance_digest(&parse_instance(&text).unwrap()));
        }
        assert_ne!(instance_digest(&fixtures::ql_ud()), instance_digest(&fixtures::ql_nowe()));
    }

    #[test]
    fn shipped_fixture_files_match() {
        let files = [
            (include_str!("../fixtures/ql_ud.json"), fixtures::ql_ud()),
            (include_str!("../fixtures/ql_nowe.json"), fixtures::ql_nowe()),
            (include_str!("../fixtures/nql_2.json"), fixtures::nql_2()),
        ];
        for (text, expected) in files {
            assert_eq!(load_instance(text).unwrap(), expected);
        }
    }

    #[test]
    fn curve_keys() {
        let text = print_instance(&fixtures::nql_2());
        assert!(text.contains("\"empty\""));
        assert!(text.contains("\"a,b\""));
    }

    #[test]
    fn rejects_bad_documents() {
        let unknown_key = QL_UD.replace("\"price_cap\"", "\"cap\"");
        assert!(matches!(parse_instance(&unknown_key), Err(Error::Parse(_))));
        let extra = QL_UD.replace("\"kind\": \"unit_demand\",", "\"kind\": \"unit_demand\", \"x\": 1,");
        assert!(parse_instance(&extra).is_err());
        let zero_den = QL_UD.replace("\"4\"", "\"1/0\"");
        assert!(matches!(parse_instance(&zero_den), Err(Error::Parse(_))));
        let bad_item = QL_UD.replace("{\"a\": \"2\", \"b\": \"1\"}", "{\"a\": \"2\", \"c\": \"1\"}");
        assert!(matches!(parse_instance(&bad_item), Err(Error::UnknownItem(_))));
        let missing = QL_UD.replace("{\"a\": \"2\", \"b\": \"1\"}", "{\"a\": \"2\"}");
        assert!(parse_instance(&missing).is_err());
        let dup_bidder = QL_UD.replace("\"name\": \"2\"", "\"name\": \"1\"");
        assert!(parse_instance(&dup_bidder).is_err());
        let bad_name = QL_UD.replace("[\"a\", \"b\"]", "[\"a b\", \"b\"]");
        assert!(parse_instance(&bad_name).is_err());
        let reserved = QL_UD.replace("[\"a\", \"b\"]", "[\"empty\", \"b\"]");
        assert!(parse_instance(&reserved).is_err());
        let negative_cap = QL_UD.replace("\"4\"", "\"-4\"");
        assert!(matches!(load_instance(&negative_cap), Err(Error::InvalidInstance(_))));
    }

    #[test]
    fn price_and_allocation_syntax() {
        let inst = fixtures::ql_ud();
        assert_eq!(parse_prices(&inst, "1,3/2").unwrap().into_vec(), vec![int(1), ratio(3, 2)]);
        assert!(parse_prices(&inst, "1").is_err());
        assert!(parse_prices(&inst, "5,1").is_err());
        assert!(parse_prices(&inst, "1.5,1").is_err());

        let alloc = parse_alloc(&inst, "1:a,2:b").unwrap();
        assert_eq!(alloc.bundles, vec![Bundle::from_items(2, [0]), Bundle::from_items(2, [1])]);
        let alloc = parse_alloc(&inst, "2:a+b,1:-").unwrap();
        assert_eq!(alloc.bundles, vec![Bundle::empty(2), Bundle::full(2)]);
        assert_eq!(parse_alloc(&inst, "").unwrap().bundles, vec![Bundle::empty(2); 2]);
        assert!(parse_alloc(&inst, "1:a,1:b").is_err());
        assert!(parse_alloc(&inst, "3:a").is_err());
        assert!(parse_alloc(&inst, "1:a+a").is_err());
        assert!(parse_alloc(&inst, "1a").is_err());

        let frac = parse_frac(&inst, "1:a+b@1/2,1:@1/2,2:b@1").unwrap();
        assert_eq!(frac.bidder_total(0), int(1));
        assert_eq!(frac.weights[0].get(&Bundle::empty(2)), Some(&ratio(1, 2)));
        assert!(parse_frac(&inst, "1:a").is_err());
        assert!(parse_frac(&inst, "1:a@1,1:a@1").is_err());
        assert!(parse_frac(&inst, "1:a@x").is_err());
    }

    #[test]
    fn report_helpers() {
        let inst = fixtures::ql_ud();
        let p = PriceVector::new(vec![int(1), ratio(1, 2)]);
        let json = serde_json::to_string(&prices_json(&inst, &p)).unwrap();
        assert_eq!(json, r#"{"a":"1","b":"1/2"}"#);
        let alloc = IntegralAllocation::new(vec![Bundle::full(2), Bundle::empty(2)]);
        let json = serde_json::to_string(&alloc_json(&inst, &alloc)).unwrap();
        assert_eq!(json, r#"{"1":["a","b"],"2":[]}"#);
    }

    fn arb_rational() -> impl Strategy<Value = Rational> {
        (-50i64..50, 1i64..7).prop_map(|(n, d)| ratio(n, d))
    }

    fn arb_instance() -> impl Strategy<Value = AuctionInstance> {
        (1usize..4, 1usize..4).prop_flat_map(|(m, n)| {
            let bidder = prop_oneof![
                proptest::collection::vec(arb_rational(), m)
                    .prop_map(|item_values| UtilityFunction::UnitDemand { item_values }),
                proptest::collection::vec(arb_rational(), 1 << m).prop_map(move |vals| {
                    UtilityFunction::Quasilinear {
                        bundle_values: vals
                            .into_iter()
                            .enumerate()
                            .map(|(k, v)| (Bundle::from_mask(m, k as u32), v))
                            .collect(),
                    }
                }),
                proptest::collection::vec(proptest::collection::vec((arb_rational(), arb_rational()), 1..4), 1 << m)
                    .prop_map(move |curves| {
                        UtilityFunction::TabulatedPwl {
                            curves: curves
                                .into_iter()
                                .enumerate()
                                .map(|(k, pts)| (Bundle::from_mask(m, k as u32), PwlCurve::new(pts)))
                                .collect(),
                        }
                    }),
            ];
            (proptest::collection::vec(bidder, n), arb_rational()).prop_map(move |(utilities, cap)| AuctionInstance {
                items: (0..m).map(|j| format!("i{j}")).collect(),
                bidders: utilities
                    .into_iter()
                    .enumerate()
                    .map(|(i, utility)| Bidder {
                        name: format!("b{i}"),
                        utility,
                    })
                    .collect(),
                price_cap: cap,
            })
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(inst in arb_instance()) {
            let text = print_instance(&inst);
            prop_assert_eq!(parse_instance(&text).unwrap(), inst.clone());
            prop_assert_eq!(canonical_instance(&parse_instance(&text).unwrap()), canonical_instance(&inst));
        }
    }
}
