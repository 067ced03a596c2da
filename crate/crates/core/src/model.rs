//! Auction instances: items, bundles, utility families, prices and
//! allocations, plus structural validation.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{format_rational, Rational};

/// Hard limit on the item count; every algorithm here enumerates `2^m`
/// bundles.
pub const MAX_ITEMS: usize = 12;

/// A set of items, stored as a bitmask with item 0 in the least
/// significant bit. The derived ordering is the canonical bundle order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Bundle {
    mask: u32,
    len: u8,
}

impl Bundle {
    pub fn empty(item_count: usize) -> Self {
        debug_assert!(item_count <= MAX_ITEMS);
        Self {
            mask: 0,
            len: item_count as u8,
        }
    }

    pub fn full(item_count: usize) -> Self {
        Self::from_mask(item_count, (1u32 << item_count) - 1)
    }

    pub fn from_mask(item_count: usize, mask: u32) -> Self {
        debug_assert!(item_count <= MAX_ITEMS);
        Self {
            mask,
            len: item_count as u8,
        }
    }

    pub fn from_items<I: IntoIterator<Item = usize>>(item_count: usize, items: I) -> Self {
        let mut bundle = Self::empty(item_count);
        for item in items {
            bundle = bundle.with(item);
        }
        bundle
    }

    pub fn with(self, item: usize) -> Self {
        debug_assert!(item < self.len as usize);
        Self {
            mask: self.mask | (1 << item),
            ..self
        }
    }

    pub fn mask(&self) -> u32 {
        self.mask
    }

    /// Canonical index of the bundle, `0..2^m`.
    pub fn index(&self) -> usize {
        self.mask as usize
    }

    pub fn item_count(&self) -> usize {
        self.len as usize
    }

    pub fn size(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    pub fn contains(&self, item: usize) -> bool {
        item < 32 && self.mask & (1 << item) != 0
    }

    pub fn is_subset_of(&self, other: &Bundle) -> bool {
        self.mask & !other.mask == 0
    }

    pub fn is_disjoint(&self, other: &Bundle) -> bool {
        self.mask & other.mask == 0
    }

    pub fn union(&self, other: &Bundle) -> Bundle {
        Bundle {
            mask: self.mask | other.mask,
            len: self.len.max(other.len),
        }
    }

    /// Whether every set bit refers to an item below `item_count`.
    pub fn fits(&self, item_count: usize) -> bool {
        item_count >= 32 || self.mask >> item_count == 0
    }

    pub fn items(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len as usize).filter(move |&j| self.contains(j))
    }

    /// Renders the bundle with item names, e.g. `{a,b}` or `{}`.
    pub fn display<'a>(&'a self, names: &'a [String]) -> BundleDisplay<'a> {
        BundleDisplay {
            bundle: self,
            names,
        }
    }
}

pub struct BundleDisplay<'a> {
    bundle: &'a Bundle,
    names: &'a [String],
}

impl fmt::Display for BundleDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, item) in self.bundle.items().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            match self.names.get(item) {
                Some(name) => f.write_str(name)?,
                None => write!(f, "#{item}")?,
            }
        }
        f.write_str("}")
    }
}

/// All `2^m` bundles in canonical order (binary value, item 0 least
/// significant).
pub fn enumerate_bundles(item_count: usize) -> Vec<Bundle> {
    assert!(item_count <= MAX_ITEMS, "at most {MAX_ITEMS} items supported");
    (0..1u32 << item_count)
        .map(|mask| Bundle::from_mask(item_count, mask))
        .collect()
}

/// Utility as a function of payment for one fixed bundle: linear
/// interpolation between `(payment, utility)` breakpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PwlCurve {
    points: Vec<(Rational, Rational)>,
}

impl PwlCurve {
    /// Builds a curve without checking it; [`validate_instance`] reports
    /// any broken invariant.
    pub fn new(points: Vec<(Rational, Rational)>) -> Self {
        Self { points }
    }

    pub fn points(&self) -> &[(Rational, Rational)] {
        &self.points
    }

    /// Interpolated utility, or `None` when `payment` lies outside the
    /// curve's domain.
    pub fn evaluate(&self, payment: &Rational) -> Option<Rational> {
        let first = self.points.first()?;
        if payment < &first.0 {
            return None;
        }
        for pair in self.points.windows(2) {
            let (p0, u0) = &pair[0];
            let (p1, u1) = &pair[1];
            if payment <= p1 {
                if p1 <= p0 {
                    return Some(u0.clone());
                }
                return Some(u0 + (u1 - u0) * (payment - p0) / (p1 - p0));
            }
        }
        let last = self.points.last()?;
        (payment == &last.0).then(|| last.1.clone())
    }

    /// The linear piece containing `payment`: `(intercept, slope)` with
    /// utility = intercept + slope * payment. At a breakpoint the piece to
    /// the left is returned, except at the first breakpoint.
    pub fn piece_at(&self, payment: &Rational) -> Option<(Rational, Rational)> {
        let index = self.piece_index(payment)?;
        Some(self.piece(index))
    }

    pub(crate) fn piece_index(&self, payment: &Rational) -> Option<usize> {
        if self.points.len() < 2 || payment < &self.points[0].0 {
            return None;
        }
        (0..self.points.len() - 1).find(|&k| payment <= &self.points[k + 1].0)
    }

    pub(crate) fn piece(&self, index: usize) -> (Rational, Rational) {
        let (p0, u0) = &self.points[index];
        let (p1, u1) = &self.points[index + 1];
        let slope = (u1 - u0) / (p1 - p0);
        (u0 - &slope * p0, slope)
    }

    pub(crate) fn piece_interval(&self, index: usize) -> (Rational, Rational) {
        (self.points[index].0.clone(), self.points[index + 1].0.clone())
    }

    pub(crate) fn piece_count(&self) -> usize {
        self.points.len().saturating_sub(1)
    }
}

/// A bidder's utility `u_i(S, payment)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum UtilityFunction {
    /// `value(S) - payment`. A missing `∅` entry reads as zero.
    Quasilinear { bundle_values: BTreeMap<Bundle, Rational> },
    /// `max_{j in S} value(j) - payment`, with `value(∅) = 0`.
    UnitDemand { item_values: Vec<Rational> },
    /// One payment curve per bundle, `∅` included.
    TabulatedPwl { curves: BTreeMap<Bundle, PwlCurve> },
}

impl UtilityFunction {
    pub fn kind(&self) -> &'static str {
        match self {
            UtilityFunction::Quasilinear { .. } => "quasilinear",
            UtilityFunction::UnitDemand { .. } => "unit_demand",
            UtilityFunction::TabulatedPwl { .. } => "tabulated_pwl",
        }
    }

    pub fn is_quasilinear(&self) -> bool {
        !matches!(self, UtilityFunction::TabulatedPwl { .. })
    }

    /// Money-free value for the quasilinear families.
    fn quasilinear_value(&self, bundle: &Bundle) -> Option<Rational> {
        match self {
            UtilityFunction::Quasilinear { bundle_values } => match bundle_values.get(bundle) {
                Some(v) => Some(v.clone()),
                None if bundle.is_empty() => Some(Rational::zero()),
                None => None,
            },
            UtilityFunction::UnitDemand { item_values } => Some(
                bundle
                    .items()
                    .filter_map(|j| item_values.get(j))
                    .max()
                    .cloned()
                    .unwrap_or_else(Rational::zero),
            ),
            UtilityFunction::TabulatedPwl { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bidder {
    pub name: String,
    pub utility: UtilityFunction,
}

/// A combinatorial auction. The price cap bounds the searched price box.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuctionInstance {
    pub items: Vec<String>,
    pub bidders: Vec<Bidder>,
    pub price_cap: Rational,
}

impl AuctionInstance {
    pub fn item_count(&self) -> usize {
        self.items.len()
    }

    pub fn bidder_count(&self) -> usize {
        self.bidders.len()
    }

    /// Largest payment any bundle can cost inside the price box:
    /// `m * price_cap`.
    pub fn horizon(&self) -> Rational {
        &self.price_cap * Rational::from_integer(self.items.len().into())
    }

    pub fn item_index(&self, name: &str) -> Result<usize> {
        self.items
            .iter()
            .position(|item| item == name)
            .ok_or_else(|| Error::UnknownItem(name.to_string()))
    }

    pub fn bidder_index(&self, name: &str) -> Result<usize> {
        self.bidders
            .iter()
            .position(|b| b.name == name)
            .ok_or_else(|| Error::UnknownBidderName(name.to_string()))
    }

    pub fn bidder(&self, index: usize) -> Result<&Bidder> {
        self.bidders.get(index).ok_or(Error::UnknownBidder(index))
    }

    pub fn empty_bundle(&self) -> Bundle {
        Bundle::empty(self.item_count())
    }

    pub fn full_bundle(&self) -> Bundle {
        Bundle::full(self.item_count())
    }

    pub fn bundles(&self) -> Vec<Bundle> {
        enumerate_bundles(self.item_count())
    }

    pub fn bundle_from_names<S: AsRef<str>>(&self, names: &[S]) -> Result<Bundle> {
        let mut bundle = self.empty_bundle();
        for name in names {
            bundle = bundle.with(self.item_index(name.as_ref())?);
        }
        Ok(bundle)
    }

    pub fn bundle_names(&self, bundle: &Bundle) -> Vec<String> {
        bundle.items().map(|j| self.items[j].clone()).collect()
    }

    pub fn show_bundle(&self, bundle: &Bundle) -> String {
        bundle.display(&self.items).to_string()
    }

    pub fn is_quasilinear(&self) -> bool {
        self.bidders.iter().all(|b| b.utility.is_quasilinear())
    }

    pub fn is_unit_demand(&self) -> bool {
        self.bidders
            .iter()
            .all(|b| matches!(b.utility, UtilityFunction::UnitDemand { .. }))
    }

    /// Checks a raw price list against the item count and the cap.
    pub fn price_vector(&self, prices: Vec<Rational>) -> Result<PriceVector> {
        if prices.len() != self.item_count() {
            return Err(Error::Dimension {
                what: "prices",
                expected: self.item_count(),
                actual: prices.len(),
            });
        }
        for (item, price) in self.items.iter().zip(&prices) {
            if price.is_negative() || price > &self.price_cap {
                return Err(Error::PriceOutOfRange {
                    item: item.clone(),
                    price: format_rational(price),
                    cap: format_rational(&self.price_cap),
                });
            }
        }
        Ok(PriceVector::new(prices))
    }
}

/// Item prices, indexed like the instance's items.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PriceVector {
    prices: Vec<Rational>,
}

impl PriceVector {
    pub fn new(prices: Vec<Rational>) -> Self {
        Self { prices }
    }

    pub fn zeros(item_count: usize) -> Self {
        Self::new(vec![Rational::zero(); item_count])
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    pub fn get(&self, item: usize) -> &Rational {
        &self.prices[item]
    }

    pub fn as_slice(&self) -> &[Rational] {
        &self.prices
    }

    pub fn into_vec(self) -> Vec<Rational> {
        self.prices
    }

    pub fn total(&self) -> Rational {
        self.prices.iter().sum()
    }
}

impl fmt::Display for PriceVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (k, p) in self.prices.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            f.write_str(&format_rational(p))?;
        }
        f.write_str(")")
    }
}

/// One bundle per bidder, indexed like the instance's bidders.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntegralAllocation {
    pub bundles: Vec<Bundle>,
}

impl IntegralAllocation {
    pub fn new(bundles: Vec<Bundle>) -> Self {
        Self { bundles }
    }

    pub fn is_item_disjoint(&self) -> bool {
        let mut seen = 0u32;
        for b in &self.bundles {
            if seen & b.mask() != 0 {
                return false;
            }
            seen |= b.mask();
        }
        true
    }

    /// Number of bidders holding each item.
    pub fn item_counts(&self, item_count: usize) -> Vec<usize> {
        (0..item_count)
            .map(|j| self.bundles.iter().filter(|b| b.contains(j)).count())
            .collect()
    }
}

/// Per-bidder distributions over bundles.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct FractionalAllocation {
    pub weights: Vec<BTreeMap<Bundle, Rational>>,
}

impl FractionalAllocation {
    pub fn new(bidder_count: usize) -> Self {
        Self {
            weights: vec![BTreeMap::new(); bidder_count],
        }
    }

    pub fn add(&mut self, bidder: usize, bundle: Bundle, weight: Rational) {
        if weight.is_zero() {
            return;
        }
        let entry = self.weights[bidder].entry(bundle).or_insert_with(Rational::zero);
        *entry += weight;
        if entry.is_zero() {
            self.weights[bidder].remove(&bundle);
        }
    }

    pub fn bidder_total(&self, bidder: usize) -> Rational {
        self.weights[bidder].values().sum()
    }

    /// Total weight of bundles containing `item`, summed over bidders.
    pub fn item_mass(&self, item: usize) -> Rational {
        self.weights
            .iter()
            .flat_map(|w| w.iter())
            .filter(|(b, _)| b.contains(item))
            .map(|(_, w)| w)
            .sum()
    }

    pub fn support(&self, bidder: usize) -> impl Iterator<Item = (&Bundle, &Rational)> {
        self.weights[bidder].iter().filter(|(_, w)| w.is_positive())
    }
}

impl From<&IntegralAllocation> for FractionalAllocation {
    fn from(alloc: &IntegralAllocation) -> Self {
        let mut frac = FractionalAllocation::new(alloc.bundles.len());
        for (i, b) in alloc.bundles.iter().enumerate() {
            frac.add(i, *b, Rational::from_integer(1.into()));
        }
        frac
    }
}

/// `∑_{j∈S} p_j`.
pub fn bundle_price(bundle: &Bundle, prices: &PriceVector) -> Result<Rational> {
    if bundle.item_count() != prices.len() || !bundle.fits(prices.len()) {
        return Err(Error::Dimension {
            what: "bundle items",
            expected: prices.len(),
            actual: bundle.item_count(),
        });
    }
    Ok(bundle.items().map(|j| prices.get(j)).sum())
}

/// `u_i(S, payment)`. Payments must lie in `[0, m * price_cap]`.
pub fn evaluate_utility(
    instance: &AuctionInstance,
    bidder: usize,
    bundle: &Bundle,
    payment: &Rational,
) -> Result<Rational> {
    let horizon = instance.horizon();
    if payment.is_negative() || payment > &horizon {
        return Err(Error::PaymentOutsideHorizon {
            payment: format_rational(payment),
            horizon: format_rational(&horizon),
        });
    }
    let b = instance.bidder(bidder)?;
    let missing = || Error::MissingBundle {
        bidder: b.name.clone(),
        bundle: instance.show_bundle(bundle),
    };
    match &b.utility {
        UtilityFunction::TabulatedPwl { curves } => {
            let curve = curves.get(bundle).ok_or_else(missing)?;
            curve.evaluate(payment).ok_or_else(|| Error::PaymentOutsideHorizon {
                payment: format_rational(payment),
                horizon: curve
                    .points()
                    .last()
                    .map(|p| format_rational(&p.0))
                    .unwrap_or_default(),
            })
        }
        ql => Ok(ql.quasilinear_value(bundle).ok_or_else(missing)? - payment),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ViolationKind {
    Structure,
    Domain,
    NotStrictlyDecreasing,
    Monotonicity,
    Normalization,
}

impl ViolationKind {
    pub fn label(&self) -> &'static str {
        match self {
            ViolationKind::Structure => "structure",
            ViolationKind::Domain => "domain",
            ViolationKind::NotStrictlyDecreasing => "not strictly decreasing",
            ViolationKind::Monotonicity => "monotonicity S⊆T",
            ViolationKind::Normalization => "normalization",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceViolation {
    pub kind: ViolationKind,
    pub bidder: Option<String>,
    /// Bundle, bundle pair or curve segment the violation refers to.
    pub location: String,
    pub detail: String,
}

impl fmt::Display for InstanceViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind.label())?;
        if let Some(b) = &self.bidder {
            write!(f, " [bidder {b}]")?;
        }
        if !self.location.is_empty() {
            write!(f, " at {}", self.location)?;
        }
        write!(f, ": {}", self.detail)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<InstanceViolation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    fn push(&mut self, kind: ViolationKind, bidder: Option<&str>, location: String, detail: String) {
        self.violations.push(InstanceViolation {
            kind,
            bidder: bidder.map(str::to_string),
            location,
            detail,
        });
    }
}

/// Checks every structural invariant of the instance. Violations are
/// returned as data, never as an error.
pub fn validate_instance(instance: &AuctionInstance) -> ValidationReport {
    let mut report = ValidationReport::default();
    let m = instance.item_count();
    if m > MAX_ITEMS {
        report.push(
            ViolationKind::Structure,
            None,
            String::new(),
            format!("{m} items exceeds the supported maximum of {MAX_ITEMS}"),
        );
        return report;
    }
    if instance.bidders.is_empty() {
        report.push(ViolationKind::Structure, None, String::new(), "no bidders".into());
    }
    if !instance.price_cap.is_positive() {
        report.push(
            ViolationKind::Domain,
            None,
            "price_cap".into(),
            format!("price cap {} must be positive", format_rational(&instance.price_cap)),
        );
    }
    for (k, item) in instance.items.iter().enumerate() {
        if item.is_empty() {
            report.push(ViolationKind::Structure, None, format!("item #{k}"), "empty item name".into());
        }
        if instance.items[..k].contains(item) {
            report.push(ViolationKind::Structure, None, format!("item {item:?}"), "duplicate item name".into());
        }
    }
    for (k, bidder) in instance.bidders.iter().enumerate() {
        if instance.bidders[..k].iter().any(|b| b.name == bidder.name) {
            report.push(
                ViolationKind::Structure,
                Some(&bidder.name),
                String::new(),
                "duplicate bidder name".into(),
            );
        }
        match &bidder.utility {
            UtilityFunction::Quasilinear { bundle_values } => {
                validate_quasilinear(instance, bidder, bundle_values, &mut report)
            }
            UtilityFunction::UnitDemand { item_values } => {
                if item_values.len() != m {
                    report.push(
                        ViolationKind::Structure,
                        Some(&bidder.name),
                        String::new(),
                        format!("{} item values for {m} items", item_values.len()),
                    );
                }
                for (j, v) in item_values.iter().enumerate() {
                    if v.is_negative() {
                        report.push(
                            ViolationKind::Domain,
                            Some(&bidder.name),
                            format!("item {}", instance.items.get(j).map_or("?", |s| s.as_str())),
                            format!("negative value {}", format_rational(v)),
                        );
                    }
                }
            }
            UtilityFunction::TabulatedPwl { curves } => {
                validate_tabulated(instance, bidder, curves, &mut report)
            }
        }
    }
    report
}

fn validate_quasilinear(
    instance: &AuctionInstance,
    bidder: &Bidder,
    values: &BTreeMap<Bundle, Rational>,
    report: &mut ValidationReport,
) {
    let m = instance.item_count();
    let name = Some(bidder.name.as_str());
    for bundle in values.keys() {
        if bundle.item_count() != m || !bundle.fits(m) {
            report.push(ViolationKind::Structure, name, format!("mask {:#b}", bundle.mask()), "bundle outside item set".into());
        }
    }
    let value = |b: &Bundle| -> Option<Rational> {
        values
            .get(b)
            .cloned()
            .or_else(|| b.is_empty().then(Rational::zero))
    };
    for bundle in instance.bundles() {
        match value(&bundle) {
            None => report.push(
                ViolationKind::Structure,
                name,
                instance.show_bundle(&bundle),
                "missing bundle value".into(),
            ),
            Some(v) if v.is_negative() => report.push(
                ViolationKind::Domain,
                name,
                instance.show_bundle(&bundle),
                format!("negative value {}", format_rational(&v)),
            ),
            Some(_) => {}
        }
    }
    for small in instance.bundles() {
        for j in (0..m).filter(|&j| !small.contains(j)) {
            let large = small.with(j);
            if let (Some(vs), Some(vl)) = (value(&small), value(&large)) {
                if vl < vs {
                    report.push(
                        ViolationKind::Monotonicity,
                        name,
                        format!("{} ⊆ {}", instance.show_bundle(&small), instance.show_bundle(&large)),
                        format!("value {} < {}", format_rational(&vl), format_rational(&vs)),
                    );
                }
            }
        }
    }
}

fn validate_tabulated(
    instance: &AuctionInstance,
    bidder: &Bidder,
    curves: &BTreeMap<Bundle, PwlCurve>,
    report: &mut ValidationReport,
) {
    let m = instance.item_count();
    let horizon = instance.horizon();
    let name = Some(bidder.name.as_str());
    for bundle in curves.keys() {
        if bundle.item_count() != m || !bundle.fits(m) {
            report.push(ViolationKind::Structure, name, format!("mask {:#b}", bundle.mask()), "bundle outside item set".into());
        }
    }
    let mut well_formed = BTreeMap::new();
    for bundle in instance.bundles() {
        let label = instance.show_bundle(&bundle);
        let Some(curve) = curves.get(&bundle) else {
            report.push(ViolationKind::Structure, name, label, "missing curve".into());
            continue;
        };
        let before = report.violations.len();
        let pts = curve.points();
        if pts.len() < 2 {
            report.push(ViolationKind::Structure, name, label.clone(), "fewer than 2 breakpoints".into());
        } else {
            if !pts[0].0.is_zero() {
                report.push(
                    ViolationKind::Domain,
                    name,
                    label.clone(),
                    format!("first payment {} is not 0", format_rational(&pts[0].0)),
                );
            }
            for (k, pair) in pts.windows(2).enumerate() {
                let segment = format!("{label} segment {k}");
                if pair[1].0 <= pair[0].0 {
                    report.push(
                        ViolationKind::Domain,
                        name,
                        segment.clone(),
                        format!(
                            "payments not strictly increasing ({} then {})",
                            format_rational(&pair[0].0),
                            format_rational(&pair[1].0)
                        ),
                    );
                }
                if pair[1].1 >= pair[0].1 {
                    report.push(
                        ViolationKind::NotStrictlyDecreasing,
                        name,
                        segment,
                        format!(
                            "utility {} then {}",
                            format_rational(&pair[0].1),
                            format_rational(&pair[1].1)
                        ),
                    );
                }
            }
            let last = &pts[pts.len() - 1].0;
            if last < &horizon {
                report.push(
                    ViolationKind::Domain,
                    name,
                    label.clone(),
                    format!(
                        "last payment {} below horizon {}",
                        format_rational(last),
                        format_rational(&horizon)
                    ),
                );
            }
        }
        if report.violations.len() == before {
            well_formed.insert(bundle, curve);
        }
    }
    let empty = instance.empty_bundle();
    if let Some(curve) = well_formed.get(&empty) {
        let at_zero = &curve.points()[0].1;
        if at_zero.is_negative() {
            report.push(
                ViolationKind::Normalization,
                name,
                "{} at payment 0".into(),
                format!("utility {} is negative", format_rational(at_zero)),
            );
        }
    }
    // Dominance of S ∪ {j} over S. Differences of two PWL curves are linear
    // between the union of their breakpoints, so checking that grid suffices.
    for (small, small_curve) in &well_formed {
        for j in (0..m).filter(|&j| !small.contains(j)) {
            let large = small.with(j);
            let Some(large_curve) = well_formed.get(&large) else {
                continue;
            };
            let mut grid: Vec<Rational> = small_curve
                .points()
                .iter()
                .chain(large_curve.points())
                .map(|(p, _)| p.clone())
                .filter(|p| p <= &horizon)
                .collect();
            grid.push(horizon.clone());
            grid.sort();
            grid.dedup();
            for payment in grid {
                let (Some(us), Some(ul)) = (small_curve.evaluate(&payment), large_curve.evaluate(&payment)) else {
                    continue;
                };
                if ul < us {
                    report.push(
                        ViolationKind::Monotonicity,
                        name,
                        format!(
                            "{} ⊆ {} at payment {}",
                            instance.show_bundle(small),
                            instance.show_bundle(&large),
                            format_rational(&payment)
                        ),
                        format!("utility {} < {}", format_rational(&ul), format_rational(&us)),
                    );
                    break;
                }
            }
        }
    }
}
