//! JSON report documents written by the command-line tool. Field order is
//! declaration order, so output is byte-stable for identical inputs.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::arrow_debreu::AdMarket;
use crate::demand::DemandSet;
use crate::equilibrium::{SolveOptions, SolveOutcome, Verdict};
use crate::io::{alloc_json, bundle_json, frac_json, instance_digest, prices_json, WeightedBundle};
use crate::model::{AuctionInstance, FractionalAllocation, IntegralAllocation, PriceVector, ValidationReport};
use crate::rational::{format_rational, Rational};

pub fn tool_version() -> String {
    env!("CARGO_PKG_VERSION").to_string()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViolationEntry {
    pub condition: String,
    pub subject: String,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerdictEntry {
    pub ok: bool,
    pub violations: Vec<ViolationEntry>,
}

impl From<&Verdict> for VerdictEntry {
    fn from(v: &Verdict) -> Self {
        VerdictEntry {
            ok: v.ok(),
            violations: v
                .violations
                .iter()
                .map(|x| ViolationEntry {
                    condition: x.condition.label().into(),
                    subject: x.subject.clone(),
                    detail: x.detail.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceViolationEntry {
    pub kind: String,
    pub bidder: Option<String>,
    pub location: String,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateReport {
    pub tool_version: String,
    pub instance_digest: String,
    pub ok: bool,
    pub violations: Vec<InstanceViolationEntry>,
}

impl ValidateReport {
    pub fn new(instance: &AuctionInstance, report: &ValidationReport) -> Self {
        ValidateReport {
            tool_version: tool_version(),
            instance_digest: instance_digest(instance),
            ok: report.is_ok(),
            violations: report
                .violations
                .iter()
                .map(|v| InstanceViolationEntry {
                    kind: v.kind.label().into(),
                    bidder: v.bidder.clone(),
                    location: v.location.clone(),
                    detail: v.detail.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemandEntry {
    pub bidder: String,
    pub bundles: Vec<Vec<String>>,
    pub max_utility: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemandReport {
    pub tool_version: String,
    pub instance_digest: String,
    pub prices: IndexMap<String, String>,
    pub demand: Vec<DemandEntry>,
}

impl DemandReport {
    pub fn new(instance: &AuctionInstance, prices: &PriceVector, sets: &[DemandSet]) -> Self {
        DemandReport {
            tool_version: tool_version(),
            instance_digest: instance_digest(instance),
            prices: prices_json(instance, prices),
            demand: sets
                .iter()
                .map(|d| DemandEntry {
                    bidder: instance.bidders[d.bidder].name.clone(),
                    bundles: d.bundles.iter().map(|b| bundle_json(instance, b)).collect(),
                    max_utility: format_rational(&d.max_utility),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionsEntry {
    pub grid_k: usize,
    pub refinements: usize,
    pub eps: String,
    pub tatonnement: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveReport {
    pub tool_version: String,
    pub instance_digest: String,
    pub mode: String,
    pub options: OptionsEntry,
    pub status: String,
    pub prices: IndexMap<String, String>,
    pub gap: String,
    pub allocation: Option<IndexMap<String, Vec<String>>>,
    pub fractional: Option<IndexMap<String, Vec<WeightedBundle>>>,
    /// Check of the returned allocation, integral when present.
    pub verdict: Option<VerdictEntry>,
    pub visited: usize,
    pub zero_gap_prices: usize,
    pub conclusiveness_reason: String,
}

impl SolveReport {
    pub fn new(
        instance: &AuctionInstance,
        mode: &str,
        options: &SolveOptions,
        outcome: &SolveOutcome,
        verdict: Option<&Verdict>,
    ) -> Self {
        SolveReport {
            tool_version: tool_version(),
            instance_digest: instance_digest(instance),
            mode: mode.into(),
            options: OptionsEntry {
                grid_k: options.grid_k,
                refinements: options.refinements,
                eps: format_rational(&options.eps),
                tatonnement: options.tatonnement,
            },
            status: outcome.status.label().into(),
            prices: prices_json(instance, &outcome.prices),
            gap: format_rational(&outcome.gap),
            allocation: outcome.integral.as_ref().map(|a| alloc_json(instance, a)),
            fractional: outcome.frac.as_ref().map(|f| frac_json(instance, f)),
            verdict: verdict.map(VerdictEntry::from),
            visited: outcome.visited,
            zero_gap_prices: outcome.zero_gap_prices,
            conclusiveness_reason: outcome.conclusiveness_reason.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyReport {
    pub tool_version: String,
    pub instance_digest: String,
    pub prices: IndexMap<String, String>,
    pub allocation: Option<IndexMap<String, Vec<String>>>,
    pub fractional: Option<IndexMap<String, Vec<WeightedBundle>>>,
    pub verdict: VerdictEntry,
}

impl VerifyReport {
    pub fn new(
        instance: &AuctionInstance,
        prices: &PriceVector,
        alloc: Option<&IntegralAllocation>,
        frac: Option<&FractionalAllocation>,
        verdict: &Verdict,
    ) -> Self {
        VerifyReport {
            tool_version: tool_version(),
            instance_digest: instance_digest(instance),
            prices: prices_json(instance, prices),
            allocation: alloc.map(|a| alloc_json(instance, a)),
            fractional: frac.map(|f| frac_json(instance, f)),
            verdict: verdict.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentEndowment {
    pub agent: String,
    pub endowment: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReduceReport {
    pub tool_version: String,
    pub instance_digest: String,
    pub commodity_count: usize,
    pub agent_count: usize,
    /// Item names followed by `money`.
    pub commodities: Vec<String>,
    pub z: String,
    /// Buyers in bidder order, then the seller.
    pub endowments: Vec<AgentEndowment>,
}

impl ReduceReport {
    pub fn new(market: &AdMarket) -> Self {
        let instance = &market.instance;
        let mut commodities = instance.items.clone();
        commodities.push("money".into());
        let names = instance
            .bidders
            .iter()
            .map(|b| b.name.clone())
            .chain(std::iter::once("seller".to_string()));
        ReduceReport {
            tool_version: tool_version(),
            instance_digest: instance_digest(instance),
            commodity_count: market.commodity_count(),
            agent_count: market.agent_count(),
            commodities,
            z: format_rational(&market.z),
            endowments: names
                .zip(&market.endowments)
                .map(|(agent, e)| AgentEndowment {
                    agent,
                    endowment: e.iter().map(format_rational).collect(),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BruteEntry {
    pub prices: IndexMap<String, String>,
    pub allocation: IndexMap<String, Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BruteReport {
    pub tool_version: String,
    pub instance_digest: String,
    pub step: String,
    pub count: usize,
    pub equilibria: Vec<BruteEntry>,
}

impl BruteReport {
    pub fn new(instance: &AuctionInstance, step: &Rational, found: &[(PriceVector, IntegralAllocation)]) -> Self {
        BruteReport {
            tool_version: tool_version(),
            instance_digest: instance_digest(instance),
            step: format_rational(step),
            count: found.len(),
            equilibria: found
                .iter()
                .map(|(p, a)| BruteEntry {
                    prices: prices_json(instance, p),
                    allocation: alloc_json(instance, a),
                })
                .collect(),
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn render<T: Serialize>(report: &T) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("serializable");
    text.push('\n');
    text
}
