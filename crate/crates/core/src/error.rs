use thiserror::Error;

use crate::lp::LpError;
use crate::rational::ParseRationalError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} {what}, got {actual}")]
    Dimension {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("unknown bidder index {0}")]
    UnknownBidder(usize),
    #[error("unknown bidder {0:?}")]
    UnknownBidderName(String),
    #[error("unknown item {0:?}")]
    UnknownItem(String),
    #[error("payment {payment} outside the validated horizon [0, {horizon}]")]
    PaymentOutsideHorizon { payment: String, horizon: String },
    #[error("price {price} for item {item:?} outside [0, {cap}]")]
    PriceOutOfRange {
        item: String,
        price: String,
        cap: String,
    },
    #[error("bidder {bidder:?} has no utility entry for bundle {bundle}")]
    MissingBundle { bidder: String, bundle: String },
    #[error("money price is zero: demand for money is unbounded")]
    ZeroMoneyPrice,
    #[error("input is not a Walrasian equilibrium: {0}")]
    NotAnEquilibrium(String),
    #[error("input is not a general market equilibrium: {0}")]
    NotAMarketEquilibrium(String),
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error("invalid grid step: {0}")]
    InvalidStep(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Rational(#[from] ParseRationalError),
    #[error(transparent)]
    Lp(#[from] LpError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
