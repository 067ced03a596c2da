//! Walrasian equilibria for combinatorial auctions whose bidders need not
//! be quasilinear in money, computed and certified in exact rational
//! arithmetic.

pub mod arrow_debreu;
pub mod cli;
pub mod config_lp;
pub mod demand;
pub mod equilibrium;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod lp;
pub mod model;
pub mod rational;
pub mod report;

pub use error::{Error, Result};
