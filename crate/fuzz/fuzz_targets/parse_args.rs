#![no_main]

use libfuzzer_sys::fuzz_target;
use walras::fixtures;
use walras::io::{parse_alloc, parse_frac, parse_prices};

// Price and allocation arguments against a two-item, two-bidder instance.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let instance = fixtures::ql_ud();
    if let Ok(prices) = parse_prices(&instance, text) {
        assert_eq!(prices.len(), instance.item_count());
    }
    if let Ok(alloc) = parse_alloc(&instance, text) {
        assert_eq!(alloc.bundles.len(), instance.bidder_count());
    }
    if let Ok(frac) = parse_frac(&instance, text) {
        assert_eq!(frac.weights.len(), instance.bidder_count());
    }
});
