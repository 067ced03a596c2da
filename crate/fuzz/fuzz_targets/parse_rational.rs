#![no_main]

use libfuzzer_sys::fuzz_target;
use walras::rational::{format_rational, parse_rational, parse_rational_list};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(value) = parse_rational(text) {
        assert_eq!(parse_rational(&format_rational(&value)).unwrap(), value);
    }
    if let Ok(values) = parse_rational_list(text) {
        let joined: Vec<String> = values.iter().map(format_rational).collect();
        assert_eq!(parse_rational_list(&joined.join(",")).unwrap(), values);
    }
});
