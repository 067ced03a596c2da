#![no_main]

use libfuzzer_sys::fuzz_target;
use walras::io::{instance_digest, load_instance, parse_instance, print_instance};
use walras::model::validate_instance;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(instance) = parse_instance(text) else {
        return;
    };
    let _ = validate_instance(&instance);
    let printed = print_instance(&instance);
    let again = parse_instance(&printed).expect("printed instance parses");
    assert_eq!(again, instance);
    assert_eq!(instance_digest(&again), instance_digest(&instance));
    if let Ok(valid) = load_instance(text) {
        assert_eq!(load_instance(&printed).expect("still valid"), valid);
    }
});
