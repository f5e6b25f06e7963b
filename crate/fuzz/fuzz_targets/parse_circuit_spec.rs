#![no_main]

use floquet_core::circuit::validate;
use floquet_spectra::config::{circuit_spec_to_toml, parse_circuit_spec};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(spec) = parse_circuit_spec(text) else {
        return;
    };
    let violations = validate(&spec);
    if violations.is_empty() {
        spec.gate_layout().expect("valid spec has a layout");
    }
    assert_eq!(parse_circuit_spec(&circuit_spec_to_toml(&spec)).ok(), Some(spec));
});
