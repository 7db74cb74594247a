#![no_main]

use libfuzzer_sys::fuzz_target;
use pn_atom_cli::config::SweepSpec;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(spec) = text.parse::<SweepSpec>() {
            assert!(!spec.values.is_empty());
            assert!(spec.values.iter().all(|v| v.is_finite()));
        }
    }
});
