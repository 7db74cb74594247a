#![no_main]

use libfuzzer_sys::fuzz_target;
use pn_atom_cli::RunConfig;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = RunConfig::from_toml_str(text) {
            // Accepted configs must survive a round trip.
            let again = RunConfig::from_toml_str(&cfg.to_toml_string()).expect("round trip");
            assert_eq!(again.sweep_points().len(), cfg.sweep_points().len());
        }
    }
});
