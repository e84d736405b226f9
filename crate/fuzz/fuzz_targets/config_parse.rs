#![no_main]

use libfuzzer_sys::fuzz_target;
use refram_cli::{parse_config, RunConfig};

fuzz_target!(|input: &str| {
    if let Ok(entries) = parse_config(input) {
        let mut cfg = RunConfig::default();
        if cfg.apply(&entries).is_ok() {
            let _ = cfg.extension_spec();
        }
    }
});
