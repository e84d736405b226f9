#![no_main]

use libfuzzer_sys::fuzz_target;
use refram_cli::parse_omega;

fuzz_target!(|input: &str| {
    let _ = parse_omega(input);
});
