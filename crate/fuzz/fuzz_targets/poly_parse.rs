#![no_main]

use libfuzzer_sys::fuzz_target;
use refram_cli::parse::{parse_polynomial, reduce_mod};

fuzz_target!(|input: &str| {
    if let Ok(coeffs) = parse_polynomial(input, 'x') {
        assert!(!coeffs.is_empty());
        let _ = reduce_mod(&coeffs, 3);
    }
});
