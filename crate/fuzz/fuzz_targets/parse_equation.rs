#![no_main]

use libfuzzer_sys::fuzz_target;
use periodic_stein_cli::parse_equation;

fuzz_target!(|data: &[u8]| {
    // never panics; every rejection carries at least one located error
    if let Ok(text) = std::str::from_utf8(data) {
        if let Err(errors) = parse_equation(text) {
            assert!(!errors.is_empty());
        }
    }
});
