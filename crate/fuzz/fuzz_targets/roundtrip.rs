#![no_main]

use libfuzzer_sys::fuzz_target;
use periodic_stein_cli::{emit, parse_equation};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(doc) = parse_equation(text) else { return };
    let once = emit(&doc);
    let again = parse_equation(&once).expect("emitted document must parse");
    assert_eq!(doc, again, "roundtrip changed the document");
    assert_eq!(once, emit(&again));
});
