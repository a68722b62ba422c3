#![no_main]

use libfuzzer_sys::fuzz_target;
use ttef_core::psplib::{parse_sm, render_sm};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(raw) = parse_sm(text) {
        // whatever parses must survive a render/parse round trip
        let again = parse_sm(&render_sm(&raw)).expect("rendered file parses");
        assert_eq!(again, raw);
    }
});
