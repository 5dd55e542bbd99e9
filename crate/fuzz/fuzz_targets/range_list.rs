#![no_main]

use libfuzzer_sys::fuzz_target;
use rnl_cli::config::{parse_list, parse_range};
use rnl_core::sweep::s_range;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = parse_list("N", text);
    if let Ok((a, b, c)) = parse_range("s_range", text) {
        if let Ok(v) = s_range(a, b, c) {
            assert!(v.len() <= 100_000);
        }
    }
});
