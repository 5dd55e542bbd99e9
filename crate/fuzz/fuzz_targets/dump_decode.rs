#![no_main]

use libfuzzer_sys::fuzz_target;
use rnl_core::dump::{decode_field, encode_field};

fuzz_target!(|data: &[u8]| {
    if let Ok(u) = decode_field(data) {
        let bytes = encode_field(&u).expect("decoded fields re-encode");
        assert_eq!(decode_field(&bytes).expect("round trip"), u);
    }
});
