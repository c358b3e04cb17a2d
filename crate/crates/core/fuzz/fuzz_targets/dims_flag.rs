#![no_main]

use jt_cqed::cli::parse_dims;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_dims(text);
    }
});
