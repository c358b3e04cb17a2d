#![no_main]

use jt_cqed::cli::parse_config;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = parse_config(text) {
            // accepted configs survive a serialize/parse cycle
            let again = toml::to_string(&cfg).expect("resolved config serializes");
            assert_eq!(parse_config(&again).expect("re-parse"), cfg);
        }
    }
});
