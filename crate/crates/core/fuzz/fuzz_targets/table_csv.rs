#![no_main]

use jt_cqed::cli::ResultTable;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(table) = ResultTable::from_csv(text) {
            assert!(table.is_rectangular());
        }
    }
});
