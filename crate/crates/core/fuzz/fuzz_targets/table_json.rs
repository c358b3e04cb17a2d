#![no_main]

use jt_cqed::cli::ResultTable;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(table) = ResultTable::from_json(text) {
            assert!(table.is_rectangular());
            if table.rows.iter().flatten().all(|v| v.is_finite()) {
                assert_eq!(ResultTable::from_json(&table.to_json()).unwrap(), table);
            }
        }
    }
});
