#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        // must never panic; accepted rows must round-trip losslessly
        if let Ok(ds) = celf::dataset::parse_measurements(text) {
            let rewritten = celf::dataset::write_measurements(&ds.records).unwrap();
            if !ds.records.is_empty() {
                let again = celf::dataset::parse_measurements(&rewritten).unwrap();
                assert_eq!(again.records, ds.records);
            }
            let _ = ds.links();
        }
    }
});
