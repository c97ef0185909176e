#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(kv) = celf::config::KeyValueFile::parse(text) {
            if let Ok(scenario) = celf::dataset::SyntheticScenario::from_key_values(&kv) {
                assert!(scenario.validate().is_ok());
            }
        }
    }
});
