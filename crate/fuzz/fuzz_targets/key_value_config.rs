#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(kv) = celf::config::KeyValueFile::parse(text) {
            // typed accessors must never panic either
            let _ = kv.get_f64("alpha");
            let _ = kv.get_u64("seed");
            let _ = kv.get_usize("nodes");
            let _ = kv.get_f64_list("alpha");
            let _ = kv.reject_unknown(&["alpha", "seed", "nodes"]);
        }
    }
});
