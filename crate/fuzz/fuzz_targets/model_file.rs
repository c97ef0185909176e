#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        // must never panic; accepted models must re-serialize stably
        if let Ok(model) = celf::model_file::parse(text) {
            let rewritten = celf::model_file::to_string(&model);
            let again = celf::model_file::parse(&rewritten).unwrap();
            assert_eq!(model, again);
        }
    }
});
