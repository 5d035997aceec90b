#![no_main]

use libfuzzer_sys::fuzz_target;
use issueforge_core::extraction::PatternSet;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(set) = PatternSet::parse(text) {
        let _ = set.first_match("actual behavior");
    }
});
