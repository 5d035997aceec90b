#![no_main]

use libfuzzer_sys::fuzz_target;
use issueforge_core::extraction::split_with_preamble;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let (_, sections) = split_with_preamble(text);
    for s in sections {
        assert_eq!(s.content, s.content.trim());
    }
});
