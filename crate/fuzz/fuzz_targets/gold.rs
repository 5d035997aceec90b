#![no_main]

use libfuzzer_sys::fuzz_target;
use issueforge_core::extraction::parse_gold;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = parse_gold(text);
});
