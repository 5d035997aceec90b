#![no_main]

use libfuzzer_sys::fuzz_target;
use issueforge_core::augmentation::parse_ratios;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(rs) = parse_ratios(text) {
        assert!(rs.iter().all(|r| (0.0..=1.0).contains(r)));
    }
});
