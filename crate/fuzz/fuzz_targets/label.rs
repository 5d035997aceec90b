#![no_main]

use libfuzzer_sys::fuzz_target;
use issueforge_core::label_norm::normalize_label;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let n = normalize_label(text);
    assert_eq!(normalize_label(&n), n);
});
