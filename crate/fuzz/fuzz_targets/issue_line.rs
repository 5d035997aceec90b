#![no_main]

use libfuzzer_sys::fuzz_target;
use issueforge_core::ingestion::parse_issue_line;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = parse_issue_line(text);
});
