#![no_main]

use libfuzzer_sys::fuzz_target;
use issueforge_core::textprep::Preprocessor;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let prep = Preprocessor::bundled();
    let stripped = prep.strip_noise(text);
    let tokens = prep.preprocess(&stripped);
    assert!(tokens.iter().all(|t| !t.chars().any(|c| c.is_ascii_digit() || c.is_uppercase())));
});
