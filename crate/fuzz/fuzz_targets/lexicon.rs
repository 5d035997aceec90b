#![no_main]

use libfuzzer_sys::fuzz_target;
use issueforge_core::label_norm::{IntentLexicon, LabelNormalizer};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(lex) = IntentLexicon::parse(text, "fuzz") {
        let _ = lex.validate(&LabelNormalizer::bundled());
    }
});
