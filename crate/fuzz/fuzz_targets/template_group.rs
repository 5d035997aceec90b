#![no_main]

use libfuzzer_sys::fuzz_target;
use issueforge_core::extraction::group_template;
use issueforge_core::ingestion::{TemplateFile, TemplateFormat};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    for path in [".github/ISSUE_TEMPLATE/bug.md", ".github/ISSUE_TEMPLATE/form.yml"] {
        let t = TemplateFile {
            repo_id: "o/r".into(),
            path: path.into(),
            format: TemplateFormat::from_path(path).unwrap(),
            raw_text: text.to_string(),
        };
        let _ = group_template(&t);
    }
});
