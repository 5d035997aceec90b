use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Target taxonomy shared by reviews and issues.
///
/// `Other` covers user questions only: issue trackers carry no praise or
/// complaint labels, so that is all an issue can contribute to the class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum IntentClass {
    #[serde(rename = "bug")]
    BugReport,
    #[serde(rename = "feature")]
    FeatureRequest,
    #[serde(rename = "other")]
    Other,
}

pub type IntentSet = BTreeSet<IntentClass>;

impl IntentClass {
    pub const ALL: [IntentClass; 3] = [
        IntentClass::BugReport,
        IntentClass::FeatureRequest,
        IntentClass::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            IntentClass::BugReport => "bug",
            IntentClass::FeatureRequest => "feature",
            IntentClass::Other => "other",
        }
    }
}

impl fmt::Display for IntentClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown intent class `{0}` (expected bug, feature or other)")]
pub struct UnknownIntent(pub String);

impl FromStr for IntentClass {
    type Err = UnknownIntent;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bug" | "bug_report" | "bugreport" => Ok(IntentClass::BugReport),
            "feature" | "feature_request" | "featurerequest" => Ok(IntentClass::FeatureRequest),
            "other" => Ok(IntentClass::Other),
            _ => Err(UnknownIntent(s.to_string())),
        }
    }
}
