//! The fixed class vocabularies of the three challenge tasks.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Disease class, in confusion-matrix axis order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DiagnosisLabel {
    #[serde(rename = "MEL")]
    Mel,
    #[serde(rename = "NV")]
    Nv,
    #[serde(rename = "BCC")]
    Bcc,
    #[serde(rename = "AKIEC")]
    Akiec,
    #[serde(rename = "BKL")]
    Bkl,
    #[serde(rename = "DF")]
    Df,
    #[serde(rename = "VASC")]
    Vasc,
}

impl DiagnosisLabel {
    pub const COUNT: usize = 7;
    pub const ALL: [DiagnosisLabel; 7] = [
        DiagnosisLabel::Mel,
        DiagnosisLabel::Nv,
        DiagnosisLabel::Bcc,
        DiagnosisLabel::Akiec,
        DiagnosisLabel::Bkl,
        DiagnosisLabel::Df,
        DiagnosisLabel::Vasc,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn code(self) -> &'static str {
        match self {
            DiagnosisLabel::Mel => "MEL",
            DiagnosisLabel::Nv => "NV",
            DiagnosisLabel::Bcc => "BCC",
            DiagnosisLabel::Akiec => "AKIEC",
            DiagnosisLabel::Bkl => "BKL",
            DiagnosisLabel::Df => "DF",
            DiagnosisLabel::Vasc => "VASC",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            DiagnosisLabel::Mel => "Melanoma",
            DiagnosisLabel::Nv => "Melanocytic nevus",
            DiagnosisLabel::Bcc => "Basal cell carcinoma",
            DiagnosisLabel::Akiec => "Actinic keratosis / Bowen's disease (intraepithelial carcinoma)",
            DiagnosisLabel::Bkl => "Benign keratosis",
            DiagnosisLabel::Df => "Dermatofibroma",
            DiagnosisLabel::Vasc => "Vascular lesion",
        }
    }
}

impl fmt::Display for DiagnosisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for DiagnosisLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .copied()
            .find(|l| l.code().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown diagnosis label `{s}`"))
    }
}

/// Dermoscopic attribute class, in the order the attribute scores are listed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributeClass {
    Globules,
    MiliaLikeCyst,
    NegativeNetwork,
    PigmentNetwork,
    Streaks,
}

impl AttributeClass {
    pub const COUNT: usize = 5;
    pub const ALL: [AttributeClass; 5] = [
        AttributeClass::Globules,
        AttributeClass::MiliaLikeCyst,
        AttributeClass::NegativeNetwork,
        AttributeClass::PigmentNetwork,
        AttributeClass::Streaks,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Name as it appears in mask file names (`<id>_attribute_<name>.png`).
    pub fn file_name(self) -> &'static str {
        match self {
            AttributeClass::Globules => "globules",
            AttributeClass::MiliaLikeCyst => "milia_like_cyst",
            AttributeClass::NegativeNetwork => "negative_network",
            AttributeClass::PigmentNetwork => "pigment_network",
            AttributeClass::Streaks => "streaks",
        }
    }
}

impl fmt::Display for AttributeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.file_name())
    }
}

impl FromStr for AttributeClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .copied()
            .find(|c| c.file_name() == s)
            .ok_or_else(|| format!("unknown attribute class `{s}`"))
    }
}
