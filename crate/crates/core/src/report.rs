//! Serializable run reports emitted by the command-line front end.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bishop::{Attachment, FamilySummary, ProbeReport, SolveConfig, SolveDiagnostics};
use crate::conformal::{Construction, MapDiagnostics};
use crate::maslov::{BishopType, Classification, IndexReport};
use crate::surface::file::GermFile;
use crate::surface::Subharmonicity;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    /// Arguments after the program name.
    pub command: Vec<String>,
    /// SHA-256 of the input germ file, hex encoded.
    pub input_digest: Option<String>,
    pub output: Output,
    /// Wall-clock milliseconds, only when requested (reports are otherwise
    /// byte-identical across runs).
    pub timing_ms: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Output {
    Index(IndexReport),
    Classify(ClassifyReport),
    Family(FamilyReport),
    Probe(ProbeReport),
    Example(GermFile),
    Verify(VerifyReport),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifyReport {
    pub degree: u32,
    pub index: i64,
    pub classification: Classification,
    pub nondegenerate_class: Option<BishopType>,
    pub gamma: Option<f64>,
    pub subharmonicity: Subharmonicity,
    pub remainder_real: bool,
    pub verdict: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyReport {
    pub config: SolveConfig,
    pub grid: usize,
    pub construction: Construction,
    pub map: MapDiagnostics,
    pub family: FamilySummary,
    pub csv: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub r: f64,
    pub grid: usize,
    pub construction: Construction,
    pub map: MapDiagnostics,
    pub solve: SolveDiagnostics,
    pub attachment: Attachment,
    /// Relative error of `Λ_r 𝔸_r f = f` on a fixed trigonometric polynomial.
    pub round_trip_error: f64,
    pub certified: bool,
}

/// Hex SHA-256 of `bytes`.
pub fn digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maslov::index_report;
    use crate::surface::{make_bishop_quadric, PolyZZbar};

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(
            digest(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn round_trip() {
        let germ = make_bishop_quadric(0.1, PolyZZbar::zero()).unwrap();
        let rep = RunReport {
            command: vec!["index".into(), "q.json".into()],
            input_digest: Some(digest(b"{}")),
            output: Output::Index(index_report(&germ, 0.1).unwrap()),
            timing_ms: Some(1.0 / 3.0),
        };
        assert_eq!(RunReport::from_json(&rep.to_json()).unwrap(), rep);
    }
}
