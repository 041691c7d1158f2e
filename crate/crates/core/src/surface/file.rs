//! JSON germ files.
//!
//! ```json
//! {
//!   "m": 2,
//!   "leading": [{"mu": 1, "nu": 1, "re": 1.0, "im": 0.0}],
//!   "remainder": [{"mu": 3, "nu": 0, "re": 0.05, "im": 0.0}],
//!   "radius": 1.0
//! }
//! ```
//!
//! `im` defaults to 0, `remainder` to empty and `radius` to 1.

use std::collections::BTreeSet;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{HermitianHomPoly, PolyZZbar, SurfaceError, SurfaceGerm};

#[derive(Debug, Error)]
pub enum GermFileError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed germ file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{field}: {source}")]
    Invalid {
        field: String,
        #[source]
        source: SurfaceError,
    },
    #[error("{field}: duplicate term z^{mu} z̄^{nu}")]
    Duplicate { field: String, mu: u32, nu: u32 },
    #[error("{field}: coefficient of z^{mu} z̄^{nu} is not finite")]
    NonFinite { field: String, mu: u32, nu: u32 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermRecord {
    pub mu: u32,
    pub nu: u32,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

fn default_radius() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GermFile {
    pub m: u32,
    pub leading: Vec<TermRecord>,
    #[serde(default)]
    pub remainder: Vec<TermRecord>,
    #[serde(default = "default_radius")]
    pub radius: f64,
}

fn records(p: &PolyZZbar) -> Vec<TermRecord> {
    p.terms()
        .map(|((mu, nu), c)| TermRecord {
            mu,
            nu,
            re: c.re,
            im: c.im,
        })
        .collect()
}

fn poly(field: &str, terms: &[TermRecord]) -> Result<PolyZZbar, GermFileError> {
    let mut seen = BTreeSet::new();
    let mut p = PolyZZbar::zero();
    for t in terms {
        let field = field.to_string();
        if !seen.insert((t.mu, t.nu)) {
            return Err(GermFileError::Duplicate {
                field,
                mu: t.mu,
                nu: t.nu,
            });
        }
        if !(t.re.is_finite() && t.im.is_finite()) {
            return Err(GermFileError::NonFinite {
                field,
                mu: t.mu,
                nu: t.nu,
            });
        }
        p.add_term(t.mu, t.nu, Complex64::new(t.re, t.im));
    }
    Ok(p)
}

impl GermFile {
    pub fn parse(text: &str) -> Result<Self, GermFileError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: &Path) -> Result<Self, GermFileError> {
        let text = std::fs::read_to_string(path).map_err(|source| GermFileError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn from_germ(germ: &SurfaceGerm) -> Self {
        Self {
            m: germ.degree(),
            leading: records(germ.leading().poly()),
            remainder: records(germ.remainder()),
            radius: germ.radius(),
        }
    }

    pub fn to_germ(&self) -> Result<SurfaceGerm, GermFileError> {
        let invalid = |field: &str| {
            let field = field.to_string();
            move |source| GermFileError::Invalid { field, source }
        };
        let leading = poly("leading", &self.leading)?;
        let remainder = poly("remainder", &self.remainder)?;
        let leading = HermitianHomPoly::with_degree(self.m, leading).map_err(invalid("leading"))?;
        SurfaceGerm::new(leading, remainder, self.radius).map_err(invalid("germ"))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

/// Reads and validates a germ file.
pub fn read_germ(path: &Path) -> Result<SurfaceGerm, GermFileError> {
    GermFile::read(path)?.to_germ()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{make_bishop_quadric, make_example_4_1};

    #[test]
    fn round_trip_through_json() {
        let r = PolyZZbar::monomial(5, 0, Complex64::new(0.1, 0.0));
        let germ = make_example_4_1(0.7, 0.5, r).unwrap();
        let text = GermFile::from_germ(&germ).to_json();
        let back = GermFile::parse(&text).unwrap().to_germ().unwrap();
        assert_eq!(back, germ);
    }

    #[test]
    fn defaults_apply() {
        let g = GermFile::parse(r#"{"m": 2, "leading": [{"mu": 1, "nu": 1, "re": 1}]}"#)
            .unwrap()
            .to_germ()
            .unwrap();
        assert_eq!(g, make_bishop_quadric(0.0, PolyZZbar::zero()).unwrap());
    }

    #[test]
    fn hermitian_violation_names_the_pair() {
        let text = r#"{"m": 2, "leading": [
            {"mu": 1, "nu": 1, "re": 1},
            {"mu": 2, "nu": 0, "re": 0.3},
            {"mu": 0, "nu": 2, "re": 0.2}]}"#;
        let err = GermFile::parse(text).unwrap().to_germ().unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("z^2 z̄^0") || msg.contains("z^0 z̄^2"), "{msg}");
        assert!(msg.starts_with("leading"));
    }

    #[test]
    fn degree_mismatch_and_syntax_errors() {
        let err = GermFile::parse(r#"{"m": 3, "leading": [{"mu": 1, "nu": 1, "re": 1}]}"#)
            .unwrap()
            .to_germ()
            .unwrap_err();
        assert!(matches!(
            err,
            GermFileError::Invalid {
                source: SurfaceError::NotHomogeneous { .. },
                ..
            }
        ));
        let err = GermFile::parse("{\"m\": 2,\n \"leading\": [}").unwrap_err();
        assert!(err.to_string().contains("line 2"));
        let err = GermFile::parse(r#"{"m": 2, "leading": [], "extra": 1}"#).unwrap_err();
        assert!(err.to_string().contains("extra"));
    }

    #[test]
    fn duplicates_rejected() {
        let text =
            r#"{"m": 2, "leading": [{"mu": 1, "nu": 1, "re": 1}, {"mu": 1, "nu": 1, "re": 1}]}"#;
        assert!(matches!(
            GermFile::parse(text).unwrap().to_germ(),
            Err(GermFileError::Duplicate { mu: 1, nu: 1, .. })
        ));
    }
}
