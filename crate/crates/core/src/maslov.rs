//! Maslov-type index of the CR singularity at the origin, computed three
//! ways:
//!
//! - winding number of `∂(F_m + R)/∂z̄` around small circles;
//! - `1 − (number of zeros of the angular profile)/2`;
//! - `2M − (m − 1)`, where `M` counts roots in `𝔻` of `𝔭(z) = Q(z, 1)` and
//!   `Q(z, w)` is `∂F_m/∂z̄` with `w` substituted for `z̄`.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circle::{CircleError, CircleFunction, DEFAULT_SAMPLES};
use crate::surface::{HermitianHomPoly, PolyZZbar, SurfaceGerm, SCAN_SAMPLES};

/// Bisection tolerance for profile zeros.
pub const ZERO_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MaslovError {
    #[error("radius {r} must lie in (0, {limit})")]
    InvalidRadius { r: f64, limit: f64 },
    #[error("∂F/∂z̄ vanishes on the circle |z| = {r}: {source}")]
    CurveThroughOrigin { r: f64, source: CircleError },
    #[error("winding numbers at r, r/2, r/4 (r = {r}) disagree: {windings:?}")]
    Unstable { r: f64, windings: [i64; 3] },
    #[error(
        "the leading term has a non-isolated CR singularity (margin {margin:e} at θ = {theta})"
    )]
    DegenerateSingularity { theta: f64, margin: f64 },
    #[error("profile zero near θ = {theta} is not simple")]
    NonSimpleZero { theta: f64 },
    #[error("profile has an odd number of zeros ({0})")]
    OddZeroCount(usize),
    #[error("𝔭 has a root on the unit circle: {0}")]
    RootOnCircle(CircleError),
    #[error("polynomial is not homogeneous")]
    NotHomogeneous,
    #[error("index formulas disagree: winding {winding}, zero count {zero_count}, roots {roots}")]
    Disagreement {
        winding: i64,
        zero_count: i64,
        roots: i64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    PositiveIndex,
    NonpositiveIndex,
}

/// Bishop's labels for `m = 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BishopType {
    Elliptic,
    Hyperbolic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroCount {
    pub index: i64,
    pub zero_count: usize,
    /// Zeros of the angular profile in `[0, 2π)`.
    pub zeros: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexReport {
    pub ind_winding: i64,
    pub ind_zero_count: i64,
    pub ind_roots: i64,
    pub agree: bool,
    pub zero_count: usize,
    pub zeros: Vec<f64>,
    pub classification: Classification,
    pub nondegenerate_class: Option<BishopType>,
    /// Bishop invariant `γ = |c_20| / |c_11|` when `m = 2` and `c_11 ≠ 0`.
    pub gamma: Option<f64>,
    /// Isolated-singularity margin `min (m f)² + f′²`.
    pub margin: f64,
    pub radius: f64,
}

impl IndexReport {
    pub fn index(&self) -> i64 {
        self.ind_winding
    }
}

/// Winding number of `θ ↦ ∂(F_m + R)/∂z̄ (r e^{iθ})`, checked at `r`, `r/2`
/// and `r/4`.
pub fn index_via_winding(germ: &SurfaceGerm, r: f64) -> Result<i64, MaslovError> {
    index_via_winding_on(germ, r, DEFAULT_SAMPLES)
}

pub fn index_via_winding_on(germ: &SurfaceGerm, r: f64, grid: usize) -> Result<i64, MaslovError> {
    if !(r > 0.0 && r < germ.radius()) {
        return Err(MaslovError::InvalidRadius {
            r,
            limit: germ.radius(),
        });
    }
    let dzbar = germ.full().dzbar();
    let mut windings = [0i64; 3];
    for (slot, rr) in windings.iter_mut().zip([r, r / 2.0, r / 4.0]) {
        let curve = CircleFunction::from_fn(grid, |t| {
            dzbar.eval(num_complex::Complex64::from_polar(rr, t))
        })
        .map_err(|source| MaslovError::CurveThroughOrigin { r: rr, source })?;
        *slot = curve
            .winding_number()
            .map_err(|source| MaslovError::CurveThroughOrigin { r: rr, source })?;
    }
    if windings.iter().all(|&w| w == windings[0]) {
        Ok(windings[0])
    } else {
        Err(MaslovError::Unstable { r, windings })
    }
}

/// Zero count of the angular profile by grid scan and bisection.
pub fn index_via_zero_count(f: &HermitianHomPoly) -> Result<ZeroCount, MaslovError> {
    let check = f.singularity_check();
    if !check.isolated {
        return Err(MaslovError::DegenerateSingularity {
            theta: check.witness.unwrap_or(0.0),
            margin: check.margin,
        });
    }
    let n = SCAN_SAMPLES;
    let h = TAU / n as f64;
    let vals: Vec<f64> = (0..n).map(|k| f.profile(k as f64 * h)).collect();
    let mut zeros = Vec::new();
    for k in 0..n {
        let (a, b) = (k as f64 * h, (k + 1) as f64 * h);
        let (fa, fb) = (vals[k], vals[(k + 1) % n]);
        if (fa >= 0.0) == (fb >= 0.0) {
            continue;
        }
        let (da, db) = (f.profile_derivative(a), f.profile_derivative(b));
        if da * db <= 0.0 {
            return Err(MaslovError::NonSimpleZero { theta: a });
        }
        let (mut lo, mut hi, mut flo) = (a, b, fa);
        while hi - lo > ZERO_TOL {
            let mid = 0.5 * (lo + hi);
            let fm = f.profile(mid);
            if (fm >= 0.0) == (flo >= 0.0) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        zeros.push((0.5 * (lo + hi)).rem_euclid(TAU));
    }
    if zeros.len() % 2 == 1 {
        return Err(MaslovError::OddZeroCount(zeros.len()));
    }
    zeros.sort_by(f64::total_cmp);
    Ok(ZeroCount {
        index: 1 - (zeros.len() / 2) as i64,
        zero_count: zeros.len(),
        zeros,
    })
}

/// `2M − (m − 1)` with `M` the number of roots of `𝔭` in `𝔻`, counted by the
/// argument principle. Accepts any homogeneous polynomial, not only
/// real-valued ones.
pub fn index_via_roots(f: &PolyZZbar) -> Result<i64, MaslovError> {
    let m = f.homogeneous_degree().ok_or(MaslovError::NotHomogeneous)? as i64;
    let coeffs = f.dzbar().substitute_zbar_one();
    let curve = CircleFunction::from_fn(DEFAULT_SAMPLES, |t| {
        let z = num_complex::Complex64::from_polar(1.0, t);
        coeffs
            .iter()
            .rev()
            .fold(num_complex::Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    })
    .map_err(MaslovError::RootOnCircle)?;
    let roots_inside = curve.winding_number().map_err(MaslovError::RootOnCircle)?;
    Ok(2 * roots_inside - (m - 1))
}

/// `γ = |c_20| / |c_11|` for a degree-two leading term (infinite if
/// `c_11 = 0`).
pub fn bishop_gamma(f: &HermitianHomPoly) -> Option<f64> {
    if f.degree() != 2 {
        return None;
    }
    let a = f.poly().coeff(1, 1).re.abs();
    let b = f.poly().coeff(2, 0).norm();
    Some(if a == 0.0 { f64::INFINITY } else { b / a })
}

/// Runs all three formulas and classifies the singularity.
pub fn index_report(germ: &SurfaceGerm, r: f64) -> Result<IndexReport, MaslovError> {
    index_report_on(germ, r, DEFAULT_SAMPLES)
}

pub fn index_report_on(
    germ: &SurfaceGerm,
    r: f64,
    grid: usize,
) -> Result<IndexReport, MaslovError> {
    let leading = germ.leading();
    let ind_winding = index_via_winding_on(germ, r, grid)?;
    let zc = index_via_zero_count(leading)?;
    let ind_roots = index_via_roots(leading.poly())?;
    if ind_winding != zc.index || ind_winding != ind_roots {
        return Err(MaslovError::Disagreement {
            winding: ind_winding,
            zero_count: zc.index,
            roots: ind_roots,
        });
    }
    let gamma = bishop_gamma(leading);
    let nondegenerate_class = gamma.map(|g| {
        if g < 0.5 {
            BishopType::Elliptic
        } else {
            BishopType::Hyperbolic
        }
    });
    let gamma = gamma.filter(|g| g.is_finite());
    Ok(IndexReport {
        ind_winding,
        ind_zero_count: zc.index,
        ind_roots,
        agree: true,
        zero_count: zc.zero_count,
        zeros: zc.zeros,
        classification: if ind_winding > 0 {
            Classification::PositiveIndex
        } else {
            Classification::NonpositiveIndex
        },
        nondegenerate_class,
        gamma,
        margin: leading.singularity_check().margin,
        radius: r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{
        bishop_quadric_leading, example_quartic, make_bishop_quadric, make_example_4_1,
    };
    use num_complex::Complex64;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn winding_examples() {
        let g = make_bishop_quadric(0.0, PolyZZbar::zero()).unwrap();
        assert_eq!(index_via_winding(&g, 0.1), Ok(1));
        let g = make_bishop_quadric(1.0, PolyZZbar::zero()).unwrap();
        assert_eq!(index_via_winding(&g, 0.1), Ok(-1));
        let g = make_bishop_quadric(0.0, PolyZZbar::monomial(3, 0, c(0.05))).unwrap();
        assert_eq!(index_via_winding(&g, 0.05), Ok(1));
        assert!(matches!(
            index_via_winding(&g, 1.5),
            Err(MaslovError::InvalidRadius { .. })
        ));
    }

    #[test]
    fn winding_detects_singular_radius() {
        // ∂/∂z̄ (|z|² + (z³ + z̄³)/3) = z + z̄² winds −2 times for |z| > 1.
        let leading = HermitianHomPoly::new(PolyZZbar::monomial(1, 1, c(1.0))).unwrap();
        let remainder = PolyZZbar::from_terms([((3, 0), c(1.0 / 3.0)), ((0, 3), c(1.0 / 3.0))]);
        let germ = SurfaceGerm::new(leading, remainder, 2.0).unwrap();
        assert_eq!(index_via_winding(&germ, 0.9), Ok(1));
        assert!(matches!(
            index_via_winding(&germ, 1.9),
            Err(MaslovError::Unstable {
                windings: [-2, 1, 1],
                ..
            })
        ));
    }

    #[test]
    fn zero_count_examples() {
        let f = HermitianHomPoly::new(PolyZZbar::monomial(1, 1, c(1.0))).unwrap();
        let z = index_via_zero_count(&f).unwrap();
        assert_eq!((z.index, z.zero_count), (1, 0));

        let q = HermitianHomPoly::new(bishop_quadric_leading(1.0)).unwrap();
        let z = index_via_zero_count(&q).unwrap();
        assert_eq!((z.index, z.zero_count), (-1, 4));
        // 1 + 2 cos 2θ = 0 at θ = π/3, 2π/3, 4π/3, 5π/3.
        let pi = std::f64::consts::PI;
        for (got, want) in
            z.zeros
                .iter()
                .zip([pi / 3.0, 2.0 * pi / 3.0, 4.0 * pi / 3.0, 5.0 * pi / 3.0])
        {
            assert!((got - want).abs() < 1e-11);
        }

        let e = HermitianHomPoly::new(example_quartic(0.7, 0.5)).unwrap();
        let z = index_via_zero_count(&e).unwrap();
        assert_eq!((z.index, z.zero_count), (1, 0));
    }

    #[test]
    fn roots_examples() {
        assert_eq!(index_via_roots(&PolyZZbar::monomial(1, 1, c(1.0))), Ok(1));
        assert_eq!(index_via_roots(&bishop_quadric_leading(0.2)), Ok(1));
        assert_eq!(index_via_roots(&bishop_quadric_leading(0.8)), Ok(-1));
        // Complex-valued input is accepted: ∂/∂z̄ (z z̄² ) = 2 z z̄ → 𝔭 = 2z.
        let p = PolyZZbar::monomial(1, 2, Complex64::new(0.0, 1.0));
        assert_eq!(index_via_roots(&p), Ok(2 - 2));
    }

    #[test]
    fn report_examples() {
        let g = make_bishop_quadric(0.25, PolyZZbar::zero()).unwrap();
        let rep = index_report(&g, 0.1).unwrap();
        assert_eq!(
            (rep.ind_winding, rep.ind_zero_count, rep.ind_roots),
            (1, 1, 1)
        );
        assert_eq!(rep.nondegenerate_class, Some(BishopType::Elliptic));
        assert_eq!(rep.classification, Classification::PositiveIndex);

        let g = make_bishop_quadric(2.0, PolyZZbar::zero()).unwrap();
        let rep = index_report(&g, 0.1).unwrap();
        assert_eq!(
            (rep.ind_winding, rep.ind_zero_count, rep.ind_roots),
            (-1, -1, -1)
        );
        assert_eq!(rep.nondegenerate_class, Some(BishopType::Hyperbolic));

        let g = make_example_4_1(0.7, 0.5, PolyZZbar::zero()).unwrap();
        let rep = index_report(&g, 0.1).unwrap();
        assert_eq!(
            (rep.ind_winding, rep.ind_zero_count, rep.ind_roots),
            (1, 1, 1)
        );
        assert_eq!(rep.nondegenerate_class, None);
    }
}
