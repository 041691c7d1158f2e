//! Surface germs `w = F_m(z) + R(z)` over a neighbourhood of `0 ∈ ℂ`.
//!
//! Polynomials are kept in the real-analytic basis `z^μ z̄^ν`. The leading
//! term `F_m` must be real-valued and homogeneous ([`HermitianHomPoly`]);
//! the remainder may be complex-valued but must vanish to order `m + 1`.

pub mod file;

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circle::{CircleError, CircleFunction};

/// Grid used for sign scans and singularity margins.
pub const SCAN_SAMPLES: usize = 4096;

/// Relative tolerance (times the coefficient scale) for singularity and
/// profile checks.
pub const CHECK_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SurfaceError {
    #[error("term z^{mu} z̄^{nu} has degree {} but the leading part must be homogeneous of degree {m}", mu + nu)]
    NotHomogeneous { mu: u32, nu: u32, m: u32 },
    #[error("(μ, ν) = ({mu}, {nu}): coefficient of z^{mu} z̄^{nu} is not the conjugate of the coefficient of z^{nu} z̄^{mu}; the leading part is not real-valued")]
    HermitianViolation { mu: u32, nu: u32 },
    #[error("leading degree {0} is below 2")]
    DegreeTooLow(u32),
    #[error("polynomial is identically zero")]
    ZeroPolynomial,
    #[error("remainder term z^{mu} z̄^{nu} has order {} below the required {min}", mu + nu)]
    RemainderOrder { mu: u32, nu: u32, min: u32 },
    #[error("the graph of the leading part has a non-isolated CR singularity (margin {margin:e} at θ = {theta})")]
    DegenerateSingularity { theta: f64, margin: f64 },
    #[error("γ = 1/2 is the parabolic case and is excluded")]
    ParabolicInput,
    #[error("parameter {name} = {value} outside {range}")]
    ParameterOutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("radius of validity must be positive and finite, got {0}")]
    InvalidRadius(f64),
    #[error("angular profile is not real (max imaginary part {max_imag:e})")]
    NonRealProfile { max_imag: f64 },
    #[error(transparent)]
    Circle(#[from] CircleError),
}

/// Polynomial in `z` and `z̄` with complex coefficients.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PolyZZbar {
    terms: BTreeMap<(u32, u32), Complex64>,
}

impl PolyZZbar {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Builds a polynomial, summing repeated monomials and dropping zeros.
    pub fn from_terms(terms: impl IntoIterator<Item = ((u32, u32), Complex64)>) -> Self {
        let mut p = Self::zero();
        for (k, c) in terms {
            p.add_term(k.0, k.1, c);
        }
        p
    }

    /// Single monomial `c z^μ z̄^ν`.
    pub fn monomial(mu: u32, nu: u32, c: Complex64) -> Self {
        Self::from_terms([((mu, nu), c)])
    }

    pub fn add_term(&mut self, mu: u32, nu: u32, c: Complex64) {
        let slot = self
            .terms
            .entry((mu, nu))
            .or_insert(Complex64::new(0.0, 0.0));
        *slot += c;
        if *slot == Complex64::new(0.0, 0.0) {
            self.terms.remove(&(mu, nu));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), Complex64)> + '_ {
        self.terms.iter().map(|(&k, &c)| (k, c))
    }

    pub fn coeff(&self, mu: u32, nu: u32) -> Complex64 {
        self.terms.get(&(mu, nu)).copied().unwrap_or_default()
    }

    /// Largest total degree; 0 for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|&(a, b)| a + b).max().unwrap_or(0)
    }

    /// Smallest total degree present, `None` for the zero polynomial.
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().map(|&(a, b)| a + b).min()
    }

    /// Largest coefficient modulus.
    pub fn scale(&self) -> f64 {
        self.terms.values().fold(0.0f64, |m, c| m.max(c.norm()))
    }

    /// Degree if every term has the same total degree.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let d = self.order()?;
        (self.degree() == d).then_some(d)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut p = self.clone();
        for (k, c) in other.terms() {
            p.add_term(k.0, k.1, c);
        }
        p
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale_by(Complex64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut p = Self::zero();
        for ((a, b), c) in self.terms() {
            for ((d, e), f) in other.terms() {
                p.add_term(a + d, b + e, c * f);
            }
        }
        p
    }

    pub fn scale_by(&self, s: Complex64) -> Self {
        Self::from_terms(self.terms().map(|(k, c)| (k, c * s)))
    }

    /// `Σ c_{μν} z^μ z̄^ν`.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        if self.terms.is_empty() {
            return Complex64::new(0.0, 0.0);
        }
        let d = self.degree() as usize;
        let zc = z.conj();
        let mut zp = Vec::with_capacity(d + 1);
        let mut zbp = Vec::with_capacity(d + 1);
        let (mut a, mut b) = (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
        for _ in 0..=d {
            zp.push(a);
            zbp.push(b);
            a *= z;
            b *= zc;
        }
        self.terms
            .iter()
            .map(|(&(mu, nu), &c)| c * zp[mu as usize] * zbp[nu as usize])
            .sum()
    }

    /// Pointwise composition with a boundary function.
    pub fn eval_on(&self, f: &CircleFunction) -> CircleFunction {
        f.map(|z| self.eval(z))
    }

    /// Wirtinger derivative `∂/∂z`.
    pub fn dz(&self) -> Self {
        Self::from_terms(
            self.terms()
                .filter(|&((mu, _), _)| mu > 0)
                .map(|((mu, nu), c)| ((mu - 1, nu), c * mu as f64)),
        )
    }

    /// Wirtinger derivative `∂/∂z̄`.
    pub fn dzbar(&self) -> Self {
        Self::from_terms(
            self.terms()
                .filter(|&((_, nu), _)| nu > 0)
                .map(|((mu, nu), c)| ((mu, nu - 1), c * nu as f64)),
        )
    }

    /// `∂^μ_z ∂^ν_z̄`.
    pub fn derivative(&self, mu: u32, nu: u32) -> Self {
        let mut p = self.clone();
        for _ in 0..mu {
            p = p.dz();
        }
        for _ in 0..nu {
            p = p.dzbar();
        }
        p
    }

    /// The polynomial `p̄`, i.e. `z ↦ conj(p(z))`.
    pub fn conjugate(&self) -> Self {
        Self::from_terms(self.terms().map(|((mu, nu), c)| ((nu, mu), c.conj())))
    }

    /// First monomial whose coefficient fails `c_{νμ} = conj(c_{μν})`.
    pub fn hermitian_violation(&self, rel_tol: f64) -> Option<(u32, u32)> {
        let tol = rel_tol * self.scale().max(f64::MIN_POSITIVE);
        self.terms()
            .find(|&((mu, nu), c)| (self.coeff(nu, mu) - c.conj()).norm() > tol)
            .map(|(k, _)| k)
    }

    /// Polynomial in one variable obtained by substituting `w = 1` for `z̄`:
    /// returns coefficients of `1, z, z², …`.
    pub fn substitute_zbar_one(&self) -> Vec<Complex64> {
        let deg = self.terms.keys().map(|&(mu, _)| mu).max().unwrap_or(0) as usize;
        let mut out = vec![Complex64::new(0.0, 0.0); deg + 1];
        for ((mu, _), c) in self.terms() {
            out[mu as usize] += c;
        }
        out
    }
}

/// Real-valued polynomial, homogeneous of degree `m ≥ 2` in `(z, z̄)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianHomPoly {
    m: u32,
    poly: PolyZZbar,
    dz: PolyZZbar,
}

/// Outcome of the isolated-CR-singularity test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularityCheck {
    pub isolated: bool,
    /// `min_θ (m f(θ))² + f′(θ)²` over the scan grid.
    pub margin: f64,
    /// Threshold the margin was compared against.
    pub threshold: f64,
    /// Minimizing angle, reported on failure.
    pub witness: Option<f64>,
}

/// Sign scan of the Laplacian `∂²F/∂z∂z̄`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Subharmonicity {
    EverywhereSubharmonic {
        min_laplacian_profile: f64,
        argmin: f64,
    },
    FailsAt {
        min_laplacian_profile: f64,
        argmin: f64,
        /// Grid angles where the Laplacian profile is negative.
        angles: Vec<f64>,
    },
}

impl Subharmonicity {
    pub fn is_subharmonic(&self) -> bool {
        matches!(self, Self::EverywhereSubharmonic { .. })
    }

    pub fn min_laplacian_profile(&self) -> f64 {
        match self {
            Self::EverywhereSubharmonic {
                min_laplacian_profile,
                ..
            }
            | Self::FailsAt {
                min_laplacian_profile,
                ..
            } => *min_laplacian_profile,
        }
    }
}

impl HermitianHomPoly {
    pub fn new(poly: PolyZZbar) -> Result<Self, SurfaceError> {
        let m = poly.order().ok_or(SurfaceError::ZeroPolynomial)?;
        if let Some(((mu, nu), _)) = poly.terms().find(|&((a, b), _)| a + b != m) {
            return Err(SurfaceError::NotHomogeneous { mu, nu, m });
        }
        if m < 2 {
            return Err(SurfaceError::DegreeTooLow(m));
        }
        if let Some((mu, nu)) = poly.hermitian_violation(1e-12) {
            return Err(SurfaceError::HermitianViolation { mu, nu });
        }
        let dz = poly.dz();
        Ok(Self { m, poly, dz })
    }

    /// Like [`new`](Self::new) but also insists on degree `m`.
    pub fn with_degree(m: u32, poly: PolyZZbar) -> Result<Self, SurfaceError> {
        if let Some(((mu, nu), _)) = poly.terms().find(|&((a, b), _)| a + b != m) {
            return Err(SurfaceError::NotHomogeneous { mu, nu, m });
        }
        Self::new(poly)
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    pub fn poly(&self) -> &PolyZZbar {
        &self.poly
    }

    pub fn scale(&self) -> f64 {
        self.poly.scale()
    }

    pub fn eval(&self, z: Complex64) -> f64 {
        self.poly.eval(z).re
    }

    /// `∂F/∂z` as a polynomial.
    pub fn dz(&self) -> &PolyZZbar {
        &self.dz
    }

    pub fn dzbar(&self) -> PolyZZbar {
        self.poly.dzbar()
    }

    /// `∂²F/∂z∂z̄`.
    pub fn laplacian(&self) -> PolyZZbar {
        self.poly.dz().dzbar()
    }

    /// `f(θ) = F(e^{iθ})`.
    pub fn profile(&self, theta: f64) -> f64 {
        self.eval(Complex64::from_polar(1.0, theta))
    }

    /// `f′(θ) = 2 Re(i e^{iθ} ∂F/∂z(e^{iθ}))`.
    pub fn profile_derivative(&self, theta: f64) -> f64 {
        let e = Complex64::from_polar(1.0, theta);
        2.0 * (Complex64::new(0.0, 1.0) * e * self.dz.eval(e)).re
    }

    /// Angular profile on an `n`-point grid, checked to be real.
    pub fn angular_profile(&self, n: usize) -> Result<CircleFunction, SurfaceError> {
        let f = CircleFunction::from_fn(n, |t| self.poly.eval(Complex64::from_polar(1.0, t)))?;
        f.to_real_within(1e-12).map_err(|e| match e {
            CircleError::NonRealInput { max_imag } => SurfaceError::NonRealProfile { max_imag },
            other => other.into(),
        })
    }

    /// Whether `f` and `f′` have no common zero, i.e. `∂F/∂z̄` vanishes only
    /// at the origin.
    pub fn singularity_check(&self) -> SingularityCheck {
        let m = self.m as f64;
        let prof = self
            .angular_profile(SCAN_SAMPLES)
            .expect("real-valued by construction");
        let dprof = prof.derivative();
        let scale = self.scale();
        let threshold = CHECK_TOL * scale * scale;
        let mut margin = f64::INFINITY;
        let mut argmin = 0usize;
        for (k, (f, d)) in prof.values().iter().zip(dprof.values()).enumerate() {
            let v = (m * f.re).powi(2) + d.re.powi(2);
            // Ties resolve to the earliest angle.
            if v < margin - threshold * 1e-6 {
                margin = v;
                argmin = k;
            }
        }
        let isolated = margin > threshold;
        SingularityCheck {
            isolated,
            margin,
            threshold,
            witness: (!isolated).then(|| prof.theta(argmin)),
        }
    }

    pub fn is_isolated_cr_singularity(&self) -> bool {
        self.singularity_check().isolated
    }

    /// Sign scan of the angular profile of `∂²F/∂z∂z̄`, with the minimum
    /// refined by golden-section search.
    pub fn subharmonicity_report(&self) -> Subharmonicity {
        let lap = self.laplacian();
        let lap_profile = |t: f64| lap.eval(Complex64::from_polar(1.0, t)).re;
        let n = SCAN_SAMPLES;
        let h = TAU / n as f64;
        let samples: Vec<f64> = (0..n).map(|k| lap_profile(k as f64 * h)).collect();
        let (k_min, _) = samples
            .iter()
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |(a, m), (k, &v)| if v < m { (k, v) } else { (a, m) },
            );
        let centre = k_min as f64 * h;
        let (argmin, min) = golden_min(&lap_profile, centre - h, centre + h);
        let argmin = argmin.rem_euclid(TAU);
        let tol = 1e-12 * lap.scale().max(1.0);
        if min >= -tol {
            Subharmonicity::EverywhereSubharmonic {
                min_laplacian_profile: min,
                argmin,
            }
        } else {
            let angles = samples
                .iter()
                .enumerate()
                .filter(|(_, &v)| v < 0.0)
                .map(|(k, _)| k as f64 * h)
                .collect();
            Subharmonicity::FailsAt {
                min_laplacian_profile: min,
                argmin,
                angles,
            }
        }
    }
}

/// Golden-section minimization of a unimodal function on `[a, b]`.
pub(crate) fn golden_min(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > 1e-13 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Local graph `w = F_m(z) + R(z)` valid for `|z| < radius`.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceGerm {
    leading: HermitianHomPoly,
    remainder: PolyZZbar,
    radius: f64,
}

impl SurfaceGerm {
    pub fn new(
        leading: HermitianHomPoly,
        remainder: PolyZZbar,
        radius: f64,
    ) -> Result<Self, SurfaceError> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(SurfaceError::InvalidRadius(radius));
        }
        let min = leading.degree() + 1;
        if let Some(((mu, nu), _)) = remainder.terms().find(|&((a, b), _)| a + b < min) {
            return Err(SurfaceError::RemainderOrder { mu, nu, min });
        }
        let check = leading.singularity_check();
        if !check.isolated {
            return Err(SurfaceError::DegenerateSingularity {
                theta: check.witness.unwrap_or(0.0),
                margin: check.margin,
            });
        }
        Ok(Self {
            leading,
            remainder,
            radius,
        })
    }

    pub fn leading(&self) -> &HermitianHomPoly {
        &self.leading
    }

    pub fn remainder(&self) -> &PolyZZbar {
        &self.remainder
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn degree(&self) -> u32 {
        self.leading.degree()
    }

    /// `F_m + R` as a single polynomial.
    pub fn full(&self) -> PolyZZbar {
        self.leading.poly().add(&self.remainder)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.leading.poly().eval(z) + self.remainder.eval(z)
    }

    /// Whether the remainder is real-valued.
    pub fn remainder_is_real(&self) -> bool {
        self.remainder.hermitian_violation(1e-12).is_none()
    }
}

fn real(c: f64) -> Complex64 {
    Complex64::new(c, 0.0)
}

/// `|z|² + γ(z² + z̄²)`, Bishop's normal form for order-two contact.
pub fn bishop_quadric_leading(gamma: f64) -> PolyZZbar {
    PolyZZbar::from_terms([
        ((1, 1), real(1.0)),
        ((2, 0), real(gamma)),
        ((0, 2), real(gamma)),
    ])
}

/// Germ `w = |z|² + γ(z² + z̄²) + R(z)` with `γ ≥ 0`, `γ ≠ 1/2`.
pub fn make_bishop_quadric(gamma: f64, remainder: PolyZZbar) -> Result<SurfaceGerm, SurfaceError> {
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(SurfaceError::ParameterOutOfRange {
            name: "gamma",
            value: gamma,
            range: "[0, ∞)",
        });
    }
    if (gamma - 0.5).abs() < 1e-12 {
        return Err(SurfaceError::ParabolicInput);
    }
    let leading = HermitianHomPoly::new(bishop_quadric_leading(gamma))?;
    SurfaceGerm::new(leading, remainder, 1.0)
}

/// `(C/2)(z⁴ + z̄⁴) + ε(z³z̄ + z z̄³) + |z|⁴`.
pub fn example_quartic(eps: f64, c: f64) -> PolyZZbar {
    PolyZZbar::from_terms([
        ((4, 0), real(c / 2.0)),
        ((0, 4), real(c / 2.0)),
        ((3, 1), real(eps)),
        ((1, 3), real(eps)),
        ((2, 2), real(1.0)),
    ])
}

/// Germ with the non-subharmonic quartic leading term; requires
/// `C ∈ (1/3, 2/3)`.
pub fn make_example_4_1(
    eps: f64,
    c: f64,
    remainder: PolyZZbar,
) -> Result<SurfaceGerm, SurfaceError> {
    if !(c > 1.0 / 3.0 && c < 2.0 / 3.0) {
        return Err(SurfaceError::ParameterOutOfRange {
            name: "C",
            value: c,
            range: "(1/3, 2/3)",
        });
    }
    if !eps.is_finite() {
        return Err(SurfaceError::ParameterOutOfRange {
            name: "epsilon",
            value: eps,
            range: "finite reals",
        });
    }
    let leading = HermitianHomPoly::new(example_quartic(eps, c))?;
    SurfaceGerm::new(leading, remainder, 1.0)
}

/// `|z|^m` for even `m ≥ 2`.
pub fn power_leading(m: u32) -> Result<PolyZZbar, SurfaceError> {
    if m < 2 || m % 2 == 1 {
        return Err(SurfaceError::ParameterOutOfRange {
            name: "m",
            value: m as f64,
            range: "even integers ≥ 2",
        });
    }
    Ok(PolyZZbar::monomial(m / 2, m / 2, real(1.0)))
}

pub fn make_power(m: u32, remainder: PolyZZbar) -> Result<SurfaceGerm, SurfaceError> {
    SurfaceGerm::new(HermitianHomPoly::new(power_leading(m)?)?, remainder, 1.0)
}

/// Reduces an angle to `[0, 2π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if (TAU - t).abs() < 1e-14 {
        0.0
    } else {
        t
    }
}
