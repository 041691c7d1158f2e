//! Functions on the unit circle, stored as uniform samples.
//!
//! A [`CircleFunction`] holds `n` complex samples at `θ_k = 2πk/n`. All
//! nonlinear work (products, composition with polynomials) happens pointwise
//! on the samples; linear operators that are Fourier multipliers (conjugation,
//! analytic completion, differentiation) go through the FFT.
//!
//! Fourier conventions: `ĉ(k) = (1/n) Σ_j f(θ_j) e^{-ikθ_j}` for
//! `|k| < n/2`. The Nyquist mode is kept in the samples but is treated as
//! unresolved: multipliers that are odd in `k` zero it.

use std::cell::RefCell;
use std::f64::consts::{PI, TAU};
use std::fmt;

use num_complex::Complex64;
use rustfft::FftPlanner;
use thiserror::Error;

/// Smallest grid accepted by [`CircleFunction`].
pub const MIN_SAMPLES: usize = 64;

/// Default grid size used by the higher-level modules.
pub const DEFAULT_SAMPLES: usize = 1024;

/// Relative tolerance for the realness flag.
const REAL_TOL: f64 = 1e-12;

/// Number of subgrid points used for the Hölder seminorm estimate.
const HOLDER_SUBGRID: usize = 256;

/// Grid doublings tried before a winding number is declared unresolved.
const MAX_WINDING_DOUBLINGS: u32 = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircleError {
    #[error("grid size {0} must be a power of two no smaller than {MIN_SAMPLES}")]
    InvalidGrid(usize),
    #[error("sample {index} is not finite")]
    NonFinite { index: usize },
    #[error("input is not real-valued (max imaginary part {max_imag:e})")]
    NonRealInput { max_imag: f64 },
    #[error("curve passes through the origin (|γ| = {min_modulus:e} at θ = {theta})")]
    CurveThroughOrigin { min_modulus: f64, theta: f64 },
    #[error("winding number unresolved after {doublings} grid doublings")]
    UnresolvedWinding { doublings: u32 },
    #[error("negative-mode energy fraction {fraction:e} exceeds {limit:e}; not holomorphic boundary data")]
    NotAnalytic { fraction: f64, limit: f64 },
    #[error("point {0} lies outside the closed unit disc")]
    OutsideDisc(Complex64),
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_in_place(buf: &mut [Complex64], inverse: bool) {
    let plan = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(buf.len())
        } else {
            p.plan_fft_forward(buf.len())
        }
    });
    plan.process(buf);
}

/// Signed frequency of FFT slot `j` on an `n`-point grid. The Nyquist slot
/// maps to `n/2`.
#[inline]
pub fn frequency(j: usize, n: usize) -> i64 {
    if j <= n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

fn check_grid(n: usize) -> Result<(), CircleError> {
    if n >= MIN_SAMPLES && n.is_power_of_two() {
        Ok(())
    } else {
        Err(CircleError::InvalidGrid(n))
    }
}

/// Periodic distance between two angles, in `[0, π]`.
#[inline]
pub fn angle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Uniformly sampled function on the unit circle.
#[derive(Clone, PartialEq)]
pub struct CircleFunction {
    values: Vec<Complex64>,
    real: bool,
}

impl fmt::Debug for CircleFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CircleFunction")
            .field("n_samples", &self.values.len())
            .field("real", &self.real)
            .field("sup", &self.sup_norm())
            .finish()
    }
}

impl CircleFunction {
    /// Complex samples at `θ_k = 2πk/n`.
    pub fn new(values: Vec<Complex64>) -> Result<Self, CircleError> {
        check_grid(values.len())?;
        if let Some(index) = values
            .iter()
            .position(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(CircleError::NonFinite { index });
        }
        Ok(Self {
            values,
            real: false,
        })
    }

    pub fn from_real(values: Vec<f64>) -> Result<Self, CircleError> {
        let values: Vec<Complex64> = values.into_iter().map(|v| Complex64::new(v, 0.0)).collect();
        let mut f = Self::new(values)?;
        f.real = true;
        Ok(f)
    }

    pub fn from_fn(n: usize, f: impl Fn(f64) -> Complex64) -> Result<Self, CircleError> {
        check_grid(n)?;
        Self::new((0..n).map(|k| f(TAU * k as f64 / n as f64)).collect())
    }

    pub fn from_real_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self, CircleError> {
        check_grid(n)?;
        Self::from_real((0..n).map(|k| f(TAU * k as f64 / n as f64)).collect())
    }

    /// Trigonometric polynomial `Σ c_k e^{ikθ}` sampled on `n` points.
    /// Frequencies must satisfy `|k| < n/2`.
    pub fn from_modes(n: usize, modes: &[(i64, Complex64)]) -> Result<Self, CircleError> {
        check_grid(n)?;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
        for &(k, c) in modes {
            assert!(
                k.unsigned_abs() < (n / 2) as u64,
                "mode {k} not representable on {n} points"
            );
            coeffs[k.rem_euclid(n as i64) as usize] += c;
        }
        Ok(FourierCoeffs { data: coeffs }.synthesize())
    }

    /// The constant function.
    pub fn constant(n: usize, c: Complex64) -> Result<Self, CircleError> {
        check_grid(n)?;
        let mut f = Self::new(vec![c; n])?;
        f.real = c.im == 0.0;
        Ok(f)
    }

    /// `e^{ikθ}` on `n` points.
    pub fn exp_mode(n: usize, k: i64) -> Result<Self, CircleError> {
        Self::from_fn(n, |t| Complex64::from_polar(1.0, k as f64 * t))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Grid angle of sample `k`.
    pub fn theta(&self, k: usize) -> f64 {
        TAU * k as f64 / self.len() as f64
    }

    pub fn thetas(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|k| self.theta(k))
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    /// Largest imaginary part relative to `1 + max modulus`.
    pub fn imaginary_defect(&self) -> f64 {
        let max_mod = self.sup_norm();
        let max_im = self.values.iter().fold(0.0f64, |m, v| m.max(v.im.abs()));
        max_im / (1.0 + max_mod)
    }

    /// Real-valued copy, provided the samples are real within tolerance.
    pub fn to_real(&self) -> Result<Self, CircleError> {
        if self.real {
            return Ok(self.clone());
        }
        self.to_real_within(REAL_TOL)
    }

    /// Like [`to_real`](Self::to_real) with a caller-chosen relative tolerance.
    pub fn to_real_within(&self, tol: f64) -> Result<Self, CircleError> {
        if self.imaginary_defect() >= tol {
            let max_imag = self.values.iter().fold(0.0f64, |m, v| m.max(v.im.abs()));
            return Err(CircleError::NonRealInput { max_imag });
        }
        Ok(self.real_part())
    }

    fn require_real(&self) -> Result<(), CircleError> {
        if self.real || self.imaginary_defect() < REAL_TOL {
            Ok(())
        } else {
            let max_imag = self.values.iter().fold(0.0f64, |m, v| m.max(v.im.abs()));
            Err(CircleError::NonRealInput { max_imag })
        }
    }

    pub fn real_part(&self) -> Self {
        Self {
            values: self
                .values
                .iter()
                .map(|v| Complex64::new(v.re, 0.0))
                .collect(),
            real: true,
        }
    }

    pub fn imag_part(&self) -> Self {
        Self {
            values: self
                .values
                .iter()
                .map(|v| Complex64::new(v.im, 0.0))
                .collect(),
            real: true,
        }
    }

    /// Real parts of the samples.
    pub fn re(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn conj(&self) -> Self {
        Self {
            values: self.values.iter().map(|v| v.conj()).collect(),
            real: self.real,
        }
    }

    /// Pointwise map. The result is flagged complex.
    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            values: self.values.iter().map(|&v| f(v)).collect(),
            real: false,
        }
    }

    /// Pointwise map of a real function; the result is flagged real.
    pub fn map_real(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            values: self
                .values
                .iter()
                .map(|v| Complex64::new(f(v.re), 0.0))
                .collect(),
            real: true,
        }
    }

    /// Pointwise map that also receives the grid angle.
    pub fn map_with_theta(&self, f: impl Fn(f64, Complex64) -> Complex64) -> Self {
        let n = self.len() as f64;
        Self {
            values: self
                .values
                .iter()
                .enumerate()
                .map(|(k, &v)| f(TAU * k as f64 / n, v))
                .collect(),
            real: false,
        }
    }

    fn zip_with(
        &self,
        other: &Self,
        f: impl Fn(Complex64, Complex64) -> Complex64,
        real: bool,
    ) -> Self {
        assert_eq!(
            self.len(),
            other.len(),
            "circle functions on different grids"
        );
        Self {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            real,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b, self.real && other.real)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b, self.real && other.real)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a * b, self.real && other.real)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            values: self.values.iter().map(|&v| v * c).collect(),
            real: self.real && c.im == 0.0,
        }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(Complex64::new(c, 0.0))
    }

    pub fn add_constant(&self, c: Complex64) -> Self {
        Self {
            values: self.values.iter().map(|&v| v + c).collect(),
            real: self.real && c.im == 0.0,
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.norm()))
    }

    /// Sup norm of the difference with `other`.
    pub fn sup_distance(&self, other: &Self) -> f64 {
        assert_eq!(
            self.len(),
            other.len(),
            "circle functions on different grids"
        );
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()))
    }

    pub fn min_modulus(&self) -> (f64, usize) {
        self.values
            .iter()
            .enumerate()
            .fold((f64::INFINITY, 0), |(m, at), (k, v)| {
                let a = v.norm();
                if a < m {
                    (a, k)
                } else {
                    (m, at)
                }
            })
    }

    pub fn mean(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() / self.len() as f64
    }

    pub fn coeffs(&self) -> FourierCoeffs {
        let mut data = self.values.clone();
        fft_in_place(&mut data, false);
        let scale = 1.0 / self.len() as f64;
        data.iter_mut().for_each(|c| *c *= scale);
        FourierCoeffs { data }
    }

    /// Fourier coefficient `ĉ(k)`.
    pub fn mode(&self, k: i64) -> Complex64 {
        self.coeffs().get(k)
    }

    /// Share of the spectral energy carried by negative frequencies (the
    /// Nyquist slot counts as negative).
    pub fn negative_mode_energy(&self) -> f64 {
        self.coeffs().negative_energy_fraction()
    }

    /// Applies a Fourier multiplier `k ↦ m(k)`; the Nyquist slot receives
    /// `m(n/2)`.
    pub fn apply_multiplier(&self, m: impl Fn(i64) -> Complex64) -> Self {
        let n = self.len();
        let mut c = self.coeffs();
        for (j, v) in c.data.iter_mut().enumerate() {
            *v *= m(frequency(j, n));
        }
        c.synthesize()
    }

    /// Conjugation operator: multiplier `-i·sgn(k)`, mean zero.
    pub fn hilbert(&self) -> Result<Self, CircleError> {
        self.require_real()?;
        let n = self.len() as i64;
        let out = self.apply_multiplier(|k| {
            if k == 0 || k == n / 2 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, -(k.signum() as f64))
            }
        });
        Ok(out.real_part())
    }

    /// Analytic completion `ψ + i𝔥[ψ]`: keeps mode 0, doubles positive
    /// modes, removes negative ones.
    pub fn analytic_completion(&self) -> Result<Self, CircleError> {
        let conj = self.hilbert()?;
        let i = Complex64::new(0.0, 1.0);
        Ok(self.zip_with(&conj, |a, h| Complex64::new(a.re, 0.0) + i * h.re, false))
    }

    /// Spectral derivative `d/dθ`.
    pub fn derivative(&self) -> Self {
        let n = self.len() as i64;
        let out = self.apply_multiplier(|k| {
            if k == n / 2 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, k as f64)
            }
        });
        if self.real {
            out.real_part()
        } else {
            out
        }
    }

    /// Spectral interpolation onto an `n`-point grid (zero-padding or
    /// truncation in Fourier space).
    pub fn resample(&self, n: usize) -> Result<Self, CircleError> {
        check_grid(n)?;
        let old = self.len();
        if n == old {
            return Ok(self.clone());
        }
        let c = self.coeffs();
        let mut data = vec![Complex64::new(0.0, 0.0); n];
        let keep = (old.min(n) / 2) as i64;
        for k in (1 - keep)..keep {
            data[k.rem_euclid(n as i64) as usize] = c.get(k);
        }
        let mut out = FourierCoeffs { data }.synthesize();
        if self.real {
            out = out.real_part();
        }
        Ok(out)
    }

    /// Trigonometric interpolant at an arbitrary angle.
    pub fn eval_at(&self, theta: f64) -> Complex64 {
        self.coeffs().eval(theta)
    }

    /// Winding number about the origin with the default zero tolerance
    /// `1e-9 · max|γ|`.
    pub fn winding_number(&self) -> Result<i64, CircleError> {
        self.winding_number_with_tol(1e-9)
    }

    /// Winding number about the origin. `rel_tol` scales the minimum admissible
    /// modulus by `max|γ|`.
    pub fn winding_number_with_tol(&self, rel_tol: f64) -> Result<i64, CircleError> {
        let mut curve = self.clone();
        for doubling in 0..=MAX_WINDING_DOUBLINGS {
            let scale = curve.sup_norm();
            let (min_modulus, at) = curve.min_modulus();
            if scale == 0.0 || min_modulus <= rel_tol * scale {
                return Err(CircleError::CurveThroughOrigin {
                    min_modulus,
                    theta: curve.theta(at),
                });
            }
            let n = curve.len();
            let mut total = 0.0;
            let mut resolved = true;
            for k in 0..n {
                let step = (curve.values[(k + 1) % n] / curve.values[k]).arg();
                if step.abs() >= PI / 2.0 {
                    resolved = false;
                    break;
                }
                total += step;
            }
            if resolved {
                return Ok((total / TAU).round() as i64);
            }
            if doubling == MAX_WINDING_DOUBLINGS {
                break;
            }
            curve = curve.resample(2 * n)?;
        }
        Err(CircleError::UnresolvedWinding {
            doublings: MAX_WINDING_DOUBLINGS,
        })
    }

    /// Estimated Hölder seminorm: exhaustive pairwise maximum over a
    /// 256-point subgrid (all points on smaller grids). A lower bound for
    /// the true seminorm.
    pub fn holder_seminorm(&self, alpha: f64) -> f64 {
        assert!(
            alpha > 0.0 && alpha < 1.0,
            "Hölder exponent must lie in (0, 1)"
        );
        let n = self.len();
        let stride = (n / HOLDER_SUBGRID).max(1);
        let pts: Vec<(f64, Complex64)> = (0..n)
            .step_by(stride)
            .map(|k| (self.theta(k), self.values[k]))
            .collect();
        pairwise_holder(&pts, alpha)
    }

    /// Estimated Hölder norm: sup norm plus [`holder_seminorm`](Self::holder_seminorm).
    pub fn holder_norm(&self, alpha: f64) -> f64 {
        self.sup_norm() + self.holder_seminorm(alpha)
    }

    /// Evaluates `Σ_{k≥0} ĉ(k) ζ^k` for `|ζ| ≤ 1`. Requires negligible
    /// negative-mode energy.
    pub fn extend_inside(&self, zeta: Complex64) -> Result<Complex64, CircleError> {
        if zeta.norm() > 1.0 + 1e-12 {
            return Err(CircleError::OutsideDisc(zeta));
        }
        let c = self.coeffs();
        let fraction = c.negative_energy_fraction();
        let limit = 1e-10;
        if fraction > limit {
            return Err(CircleError::NotAnalytic { fraction, limit });
        }
        let top = (self.len() / 2) as i64;
        // Horner from the highest kept mode.
        let mut acc = Complex64::new(0.0, 0.0);
        for k in (0..top).rev() {
            acc = acc * zeta + c.get(k);
        }
        Ok(acc)
    }
}

/// Pairwise Hölder quotient maximum over the given `(θ, value)` points.
pub fn pairwise_holder(pts: &[(f64, Complex64)], alpha: f64) -> f64 {
    let mut best = 0.0f64;
    for (i, &(ti, vi)) in pts.iter().enumerate() {
        for &(tj, vj) in &pts[i + 1..] {
            let d = angle_distance(ti, tj);
            if d > 0.0 {
                best = best.max((vi - vj).norm() / d.powf(alpha));
            }
        }
    }
    best
}

/// Normalized discrete Fourier coefficients, stored in FFT order.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierCoeffs {
    data: Vec<Complex64>,
}

impl FourierCoeffs {
    pub fn n_samples(&self) -> usize {
        self.data.len()
    }

    /// `ĉ(k)`; zero for `|k| ≥ n/2`.
    pub fn get(&self, k: i64) -> Complex64 {
        let n = self.data.len() as i64;
        if k.abs() >= n / 2 {
            Complex64::new(0.0, 0.0)
        } else {
            self.data[k.rem_euclid(n) as usize]
        }
    }

    pub fn nyquist(&self) -> Complex64 {
        self.data[self.data.len() / 2]
    }

    /// `(k, ĉ(k))` for `|k| < n/2`, in increasing `k`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let half = (self.data.len() / 2) as i64;
        ((1 - half)..half).map(move |k| (k, self.get(k)))
    }

    pub fn energy(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn negative_energy_fraction(&self) -> f64 {
        let n = self.data.len();
        let total = self.energy();
        if total == 0.0 {
            return 0.0;
        }
        let neg: f64 = self.data[n / 2..].iter().map(|c| c.norm_sqr()).sum();
        neg / total
    }

    /// Evaluates the trigonometric interpolant at `theta`.
    pub fn eval(&self, theta: f64) -> Complex64 {
        let half = (self.data.len() / 2) as i64;
        let step = Complex64::from_polar(1.0, theta);
        let mut pos = Complex64::new(1.0, 0.0);
        let mut acc = self.get(0);
        for k in 1..half {
            pos *= step;
            acc += self.get(k) * pos + self.get(-k) * pos.conj();
        }
        acc
    }

    /// Inverse transform back to samples (complex flag).
    pub fn synthesize(mut self) -> CircleFunction {
        fft_in_place(&mut self.data, true);
        CircleFunction {
            values: self.data,
            real: false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rejects_bad_grids() {
        assert_eq!(
            CircleFunction::from_real(vec![0.0; 100]).unwrap_err(),
            CircleError::InvalidGrid(100)
        );
        assert!(CircleFunction::from_real(vec![0.0; 32]).is_err());
        assert!(CircleFunction::from_real(vec![0.0; 64]).is_ok());
    }

    #[test]
    fn fft_round_trip() {
        let f =
            CircleFunction::from_fn(128, |t| c((3.0 * t).sin() + 0.2, t.cos().powi(3))).unwrap();
        let back = f.coeffs().synthesize();
        let scale = f.sup_norm();
        assert!(f.sup_distance(&back) < 1e-12 * scale);
    }

    #[test]
    fn hilbert_of_cos_is_sin() {
        let f = CircleFunction::from_real_fn(256, f64::cos).unwrap();
        let h = f.hilbert().unwrap();
        let expect = CircleFunction::from_real_fn(256, f64::sin).unwrap();
        assert!(h.sup_distance(&expect) < 1e-13);
        assert!(h.is_real());
    }

    #[test]
    fn hilbert_of_constant_vanishes() {
        let f = CircleFunction::constant(64, c(5.0, 0.0)).unwrap();
        assert!(f.hilbert().unwrap().sup_norm() < 1e-14);
    }

    #[test]
    fn hilbert_of_sin3_is_minus_cos3() {
        let f = CircleFunction::from_real_fn(128, |t| (3.0 * t).sin()).unwrap();
        let expect = CircleFunction::from_real_fn(128, |t| -(3.0 * t).cos()).unwrap();
        assert!(f.hilbert().unwrap().sup_distance(&expect) < 1e-13);
    }

    #[test]
    fn hilbert_rejects_complex_input() {
        let f = CircleFunction::exp_mode(64, 1).unwrap();
        assert!(matches!(f.hilbert(), Err(CircleError::NonRealInput { .. })));
    }

    #[test]
    fn analytic_completion_examples() {
        let cos = CircleFunction::from_real_fn(128, f64::cos).unwrap();
        let e1 = CircleFunction::exp_mode(128, 1).unwrap();
        assert!(cos.analytic_completion().unwrap().sup_distance(&e1) < 1e-13);

        let k = CircleFunction::constant(128, c(2.5, 0.0)).unwrap();
        assert!(k.analytic_completion().unwrap().sup_distance(&k) < 1e-13);

        let f = CircleFunction::from_real_fn(128, |t| 3.0 + (2.0 * t).cos()).unwrap();
        let expect =
            CircleFunction::from_fn(128, |t| c(3.0, 0.0) + Complex64::from_polar(1.0, 2.0 * t))
                .unwrap();
        let a = f.analytic_completion().unwrap();
        assert!(a.sup_distance(&expect) < 1e-13);
        assert!(a.negative_mode_energy() < 1e-12);
    }

    #[test]
    fn winding_examples() {
        assert_eq!(
            CircleFunction::exp_mode(64, 1)
                .unwrap()
                .winding_number()
                .unwrap(),
            1
        );
        assert_eq!(
            CircleFunction::exp_mode(64, -3)
                .unwrap()
                .winding_number()
                .unwrap(),
            -3
        );
        let shifted =
            CircleFunction::from_fn(64, |t| c(2.0, 0.0) + Complex64::from_polar(1.0, t)).unwrap();
        assert_eq!(shifted.winding_number().unwrap(), 0);
    }

    #[test]
    fn winding_refines_coarse_grids() {
        // 20 turns on 64 points: steps of 2π·20/64 > π/2 force a doubling.
        let f = CircleFunction::exp_mode(64, 20).unwrap();
        assert_eq!(f.winding_number().unwrap(), 20);
        // Mode 31 needs one doubling to bring the steps under π/2.
        let g = CircleFunction::exp_mode(64, 31).unwrap();
        assert_eq!(g.winding_number().unwrap(), 31);
    }

    #[test]
    fn winding_detects_origin() {
        let f =
            CircleFunction::from_fn(64, |t| c(1.0, 0.0) + Complex64::from_polar(1.0, t)).unwrap();
        assert!(matches!(
            f.winding_number(),
            Err(CircleError::CurveThroughOrigin { .. })
        ));
    }

    #[test]
    fn holder_norm_examples() {
        let k = CircleFunction::constant(256, c(-3.0, 4.0)).unwrap();
        assert!(close(k.holder_norm(0.3), 5.0, 1e-12));
        let z = CircleFunction::constant(256, c(0.0, 0.0)).unwrap();
        assert_eq!(z.holder_norm(0.5), 0.0);
    }

    #[test]
    fn holder_norm_scales() {
        let f = CircleFunction::from_fn(512, |t| c(t.sin(), (2.0 * t).cos())).unwrap();
        let s = c(0.0, -2.5);
        assert!(close(
            f.scale(s).holder_norm(0.5),
            2.5 * f.holder_norm(0.5),
            1e-12
        ));
    }

    #[test]
    fn extend_inside_examples() {
        let e1 = CircleFunction::exp_mode(64, 1).unwrap();
        assert!(e1.extend_inside(c(0.0, 0.0)).unwrap().norm() < 1e-14);
        let k = CircleFunction::constant(64, c(1.5, -2.0)).unwrap();
        assert!((k.extend_inside(c(0.3, 0.4)).unwrap() - c(1.5, -2.0)).norm() < 1e-14);
        let f = CircleFunction::from_fn(64, |t| c(3.0, 0.0) + Complex64::from_polar(1.0, 2.0 * t))
            .unwrap();
        assert!((f.extend_inside(c(0.5, 0.0)).unwrap() - c(3.25, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn extend_inside_matches_samples_on_circle() {
        let f = CircleFunction::from_modes(
            128,
            &[(0, c(1.0, 0.5)), (3, c(0.0, 2.0)), (7, c(-1.0, 0.0))],
        )
        .unwrap();
        for k in [0usize, 17, 64, 101] {
            let z = Complex64::from_polar(1.0, f.theta(k));
            assert!((f.extend_inside(z).unwrap() - f.values()[k]).norm() < 1e-8);
        }
    }

    #[test]
    fn extend_inside_rejects_antiholomorphic_data() {
        let f = CircleFunction::exp_mode(64, -1).unwrap();
        assert!(matches!(
            f.extend_inside(c(0.1, 0.0)),
            Err(CircleError::NotAnalytic { .. })
        ));
    }

    #[test]
    fn resample_is_exact_for_trig_polynomials() {
        let f = CircleFunction::from_modes(64, &[(2, c(1.0, 0.0)), (-5, c(0.0, 1.0))]).unwrap();
        let g = f.resample(256).unwrap();
        let expect =
            CircleFunction::from_modes(256, &[(2, c(1.0, 0.0)), (-5, c(0.0, 1.0))]).unwrap();
        assert!(g.sup_distance(&expect) < 1e-13);
        assert!((f.eval_at(0.123) - expect.eval_at(0.123)).norm() < 1e-13);
    }

    #[test]
    fn derivative_of_trig_polynomial() {
        let f = CircleFunction::from_real_fn(128, |t| (3.0 * t).sin()).unwrap();
        let expect = CircleFunction::from_real_fn(128, |t| 3.0 * (3.0 * t).cos()).unwrap();
        assert!(f.derivative().sup_distance(&expect) < 1e-12);
    }
}
