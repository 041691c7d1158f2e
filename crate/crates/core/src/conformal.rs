//! Normalized Riemann map `G: 𝔻 → 𝒟` onto the region bounded by the level
//! curve `F_m = 1`, its boundary derivative `G̃′`, the scale `κ`, and the
//! auxiliary function `R` that makes `Λ_r` invertible.
//!
//! The primary construction is damped Theodorsen iteration. When it fails or
//! its output does not pass the map certificates, [`MapMethod::Auto`] falls
//! back to a Szegő-kernel solve (see [`Construction::Kernel`]), which samples
//! the exact map pointwise. The certificates are recorded either way in
//! [`MapDiagnostics`].

mod kernel;

use std::f64::consts::{PI, TAU};
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circle::{CircleError, CircleFunction, DEFAULT_SAMPLES};
use crate::surface::{golden_min, HermitianHomPoly, SCAN_SAMPLES};

/// Negative-mode energy fraction allowed for `g`.
pub const NEGATIVE_MODE_LIMIT: f64 = 1e-9;
/// Bound on `|Im ĝ(1)| / |ĝ(1)|` and on `|ĝ(0)| / |ĝ(1)|`.
pub const NORMALIZATION_LIMIT: f64 = 1e-8;
/// Bound on `| |g| − rho∘phi |`.
pub const CURVE_LIMIT: f64 = 1e-8;
/// Bound on `max_{N/4 ≤ |k| < N/2} |ĝ(k)| / |ĝ(1)|`.
pub const TAIL_LIMIT: f64 = 1e-11;
/// Relative bound on `Im R`.
pub const R_IMAG_LIMIT: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConformalError {
    #[error("angular profile is not positive (f(θ) = {value:e} at θ = {theta}); the index is ≤ 0, F = 1 is not a closed curve around 0 and the construction does not apply")]
    ProfileNotPositive { theta: f64, value: f64 },
    #[error("polar radius must be positive and finite (sample {index} = {value})")]
    InvalidRadius { index: usize, value: f64 },
    #[error(
        "Theodorsen iteration did not converge in {iterations} steps (last update {last_update:e})"
    )]
    NoConvergence { iterations: usize, last_update: f64 },
    #[error("boundary correspondence is not increasing near θ = {theta}")]
    NonUnivalent { theta: f64 },
    #[error("Szegő kernel system not solved (relative residual {residual:e})")]
    KernelSolve { residual: f64 },
    #[error(
        "auxiliary R is not positive real (max |Im R| = {max_imag:e}, min Re R = {min_real:e})"
    )]
    RNotPositiveReal { max_imag: f64, min_real: f64 },
    #[error("map certificate failed: {0}")]
    Uncertified(String),
    #[error(transparent)]
    Circle(#[from] CircleError),
}

/// Star-shaped curve `t ↦ rho(t) e^{it}` described through `log rho`.
pub trait PolarCurve: Sync {
    fn log_rho(&self, t: f64) -> f64;
    fn log_rho_prime(&self, t: f64) -> f64;

    fn rho(&self, t: f64) -> f64 {
        self.log_rho(t).exp()
    }
}

/// The level curve `F = 1` of a positive homogeneous polynomial, evaluated
/// in closed form: `log rho = −(1/m) log f`.
#[derive(Clone, Debug)]
pub struct ProfileCurve {
    f: HermitianHomPoly,
}

impl ProfileCurve {
    pub fn new(f: &HermitianHomPoly) -> Result<Self, ConformalError> {
        check_profile_positive(f)?;
        Ok(Self { f: f.clone() })
    }
}

impl PolarCurve for ProfileCurve {
    fn log_rho(&self, t: f64) -> f64 {
        -self.f.profile(t).ln() / self.f.degree() as f64
    }

    fn log_rho_prime(&self, t: f64) -> f64 {
        -self.f.profile_derivative(t) / (self.f.degree() as f64 * self.f.profile(t))
    }
}

/// Trigonometric interpolant of sampled `log rho`.
#[derive(Clone, Debug)]
pub struct SampledCurve {
    coeffs: Vec<(i64, Complex64)>,
}

impl SampledCurve {
    pub fn new(rho: &CircleFunction) -> Result<Self, ConformalError> {
        let rho = rho.to_real()?;
        if let Some((index, v)) = rho
            .values()
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.re > 0.0 && v.re.is_finite()))
        {
            return Err(ConformalError::InvalidRadius { index, value: v.re });
        }
        let log_rho = rho.map_real(f64::ln);
        let c = log_rho.coeffs();
        let top = c.iter().fold(0.0f64, |m, (_, v)| m.max(v.norm()));
        let coeffs = c.iter().filter(|(_, v)| v.norm() > 1e-17 * top).collect();
        Ok(Self { coeffs })
    }
}

impl PolarCurve for SampledCurve {
    fn log_rho(&self, t: f64) -> f64 {
        self.coeffs
            .iter()
            .map(|&(k, c)| (c * Complex64::from_polar(1.0, k as f64 * t)).re)
            .sum()
    }

    fn log_rho_prime(&self, t: f64) -> f64 {
        self.coeffs
            .iter()
            .map(|&(k, c)| {
                (Complex64::new(0.0, k as f64) * c * Complex64::from_polar(1.0, k as f64 * t)).re
            })
            .sum()
    }
}

fn check_profile_positive(f: &HermitianHomPoly) -> Result<(), ConformalError> {
    let h = TAU / SCAN_SAMPLES as f64;
    let (k, v) = (0..SCAN_SAMPLES)
        .map(|k| (k, f.profile(k as f64 * h)))
        .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
    let (theta, value) = if v > 0.0 {
        let c = k as f64 * h;
        golden_min(&|t| f.profile(t), c - h, c + h)
    } else {
        (k as f64 * h, v)
    };
    if value > 0.0 {
        Ok(())
    } else {
        Err(ConformalError::ProfileNotPositive {
            theta: theta.rem_euclid(TAU),
            value,
        })
    }
}

/// Polar radius `rho = f^{−1/m}` of `F = 1` on an `n`-point grid.
pub fn level_curve(f: &HermitianHomPoly, n: usize) -> Result<CircleFunction, ConformalError> {
    let curve = ProfileCurve::new(f)?;
    Ok(CircleFunction::from_real_fn(n, |t| curve.rho(t))?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapMethod {
    /// Theodorsen, then the kernel solve if Theodorsen fails or is not
    /// certified.
    Auto,
    Theodorsen,
    Kernel,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MapOptions {
    pub method: MapMethod,
    /// Size of the `ζ` grid.
    pub grid: usize,
    /// Stopping tolerance on successive Theodorsen iterates.
    pub tol: f64,
    pub damping: f64,
    pub max_iter: usize,
    /// Cap on the number of curve nodes for the kernel solve.
    pub max_kernel_nodes: usize,
}

impl Default for MapOptions {
    fn default() -> Self {
        Self {
            method: MapMethod::Auto,
            grid: DEFAULT_SAMPLES,
            tol: 1e-11,
            damping: 0.5,
            max_iter: 10_000,
            max_kernel_nodes: 8192,
        }
    }
}

/// How a map was produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Construction {
    Theodorsen {
        iterations: usize,
    },
    /// Szegő kernel on `nodes` curve points; `tail` is the relative size of
    /// the upper half of the kernel's spectrum.
    Kernel {
        nodes: usize,
        gmres_iterations: usize,
        tail: f64,
        /// Reason the Theodorsen attempt was abandoned, if there was one.
        fallback_reason: Option<String>,
    },
}

/// Values of the map certificates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapDiagnostics {
    pub negative_mode_energy: f64,
    /// `|ĝ(0)| / |ĝ(1)|`.
    pub mode_zero: f64,
    /// `|Im ĝ(1)| / |ĝ(1)|`.
    pub imag_ratio: f64,
    pub min_g_deriv: f64,
    /// `max | |g(θ)| − rho(phi(θ)) |`.
    pub curve_residual: f64,
    /// `max_{N/4 ≤ |k| < N/2} |ĝ(k)| / |ĝ(1)|`; large values mean the grid
    /// does not resolve `g`.
    pub spectral_tail: f64,
}

impl MapDiagnostics {
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.negative_mode_energy < NEGATIVE_MODE_LIMIT) {
            out.push(format!(
                "negative-mode energy {:e} ≥ {NEGATIVE_MODE_LIMIT:e}",
                self.negative_mode_energy
            ));
        }
        if !(self.mode_zero < NORMALIZATION_LIMIT) {
            out.push(format!(
                "|ĝ(0)|/|ĝ(1)| = {:e} ≥ {NORMALIZATION_LIMIT:e}",
                self.mode_zero
            ));
        }
        if !(self.imag_ratio < NORMALIZATION_LIMIT) {
            out.push(format!(
                "|Im ĝ(1)|/|ĝ(1)| = {:e} ≥ {NORMALIZATION_LIMIT:e}",
                self.imag_ratio
            ));
        }
        if !(self.min_g_deriv > 0.0) {
            out.push("G̃′ vanishes on the grid".to_string());
        }
        if !(self.curve_residual < CURVE_LIMIT) {
            out.push(format!(
                "boundary off the curve by {:e}",
                self.curve_residual
            ));
        }
        if !(self.spectral_tail < TAIL_LIMIT) {
            out.push(format!(
                "spectral tail {:e} ≥ {TAIL_LIMIT:e}",
                self.spectral_tail
            ));
        }
        out
    }

    pub fn certified(&self) -> bool {
        self.failures().is_empty()
    }
}

/// Boundary data of the normalized Riemann map onto a star-shaped region.
#[derive(Clone, Debug)]
pub struct ConformalMap {
    rho: CircleFunction,
    phi_offset: CircleFunction,
    g_boundary: CircleFunction,
    g_deriv: CircleFunction,
    kappa: f64,
    g_prime_at_0: f64,
    construction: Construction,
    diagnostics: MapDiagnostics,
}

impl ConformalMap {
    fn assemble(
        curve: &dyn PolarCurve,
        phi: Vec<f64>,
        g_deriv: CircleFunction,
        g_prime_at_0: f64,
        construction: Construction,
    ) -> Result<Self, ConformalError> {
        let n = phi.len();
        let rho = CircleFunction::from_real_fn(n, |t| curve.rho(t))?;
        let g_boundary = CircleFunction::new(
            phi.iter()
                .map(|&p| Complex64::from_polar(curve.rho(p), p))
                .collect(),
        )?;
        let phi_offset = CircleFunction::from_real(
            phi.iter()
                .enumerate()
                .map(|(k, &p)| (p - TAU * k as f64 / n as f64 + PI).rem_euclid(TAU) - PI)
                .collect(),
        )?;
        let c = g_boundary.coeffs();
        let g1 = c.get(1);
        let curve_residual = g_boundary
            .values()
            .iter()
            .zip(&phi)
            .fold(0.0f64, |m, (g, &p)| m.max((g.norm() - curve.rho(p)).abs()));
        let diagnostics = MapDiagnostics {
            negative_mode_energy: c.negative_energy_fraction(),
            mode_zero: c.get(0).norm() / g1.norm(),
            imag_ratio: g1.im.abs() / g1.norm(),
            min_g_deriv: g_deriv.min_modulus().0,
            curve_residual,
            spectral_tail: c
                .iter()
                .filter(|&(k, _)| k.unsigned_abs() as usize >= n / 4)
                .fold(0.0f64, |m, (_, v)| m.max(v.norm()))
                / g1.norm(),
        };
        let kappa = 0.5 / g_boundary.sup_norm();
        Ok(Self {
            rho,
            phi_offset,
            g_boundary,
            g_deriv,
            kappa,
            g_prime_at_0,
            construction,
            diagnostics,
        })
    }

    pub fn len(&self) -> usize {
        self.g_boundary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g_boundary.is_empty()
    }

    /// Polar radius of `∂𝒟` sampled at the grid angles.
    pub fn rho(&self) -> &CircleFunction {
        &self.rho
    }

    /// `phi(θ) − θ`, wrapped to `(−π, π]`.
    pub fn phi_offset(&self) -> &CircleFunction {
        &self.phi_offset
    }

    /// Boundary correspondence `phi(θ_k)`, increasing across the grid.
    pub fn phi(&self) -> Vec<f64> {
        self.phi_offset
            .values()
            .iter()
            .enumerate()
            .map(|(k, v)| self.phi_offset.theta(k) + v.re)
            .collect()
    }

    /// `g = G̃|_{∂𝔻}`.
    pub fn g_boundary(&self) -> &CircleFunction {
        &self.g_boundary
    }

    /// `G̃′` on `∂𝔻`.
    pub fn g_deriv(&self) -> &CircleFunction {
        &self.g_deriv
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn g_prime_at_0(&self) -> f64 {
        self.g_prime_at_0
    }

    pub fn construction(&self) -> &Construction {
        &self.construction
    }

    pub fn diagnostics(&self) -> &MapDiagnostics {
        &self.diagnostics
    }

    pub fn validate(&self) -> Result<(), ConformalError> {
        let f = self.diagnostics.failures();
        if f.is_empty() {
            Ok(())
        } else {
            Err(ConformalError::Uncertified(f.join("; ")))
        }
    }

    /// `Σ_{k≥0} ĝ(k) w^k`, the power series of `G̃` from the grid data.
    /// Usable slightly outside `𝔻` because `G̃` continues across `∂𝔻`.
    pub fn g_series(&self, w: Complex64) -> Complex64 {
        let c = self.g_boundary.coeffs();
        let top = (self.len() / 2) as i64;
        (0..top)
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, k| acc * w + c.get(k))
    }

    /// `max |F(g) − 1|` over the grid.
    pub fn level_residual(&self, f: &HermitianHomPoly) -> f64 {
        self.g_boundary
            .values()
            .iter()
            .fold(0.0f64, |m, &g| m.max((f.eval(g) - 1.0).abs()))
    }

    /// CSV with columns `theta, re_g, im_g, rho, phi, r`.
    pub fn write_csv(&self, aux: &CircleFunction, out: impl Write) -> csv::Result<()> {
        #[derive(Serialize)]
        struct Row {
            theta: f64,
            re_g: f64,
            im_g: f64,
            rho: f64,
            phi: f64,
            r: f64,
        }
        let mut w = csv::Writer::from_writer(out);
        for (k, (phi, g)) in self
            .phi()
            .into_iter()
            .zip(self.g_boundary.values())
            .enumerate()
        {
            w.serialize(Row {
                theta: self.g_boundary.theta(k),
                re_g: g.re,
                im_g: g.im,
                rho: self.rho.values()[k].re,
                phi,
                r: aux.values()[k].re,
            })?;
        }
        w.flush()?;
        Ok(())
    }
}

fn theodorsen(curve: &dyn PolarCurve, opts: &MapOptions) -> Result<ConformalMap, ConformalError> {
    let n = opts.grid;
    let thetas: Vec<f64> = (0..n).map(|k| TAU * k as f64 / n as f64).collect();
    let mut u = vec![0.0; n];
    let mut last = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        iterations += 1;
        let lr = CircleFunction::from_real(
            thetas
                .iter()
                .zip(&u)
                .map(|(t, v)| curve.log_rho(t + v))
                .collect(),
        )?;
        let target = lr.hilbert()?;
        let mut diff = 0.0f64;
        for (v, h) in u.iter_mut().zip(target.values()) {
            let next = (1.0 - opts.damping) * *v + opts.damping * h.re;
            diff = diff.max((next - *v).abs());
            *v = next;
        }
        last = diff;
        if !diff.is_finite() {
            break;
        }
        if diff < opts.tol {
            converged = true;
            break;
        }
        // A boundary correspondence that is still folded after many damped
        // steps means the iteration is not settling on a univalent map.
        if iterations % 200 == 0 {
            if let Some(theta) = fold(&thetas, &u) {
                return Err(ConformalError::NonUnivalent { theta });
            }
        }
    }
    if !converged {
        return Err(ConformalError::NoConvergence {
            iterations,
            last_update: last,
        });
    }
    if let Some(theta) = fold(&thetas, &u) {
        return Err(ConformalError::NonUnivalent { theta });
    }
    let phi: Vec<f64> = thetas.iter().zip(&u).map(|(t, v)| t + v).collect();
    let log_mean = phi.iter().map(|&p| curve.log_rho(p)).sum::<f64>() / n as f64;
    let g = CircleFunction::new(
        phi.iter()
            .map(|&p| Complex64::from_polar(curve.rho(p), p))
            .collect(),
    )?;
    let dg = g.derivative();
    let g_deriv =
        dg.map_with_theta(|t, v| v / Complex64::new(0.0, 1.0) / Complex64::from_polar(1.0, t));
    ConformalMap::assemble(
        curve,
        phi,
        g_deriv,
        log_mean.exp(),
        Construction::Theodorsen { iterations },
    )
}

/// First grid angle where `θ + u(θ)` fails to increase.
fn fold(thetas: &[f64], u: &[f64]) -> Option<f64> {
    let n = thetas.len();
    (0..n).find_map(|k| {
        let next = if k + 1 == n {
            TAU + u[0]
        } else {
            thetas[k + 1] + u[k + 1]
        };
        (next - (thetas[k] + u[k]) <= 0.0).then_some(thetas[k])
    })
}

fn kernel_map(
    curve: &dyn PolarCurve,
    opts: &MapOptions,
    fallback_reason: Option<String>,
) -> Result<ConformalMap, ConformalError> {
    let mut nodes = 1024.min(opts.max_kernel_nodes).max(64);
    let sol = loop {
        let sol = kernel::KernelSolution::solve(curve, nodes)
            .map_err(|residual| ConformalError::KernelSolve { residual })?;
        if sol.tail < 1e-12 || nodes >= opts.max_kernel_nodes {
            break sol;
        }
        nodes *= 2;
    };
    let n = opts.grid;
    let phi: Vec<f64> = (0..n)
        .map(|k| sol.invert(TAU * k as f64 / n as f64))
        .collect();
    let g_deriv = CircleFunction::new(phi.iter().map(|&t| sol.g_deriv(t)).collect())?;
    ConformalMap::assemble(
        curve,
        phi,
        g_deriv,
        sol.g_prime_at_0(),
        Construction::Kernel {
            nodes: sol.nodes,
            gmres_iterations: sol.gmres_iterations,
            tail: sol.tail,
            fallback_reason,
        },
    )
}

/// Riemann map onto the polar region `{r e^{it} : r < rho(t)}` with the given
/// construction method.
pub fn riemann_map_with(
    curve: &dyn PolarCurve,
    opts: &MapOptions,
) -> Result<ConformalMap, ConformalError> {
    // Rejects unusable grid sizes up front.
    CircleFunction::constant(opts.grid, Complex64::new(0.0, 0.0))?;
    match opts.method {
        MapMethod::Theodorsen => theodorsen(curve, opts),
        MapMethod::Kernel => kernel_map(curve, opts, None),
        MapMethod::Auto => {
            let reason = match theodorsen(curve, opts) {
                Ok(map) if map.diagnostics.certified() => return Ok(map),
                Ok(map) => format!(
                    "Theodorsen map not certified: {}",
                    map.diagnostics.failures().join("; ")
                ),
                Err(e) => e.to_string(),
            };
            kernel_map(curve, opts, Some(reason))
        }
    }
}

/// Theodorsen map for sampled polar radius data, on the grid of `rho`.
pub fn riemann_map(rho: &CircleFunction) -> Result<ConformalMap, ConformalError> {
    let curve = SampledCurve::new(rho)?;
    let opts = MapOptions {
        method: MapMethod::Theodorsen,
        grid: rho.len(),
        ..MapOptions::default()
    };
    riemann_map_with(&curve, &opts)
}

/// Map onto the region `{F < 1}` bounded by the level curve of `F`.
pub fn map_for(f: &HermitianHomPoly, opts: &MapOptions) -> Result<ConformalMap, ConformalError> {
    let curve = ProfileCurve::new(f)?;
    riemann_map_with(&curve, opts)
}

/// `κ = (1/2) (max |g|)^{-1}`.
pub fn kappa_of(map: &ConformalMap) -> f64 {
    map.kappa()
}

/// `R(ζ) = κ ζ G̃′(ζ) (∂F/∂z)(κ g(ζ))`, required to be positive real.
pub fn aux_r(f: &HermitianHomPoly, map: &ConformalMap) -> Result<CircleFunction, ConformalError> {
    let kappa = map.kappa();
    let vals: Vec<Complex64> = (0..map.len())
        .map(|k| {
            let zeta = Complex64::from_polar(1.0, map.g_boundary.theta(k));
            kappa * zeta * map.g_deriv.values()[k] * f.dz().eval(kappa * map.g_boundary.values()[k])
        })
        .collect();
    let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    let max_imag = vals.iter().fold(0.0f64, |m, v| m.max(v.im.abs()));
    let min_real = vals.iter().fold(f64::INFINITY, |m, v| m.min(v.re));
    if !(max_imag <= R_IMAG_LIMIT * scale && min_real > 0.0) {
        return Err(ConformalError::RNotPositiveReal { max_imag, min_real });
    }
    Ok(CircleFunction::from_real(
        vals.iter().map(|v| v.re).collect(),
    )?)
}
