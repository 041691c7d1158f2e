//! Bishop discs attached near a positive-index CR singularity.
//!
//! With `g_r = κ r g` and a holomorphic perturbation `a`, the disc
//! `F₁ = g_r + a`, `F₂ = (κr)^m + i𝒜[Im ℛ(F₁)]` is attached to
//! `w = F_m(z) + ℛ(z)` exactly when
//!
//! ```text
//! Λ_r a + Q(g_r, a) + Re ℛ(g_r + a) + 𝔥[Im ℛ(g_r + a)] = 0,
//! ```
//!
//! where `Λ_r a = 2 Re{∂_z F_m(g_r) a}` and `Q` is the Taylor tail of `F_m`.
//! The right inverse of `Λ_r` is
//! `𝔸_r f = ζ κ G̃′ 𝒜[f / R] / (2 r^{m−1})`, which turns the equation into the
//! fixed point `a = H(a)` solved here by Picard iteration.

use std::collections::BTreeMap;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circle::{CircleError, CircleFunction, DEFAULT_SAMPLES};
use crate::conformal::{aux_r, level_curve, map_for, ConformalError, ConformalMap, MapOptions};
use crate::maslov::{index_report_on, IndexReport, MaslovError};
use crate::surface::{HermitianHomPoly, PolyZZbar, SurfaceGerm};

/// Negative-mode energy fraction below which boundary data count as analytic.
pub const ANALYTIC_LIMIT: f64 = 1e-9;
/// Attachment residual below which a disc is certified.
pub const RESIDUAL_LIMIT: f64 = 1e-7;
/// Relative tolerance of the `Λ_r ∘ 𝔸_r = id` check.
pub const ROUND_TRIP_TOL: f64 = 1e-8;
/// Radius of the circle used for the index gate, as a fraction of the germ
/// radius.
pub const INDEX_RADIUS_FRACTION: f64 = 0.05;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BishopError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("radius {r} must lie in (0, {limit})")]
    InvalidRadius { r: f64, limit: f64 },
    #[error("{}", profile_message(*index, *theta, *value))]
    ProfileNotPositive { index: i64, theta: f64, value: f64 },
    #[error("index {index} ≤ 0: no discs are constructed near a nonpositive-index point")]
    IndexNotPositive { index: i64 },
    #[error("index {index} > 0: the nonexistence probe applies only to index ≤ 0")]
    IndexPositive { index: i64 },
    #[error("map does not parametrize {{F_m = 1}} (level residual {0:e})")]
    MapMismatch(f64),
    #[error("not an element of A₀: negative-mode energy {negative_energy:e}, Im â(0) = {mode_zero_imag:e}")]
    NotHolomorphic {
        negative_energy: f64,
        mode_zero_imag: f64,
    },
    #[error("Λ_r ∘ 𝔸_r misses the identity by {error:e} (relative), grid too coarse or R invalid")]
    RoundTripFailure { error: f64 },
    #[error("no convergence at r = {r} after {iterations} iterations (last contraction ratio {last_ratio})")]
    NoConvergence {
        r: f64,
        iterations: usize,
        last_ratio: f64,
    },
    #[error("invalid family grid: {0}")]
    InvalidGrid(String),
    #[error(transparent)]
    Maslov(#[from] MaslovError),
    #[error(transparent)]
    Conformal(#[from] ConformalError),
    #[error(transparent)]
    Circle(#[from] CircleError),
}

fn profile_message(index: i64, theta: f64, value: f64) -> String {
    let lead = if index <= 0 {
        format!("index {index} ≤ 0")
    } else {
        format!("index {index}")
    };
    format!(
        "{lead}: angular profile is {value} at θ = {theta}, so {{F_m < 1}} is not a bounded star-shaped region and the disc construction does not apply"
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    /// Ball exponent: iterates are monitored against `r^{1+δ}`.
    pub delta: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Hölder exponent of the monitored norm.
    pub alpha: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            delta: 0.75,
            tol: 1e-10,
            max_iter: 200,
            alpha: 0.5,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<(), BishopError> {
        if !(self.delta > 0.5 && self.delta < 1.0) {
            return Err(BishopError::InvalidConfig(format!(
                "delta = {} not in (1/2, 1)",
                self.delta
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(BishopError::InvalidConfig(format!(
                "alpha = {} not in (0, 1)",
                self.alpha
            )));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(BishopError::InvalidConfig(format!(
                "tol = {} must be positive",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(BishopError::InvalidConfig(
                "max_iter must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Boundary values of a holomorphic function with real mean.
#[derive(Clone, Debug, PartialEq)]
pub struct HoloPerturbation(CircleFunction);

impl HoloPerturbation {
    pub fn new(a: CircleFunction) -> Result<Self, BishopError> {
        let negative_energy = a.negative_mode_energy();
        let mode_zero_imag = a.mode(0).im.abs();
        let scale = a.sup_norm().max(f64::MIN_POSITIVE);
        if negative_energy < 1e-10 && mode_zero_imag <= 1e-10 * scale {
            Ok(Self(a))
        } else {
            Err(BishopError::NotHolomorphic {
                negative_energy,
                mode_zero_imag,
            })
        }
    }

    pub fn zero(n: usize) -> Result<Self, BishopError> {
        Ok(Self(CircleFunction::constant(n, Complex64::new(0.0, 0.0))?))
    }

    pub fn function(&self) -> &CircleFunction {
        &self.0
    }

    pub fn into_inner(self) -> CircleFunction {
        self.0
    }

    pub fn negative_mode_energy(&self) -> f64 {
        self.0.negative_mode_energy()
    }
}

/// `Q(X, Y) = Σ_{j=2}^{m} Σ_{μ+ν=j} ∂^μ_z ∂^ν_z̄ F(X) Y^μ Ȳ^ν / (μ! ν!)`.
#[derive(Clone, Debug)]
pub struct TaylorTail {
    terms: Vec<(u32, u32, PolyZZbar)>,
}

impl TaylorTail {
    pub fn new(f: &HermitianHomPoly) -> Self {
        let m = f.degree();
        let fact = |k: u32| (1..=k).map(f64::from).product::<f64>();
        let mut terms = Vec::new();
        for j in 2..=m {
            for mu in 0..=j {
                let nu = j - mu;
                let d = f
                    .poly()
                    .derivative(mu, nu)
                    .scale_by(Complex64::new(1.0 / (fact(mu) * fact(nu)), 0.0));
                if !d.is_zero() {
                    terms.push((mu, nu, d));
                }
            }
        }
        Self { terms }
    }

    pub fn eval(&self, x: Complex64, y: Complex64) -> Complex64 {
        self.terms
            .iter()
            .map(|(mu, nu, d)| d.eval(x) * y.powu(*mu) * y.conj().powu(*nu))
            .sum()
    }

    /// Pointwise on the grid; the result is real up to rounding and its real
    /// part is returned.
    pub fn apply(&self, x: &CircleFunction, y: &CircleFunction) -> CircleFunction {
        let vals: Vec<Complex64> = x
            .values()
            .iter()
            .zip(y.values())
            .map(|(&x, &y)| self.eval(x, y))
            .collect();
        let q = CircleFunction::new(vals).expect("grid sizes match");
        debug_assert!(q.imaginary_defect() <= 1e-9 * q.sup_norm().max(1e-300));
        q.real_part()
    }
}

/// `Q(X, Y)` for a single evaluation; see [`TaylorTail`].
pub fn taylor_tail_q(
    f: &HermitianHomPoly,
    x: &CircleFunction,
    y: &CircleFunction,
) -> CircleFunction {
    TaylorTail::new(f).apply(x, y)
}

fn dz_on(f: &HermitianHomPoly, map: &ConformalMap, r: f64) -> Vec<Complex64> {
    let s = map.kappa() * r;
    map.g_boundary()
        .values()
        .iter()
        .map(|&g| f.dz().eval(s * g))
        .collect()
}

/// `Λ_r a = 2 Re{(∂F/∂z)(g_r) a}` with `g_r = κ r g`.
pub fn apply_lambda(
    f: &HermitianHomPoly,
    map: &ConformalMap,
    r: f64,
    a: &CircleFunction,
) -> CircleFunction {
    let d = dz_on(f, map, r);
    CircleFunction::from_real(
        d.iter()
            .zip(a.values())
            .map(|(d, a)| 2.0 * (d * a).re)
            .collect(),
    )
    .expect("grid sizes match")
}

/// `𝔸_r f = ζ κ G̃′ 𝒜[f / R] / (2 r^{m−1})`, the right inverse of `Λ_r`
/// normalized by `â(0) = 0`.
pub fn apply_a_inv(
    map: &ConformalMap,
    aux: &CircleFunction,
    r: f64,
    m: u32,
    f: &CircleFunction,
) -> Result<HoloPerturbation, BishopError> {
    let quotient: Vec<f64> = f
        .values()
        .iter()
        .zip(aux.values())
        .map(|(f, r)| f.re / r.re)
        .collect();
    let b = CircleFunction::from_real(quotient)?.analytic_completion()?;
    let c = map.kappa() / (2.0 * r.powi(m as i32 - 1));
    let vals = b
        .values()
        .iter()
        .zip(map.g_deriv().values())
        .enumerate()
        .map(|(k, (b, gd))| Complex64::from_polar(c, f.theta(k)) * gd * b)
        .collect();
    Ok(HoloPerturbation(CircleFunction::new(vals)?))
}

/// Boundary values of an analytic disc `(F₁, F₂)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BishopDisc {
    pub r: f64,
    pub f1_boundary: CircleFunction,
    pub f2_boundary: CircleFunction,
    /// `sup |F₂ − (F_m + ℛ)(F₁)|` over the boundary grid.
    pub residual: f64,
    /// `sup |(F₁, F₂)|` over the boundary grid.
    pub sup_norm: f64,
}

impl BishopDisc {
    pub fn recompute_residual(&self, germ: &SurfaceGerm) -> f64 {
        attachment_residual(&self.f1_boundary, &self.f2_boundary, germ)
    }

    pub fn write_csv(&self, out: impl Write) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["theta", "re_f1", "im_f1", "re_f2", "im_f2"])?;
        for (k, (a, b)) in self
            .f1_boundary
            .values()
            .iter()
            .zip(self.f2_boundary.values())
            .enumerate()
        {
            w.serialize((self.f1_boundary.theta(k), a.re, a.im, b.re, b.im))?;
        }
        w.flush()?;
        Ok(())
    }
}

fn attachment_residual(f1: &CircleFunction, f2: &CircleFunction, germ: &SurfaceGerm) -> f64 {
    f1.values()
        .iter()
        .zip(f2.values())
        .fold(0.0f64, |m, (&z, &w)| m.max((w - germ.eval(z)).norm()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Attachment {
    pub residual: f64,
    pub f1_negative_energy: f64,
    pub f2_negative_energy: f64,
}

impl Attachment {
    pub fn analytic(&self) -> bool {
        self.f1_negative_energy < ANALYTIC_LIMIT && self.f2_negative_energy < ANALYTIC_LIMIT
    }

    pub fn certified(&self) -> bool {
        self.residual < RESIDUAL_LIMIT && self.analytic()
    }
}

/// Residual and analyticity certificate of a disc.
pub fn verify_attachment(disc: &BishopDisc, germ: &SurfaceGerm) -> Attachment {
    Attachment {
        residual: disc.recompute_residual(germ),
        f1_negative_energy: disc.f1_boundary.negative_mode_energy(),
        f2_negative_energy: disc.f2_boundary.negative_mode_energy(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveDiagnostics {
    pub iterations: usize,
    /// `‖a_{k+1} − a_k‖ / ‖a_k − a_{k−1}‖` for steps above rounding level.
    pub contraction_ratios: Vec<f64>,
    /// Largest recorded ratio, 0 when the first step already converged.
    pub contraction_ratio: f64,
    /// Largest estimated Hölder norm over the iterates.
    pub holder_norm: f64,
    pub ball_radius: f64,
    pub ball_escape: bool,
    /// `‖a − H(a)‖_sup` at the returned iterate.
    pub fixed_point_residual: f64,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub r: f64,
    pub a: HoloPerturbation,
    pub diagnostics: SolveDiagnostics,
}

/// A germ together with its Riemann map, auxiliary function and solver
/// settings.
#[derive(Clone, Debug)]
pub struct BishopProblem {
    germ: SurfaceGerm,
    map: ConformalMap,
    aux: CircleFunction,
    index: IndexReport,
    config: SolveConfig,
    tail: TaylorTail,
}

impl BishopProblem {
    /// Gates on the index and builds the map of `{F_m < 1}`.
    pub fn new(
        germ: SurfaceGerm,
        opts: &MapOptions,
        config: SolveConfig,
    ) -> Result<Self, BishopError> {
        config.validate()?;
        let index = index_report_on(
            &germ,
            INDEX_RADIUS_FRACTION * germ.radius(),
            opts.grid.max(DEFAULT_SAMPLES),
        )?;
        let map = match map_for(germ.leading(), opts) {
            Ok(map) => map,
            Err(ConformalError::ProfileNotPositive { theta, value }) => {
                return Err(BishopError::ProfileNotPositive {
                    index: index.index(),
                    theta,
                    value,
                })
            }
            Err(e) => return Err(e.into()),
        };
        Self::assemble(germ, map, index, config)
    }

    /// Uses a prebuilt map, which must parametrize `{F_m = 1}`.
    pub fn with_map(
        germ: SurfaceGerm,
        map: ConformalMap,
        config: SolveConfig,
    ) -> Result<Self, BishopError> {
        config.validate()?;
        let index = index_report_on(
            &germ,
            INDEX_RADIUS_FRACTION * germ.radius(),
            map.len().max(DEFAULT_SAMPLES),
        )?;
        if let Err(ConformalError::ProfileNotPositive { theta, value }) =
            level_curve(germ.leading(), map.len())
        {
            return Err(BishopError::ProfileNotPositive {
                index: index.index(),
                theta,
                value,
            });
        }
        let residual = map.level_residual(germ.leading());
        if !(residual < 1e-8) {
            return Err(BishopError::MapMismatch(residual));
        }
        Self::assemble(germ, map, index, config)
    }

    fn assemble(
        germ: SurfaceGerm,
        map: ConformalMap,
        index: IndexReport,
        config: SolveConfig,
    ) -> Result<Self, BishopError> {
        if index.index() <= 0 {
            return Err(BishopError::IndexNotPositive {
                index: index.index(),
            });
        }
        let aux = aux_r(germ.leading(), &map)?;
        let tail = TaylorTail::new(germ.leading());
        Ok(Self {
            germ,
            map,
            aux,
            index,
            config,
            tail,
        })
    }

    pub fn germ(&self) -> &SurfaceGerm {
        &self.germ
    }

    pub fn map(&self) -> &ConformalMap {
        &self.map
    }

    /// The auxiliary function `R` on the grid.
    pub fn aux(&self) -> &CircleFunction {
        &self.aux
    }

    pub fn index(&self) -> &IndexReport {
        &self.index
    }

    pub fn config(&self) -> &SolveConfig {
        &self.config
    }

    /// Upper bound `3ρ/4` on admissible radii.
    pub fn max_radius(&self) -> f64 {
        0.75 * self.germ.radius()
    }

    fn check_radius(&self, r: f64) -> Result<(), BishopError> {
        let limit = self.max_radius();
        if r > 0.0 && r < limit {
            Ok(())
        } else {
            Err(BishopError::InvalidRadius { r, limit })
        }
    }

    /// `g_r = κ r g`.
    pub fn g_r(&self, r: f64) -> CircleFunction {
        self.map.g_boundary().scale_real(self.map.kappa() * r)
    }

    pub fn lambda(&self, r: f64, a: &CircleFunction) -> CircleFunction {
        apply_lambda(self.germ.leading(), &self.map, r, a)
    }

    pub fn a_inv(&self, r: f64, f: &CircleFunction) -> Result<HoloPerturbation, BishopError> {
        apply_a_inv(&self.map, &self.aux, r, self.germ.degree(), f)
    }

    /// `𝔸_r f` followed by the round-trip check `Λ_r 𝔸_r f = f`.
    pub fn a_inv_checked(
        &self,
        r: f64,
        f: &CircleFunction,
    ) -> Result<HoloPerturbation, BishopError> {
        let a = self.a_inv(r, f)?;
        let back = self.lambda(r, a.function());
        let scale = f.sup_norm();
        let error = if scale > 0.0 {
            back.sup_distance(f) / scale
        } else {
            back.sup_norm()
        };
        if error <= ROUND_TRIP_TOL || (scale == 0.0 && error == 0.0) {
            Ok(a)
        } else {
            Err(BishopError::RoundTripFailure { error })
        }
    }

    /// `H(a; r) = −𝔸_r[Q(g_r, a) + Re ℛ(g_r + a) + 𝔥[Im ℛ(g_r + a)]]`.
    pub fn h_map(&self, r: f64, a: &CircleFunction) -> Result<HoloPerturbation, BishopError> {
        self.check_radius(r)?;
        let g_r = self.g_r(r);
        self.h_with(r, &g_r, a)
    }

    fn h_with(
        &self,
        r: f64,
        g_r: &CircleFunction,
        a: &CircleFunction,
    ) -> Result<HoloPerturbation, BishopError> {
        let x = g_r.add(a);
        let q = self.tail.apply(g_r, a);
        let rem = x.map(|z| self.germ.remainder().eval(z));
        let conj_part = rem.imag_part().hilbert()?;
        let rhs: Vec<f64> = q
            .values()
            .iter()
            .zip(rem.values())
            .zip(conj_part.values())
            .map(|((q, w), h)| -(q.re + w.re + h.re))
            .collect();
        self.a_inv_checked(r, &CircleFunction::from_real(rhs)?)
    }

    /// Picard iteration `a_{k+1} = H(a_k; r)` from `a_0 = 0`.
    pub fn iterate_h(&self, r: f64) -> Result<Solution, BishopError> {
        self.check_radius(r)?;
        let cfg = &self.config;
        let g_r = self.g_r(r);
        let ball_radius = r.powf(1.0 + cfg.delta);
        let mut a = HoloPerturbation::zero(self.map.len())?;
        let mut ratios = Vec::new();
        let mut holder_norm = 0.0f64;
        let mut prev_diff: Option<f64> = None;
        let mut last_ratio = f64::NAN;
        for k in 1..=cfg.max_iter {
            let next = self.h_with(r, &g_r, a.function())?;
            let diff = next.function().sup_distance(a.function());
            let size = next.function().sup_norm();
            if !diff.is_finite() || size > 10.0 * r {
                return Err(BishopError::NoConvergence {
                    r,
                    iterations: k,
                    last_ratio,
                });
            }
            if let Some(p) = prev_diff {
                if p > 1e-13 * size {
                    last_ratio = diff / p;
                    ratios.push(last_ratio);
                }
            }
            holder_norm = holder_norm.max(next.function().holder_norm(cfg.alpha));
            a = next;
            prev_diff = Some(diff);
            if diff < cfg.tol {
                let fixed_point_residual = self
                    .h_with(r, &g_r, a.function())?
                    .function()
                    .sup_distance(a.function());
                let ball_escape = holder_norm > ball_radius;
                let mut warnings = Vec::new();
                if ball_escape {
                    warnings.push(format!(
                        "estimated Hölder norm {holder_norm:e} exceeds the ball radius r^(1+δ) = {ball_radius:e}"
                    ));
                }
                let contraction_ratio = ratios.iter().copied().fold(0.0, f64::max);
                return Ok(Solution {
                    r,
                    a,
                    diagnostics: SolveDiagnostics {
                        iterations: k,
                        contraction_ratios: ratios,
                        contraction_ratio,
                        holder_norm,
                        ball_radius,
                        ball_escape,
                        fixed_point_residual,
                        warnings,
                    },
                });
            }
        }
        Err(BishopError::NoConvergence {
            r,
            iterations: cfg.max_iter,
            last_ratio,
        })
    }

    /// `F₁ = g_r + a`, `F₂ = (κr)^m + i𝒜[Im ℛ(F₁)]`.
    pub fn assemble_disc(&self, r: f64, a: &HoloPerturbation) -> Result<BishopDisc, BishopError> {
        let f1 = self.g_r(r).add(a.function());
        let im = f1.map(|z| Complex64::new(self.germ.remainder().eval(z).im, 0.0));
        let level = (self.map.kappa() * r).powi(self.germ.degree() as i32);
        let f2 = im
            .analytic_completion()?
            .scale(Complex64::new(0.0, 1.0))
            .add_constant(Complex64::new(level, 0.0));
        let residual = attachment_residual(&f1, &f2, &self.germ);
        let sup_norm = f1
            .values()
            .iter()
            .zip(f2.values())
            .fold(0.0f64, |m, (a, b)| {
                m.max((a.norm_sqr() + b.norm_sqr()).sqrt())
            });
        debug_assert!(
            f1.sub(&CircleFunction::constant(f1.len(), f1.mean())?)
                .sup_norm()
                > 0.0
        );
        Ok(BishopDisc {
            r,
            f1_boundary: f1,
            f2_boundary: f2,
            residual,
            sup_norm,
        })
    }

    /// Solves and assembles the disc at `r`.
    pub fn disc(&self, r: f64) -> Result<(Solution, BishopDisc), BishopError> {
        let sol = self.iterate_h(r)?;
        let disc = self.assemble_disc(r, &sol.a)?;
        Ok((sol, disc))
    }

    /// Bisection on solver convergence between a convergent `lo` and a
    /// failing `hi`; returns the largest convergent radius found.
    pub fn empirical_r0(&self, mut lo: f64, mut hi: f64, rel_tol: f64) -> f64 {
        while hi - lo > rel_tol * hi {
            let mid = 0.5 * (lo + hi);
            match self.iterate_h(mid) {
                Ok(_) => lo = mid,
                Err(_) => hi = mid,
            }
        }
        lo
    }

    /// Solves on `steps` equally spaced radii in `[r_min, r_max]`, in
    /// parallel, with finite-difference smoothness diagnostics at interior
    /// radii.
    pub fn disc_family(
        &self,
        r_min: f64,
        r_max: f64,
        steps: usize,
    ) -> Result<DiscFamily, BishopError> {
        if steps < 2 {
            return Err(BishopError::InvalidGrid(
                "at least two radii are needed".into(),
            ));
        }
        if !(r_min > 0.0 && r_min < r_max && r_max < self.max_radius()) {
            return Err(BishopError::InvalidGrid(format!(
                "need 0 < r_min < r_max < {}, got [{r_min}, {r_max}]",
                self.max_radius()
            )));
        }
        let h = (r_max - r_min) / (steps - 1) as f64;
        let r_grid: Vec<f64> = (0..steps).map(|k| r_min + k as f64 * h).collect();

        // Grid radii first, then the half and quarter offsets around each
        // interior radius.
        let mut radii: Vec<f64> = r_grid.clone();
        for &r in &r_grid[1..steps - 1] {
            radii.extend([r - h / 2.0, r + h / 2.0, r - h / 4.0, r + h / 4.0]);
        }
        let solved: Vec<Result<(Solution, BishopDisc), BishopError>> =
            radii.par_iter().map(|&r| self.disc(r)).collect();
        let lookup: BTreeMap<u64, &(Solution, BishopDisc)> = radii
            .iter()
            .zip(&solved)
            .filter_map(|(r, s)| s.as_ref().ok().map(|s| (r.to_bits(), s)))
            .collect();

        let mut records = Vec::with_capacity(steps);
        let mut discs = Vec::new();
        for (&r, result) in r_grid.iter().zip(&solved) {
            match result {
                Ok((sol, disc)) => {
                    let att = verify_attachment(disc, &self.germ);
                    records.push(FamilyRecord {
                        r,
                        summary: Some(DiscSummary::new(sol, &att, disc.sup_norm)),
                        error: None,
                    });
                    discs.push(disc.clone());
                }
                Err(e) => records.push(FamilyRecord {
                    r,
                    summary: None,
                    error: Some(e.to_string()),
                }),
            }
        }

        let a_at = |r: f64| lookup.get(&r.to_bits()).map(|s| s.0.a.function());
        let mut smoothness_diag = Vec::new();
        for k in 1..steps - 1 {
            let (r, below, above) = (r_grid[k], r_grid[k - 1], r_grid[k + 1]);
            let pairs = [
                (below, above, 0.5 * (above - below)),
                (r - h / 2.0, r + h / 2.0, h / 2.0),
                (r - h / 4.0, r + h / 4.0, h / 4.0),
            ];
            let mut quotients = [0.0; 3];
            let mut complete = true;
            for (q, &(lo, hi, step)) in quotients.iter_mut().zip(&pairs) {
                match (a_at(lo), a_at(hi)) {
                    (Some(a), Some(b)) => *q = b.sup_distance(a) / (2.0 * step),
                    _ => complete = false,
                }
            }
            let centre = a_at(r);
            if !complete || centre.is_none() {
                continue;
            }
            let (lo, mid, hi) = (a_at(below).unwrap(), centre.unwrap(), a_at(above).unwrap());
            let second = hi.add(lo).sub(&mid.scale_real(2.0)).sup_norm() / (h * h);
            // Quotients are resolved only to about tol / s.
            let floor = self.config.tol / (h / 4.0);
            let rel = |a: f64, b: f64| {
                if a == b {
                    0.0
                } else {
                    (a - b).abs() / a.max(b).max(floor)
                }
            };
            smoothness_diag.push(SmoothnessEntry {
                r,
                h,
                quotients,
                relative_changes: [
                    rel(quotients[0], quotients[1]),
                    rel(quotients[1], quotients[2]),
                ],
                second_difference: second,
            });
        }

        let first_failure = records.iter().position(|rec| {
            rec.error
                .as_deref()
                .is_some_and(|e| e.starts_with("no convergence"))
        });
        let largest_converged = records
            .iter()
            .filter(|rec| rec.summary.is_some())
            .map(|rec| rec.r)
            .fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.max(r))));
        let empirical_r0 = match first_failure {
            Some(k) if k > 0 && records[k - 1].summary.is_some() => {
                Some(self.empirical_r0(r_grid[k - 1], r_grid[k], 1e-3))
            }
            _ => None,
        };
        Ok(DiscFamily {
            r_grid,
            records,
            discs,
            smoothness_diag,
            largest_converged,
            empirical_r0,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscSummary {
    pub residual: f64,
    pub sup_norm: f64,
    pub a_sup: f64,
    pub contraction_ratio: f64,
    pub iterations: usize,
    pub fixed_point_residual: f64,
    pub holder_norm: f64,
    pub ball_escape: bool,
    pub f1_negative_energy: f64,
    pub f2_negative_energy: f64,
    /// Set when the residual or analyticity certificate fails.
    pub flagged: bool,
}

impl DiscSummary {
    fn new(sol: &Solution, att: &Attachment, sup_norm: f64) -> Self {
        Self {
            residual: att.residual,
            sup_norm,
            a_sup: sol.a.function().sup_norm(),
            contraction_ratio: sol.diagnostics.contraction_ratio,
            iterations: sol.diagnostics.iterations,
            fixed_point_residual: sol.diagnostics.fixed_point_residual,
            holder_norm: sol.diagnostics.holder_norm,
            ball_escape: sol.diagnostics.ball_escape,
            f1_negative_energy: att.f1_negative_energy,
            f2_negative_energy: att.f2_negative_energy,
            flagged: !att.certified(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyRecord {
    pub r: f64,
    pub summary: Option<DiscSummary>,
    pub error: Option<String>,
}

/// Central difference quotients `‖a(r+s) − a(r−s)‖ / 2s` for `s = h, h/2,
/// h/4`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessEntry {
    pub r: f64,
    pub h: f64,
    pub quotients: [f64; 3],
    /// Successive quotient changes relative to the larger quotient, with
    /// denominators floored at `tol / (h/4)`.
    pub relative_changes: [f64; 2],
    /// `‖a(r+h) − 2a(r) + a(r−h)‖ / h²`.
    pub second_difference: f64,
}

#[derive(Clone, Debug)]
pub struct DiscFamily {
    pub r_grid: Vec<f64>,
    pub records: Vec<FamilyRecord>,
    /// Discs of the converged records, in radius order.
    pub discs: Vec<BishopDisc>,
    pub smoothness_diag: Vec<SmoothnessEntry>,
    pub largest_converged: Option<f64>,
    /// Bisected convergence threshold, present when some grid radius failed.
    pub empirical_r0: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySummary {
    pub r_grid: Vec<f64>,
    pub records: Vec<FamilyRecord>,
    pub smoothness_diag: Vec<SmoothnessEntry>,
    pub largest_converged: Option<f64>,
    pub empirical_r0: Option<f64>,
}

impl DiscFamily {
    pub fn summary(&self) -> FamilySummary {
        FamilySummary {
            r_grid: self.r_grid.clone(),
            records: self.records.clone(),
            smoothness_diag: self.smoothness_diag.clone(),
            largest_converged: self.largest_converged,
            empirical_r0: self.empirical_r0,
        }
    }

    /// One row per radius: `r, status, residual, sup_norm, contraction_ratio,
    /// iterations`, then the remaining certificate fields.
    pub fn write_csv(&self, out: impl Write) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "r",
            "status",
            "residual",
            "sup_norm",
            "contraction_ratio",
            "iterations",
            "a_sup",
            "fixed_point_residual",
            "holder_norm",
            "ball_escape",
            "f1_negative_energy",
            "f2_negative_energy",
            "flagged",
        ])?;
        for rec in &self.records {
            match &rec.summary {
                Some(s) => w.serialize((
                    rec.r,
                    "converged",
                    s.residual,
                    s.sup_norm,
                    s.contraction_ratio,
                    s.iterations,
                    s.a_sup,
                    s.fixed_point_residual,
                    s.holder_norm,
                    s.ball_escape,
                    s.f1_negative_energy,
                    s.f2_negative_energy,
                    s.flagged,
                ))?,
                None => {
                    let status = rec.error.clone().unwrap_or_default();
                    let mut row = vec![rec.r.to_string(), status];
                    row.resize(13, String::new());
                    w.write_record(&row)?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

impl DiscFamily {
    /// Boundary samples of every converged disc: `r, theta, re_f1, im_f1,
    /// re_f2, im_f2`.
    pub fn write_boundary_csv(&self, out: impl Write) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["r", "theta", "re_f1", "im_f1", "re_f2", "im_f2"])?;
        for d in &self.discs {
            for (k, (a, b)) in d
                .f1_boundary
                .values()
                .iter()
                .zip(d.f2_boundary.values())
                .enumerate()
            {
                w.serialize((d.r, d.f1_boundary.theta(k), a.re, a.im, b.re, b.im))?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Evidence that no disc family of this kind exists at an index ≤ 0 point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub index: i64,
    /// Angles where the angular profile changes sign.
    pub sign_change_angles: Vec<f64>,
    /// The failure of the level-curve construction.
    pub level_curve_failure: String,
    pub profile_witness_theta: f64,
    pub profile_witness_value: f64,
    pub construction_applicable: bool,
    pub remainder_real: bool,
    /// Real remainder and index ≤ 0: the germ is locally polynomially
    /// convex at the origin.
    pub locally_polynomially_convex: bool,
}

/// Reports why the disc construction has no starting curve.
pub fn nonexistence_probe(germ: &SurfaceGerm) -> Result<ProbeReport, BishopError> {
    let report = index_report_on(germ, INDEX_RADIUS_FRACTION * germ.radius(), DEFAULT_SAMPLES)?;
    let index = report.index();
    if index > 0 {
        return Err(BishopError::IndexPositive { index });
    }
    let (failure, theta, value) = match level_curve(germ.leading(), DEFAULT_SAMPLES) {
        Err(e @ ConformalError::ProfileNotPositive { theta, value }) => {
            (e.to_string(), theta, value)
        }
        Err(e) => return Err(e.into()),
        Ok(_) => unreachable!("a profile with zeros has no positive level curve"),
    };
    let remainder_real = germ.remainder_is_real();
    Ok(ProbeReport {
        index,
        sign_change_angles: report.zeros,
        level_curve_failure: failure,
        profile_witness_theta: theta,
        profile_witness_value: value,
        construction_applicable: false,
        remainder_real,
        locally_polynomially_convex: remainder_real,
    })
}
