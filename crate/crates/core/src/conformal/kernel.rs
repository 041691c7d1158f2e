//! Riemann map of a star-shaped polar region through the Szegő kernel.
//!
//! The Kerzman–Stein equation `(I − A) S_a = conj(H_a)` is discretized by
//! the trapezoid rule in the polar angle `t`. Everything is resolved in `t`,
//! where the curve is smooth, so the result stays accurate even when the
//! boundary correspondence is badly crowded on the `ζ` side.

use std::f64::consts::TAU;

use num_complex::Complex64;

use super::PolarCurve;
use crate::circle::CircleFunction;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Interior map `f = G⁻¹: 𝒟 → 𝔻` sampled on a uniform `t`-grid.
pub(crate) struct KernelSolution {
    pub nodes: usize,
    pub gmres_iterations: usize,
    /// Relative size of the top quarter of the Szegő kernel spectrum.
    pub tail: f64,
    /// `S(0, 0)`.
    pub s00: f64,
    /// `θ(t) − t` where `e^{iθ(t)} = f(z(t))`.
    offset: Trig,
    /// `t ↦ S(z(t), 0)`.
    szego: Trig,
    /// `θ` at the nodes, unwrapped and increasing.
    theta_nodes: Vec<f64>,
}

struct Node {
    z: Complex64,
    tangent: Complex64,
    speed: f64,
}

fn nodes(curve: &dyn PolarCurve, n: usize) -> Vec<Node> {
    (0..n)
        .map(|j| {
            let t = TAU * j as f64 / n as f64;
            let rho = curve.log_rho(t).exp();
            let drho = rho * curve.log_rho_prime(t);
            let e = Complex64::from_polar(1.0, t);
            let zp = (drho + I * rho) * e;
            Node {
                z: rho * e,
                tangent: zp / zp.norm(),
                speed: zp.norm(),
            }
        })
        .collect()
}

/// `y = (I − A·diag(ds)) u` with the Kerzman–Stein kernel
/// `A(z_i, z_j) = H(z_i, z_j) − conj(H(z_j, z_i))`,
/// `H(w, z) = T(z) / (2πi (z − w))`.
///
/// Each pair is visited once: with `d = 1/(z_j − z_i)`,
/// `A_ij = c (T_j d − conj(T_i d))` and `A_ji = −conj(A_ij)`, so the sums
/// split into four accumulations that keep `T_i` out of the inner loop.
fn apply(nodes: &[Node], h: f64, u: &[Complex64]) -> Vec<Complex64> {
    let n = nodes.len();
    let c = 1.0 / (TAU * I);
    let v: Vec<Complex64> = u.iter().zip(nodes).map(|(x, p)| x * p.speed * h).collect();
    let tv: Vec<Complex64> = v.iter().zip(nodes).map(|(x, p)| x * p.tangent).collect();
    // Row sums for i (over j > i) and column sums for j (over i < j).
    let mut col_conj = vec![Complex64::new(0.0, 0.0); n];
    let mut col_plain = vec![Complex64::new(0.0, 0.0); n];
    let mut y = u.to_vec();
    for i in 0..n {
        let zi = nodes[i].z;
        let (vi, tvi) = (v[i], tv[i]);
        let mut row_plain = Complex64::new(0.0, 0.0);
        let mut row_conj = Complex64::new(0.0, 0.0);
        for j in (i + 1)..n {
            let dz = nodes[j].z - zi;
            let s = 1.0 / dz.norm_sqr();
            let d = Complex64::new(dz.re * s, -dz.im * s);
            let dc = d.conj();
            row_plain += tv[j] * d;
            row_conj += v[j] * dc;
            col_conj[j] += vi * dc;
            col_plain[j] += tvi * d;
        }
        // Σ_j A_ij v_j = c (Σ T_j v_j d − conj(T_i) Σ v_j conj(d)).
        y[i] -= c * (row_plain - nodes[i].tangent.conj() * row_conj);
    }
    // Σ_i A_ji v_i = −conj(c) Σ (conj(T_j) conj(d) − T_i d) v_i.
    for j in 0..n {
        y[j] += c.conj() * (nodes[j].tangent.conj() * col_conj[j] - col_plain[j]);
    }
    y
}

/// Restarted GMRES for `op(x) = b`. Returns the solution and iteration count.
pub(crate) fn gmres(
    op: impl Fn(&[Complex64]) -> Vec<Complex64>,
    b: &[Complex64],
    tol: f64,
    restart: usize,
    max_iter: usize,
) -> (Vec<Complex64>, usize, f64) {
    let n = b.len();
    let norm = |v: &[Complex64]| v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let bnorm = norm(b).max(f64::MIN_POSITIVE);
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    let mut total = 0;
    loop {
        let ax = op(&x);
        let r: Vec<Complex64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
        let beta = norm(&r);
        if beta / bnorm < tol || total >= max_iter {
            return (x, total, beta / bnorm);
        }
        let mut basis = vec![r.iter().map(|c| c / beta).collect::<Vec<_>>()];
        let mut hess: Vec<Vec<Complex64>> = Vec::new();
        let mut rot: Vec<(Complex64, Complex64)> = Vec::new();
        let mut g = vec![Complex64::new(beta, 0.0)];
        for k in 0..restart {
            total += 1;
            let mut w = op(&basis[k]);
            let mut col = vec![Complex64::new(0.0, 0.0); k + 2];
            for (j, q) in basis.iter().enumerate() {
                let hij: Complex64 = q.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
                col[j] = hij;
                w.iter_mut().zip(q).for_each(|(a, b)| *a -= hij * b);
            }
            let wn = norm(&w);
            col[k + 1] = Complex64::new(wn, 0.0);
            for (j, &(cs, sn)) in rot.iter().enumerate() {
                let (a, b) = (col[j], col[j + 1]);
                col[j] = cs.conj() * a + sn.conj() * b;
                col[j + 1] = -sn * a + cs * b;
            }
            let (a, b) = (col[k], col[k + 1]);
            let d = (a.norm_sqr() + b.norm_sqr()).sqrt();
            let (cs, sn) = if d == 0.0 {
                (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
            } else {
                (a / d, b / d)
            };
            col[k] = cs.conj() * a + sn.conj() * b;
            col[k + 1] = Complex64::new(0.0, 0.0);
            rot.push((cs, sn));
            let gk = g[k];
            g[k] = cs.conj() * gk;
            g.push(-sn * gk);
            hess.push(col);
            let done = g[k + 1].norm() / bnorm < tol || wn == 0.0 || total >= max_iter;
            if !done {
                basis.push(w.iter().map(|c| c / wn).collect());
            }
            if done || k + 1 == restart {
                // Back substitution on the triangular factor.
                let m = hess.len();
                let mut y = vec![Complex64::new(0.0, 0.0); m];
                for i in (0..m).rev() {
                    let mut s = g[i];
                    for j in (i + 1)..m {
                        s -= hess[j][i] * y[j];
                    }
                    y[i] = s / hess[i][i];
                }
                for (j, yj) in y.iter().enumerate() {
                    x.iter_mut().zip(&basis[j]).for_each(|(a, b)| *a += yj * b);
                }
                break;
            }
        }
    }
}

/// Trigonometric interpolant `Σ_{|k|<n/2} c_k e^{ikt}` evaluated by Horner's
/// rule in `e^{it}` and `e^{-it}`.
struct Trig {
    /// `c_0, c_1, …`
    pos: Vec<Complex64>,
    /// `c_{-1}, c_{-2}, …`
    neg: Vec<Complex64>,
}

impl Trig {
    fn new(values: Vec<Complex64>) -> Self {
        let n = values.len();
        let c = CircleFunction::new(values)
            .expect("power-of-two grid")
            .coeffs();
        let half = (n / 2) as i64;
        Self {
            pos: (0..half).map(|k| c.get(k)).collect(),
            neg: (1..half).map(|k| c.get(-k)).collect(),
        }
    }

    fn eval(&self, t: f64) -> Complex64 {
        let w = Complex64::from_polar(1.0, t);
        let horner = |cs: &[Complex64], w: Complex64| {
            cs.iter()
                .rev()
                .fold(Complex64::new(0.0, 0.0), |acc, c| acc * w + c)
        };
        horner(&self.pos, w) + w.conj() * horner(&self.neg, w.conj())
    }

    /// Value and derivative of the real part.
    fn eval_re_with_derivative(&self, t: f64) -> (f64, f64) {
        let w = Complex64::from_polar(1.0, t);
        let wc = w.conj();
        let zero = Complex64::new(0.0, 0.0);
        let (mut p, mut dp) = (zero, zero);
        for (k, c) in self.pos.iter().enumerate().rev() {
            p = p * w + c;
            dp = dp * w + c * k as f64;
        }
        let (mut q, mut dq) = (zero, zero);
        for (k, c) in self.neg.iter().enumerate().rev() {
            q = q * wc + c;
            dq = dq * wc + c * (k + 1) as f64;
        }
        let value = p + wc * q;
        let deriv = I * (dp - wc * dq);
        (value.re, deriv.re)
    }

    /// Largest coefficient with `|k| ≥ from`, relative to the largest overall.
    fn tail(&self, from: usize) -> f64 {
        let all = self
            .pos
            .iter()
            .chain(&self.neg)
            .fold(0.0f64, |m, c| m.max(c.norm()));
        let hi = self
            .pos
            .iter()
            .skip(from)
            .chain(self.neg.iter().skip(from.saturating_sub(1)));
        hi.fold(0.0f64, |m, c| m.max(c.norm())) / all
    }
}

impl KernelSolution {
    /// Solves on `n` nodes.
    pub fn solve(curve: &dyn PolarCurve, n: usize) -> Result<Self, f64> {
        let pts = nodes(curve, n);
        let h = TAU / n as f64;
        let rhs: Vec<Complex64> = pts
            .iter()
            .map(|p| (p.tangent / (TAU * I * p.z)).conj())
            .collect();
        let (s, iters, resid) = gmres(|u| apply(&pts, h, u), &rhs, 1e-14, 80, 800);
        if !(resid < 1e-11) {
            return Err(resid);
        }
        let s00: f64 = s
            .iter()
            .zip(&pts)
            .map(|(v, p)| v.norm_sqr() * p.speed)
            .sum::<f64>()
            * h;

        let mut theta_nodes = Vec::with_capacity(n);
        let mut prev = 0.0;
        for (j, (v, p)) in s.iter().zip(&pts).enumerate() {
            let raw = (-I * v * v * p.tangent).arg();
            let th = if j == 0 {
                raw
            } else {
                prev + (raw - prev + std::f64::consts::PI).rem_euclid(TAU) - std::f64::consts::PI
            };
            theta_nodes.push(th);
            prev = th;
        }
        let offset = Trig::new(
            theta_nodes
                .iter()
                .enumerate()
                .map(|(j, th)| Complex64::new(th - h * j as f64, 0.0))
                .collect(),
        );
        let szego = Trig::new(s);
        let tail = szego.tail(3 * n / 8);
        Ok(Self {
            nodes: n,
            gmres_iterations: iters,
            tail,
            s00,
            offset,
            szego,
            theta_nodes,
        })
    }

    /// `t` with `θ(t) = target (mod 2π)`.
    pub fn invert(&self, target: f64) -> f64 {
        let n = self.nodes;
        let h = TAU / n as f64;
        let base = self.theta_nodes[0];
        let x = base + (target - base).rem_euclid(TAU);
        let j = self.theta_nodes.partition_point(|&th| th <= x).max(1) - 1;
        let (mut lo, mut hi) = (h * j as f64, h * (j + 1) as f64);
        let residual = |t: f64| {
            let (d, dd) = self.offset.eval_re_with_derivative(t);
            (t + d - x, 1.0 + dd)
        };
        let mut t = 0.5 * (lo + hi);
        for _ in 0..100 {
            let (f, df) = residual(t);
            if f == 0.0 {
                break;
            }
            if f > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let newton = t - f / df;
            let next = if df > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (next - t).abs() < 1e-15 * (1.0 + t.abs()) || hi - lo < 1e-15 {
                t = next;
                break;
            }
            t = next;
        }
        t
    }

    /// `G̃′` at the boundary point `z(t)`: `S(0,0) / (2π S(z(t),0)²)`.
    pub fn g_deriv(&self, t: f64) -> Complex64 {
        let s = self.szego.eval(t);
        self.s00 / (TAU * s * s)
    }

    /// `G′(0) = 1 / (2π S(0,0))`.
    pub fn g_prime_at_0(&self) -> f64 {
        1.0 / (TAU * self.s00)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gmres_solves_small_system() {
        let a = [
            [
                Complex64::new(4.0, 1.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.5),
            ],
            [
                Complex64::new(0.0, -1.0),
                Complex64::new(3.0, 0.0),
                Complex64::new(1.0, 1.0),
            ],
            [
                Complex64::new(0.5, 0.0),
                Complex64::new(0.0, 2.0),
                Complex64::new(5.0, -1.0),
            ],
        ];
        let op = |x: &[Complex64]| -> Vec<Complex64> {
            a.iter()
                .map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum())
                .collect()
        };
        let x_true = vec![
            Complex64::new(1.0, 2.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.5, -0.5),
        ];
        let b = op(&x_true);
        let (x, _, res) = gmres(op, &b, 1e-14, 2, 100);
        assert!(res < 1e-13);
        for (p, q) in x.iter().zip(&x_true) {
            assert!((p - q).norm() < 1e-12);
        }
    }
}
