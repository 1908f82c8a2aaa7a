//! Weierstrass elliptic functions and the normalized lattice theta function.
//!
//! All evaluations go through the Jacobi `θ₁` q-series in a basis reduced to
//! the modular fundamental domain, so that `|q| ≤ e^{-π√3/2}` and the series
//! converge after a handful of terms.

use crate::lattice::{reduce_to_fundamental, ConformalClass, Lattice};
use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const SERIES_REL_TOL: f64 = 1e-17;
pub const POLE_GUARD: f64 = 1e-12;
pub const POLE_WARNING: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EllipticError {
    #[error("half-periods must satisfy Im(omega'/omega) > 0, got ratio {0}")]
    Orientation(Complex64),
    #[error("evaluation point {0} lies within the pole guard of a lattice point")]
    Pole(Complex64),
    #[error("half-period map values need rectangular data (omega real, omega' imaginary)")]
    NotRectangular,
}

/// Jacobi `θ₁(v | τ)` with period-one convention, and its first three `v`-derivatives.
pub fn theta1_derivs(v: Complex64, tau: Complex64) -> [Complex64; 4] {
    let mut out = [Complex64::new(0.0, 0.0); 4];
    for n in 0..200usize {
        let h = n as f64 + 0.5;
        let m = (2 * n + 1) as f64;
        let sign = if n % 2 == 0 { 2.0 } else { -2.0 };
        let w = (I * PI * tau * h * h).exp() * sign;
        let arg = v * (m * PI);
        let (s, c) = (arg.sin(), arg.cos());
        let k = m * PI;
        let terms = [w * s, w * c * k, -w * s * k * k, -w * c * k * k * k];
        let mut small = n >= 2;
        for (o, t) in out.iter_mut().zip(terms.iter()) {
            *o += t;
            if t.norm() > SERIES_REL_TOL * o.norm().max(1e-300) {
                small = false;
            }
        }
        if small {
            break;
        }
    }
    out
}

/// Half-periods with quasi-periods and invariants, evaluated through a reduced basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticData {
    pub omega: Complex64,
    pub omega_prime: Complex64,
    pub eta: Complex64,
    pub eta_prime: Complex64,
    pub e1: Complex64,
    pub e2: Complex64,
    pub e3: Complex64,
    pub g2: Complex64,
    pub g3: Complex64,
    reduced: ReducedBasis,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct ReducedBasis {
    omega: Complex64,
    omega_prime: Complex64,
    tau: Complex64,
    eta: Complex64,
    eta_prime: Complex64,
    theta_prime0: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WpValues {
    pub wp: Complex64,
    pub wp_prime: Complex64,
    pub zeta: Complex64,
}

impl ReducedBasis {
    fn new(omega: Complex64, omega_prime: Complex64) -> Self {
        let tau = omega_prime / omega;
        let th0 = theta1_derivs(Complex64::new(0.0, 0.0), tau);
        let eta = -th0[3] / (th0[1] * omega * 12.0);
        let mut basis =
            ReducedBasis { omega, omega_prime, tau, eta, eta_prime: Complex64::new(0.0, 0.0), theta_prime0: th0[1] };
        let th = basis.local(omega_prime);
        basis.eta_prime = eta * omega_prime / omega + th[1] / (th[0] * omega * 2.0);
        basis
    }

    fn local(&self, z: Complex64) -> [Complex64; 4] {
        theta1_derivs(z / (self.omega * 2.0), self.tau)
    }

    /// Splits `z = z₀ + 2mω + 2nω′` with `z₀` in the centered cell.
    fn split(&self, z: Complex64) -> (Complex64, f64, f64) {
        let u = z / (self.omega * 2.0);
        let y = u.im / self.tau.im;
        let x = u.re - y * self.tau.re;
        let (m, n) = (x.round(), y.round());
        (z - self.omega * (2.0 * m) - self.omega_prime * (2.0 * n), m, n)
    }

    fn eval(&self, z: Complex64) -> Result<WpValues, EllipticError> {
        let (z0, m, n) = self.split(z);
        if z0.norm() < POLE_GUARD * self.omega.norm() {
            return Err(EllipticError::Pole(z));
        }
        let th = self.local(z0);
        let a = 1.0 / (self.omega * 2.0);
        let l1 = th[1] / th[0];
        let l2 = th[2] / th[0];
        let l3 = th[3] / th[0];
        let zeta0 = self.eta * z0 / self.omega + a * l1;
        let wp = -self.eta / self.omega - a * a * (l2 - l1 * l1);
        let wp_prime = -a * a * a * (l3 - l2 * l1 * 3.0 + l1 * l1 * l1 * 2.0);
        let zeta = zeta0 + self.eta * (2.0 * m) + self.eta_prime * (2.0 * n);
        Ok(WpValues { wp, wp_prime, zeta })
    }

    fn sigma(&self, z: Complex64) -> (Complex64, Complex64) {
        let (z0, m, n) = self.split(z);
        let th = self.local(z0);
        let c = self.omega * 2.0 / self.theta_prime0;
        let gauss = (self.eta * z0 * z0 / (self.omega * 2.0)).exp();
        let s0 = c * gauss * th[0];
        let ds0 = c * gauss * (self.eta * z0 / self.omega * th[0] + th[1] / (self.omega * 2.0));
        if m == 0.0 && n == 0.0 {
            return (s0, ds0);
        }
        let big_omega = self.omega * m + self.omega_prime * n;
        let h = self.eta * m + self.eta_prime * n;
        let parity = (m + n + m * n).rem_euclid(2.0);
        let sign = if parity == 0.0 { 1.0 } else { -1.0 };
        let f = (h * 2.0 * (z0 + big_omega)).exp() * sign;
        (f * s0, f * (h * 2.0 * s0 + ds0))
    }
}

pub fn elliptic_from_periods(omega: Complex64, omega_prime: Complex64) -> Result<EllipticData, EllipticError> {
    let ratio = omega_prime / omega;
    if !(ratio.im > 0.0) || !ratio.re.is_finite() {
        return Err(EllipticError::Orientation(ratio));
    }
    let (_, word) = reduce_to_fundamental(ConformalClass { tau: ratio });
    let [a, b, c, d] = word.matrix.map(|x| x as f64);
    let omega_prime_r = omega_prime * a + omega * b;
    let omega_r = omega_prime * c + omega * d;
    let reduced = ReducedBasis::new(omega_r, omega_prime_r);
    // (η′, η) transform with the same unimodular matrix as (ω′, ω)
    let eta_prime = reduced.eta_prime * d - reduced.eta * b;
    let eta = -reduced.eta_prime * c + reduced.eta * a;
    let mut data = EllipticData {
        omega,
        omega_prime,
        eta,
        eta_prime,
        e1: Complex64::new(0.0, 0.0),
        e2: Complex64::new(0.0, 0.0),
        e3: Complex64::new(0.0, 0.0),
        g2: Complex64::new(0.0, 0.0),
        g3: Complex64::new(0.0, 0.0),
        reduced,
    };
    data.e1 = reduced.eval(omega)?.wp;
    data.e2 = reduced.eval(omega + omega_prime)?.wp;
    data.e3 = reduced.eval(omega_prime)?.wp;
    data.g2 = (data.e1 * data.e1 + data.e2 * data.e2 + data.e3 * data.e3) * 2.0;
    data.g3 = data.e1 * data.e2 * data.e3 * 4.0;
    Ok(data)
}

impl EllipticData {
    pub fn tau(&self) -> Complex64 {
        self.omega_prime / self.omega
    }

    pub fn legendre_defect(&self) -> Complex64 {
        self.eta * self.omega_prime - self.eta_prime * self.omega - I * (PI / 2.0)
    }

    /// Distance from `z` to the nearest lattice point, in units of `|ω|` of the reduced basis.
    pub fn pole_distance(&self, z: Complex64) -> f64 {
        let (z0, _, _) = self.reduced.split(z);
        z0.norm() / self.reduced.omega.norm()
    }

    pub fn wp_eval(&self, z: Complex64) -> Result<WpValues, EllipticError> {
        self.reduced.eval(z)
    }

    pub fn wp(&self, z: Complex64) -> Result<Complex64, EllipticError> {
        Ok(self.reduced.eval(z)?.wp)
    }

    pub fn zeta(&self, z: Complex64) -> Result<Complex64, EllipticError> {
        Ok(self.reduced.eval(z)?.zeta)
    }

    /// Weierstrass `σ(z)` and `σ′(z)`.
    pub fn sigma(&self, z: Complex64) -> (Complex64, Complex64) {
        self.reduced.sigma(z)
    }

    pub fn is_rectangular(&self, tol: f64) -> bool {
        self.omega.im.abs() <= tol * self.omega.norm()
            && self.omega.re > 0.0
            && self.omega_prime.re.abs() <= tol * self.omega_prime.norm()
            && self.omega_prime.im > 0.0
    }
}

pub fn wp_eval(data: &EllipticData, z: Complex64) -> Result<WpValues, EllipticError> {
    data.wp_eval(z)
}

/// Lattice theta function `θ_Δ` normalized by `θ_Δ(z) = z + O(z³)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaParams {
    pub lattice: Lattice,
    pub tau_theta: Complex64,
    elliptic: EllipticData,
}

impl ThetaParams {
    pub fn new(lattice: &Lattice) -> Result<Self, EllipticError> {
        let (a, b) = lattice.complex_gens();
        let elliptic = elliptic_from_periods(a / 2.0, b / 2.0)?;
        Ok(ThetaParams { lattice: *lattice, tau_theta: b / a, elliptic })
    }

    pub fn elliptic(&self) -> &EllipticData {
        &self.elliptic
    }

    /// `θ_Δ(z)` and its derivative.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let e = &self.elliptic;
        let (s, ds) = e.sigma(z);
        let c = e.eta / (e.omega * 2.0);
        let gauss = (-c * z * z).exp();
        (s * gauss, gauss * (ds - s * c * z * 2.0))
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.eval_with_derivative(z).0
    }
}

pub fn theta_delta_eval(params: &ThetaParams, z: Complex64) -> Complex64 {
    params.eval(z)
}

/// Values of `−℘′/(℘ − e₁)` and `℘` at the quarter points of a rectangular lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPeriodMapValues {
    /// `√(2e₁² + e₂e₃)`.
    pub s: f64,
    /// Closed-form quotient at `ω/2`, `−ω/2`, `ω/2 + ω′`, `−ω/2 + ω′`.
    pub closed: [f64; 4],
    /// Directly evaluated quotient at the same points.
    pub direct: [Complex64; 4],
    /// Directly evaluated `℘` at the same points.
    pub wp: [Complex64; 4],
}

pub fn half_period_map_values(data: &EllipticData) -> Result<HalfPeriodMapValues, EllipticError> {
    if !data.is_rectangular(1e-12) {
        return Err(EllipticError::NotRectangular);
    }
    let (e1, e2, e3) = (data.e1.re, data.e2.re, data.e3.re);
    let s = (2.0 * e1 * e1 + e2 * e3).sqrt();
    let upper = 2.0 * (3.0 * e1 + 2.0 * s).sqrt();
    let lower = 2.0 * (3.0 * e1 - 2.0 * s).max(0.0).sqrt();
    let pts = [
        data.omega / 2.0,
        -data.omega / 2.0,
        data.omega / 2.0 + data.omega_prime,
        -data.omega / 2.0 + data.omega_prime,
    ];
    let mut direct = [Complex64::new(0.0, 0.0); 4];
    let mut wp = [Complex64::new(0.0, 0.0); 4];
    let mut closed = [0.0; 4];
    for (i, &p) in pts.iter().enumerate() {
        let v = data.wp_eval(p)?;
        wp[i] = v.wp;
        direct[i] = -v.wp_prime / (v.wp - data.e1);
        let mag = if i < 2 { upper } else { lower };
        closed[i] = if direct[i].re >= 0.0 { mag } else { -mag };
    }
    Ok(HalfPeriodMapValues { s, closed, direct, wp })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// `η = π² E₂(τ) / (12 ω)` with the Eisenstein series in `q² = e^{2πiτ}`.
    fn eta_by_eisenstein(omega: Complex64, tau: Complex64) -> Complex64 {
        let q2 = (I * 2.0 * PI * tau).exp();
        let mut e2 = c(1.0, 0.0);
        let mut qn = c(1.0, 0.0);
        for n in 1..400 {
            qn *= q2;
            let t = qn * n as f64 / (c(1.0, 0.0) - qn) * 24.0;
            e2 -= t;
            if t.norm() < 1e-18 {
                break;
            }
        }
        e2 * PI * PI / (omega * 12.0)
    }

    #[test]
    fn lemniscatic_case() {
        let d = elliptic_from_periods(c(0.5, 0.0), c(0.0, 0.5)).unwrap();
        assert!(d.e2.norm() < 1e-13);
        assert!((d.e3 + d.e1).norm() < 1e-12);
        assert!(d.g3.norm() < 1e-12);
        assert!(d.legendre_defect().norm() < 1e-13);
    }

    #[test]
    fn eta_matches_eisenstein() {
        for (w, wp) in [(c(0.5, 0.0), c(0.1, 0.7)), (c(1.0, 0.2), c(-0.3, 1.4)), (c(0.7, 0.0), c(0.0, 2.5))] {
            let d = elliptic_from_periods(w, wp).unwrap();
            let oracle = eta_by_eisenstein(w, wp / w);
            assert!((d.eta - oracle).norm() < 1e-10 * oracle.norm().max(1.0), "{} vs {}", d.eta, oracle);
        }
    }

    #[test]
    fn thin_rectangle_is_accurate() {
        let d = elliptic_from_periods(c(0.5, 0.0), c(0.0, 0.025)).unwrap();
        assert!(d.legendre_defect().norm() < 1e-11);
        let z = c(0.13, 0.007);
        let v = d.wp_eval(z).unwrap();
        let res = v.wp_prime * v.wp_prime - (v.wp * v.wp * v.wp * 4.0 - d.g2 * v.wp - d.g3);
        assert!(res.norm() < 1e-10 * (v.wp.norm().powi(3) + 1.0));
    }

    #[test]
    fn half_period_values_and_quasi_periodicity() {
        let d = elliptic_from_periods(c(0.6, 0.1), c(0.2, 0.9)).unwrap();
        let z = c(0.21, 0.33);
        let a = d.wp_eval(z).unwrap();
        let b = d.wp_eval(z + d.omega * 2.0).unwrap();
        assert!((a.wp - b.wp).norm() < 1e-10);
        assert!((b.zeta - a.zeta - d.eta * 2.0).norm() < 1e-10);
        let m = d.wp_eval(-z).unwrap();
        assert!((m.wp - a.wp).norm() < 1e-12 && (m.zeta + a.zeta).norm() < 1e-12);
    }

    #[test]
    fn pole_is_rejected() {
        let d = elliptic_from_periods(c(0.5, 0.0), c(0.0, 0.5)).unwrap();
        assert!(matches!(d.wp_eval(c(1.0, 1.0)), Err(EllipticError::Pole(_))));
        assert!(elliptic_from_periods(c(0.0, 0.5), c(0.5, 0.0)).is_err());
    }

    #[test]
    fn sigma_derivative_at_origin() {
        let d = elliptic_from_periods(c(0.5, 0.0), c(0.3, 0.8)).unwrap();
        let (s, ds) = d.sigma(c(0.0, 0.0));
        assert!(s.norm() < 1e-16 && (ds - 1.0).norm() < 1e-13);
    }

    #[test]
    fn theta_delta_normalization() {
        let lat = crate::lattice::make_lattice([1.0, 0.0], [0.3, 1.2]).unwrap();
        let th = ThetaParams::new(&lat).unwrap();
        let (v, dv) = th.eval_with_derivative(c(0.0, 0.0));
        assert!(v.norm() < 1e-15 && (dv - 1.0).norm() < 1e-12);
        let z = c(7e-4, -3e-4);
        assert!((th.eval(z) - z).norm() < 10.0 * z.norm().powi(3));
        assert!((th.eval(-z) + th.eval(z)).norm() < 1e-16);
    }

    #[test]
    fn quarter_point_closed_forms() {
        let d = elliptic_from_periods(c(0.5, 0.0), c(0.0, 0.8)).unwrap();
        let h = half_period_map_values(&d).unwrap();
        for i in 0..4 {
            assert!((h.direct[i] - h.closed[i]).norm() < 1e-9, "{i}: {} {}", h.direct[i], h.closed[i]);
        }
        assert!((h.wp[0].re - d.e1.re - h.s).abs() < 1e-9);
        assert!((h.wp[2].re - d.e1.re + h.s).abs() < 1e-9);
        let skew = elliptic_from_periods(c(0.5, 0.0), c(0.1, 0.8)).unwrap();
        assert!(half_period_map_values(&skew).is_err());
    }
}
