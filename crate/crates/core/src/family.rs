//! Explicit minimizer families: genus-0 circles, the genus-1 Weierstrass family,
//! the disconnected curve and the lower bound over conformal classes.

use crate::elliptic::{elliptic_from_periods, EllipticData, EllipticError};
use crate::lattice::{
    case_for, half_period_sublattice, make_lattice, shortest_dual_vectors, tau_sublattice_map, ConformalClass,
    Genus, HalfPeriodClass, Lattice, LatticeError,
};
use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FamilyError {
    #[error(transparent)]
    Elliptic(#[from] EllipticError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("z1 = {0} is a degenerate point of the family parametrization")]
    Degenerate(Complex64),
    #[error("W is not strictly decreasing: W({t0}) = {w0}, W({t1}) = {w1}")]
    NonMonotone { t0: f64, w0: f64, t1: f64, w1: f64 },
    #[error("t-grid must be positive and strictly increasing")]
    BadGrid,
    #[error("root finder did not reach tau' = {target} (residual {residual:.3e})")]
    NoConvergence { target: Complex64, residual: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Genus0Curve {
    /// Constant `c` of the circle `g(k,k) = c`.
    pub c: f64,
    pub willmore: f64,
    /// Shortest nonzero dual vectors in `(n₁, n₂)` coordinates, up to sign.
    pub minimizers: Vec<(i64, i64)>,
}

/// Genus-0 curve `g(k,k) = g(κ*,κ*)/4` with `κ*` a shortest nonzero dual vector.
pub fn genus0_min_curve(lat: &Lattice) -> Genus0Curve {
    let (len2, all) = shortest_dual_vectors(lat);
    let minimizers = all.into_iter().filter(|&(a, b)| a > 0 || (a == 0 && b > 0)).collect();
    let c = len2 / 4.0;
    Genus0Curve { c, willmore: 4.0 * PI * PI * lat.vol() * c, minimizers }
}

/// A point of the genus-1 family on a rectangular period lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Genus1Point {
    pub elliptic: EllipticData,
    pub z1: Complex64,
    pub h_hat: i64,
    pub c_check: i64,
    pub n: i64,
}

impl Genus1Point {
    /// `ω = ½`, `ω′ = it/2`, `z1 = ω/2 + sω′`, labels `Ĥ = Č = 1`, `N = 0`.
    pub fn rectangular(t: f64, s: f64) -> Result<Self, FamilyError> {
        let omega = Complex64::new(0.5, 0.0);
        let omega_prime = Complex64::new(0.0, 0.5 * t);
        let elliptic = elliptic_from_periods(omega, omega_prime)?;
        Ok(Genus1Point { elliptic, z1: omega / 2.0 + omega_prime * s, h_hat: 1, c_check: 1, n: 0 })
    }

    pub fn with_labels(mut self, h_hat: i64, c_check: i64, n: i64) -> Self {
        self.h_hat = h_hat;
        self.c_check = c_check;
        self.n = n;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Genus1Value {
    pub alpha: f64,
    pub beta: f64,
    pub tau: Complex64,
    /// Reduction of `tau` to the fundamental domain.
    pub tau_reduced: Complex64,
    pub willmore: f64,
    /// Largest imaginary part dropped from quantities that are real on the segment.
    pub imag_defect: f64,
}

pub fn genus1_family_point(p: &Genus1Point) -> Result<Genus1Value, FamilyError> {
    let d = &p.elliptic;
    let (h, c) = (p.h_hat as f64, p.c_check as f64);
    let at = d.wp_eval(p.z1)?;
    let shifted = d.wp_eval(p.z1 + d.omega)?;
    let denom = at.wp - d.e1;
    if at.wp_prime.norm() < 1e-12 * (1.0 + denom.norm()) || denom.norm() < 1e-14 {
        return Err(FamilyError::Degenerate(p.z1));
    }
    let alpha = -h * denom / at.wp_prime;
    let i = Complex64::i();
    let inner = 2.0 * d.eta * p.z1 - d.omega * (at.zeta + shifted.zeta - d.eta);
    let beta = -(c / (h * PI * i)) * inner + p.n as f64;
    let im_tau = c * d.omega / (2.0 * PI * alpha);
    let w = 8.0 * PI * alpha * c * (d.eta + d.e1 * d.omega);
    let imag_defect = alpha.im.abs().max(beta.im.abs()).max(im_tau.im.abs()).max(w.im.abs());
    let tau = Complex64::new(beta.re, im_tau.re);
    if !(tau.im > 0.0) {
        return Err(FamilyError::Degenerate(p.z1));
    }
    let (reduced, _) = crate::lattice::reduce_to_fundamental(ConformalClass { tau });
    Ok(Genus1Value {
        alpha: alpha.re,
        beta: beta.re,
        tau,
        tau_reduced: reduced.tau,
        willmore: w.re,
        imag_defect,
    })
}

/// `W(ω/2) = 4π(η + e₁ω)/√(3e₁ + 2s)` with `s = √(2e₁² + e₂e₃)`, for `Ĥ = Č = 1`.
pub fn closed_form_w(d: &EllipticData) -> f64 {
    let (e1, e2, e3) = (d.e1.re, d.e2.re, d.e3.re);
    let s = (2.0 * e1 * e1 + e2 * e3).sqrt();
    4.0 * PI * (d.eta.re + e1 * d.omega.re) / (3.0 * e1 + 2.0 * s).sqrt()
}

/// `θ₂`, `θ₃ − 1`, `θ₄ − 1` and `E₂ − 1` at a real nome `0 ≤ q < 1`.
fn theta_constants(q: f64) -> [f64; 4] {
    let (mut t2, mut t3, mut t4, mut e2) = (0.0, 0.0, 0.0, 0.0);
    for n in 0..400i32 {
        let h = n as f64 + 0.5;
        let a = q.powf(h * h);
        t2 += 2.0 * a;
        if n > 0 {
            let b = q.powi(n * n);
            t3 += 2.0 * b;
            t4 += if n % 2 == 0 { 2.0 * b } else { -2.0 * b };
            let q2n = q.powi(2 * n);
            e2 += n as f64 * q2n / (1.0 - q2n);
        }
        if a < 1e-18 * t2 && (n as f64) * q.powi(2 * n) < 1e-18 {
            break;
        }
    }
    [t2, t3, t4, -24.0 * e2]
}

/// `W = limit + offset`, with the offset resolved below the spacing of doubles near the limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenterEnergy {
    pub t: f64,
    /// `π²` for `t ≥ 1`, `4π` for `t < 1`.
    pub limit: f64,
    pub offset: f64,
}

impl CenterEnergy {
    pub fn value(&self) -> f64 {
        self.limit + self.offset
    }

    /// Strict order of the energies, exact in the offsets on a common branch.
    pub fn less_than(&self, other: &CenterEnergy) -> bool {
        if self.limit == other.limit {
            self.offset < other.offset
        } else {
            self.value() < other.value()
        }
    }
}

/// `W(t)` at `z1 = ω/2` from theta constants, free of the cancellation in `℘(z1) − e₁`.
///
/// For `t ≥ 1`, `W = (2π²/3)(E₂ + θ₃⁴ + θ₄⁴)/(θ₃² + θ₄²)` at `q = e^{−πt}`; for `t < 1`,
/// `W = 4π(1 − (π/6t)(E₂ − θ₂⁴ − θ₃⁴))/(θ₂² + θ₃²)` at the dual nome `e^{−π/t}`.
pub fn center_energy(t: f64) -> Result<CenterEnergy, FamilyError> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(FamilyError::BadGrid);
    }
    if t >= 1.0 {
        let q = (-PI * t).exp();
        let [_, t3, t4, e2] = theta_constants(q);
        let [_, t3sq, _, _] = theta_constants(q * q);
        // θ₃² − 1, θ₄² − 1 and their sum 2(θ₃(q²)² − 1)
        let x = t3 * (2.0 + t3);
        let y = t4 * (2.0 + t4);
        let sum = 2.0 * t3sq * (2.0 + t3sq);
        let num = e2 + 0.5 * sum + x * x + y * y;
        Ok(CenterEnergy { t, limit: PI * PI, offset: 2.0 * PI * PI / 3.0 * num / (2.0 + sum) })
    } else {
        let [t2, t3, _, e2] = theta_constants((-PI / t).exp());
        let a = t2 * t2;
        let b = t3 * (2.0 + t3);
        let d = e2 - a * a - b * (2.0 + b);
        let deficit = 4.0 * PI * ((a + b) + PI / (6.0 * t) * d) / (1.0 + a + b);
        Ok(CenterEnergy { t, limit: 4.0 * PI, offset: -deficit })
    }
}

/// `W(t)` at `z1 = ω/2` for `ω′/ω = it`.
pub fn willmore_at_center(t: f64) -> Result<f64, FamilyError> {
    Ok(center_energy(t)?.value())
}

/// Energies along an increasing grid, checked to be strictly decreasing.
pub fn monotone_sweep(t_grid: &[f64]) -> Result<Vec<CenterEnergy>, FamilyError> {
    if t_grid.iter().any(|&t| !(t > 0.0) || !t.is_finite()) || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(FamilyError::BadGrid);
    }
    let mut out: Vec<CenterEnergy> = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let e = center_energy(t)?;
        if let Some(prev) = out.last() {
            if !e.less_than(prev) {
                return Err(FamilyError::NonMonotone { t0: prev.t, w0: prev.value(), t1: t, w1: e.value() });
            }
        }
        out.push(e);
    }
    Ok(out)
}

/// The curve `z ↦ (x‑p(z), y‑p(z))` with `2ω = κ̂₁ + iκ̂₂`, `2ω′ = κ̌₁ + iκ̌₂`.
#[derive(Debug, Clone)]
pub struct DisconnectedCurve {
    pub lattice: Lattice,
    pub elliptic: EllipticData,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPeriodValue {
    pub z: Complex64,
    pub xp: Complex64,
    pub yp: Complex64,
}

impl DisconnectedCurve {
    pub fn new(lat: &Lattice) -> Result<Self, FamilyError> {
        let (kh, kc) = lat.dual();
        let omega = Complex64::new(kh[0], kh[1]) / 2.0;
        let omega_prime = Complex64::new(kc[0], kc[1]) / 2.0;
        Ok(DisconnectedCurve { lattice: *lat, elliptic: elliptic_from_periods(omega, omega_prime)? })
    }

    /// `x‑p(z) = i(ω′ζ(z) − η′z)/π`.
    pub fn xp(&self, z: Complex64) -> Result<Complex64, FamilyError> {
        let d = &self.elliptic;
        Ok(Complex64::i() * (d.omega_prime * d.zeta(z)? - d.eta_prime * z) / PI)
    }

    /// `y‑p(z) = −i(ωζ(z) − ηz)/π`.
    pub fn yp(&self, z: Complex64) -> Result<Complex64, FamilyError> {
        let d = &self.elliptic;
        Ok(-Complex64::i() * (d.omega * d.zeta(z)? - d.eta * z) / PI)
    }

    pub fn momentum(&self, z: Complex64) -> Result<[Complex64; 2], FamilyError> {
        Ok(self.lattice.momentum(self.xp(z)?, self.yp(z)?))
    }

    /// Values at `ω`, `ω′`, `ω + ω′`.
    pub fn half_period_table(&self) -> Result<[HalfPeriodValue; 3], FamilyError> {
        let d = &self.elliptic;
        let mut out = [HalfPeriodValue { z: d.omega, xp: Complex64::default(), yp: Complex64::default() }; 3];
        for (slot, z) in out.iter_mut().zip([d.omega, d.omega_prime, d.omega + d.omega_prime]) {
            *slot = HalfPeriodValue { z, xp: self.xp(z)?, yp: self.yp(z)? };
        }
        Ok(out)
    }

    /// `k_j = a_j ζ + b_j z`; returns `([a₁, a₂], [b₁, b₂])`.
    pub fn momentum_coefficients(&self) -> ([Complex64; 2], [Complex64; 2]) {
        let d = &self.elliptic;
        let (kh, kc) = self.lattice.dual();
        let i = Complex64::i();
        let a = [0, 1].map(|j| i / PI * (d.omega_prime * kh[j] - d.omega * kc[j]));
        let b = [0, 1].map(|j| -i / PI * (d.eta_prime * kh[j] - d.eta * kc[j]));
        (a, b)
    }

    /// First integral per sheet, `8π²i·vol·(a₁b₂ − b₁a₂)`.
    pub fn willmore(&self) -> f64 {
        let (a, b) = self.momentum_coefficients();
        let v = Complex64::i() * 8.0 * PI * PI * self.lattice.vol() * (a[0] * b[1] - b[0] * a[1]);
        v.re
    }
}

pub fn disconnected_curve_functions(lat: &Lattice) -> Result<DisconnectedCurve, FamilyError> {
    DisconnectedCurve::new(lat)
}

#[derive(Debug, Clone, PartialEq)]
pub enum ClassSource {
    /// Circle `g(k,k) = c` on the sublattice.
    Genus0 { c: f64 },
    /// Genus-1 family point `(t, s)` with `ω′/ω = it`, `z1 = ω/2 + sω′`.
    Genus1 { t: f64, s: f64, residual: f64 },
    /// Mapped to genus two; no value is computed.
    Genus2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassBound {
    pub class: HalfPeriodClass,
    pub case: &'static str,
    pub tau_prime: Complex64,
    pub source: ClassSource,
    /// `2 ×` the sublattice value.
    pub willmore: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundPoint {
    pub tau: ConformalClass,
    pub classes: Vec<ClassBound>,
    pub w_min: f64,
}

impl BoundPoint {
    pub fn value(&self, class: HalfPeriodClass) -> Option<f64> {
        self.classes.iter().find(|c| c.class == class).and_then(|c| c.willmore)
    }
}

const ROOT_TOL: f64 = 1e-11;

/// `(t, s)` with family `τ(t, s) = target`.
pub fn solve_genus1_tau(target: Complex64) -> Result<(f64, f64, f64), FamilyError> {
    let eval = |lt: f64, s: f64| -> Option<Complex64> {
        let p = Genus1Point::rectangular(lt.exp(), s).ok()?;
        genus1_family_point(&p).ok().map(|v| v.tau - target)
    };
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..=30 {
        let lt = -3.5 + 7.0 * i as f64 / 30.0;
        for j in 0..=20 {
            let s = -0.5 + j as f64 / 20.0;
            if let Some(r) = eval(lt, s) {
                if r.norm() < best.0 {
                    best = (r.norm(), lt, s);
                }
            }
        }
    }
    let (mut res, mut lt, mut s) = best;
    let h = 1e-6;
    for _ in 0..100 {
        if res < ROOT_TOL {
            break;
        }
        let f0 = eval(lt, s).ok_or(FamilyError::NoConvergence { target, residual: res })?;
        let (Some(fa), Some(fb)) = (eval(lt + h, s), eval(lt, s + h)) else {
            return Err(FamilyError::NoConvergence { target, residual: res });
        };
        let (da, db) = ((fa - f0) / h, (fb - f0) / h);
        let det = da.re * db.im - db.re * da.im;
        if det.abs() < 1e-300 {
            return Err(FamilyError::NoConvergence { target, residual: res });
        }
        let dlt = -(db.im * f0.re - db.re * f0.im) / det;
        let ds = -(-da.im * f0.re + da.re * f0.im) / det;
        let mut step = 1.0;
        loop {
            if let Some(r) = eval(lt + step * dlt, s + step * ds) {
                if r.norm() < res {
                    lt += step * dlt;
                    s += step * ds;
                    res = r.norm();
                    break;
                }
            }
            step *= 0.5;
            if step < 1e-8 {
                return Err(FamilyError::NoConvergence { target, residual: res });
            }
        }
    }
    if res > 1e-9 {
        return Err(FamilyError::NoConvergence { target, residual: res });
    }
    Ok((lt.exp(), s, res))
}

/// Lower bound `W_{[κ/2]}` for the three nonzero half-period classes at `τ ∈ M₁`.
pub fn wbound_of_tau(tau: ConformalClass) -> Result<BoundPoint, FamilyError> {
    let eps = 1e-9;
    let mut classes = Vec::new();
    for class in HalfPeriodClass::nonzero() {
        let case = case_for(tau.tau, class).ok_or(LatticeError::NotReduced(tau.tau))?;
        let image = tau_sublattice_map(tau, class, case)?;
        let mut tp = image.tau_prime.tau;
        let mut corr = image.corresponds;
        if corr == HalfPeriodClass::BOTH && image.genus == Genus::One && (tp.re.abs() - 0.5).abs() < eps {
            tp -= tp.re.signum();
            corr = HalfPeriodClass::HAT;
        }
        let (source, sub_w) = match image.genus {
            Genus::Zero => {
                let lat = Lattice::from_tau(tau.tau)?;
                let sub = half_period_sublattice(&lat, class)?;
                let curve = genus0_min_curve(&sub);
                (ClassSource::Genus0 { c: curve.c }, Some(curve.willmore))
            }
            Genus::One if corr == HalfPeriodClass::HAT && tp.norm() <= 1.0 + eps => {
                let lat = make_lattice([1.0, 0.0], [tp.re, tp.im])?;
                let curve = genus0_min_curve(&lat);
                (ClassSource::Genus0 { c: curve.c }, Some(curve.willmore))
            }
            Genus::One if corr == HalfPeriodClass::HAT => {
                let (t, s, residual) = solve_genus1_tau(tp)?;
                let v = genus1_family_point(&Genus1Point::rectangular(t, s)?)?;
                (ClassSource::Genus1 { t, s, residual }, Some(v.willmore))
            }
            _ => (ClassSource::Genus2, None),
        };
        classes.push(ClassBound {
            class,
            case: case.label(),
            tau_prime: tp,
            source,
            willmore: sub_w.map(|w| 2.0 * w),
        });
    }
    let w_min = classes.iter().filter_map(|c| c.willmore).fold(f64::INFINITY, f64::min);
    Ok(BoundPoint { tau, classes, w_min })
}

/// Checks `W·Im τ = π²` for the genus-0 curve of a reduced lattice.
pub fn genus0_identity_defect(lat: &Lattice) -> f64 {
    let tau = crate::lattice::tau_of_lattice(lat);
    let (reduced, _) = crate::lattice::reduce_to_fundamental(tau);
    let w = genus0_min_curve(lat).willmore;
    (w * reduced.tau.im - PI * PI).abs()
}
