//! Integral kernel of the free resolvent built from `θ_Δ`.

use crate::elliptic::{EllipticError, ThetaParams};
use crate::lattice::{gmix, CVec2, Lattice};
use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ResolventError {
    #[error("z − z′ lies on the lattice")]
    Diagonal,
    #[error("z⁺(k) lies on the lattice; K₁ is undefined")]
    PolePlus,
    #[error("conj z⁻(k) lies on the lattice; K₂ is undefined")]
    PoleMinus,
    #[error(transparent)]
    Elliptic(#[from] EllipticError),
}

const POLE_TOL: f64 = 1e-10;

/// Precomputed data for kernels at a fixed momentum.
#[derive(Debug, Clone)]
pub struct FreeResolvent {
    theta: ThetaParams,
    k: CVec2,
    gamma: Complex64,
    phase: Complex64,
    zp: Complex64,
    zm_bar: Complex64,
    theta_zp: Option<Complex64>,
    theta_zm_bar: Option<Complex64>,
}

impl FreeResolvent {
    pub fn new(lat: &Lattice, k: CVec2) -> Result<Self, ResolventError> {
        let theta = ThetaParams::new(lat)?;
        let vol = lat.vol();
        let i = Complex64::i();
        let zp = vol * (i * k[0] - k[1]);
        let zm_bar = (vol * (i * k[0] + k[1])).conj();
        let on_lattice = |z: Complex64| theta.elliptic().pole_distance(z) < POLE_TOL;
        let theta_zp = (!on_lattice(zp)).then(|| theta.eval(zp));
        let theta_zm_bar = (!on_lattice(zm_bar)).then(|| theta.eval(zm_bar));
        let (gamma, _) = lat.complex_gens();
        let phase = 2.0 * PI * i * gmix(lat.gen1, k);
        Ok(FreeResolvent { theta, k, gamma, phase, zp, zm_bar, theta_zp, theta_zm_bar })
    }

    pub fn momentum(&self) -> CVec2 {
        self.k
    }

    fn check(&self, w: Complex64) -> Result<(), ResolventError> {
        if self.theta.elliptic().pole_distance(w) < POLE_TOL {
            return Err(ResolventError::Diagonal);
        }
        Ok(())
    }

    /// `K₁(w) = exp(2πi g(γ̂,k) w/γ̂)·θ(w+z⁺)/(θ(w)θ(z⁺))`.
    pub fn k1(&self, w: Complex64) -> Result<Complex64, ResolventError> {
        self.check(w)?;
        let tz = self.theta_zp.ok_or(ResolventError::PolePlus)?;
        let t = &self.theta;
        Ok((self.phase * w / self.gamma).exp() * t.eval(w + self.zp) / (t.eval(w) * tz))
    }

    /// `K₂(w) = exp(2πi g(γ̂,k) w̄/γ̂̄)·conj θ(w + z̄⁻) / (conj θ(w) · conj θ(z̄⁻))`.
    pub fn k2(&self, w: Complex64) -> Result<Complex64, ResolventError> {
        self.check(w)?;
        let tz = self.theta_zm_bar.ok_or(ResolventError::PoleMinus)?;
        let t = &self.theta;
        let num = t.eval(w + self.zm_bar).conj();
        Ok((self.phase * w.conj() / self.gamma.conj()).exp() * num / (t.eval(w).conj() * tz.conj()))
    }

    /// `(0, K₁; −K₂, 0)` at `z − z′`.
    pub fn matrix(&self, z: Complex64, zprime: Complex64) -> Result<[[Complex64; 2]; 2], ResolventError> {
        let w = z - zprime;
        let zero = Complex64::new(0.0, 0.0);
        Ok([[zero, self.k1(w)?], [-self.k2(w)?, zero]])
    }
}

/// Kernel matrix of the free resolvent at momentum `k` between points `z`, `z′`.
pub fn free_resolvent_kernel(
    lat: &Lattice,
    k: CVec2,
    z: Complex64,
    zprime: Complex64,
) -> Result<[[Complex64; 2]; 2], ResolventError> {
    FreeResolvent::new(lat, k)?.matrix(z, zprime)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn quasi_periodic_in_both_generators() {
        let lat = crate::lattice::make_lattice([1.0, 0.0], [0.3, 1.2]).unwrap();
        let k = [c(0.21, 0.05), c(-0.13, 0.08)];
        let r = FreeResolvent::new(&lat, k).unwrap();
        let (g1, g2) = lat.complex_gens();
        let w = c(0.31, 0.17);
        for (gc, gv) in [(g1, lat.gen1), (g2, lat.gen2)] {
            let m = (2.0 * PI * Complex64::i() * gmix(gv, k)).exp();
            assert!((r.k1(w + gc).unwrap() - m * r.k1(w).unwrap()).norm() < 1e-9 * r.k1(w).unwrap().norm());
            assert!((r.k2(w + gc).unwrap() - m * r.k2(w).unwrap()).norm() < 1e-9 * r.k2(w).unwrap().norm());
        }
    }

    #[test]
    fn pole_conditions() {
        let lat = Lattice::square();
        assert!(free_resolvent_kernel(&lat, [c(0.2, 0.0), c(0.1, 0.0)], c(0.3, 0.3), c(0.3, 0.3)).is_err());
        let r = FreeResolvent::new(&lat, [c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(r.k1(c(0.2, 0.1)), Err(ResolventError::PolePlus));
    }
}
