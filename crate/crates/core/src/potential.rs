//! Finitely supported Fourier potentials `(V, W)` on the dual lattice.

use crate::lattice::{g, Lattice, Vec2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2};
use thiserror::Error;

pub type Mode = (i64, i64);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PotentialError {
    #[error("potential does not satisfy the {0:?} symmetry (defect {1:.3e})")]
    Symmetry(Symmetry, f64),
    #[error("non-finite coefficient at mode {0:?}")]
    NonFinite(Mode),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symmetry {
    /// No relation between `V` and `W`.
    GeneralPair,
    /// `W = Ū`, `V = U`: `Ŵ(κ) = conj V̂(−κ)`.
    EtaPair,
    /// `W = V` real-valued.
    SigmaReal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FourierPotential {
    v: BTreeMap<Mode, Complex64>,
    w: BTreeMap<Mode, Complex64>,
    symmetry: Symmetry,
}

const SYMMETRY_TOL: f64 = 1e-12;

fn clean(map: BTreeMap<Mode, Complex64>) -> Result<BTreeMap<Mode, Complex64>, PotentialError> {
    let mut out = BTreeMap::new();
    for (n, c) in map {
        if !c.re.is_finite() || !c.im.is_finite() {
            return Err(PotentialError::NonFinite(n));
        }
        if c != Complex64::new(0.0, 0.0) {
            out.insert(n, c);
        }
    }
    Ok(out)
}

impl FourierPotential {
    /// Builds a potential and checks the declared symmetry.
    pub fn new(
        v: BTreeMap<Mode, Complex64>,
        w: BTreeMap<Mode, Complex64>,
        symmetry: Symmetry,
    ) -> Result<Self, PotentialError> {
        let p = FourierPotential { v: clean(v)?, w: clean(w)?, symmetry };
        let defect = p.symmetry_defect(symmetry);
        if defect > SYMMETRY_TOL * (1.0 + p.max_abs()) {
            return Err(PotentialError::Symmetry(symmetry, defect));
        }
        Ok(p)
    }

    /// `(U, Ū)` from the coefficients of `U`.
    pub fn eta_pair(u: BTreeMap<Mode, Complex64>) -> Result<Self, PotentialError> {
        let w = u.iter().map(|(&(a, b), c)| ((-a, -b), c.conj())).collect();
        Self::new(u, w, Symmetry::EtaPair)
    }

    /// `(U, U)` for a real potential given by its coefficients.
    pub fn sigma_real(u: BTreeMap<Mode, Complex64>) -> Result<Self, PotentialError> {
        Self::new(u.clone(), u, Symmetry::SigmaReal)
    }

    pub fn zero() -> Self {
        FourierPotential { v: BTreeMap::new(), w: BTreeMap::new(), symmetry: Symmetry::SigmaReal }
    }

    /// `V = W = u` with `u` real.
    pub fn constant(u: f64) -> Self {
        let mut m = BTreeMap::new();
        m.insert((0, 0), Complex64::new(u, 0.0));
        Self::sigma_real(m).expect("real constants are symmetric")
    }

    /// `V = u·e_κ`, `W = ū·e_{−κ}`.
    pub fn single_mode(u: Complex64, kappa: Mode) -> Self {
        let mut m = BTreeMap::new();
        m.insert(kappa, u);
        Self::eta_pair(m).expect("single modes form eta pairs")
    }

    /// Real potential of the Clifford torus on the square lattice, truncated at `terms` harmonics:
    /// `U = π(1 − 1/√2) + π Σ_{n≠0} (√2−1)^{|n|} e_{(0,n)}`.
    pub fn clifford(terms: usize) -> Self {
        let mut m = BTreeMap::new();
        m.insert((0, 0), Complex64::new(PI * (1.0 - 1.0 / SQRT_2), 0.0));
        let r = SQRT_2 - 1.0;
        for n in 1..=terms as i64 {
            let c = Complex64::new(PI * r.powi(n as i32), 0.0);
            m.insert((0, n), c);
            m.insert((0, -n), c);
        }
        Self::sigma_real(m).expect("Clifford coefficients are real and even")
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn v_hat(&self, n: Mode) -> Complex64 {
        self.v.get(&n).copied().unwrap_or_default()
    }

    pub fn w_hat(&self, n: Mode) -> Complex64 {
        self.w.get(&n).copied().unwrap_or_default()
    }

    pub fn v_coeffs(&self) -> &BTreeMap<Mode, Complex64> {
        &self.v
    }

    pub fn w_coeffs(&self) -> &BTreeMap<Mode, Complex64> {
        &self.w
    }

    pub fn is_zero(&self) -> bool {
        self.v.is_empty() && self.w.is_empty()
    }

    fn max_abs(&self) -> f64 {
        self.v.values().chain(self.w.values()).map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest `|n₁|`, `|n₂|` over the support.
    pub fn support_radius(&self) -> i64 {
        self.v.keys().chain(self.w.keys()).map(|&(a, b)| a.abs().max(b.abs())).max().unwrap_or(0)
    }

    /// Support of `V` and `W` together.
    pub fn support(&self) -> Vec<Mode> {
        let mut s: Vec<Mode> = self.v.keys().chain(self.w.keys()).copied().collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    /// Largest violation of the invariant defining `sym`.
    pub fn symmetry_defect(&self, sym: Symmetry) -> f64 {
        let keys = self.support();
        let mut d: f64 = 0.0;
        for &(a, b) in &keys {
            let n = (a, b);
            let m = (-a, -b);
            match sym {
                Symmetry::GeneralPair => {}
                Symmetry::EtaPair => d = d.max((self.w_hat(n) - self.v_hat(m).conj()).norm()),
                Symmetry::SigmaReal => {
                    d = d.max((self.w_hat(n) - self.v_hat(n)).norm());
                    d = d.max((self.v_hat(m) - self.v_hat(n).conj()).norm());
                }
            }
        }
        d
    }

    pub fn satisfies(&self, sym: Symmetry, tol: f64) -> bool {
        self.symmetry_defect(sym) <= tol
    }

    /// `4∫VW d²x = 4·vol·Σ V̂(κ)Ŵ(−κ)`.
    pub fn pairing(&self, lat: &Lattice) -> Complex64 {
        let s: Complex64 = self.v.iter().map(|(&(a, b), c)| c * self.w_hat((-a, -b))).sum();
        4.0 * lat.vol() * s
    }

    /// `(ψ_{−κ}V, ψ_κW)`.
    pub fn gauge(&self, kappa: Mode) -> Self {
        let v = self.v.iter().map(|(&(a, b), c)| ((a - kappa.0, b - kappa.1), *c)).collect();
        let w = self.w.iter().map(|(&(a, b), c)| ((a + kappa.0, b + kappa.1), *c)).collect();
        FourierPotential { v, w, symmetry: Symmetry::GeneralPair }
    }

    /// `(W, V)`.
    pub fn swapped(&self) -> Self {
        FourierPotential { v: self.w.clone(), w: self.v.clone(), symmetry: self.symmetry }
    }

    /// `(V̄, W̄)` as functions.
    pub fn conjugated(&self) -> Self {
        let f = |m: &BTreeMap<Mode, Complex64>| m.iter().map(|(&(a, b), c)| ((-a, -b), c.conj())).collect();
        FourierPotential { v: f(&self.v), w: f(&self.w), symmetry: self.symmetry }
    }

    pub fn scaled(&self, s: f64) -> Self {
        let f = |m: &BTreeMap<Mode, Complex64>| m.iter().map(|(&n, c)| (n, c * s)).collect();
        FourierPotential { v: f(&self.v), w: f(&self.w), symmetry: self.symmetry }
    }

    pub fn with_symmetry(mut self, sym: Symmetry) -> Result<Self, PotentialError> {
        let defect = self.symmetry_defect(sym);
        if defect > SYMMETRY_TOL * (1.0 + self.max_abs()) {
            return Err(PotentialError::Symmetry(sym, defect));
        }
        self.symmetry = sym;
        Ok(self)
    }

    /// Point values `(V(x), W(x))`.
    pub fn eval(&self, lat: &Lattice, x: Vec2) -> (Complex64, Complex64) {
        let e = |(a, b): Mode| Complex64::from_polar(1.0, 2.0 * PI * g(x, lat.dual_vector(a, b)));
        let v = self.v.iter().map(|(&n, c)| c * e(n)).sum();
        let w = self.w.iter().map(|(&n, c)| c * e(n)).sum();
        (v, w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_satisfy_their_symmetry() {
        let p = FourierPotential::single_mode(Complex64::new(0.1, 0.0), (1, 0));
        assert!(p.satisfies(Symmetry::EtaPair, 1e-15));
        assert!(!p.satisfies(Symmetry::SigmaReal, 1e-3));
        let c = FourierPotential::clifford(20);
        assert!(c.satisfies(Symmetry::EtaPair, 1e-15));
        assert!(c.satisfies(Symmetry::SigmaReal, 1e-15));
    }

    #[test]
    fn pairing_values() {
        let lat = Lattice::square();
        let p = FourierPotential::single_mode(Complex64::new(0.1, 0.0), (1, 0));
        assert!((p.pairing(&lat).re - 0.04).abs() < 1e-15);
        let u = PI / SQRT_2;
        assert!((FourierPotential::constant(u).pairing(&lat).re - 2.0 * PI * PI).abs() < 1e-12);
        let c = FourierPotential::clifford(60);
        assert!((c.pairing(&lat).re - 2.0 * PI * PI).abs() < 1e-10);
    }

    #[test]
    fn clifford_closed_form() {
        let lat = Lattice::square();
        let c = FourierPotential::clifford(60);
        for &x2 in &[0.0, 0.13, 0.5, 0.77] {
            let cw = (2.0 * PI * x2).cos();
            let cv = (cw - 1.0 / SQRT_2) / (1.0 - cw / SQRT_2);
            let (v, w) = c.eval(&lat, [0.3, x2]);
            assert!((v.re - (PI / SQRT_2 + PI * cv)).abs() < 1e-12);
            assert!(v.im.abs() < 1e-12 && (v - w).norm() < 1e-15);
        }
    }

    #[test]
    fn rejects_bad_symmetry() {
        let mut m = BTreeMap::new();
        m.insert((1, 0), Complex64::new(1.0, 0.0));
        assert!(FourierPotential::sigma_real(m).is_err());
    }
}
