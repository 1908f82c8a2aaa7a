//! Forward Bäcklund transformation of potentials and spinors on a sampling grid.

use crate::bloch::{fermi_slice, BlochError, KernelSpinor};
use crate::lattice::{CVec2, Lattice};
use crate::potential::{FourierPotential, Mode, PotentialError, Symmetry};
use crate::spectral::{fft2, ifft2, wrap};
use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BacklundError {
    #[error("spinor nearly vanishes on the grid (margin {0:.3e})")]
    Vanishing(f64),
    #[error("spinor is not in the kernel (relative residual {0:.3e})")]
    NotInKernel(f64),
    #[error("potential must be an eta pair (U, Ū)")]
    NotEtaPair,
    #[error("grid size {n} cannot resolve modes up to {radius}")]
    Unresolved { n: usize, radius: i64 },
    #[error("grids differ in size or lattice")]
    GridMismatch,
    #[error("slice at x-p = {xp} has {a} vs {b} eigenvalues")]
    CountMismatch { xp: Complex64, a: usize, b: usize },
    #[error(transparent)]
    Bloch(#[from] BlochError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
}

pub const MARGIN_TOL: f64 = 1e-6;
pub const KERNEL_TOL: f64 = 1e-7;
/// Fourier coefficients of `U′` below this fraction of the largest are dropped.
pub const COEFF_FLOOR: f64 = 1e-13;

/// A spinor `χ = e_k·φ` sampled on an `n×n` grid over the fundamental cell.
///
/// Grid point `(j₁, j₂)` sits at `(j₁/n)γ̂ + (j₂/n)γ̌`, stored row-major.
/// `phi` holds the periodic part; `d` and `dbar` hold `e_{−k}∂χ` and `e_{−k}∂̄χ`.
#[derive(Debug, Clone)]
pub struct GridSpinor {
    pub lattice: Lattice,
    pub n: usize,
    pub k: CVec2,
    pub phi: [Vec<Complex64>; 2],
    pub d: [Vec<Complex64>; 2],
    pub dbar: [Vec<Complex64>; 2],
    /// `min|φ| / max|φ|` over the grid.
    pub margin: f64,
}

fn del_factor(q: CVec2) -> Complex64 {
    PI * (q[1] + Complex64::i() * q[0])
}

fn delbar_factor(q: CVec2) -> Complex64 {
    PI * (-q[1] + Complex64::i() * q[0])
}

fn margin_of(phi: &[Vec<Complex64>; 2]) -> f64 {
    let mags = phi[0].iter().zip(&phi[1]).map(|(a, b)| (a.norm_sqr() + b.norm_sqr()).sqrt());
    let (lo, hi) = mags.fold((f64::INFINITY, 0.0f64), |(lo, hi), m| (lo.min(m), hi.max(m)));
    if hi == 0.0 {
        0.0
    } else {
        lo / hi
    }
}

fn signed(j: usize, n: usize) -> i64 {
    if j <= n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

impl GridSpinor {
    /// Samples `Σ c_m e_{k+κ_m}` from modal coefficients, differentiating exactly.
    pub fn from_modes(lat: &Lattice, k: CVec2, coeffs: &BTreeMap<Mode, (Complex64, Complex64)>, n: usize) -> Result<Self, BacklundError> {
        let radius = coeffs.keys().map(|&(a, b)| a.abs().max(b.abs())).max().unwrap_or(0);
        if 2 * radius >= n as i64 {
            return Err(BacklundError::Unresolved { n, radius });
        }
        let zero = Complex64::new(0.0, 0.0);
        let mut c = [vec![zero; n * n], vec![zero; n * n]];
        let mut dc = c.clone();
        let mut dbc = c.clone();
        for (&(a, b), &(c1, c2)) in coeffs {
            let idx = wrap(a, n) * n + wrap(b, n);
            let kv = lat.dual_vector(a, b);
            let q = [k[0] + kv[0], k[1] + kv[1]];
            for (s, v) in [c1, c2].into_iter().enumerate() {
                c[s][idx] = v;
                dc[s][idx] = del_factor(q) * v;
                dbc[s][idx] = delbar_factor(q) * v;
            }
        }
        let phi = c.map(|v| ifft2(&v, n));
        let margin = margin_of(&phi);
        Ok(GridSpinor {
            lattice: *lat,
            n,
            k,
            d: dc.map(|v| ifft2(&v, n)),
            dbar: dbc.map(|v| ifft2(&v, n)),
            phi,
            margin,
        })
    }

    pub fn from_kernel(lat: &Lattice, spinor: &KernelSpinor, n: usize) -> Result<Self, BacklundError> {
        let w = spinor.window;
        let coeffs = (0..w.len())
            .filter(|&i| spinor.psi1[i] != Complex64::default() || spinor.psi2[i] != Complex64::default())
            .map(|i| (w.mode(i), (spinor.psi1[i], spinor.psi2[i])))
            .collect();
        Self::from_modes(lat, spinor.k, &coeffs, n)
    }

    /// Periodic parts given as samples; derivatives by FFT.
    pub fn from_samples(lat: &Lattice, k: CVec2, phi: [Vec<Complex64>; 2], n: usize) -> Self {
        let mut d = [Vec::new(), Vec::new()];
        let mut dbar = [Vec::new(), Vec::new()];
        for s in 0..2 {
            let mut c = fft2(&phi[s], n);
            let mut cb = c.clone();
            for j1 in 0..n {
                for j2 in 0..n {
                    let idx = j1 * n + j2;
                    let nyquist = n.is_multiple_of(2) && (j1 == n / 2 || j2 == n / 2);
                    if nyquist {
                        c[idx] = Complex64::default();
                        cb[idx] = Complex64::default();
                        continue;
                    }
                    let kv = lat.dual_vector(signed(j1, n), signed(j2, n));
                    let q = [k[0] + kv[0], k[1] + kv[1]];
                    c[idx] *= del_factor(q);
                    cb[idx] *= delbar_factor(q);
                }
            }
            d[s] = ifft2(&c, n);
            dbar[s] = ifft2(&cb, n);
        }
        let margin = margin_of(&phi);
        GridSpinor { lattice: *lat, n, k, phi, d, dbar, margin }
    }

    pub fn scaled(&self, a: Complex64) -> Self {
        let f = |v: &[Vec<Complex64>; 2]| [0, 1].map(|s| v[s].iter().map(|x| a * x).collect());
        GridSpinor { phi: f(&self.phi), d: f(&self.d), dbar: f(&self.dbar), ..self.clone() }
    }

    pub fn point(&self, idx: usize) -> [f64; 2] {
        let (j1, j2) = (idx / self.n, idx % self.n);
        let (s1, s2) = (j1 as f64 / self.n as f64, j2 as f64 / self.n as f64);
        let (a, b) = (self.lattice.gen1, self.lattice.gen2);
        [s1 * a[0] + s2 * b[0], s1 * a[1] + s2 * b[1]]
    }

    pub fn l2(&self) -> f64 {
        let s: f64 = self.phi[0].iter().chain(&self.phi[1]).map(|c| c.norm_sqr()).sum();
        (s / (self.n * self.n) as f64).sqrt()
    }
}

/// Values of `U` on the grid of `chi`.
pub fn sample_potential(pot: &FourierPotential, chi: &GridSpinor) -> Vec<Complex64> {
    (0..chi.n * chi.n).map(|i| pot.eval(&chi.lattice, chi.point(i)).0).collect()
}

/// `‖D(U,Ū,k)χ‖ / (‖χ‖·scale)` on the grid, with `U` given by samples.
pub fn grid_residual(u: &[Complex64], chi: &GridSpinor) -> f64 {
    let m = (chi.n * chi.n) as f64;
    let mut r2 = 0.0;
    let mut dn2 = 0.0;
    for i in 0..chi.n * chi.n {
        let r1 = u[i] * chi.phi[0][i] + chi.d[1][i];
        let r2v = -chi.dbar[0][i] + u[i].conj() * chi.phi[1][i];
        r2 += r1.norm_sqr() + r2v.norm_sqr();
        dn2 += chi.d[1][i].norm_sqr() + chi.dbar[0][i].norm_sqr();
    }
    let umax = u.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let norm = chi.l2();
    let scale = (1.0f64).max(umax).max((dn2 / m).sqrt() / norm.max(f64::MIN_POSITIVE));
    (r2 / m).sqrt() / (norm * scale).max(f64::MIN_POSITIVE)
}

#[derive(Debug, Clone)]
pub struct BacklundPotential {
    pub potential: FourierPotential,
    /// `U′` on the grid.
    pub samples: Vec<Complex64>,
    /// `ℓ²` mass of the dropped Fourier tail relative to the total.
    pub tail_mass: f64,
    pub kernel_residual: f64,
    pub margin: f64,
}

fn check_generator(pot: &FourierPotential, chi: &GridSpinor) -> Result<f64, BacklundError> {
    if !pot.satisfies(Symmetry::EtaPair, 1e-12) {
        return Err(BacklundError::NotEtaPair);
    }
    if chi.margin <= MARGIN_TOL {
        return Err(BacklundError::Vanishing(chi.margin));
    }
    let res = grid_residual(&sample_potential(pot, chi), chi);
    if res > KERNEL_TOL {
        return Err(BacklundError::NotInKernel(res));
    }
    Ok(res)
}

/// `U′ = ((∂̄χ₂)χ̄₁ − χ₂(∂̄χ̄₁)) / (|χ₁|² + |χ₂|²)`, truncated to modes `|n| ≤ cutoff`.
pub fn backlund_potential(pot: &FourierPotential, chi: &GridSpinor, cutoff: i64) -> Result<BacklundPotential, BacklundError> {
    let kernel_residual = check_generator(pot, chi)?;
    let n = chi.n;
    let samples: Vec<Complex64> = (0..n * n)
        .map(|i| {
            let (p1, p2) = (chi.phi[0][i], chi.phi[1][i]);
            let num = chi.dbar[1][i] * p1.conj() - p2 * chi.d[0][i].conj();
            num / (p1.norm_sqr() + p2.norm_sqr())
        })
        .collect();
    let coeffs = fft2(&samples, n);
    let total: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
    let cmax = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut kept = BTreeMap::new();
    let mut kept_mass = 0.0;
    let lim = cutoff.min((n as i64 - 1) / 2);
    for a in -lim..=lim {
        for b in -lim..=lim {
            let c = coeffs[wrap(a, n) * n + wrap(b, n)];
            if c.norm() > COEFF_FLOOR * cmax {
                kept.insert((a, b), c);
                kept_mass += c.norm_sqr();
            }
        }
    }
    let tail_mass = if total > 0.0 { ((total - kept_mass).max(0.0) / total).sqrt() } else { 0.0 };
    Ok(BacklundPotential {
        potential: FourierPotential::eta_pair(kept)?,
        samples,
        tail_mass,
        kernel_residual,
        margin: chi.margin,
    })
}

/// `ψ′ = (∂ + a, b; c, ∂̄ + d)ψ` with coefficients built from `χ`.
pub fn backlund_spinor(psi: &GridSpinor, chi: &GridSpinor) -> Result<GridSpinor, BacklundError> {
    if psi.n != chi.n || psi.lattice != chi.lattice {
        return Err(BacklundError::GridMismatch);
    }
    if chi.margin <= MARGIN_TOL {
        return Err(BacklundError::Vanishing(chi.margin));
    }
    let n = chi.n;
    let mut out = [Vec::with_capacity(n * n), Vec::with_capacity(n * n)];
    for i in 0..n * n {
        let (x1, x2) = (chi.phi[0][i], chi.phi[1][i]);
        let dx1 = chi.d[0][i];
        let dbx2 = chi.dbar[1][i];
        let nrm = x1.norm_sqr() + x2.norm_sqr();
        let a = -(dx1 * x1.conj() + x2 * dbx2.conj()) / nrm;
        let b = (x1 * dbx2.conj() - dx1 * x2.conj()) / nrm;
        let c = (x2 * dx1.conj() - dbx2 * x1.conj()) / nrm;
        let d = -(x1 * dx1.conj() + dbx2 * x2.conj()) / nrm;
        let (p1, p2) = (psi.phi[0][i], psi.phi[1][i]);
        out[0].push(psi.d[0][i] + a * p1 + b * p2);
        out[1].push(c * p1 + psi.dbar[1][i] + d * p2);
    }
    Ok(GridSpinor::from_samples(&psi.lattice, psi.k, out, n))
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceReport {
    /// `(x‑p, Hausdorff distance)` per slice.
    pub slices: Vec<(Complex64, f64)>,
    pub max_distance: f64,
    pub pass: bool,
}

pub const INVARIANCE_GATE: f64 = 1e-4;

fn one_sided(a: &[Complex64], b: &[Complex64], radius: f64) -> f64 {
    a.iter()
        .filter(|z| z.norm() <= radius)
        .map(|z| b.iter().map(|w| (z - w).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

/// Hausdorff distance between slice spectra of `u` and `uprime`, restricted to `|y‑p| ≤ radius`.
pub fn invariance_check(
    u: &FourierPotential,
    uprime: &FourierPotential,
    lat: &Lattice,
    slices: &[Complex64],
    cutoff: i64,
    radius: f64,
) -> Result<InvarianceReport, BacklundError> {
    let rows: Result<Vec<(Complex64, f64)>, BacklundError> = slices
        .par_iter()
        .map(|&xp| {
            let a: Vec<Complex64> = fermi_slice(u, lat, xp, cutoff)?.into_iter().map(|e| e.yp).collect();
            let b: Vec<Complex64> = fermi_slice(uprime, lat, xp, cutoff)?.into_iter().map(|e| e.yp).collect();
            if a.len() != b.len() {
                return Err(BacklundError::CountMismatch { xp, a: a.len(), b: b.len() });
            }
            Ok((xp, one_sided(&a, &b, radius).max(one_sided(&b, &a, radius))))
        })
        .collect();
    let slices = rows?;
    let max_distance = slices.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(InvarianceReport { slices, max_distance, pass: max_distance <= INVARIANCE_GATE })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::kernel_at;

    fn on_constant_curve(u: f64, theta: f64) -> CVec2 {
        let r = u / PI;
        [Complex64::new(r * theta.cos(), 0.0), Complex64::new(r * theta.sin(), 0.0)]
    }

    fn generator(u: f64, theta: f64) -> (FourierPotential, GridSpinor) {
        let lat = Lattice::square();
        let pot = FourierPotential::constant(u);
        let k = on_constant_curve(u, theta);
        let ks = kernel_at(&pot, &lat, k, 2).unwrap();
        assert_eq!(ks.dim(), 1);
        (pot, GridSpinor::from_kernel(&lat, &ks.spinors[0], 16).unwrap())
    }

    #[test]
    fn constant_potential_rotates_by_a_phase() {
        let u = 0.3;
        let (pot, chi) = generator(u, 0.7);
        let bp = backlund_potential(&pot, &chi, 4).unwrap();
        let k = chi.k;
        let expect = u * (k[1] - Complex64::i() * k[0]) / (k[1] + Complex64::i() * k[0]);
        assert!(bp.samples.iter().all(|s| (s - expect).norm() < 1e-12));
        assert!((bp.potential.v_hat((0, 0)).norm() - u).abs() < 1e-12);
        assert_eq!(bp.potential.v_coeffs().len(), 1);
        let lat = Lattice::square();
        let xs: Vec<Complex64> = (0..5).map(|j| Complex64::new(0.1 + 0.17 * j as f64, 0.02)).collect();
        let rep = invariance_check(&pot, &bp.potential, &lat, &xs, 3, 2.0).unwrap();
        assert!(rep.pass && rep.max_distance < 1e-8, "{rep:?}");
        let bad = invariance_check(&pot, &bp.potential.scaled(1.1), &lat, &xs, 3, 2.0).unwrap();
        assert!(!bad.pass);
    }

    #[test]
    fn generator_is_annihilated() {
        let (_, chi) = generator(0.3, 0.7);
        let out = backlund_spinor(&chi, &chi).unwrap();
        assert!(out.l2() < 1e-12 * chi.d[0].iter().map(|c| c.norm()).fold(1.0, f64::max));
    }

    #[test]
    fn second_kernel_vector_maps_into_new_kernel() {
        let u = 0.3;
        let (pot, chi) = generator(u, 0.7);
        let bp = backlund_potential(&pot, &chi, 4).unwrap();
        let lat = Lattice::square();
        let kpsi = on_constant_curve(u, 2.1);
        let ks = kernel_at(&pot, &lat, kpsi, 2).unwrap();
        let psi = GridSpinor::from_kernel(&lat, &ks.spinors[0], 16).unwrap();
        let out = backlund_spinor(&psi, &chi).unwrap();
        assert!(out.l2() > 1e-3);
        assert!(grid_residual(&bp.samples, &out) < 1e-6);
        let alpha = Complex64::new(0.3, -1.2);
        let scaled = backlund_spinor(&psi.scaled(alpha), &chi).unwrap();
        for s in 0..2 {
            for (x, y) in scaled.phi[s].iter().zip(&out.phi[s]) {
                assert!((x - alpha * y).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_potential_with_constant_spinor() {
        let lat = Lattice::square();
        let mut m = BTreeMap::new();
        m.insert((0, 0), (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)));
        let chi = GridSpinor::from_modes(&lat, [Complex64::default(); 2], &m, 8).unwrap();
        let bp = backlund_potential(&FourierPotential::zero(), &chi, 2).unwrap();
        assert!(bp.potential.is_zero());
    }

    #[test]
    fn rejects_non_kernel_and_vanishing() {
        let lat = Lattice::square();
        let mut m = BTreeMap::new();
        m.insert((1, 0), (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)));
        let chi = GridSpinor::from_modes(&lat, [Complex64::default(); 2], &m, 8).unwrap();
        assert!(matches!(backlund_potential(&FourierPotential::zero(), &chi, 2), Err(BacklundError::NotInKernel(_))));
        m.insert((0, 0), (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)));
        let chi = GridSpinor::from_modes(&lat, [Complex64::default(); 2], &m, 8).unwrap();
        assert!(matches!(backlund_potential(&FourierPotential::zero(), &chi, 2), Err(BacklundError::Vanishing(_))));
    }

    #[test]
    fn fft_derivatives_match_modal_ones() {
        let (_, chi) = generator(0.3, 0.7);
        let re = GridSpinor::from_samples(&chi.lattice, chi.k, chi.phi.clone(), chi.n);
        for s in 0..2 {
            for (x, y) in re.d[s].iter().zip(&chi.d[s]) {
                assert!((x - y).norm() < 1e-12);
            }
        }
    }
}
