//! Fourier–Galerkin truncation of `D(V,W) = (V, ∂; −∂̄, W)` and the `D̃` eigenproblem.
//!
//! Modes `κ = n₁κ̂ + n₂κ̌` with `|n₁|, |n₂| ≤ K` are ordered row-major over `(n₁, n₂)`;
//! each mode carries a `2×2` spinor block, so the spinor entry `s ∈ {0,1}` of mode
//! index `i` sits at row `2i + s`.

use crate::lattice::{CVec2, Lattice};
use crate::potential::{FourierPotential, Mode, Symmetry};
use nalgebra::{DMatrix, DVector, Schur, SVD};
use num_complex::Complex64;
use petgraph::unionfind::UnionFind;
use rayon::prelude::*;
use std::collections::HashMap;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BlochError {
    #[error("cutoff {cutoff} is smaller than the potential support radius {support}")]
    CutoffTooSmall { cutoff: i64, support: i64 },
    #[error("degenerate dual basis for the D̃ problem")]
    DegenerateBasis,
    #[error("eigenvalue iteration did not converge")]
    NoConvergence,
    #[error("momentum {0:?} is not a half-lattice point (needs 2·Re k ∈ Λ*, Im k = 0)")]
    NotHalfLattice(CVec2),
    #[error("potential lacks the {0:?} symmetry needed for this involution")]
    SymmetryMismatch(Symmetry),
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Square window of modes `|n₁|, |n₂| ≤ K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModeWindow {
    pub cutoff: i64,
}

impl ModeWindow {
    pub fn new(cutoff: i64) -> Self {
        ModeWindow { cutoff }
    }

    pub fn side(&self) -> usize {
        (2 * self.cutoff + 1) as usize
    }

    pub fn len(&self) -> usize {
        self.side() * self.side()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, n: Mode) -> bool {
        n.0.abs() <= self.cutoff && n.1.abs() <= self.cutoff
    }

    pub fn index(&self, n: Mode) -> Option<usize> {
        if !self.contains(n) {
            return None;
        }
        let s = self.side() as i64;
        Some(((n.0 + self.cutoff) * s + n.1 + self.cutoff) as usize)
    }

    pub fn mode(&self, i: usize) -> Mode {
        let s = self.side() as i64;
        let i = i as i64;
        (i / s - self.cutoff, i % s - self.cutoff)
    }

    pub fn modes(&self) -> impl Iterator<Item = Mode> + '_ {
        (0..self.len()).map(move |i| self.mode(i))
    }
}

/// Connected components of the mode-coupling graph of a potential.
#[derive(Debug, Clone)]
pub struct BlockStructure {
    pub window: ModeWindow,
    /// Modes of each block, in window order.
    pub blocks: Vec<Vec<Mode>>,
}

impl BlockStructure {
    pub fn new(pot: &FourierPotential, window: ModeWindow) -> Self {
        let n = window.len();
        let mut uf = UnionFind::<usize>::new(n);
        let support = pot.support();
        for i in 0..n {
            let m = window.mode(i);
            for &d in &support {
                if let Some(j) = window.index((m.0 + d.0, m.1 + d.1)) {
                    uf.union(i, j);
                }
            }
        }
        let mut groups: HashMap<usize, Vec<Mode>> = HashMap::new();
        let mut order = Vec::new();
        for i in 0..n {
            let r = uf.find(i);
            groups
                .entry(r)
                .or_insert_with(|| {
                    order.push(r);
                    Vec::new()
                })
                .push(window.mode(i));
        }
        let blocks = order.into_iter().map(|r| groups.remove(&r).unwrap_or_default()).collect();
        BlockStructure { window, blocks }
    }

    pub fn block_of(&self, n: Mode) -> Option<usize> {
        self.blocks.iter().position(|b| b.contains(&n))
    }
}

/// Truncated matrix together with the data it was assembled at.
#[derive(Debug, Clone)]
pub struct BlochMatrix {
    pub window: ModeWindow,
    pub matrix: DMatrix<Complex64>,
    /// Momentum for `D`, or `(x‑p, 0)` for `D̃`.
    pub k: CVec2,
    pub kind: MatrixKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    Dirac,
    Transposed,
    DTilde,
}

fn check_cutoff(pot: &FourierPotential, cutoff: i64) -> Result<(), BlochError> {
    let s = pot.support_radius();
    if cutoff < s {
        return Err(BlochError::CutoffTooSmall { cutoff, support: s });
    }
    Ok(())
}

/// `π(q₂ + iq₁)` and `π(−q₂ + iq₁)` at `q = k + κ`.
fn symbols(lat: &Lattice, k: CVec2, n: Mode) -> (Complex64, Complex64) {
    let kv = lat.dual_vector(n.0, n.1);
    let q1 = k[0] + kv[0];
    let q2 = k[1] + kv[1];
    let i = Complex64::i();
    (PI * (q2 + i * q1), PI * (-q2 + i * q1))
}

/// Assembles `(V, ∂; −∂̄, W)` (or the transposed form `(V, ∂̄; −∂, W)`) on a list of modes.
fn assemble_on(pot: &FourierPotential, lat: &Lattice, k: CVec2, modes: &[Mode], transposed: bool) -> DMatrix<Complex64> {
    let n = modes.len();
    let mut m = DMatrix::from_element(2 * n, 2 * n, ZERO);
    for (i, &a) in modes.iter().enumerate() {
        let (d, db) = symbols(lat, k, a);
        if transposed {
            m[(2 * i, 2 * i + 1)] = db;
            m[(2 * i + 1, 2 * i)] = -d;
        } else {
            m[(2 * i, 2 * i + 1)] = d;
            m[(2 * i + 1, 2 * i)] = -db;
        }
        for (j, &b) in modes.iter().enumerate() {
            let diff = (a.0 - b.0, a.1 - b.1);
            m[(2 * i, 2 * j)] += pot.v_hat(diff);
            m[(2 * i + 1, 2 * j + 1)] += pot.w_hat(diff);
        }
    }
    m
}

/// `D̃ = −Ň⁻¹(D₀ + x‑p·πN̂)` on a list of modes; its eigenvalues are `π·y‑p`.
fn dtilde_on(pot: &FourierPotential, lat: &Lattice, xp: Complex64, modes: &[Mode]) -> Result<DMatrix<Complex64>, BlochError> {
    let (_, kc) = lat.dual();
    let cp = Complex64::new(kc[1], kc[0]);
    let cm = Complex64::new(kc[1], -kc[0]);
    if cp.norm() < 1e-14 {
        return Err(BlochError::DegenerateBasis);
    }
    let k = lat.momentum(xp, ZERO);
    let a = assemble_on(pot, lat, k, modes, false);
    let n = modes.len();
    let mut out = DMatrix::from_element(2 * n, 2 * n, ZERO);
    for i in 0..n {
        for c in 0..2 * n {
            out[(2 * i, c)] = -a[(2 * i + 1, c)] / cm;
            out[(2 * i + 1, c)] = -a[(2 * i, c)] / cp;
        }
    }
    Ok(out)
}

fn embed(window: ModeWindow, blocks: &[(Vec<Mode>, DMatrix<Complex64>)], k: CVec2, kind: MatrixKind) -> BlochMatrix {
    let n = 2 * window.len();
    let mut m = DMatrix::from_element(n, n, ZERO);
    for (modes, b) in blocks {
        let idx: Vec<usize> = modes.iter().map(|&x| window.index(x).expect("mode in window")).collect();
        for (i, &gi) in idx.iter().enumerate() {
            for (j, &gj) in idx.iter().enumerate() {
                for s in 0..2 {
                    for t in 0..2 {
                        m[(2 * gi + s, 2 * gj + t)] = b[(2 * i + s, 2 * j + t)];
                    }
                }
            }
        }
    }
    BlochMatrix { window, matrix: m, k, kind }
}

/// Dense `D(V,W,k)` over the full window.
pub fn assemble_dirac(pot: &FourierPotential, lat: &Lattice, k: CVec2, cutoff: i64) -> Result<BlochMatrix, BlochError> {
    check_cutoff(pot, cutoff)?;
    let w = ModeWindow::new(cutoff);
    let modes: Vec<Mode> = w.modes().collect();
    Ok(BlochMatrix { window: w, matrix: assemble_on(pot, lat, k, &modes, false), k, kind: MatrixKind::Dirac })
}

/// Dense `(V, ∂̄; −∂, W)` at `k`.
pub fn assemble_transposed(pot: &FourierPotential, lat: &Lattice, k: CVec2, cutoff: i64) -> Result<BlochMatrix, BlochError> {
    check_cutoff(pot, cutoff)?;
    let w = ModeWindow::new(cutoff);
    let modes: Vec<Mode> = w.modes().collect();
    Ok(BlochMatrix { window: w, matrix: assemble_on(pot, lat, k, &modes, true), k, kind: MatrixKind::Transposed })
}

/// Dense `D̃(V,W,x‑p)`.
pub fn assemble_dtilde(pot: &FourierPotential, lat: &Lattice, xp: Complex64, cutoff: i64) -> Result<BlochMatrix, BlochError> {
    check_cutoff(pot, cutoff)?;
    let w = ModeWindow::new(cutoff);
    let bs = BlockStructure::new(pot, w);
    let blocks: Result<Vec<_>, _> =
        bs.blocks.iter().map(|b| dtilde_on(pot, lat, xp, b).map(|m| (b.clone(), m))).collect();
    Ok(embed(w, &blocks?, [xp, ZERO], MatrixKind::DTilde))
}

/// `D̃` restricted to a list of modes (normally one coupling block).
pub fn assemble_dtilde_block(pot: &FourierPotential, lat: &Lattice, xp: Complex64, modes: &[Mode]) -> Result<DMatrix<Complex64>, BlochError> {
    dtilde_on(pot, lat, xp, modes)
}

/// Eigenvalues of a complex matrix from its Schur form.
pub fn eigenvalues(m: DMatrix<Complex64>) -> Result<Vec<Complex64>, BlochError> {
    let n = m.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let schur = Schur::try_new(m, 1e-15, 10_000).ok_or(BlochError::NoConvergence)?;
    let (_, t) = schur.unpack();
    Ok((0..n).map(|i| t[(i, i)]).collect())
}

/// One point of a Fermi slice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceEigen {
    pub yp: Complex64,
    /// Index of the coupling block the eigenvalue came from.
    pub block: usize,
    /// Free-curve label `(n₁, n₂, ±)` whose line `−n₂ ± i(x‑p + n₁)` is nearest.
    pub free_label: (i64, i64, i8),
}

fn sort_key(z: Complex64) -> (i64, i64) {
    ((z.re * 1e9).round() as i64, (z.im * 1e9).round() as i64)
}

/// Sorts slice values by the rounded `(Re, Im)` key.
pub fn sort_slice(v: &mut [SliceEigen]) {
    v.sort_by(|a, b| sort_key(a.yp).cmp(&sort_key(b.yp)).then(a.block.cmp(&b.block)));
}

fn free_label(lat: &Lattice, xp: Complex64, yp: Complex64, modes: &[Mode]) -> (i64, i64, i8) {
    let _ = lat;
    let i = Complex64::i();
    let mut best = (0, 0, 1);
    let mut dist = f64::INFINITY;
    for &(n1, n2) in modes {
        for s in [1i8, -1] {
            let y = -(n2 as f64) + f64::from(s) * i * (xp + n1 as f64);
            let d = (y - yp).norm();
            if d < dist {
                dist = d;
                best = (n1, n2, s);
            }
        }
    }
    best
}

/// Values `y‑p` with `x‑p·κ̂ + y‑p·κ̌` on the truncated Fermi curve, sorted.
pub fn fermi_slice(pot: &FourierPotential, lat: &Lattice, xp: Complex64, cutoff: i64) -> Result<Vec<SliceEigen>, BlochError> {
    check_cutoff(pot, cutoff)?;
    let bs = BlockStructure::new(pot, ModeWindow::new(cutoff));
    let per_block: Result<Vec<Vec<SliceEigen>>, BlochError> = bs
        .blocks
        .par_iter()
        .enumerate()
        .map(|(bi, modes)| {
            let m = dtilde_on(pot, lat, xp, modes)?;
            let ev = eigenvalues(m)?;
            Ok(ev
                .into_iter()
                .map(|l| {
                    let yp = l / PI;
                    SliceEigen { yp, block: bi, free_label: free_label(lat, xp, yp, modes) }
                })
                .collect())
        })
        .collect();
    let mut out: Vec<SliceEigen> = per_block?.into_iter().flatten().collect();
    sort_slice(&mut out);
    Ok(out)
}

/// Slice restricted to the block containing `mode`.
pub fn fermi_slice_block(
    pot: &FourierPotential,
    lat: &Lattice,
    xp: Complex64,
    cutoff: i64,
    mode: Mode,
) -> Result<Vec<Complex64>, BlochError> {
    check_cutoff(pot, cutoff)?;
    let bs = BlockStructure::new(pot, ModeWindow::new(cutoff));
    let b = bs.block_of(mode).ok_or(BlochError::CutoffTooSmall { cutoff, support: mode.0.abs().max(mode.1.abs()) })?;
    let ev = eigenvalues(dtilde_on(pot, lat, xp, &bs.blocks[b])?)?;
    Ok(ev.into_iter().map(|l| l / PI).collect())
}

/// Just the `y‑p` values.
pub fn slice_values(pot: &FourierPotential, lat: &Lattice, xp: Complex64, cutoff: i64) -> Result<Vec<Complex64>, BlochError> {
    Ok(fermi_slice(pot, lat, xp, cutoff)?.into_iter().map(|e| e.yp).collect())
}

/// Smallest singular value of `D(V,W,k)` relative to `‖D‖`.
pub fn relative_smallest_singular(pot: &FourierPotential, lat: &Lattice, k: CVec2, cutoff: i64) -> Result<f64, BlochError> {
    check_cutoff(pot, cutoff)?;
    let bs = BlockStructure::new(pot, ModeWindow::new(cutoff));
    let (smin, smax) = bs
        .blocks
        .par_iter()
        .map(|modes| {
            let sv = assemble_on(pot, lat, k, modes, false).singular_values();
            (sv.min(), sv.max())
        })
        .reduce(|| (f64::INFINITY, 0.0), |a, b| (a.0.min(b.0), a.1.max(b.1)));
    Ok(smin / smax.max(f64::MIN_POSITIVE))
}

/// A kernel vector of the truncated operator.
#[derive(Debug, Clone)]
pub struct KernelSpinor {
    pub k: CVec2,
    pub window: ModeWindow,
    /// Coefficients of `ψ₁` over the window, in window order.
    pub psi1: Vec<Complex64>,
    pub psi2: Vec<Complex64>,
    /// Values `exp(2πi g(γ,k)) ∈ {±1}` on the generators, when `k` is a half-lattice point.
    pub character: Option<[i8; 2]>,
    pub singular_value: f64,
}

/// Character signs when `2k ∈ Λ*` is real.
pub fn half_lattice_character(lat: &Lattice, k: CVec2) -> Option<[i8; 2]> {
    if k[0].im.abs() > 1e-12 || k[1].im.abs() > 1e-12 {
        return None;
    }
    let (x, y) = lat.quasi_momenta(k);
    let sign = |t: f64| -> Option<i8> {
        let d = 2.0 * t;
        if (d - d.round()).abs() > 1e-9 {
            return None;
        }
        Some(if (d.round() as i64).rem_euclid(2) == 0 { 1 } else { -1 })
    };
    Some([sign(x.re)?, sign(y.re)?])
}

impl KernelSpinor {
    pub fn coeff(&self, n: Mode) -> (Complex64, Complex64) {
        match self.window.index(n) {
            Some(i) => (self.psi1[i], self.psi2[i]),
            None => (ZERO, ZERO),
        }
    }

    pub fn norm(&self) -> f64 {
        self.psi1.iter().chain(self.psi2.iter()).map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Interleaved coefficient vector matching the matrix ordering.
    pub fn as_vector(&self) -> DVector<Complex64> {
        let n = self.window.len();
        DVector::from_fn(2 * n, |r, _| if r % 2 == 0 { self.psi1[r / 2] } else { self.psi2[r / 2] })
    }

    pub fn from_vector(k: CVec2, window: ModeWindow, v: &DVector<Complex64>, lat: &Lattice, singular_value: f64) -> Self {
        let n = window.len();
        KernelSpinor {
            k,
            window,
            psi1: (0..n).map(|i| v[2 * i]).collect(),
            psi2: (0..n).map(|i| v[2 * i + 1]).collect(),
            character: half_lattice_character(lat, k),
            singular_value,
        }
    }

    /// Modes carrying weight above `tol` relative to the largest coefficient.
    pub fn support(&self, tol: f64) -> Vec<Mode> {
        let mx = self.psi1.iter().chain(self.psi2.iter()).map(|c| c.norm()).fold(0.0, f64::max);
        (0..self.window.len())
            .filter(|&i| self.psi1[i].norm().max(self.psi2[i].norm()) > tol * mx)
            .map(|i| self.window.mode(i))
            .collect()
    }

    /// `J(ψ₁,ψ₂) = (ψ₂, −ψ₁)`, same character.
    pub fn j(&self) -> Self {
        KernelSpinor {
            psi1: self.psi2.clone(),
            psi2: self.psi1.iter().map(|c| -c).collect(),
            ..self.clone()
        }
    }

    /// Pointwise complex conjugate: character `−k̄`, coefficient of mode `n` moves to `−n`.
    pub fn conjugate(&self, lat: &Lattice) -> Self {
        let w = self.window;
        let flip = |v: &[Complex64]| -> Vec<Complex64> {
            (0..w.len())
                .map(|i| {
                    let (a, b) = w.mode(i);
                    v[w.index((-a, -b)).expect("window is symmetric")].conj()
                })
                .collect()
        };
        let k = [-self.k[0].conj(), -self.k[1].conj()];
        KernelSpinor {
            k,
            window: w,
            psi1: flip(&self.psi1),
            psi2: flip(&self.psi2),
            character: half_lattice_character(lat, k),
            singular_value: self.singular_value,
        }
    }
}

/// Kernel vectors and the threshold data they were selected with.
#[derive(Debug, Clone)]
pub struct KernelSet {
    pub spinors: Vec<KernelSpinor>,
    /// Largest block singular value, used as `‖D‖`.
    pub norm: f64,
    pub threshold: f64,
    /// Set when some singular value falls in the ambiguity band `[1e−10, 1e−6]·‖D‖`.
    pub ambiguity: Option<String>,
}

impl KernelSet {
    pub fn dim(&self) -> usize {
        self.spinors.len()
    }
}

pub const KERNEL_REL_TOL: f64 = 1e-8;

/// Singular vectors of `D(V,W,k)` with singular value below `1e−8·‖D‖`.
pub fn kernel_at(pot: &FourierPotential, lat: &Lattice, k: CVec2, cutoff: i64) -> Result<KernelSet, BlochError> {
    check_cutoff(pot, cutoff)?;
    let window = ModeWindow::new(cutoff);
    let bs = BlockStructure::new(pot, window);
    let svds: Vec<(usize, SVD<Complex64, nalgebra::Dyn, nalgebra::Dyn>)> = bs
        .blocks
        .par_iter()
        .enumerate()
        .map(|(bi, modes)| (bi, SVD::new(assemble_on(pot, lat, k, modes, false), false, true)))
        .collect();
    let norm = svds.iter().map(|(_, s)| s.singular_values.max()).fold(0.0, f64::max);
    let threshold = KERNEL_REL_TOL * norm;
    let mut spinors = Vec::new();
    let mut band = Vec::new();
    for (bi, svd) in &svds {
        let modes = &bs.blocks[*bi];
        let vt = svd.v_t.as_ref().expect("right singular vectors requested");
        for (r, &s) in svd.singular_values.iter().enumerate() {
            let rel = s / norm.max(f64::MIN_POSITIVE);
            if (1e-10..=1e-6).contains(&rel) {
                band.push(rel);
            }
            if s < threshold {
                let mut v = DVector::from_element(2 * window.len(), ZERO);
                for (i, &m) in modes.iter().enumerate() {
                    let gi = window.index(m).expect("mode in window");
                    // rows of Vᴴ are conjugated right singular vectors
                    v[2 * gi] = vt[(r, 2 * i)].conj();
                    v[2 * gi + 1] = vt[(r, 2 * i + 1)].conj();
                }
                spinors.push(KernelSpinor::from_vector(k, window, &v, lat, s));
            }
        }
    }
    spinors.sort_by(|a, b| a.singular_value.total_cmp(&b.singular_value));
    let ambiguity = if band.is_empty() {
        None
    } else {
        Some(format!("{} singular value(s) in the ambiguity band, smallest relative {:.3e}", band.len(), band.iter().cloned().fold(f64::INFINITY, f64::min)))
    };
    Ok(KernelSet { spinors, norm, threshold, ambiguity })
}

/// `‖Mψ‖ / (‖M‖·‖ψ‖)` for a truncated operator applied block-wise.
pub fn relative_residual(pot: &FourierPotential, lat: &Lattice, spinor: &KernelSpinor, transposed: bool) -> f64 {
    let window = spinor.window;
    let bs = BlockStructure::new(pot, window);
    let mut res2 = 0.0;
    let mut norm: f64 = 0.0;
    for modes in &bs.blocks {
        let m = assemble_on(pot, lat, spinor.k, modes, transposed);
        norm = norm.max(m.singular_values().max());
        let v = DVector::from_fn(2 * modes.len(), |r, _| {
            let (a, b) = spinor.coeff(modes[r / 2]);
            if r % 2 == 0 {
                a
            } else {
                b
            }
        });
        res2 += (m * v).norm_squared();
    }
    res2.sqrt() / (norm * spinor.norm()).max(f64::MIN_POSITIVE)
}

/// `(∫ψ₁², ∫ψ₂², ∫ψ₁ψ̄₂)` over a fundamental cell, by Parseval.
pub fn periodicity_integrals(spinor: &KernelSpinor, lat: &Lattice) -> Result<(Complex64, Complex64, Complex64), BlochError> {
    let k = spinor.k;
    if half_lattice_character(lat, k).is_none() {
        return Err(BlochError::NotHalfLattice(k));
    }
    let (x, y) = lat.quasi_momenta(k);
    let m = ((2.0 * x.re).round() as i64, (2.0 * y.re).round() as i64);
    let w = spinor.window;
    let vol = lat.vol();
    let mut i1 = ZERO;
    let mut i2 = ZERO;
    let mut i3 = ZERO;
    for i in 0..w.len() {
        let (a, b) = w.mode(i);
        let (p1, p2) = (spinor.psi1[i], spinor.psi2[i]);
        if let Some(j) = w.index((-m.0 - a, -m.1 - b)) {
            i1 += p1 * spinor.psi1[j];
            i2 += p2 * spinor.psi2[j];
        }
        i3 += p1 * p2.conj();
    }
    Ok((vol * i1, vol * i2, vol * i3))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Involution {
    /// `k ↦ −k`, needs `W = V`.
    Sigma,
    /// `k ↦ k̄`, needs real `V = W`.
    Rho,
    /// `k ↦ −k̄`, needs `W = V̄`.
    Eta,
}

/// Transported kernel data.
#[derive(Debug, Clone)]
pub struct InvolutionImage {
    pub involution: Involution,
    /// Image point on the Fermi curve.
    pub point: CVec2,
    /// Transformed spinor, a kernel vector of `operator`.
    pub spinor: KernelSpinor,
    pub operator: FourierPotential,
    pub transposed: bool,
    pub residual: f64,
}

/// Applies one involution to a kernel spinor and measures the residual in the target operator.
pub fn involution_image(
    spinor: &KernelSpinor,
    pot: &FourierPotential,
    lat: &Lattice,
    inv: Involution,
) -> Result<InvolutionImage, BlochError> {
    let k = spinor.k;
    let tol = 1e-12;
    let (point, image, op, transposed) = match inv {
        Involution::Sigma => {
            if pot.v_coeffs() != pot.w_coeffs() {
                return Err(BlochError::SymmetryMismatch(Symmetry::SigmaReal));
            }
            ([-k[0], -k[1]], spinor.j(), pot.swapped(), true)
        }
        Involution::Rho => {
            if !pot.satisfies(Symmetry::SigmaReal, tol) {
                return Err(BlochError::SymmetryMismatch(Symmetry::SigmaReal));
            }
            ([k[0].conj(), k[1].conj()], spinor.conjugate(lat), pot.conjugated(), true)
        }
        Involution::Eta => {
            if !pot.satisfies(Symmetry::EtaPair, tol) {
                return Err(BlochError::SymmetryMismatch(Symmetry::EtaPair));
            }
            ([-k[0].conj(), -k[1].conj()], spinor.conjugate(lat).j(), pot.conjugated().swapped(), false)
        }
    };
    let residual = relative_residual(&op, lat, &image, transposed);
    Ok(InvolutionImage { involution: inv, point, spinor: image, operator: op, transposed, residual })
}

/// All involutions permitted by the potential's symmetries.
pub fn involution_images(spinor: &KernelSpinor, pot: &FourierPotential, lat: &Lattice) -> Vec<InvolutionImage> {
    [Involution::Sigma, Involution::Rho, Involution::Eta]
        .into_iter()
        .filter_map(|i| involution_image(spinor, pot, lat, i).ok())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn window_roundtrip() {
        let w = ModeWindow::new(3);
        for i in 0..w.len() {
            assert_eq!(w.index(w.mode(i)), Some(i));
        }
        assert_eq!(w.mode(0), (-3, -3));
        assert_eq!(w.mode(1), (-3, -2));
    }

    #[test]
    fn blocks_follow_support() {
        let w = ModeWindow::new(2);
        assert_eq!(BlockStructure::new(&FourierPotential::zero(), w).blocks.len(), 25);
        let p = FourierPotential::single_mode(c(0.1, 0.0), (1, 0));
        let bs = BlockStructure::new(&p, w);
        assert_eq!(bs.blocks.len(), 5);
        assert!(bs.blocks.iter().all(|b| b.len() == 5));
    }

    #[test]
    fn free_slice_lines() {
        let lat = Lattice::square();
        let xp = c(0.3, 0.0);
        let s = slice_values(&FourierPotential::zero(), &lat, xp, 3).unwrap();
        for n1 in -3..=3 {
            for n2 in -3..=3 {
                for sg in [1.0, -1.0] {
                    let y = c(-(n2 as f64), 0.0) + sg * Complex64::i() * (xp + n1 as f64);
                    assert!(s.iter().any(|z| (z - y).norm() < 1e-10));
                }
            }
        }
    }

    #[test]
    fn constant_slice_real_pair() {
        let lat = Lattice::square();
        let s = slice_values(&FourierPotential::constant(PI / SQRT_2), &lat, c(0.0, 0.0), 2).unwrap();
        for t in [1.0 / SQRT_2, -1.0 / SQRT_2] {
            assert!(s.iter().any(|z| (z - t).norm() < 1e-8));
        }
    }

    #[test]
    fn mode_zero_determinant() {
        let lat = Lattice::square();
        let u = 0.7;
        let k = [c(0.2, 0.1), c(-0.3, 0.4)];
        let m = assemble_dirac(&FourierPotential::constant(u), &lat, k, 1).unwrap();
        let i0 = ModeWindow::new(1).index((0, 0)).unwrap();
        let b = m.matrix.view((2 * i0, 2 * i0), (2, 2));
        let det = b[(0, 0)] * b[(1, 1)] - b[(0, 1)] * b[(1, 0)];
        let i = Complex64::i();
        let expect = u * u + PI * PI * (k[1] + i * k[0]) * (-k[1] + i * k[0]);
        assert!((det - expect).norm() < 1e-12);
    }

    #[test]
    fn hermitian_for_real_potentials() {
        let lat = Lattice::square();
        let p = FourierPotential::clifford(3);
        let m = assemble_dirac(&p, &lat, [c(0.3, 0.0), c(-0.1, 0.0)], 3).unwrap().matrix;
        assert!((&m - m.adjoint()).norm() < 1e-14);
    }

    #[test]
    fn constant_kernel_at_half_point() {
        let lat = Lattice::square();
        let ks = kernel_at(&FourierPotential::constant(PI / SQRT_2), &lat, [c(0.5, 0.0), c(0.5, 0.0)], 3).unwrap();
        assert_eq!(ks.dim(), 4);
        for s in &ks.spinors {
            assert!(relative_residual(&FourierPotential::constant(PI / SQRT_2), &lat, s, false) < 1e-8);
            assert_eq!(s.character, Some([-1, -1]));
        }
    }

    #[test]
    fn free_plane_wave_kernel() {
        let lat = Lattice::square();
        let ks = kernel_at(&FourierPotential::zero(), &lat, [c(0.5, 0.0), c(0.0, 0.5)], 2).unwrap();
        assert!(ks.dim() >= 1);
        assert_eq!(ks.spinors[0].support(1e-12).len(), 1);
        let off = kernel_at(&FourierPotential::zero(), &lat, [c(0.31, 0.0), c(0.17, 0.02)], 2).unwrap();
        assert_eq!(off.dim(), 0);
    }

    #[test]
    fn periodicity_of_single_modes() {
        let lat = Lattice::square();
        let w = ModeWindow::new(1);
        let mut v = DVector::from_element(2 * w.len(), ZERO);
        let i = w.index((0, 0)).unwrap();
        v[2 * i] = c(0.6, 0.0);
        v[2 * i + 1] = c(0.0, 0.8);
        let s = KernelSpinor::from_vector([c(0.5, 0.0), c(0.0, 0.0)], w, &v, &lat, 0.0);
        let (i1, i2, i3) = periodicity_integrals(&s, &lat).unwrap();
        assert!(i1.norm() < 1e-15 && i2.norm() < 1e-15);
        assert!((i3 - c(0.6, 0.0) * c(0.0, -0.8)).norm() < 1e-15);
        let s0 = KernelSpinor::from_vector([c(0.0, 0.0), c(0.0, 0.0)], w, &v, &lat, 0.0);
        assert!((periodicity_integrals(&s0, &lat).unwrap().0 - 0.36).norm() < 1e-15);
        let bad = KernelSpinor::from_vector([c(0.3, 0.0), c(0.0, 0.0)], w, &v, &lat, 0.0);
        assert!(periodicity_integrals(&bad, &lat).is_err());
    }
}
