//! Branch tracing over `x‑p` paths, handle moduli, Willmore evaluations and the
//! local picture of the curve over half-period points.

use crate::bloch::{eigenvalues, BlochError, BlockStructure, ModeWindow};
use crate::lattice::{free_double_points, gc, CVec2, HalfPeriodClass, Lattice};
use crate::potential::{FourierPotential, Mode, Symmetry};
use crate::spectral::periodic_derivative;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FermiError {
    #[error(transparent)]
    Bloch(#[from] BlochError),
    #[error("eigenvalue collision near x-p = {xp}, y-p = {yp}")]
    Collision { xp: Complex64, yp: Complex64 },
    #[error("handle not isolable: {0}")]
    NotIsolable(String),
    #[error("residue fit residual {0:.3e} exceeds 1e-4")]
    FitResidual(f64),
    #[error("ambiguous multiplicity: eigenvalue at distance {0:.3e} from the target")]
    AmbiguousMultiplicity(f64),
    #[error("potential symmetry {0:?} not supported here")]
    Symmetry(Symmetry),
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Block-wise `D̃` evaluator for one potential.
#[derive(Debug, Clone)]
pub struct Slicer<'a> {
    pub pot: &'a FourierPotential,
    pub lat: &'a Lattice,
    pub blocks: BlockStructure,
}

impl<'a> Slicer<'a> {
    pub fn new(pot: &'a FourierPotential, lat: &'a Lattice, cutoff: i64) -> Result<Self, FermiError> {
        let s = pot.support_radius();
        if cutoff < s {
            return Err(BlochError::CutoffTooSmall { cutoff, support: s }.into());
        }
        Ok(Slicer { pot, lat, blocks: BlockStructure::new(pot, ModeWindow::new(cutoff)) })
    }

    pub fn block_count(&self) -> usize {
        self.blocks.blocks.len()
    }

    pub fn block_of(&self, n: Mode) -> Option<usize> {
        self.blocks.block_of(n)
    }

    /// `y‑p` values of one block at `x‑p`.
    pub fn block_values(&self, b: usize, xp: Complex64) -> Result<Vec<Complex64>, FermiError> {
        let m = crate::bloch::assemble_dtilde_block(self.pot, self.lat, xp, &self.blocks.blocks[b])?;
        Ok(eigenvalues(m)?.into_iter().map(|l| l / PI).collect())
    }

    /// All values tagged with their block.
    pub fn values(&self, xp: Complex64) -> Result<Vec<(usize, Complex64)>, FermiError> {
        let mut out = Vec::new();
        for b in 0..self.block_count() {
            out.extend(self.block_values(b, xp)?.into_iter().map(|y| (b, y)));
        }
        Ok(out)
    }
}

/// Nearest value to `target` with the distance to the runner-up.
fn nearest(values: &[Complex64], target: Complex64) -> (usize, f64, f64) {
    let mut best = (0, f64::INFINITY);
    let mut second = f64::INFINITY;
    for (i, y) in values.iter().enumerate() {
        let d = (y - target).norm();
        if d < best.1 {
            second = best.1;
            best = (i, d);
        } else if d < second {
            second = d;
        }
    }
    (best.0, best.1, second)
}

/// One traced sheet over an `x‑p` path.
#[derive(Debug, Clone)]
pub struct FermiBranch {
    pub xp: Vec<Complex64>,
    pub yp: Vec<Complex64>,
    /// Distance between prediction and the matched eigenvalue at each sample.
    pub match_distance: Vec<f64>,
    /// Distance from the prediction to the nearest competing eigenvalue.
    pub local_gap: Vec<f64>,
    pub block: usize,
    pub closed: bool,
}

impl FermiBranch {
    pub fn endpoint_mismatch(&self) -> f64 {
        (self.yp[self.yp.len() - 1] - self.yp[0]).norm()
    }
}

const MAX_HALVINGS: u32 = 14;

impl<'a> Slicer<'a> {
    /// Follows one eigenvalue of block `b` from `(x0, y0)` to `x1`, halving steps on ambiguity.
    fn follow(
        &self,
        b: usize,
        x0: Complex64,
        y0: Complex64,
        slope: Option<Complex64>,
        x1: Complex64,
        depth: u32,
    ) -> Result<(Complex64, Complex64, f64, f64), FermiError> {
        let pred = y0 + slope.unwrap_or(ZERO) * (x1 - x0);
        let vals = self.block_values(b, x1)?;
        let (i, d, gap) = nearest(&vals, pred);
        if d < 0.5 * gap {
            let s = if x1 != x0 { (vals[i] - y0) / (x1 - x0) } else { slope.unwrap_or(ZERO) };
            return Ok((vals[i], s, d, gap));
        }
        if depth >= MAX_HALVINGS {
            return Err(FermiError::Collision { xp: x1, yp: pred });
        }
        let xm = 0.5 * (x0 + x1);
        let (ym, sm, _, _) = self.follow(b, x0, y0, slope, xm, depth + 1)?;
        self.follow(b, xm, ym, Some(sm), x1, depth + 1)
    }

    /// Traces the sheet through `seed_yp` at `path[0]` along `path`.
    pub fn trace(&self, path: &[Complex64], seed_yp: Complex64) -> Result<FermiBranch, FermiError> {
        let all = self.values(path[0])?;
        let (bi, _) = all
            .iter()
            .min_by(|a, b| (a.1 - seed_yp).norm().total_cmp(&(b.1 - seed_yp).norm()))
            .copied()
            .ok_or_else(|| FermiError::NotIsolable("empty spectrum".into()))?;
        let vals = self.block_values(bi, path[0])?;
        let (i0, d0, g0) = nearest(&vals, seed_yp);
        let mut br = FermiBranch {
            xp: vec![path[0]],
            yp: vec![vals[i0]],
            match_distance: vec![d0],
            local_gap: vec![g0],
            block: bi,
            closed: false,
        };
        let mut slope: Option<Complex64> = None;
        for w in path.windows(2) {
            let y0 = *br.yp.last().expect("nonempty");
            let (y, s, d, gap) = self.follow(bi, w[0], y0, slope, w[1], 0)?;
            slope = Some(s);
            br.xp.push(w[1]);
            br.yp.push(y);
            br.match_distance.push(d);
            br.local_gap.push(gap);
        }
        let path_closed = (path[0] - path[path.len() - 1]).norm() < 1e-14;
        br.closed = path_closed && br.endpoint_mismatch() < 1e-8;
        Ok(br)
    }
}

pub fn trace_branch(
    pot: &FourierPotential,
    lat: &Lattice,
    xp_path: &[Complex64],
    seed_yp: Complex64,
    cutoff: i64,
) -> Result<FermiBranch, FermiError> {
    if xp_path.is_empty() {
        return Err(FermiError::NotIsolable("empty path".into()));
    }
    Slicer::new(pot, lat, cutoff)?.trace(xp_path, seed_yp)
}

/// Closed circle `center + r·e^{iθ}` with `n` steps (first point repeated at the end).
pub fn circle_path(center: Complex64, radius: f64, n: usize) -> Vec<Complex64> {
    (0..=n).map(|j| center + Complex64::from_polar(radius, 2.0 * PI * j as f64 / n as f64)).collect()
}

/// Handle data for the coupling `V̂(κ)Ŵ(−κ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HandleModulus {
    pub kappa: Mode,
    /// Free double point `k⁺_{−κ}` the handle opens at.
    pub center: CVec2,
    /// Branch points in the `x‑p` plane.
    pub branch_points: [Complex64; 2],
    pub t_value: Complex64,
    /// `+1` when the traced sheet gave `t` directly, `−1` when it was flipped.
    pub orientation: i8,
    /// Change of `t` when the contour samples are doubled.
    pub refinement_change: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HandleOptions {
    pub search_radius: f64,
    pub samples: usize,
    pub contour_factor: f64,
}

impl Default for HandleOptions {
    fn default() -> Self {
        HandleOptions { search_radius: 0.2, samples: 256, contour_factor: 3.0 }
    }
}

impl<'a> Slicer<'a> {
    fn pair_near(&self, b: usize, xp: Complex64, yc: Complex64) -> Result<(Complex64, Complex64), FermiError> {
        let mut v = self.block_values(b, xp)?;
        v.sort_by(|a, c| (a - yc).norm().total_cmp(&(c - yc).norm()));
        if v.len() < 2 {
            return Err(FermiError::NotIsolable("block too small".into()));
        }
        Ok((v[0], v[1]))
    }

    fn discriminant(&self, b: usize, xp: Complex64, yc: Complex64) -> Result<Complex64, FermiError> {
        let (a, c) = self.pair_near(b, xp, yc)?;
        Ok((a - c) * (a - c))
    }

    /// Sheet values on a circle, continued by nearest matching from the value nearest `yc`.
    fn sheet_on_circle(&self, b: usize, m: Complex64, rho: f64, n: usize, yc: Complex64) -> Result<Vec<Complex64>, FermiError> {
        let path = circle_path(m, rho, n);
        let br = self.trace_in_block(b, &path, self.pair_near(b, path[0], yc)?.0)?;
        if br.endpoint_mismatch() > 1e-8 {
            return Err(FermiError::NotIsolable("sheet does not close on the handle contour".into()));
        }
        Ok(br.yp[..n].to_vec())
    }

    fn trace_in_block(&self, b: usize, path: &[Complex64], seed: Complex64) -> Result<FermiBranch, FermiError> {
        let mut br = FermiBranch {
            xp: vec![path[0]],
            yp: vec![seed],
            match_distance: vec![0.0],
            local_gap: vec![f64::INFINITY],
            block: b,
            closed: false,
        };
        let mut slope = None;
        for w in path.windows(2) {
            let y0 = *br.yp.last().expect("nonempty");
            let (y, s, d, gap) = self.follow(b, w[0], y0, slope, w[1], 0)?;
            slope = Some(s);
            br.xp.push(w[1]);
            br.yp.push(y);
            br.match_distance.push(d);
            br.local_gap.push(gap);
        }
        br.closed = br.endpoint_mismatch() < 1e-8;
        Ok(br)
    }

    /// `π∮k₁dk₂` along one sheet over the circle `m + ρe^{iθ}`.
    fn contour_t(&self, b: usize, m: Complex64, rho: f64, n: usize, yc: Complex64) -> Result<Complex64, FermiError> {
        let ys = self.sheet_on_circle(b, m, rho, n, yc)?;
        let dy = periodic_derivative(&ys);
        let (kh, kc) = self.lat.dual();
        let h = 2.0 * PI / n as f64;
        let mut s = ZERO;
        for j in 0..n {
            let e = Complex64::from_polar(1.0, h * j as f64);
            let xp = m + rho * e;
            let dxp = Complex64::i() * rho * e;
            let k1 = xp * kh[0] + ys[j] * kc[0];
            let dk2 = dxp * kh[1] + dy[j] * kc[1];
            s += k1 * dk2;
        }
        Ok(PI * s * h)
    }
}

/// Zeros of `f` inside the circle `|z − c| = r`, from its argument-principle moments.
fn zeros_in_circle(f: &dyn Fn(Complex64) -> Result<Complex64, FermiError>, c: Complex64, r: f64, n: usize) -> Result<Vec<Complex64>, FermiError> {
    let vals: Result<Vec<Complex64>, FermiError> =
        (0..n).map(|j| f(c + Complex64::from_polar(r, 2.0 * PI * j as f64 / n as f64))).collect();
    let vals = vals?;
    if vals.iter().any(|v| v.norm() == 0.0) {
        return Err(FermiError::NotIsolable("discriminant vanishes on the search circle".into()));
    }
    let dv = periodic_derivative(&vals);
    let moment = |p: i32| -> Complex64 {
        let mut s = ZERO;
        for j in 0..n {
            let z = Complex64::from_polar(r, 2.0 * PI * j as f64 / n as f64);
            s += z.powi(p) * dv[j] / vals[j];
        }
        s / (Complex64::i() * n as f64)
    };
    let count = moment(0).re.round() as i64;
    match count {
        0 => Ok(Vec::new()),
        2 => {
            let s1 = moment(1);
            let s2 = moment(2);
            let e2 = (s1 * s1 - s2) / 2.0;
            let disc = (s1 * s1 - 4.0 * e2).sqrt();
            Ok(vec![c + (s1 + disc) / 2.0, c + (s1 - disc) / 2.0])
        }
        k => Err(FermiError::NotIsolable(format!("{k} branch points inside the search circle"))),
    }
}

fn newton_refine(f: &dyn Fn(Complex64) -> Result<Complex64, FermiError>, mut z: Complex64, scale: f64) -> Result<Complex64, FermiError> {
    let h = 1e-6 * scale.max(1e-8);
    for _ in 0..30 {
        let fz = f(z)?;
        let d = (f(z + h)? - f(z - h)?) / (2.0 * h);
        if d.norm() == 0.0 {
            break;
        }
        let step = fz / d;
        z -= step;
        if step.norm() < 1e-14 * scale.max(1e-8) {
            break;
        }
    }
    Ok(z)
}

/// `t(κ) = π∮k₁dk₂` around the handle opened at `k⁺_{−κ}` by the coupling `V̂(κ)Ŵ(−κ)`.
pub fn handle_modulus_with(
    pot: &FourierPotential,
    lat: &Lattice,
    kappa: Mode,
    cutoff: i64,
    opts: HandleOptions,
) -> Result<HandleModulus, FermiError> {
    let sl = Slicer::new(pot, lat, cutoff)?;
    let (_, plus) = free_double_points(lat.dual_vector(kappa.0, kappa.1));
    let center = [-plus[0], -plus[1]];
    let (xc, yc) = lat.quasi_momenta(center);
    let b = sl.block_of((0, 0)).expect("origin is in the window");
    let disc = |x: Complex64| sl.discriminant(b, x, yc);
    let scale = disc(xc + opts.search_radius)?.norm().sqrt();
    let degenerate = |bp: [Complex64; 2]| HandleModulus {
        kappa,
        center,
        branch_points: bp,
        t_value: ZERO,
        orientation: 1,
        refinement_change: 0.0,
    };
    // an unperturbed crossing has Δ ≡ 0 along no circle; a tiny Δ scale signals no opening
    if sl.block_of(kappa) != Some(b) {
        // the two lines belong to uncoupled blocks and cross without opening
        return Ok(degenerate([xc, xc]));
    }
    let probe: f64 = (0..8)
        .map(|j| disc(xc + Complex64::from_polar(opts.search_radius, j as f64)).map(|d| d.norm()))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    if probe == 0.0 {
        return Ok(degenerate([xc, xc]));
    }
    let zs = zeros_in_circle(&disc, xc, opts.search_radius, opts.samples)?;
    if zs.is_empty() {
        return Err(FermiError::NotIsolable("no branch points near the double point".into()));
    }
    let b1 = newton_refine(&disc, zs[0], scale)?;
    let b2 = newton_refine(&disc, zs[1], scale)?;
    let sep = (b1 - b2).norm();
    if sep < 1e-12 {
        return Ok(degenerate([b1, b2]));
    }
    let m = 0.5 * (b1 + b2);
    let rho = opts.contour_factor * sep;
    let t1 = sl.contour_t(b, m, rho, opts.samples, yc)?;
    let t2 = sl.contour_t(b, m, rho, 2 * opts.samples, yc)?;
    let mut orientation = 1;
    let mut t = t2;
    if pot.satisfies(Symmetry::EtaPair, 1e-12) && t.re < 0.0 {
        t = -t;
        orientation = -1;
    }
    Ok(HandleModulus {
        kappa,
        center,
        branch_points: [b1, b2],
        t_value: t,
        orientation,
        refinement_change: (t2 - t1).norm(),
    })
}

pub fn handle_modulus(pot: &FourierPotential, lat: &Lattice, kappa: Mode, cutoff: i64) -> Result<HandleModulus, FermiError> {
    handle_modulus_with(pot, lat, kappa, cutoff, HandleOptions::default())
}

/// Handles for every first-order coupling `V̂(κ)Ŵ(−κ) ≠ 0` with `κ ≠ 0`.
pub fn handle_table(pot: &FourierPotential, lat: &Lattice, cutoff: i64) -> Result<Vec<HandleModulus>, FermiError> {
    let mut out = Vec::new();
    for (&(a, b), v) in pot.v_coeffs() {
        if (a, b) == (0, 0) || (v * pot.w_hat((-a, -b))).norm() == 0.0 {
            continue;
        }
        out.push(handle_modulus(pot, lat, (a, b), cutoff)?);
    }
    Ok(out)
}

/// `4∫VW d²x`.
pub fn willmore_pairing(pot: &FourierPotential, lat: &Lattice) -> Complex64 {
    pot.pairing(lat)
}

/// `4·vol·Σ t(κ)` over the handle table.
pub fn willmore_from_handles(handles: &[HandleModulus], lat: &Lattice) -> Complex64 {
    4.0 * lat.vol() * handles.iter().map(|h| h.t_value).sum::<Complex64>()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidueFit {
    pub willmore: Complex64,
    /// Coefficient `c` in `k₂ = i(k₁ − c/k₁) + …`.
    pub c: Complex64,
    /// Coefficients `a_j` of `k₂ − ik₁ = Σ a_j k₁^{−j}`.
    pub coefficients: Vec<Complex64>,
    pub max_residual: f64,
    pub samples: usize,
}

/// Fits the `∞⁺` sheet `k₂ − ik₁ = Σ_{j≤J} a_j/k₁^j` over `|x‑p| ∈ fit_range` and returns
/// `W = 8π²·vol·c` with `c = i·a₁`.
pub fn willmore_residue_fit(
    pot: &FourierPotential,
    lat: &Lattice,
    cutoff: i64,
    fit_range: Option<(f64, f64)>,
) -> Result<ResidueFit, FermiError> {
    let sl = Slicer::new(pot, lat, cutoff)?;
    let b = sl.block_of((0, 0)).expect("origin is in the window");
    let (lo, hi) = fit_range.unwrap_or((cutoff as f64 / 2.0, 0.75 * cutoff as f64));
    let (kh, kc) = lat.dual();
    let i = Complex64::i();
    let slope = (i * kh[0] - kh[1]) / (Complex64::new(kc[1], 0.0) - i * kc[0]);
    // keep away from the unopened crossings at half-integers
    let xs: Vec<f64> = (0..64)
        .map(|j| lo + (hi - lo) * (j as f64 + 0.5) / 64.0)
        .filter(|x| ((2.0 * x) - (2.0 * x).round()).abs() >= 0.3)
        .flat_map(|x| [x, -x])
        .collect();
    let mut rows: Vec<(Complex64, Complex64)> = Vec::new();
    for &x in &xs {
        let xp = Complex64::new(x, 0.0);
        let vals = sl.block_values(b, xp)?;
        let pred = slope * xp;
        let (idx, _, _) = nearest(&vals, pred);
        let k = lat.momentum(xp, vals[idx]);
        rows.push((k[0], k[1] - i * k[0]));
    }
    let jmax = 9;
    let a = DMatrix::from_fn(rows.len(), jmax, |r, c| rows[r].0.powi(-(c as i32 + 1)));
    let rhs = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.1));
    let svd = a.clone().svd(true, true);
    let sol = svd.solve(&rhs, 1e-14).map_err(|e| FermiError::NotIsolable(e.to_string()))?;
    let res = &a * &sol - &rhs;
    let scale = rows.iter().map(|r| r.1.norm()).fold(0.0, f64::max).max(1e-300);
    let max_residual = res.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let rel = if scale > 1e-14 { max_residual / scale } else { max_residual };
    if rel > 1e-4 {
        return Err(FermiError::FitResidual(rel));
    }
    let c = i * sol[0];
    Ok(ResidueFit {
        willmore: 8.0 * PI * PI * lat.vol() * c,
        c,
        coefficients: sol.iter().copied().collect(),
        max_residual,
        samples: rows.len(),
    })
}

/// `min_{κ′} |π²g(q,q) − uū|` with `q = k + k⁺_κ + κ′` over the window `|κ′| ≤ window`.
pub fn analytic_single_mode_curve(u: Complex64, kappa: Mode, lat: &Lattice, k: CVec2, window: i64) -> f64 {
    let (_, plus) = free_double_points(lat.dual_vector(kappa.0, kappa.1));
    let uu = u.norm_sqr();
    let mut best = f64::INFINITY;
    for a in -window..=window {
        for b in -window..=window {
            let kv = lat.dual_vector(a, b);
            let q = [k[0] + plus[0] + kv[0], k[1] + plus[1] + kv[1]];
            best = best.min((PI * PI * gc(q, q) - uu).norm());
        }
    }
    best
}

/// Orbit of sheets through a half-period point under the involutions.
#[derive(Debug, Clone, PartialEq)]
pub struct SheetOrbit {
    pub sheets: Vec<usize>,
    /// `1`, `2` or `3` when both `σ` and `ρ` act; `None` otherwise.
    pub orbit_type: Option<u8>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeakSingularityReport {
    pub class: HalfPeriodClass,
    pub point: (f64, f64),
    pub on_curve: bool,
    pub multiplicity: usize,
    /// `d y‑p / d x‑p` per sheet.
    pub slopes: Vec<Complex64>,
    /// Sheet indices swapped by `σ`, when available.
    pub sigma: Option<Vec<usize>>,
    /// Sheet indices swapped by `ρ`, when available.
    pub rho: Option<Vec<usize>>,
    /// Sheet indices swapped by `η`, when available.
    pub eta: Option<Vec<usize>>,
    pub orbits: Vec<SheetOrbit>,
    /// Per sheet: nontrivial monodromy around the point.
    pub cusp: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularityOptions {
    pub tol: f64,
    pub delta: f64,
    pub steps: usize,
}

impl Default for SingularityOptions {
    fn default() -> Self {
        SingularityOptions { tol: 1e-6, delta: 1e-3, steps: 48 }
    }
}

fn match_perm(from: &[Complex64], to: &[Complex64]) -> Vec<usize> {
    from.iter().map(|y| nearest(to, *y).0).collect()
}

fn orbits(n: usize, gens: &[&Vec<usize>]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        let mut orbit = vec![s];
        seen[s] = true;
        let mut i = 0;
        while i < orbit.len() {
            let x = orbit[i];
            for g in gens {
                let y = g[x];
                if !seen[y] {
                    seen[y] = true;
                    orbit.push(y);
                }
            }
            i += 1;
        }
        orbit.sort_unstable();
        out.push(orbit);
    }
    out
}

fn classify(orbit: &[usize], sigma: &[usize], rho: &[usize]) -> Option<u8> {
    let sig_fixed = orbit.iter().filter(|&&s| sigma[s] == s).count();
    let rho_fixed = orbit.iter().filter(|&&s| rho[s] == s).count();
    match (orbit.len(), sig_fixed, rho_fixed) {
        (2, 0, 2) => Some(1),
        (2, 2, 0) => Some(2),
        (4, 0, 0) => Some(3),
        _ => None,
    }
}

/// Local structure of the curve over the half-period point `κ/2`.
pub fn weak_singularity_report_with(
    pot: &FourierPotential,
    lat: &Lattice,
    c: HalfPeriodClass,
    cutoff: i64,
    opts: SingularityOptions,
) -> Result<WeakSingularityReport, FermiError> {
    let has_sigma = pot.v_coeffs() == pot.w_coeffs();
    let has_rho = pot.satisfies(Symmetry::SigmaReal, 1e-12);
    let has_eta = pot.satisfies(Symmetry::EtaPair, 1e-12);
    if !has_rho && !has_eta {
        return Err(FermiError::Symmetry(pot.symmetry()));
    }
    let sl = Slicer::new(pot, lat, cutoff)?;
    let x0 = 0.5 * c.r1 as f64;
    let y0 = 0.5 * c.r2 as f64;
    let xc = Complex64::new(x0, 0.0);
    let yc = Complex64::new(y0, 0.0);
    let mut hits: Vec<(usize, Complex64)> = Vec::new();
    for (b, y) in sl.values(xc)? {
        let d = (y - yc).norm();
        if d < opts.tol {
            hits.push((b, y));
        } else if d < 100.0 * opts.tol {
            return Err(FermiError::AmbiguousMultiplicity(d));
        }
    }
    let n = hits.len();
    let mut report = WeakSingularityReport {
        class: c,
        point: (x0, y0),
        on_curve: n > 0,
        multiplicity: n,
        slopes: Vec::new(),
        sigma: None,
        rho: None,
        eta: None,
        orbits: Vec::new(),
        cusp: Vec::new(),
    };
    if n == 0 {
        return Ok(report);
    }
    let d = opts.delta;
    // sheets at x0 + δ: the n values nearest y0 in the blocks that hit
    let mut plus: Vec<(usize, Complex64)> = Vec::new();
    let mut blocks: Vec<usize> = hits.iter().map(|h| h.0).collect();
    blocks.sort_unstable();
    blocks.dedup();
    for &b in &blocks {
        let want = hits.iter().filter(|h| h.0 == b).count();
        let mut v = sl.block_values(b, xc + d)?;
        v.sort_by(|p, q| (p - yc).norm().total_cmp(&(q - yc).norm()));
        plus.extend(v.into_iter().take(want).map(|y| (b, y)));
    }
    // continue each sheet along the upper semicircle to x0 − δ, and on to a full turn
    let half: Vec<Complex64> = (0..=opts.steps)
        .map(|j| xc + Complex64::from_polar(d, PI * j as f64 / opts.steps as f64))
        .collect();
    let lower: Vec<Complex64> = (0..=opts.steps)
        .map(|j| xc + Complex64::from_polar(d, PI + PI * j as f64 / opts.steps as f64))
        .collect();
    let mut minus = Vec::with_capacity(n);
    for &(b, y) in &plus {
        let up = sl.trace_in_block(b, &half, y)?;
        let ym = *up.yp.last().expect("nonempty");
        let down = sl.trace_in_block(b, &lower, ym)?;
        let back = *down.yp.last().expect("nonempty");
        minus.push(ym);
        report.slopes.push((y - ym) / (2.0 * d));
        report.cusp.push((back - y).norm() > 1e-3 * d);
    }
    let yplus: Vec<Complex64> = plus.iter().map(|p| p.1).collect();
    if has_sigma {
        let img: Vec<Complex64> = yplus.iter().map(|y| 2.0 * yc - y).collect();
        report.sigma = Some(match_perm(&img, &minus));
    }
    if has_rho {
        let img: Vec<Complex64> = yplus.iter().map(|y| y.conj()).collect();
        report.rho = Some(match_perm(&img, &yplus));
    }
    if has_eta {
        // η: (x,y) ↦ (−x̄, −ȳ), shifted back by (2x0, 2y0)
        let img: Vec<Complex64> = yplus.iter().map(|y| 2.0 * yc - y.conj()).collect();
        report.eta = Some(match_perm(&img, &minus));
    }
    let gens: Vec<&Vec<usize>> = [&report.sigma, &report.rho, &report.eta].into_iter().flatten().collect();
    for o in orbits(n, &gens) {
        let t = match (&report.sigma, &report.rho) {
            (Some(s), Some(r)) => classify(&o, s, r),
            _ => None,
        };
        report.orbits.push(SheetOrbit { sheets: o, orbit_type: t });
    }
    Ok(report)
}

pub fn weak_singularity_report(
    pot: &FourierPotential,
    lat: &Lattice,
    c: HalfPeriodClass,
    cutoff: i64,
) -> Result<WeakSingularityReport, FermiError> {
    weak_singularity_report_with(pot, lat, c, cutoff, SingularityOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn free_line_trace() {
        let lat = Lattice::square();
        let path: Vec<Complex64> = (0..=97).map(|j| c(0.3 + j as f64 / 97.0, 0.0)).collect();
        let br = trace_branch(&FourierPotential::zero(), &lat, &path, c(0.0, 0.3), 4).unwrap();
        for (x, y) in br.xp.iter().zip(&br.yp) {
            assert!((y - Complex64::i() * x).norm() < 1e-9);
        }
    }

    #[test]
    fn single_mode_handle() {
        let lat = Lattice::square();
        let pot = FourierPotential::single_mode(c(0.1, 0.0), (1, 0));
        let h = handle_modulus(&pot, &lat, (1, 0), 4).unwrap();
        assert!((h.t_value - 0.01).norm() < 1e-6, "{:?}", h);
        assert!(h.refinement_change < 1e-8);
        let r = 0.1 / PI;
        let mut bp = h.branch_points.to_vec();
        bp.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert!((bp[0] - c(-0.5 - r, 0.0)).norm() < 1e-6 && (bp[1] - c(-0.5 + r, 0.0)).norm() < 1e-6);
    }

    #[test]
    fn zero_potential_handle_vanishes() {
        let lat = Lattice::square();
        let h = handle_modulus(&FourierPotential::zero(), &lat, (1, 0), 3).unwrap();
        assert_eq!(h.t_value, ZERO);
    }

    #[test]
    fn residue_fit_constant() {
        let lat = Lattice::square();
        let u = PI / SQRT_2;
        let f = willmore_residue_fit(&FourierPotential::constant(u), &lat, 4, None).unwrap();
        assert!((f.c - u * u / (2.0 * PI * PI)).norm() < 1e-6, "{:?}", f);
        assert!((f.willmore.re - 2.0 * PI * PI).abs() < 0.01 * 2.0 * PI * PI);
    }

    #[test]
    fn weak_singularity_constant() {
        let lat = Lattice::square();
        let pot = FourierPotential::constant(PI / SQRT_2);
        let r = weak_singularity_report(&pot, &lat, HalfPeriodClass::BOTH, 3).unwrap();
        assert!(r.on_curve);
        assert_eq!(r.multiplicity, 4);
        for s in &r.slopes {
            assert!((s.norm() - 1.0).abs() < 1e-3);
        }
        assert_eq!(r.orbits.len(), 2);
        assert!(r.orbits.iter().all(|o| o.orbit_type == Some(1)));
        let off = weak_singularity_report(&FourierPotential::constant(1.0), &lat, HalfPeriodClass::BOTH, 3).unwrap();
        assert!(!off.on_curve);
    }

    #[test]
    fn weak_singularity_free() {
        let lat = Lattice::square();
        let r = weak_singularity_report(&FourierPotential::zero(), &lat, HalfPeriodClass::ZERO, 2).unwrap();
        assert_eq!(r.multiplicity, 2);
        assert_eq!(r.orbits.len(), 1);
        assert_eq!(r.orbits[0].orbit_type, Some(2));
    }
}
