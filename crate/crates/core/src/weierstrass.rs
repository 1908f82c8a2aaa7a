//! Periodicity solver, Weierstrass immersion and curvature quadrature.

use crate::backlund::{BacklundError, GridSpinor};
use crate::bloch::{half_lattice_character, periodicity_integrals, BlochError, KernelSpinor};
use crate::fermi::WeakSingularityReport;
use crate::lattice::{Lattice, Vec2};
use crate::spectral::{fft2, ifft2};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeierstrassError {
    #[error("kernel has dimension {0}, at least 2 is needed")]
    KernelTooSmall(usize),
    #[error("kernel vectors do not share one half-lattice momentum")]
    MixedMomenta,
    #[error("no Weierstrass potential in this gauge: orbit slopes {alpha} and {beta} are neither equal nor conjugate")]
    SlopeCondition { alpha: Complex64, beta: Complex64 },
    #[error("no admissible combination found (best residual {0:.3e})")]
    NoSolution(f64),
    #[error("periodicity integrals too large ({0:.3e}); the immersion does not close")]
    NotClosed(f64),
    #[error("metric degenerates (determinant {0:.3e})")]
    DegenerateMetric(f64),
    #[error(transparent)]
    Bloch(#[from] BlochError),
    #[error(transparent)]
    Backlund(#[from] BacklundError),
}

pub const SOLVE_TOL: f64 = 1e-10;
pub const CLOSED_TOL: f64 = 1e-8;
pub const SLOPE_TOL: f64 = 1e-8;

/// Which closed form of the two-orbit lemma applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlopeCase {
    /// `α = β`: `(z₃, z₄) = (iz₁, −iz₂)`.
    Equal,
    /// `α = β̄`: `(z₃, z₄) = (z₂, −z₁)`.
    Conjugate,
}

/// Checks the two-orbit slope condition.
pub fn slope_case(alpha: Complex64, beta: Complex64) -> Result<SlopeCase, WeierstrassError> {
    let scale = 1.0 + alpha.norm().max(beta.norm());
    if (alpha - beta).norm() <= SLOPE_TOL * scale {
        Ok(SlopeCase::Equal)
    } else if (alpha - beta.conj()).norm() <= SLOPE_TOL * scale {
        Ok(SlopeCase::Conjugate)
    } else {
        Err(WeierstrassError::SlopeCondition { alpha, beta })
    }
}

/// Left-hand sides of the four bilinear equations of the two-orbit lemma.
pub fn two_orbit_equations(alpha: Complex64, beta: Complex64, z: [Complex64; 4]) -> [Complex64; 4] {
    let [z1, z2, z3, z4] = z;
    [
        z1 * z2.conj() + z1.conj() * z2 + z3 * z4.conj() + z3.conj() * z4,
        z1 * z1 - z2 * z2 + z3 * z3 - z4 * z4,
        alpha * z1 * z2.conj() + alpha.conj() * z1.conj() * z2 + beta * z3 * z4.conj() + beta.conj() * z3.conj() * z4,
        alpha * z1 * z1 - alpha.conj() * z2 * z2 + beta * z3 * z3 - beta.conj() * z4 * z4,
    ]
}

/// Closed-form solution `(z₁, z₂, z₃, z₄)` for given `z₁`, `z₂`.
pub fn two_orbit_solution(case: SlopeCase, z1: Complex64, z2: Complex64) -> [Complex64; 4] {
    let i = Complex64::i();
    match case {
        SlopeCase::Equal => [z1, z2, i * z1, -i * z2],
        SlopeCase::Conjugate => [z1, z2, z2, -z1],
    }
}

/// One slope per orbit, taken at the first sheet of the orbit.
pub fn orbit_slopes(report: &WeakSingularityReport) -> Vec<Complex64> {
    report.orbits.iter().filter_map(|o| o.sheets.first().map(|&s| report.slopes[s])).collect()
}

/// Matrices of `∫ψ₁ψ₁′`, `∫ψ₂ψ₂′` and `∫ψ₁ψ̄₂′` over a kernel basis.
#[derive(Debug, Clone)]
struct Forms {
    a: DMatrix<Complex64>,
    b: DMatrix<Complex64>,
    h: DMatrix<Complex64>,
}

fn forms(kernel: &[KernelSpinor], lat: &Lattice) -> Result<Forms, WeierstrassError> {
    let k = kernel[0].k;
    let (x, y) = lat.quasi_momenta(k);
    let m = ((2.0 * x.re).round() as i64, (2.0 * y.re).round() as i64);
    let d = kernel.len();
    let w = kernel[0].window;
    let vol = lat.vol();
    let mut a = DMatrix::zeros(d, d);
    let mut b = DMatrix::zeros(d, d);
    let mut h = DMatrix::zeros(d, d);
    for (p, sp) in kernel.iter().enumerate() {
        for (q, sq) in kernel.iter().enumerate() {
            let mut s = [Complex64::default(); 3];
            for i in 0..w.len() {
                let (n1, n2) = w.mode(i);
                if let Some(j) = w.index((-m.0 - n1, -m.1 - n2)) {
                    s[0] += sp.psi1[i] * sq.psi1[j];
                    s[1] += sp.psi2[i] * sq.psi2[j];
                }
                s[2] += sp.psi1[i] * sq.psi2[i].conj();
            }
            a[(p, q)] = vol * s[0];
            b[(p, q)] = vol * s[1];
            h[(p, q)] = vol * s[2];
        }
    }
    let sym = |m: DMatrix<Complex64>| (&m + m.transpose()) * Complex64::new(0.5, 0.0);
    Ok(Forms { a: sym(a), b: sym(b), h })
}

impl Forms {
    fn integrals(&self, c: &DVector<Complex64>) -> [Complex64; 3] {
        let cc = c.map(|z| z.conj());
        [(c.transpose() * &self.a * c)[0], (c.transpose() * &self.b * c)[0], (c.transpose() * &self.h * cc)[0]]
    }

    /// Real residual vector and Jacobian in `(Re c, Im c)`.
    fn residual(&self, x: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let d = x.len() / 2;
        let c = DVector::from_fn(d, |i, _| Complex64::new(x[i], x[d + i]));
        let cc = c.map(|z| z.conj());
        let [i1, i2, i3] = self.integrals(&c);
        let norm2: f64 = c.iter().map(|z| z.norm_sqr()).sum();
        let r = DVector::from_vec(vec![i1.re, i1.im, i2.re, i2.im, i3.re, i3.im, norm2 - 1.0]);
        let ac = &self.a * &c * Complex64::new(2.0, 0.0);
        let bc = &self.b * &c * Complex64::new(2.0, 0.0);
        let hc = &self.h * &cc;
        let htc = self.h.transpose() * &c;
        let i = Complex64::i();
        let mut jac = DMatrix::zeros(7, 2 * d);
        for kx in 0..d {
            let cols = [
                (kx, ac[kx], bc[kx], hc[kx] + htc[kx], 2.0 * x[kx]),
                (d + kx, i * ac[kx], i * bc[kx], i * (hc[kx] - htc[kx]), 2.0 * x[d + kx]),
            ];
            for (col, da, db, dh, dn) in cols {
                let vals = [da.re, da.im, db.re, db.im, dh.re, dh.im, dn];
                for (row, v) in vals.iter().enumerate() {
                    jac[(row, col)] = *v;
                }
            }
        }
        (r, jac)
    }
}

fn levenberg_marquardt(f: &Forms, mut x: DVector<f64>) -> (DVector<f64>, f64) {
    let (mut r, mut j) = f.residual(&x);
    let mut cost = r.norm_squared();
    let mut lambda = 1e-3;
    for _ in 0..400 {
        if cost < 1e-30 {
            break;
        }
        let jt = j.transpose();
        let mut lhs = &jt * &j;
        for d in 0..lhs.nrows() {
            lhs[(d, d)] += lambda * (1.0 + lhs[(d, d)]);
        }
        let rhs = -(&jt * &r);
        let Some(step) = lhs.lu().solve(&rhs) else {
            break;
        };
        let trial = &x + &step;
        let (rt, jt2) = f.residual(&trial);
        let ct = rt.norm_squared();
        if ct < cost {
            x = trial;
            r = rt;
            j = jt2;
            cost = ct;
            lambda = (lambda * 0.3).max(1e-15);
        } else {
            lambda *= 4.0;
            if lambda > 1e12 {
                break;
            }
        }
    }
    let max_i = r.iter().take(6).fold(0.0f64, |m, v| m.max(v.abs()));
    (x, max_i)
}

#[derive(Debug, Clone)]
pub struct PeriodicitySolution {
    pub spinor: KernelSpinor,
    /// Coefficients over the input kernel basis, unit norm, largest entry real positive.
    pub coefficients: Vec<Complex64>,
    /// `(∫ψ₁², ∫ψ₂², ∫ψ₁ψ̄₂)` of the output.
    pub integrals: [Complex64; 3],
    pub slope_case: Option<SlopeCase>,
    /// Real dimension of the solution set near the output, phase direction included.
    pub family_dimension: usize,
}

fn combine(kernel: &[KernelSpinor], c: &[Complex64], lat: &Lattice) -> KernelSpinor {
    let w = kernel[0].window;
    let mut psi1 = vec![Complex64::default(); w.len()];
    let mut psi2 = psi1.clone();
    for (sp, &ci) in kernel.iter().zip(c) {
        for i in 0..w.len() {
            psi1[i] += ci * sp.psi1[i];
            psi2[i] += ci * sp.psi2[i];
        }
    }
    let sv = kernel.iter().map(|s| s.singular_value).fold(0.0, f64::max);
    KernelSpinor { k: kernel[0].k, window: w, psi1, psi2, character: half_lattice_character(lat, kernel[0].k), singular_value: sv }
}

/// Finds a kernel combination whose three periodicity integrals vanish.
///
/// `orbit_slopes` holds `d y‑p/d x‑p` at one point per orbit; with exactly two
/// orbits the slope condition is enforced before solving.
pub fn solve_periodicity_combination(
    kernel: &[KernelSpinor],
    lat: &Lattice,
    orbit_slopes: &[Complex64],
    seed: u64,
) -> Result<PeriodicitySolution, WeierstrassError> {
    if kernel.len() < 2 {
        return Err(WeierstrassError::KernelTooSmall(kernel.len()));
    }
    let k = kernel[0].k;
    if kernel.iter().any(|s| s.k != k || s.window != kernel[0].window) {
        return Err(WeierstrassError::MixedMomenta);
    }
    if half_lattice_character(lat, k).is_none() {
        return Err(BlochError::NotHalfLattice(k).into());
    }
    let slope_case = if orbit_slopes.len() == 2 { Some(slope_case(orbit_slopes[0], orbit_slopes[1])?) } else { None };
    let f = forms(kernel, lat)?;
    let d = kernel.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(DVector<f64>, f64)> = None;
    for _ in 0..64 {
        let x0 = DVector::from_fn(2 * d, |_, _| rng.random_range(-1.0..1.0));
        let x0 = &x0 / x0.norm();
        let (x, res) = levenberg_marquardt(&f, x0);
        if best.as_ref().is_none_or(|b| res < b.1) {
            best = Some((x, res));
        }
        if res < 1e-14 {
            break;
        }
    }
    let (x, res) = best.expect("at least one restart");
    if res > SOLVE_TOL {
        return Err(WeierstrassError::NoSolution(res));
    }
    let mut c: Vec<Complex64> = (0..d).map(|i| Complex64::new(x[i], x[d + i])).collect();
    let n = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let lead = *c.iter().max_by(|a, b| a.norm().total_cmp(&b.norm())).expect("nonempty");
    let phase = lead.conj() / lead.norm() / n;
    c.iter_mut().for_each(|z| *z *= phase);
    let (_, jac) = f.residual(&DVector::from_fn(2 * d, |i, _| if i < d { c[i].re } else { c[i - d].im }));
    let sv = jac.rows(0, 6).into_owned().svd(false, false).singular_values;
    let smax = sv.max().max(f64::MIN_POSITIVE);
    let rank = sv.iter().filter(|&&s| s > 1e-8 * smax).count();
    let spinor = combine(kernel, &c, lat);
    let (i1, i2, i3) = periodicity_integrals(&spinor, lat)?;
    Ok(PeriodicitySolution {
        spinor,
        coefficients: c,
        integrals: [i1, i2, i3],
        slope_case,
        family_dimension: 2 * d - rank - 1,
    })
}

/// Sampled immersion `X: ℝ²/Λ → ℝ³` with its Fourier data.
#[derive(Debug, Clone)]
pub struct ImmersionGrid {
    pub lattice: Lattice,
    pub n: usize,
    /// Coordinates, row-major over grid points `(j₁/n)γ̂ + (j₂/n)γ̌`.
    pub x: [Vec<f64>; 3],
    /// Fourier coefficients of each coordinate.
    pub coeffs: [Vec<Complex64>; 3],
    /// Periodicity integrals of the generating spinor.
    pub closedness: [Complex64; 3],
    /// Largest mismatch between the `dz` and `dz̄` parts of the integrated forms.
    pub exactness_defect: f64,
    /// `|χ₁|² + |χ₂|²` on the grid.
    pub density: Vec<f64>,
}

fn signed(j: usize, n: usize) -> i64 {
    if j <= n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

fn is_nyquist(j1: usize, j2: usize, n: usize) -> bool {
    n.is_multiple_of(2) && (j1 == n / 2 || j2 == n / 2)
}

/// Antiderivative `F` with `∂F = f`, `∂̄F = g` from Fourier data; returns the defect of `df = dg`.
fn antiderivative(lat: &Lattice, f: &[Complex64], g: &[Complex64], n: usize) -> (Vec<Complex64>, f64) {
    let mut out = vec![Complex64::default(); n * n];
    let mut defect: f64 = 0.0;
    let scale = f.iter().chain(g).map(|c| c.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    for j1 in 0..n {
        for j2 in 0..n {
            if (j1 == 0 && j2 == 0) || is_nyquist(j1, j2, n) {
                continue;
            }
            let idx = j1 * n + j2;
            let kv = lat.dual_vector(signed(j1, n), signed(j2, n));
            let a = PI * Complex64::new(kv[1], kv[0]);
            let b = PI * Complex64::new(-kv[1], kv[0]);
            out[idx] = (f[idx] * a.conj() + g[idx] * b.conj()) / (a.norm_sqr() + b.norm_sqr());
            defect = defect.max((f[idx] * b - g[idx] * a).norm() / (a.norm() * scale));
        }
    }
    (out, defect)
}

/// Coefficients of `Re u` and `Im u` from coefficients of a complex `u`.
fn real_imag_parts(c: &[Complex64], n: usize) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut re = vec![Complex64::default(); n * n];
    let mut im = re.clone();
    for j1 in 0..n {
        for j2 in 0..n {
            let idx = j1 * n + j2;
            let mirror = ((n - j1) % n) * n + (n - j2) % n;
            re[idx] = (c[idx] + c[mirror].conj()) / 2.0;
            im[idx] = (c[idx] - c[mirror].conj()) / (2.0 * Complex64::i());
        }
    }
    (re, im)
}

impl ImmersionGrid {
    /// Grid from sampled coordinates of a doubly periodic map.
    pub fn from_points(lat: &Lattice, n: usize, x: [Vec<f64>; 3]) -> Self {
        let coeffs = [0, 1, 2].map(|c| fft2(&x[c].iter().map(|&v| Complex64::new(v, 0.0)).collect::<Vec<_>>(), n));
        ImmersionGrid {
            lattice: *lat,
            n,
            x,
            coeffs,
            closedness: [Complex64::default(); 3],
            exactness_defect: 0.0,
            density: vec![1.0; n * n],
        }
    }

    pub fn point(&self, idx: usize) -> Vec2 {
        let (j1, j2) = (idx / self.n, idx % self.n);
        let (s1, s2) = (j1 as f64 / self.n as f64, j2 as f64 / self.n as f64);
        let (a, b) = (self.lattice.gen1, self.lattice.gen2);
        [s1 * a[0] + s2 * b[0], s1 * a[1] + s2 * b[1]]
    }

    /// Partial derivative of coordinate `c` along the plane axes listed in `axes`.
    pub fn derivative(&self, c: usize, axes: &[usize]) -> Vec<f64> {
        let n = self.n;
        let mut d = self.coeffs[c].clone();
        for j1 in 0..n {
            for j2 in 0..n {
                let idx = j1 * n + j2;
                if is_nyquist(j1, j2, n) {
                    d[idx] = Complex64::default();
                    continue;
                }
                let kv = self.lattice.dual_vector(signed(j1, n), signed(j2, n));
                for &ax in axes {
                    d[idx] *= Complex64::new(0.0, 2.0 * PI * kv[ax]);
                }
            }
        }
        ifft2(&d, n).into_iter().map(|z| z.re).collect()
    }

    fn first_and_second(&self) -> ([[Vec<f64>; 3]; 2], [[Vec<f64>; 3]; 3]) {
        let d1 = [0, 1].map(|ax| [0, 1, 2].map(|c| self.derivative(c, &[ax])));
        let d2 = [[0, 0], [0, 1], [1, 1]].map(|axes| [0, 1, 2].map(|c| self.derivative(c, &axes)));
        (d1, d2)
    }

    /// Writes `x y z` per grid node, row-major.
    pub fn write_mesh<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for i in 0..self.n * self.n {
            writeln!(w, "{:.12e} {:.12e} {:.12e}", self.x[0][i], self.x[1][i], self.x[2][i])?;
        }
        Ok(())
    }
}

fn relative_closedness(spinor: &KernelSpinor, lat: &Lattice) -> Result<[Complex64; 3], WeierstrassError> {
    let (i1, i2, i3) = periodicity_integrals(spinor, lat)?;
    Ok([i1, i2, i3])
}

/// Integrates `(Re(ψ₁²dz − ψ₂²dz̄), Im(ψ₁²dz − ψ₂²dz̄), ψ₁ψ̄₂dz + ψ̄₁ψ₂dz̄)` with `X(0) = 0`.
pub fn immersion_from_spinor(chi: &KernelSpinor, lat: &Lattice, n: usize) -> Result<ImmersionGrid, WeierstrassError> {
    let closedness = relative_closedness(chi, lat)?;
    let scale = lat.vol() * chi.norm().powi(2);
    let worst = closedness.iter().map(|c| c.norm()).fold(0.0, f64::max) / scale.max(f64::MIN_POSITIVE);
    if worst > CLOSED_TOL {
        return Err(WeierstrassError::NotClosed(worst));
    }
    let grid = GridSpinor::from_kernel(lat, chi, n)?;
    let (x, y) = lat.quasi_momenta(chi.k);
    let m = ((2.0 * x.re).round() as i64, (2.0 * y.re).round() as i64);
    let mut f1 = Vec::with_capacity(n * n);
    let mut g1 = Vec::with_capacity(n * n);
    let mut f3 = Vec::with_capacity(n * n);
    let mut density = Vec::with_capacity(n * n);
    for idx in 0..n * n {
        let (j1, j2) = (idx / n, idx % n);
        let e2k = Complex64::from_polar(1.0, 2.0 * PI * (m.0 * j1 as i64 + m.1 * j2 as i64) as f64 / n as f64);
        let (p1, p2) = (grid.phi[0][idx], grid.phi[1][idx]);
        f1.push(e2k * p1 * p1);
        g1.push(-e2k * p2 * p2);
        f3.push(p1 * p2.conj());
        density.push(p1.norm_sqr() + p2.norm_sqr());
    }
    let (f1c, g1c, f3c) = (fft2(&f1, n), fft2(&g1, n), fft2(&f3, n));
    let g3c: Vec<Complex64> = (0..n * n)
        .map(|idx| {
            let (j1, j2) = (idx / n, idx % n);
            f3c[((n - j1) % n) * n + (n - j2) % n].conj()
        })
        .collect();
    let (big1, def1) = antiderivative(lat, &f1c, &g1c, n);
    let (big3, def3) = antiderivative(lat, &f3c, &g3c, n);
    let (c1, c2) = real_imag_parts(&big1, n);
    let (c3, _) = real_imag_parts(&big3, n);
    let mut coeffs = [c1, c2, c3];
    for c in coeffs.iter_mut() {
        let at_origin: Complex64 = c.iter().sum();
        c[0] -= at_origin;
    }
    let xs = coeffs.clone().map(|c| ifft2(&c, n).into_iter().map(|z| z.re).collect());
    Ok(ImmersionGrid { lattice: *lat, n, x: xs, coeffs, closedness, exactness_defect: def1.max(def3), density })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WillmoreQuadrature {
    pub integral: f64,
    pub area: f64,
    pub min_metric_det: f64,
}

pub const METRIC_TOL: f64 = 1e-10;

/// `∫H²dμ` from spectral first and second fundamental forms.
pub fn willmore_quadrature(grid: &ImmersionGrid) -> Result<WillmoreQuadrature, WeierstrassError> {
    let (d1, d2) = grid.first_and_second();
    let dot = |a: &[Vec<f64>; 3], b: &[Vec<f64>; 3], i: usize| a[0][i] * b[0][i] + a[1][i] * b[1][i] + a[2][i] * b[2][i];
    let cell = grid.lattice.vol() / (grid.n * grid.n) as f64;
    let mut integral = 0.0;
    let mut area = 0.0;
    let mut min_det = f64::INFINITY;
    for i in 0..grid.n * grid.n {
        let (e, f, g) = (dot(&d1[0], &d1[0], i), dot(&d1[0], &d1[1], i), dot(&d1[1], &d1[1], i));
        let det = e * g - f * f;
        min_det = min_det.min(det);
        if det <= METRIC_TOL {
            return Err(WeierstrassError::DegenerateMetric(det));
        }
        let (u, v) = (&d1[0], &d1[1]);
        let nrm = [u[1][i] * v[2][i] - u[2][i] * v[1][i], u[2][i] * v[0][i] - u[0][i] * v[2][i], u[0][i] * v[1][i] - u[1][i] * v[0][i]];
        let s = det.sqrt();
        let second = |w: &[Vec<f64>; 3]| (w[0][i] * nrm[0] + w[1][i] * nrm[1] + w[2][i] * nrm[2]) / s;
        let (l, mm, nn) = (second(&d2[0]), second(&d2[1]), second(&d2[2]));
        let h = (e * nn - 2.0 * f * mm + g * l) / (2.0 * det);
        integral += h * h * s * cell;
        area += s * cell;
    }
    Ok(WillmoreQuadrature { integral, area, min_metric_det: min_det })
}

/// `max(|E−G|, |F|)/(E+G)` over grid points where the spinor density exceeds `1e−10·max`.
pub fn conformality_residual(grid: &ImmersionGrid) -> f64 {
    let d1 = [0, 1].map(|ax| [0, 1, 2].map(|c| grid.derivative(c, &[ax])));
    let dmax = grid.density.iter().cloned().fold(0.0, f64::max);
    let mut worst: f64 = 0.0;
    for i in 0..grid.n * grid.n {
        if grid.density[i] < 1e-10 * dmax {
            continue;
        }
        let dot = |a: usize, b: usize| (0..3).map(|c| d1[a][c][i] * d1[b][c][i]).sum::<f64>();
        let (e, f, g) = (dot(0, 0), dot(0, 1), dot(1, 1));
        worst = worst.max((e - g).abs() / (e + g)).max(f.abs() / (e + g));
    }
    worst
}

/// `∫H²dμ` at `n` and `2n` with the relative change.
pub fn willmore_convergence(chi: &KernelSpinor, lat: &Lattice, n: usize) -> Result<(f64, f64, f64), WeierstrassError> {
    let a = willmore_quadrature(&immersion_from_spinor(chi, lat, n)?)?.integral;
    let b = willmore_quadrature(&immersion_from_spinor(chi, lat, 2 * n)?)?.integral;
    Ok((a, b, (b - a).abs() / b.abs().max(f64::MIN_POSITIVE)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rand_c(rng: &mut ChaCha8Rng) -> Complex64 {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    }

    #[test]
    fn lemma_closed_forms_solve_the_equations() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let alpha = rand_c(&mut rng);
            let (z1, z2) = (rand_c(&mut rng), rand_c(&mut rng));
            for (case, beta) in [(SlopeCase::Equal, alpha), (SlopeCase::Conjugate, alpha.conj())] {
                assert_eq!(slope_case(alpha, beta).unwrap(), case);
                let eqs = two_orbit_equations(alpha, beta, two_orbit_solution(case, z1, z2));
                assert!(eqs.iter().all(|e| e.norm() < 1e-14), "{eqs:?}");
            }
        }
        let err = slope_case(Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0));
        assert!(matches!(err, Err(WeierstrassError::SlopeCondition { .. })));
    }

    #[test]
    fn sphere_quadrature_converges() {
        let lat = Lattice::square();
        let mut prev = f64::INFINITY;
        for n in [32, 64, 128] {
            let shift = 0.5 / n as f64;
            let mut x = [vec![0.0; n * n], vec![0.0; n * n], vec![0.0; n * n]];
            for i in 0..n * n {
                let (p, t) = (2.0 * PI * (i / n) as f64 / n as f64, 2.0 * PI * ((i % n) as f64 / n as f64 + shift));
                x[0][i] = p.cos() * t.sin();
                x[1][i] = p.sin() * t.sin();
                x[2][i] = t.cos();
            }
            let w = willmore_quadrature(&ImmersionGrid::from_points(&lat, n, x)).unwrap().integral;
            let err = (w - 8.0 * PI).abs();
            assert!(err < prev);
            prev = err;
        }
        assert!(prev < 1e-2 * 8.0 * PI);
    }
}
