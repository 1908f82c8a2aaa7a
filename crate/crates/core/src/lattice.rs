//! Period lattices, dual lattices, conformal moduli and modular reduction.

use num_complex::Complex64;
use thiserror::Error;

pub type Vec2 = [f64; 2];
pub type CVec2 = [Complex64; 2];

const MODULAR_EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("generators are degenerate (oriented area {0:e})")]
    Degenerate(f64),
    #[error("conformal class requires Im(tau) > 0, got {0}")]
    LowerHalfPlane(Complex64),
    #[error("the zero half-period class has no associated sublattice")]
    ZeroClass,
    #[error("tau = {tau} lies outside the domain of case {case:?}")]
    OutsideCase { case: CaseId, tau: Complex64 },
    #[error("tau = {0} is not in the fundamental domain")]
    NotReduced(Complex64),
}

/// Euclidean bilinear form on the plane, extended complex-bilinearly.
pub fn g(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub fn gc(a: CVec2, b: CVec2) -> Complex64 {
    a[0] * b[0] + a[1] * b[1]
}

pub fn gmix(a: Vec2, b: CVec2) -> Complex64 {
    b[0] * a[0] + b[1] * a[1]
}

pub fn to_complex(v: Vec2) -> CVec2 {
    [Complex64::new(v[0], 0.0), Complex64::new(v[1], 0.0)]
}

/// Complexified plane vector `v₁ + i v₂`.
pub fn as_point(v: Vec2) -> Complex64 {
    Complex64::new(v[0], v[1])
}

fn dual_basis(a: Vec2, b: Vec2) -> (Vec2, Vec2) {
    let det = a[0] * b[1] - a[1] * b[0];
    ([b[1] / det, -b[0] / det], [-a[1] / det, a[0] / det])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    pub gen1: Vec2,
    pub gen2: Vec2,
    /// True when the generators were supplied with negative orientation and swapped.
    pub swapped: bool,
}

pub fn make_lattice(gen1: Vec2, gen2: Vec2) -> Result<Lattice, LatticeError> {
    let area = gen1[0] * gen2[1] - gen1[1] * gen2[0];
    let scale = (g(gen1, gen1) * g(gen2, gen2)).sqrt();
    if !area.is_finite() || area.abs() <= 1e-14 * scale.max(f64::MIN_POSITIVE) || scale == 0.0 {
        return Err(LatticeError::Degenerate(area));
    }
    if area > 0.0 {
        Ok(Lattice { gen1, gen2, swapped: false })
    } else {
        Ok(Lattice { gen1: gen2, gen2: gen1, swapped: true })
    }
}

impl Lattice {
    pub fn square() -> Self {
        Lattice { gen1: [1.0, 0.0], gen2: [0.0, 1.0], swapped: false }
    }

    /// Lattice spanned by `(1,0)` and `(Re τ, Im τ)`.
    pub fn from_tau(tau: Complex64) -> Result<Self, LatticeError> {
        if tau.im <= 0.0 {
            return Err(LatticeError::LowerHalfPlane(tau));
        }
        make_lattice([1.0, 0.0], [tau.re, tau.im])
    }

    pub fn vol(&self) -> f64 {
        self.gen1[0] * self.gen2[1] - self.gen1[1] * self.gen2[0]
    }

    /// Dual generators `(κ̂, κ̌)`.
    pub fn dual(&self) -> (Vec2, Vec2) {
        dual_basis(self.gen1, self.gen2)
    }

    pub fn dual_vector(&self, n1: i64, n2: i64) -> Vec2 {
        let (a, b) = self.dual();
        [n1 as f64 * a[0] + n2 as f64 * b[0], n1 as f64 * a[1] + n2 as f64 * b[1]]
    }

    pub fn point(&self, m1: i64, m2: i64) -> Vec2 {
        [
            m1 as f64 * self.gen1[0] + m2 as f64 * self.gen2[0],
            m1 as f64 * self.gen1[1] + m2 as f64 * self.gen2[1],
        ]
    }

    /// Coordinates of a dual vector in the basis `(κ̂, κ̌)`.
    pub fn dual_coords(&self, kappa: Vec2) -> Vec2 {
        [g(self.gen1, kappa), g(self.gen2, kappa)]
    }

    /// Quasi-momentum coordinates `(g(γ̂,k), g(γ̌,k))` of a complex momentum.
    pub fn quasi_momenta(&self, k: CVec2) -> (Complex64, Complex64) {
        (gmix(self.gen1, k), gmix(self.gen2, k))
    }

    /// Momentum `xp·κ̂ + yp·κ̌`.
    pub fn momentum(&self, xp: Complex64, yp: Complex64) -> CVec2 {
        let (a, b) = self.dual();
        [xp * a[0] + yp * b[0], xp * a[1] + yp * b[1]]
    }

    pub fn complex_gens(&self) -> (Complex64, Complex64) {
        (as_point(self.gen1), as_point(self.gen2))
    }

    pub fn contains(&self, v: Vec2, tol: f64) -> bool {
        let c = [g(self.dual().0, v), g(self.dual().1, v)];
        (c[0] - c[0].round()).abs() < tol && (c[1] - c[1].round()).abs() < tol
    }
}

/// True when both lattices contain each other's generators.
pub fn same_lattice(a: &Lattice, b: &Lattice, tol: f64) -> bool {
    a.contains(b.gen1, tol) && a.contains(b.gen2, tol) && b.contains(a.gen1, tol) && b.contains(a.gen2, tol)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConformalClass {
    pub tau: Complex64,
}

impl ConformalClass {
    pub fn new(tau: Complex64) -> Result<Self, LatticeError> {
        if tau.im > 0.0 && tau.re.is_finite() {
            Ok(ConformalClass { tau })
        } else {
            Err(LatticeError::LowerHalfPlane(tau))
        }
    }

    pub fn in_fundamental_domain(&self, tol: f64) -> bool {
        self.tau.re.abs() <= 0.5 + tol && self.tau.norm() >= 1.0 - tol
    }
}

pub fn tau_of_lattice(lat: &Lattice) -> ConformalClass {
    let (a, b) = lat.complex_gens();
    ConformalClass { tau: b / a }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfPeriodClass {
    pub r1: u8,
    pub r2: u8,
}

impl HalfPeriodClass {
    pub const ZERO: Self = HalfPeriodClass { r1: 0, r2: 0 };
    pub const HAT: Self = HalfPeriodClass { r1: 1, r2: 0 };
    pub const CHECK: Self = HalfPeriodClass { r1: 0, r2: 1 };
    pub const BOTH: Self = HalfPeriodClass { r1: 1, r2: 1 };

    pub fn new(r1: i64, r2: i64) -> Self {
        HalfPeriodClass { r1: r1.rem_euclid(2) as u8, r2: r2.rem_euclid(2) as u8 }
    }

    pub fn nonzero() -> [Self; 3] {
        [Self::HAT, Self::CHECK, Self::BOTH]
    }

    pub fn is_zero(&self) -> bool {
        self.r1 == 0 && self.r2 == 0
    }

    /// Representative dual vector `r₁κ̂ + r₂κ̌`.
    pub fn representative(&self, lat: &Lattice) -> Vec2 {
        lat.dual_vector(self.r1 as i64, self.r2 as i64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Letter {
    S,
    T,
    TInv,
}

impl Letter {
    pub fn matrix(self) -> [i64; 4] {
        match self {
            Letter::S => [0, -1, 1, 0],
            Letter::T => [1, 1, 0, 1],
            Letter::TInv => [1, -1, 0, 1],
        }
    }
}

/// A word in `S`, `T`, `T⁻¹` applied left to right, with its accumulated matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sl2Word {
    pub letters: Vec<Letter>,
    pub matrix: [i64; 4],
}

impl Default for Sl2Word {
    fn default() -> Self {
        Sl2Word { letters: Vec::new(), matrix: [1, 0, 0, 1] }
    }
}

fn mat_mul(l: [i64; 4], r: [i64; 4]) -> [i64; 4] {
    [
        l[0] * r[0] + l[1] * r[2],
        l[0] * r[1] + l[1] * r[3],
        l[2] * r[0] + l[3] * r[2],
        l[2] * r[1] + l[3] * r[3],
    ]
}

pub fn mobius(m: [i64; 4], tau: Complex64) -> Complex64 {
    (tau * m[0] as f64 + m[1] as f64) / (tau * m[2] as f64 + m[3] as f64)
}

impl Sl2Word {
    pub fn from_letters(letters: &[Letter]) -> Self {
        let mut w = Sl2Word::default();
        for &l in letters {
            w.push(l);
        }
        w
    }

    pub fn push(&mut self, letter: Letter) {
        self.letters.push(letter);
        self.matrix = mat_mul(letter.matrix(), self.matrix);
    }

    pub fn apply(&self, tau: Complex64) -> Complex64 {
        mobius(self.matrix, tau)
    }

    pub fn is_identity(&self) -> bool {
        self.matrix == [1, 0, 0, 1] || self.matrix == [-1, 0, 0, -1]
    }

    /// Compact text form such as `T^-5 S`.
    pub fn describe(&self) -> String {
        let mut parts: Vec<String> = Vec::new();
        let mut i = 0;
        while i < self.letters.len() {
            let l = self.letters[i];
            let mut j = i;
            while j < self.letters.len() && self.letters[j] == l {
                j += 1;
            }
            let n = (j - i) as i64;
            parts.push(match l {
                Letter::S if n == 1 => "S".to_string(),
                Letter::S => format!("S^{n}"),
                Letter::T if n == 1 => "T".to_string(),
                Letter::T => format!("T^{n}"),
                Letter::TInv => format!("T^-{n}"),
            });
            i = j;
        }
        if parts.is_empty() {
            "identity".to_string()
        } else {
            parts.join(" ")
        }
    }
}

/// Reduces `τ` into `M₁ = {|Re τ| ≤ ½, |τ| ≥ 1}` with `Re τ ∈ (−½, ½]` and
/// `Re τ ≥ 0` on the unit circle.
pub fn reduce_to_fundamental(tau: ConformalClass) -> (ConformalClass, Sl2Word) {
    let mut word = Sl2Word::default();
    let mut t = tau.tau;
    for _ in 0..100_000 {
        let mut n = (t.re - 0.5).ceil();
        if t.re - n <= -0.5 + MODULAR_EPS {
            n -= 1.0;
        }
        let n = n as i64;
        let letter = if n > 0 { Letter::TInv } else { Letter::T };
        for _ in 0..n.abs() {
            word.push(letter);
        }
        t = word.apply(tau.tau);
        if t.norm_sqr() < 1.0 - MODULAR_EPS {
            word.push(Letter::S);
            t = word.apply(tau.tau);
        } else {
            break;
        }
    }
    if (t.norm_sqr() - 1.0).abs() <= MODULAR_EPS && t.re < -MODULAR_EPS {
        word.push(Letter::S);
        t = word.apply(tau.tau);
    }
    (ConformalClass { tau: t }, word)
}

/// The index-two sublattice `Λ_{[κ/2]} ⊃ Λ` whose dual is `κℤ + 2Λ*`.
pub fn half_period_sublattice(lat: &Lattice, c: HalfPeriodClass) -> Result<Lattice, LatticeError> {
    let (kh, kc) = lat.dual();
    let (a, b) = match (c.r1, c.r2) {
        (0, 0) => return Err(LatticeError::ZeroClass),
        (1, 0) => (kh, [2.0 * kc[0], 2.0 * kc[1]]),
        (0, 1) => ([2.0 * kh[0], 2.0 * kh[1]], kc),
        _ => ([kh[0] + kc[0], kh[1] + kc[1]], [2.0 * kc[0], 2.0 * kc[1]]),
    };
    let (g1, g2) = dual_basis(a, b);
    make_lattice(g1, g2)
}

/// Classes of `Λ_sub*/2Λ_sub*`, in the dual basis of `sub`, that map onto `c`.
pub fn preimage_classes(lat: &Lattice, sub: &Lattice, c: HalfPeriodClass) -> Vec<HalfPeriodClass> {
    let mut out = Vec::new();
    for s in [HalfPeriodClass::ZERO, HalfPeriodClass::HAT, HalfPeriodClass::CHECK, HalfPeriodClass::BOTH] {
        let v = sub.dual_vector(s.r1 as i64, s.r2 as i64);
        let m = lat.dual_coords(v);
        if (m[0] - m[0].round()).abs() > 1e-8 || (m[1] - m[1].round()).abs() > 1e-8 {
            continue;
        }
        if HalfPeriodClass::new(m[0].round() as i64, m[1].round() as i64) == c {
            out.push(s);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseId {
    C1a,
    C1b,
    C1c,
    C1d,
    C2a,
    C2b,
    C2c,
    C3a,
    C3b,
    C3c,
    C3d,
    C3e,
    C3f,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Genus {
    Zero,
    One,
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SublatticeImage {
    pub tau_prime: ConformalClass,
    /// The two classes of the sublattice mapped onto the input class.
    pub preimages: [HalfPeriodClass; 2],
    /// Class `c′` with `F_min(c′/2)` at `τ′` corresponding to the input curve.
    pub corresponds: HalfPeriodClass,
    pub genus: Genus,
}

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9
}

impl CaseId {
    pub const ALL: [CaseId; 13] = [
        CaseId::C1a,
        CaseId::C1b,
        CaseId::C1c,
        CaseId::C1d,
        CaseId::C2a,
        CaseId::C2b,
        CaseId::C2c,
        CaseId::C3a,
        CaseId::C3b,
        CaseId::C3c,
        CaseId::C3d,
        CaseId::C3e,
        CaseId::C3f,
    ];

    pub fn class(self) -> HalfPeriodClass {
        use CaseId::*;
        match self {
            C1a | C1b | C1c | C1d => HalfPeriodClass::HAT,
            C2a | C2b | C2c => HalfPeriodClass::CHECK,
            _ => HalfPeriodClass::BOTH,
        }
    }

    pub fn label(self) -> &'static str {
        use CaseId::*;
        match self {
            C1a => "1a",
            C1b => "1b",
            C1c => "1c",
            C1d => "1d",
            C2a => "2a",
            C2b => "2b",
            C2c => "2c",
            C3a => "3a",
            C3b => "3b",
            C3c => "3c",
            C3d => "3d",
            C3e => "3e",
            C3f => "3f",
        }
    }

    pub fn parse(s: &str) -> Option<CaseId> {
        CaseId::ALL.iter().copied().find(|c| c.label() == s)
    }

    pub fn contains(self, tau: Complex64) -> bool {
        use CaseId::*;
        let e = MODULAR_EPS;
        let d = |z: f64| (tau + z).norm();
        match self {
            C1a => tau.norm() >= 2.0 - e,
            C1b => tau.norm() <= 2.0 + e && d(2.0) >= 2.0 - e && d(-2.0) >= 2.0 - e,
            C1c => d(2.0) <= 2.0 + e,
            C1d => d(-2.0) <= 2.0 + e,
            C2a => tau.re.abs() <= 0.25 + e,
            C2b => tau.re <= -0.25 + e,
            C2c => tau.re >= 0.25 - e,
            C3a => d(1.0) >= 2.0 - e && d(-1.0) >= 2.0 - e && tau.re <= e,
            C3b => d(1.0) >= 2.0 - e && d(-1.0) >= 2.0 - e && tau.re >= -e,
            C3c => d(1.0) <= 2.0 + e && d(-1.0) >= 2.0 - e,
            C3d => d(1.0) >= 2.0 - e && d(-1.0) <= 2.0 + e,
            C3e => d(1.0) <= 2.0 + e && d(-1.0) <= 2.0 + e && tau.re <= e,
            C3f => d(1.0) <= 2.0 + e && d(-1.0) <= 2.0 + e && tau.re >= -e,
        }
    }

    fn image(self, tau: Complex64) -> Complex64 {
        use CaseId::*;
        let one = Complex64::new(1.0, 0.0);
        match self {
            C1a => tau / 2.0,
            C1b => -2.0 / tau,
            C1c => -2.0 / tau - one,
            C1d => -2.0 / tau + one,
            C2a => tau * 2.0,
            C2b => tau * 2.0 + one,
            C2c => tau * 2.0 - one,
            C3a => (tau + one) / 2.0,
            C3b => (tau - one) / 2.0,
            C3c => -2.0 / (tau + one),
            C3d => -2.0 / (tau - one),
            C3e => (tau - one) / (tau + one),
            C3f => -(tau + one) / (tau - one),
        }
    }

    fn genus(self, tau: Complex64) -> Genus {
        use CaseId::*;
        let d = |z: f64| (tau + z).norm();
        match self {
            C1a => Genus::Two,
            C1b if near(d(2.0), 2.0) || near(d(-2.0), 2.0) => Genus::One,
            C1b => Genus::Two,
            C1c | C1d | C2b | C2c => Genus::One,
            C2a if near(tau.re.abs(), 0.25) => Genus::One,
            C2a => Genus::Two,
            C3a | C3b if near(tau.re, 0.0) => Genus::One,
            C3a | C3b => Genus::Two,
            C3c if near(d(-1.0), 2.0) => Genus::One,
            C3c => Genus::Two,
            C3d if near(d(1.0), 2.0) => Genus::One,
            C3d => Genus::Two,
            C3e | C3f if near(tau.re, 0.0) => Genus::Zero,
            C3e | C3f => Genus::One,
        }
    }

    fn preimages(self) -> [HalfPeriodClass; 2] {
        use CaseId::*;
        use HalfPeriodClass as H;
        match self {
            C1a => [H::HAT, H::BOTH],
            C1b => [H::CHECK, H::BOTH],
            C1c | C1d | C2b | C2c | C3e | C3f => [H::HAT, H::CHECK],
            C2a | C3a | C3b => [H::CHECK, H::BOTH],
            C3c | C3d => [H::HAT, H::BOTH],
        }
    }

    fn corresponds(self) -> HalfPeriodClass {
        use CaseId::*;
        match self {
            C1c | C1d | C2b | C2c | C3e | C3f => HalfPeriodClass::HAT,
            _ => HalfPeriodClass::BOTH,
        }
    }
}

/// First case (in table order) of class `c` whose domain contains `τ`.
pub fn case_for(tau: Complex64, c: HalfPeriodClass) -> Option<CaseId> {
    CaseId::ALL.iter().copied().find(|case| case.class() == c && case.contains(tau))
}

pub fn tau_sublattice_map(
    tau: ConformalClass,
    c: HalfPeriodClass,
    case: CaseId,
) -> Result<SublatticeImage, LatticeError> {
    if c.is_zero() {
        return Err(LatticeError::ZeroClass);
    }
    if !tau.in_fundamental_domain(MODULAR_EPS) {
        return Err(LatticeError::NotReduced(tau.tau));
    }
    if case.class() != c || !case.contains(tau.tau) {
        return Err(LatticeError::OutsideCase { case, tau: tau.tau });
    }
    Ok(SublatticeImage {
        tau_prime: ConformalClass { tau: case.image(tau.tau) },
        preimages: case.preimages(),
        corresponds: case.corresponds(),
        genus: case.genus(tau.tau),
    })
}

/// Double points `k⁻_κ`, `k⁺_κ = k⁻_κ + κ` of the free curve.
pub fn free_double_points(kappa: Vec2) -> (CVec2, CVec2) {
    let (a, b) = (kappa[0], kappa[1]);
    let minus = [Complex64::new(-a / 2.0, -b / 2.0), Complex64::new(-b / 2.0, a / 2.0)];
    let plus = [minus[0] + a, minus[1] + b];
    (minus, plus)
}

/// Lagrange reduction of a planar basis.
fn lagrange_reduce(mut a: Vec2, mut b: Vec2) -> (Vec2, Vec2) {
    if g(a, a) > g(b, b) {
        std::mem::swap(&mut a, &mut b);
    }
    loop {
        let mu = (g(a, b) / g(a, a)).round();
        b = [b[0] - mu * a[0], b[1] - mu * a[1]];
        if g(b, b) >= g(a, a) {
            return (a, b);
        }
        std::mem::swap(&mut a, &mut b);
    }
}

/// Squared length of the shortest nonzero dual vectors and all minimizers as
/// `(n₁, n₂)` coordinates, sorted lexicographically.
pub fn shortest_dual_vectors(lat: &Lattice) -> (f64, Vec<(i64, i64)>) {
    let (kh, kc) = lat.dual();
    let (a, b) = lagrange_reduce(kh, kc);
    let mut cands: Vec<(f64, (i64, i64))> = Vec::new();
    for i in -2i64..=2 {
        for j in -2i64..=2 {
            if i == 0 && j == 0 {
                continue;
            }
            let v = [i as f64 * a[0] + j as f64 * b[0], i as f64 * a[1] + j as f64 * b[1]];
            let m = lat.dual_coords(v);
            cands.push((g(v, v), (m[0].round() as i64, m[1].round() as i64)));
        }
    }
    let best = cands.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
    let mut mins: Vec<(i64, i64)> =
        cands.iter().filter(|c| c.0 <= best * (1.0 + 1e-10)).map(|c| c.1).collect();
    mins.sort();
    mins.dedup();
    (best, mins)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn dual_of_skew_lattice() {
        let lat = make_lattice([1.0, 0.0], [0.5, 1.0]).unwrap();
        let (kh, kc) = lat.dual();
        assert!((kh[0] - 1.0).abs() < 1e-15 && (kh[1] + 0.5).abs() < 1e-15);
        assert!(kc[0].abs() < 1e-15 && (kc[1] - 1.0).abs() < 1e-15);
        let wide = make_lattice([2.0, 0.0], [0.0, 1.0]).unwrap();
        assert_eq!(wide.vol(), 2.0);
        assert_eq!(wide.dual().0, [0.5, 0.0]);
    }

    #[test]
    fn negative_orientation_swaps() {
        let lat = make_lattice([0.0, 1.0], [1.0, 0.0]).unwrap();
        assert!(lat.swapped);
        assert!(lat.vol() > 0.0);
        assert!(make_lattice([1.0, 1.0], [2.0, 2.0]).is_err());
    }

    #[test]
    fn tau_examples() {
        let t = tau_of_lattice(&make_lattice([2.0, 0.0], [1.0, 2.0]).unwrap()).tau;
        assert!((t - c(0.5, 1.0)).norm() < 1e-15);
        let t = tau_of_lattice(&make_lattice([0.0, 1.0], [-1.0, 0.0]).unwrap()).tau;
        assert!((t - c(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn reduction_examples() {
        let (r, w) = reduce_to_fundamental(ConformalClass::new(c(0.0, 1.0)).unwrap());
        assert!((r.tau - c(0.0, 1.0)).norm() < 1e-15);
        assert!(w.is_identity());
        let (r, w) = reduce_to_fundamental(ConformalClass::new(c(5.0, 0.3)).unwrap());
        assert!((r.tau - c(0.0, 10.0 / 3.0)).norm() < 1e-12);
        let mut expect = vec![Letter::TInv; 5];
        expect.push(Letter::S);
        assert_eq!(w.letters, expect);
        assert_eq!(w.describe(), "T^-5 S");
        let (r, _) = reduce_to_fundamental(ConformalClass::new(c(0.1, 0.1)).unwrap());
        assert!(r.in_fundamental_domain(1e-12) && r.tau.im >= 3f64.sqrt() / 2.0 - 1e-12);
    }

    #[test]
    fn unit_circle_tie_break() {
        let z = Complex64::from_polar(1.0, 2.0);
        let (r, _) = reduce_to_fundamental(ConformalClass::new(z).unwrap());
        assert!(r.tau.re >= 0.0);
        assert!((r.tau.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn paper_sublattice_of_square() {
        let sub = half_period_sublattice(&Lattice::square(), HalfPeriodClass::BOTH).unwrap();
        let want = make_lattice([0.5, 0.5], [0.5, -0.5]).unwrap();
        assert!(same_lattice(&sub, &want, 1e-12));
        assert!((sub.vol() - 0.5).abs() < 1e-15);
        let sub = half_period_sublattice(&Lattice::square(), HalfPeriodClass::HAT).unwrap();
        let want = make_lattice([1.0, 0.0], [0.0, 0.5]).unwrap();
        assert!(same_lattice(&sub, &want, 1e-12));
        assert!(half_period_sublattice(&Lattice::square(), HalfPeriodClass::ZERO).is_err());
    }

    #[test]
    fn table_examples() {
        let r = tau_sublattice_map(ConformalClass::new(c(0.0, 3.0)).unwrap(), HalfPeriodClass::HAT, CaseId::C1a)
            .unwrap();
        assert!((r.tau_prime.tau - c(0.0, 1.5)).norm() < 1e-15);
        assert_eq!(r.preimages, [HalfPeriodClass::HAT, HalfPeriodClass::BOTH]);
        assert_eq!(r.genus, Genus::Two);
        let r = tau_sublattice_map(ConformalClass::new(c(0.0, 1.0)).unwrap(), HalfPeriodClass::BOTH, CaseId::C3e)
            .unwrap();
        assert!((r.tau_prime.tau - c(0.0, 1.0)).norm() < 1e-15);
        assert_eq!(r.genus, Genus::Zero);
        let r = tau_sublattice_map(ConformalClass::new(c(-0.3, 2.0)).unwrap(), HalfPeriodClass::CHECK, CaseId::C2b)
            .unwrap();
        assert!((r.tau_prime.tau - c(0.4, 4.0)).norm() < 1e-15);
        let bad = tau_sublattice_map(ConformalClass::new(c(0.0, 1.0)).unwrap(), HalfPeriodClass::HAT, CaseId::C1a);
        assert!(matches!(bad, Err(LatticeError::OutsideCase { .. })));
    }

    #[test]
    fn double_points() {
        let (m, p) = free_double_points([1.0, 0.0]);
        assert_eq!(m, [c(-0.5, 0.0), c(0.0, 0.5)]);
        assert_eq!(p, [c(0.5, 0.0), c(0.0, 0.5)]);
        let (m, p) = free_double_points([0.0, 1.0]);
        assert_eq!(m, [c(0.0, -0.5), c(-0.5, 0.0)]);
        assert_eq!(p, [c(0.0, -0.5), c(0.5, 0.0)]);
        let (m, p) = free_double_points([0.0, 0.0]);
        assert_eq!(m, p);
    }

    #[test]
    fn shortest_vectors_square_tie() {
        let (len2, mins) = shortest_dual_vectors(&Lattice::square());
        assert!((len2 - 1.0).abs() < 1e-15);
        assert_eq!(mins, vec![(-1, 0), (0, -1), (0, 1), (1, 0)]);
        let (len2, mins) = shortest_dual_vectors(&make_lattice([1.0, 0.0], [0.0, 2.0]).unwrap());
        assert!((len2 - 0.25).abs() < 1e-15);
        assert_eq!(mins, vec![(0, -1), (0, 1)]);
    }
}
