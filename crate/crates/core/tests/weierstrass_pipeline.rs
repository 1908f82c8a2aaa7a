use fermilab::bloch::{kernel_at, KernelSpinor};
use fermilab::fermi::weak_singularity_report;
use fermilab::lattice::{HalfPeriodClass, Lattice};
use fermilab::potential::FourierPotential;
use fermilab::weierstrass::*;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{PI, SQRT_2};
use std::sync::OnceLock;

fn half() -> [Complex64; 2] {
    [Complex64::new(0.5, 0.0), Complex64::new(0.5, 0.0)]
}

fn clifford() -> &'static (FourierPotential, PeriodicitySolution) {
    static CELL: OnceLock<(FourierPotential, PeriodicitySolution)> = OnceLock::new();
    CELL.get_or_init(|| {
        let lat = Lattice::square();
        let pot = FourierPotential::clifford(30);
        let ks = kernel_at(&pot, &lat, half(), 36).unwrap();
        assert_eq!(ks.dim(), 2);
        let sol = solve_periodicity_combination(&ks.spinors, &lat, &[], 7).unwrap();
        (pot, sol)
    })
}

fn scaled(s: &KernelSpinor, a: Complex64) -> KernelSpinor {
    KernelSpinor {
        psi1: s.psi1.iter().map(|c| a * c).collect(),
        psi2: s.psi2.iter().map(|c| a * c).collect(),
        ..s.clone()
    }
}

#[test]
fn clifford_combination_closes() {
    let (_, sol) = clifford();
    assert!(sol.integrals.iter().all(|c| c.norm() < 1e-10), "{:?}", sol.integrals);
}

#[test]
fn clifford_torus_energy_and_conformality() {
    let lat = Lattice::square();
    let (pot, sol) = clifford();
    let grid = immersion_from_spinor(&sol.spinor, &lat, 128).unwrap();
    assert!(grid.closedness.iter().all(|c| c.norm() < 1e-8));
    assert!(conformality_residual(&grid) < 1e-6);
    let w = willmore_quadrature(&grid).unwrap().integral;
    assert!((w / (2.0 * PI * PI) - 1.0).abs() < 0.01, "{w}");
    assert!((w / pot.pairing(&lat).re - 1.0).abs() < 0.01);
}

#[test]
fn grid_doubling_is_stable() {
    let (_, sol) = clifford();
    let (_, _, rel) = willmore_convergence(&sol.spinor, &Lattice::square(), 128).unwrap();
    assert!(rel < 2e-3, "{rel}");
}

#[test]
fn immersion_is_quadratic_in_the_spinor() {
    let lat = Lattice::square();
    let (_, sol) = clifford();
    let base = immersion_from_spinor(&sol.spinor, &lat, 128).unwrap();
    let lam = 1.7;
    let g = immersion_from_spinor(&scaled(&sol.spinor, Complex64::new(lam, 0.0)), &lat, 128).unwrap();
    let scale = base.x[2].iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    for c in 0..3 {
        for (a, b) in base.x[c].iter().zip(&g.x[c]) {
            assert!((b - lam * lam * a).abs() < 1e-12 * lam * lam * scale);
        }
    }
    let rot = immersion_from_spinor(&scaled(&sol.spinor, Complex64::from_polar(1.0, 0.9)), &lat, 128).unwrap();
    let w0 = willmore_quadrature(&base).unwrap().integral;
    let w1 = willmore_quadrature(&rot).unwrap().integral;
    assert!((w0 - w1).abs() < 1e-10 * w0);
    assert!(base.x.iter().all(|c| c[0].abs() < 1e-12));
}

#[test]
fn perturbed_grid_is_not_conformal() {
    let lat = Lattice::square();
    let (_, sol) = clifford();
    let grid = immersion_from_spinor(&sol.spinor, &lat, 128).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut x = grid.x.clone();
    for c in x.iter_mut() {
        for v in c.iter_mut() {
            *v += 1e-2 * rng.random_range(-1.0..1.0);
        }
    }
    assert!(conformality_residual(&ImmersionGrid::from_points(&lat, 128, x)) > 1e-3);
}

#[test]
fn constant_potential_has_no_weierstrass_combination() {
    let lat = Lattice::square();
    let pot = FourierPotential::constant(PI / SQRT_2);
    let ks = kernel_at(&pot, &lat, half(), 4).unwrap();
    assert_eq!(ks.dim(), 4);
    let rep = weak_singularity_report(&pot, &lat, HalfPeriodClass::BOTH, 4).unwrap();
    let slopes = orbit_slopes(&rep);
    assert_eq!(slopes.len(), 2);
    let err = solve_periodicity_combination(&ks.spinors, &lat, &slopes, 7).unwrap_err();
    assert!(matches!(err, WeierstrassError::SlopeCondition { .. }));
    let err = solve_periodicity_combination(&ks.spinors, &lat, &[], 7).unwrap_err();
    assert!(matches!(err, WeierstrassError::NoSolution(r) if r > 1e-3));
}

#[test]
fn unclosed_spinor_is_rejected() {
    let lat = Lattice::square();
    let pot = FourierPotential::constant(PI / SQRT_2);
    let ks = kernel_at(&pot, &lat, half(), 4).unwrap();
    assert!(matches!(immersion_from_spinor(&ks.spinors[0], &lat, 32), Err(WeierstrassError::NotClosed(_))));
    assert!(matches!(
        solve_periodicity_combination(&ks.spinors[..1], &lat, &[], 1),
        Err(WeierstrassError::KernelTooSmall(1))
    ));
}
