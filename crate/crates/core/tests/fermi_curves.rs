use fermilab::bloch::slice_values;
use fermilab::fermi::{circle_path, trace_branch};
use fermilab::lattice::{free_double_points, Lattice};
use fermilab::potential::FourierPotential;
use fermilab::verify::{bundled_eta_pair, bundled_sigma_real};
use num_complex::Complex64;
use std::f64::consts::{PI, SQRT_2};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn nearest(vals: &[Complex64], y: Complex64) -> (Complex64, f64) {
    vals.iter().map(|v| (*v, (v - y).norm())).min_by(|a, b| a.1.total_cmp(&b.1)).expect("nonempty")
}

fn single_mode() -> FourierPotential {
    FourierPotential::single_mode(c(0.1, 0.0), (1, 0))
}

#[test]
fn single_mode_gap_is_centered_on_the_double_point() {
    let vals = slice_values(&single_mode(), &Lattice::square(), c(0.5, 0.0), 3).unwrap();
    let near: Vec<_> = vals.iter().filter(|y| (*y - c(0.0, -0.5)).norm() < 0.1).collect();
    assert_eq!(near.len(), 2);
    for y in near {
        assert!((y.re.abs() - 0.1 / PI).abs() < 1e-9, "{y}");
        assert!((y.im + 0.5).abs() < 1e-9);
    }
}

#[test]
fn loop_around_one_branch_point_swaps_sheets() {
    let lat = Lattice::square();
    let pot = single_mode();
    let branch = c(0.5 + 0.1 / PI, 0.0);
    let path = circle_path(branch, 0.01, 96);
    let seed = nearest(&slice_values(&pot, &lat, path[0], 3).unwrap(), c(0.0, -0.5)).0;
    let once = trace_branch(&pot, &lat, &path, seed, 3).unwrap();
    assert!(!once.closed);
    assert!(once.endpoint_mismatch() > 1e-3, "{}", once.endpoint_mismatch());
    let twice: Vec<Complex64> = path.iter().chain(path[1..].iter()).copied().collect();
    let back = trace_branch(&pot, &lat, &twice, seed, 3).unwrap();
    assert!(back.closed, "{}", back.endpoint_mismatch());
}

#[test]
fn loop_around_both_branch_points_closes() {
    let lat = Lattice::square();
    let pot = single_mode();
    let path = circle_path(c(0.5, 0.0), 0.05, 128);
    let seed = nearest(&slice_values(&pot, &lat, path[0], 3).unwrap(), c(0.0, -0.5)).0;
    let br = trace_branch(&pot, &lat, &path, seed, 3).unwrap();
    assert!(br.closed, "{}", br.endpoint_mismatch());
}

#[test]
fn constant_potential_loop_closes() {
    let lat = Lattice::square();
    let pot = FourierPotential::constant(PI / SQRT_2);
    let path = circle_path(c(0.3, 0.0), 0.05, 96);
    let seed = nearest(&slice_values(&pot, &lat, path[0], 3).unwrap(), c(0.0, std::f64::consts::FRAC_1_SQRT_2)).0;
    let br = trace_branch(&pot, &lat, &path, seed, 3).unwrap();
    assert!(br.closed, "{}", br.endpoint_mismatch());
    assert!(br.match_distance.iter().zip(&br.local_gap).all(|(d, g)| d < g));
}

#[test]
fn gauge_transform_translates_the_slice() {
    let lat = Lattice::square();
    let pot = bundled_eta_pair();
    for kappa in [(1, 0), (0, 1), (1, -1)] {
        let (_, plus) = free_double_points(lat.dual_vector(kappa.0, kappa.1));
        let (sx, sy) = lat.quasi_momenta(plus);
        let gauged = pot.gauge(kappa);
        for xp in [c(0.13, 0.07), c(-0.31, 0.22)] {
            let new = slice_values(&gauged, &lat, xp, 5).unwrap();
            let old: Vec<Complex64> = slice_values(&pot, &lat, xp - sx, 5).unwrap().into_iter().map(|y| y + sy).collect();
            let mut checked = 0;
            for y in new.iter().filter(|y| y.norm() < 2.0) {
                let (_, d) = nearest(&old, *y);
                assert!(d < 1e-8, "kappa {kappa:?} xp {xp} y {y} distance {d}");
                checked += 1;
            }
            assert!(checked >= 8);
        }
    }
}

#[test]
fn sigma_real_slice_is_point_symmetric() {
    let lat = Lattice::square();
    let pot = bundled_sigma_real();
    for xp in [c(0.2, -0.1), c(-0.45, 0.3)] {
        let a = slice_values(&pot, &lat, xp, 4).unwrap();
        let b = slice_values(&pot, &lat, -xp, 4).unwrap();
        for y in a.iter().filter(|y| y.norm() < 2.0) {
            assert!(nearest(&b, -y).1 < 1e-9, "{y}");
        }
    }
}
