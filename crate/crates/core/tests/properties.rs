use fermilab::bloch::slice_values;
use fermilab::config::parse_config;
use fermilab::elliptic::elliptic_from_periods;
use fermilab::lattice::{reduce_to_fundamental, ConformalClass, Lattice, Letter, Sl2Word};
use fermilab::potential::FourierPotential;
use fermilab::sing::{brute_force_sets, enumerate_sets, SingSet};
use fermilab::table::format_g;
use num_complex::Complex64;
use proptest::prelude::*;
use std::collections::{BTreeMap, BTreeSet};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn upper_half_plane() -> impl Strategy<Value = Complex64> {
    (-20.0..20.0f64, 0.01..10.0f64).prop_map(|(x, y)| c(x, y))
}

fn letters() -> impl Strategy<Value = Vec<Letter>> {
    prop::collection::vec(prop_oneof![Just(Letter::S), Just(Letter::T), Just(Letter::TInv)], 0..12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn reduction_lands_in_the_fundamental_domain(tau in upper_half_plane()) {
        let (red, word) = reduce_to_fundamental(ConformalClass::new(tau).unwrap());
        prop_assert!(red.in_fundamental_domain(1e-9), "{}", red.tau);
        prop_assert!((word.apply(tau) - red.tau).norm() < 1e-8 * red.tau.norm());
        let m = word.matrix;
        prop_assert_eq!(m[0] * m[3] - m[1] * m[2], 1);
    }

    #[test]
    fn reduction_is_constant_on_orbits(tau in upper_half_plane(), w in letters()) {
        let (a, _) = reduce_to_fundamental(ConformalClass::new(tau).unwrap());
        let moved = Sl2Word::from_letters(&w).apply(a.tau);
        prop_assume!(moved.im > 1e-3);
        let (b, _) = reduce_to_fundamental(ConformalClass::new(moved).unwrap());
        let boundary = (a.tau.re.abs() - 0.5).abs() < 1e-6 || (a.tau.norm() - 1.0).abs() < 1e-6;
        prop_assume!(!boundary);
        prop_assert!((a.tau - b.tau).norm() < 1e-7, "{} vs {}", a.tau, b.tau);
    }

    #[test]
    fn wp_is_even_and_periodic(
        re in -0.5..0.5f64,
        im in 0.6..3.0f64,
        scale in 0.3..2.0f64,
        angle in -1.0..1.0f64,
        zx in -1.0..1.0f64,
        zy in -1.0..1.0f64,
    ) {
        let omega = Complex64::from_polar(scale, angle);
        let data = elliptic_from_periods(omega, omega * c(re, im)).unwrap();
        let z = c(zx, zy) * scale;
        prop_assume!(data.pole_distance(z) > 0.1 * scale);
        let p = data.wp(z).unwrap();
        let tol = 1e-9 * p.norm().max(1.0 / (scale * scale));
        prop_assert!((data.wp(-z).unwrap() - p).norm() < tol);
        prop_assert!((data.wp(z + 2.0 * data.omega).unwrap() - p).norm() < tol);
        prop_assert!((data.wp(z + 2.0 * data.omega_prime).unwrap() - p).norm() < tol);
        let zeta = data.zeta(z).unwrap();
        let shifted = data.zeta(z + 2.0 * data.omega).unwrap();
        prop_assert!((shifted - zeta - 2.0 * data.eta).norm() < 1e-9 * zeta.norm().max(1.0 / scale));
        prop_assert!(data.legendre_defect().norm() < 1e-9);
    }

    #[test]
    fn free_slice_lies_on_the_lines(x in -2.0..2.0f64, y in -2.0..2.0f64) {
        let xp = c(x, y);
        let vals = slice_values(&FourierPotential::zero(), &Lattice::square(), xp, 2).unwrap();
        prop_assert_eq!(vals.len(), 2 * 25);
        for v in vals {
            let best = (-2..=2i64)
                .flat_map(|n1| (-2..=2i64).flat_map(move |n2| [1.0, -1.0].map(|s| c(-(n2 as f64), 0.0) + s * Complex64::i() * (xp + n1 as f64))))
                .map(|l| (l - v).norm())
                .fold(f64::INFINITY, f64::min);
            prop_assert!(best < 1e-10);
        }
    }

    #[test]
    fn g_format_round_trips(v in prop::num::f64::NORMAL) {
        let back: f64 = format_g(v).parse().unwrap();
        prop_assert!((back - v).abs() <= 5e-12 * v.abs());
    }

    #[test]
    fn sing_sets_satisfy_the_bounds(
        negs in prop::collection::btree_set(1..12i64, 0..5),
        excs in prop::collection::btree_set(0..12i64, 0..5),
    ) {
        let m = negs.len().min(excs.len());
        let negatives: Vec<i64> = negs.iter().take(m).map(|n| -n).collect();
        let excluded: Vec<i64> = excs.iter().take(m).copied().collect();
        let s = SingSet::new(negatives, excluded).unwrap();
        prop_assert_eq!(s.m(), m);
        prop_assert!(s.wsing() >= (m * m) as i64);
        prop_assert_eq!(s.vanishing_set().len() as i64, s.depth());
        for n in s.vanishing_set() {
            prop_assert!(!s.contains(n));
        }
    }

    #[test]
    fn gauge_keeps_the_pairing(
        coeffs in prop::collection::vec(((-2..=2i64, -2..=2i64), -1.0..1.0f64, -1.0..1.0f64), 1..6),
        kappa in (-3..=3i64, -3..=3i64),
    ) {
        let u: BTreeMap<_, _> = coeffs.into_iter().map(|(n, a, b)| (n, c(a, b))).collect();
        let pot = FourierPotential::eta_pair(u).unwrap();
        let lat = Lattice::square();
        let before = pot.pairing(&lat);
        prop_assert!((pot.gauge(kappa).pairing(&lat) - before).norm() < 1e-12 * before.norm().max(1.0));
    }

    #[test]
    fn config_numbers_round_trip(cutoff in 0..20i64, half_grid in 2..200usize, seed in any::<u64>(), tol in 1e-14..1.0f64) {
        let text = format!(
            r#"{{"potential": {{"coefficients": [[1, 0, 0.1, 0]]}}, "cutoff": {cutoff}, "grid": {}, "seed": {seed}, "tol": {tol:e}}}"#,
            2 * half_grid
        );
        let cfg = parse_config(&text).unwrap();
        prop_assert_eq!(cfg.cutoff, cutoff);
        prop_assert_eq!(cfg.grid, 2 * half_grid);
        prop_assert_eq!(cfg.seed, seed);
        prop_assert_eq!(cfg.tol, tol);
    }

    #[test]
    fn odd_grids_are_rejected(half_grid in 2..200usize) {
        let text = format!(r#"{{"potential": {{"coefficients": []}}, "grid": {}}}"#, 2 * half_grid + 1);
        prop_assert!(parse_config(&text).is_err());
    }
}

#[test]
fn enumeration_matches_brute_force() {
    let listed = enumerate_sets(8);
    let set: BTreeSet<SingSet> = listed.iter().cloned().collect();
    assert_eq!(set.len(), listed.len());
    assert_eq!(set, brute_force_sets(8, 8));
    for s in &listed {
        assert!((s.m() * s.m()) as i64 <= s.wsing());
    }
}
