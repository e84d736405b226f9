mod common;

use common::{random_unit, towers};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use refram::breaks::*;
use refram::field::apply_matrix;
use refram::groupring::theta;
use refram::linalg::WMatrix;
use refram::padic::{teichmuller_lift, FqElem, PrimeContext};

#[test]
fn oracle_break_is_bounded_and_obeys_the_congruence_law() {
    for tw in towers() {
        let rep = second_break_oracle(tw).unwrap();
        let (b, p) = (tw.b(), tw.p());
        assert!(b < rep.b_star && rep.b_star <= p * b);
        assert!(break_is_admissible(b, rep.b_star, tw.e_k(), p));
        if rep.b_star < realizable_upper(b, tw.e_k(), p).unwrap() {
            assert_eq!(rep.b_star % p, b % p);
            assert_ne!(rep.b_star % (p * p), ((1 + p) * b) % (p * p));
        }
    }
}

#[test]
fn construction_omega_kills_the_leading_term() {
    for tw in towers() {
        let w = teichmuller_lift(&tw.omega).unwrap();
        let th = theta(&w).operator(tw.gamma.matrix(), tw.sigma.matrix());
        let id = WMatrix::identity(&tw.ctx, tw.n.n());
        let image = apply_matrix(&th.sub(&id), &tw.rho0);
        assert!(image.valuation().unwrap() > 2 * tw.b());
        // the detected residue is the negative of the construction's omega
        let detected = detect_omega(&tw.rho0, tw.gamma.matrix(), tw.sigma.matrix()).unwrap();
        assert_eq!(detected, -&tw.omega);
    }
}

#[test]
fn swapping_generators_inverts_omega() {
    for tw in towers() {
        let g = tw.gamma.matrix();
        let s = tw.sigma.matrix();
        let w = detect_omega(&tw.rho0, g, s).unwrap();
        let swapped = detect_omega(&tw.rho0, s, g).unwrap();
        assert_eq!(swapped, w.inverse().unwrap());
        assert_eq!(mobius_transform(&w, &[[0, 1], [1, 0]]).unwrap(), swapped);
    }
}

#[test]
fn omega_ignores_unit_rescaling_in_k() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for tw in towers() {
        let g = tw.gamma.matrix();
        let s = tw.sigma.matrix();
        let w = detect_omega(&tw.rho0, g, s).unwrap();
        let c = tw.to_n(&random_unit(&tw.k, &mut rng)).unwrap();
        let scaled = &tw.rho0 * &c;
        assert_eq!(detect_omega(&scaled, g, s).unwrap(), w);
    }
}

#[test]
fn break_is_canonical() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for tw in towers() {
        let rep = canonicity_check(tw, 3, 10, &mut rng).unwrap();
        assert!(rep.all_agree(), "{rep:?}");
        assert_eq!(rep.b_star, second_break_oracle(tw).unwrap().b_star);
    }
}

#[test]
fn resampled_rho_keeps_valuation_class() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for tw in towers() {
        let p2 = tw.p() * tw.p();
        for k in 0..3 {
            let rho = resample_rho(tw, k % 2, 1 + k, &mut rng).unwrap();
            assert_eq!(rho.valuation().unwrap() % p2, tw.b() % p2);
        }
    }
}

#[test]
fn orbit_over_f4_is_everything_outside_f2() {
    let ctx = PrimeContext::new(2, 2, 3).unwrap();
    let u = FqElem::generator(&ctx);
    let orbit = orbit_pgl2(&u).unwrap();
    let mut expected = vec![u.clone(), &u + &FqElem::one(&ctx)];
    expected.sort_by_key(|x| x.index());
    assert_eq!(orbit, expected);
    assert_eq!(gl2(2).len(), 6);
}

#[test]
fn orbits_have_pgl2_size() {
    // the stabilizer of a point outside P^1(F_p) is trivial in PGL_2(F_p) unless
    // the point is quadratic over F_p, where it has order p + 1
    for (p, f) in [(2u64, 2usize), (3, 2), (5, 2), (2, 3), (3, 3)] {
        let ctx = PrimeContext::new(p, f, 2).unwrap();
        let pgl = (p * p - 1) * (p * p - p) / (p - 1);
        for w in FqElem::all(&ctx).into_iter().filter(|x| !x.in_prime_field()) {
            let size = orbit_pgl2(&w).unwrap().len() as u64;
            let stab = if f == 2 { p + 1 } else { 1 };
            assert_eq!(size, pgl / stab, "p = {p}, f = {f}");
        }
    }
}

#[test]
fn realizable_breaks_respect_the_ramification_bound() {
    for p in [2usize, 3, 5] {
        for e_k in 1..=12 {
            for b in valid_breaks(e_k, p) {
                assert_eq!(ramification_bound_violations(b, e_k, p).unwrap(), 0, "p={p} e_K={e_k} b={b}");
            }
        }
    }
}

#[test]
fn region_labels_switch_at_the_max_term_boundaries() {
    for p in [2usize, 3, 5] {
        for e_k in 1..=8 {
            for pt in region_grid(e_k, p, p * e_k) {
                let (b, t) = (pt.b as i64, pt.t as i64);
                let (pi, ei) = (p as i64, e_k as i64);
                let twist_active = pi * t > b;
                let ram_active = (pi * pi - 1) * b > pi * pi * ei;
                let expected = match (twist_active, ram_active) {
                    (false, false) => Region::Max,
                    (true, false) => Region::Twist,
                    (false, true) => Region::Ramification,
                    (true, true) if pi * t - b >= (pi * pi - 1) * b - pi * pi * ei => Region::Twist,
                    (true, true) => Region::Ramification,
                };
                assert_eq!(pt.region, expected);
            }
        }
    }
}

#[test]
fn named_break_values() {
    assert_eq!(second_break_formula(2, 1, 2, 3).unwrap(), 5);
    assert_eq!(second_break_formula(5, 4, 4, 3).unwrap(), 8);
    assert_eq!(second_break_formula(1, 0, 1, 2).unwrap(), 2);
    assert_eq!(enumerate_realizable(2, 2, 3).unwrap(), vec![5, 6]);
    assert_eq!(enumerate_realizable(5, 4, 3).unwrap(), vec![8, 11]);
    assert_eq!(enumerate_realizable(1, 2, 3).unwrap(), vec![3]);
}

proptest! {
    #[test]
    fn formula_values_are_admissible_and_enumerated(pi in 0usize..3, e_k in 1usize..12, bi in 0usize..64, ti in 0usize..64) {
        let p = [2usize, 3, 5][pi];
        let bs = valid_breaks(e_k, p);
        let b = bs[bi % bs.len()];
        let ts: Vec<usize> = std::iter::once(0).chain((1..b).filter(|t| t % p != 0)).collect();
        let t = ts[ti % ts.len()];
        let n = second_break_formula(b, t, e_k, p).unwrap();
        prop_assert!(break_is_admissible(b, n, e_k, p));
        prop_assert!(enumerate_realizable(b, e_k, p).unwrap().contains(&n));
        let class = classify(b, n, p);
        prop_assert_eq!(class == Classification::Mrr, n == p * b);
        prop_assert_eq!(class == Classification::Nmrr, n < p * b && p * n > (p * p - p + 1) * b);
    }

    #[test]
    fn every_enumerated_value_has_a_twist(pi in 0usize..3, e_k in 1usize..12, bi in 0usize..64) {
        let p = [2usize, 3, 5][pi];
        let bs = valid_breaks(e_k, p);
        let b = bs[bi % bs.len()];
        for n in enumerate_realizable(b, e_k, p).unwrap() {
            let hit = std::iter::once(0)
                .chain((1..b).filter(|t| t % p != 0))
                .any(|t| second_break_formula(b, t, e_k, p).unwrap() == n);
            prop_assert!(hit, "b={} e_K={} p={} n={}", b, e_k, p, n);
        }
    }
}
