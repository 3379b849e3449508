use std::f64::consts::TAU;

use approx::{abs_diff_eq, assert_abs_diff_eq};
use hjlab_core::characteristics::{integrate_flow, inverse_flow, uniform_seeds};
use hjlab_core::grid::uniform_times;
use hjlab_core::io::{read_field_csv, write_field_csv};
use hjlab_core::semiconcavity::random_semiconcave_field;
use hjlab_core::solver::{characteristic_field, lax_friedrichs_step, stable_dt, Dissipation};
use hjlab_core::{
    check_gradient_bound, classical_horizon, gronwall_certificate, reflect, solve_lax_friedrichs, Field, Grid, Hamiltonian,
    InitialCondition, SchemeConfig, SpaceTimeField,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn builtin() -> impl Strategy<Value = Hamiltonian> {
    prop_oneof![
        (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b, c)| Hamiltonian::quadratic(a, b, c)),
        (0.1..2.0f64, 0.5..3.0f64).prop_map(|(a, k)| Hamiltonian::cosine(a, k)),
        Just(Hamiltonian::neg_square()),
        (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64)
            .prop_map(|(a, b1, b2)| format!("quadratic:{a},{b1},{b2},0.5").parse().unwrap()),
        (0.1..2.0f64, 0.5..3.0f64).prop_map(|(a, k)| format!("cosine:{a},{k},2").parse().unwrap()),
    ]
}

fn probe(h: &Hamiltonian, raw: [f64; 2]) -> [f64; 2] {
    if h.dim() == 1 {
        [raw[0], 0.0]
    } else {
        raw
    }
}

fn trig(seed: u64) -> InitialCondition {
    InitialCondition::random_trig(&mut ChaCha8Rng::seed_from_u64(seed))
}

fn same(a: &Hamiltonian, b: &Hamiltonian, p: &[f64; 2], tol: f64) -> bool {
    abs_diff_eq!(a.value(p), b.value(p), epsilon = tol)
        && abs_diff_eq!(a.gradient(p)[..], b.gradient(p)[..], epsilon = tol)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn gradient_and_hessian_match_central_differences(h in builtin(), raw in prop::array::uniform2(-10.0..10.0f64)) {
        let p = probe(&h, raw);
        let d = 1e-4;
        let grad = h.gradient(&p);
        let hess = h.hessian(&p);
        for axis in 0..h.dim() {
            let (mut lo, mut hi) = (p, p);
            lo[axis] -= d;
            hi[axis] += d;
            let fd = (h.value(&hi) - h.value(&lo)) / (2.0 * d);
            prop_assert!((fd - grad[axis]).abs() <= 1e-6 * (1.0 + grad[axis].abs()), "dH/dp{axis}: {fd} vs {}", grad[axis]);
            let (gl, gh) = (h.gradient(&lo), h.gradient(&hi));
            for r in 0..h.dim() {
                let fd2 = (gh[r] - gl[r]) / (2.0 * d);
                prop_assert!((fd2 - hess[r][axis]).abs() <= 1e-6 * (1.0 + hess[r][axis].abs()));
            }
        }
    }

    #[test]
    fn normalize_is_idempotent_and_pins_origin(h in builtin(), raw in prop::array::uniform2(-5.0..5.0f64)) {
        let n = h.normalize();
        assert_abs_diff_eq!(n.value(&[0.0, 0.0]), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(n.gradient(&[0.0, 0.0])[..], [0.0, 0.0][..], epsilon = 1e-12);
        prop_assert!(same(&n.normalize(), &n, &probe(&h, raw), 1e-12));
    }

    #[test]
    fn reflect_is_an_involution(h in builtin(), raw in prop::array::uniform2(-5.0..5.0f64)) {
        let p = probe(&h, raw);
        let r = h.reflect();
        assert_abs_diff_eq!(r.value(&p), -h.value(&[-p[0], -p[1]]), epsilon = 1e-12);
        prop_assert!(same(&r.reflect(), &h, &p, 1e-12));
    }

    #[test]
    fn inflated_hessian_sup_dominates_the_ball(h in builtin(), radius in 0.1..6.0f64, dir in prop::array::uniform2(-1.0..1.0f64), s in 0.0..1.0f64) {
        let len = dir[0].hypot(if h.dim() == 2 { dir[1] } else { 0.0 }).max(1e-9);
        let p = probe(&h, [s * radius * dir[0] / len, s * radius * dir[1] / len]);
        prop_assert!(h.hessian_opnorm(&p) <= h.hess_opnorm_sup(radius).inflated);
    }

    #[test]
    fn normalized_hamiltonian_obeys_taylor_bound(h in builtin(), ell in 0.1..5.0f64, raw in prop::array::uniform2(-1.0..1.0f64)) {
        let n = h.normalize();
        let c = n.quadratic_remainder_constant(ell).unwrap();
        let p = probe(&h, [raw[0] * ell / 2f64.sqrt(), raw[1] * ell / 2f64.sqrt()]);
        let r2 = p[0] * p[0] + p[1] * p[1];
        prop_assert!(n.value(&p).abs() <= c * r2 + 1e-12);
    }

    #[test]
    fn trig_data_respects_declared_constants(seed in any::<u64>(), x in 0.0..TAU, y in 0.0..TAU) {
        let psi = trig(seed);
        let dist = (x - y).abs().min(TAU - (x - y).abs());
        prop_assert!((psi.value(&[x, 0.0]) - psi.value(&[y, 0.0])).abs() <= psi.lipschitz() * dist + 1e-12);
        let (gx, gy) = (psi.gradient(&[x, 0.0])[0], psi.gradient(&[y, 0.0])[0]);
        prop_assert!((gx - gy).abs() <= psi.gradient_lipschitz() * dist + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn scheme_is_monotone_under_node_bumps(h in builtin(), seed in any::<u64>(), node in 0usize..64, bump in 1e-3..1.0f64) {
        prop_assume!(h.dim() == 1);
        let grid = Grid::new_1d(TAU, 64).unwrap();
        let base = trig(seed).sample(&grid).unwrap();
        let mut bumped = base.values().to_vec();
        bumped[node] += bump;
        let bumped = Field::from_values(grid.clone(), bumped).unwrap();
        // Monotone while σ dominates |H'| over every slope in either field.
        let sigma = [1.1 * h.partial_sup(bumped.lipschitz_estimate() + 1.0)[0] + 1e-3, 0.0];
        let dt = stable_dt(&grid, &sigma, 0.9);
        let (a, b) = (lax_friedrichs_step(&h, &base, dt, &sigma), lax_friedrichs_step(&h, &bumped, dt, &sigma));
        for (lo, hi) in a.iter().zip(&b) {
            prop_assert!(hi >= lo);
        }
    }

    #[test]
    fn solution_commutes_with_node_shifts(seed in any::<u64>(), shift in 1isize..64) {
        let n = 64;
        let grid = Grid::new_1d(TAU, n).unwrap();
        let h = Hamiltonian::cosine(1.0, 1.0);
        let psi = trig(seed);
        let cfg = SchemeConfig::new(0.25).with_dissipation(Dissipation::Fixed([1.2, 0.0])).with_dt(0.25 / 40.0);
        let base = solve_lax_friedrichs(&h, &psi, &grid, &cfg).unwrap();
        let offset = shift as f64 * grid.spacing(0);
        let shifted = InitialCondition::custom(
            "shifted", 1, [TAU, 0.0],
            std::sync::Arc::new({ let psi = psi.clone(); move |x| psi.value(&[x[0] - offset, 0.0]) }),
            std::sync::Arc::new({ let psi = psi.clone(); move |x| psi.gradient(&[x[0] - offset, 0.0]) }),
            psi.lipschitz(), psi.gradient_lipschitz(),
        ).unwrap();
        let moved = solve_lax_friedrichs(&h, &shifted, &grid, &cfg).unwrap();
        prop_assert!(moved.last().distance(&base.last().roll([shift, 0])).unwrap() <= 1e-12);
    }

    #[test]
    fn reflected_solve_negates_exactly(seed in any::<u64>()) {
        let grid = Grid::new_1d(TAU, 96).unwrap();
        let h = Hamiltonian::cosine(1.0, 1.0);
        let psi = trig(seed);
        let cfg = SchemeConfig::new(0.3);
        let direct = solve_lax_friedrichs(&h, &psi, &grid, &cfg).unwrap();
        let (rh, rpsi) = reflect(&h, &psi);
        let mirrored = solve_lax_friedrichs(&rh, &rpsi, &grid, &cfg).unwrap();
        prop_assert!(direct.last().distance(&mirrored.last().map(|v| -v)).unwrap() <= 1e-12);
    }

    #[test]
    fn corpus_fields_satisfy_the_gradient_bound(seed in any::<u64>(), n in 128usize..1024) {
        let grid = Grid::new_1d(TAU, n).unwrap();
        let (f, c) = random_semiconcave_field(&grid, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let bound = check_gradient_bound(&f, c).unwrap();
        prop_assert!(bound.passed, "ratio {} slack {}", bound.ratio, bound.slack);
    }

    #[test]
    fn flow_inverse_recovers_seeds(seed in any::<u64>(), k in 1usize..20) {
        let h = Hamiltonian::quadratic(0.5, 0.0, 0.0);
        let psi = trig(seed);
        let grid = psi.grid(128).unwrap();
        let g = characteristic_field(&h, &psi, &grid, uniform_times(0.01, 20)).unwrap();
        let bundle = integrate_flow(&g, &h, &uniform_seeds(&grid, 16)).unwrap();
        for (j, s) in bundle.seeds.iter().enumerate() {
            let back = inverse_flow(&bundle, bundle.times[k], &bundle.paths[k][j]).unwrap();
            let d = (back.x[0] - s[0]).abs();
            prop_assert!(d.min(TAU - d) <= 1e-9, "seed {j}: {} vs {}", back.x[0], s[0]);
        }
    }

    #[test]
    fn csv_round_trip_is_bit_exact(values in prop::collection::vec(-1e6..1e6f64, 24)) {
        let grid = Grid::new_1d(TAU, 8).unwrap();
        let slices: Vec<Field> = values.chunks(8).map(|c| Field::from_values(grid.clone(), c.to_vec()).unwrap()).collect();
        let field = SpaceTimeField::new(grid, uniform_times(0.1, 2), slices).unwrap();
        let mut buf = Vec::new();
        write_field_csv(&field, &mut buf).unwrap();
        prop_assert_eq!(read_field_csv(buf.as_slice()).unwrap(), field);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn passing_certificate_implies_exponential_envelope(seed in any::<u64>(), cosine in any::<bool>()) {
        let h = if cosine { Hamiltonian::cosine(1.0, 1.0) } else { Hamiltonian::quadratic(0.5, 0.0, 0.0) };
        let psi = trig(seed);
        // The grid-scale kink rule needs k·h ≤ 0.2 for the modes of u.
        let grid = psi.grid(512).unwrap();
        let horizon = 0.4 * classical_horizon(&h, &psi, &grid).unwrap();
        let lf = solve_lax_friedrichs(&h, &psi, &grid, &SchemeConfig::new(horizon)).unwrap();
        let oracle = characteristic_field(&h, &psi, &grid, lf.times().to_vec()).unwrap();
        let eps = lf.sub(&oracle).unwrap().slices().iter().map(Field::sup_norm).fold(0.0, f64::max);
        let cert = gronwall_certificate(&lf, &oracle, &h, eps).unwrap();
        prop_assert!(cert.verdict);
        for (m, env) in cert.m.iter().zip(&cert.envelope) {
            prop_assert!(*m <= env * (1.0 + 1e-12));
        }
    }
}
