use proptest::prelude::*;
use qphase_core::ensembles::{
    conventional_gibbs_dm, simplex_exp_moment, simplex_weighted_occupations,
};
use qphase_core::flow::{evolve_exact, propagator};
use qphase_core::two_state::{spin_hamiltonian, TwoLevelSystem};
use qphase_core::{
    expectation, fs_angle, projector, transition_probability, CMatrix, HermitianObservable,
    PureState, C64,
};

fn state(dim: usize) -> impl Strategy<Value = PureState> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim).prop_filter_map("zero vector", |v| {
        PureState::new(v.into_iter().map(|(re, im)| C64::new(re, im)).collect()).ok()
    })
}

fn hermitian(dim: usize) -> impl Strategy<Value = HermitianObservable> {
    prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), dim * dim).prop_map(move |v| {
        let a = CMatrix::from_row_major(
            dim,
            v.into_iter().map(|(re, im)| C64::new(re, im)).collect(),
        )
        .unwrap();
        HermitianObservable::new(a.add(&a.adjoint()).unwrap().scale(0.5)).unwrap()
    })
}

fn distinct_levels(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..1.0, n).prop_map(|gaps| {
        let mut acc = -1.0;
        gaps.iter()
            .map(|g| {
                acc += g;
                acc
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn transition_probability_is_a_symmetric_phase_free_cross_ratio(
        x in state(3), y in state(3), a in 0.0f64..6.3, b in 0.0f64..6.3
    ) {
        let k = transition_probability(&x, &y).unwrap();
        prop_assert!((0.0..=1.0).contains(&k));
        prop_assert!((k - transition_probability(&y, &x).unwrap()).abs() < 1e-14);
        let k2 = transition_probability(&x.with_phase(a), &y.with_phase(b)).unwrap();
        prop_assert!((k - k2).abs() < 1e-14);
        prop_assert!((transition_probability(&x, &x).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn fs_angle_is_a_metric(x in state(3), y in state(3), z in state(3)) {
        let dxy = fs_angle(&x, &y).unwrap();
        let dyz = fs_angle(&y, &z).unwrap();
        let dxz = fs_angle(&x, &z).unwrap();
        prop_assert!((0.0..=core::f64::consts::PI + 1e-12).contains(&dxy));
        prop_assert!(dxz <= dxy + dyz + 1e-12);
        prop_assert!((dxy - fs_angle(&y, &x).unwrap()).abs() < 1e-12);
        prop_assert!(fs_angle(&x, &x).unwrap() < 1e-7);
    }

    #[test]
    fn unitary_flow_is_an_isometry(
        h in hermitian(3), x in state(3), y in state(3), t in -5.0f64..5.0
    ) {
        let xt = evolve_exact(&h, &x, t).unwrap();
        let yt = evolve_exact(&h, &y, t).unwrap();
        let before = fs_angle(&x, &y).unwrap();
        let after = fs_angle(&xt, &yt).unwrap();
        prop_assert!((before - after).abs() < 1e-10);
        let e0 = expectation(&h, &x).unwrap();
        let e1 = expectation(&h, &xt).unwrap();
        prop_assert!((e0 - e1).abs() < 1e-11);
    }

    #[test]
    fn flow_has_the_group_property(h in hermitian(3), x in state(3), s in -3.0f64..3.0, t in -3.0f64..3.0) {
        let one = evolve_exact(&h, &evolve_exact(&h, &x, s).unwrap(), t).unwrap();
        let two = evolve_exact(&h, &x, s + t).unwrap();
        prop_assert!(one.same_point(&two, 1e-10));
    }

    #[test]
    fn projectors_are_rank_one_density_matrices(x in state(4)) {
        let p = projector(&x);
        let m = p.matrix();
        prop_assert!((m.trace().re - 1.0).abs() < 1e-14);
        prop_assert!(m.matmul(m).unwrap().max_abs_diff(m) < 1e-14);
    }

    #[test]
    fn simplex_occupations_form_a_distribution(levels in distinct_levels(4), beta in -3.0f64..3.0) {
        let p = simplex_weighted_occupations(&levels, beta).unwrap();
        prop_assert!(p.iter().all(|&q| q > 0.0));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // Colder means more weight on lower levels.
        if beta > 0.05 {
            prop_assert!(p[0] > p[3]);
        }
    }

    #[test]
    fn simplex_moment_is_log_convex_in_beta(levels in distinct_levels(3), beta in -2.0f64..2.0) {
        let d = 1e-2;
        let f = |b: f64| simplex_exp_moment(&levels, b).unwrap().ln();
        prop_assert!(f(beta + d) - 2.0 * f(beta) + f(beta - d) >= -1e-12);
    }

    #[test]
    fn gamma_ensemble_is_less_polarized_than_gibbs(
        e0 in -2.0f64..2.0, gap in 0.01f64..4.0, beta in 0.01f64..10.0
    ) {
        let sys = TwoLevelSystem::standard(e0, e0 + gap).unwrap();
        let g = sys.gamma_closed_forms(beta);
        let c = sys.conventional_closed_forms(beta);
        prop_assert!(g.populations[0] < c.populations[0]);
        prop_assert!(g.populations[0] > 0.5);
        prop_assert!((g.populations[0] + g.populations[1] - 1.0).abs() < 1e-15);
        let e_mix = e0 * g.populations[0] + (e0 + gap) * g.populations[1];
        prop_assert!((e_mix - g.energy).abs() < 1e-12 * (1.0 + e0.abs() + gap));
    }

    #[test]
    fn two_level_populations_ignore_the_midpoint(
        shift in -5.0f64..5.0, gap in 0.1f64..3.0, beta in 0.05f64..5.0
    ) {
        let a = TwoLevelSystem::standard(0.0, gap).unwrap().gamma_closed_forms(beta);
        let b = TwoLevelSystem::standard(shift, shift + gap).unwrap().gamma_closed_forms(beta);
        prop_assert!((a.populations[0] - b.populations[0]).abs() < 1e-12);
    }

    #[test]
    fn gibbs_matrix_is_unitarily_covariant(
        pole in state(2), g in hermitian(2), t in -2.0f64..2.0, beta in 0.1f64..3.0
    ) {
        let u = propagator(&g, t);
        let h = spin_hamiltonian(1.0, &pole).unwrap();
        let rotated_pole = pole.apply(&u).unwrap();
        let h_rot = spin_hamiltonian(1.0, &rotated_pole).unwrap();
        let r = conventional_gibbs_dm(&h, beta).unwrap();
        let r_rot = conventional_gibbs_dm(&h_rot, beta).unwrap();
        let conj = u.matmul(r.matrix()).unwrap().matmul(&u.adjoint()).unwrap();
        prop_assert!(conj.max_abs_diff(r_rot.matrix()) < 1e-12);
    }
}
