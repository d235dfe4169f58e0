mod common;

use std::f64::consts::PI;

use common::*;
use floquet_sense::ed::{Boundary, EdEngine, EdParams, EdState};
use floquet_sense::freefermion::*;
use floquet_sense::linalg;
use floquet_sense::su2::{self, Mat2};
use floquet_sense::{kgrid, validate, Complex64 as C, InitialState, ModelParams, PulseShape, ValidatedParams};
use proptest::prelude::*;

fn params(h0: f64, h1: f64, n: usize) -> ValidatedParams {
    validate(&ModelParams {
        h0,
        h1,
        n,
        ..Default::default()
    })
    .unwrap()
}

#[test]
fn undriven_propagator_is_static_exponential() {
    let p = params(0.7, 0.0, 8);
    for k in kgrid(8) {
        let mu = ModeHamiltonian::of(&p, k).mu;
        let want = expm2(gen(mu, p.tau));
        assert!(period_propagator(&p, k).max_abs_diff(want) < 1e-13);
    }
}

#[test]
fn kick_matches_narrow_pulse_limit() {
    let p = params(0.5, 0.3, 8);
    let u = period_propagator(&p, PI / 2.0);
    let oracle = kicked_propagator_oracle(1.0, 0.5, 0.3, 0.2, PI / 2.0);
    assert!(u.max_abs_diff(oracle) < 1e-6);
}

#[test]
fn kick_matches_narrow_pulse_limit_across_modes() {
    let p = params(0.191, 0.161, 16);
    for k in kgrid(16) {
        let oracle = kicked_propagator_oracle(1.0, 0.191, 0.161, 0.2, k);
        assert!(period_propagator(&p, k).max_abs_diff(oracle) < 1e-6, "k = {k}");
    }
}

#[test]
fn full_width_square_pulse_is_one_static_step() {
    let p = validate(&ModelParams {
        h0: 0.4,
        h1: 0.25,
        n: 8,
        pulse: PulseShape::SquarePulse { w: 0.2 },
        ..Default::default()
    })
    .unwrap();
    for k in kgrid(8) {
        let mu = ModeHamiltonian::new(1.0, 0.65, k).mu;
        assert!(period_propagator(&p, k).max_abs_diff(expm2(gen(mu, 0.2))) < 1e-13);
    }
}

#[test]
fn undriven_quasi_energy_is_mode_energy() {
    let p = params(0.7, 0.0, 8);
    for k in kgrid(8) {
        let m = FloquetMode::new(&p, k);
        let mu = ModeHamiltonian::of(&p, k).mu;
        let r = su2::norm(mu);
        assert!((m.quasi_energy - r).abs() < 1e-13);
        for a in 0..3 {
            assert!((m.axis[a] - mu[a] / r).abs() < 1e-13);
        }
    }
}

// quasi-energy at (h0, h1) = (0.191, 0.161), tau = 0.2, k = 3 pi / 4, frozen
// from the zero-width extrapolated pulse oracle
const FROZEN_QUASI_ENERGY: f64 = 0.761_013_815_959_3;

#[test]
fn quasi_energy_reference_point() {
    let u = kicked_propagator_oracle(1.0, 0.191, 0.161, 0.2, 3.0 * PI / 4.0);
    let oracle = ((u.0[0][0] + u.0[1][1]).re / 2.0).acos() / 0.2;
    assert!((oracle - FROZEN_QUASI_ENERGY).abs() < 1e-9, "oracle {oracle:.15}");
    let p = params(0.191, 0.161, 2000);
    let m = floquet_mode(&p, 3.0 * PI / 4.0, &ModeState::VACUUM).unwrap();
    assert!((m.quasi_energy - FROZEN_QUASI_ENERGY).abs() < 1e-9);
    let [a, b] = m.overlaps.unwrap();
    assert!((a.norm_sqr() + b.norm_sqr() - 1.0).abs() < 1e-12);
}

#[test]
fn closed_form_quasi_energy() {
    // cos(eps tau) = cos h1 cos(|mu| tau) - sin h1 sin(|mu| tau) n_z
    let p = params(0.191, 0.161, 2000);
    for k in [0.1, 1.0, 3.0 * PI / 4.0, 3.0] {
        let mu = ModeHamiltonian::of(&p, k).mu;
        let r = su2::norm(mu);
        let c = 0.161f64.cos() * (r * 0.2).cos() - 0.161f64.sin() * (r * 0.2).sin() * mu[2] / r;
        let m = FloquetMode::new(&p, k);
        assert!(((m.quasi_energy * 0.2).cos() - c).abs() < 1e-13);
    }
}

#[test]
fn gap_closes_on_analytic_line_at_zone_boundary() {
    for h0 in [0.1, 0.5, 0.83] {
        let h1 = gap_line_analytic(1.0, 0.2, h0);
        let p = params(h0, h1, 2000);
        let m = FloquetMode::new(&p, PI);
        assert!(m.quasi_energy < 1e-12);
        assert!(m.degenerate);
    }
}

#[test]
fn overlaps_need_a_pure_state() {
    let p = params(0.5, 0.1, 8);
    let mixed = ModeState::initial(&InitialState::ThermalOfH0 { beta: 1.0, h0: 0.5 }, 1.0, 0.3);
    assert!(floquet_mode(&p, 0.3, &mixed).is_err());
}

#[test]
fn polarized_chain_has_unit_magnetization() {
    let p = params(0.3, 0.1, 64);
    let modes = evolve_modes(&p, &InitialState::PolarizedUp, 0);
    assert_eq!(magnetization(&modes), 1.0);
    let corr = correlators_at(&p, &modes, 4, TimeLabel::Stroboscopic(0));
    assert!(linalg::max_abs(corr.c.as_ref()) == 0.0);
    assert!(linalg::max_abs(corr.i.as_ref()) == 0.0);
}

#[test]
fn weakly_coupled_chain_stays_polarized() {
    let p = validate(&ModelParams {
        j: 1e-9,
        h0: 0.4,
        h1: 0.2,
        n: 32,
        ..Default::default()
    })
    .unwrap();
    let modes = evolve_modes(&p, &InitialState::PolarizedUp, 123);
    assert!((magnetization(&modes) - 1.0).abs() < 1e-14);
    assert!(modes.iter().all(|s| s.occupation() < 1e-15));
}

#[test]
fn ground_state_is_stationary_without_drive() {
    let p = params(0.6, 0.0, 40);
    let init = InitialState::GroundStateOfH0 { h0: 0.6 };
    let c0 = correlators_at(&p, &evolve_modes(&p, &init, 0), 4, TimeLabel::Stroboscopic(0));
    for n in [1, 17, 500] {
        let c = correlators_at(&p, &evolve_modes(&p, &init, n), 4, TimeLabel::Stroboscopic(n));
        assert!(linalg::max_abs_diff(c.c.as_ref(), c0.c.as_ref()) < 1e-10);
        assert!(linalg::max_abs_diff(c.i.as_ref(), c0.i.as_ref()) < 1e-10);
    }
    let s = steady_correlators(&p, &init, 4);
    assert!(linalg::max_abs_diff(s.c.as_ref(), c0.c.as_ref()) < 1e-10);
    assert!(linalg::max_abs_diff(s.i.as_ref(), c0.i.as_ref()) < 1e-10);
}

#[test]
fn mode_power_matches_repeated_product() {
    let p = params(0.191, 0.161, 8);
    for k in kgrid(8) {
        let m = FloquetMode::new(&p, k);
        let mut u = Mat2::IDENTITY;
        for _ in 0..37 {
            u = m.u_period * u;
        }
        assert!(m.power(37).max_abs_diff(u) < 1e-12);
    }
}

fn ed_engine(p: &ModelParams) -> EdEngine {
    EdEngine::new(&EdParams::from_model(p, f64::INFINITY, Boundary::Periodic)).unwrap()
}

#[test]
fn agrees_with_exact_diagonalization() {
    for (h0, h1) in [(0.5, 0.3), (0.191, 0.161), (1.3, 0.05)] {
        let p = params(h0, h1, 8);
        let ed = ed_engine(&p);
        let modes = evolve_modes(&p, &InitialState::PolarizedUp, 50);
        let ff = correlators_at(&p, &modes, 4, TimeLabel::Stroboscopic(50));
        let state = ed.evolve(&EdState::polarized_up(8), 50);
        let exact = state.fermion_correlators(0, 4, TimeLabel::Stroboscopic(50));
        assert!(linalg::max_abs_diff(ff.c.as_ref(), exact.c.as_ref()) < 1e-8, "C at {h0} {h1}");
        assert!(linalg::max_abs_diff(ff.i.as_ref(), exact.i.as_ref()) < 1e-8, "I at {h0} {h1}");
        assert!((magnetization(&modes) - state.magnetization()).abs() < 1e-8);
    }
}

#[test]
fn momentum_occupations_agree_with_exact_diagonalization() {
    let p = params(0.4, 0.2, 8);
    let ed = ed_engine(&p);
    let state = ed.evolve(&EdState::polarized_up(8), 13);
    let full = state.fermion_correlators(0, 8, TimeLabel::Stroboscopic(13));
    let modes = evolve_modes(&p, &InitialState::PolarizedUp, 13);
    for (k, s) in kgrid(8).iter().zip(&modes) {
        let mut nk = C::new(0.0, 0.0);
        for i in 0..8 {
            for j in 0..8 {
                nk += full.c[(i, j)] * C::from_polar(1.0, k * (i as f64 - j as f64));
            }
        }
        nk /= 8.0;
        assert!((nk.re - s.occupation()).abs() < 1e-10);
        assert!(nk.im.abs() < 1e-10);
    }
}

#[test]
fn magnetization_tracks_exact_diagonalization_over_time() {
    let p = params(0.83, 0.034, 8);
    let ed = ed_engine(&p);
    let chain = FloquetChain::new(&p, &InitialState::PolarizedUp);
    let mut state = EdState::polarized_up(8);
    for n in 1..=40u64 {
        state = ed.evolve(&state, 1);
        assert!((magnetization(&chain.state_at(n)) - state.magnetization()).abs() < 1e-8);
    }
}

#[test]
fn thermal_state_agrees_with_gaussian_gibbs_oracle() {
    let p = params(0.5, 0.1, 6);
    let edp = EdParams::from_model(&p, f64::INFINITY, Boundary::Periodic);
    let (c, i) = kicked_gibbs_oracle(&edp, 0.7, -0.8 / 2.0, 9, 3);
    let modes = evolve_modes(&p, &InitialState::ThermalOfH0 { beta: 0.7, h0: 0.8 }, 9);
    let ff = correlators_at(&p, &modes, 3, TimeLabel::Stroboscopic(9));
    assert!(linalg::max_abs_diff(ff.c.as_ref(), c.as_ref()) < 1e-10);
    assert!(linalg::max_abs_diff(ff.i.as_ref(), i.as_ref()) < 1e-10);
    assert!(modes.iter().all(|s| (s.trace() - 1.0).abs() < 1e-13));
}

#[test]
fn steady_state_is_long_time_average() {
    let p = params(0.191, 0.161, 2000);
    let chain = FloquetChain::new(&p, &InitialState::PolarizedUp);
    let steady = correlators_at(&p, &chain.steady_state(), 4, TimeLabel::SteadyState);
    let mut c = linalg::CMat::zeros(4, 4);
    let mut i = linalg::CMat::zeros(4, 4);
    let count = 401.0;
    for n in 4000..=4400u64 {
        let x = correlators_at(&p, &chain.state_at(n), 4, TimeLabel::Stroboscopic(n));
        c += &x.c;
        i += &x.i;
    }
    c /= count;
    i /= count;
    let scale = linalg::max_abs(steady.c.as_ref()).max(linalg::max_abs(steady.i.as_ref()));
    assert!(linalg::max_abs_diff(c.as_ref(), steady.c.as_ref()) / scale < 1e-2);
    assert!(linalg::max_abs_diff(i.as_ref(), steady.i.as_ref()) / scale < 1e-2);
}

#[test]
fn gap_shrinks_with_chain_length_at_critical_field() {
    let g: Vec<f64> = [200, 2000, 20000].iter().map(|&n| floquet_gap(&params(1.0, 0.0, n)).gap).collect();
    assert!(g[1] < g[0] && g[2] < g[1]);
    assert!(g[2] < 1e-3);
    // open gap away from criticality
    assert!(floquet_gap(&params(0.6, 0.2, 2000)).gap > 0.1);
}

#[test]
fn gap_minimum_follows_analytic_line() {
    let p = params(0.5, 0.0, 2000);
    let h0s: Vec<f64> = (0..=10).map(|i| 0.1 * i as f64).collect();
    let line = gap_line(&p, &h0s, &GapSearch::default());
    let worst = line.iter().map(|x| (x.h1_numeric - x.h1_analytic).abs()).fold(0.0, f64::max);
    assert!(worst < 2e-3, "max deviation {worst}");
    assert!(line[10].h1_numeric.abs() < 1e-6);
    let p = params(0.83, 0.0, 2000);
    let (h1, _) = minimize_gap_over_h1(&p, &GapSearch::default());
    assert!((h1 - 0.034).abs() < 2e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn floquet_decomposition_reproduces_propagator(
        h0 in -2.0f64..2.0,
        h1 in -1.0f64..1.0,
        tau in 0.05f64..1.0,
        k in 0.0f64..PI,
    ) {
        let p = validate(&ModelParams { h0, h1, tau, n: 8, ..Default::default() }).unwrap();
        let m = FloquetMode::new(&p, k);
        let u = m.u_period;
        prop_assert!((u * u.adjoint()).max_abs_diff(Mat2::IDENTITY) < 1e-12);
        prop_assert!(m.quasi_energy >= 0.0 && m.quasi_energy <= PI / tau + 1e-12);
        if !m.degenerate {
            let rebuilt = Mat2::exp_pauli(m.axis, m.quasi_energy * tau);
            prop_assert!(rebuilt.max_abs_diff(u) < 1e-10);
            let [plus, minus] = m.eigvecs;
            let up = u.apply(plus);
            let um = u.apply(minus);
            let (lp, lm) = (C::from_polar(1.0, -m.quasi_energy * tau), C::from_polar(1.0, m.quasi_energy * tau));
            for a in 0..2 {
                prop_assert!((up[a] - lp * plus[a]).norm() < 1e-10);
                prop_assert!((um[a] - lm * minus[a]).norm() < 1e-10);
            }
        }
        let m = m.with_overlaps(&ModeState::VACUUM).unwrap();
        let [a, b] = m.overlaps.unwrap();
        prop_assert!((a.norm_sqr() + b.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn evolution_preserves_norm_and_bounds(
        h0 in -2.0f64..2.0,
        h1 in -0.5f64..0.5,
        n in 0u64..10_000,
        half in 2usize..40,
        beta in 0.1f64..5.0,
    ) {
        let p = validate(&ModelParams { h0, h1, n: 2 * half, ..Default::default() }).unwrap();
        for init in [InitialState::PolarizedUp, InitialState::GroundStateOfH0 { h0: 0.3 }, InitialState::ThermalOfH0 { beta, h0: 0.3 }] {
            let modes = evolve_modes(&p, &init, n);
            for s in &modes {
                prop_assert!((s.trace() - 1.0).abs() < 1e-10);
                let occ = s.occupation();
                prop_assert!((-1e-12..=1.0 + 1e-12).contains(&occ));
            }
            let m = magnetization(&modes);
            prop_assert!(m.abs() <= 1.0 + 1e-10);
            let corr = correlators_at(&p, &modes, 3.min(2 * half), TimeLabel::Stroboscopic(n));
            for i in 0..corr.len() {
                let d = corr.c[(i, i)];
                prop_assert!(d.re > -1e-10 && d.re < 1.0 + 1e-10 && d.im.abs() < 1e-14);
                prop_assert!(corr.i[(i, i)].norm() < 1e-14);
            }
            prop_assert!(linalg::hermitian_defect(corr.c.as_ref()) < 1e-12);
        }
    }
}
