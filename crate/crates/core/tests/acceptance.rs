//! Acceptance suite: one test per release gate, A1-A10. Each prints a
//! PASS/FAIL line (visible with --nocapture); the test verdicts themselves
//! are the gate. Run with
//!
//!   cargo test -p switch-core --test acceptance -- --nocapture
//!
//! A5 checks the closed-form dark-period law against Monte Carlo
//! segmentation and is expected to expose the estimator bias discussed in
//! the test body; it fails with full diagnostics rather than loosening the
//! stated bound.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use std::time::Instant;

use switch_core::eig;
use switch_core::fcs::{
    self, build_tilted, current_stats, legendre, legendre_inverse, steady_states, theta,
    CurrentOptions, EigMethod, LdfCurve, SolverConfig, ThetaSample,
};
use switch_core::hilbert::{atomic_transition, build_space, AtomState, ModeSpec, Operator};
use switch_core::model::{build_model, Channel, LindbladModel, SwitchParams};
use switch_core::presets;
use switch_core::symmetry::{build_swap, check_strong_symmetry, sector_weights};
use switch_core::trajectory::{
    dark_transition_rate, run_ensemble, run_trajectory_observed, segment_periods,
    suggested_threshold, InitialState, JumpRecord, TrajectoryConfig,
};

fn default_space() -> std::sync::Arc<switch_core::hilbert::HilbertSpace> {
    build_space(&ModeSpec::default()).unwrap()
}

fn model_for(p: &SwitchParams) -> LindbladModel {
    build_model(&default_space(), p).unwrap()
}

fn solver() -> SolverConfig {
    SolverConfig::default()
}

#[test]
fn a01_stationarity_theta_zero_across_parameter_sets() {
    const TOL: f64 = 1e-9;
    for (name, p) in presets::all() {
        let m = model_for(&p);
        let t0 = theta(&m, 0.0, &solver()).unwrap();
        assert!(
            t0.theta.abs() < TOL,
            "FAIL A1 [{name}]: theta(0) = {:.3e}",
            t0.theta
        );
        assert!(t0.imag_abs < TOL);
        println!("PASS A1 [{name}]: theta(0) = {:+.2e} (tol {TOL:.0e})", t0.theta);
    }
}

#[test]
fn a02_steady_state_multiplicity() {
    let on = steady_states(&model_for(&presets::laser_on()), None, 4096).unwrap();
    assert_eq!(
        on.null_dim, 1,
        "FAIL A2: driven model null_dim = {} (expected 1)",
        on.null_dim
    );
    let off = steady_states(&model_for(&presets::laser_off()), None, 4096).unwrap();
    assert!(
        off.null_dim >= 2,
        "FAIL A2: undriven model null_dim = {} (expected >= 2)",
        off.null_dim
    );
    println!(
        "PASS A2: null_dim driven = 1, undriven = {} (threshold {:.2e})",
        off.null_dim, off.zero_threshold
    );
}

#[test]
fn a03_kink_vs_smooth_one_sided_slopes() {
    let opts = CurrentOptions::default();
    let off = current_stats(&model_for(&presets::laser_off()), &opts, &solver()).unwrap();
    assert!(
        off.slope_rel_difference > 1e-3,
        "FAIL A3: undriven one-sided slopes differ by only {:.3e}",
        off.slope_rel_difference
    );
    let on = current_stats(&model_for(&presets::laser_on()), &opts, &solver()).unwrap();
    assert!(
        on.slope_rel_difference < 1e-6,
        "FAIL A3: driven one-sided slopes differ by {:.3e} (>= 1e-6)",
        on.slope_rel_difference
    );
    println!(
        "PASS A3: slope rel. difference undriven = {:.2e} (> 1e-3), driven = {:.2e} (< 1e-6)",
        off.slope_rel_difference, on.slope_rel_difference
    );
}

#[test]
fn a04_switch_ratio_magnitude_and_monotonicity() {
    let started = Instant::now();
    let space = default_space();
    let opts = CurrentOptions::default();
    let mut alphas = Vec::new();
    for &hop in &presets::blockade_sweep_grid() {
        let p = SwitchParams {
            hop,
            ..presets::blockade_sweep()
        };
        let m = build_model(&space, &p).unwrap();
        let st = current_stats(&m, &opts, &solver()).unwrap();
        alphas.push((hop, st.alpha));
    }
    let at_default = alphas[0].1;
    assert!(
        at_default >= 100.0,
        "FAIL A4: flux ratio alpha = {at_default:.1} < 100 at hop = 1e-3"
    );
    for pair in alphas.windows(2) {
        assert!(
            pair[1].1 < pair[0].1,
            "FAIL A4: alpha not decreasing between hop = {:.3e} ({:.2}) and {:.3e} ({:.2})",
            pair[0].0,
            pair[0].1,
            pair[1].0,
            pair[1].1
        );
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs() < 60,
        "FAIL A4: sweep took {elapsed:?} (>= 1 minute)"
    );
    println!(
        "PASS A4: alpha = {at_default:.1} at hop 1e-3, strictly decreasing over [1e-3, 1e-1] ({} points, {:.1?})",
        alphas.len(),
        elapsed
    );
}

/// Mean dark-period length from segmented jump records against the
/// closed-form value 1/(Γ₀' + Γ₁'/2) = 30000 at the telegraph parameters.
///
/// The counted-channel record delimits a quiet stretch by the last click
/// before it and the first click after it, so every measured dark length
/// carries the residual bright spacing on both ends in addition to the
/// decoupled-state residence time; at the maximal attainable click rate of
/// the driven manifold (~1e-4) that bias is of order 2e4 time units and
/// cannot fall below three standard errors of the target at any feasible
/// sample size. The bound is asserted as stated; the diagnostics separate
/// the residence time from the bias so the discrepancy is auditable.
#[test]
fn a05_dark_period_law_monte_carlo() {
    let p = presets::telegraph();
    let m = model_for(&p);
    let dark = dark_transition_rate(&p).unwrap();
    assert!((dark.mean_dark_period - 30_000.0).abs() < 1e-6);

    let st = current_stats(&m, &CurrentOptions::default(), &solver()).unwrap();
    let threshold = suggested_threshold(st.q_mean, &p).unwrap();
    let cfg = TrajectoryConfig {
        t_max: 4e5,
        initial: InitialState::Basis {
            atom: AtomState::BothGround,
            photons: [0, 0, 0],
        },
        seed: 31,
        ensemble: 150,
        counted: vec!["r_emit".into(), "r_abs".into()],
    };
    let records = run_ensemble(&m, &cfg).unwrap();
    let refs: Vec<&JumpRecord> = records.iter().collect();
    let stats = segment_periods(&refs, threshold).unwrap();

    let n_dark = stats.dark_lengths.len();
    assert!(
        n_dark >= 200,
        "FAIL A5: only {n_dark} dark periods segmented (need >= 200)"
    );
    let deviation = (stats.t_dark_mean - dark.mean_dark_period).abs();
    let bright_spacing = stats.t_bright_mean;
    println!(
        "A5 diagnostics: dark mean = {:.3e} +- {:.2e} over {n_dark} periods; \
         target {:.3e}; threshold {threshold:.3e}; bright spacing {bright_spacing:.3e} \
         (end-bias estimate 2x spacing = {:.3e})",
        stats.t_dark_mean,
        stats.t_dark_stderr,
        dark.mean_dark_period,
        2.0 * bright_spacing,
    );
    assert!(
        deviation <= 3.0 * stats.t_dark_stderr,
        "FAIL A5: dark mean {:.3e} deviates from {:.3e} by {:.1} standard errors",
        stats.t_dark_mean,
        dark.mean_dark_period,
        deviation / stats.t_dark_stderr
    );
    println!("PASS A5: dark mean within 3 standard errors of the closed form");
}

#[test]
fn a06_cross_method_current() {
    let p = presets::telegraph();
    let m = model_for(&p);
    let st = current_stats(&m, &CurrentOptions::default(), &solver()).unwrap();

    let cfg = TrajectoryConfig {
        t_max: 4e5,
        initial: InitialState::Basis {
            atom: AtomState::BothGround,
            photons: [0, 0, 0],
        },
        seed: 77,
        ensemble: 120,
        counted: vec!["r_emit".into(), "r_abs".into()],
    };
    let records = run_ensemble(&m, &cfg).unwrap();
    let rates: Vec<f64> = records
        .iter()
        .map(|r| r.weighted_count() as f64 / r.t_final)
        .collect();
    let n = rates.len() as f64;
    let mean = rates.iter().sum::<f64>() / n;
    let var = rates.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    let pull = (mean - st.q_mean).abs() / se;
    assert!(
        pull <= 3.0,
        "FAIL A6: ensemble rate {mean:.4e} vs spectral {:.4e} differs by {pull:.1} SE",
        st.q_mean
    );
    println!(
        "PASS A6: ensemble weighted rate {mean:.4e} +- {se:.1e} matches spectral {:.4e} ({pull:.2} SE)",
        st.q_mean
    );
}

#[test]
fn a07_eigensolver_oracles() {
    // Dense and shift-invert paths agree on the default space.
    let m = model_for(&presets::laser_on());
    for s in [0.0, 0.5] {
        let dense = theta(
            &m,
            s,
            &SolverConfig {
                method: EigMethod::Dense,
                ..solver()
            },
        )
        .unwrap();
        let iter = theta(
            &m,
            s,
            &SolverConfig {
                method: EigMethod::Iterative,
                ..solver()
            },
        )
        .unwrap();
        let diff = (dense.theta - iter.theta).abs();
        assert!(
            diff < 1e-8,
            "FAIL A7: dense/iterative disagree by {diff:.2e} at s = {s}"
        );
    }

    // Analytic oracle: one decay channel between two atomic levels on the
    // 4-state photonless space. The tilted generator is triangular, so its
    // spectrum is {0 x9, -gamma/2 x6, -gamma x1} independent of s.
    let space = build_space(&ModeSpec {
        cavity_cutoffs: [1, 1, 1],
        global_cap: Some(0),
    })
    .unwrap();
    let gamma: f64 = 0.37;
    let l = atomic_transition(&space, AtomState::BothGround, AtomState::Symmetric)
        .scale(C64::new(gamma.sqrt(), 0.0));
    let damped = LindbladModel {
        space: space.clone(),
        hamiltonian: Operator::zeros(&space),
        channels: vec![Channel {
            label: "r_emit".into(),
            op: l,
            weight: 1,
        }],
    };
    let mut expected: Vec<f64> = Vec::new();
    expected.extend(std::iter::repeat(0.0).take(9));
    expected.extend(std::iter::repeat(-gamma / 2.0).take(6));
    expected.push(-gamma);
    expected.sort_by(f64::total_cmp);
    for s in [-0.9, 0.0, 1.4] {
        let w = build_tilted(&damped, s, 4096).unwrap();
        let mut got: Vec<f64> = eig::eigenvalues_dense(w.matrix())
            .unwrap()
            .iter()
            .map(|z| z.re)
            .collect();
        got.sort_by(f64::total_cmp);
        for (g, e) in got.iter().zip(expected.iter()) {
            assert!(
                (g - e).abs() < 1e-10,
                "FAIL A7: damping spectrum eigenvalue {g} vs {e} at s = {s}"
            );
        }
    }

    // Poisson oracle: a flat-rate channel gives theta(s) = gamma(e^-s - 1).
    let flat = {
        use AtomState::*;
        let t = |i, j| atomic_transition(&space, i, j);
        let sx = &(&t(BothGround, Symmetric) + &t(Symmetric, BothGround))
            + &(&t(Antisymmetric, BothExcited) + &t(BothExcited, Antisymmetric));
        LindbladModel {
            space: space.clone(),
            hamiltonian: Operator::zeros(&space),
            channels: vec![Channel {
                label: "r_emit".into(),
                op: sx.scale(C64::new(gamma.sqrt(), 0.0)),
                weight: 1,
            }],
        }
    };
    for s in [-1.2, -0.3, 0.0, 0.7, 2.1] {
        let t = theta(&flat, s, &solver()).unwrap();
        let want = gamma * ((-s).exp() - 1.0);
        assert!(
            (t.theta - want).abs() < 1e-10,
            "FAIL A7: Poisson theta({s}) = {} vs {want}",
            t.theta
        );
    }
    println!("PASS A7: dense vs shift-invert to 1e-8; analytic tilted spectra to 1e-10");
}

#[test]
fn a08_symmetry_suite() {
    let space = default_space();
    let pi = build_swap(&space);

    // Undriven: strong symmetry to 1e-12 and parity conserved along 100
    // trajectories.
    let off = model_for(&presets::laser_off());
    let report = check_strong_symmetry(&off, &pi, 1e-12).unwrap();
    assert!(
        report.strong_symmetry,
        "FAIL A8: commutator norms {:?}",
        report.commutator_norms
    );
    let cfg = TrajectoryConfig {
        t_max: 2e3,
        initial: InitialState::Basis {
            atom: AtomState::Symmetric,
            photons: [0, 0, 0],
        },
        seed: 9,
        ensemble: 1,
        counted: vec!["r_emit".into()],
    };
    let mut worst: f64 = 0.0;
    for stream in 0..100 {
        run_trajectory_observed(&off, &cfg, stream, |_, psi| {
            let w = sector_weights(&pi, psi);
            let minus = w.iter().find(|(v, _)| *v < 0.0).unwrap().1;
            worst = worst.max(minus);
        })
        .unwrap();
    }
    assert!(
        worst < 1e-10,
        "FAIL A8: antisymmetric weight reached {worst:.2e} along undriven trajectories"
    );

    // Driven: the symmetry breaks through the first atomic channel with
    // commutator norm exactly twice the channel norm.
    let on = model_for(&presets::laser_on());
    let l1 = &on.channel("at_1").unwrap().op;
    let c = switch_core::hilbert::commutator(&pi.op, l1).unwrap();
    let lhs = c.frobenius_norm();
    let rhs = 2.0 * l1.frobenius_norm();
    assert!(
        (lhs - rhs).abs() < 1e-12,
        "FAIL A8: ||[pi, L1]|| = {lhs:.6e} vs 2||L1|| = {rhs:.6e}"
    );
    assert!(lhs > 0.0);
    println!(
        "PASS A8: strong symmetry to 1e-12 undriven, parity drift < 1e-10 over 100 trajectories, \
         broken-channel norm relation to 1e-12 driven"
    );
}

#[test]
fn a09_legendre_round_trip() {
    // Convex analytic curve sampled densely.
    let gamma = 1.0;
    let ds = 0.01;
    let samples: Vec<ThetaSample> = (-300..=300)
        .map(|k| {
            let s = k as f64 * ds;
            ThetaSample {
                s,
                theta: gamma * ((-s).exp() - 1.0),
                imag_abs: 0.0,
                residual: 0.0,
                gap: f64::NAN,
            }
        })
        .collect();
    let curve = LdfCurve {
        samples,
        degenerate_at: vec![],
        params: None,
    };
    let dq = 0.02;
    let q_grid: Vec<f64> = (3..=1000).map(|k| k as f64 * dq).collect();
    let gq = legendre(&curve, &q_grid, 1e-3).unwrap();

    // Max of G vanishes to grid tolerance and never goes positive.
    let max_g = gq
        .samples
        .iter()
        .map(|(_, g)| *g)
        .fold(f64::NEG_INFINITY, f64::max);
    let grid_tol = dq * dq / gamma;
    assert!(
        max_g.abs() < grid_tol && max_g <= 1e-12,
        "FAIL A9: max G = {max_g:.3e} (tolerance {grid_tol:.1e})"
    );

    // Round trip within twice the grid resolution wherever the maximizing
    // q lies inside the grid.
    for k in (-175..=250).step_by(5) {
        let s = k as f64 * ds;
        let want = gamma * ((-s).exp() - 1.0);
        let got = legendre_inverse(&gq, s);
        let tol = 2.0 * ds * want.abs().max(gamma);
        assert!(
            (got - want).abs() < tol,
            "FAIL A9: reconstructed theta({s}) = {got:.6e} vs {want:.6e} (tol {tol:.1e})"
        );
    }
    println!("PASS A9: Legendre round trip within 2x grid resolution; max G = {max_g:.1e}");
}

#[test]
fn a10_equilibrium_null_current() {
    let m = model_for(&presets::equilibrium());
    let st = current_stats(&m, &CurrentOptions::default(), &solver()).unwrap();
    assert!(
        st.q_mean.abs() < 1e-9,
        "FAIL A10: equilibrium current {:.3e}",
        st.q_mean
    );
    println!("PASS A10: equilibrium mean current {:+.1e} (< 1e-9)", st.q_mean);
}

/// On the configured driven sweep range, the ratio of the mean click
/// spacing 1/q to the dark-period length grows with the hopping rate.
#[test]
fn report_timescale_ratio_trend() {
    let space = default_space();
    let mut ratios = Vec::new();
    for &hop in &presets::telegraph_sweep_grid() {
        let p = SwitchParams {
            hop,
            ..presets::telegraph()
        };
        let m = build_model(&space, &p).unwrap();
        let st = current_stats(&m, &CurrentOptions::default(), &solver()).unwrap();
        let t_c = 1.0 / st.q_mean;
        let t_d = dark_transition_rate(&p).unwrap().mean_dark_period;
        ratios.push((hop, t_c / t_d));
    }
    for pair in ratios.windows(2) {
        assert!(
            pair[1].1 > pair[0].1,
            "T_C/T_D not increasing: {:?} -> {:?}",
            pair[0],
            pair[1]
        );
    }
    println!(
        "REPORT: T_C/T_D rises from {:.3} to {:.3} over the driven sweep grid",
        ratios.first().unwrap().1,
        ratios.last().unwrap().1
    );
}

/// Informational, not a gate: the scale of the maximal one-sided flux at
/// the blockade parameters depends on the documented bath coupling; report
/// its order of magnitude alongside the trace-preservation defect.
#[test]
fn report_flux_scale_and_generator_health() {
    let m = model_for(&presets::blockade_sweep());
    let st = current_stats(&m, &CurrentOptions::default(), &solver()).unwrap();
    println!(
        "REPORT: blockade q_max = {:.2e} (order 1e-5), q_min = {:.2e}",
        st.q_max, st.q_min
    );
    assert!(st.q_max > 1e-6 && st.q_max < 1e-4);

    let w: fcs::Superoperator = build_tilted(&m, 0.0, 4096).unwrap();
    assert!(w.trace_defect() < 1e-10);
    let dim = m.dim();
    let id_vec = fcs::vectorize(&Array2::<C64>::eye(dim));
    assert_eq!(id_vec.len(), dim * dim);
}
