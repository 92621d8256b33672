//! Property tests over randomized truncations, parameters, and curves.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use proptest::prelude::*;

use switch_core::fcs::{build_tilted, legendre, legendre_inverse, theta, LdfCurve, SolverConfig, ThetaSample};
use switch_core::hilbert::{annihilator, build_space, commutator, CavityMode, ModeSpec};
use switch_core::model::{build_model, SwitchParams, ThermalConvention};

fn arb_mode_spec() -> impl Strategy<Value = ModeSpec> {
    ([1usize..=2, 1usize..=2, 1usize..=2], proptest::option::of(0usize..=3)).prop_map(
        |(cutoffs, cap)| {
            let sum: usize = cutoffs.iter().sum();
            ModeSpec {
                cavity_cutoffs: cutoffs,
                global_cap: cap.map(|c| c.min(sum)),
            }
        },
    )
}

fn arb_params() -> impl Strategy<Value = SwitchParams> {
    (
        0.0f64..=1.0,        // omega0
        0.0f64..=0.01,       // omega1
        20.0f64..=100.0,     // delta
        0.0f64..=1.0,        // gamma0
        0.0f64..=1.0,        // gamma1
        1e-4f64..=1e-2,      // gamma_th
        1e-4f64..=1e-1,      // hop
        0.0f64..=0.2,        // n1
        0.0f64..=0.2,        // n2
        proptest::bool::ANY, // verbatim convention
    )
        .prop_map(
            |(omega0, omega1, delta, gamma0, gamma1, gamma_th, hop, n1, n2, verbatim)| {
                SwitchParams {
                    g: 1.0,
                    omega0,
                    omega1,
                    delta,
                    gamma0,
                    gamma1,
                    gamma_total: None,
                    gamma_th,
                    hop,
                    n1,
                    n2,
                    thermal_convention: if verbatim {
                        ThermalConvention::VerbatimEq4
                    } else {
                        ThermalConvention::Standard
                    },
                }
            },
        )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Equal truncation specs enumerate identical bases, and annihilation
    /// operators of distinct modes commute exactly even under truncation.
    #[test]
    fn space_construction_deterministic_and_modes_commute(spec in arb_mode_spec()) {
        let a = build_space(&spec).unwrap();
        let b = build_space(&spec).unwrap();
        prop_assert_eq!(a.basis(), b.basis());
        prop_assert_eq!(a.dim() % 4, 0);

        let al = annihilator(&a, CavityMode::Left);
        let a2 = annihilator(&a, CavityMode::Middle);
        let ar = annihilator(&a, CavityMode::Right);
        for (x, y) in [(&al, &a2), (&al, &ar), (&a2, &ar)] {
            let c = commutator(x, y).unwrap();
            prop_assert!(c.frobenius_norm() < 1e-14);
        }
    }

    /// The untilted generator conserves the trace for every parameter draw,
    /// and tilting leaves it intact exactly when the counting field is off.
    #[test]
    fn generator_trace_preservation(p in arb_params()) {
        let space = build_space(&ModeSpec::default()).unwrap();
        let model = build_model(&space, &p).unwrap();
        let w0 = build_tilted(&model, 0.0, 4096).unwrap();
        let scale = w0.frobenius_norm().max(1.0);
        prop_assert!(w0.trace_defect() < 1e-10 * scale);
    }

    /// theta(0) vanishes and theta is convex on a symmetric grid, for
    /// arbitrary parameters.
    #[test]
    fn theta_stationary_and_convex(p in arb_params()) {
        let space = build_space(&ModeSpec::default()).unwrap();
        let model = build_model(&space, &p).unwrap();
        let solver = SolverConfig::default();
        let grid = [-0.4, -0.2, 0.0, 0.2, 0.4];
        let mut th = Vec::new();
        for s in grid {
            th.push(theta(&model, s, &solver).unwrap().theta);
        }
        prop_assert!(th[2].abs() < 1e-9, "theta(0) = {}", th[2]);
        for w in th.windows(3) {
            prop_assert!(w[2] - 2.0 * w[1] + w[0] > -1e-9);
        }
    }

    /// Legendre transform of random convex two-sided counting curves:
    /// G <= 0 everywhere and the double transform reproduces theta.
    #[test]
    fn legendre_envelope_properties(c_emit in 0.05f64..=2.0, c_abs in 0.0f64..=0.5) {
        let ds = 0.01;
        let samples: Vec<ThetaSample> = (-200..=200)
            .map(|k| {
                let s = k as f64 * ds;
                ThetaSample {
                    s,
                    theta: c_emit * ((-s).exp() - 1.0) + c_abs * (s.exp() - 1.0),
                    imag_abs: 0.0,
                    residual: 0.0,
                    gap: f64::NAN,
                }
            })
            .collect();
        let curve = LdfCurve { samples, degenerate_at: vec![], params: None };
        let q_lo = c_emit * (-1.9f64).exp() - c_abs * (1.9f64).exp();
        let q_hi = c_emit * (1.9f64).exp() - c_abs * (-1.9f64).exp();
        let q_grid: Vec<f64> = (0..=400)
            .map(|k| q_lo + (q_hi - q_lo) * k as f64 / 400.0)
            .collect();
        let gq = legendre(&curve, &q_grid, 1e-3).unwrap();
        prop_assert!(gq.non_recoverable.is_none());
        for &(_, g) in &gq.samples {
            prop_assert!(g <= 1e-12);
        }
        for k in (-150..=150).step_by(30) {
            let s = k as f64 * ds;
            let want = c_emit * ((-s).exp() - 1.0) + c_abs * (s.exp() - 1.0);
            let got = legendre_inverse(&gq, s);
            let tol = 2.0 * (q_hi - q_lo) / 400.0 * s.abs().max(ds)
                + 2.0 * ds * want.abs().max(c_emit + c_abs);
            prop_assert!((got - want).abs() < tol, "s={} got={} want={}", s, got, want);
        }
    }
}

/// Non-proptest regression: identity superoperator input sizes.
#[test]
fn vectorize_shape_contract() {
    let x = Array2::<C64>::eye(5);
    let v = switch_core::fcs::vectorize(&x);
    assert_eq!(v.len(), 25);
    assert_eq!(switch_core::fcs::devectorize(&v, 5), x);
}
