//! Physical parameters and their mapping to the concrete Hamiltonian and
//! Lindblad channel set of the switch model.
//!
//! Energies are expressed in units of the atom-cavity coupling `g`; times in
//! units of `1/g`. Counting weights mark the right-bath channels whose events
//! enter the photon-current statistics: +1 for a photon leaving into the
//! right bath, -1 for a photon absorbed from it.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hilbert::{
    annihilator, atomic_transition, number_op, AtomState, CavityMode, HilbertSpace, Operator,
};

/// How the thermal rates pair with the ladder operators.
///
/// `Standard` puts the rate `n + 1` on emission (`a`) and `n` on absorption
/// (`a†`). `VerbatimEq4` swaps them, which pumps photons even at zero bath
/// occupation; it is selectable so the difference can be probed rather than
/// silently corrected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ThermalConvention {
    #[default]
    Standard,
    VerbatimEq4,
}

/// All physical rates and drives of the switch, in units of `g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchParams {
    /// Atom-cavity coupling; sets the energy scale (normally 1).
    pub g: f64,
    /// Rabi frequency of the drive that couples the atoms to the cavity
    /// photons after elimination (enters the Raman coupling and the
    /// effective decay rates).
    pub omega0: f64,
    /// Rabi frequency of the direct drive within the symmetric manifold.
    pub omega1: f64,
    /// Detuning of the eliminated excited level.
    pub delta: f64,
    /// Partial decay rates of the eliminated level.
    pub gamma0: f64,
    pub gamma1: f64,
    /// Optional total decay rate; when given it must equal `gamma0 + gamma1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_total: Option<f64>,
    /// Bath coupling rate of the end cavities.
    pub gamma_th: f64,
    /// Photon hopping rate between neighboring cavities.
    pub hop: f64,
    /// Mean occupation of the left bath.
    pub n1: f64,
    /// Mean occupation of the right bath.
    pub n2: f64,
    #[serde(default)]
    pub thermal_convention: ThermalConvention,
}

impl SwitchParams {
    pub fn validate(&self) -> Result<()> {
        if self.delta == 0.0 {
            return Err(Error::Domain("detuning must be nonzero".into()));
        }
        for (name, v) in [
            ("gamma0", self.gamma0),
            ("gamma1", self.gamma1),
            ("gamma_th", self.gamma_th),
            ("hop", self.hop),
            ("n1", self.n1),
            ("n2", self.n2),
        ] {
            if v < 0.0 || !v.is_finite() {
                return Err(Error::Domain(format!(
                    "{name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        if let Some(total) = self.gamma_total {
            let sum = self.gamma0 + self.gamma1;
            if (total - sum).abs() > 1e-12 * total.abs().max(1.0) {
                return Err(Error::Config(format!(
                    "gamma_total = {total} does not equal gamma0 + gamma1 = {sum}"
                )));
            }
        }
        Ok(())
    }

    /// Warnings (not errors) when the parameter hierarchy behind the
    /// four-level reduction is violated: the drives and decay should sit an
    /// order of magnitude below the detuning, and the second drive below the
    /// other scales.
    pub fn regime_warnings(&self) -> Vec<String> {
        let mut warnings = Vec::new();
        let delta = self.delta.abs();
        for (name, v) in [
            ("g", self.g),
            ("gamma0 + gamma1", self.gamma0 + self.gamma1),
            ("omega0", self.omega0),
        ] {
            if 10.0 * v.abs() > delta {
                warnings.push(format!(
                    "{name} = {v} is not small against the detuning {delta}; \
                     the reduced four-level model may be inaccurate"
                ));
            }
        }
        let floor = self.g.abs().min(self.gamma0 + self.gamma1);
        if self.omega1 != 0.0 && self.omega1.abs() > floor {
            warnings.push(format!(
                "omega1 = {} exceeds min(g, gamma) = {floor}",
                self.omega1
            ));
        }
        warnings
    }
}

/// Drive-modified rates of the reduced model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedRates {
    /// Effective decay rates Γ₀Ω₀²/(4Δ²) and Γ₁Ω₀²/(4Δ²).
    pub gamma0_eff: f64,
    pub gamma1_eff: f64,
    /// Raman coupling -Ω₀ g/(√2 Δ).
    pub raman: f64,
    /// Scalar light shift -Ω₀²/(4Δ).
    pub stark_scalar: f64,
    /// Dispersive shift coefficient -g²/Δ multiplying the middle-cavity
    /// photon number.
    pub dispersive_chi: f64,
}

/// Evaluate the drive-modified rates.
pub fn derived_rates(p: &SwitchParams) -> Result<DerivedRates> {
    if p.delta == 0.0 {
        return Err(Error::Domain("detuning must be nonzero".into()));
    }
    let d2 = p.delta * p.delta;
    Ok(DerivedRates {
        gamma0_eff: p.gamma0 * p.omega0 * p.omega0 / (4.0 * d2),
        gamma1_eff: p.gamma1 * p.omega0 * p.omega0 / (4.0 * d2),
        raman: -p.omega0 * p.g / (std::f64::consts::SQRT_2 * p.delta),
        stark_scalar: -p.omega0 * p.omega0 / (4.0 * p.delta),
        dispersive_chi: -p.g * p.g / p.delta,
    })
}

/// One dissipative channel with its counting weight.
#[derive(Debug, Clone)]
pub struct Channel {
    pub label: String,
    pub op: Operator,
    /// Counting weight: +1 / -1 for photons exchanged with the right bath,
    /// 0 for unobserved channels.
    pub weight: i32,
}

/// Hamiltonian plus the labeled jump channels.
#[derive(Debug, Clone)]
pub struct LindbladModel {
    pub space: Arc<HilbertSpace>,
    pub hamiltonian: Operator,
    pub channels: Vec<Channel>,
}

impl LindbladModel {
    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn channel(&self, label: &str) -> Option<&Channel> {
        self.channels.iter().find(|c| c.label == label)
    }

    pub fn validate(&self) -> Result<()> {
        let defect = self.hamiltonian.hermiticity_defect();
        if defect > 1e-12 * self.hamiltonian.frobenius_norm().max(1.0) {
            return Err(Error::Internal(format!(
                "Hamiltonian is not Hermitian: defect {defect:.3e}"
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for c in &self.channels {
            if !seen.insert(c.label.as_str()) {
                return Err(Error::Internal(format!(
                    "duplicate channel label {}",
                    c.label
                )));
            }
            if c.weight != 0 && !c.label.starts_with("r_") {
                return Err(Error::Internal(format!(
                    "non-right-bath channel {} carries counting weight {}",
                    c.label, c.weight
                )));
            }
        }
        Ok(())
    }
}

/// Assemble the full Hamiltonian: drive, Raman coupling, light shifts and
/// photon hopping. Hermitian by construction.
pub fn build_hamiltonian(space: &Arc<HilbertSpace>, p: &SwitchParams) -> Result<Operator> {
    p.validate()?;
    let rates = derived_rates(p)?;

    let t_00s = atomic_transition(space, AtomState::BothGround, AtomState::Symmetric);
    let t_s11 = atomic_transition(space, AtomState::Symmetric, AtomState::BothExcited);
    let ladder = &t_00s + &t_s11;

    // (Ω₁/√2)(|00><s| + |s><11|) + h.c.
    let drive = ladder.scale(C64::new(p.omega1 / std::f64::consts::SQRT_2, 0.0));

    // g'(|00><s| + |s><11|) a₂† + h.c.
    let a2_dag = annihilator(space, CavityMode::Middle).adjoint();
    let raman = ladder
        .matmul(&a2_dag)?
        .scale(C64::new(rates.raman, 0.0));

    // (χ n₂ + Δ'_scalar)(|00><00| - |11><11|); the shift is operator-valued
    // through the middle-cavity photon number.
    let n2_op = number_op(space, CavityMode::Middle);
    let p00 = atomic_transition(space, AtomState::BothGround, AtomState::BothGround);
    let p11 = atomic_transition(space, AtomState::BothExcited, AtomState::BothExcited);
    let pop_diff = &p00 - &p11;
    let shift_op = &n2_op.scale(C64::new(rates.dispersive_chi, 0.0))
        + &Operator::identity(space).scale(C64::new(rates.stark_scalar, 0.0));
    let shift = shift_op.matmul(&pop_diff)?;

    // J(a_l† a₂ + a₂† a_r) + h.c.
    let a_l = annihilator(space, CavityMode::Left);
    let a_2 = annihilator(space, CavityMode::Middle);
    let a_r = annihilator(space, CavityMode::Right);
    let hop_half = &a_l.adjoint().matmul(&a_2)? + &a_2.adjoint().matmul(&a_r)?;
    let hop = hop_half.scale(C64::new(p.hop, 0.0));

    // The shift is Hermitian on its own; everything else enters as X + X†.
    let half = &(&drive + &raman) + &hop;
    Ok(&(&half + &half.adjoint()) + &shift)
}

/// The four atomic channels, each tensored with the photon identity.
/// All carry counting weight zero.
pub fn build_atomic_channels(space: &Arc<HilbertSpace>, p: &SwitchParams) -> Result<Vec<Channel>> {
    let rates = derived_rates(p)?;
    let sqrt_g0 = rates.gamma0_eff.sqrt();
    let sqrt_g1_half = (rates.gamma1_eff / 2.0).sqrt();

    let t = |i, j| atomic_transition(space, i, j);
    use AtomState::*;

    let l1 = (&t(BothGround, Antisymmetric) - &t(Antisymmetric, BothExcited))
        .scale(C64::new(sqrt_g0, 0.0));
    let l2 = (&t(Symmetric, Antisymmetric) + &t(Antisymmetric, Symmetric))
        .scale(C64::new(sqrt_g1_half, 0.0));
    let l3 = (&t(BothGround, Symmetric) + &t(Symmetric, BothExcited))
        .scale(C64::new(sqrt_g0, 0.0));
    let l4 = (&(&t(Antisymmetric, Antisymmetric) + &t(Symmetric, Symmetric))
        + &t(BothExcited, BothExcited).scale(C64::new(2.0, 0.0)))
        .scale(C64::new(sqrt_g1_half, 0.0));

    Ok(vec![
        Channel { label: "at_1".into(), op: l1, weight: 0 },
        Channel { label: "at_2".into(), op: l2, weight: 0 },
        Channel { label: "at_3".into(), op: l3, weight: 0 },
        Channel { label: "at_4".into(), op: l4, weight: 0 },
    ])
}

/// The four thermal channels. Only the right-bath pair carries nonzero
/// counting weights: +1 with `a_r` (emission into the bath), -1 with `a_r†`.
pub fn build_thermal_channels(space: &Arc<HilbertSpace>, p: &SwitchParams) -> Result<Vec<Channel>> {
    p.validate()?;
    let a_l = annihilator(space, CavityMode::Left);
    let a_r = annihilator(space, CavityMode::Right);

    // Rate factors on (a, a†) per bath.
    let (emit_rate, abs_rate): (fn(f64, f64) -> f64, fn(f64, f64) -> f64) =
        match p.thermal_convention {
            ThermalConvention::Standard => (|g, n| g * (n + 1.0), |g, n| g * n),
            ThermalConvention::VerbatimEq4 => (|g, n| g * n, |g, n| g * (n + 1.0)),
        };

    let ch = |label: &str, op: Operator, rate: f64, weight: i32| Channel {
        label: label.into(),
        op: op.scale(C64::new(rate.sqrt(), 0.0)),
        weight,
    };

    Ok(vec![
        ch("l_emit", a_l.clone(), emit_rate(p.gamma_th, p.n1), 0),
        ch("l_abs", a_l.adjoint(), abs_rate(p.gamma_th, p.n1), 0),
        ch("r_emit", a_r.clone(), emit_rate(p.gamma_th, p.n2), 1),
        ch("r_abs", a_r.adjoint(), abs_rate(p.gamma_th, p.n2), -1),
    ])
}

/// Assemble the complete model: Hamiltonian plus atomic and thermal channels.
pub fn build_model(space: &Arc<HilbertSpace>, p: &SwitchParams) -> Result<LindbladModel> {
    let hamiltonian = build_hamiltonian(space, p)?;
    let mut channels = build_atomic_channels(space, p)?;
    channels.extend(build_thermal_channels(space, p)?);
    let model = LindbladModel {
        space: space.clone(),
        hamiltonian,
        channels,
    };
    model.validate()?;
    Ok(model)
}

/// Effective non-Hermitian Hamiltonian H - (i/2) Σ L†L driving the no-jump
/// evolution.
pub fn effective_hamiltonian(model: &LindbladModel) -> Result<Array2<C64>> {
    let dim = model.dim();
    let mut drain: Array2<C64> = Array2::zeros((dim, dim));
    for c in &model.channels {
        let l = c.op.matrix();
        let ldag_l = l.t().mapv(|z| z.conj()).dot(l);
        drain += &ldag_l;
    }
    let h = model.hamiltonian.matrix();
    Ok(h - &drain.mapv(|z| C64::new(0.0, 0.5) * z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{build_space, BasisState, ModeSpec};
    use approx::assert_abs_diff_eq;
    use ndarray_linalg::Eigh;

    pub(crate) fn fig2_on_params() -> SwitchParams {
        SwitchParams {
            g: 1.0,
            omega0: 1.0,
            omega1: 0.005,
            delta: 75.0,
            gamma0: 0.5,
            gamma1: 0.5,
            gamma_total: Some(1.0),
            gamma_th: 1.0,
            hop: 1e-3,
            n1: 0.005,
            n2: 1e-6,
            thermal_convention: ThermalConvention::Standard,
        }
    }

    #[test]
    fn derived_rates_against_arithmetic_oracle() {
        let p = fig2_on_params();
        let r = derived_rates(&p).unwrap();
        // Independent one-line evaluations of the closed-form rates.
        let gamma0_eff = 0.5 * 1.0 / (4.0 * 75.0 * 75.0);
        assert_abs_diff_eq!(r.gamma0_eff, gamma0_eff, epsilon = 1e-20);
        assert_abs_diff_eq!(r.gamma0_eff, 1.0 / 45_000.0, epsilon = 1e-18);
        let raman = -1.0 / (75.0 * 2.0_f64.sqrt());
        assert_abs_diff_eq!(r.raman, raman, epsilon = 1e-18);
        assert_abs_diff_eq!(r.raman, -9.428090415820634e-3, epsilon = 1e-15);
        assert_abs_diff_eq!(r.dispersive_chi, -1.0 / 75.0, epsilon = 1e-18);
        assert_abs_diff_eq!(r.stark_scalar, -1.0 / 300.0, epsilon = 1e-18);
    }

    #[test]
    fn rates_vanish_without_drive() {
        let p = SwitchParams {
            omega0: 0.0,
            ..fig2_on_params()
        };
        let r = derived_rates(&p).unwrap();
        assert_eq!(r.gamma0_eff, 0.0);
        assert_eq!(r.gamma1_eff, 0.0);
        assert_eq!(r.raman, 0.0);
    }

    #[test]
    fn zero_detuning_is_domain_error() {
        let p = SwitchParams {
            delta: 0.0,
            ..fig2_on_params()
        };
        assert!(matches!(derived_rates(&p), Err(Error::Domain(_))));
    }

    #[test]
    fn gamma_total_mismatch_rejected() {
        let p = SwitchParams {
            gamma_total: Some(0.7),
            ..fig2_on_params()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn hamiltonian_is_hermitian() {
        let space = build_space(&ModeSpec::default()).unwrap();
        let h = build_hamiltonian(&space, &fig2_on_params()).unwrap();
        assert!(h.hermiticity_defect() < 1e-14);
    }

    #[test]
    fn hamiltonian_without_drives_is_dispersive_only() {
        let space = build_space(&ModeSpec::default()).unwrap();
        let p = SwitchParams {
            omega0: 0.0,
            omega1: 0.0,
            hop: 0.0,
            ..fig2_on_params()
        };
        let h = build_hamiltonian(&space, &p).unwrap();
        let chi = derived_rates(&p).unwrap().dispersive_chi;
        let n2 = number_op(&space, CavityMode::Middle);
        let diff = &atomic_transition(&space, AtomState::BothGround, AtomState::BothGround)
            - &atomic_transition(&space, AtomState::BothExcited, AtomState::BothExcited);
        let expected = n2.matmul(&diff).unwrap().scale(C64::new(chi, 0.0));
        assert!((&h - &expected).frobenius_norm() < 1e-15);
    }

    #[test]
    fn raman_matrix_element_read_off() {
        // Brute-force check of the <00, one photon in 2| H |s, vacuum>
        // element against the Raman coupling constant.
        let space = build_space(&ModeSpec::default()).unwrap();
        let p = fig2_on_params();
        let h = build_hamiltonian(&space, &p).unwrap();
        let row = space
            .index_of(&BasisState {
                atom: AtomState::BothGround,
                photons: [0, 1, 0],
            })
            .unwrap();
        let col = space
            .index_of(&BasisState {
                atom: AtomState::Symmetric,
                photons: [0, 0, 0],
            })
            .unwrap();
        let g_prime = derived_rates(&p).unwrap().raman;
        assert_abs_diff_eq!(h.matrix()[(row, col)].re, g_prime, epsilon = 1e-15);
        assert_abs_diff_eq!(h.matrix()[(row, col)].im, 0.0, epsilon = 0.0);
    }

    #[test]
    fn hamiltonian_linear_in_omega1() {
        let space = build_space(&ModeSpec::default()).unwrap();
        let p = fig2_on_params();
        let h = |omega1: f64| {
            build_hamiltonian(&space, &SwitchParams { omega1, ..p.clone() }).unwrap()
        };
        // Finite-difference dH/dOmega1 is constant in Omega1.
        let d1 = &h(0.01) - &h(0.0);
        let d2 = &h(0.11) - &h(0.10);
        assert!((&d1 - &d2).frobenius_norm() < 1e-13);
    }

    #[test]
    fn atomic_channels_vanish_without_drive() {
        let space = build_space(&ModeSpec::default()).unwrap();
        let p = SwitchParams {
            omega0: 0.0,
            ..fig2_on_params()
        };
        for c in build_atomic_channels(&space, &p).unwrap() {
            assert!(c.op.is_zero(0.0), "channel {} should vanish", c.label);
        }
    }

    #[test]
    fn l4_atomic_diagonal() {
        let space = build_space(&ModeSpec::default()).unwrap();
        let p = fig2_on_params();
        let channels = build_atomic_channels(&space, &p).unwrap();
        let l4 = &channels[3];
        assert_eq!(l4.label, "at_4");
        let scale = (derived_rates(&p).unwrap().gamma1_eff / 2.0).sqrt();
        // Diagonal over the atomic factor, in basis order [00, s, a, 11].
        for (k, state) in space.basis().iter().enumerate() {
            let want = match state.atom {
                AtomState::BothGround => 0.0,
                AtomState::Symmetric | AtomState::Antisymmetric => 1.0,
                AtomState::BothExcited => 2.0,
            };
            assert_abs_diff_eq!(l4.op.matrix()[(k, k)].re, scale * want, epsilon = 1e-18);
        }
    }

    #[test]
    fn l1_singular_values() {
        // Direct computation: the nonzero spectrum of L1†L1 must be the flat
        // value gamma0_eff with multiplicity twice the photon sector.
        let space = build_space(&ModeSpec::default()).unwrap();
        let p = fig2_on_params();
        let l1 = &build_atomic_channels(&space, &p).unwrap()[0].op;
        let gram = l1.adjoint().matmul(l1).unwrap();
        let (evals, _) = gram
            .matrix()
            .eigh(ndarray_linalg::UPLO::Upper)
            .unwrap();
        let gamma0_eff = derived_rates(&p).unwrap().gamma0_eff;
        let nonzero: Vec<f64> = evals.iter().copied().filter(|v| *v > 1e-12 * gamma0_eff.max(1e-300)).collect();
        assert_eq!(nonzero.len(), 2 * space.photon_sector_dim());
        for v in nonzero {
            assert_abs_diff_eq!(v, gamma0_eff, epsilon = 1e-18);
        }
    }

    #[test]
    fn thermal_channels_standard_convention() {
        let space = build_space(&ModeSpec::default()).unwrap();
        let p = SwitchParams {
            n2: 0.0,
            ..fig2_on_params()
        };
        let channels = build_thermal_channels(&space, &p).unwrap();
        let by_label = |l: &str| channels.iter().find(|c| c.label == l).unwrap();
        // Cold right bath absorbs nothing back.
        assert!(by_label("r_abs").op.is_zero(0.0));
        assert_eq!(by_label("r_emit").weight, 1);
        assert_eq!(by_label("r_abs").weight, -1);
        assert_eq!(by_label("l_emit").weight, 0);

        // Largest squared singular value of the left-absorption channel.
        let p2 = SwitchParams { n1: 0.005, gamma_th: 1.0, ..fig2_on_params() };
        let labs = build_thermal_channels(&space, &p2)
            .unwrap()
            .into_iter()
            .find(|c| c.label == "l_abs")
            .unwrap();
        let gram = labs.op.adjoint().matmul(&labs.op).unwrap();
        let (evals, _) = gram.matrix().eigh(ndarray_linalg::UPLO::Upper).unwrap();
        let max = evals.iter().cloned().fold(f64::MIN, f64::max);
        assert_abs_diff_eq!(max, 0.005, epsilon = 1e-15);
    }

    #[test]
    fn equal_baths_give_pairwise_equal_norms() {
        let space = build_space(&ModeSpec::default()).unwrap();
        let p = SwitchParams {
            n1: 0.3,
            n2: 0.3,
            ..fig2_on_params()
        };
        let channels = build_thermal_channels(&space, &p).unwrap();
        let norm = |l: &str| channels.iter().find(|c| c.label == l).unwrap().op.frobenius_norm();
        assert_abs_diff_eq!(norm("l_emit"), norm("r_emit"), epsilon = 1e-15);
        assert_abs_diff_eq!(norm("l_abs"), norm("r_abs"), epsilon = 1e-15);
    }

    #[test]
    fn verbatim_convention_swaps_rates() {
        let space = build_space(&ModeSpec::default()).unwrap();
        let p = SwitchParams {
            n2: 0.0,
            thermal_convention: ThermalConvention::VerbatimEq4,
            ..fig2_on_params()
        };
        let channels = build_thermal_channels(&space, &p).unwrap();
        let by_label = |l: &str| channels.iter().find(|c| c.label == l).unwrap();
        // Verbatim form pairs the rate n with a, so emission dies at n = 0
        // while absorption survives.
        assert!(by_label("r_emit").op.is_zero(0.0));
        assert!(!by_label("r_abs").op.is_zero(1e-12));
        // Weights stay attached to the operators, not the rates.
        assert_eq!(by_label("r_emit").weight, 1);
        assert_eq!(by_label("r_abs").weight, -1);
    }

    #[test]
    fn channel_scaling_in_gamma_th() {
        let space = build_space(&ModeSpec::default()).unwrap();
        let p = fig2_on_params();
        let doubled = SwitchParams {
            gamma_th: 2.0 * p.gamma_th,
            ..p.clone()
        };
        let base = build_thermal_channels(&space, &p).unwrap();
        let twice = build_thermal_channels(&space, &doubled).unwrap();
        for (b, t) in base.iter().zip(twice.iter()) {
            let scaled = b.op.scale(C64::new(2.0_f64.sqrt(), 0.0));
            assert!((&t.op - &scaled).frobenius_norm() < 1e-15);
        }
    }

    #[test]
    fn model_assembly_is_pure() {
        let space = build_space(&ModeSpec::default()).unwrap();
        let p = fig2_on_params();
        let m1 = build_model(&space, &p).unwrap();
        let m2 = build_model(&space, &p).unwrap();
        assert_eq!(m1.hamiltonian.matrix(), m2.hamiltonian.matrix());
        for (a, b) in m1.channels.iter().zip(m2.channels.iter()) {
            assert_eq!(a.label, b.label);
            assert_eq!(a.weight, b.weight);
            assert_eq!(a.op.matrix(), b.op.matrix());
        }
    }

    #[test]
    fn laser_off_leaves_only_thermal_channels() {
        let space = build_space(&ModeSpec::default()).unwrap();
        let p = SwitchParams {
            omega0: 0.0,
            omega1: 0.0,
            ..fig2_on_params()
        };
        let model = build_model(&space, &p).unwrap();
        for c in &model.channels {
            if c.label.starts_with("at_") {
                assert!(c.op.is_zero(0.0));
            }
        }
    }

    #[test]
    fn regime_warnings_fire() {
        let ok = fig2_on_params();
        assert!(ok.regime_warnings().is_empty());
        let bad = SwitchParams {
            delta: 2.0,
            ..fig2_on_params()
        };
        assert!(!bad.regime_warnings().is_empty());
    }
}
