//! Full counting statistics of the photon current: tilted Liouvillian
//! assembly, the scaled cumulant generating function θ(s), steady states,
//! current moments and flux ratios, and the Legendre-transformed rate
//! function G(q).
//!
//! Vectorization is column stacking throughout: vec(A X B) = (Bᵀ ⊗ A) vec(X),
//! so the master equation becomes d vec(ρ)/dt = W_s vec(ρ) with
//!
//!   W_s = -i(1 ⊗ H - Hᵀ ⊗ 1)
//!       + Σ_k [ e^{-s ν_k} (conj(L_k) ⊗ L_k)
//!               - ½ (1 ⊗ L_k†L_k + (L_k†L_k)ᵀ ⊗ 1) ].
//!
//! θ(s) is the spectral abscissa of W_s; the convention tag travels with
//! every superoperator so mixed-convention arithmetic cannot go unnoticed.

use ndarray::{linalg::kron, Array1, Array2};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eig::{
    self, leading_arnoldi, leading_dense, leading_dense_refined, ArnoldiOptions, LeadingEig,
};
use crate::error::{Error, Result};
use crate::model::{LindbladModel, SwitchParams};

/// Vectorization convention tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Vectorization {
    ColumnStacking,
}

/// Dense tilted Liouvillian acting on vectorized density matrices.
#[derive(Debug, Clone)]
pub struct Superoperator {
    matrix: Array2<C64>,
    s: f64,
    convention: Vectorization,
    space_id: u64,
}

impl Superoperator {
    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn convention(&self) -> Vectorization {
        self.convention
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn space_id(&self) -> u64 {
        self.space_id
    }

    pub fn frobenius_norm(&self) -> f64 {
        eig::frobenius(&self.matrix)
    }

    /// ∞-norm of vec(1)ᵀ W; zero (to tolerance) at s = 0 by trace
    /// preservation.
    pub fn trace_defect(&self) -> f64 {
        let d = (self.dim() as f64).sqrt() as usize;
        let vec_id = vectorize(&Array2::eye(d));
        let row = self.matrix.t().dot(&vec_id);
        row.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Column-stacking vec.
pub fn vectorize(x: &Array2<C64>) -> Array1<C64> {
    let (rows, cols) = x.dim();
    Array1::from_shape_fn(rows * cols, |k| x[(k % rows, k / rows)])
}

/// Inverse of [`vectorize`].
pub fn devectorize(v: &Array1<C64>, dim: usize) -> Array2<C64> {
    Array2::from_shape_fn((dim, dim), |(r, c)| v[c * dim + r])
}

/// Eigensolver routing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum EigMethod {
    /// Dense when the superoperator dimension allows it, iterative beyond.
    #[default]
    Auto,
    Dense,
    Iterative,
}

/// Numerical policy for θ evaluations.
#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    pub method: EigMethod,
    /// Largest superoperator dimension (dim²) handled by the dense path.
    pub dense_limit: usize,
    /// Required bound on |Im λ| of the located leading eigenvalue.
    pub imag_tol: f64,
    /// Residual bound on accepted eigenpairs.
    pub residual_tol: f64,
    /// Refine dense leading eigenvalues with the compensated two-sided
    /// Rayleigh quotient.
    pub refine: bool,
    pub arnoldi: ArnoldiOptions,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            method: EigMethod::Auto,
            dense_limit: 4096,
            imag_tol: 1e-9,
            residual_tol: 1e-9,
            refine: true,
            arnoldi: ArnoldiOptions::default(),
        }
    }
}

/// Assemble the tilted Liouvillian at counting field `s`.
///
/// Fails when the superoperator dimension exceeds `dense_limit`; larger
/// spaces must go through the iterative path with a raised limit.
pub fn build_tilted(model: &LindbladModel, s: f64, dense_limit: usize) -> Result<Superoperator> {
    let d = model.dim();
    let n = d * d;
    if n > dense_limit {
        return Err(Error::DenseLimit { dim: n, limit: dense_limit });
    }
    let id: Array2<C64> = Array2::eye(d);
    let h = model.hamiltonian.matrix();
    let minus_i = C64::new(0.0, -1.0);

    let mut w = kron(&id, h).mapv(|z| minus_i * z);
    w = w + kron(&h.t().to_owned(), &id).mapv(|z| -minus_i * z);

    for c in &model.channels {
        let l = c.op.matrix();
        let l_conj = l.mapv(|z| z.conj());
        let ldag_l = l.t().mapv(|z| z.conj()).dot(l);
        let weight = (-s * f64::from(c.weight)).exp();
        w = w + kron(&l_conj, l).mapv(|z| z * weight);
        w = w - kron(&id, &ldag_l).mapv(|z| z * 0.5);
        w = w - kron(&ldag_l.t().to_owned(), &id).mapv(|z| z * 0.5);
    }

    Ok(Superoperator {
        matrix: w,
        s,
        convention: Vectorization::ColumnStacking,
        space_id: model.space.id(),
    })
}

/// One θ sample with solver diagnostics.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ThetaSample {
    pub s: f64,
    pub theta: f64,
    /// |Im| of the located eigenvalue.
    pub imag_abs: f64,
    /// Relative residual of the accepted eigenpair.
    pub residual: f64,
    /// Distance to the nearest other eigenvalue (NaN on the iterative path).
    pub gap: f64,
}

fn solve_leading(w: &Superoperator, solver: &SolverConfig) -> Result<LeadingEig> {
    let n = w.dim();
    let use_dense = match solver.method {
        EigMethod::Dense => true,
        EigMethod::Iterative => false,
        EigMethod::Auto => n <= solver.dense_limit,
    };
    let lead = if use_dense {
        if n > solver.dense_limit {
            return Err(Error::DenseLimit { dim: n, limit: solver.dense_limit });
        }
        if solver.refine {
            leading_dense_refined(&w.matrix)?
        } else {
            leading_dense(&w.matrix)?
        }
    } else {
        leading_arnoldi(&w.matrix, &solver.arnoldi)?
    };
    if lead.residual > solver.residual_tol {
        return Err(Error::EigenConvergence {
            residual: lead.residual,
            tol: solver.residual_tol,
        });
    }
    Ok(lead)
}

/// θ(s): the spectral abscissa of the tilted Liouvillian.
pub fn theta(model: &LindbladModel, s: f64, solver: &SolverConfig) -> Result<ThetaSample> {
    let w = build_tilted(model, s, solver.dense_limit)?;
    let lead = solve_leading(&w, solver)?;
    if lead.imag_abs > solver.imag_tol {
        return Err(Error::EigenConvergence {
            residual: lead.imag_abs,
            tol: solver.imag_tol,
        });
    }
    Ok(ThetaSample {
        s,
        theta: lead.value,
        imag_abs: lead.imag_abs,
        residual: lead.residual,
        gap: lead.gap,
    })
}

/// Sampled θ(s) with a parameter snapshot.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LdfCurve {
    pub samples: Vec<ThetaSample>,
    /// s values where the leading eigenvalue is (numerically) degenerate,
    /// i.e. where branch crossings may occur.
    pub degenerate_at: Vec<f64>,
    pub params: Option<SwitchParams>,
}

impl LdfCurve {
    pub fn validate(&self, residual_tol: f64) -> Result<()> {
        for pair in self.samples.windows(2) {
            if pair[1].s <= pair[0].s {
                return Err(Error::Internal("curve s grid is not strictly increasing".into()));
            }
        }
        for smp in &self.samples {
            if smp.residual > residual_tol {
                return Err(Error::EigenConvergence {
                    residual: smp.residual,
                    tol: residual_tol,
                });
            }
        }
        Ok(())
    }
}

/// Sample θ over an s grid. Samples are independent and run in parallel;
/// results are merged back in grid order.
pub fn theta_curve(
    model: &LindbladModel,
    s_grid: &[f64],
    solver: &SolverConfig,
    params: Option<SwitchParams>,
) -> Result<LdfCurve> {
    let mut samples: Vec<(usize, ThetaSample)> = s_grid
        .par_iter()
        .enumerate()
        .map(|(k, &s)| theta(model, s, solver).map(|t| (k, t)))
        .collect::<Result<Vec<_>>>()?;
    samples.sort_by_key(|(k, _)| *k);
    let samples: Vec<ThetaSample> = samples.into_iter().map(|(_, t)| t).collect();
    let scale = samples
        .iter()
        .map(|t| t.theta.abs())
        .fold(0.0_f64, f64::max)
        .max(1e-12);
    let degenerate_at = samples
        .iter()
        .filter(|t| t.gap.is_finite() && t.gap < 1e-10 * scale.max(1.0))
        .map(|t| t.s)
        .collect();
    Ok(LdfCurve {
        samples,
        degenerate_at,
        params,
    })
}

/// Basis of the numerical null space of W₀, post-processed into physical
/// density matrices.
#[derive(Debug, Clone)]
pub struct SteadyStateSet {
    pub states: Vec<Array2<C64>>,
    /// Null-space dimension before post-processing.
    pub null_dim: usize,
    pub zero_threshold: f64,
}

/// Steady states from the null space of the untilted Liouvillian.
///
/// `zero_threshold` defaults to 1e-8 · ||W₀||_F. Each null vector is
/// Hermitized, its negative eigenvalues (below threshold) clipped, and the
/// result renormalized to unit trace.
pub fn steady_states(
    model: &LindbladModel,
    zero_threshold: Option<f64>,
    dense_limit: usize,
) -> Result<SteadyStateSet> {
    let w = build_tilted(model, 0.0, dense_limit)?;
    let dim = model.dim();
    let (vals, vecs) = eig::spectrum_dense(&w.matrix)?;
    let threshold = zero_threshold.unwrap_or_else(|| 1e-8 * w.frobenius_norm());
    let null_indices: Vec<usize> = vals
        .iter()
        .enumerate()
        .filter(|(_, z)| z.norm() < threshold)
        .map(|(k, _)| k)
        .collect();
    if null_indices.is_empty() {
        return Err(Error::Internal(
            "Liouvillian has no numerical null space; generator is not trace preserving".into(),
        ));
    }

    let mut states = Vec::with_capacity(null_indices.len());
    for &k in &null_indices {
        let v = vecs.column(k).to_owned();
        let mat = devectorize(&v, dim);
        if let Some(rho) = physical_state_from_null_matrix(&mat)? {
            states.push(rho);
        }
    }

    Ok(SteadyStateSet {
        states,
        null_dim: null_indices.len(),
        zero_threshold: threshold,
    })
}

/// Post-process one (devectorized) null vector into a density matrix:
/// Hermitize, clip negative weights introduced by degeneracy mixing, and
/// renormalize. Returns None for vectors whose positive part vanishes
/// (pure coherences under extreme degeneracy).
pub(crate) fn physical_state_from_null_matrix(
    mat: &Array2<C64>,
) -> Result<Option<Array2<C64>>> {
    let dim = mat.nrows();
    // The null space is closed under Hermitian conjugation, so both the
    // Hermitian and anti-Hermitian parts are null vectors; the eigenvector's
    // arbitrary global phase decides which one carries the weight. Keep the
    // larger and orient it toward positive trace.
    let herm_part = (mat + &mat.t().mapv(|z| z.conj())).mapv(|z| z * 0.5);
    let anti_part = (mat - &mat.t().mapv(|z| z.conj())).mapv(|z| z * C64::new(0.0, -0.5));
    let mut herm = if eig::frobenius(&herm_part) >= eig::frobenius(&anti_part) {
        herm_part
    } else {
        anti_part
    };
    let tr: C64 = herm.diag().sum();
    if tr.re < 0.0 {
        herm.mapv_inplace(|z| -z);
    }
    let (evals, evecs) = eig::eigh_hermitian(&herm)?;
    let mut rho = Array2::<C64>::zeros((dim, dim));
    for (j, &ev) in evals.iter().enumerate() {
        if ev <= 0.0 {
            continue;
        }
        let col = evecs.column(j);
        for r in 0..dim {
            for c in 0..dim {
                rho[(r, c)] += col[r] * col[c].conj() * ev;
            }
        }
    }
    let tr: C64 = rho.diag().sum();
    if tr.norm() < 1e-14 {
        return Ok(None);
    }
    rho.mapv_inplace(|z| z / tr);
    Ok(Some(rho))
}

/// Current moments from one-sided and central finite differences of θ.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurrentStats {
    /// Mean photon flux into the right bath, -θ'(0).
    pub q_mean: f64,
    /// One-sided flux from the s<0 branch (the more active state).
    pub q_max: f64,
    /// One-sided flux from the s>0 branch (the less active state).
    pub q_min: f64,
    /// Flux ratio q_max/q_min; infinite when q_min is below the floor.
    pub alpha: f64,
    /// True when alpha was saturated by the q_min floor.
    pub alpha_saturated: bool,
    /// Second moment θ''(0) of the counting statistics.
    pub q_second: f64,
    /// Relative difference of the one-sided slopes (kink strength).
    pub slope_rel_difference: f64,
    /// Kink verdict at the configured threshold.
    pub has_kink: bool,
    /// Finite-difference step metadata.
    pub delta_s: f64,
    pub richardson_ratio: f64,
}

/// Options for [`current_stats`].
#[derive(Debug, Clone, Copy)]
pub struct CurrentOptions {
    pub delta_s: f64,
    /// q_min values below this floor saturate alpha to infinity.
    pub q_floor: f64,
    /// Relative slope difference above which a kink is declared.
    pub kink_rel_tol: f64,
}

impl Default for CurrentOptions {
    fn default() -> Self {
        CurrentOptions {
            delta_s: 1e-3,
            q_floor: 1e-12,
            kink_rel_tol: 1e-3,
        }
    }
}

/// Mean, one-sided, and second-moment current statistics at s = 0.
///
/// One-sided slopes use first-order differences Richardson-extrapolated over
/// steps {δs, δs/10}; the mean uses the central analogue.
pub fn current_stats(
    model: &LindbladModel,
    opts: &CurrentOptions,
    solver: &SolverConfig,
) -> Result<CurrentStats> {
    if opts.delta_s <= 0.0 {
        return Err(Error::Config("delta_s must be positive".into()));
    }
    let h = opts.delta_s;
    let grid = [-h, -h / 10.0, 0.0, h / 10.0, h];
    let th: Vec<f64> = grid
        .par_iter()
        .map(|&s| theta(model, s, solver).map(|t| t.theta))
        .collect::<Result<Vec<_>>>()?;
    let (t_m, t_m10, t_0, t_p10, t_p) = (th[0], th[1], th[2], th[3], th[4]);

    // Central differences for the mean: q(h) = -(θ(h) - θ(-h)) / (2h),
    // error O(h²), extrapolated with ratio 10.
    let qc = |tp: f64, tm: f64, step: f64| -(tp - tm) / (2.0 * step);
    let q_mean = (100.0 * qc(t_p10, t_m10, h / 10.0) - qc(t_p, t_m, h)) / 99.0;

    // One-sided slopes, error O(h), extrapolated with ratio 10.
    let q_left = |t_side: f64, step: f64| (t_side - t_0) / step;
    let q_max = (10.0 * q_left(t_m10, h / 10.0) - q_left(t_m, h)) / 9.0;
    let q_right = |t_side: f64, step: f64| (t_0 - t_side) / step;
    let q_min = (10.0 * q_right(t_p10, h / 10.0) - q_right(t_p, h)) / 9.0;

    let q_second = (t_p - 2.0 * t_0 + t_m) / (h * h);

    let (alpha, alpha_saturated) = if q_min.abs() < opts.q_floor {
        (f64::INFINITY, true)
    } else {
        (q_max / q_min, false)
    };

    let denom = q_mean.abs().max(opts.q_floor);
    let slope_rel_difference = (q_max - q_min).abs() / denom;

    Ok(CurrentStats {
        q_mean,
        q_max,
        q_min,
        alpha,
        alpha_saturated,
        q_second,
        slope_rel_difference,
        has_kink: slope_rel_difference > opts.kink_rel_tol,
        delta_s: h,
        richardson_ratio: 10.0,
    })
}

/// Sampled G(q) with provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GqCurve {
    /// (q, G) samples on the requested grid (clipped to the recoverable range).
    pub samples: Vec<(f64, f64)>,
    /// True when part of the requested q grid fell outside the slope range
    /// of the curve and was clipped.
    pub clipped: bool,
    /// The q interval between the one-sided mean currents, not recoverable
    /// from θ when the curve has a kink.
    pub non_recoverable: Option<(f64, f64)>,
    pub params: Option<SwitchParams>,
}

/// Numerical Legendre-Fenchel inverse: G(q) = min over sampled s of
/// [θ(s) + s q]. Returns the concave envelope only.
pub fn legendre(curve: &LdfCurve, q_grid: &[f64], kink_rel_tol: f64) -> Result<GqCurve> {
    if curve.samples.len() < 3 {
        return Err(Error::Config("need at least three θ samples".into()));
    }
    let s_min = curve.samples.first().unwrap().s;
    let s_max = curve.samples.last().unwrap().s;
    if s_min >= 0.0 || s_max <= 0.0 {
        return Err(Error::Config(format!(
            "θ grid [{s_min}, {s_max}] must bracket s = 0"
        )));
    }

    // Recoverable slope range from adjacent-sample secants: q = -Δθ/Δs.
    let slopes: Vec<f64> = curve
        .samples
        .windows(2)
        .map(|p| -(p[1].theta - p[0].theta) / (p[1].s - p[0].s))
        .collect();
    let q_lo = slopes.iter().cloned().fold(f64::INFINITY, f64::min);
    let q_hi = slopes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let range_tol = 1e-12 * q_lo.abs().max(q_hi.abs()).max(1.0);

    // The envelope value is still computed for out-of-range q (it linearly
    // extrapolates from the boundary slope), but such points are flagged.
    let mut clipped = false;
    let mut samples = Vec::with_capacity(q_grid.len());
    for &q in q_grid {
        if q < q_lo - range_tol || q > q_hi + range_tol {
            clipped = true;
        }
        let g = curve
            .samples
            .iter()
            .map(|t| t.theta + t.s * q)
            .fold(f64::INFINITY, f64::min);
        samples.push((q, g));
    }

    let non_recoverable = curve_kink_interval(curve, kink_rel_tol);

    Ok(GqCurve {
        samples,
        clipped,
        non_recoverable,
        params: curve.params.clone(),
    })
}

/// One-sided slope estimates at s = 0 from curve samples, Richardson
/// extrapolated over the two nearest offsets per side so that smooth
/// curvature does not read as a kink. Returns the (min, max) one-sided
/// currents when they differ relatively by more than `kink_rel_tol`.
fn curve_kink_interval(curve: &LdfCurve, kink_rel_tol: f64) -> Option<(f64, f64)> {
    let samples = &curve.samples;
    let k0 = samples
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.s.abs().total_cmp(&b.1.s.abs()))
        .map(|(k, _)| k)?;
    if k0 < 2 || k0 + 2 >= samples.len() {
        return None;
    }
    let s0 = samples[k0].s;
    let t0 = samples[k0].theta;
    // First-order one-sided difference at step h has an O(h) error; two
    // steps per side eliminate it: D* = D(h1) + (D(h1) - D(h2)) h1/(h2 - h1).
    let one_sided = |k_near: usize, k_far: usize| -> f64 {
        let h1 = samples[k_near].s - s0;
        let h2 = samples[k_far].s - s0;
        let d1 = (samples[k_near].theta - t0) / h1;
        let d2 = (samples[k_far].theta - t0) / h2;
        d1 + (d1 - d2) * h1 / (h2 - h1)
    };
    let q_left = -one_sided(k0 - 1, k0 - 2);
    let q_right = -one_sided(k0 + 1, k0 + 2);
    let denom = q_left.abs().max(q_right.abs()).max(1e-300);
    if (q_left - q_right).abs() / denom > kink_rel_tol {
        Some((q_left.min(q_right), q_left.max(q_right)))
    } else {
        None
    }
}

/// Reconstruct θ(s) = max over sampled q of [G(q) - s q] from a rate
/// function; the round-trip partner of [`legendre`].
pub fn legendre_inverse(gq: &GqCurve, s: f64) -> f64 {
    gq.samples
        .iter()
        .map(|(q, g)| g - s * q)
        .fold(f64::NEG_INFINITY, f64::max)
}
