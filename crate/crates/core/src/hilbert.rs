//! Truncated composite Hilbert space: a four-level atomic pair tensored with
//! three cavity modes, plus elementary operators on it.
//!
//! The atomic factor uses the fixed ordered basis `[|00>, |s>, |a>, |11>]`
//! where `|s>`/`|a>` are the symmetric/antisymmetric one-excitation states.
//! Photon occupations are truncated per mode and optionally by a global cap
//! on the total photon number. Operators are built as `P A P` with `P` the
//! projector onto the retained basis, so a ladder operator maps a state out
//! of the truncation to zero.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The four reduced atomic levels, in fixed basis order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AtomState {
    /// Both atoms in the ground state.
    #[serde(rename = "00")]
    BothGround,
    /// Symmetric one-excitation state (|01> + |10>)/sqrt(2).
    #[serde(rename = "s")]
    Symmetric,
    /// Antisymmetric one-excitation state (|01> - |10>)/sqrt(2).
    #[serde(rename = "a")]
    Antisymmetric,
    /// Both atoms excited.
    #[serde(rename = "11")]
    BothExcited,
}

impl AtomState {
    pub const ALL: [AtomState; 4] = [
        AtomState::BothGround,
        AtomState::Symmetric,
        AtomState::Antisymmetric,
        AtomState::BothExcited,
    ];

    /// Position in the fixed atomic basis order.
    pub fn index(self) -> usize {
        match self {
            AtomState::BothGround => 0,
            AtomState::Symmetric => 1,
            AtomState::Antisymmetric => 2,
            AtomState::BothExcited => 3,
        }
    }

    /// Swap-parity eigenvalue: -1 for |a>, +1 otherwise.
    pub fn parity(self) -> f64 {
        match self {
            AtomState::Antisymmetric => -1.0,
            _ => 1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            AtomState::BothGround => "00",
            AtomState::Symmetric => "s",
            AtomState::Antisymmetric => "a",
            AtomState::BothExcited => "11",
        }
    }

    pub fn from_label(s: &str) -> Result<Self> {
        match s {
            "00" => Ok(AtomState::BothGround),
            "s" => Ok(AtomState::Symmetric),
            "a" => Ok(AtomState::Antisymmetric),
            "11" => Ok(AtomState::BothExcited),
            other => Err(Error::UnknownLabel(format!("atomic state '{other}'"))),
        }
    }
}

/// The three cavity modes. The middle cavity keeps the label "2".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CavityMode {
    #[serde(rename = "l")]
    Left,
    #[serde(rename = "2")]
    Middle,
    #[serde(rename = "r")]
    Right,
}

impl CavityMode {
    pub const ALL: [CavityMode; 3] = [CavityMode::Left, CavityMode::Middle, CavityMode::Right];

    pub fn index(self) -> usize {
        match self {
            CavityMode::Left => 0,
            CavityMode::Middle => 1,
            CavityMode::Right => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            CavityMode::Left => "l",
            CavityMode::Middle => "2",
            CavityMode::Right => "r",
        }
    }

    pub fn from_label(s: &str) -> Result<Self> {
        match s {
            "l" => Ok(CavityMode::Left),
            "2" => Ok(CavityMode::Middle),
            "r" => Ok(CavityMode::Right),
            other => Err(Error::UnknownLabel(format!("cavity mode '{other}'"))),
        }
    }
}

/// Truncation spec for the composite space.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModeSpec {
    /// Per-mode maximum photon number for (l, 2, r).
    pub cavity_cutoffs: [usize; 3],
    /// Optional cap on the total photon number across all three cavities.
    pub global_cap: Option<usize>,
}

impl Default for ModeSpec {
    /// The low-photon regime: at most one photon in the whole chain.
    fn default() -> Self {
        ModeSpec {
            cavity_cutoffs: [1, 1, 1],
            global_cap: Some(1),
        }
    }
}

impl ModeSpec {
    pub fn validate(&self) -> Result<()> {
        if self.cavity_cutoffs.iter().any(|&c| c < 1) {
            return Err(Error::Config(
                "cavity cutoffs must be at least 1".to_string(),
            ));
        }
        if let Some(cap) = self.global_cap {
            let sum: usize = self.cavity_cutoffs.iter().sum();
            if cap > sum {
                return Err(Error::Config(format!(
                    "global photon cap {cap} exceeds the sum of the cutoffs {sum}"
                )));
            }
        }
        Ok(())
    }

    fn admits(&self, occ: [usize; 3]) -> bool {
        occ.iter()
            .zip(self.cavity_cutoffs.iter())
            .all(|(n, c)| n <= c)
            && self
                .global_cap
                .map_or(true, |cap| occ.iter().sum::<usize>() <= cap)
    }
}

/// One retained basis state: atomic level plus the three photon occupations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisState {
    pub atom: AtomState,
    pub photons: [usize; 3],
}

/// The truncated composite space with bidirectional state/index maps.
///
/// Basis order is lexicographic with the atom index outermost, then
/// `(n_l, n_2, n_r)`; equal specs always produce identical orderings.
#[derive(Debug)]
pub struct HilbertSpace {
    spec: ModeSpec,
    basis: Vec<BasisState>,
    index: HashMap<BasisState, usize>,
    id: u64,
}

impl HilbertSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Identifier derived from the spec; operators record it so that
    /// cross-space arithmetic can be rejected.
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn spec(&self) -> &ModeSpec {
        &self.spec
    }

    pub fn basis(&self) -> &[BasisState] {
        &self.basis
    }

    pub fn state(&self, idx: usize) -> BasisState {
        self.basis[idx]
    }

    /// Ordinal of a basis state, if it is retained by the truncation.
    pub fn index_of(&self, state: &BasisState) -> Option<usize> {
        self.index.get(state).copied()
    }

    /// Dimension of the photon sector (basis states per atomic level).
    pub fn photon_sector_dim(&self) -> usize {
        self.basis.len() / AtomState::ALL.len()
    }
}

/// Enumerate the truncated composite basis.
pub fn build_space(spec: &ModeSpec) -> Result<Arc<HilbertSpace>> {
    spec.validate()?;
    let [cl, c2, cr] = spec.cavity_cutoffs;
    let mut basis = Vec::new();
    for atom in AtomState::ALL {
        for nl in 0..=cl {
            for n2 in 0..=c2 {
                for nr in 0..=cr {
                    let occ = [nl, n2, nr];
                    if spec.admits(occ) {
                        basis.push(BasisState { atom, photons: occ });
                    }
                }
            }
        }
    }
    let index = basis
        .iter()
        .enumerate()
        .map(|(i, s)| (*s, i))
        .collect::<HashMap<_, _>>();
    let mut h = DefaultHasher::new();
    spec.hash(&mut h);
    Ok(Arc::new(HilbertSpace {
        spec: spec.clone(),
        basis,
        index,
        id: h.finish(),
    }))
}

/// Dense complex matrix acting on one [`HilbertSpace`].
#[derive(Debug, Clone)]
pub struct Operator {
    elements: Array2<C64>,
    space_id: u64,
}

impl Operator {
    pub fn zeros(space: &HilbertSpace) -> Self {
        Operator {
            elements: Array2::zeros((space.dim(), space.dim())),
            space_id: space.id(),
        }
    }

    pub fn identity(space: &HilbertSpace) -> Self {
        Operator {
            elements: Array2::eye(space.dim()),
            space_id: space.id(),
        }
    }

    /// Wrap a raw matrix. The matrix must be square and sized to the space.
    pub fn from_matrix(space: &HilbertSpace, elements: Array2<C64>) -> Result<Self> {
        if elements.nrows() != space.dim() || elements.ncols() != space.dim() {
            return Err(Error::Config(format!(
                "matrix shape {:?} does not match space dimension {}",
                elements.shape(),
                space.dim()
            )));
        }
        Ok(Operator {
            elements,
            space_id: space.id(),
        })
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.elements
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.elements
    }

    pub fn space_id(&self) -> u64 {
        self.space_id
    }

    pub fn dim(&self) -> usize {
        self.elements.nrows()
    }

    pub fn adjoint(&self) -> Operator {
        Operator {
            elements: self.elements.t().mapv(|z| z.conj()),
            space_id: self.space_id,
        }
    }

    pub fn scale(&self, factor: C64) -> Operator {
        Operator {
            elements: self.elements.mapv(|z| z * factor),
            space_id: self.space_id,
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.elements.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> C64 {
        self.elements.diag().sum()
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.frobenius_norm() <= tol
    }

    /// Hermiticity defect ‖A - A†‖_F.
    pub fn hermiticity_defect(&self) -> f64 {
        (self - &self.adjoint()).frobenius_norm()
    }

    fn check_space(&self, other: &Operator) -> Result<()> {
        if self.space_id != other.space_id {
            return Err(Error::SpaceMismatch {
                left: self.space_id,
                right: other.space_id,
            });
        }
        Ok(())
    }

    /// Matrix product; errors if the operators live on different spaces.
    pub fn matmul(&self, other: &Operator) -> Result<Operator> {
        self.check_space(other)?;
        Ok(Operator {
            elements: self.elements.dot(&other.elements),
            space_id: self.space_id,
        })
    }
}

macro_rules! op_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl std::ops::$trait for &Operator {
            type Output = Operator;
            fn $method(self, rhs: &Operator) -> Operator {
                self.check_space(rhs)
                    .expect("operator arithmetic across different Hilbert spaces");
                Operator {
                    elements: &self.elements $op &rhs.elements,
                    space_id: self.space_id,
                }
            }
        }
    };
}

op_binop!(Add, add, +);
op_binop!(Sub, sub, -);

/// Truncated annihilation operator of one cavity mode: the untruncated
/// `a` projected onto the retained basis.
pub fn annihilator(space: &HilbertSpace, mode: CavityMode) -> Operator {
    let m = mode.index();
    let mut op = Operator::zeros(space);
    for (col, state) in space.basis().iter().enumerate() {
        let n = state.photons[m];
        if n == 0 {
            continue;
        }
        let mut target = *state;
        target.photons[m] = n - 1;
        if let Some(row) = space.index_of(&target) {
            op.elements[(row, col)] = C64::new((n as f64).sqrt(), 0.0);
        }
    }
    op
}

/// `|i><j|` on the atomic factor, identity on all photon factors.
pub fn atomic_transition(space: &HilbertSpace, i: AtomState, j: AtomState) -> Operator {
    let mut op = Operator::zeros(space);
    for (col, state) in space.basis().iter().enumerate() {
        if state.atom != j {
            continue;
        }
        let target = BasisState {
            atom: i,
            photons: state.photons,
        };
        let row = space
            .index_of(&target)
            .expect("photon configuration is atom-independent");
        op.elements[(row, col)] = C64::new(1.0, 0.0);
    }
    op
}

/// Photon number operator of one cavity mode.
pub fn number_op(space: &HilbertSpace, mode: CavityMode) -> Operator {
    let m = mode.index();
    let mut op = Operator::zeros(space);
    for (k, state) in space.basis().iter().enumerate() {
        op.elements[(k, k)] = C64::new(state.photons[m] as f64, 0.0);
    }
    op
}

/// AB - BA; errors on a space mismatch.
pub fn commutator(a: &Operator, b: &Operator) -> Result<Operator> {
    let ab = a.matmul(b)?;
    let ba = b.matmul(a)?;
    Ok(&ab - &ba)
}
