//! POVMs, Lüders instruments and the conditional fine-graining update.

use std::fmt;

use crate::error::{Error, Result, Violation};
use crate::linalg::{
    self, herm_eig, inner, norm, pinv_sqrt_from_eig, range_projector_from_eig, ComplexMatrix, C64,
    DEFAULT_TOL,
};

/// Branches lighter than this carry no post-measurement state.
pub const NULL_TOL: f64 = 1e-12;

/// Looser tolerance for operators this crate derives itself (sums, updates),
/// where only floating-point noise can push them off the effect set.
const DERIVED_TOL: f64 = 1e-9;

/// A Hermitian operator `0 <= A <= I` tagged with its outcome label.
#[derive(Clone, PartialEq)]
pub struct Effect {
    label: String,
    matrix: ComplexMatrix,
    sqrt: ComplexMatrix,
}

impl fmt::Debug for Effect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Effect")
            .field("label", &self.label)
            .field("matrix", &self.matrix)
            .finish()
    }
}

impl Effect {
    /// Validates `matrix` as an effect. Eigenvalues within `tol` outside
    /// `[0, 1]` are clamped back into range.
    pub fn new(label: impl Into<String>, matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        if let Some(v) = first_effect_violation(0, &matrix, tol) {
            return Err(Error::NotEffect {
                reason: v.to_string(),
            });
        }
        Self::build(label.into(), &matrix, tol)
    }

    fn build(label: String, matrix: &ComplexMatrix, tol: f64) -> Result<Self> {
        let eig = herm_eig(matrix, tol)?;
        let needs_clamp = eig.min_eigenvalue() < 0.0 || eig.max_eigenvalue() > 1.0;
        let matrix = if needs_clamp {
            eig.map(|l| l.clamp(0.0, 1.0))
        } else {
            matrix.hermitian_part()
        };
        let sqrt = linalg::sqrt_from_eig(&eig).hermitian_part();
        Ok(Self {
            label,
            matrix,
            sqrt,
        })
    }

    pub(crate) fn derived(label: impl Into<String>, matrix: &ComplexMatrix) -> Result<Self> {
        Self::build(label.into(), matrix, DERIVED_TOL)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// `A^{1/2}`
    pub fn sqrt(&self) -> &ComplexMatrix {
        &self.sqrt
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// `I - A`, labelled `label`.
    pub fn complement(&self, label: impl Into<String>) -> Result<Effect> {
        let c = &ComplexMatrix::identity(self.dim()) - &self.matrix;
        Effect::derived(label, &c)
    }
}

fn first_effect_violation(index: usize, m: &ComplexMatrix, tol: f64) -> Option<Violation> {
    let residual = linalg::hermiticity_residual(m).ok()?;
    if residual > tol {
        return Some(Violation::NotHermitian { index, residual });
    }
    let eig = herm_eig(m, tol).ok()?;
    if eig.min_eigenvalue() < -tol {
        return Some(Violation::NotPositive {
            index,
            min_eigenvalue: eig.min_eigenvalue(),
        });
    }
    if eig.max_eigenvalue() > 1.0 + tol {
        return Some(Violation::ExceedsIdentity {
            index,
            max_eigenvalue: eig.max_eigenvalue(),
        });
    }
    None
}

/// Ordered list of effects summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    dim: usize,
    effects: Vec<Effect>,
}

/// Validates a labelled list of matrices as a POVM, collecting every
/// violation rather than stopping at the first.
pub fn validate_povm<S: Into<String>>(effects: Vec<(S, ComplexMatrix)>, tol: f64) -> Result<Povm> {
    let first = effects.first().ok_or(Error::EmptyList)?;
    let dim = first.1.rows();
    for (_, m) in &effects {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        if m.rows() != dim {
            return Err(Error::dims(dim, m.rows()));
        }
    }

    let mut violations: Vec<Violation> = effects
        .iter()
        .enumerate()
        .filter_map(|(i, (_, m))| first_effect_violation(i, m, tol))
        .collect();

    let mut sum = ComplexMatrix::zeros(dim, dim);
    for (_, m) in &effects {
        sum = &sum + m;
    }
    let residual = (&sum - &ComplexMatrix::identity(dim)).frob_norm();
    if residual > tol {
        violations.push(Violation::SumNotIdentity { residual });
    }
    if !violations.is_empty() {
        return Err(Error::InvalidPovm(violations));
    }

    let effects = effects
        .into_iter()
        .map(|(l, m)| Effect::build(l.into(), &m, tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(Povm { dim, effects })
}

impl Povm {
    pub fn new<S: Into<String>>(effects: Vec<(S, ComplexMatrix)>, tol: f64) -> Result<Self> {
        validate_povm(effects, tol)
    }

    /// Projective measurement in the computational basis, labelled `"0".."d-1"`.
    pub fn computational_basis(dim: usize) -> Self {
        let effects = (0..dim)
            .map(|i| {
                let mut p = ComplexMatrix::zeros(dim, dim);
                p[(i, i)] = linalg::ONE;
                (i.to_string(), p)
            })
            .collect();
        validate_povm(effects, DEFAULT_TOL).expect("basis projectors form a POVM")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn effects(&self) -> &[Effect] {
        &self.effects
    }

    pub fn effect(&self, j: usize) -> &Effect {
        &self.effects[j]
    }

    pub fn labels(&self) -> Vec<String> {
        self.effects.iter().map(|e| e.label.clone()).collect()
    }

    pub fn probabilities(&self, state: &State) -> Result<Vec<f64>> {
        self.effects
            .iter()
            .map(|e| born_probability(e, state))
            .collect()
    }
}

/// Disjoint cover of `0..n` by nonempty cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    cells: Vec<Vec<usize>>,
}

impl Partition {
    pub fn new(cells: Vec<Vec<usize>>, n: usize) -> Result<Self> {
        let mut seen = vec![false; n];
        for cell in &cells {
            if cell.is_empty() {
                return Err(Error::BadPartition("empty cell".into()));
            }
            for &j in cell {
                if j >= n {
                    return Err(Error::BadPartition(format!(
                        "index {j} out of range 0..{n}"
                    )));
                }
                if std::mem::replace(&mut seen[j], true) {
                    return Err(Error::BadPartition(format!("index {j} appears twice")));
                }
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::BadPartition(format!("index {missing} not covered")));
        }
        Ok(Self { cells })
    }

    pub fn singletons(n: usize) -> Self {
        Self {
            cells: (0..n).map(|j| vec![j]).collect(),
        }
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }
}

/// `B_k = sum_{j in P_k} A_j`. Labels of merged outcomes are joined with `+`.
pub fn coarse_grain(p: &Povm, part: &Partition) -> Result<Povm> {
    let covered: usize = part.cells.iter().map(Vec::len).sum();
    if covered != p.len() || part.cells.iter().flatten().any(|&j| j >= p.len()) {
        return Err(Error::BadPartition(format!(
            "partition does not cover the {} outcomes",
            p.len()
        )));
    }
    let effects = part
        .cells
        .iter()
        .map(|cell| {
            let mut sum = ComplexMatrix::zeros(p.dim, p.dim);
            for &j in cell {
                sum = &sum + p.effects[j].matrix();
            }
            let label = cell
                .iter()
                .map(|&j| p.effects[j].label.as_str())
                .collect::<Vec<_>>()
                .join("+");
            Effect::derived(label, &sum)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Povm {
        dim: p.dim,
        effects,
    })
}

/// A density operator.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    matrix: ComplexMatrix,
}

impl State {
    /// `|psi><psi|` for a unit vector.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        if psi.is_empty() {
            return Err(Error::InvalidState("empty state vector".into()));
        }
        if psi.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let n = norm(psi);
        if (n - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidState(format!("state vector has norm {n}")));
        }
        Ok(Self {
            matrix: ComplexMatrix::projector(psi),
        })
    }

    pub fn density(matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        let eig = herm_eig(&matrix, tol).map_err(|e| Error::InvalidState(e.to_string()))?;
        if eig.min_eigenvalue() < -tol {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {:.3e}",
                eig.min_eigenvalue()
            )));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        Ok(Self {
            matrix: matrix.hermitian_part(),
        })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
        }
    }

    /// Normalizes a positive operator; `None` if its trace is below [`NULL_TOL`].
    pub(crate) fn from_unnormalized(m: &ComplexMatrix) -> Option<Self> {
        let tr = m.trace().re;
        (tr >= NULL_TOL).then(|| Self {
            matrix: m.hermitian_part().scale_real(1.0 / tr),
        })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// `<phi|rho|phi>` for a unit vector `phi`.
    pub fn fidelity_with_pure(&self, phi: &[C64]) -> f64 {
        inner(phi, &self.matrix.matvec(phi)).re
    }

    /// Uhlmann fidelity `(tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`.
    pub fn fidelity(&self, other: &State) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::dims(self.dim(), other.dim()));
        }
        let s = linalg::psd_sqrt(&self.matrix, 1e-9)?;
        let inner = &(&s * &other.matrix) * &s;
        let root = linalg::psd_sqrt(&inner.hermitian_part(), 1e-9)?;
        Ok(root.trace().re.powi(2))
    }
}

/// One outcome of an instrument: its probability and the normalized state
/// it leaves behind (`None` for a dead branch).
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub weight: f64,
    pub state: Option<State>,
}

impl Branch {
    pub(crate) fn from_unnormalized(m: &ComplexMatrix) -> Self {
        let weight = m.trace().re.clamp(0.0, 1.0);
        Self {
            weight,
            state: State::from_unnormalized(m),
        }
    }

    pub fn is_null(&self) -> bool {
        self.state.is_none()
    }
}

fn check_dims(e: &Effect, s: &State) -> Result<()> {
    if e.dim() != s.dim() {
        return Err(Error::dims(e.dim(), s.dim()));
    }
    Ok(())
}

/// `tr(A rho)`, clamped into `[0, 1]`.
pub fn born_probability(e: &Effect, s: &State) -> Result<f64> {
    check_dims(e, s)?;
    let n = e.dim();
    let (a, r) = (e.matrix(), s.matrix());
    let mut tr = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            tr += a[(i, k)] * r[(k, i)];
        }
    }
    Ok(tr.re.clamp(0.0, 1.0))
}

/// Lüders update `rho -> A^{1/2} rho A^{1/2} / tr(A rho)`.
pub fn lueders_branch(e: &Effect, s: &State) -> Result<Branch> {
    check_dims(e, s)?;
    let weight = born_probability(e, s)?;
    let state = if weight < NULL_TOL {
        None
    } else {
        let post = e.sqrt().sandwich(s.matrix());
        State::from_unnormalized(&post)
    };
    Ok(Branch { weight, state })
}

/// The effects still to be distinguished after a chain of Lüders
/// coarse-grainings. They live in the full space and sum to the projector
/// onto the current range rather than to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct SubPovm {
    dim: usize,
    effects: Vec<Effect>,
    outcomes: Vec<usize>,
    range_projector: ComplexMatrix,
    rank: usize,
}

impl From<&Povm> for SubPovm {
    fn from(p: &Povm) -> Self {
        Self {
            dim: p.dim,
            effects: p.effects.clone(),
            outcomes: (0..p.len()).collect(),
            range_projector: ComplexMatrix::identity(p.dim),
            rank: p.dim,
        }
    }
}

impl SubPovm {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn effects(&self) -> &[Effect] {
        &self.effects
    }

    /// Original outcome indices, parallel to [`SubPovm::effects`].
    pub fn outcomes(&self) -> &[usize] {
        &self.outcomes
    }

    pub fn range_projector(&self) -> &ComplexMatrix {
        &self.range_projector
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Set when the range is a proper subspace.
    pub fn rank_deficient(&self) -> bool {
        self.rank < self.dim
    }

    pub fn effect_for(&self, outcome: usize) -> Option<&Effect> {
        self.outcomes
            .iter()
            .position(|&o| o == outcome)
            .map(|k| &self.effects[k])
    }

    fn positions(&self, cell: &[usize]) -> Result<Vec<usize>> {
        if cell.is_empty() {
            return Err(Error::BadCell("empty cell".into()));
        }
        let mut pos = Vec::with_capacity(cell.len());
        for &o in cell {
            let k = self
                .outcomes
                .iter()
                .position(|&x| x == o)
                .ok_or_else(|| Error::BadCell(format!("outcome {o} is not available here")))?;
            if pos.contains(&k) {
                return Err(Error::BadCell(format!("outcome {o} listed twice")));
            }
            pos.push(k);
        }
        Ok(pos)
    }

    /// `B = sum_{j in cell} A_j`.
    pub fn coarse_effect(&self, cell: &[usize]) -> Result<ComplexMatrix> {
        let pos = self.positions(cell)?;
        let mut b = ComplexMatrix::zeros(self.dim, self.dim);
        for k in pos {
            b = &b + self.effects[k].matrix();
        }
        Ok(b)
    }

    /// Replaces each `A_j`, `j` in `cell`, with `B^{-1/2} A_j B^{-1/2}` where
    /// `B` is the sum over the cell and the inverse is taken on `ran B`.
    pub fn conditional_update(&self, cell: &[usize], rank_tol: f64) -> Result<SubPovm> {
        let pos = self.positions(cell)?;
        let b = self.coarse_effect(cell)?;
        let eig = herm_eig(&b, DERIVED_TOL)?;
        let inv_sqrt = pinv_sqrt_from_eig(&eig, rank_tol)?;
        let range_projector = range_projector_from_eig(&eig, rank_tol);
        let rank = range_projector.trace().re.round() as usize;
        let effects = pos
            .iter()
            .map(|&k| {
                let e = &self.effects[k];
                let updated = inv_sqrt.sandwich(e.matrix());
                Effect::derived(e.label.clone(), &updated)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SubPovm {
            dim: self.dim,
            effects,
            outcomes: pos.iter().map(|&k| self.outcomes[k]).collect(),
            range_projector,
            rank,
        })
    }
}

/// [`SubPovm::conditional_update`] starting from a full POVM.
pub fn conditional_update(p: &Povm, cell: &[usize], rank_tol: f64) -> Result<SubPovm> {
    SubPovm::from(p).conditional_update(cell, rank_tol)
}
