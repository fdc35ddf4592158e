//! Dilations of measurements onto larger spaces.
//!
//! Two constructions live here: the reference Naimark isometry onto
//! `system (x) C^n`, and the single-qubit coupling circuit that realizes a
//! two-outcome Lüders measurement `{B, I - B}`:
//!
//! ```text
//!   system  --[U_B]--●--[U_B^dag]--
//!                    |
//!   |0>     --------[V_j]----(measure Z)
//! ```
//!
//! `V = sum_j |j><j| (x) V_j` acts in the eigenbasis of `B`. Each block has
//! first column `(sqrt(lambda_j), sqrt(1 - lambda_j))` and is completed as the
//! real reflection `[[s, c], [c, -s]]`; only the first column is observable
//! since the ancilla always starts in `|0>`.
//!
//! Matrices are stored system-slow: index `2 * j + k` for system `j`,
//! ancilla `k`.

use crate::error::{Error, Result};
use crate::linalg::{
    self, complete_orthonormal, herm_eig, is_unitary, kron, kron_vec, ComplexMatrix, C64, ONE, ZERO,
};
use crate::povm::{Branch, Effect, Povm, State};

/// Unitarity tolerance for the 2x2 blocks and the assembled coupling.
pub const UNITARY_TOL: f64 = 1e-10;
const GRAM_SCHMIDT_DROP: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct NaimarkDilation {
    dim: usize,
    outcomes: usize,
    isometry: ComplexMatrix,
    projectors: Vec<ComplexMatrix>,
    unitary_extension: ComplexMatrix,
}

/// `V = sum_i sqrt(F_i) (x) |i>`, plus a unitary `U` with
/// `U (I (x) |0>) = V` completed by Gram-Schmidt.
pub fn naive_naimark(p: &Povm) -> NaimarkDilation {
    let d = p.dim();
    let n = p.len();
    let mut isometry = ComplexMatrix::zeros(n * d, d);
    for (i, e) in p.effects().iter().enumerate() {
        let root = e.sqrt();
        for a in 0..d {
            for b in 0..d {
                isometry[(a * n + i, b)] = root[(a, b)];
            }
        }
    }

    let projectors = (0..n)
        .map(|i| {
            let mut ket = ComplexMatrix::zeros(n, n);
            ket[(i, i)] = ONE;
            kron(&ComplexMatrix::identity(d), &ket)
        })
        .collect();

    let given: Vec<Vec<C64>> = (0..d).map(|b| isometry.column(b)).collect();
    let full = complete_orthonormal(&given, n * d, GRAM_SCHMIDT_DROP);
    let mut extra = full[d..].iter();
    let mut unitary_extension = ComplexMatrix::zeros(n * d, n * d);
    for col in 0..n * d {
        let v = if col % n == 0 {
            &given[col / n]
        } else {
            extra.next().expect("completion yields a full basis")
        };
        for (r, z) in v.iter().enumerate() {
            unitary_extension[(r, col)] = *z;
        }
    }

    NaimarkDilation {
        dim: d,
        outcomes: n,
        isometry,
        projectors,
        unitary_extension,
    }
}

impl NaimarkDilation {
    /// Dimension of the dilated space, `n * d`.
    pub fn dilated_dim(&self) -> usize {
        self.dim * self.outcomes
    }

    pub fn isometry(&self) -> &ComplexMatrix {
        &self.isometry
    }

    pub fn projectors(&self) -> &[ComplexMatrix] {
        &self.projectors
    }

    pub fn unitary_extension(&self) -> &ComplexMatrix {
        &self.unitary_extension
    }

    /// `|V^dag V - I|_F`
    pub fn isometry_residual(&self) -> f64 {
        let g = &self.isometry.dagger() * &self.isometry;
        (&g - &ComplexMatrix::identity(self.dim)).frob_norm()
    }

    /// `V^dag P_i V`
    pub fn pulled_back_effect(&self, i: usize) -> ComplexMatrix {
        let pv = &self.projectors[i] * &self.isometry;
        &self.isometry.dagger() * &pv
    }

    /// `U (I (x) |0>)`
    pub fn extension_restricted(&self) -> ComplexMatrix {
        let n = self.outcomes;
        ComplexMatrix::from_fn(self.dilated_dim(), self.dim, |r, b| {
            self.unitary_extension[(r, b * n)]
        })
    }
}

/// Sum of effect ranks, eigenvalues above `rank_tol` counting as nonzero.
pub fn peres_dimension(p: &Povm, rank_tol: f64) -> usize {
    p.effects()
        .iter()
        .map(|e| {
            herm_eig(e.matrix(), linalg::DEFAULT_TOL)
                .map(|eig| eig.rank_above(rank_tol))
                .unwrap_or(0)
        })
        .sum()
}

/// `[[sqrt(l), sqrt(1-l)], [sqrt(1-l), -sqrt(l)]]`
pub fn reflection_block(lambda: f64) -> ComplexMatrix {
    let l = lambda.clamp(0.0, 1.0);
    let (s, c) = (l.sqrt(), (1.0 - l).sqrt());
    ComplexMatrix::from_real(2, 2, &[s, c, c, -s])
}

/// Clamps into `[0, 1]` and rounds values within round-off of either end,
/// so exact zeros and ones of `B` give exact block entries.
fn snap_unit(l: f64) -> f64 {
    let floor = linalg::SQRT_NOISE_FLOOR;
    if l < floor {
        0.0
    } else if l > 1.0 - floor {
        1.0
    } else {
        l
    }
}

/// Single-ancilla circuit for the Lüders measurement `{B, I - B}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingCircuit {
    basis_change: ComplexMatrix,
    eigenvalues: Vec<f64>,
    blocks: Vec<ComplexMatrix>,
    /// Columns of the full coupling unitary acting on `|.> (x) |0>`.
    on_ancilla_zero: ComplexMatrix,
}

pub fn coupling_circuit(b: &Effect) -> Result<CouplingCircuit> {
    let eig = herm_eig(b.matrix(), linalg::DEFAULT_TOL)?;
    let eigenvalues: Vec<f64> = eig.eigenvalues.iter().map(|&l| snap_unit(l)).collect();
    let blocks = eigenvalues.iter().map(|&l| reflection_block(l)).collect();
    CouplingCircuit::from_parts(eig.eigenvectors.dagger(), eigenvalues, blocks)
}

impl CouplingCircuit {
    /// Assembles a circuit from an explicit completion. Fails unless
    /// `basis_change` and every block are unitary and each block's first
    /// column is `(sqrt(lambda_j), sqrt(1 - lambda_j))`.
    pub fn from_parts(
        basis_change: ComplexMatrix,
        eigenvalues: Vec<f64>,
        blocks: Vec<ComplexMatrix>,
    ) -> Result<Self> {
        let d = eigenvalues.len();
        if basis_change.rows() != d || !basis_change.is_square() || blocks.len() != d {
            return Err(Error::InvalidCircuit(format!(
                "basis change {}x{}, {} eigenvalues, {} blocks",
                basis_change.rows(),
                basis_change.cols(),
                d,
                blocks.len()
            )));
        }
        if !is_unitary(&basis_change, UNITARY_TOL) {
            return Err(Error::InvalidCircuit("basis change is not unitary".into()));
        }
        for (j, (blk, &l)) in blocks.iter().zip(&eigenvalues).enumerate() {
            if !(-UNITARY_TOL..=1.0 + UNITARY_TOL).contains(&l) {
                return Err(Error::InvalidCircuit(format!(
                    "eigenvalue {l} outside [0, 1]"
                )));
            }
            if blk.rows() != 2 || !is_unitary(blk, UNITARY_TOL) {
                return Err(Error::InvalidCircuit(format!(
                    "block {j} is not a 2x2 unitary"
                )));
            }
            let l = l.clamp(0.0, 1.0);
            let want = [l.sqrt(), (1.0 - l).sqrt()];
            let off = (blk[(0, 0)] - want[0]).norm() + (blk[(1, 0)] - want[1]).norm();
            if off > UNITARY_TOL {
                return Err(Error::InvalidCircuit(format!(
                    "block {j} first column does not match eigenvalue {l}"
                )));
            }
        }
        let mut c = Self {
            basis_change,
            eigenvalues,
            blocks,
            on_ancilla_zero: ComplexMatrix::zeros(1, 1),
        };
        let u = c.full_unitary();
        c.on_ancilla_zero = ComplexMatrix::from_fn(2 * d, d, |r, col| u[(r, 2 * col)]);
        Ok(c)
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `U_B`, with `U_B B U_B^dag = diag(lambda)`.
    pub fn basis_change(&self) -> &ComplexMatrix {
        &self.basis_change
    }

    /// Eigenvalues of `B`, descending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn blocks(&self) -> &[ComplexMatrix] {
        &self.blocks
    }

    /// Copy with every block replaced by `f(j, block)`; the result is
    /// revalidated.
    pub fn with_completion(
        &self,
        f: impl Fn(usize, &ComplexMatrix) -> ComplexMatrix,
    ) -> Result<Self> {
        let blocks = self
            .blocks
            .iter()
            .enumerate()
            .map(|(j, b)| f(j, b))
            .collect();
        Self::from_parts(self.basis_change.clone(), self.eigenvalues.clone(), blocks)
    }

    /// `V = sum_j |j><j| (x) V_j`, system-slow.
    pub fn assembled_v(&self) -> ComplexMatrix {
        let d = self.dim();
        let mut v = ComplexMatrix::zeros(2 * d, 2 * d);
        for (j, blk) in self.blocks.iter().enumerate() {
            for a in 0..2 {
                for b in 0..2 {
                    v[(2 * j + a, 2 * j + b)] = blk[(a, b)];
                }
            }
        }
        v
    }

    /// `(U_B^dag (x) I) V (U_B (x) I)`
    pub fn full_unitary(&self) -> ComplexMatrix {
        let i2 = ComplexMatrix::identity(2);
        let pre = kron(&self.basis_change, &i2);
        let post = kron(&self.basis_change.dagger(), &i2);
        &(&post * &self.assembled_v()) * &pre
    }

    /// `B = U_B^dag diag(lambda) U_B`
    pub fn effect_matrix(&self) -> ComplexMatrix {
        self.basis_change
            .dagger()
            .sandwich(&ComplexMatrix::diag_real(&self.eigenvalues))
    }

    /// `<k|_anc U |0>_anc`, the Kraus operator for ancilla outcome `k`.
    pub fn kraus(&self, k: usize) -> ComplexMatrix {
        assert!(k < 2);
        let d = self.dim();
        ComplexMatrix::from_fn(d, d, |r, c| self.on_ancilla_zero[(2 * r + k, c)])
    }

    /// Joint pure state `U (psi (x) |0>)` in the lab frame.
    pub fn coupled_state(&self, psi: &[C64]) -> Vec<C64> {
        self.on_ancilla_zero.matvec(psi)
    }

    /// Joint pure state `V (U_B psi (x) |0>)`, i.e. before the system is
    /// rotated back out of the eigenbasis of `B`.
    pub fn coupled_state_in_eigenbasis(&self, psi: &[C64]) -> Vec<C64> {
        let rotated = self.basis_change.matvec(psi);
        self.assembled_v().matvec(&kron_vec(&rotated, &[ONE, ZERO]))
    }
}

/// Runs the circuit on `rho (x) |0><0|`, measures the ancilla and traces it
/// out. Branch 0 realizes `B`, branch 1 realizes `I - B`.
pub fn apply_coupling(c: &CouplingCircuit, s: &State) -> Result<(Branch, Branch)> {
    if s.dim() != c.dim() {
        return Err(Error::dims(c.dim(), s.dim()));
    }
    let d = c.dim();
    let joint = c.on_ancilla_zero.sandwich(s.matrix());
    let branch = |k: usize| {
        let m = ComplexMatrix::from_fn(d, d, |i, j| joint[(2 * i + k, 2 * j + k)]);
        Branch::from_unnormalized(&m)
    };
    Ok((branch(0), branch(1)))
}

/// Bloch form of a qubit effect: `A = (alpha I + a . sigma) / 2`.
pub fn bloch_parameters(e: &Effect) -> Result<(f64, [f64; 3])> {
    if e.dim() != 2 {
        return Err(Error::DimNotTwo(e.dim()));
    }
    let m = e.matrix();
    let alpha = m.trace().re;
    let a01 = m[(0, 1)];
    Ok((
        alpha,
        [2.0 * a01.re, -2.0 * a01.im, (m[(0, 0)] - m[(1, 1)]).re],
    ))
}

/// Blocks `(V_0, V_1)` for the qubit effect with Bloch parameters
/// `alpha` and `|a| = a`, eigenvalues `(alpha +- a) / 2`.
pub fn bloch_completion(alpha: f64, a: f64) -> Result<(ComplexMatrix, ComplexMatrix)> {
    const TOL: f64 = 1e-12;
    let bad = |reason: &str| Error::NotEffectParams {
        alpha,
        a,
        reason: reason.into(),
    };
    if !alpha.is_finite() || !a.is_finite() {
        return Err(bad("non-finite"));
    }
    if !(-TOL..=2.0 + TOL).contains(&alpha) {
        return Err(bad("alpha must lie in [0, 2]"));
    }
    if a < -TOL {
        return Err(bad("Bloch length must be non-negative"));
    }
    let hi = (alpha + a) / 2.0;
    let lo = (alpha - a) / 2.0;
    if hi > 1.0 + TOL || lo < -TOL {
        return Err(bad("eigenvalues (alpha +- a)/2 must lie in [0, 1]"));
    }
    Ok((reflection_block(hi), reflection_block(lo)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct QubitFactorization {
    /// `V_0`, applied to the ancilla unconditionally.
    pub pre_rotation: ComplexMatrix,
    /// `W = V_1 V_0^dag`, applied to the ancilla when the system is `|1>`.
    pub controlled_gate: ComplexMatrix,
}

/// `V = (|0><0| (x) I + |1><1| (x) V_1 V_0^dag)(I (x) V_0)`.
pub fn qubit_factorization(c: &CouplingCircuit) -> Result<QubitFactorization> {
    if c.dim() != 2 {
        return Err(Error::DimNotTwo(c.dim()));
    }
    let v0 = c.blocks[0].clone();
    let w = &c.blocks[1] * &v0.dagger();
    Ok(QubitFactorization {
        pre_rotation: v0,
        controlled_gate: w,
    })
}

impl QubitFactorization {
    pub fn reassemble(&self) -> ComplexMatrix {
        let p0 = ComplexMatrix::diag_real(&[1.0, 0.0]);
        let p1 = ComplexMatrix::diag_real(&[0.0, 1.0]);
        let i2 = ComplexMatrix::identity(2);
        let controlled = &kron(&p0, &i2) + &kron(&p1, &self.controlled_gate);
        &controlled * &kron(&i2, &self.pre_rotation)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frob_dist;
    use crate::povm::lueders_branch;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn usd(omega: f64) -> Povm {
        let t = omega.tan();
        let a1 = ComplexMatrix::from_real(2, 2, &[t * t / 2.0, t / 2.0, t / 2.0, 0.5]);
        let a2 = ComplexMatrix::from_real(2, 2, &[t * t / 2.0, -t / 2.0, -t / 2.0, 0.5]);
        let aq = ComplexMatrix::diag_real(&[1.0 - t * t, 0.0]);
        Povm::new(vec![("1", a1), ("2", a2), ("?", aq)], 1e-12).unwrap()
    }

    fn check_naimark(p: &Povm) {
        let nd = naive_naimark(p);
        assert_eq!(nd.isometry().rows(), p.len() * p.dim());
        assert_eq!(nd.isometry().cols(), p.dim());
        assert!(nd.isometry_residual() < 1e-12);
        for (i, e) in p.effects().iter().enumerate() {
            assert!(frob_dist(&nd.pulled_back_effect(i), e.matrix()).unwrap() < 1e-12);
        }
        assert!(is_unitary(nd.unitary_extension(), 1e-12));
        assert!(frob_dist(&nd.extension_restricted(), nd.isometry()).unwrap() < 1e-15);
    }

    #[test]
    fn naimark_projective_and_usd() {
        let p = Povm::computational_basis(2);
        check_naimark(&p);
        assert_eq!(naive_naimark(&p).dilated_dim(), 4);
        let u = usd(0.4);
        check_naimark(&u);
        assert_eq!(naive_naimark(&u).dilated_dim(), 6);
    }

    #[test]
    fn peres_counts() {
        assert_eq!(peres_dimension(&Povm::computational_basis(2), 1e-10), 2);
        assert_eq!(peres_dimension(&usd(0.4), 1e-10), 3);
        let trine: Vec<_> = (0..3)
            .map(|k| {
                let th = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
                let phi = [c(th.cos()), c(th.sin())];
                (
                    k.to_string(),
                    ComplexMatrix::projector(&phi).scale_real(2.0 / 3.0),
                )
            })
            .collect();
        let trine = Povm::new(trine, 1e-12).unwrap();
        assert_eq!(peres_dimension(&trine, 1e-10), 3);
        // A_? vanishes at pi/4
        assert_eq!(peres_dimension(&usd(std::f64::consts::FRAC_PI_4), 1e-10), 2);
    }

    #[test]
    fn circuit_for_usd_conclusive_effect() {
        let w: f64 = 0.4;
        let u = usd(w);
        let b = u.effect(2).complement("!").unwrap();
        let circ = coupling_circuit(&b).unwrap();
        // diag(tan^2 w, 1): descending order puts |1> first
        let swap = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(frob_dist(circ.basis_change(), &swap).unwrap() < 1e-15);
        let z = ComplexMatrix::diag_real(&[1.0, -1.0]);
        assert!(frob_dist(&circ.blocks()[0], &z).unwrap() < 1e-15);
        let v1 = &circ.blocks()[1];
        assert!((v1[(0, 0)] - w.tan()).norm() < 1e-15);
        assert!((v1[(1, 0)] - (1.0 - w.tan().powi(2)).sqrt()).norm() < 1e-15);
        assert!(frob_dist(&circ.effect_matrix(), b.matrix()).unwrap() < 1e-14);
    }

    #[test]
    fn circuit_for_usd_state_effect() {
        let w: f64 = 0.4;
        let u = usd(w);
        let circ = coupling_circuit(u.effect(0)).unwrap();
        let ub = ComplexMatrix::from_real(2, 2, &[w.sin(), w.cos(), w.cos(), -w.sin()]);
        assert!(frob_dist(circ.basis_change(), &ub).unwrap() < 1e-14);
        let k = 1.0 / (2f64.sqrt() * w.cos());
        let r = (2.0 * w).cos().sqrt();
        let v0 = ComplexMatrix::from_real(2, 2, &[k, k * r, k * r, -k]);
        assert!(frob_dist(&circ.blocks()[0], &v0).unwrap() < 1e-14);
    }

    #[test]
    fn half_identity_gives_hadamards() {
        let b = Effect::new("h", ComplexMatrix::identity(2).scale_real(0.5), 1e-12).unwrap();
        let circ = coupling_circuit(&b).unwrap();
        let h = ComplexMatrix::from_real(
            2,
            2,
            &[FRAC_1_SQRT_2, FRAC_1_SQRT_2, FRAC_1_SQRT_2, -FRAC_1_SQRT_2],
        );
        for blk in circ.blocks() {
            assert!(frob_dist(blk, &h).unwrap() < 1e-15);
        }
        let f = qubit_factorization(&circ).unwrap();
        assert!(frob_dist(&f.controlled_gate, &ComplexMatrix::identity(2)).unwrap() < 1e-15);
    }

    #[test]
    fn circuit_invariants_three_dim() {
        let m = ComplexMatrix::from_rows(&[
            vec![c(0.5), C64::new(0.1, 0.2), c(0.0)],
            vec![C64::new(0.1, -0.2), c(0.3), c(0.1)],
            vec![c(0.0), c(0.1), c(0.6)],
        ])
        .unwrap();
        let b = Effect::new("b", m, 1e-12).unwrap();
        let circ = coupling_circuit(&b).unwrap();
        let v = circ.assembled_v();
        assert!(is_unitary(&v, 1e-12));
        assert!(is_unitary(&circ.full_unitary(), 1e-12));
        // <0|V|0> = diag(sqrt(l)), <1|V|0> = diag(sqrt(1 - l))
        for (j, &l) in circ.eigenvalues().iter().enumerate() {
            assert!((v[(2 * j, 2 * j)].re - l.sqrt()).abs() < 1e-15);
            assert!((v[(2 * j + 1, 2 * j)].re - (1.0 - l).sqrt()).abs() < 1e-15);
        }
        assert!(frob_dist(&circ.kraus(0), b.sqrt()).unwrap() < 1e-12);
        assert!(matches!(
            qubit_factorization(&circ),
            Err(Error::DimNotTwo(3))
        ));
    }

    #[test]
    fn from_parts_rejects_bad_completions() {
        let b = Effect::new("b", ComplexMatrix::diag_real(&[0.3, 0.8]), 1e-12).unwrap();
        let circ = coupling_circuit(&b).unwrap();
        let swapped =
            circ.with_completion(|_, blk| ComplexMatrix::from_fn(2, 2, |r, col| blk[(r, 1 - col)]));
        assert!(swapped.is_err());
        let nonunitary = circ.with_completion(|_, blk| {
            ComplexMatrix::from_fn(2, 2, |r, col| {
                if col == 1 {
                    blk[(r, 1)] * 2.0
                } else {
                    blk[(r, 0)]
                }
            })
        });
        assert!(nonunitary.is_err());
    }

    #[test]
    fn coupling_matches_lueders_identity_effect() {
        let b = Effect::new("i", ComplexMatrix::identity(2), 1e-12).unwrap();
        let circ = coupling_circuit(&b).unwrap();
        let s = State::pure(&[c(0.6), C64::new(0.0, 0.8)]).unwrap();
        let (b0, b1) = apply_coupling(&circ, &s).unwrap();
        assert!((b0.weight - 1.0).abs() < 1e-15);
        assert!(frob_dist(b0.state.unwrap().matrix(), s.matrix()).unwrap() < 1e-14);
        assert!(b1.is_null());
        let three = State::maximally_mixed(3);
        assert!(apply_coupling(&circ, &three).is_err());
    }

    #[test]
    fn coupling_matches_lueders_mixed() {
        let b = Effect::new(
            "b",
            ComplexMatrix::from_rows(&[
                vec![c(0.7), C64::new(0.1, -0.25)],
                vec![C64::new(0.1, 0.25), c(0.35)],
            ])
            .unwrap(),
            1e-12,
        )
        .unwrap();
        let nb = b.complement("nb").unwrap();
        let rho = State::density(
            ComplexMatrix::from_rows(&[
                vec![c(0.4), C64::new(0.2, 0.1)],
                vec![C64::new(0.2, -0.1), c(0.6)],
            ])
            .unwrap(),
            1e-12,
        )
        .unwrap();
        let circ = coupling_circuit(&b).unwrap();
        let (b0, b1) = apply_coupling(&circ, &rho).unwrap();
        let l0 = lueders_branch(&b, &rho).unwrap();
        let l1 = lueders_branch(&nb, &rho).unwrap();
        assert!((b0.weight - l0.weight).abs() < 1e-14);
        assert!((b1.weight - l1.weight).abs() < 1e-14);
        assert!(frob_dist(b0.state.unwrap().matrix(), l0.state.unwrap().matrix()).unwrap() < 1e-13);
        assert!(frob_dist(b1.state.unwrap().matrix(), l1.state.unwrap().matrix()).unwrap() < 1e-13);
    }

    #[test]
    fn bloch_blocks() {
        let (v0, v1) = bloch_completion(1.0, 1.0).unwrap();
        assert!(frob_dist(&v0, &ComplexMatrix::diag_real(&[1.0, -1.0])).unwrap() < 1e-15);
        assert!(
            frob_dist(&v1, &ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap() < 1e-15
        );

        let t2 = 0.4f64.tan().powi(2);
        let (v0, v1) = bloch_completion(1.0 + t2, 1.0 - t2).unwrap();
        assert!(frob_dist(&v0, &ComplexMatrix::diag_real(&[1.0, -1.0])).unwrap() < 1e-15);
        assert!(is_unitary(&v1, 1e-12));

        let (v0, v1) = bloch_completion(1.0, 0.0).unwrap();
        assert_eq!(v0, v1);
        assert!((v0[(0, 1)].re - FRAC_1_SQRT_2).abs() < 1e-15);

        assert!(bloch_completion(2.5, 0.0).is_err());
        assert!(bloch_completion(1.5, 1.0).is_err());
        assert!(bloch_completion(1.0, -0.5).is_err());
    }

    #[test]
    fn bloch_completion_matches_circuit() {
        let b = Effect::new(
            "b",
            ComplexMatrix::from_rows(&[
                vec![c(0.55), C64::new(0.2, 0.1)],
                vec![C64::new(0.2, -0.1), c(0.25)],
            ])
            .unwrap(),
            1e-12,
        )
        .unwrap();
        let (alpha, vec) = bloch_parameters(&b).unwrap();
        let a = vec.iter().map(|x| x * x).sum::<f64>().sqrt();
        let (v0, v1) = bloch_completion(alpha, a).unwrap();
        let circ = coupling_circuit(&b).unwrap();
        assert!(frob_dist(&v0, &circ.blocks()[0]).unwrap() < 1e-14);
        assert!(frob_dist(&v1, &circ.blocks()[1]).unwrap() < 1e-14);
    }

    #[test]
    fn factorization_reassembles() {
        let u = usd(0.4);
        for e in [u.effect(0).clone(), u.effect(2).complement("!").unwrap()] {
            let circ = coupling_circuit(&e).unwrap();
            let f = qubit_factorization(&circ).unwrap();
            assert!(is_unitary(&f.controlled_gate, 1e-12));
            assert!(frob_dist(&f.reassemble(), &circ.assembled_v()).unwrap() < 1e-12);
        }
    }
}
