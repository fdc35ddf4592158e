//! Unambiguous discrimination of `|psi_{1,2}> = cos w |0> +- sin w |1>`
//! with equal priors, realized as a two-node measurement tree.
//!
//! Outcome indices: 0 is "1", 1 is "2", 2 is "?".

use std::f64::consts::FRAC_PI_4;
use std::fmt;
use std::str::FromStr;

use crate::dilation::{qubit_factorization, CouplingCircuit, QubitFactorization};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::povm::{Povm, State};
use crate::sequential::{plan_with_splits, MeasurementTree, Split};

pub const OUTCOME_1: usize = 0;
pub const OUTCOME_2: usize = 1;
pub const INCONCLUSIVE: usize = 2;

const BUILD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct UsdProblem {
    pub omega: f64,
    /// `1 / (2 cos^2 w)`, the smallest-inconclusive scaling.
    pub lambda: f64,
    pub psi1: Vec<C64>,
    pub psi2: Vec<C64>,
    pub perp1: Vec<C64>,
    pub perp2: Vec<C64>,
    pub povm: Povm,
}

fn real(v: &[f64]) -> Vec<C64> {
    v.iter().map(|&x| C64::new(x, 0.0)).collect()
}

/// Optimal USD POVM `{lambda P_2^perp, lambda P_1^perp, I - A_1 - A_2}`.
pub fn build_usd(omega: f64) -> Result<UsdProblem> {
    // the closed interval end is allowed up to rounding of pi/4 itself
    if !(omega > 0.0 && omega <= FRAC_PI_4 + 1e-15) {
        return Err(Error::OmegaOutOfRange(omega));
    }
    let omega = omega.min(FRAC_PI_4);
    let (s, c) = omega.sin_cos();
    let lambda = 1.0 / (2.0 * c * c);
    let psi1 = real(&[c, s]);
    let psi2 = real(&[c, -s]);
    let perp1 = real(&[s, -c]);
    let perp2 = real(&[s, c]);
    let a1 = ComplexMatrix::projector(&perp2).scale_real(lambda);
    let a2 = ComplexMatrix::projector(&perp1).scale_real(lambda);
    let aq = &(&ComplexMatrix::identity(2) - &a1) - &a2;
    let povm = Povm::new(vec![("1", a1), ("2", a2), ("?", aq)], BUILD_TOL)?;
    Ok(UsdProblem {
        omega,
        lambda,
        psi1,
        psi2,
        perp1,
        perp2,
        povm,
    })
}

impl UsdProblem {
    pub fn state(&self, input: UsdInput) -> State {
        let v = match input {
            UsdInput::Psi1 => &self.psi1,
            UsdInput::Psi2 => &self.psi2,
        };
        State::pure(v).expect("unit vectors")
    }
}

/// `p_? = cos 2w`
pub fn inconclusive_probability(omega: f64) -> f64 {
    (2.0 * omega).cos()
}

/// `p_! = 1 - cos 2w = 2 sin^2 w`
pub fn conclusive_probability(omega: f64) -> f64 {
    2.0 * omega.sin().powi(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UsdInput {
    Psi1,
    Psi2,
}

impl UsdInput {
    pub const ALL: [UsdInput; 2] = [UsdInput::Psi1, UsdInput::Psi2];

    pub fn name(self) -> &'static str {
        match self {
            UsdInput::Psi1 => "psi1",
            UsdInput::Psi2 => "psi2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    /// `{I - A_?, A_?}` first, then `{P_+, P_-}` on the conclusive branch.
    ConclusivenessFirst,
    /// `{A_1, I - A_1}` first, then the updated `{A'_2, A'_?}`.
    StateFirst,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 2] =
        [ScenarioKind::ConclusivenessFirst, ScenarioKind::StateFirst];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::ConclusivenessFirst => "conclusiveness-first",
            ScenarioKind::StateFirst => "state-first",
        }
    }

    /// Leaf layout of the tree.
    pub fn split(self) -> Split {
        match self {
            ScenarioKind::ConclusivenessFirst => Split::node(
                Split::node(Split::Leaf(OUTCOME_1), Split::Leaf(OUTCOME_2)),
                Split::Leaf(INCONCLUSIVE),
            ),
            ScenarioKind::StateFirst => Split::node(
                Split::Leaf(OUTCOME_1),
                Split::node(Split::Leaf(OUTCOME_2), Split::Leaf(INCONCLUSIVE)),
            ),
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "conclusiveness-first" => Ok(ScenarioKind::ConclusivenessFirst),
            "state-first" => Ok(ScenarioKind::StateFirst),
            other => Err(format!(
                "unknown scenario '{other}' (expected conclusiveness-first or state-first)"
            )),
        }
    }
}

#[derive(Debug, Clone)]
pub struct UsdScenario {
    pub kind: ScenarioKind,
    pub problem: UsdProblem,
    pub tree: MeasurementTree,
    /// Per node in preorder.
    pub circuits: Vec<(CouplingCircuit, QubitFactorization)>,
}

pub fn scenario(omega: f64, kind: ScenarioKind) -> Result<UsdScenario> {
    let problem = build_usd(omega)?;
    let tree = plan_with_splits(
        &problem.povm,
        &kind.split(),
        crate::linalg::DEFAULT_RANK_TOL,
    )?;
    let circuits = tree
        .nodes()
        .into_iter()
        .map(|n| Ok((n.circuit.clone(), qubit_factorization(&n.circuit)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(UsdScenario {
        kind,
        problem,
        tree,
        circuits,
    })
}

pub fn scenario_conclusiveness_first(omega: f64) -> Result<UsdScenario> {
    scenario(omega, ScenarioKind::ConclusivenessFirst)
}

pub fn scenario_state_first(omega: f64) -> Result<UsdScenario> {
    scenario(omega, ScenarioKind::StateFirst)
}

impl UsdScenario {
    pub fn root_circuit(&self) -> &CouplingCircuit {
        &self.circuits[0].0
    }

    /// Joint system-ancilla state right after the root coupling, in the
    /// eigenbasis frame of the root effect.
    pub fn premeasurement_state(&self, input: UsdInput) -> Vec<C64> {
        let psi = match input {
            UsdInput::Psi1 => &self.problem.psi1,
            UsdInput::Psi2 => &self.problem.psi2,
        };
        self.root_circuit().coupled_state_in_eigenbasis(psi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frob_dist;
    use crate::sequential::{execute_exact, Child};
    use std::f64::consts::PI;

    #[test]
    fn omega_range() {
        assert!(matches!(build_usd(0.0), Err(Error::OmegaOutOfRange(_))));
        assert!(matches!(build_usd(-0.1), Err(Error::OmegaOutOfRange(_))));
        assert!(matches!(build_usd(0.8), Err(Error::OmegaOutOfRange(_))));
        assert!(matches!(
            build_usd(f64::NAN),
            Err(Error::OmegaOutOfRange(_))
        ));
        assert!(build_usd(FRAC_PI_4).is_ok());
    }

    #[test]
    fn orthogonal_limit() {
        let u = build_usd(FRAC_PI_4).unwrap();
        assert!((u.lambda - 1.0).abs() < 1e-15);
        assert!(u.povm.effect(INCONCLUSIVE).matrix().frob_norm() < 1e-15);
        let prod = u.povm.effect(0).matrix() * u.povm.effect(1).matrix();
        assert!(prod.frob_norm() < 1e-15);
    }

    #[test]
    fn displayed_matrices() {
        let w: f64 = 0.4;
        let u = build_usd(w).unwrap();
        let t = w.tan();
        let aq = ComplexMatrix::diag_real(&[1.0 - t * t, 0.0]);
        assert!(frob_dist(u.povm.effect(INCONCLUSIVE).matrix(), &aq).unwrap() < 1e-15);
        for (j, sign) in [(OUTCOME_1, 1.0), (OUTCOME_2, -1.0)] {
            let a =
                ComplexMatrix::from_real(2, 2, &[t * t / 2.0, sign * t / 2.0, sign * t / 2.0, 0.5]);
            assert!(frob_dist(u.povm.effect(j).matrix(), &a).unwrap() < 1e-15);
        }
        let v = build_usd(PI / 6.0).unwrap();
        assert!((v.lambda - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn closed_forms() {
        assert!(inconclusive_probability(FRAC_PI_4).abs() < 1e-15);
        let w: f64 = 0.4;
        let u = build_usd(w).unwrap();
        let aq = u.povm.effect(INCONCLUSIVE);
        let avg = 0.5 * crate::born_probability(aq, &u.state(UsdInput::Psi1)).unwrap()
            + 0.5 * crate::born_probability(aq, &u.state(UsdInput::Psi2)).unwrap();
        assert!((avg - inconclusive_probability(w)).abs() < 1e-14);
        assert!((1.0 - inconclusive_probability(w) - conclusive_probability(w)).abs() < 1e-15);
    }

    #[test]
    fn scenario_shapes() {
        let a = scenario_conclusiveness_first(0.4).unwrap();
        assert_eq!(a.tree.node_count(), 2);
        assert_eq!(a.tree.root().in_cell, vec![OUTCOME_1, OUTCOME_2]);
        assert!(matches!(a.tree.root().child_out, Child::Leaf(ref l) if l.outcome == INCONCLUSIVE));
        let b = scenario_state_first(0.4).unwrap();
        assert_eq!(b.tree.root().in_cell, vec![OUTCOME_1]);
        assert_eq!(b.circuits.len(), 2);
    }

    #[test]
    fn both_scenarios_reproduce_statistics() {
        for w in [0.1, 0.4, FRAC_PI_4] {
            for kind in ScenarioKind::ALL {
                let sc = scenario(w, kind).unwrap();
                let r1 = execute_exact(&sc.tree, &sc.problem.state(UsdInput::Psi1)).unwrap();
                let r2 = execute_exact(&sc.tree, &sc.problem.state(UsdInput::Psi2)).unwrap();
                let p1 = r1.probabilities();
                let p2 = r2.probabilities();
                assert!((p1[OUTCOME_1] - conclusive_probability(w)).abs() < 1e-12);
                assert!(p1[OUTCOME_2] < 1e-12);
                assert!((p1[INCONCLUSIVE] - inconclusive_probability(w)).abs() < 1e-12);
                assert!((p2[OUTCOME_2] - conclusive_probability(w)).abs() < 1e-12);
                assert!(p2[OUTCOME_1] < 1e-12);
            }
        }
    }

    #[test]
    fn scenario_parse() {
        assert_eq!(
            "state-first".parse::<ScenarioKind>().unwrap(),
            ScenarioKind::StateFirst
        );
        assert!("both".parse::<ScenarioKind>().is_err());
    }
}
