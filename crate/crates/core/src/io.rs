//! JSON and CSV interchange formats.
//!
//! Matrices are row-major nested arrays with complex entries as `[re, im]`.

use serde::{Deserialize, Serialize};

use crate::dilation::{qubit_factorization, CouplingCircuit};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::povm::{validate_povm, Povm, State};
use crate::sequential::{Child, MeasurementTree, OutcomeReport, TreeNode, VerifyReport};

pub type MatrixDoc = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_doc(m: &ComplexMatrix) -> MatrixDoc {
    m.to_rows()
        .into_iter()
        .map(|row| row.into_iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

pub fn matrix_from_doc(doc: &MatrixDoc) -> Result<ComplexMatrix> {
    let rows: Vec<Vec<C64>> = doc
        .iter()
        .map(|r| r.iter().map(|&[re, im]| C64::new(re, im)).collect())
        .collect();
    ComplexMatrix::from_rows(&rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectDoc {
    pub label: String,
    pub matrix: MatrixDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PovmDoc {
    pub dim: usize,
    pub effects: Vec<EffectDoc>,
}

impl PovmDoc {
    pub fn from_povm(p: &Povm) -> Self {
        Self {
            dim: p.dim(),
            effects: p
                .effects()
                .iter()
                .map(|e| EffectDoc {
                    label: e.label().to_string(),
                    matrix: matrix_to_doc(e.matrix()),
                })
                .collect(),
        }
    }

    pub fn into_povm(self, tol: f64) -> Result<Povm> {
        let mut effects = Vec::with_capacity(self.effects.len());
        for e in self.effects {
            let m = matrix_from_doc(&e.matrix)?;
            if m.rows() != self.dim || m.cols() != self.dim {
                return Err(Error::dims(
                    format!("{0}x{0} (declared dim)", self.dim),
                    format!("{}x{} for effect '{}'", m.rows(), m.cols(), e.label),
                ));
            }
            effects.push((e.label, m));
        }
        validate_povm(effects, tol)
    }
}

pub fn parse_povm_doc(json: &str) -> Result<PovmDoc> {
    Ok(serde_json::from_str(json)?)
}

pub fn parse_povm(json: &str, tol: f64) -> Result<Povm> {
    parse_povm_doc(json)?.into_povm(tol)
}

/// `{"dim": d, "pure": [[re, im], ...]}` or `{"dim": d, "density": matrix}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateDoc {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pure: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<MatrixDoc>,
}

impl StateDoc {
    pub fn into_state(self, tol: f64) -> Result<State> {
        match (self.pure, self.density) {
            (Some(v), None) => {
                if v.len() != self.dim {
                    return Err(Error::dims(self.dim, v.len()));
                }
                let psi: Vec<C64> = v.iter().map(|&[re, im]| C64::new(re, im)).collect();
                State::pure(&psi)
            }
            (None, Some(m)) => {
                let m = matrix_from_doc(&m)?;
                if m.rows() != self.dim || m.cols() != self.dim {
                    return Err(Error::dims(self.dim, format!("{}x{}", m.rows(), m.cols())));
                }
                State::density(m, tol)
            }
            _ => Err(Error::Parse(
                "state document needs exactly one of \"pure\" or \"density\"".into(),
            )),
        }
    }
}

pub fn parse_state(json: &str, tol: f64) -> Result<State> {
    let doc: StateDoc = serde_json::from_str(json)?;
    doc.into_state(tol)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizedDoc {
    pub v0: MatrixDoc,
    pub w: MatrixDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitDoc {
    pub basis_change: MatrixDoc,
    pub blocks: Vec<MatrixDoc>,
    pub factorized: Option<FactorizedDoc>,
}

impl CircuitDoc {
    pub fn from_circuit(c: &CouplingCircuit) -> Self {
        Self {
            basis_change: matrix_to_doc(c.basis_change()),
            blocks: c.blocks().iter().map(matrix_to_doc).collect(),
            factorized: qubit_factorization(c).ok().map(|f| FactorizedDoc {
                v0: matrix_to_doc(&f.pre_rotation),
                w: matrix_to_doc(&f.controlled_gate),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeafDoc {
    pub leaf: usize,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChildDoc {
    Leaf(LeafDoc),
    Node(Box<NodeDoc>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeDoc {
    pub id: usize,
    pub cell: Vec<usize>,
    pub in_cell: Vec<usize>,
    pub effect: MatrixDoc,
    /// Index into [`TreeDoc::circuits`].
    pub circuit: usize,
    #[serde(rename = "in")]
    pub child_in: ChildDoc,
    #[serde(rename = "out")]
    pub child_out: ChildDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeDoc {
    pub dim: usize,
    pub strategy: Option<String>,
    pub outcomes: Vec<String>,
    pub depth: usize,
    pub node_count: usize,
    pub root: NodeDoc,
    pub circuits: Vec<CircuitDoc>,
}

impl TreeDoc {
    pub fn from_tree(t: &MeasurementTree) -> Self {
        fn node(n: &TreeNode) -> NodeDoc {
            let child = |c: &Child| match c {
                Child::Leaf(l) => ChildDoc::Leaf(LeafDoc {
                    leaf: l.outcome,
                    label: l.label.clone(),
                }),
                Child::Node(m) => ChildDoc::Node(Box::new(node(m))),
            };
            NodeDoc {
                id: n.id,
                cell: n.cell.clone(),
                in_cell: n.in_cell.clone(),
                effect: matrix_to_doc(n.effect.matrix()),
                circuit: n.id,
                child_in: child(&n.child_in),
                child_out: child(&n.child_out),
            }
        }
        Self {
            dim: t.dim(),
            strategy: t.strategy().map(|s| s.to_string()),
            outcomes: t.labels().to_vec(),
            depth: t.depth(),
            node_count: t.node_count(),
            root: node(t.root()),
            circuits: t
                .nodes()
                .iter()
                .map(|n| CircuitDoc::from_circuit(&n.circuit))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDoc {
    pub index: usize,
    pub label: String,
    pub exact_p: f64,
    pub empirical_count: Option<u64>,
    pub path: Vec<usize>,
    pub post_state: Option<MatrixDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyDoc {
    pub trials: usize,
    pub max_deviation: f64,
    pub tol: f64,
    pub pass: bool,
}

impl From<&VerifyReport> for VerifyDoc {
    fn from(v: &VerifyReport) -> Self {
        Self {
            trials: v.trials,
            max_deviation: v.max_deviation,
            tol: v.tol,
            pass: v.pass(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDoc {
    pub shots: Option<u64>,
    pub outcomes: Vec<OutcomeDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyDoc>,
}

impl ReportDoc {
    pub fn new(r: &OutcomeReport, verify: Option<&VerifyReport>) -> Self {
        Self {
            shots: r.shots,
            outcomes: r
                .outcomes
                .iter()
                .map(|o| OutcomeDoc {
                    index: o.outcome,
                    label: o.label.clone(),
                    exact_p: o.exact_probability,
                    empirical_count: o.empirical_count,
                    path: o.path.clone(),
                    post_state: o.post_state.as_ref().map(|s| matrix_to_doc(s.matrix())),
                })
                .collect(),
            verify: verify.map(VerifyDoc::from),
        }
    }
}

/// Fixed 15 significant digits, `.` decimal separator, no locale. Values
/// with magnitude outside `[1e-5, 1e15)` use exponent notation.
pub fn format_sig15(x: f64) -> String {
    if x == 0.0 {
        return format!("{:.14}", 0.0);
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.14e}");
    let exp: i32 = sci[sci.find('e').expect("exponent") + 1..]
        .parse()
        .expect("integer exponent");
    if (-5..15).contains(&exp) {
        let decimals = (14 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        sci
    }
}

pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// `outcome_label,exact_p,empirical_count,shots`; the last two columns are
/// empty without sampling.
pub fn report_csv(r: &OutcomeReport) -> String {
    let mut out = String::from("outcome_label,exact_p,empirical_count,shots\n");
    let shots = r.shots.map(|s| s.to_string()).unwrap_or_default();
    for o in &r.outcomes {
        let count = o.empirical_count.map(|c| c.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{}\n",
            csv_field(&o.label),
            format_sig15(o.exact_probability),
            count,
            shots
        ));
    }
    out
}
