//! Measurement trees: an n-outcome POVM as nested two-outcome Lüders
//! measurements, each realized by a [`CouplingCircuit`].
//!
//! A node measures `{B, I - B}` where `B` is the sum of the (conditionally
//! updated) effects of the outcomes routed to its `in` child. Ancilla outcome
//! 0 takes the `in` branch. Children see effects updated by
//! `B^{-1/2} A_j B^{-1/2}`, so probabilities multiply out to `tr(A_j rho)`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dilation::{apply_coupling, coupling_circuit, CouplingCircuit};
use crate::error::{Error, Result};
use crate::linalg::{frob_dist, ComplexMatrix, DEFAULT_RANK_TOL};
use crate::povm::{born_probability, Effect, Povm, State, SubPovm};
use crate::random::{random_mixed_state, random_pure_state};

/// Tolerance for the build-time check that a node circuit realizes its `B`.
const NODE_CHECK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Chain `{A_j, I - A_j}` for `j = 1, 2, ...`.
    OutcomeDecreasing,
    /// Halve the remaining outcomes at every node.
    BinarySearch,
}

impl FromStr for Strategy {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "outcome-decreasing" => Ok(Strategy::OutcomeDecreasing),
            "binary-search" => Ok(Strategy::BinarySearch),
            other => Err(format!(
                "unknown strategy '{other}' (expected outcome-decreasing or binary-search)"
            )),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::OutcomeDecreasing => "outcome-decreasing",
            Strategy::BinarySearch => "binary-search",
        })
    }
}

/// Shape of a measurement tree over outcome indices, before any operators
/// are attached.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Split {
    Leaf(usize),
    Node(Box<Split>, Box<Split>),
}

impl Split {
    pub fn node(inside: Split, outside: Split) -> Self {
        Split::Node(Box::new(inside), Box::new(outside))
    }

    /// Outcomes in left-to-right leaf order.
    pub fn outcomes(&self) -> Vec<usize> {
        match self {
            Split::Leaf(j) => vec![*j],
            Split::Node(a, b) => {
                let mut v = a.outcomes();
                v.extend(b.outcomes());
                v
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Split::Leaf(_) => 0,
            Split::Node(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// `{order[0]}` vs rest, then `{order[1]}` vs rest, ...
    pub fn outcome_decreasing(order: &[usize]) -> Self {
        match order {
            [] => panic!("empty outcome order"),
            [j] => Split::Leaf(*j),
            [j, rest @ ..] => Split::node(Split::Leaf(*j), Split::outcome_decreasing(rest)),
        }
    }

    /// First `ceil(k/2)` outcomes vs the remainder, recursively.
    pub fn binary_search(cell: &[usize]) -> Self {
        match cell {
            [] => panic!("empty outcome cell"),
            [j] => Split::Leaf(*j),
            _ => {
                let mid = cell.len().div_ceil(2);
                Split::node(
                    Split::binary_search(&cell[..mid]),
                    Split::binary_search(&cell[mid..]),
                )
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Leaf {
    pub outcome: usize,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Child {
    Leaf(Leaf),
    Node(Box<TreeNode>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    /// Preorder index, root is 0.
    pub id: usize,
    /// Outcomes below this node, `in` outcomes first.
    pub cell: Vec<usize>,
    /// Outcomes routed to `child_in`.
    pub in_cell: Vec<usize>,
    /// `B` in the full space.
    pub effect: Effect,
    /// Projector onto the subspace the incoming state is supported on.
    pub range_projector: ComplexMatrix,
    pub circuit: CouplingCircuit,
    /// Taken on ancilla outcome 0 (`B` happened).
    pub child_in: Child,
    /// Taken on ancilla outcome 1.
    pub child_out: Child,
}

impl TreeNode {
    fn visit<'a>(&'a self, f: &mut impl FnMut(&'a TreeNode)) {
        f(self);
        for c in [&self.child_in, &self.child_out] {
            if let Child::Node(n) = c {
                n.visit(f);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementTree {
    dim: usize,
    labels: Vec<String>,
    root: TreeNode,
    node_count: usize,
    strategy: Option<Strategy>,
}

impl MeasurementTree {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn outcome_count(&self) -> usize {
        self.labels.len()
    }

    pub fn root(&self) -> &TreeNode {
        &self.root
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn strategy(&self) -> Option<Strategy> {
        self.strategy
    }

    /// Longest root-to-leaf node count.
    pub fn depth(&self) -> usize {
        fn go(c: &Child) -> usize {
            match c {
                Child::Leaf(_) => 0,
                Child::Node(n) => 1 + go(&n.child_in).max(go(&n.child_out)),
            }
        }
        1 + go(&self.root.child_in).max(go(&self.root.child_out))
    }

    /// Nodes in preorder, so `nodes()[k].id == k`.
    pub fn nodes(&self) -> Vec<&TreeNode> {
        let mut out = Vec::with_capacity(self.node_count);
        self.root.visit(&mut |n| out.push(n));
        out
    }

    /// Node ids on the way to each outcome's leaf, indexed by outcome.
    pub fn paths(&self) -> Vec<Vec<usize>> {
        let mut paths = vec![Vec::new(); self.outcome_count()];
        fn go(n: &TreeNode, prefix: &mut Vec<usize>, paths: &mut [Vec<usize>]) {
            prefix.push(n.id);
            for c in [&n.child_in, &n.child_out] {
                match c {
                    Child::Leaf(l) => paths[l.outcome] = prefix.clone(),
                    Child::Node(m) => go(m, prefix, paths),
                }
            }
            prefix.pop();
        }
        go(&self.root, &mut Vec::new(), &mut paths);
        paths
    }
}

pub fn plan(p: &Povm, strategy: Strategy) -> Result<MeasurementTree> {
    match strategy {
        Strategy::OutcomeDecreasing => plan_outcome_decreasing(p),
        Strategy::BinarySearch => plan_binary_search(p),
    }
}

pub fn plan_outcome_decreasing(p: &Povm) -> Result<MeasurementTree> {
    let order: Vec<usize> = (0..p.len()).collect();
    plan_outcome_decreasing_with_order(p, &order)
}

/// Outcome-decreasing chain testing outcomes in the given order. `order`
/// must be a permutation of `0..n`.
pub fn plan_outcome_decreasing_with_order(p: &Povm, order: &[usize]) -> Result<MeasurementTree> {
    if p.len() < 2 {
        return Err(Error::TooFewOutcomes(p.len()));
    }
    check_cover(order, p.len())?;
    let mut t = plan_with_splits(p, &Split::outcome_decreasing(order), DEFAULT_RANK_TOL)?;
    t.strategy = Some(Strategy::OutcomeDecreasing);
    Ok(t)
}

pub fn plan_binary_search(p: &Povm) -> Result<MeasurementTree> {
    if p.len() < 2 {
        return Err(Error::TooFewOutcomes(p.len()));
    }
    let cell: Vec<usize> = (0..p.len()).collect();
    let mut t = plan_with_splits(p, &Split::binary_search(&cell), DEFAULT_RANK_TOL)?;
    t.strategy = Some(Strategy::BinarySearch);
    Ok(t)
}

fn check_cover(outcomes: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for &j in outcomes {
        if j >= n || std::mem::replace(&mut seen[j], true) {
            return Err(Error::BadPartition(format!(
                "outcome order {outcomes:?} is not a permutation of 0..{n}"
            )));
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::BadPartition(format!(
            "outcome order {outcomes:?} is not a permutation of 0..{n}"
        )));
    }
    Ok(())
}

/// Builds a tree of arbitrary shape. Every outcome must appear at exactly
/// one leaf.
pub fn plan_with_splits(p: &Povm, split: &Split, rank_tol: f64) -> Result<MeasurementTree> {
    if p.len() < 2 {
        return Err(Error::TooFewOutcomes(p.len()));
    }
    check_cover(&split.outcomes(), p.len())?;
    let Split::Node(inside, outside) = split else {
        return Err(Error::TooFewOutcomes(1));
    };
    let mut next_id = 0;
    let root = build_node(&SubPovm::from(p), inside, outside, rank_tol, &mut next_id)?;
    Ok(MeasurementTree {
        dim: p.dim(),
        labels: p.labels(),
        root,
        node_count: next_id,
        strategy: None,
    })
}

fn build_node(
    sub: &SubPovm,
    inside: &Split,
    outside: &Split,
    rank_tol: f64,
    next_id: &mut usize,
) -> Result<TreeNode> {
    let id = *next_id;
    *next_id += 1;

    let in_cell = inside.outcomes();
    let out_cell = outside.outcomes();
    let b = sub.coarse_effect(&in_cell)?;
    let label = in_cell
        .iter()
        .map(|&j| sub.effect_for(j).map_or("", |e| e.label()))
        .collect::<Vec<_>>()
        .join("+");
    let effect = Effect::derived(label, &b)?;
    let circuit = coupling_circuit(&effect)?;
    let realized = frob_dist(&circuit.effect_matrix(), &b)?;
    if realized > NODE_CHECK_TOL {
        return Err(Error::InvalidCircuit(format!(
            "node {id} circuit realizes B only to {realized:.3e}"
        )));
    }

    let mut child = |split: &Split, cell: &[usize]| -> Result<Child> {
        Ok(match split {
            Split::Leaf(j) => Child::Leaf(Leaf {
                outcome: *j,
                label: sub
                    .effect_for(*j)
                    .map(|e| e.label().to_string())
                    .unwrap_or_default(),
            }),
            Split::Node(a, c) => {
                let updated = sub.conditional_update(cell, rank_tol)?;
                Child::Node(Box::new(build_node(&updated, a, c, rank_tol, next_id)?))
            }
        })
    };
    let child_in = child(inside, &in_cell)?;
    let child_out = child(outside, &out_cell)?;

    let mut cell = in_cell.clone();
    cell.extend(&out_cell);
    Ok(TreeNode {
        id,
        cell,
        in_cell,
        effect,
        range_projector: sub.range_projector().clone(),
        circuit,
        child_in,
        child_out,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeRecord {
    pub outcome: usize,
    pub label: String,
    pub exact_probability: f64,
    /// `None` when the outcome is unreachable from this input.
    pub post_state: Option<State>,
    /// Node ids from the root to the leaf.
    pub path: Vec<usize>,
    pub empirical_count: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeReport {
    /// Indexed by outcome.
    pub outcomes: Vec<OutcomeRecord>,
    pub shots: Option<u64>,
}

impl OutcomeReport {
    pub fn probabilities(&self) -> Vec<f64> {
        self.outcomes.iter().map(|o| o.exact_probability).collect()
    }

    pub fn counts(&self) -> Option<Vec<u64>> {
        self.outcomes.iter().map(|o| o.empirical_count).collect()
    }

    pub fn frequency(&self, outcome: usize) -> Option<f64> {
        let shots = self.shots?;
        Some(self.outcomes[outcome].empirical_count? as f64 / shots as f64)
    }
}

/// Exact traversal plus the conditional branch probabilities of every node,
/// which sampling reuses.
#[derive(Debug, Clone)]
pub struct ExactRun {
    pub report: OutcomeReport,
    /// `[P(in), P(out)]` per node id, conditioned on reaching the node.
    pub branch_weights: Vec<[f64; 2]>,
}

pub fn execute_exact(t: &MeasurementTree, s: &State) -> Result<OutcomeReport> {
    Ok(run_exact(t, s)?.report)
}

pub fn run_exact(t: &MeasurementTree, s: &State) -> Result<ExactRun> {
    if s.dim() != t.dim {
        return Err(Error::dims(t.dim, s.dim()));
    }
    let paths = t.paths();
    let mut outcomes: Vec<OutcomeRecord> = t
        .labels
        .iter()
        .enumerate()
        .map(|(j, l)| OutcomeRecord {
            outcome: j,
            label: l.clone(),
            exact_probability: 0.0,
            post_state: None,
            path: paths[j].clone(),
            empirical_count: None,
        })
        .collect();
    let mut branch_weights = vec![[0.0, 0.0]; t.node_count];
    descend_exact(
        &t.root,
        Some(s.clone()),
        1.0,
        &mut outcomes,
        &mut branch_weights,
    )?;
    Ok(ExactRun {
        report: OutcomeReport {
            outcomes,
            shots: None,
        },
        branch_weights,
    })
}

fn descend_exact(
    node: &TreeNode,
    state: Option<State>,
    weight: f64,
    outcomes: &mut [OutcomeRecord],
    branch_weights: &mut [[f64; 2]],
) -> Result<()> {
    let branches = match &state {
        Some(s) => {
            let (b0, b1) = apply_coupling(&node.circuit, s)?;
            branch_weights[node.id] = [b0.weight, b1.weight];
            [(b0.weight, b0.state), (b1.weight, b1.state)]
        }
        None => [(0.0, None), (0.0, None)],
    };
    for ((w, st), child) in branches.into_iter().zip([&node.child_in, &node.child_out]) {
        let reach = if st.is_some() { weight * w } else { 0.0 };
        match child {
            Child::Leaf(l) => {
                outcomes[l.outcome].exact_probability = reach;
                outcomes[l.outcome].post_state = st;
            }
            Child::Node(n) => descend_exact(n, st, reach, outcomes, branch_weights)?,
        }
    }
    Ok(())
}

/// One stochastic descent. Returns the leaf outcome and the node ids
/// visited; the descent stops at the first leaf.
pub fn sample_shot<R: Rng + ?Sized>(
    t: &MeasurementTree,
    run: &ExactRun,
    rng: &mut R,
) -> (usize, Vec<usize>) {
    let mut node = &t.root;
    let mut visited = Vec::new();
    loop {
        visited.push(node.id);
        let [w_in, w_out] = run.branch_weights[node.id];
        let total = w_in + w_out;
        let take_in = total <= 0.0 || rng.random::<f64>() * total < w_in;
        let next = if take_in {
            &node.child_in
        } else {
            &node.child_out
        };
        match next {
            Child::Leaf(l) => return (l.outcome, visited),
            Child::Node(n) => node = n,
        }
    }
}

/// Generator for shot `index`: the ChaCha8 stream `index` under `seed`, so
/// every shot's randomness is independent of how shots are grouped.
pub fn shot_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn sample(t: &MeasurementTree, s: &State, shots: u64, seed: u64) -> Result<OutcomeReport> {
    sample_with_workers(t, s, shots, seed, rayon::current_num_threads())
}

/// Splits `shots` into `workers` contiguous ranges sampled in parallel.
/// The merged counts depend only on `(seed, shots)`.
pub fn sample_with_workers(
    t: &MeasurementTree,
    s: &State,
    shots: u64,
    seed: u64,
    workers: usize,
) -> Result<OutcomeReport> {
    if shots == 0 {
        return Err(Error::InvalidState("shots must be at least 1".into()));
    }
    let run = run_exact(t, s)?;
    let n = t.outcome_count();
    let workers = workers.max(1) as u64;
    let chunk = shots.div_ceil(workers);
    let counts = (0..workers)
        .into_par_iter()
        .map(|w| {
            let mut local = vec![0u64; n];
            let start = w * chunk;
            let end = (start + chunk).min(shots);
            for i in start..end {
                let (j, _) = sample_shot(t, &run, &mut shot_rng(seed, i));
                local[j] += 1;
            }
            local
        })
        .reduce(
            || vec![0u64; n],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    let mut report = run.report;
    for (rec, c) in report.outcomes.iter_mut().zip(counts) {
        rec.empirical_count = Some(c);
    }
    report.shots = Some(shots);
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub trials: usize,
    pub max_deviation: f64,
    pub worst_outcome: usize,
    pub tol: f64,
}

impl VerifyReport {
    pub fn pass(&self) -> bool {
        self.max_deviation < self.tol
    }
}

pub const VERIFY_SEED: u64 = 0x5eed;

/// Compares tree probabilities with `tr(A_j rho)` on random states,
/// alternating pure and full-rank mixed inputs.
pub fn verify_tree(t: &MeasurementTree, p: &Povm, trials: usize, tol: f64) -> Result<VerifyReport> {
    verify_tree_seeded(t, p, trials, tol, VERIFY_SEED)
}

pub fn verify_tree_seeded(
    t: &MeasurementTree,
    p: &Povm,
    trials: usize,
    tol: f64,
    seed: u64,
) -> Result<VerifyReport> {
    if p.dim() != t.dim || p.len() != t.outcome_count() {
        return Err(Error::dims(
            format!("{} outcomes on dim {}", t.outcome_count(), t.dim),
            format!("{} outcomes on dim {}", p.len(), p.dim()),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_deviation = 0.0f64;
    let mut worst_outcome = 0;
    for trial in 0..trials {
        let rho = if trial % 2 == 0 {
            random_pure_state(&mut rng, p.dim())
        } else {
            random_mixed_state(&mut rng, p.dim())
        };
        let report = execute_exact(t, &rho)?;
        for (j, e) in p.effects().iter().enumerate() {
            let dev = (report.outcomes[j].exact_probability - born_probability(e, &rho)?).abs();
            if dev > max_deviation {
                max_deviation = dev;
                worst_outcome = j;
            }
        }
    }
    Ok(VerifyReport {
        trials,
        max_deviation,
        worst_outcome,
        tol,
    })
}
