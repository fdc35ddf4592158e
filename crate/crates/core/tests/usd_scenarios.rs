use std::f64::consts::{FRAC_PI_4, PI};

use seqpovm::linalg::{inner, is_unitary, kron_vec, DEFAULT_RANK_TOL};
use seqpovm::usd::{
    build_usd, conclusive_probability, inconclusive_probability, scenario,
    scenario_conclusiveness_first, scenario_state_first, ScenarioKind, UsdInput, INCONCLUSIVE,
    OUTCOME_1, OUTCOME_2,
};
use seqpovm::{
    apply_coupling, conditional_update, execute_exact, Branch, ComplexMatrix, State, C64,
};

const GRID: [f64; 7] = [0.05, 0.1, 0.2, 0.3, 0.4, 0.6, 0.75];

fn real(v: &[f64]) -> Vec<C64> {
    v.iter().map(|&x| C64::new(x, 0.0)).collect()
}

fn overlap(a: &[C64], b: &[C64]) -> f64 {
    inner(a, b).norm_sqr()
}

fn rot(c: f64, s: f64) -> ComplexMatrix {
    ComplexMatrix::from_real(2, 2, &[c, -s, s, c])
}

fn gap(a: &Branch, b: &Branch) -> f64 {
    let s = match (&a.state, &b.state) {
        (Some(x), Some(y)) => x.matrix().max_abs_diff(y.matrix()),
        (None, None) => 0.0,
        _ => f64::INFINITY,
    };
    (a.weight - b.weight).abs().max(s)
}

#[test]
fn scenarios_agree_on_statistics() {
    for w in GRID.into_iter().chain([PI / 6.0, FRAC_PI_4]) {
        let a = scenario_conclusiveness_first(w).unwrap();
        let b = scenario_state_first(w).unwrap();
        for input in UsdInput::ALL {
            let rho = a.problem.state(input);
            let pa = execute_exact(&a.tree, &rho).unwrap().probabilities();
            let pb = execute_exact(&b.tree, &rho).unwrap().probabilities();
            for (x, y) in pa.iter().zip(&pb) {
                assert!((x - y).abs() < 1e-10, "w={w} {input:?}");
            }
            assert!((pa[INCONCLUSIVE] - inconclusive_probability(w)).abs() < 1e-12);
            let right = if input == UsdInput::Psi1 {
                OUTCOME_1
            } else {
                OUTCOME_2
            };
            assert!((pa[right] - conclusive_probability(w)).abs() < 1e-12);
        }
    }
}

#[test]
fn conclusiveness_first_blocks() {
    for w in GRID {
        let sc = scenario_conclusiveness_first(w).unwrap();
        let c = sc.root_circuit();
        let t = w.tan();
        let sz = ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(c.blocks()[0].max_abs_diff(&sz) < 1e-14);
        let v1 = &c.blocks()[1];
        assert!((v1[(0, 0)].re - t).abs() < 1e-14);
        assert!((v1[(1, 0)].re - (1.0 - t * t).sqrt()).abs() < 1e-14);

        // displayed rotation completion
        let shown = rot(t, (1.0 - t * t).sqrt());
        let alt = c
            .with_completion(|j, b| if j == 1 { shown.clone() } else { b.clone() })
            .unwrap();
        for input in UsdInput::ALL {
            let rho = sc.problem.state(input);
            let (a0, a1) = apply_coupling(c, &rho).unwrap();
            let (b0, b1) = apply_coupling(&alt, &rho).unwrap();
            assert!(gap(&a0, &b0) < 1e-12 && gap(&a1, &b1) < 1e-12);
        }
        assert!(is_unitary(&sc.circuits[0].1.reassemble(), 1e-12));
    }
}

#[test]
fn inconclusive_post_state_is_shared() {
    let zero = real(&[1.0, 0.0]);
    let one = real(&[0.0, 1.0]);
    for w in GRID {
        let sc = scenario_conclusiveness_first(w).unwrap();
        let u_b = sc.root_circuit().basis_change();
        for input in UsdInput::ALL {
            let (_, inconclusive) =
                apply_coupling(sc.root_circuit(), &sc.problem.state(input)).unwrap();
            assert!((inconclusive.weight - inconclusive_probability(w)).abs() < 1e-12);
            let st = inconclusive.state.unwrap();
            // lab frame |0>, which the eigenbasis rotation maps to |1>
            assert!((st.fidelity_with_pure(&zero) - 1.0).abs() < 1e-10);
            let rotated = State::density(u_b.sandwich(st.matrix()), 1e-9).unwrap();
            assert!((rotated.fidelity_with_pure(&one) - 1.0).abs() < 1e-10);
        }
    }
}

#[test]
fn state_first_circuit_matches_display() {
    for w in GRID {
        let sc = scenario_state_first(w).unwrap();
        let (s, c) = w.sin_cos();
        let c2 = (2.0 * w).cos();
        let circuit = sc.root_circuit();

        // rows agree with |0><psi2_perp| + |1><psi2| up to phases
        let shown = ComplexMatrix::from_real(2, 2, &[s, c, c, -s]);
        for r in 0..2 {
            assert!((overlap(&circuit.basis_change().row(r), &shown.row(r)) - 1.0).abs() < 1e-12);
        }

        let v0 = ComplexMatrix::from_real(2, 2, &[1.0, c2.sqrt(), c2.sqrt(), -1.0])
            .scale_real(1.0 / (2f64.sqrt() * c));
        assert!(circuit.blocks()[0].max_abs_diff(&v0) < 1e-14);
        let minus_i_sy = rot(0.0, 1.0);
        assert!(
            circuit.blocks()[1]
                .submatrix(0, 0, 2, 1)
                .max_abs_diff(&minus_i_sy.submatrix(0, 0, 2, 1))
                < 1e-14
        );
        let alt = circuit
            .with_completion(|j, b| {
                if j == 1 {
                    minus_i_sy.clone()
                } else {
                    b.clone()
                }
            })
            .unwrap();
        for input in UsdInput::ALL {
            let rho = sc.problem.state(input);
            let (a0, a1) = apply_coupling(circuit, &rho).unwrap();
            let (b0, b1) = apply_coupling(&alt, &rho).unwrap();
            assert!(gap(&a0, &b0) < 1e-12 && gap(&a1, &b1) < 1e-12);
        }
    }
}

#[test]
fn state_first_premeasurement_states() {
    for w in GRID {
        let sc = scenario_state_first(w).unwrap();
        let (s2, c2) = (2f64.sqrt() * w.sin(), (2.0 * w).cos().sqrt());

        let psi2 = sc.premeasurement_state(UsdInput::Psi2);
        let one_one = real(&[0.0, 0.0, 0.0, 1.0]);
        assert!((overlap(&psi2, &one_one) - 1.0).abs() < 1e-10);

        // this displayed state writes the ancilla as the first tensor factor
        let ancilla_first = [s2, 0.0, s2 * c2, c2 * c2];
        let sys_first = real(&[
            ancilla_first[0],
            ancilla_first[2],
            ancilla_first[1],
            ancilla_first[3],
        ]);
        let psi1 = sc.premeasurement_state(UsdInput::Psi1);
        assert!((overlap(&psi1, &sys_first) - 1.0).abs() < 1e-10, "w={w}");
    }
}

#[test]
fn state_first_branches() {
    for w in GRID {
        let sc = scenario_state_first(w).unwrap();
        let (s, c) = w.sin_cos();
        let (s2, c2) = (2f64.sqrt() * s, (2.0 * w).cos().sqrt());
        let u_b = ComplexMatrix::from_real(2, 2, &[s, c, c, -s]);

        let (one, one_prime) =
            apply_coupling(sc.root_circuit(), &sc.problem.state(UsdInput::Psi1)).unwrap();
        assert!((one.weight - conclusive_probability(w)).abs() < 1e-12);
        // Lüders update by A_1 = lambda P_2^perp leaves |psi_2^perp>
        assert!((one.state.unwrap().fidelity_with_pure(&sc.problem.perp2) - 1.0).abs() < 1e-10);
        let tilde = u_b.dagger().matvec(&real(&[s2, c2]));
        assert!((one_prime.state.unwrap().fidelity_with_pure(&tilde) - 1.0).abs() < 1e-10);

        let (none, all) =
            apply_coupling(sc.root_circuit(), &sc.problem.state(UsdInput::Psi2)).unwrap();
        assert!(none.weight < 1e-12 && none.is_null());
        assert!((all.weight - 1.0).abs() < 1e-12);
        assert!((all.state.unwrap().fidelity_with_pure(&sc.problem.psi2) - 1.0).abs() < 1e-10);
    }
}

#[test]
fn updated_measurement_closed_form() {
    for w in GRID {
        let u = build_usd(w).unwrap();
        let l = u.lambda;
        let p2 = ComplexMatrix::projector(&u.psi2);
        let p2_perp = ComplexMatrix::projector(&u.perp2);
        let p1_perp = ComplexMatrix::projector(&u.perp1);
        let k = &p2 + &p2_perp.scale_real(1.0 / (1.0 - l).sqrt());
        let shown = (&k * &p1_perp.scale_real(l)).try_mul(&k).unwrap();
        let sub =
            conditional_update(&u.povm, &[OUTCOME_2, INCONCLUSIVE], DEFAULT_RANK_TOL).unwrap();
        assert!(
            sub.effect_for(OUTCOME_2)
                .unwrap()
                .matrix()
                .max_abs_diff(&shown)
                < 1e-12
        );
        let p = inner(&u.psi2, &shown.matvec(&u.psi2)).re;
        assert!((p - conclusive_probability(w)).abs() < 1e-12);
        let (sn, cs) = w.sin_cos();
        let u_b = ComplexMatrix::from_real(2, 2, &[sn, cs, cs, -sn]);
        let tilde = u_b
            .dagger()
            .matvec(&real(&[2f64.sqrt() * sn, (2.0 * w).cos().sqrt()]));
        let a2 = sub.effect_for(OUTCOME_2).unwrap().matrix();
        assert!(inner(&tilde, &a2.matvec(&tilde)).norm() < 1e-12);
    }
}

#[test]
fn orthogonal_limit_runs() {
    for kind in ScenarioKind::ALL {
        let sc = scenario(FRAC_PI_4, kind).unwrap();
        let r = execute_exact(&sc.tree, &sc.problem.state(UsdInput::Psi1)).unwrap();
        assert!((r.outcomes[OUTCOME_1].exact_probability - 1.0).abs() < 1e-12);
        assert!(r.outcomes[INCONCLUSIVE].exact_probability.abs() < 1e-12);
        assert!(r.outcomes[INCONCLUSIVE].post_state.is_none());
    }
}

#[test]
fn conclusive_premeasurement_lab_frame() {
    // lab-frame joint state U (psi (x) |0>) has the same ancilla marginals
    let w = 0.4;
    let sc = scenario_conclusiveness_first(w).unwrap();
    let lab = sc.root_circuit().coupled_state(&sc.problem.psi1);
    let p_anc0: f64 = [0, 2].iter().map(|&i| lab[i].norm_sqr()).sum();
    assert!((p_anc0 - conclusive_probability(w)).abs() < 1e-12);
    let product = kron_vec(&sc.problem.psi1, &real(&[1.0, 0.0]));
    assert!(overlap(&lab, &product) < 1.0);
}
