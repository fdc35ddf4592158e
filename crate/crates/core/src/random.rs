//! Random test objects: Ginibre-based states, unitaries, effects and POVMs.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{complete_orthonormal, pinv_sqrt, ComplexMatrix, C64, DEFAULT_RANK_TOL};
use crate::povm::{validate_povm, Effect, Povm, State};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    ginibre(rng, dim, dim).hermitian_part()
}

pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let g = ginibre(rng, dim, dim);
    let cols: Vec<Vec<C64>> = (0..dim).map(|c| g.column(c)).collect();
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(dim);
    for col in cols {
        let mut v = col;
        for _ in 0..2 {
            for b in &basis {
                let p = crate::linalg::inner(b, &v);
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= p * y;
                }
            }
        }
        let n = crate::linalg::norm(&v);
        if n > 1e-8 {
            basis.push(v.into_iter().map(|z| z / n).collect());
        }
    }
    let basis = complete_orthonormal(&basis, dim, 1e-10);
    ComplexMatrix::from_columns(&basis)
}

pub fn random_pure_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<C64> {
    let v: Vec<C64> = (0..dim).map(|_| gaussian(rng)).collect();
    let n = crate::linalg::norm(&v);
    v.into_iter().map(|z| z / n).collect()
}

pub fn random_pure_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> State {
    State::pure(&random_pure_vector(rng, dim)).expect("normalized")
}

/// Full-rank mixed state `G G^dag / tr(G G^dag)`.
pub fn random_mixed_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> State {
    let g = ginibre(rng, dim, dim);
    let m = &g * &g.dagger();
    let tr = m.trace().re;
    State::density(m.scale_real(1.0 / tr), 1e-9).expect("Wishart matrices are states")
}

/// `U diag(l) U^dag` with `l` uniform on `[0, 1]` and Haar-ish `U`.
pub fn random_effect<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Effect {
    let u = random_unitary(rng, dim);
    let l: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
    let m = u.sandwich(&ComplexMatrix::diag_real(&l));
    Effect::new("e", m, 1e-9).expect("spectrum in [0, 1]")
}

/// `A_j = S^{-1/2} G_j^dag G_j S^{-1/2}` with `S = sum_j G_j^dag G_j`.
pub fn random_povm<R: Rng + ?Sized>(rng: &mut R, outcomes: usize, dim: usize) -> Povm {
    let raw: Vec<ComplexMatrix> = (0..outcomes)
        .map(|_| {
            let g = ginibre(rng, dim, dim);
            &g.dagger() * &g
        })
        .collect();
    let mut s = ComplexMatrix::zeros(dim, dim);
    for m in &raw {
        s = &s + m;
    }
    let norm = pinv_sqrt(&s, DEFAULT_RANK_TOL).expect("Gram sum is PSD");
    let effects = raw
        .iter()
        .enumerate()
        .map(|(j, m)| (format!("A{}", j + 1), norm.sandwich(m).hermitian_part()))
        .collect();
    validate_povm(effects, 1e-9).expect("normalized Gram matrices form a POVM")
}
