#![allow(dead_code)]

use gensic::measurements::{
    generalized_sic_depolarized, generalized_sic_simplex, perturb_outcome, random_minimal_ic,
    sic_rank_one, weyl_heisenberg_covariant,
};
use gensic::random::{ginibre, haar_ket, rng_from_seed};
use gensic::{DensityState, Operator, Povm};

pub struct ZooEntry {
    pub povm: Povm,
    /// Whether the instance was built as a generalized SIC.
    pub generalized_sic: bool,
}

fn entry(povm: Povm, generalized_sic: bool) -> ZooEntry {
    ZooEntry {
        povm,
        generalized_sic,
    }
}

/// Generalized SICs from both constructors in d = 2, 3, 4.
pub fn generalized_sics() -> Vec<Povm> {
    let sic2 = sic_rank_one(2, None).unwrap();
    let sic3 = sic_rank_one(3, None).unwrap();
    let mut out = vec![sic2.clone(), sic3.clone()];
    for x in [0.3, 0.5, 0.7, 0.9] {
        out.push(generalized_sic_depolarized(&sic2, x).unwrap());
    }
    for x in [0.4, 0.8] {
        out.push(generalized_sic_depolarized(&sic3, x).unwrap());
    }
    for (d, seeds) in [(2, 0..4), (3, 0..4), (4, 0..4)] {
        for seed in seeds {
            out.push(generalized_sic_simplex(d, seed).unwrap());
        }
    }
    out
}

/// Minimal IC measurements that are not generalized SICs.
pub fn generic_minimal() -> Vec<Povm> {
    let mut out = Vec::new();
    for (d, seeds) in [(2, 0..7), (3, 0..7), (4, 0..6)] {
        for seed in seeds {
            out.push(random_minimal_ic(d, 1000 + seed).unwrap());
        }
    }
    let gens = generalized_sics();
    for (i, g) in gens.iter().step_by(4).enumerate() {
        out.push(perturb_outcome(g, i % g.len(), 0.05, 77 + i as u64).unwrap());
    }
    for seed in 0..2 {
        let mut rng = rng_from_seed(500 + seed);
        let fid = DensityState::pure(&haar_ket(3, &mut rng)).unwrap();
        out.push(weyl_heisenberg_covariant(&fid).unwrap());
    }
    out
}

pub fn minimal_zoo() -> Vec<ZooEntry> {
    let mut zoo: Vec<ZooEntry> = generalized_sics()
        .into_iter()
        .map(|p| entry(p, true))
        .collect();
    zoo.extend(generic_minimal().into_iter().map(|p| entry(p, false)));
    zoo
}

pub fn random_hermitian(d: usize, seed: u64) -> Operator {
    let mut rng = rng_from_seed(seed);
    let g = ginibre(d, d, &mut rng);
    Operator::new((&g + g.adjoint()) * gensic::C64::new(0.5, 0.0)).unwrap()
}

pub fn random_pure(d: usize, seed: u64) -> DensityState {
    let mut rng = rng_from_seed(seed);
    DensityState::pure(&haar_ket(d, &mut rng)).unwrap()
}

/// Random full-rank state `G G† / tr(G G†)`.
pub fn random_mixed(d: usize, seed: u64) -> DensityState {
    let mut rng = rng_from_seed(seed);
    let g = ginibre(d, d, &mut rng);
    let op = Operator::new(&g * g.adjoint()).unwrap();
    DensityState::new(op.scale(1.0 / op.trace())).unwrap()
}
