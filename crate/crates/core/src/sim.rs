//! Monte Carlo tomography with the linear estimator `ρ̂ = Σ_j f_j Θ_j`.

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measurements::{purity_report, Povm};
use crate::opspace::{DensityState, Operator};
use crate::random::{haar_ket, haar_unitary, rng_stream, CrateRng};
use crate::tomo::{
    canonical_reconstruction, optimal_mse, optimal_reconstruction, scaled_mse_value,
    ReconstructionSet,
};
use crate::C64;

/// Which reconstruction operators the estimator uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Reconstruction {
    #[default]
    Canonical,
    /// State-dependent optimal operators, built from the true state.
    Optimal,
}

#[derive(Clone, Debug)]
pub struct Experiment {
    pub povm: Povm,
    pub rho: DensityState,
    pub shots: u64,
    pub repetitions: usize,
    pub seed: u64,
    pub reconstruction: Reconstruction,
}

impl Experiment {
    pub fn new(
        povm: Povm,
        rho: DensityState,
        shots: u64,
        repetitions: usize,
        seed: u64,
    ) -> Result<Self> {
        if shots == 0 || repetitions == 0 {
            return Err(Error::InvalidParameter(format!(
                "need shots >= 1 and repetitions >= 1, got {shots} and {repetitions}"
            )));
        }
        if povm.dim() != rho.dim() {
            return Err(Error::DimensionMismatch {
                expected: povm.dim(),
                found: rho.dim(),
            });
        }
        Ok(Self {
            povm,
            rho,
            shots,
            repetitions,
            seed,
            reconstruction: Reconstruction::Canonical,
        })
    }

    pub fn with_reconstruction(mut self, r: Reconstruction) -> Self {
        self.reconstruction = r;
        self
    }

    fn theta(&self) -> Result<ReconstructionSet> {
        match self.reconstruction {
            Reconstruction::Canonical => canonical_reconstruction(&self.povm),
            Reconstruction::Optimal => optimal_reconstruction(&self.povm, &self.rho),
        }
    }

    fn cumulative(&self) -> Result<Vec<f64>> {
        let probs = self.povm.probabilities(&self.rho)?;
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = probs
            .iter()
            .map(|p| {
                acc += p.max(0.0);
                acc
            })
            .collect();
        let total = acc;
        for c in &mut cdf {
            *c /= total;
        }
        Ok(cdf)
    }

    fn draw(&self, cdf: &[f64], rep: usize) -> Vec<f64> {
        let mut rng = rng_stream(self.seed, rep as u64);
        multinomial_frequencies(cdf, self.shots, &mut rng)
    }
}

/// `N` inverse-CDF draws over outcomes, returned as frequencies `counts/N`.
fn multinomial_frequencies(cdf: &[f64], shots: u64, rng: &mut CrateRng) -> Vec<f64> {
    let n = cdf.len();
    let mut counts = vec![0u64; n];
    for _ in 0..shots {
        let u: f64 = rng.random();
        let j = cdf.partition_point(|&c| c <= u).min(n - 1);
        counts[j] += 1;
    }
    counts.iter().map(|&c| c as f64 / shots as f64).collect()
}

/// `R` independent frequency vectors; repetition `r` uses RNG stream `r`.
pub fn sample_frequencies(e: &Experiment) -> Result<Vec<Vec<f64>>> {
    let cdf = e.cumulative()?;
    Ok((0..e.repetitions)
        .into_par_iter()
        .map(|rep| e.draw(&cdf, rep))
        .collect())
}

/// `ρ̂ = Σ_j f_j Θ_j`. Not necessarily positive.
pub fn linear_estimate(f: &[f64], theta: &ReconstructionSet) -> Result<Operator> {
    if f.len() != theta.len() {
        return Err(Error::DimensionMismatch {
            expected: theta.len(),
            found: f.len(),
        });
    }
    Ok(theta.combine(f))
}

/// Echo of the experiment that produced a [`SimResult`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentEcho {
    pub dim: usize,
    pub label: String,
    pub outcomes: usize,
    pub average_purity: f64,
    pub state_purity: f64,
    pub shots: u64,
    pub repetitions: usize,
    pub seed: u64,
    pub reconstruction: Reconstruction,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimResult {
    pub experiment: ExperimentEcho,
    /// `N · mean_r ‖ρ̂_r − ρ‖²_HS`.
    pub empirical_scaled_mse: f64,
    /// Standard error of the mean over repetitions (zero when `R = 1`).
    pub standard_error: f64,
    /// `Σ_j p_j tr(Θ_j²) − tr(ρ²)`.
    pub analytic_scaled_mse: f64,
    /// `(empirical − analytic) / standard_error`.
    pub z_score: f64,
    pub within_3_sigma: bool,
    /// Largest `|tr ρ̂ − 1|` over repetitions.
    pub max_trace_deviation: f64,
    pub finite_sample_note: String,
    pub per_repetition: Vec<f64>,
}

const FINITE_SAMPLE_NOTE: &str = "multinomial frequencies are unbiased with covariance \
(diag(p) - pp^T)/N, so N * E||rho_hat - rho||^2 equals the analytic value at every N; \
any residual difference is statistical";

pub fn run(e: &Experiment) -> Result<SimResult> {
    let theta = e.theta()?;
    let analytic = scaled_mse_value(&e.povm, &theta, &e.rho)?;
    let cdf = e.cumulative()?;
    let rho = e.rho.operator();
    let n_shots = e.shots as f64;
    let per: Vec<(f64, f64)> = (0..e.repetitions)
        .into_par_iter()
        .map(|rep| {
            let f = e.draw(&cdf, rep);
            let hat = theta.combine(&f);
            let err = (&hat - rho).trace_of_square();
            (n_shots * err, (hat.trace() - 1.0).abs())
        })
        .collect();
    let per_repetition: Vec<f64> = per.iter().map(|x| x.0).collect();
    let max_trace_deviation = per.iter().map(|x| x.1).fold(0.0, f64::max);
    let r = per_repetition.len() as f64;
    let mean = per_repetition.iter().sum::<f64>() / r;
    let standard_error = if per_repetition.len() > 1 {
        let var = per_repetition
            .iter()
            .map(|x| (x - mean).powi(2))
            .sum::<f64>()
            / (r - 1.0);
        (var / r).sqrt()
    } else {
        0.0
    };
    let z_score = if standard_error > 0.0 {
        (mean - analytic) / standard_error
    } else if mean == analytic {
        0.0
    } else {
        f64::INFINITY
    };
    let purities = purity_report(&e.povm, None)?;
    Ok(SimResult {
        experiment: ExperimentEcho {
            dim: e.povm.dim(),
            label: e.povm.label().to_string(),
            outcomes: e.povm.len(),
            average_purity: purities.average_purity,
            state_purity: e.rho.purity(),
            shots: e.shots,
            repetitions: e.repetitions,
            seed: e.seed,
            reconstruction: e.reconstruction,
        },
        empirical_scaled_mse: mean,
        standard_error,
        analytic_scaled_mse: analytic,
        z_score,
        within_3_sigma: z_score.abs() <= 3.0,
        max_trace_deviation,
        finite_sample_note: FINITE_SAMPLE_NOTE.into(),
        per_repetition,
    })
}

/// One line of sweep output. Field order is the CSV column order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub d: usize,
    pub label: String,
    /// Average outcome purity `℘` of the measurement.
    pub purity: f64,
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "R")]
    pub r: usize,
    pub empirical: f64,
    pub stderr: f64,
    pub analytic: f64,
}

impl From<&SimResult> for SweepRow {
    fn from(s: &SimResult) -> Self {
        Self {
            d: s.experiment.dim,
            label: s.experiment.label.clone(),
            purity: s.experiment.average_purity,
            n: s.experiment.shots,
            r: s.experiment.repetitions,
            empirical: s.empirical_scaled_mse,
            stderr: s.standard_error,
            analytic: s.analytic_scaled_mse,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PurityClass {
    Pure,
    /// Fixed eigenvalues, conjugated by a Haar unitary.
    Spectrum(Vec<f64>),
}

fn check_spectrum(d: usize, spectrum: &[f64]) -> Result<()> {
    if spectrum.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: spectrum.len(),
        });
    }
    let sum: f64 = spectrum.iter().sum();
    if spectrum.iter().any(|&x| x < 0.0) || (sum - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidState(format!(
            "spectrum must be non-negative with unit sum, got {spectrum:?}"
        )));
    }
    Ok(())
}

fn sample_state(d: usize, class: &PurityClass, rng: &mut CrateRng) -> Result<DensityState> {
    match class {
        PurityClass::Pure => DensityState::pure(&haar_ket(d, rng)),
        PurityClass::Spectrum(lambda) => {
            let u = haar_unitary(d, rng);
            let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                d,
                lambda.iter().map(|&x| C64::new(x, 0.0)),
            ));
            DensityState::new(Operator::from_matrix_lossy(&u * diag * u.adjoint()))
        }
    }
}

pub fn haar_state(d: usize, class: &PurityClass, seed: u64) -> Result<DensityState> {
    if let PurityClass::Spectrum(lambda) = class {
        check_spectrum(d, lambda)?;
    }
    sample_state(d, class, &mut crate::random::rng_from_seed(seed))
}

/// Sample statistics of the scaled MSE over a unitary orbit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitAverage {
    pub mean: f64,
    pub standard_error: f64,
    pub min: f64,
    pub max: f64,
    /// `(max − min)/max`.
    pub spread: f64,
    /// `(1/d) Σ_j tr(Π_j) tr(Θ_j²) − Σ λ²`, for canonical reconstruction.
    pub closed_form: Option<f64>,
    pub samples: Vec<f64>,
}

/// Scaled MSE at `samples` Haar conjugates of `diag(spectrum)`. Sample `i`
/// uses RNG stream `i`.
pub fn orbit_average_mse(
    p: &Povm,
    spectrum: &[f64],
    samples: usize,
    seed: u64,
    reconstruction: Reconstruction,
) -> Result<OrbitAverage> {
    let d = p.dim();
    check_spectrum(d, spectrum)?;
    if samples == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    let class = PurityClass::Spectrum(spectrum.to_vec());
    let canonical = canonical_reconstruction(p)?;
    let values: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let rho = sample_state(d, &class, &mut rng_stream(seed, i as u64))?;
            match reconstruction {
                Reconstruction::Canonical => scaled_mse_value(p, &canonical, &rho),
                Reconstruction::Optimal => optimal_mse(p, &rho).map(|m| m.value),
            }
        })
        .collect::<Result<_>>()?;
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let standard_error = if values.len() > 1 {
        (values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
    } else {
        0.0
    };
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let closed_form = match reconstruction {
        Reconstruction::Canonical => {
            let purity: f64 = spectrum.iter().map(|x| x * x).sum();
            Some(crate::tomo::average_scaled_mse(p, &canonical, purity)?)
        }
        Reconstruction::Optimal => None,
    };
    Ok(OrbitAverage {
        mean,
        standard_error,
        min,
        max,
        spread: if max != 0.0 {
            (max - min) / max.abs()
        } else {
            0.0
        },
        closed_form,
        samples: values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurements::{cube_qubit, mub_complete, random_minimal_ic, sic_rank_one};
    use nalgebra::DVector;

    fn basis_state(d: usize, k: usize) -> DensityState {
        let mut v = DVector::from_element(d, C64::new(0.0, 0.0));
        v[k] = C64::new(1.0, 0.0);
        DensityState::pure(&v).unwrap()
    }

    #[test]
    fn experiment_rejects_zero_shots() {
        let p = sic_rank_one(2, None).unwrap();
        let rho = DensityState::maximally_mixed(2);
        assert!(Experiment::new(p.clone(), rho.clone(), 0, 1, 0).is_err());
        assert!(Experiment::new(p, rho, 1, 0, 0).is_err());
    }

    #[test]
    fn single_shot_is_one_hot() {
        let p = sic_rank_one(2, None).unwrap();
        let e = Experiment::new(p, DensityState::maximally_mixed(2), 1, 50, 3).unwrap();
        for f in sample_frequencies(&e).unwrap() {
            assert_eq!(f.iter().filter(|&&x| x == 1.0).count(), 1);
            assert_eq!(f.iter().filter(|&&x| x == 0.0).count(), 3);
        }
    }

    #[test]
    fn aligned_eigenstate_always_hits_its_outcome() {
        let z = vec![
            Operator::diagonal(&[1.0, 0.0]),
            Operator::diagonal(&[0.0, 1.0]),
        ];
        let p = Povm::new(2, z, "z").unwrap();
        let e = Experiment::new(p, basis_state(2, 0), 1000, 3, 1).unwrap();
        for f in sample_frequencies(&e).unwrap() {
            assert_eq!(f[0], 1.0);
            assert_eq!(f[1], 0.0);
        }
    }

    #[test]
    fn sic_frequencies_concentrate() {
        let p = sic_rank_one(2, None).unwrap();
        let n = 1_000_000u64;
        let e = Experiment::new(p, DensityState::maximally_mixed(2), n, 1, 11).unwrap();
        let sd = (0.25f64 * 0.75 / n as f64).sqrt();
        for x in &sample_frequencies(&e).unwrap()[0] {
            assert!((x - 0.25).abs() < 5.0 * sd);
        }
    }

    #[test]
    fn estimate_with_exact_probabilities_is_exact() {
        let p = random_minimal_ic(3, 6).unwrap();
        let theta = canonical_reconstruction(&p).unwrap();
        let rho = haar_state(3, &PurityClass::Spectrum(vec![0.6, 0.3, 0.1]), 2).unwrap();
        let probs = p.probabilities(&rho).unwrap();
        let hat = linear_estimate(&probs, &theta).unwrap();
        assert!((&hat - rho.operator()).max_abs() < 1e-10);
        let mut one_hot = vec![0.0; 9];
        one_hot[4] = 1.0;
        assert_eq!(
            linear_estimate(&one_hot, &theta).unwrap(),
            theta.operators[4]
        );
        assert!(linear_estimate(&one_hot[..3], &theta).is_err());
    }

    #[test]
    fn mean_estimate_is_unbiased() {
        let p = sic_rank_one(2, None).unwrap();
        let rho = haar_state(2, &PurityClass::Pure, 8).unwrap();
        let theta = canonical_reconstruction(&p).unwrap();
        let e = Experiment::new(p, rho.clone(), 10_000, 400, 21).unwrap();
        let hats: Vec<Operator> = sample_frequencies(&e)
            .unwrap()
            .iter()
            .map(|f| linear_estimate(f, &theta).unwrap())
            .collect();
        let r = hats.len() as f64;
        for i in 0..2 {
            for j in 0..2 {
                for part in [|c: C64| c.re, |c: C64| c.im] {
                    let xs: Vec<f64> = hats.iter().map(|h| part(h.matrix()[(i, j)])).collect();
                    let mean = xs.iter().sum::<f64>() / r;
                    let sd =
                        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (r - 1.0)).sqrt();
                    let target = part(rho.operator().matrix()[(i, j)]);
                    assert!((mean - target).abs() <= 4.0 * sd / r.sqrt() + 1e-15);
                }
            }
        }
    }

    #[test]
    fn run_is_deterministic_and_traced() {
        let p = sic_rank_one(2, None).unwrap();
        let e = Experiment::new(
            p,
            haar_state(2, &PurityClass::Pure, 1).unwrap(),
            500,
            16,
            99,
        )
        .unwrap();
        let a = run(&e).unwrap();
        let b = run(&e).unwrap();
        assert_eq!(a, b);
        assert!(a.max_trace_deviation < 1e-10);
        assert!(a.standard_error > 0.0);
        assert!((a.analytic_scaled_mse - 4.0).abs() < 1e-10);
    }

    #[test]
    fn run_matches_mub_optimal_value() {
        let p = mub_complete(2).unwrap();
        let rho = haar_state(2, &PurityClass::Pure, 5).unwrap();
        let e = Experiment::new(p, rho, 20_000, 100, 4)
            .unwrap()
            .with_reconstruction(Reconstruction::Optimal);
        let r = run(&e).unwrap();
        assert!((r.analytic_scaled_mse - 3.0).abs() < 1e-9);
        assert!(r.z_score.abs() < 4.0, "{r:?}");
    }

    #[test]
    fn haar_states() {
        let rho = haar_state(4, &PurityClass::Pure, 3).unwrap();
        assert!((rho.purity() - 1.0).abs() < 1e-12);
        let rho = haar_state(3, &PurityClass::Spectrum(vec![1.0, 0.0, 0.0]), 3).unwrap();
        assert!((rho.purity() - 1.0).abs() < 1e-12);
        let lambda = vec![0.5, 0.3, 0.2];
        let target: f64 = lambda.iter().map(|x| x * x).sum();
        for seed in 0..10 {
            let rho = haar_state(3, &PurityClass::Spectrum(lambda.clone()), seed).unwrap();
            assert!((rho.purity() - target).abs() < 1e-12);
        }
        assert!(haar_state(3, &PurityClass::Spectrum(vec![0.5, 0.5]), 0).is_err());
        assert!(haar_state(2, &PurityClass::Spectrum(vec![1.5, -0.5]), 0).is_err());
    }

    #[test]
    fn sic_orbit_is_flat() {
        let p = sic_rank_one(2, None).unwrap();
        let o = orbit_average_mse(&p, &[0.8, 0.2], 20, 1, Reconstruction::Canonical).unwrap();
        let closed = o.closed_form.unwrap();
        assert!((closed - (5.0 - 0.68)).abs() < 1e-10);
        for v in &o.samples {
            assert!((v - closed).abs() < 1e-10);
        }
    }

    #[test]
    fn cube_orbit_is_not_flat() {
        let o =
            orbit_average_mse(&cube_qubit(), &[1.0, 0.0], 200, 7, Reconstruction::Optimal).unwrap();
        assert!(o.spread > 1e-4);
        assert!(o.closed_form.is_none());
    }

    #[test]
    fn random_orbit_matches_closed_form() {
        let p = random_minimal_ic(2, 12).unwrap();
        let o = orbit_average_mse(&p, &[1.0, 0.0], 500, 2, Reconstruction::Canonical).unwrap();
        assert!((o.mean - o.closed_form.unwrap()).abs() < 3.0 * o.standard_error);
    }

    #[test]
    fn streams_do_not_depend_on_schedule() {
        let p = sic_rank_one(2, None).unwrap();
        let e = Experiment::new(p, DensityState::maximally_mixed(2), 100, 8, 5).unwrap();
        let all = sample_frequencies(&e).unwrap();
        let cdf = e.cumulative().unwrap();
        assert_eq!(all[6], e.draw(&cdf, 6));
    }
}
