use mfgp_core::inference::{condense, fit_gp, log_posterior, run_chain};
use mfgp_core::{ChainConfig, Hyperparameters, LogPrior, PriorSpec, TrainingSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn smooth_data(n: usize, seed: u64) -> TrainingSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<[f64; 2]> = (0..n).map(|_| [rng.random(), rng.random()]).collect();
    let ys = xs.iter().map(|x| (3.0 * x[0]).sin() + 0.5 * x[1]).collect();
    TrainingSet::from_rows(&xs, ys).unwrap()
}

#[test]
fn adapted_chain_has_moderate_acceptance() {
    let train = smooth_data(25, 1);
    let chain = run_chain(&train, &PriorSpec::default_for(2), &ChainConfig::default().with_seed(8)).unwrap();
    assert_eq!(chain.len(), 2000);
    assert_eq!(chain.n_params(), 4);
    assert_eq!(chain.retained().len(), 1000);
    let rate = chain.acceptance_rate();
    assert!((0.1..=0.7).contains(&rate), "acceptance {rate}");
}

#[test]
fn condensed_point_beats_prior_centre_on_posterior() {
    let train = smooth_data(30, 2);
    let prior = PriorSpec::default_for(2);
    let chain = run_chain(&train, &prior, &ChainConfig::default().with_seed(3)).unwrap();
    let h = condense(&chain).unwrap();
    let centre = Hyperparameters::new(1.0, vec![1.0, 1.0], (-3.0f64).exp()).unwrap();
    assert!(log_posterior(&train, &h, &prior) > log_posterior(&train, &centre, &prior));
}

#[test]
fn fitted_gp_interpolates_smooth_function() {
    let train = smooth_data(30, 4);
    let gp = fit_gp(train, &PriorSpec::default_for(2), &ChainConfig::default().with_seed(5)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut sse = 0.0;
    for _ in 0..200 {
        let x = [rng.random::<f64>(), rng.random::<f64>()];
        let e = gp.predict(&x).mean - ((3.0 * x[0]).sin() + 0.5 * x[1]);
        sse += e * e;
    }
    assert!((sse / 200.0).sqrt() < 0.05);
}

#[test]
fn tighter_nugget_prior_pulls_condensed_nugget() {
    let train = smooth_data(20, 7);
    let config = ChainConfig::default().with_seed(9);
    let loose = condense(&run_chain(&train, &PriorSpec::default_for(2), &config).unwrap()).unwrap();
    let prior = PriorSpec::uniform_dims(
        LogPrior::normal(0.0, 1.0).unwrap(),
        LogPrior::normal(0.0, 1.5).unwrap(),
        LogPrior::normal(-1.0, 0.01).unwrap(),
        2,
    );
    let tight = condense(&run_chain(&train, &prior, &config).unwrap()).unwrap();
    assert!((tight.nugget().ln() + 1.0).abs() < 0.05);
    assert!(tight.nugget() > loose.nugget());
}
