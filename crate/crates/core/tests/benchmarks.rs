use mfgp_core::benchmarks::{forrester_high, forrester_low, rmse, Problem};
use mfgp_core::design::uniform;
use mfgp_core::{ChainConfig, MultiFidelityModel, PriorSpec, SingleFidelityModel, TrainingSet};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn multi_fidelity_beats_high_only_on_forrester() {
    let lf: Vec<[f64; 1]> = (0..11).map(|i| [i as f64 / 10.0]).collect();
    let hf = [[0.0], [0.4], [0.6], [1.0]];
    let d_eta = TrainingSet::from_rows(&lf, lf.iter().map(|x| forrester_low(x[0]).unwrap()).collect()).unwrap();
    let d_y = TrainingSet::from_rows(&hf, hf.iter().map(|x| forrester_high(x[0]).unwrap()).collect()).unwrap();
    let prior = PriorSpec::default_for(1);
    let chain = ChainConfig::default().with_seed(1);
    let mf = MultiFidelityModel::fit(&d_eta, &d_y, &prior, &chain).unwrap();
    let sf = SingleFidelityModel::fit(&d_y, &prior, &chain).unwrap();
    let xs: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
    let truth: Vec<f64> = xs.iter().map(|&x| forrester_high(x).unwrap()).collect();
    let e_mf = rmse(&xs.iter().map(|&x| mf.predict(&[x]).mean).collect::<Vec<_>>(), &truth).unwrap();
    let e_sf = rmse(&xs.iter().map(|&x| sf.predict_mean(&[x])).collect::<Vec<_>>(), &truth).unwrap();
    assert!(e_mf < 0.5 * e_sf, "mf {e_mf} sf {e_sf}");
}

#[test]
fn park_problem_evaluates_on_sampled_designs() {
    let p = Problem::park();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for x in uniform(&mut rng, 500, p.lower, p.upper) {
        let (h, l) = (p.eval_high(&x).unwrap(), p.eval_low(&x).unwrap());
        assert!(h.is_finite() && l.is_finite());
    }
    assert!(p.eval_high(&[0.5; 3]).is_err());
    assert!(Problem::by_name("forrester").is_some() && Problem::by_name("branin").is_none());
}
