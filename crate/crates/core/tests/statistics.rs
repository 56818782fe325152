mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use recovery_core::damage::{exceedance_prob, ClassFragility, Fragility};
use recovery_core::geometry::Point;
use recovery_core::hazard::{median_ln_im, AttenuationParams, EventSpec, FieldSampler, Site};
use recovery_core::network::gravity_probs;

const DRAWS: usize = 100_000;

fn curves() -> ClassFragility {
    let f = |median: f64, xi: f64| Fragility { lambda: median.ln(), xi };
    ClassFragility::new([f(0.15, 0.6), f(0.3, 0.6), f(0.5, 0.6), f(0.85, 0.6)]).unwrap()
}

#[test]
fn fragility_draws_match_state_probabilities() {
    let cf = curves();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for im in [0.05, 0.2, 0.45, 1.2] {
        let probs = cf.state_probs(im).unwrap();
        let mut counts = [0usize; 5];
        for _ in 0..DRAWS {
            counts[cf.sample(im, &mut rng).unwrap().ordinal()] += 1;
        }
        for k in 0..5 {
            let p = probs[k];
            let se = (p * (1.0 - p) / DRAWS as f64).sqrt();
            let freq = counts[k] as f64 / DRAWS as f64;
            assert!((freq - p).abs() <= 3.0 * se + 1e-12, "im {im} state {k}: {freq} vs {p}");
        }
    }
}

#[test]
fn exceedance_is_one_half_at_the_median() {
    for (lambda, xi) in [(0.15f64.ln(), 0.6), (0.0, 0.3), (1.7, 1.1)] {
        let p = exceedance_prob(lambda, xi, lambda.exp()).unwrap();
        assert!((p - 0.5).abs() <= 1e-12, "{p}");
    }
}

fn params(sigma: f64, tau: f64, range: f64) -> AttenuationParams {
    AttenuationParams {
        coefficients: [0.0, 0.5, -1.0, 10.0, 0.2],
        sigma_intra: sigma,
        tau_inter: tau,
        correlation_range_km: range,
        nugget: 0.0,
    }
}

fn event() -> EventSpec {
    EventSpec {
        magnitude: 7.0,
        epicenter: Point::new(0.0, 0.0),
        fault_params: Vec::new(),
    }
}

fn sites(points: &[(f64, f64)]) -> Vec<Site> {
    points
        .iter()
        .map(|&(x, y)| Site {
            location: Point::new(x, y),
            vs30: 270.0,
        })
        .collect()
}

#[test]
fn intra_event_residuals_follow_the_kernel() {
    let s = sites(&[(0.0, 10.0), (5.0, 10.0)]);
    let sampler = FieldSampler::new(&event(), &s, &params(1.0, 0.0, 20.0)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut sxy, mut sxx, mut syy, mut sx, mut sy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for _ in 0..DRAWS {
        let (e, _) = sampler.residuals(&mut rng);
        sx += e[0];
        sy += e[1];
        sxy += e[0] * e[1];
        sxx += e[0] * e[0];
        syy += e[1] * e[1];
    }
    let n = DRAWS as f64;
    let cov = sxy / n - sx / n * sy / n;
    let r = cov / ((sxx / n - (sx / n).powi(2)) * (syy / n - (sy / n).powi(2))).sqrt();
    let expect = (-5.0f64 / 20.0).exp();
    assert!((r - expect).abs() <= 0.01, "correlation {r} vs {expect}");
}

#[test]
fn log_intensity_marginals() {
    let (sigma, tau) = (0.5, 0.3);
    let p = params(sigma, tau, 2.0);
    let s = sites(&[(3.0, 4.0), (3.5, 4.0), (8.0, 1.0)]);
    let sampler = FieldSampler::new(&event(), &s, &p).unwrap();
    let n = 20_000;
    let var = sigma * sigma + tau * tau;
    for (i, site) in s.iter().enumerate() {
        let mu = median_ln_im(&event(), site, &p);
        let xs: Vec<f64> = (0..n).map(|seed| sampler.sample(seed as u64).values[i].ln()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let v = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - mu).abs() <= 3.0 * (var / n as f64).sqrt(), "site {i}: mean {mean} vs {mu}");
        // normal sample variance has standard error var * sqrt(2 / (n - 1))
        assert!((v - var).abs() <= 3.0 * var * (2.0 / (n - 1) as f64).sqrt(), "site {i}: var {v} vs {var}");
    }
}

#[test]
fn gravity_rows_sum_to_one_on_the_testbed() {
    let (net, _) = common::testbed_network(-0.1);
    for row in &net.demand.probs {
        assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }
    assert_eq!(gravity_probs(1, &[3.0, 3.0], -0.2, &[4.0, 4.0]).unwrap(), vec![0.5, 0.5]);
}
