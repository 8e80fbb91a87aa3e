use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use waterfall::codecs::{transmit_and_detect, uncoded_detection_probability, SchemeSpec};
use waterfall::montecarlo::{binomial_ci, measure_awgn_fer, SimulationPlan};
use waterfall::validation::turbo_scheme;
use waterfall::Snr;

#[test]
fn uncoded_success_rate_matches_closed_form() {
    let len = 32;
    let scheme = SchemeSpec::uncoded(len).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for db in [0.0, 4.0, 7.0] {
        let gamma = Snr::from_db(db).unwrap();
        let trials = 100_000u64;
        let successes = (0..trials)
            .filter(|_| transmit_and_detect(&scheme, gamma, &mut rng).unwrap())
            .count() as u64;
        let (lo, hi) = binomial_ci(successes, trials, 0.999).unwrap();
        let p = uncoded_detection_probability(gamma, len);
        assert!(lo <= p && p <= hi, "{db} dB: {p} not in [{lo}, {hi}]");
    }
}

#[test]
fn turbo_iterations_lower_the_error_rate() {
    let gamma = Snr::from_db(-4.4).unwrap();
    let plan = SimulationPlan::new(vec![gamma], 1000, 1000, u64::MAX, 5).unwrap();
    let fer = |iterations| {
        let scheme = turbo_scheme(256, 3, iterations).unwrap();
        let p = measure_awgn_fer(&scheme, &plan).unwrap().points()[0];
        (p.errors, p.frames)
    };
    let (e8, n8) = fer(8);
    let (e1, n1) = fer(1);
    let (_, hi8) = binomial_ci(e8, n8, 0.999).unwrap();
    let (lo1, _) = binomial_ci(e1, n1, 0.999).unwrap();
    assert!(hi8 < lo1, "8 iterations: {e8}/{n8}, 1 iteration: {e1}/{n1}");
}
