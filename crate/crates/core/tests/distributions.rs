use dac_core::DistributionSpec;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Composite Simpson on a fine uniform mesh, split at `kinks`.
fn simpson(f: impl Fn(f64) -> f64, lower: f64, upper: f64, kinks: &[f64], panels: usize) -> f64 {
    let mut edges = vec![lower];
    edges.extend(kinks.iter().copied().filter(|k| *k > lower && *k < upper));
    edges.push(upper);
    edges
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let h = (b - a) / panels as f64;
            let mut s = f(a) + f(b);
            for i in 1..panels {
                let x = a + h * i as f64;
                s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
            }
            s * h / 3.0
        })
        .sum()
}

fn random_spec(rng: &mut ChaCha8Rng) -> DistributionSpec {
    let loc = rng.random_range(-10.0..10.0);
    let scale = 10f64.powf(rng.random_range(-2.0..1.0));
    match rng.random_range(0..4) {
        0 => DistributionSpec::normal(loc, scale).unwrap(),
        1 => DistributionSpec::uniform(loc, loc + scale).unwrap(),
        2 => DistributionSpec::skew_normal(loc, scale, 10f64.powf(rng.random_range(-0.7..0.7))).unwrap(),
        _ => DistributionSpec::skew_normal_mean_sd(loc, scale, 10f64.powf(rng.random_range(-0.7..0.7))).unwrap(),
    }
}

#[test]
fn densities_normalize_over_effective_support() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let spec = random_spec(&mut rng);
        let sup = spec.effective_support(1e-10).unwrap();
        let mass = simpson(|x| spec.density(x), sup.lower, sup.upper, &spec.kinks(), 2000);
        assert!(
            (1.0 - 1e-6..=1.0 + 1e-9).contains(&mass),
            "{spec:?}: mass {mass}"
        );
        assert!(sup.covered_mass >= 1.0 - 1e-10 && sup.covered_mass <= 1.0);
    }
}

#[test]
fn skew_normal_sampling_mass_split() {
    let s = DistributionSpec::skew_normal(0.0, 1.0, 0.78).unwrap();
    let xs = s.sample(100_000, 5).unwrap();
    let below = xs.iter().filter(|&&x| x < 0.0).count() as f64 / xs.len() as f64;
    assert!((below - 0.6217).abs() < 0.005, "{below}");
}

#[test]
fn normal_sample_mean() {
    let xs = DistributionSpec::normal(0.0, 1.0).unwrap().sample(100_000, 17).unwrap();
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    assert!(m.abs() < 0.01);
}

#[test]
fn uniform_samples_stay_in_support() {
    let xs = DistributionSpec::uniform(0.0, 5.0).unwrap().sample(100_000, 3).unwrap();
    assert!(xs.iter().all(|&x| (0.0..=5.0).contains(&x)));
}

#[test]
fn sampling_is_seed_deterministic() {
    let s = DistributionSpec::skew_normal(1.0, 2.0, 1.7).unwrap();
    assert_eq!(s.sample(50, 9).unwrap(), s.sample(50, 9).unwrap());
    assert_ne!(s.sample(50, 9).unwrap(), s.sample(50, 10).unwrap());
}

fn ks_distance(spec: &DistributionSpec, seed: u64) -> f64 {
    let mut xs = spec.sample(100_000, seed).unwrap();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = spec.cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn kolmogorov_smirnov_against_cdf() {
    for (i, spec) in [
        DistributionSpec::normal(2.0, 0.5).unwrap(),
        DistributionSpec::uniform(-1.0, 3.0).unwrap(),
        DistributionSpec::skew_normal(2.15, 0.09, 0.78).unwrap(),
        DistributionSpec::skew_normal_mean_sd(0.0, 1.0, 2.5).unwrap(),
    ]
    .iter()
    .enumerate()
    {
        let d = ks_distance(spec, 100 + i as u64);
        assert!(d < 0.01, "{spec:?}: KS {d}");
    }
}

fn shape_strategy() -> impl Strategy<Value = f64> {
    (-1.0f64..1.0).prop_map(|e| 10f64.powf(e))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn unit_shape_reduces_to_normal(mu in -50.0f64..50.0, sigma in 1e-3f64..50.0, z in -8.0f64..8.0) {
        let s = DistributionSpec::skew_normal(mu, sigma, 1.0).unwrap();
        let n = DistributionSpec::normal(mu, sigma).unwrap();
        let x = mu + z * sigma;
        prop_assert!((s.density(x) - n.density(x)).abs() < 1e-12);
    }

    #[test]
    fn mass_split_identity(mu in -50.0f64..50.0, sigma in 1e-3f64..50.0, g in shape_strategy()) {
        let s = DistributionSpec::skew_normal(mu, sigma, g).unwrap();
        prop_assert!((s.cdf(mu) - 1.0 / (1.0 + g * g)).abs() < 1e-8);
    }

    #[test]
    fn cdf_quantile_round_trip(mu in -50.0f64..50.0, sigma in 1e-3f64..50.0, g in shape_strategy(), p in 0.001f64..0.999, which in 0usize..4) {
        let spec = match which {
            0 => DistributionSpec::normal(mu, sigma).unwrap(),
            1 => DistributionSpec::uniform(mu, mu + sigma).unwrap(),
            2 => DistributionSpec::skew_normal(mu, sigma, g).unwrap(),
            _ => DistributionSpec::skew_normal_mean_sd(mu, sigma, g).unwrap(),
        };
        let x = spec.quantile(p).unwrap();
        prop_assert!((spec.cdf(x) - p).abs() < 1e-8);
        // and the other direction on the same point
        let back = spec.quantile(spec.cdf(x)).unwrap();
        prop_assert!((back - x).abs() < 1e-8 * sigma.max(1.0) * g.max(1.0 / g));
    }

    #[test]
    fn log_density_consistent(mu in -5.0f64..5.0, sigma in 0.05f64..5.0, g in shape_strategy(), z in -6.0f64..6.0) {
        for spec in [
            DistributionSpec::normal(mu, sigma).unwrap(),
            DistributionSpec::skew_normal(mu, sigma, g).unwrap(),
            DistributionSpec::uniform(mu - sigma, mu + sigma).unwrap(),
        ] {
            let x = mu + z * sigma;
            let d = spec.density(x);
            let ld = spec.log_density(x);
            if d > 0.0 {
                prop_assert!((ld.exp() - d).abs() <= 1e-12 * d);
            } else {
                prop_assert!(ld < -700.0, "log density {} for zero density", ld);
            }
        }
    }

    #[test]
    fn cdf_is_monotone(mu in -5.0f64..5.0, sigma in 0.05f64..5.0, g in shape_strategy(), a in -10.0f64..10.0, b in -10.0f64..10.0) {
        let s = DistributionSpec::skew_normal(mu, sigma, g).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(s.cdf(lo) <= s.cdf(hi));
        prop_assert!((s.cdf(lo) + s.survival(lo) - 1.0).abs() < 1e-15);
    }
}
