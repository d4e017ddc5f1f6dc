//! Acceptance suite: one check per criterion, each printed as a PASS/FAIL
//! line with its measurements. Exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use ofdm_cf::bounds::{
    aom_scaling_bound, aom_scaling_schedule, balance_bound_bpsk, balance_bound_general, ck, default_mu_grid,
    ln_thm1_at, ln_thm2_at, thm1_bound, thm2_bound, thm3_bound_best_k, union_chernoff_optimized, BalanceQuery,
    BoundQuery, DistortionMetric, Thm3Form,
};
use ofdm_cf::codes::{enumerate_code, verify_lemma1, CodeSpec, DistanceDistribution, DistributionFlavor};
use ofdm_cf::hpa::{apply_cubic, apply_sel, CubicParams, SelParams};
use ofdm_cf::metrics::{aom, crest_factor, effective_cf, empirical_ccdf, exact_cf_distribution};
use ofdm_cf::montecarlo::{run_trials, trial_rng};
use ofdm_cf::numeric::log_space;
use ofdm_cf::signal::{synthesize, Codeword};
use rand::seq::SliceRandom;
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Option<Duration>,
    check: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion {
            id: 1,
            name: "bound domination, exhaustive N=10",
            budget: Some(Duration::from_secs(60)),
            check: bound_domination_exhaustive,
        },
        Criterion {
            id: 2,
            name: "bound domination, Monte Carlo N=64",
            budget: Some(Duration::from_secs(120)),
            check: bound_domination_monte_carlo,
        },
        Criterion {
            id: 3,
            name: "symmetrization chain on random subcodes",
            budget: Some(Duration::from_secs(10)),
            check: symmetrization_chain,
        },
        Criterion {
            id: 4,
            name: "balancing bounds dominate enumerated distortion tail",
            budget: Some(Duration::from_secs(60)),
            check: balance_domination,
        },
        Criterion {
            id: 5,
            name: "AOM under the log log N clip schedule",
            budget: Some(Duration::from_secs(300)),
            check: aom_scaling,
        },
        Criterion {
            id: 6,
            name: "log N barrier for the effective crest factor",
            budget: Some(Duration::from_secs(300)),
            check: log_n_barrier,
        },
        Criterion {
            id: 7,
            name: "exact identities",
            budget: None,
            check: exact_identities,
        },
        Criterion {
            id: 8,
            name: "log-domain stability",
            budget: None,
            check: numerical_stability,
        },
        Criterion {
            id: 9,
            name: "byte-identical CSV across runs and thread counts",
            budget: None,
            check: determinism,
        },
    ];

    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(c.check));
        let elapsed = start.elapsed();
        let mut o = result.unwrap_or_else(|_| outcome(false, "panicked"));
        if let Some(budget) = c.budget {
            if elapsed > budget {
                o.pass = false;
                o.detail = format!("over budget {budget:?}; {}", o.detail);
            }
        }
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "{tag} [{}] {} ({:.1} s): {}",
            c.id,
            c.name,
            elapsed.as_secs_f64(),
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn bound_domination_exhaustive() -> Outcome {
    let n = 10;
    let spec = CodeSpec::uncoded(n).unwrap();
    assert_eq!(enumerate_code(&spec).unwrap().len(), 1024);
    let dist_d = DistanceDistribution::full_space(n, DistributionFlavor::Distance);
    let dist_w = DistanceDistribution::full_space(n, DistributionFlavor::Weight);
    let xs: Vec<f64> = (0..=8).map(|i| 1.0 + 0.25 * i as f64).collect();
    let mut violations = Vec::new();
    let mut checked = 0;
    let mut tightest = f64::INFINITY;
    for l in [1, 2] {
        let exact = exact_cf_distribution(&spec, l).unwrap();
        for &x in &xs {
            let b = exact.tail(x);
            let q = BoundQuery::new(x, n, l);
            let bounds = [
                ("union_chernoff", union_chernoff_optimized(&q).unwrap().value()),
                (
                    "thm1",
                    thm1_bound(&q.clone().with_distribution(dist_d.clone()))
                        .unwrap()
                        .value(),
                ),
                (
                    "thm2",
                    thm2_bound(&q.clone().with_distribution(dist_w.clone()))
                        .unwrap()
                        .value(),
                ),
                (
                    "thm3_linear",
                    thm3_bound_best_k(x, n, l, &(3..=64), 0.0, Thm3Form::Linear)
                        .unwrap()
                        .value(),
                ),
            ];
            for (name, v) in bounds {
                checked += 1;
                tightest = tightest.min(v - b);
                if v < b - 1e-12 {
                    violations.push(format!("{name} L={l} x={x}: {v} < {b}"));
                }
            }
        }
    }
    outcome(
        violations.is_empty(),
        format!(
            "{checked} comparisons, {} violations, smallest margin {tightest:.3e}{}",
            violations.len(),
            violations.first().map(|v| format!("; first: {v}")).unwrap_or_default()
        ),
    )
}

fn bound_domination_monte_carlo() -> Outcome {
    let (n, l, trials) = (64, 4, 100_000);
    let xs: Vec<f64> = (0..=160).map(|i| 0.05 * i as f64).collect();
    let curve = empirical_ccdf(&CodeSpec::uncoded(n).unwrap(), l, &xs, trials, 7).unwrap();
    let p = curve.probabilities();
    let mut reliable = 0;
    let mut violations = Vec::new();
    for (i, &x) in xs.iter().enumerate() {
        if !curve.is_reliable(i) {
            continue;
        }
        reliable += 1;
        let bound = thm3_bound_best_k(x, n, l, &(3..=64), 0.0, Thm3Form::Linear)
            .unwrap()
            .value();
        if bound < p[i] - 3.0 * curve.standard_error(i) {
            violations.push(format!("x={x}: bound {bound} < empirical {}", p[i]));
        }
    }
    outcome(
        violations.is_empty() && reliable > 0,
        format!("{reliable} reliable thresholds, {} violations", violations.len()),
    )
}

fn symmetrization_chain() -> Outcome {
    let all = enumerate_code(&CodeSpec::uncoded(8).unwrap()).unwrap();
    let (mut tested, mut failures) = (0, Vec::new());
    for seed in 0..50u64 {
        let mut rng = trial_rng(31_337, seed);
        let code: Vec<Codeword> = all.choose_multiple(&mut rng, 16).cloned().collect();
        let spec = CodeSpec::explicit(code.clone()).unwrap();
        let cfs = exact_cf_distribution(&spec, 1).unwrap();
        let x = cfs.median();
        let r = verify_lemma1(&code, x, 1).unwrap();
        // Independent count of A from the enumerated distribution.
        assert_eq!(r.exceed, cfs.exceed_count(x));
        if r.exceed == 0 {
            continue;
        }
        tested += 1;
        if !r.holds() {
            failures.push(seed);
        }
    }
    outcome(
        failures.is_empty() && tested > 0,
        format!("{tested} of 50 subcodes with nonempty A, failing seeds {failures:?}"),
    )
}

fn balance_domination() -> Outcome {
    let (n, lambda) = (10, 1.5);
    let spec = CodeSpec::uncoded(n).unwrap();
    let words = enumerate_code(&spec).unwrap();
    let p = SelParams::new(lambda).unwrap();
    let aoms: Vec<f64> = words
        .iter()
        .map(|w| {
            let d = apply_sel(&synthesize(w, 1).unwrap(), &p);
            // h(d) = d²/N summed over the N samples.
            d.distortion().iter().map(|z| z.norm_sqr() / n as f64).sum()
        })
        .collect();
    let exact_b = exact_cf_distribution(&spec, 1).unwrap();
    let grid = default_mu_grid(lambda, n);
    let mut lines = Vec::new();
    let mut ok = true;
    for x in [1e-3, 1e-2, 1e-1] {
        let prob = aoms.iter().filter(|&&a| a > x).count() as f64 / words.len() as f64;
        let q = BalanceQuery::new(lambda, x, grid.clone(), DistortionMetric::ScaledSquare { n }).unwrap();
        let t4 = balance_bound_bpsk(&q, &exact_b).unwrap().value;
        let t5 = balance_bound_general(&q, &exact_b).unwrap().value;
        ok &= t4 >= prob && t5 >= prob;
        lines.push(format!("x={x}: exact {prob:.4}, bpsk {t4:.4}, general {t5:.4}"));
    }
    outcome(ok, lines.join("; "))
}

fn aom_scaling() -> Outcome {
    let ns = [64usize, 256, 1024, 4096];
    let (x, eps, trials, k) = (0.01, 0.1, 10_000, 16);
    let mut probs = Vec::new();
    let mut bounds = Vec::new();
    for &n in &ns {
        let (lambda, _) = aom_scaling_schedule(n, eps).unwrap();
        let p = SelParams::new(lambda).unwrap();
        let hits = run_trials(&CodeSpec::uncoded(n).unwrap(), 1, trials, 2024, |c, syn| {
            aom(&apply_sel(&syn.synthesize(c).unwrap(), &p)) > x
        })
        .unwrap();
        probs.push(hits.iter().filter(|&&h| h).count() as f64 / trials as f64);
        bounds.push(aom_scaling_bound(n, x, eps, k).unwrap());
    }
    let nonincreasing = probs.windows(2).all(|w| w[1] <= w[0]);
    let halved = probs[3] <= 0.5 * probs[0];
    let decreasing = bounds.windows(2).all(|w| w[1] < w[0]);
    outcome(
        nonincreasing && halved && decreasing,
        format!(
            "Pr(AOM > x) = {probs:?} (nonincreasing: {nonincreasing}, final ≤ half first: {halved}); \
             bound = {:?} (strictly decreasing: {decreasing})",
            bounds.iter().map(|b| format!("{b:.1}")).collect::<Vec<_>>()
        ),
    )
}

fn log_n_barrier() -> Outcome {
    let xs: Vec<f64> = (0..=5000).map(|i| 1.0 + 1e-3 * i as f64).collect();
    let mut cfs = Vec::new();
    let mut ratios = Vec::new();
    for n in [256usize, 1024, 4096] {
        let curve = empirical_ccdf(&CodeSpec::uncoded(n).unwrap(), 4, &xs, 100_000, 99).unwrap();
        let v = effective_cf(&curve, 1e-2).unwrap();
        cfs.push(v);
        ratios.push(v * v / (n as f64).ln());
    }
    let in_band = ratios.iter().all(|r| (0.7..=1.8).contains(r));
    let growing = cfs.windows(2).all(|w| w[1] > w[0]);
    outcome(
        in_band && growing,
        format!(
            "CF_eff = {:?}, CF_eff²/ln N = {:?}",
            cfs.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>(),
            ratios.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>()
        ),
    )
}

fn exact_identities() -> Outcome {
    let mut rng = trial_rng(5, 0);
    let mut problems = Vec::new();
    for trial in 0..200 {
        let n = [4, 16, 64, 100][trial % 4];
        let c = Codeword::new((0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect()).unwrap();
        let s = synthesize(&c, 4).unwrap();
        let cf = crest_factor(&s);
        for lambda in [cf, cf + 0.5] {
            let d = apply_sel(&s, &SelParams::new(lambda).unwrap());
            if aom(&d) != 0.0 {
                problems.push(format!("AOM {} at λ = CF{:+}", aom(&d), lambda - cf));
            }
        }
        let records = [
            apply_sel(&s, &SelParams::new(0.7 * cf).unwrap()),
            apply_cubic(&s, &CubicParams::new(1.0, 0.05).unwrap()),
        ];
        for r in &records {
            let exact = s
                .samples()
                .iter()
                .zip(r.distortion())
                .zip(r.clipped().samples())
                .all(|((o, d), out)| *o + *d == *out);
            if !exact {
                problems.push("decomposition not bit-exact".into());
            }
        }
    }
    for n in [1usize, 2, 16, 64, 1024] {
        for l in [1, 4] {
            let cf = crest_factor(&synthesize(&Codeword::all_ones(n).unwrap(), l).unwrap());
            if (cf - (n as f64).sqrt()).abs() > 1e-9 {
                problems.push(format!("all-ones CF {cf} at N={n}"));
            }
        }
    }
    if (ck(3).unwrap() - 2.0).abs() > 1e-12 || (ck(4).unwrap() - 2f64.sqrt()).abs() > 1e-12 {
        problems.push("ck mismatch".into());
    }
    outcome(
        problems.is_empty(),
        format!("{} problems {:?}", problems.len(), problems.first()),
    )
}

fn secant(k: u32) -> f64 {
    1.0 / (PI / k as f64).cos()
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Direct evaluation with plain `cosh`, as written.
fn naive(n: usize, x: f64, rho: f64, general: bool) -> f64 {
    let nf = n as f64;
    let pre = (3..=64u32)
        .map(|k| 2.0 * nf * k as f64 * (-rho * nf.sqrt() * x / secant(k)).exp())
        .fold(f64::INFINITY, f64::min);
    let m1 = 2f64.powi(n as i32);
    if general {
        let f = pre * (rho * nf.powf(0.75)).cosh().sqrt();
        let s: f64 = (0..=n)
            .map(|k| f * binomial(n, k) * (rho * nf.powf(0.25) * (nf - 2.0 * k as f64)).cosh())
            .sum();
        (s / m1).sqrt()
    } else {
        let s: f64 = (0..=n)
            .map(|k| pre * binomial(n, k) * (rho * (nf - 2.0 * k as f64)).cosh())
            .sum();
        s / m1
    }
}

fn numerical_stability() -> Outcome {
    let rhos = log_space(1e-4, 1e2, 61);
    let big = 4096;
    let dd = DistanceDistribution::full_space(big, DistributionFlavor::Distance);
    let dw = DistanceDistribution::full_space(big, DistributionFlavor::Weight);
    let mut nonfinite = 0;
    for &rho in &rhos {
        for x in [1.0, 4.0, 10.0] {
            nonfinite += usize::from(!ln_thm1_at(&dd, x, 1, &(3..=64), rho).unwrap().is_finite());
            nonfinite += usize::from(!ln_thm2_at(&dw, x, 1, &(3..=64), rho).unwrap().is_finite());
        }
    }
    let q = BoundQuery::new(4.0, big, 1);
    let opt1 = thm1_bound(&q.clone().with_distribution(dd)).unwrap();
    let opt2 = thm2_bound(&q.with_distribution(dw)).unwrap();
    nonfinite += usize::from(!opt1.ln_value.is_finite()) + usize::from(!opt2.ln_value.is_finite());

    let (mut compared, mut worst) = (0, 0.0f64);
    for n in [4usize, 8, 16, 32] {
        let dd = DistanceDistribution::full_space(n, DistributionFlavor::Distance);
        let dw = DistanceDistribution::full_space(n, DistributionFlavor::Weight);
        for &rho in &rhos {
            for x in [1.0, 2.0, 3.0] {
                for general in [true, false] {
                    let reference = naive(n, x, rho, general);
                    if !reference.is_normal() {
                        continue;
                    }
                    let ln = if general {
                        ln_thm1_at(&dd, x, 1, &(3..=64), rho).unwrap()
                    } else {
                        ln_thm2_at(&dw, x, 1, &(3..=64), rho).unwrap()
                    };
                    compared += 1;
                    worst = worst.max((ln.exp() - reference).abs() / reference);
                }
            }
        }
    }
    outcome(
        nonfinite == 0 && worst <= 1e-9,
        format!(
            "N=4096: {nonfinite} non-finite values, optimized ln bounds {:.1} / {:.1}; \
             {compared} naive comparisons, worst relative error {worst:.2e}",
            opt1.ln_value, opt2.ln_value
        ),
    )
}

const DETERMINISM_CONFIGS: [(&str, &str); 6] = [
    (
        "ccdf",
        "experiment = \"ccdf\"\nn = 64\noversampling = 4\ntrials = 10000\nseed = 7\n\
         threshold_range = { start = 1.0, stop = 5.0, step = 0.1 }\n",
    ),
    (
        "bounds",
        "experiment = \"bounds-compare\"\nn = 10\noversampling = 2\nk_max = 12\n\
         threshold_range = { start = 1.0, stop = 3.0, step = 0.5 }\n",
    ),
    (
        "effective",
        "experiment = \"effective-cf\"\nn_list = [64, 256]\noversampling = 4\ntrials = 20000\nseed = 3\n\
         epsilons = [0.1, 0.01, 0.001]\n",
    ),
    (
        "aom",
        "experiment = \"aom-scaling\"\nn_list = [64, 256, 1024]\nx = 0.01\nepsilon = 0.1\ntrials = 2000\nseed = 5\n",
    ),
    (
        "balance",
        "experiment = \"balance\"\nn = 32\ntrials = 20000\nseed = 1\nthresholds = [0.001, 0.01, 0.1]\n\
         [amplifier]\nmodel = \"sel\"\nlambda = 2.0\n",
    ),
    (
        "codecf",
        "experiment = \"code-cf\"\noversampling_list = [1, 2, 8]\n\
         [code]\nkind = \"generator\"\nrows = [\"1000110\", \"0100101\", \"0010011\", \"0001111\"]\n",
    ),
];

fn run_cli(config: &Path, out: &Path, threads: &str) -> Vec<u8> {
    let status = Command::new(env!("CARGO_BIN_EXE_ofdm-cf"))
        .args(["run", "--threads", threads, "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .status()
        .unwrap();
    assert!(status.success(), "{} failed", config.display());
    fs::read(out).unwrap()
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut differing = Vec::new();
    for (name, text) in DETERMINISM_CONFIGS {
        let cfg = dir.path().join(format!("{name}.toml"));
        fs::write(&cfg, text).unwrap();
        let a = run_cli(&cfg, &dir.path().join(format!("{name}-a.csv")), "1");
        let b = run_cli(&cfg, &dir.path().join(format!("{name}-b.csv")), "8");
        let c = run_cli(&cfg, &dir.path().join(format!("{name}-c.csv")), "8");
        if a != b || b != c {
            differing.push(name);
        }
    }
    outcome(
        differing.is_empty(),
        format!(
            "{} experiment configs, differing: {differing:?}",
            DETERMINISM_CONFIGS.len()
        ),
    )
}
