//! Acceptance suite. Prints one PASS/FAIL line per criterion. Pass criterion
//! ids (`c1` … `c8`, `d10`) as arguments to run a subset. Failures are
//! reported but only change the exit status when `HAWKES_ACCEPTANCE_STRICT=1`.

mod common;

use std::path::Path;
use std::time::{Duration, Instant};

use common::*;
use hawkes_core::estimate::{
    benjamini_hochberg, choose_epsilon, confidence_support, fit, refit_on_support, threshold_support, zero_outside,
    FitConfig, FitResult, IntervalKind, ThresholdScore, TrainedFit,
};
use hawkes_core::experiment::{default_eps_grid, support_of};
use hawkes_core::io::{self, ModelDocument};
use hawkes_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Tolerances and thresholds, one per criterion.
const C1_INSTANCES: usize = 200;
const C1_REL_TOL: f64 = 1e-8;
const C1_LIMIT: Duration = Duration::from_secs(60);
const C2_INSTANCES: usize = 100;
const C2_ABS_TOL: f64 = 1e-9;
const C2_LIMIT: Duration = Duration::from_secs(60);
const C3_PROBES: usize = 10_000;
const C3_ABS_TOL: f64 = 1e-10;
const C4_HORIZON: f64 = 5000.0;
const C4_SE_MULT: f64 = 3.0;
const C5_RUNS: u64 = 100;
const C5_EVENTS: usize = 1000;
const C5_MAX_REJECT: f64 = 0.10;
const C5_TABLE: [f64; 3] = [0.492, 0.438, 0.430];
const C5_BAND: f64 = 0.15;
const C6_REPS: u64 = 10;
const C6_EVENTS: usize = 2000;
const C6_MLE_MIN_PTOT: f64 = 0.2;
const C6_APPROX_MAX_P: f64 = 0.05;
const C6_LIMIT: Duration = Duration::from_secs(600);
const C7_BATCHES: u64 = 5;
const C7_REPS: u64 = 25;
const C7_EVENTS: usize = 2000;
const C7_MIN_RECOVERY: f64 = 0.60;
const C7_GAMMA: f64 = 0.1;
const C8_GRAD_REL_TOL: f64 = 1e-5;
const C8_LIMIT: Duration = Duration::from_secs(30);
const D10_REPS: u64 = 25;
const D10_EVENTS: usize = 4000;
const D10_MIN_SIGNS: f64 = 0.90;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn sim(model: &HawkesModel, n: usize, seed: u64) -> EventSequence {
    simulate(&SimConfig::new(model.clone(), StopRule::Events(n), seed)).unwrap()
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Verdict) -> (Verdict, Duration) {
    let start = Instant::now();
    let mut v = f();
    let took = start.elapsed();
    if let Some(limit) = limit {
        if took > limit {
            v.pass = false;
            v.detail.push_str(&format!("; over the {} s limit", limit.as_secs()));
        }
    }
    (v, took)
}

fn c1() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    let mut checks = 0;
    for _ in 0..C1_INSTANCES {
        let d = rng.random_range(1..=4);
        let n = rng.random_range(1..=200);
        let m = random_model(&mut rng, d);
        let horizon = rng.random_range(0.5..3.0) * n as f64 / d as f64;
        let s = random_sequence(&mut rng, d, n, horizon);
        for i in 0..d {
            let lib = compensator(&m, &s, i, s.horizon()).unwrap();
            let quad = quad_compensator(&m, &s, i, s.horizon());
            worst = worst.max((lib - quad).abs() / quad.abs());
            checks += 1;
        }
    }
    verdict(
        worst < C1_REL_TOL,
        format!("{C1_INSTANCES} instances, {checks} compensators, max relative error {worst:.2e} (tol {C1_REL_TOL:e})"),
    )
}

fn c2() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst: f64 = 0.0;
    for k in 0..C2_INSTANCES {
        let d = rng.random_range(1..=4);
        let n = rng.random_range(2..=200);
        let m = random_stable_model(&mut rng, d);
        let s = sim(&m, n, 2000 + k as u64);
        let naive = naive_log_likelihood(&m, &s).expect("simulated events have positive intensity");
        worst = worst.max((log_likelihood(&m, &s) - naive).abs());
    }
    verdict(
        worst < C2_ABS_TOL,
        format!("{C2_INSTANCES} instances, max absolute error {worst:.2e} (tol {C2_ABS_TOL:e})"),
    )
}

fn c3() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut interior = 0;
    let mut worst: f64 = 0.0;
    let mut probes = 0;
    while probes < C3_PROBES {
        let d = rng.random_range(1..=4);
        let n = rng.random_range(2..=60);
        let m = random_model(&mut rng, d);
        let s = random_sequence(&mut rng, d, n, n as f64 / d as f64);
        for _ in 0..50 {
            let k = rng.random_range(0..s.len());
            let i = rng.random_range(0..d);
            let t_k = s.times()[k];
            let t_next = s.times().get(k + 1).copied().unwrap_or(s.horizon());
            if t_next <= t_k {
                continue;
            }
            let lam = underlying_intensity(&m, &s, i, t_k).unwrap();
            let r = restart_time(&m, lam, i, t_k, t_next).unwrap();
            probes += 1;
            if r > t_k && r < t_next {
                interior += 1;
                let lib = underlying_intensity(&m, &s, i, r).unwrap();
                let direct = direct_underlying(&m, &s, i, r, false);
                worst = worst.max(lib.abs()).max(direct.abs());
            }
        }
    }
    verdict(
        worst < C3_ABS_TOL && interior > 0,
        format!("{probes} probes, {interior} interior restarts, max |λ*(T*)| {worst:.2e} (tol {C3_ABS_TOL:e})"),
    )
}

fn c4() -> Verdict {
    let hawkes = HawkesModel::new(vec![1.0], vec![vec![0.5]], vec![1.0]).unwrap();
    let s = simulate(&SimConfig::new(hawkes, StopRule::Horizon(C4_HORIZON), 404)).unwrap();
    let rate = s.len() as f64 / C4_HORIZON;
    // asymptotic variance of N(T)/T is μ / (1 - α/β)³ / T
    let se = (1.0 / 0.5f64.powi(3) / C4_HORIZON).sqrt();
    let poisson = HawkesModel::new(vec![1.0], vec![vec![0.0]], vec![1.0]).unwrap();
    let p = simulate(&SimConfig::new(poisson, StopRule::Horizon(C4_HORIZON), 405)).unwrap();
    let p_rate = p.len() as f64 / C4_HORIZON;
    let p_se = (1.0 / C4_HORIZON).sqrt();
    let ok = (rate - 2.0).abs() < C4_SE_MULT * se && (p_rate - 1.0).abs() < C4_SE_MULT * p_se;
    verdict(
        ok,
        format!(
            "linear Hawkes rate {rate:.4} vs 2 (se {se:.4}); Poisson rate {p_rate:.4} vs 1 (se {p_se:.4}); within {C4_SE_MULT} se"
        ),
    )
}

fn c5() -> Verdict {
    let m = scenario("S1", None).unwrap();
    let mut rejections = [0usize; 2];
    let mut sums = [0.0; 3];
    for k in 0..C5_RUNS {
        let s = sim(&m, C5_EVENTS, 5000 + k);
        let r = gof_report(&m, &[s], &GofOptions::default()).unwrap();
        let p = r.all_p();
        for i in 0..2 {
            if p[i].unwrap() < 0.05 {
                rejections[i] += 1;
            }
        }
        for h in 0..3 {
            sums[h] += p[h].unwrap();
        }
    }
    let rates = rejections.map(|r| r as f64 / C5_RUNS as f64);
    let means = sums.map(|s| s / C5_RUNS as f64);
    let ok =
        rates.iter().all(|&r| r <= C5_MAX_REJECT) && means.iter().zip(C5_TABLE).all(|(m, t)| (m - t).abs() <= C5_BAND);
    verdict(
        ok,
        format!(
            "KS rejection rates {:.2}, {:.2} (max {C5_MAX_REJECT}); mean p_1 {:.3}, p_2 {:.3}, p_tot {:.3} vs {:?} ± {C5_BAND}",
            rates[0], rates[1], means[0], means[1], means[2], C5_TABLE
        ),
    )
}

fn mean_p(models: &[HawkesModel], tests: &[EventSequence]) -> [f64; 3] {
    let mut sums = [0.0; 3];
    for (m, t) in models.iter().zip(tests) {
        let r = gof_report(m, std::slice::from_ref(t), &GofOptions::default()).unwrap();
        for (s, p) in sums.iter_mut().zip(r.all_p()) {
            *s += p.unwrap();
        }
    }
    sums.map(|s| s / models.len() as f64)
}

fn c6() -> Verdict {
    let m = scenario("S3", None).unwrap();
    let train: Vec<EventSequence> = (0..C6_REPS).map(|r| sim(&m, C6_EVENTS, 6000 + r)).collect();
    let test: Vec<EventSequence> = (0..C6_REPS).map(|r| sim(&m, C6_EVENTS, 6500 + r)).collect();
    let fit_all = |objective: Objective| -> Vec<HawkesModel> {
        train
            .iter()
            .enumerate()
            .map(|(r, s)| {
                let cfg = FitConfig::default().with_objective(objective).with_seed(r as u64);
                fit(std::slice::from_ref(s), &cfg).unwrap().model
            })
            .collect()
    };
    let mle = mean_p(&fit_all(Objective::Exact), &test);
    let approx = mean_p(&fit_all(Objective::Approx), &test);
    let ok = mle[2] > C6_MLE_MIN_PTOT && approx.iter().all(|&p| p < C6_APPROX_MAX_P);
    verdict(
        ok,
        format!(
            "MLE p_tot {:.3} (need > {C6_MLE_MIN_PTOT}); Approx p_1 {:.3}, p_2 {:.3}, p_tot {:.3} (need all < {C6_APPROX_MAX_P})",
            mle[2], approx[0], approx[1], approx[2]
        ),
    )
}

struct Batch {
    cfe: Option<Support>,
    cfst: Option<Support>,
    eps_null_zeroed: usize,
    epsilon: f64,
}

type Support = Vec<Vec<bool>>;

fn c7_batch(model: &HawkesModel, null: (usize, usize), seed: u64) -> Batch {
    let train: Vec<EventSequence> = (0..C7_REPS).map(|r| sim(model, C7_EVENTS, seed + r)).collect();
    let test: Vec<EventSequence> = (0..C7_REPS).map(|r| sim(model, C7_EVENTS, seed + 50_000 + r)).collect();
    let fits: Vec<FitResult> = train
        .iter()
        .enumerate()
        .map(|(r, s)| {
            fit(
                std::slice::from_ref(s),
                &FitConfig::default().with_seed(seed + r as u64),
            )
            .unwrap()
        })
        .collect();
    let models: Vec<&HawkesModel> = fits.iter().map(|f| &f.model).collect();
    let cfe = confidence_support(&models, C7_GAMMA, IntervalKind::Empirical)
        .ok()
        .map(|c| c.support);
    let cfst = confidence_support(&models, C7_GAMMA, IntervalKind::Student)
        .ok()
        .map(|c| c.support);
    let trained: Vec<TrainedFit<'_>> = fits
        .iter()
        .zip(&train)
        .map(|(f, s)| TrainedFit {
            fit: f,
            train: std::slice::from_ref(s),
        })
        .collect();
    let choice = choose_epsilon(
        &trained,
        &test,
        &default_eps_grid(),
        &FitConfig::default(),
        ThresholdScore::Alpha,
        &GofOptions::default(),
    )
    .unwrap();
    let eps_null_zeroed = choice.selections.iter().filter(|s| !s.support[null.0][null.1]).count();
    Batch {
        cfe,
        cfst,
        eps_null_zeroed,
        epsilon: choice.epsilon,
    }
}

fn c7() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, null, seed) in [("S2", (0, 1), 700_000u64), ("S3", (1, 0), 800_000u64)] {
        let m = scenario(name, None).unwrap();
        let truth = support_of(&m);
        let batches: Vec<Batch> = (0..C7_BATCHES).map(|b| c7_batch(&m, null, seed + 1000 * b)).collect();
        let rate = |get: &dyn Fn(&Batch) -> &Option<Support>| {
            batches.iter().filter(|b| get(b).as_ref() == Some(&truth)).count() as f64 / C7_BATCHES as f64
        };
        let cfe = rate(&|b| &b.cfe);
        let cfst = rate(&|b| &b.cfst);
        let zeroed: usize = batches.iter().map(|b| b.eps_null_zeroed).sum();
        let eps_rate = zeroed as f64 / (C7_BATCHES * C7_REPS) as f64;
        let eps: Vec<f64> = batches.iter().map(|b| b.epsilon).collect();
        ok &= cfe >= C7_MIN_RECOVERY && cfst >= C7_MIN_RECOVERY && eps_rate > 0.5;
        parts.push(format!(
            "{name}: CfE {cfe:.2}, CfSt {cfst:.2} exact recovery over {C7_BATCHES} runs; MLE-eps zeroes the null in {eps_rate:.2} of replications (eps {eps:?})"
        ));
    }
    verdict(
        ok,
        format!("{} (need >= {C7_MIN_RECOVERY} and > 0.5)", parts.join("; ")),
    )
}

fn c8_bh() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(81);
    let mut bad = 0;
    for _ in 0..5000 {
        let n = rng.random_range(1..30);
        let p: Vec<f64> = (0..n).map(|_| rng.random::<f64>().powi(3)).collect();
        let (a, b) = (rng.random::<f64>(), rng.random::<f64>());
        let (lo, hi) = (a.min(b), a.max(b));
        let r_lo = benjamini_hochberg(&p, lo, n).unwrap();
        let r_hi = benjamini_hochberg(&p, hi, n).unwrap();
        bad += r_lo.iter().zip(&r_hi).filter(|(x, y)| **x && !**y).count();
    }
    verdict(bad == 0, format!("BH monotone in q over 5000 cases ({bad} violations)"))
}

fn c8_threshold() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(82);
    let mut bad = 0;
    for _ in 0..5000 {
        let d = rng.random_range(1..=5);
        let m = random_model(&mut rng, d);
        let (a, b): (f64, f64) = (rng.random_range(1e-6..0.999), rng.random_range(1e-6..0.999));
        let lo = threshold_support(&m, a.min(b), ThresholdScore::Alpha).unwrap();
        let hi = threshold_support(&m, a.max(b), ThresholdScore::Alpha).unwrap();
        bad += lo
            .iter()
            .flatten()
            .zip(hi.iter().flatten())
            .filter(|(l, h)| !**l && **h)
            .count();
    }
    verdict(
        bad == 0,
        format!("threshold support monotone in eps over 5000 cases ({bad} violations)"),
    )
}

fn c8_refit() -> Verdict {
    let mut failures = Vec::new();
    let mut checked = 0;
    for (name, seed) in [("S2", 83u64), ("S3", 84)] {
        let m = scenario(name, None).unwrap();
        let s = sim(&m, 1000, seed);
        let cfg = FitConfig::default().with_restarts(3);
        let full = fit(std::slice::from_ref(&s), &cfg).unwrap();
        for eps in [0.05, 0.15, 0.3, 0.5] {
            let support = threshold_support(&full.model, eps, ThresholdScore::Alpha).unwrap();
            let refit = refit_on_support(&full.model, std::slice::from_ref(&s), &support, &cfg).unwrap();
            let zeroed = log_likelihood(&zero_outside(&full.model, &support), &s);
            checked += 1;
            if !(refit.loglik <= full.loglik + 1e-6 * full.loglik.abs() && refit.loglik >= zeroed) {
                failures.push(format!(
                    "{name} eps {eps}: {zeroed} <= {} <= {}",
                    refit.loglik, full.loglik
                ));
            }
        }
    }
    verdict(
        failures.is_empty(),
        format!(
            "zeroed <= refit <= unconstrained log-likelihood in {} of {checked} cases {}",
            checked - failures.len(),
            failures.join("; ")
        )
        .trim_end()
        .to_string(),
    )
}

fn c8_gradient() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for seed in 0..40 {
        if let Some(err) = gradient_agreement(seed) {
            worst = worst.max(err);
            checked += 1;
        }
    }
    verdict(
        worst < C8_GRAD_REL_TOL && checked >= 30,
        format!("central differences vs analytic gradient at {checked} smooth points, max relative error {worst:.2e} (tol {C8_GRAD_REL_TOL:e})"),
    )
}

fn c8_round_trip() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(85);
    let mut bad = 0;
    for k in 0..500 {
        let d = rng.random_range(1..=5);
        let n = rng.random_range(1..=100);
        let m = random_model(&mut rng, d);
        let horizon = rng.random_range(0.5..50.0);
        let s = random_sequence(&mut rng, d, n, horizon);
        let ev_path = dir.path().join(format!("e{k}.csv"));
        io::write_events(&ev_path, &s).unwrap();
        bad += usize::from(io::read_events(&ev_path, None).unwrap() != s);
        let doc = ModelDocument::new(m);
        let model_path = dir.path().join(format!("m{k}.json"));
        io::write_model(&model_path, &doc).unwrap();
        bad += usize::from(io::read_model(&model_path).unwrap() != doc);
    }
    verdict(
        bad == 0,
        format!("500 event files and 500 model documents round-trip exactly ({bad} mismatches)"),
    )
}

/// Sparse 10-dimensional model: diagonal self-interaction plus a ring of
/// cross interactions with alternating signs.
fn d10_model() -> HawkesModel {
    let d = 10;
    let mut alpha = vec![vec![0.0; d]; d];
    for (i, row) in alpha.iter_mut().enumerate() {
        row[i] = if i % 2 == 0 { 1.2 } else { -1.5 };
        row[(i + 1) % d] = if i % 3 == 0 { -1.5 } else { 1.2 };
    }
    let mu = (0..d).map(|i| 0.6 + 0.05 * i as f64).collect();
    HawkesModel::new(mu, alpha, vec![4.0; d]).unwrap()
}

fn d10(dir: &Path) -> Verdict {
    let truth = d10_model();
    let path = dir.join("d10.json");
    io::write_model(&path, &ModelDocument::new(truth.clone())).unwrap();
    let m = scenario("D10-spec", Some(&path)).unwrap();
    assert_eq!(m, truth);
    let mut correct = 0;
    let mut total = 0;
    for r in 0..D10_REPS {
        let s = sim(&m, D10_EVENTS, 10_000 + r);
        let f = fit(&[s], &FitConfig::default().with_restarts(2).with_seed(r)).unwrap();
        for i in 0..10 {
            for j in 0..10 {
                let a = m.alpha(i, j);
                if a != 0.0 {
                    total += 1;
                    if f.model.alpha(i, j).signum() == a.signum() {
                        correct += 1;
                    }
                }
            }
        }
    }
    let rate = correct as f64 / total as f64;
    verdict(
        rate >= D10_MIN_SIGNS,
        format!("{correct}/{total} nonzero signs recovered over {D10_REPS} replications ({rate:.3}, need >= {D10_MIN_SIGNS})"),
    )
}

fn main() {
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let wanted = |id: &str| filters.is_empty() || filters.iter().any(|f| f == id);
    let tmp = tempfile::tempdir().unwrap();
    type Check<'a> = (&'a str, &'a str, Option<Duration>, Box<dyn Fn() -> Verdict + 'a>);
    let checks: Vec<Check<'_>> = vec![
        ("c1", "compensator matches quadrature", Some(C1_LIMIT), Box::new(c1)),
        ("c2", "streaming likelihood matches naive", Some(C2_LIMIT), Box::new(c2)),
        ("c3", "restart times are roots", None, Box::new(c3)),
        ("c4", "simulator stationary rates", None, Box::new(c4)),
        ("c5", "goodness-of-fit calibration", None, Box::new(c5)),
        (
            "c6",
            "scenario 3 MLE vs Approx separation",
            Some(C6_LIMIT),
            Box::new(c6),
        ),
        ("c7", "support recovery", None, Box::new(c7)),
        ("c8", "BH monotonicity", Some(C8_LIMIT), Box::new(c8_bh)),
        ("c8", "threshold monotonicity", Some(C8_LIMIT), Box::new(c8_threshold)),
        (
            "c8",
            "refit log-likelihood ordering",
            Some(C8_LIMIT),
            Box::new(c8_refit),
        ),
        (
            "c8",
            "finite-difference gradient",
            Some(C8_LIMIT),
            Box::new(c8_gradient),
        ),
        ("c8", "file round trips", Some(C8_LIMIT), Box::new(c8_round_trip)),
        (
            "d10",
            "10-dimensional sign recovery",
            None,
            Box::new(|| d10(tmp.path())),
        ),
    ];
    let mut failed = 0;
    let mut ran = 0;
    for (id, name, limit, check) in &checks {
        if !wanted(id) {
            continue;
        }
        ran += 1;
        let (v, took) = timed(*limit, check);
        if !v.pass {
            failed += 1;
        }
        println!(
            "{} {id:<3} {name}: {} [{:.1} s]",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            took.as_secs_f64()
        );
    }
    println!("acceptance: {} of {ran} checks passed, {failed} failed", ran - failed);
    let strict = std::env::var("HAWKES_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if failed > 0 && strict {
        std::process::exit(1);
    }
}
