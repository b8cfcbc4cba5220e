use std::path::{Path, PathBuf};

use hawkes_core::estimate::{
    fit_with_support, full_support, FitConfig, FitResult, IntervalKind, SupportSelection, ThresholdScore, TrainedFit,
};
use hawkes_core::experiment::{default_eps_grid, run_benchmark, BenchConfig};
use hawkes_core::io::{self, write_atomic, ModelDocument};
use hawkes_core::likelihood::per_dimension_log_likelihood;
use hawkes_core::{
    choose_epsilon, confidence_select, gof_report, resample_concatenate, spectral_radius, threshold_select,
    EventSequence, GofOptions, HawkesModel, Objective, Scenario, SimConfig, StopRule,
};
use log::{info, warn};
use serde_json::{json, Map, Value};

use crate::failure::Failure;
use crate::{BenchArgs, FitArgs, GofArgs, MethodArg, ObjectiveArg, ScoreArg, SelectArgs, SimulateArgs};

type CmdResult = Result<(), Failure>;

fn load_model(path: &Path) -> Result<HawkesModel, Failure> {
    io::read_model(path)
        .map(|doc| doc.model)
        .map_err(|e| Failure::from_input(e, path))
}

fn load_events(paths: &[PathBuf], dim: Option<usize>) -> Result<Vec<EventSequence>, Failure> {
    let seqs = paths
        .iter()
        .map(|p| io::read_events(p, dim).map_err(|e| Failure::from_input(e, p)))
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(first) = seqs.first() {
        if let Some((p, s)) = paths.iter().zip(&seqs).find(|(_, s)| s.dim() != first.dim()) {
            return Err(Failure::data(format!(
                "{} has dimension {} but {} has {}",
                p.display(),
                s.dim(),
                paths[0].display(),
                first.dim()
            )));
        }
    }
    Ok(seqs)
}

fn check_dims(model: &HawkesModel, seqs: &[EventSequence]) -> CmdResult {
    match seqs.first() {
        Some(s) if s.dim() != model.dim() => Err(Failure::data(format!(
            "model has dimension {} but the events have dimension {}",
            model.dim(),
            s.dim()
        ))),
        _ => Ok(()),
    }
}

fn write_text(path: &Path, text: &str) -> CmdResult {
    Ok(write_atomic(path, text.as_bytes())?)
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn score(arg: ScoreArg) -> ThresholdScore {
    match arg {
        ScoreArg::Alpha => ThresholdScore::Alpha,
        ScoreArg::KernelMass => ThresholdScore::KernelMass,
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("plain data serializes")
}

fn fit_meta(fit: &FitResult, n_sequences: usize) -> Map<String, Value> {
    let Value::Object(map) = json!({
        "objective": fit.objective,
        "loglik": fit.loglik,
        "per_dimension_loglik": fit.per_dimension_loglik,
        "converged": fit.converged,
        "per_dimension_converged": fit.per_dimension_converged,
        "n_evals": fit.n_evals,
        "n_sequences": n_sequences,
    }) else {
        unreachable!()
    };
    map
}

pub fn simulate(a: SimulateArgs) -> CmdResult {
    let model = match (&a.model, &a.scenario) {
        (Some(path), _) => load_model(path)?,
        (None, Some(name)) => hawkes_core::scenario(name, None)?,
        (None, None) => return Err(Failure::usage("give a model file or --scenario")),
    };
    let stop = match (a.events, a.horizon) {
        (Some(0), _) => return Err(Failure::usage("--events must be at least 1")),
        (Some(n), _) => StopRule::Events(n),
        (None, Some(t)) => StopRule::Horizon(t),
        (None, None) => return Err(Failure::usage("give --events or --horizon")),
    };
    let rho = spectral_radius(&model);
    if !rho.stable {
        warn!(
            "spectral radius of the positive kernel mass matrix is {:.4} >= 1; the process may explode",
            rho.radius
        );
    }
    let seq = hawkes_core::simulate(&SimConfig::new(model, stop, a.seed))?;
    io::write_events(&a.out, &seq)?;
    info!(
        "wrote {} events on [0, {}] to {}",
        seq.len(),
        seq.horizon(),
        a.out.display()
    );
    Ok(())
}

pub fn fit(a: FitArgs) -> CmdResult {
    let seqs = load_events(&a.events, a.dim)?;
    if seqs.iter().all(|s| s.is_empty()) {
        return Err(Failure::data("the event files contain no events"));
    }
    let objective = match a.objective {
        ObjectiveArg::Exact => Objective::Exact,
        ObjectiveArg::Approx => Objective::Approx,
    };
    let config = FitConfig::default()
        .with_objective(objective)
        .with_restarts(a.restarts)
        .with_seed(a.seed);
    let d = seqs[0].dim();
    let frozen = vec![vec![false; d]; d];
    let support = a.no_interactions.then_some(frozen.as_slice());
    let result = fit_with_support(&seqs, &config, support, None)?;
    if !result.converged {
        warn!("optimizer stopped before convergence in some dimension");
    }
    let doc = ModelDocument::with_meta(result.model.clone(), fit_meta(&result, seqs.len()));
    io::write_model(&a.out, &doc)?;
    println!("loglik {:.6}", result.loglik);
    Ok(())
}

/// Cuts `seq` into `w` consecutive windows of equal length, each shifted to
/// start at zero.
fn split_windows(seq: &EventSequence, w: usize) -> Result<Vec<EventSequence>, Failure> {
    if w < 2 {
        return Err(Failure::usage("--windows must be at least 2"));
    }
    let len = seq.horizon() / w as f64;
    (0..w)
        .map(|k| {
            let lo = k as f64 * len;
            let hi = if k + 1 == w {
                seq.horizon()
            } else {
                (k + 1) as f64 * len
            };
            let (times, marks): (Vec<f64>, Vec<usize>) = seq
                .iter()
                .filter(|&(t, _)| t > lo && t <= hi)
                .map(|(t, m)| (t - lo, m))
                .filter(|&(t, _)| t > 0.0)
                .unzip();
            Ok(EventSequence::new(times, marks, seq.dim(), hi - lo)?)
        })
        .collect()
}

fn fit_from_model(model: &HawkesModel, seqs: &[EventSequence]) -> FitResult {
    let mut per_dim = vec![0.0; model.dim()];
    for s in seqs {
        for (acc, v) in per_dim
            .iter_mut()
            .zip(per_dimension_log_likelihood(model, s, Objective::Exact))
        {
            *acc += v;
        }
    }
    FitResult {
        model: model.clone(),
        loglik: per_dim.iter().sum(),
        per_dimension_loglik: per_dim,
        converged: true,
        per_dimension_converged: vec![true; model.dim()],
        n_evals: 0,
        objective: Objective::Exact,
    }
}

fn parse_level(raw: &str) -> Result<f64, Failure> {
    raw.parse()
        .map_err(|_| Failure::usage(format!("--level must be a number or 'auto', got '{raw}'")))
}

pub fn select(a: SelectArgs) -> CmdResult {
    let model = load_model(&a.model)?;
    let seqs = load_events(&a.events, a.dim.or(Some(model.dim())))?;
    check_dims(&model, &seqs)?;
    let config = FitConfig::default().with_restarts(a.restarts).with_seed(a.seed);
    let mut extra = Map::new();

    let selection: SupportSelection = match a.method {
        MethodArg::Eps => {
            let fit = fit_from_model(&model, &seqs);
            let level = a.level.as_deref().unwrap_or("auto");
            if level == "auto" {
                if a.test.is_empty() {
                    return Err(Failure::usage("--level auto needs held-out files via --test"));
                }
                let tests = load_events(&a.test, Some(model.dim()))?;
                check_dims(&model, &tests)?;
                let trained = [TrainedFit {
                    fit: &fit,
                    train: &seqs,
                }];
                let choice = choose_epsilon(
                    &trained,
                    &tests,
                    &default_eps_grid(),
                    &config,
                    score(a.score),
                    &GofOptions::default(),
                )?;
                extra.insert("epsilon_scores".into(), to_value(&choice.scores));
                choice
                    .selections
                    .into_iter()
                    .next()
                    .expect("one fit gives one selection")
            } else {
                let eps = parse_level(level)?;
                if eps == 0.0 {
                    SupportSelection {
                        support: full_support(model.dim()),
                        method: hawkes_core::SelectionMethod::MleEps,
                        level: 0.0,
                        refit: fit,
                        intervals: None,
                        pvalues: None,
                    }
                } else {
                    threshold_select(&fit, &seqs, eps, &config, score(a.score))?
                }
            }
        }
        MethodArg::Cfe | MethodArg::Cfst => {
            let gamma = match a.level.as_deref() {
                None => 0.1,
                Some("auto") => return Err(Failure::usage("--level auto only applies to --method eps")),
                Some(raw) => parse_level(raw)?,
            };
            let realizations =
                match a.resample {
                    Some(k) => {
                        let base = if seqs.len() == 1 {
                            split_windows(&seqs[0], a.windows)?
                        } else {
                            seqs.clone()
                        };
                        resample_concatenate(&base, k, a.reps, a.seed)?
                    }
                    None if seqs.len() < 2 => return Err(Failure::usage(
                        "confidence selection needs several events files, or --resample to build pseudo-realizations",
                    )),
                    None => seqs.clone(),
                };
            let fits = realizations
                .iter()
                .enumerate()
                .map(|(r, s)| {
                    let cfg = config.clone().with_seed(a.seed.wrapping_add(r as u64));
                    fit_with_support(std::slice::from_ref(s), &cfg, None, Some(&model))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let kind = if a.method == MethodArg::Cfe {
                IntervalKind::Empirical
            } else {
                IntervalKind::Student
            };
            confidence_select(&fits, &realizations, gamma, kind, &config)?
        }
    };

    let signs = selection.sign_matrix();
    extra.insert("method".into(), to_value(&selection.method));
    extra.insert("level".into(), json!(selection.level));
    extra.insert("support".into(), to_value(&selection.support));
    extra.insert("signs".into(), to_value(&signs));
    if let Some(iv) = &selection.intervals {
        extra.insert("intervals".into(), to_value(iv));
    }
    if let Some(p) = &selection.pvalues {
        extra.insert("pvalues".into(), to_value(p));
    }
    let mut meta = fit_meta(&selection.refit, seqs.len());
    meta.extend(extra);
    io::write_model(&a.out, &ModelDocument::with_meta(selection.refit.model.clone(), meta))?;
    let support_path = a.support_out.unwrap_or_else(|| with_suffix(&a.out, ".support.csv"));
    write_text(&support_path, &sign_csv(&signs))?;
    println!("level {} support {:?}", selection.level, signs);
    Ok(())
}

fn sign_csv(signs: &[Vec<i8>]) -> String {
    signs
        .iter()
        .map(|row| row.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",") + "\n")
        .collect()
}

pub fn gof(a: GofArgs) -> CmdResult {
    let model = load_model(&a.model)?;
    let seqs = load_events(&a.events, Some(model.dim()))?;
    check_dims(&model, &seqs)?;
    let opts = GofOptions {
        q: a.level,
        include_first: a.include_first,
    };
    let report = gof_report(&model, &seqs, &opts)?;
    for w in &report.warnings {
        warn!("{w}");
    }
    let json = serde_json::to_string_pretty(&report).map_err(|e| Failure::data(e.to_string()))?;
    write_text(&a.out, &json)?;
    write_text(
        &a.csv.unwrap_or_else(|| with_suffix(&a.out, ".ordered.csv")),
        &report.ordered_csv(),
    )?;
    let d = model.dim();
    for (h, p) in report.all_p().iter().enumerate() {
        let name = if h == d { "tot".to_string() } else { (h + 1).to_string() };
        match p {
            Some(p) => println!("p_{name} {p:.4} rejected {}", report.bh_rejected[h]),
            None => println!("p_{name} unavailable"),
        }
    }
    Ok(())
}

pub fn bench(a: BenchArgs) -> CmdResult {
    if a.replications == 0 {
        return Err(Failure::usage("--replications must be at least 1"));
    }
    if a.events == 0 {
        return Err(Failure::usage("--events must be at least 1"));
    }
    let sc: Scenario = a.scenario.parse()?;
    let model = match (sc.builtin(), &a.model) {
        (Some(m), None) => m,
        (Some(_), Some(_)) => return Err(Failure::usage("--model only applies to the D10-spec scenario")),
        (None, Some(path)) => load_model(path)?,
        (None, None) => return Err(Failure::usage("scenario D10-spec needs --model")),
    };
    let mut config = BenchConfig::new(model, a.replications, a.events, a.seed);
    config.fit = config.fit.with_restarts(a.restarts).with_seed(a.seed);
    config.score = score(a.score);
    config.gamma = a.gamma;
    let outcome = run_benchmark(&config)?;
    for w in &outcome.warnings {
        warn!("{w}");
    }

    std::fs::create_dir_all(&a.out).map_err(|e| Failure::data(format!("creating {}: {e}", a.out.display())))?;
    for rep in &outcome.replications {
        let path = a.out.join(format!("replication_{:03}.json", rep.index));
        let json = serde_json::to_string_pretty(rep).map_err(|e| Failure::data(e.to_string()))?;
        write_text(&path, &json)?;
    }
    let summary = json!({
        "config": outcome.config,
        "epsilon": outcome.epsilon,
        "epsilon_scores": outcome.epsilon_scores,
        "cfe_support": outcome.cfe_support,
        "cfst_support": outcome.cfst_support,
        "summary": outcome.summary,
        "warnings": outcome.warnings,
    });
    write_text(
        &a.out.join("summary.json"),
        &serde_json::to_string_pretty(&summary).expect("plain data"),
    )?;
    write_text(&a.out.join("errors.csv"), &outcome.error_table_csv())?;
    write_text(&a.out.join("pvalues.csv"), &outcome.pvalue_table_csv())?;
    print!("{}", outcome.pvalue_table_csv());
    Ok(())
}
