//! Replicated simulation study: simulate train/test pairs from a known
//! model, estimate with every method, and summarise parameter errors and
//! goodness-of-fit p-values.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::estimate::{
    choose_epsilon, confidence_support, fit, refit_on_support, FitConfig, FitResult, IntervalKind, Support,
    ThresholdScore, TrainedFit,
};
use crate::events::EventSequence;
use crate::gof::{gof_report, GofOptions, GofReport};
use crate::likelihood::Objective;
use crate::model::HawkesModel;
use crate::sim::{simulate, SimConfig, StopRule};

/// Mixed into the base seed for test sequences so they never share a stream
/// with training sequences.
pub const TEST_SEED_MASK: u64 = 0x5DEE_CE66_D1CE_4E5B;

/// `‖θ̂_g − θ_g‖² / ‖θ_g‖²` for the groups `μ`, `α`, `β`. A group whose true
/// norm is zero reports the plain squared error.
pub fn relative_squared_error(estimate: &HawkesModel, truth: &HawkesModel) -> [f64; 3] {
    fn rel(a: &[f64], b: &[f64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
        let den: f64 = b.iter().map(|y| y * y).sum();
        if den > 0.0 {
            num / den
        } else {
            num
        }
    }
    [
        rel(estimate.mu(), truth.mu()),
        rel(estimate.alpha_flat(), truth.alpha_flat()),
        rel(estimate.beta(), truth.beta()),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    True,
    Mle,
    MleEps,
    Cfe,
    Cfst,
    Approx,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::True,
        Method::Mle,
        Method::MleEps,
        Method::Cfe,
        Method::Cfst,
        Method::Approx,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Method::True => "True",
            Method::Mle => "MLE",
            Method::MleEps => "MLE-eps",
            Method::Cfe => "CfE",
            Method::Cfst => "CfSt",
            Method::Approx => "Approx",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub model: HawkesModel,
    pub replications: usize,
    pub events: usize,
    pub seed: u64,
    pub fit: FitConfig,
    pub eps_grid: Vec<f64>,
    pub score: ThresholdScore,
    /// Confidence level of CfE / CfSt.
    pub gamma: f64,
    pub gof: GofOptions,
}

impl BenchConfig {
    pub fn new(model: HawkesModel, replications: usize, events: usize, seed: u64) -> Self {
        BenchConfig {
            model,
            replications,
            events,
            seed,
            fit: FitConfig::default(),
            eps_grid: default_eps_grid(),
            score: ThresholdScore::Alpha,
            gamma: 0.1,
            gof: GofOptions::default(),
        }
    }

    pub fn train_seed(&self, r: usize) -> u64 {
        self.seed.wrapping_add(r as u64)
    }

    pub fn test_seed(&self, r: usize) -> u64 {
        (self.seed ^ TEST_SEED_MASK).wrapping_add(r as u64)
    }
}

/// `{0.05, 0.10, …, 0.95}`.
pub fn default_eps_grid() -> Vec<f64> {
    (1..=19).map(|k| k as f64 * 0.05).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReplication {
    pub method: Method,
    pub model: HawkesModel,
    pub support: Support,
    /// Relative squared errors for `μ`, `α`, `β`.
    pub rse: [f64; 3],
    /// Goodness of fit on this replication's test sequence.
    pub gof: Option<GofReport>,
    pub loglik: Option<f64>,
    pub converged: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Replication {
    pub index: usize,
    pub train_seed: u64,
    pub test_seed: u64,
    pub train_events: usize,
    pub test_events: usize,
    pub methods: Vec<MethodReplication>,
}

impl Replication {
    pub fn method(&self, m: Method) -> Option<&MethodReplication> {
        self.methods.iter().find(|x| x.method == m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    pub mean_rse: [f64; 3],
    /// Mean over replications of `p_1, …, p_d, p_tot`.
    pub mean_p: Vec<Option<f64>>,
    /// Fraction of replications whose support equals the true support.
    pub support_recovery: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchOutcome {
    pub config: BenchConfig,
    pub epsilon: Option<f64>,
    pub epsilon_scores: Vec<(f64, f64)>,
    pub cfe_support: Option<Support>,
    pub cfst_support: Option<Support>,
    pub replications: Vec<Replication>,
    pub summary: Vec<MethodSummary>,
    pub warnings: Vec<String>,
}

/// Support of a model: the nonzero interactions.
pub fn support_of(model: &HawkesModel) -> Support {
    model
        .alpha_rows()
        .iter()
        .map(|row| row.iter().map(|&a| a != 0.0).collect())
        .collect()
}

struct Stage1 {
    train: EventSequence,
    test: EventSequence,
    mle: FitResult,
    approx: FitResult,
}

/// Runs the full protocol. Replications are processed in parallel and the
/// output is independent of the thread count.
pub fn run_benchmark(config: &BenchConfig) -> Result<BenchOutcome> {
    let d = config.model.dim();
    let mut warnings = Vec::new();
    let stage1: Vec<Stage1> = (0..config.replications)
        .into_par_iter()
        .map(|r| {
            let train = simulate(&SimConfig::new(
                config.model.clone(),
                StopRule::Events(config.events),
                config.train_seed(r),
            ))?;
            let test = simulate(&SimConfig::new(
                config.model.clone(),
                StopRule::Events(config.events),
                config.test_seed(r),
            ))?;
            let fit_cfg = config.fit.clone().with_seed(config.fit.seed.wrapping_add(r as u64));
            let mle = fit(
                std::slice::from_ref(&train),
                &fit_cfg.clone().with_objective(Objective::Exact),
            )?;
            let approx = fit(std::slice::from_ref(&train), &fit_cfg.with_objective(Objective::Approx))?;
            Ok(Stage1 {
                train,
                test,
                mle,
                approx,
            })
        })
        .collect::<Result<_>>()?;

    let refit_cfg = |r: usize| config.fit.clone().with_seed(config.fit.seed.wrapping_add(r as u64));
    let exact_cfg = config.fit.clone().with_objective(Objective::Exact);

    // MLE-ε: one ε for all replications, scored on the pooled test sequences.
    let tests: Vec<EventSequence> = stage1.iter().map(|s| s.test.clone()).collect();
    let trained: Vec<TrainedFit<'_>> = stage1
        .iter()
        .map(|s| TrainedFit {
            fit: &s.mle,
            train: std::slice::from_ref(&s.train),
        })
        .collect();
    let eps_choice = if config.eps_grid.is_empty() || stage1.is_empty() {
        None
    } else {
        Some(choose_epsilon(
            &trained,
            &tests,
            &config.eps_grid,
            &exact_cfg,
            config.score,
            &config.gof,
        )?)
    };

    let mle_models: Vec<&HawkesModel> = stage1.iter().map(|s| &s.mle.model).collect();
    let mut conf_supports = Vec::new();
    for kind in [IntervalKind::Empirical, IntervalKind::Student] {
        match confidence_support(&mle_models, config.gamma, kind) {
            Ok(cs) => conf_supports.push(Some(cs.support)),
            Err(e) => {
                warnings.push(format!("{kind:?} confidence selection skipped: {e}"));
                conf_supports.push(None);
            }
        }
    }
    let (cfe_support, cfst_support) = (conf_supports[0].clone(), conf_supports[1].clone());

    let truth = &config.model;
    let true_support = support_of(truth);
    let full = vec![vec![true; d]; d];
    let replications: Vec<Replication> = stage1
        .par_iter()
        .enumerate()
        .map(|(r, s)| {
            let gof_of = |m: &HawkesModel, warnings: &mut Vec<String>| match gof_report(
                m,
                std::slice::from_ref(&s.test),
                &config.gof,
            ) {
                Ok(g) => Some(g),
                Err(e) => {
                    warnings.push(e.to_string());
                    None
                }
            };
            let mut local_warn = Vec::new();
            let mut methods = Vec::new();
            let mut push =
                |method: Method, model: HawkesModel, support: Support, fr: Option<&FitResult>, w: &mut Vec<String>| {
                    let gof = gof_of(&model, w);
                    methods.push(MethodReplication {
                        method,
                        rse: relative_squared_error(&model, truth),
                        model,
                        support,
                        gof,
                        loglik: fr.map(|f| f.loglik),
                        converged: fr.map(|f| f.converged),
                    });
                };
            push(Method::True, truth.clone(), true_support.clone(), None, &mut local_warn);
            push(
                Method::Mle,
                s.mle.model.clone(),
                full.clone(),
                Some(&s.mle),
                &mut local_warn,
            );
            if let Some(choice) = &eps_choice {
                let sel = &choice.selections[r];
                push(
                    Method::MleEps,
                    sel.refit.model.clone(),
                    sel.support.clone(),
                    Some(&sel.refit),
                    &mut local_warn,
                );
            }
            for (method, support) in [(Method::Cfe, &cfe_support), (Method::Cfst, &cfst_support)] {
                if let Some(support) = support {
                    let refit = refit_on_support(&s.mle.model, std::slice::from_ref(&s.train), support, &refit_cfg(r))?;
                    push(
                        method,
                        refit.model.clone(),
                        support.clone(),
                        Some(&refit),
                        &mut local_warn,
                    );
                }
            }
            push(
                Method::Approx,
                s.approx.model.clone(),
                full.clone(),
                Some(&s.approx),
                &mut local_warn,
            );
            Ok((
                Replication {
                    index: r,
                    train_seed: config.train_seed(r),
                    test_seed: config.test_seed(r),
                    train_events: s.train.len(),
                    test_events: s.test.len(),
                    methods,
                },
                local_warn,
            ))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .map(|(rep, w)| {
            warnings.extend(w.into_iter().map(|m| format!("replication {}: {m}", rep.index)));
            rep
        })
        .collect();

    let summary = summarize(&replications, &true_support, d);
    Ok(BenchOutcome {
        config: config.clone(),
        epsilon: eps_choice.as_ref().map(|c| c.epsilon),
        epsilon_scores: eps_choice.map(|c| c.scores).unwrap_or_default(),
        cfe_support,
        cfst_support,
        replications,
        summary,
        warnings,
    })
}

fn summarize(replications: &[Replication], true_support: &Support, d: usize) -> Vec<MethodSummary> {
    Method::ALL
        .iter()
        .filter_map(|&method| {
            let rows: Vec<&MethodReplication> = replications.iter().filter_map(|r| r.method(method)).collect();
            if rows.is_empty() {
                return None;
            }
            let n = rows.len() as f64;
            let mut mean_rse = [0.0; 3];
            for row in &rows {
                for (m, v) in mean_rse.iter_mut().zip(row.rse) {
                    *m += v / n;
                }
            }
            let mean_p = (0..=d)
                .map(|h| {
                    let vals: Vec<f64> = rows
                        .iter()
                        .filter_map(|row| row.gof.as_ref().and_then(|g| g.all_p()[h]))
                        .collect();
                    (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
                })
                .collect();
            let hits = rows.iter().filter(|row| &row.support == true_support).count();
            Some(MethodSummary {
                method,
                mean_rse,
                mean_p,
                support_recovery: hits as f64 / n,
            })
        })
        .collect()
}

impl BenchOutcome {
    pub fn method_summary(&self, m: Method) -> Option<&MethodSummary> {
        self.summary.iter().find(|s| s.method == m)
    }

    /// `method,rse_mu,rse_alpha,rse_beta` per method.
    pub fn error_table_csv(&self) -> String {
        let mut out = String::from("method,rse_mu,rse_alpha,rse_beta\n");
        for s in &self.summary {
            out.push_str(&format!(
                "{},{:e},{:e},{:e}\n",
                s.method.label(),
                s.mean_rse[0],
                s.mean_rse[1],
                s.mean_rse[2]
            ));
        }
        out
    }

    /// `method,p_1,…,p_d,p_tot` per method (empty cell when unavailable).
    pub fn pvalue_table_csv(&self) -> String {
        let d = self.config.model.dim();
        let mut out = String::from("method");
        for i in 1..=d {
            out.push_str(&format!(",p_{i}"));
        }
        out.push_str(",p_tot\n");
        for s in &self.summary {
            out.push_str(s.method.label());
            for p in &s.mean_p {
                match p {
                    Some(v) => out.push_str(&format!(",{v:.4}")),
                    None => out.push(','),
                }
            }
            out.push('\n');
        }
        out
    }
}
