//! Command-line workflows.
//!
//! Every command reads a JSON config (optional) whose fields can each be
//! overridden by a flag of the same name, and writes its reports atomically
//! into the output directory.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::allocation::{allocate_with, AllocationResult, DesignParams, Rounding};
use crate::arrangement::{
    enumerate_arrangements_with, sample_arrangements_with, Arrangement, BlockRule, SamplerOptions,
};
use crate::error::{Error, Result};
use crate::estimator::{monte_carlo_mse, MeasurementSetup};
use crate::frames::{erasure_mse, frame_bounds_aligned, ErasureReport};
use crate::mse::{adaptive_truncate, profile_all, rank, MseProfile, RankedDesign};
use crate::report::{fmt9, write_json, Csv};
use crate::spectrum::{ModelKind, Spectrum, SpectrumModel};

#[derive(Debug, Parser)]
#[command(
    name = "holosense",
    version,
    about = "Design toolkit for packetized linear sensing of random vectors"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Water-filling allocation and full-availability MSE.
    Design(CommandArgs),
    /// Enumerate or sample arrangements, profile and rank them.
    Arrangements(CommandArgs),
    /// Re-rank for at most `truncate_L` available packets.
    Adapt(CommandArgs),
    /// Monte Carlo check of the smoothest arrangement.
    Simulate(CommandArgs),
    /// Erasure analysis of the configured design.
    Erasure(CommandArgs),
}

#[derive(Debug, Args)]
pub struct CommandArgs {
    /// JSON config file; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
}

/// Every configurable field, as read from JSON or from flags.
#[derive(Clone, Debug, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    #[arg(long = "M")]
    #[serde(rename = "M")]
    pub dim: Option<usize>,
    #[arg(long = "m")]
    pub m: Option<usize>,
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub packets: Option<usize>,
    #[arg(long)]
    pub sigma2: Option<f64>,
    /// uniform, explicit, exponential, linear or cyclostationary.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub values: Option<Vec<f64>>,
    /// exhaustive or random.
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    pub epsilons: Option<Vec<f64>>,
    #[arg(long = "truncate-L")]
    #[serde(rename = "truncate_L")]
    pub truncate: Option<usize>,
    #[arg(long)]
    pub trials: Option<u64>,
    /// 1-based packet numbers.
    #[arg(long, value_delimiter = ',')]
    pub erased: Option<Vec<usize>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Maximum number of arrangements in exhaustive mode.
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long)]
    pub burn_in: Option<usize>,
    /// Let an arrangement use the same block more than once.
    #[arg(long)]
    pub repeated_blocks: Option<bool>,
    /// nearest or greedy.
    #[arg(long)]
    pub rounding: Option<String>,
    /// Explicit arrangement, 1-based; not settable from the command line.
    #[arg(skip)]
    pub blocks: Option<Vec<Vec<usize>>>,
}

macro_rules! take_some {
    ($dst:ident, $src:ident, $($f:ident),*) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f; } )*
    };
}

impl Overrides {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Fields set in `other` replace those in `self`.
    pub fn merge(mut self, other: Overrides) -> Self {
        take_some!(
            self,
            other,
            dim,
            m,
            packets,
            sigma2,
            model,
            gamma,
            lambda,
            values,
            mode,
            count,
            seed,
            epsilons,
            truncate,
            trials,
            erased,
            out,
            budget,
            burn_in,
            repeated_blocks,
            rounding,
            blocks
        );
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Mode {
    Exhaustive,
    Random { count: usize, seed: u64 },
}

/// Validated configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub params: DesignParams,
    pub model: SpectrumModel,
    pub mode: Mode,
    pub epsilons: Vec<f64>,
    pub truncate: Option<usize>,
    pub trials: Option<u64>,
    pub seed: u64,
    /// 0-based.
    pub erased: Vec<usize>,
    pub out: PathBuf,
    pub budget: u64,
    pub burn_in: Option<usize>,
    pub rule: BlockRule,
    pub rounding: Rounding,
    pub blocks: Option<Vec<Vec<usize>>>,
}

fn need<T>(v: Option<T>, name: &str) -> Result<T> {
    v.ok_or_else(|| Error::Config(format!("missing field {name}")))
}

impl RunConfig {
    pub fn resolve(o: Overrides) -> Result<Self> {
        let dim = need(o.dim, "M")?;
        let params = DesignParams::new(
            dim,
            need(o.m, "m")?,
            need(o.packets, "N")?,
            need(o.sigma2, "sigma2")?,
        )?;
        let kind = match need(o.model.as_deref(), "model")? {
            "uniform" => ModelKind::Uniform {
                lambda: o.lambda.unwrap_or(1.0),
            },
            "explicit" => ModelKind::Explicit {
                values: need(o.values.clone(), "values")?,
            },
            "exponential" => ModelKind::ExponentialDecay {
                gamma: need(o.gamma, "gamma")?,
            },
            "linear" => ModelKind::Linear,
            "cyclostationary" => ModelKind::Cyclostationary {
                gamma: need(o.gamma, "gamma")?,
            },
            other => return Err(Error::Config(format!("unknown model {other}"))),
        };
        let model = SpectrumModel { kind, dim };
        model.validate()?;
        let mode = match o.mode.as_deref().unwrap_or("exhaustive") {
            "exhaustive" => Mode::Exhaustive,
            "random" => {
                let count = need(o.count, "count")?;
                if count == 0 {
                    return Err(Error::Config("count must be at least 1".into()));
                }
                Mode::Random {
                    count,
                    seed: need(o.seed, "seed (required in random mode)")?,
                }
            }
            other => return Err(Error::Config(format!("unknown mode {other}"))),
        };
        let mut epsilons = o.epsilons.unwrap_or_else(|| vec![0.05, 0.1]);
        if epsilons.iter().any(|e| e.is_nan() || *e <= 0.0) {
            return Err(Error::Config("epsilons must be positive".into()));
        }
        epsilons.sort_by(f64::total_cmp);
        epsilons.dedup();
        if let Some(l) = o.truncate {
            if l == 0 || l > params.packets {
                return Err(Error::Config(format!(
                    "truncate_L must lie in 1..={}",
                    params.packets
                )));
            }
        }
        if o.trials == Some(0) {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        let erased = o
            .erased
            .unwrap_or_default()
            .into_iter()
            .map(|k| {
                if k == 0 || k > params.packets {
                    Err(Error::Config(format!(
                        "erased packet {k} outside 1..={}",
                        params.packets
                    )))
                } else {
                    Ok(k - 1)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let rounding = match o.rounding.as_deref().unwrap_or("nearest") {
            "nearest" => Rounding::Nearest,
            "greedy" => Rounding::Greedy,
            other => return Err(Error::Config(format!("unknown rounding {other}"))),
        };
        Ok(Self {
            params,
            model,
            mode,
            epsilons,
            truncate: o.truncate,
            trials: o.trials,
            seed: o.seed.unwrap_or(0),
            erased,
            out: o.out.unwrap_or_else(|| PathBuf::from("out")),
            budget: o.budget.unwrap_or(1_000_000),
            burn_in: o.burn_in,
            rule: if o.repeated_blocks.unwrap_or(false) {
                BlockRule::Repeated
            } else {
                BlockRule::Distinct
            },
            rounding,
            blocks: o.blocks,
        })
    }

    /// Key that identifies the arrangement set and its profiles.
    fn cache_key(&self) -> String {
        json!({
            "params": self.params,
            "model": self.model,
            "mode": self.mode,
            "burn_in": self.burn_in,
            "rule": self.rule,
            "rounding": self.rounding,
            "blocks": self.blocks,
        })
        .to_string()
    }
}

/// Loads `--config` and applies flag overrides.
pub fn load_config(args: CommandArgs) -> Result<RunConfig> {
    let base = match &args.config {
        Some(p) => Overrides::from_file(p)?,
        None => Overrides::default(),
    };
    RunConfig::resolve(base.merge(args.overrides))
}

/// Spectrum and allocation for a config.
pub fn design(cfg: &RunConfig) -> Result<(Spectrum, AllocationResult)> {
    let spectrum = Spectrum::build(&cfg.model)?;
    let alloc = allocate_with(&spectrum, &cfg.params, cfg.rounding)?;
    Ok((spectrum, alloc))
}

fn design_summary(alloc: &AllocationResult) -> String {
    format!(
        "base point {:.3}  max delta(N) {:.4}  MSE(N) {:.4}  t {}  s {}",
        alloc.base_point, alloc.max_delta, alloc.mse_n, alloc.t, alloc.pattern
    )
}

pub fn cmd_design(cfg: &RunConfig) -> Result<String> {
    let (spectrum, alloc) = design(cfg)?;
    let mut doc = serde_json::to_value(&alloc)?;
    doc["spectrum"] = spectrum.to_json();
    doc["params"] = json!({
        "M": cfg.params.dim, "m": cfg.params.subspace_dim, "N": cfg.params.packets, "sigma2": cfg.params.sigma2,
    });
    write_json(&cfg.out.join("allocation.json"), &doc)?;
    Ok(design_summary(&alloc))
}

/// log10 of the number of multisets of `N` blocks from the `C(t, m)` possible ones.
fn log10_multiset_bound(support: usize, m: usize, n: usize) -> f64 {
    let blocks: f64 = (1..=m)
        .map(|i| ((support - m + i) as f64 / i as f64).log10())
        .sum();
    let x = 10f64.powf(blocks);
    (1..=n)
        .map(|i| ((x - 1.0 + i as f64) / i as f64).log10())
        .sum()
}

/// The arrangements a config asks for, all realizing the allocation.
pub fn arrangements_for(cfg: &RunConfig, alloc: &AllocationResult) -> Result<Vec<Arrangement>> {
    let p = &cfg.params;
    if let Some(blocks) = &cfg.blocks {
        let a = Arrangement::from_one_based(p.dim, blocks)?;
        if a.packets() != p.packets || a.subspace_dim() != p.subspace_dim {
            return Err(Error::Config("explicit blocks do not match N and m".into()));
        }
        return Ok(vec![a]);
    }
    match cfg.mode {
        Mode::Exhaustive => {
            let mut out = Vec::new();
            for a in enumerate_arrangements_with(&alloc.s, p.packets, p.subspace_dim, cfg.rule)? {
                if out.len() as u64 >= cfg.budget {
                    let support = alloc.s.iter().filter(|&&v| v > 0).count();
                    return Err(Error::BudgetExceeded {
                        budget: cfg.budget,
                        log10_bound: log10_multiset_bound(support, p.subspace_dim, p.packets),
                    });
                }
                out.push(a);
            }
            if out.is_empty() {
                return Err(Error::Infeasible);
            }
            Ok(out)
        }
        Mode::Random { count, seed } => {
            let opts = SamplerOptions {
                burn_in: cfg.burn_in,
                rule: cfg.rule,
                ..SamplerOptions::default()
            };
            sample_arrangements_with(&alloc.s, p.packets, p.subspace_dim, count, seed, opts)
        }
    }
}

/// Arrangements with their profiles, in input order.
pub struct Evaluated {
    pub spectrum: Spectrum,
    pub alloc: AllocationResult,
    pub arrangements: Vec<Arrangement>,
    pub profiles: Vec<MseProfile>,
}

pub fn evaluate(cfg: &RunConfig) -> Result<Evaluated> {
    let (spectrum, alloc) = design(cfg)?;
    let arrangements = arrangements_for(cfg, &alloc)?;
    let profiles = profile_all(&spectrum, cfg.params.sigma2, &arrangements)?;
    Ok(Evaluated {
        spectrum,
        alloc,
        arrangements,
        profiles,
    })
}

#[derive(Serialize, Deserialize)]
struct ProfileCache {
    key: String,
    arrangements: Vec<Vec<Vec<usize>>>,
    profiles: Vec<MseProfile>,
}

fn write_cache(cfg: &RunConfig, ev: &Evaluated) -> Result<()> {
    let cache = ProfileCache {
        key: cfg.cache_key(),
        arrangements: ev
            .arrangements
            .iter()
            .map(|a| a.one_based_blocks())
            .collect(),
        profiles: ev.profiles.clone(),
    };
    write_json(
        &cfg.out.join("profiles.json"),
        &serde_json::to_value(cache)?,
    )
}

fn read_cache(cfg: &RunConfig) -> Option<(Vec<Arrangement>, Vec<MseProfile>)> {
    let text = std::fs::read_to_string(cfg.out.join("profiles.json")).ok()?;
    let cache: ProfileCache = serde_json::from_str(&text).ok()?;
    if cache.key != cfg.cache_key() {
        return None;
    }
    let arrs = cache
        .arrangements
        .iter()
        .map(|b| Arrangement::from_one_based(cfg.params.dim, b))
        .collect::<Result<Vec<_>>>()
        .ok()?;
    Some((arrs, cache.profiles))
}

fn eps_label(e: f64) -> String {
    format!("delta_eps_{}", fmt9(e))
}

fn write_profile_csv(path: &Path, ranked: &RankedDesign) -> Result<()> {
    let mut csv = Csv::new(&[
        "arrangement_id",
        "ell",
        "mse_min",
        "mse_mean",
        "mse_max",
        "delta_mean",
        "delta_var",
    ]);
    for e in &ranked.entries {
        for l in &e.profile.levels {
            csv.row([
                e.profile.arrangement_id.clone(),
                l.ell.to_string(),
                fmt9(l.mse_min),
                fmt9(l.mse_mean),
                fmt9(l.mse_max),
                fmt9(l.delta_mean),
                fmt9(l.delta_var),
            ]);
        }
    }
    csv.write(path)
}

fn write_rankings_csv(path: &Path, ranked: &RankedDesign, epsilons: &[f64]) -> Result<()> {
    let labels: Vec<String> = epsilons.iter().map(|&e| eps_label(e)).collect();
    let mut header = vec!["rank", "arrangement_id", "smoothness_score"];
    header.extend(labels.iter().map(String::as_str));
    let mut csv = Csv::new(&header);
    for (i, e) in ranked.entries.iter().enumerate() {
        let mut row = vec![
            (i + 1).to_string(),
            e.profile.arrangement_id.clone(),
            fmt9(e.score),
        ];
        row.extend(
            epsilons
                .iter()
                .map(|&eps| e.profile.threshold(eps).to_string()),
        );
        csv.row(row);
    }
    csv.write(path)
}

fn delta_table(ranked: &RankedDesign) -> serde_json::Value {
    ranked
        .delta_epsilon
        .iter()
        .map(|&(e, d)| json!({"epsilon": e, "delta": d}))
        .collect()
}

pub fn cmd_arrangements(cfg: &RunConfig) -> Result<String> {
    let ev = evaluate(cfg)?;
    let ranked = rank(&ev.profiles, &cfg.epsilons)?;
    let by_id: HashMap<&str, &Arrangement> = ev
        .profiles
        .iter()
        .zip(&ev.arrangements)
        .map(|(p, a)| (p.arrangement_id.as_str(), a))
        .collect();
    let records: Vec<_> = ranked
        .entries
        .iter()
        .map(|e| by_id[e.profile.arrangement_id.as_str()].to_record())
        .collect();

    write_rankings_csv(&cfg.out.join("rankings.csv"), &ranked, &cfg.epsilons)?;
    write_profile_csv(&cfg.out.join("profile.csv"), &ranked)?;
    let doc = json!({
        "mode": cfg.mode,
        "pattern": ev.alloc.pattern,
        "mse_n": ev.alloc.mse_n,
        "max_delta": ev.alloc.max_delta,
        "t": ev.alloc.t,
        "count": records.len(),
        "delta_epsilon": delta_table(&ranked),
        "best": records[0],
        "arrangements": records,
    });
    write_json(&cfg.out.join("arrangements.json"), &doc)?;
    write_cache(cfg, &ev)?;

    let best = by_id[ranked.best().arrangement_id.as_str()];
    let mut msg = format!(
        "{}\n{} arrangements; smoothest {} score {:.4}: {}",
        design_summary(&ev.alloc),
        ev.arrangements.len(),
        ranked.best().arrangement_id,
        ranked.entries[0].score,
        best
    );
    for (e, d) in &ranked.delta_epsilon {
        msg.push_str(&format!("\ndelta_{} = {d}", fmt9(*e)));
    }
    Ok(msg)
}

pub fn cmd_adapt(cfg: &RunConfig) -> Result<String> {
    let horizon = need(cfg.truncate, "truncate_L")?;
    let (arrangements, profiles) = match read_cache(cfg) {
        Some(c) => c,
        None => {
            let ev = evaluate(cfg)?;
            write_cache(cfg, &ev)?;
            (ev.arrangements, ev.profiles)
        }
    };
    let full = rank(&profiles, &cfg.epsilons)?;
    let trunc = adaptive_truncate(&profiles, horizon, &cfg.epsilons)?;
    let previous = full.best().arrangement_id.clone();
    let best = trunc.best().arrangement_id.clone();

    let mut csv = Csv::new(&[
        "rank",
        "arrangement_id",
        "truncated_score",
        "full_score",
        "mse_min_at_L",
    ]);
    for (i, e) in trunc.entries.iter().enumerate() {
        csv.row([
            (i + 1).to_string(),
            e.profile.arrangement_id.clone(),
            fmt9(e.score),
            fmt9(e.profile.score),
            fmt9(e.profile.levels[horizon].mse_min),
        ]);
    }
    csv.write(&cfg.out.join("adapt.csv"))?;
    let blocks = profiles
        .iter()
        .zip(&arrangements)
        .find(|(p, _)| p.arrangement_id == best)
        .map(|(_, a)| a.to_record());
    let doc = json!({
        "truncate_L": horizon,
        "best_mse_L": trunc.best_mse,
        "best_mse_N": full.best_mse,
        "best": blocks,
        "previous_best_id": previous,
        "displaced": previous != best,
    });
    write_json(&cfg.out.join("adapt.json"), &doc)?;
    Ok(format!(
        "best MSE({horizon}) {:.4}  best MSE(N) {:.4}  smoothest for L={horizon}: {best}{}",
        trunc.best_mse,
        full.best_mse,
        if previous != best {
            format!(" (was {previous})")
        } else {
            String::new()
        }
    ))
}

/// Smoothest arrangement for the config.
pub fn smoothest(cfg: &RunConfig) -> Result<(Spectrum, AllocationResult, Arrangement)> {
    let ev = evaluate(cfg)?;
    let ranked = rank(&ev.profiles, &[])?;
    let id = &ranked.best().arrangement_id;
    let idx = ev
        .profiles
        .iter()
        .position(|p| &p.arrangement_id == id)
        .expect("ranked profile exists");
    let best = ev.arrangements[idx].clone();
    Ok((ev.spectrum, ev.alloc, best))
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<String> {
    let trials = need(cfg.trials, "trials")?;
    let (spectrum, _, arr) = smoothest(cfg)?;
    let setup = MeasurementSetup::aligned(&spectrum, &arr, cfg.params.sigma2)?;
    let mut csv = Csv::new(&[
        "ell",
        "packets",
        "theoretical_mse",
        "empirical_mse",
        "sd",
        "rel_err",
        "within_bound",
    ]);
    let mut rows = Vec::new();
    let mut msg = format!("arrangement {} {}", arr.id(), arr);
    for ell in 1..=arr.packets() {
        let subset: Vec<usize> = (0..ell).collect();
        let r = monte_carlo_mse(&setup, &subset, trials, cfg.seed)?;
        let names: Vec<String> = subset.iter().map(|k| (k + 1).to_string()).collect();
        csv.row([
            ell.to_string(),
            names.join(" "),
            fmt9(r.theoretical_mse),
            fmt9(r.empirical_mse),
            fmt9(r.sd),
            fmt9(r.rel_err),
            r.within_bound().to_string(),
        ]);
        msg.push_str(&format!(
            "\nell {ell}: theoretical {:.5} empirical {:.5} rel err {:.2e}",
            r.theoretical_mse, r.empirical_mse, r.rel_err
        ));
        rows.push(json!({
            "ell": ell,
            "packets": subset.iter().map(|k| k + 1).collect::<Vec<_>>(),
            "theoretical_mse": r.theoretical_mse,
            "empirical_mse": r.empirical_mse,
            "trials": r.trials,
            "seed": r.seed,
            "rel_err": r.rel_err,
        }));
    }
    csv.write(&cfg.out.join("simulate.csv"))?;
    write_json(
        &cfg.out.join("simulate.json"),
        &json!({"arrangement": arr.to_record(), "trials": trials, "seed": cfg.seed, "rows": rows}),
    )?;
    Ok(msg)
}

pub fn erasure_report(cfg: &RunConfig) -> Result<(Arrangement, ErasureReport)> {
    let (spectrum, _, arr) = smoothest(cfg)?;
    let report = erasure_mse(&spectrum, cfg.params.sigma2, &arr, &cfg.erased)?;
    Ok((arr, report))
}

pub fn cmd_erasure(cfg: &RunConfig) -> Result<String> {
    let (arr, report) = erasure_report(cfg)?;
    let bounds = frame_bounds_aligned(&arr);
    let mut doc = report.to_json();
    doc["frame_bounds"] = json!({"A": bounds.a, "B": bounds.b});
    doc["arrangement"] = serde_json::to_value(arr.to_record())?;
    write_json(&cfg.out.join("erasure.json"), &doc)?;
    Ok(format!(
        "erased {:?}: mse0 {:.6}  penalty {:.6}  total {:.6}  exact {:.6}{}",
        report.erased.iter().map(|k| k + 1).collect::<Vec<_>>(),
        report.mse0,
        report.penalty,
        report.total,
        report.exact,
        if report.tight {
            ""
        } else {
            "  (frame not tight)"
        }
    ))
}

/// Runs one command, honouring `HOLOSENSE_THREADS`.
pub fn run(command: Command) -> Result<String> {
    let threads = std::env::var("HOLOSENSE_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok());
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads.filter(|&n| n > 0) {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Config(e.to_string()))?;
    pool.install(|| match command {
        Command::Design(a) => cmd_design(&load_config(a)?),
        Command::Arrangements(a) => cmd_arrangements(&load_config(a)?),
        Command::Adapt(a) => cmd_adapt(&load_config(a)?),
        Command::Simulate(a) => cmd_simulate(&load_config(a)?),
        Command::Erasure(a) => cmd_erasure(&load_config(a)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> Overrides {
        Overrides {
            dim: Some(8),
            m: Some(4),
            packets: Some(5),
            sigma2: Some(0.5),
            model: Some("exponential".into()),
            gamma: Some(0.8),
            ..Overrides::default()
        }
    }

    #[test]
    fn flags_win_over_file() {
        let flags = Overrides {
            sigma2: Some(0.1),
            ..Overrides::default()
        };
        let cfg = RunConfig::resolve(base().merge(flags)).unwrap();
        assert_eq!(cfg.params.sigma2, 0.1);
        assert_eq!(cfg.params.dim, 8);
        assert_eq!(cfg.epsilons, vec![0.05, 0.1]);
    }

    #[test]
    fn config_errors() {
        let no_seed = Overrides {
            mode: Some("random".into()),
            count: Some(3),
            ..base()
        };
        assert!(RunConfig::resolve(no_seed).is_err());
        assert!(RunConfig::resolve(Overrides {
            trials: Some(0),
            ..base()
        })
        .is_err());
        assert!(RunConfig::resolve(Overrides {
            erased: Some(vec![6]),
            ..base()
        })
        .is_err());
        assert!(RunConfig::resolve(Overrides {
            model: Some("pink".into()),
            ..base()
        })
        .is_err());
        assert!(RunConfig::resolve(Overrides {
            dim: None,
            ..base()
        })
        .is_err());
        assert!(serde_json::from_str::<Overrides>(r#"{"MM": 3}"#).is_err());
    }

    #[test]
    fn json_field_names() {
        let o: Overrides = serde_json::from_str(
            r#"{"M": 4, "m": 2, "N": 2, "sigma2": 1, "model": "uniform", "truncate_L": 1}"#,
        )
        .unwrap();
        let cfg = RunConfig::resolve(o).unwrap();
        assert_eq!(
            (cfg.params.dim, cfg.params.subspace_dim, cfg.params.packets),
            (4, 2, 2)
        );
        assert_eq!(cfg.truncate, Some(1));
    }

    #[test]
    fn budget_guard() {
        let cfg = RunConfig::resolve(Overrides {
            budget: Some(10),
            ..base()
        })
        .unwrap();
        let (_, alloc) = design(&cfg).unwrap();
        assert!(matches!(
            arrangements_for(&cfg, &alloc),
            Err(Error::BudgetExceeded { budget: 10, .. })
        ));
    }

    #[test]
    fn multiset_bound_is_an_upper_bound() {
        // 3770 arrangements for the 8-coordinate design.
        assert!(log10_multiset_bound(8, 4, 5) > 3770f64.log10());
    }
}
