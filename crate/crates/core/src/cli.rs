//! Command-line interface.
//!
//! Exit codes: 0 on success, 1 when `--strict` is given and the command found
//! problems, 2 on usage or input errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{
    assess_expert_disagreement, harmonize_effort_scope, validate_data, QualityConfig, ScopePolicy,
};
use crate::calibration::{fit_nominal_productivity, mean_overhead, CalibrationPoint};
use crate::error::{Error, Result};
use crate::estimation::{
    estimate_cost, exceedance_probability, point_estimate_with, quantile, CostDistribution,
    EstimateConvention,
};
use crate::evaluation::{loocv_evaluate, EvaluationProject, SuggestionKind};
use crate::io;
use crate::model::{validate_model, CausalModel, RatingVector};
use crate::pipeline::{apply_suggestions, run_iteration, IterationConfig};
use crate::project::ProjectRecord;
use crate::sampling::{simulate_overhead, RandomSeed, SampleMethod, SamplePlan};
use crate::synthetic::{generate_synthetic_dataset, reference_model, PlantedDefect, SyntheticSpec};

#[derive(Debug, Parser)]
#[command(name = "cobra", version, about = "Hybrid cost estimation with causal cost-overhead models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Mc,
    Lhs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScopeArg {
    Modal,
    Intersection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    Median,
    Mean,
}

/// Flags shared by every command.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Model document (JSON).
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Project table (CSV).
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Simulation samples per distribution.
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Lhs)]
    pub method: MethodArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file or directory, depending on the command.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Exit with status 1 when findings are present.
    #[arg(long)]
    pub strict: bool,
}

/// Analysis thresholds.
#[derive(Debug, Clone, Args)]
pub struct Thresholds {
    /// Minimum |rho| for a supported driver.
    #[arg(long, default_value_t = 0.3)]
    pub theta: f64,
    /// Significance level.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Expert rating range above which a cell is flagged.
    #[arg(long, default_value_t = 1)]
    pub delta: u32,
    #[arg(long, value_enum, default_value_t = ScopeArg::Modal)]
    pub scope: ScopeArg,
    /// Refinement stops at or below this LOOCV MMRE.
    #[arg(long, default_value_t = 0.25)]
    pub target_mmre: f64,
    #[arg(long, value_enum, default_value_t = ConventionArg::Median)]
    pub convention: ConventionArg,
    /// Attributes measuring parts of the product the size metric misses.
    #[arg(long, value_delimiter = ',')]
    pub size_components: Vec<String>,
}

/// Where the ratings and nominal productivity of a new project come from.
#[derive(Debug, Clone, Args)]
pub struct Target {
    /// Size of the project to estimate.
    #[arg(long)]
    pub size: f64,
    /// JSON object of factor ratings, e.g. {"volatility": 2}.
    #[arg(long)]
    pub ratings: Option<PathBuf>,
    /// Inline rating, `factor=level`; repeatable.
    #[arg(long = "rating", value_parser = parse_rating)]
    pub inline: Vec<(String, u32)>,
    /// Nominal productivity; calibrated from --data when omitted.
    #[arg(long)]
    pub productivity: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a project table for completeness, consistency and correctness.
    Validate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        thresholds: Thresholds,
    },
    /// Pre-modeling analysis: driver ranking, associations, outliers.
    Analyze {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        thresholds: Thresholds,
    },
    /// Fit the nominal productivity to past projects.
    Calibrate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        thresholds: Thresholds,
    },
    /// Cost distribution of a new project.
    Estimate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        target: Target,
        #[command(flatten)]
        thresholds: Thresholds,
    },
    /// Risk queries on the cost distribution of a new project.
    Risk {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        target: Target,
        #[command(flatten)]
        thresholds: Thresholds,
        /// Probability that the cost exceeds this budget.
        #[arg(long)]
        budget: Option<f64>,
        /// Budget whose overrun probability is this tolerated risk.
        #[arg(long)]
        probability: Option<f64>,
    },
    /// Leave-one-out evaluation.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        thresholds: Thresholds,
    },
    /// One full refinement iteration; writes a report bundle to --out.
    Iterate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        thresholds: Thresholds,
    },
    /// Apply suggestions of the given kinds and write a new project table.
    Apply {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        thresholds: Thresholds,
        /// Suggestion kinds to apply, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        kinds: Vec<SuggestionKind>,
    },
    /// Generate a synthetic dataset with known ground truth.
    Synth {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 16)]
        projects: usize,
        #[arg(long, default_value_t = 0.1)]
        productivity: f64,
        #[arg(long, default_value_t = 0.05)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        decoys: usize,
        /// Multiply this project's effort (0-based index) by --outlier-factor.
        #[arg(long)]
        outlier: Option<usize>,
        #[arg(long, default_value_t = 4.0)]
        outlier_factor: f64,
        /// Projects (0-based, comma separated) missing --missing-phases.
        #[arg(long, value_delimiter = ',')]
        scope_defect: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "requirements,test")]
        missing_phases: Vec<String>,
        /// Also write the generating model here.
        #[arg(long)]
        model_out: Option<PathBuf>,
        /// Also write the ground truth here.
        #[arg(long)]
        truth_out: Option<PathBuf>,
    },
}

fn parse_rating(s: &str) -> std::result::Result<(String, u32), String> {
    let (factor, level) = s
        .split_once('=')
        .ok_or_else(|| format!("expected factor=level, got `{s}`"))?;
    let level = level
        .trim()
        .parse()
        .map_err(|_| format!("`{level}` is not a rating level"))?;
    Ok((factor.trim().to_string(), level))
}

impl Common {
    fn plan(&self) -> Result<SamplePlan> {
        let method = match self.method {
            MethodArg::Mc => SampleMethod::MonteCarlo,
            MethodArg::Lhs => SampleMethod::LatinHypercube,
        };
        SamplePlan::new(method, self.samples)
    }

    fn model(&self) -> Result<CausalModel> {
        let path = self.model.as_deref().ok_or_else(|| usage("--model is required"))?;
        io::load_model(path)
    }

    fn projects(&self) -> Result<Vec<ProjectRecord>> {
        let path = self.data.as_deref().ok_or_else(|| usage("--data is required"))?;
        io::load_projects(path)
    }
}

impl Thresholds {
    fn config(&self, common: &Common) -> Result<IterationConfig> {
        Ok(IterationConfig {
            plan: common.plan()?,
            seed: RandomSeed(common.seed),
            theta: self.theta,
            alpha: self.alpha,
            delta: self.delta,
            scope_policy: match self.scope {
                ScopeArg::Modal => ScopePolicy::Modal,
                ScopeArg::Intersection => ScopePolicy::Intersection,
            },
            target_mmre: self.target_mmre,
            convention: match self.convention {
                ConventionArg::Median => EstimateConvention::Median,
                ConventionArg::Mean => EstimateConvention::Mean,
            },
            size_components: self.size_components.iter().cloned().collect(),
            ..IterationConfig::default()
        })
    }
}

fn usage(message: &str) -> Error {
    Error::InvalidConfig(message.to_string())
}

fn write_text(out: &Option<PathBuf>, text: &str) -> Result<()> {
    if let Some(path) = out {
        io::write_atomic(path, text.as_bytes())?;
    }
    Ok(())
}

fn json<T: serde::Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    text
}

/// Projects usable for calibration: positive size, effort in the common
/// scope, and complete aggregated ratings.
fn evaluation_projects(
    model: &CausalModel,
    projects: &[ProjectRecord],
    config: &IterationConfig,
) -> Result<(Vec<EvaluationProject>, Vec<String>)> {
    let scope = harmonize_effort_scope(projects, &config.scope_policy)?;
    let experts = assess_expert_disagreement(projects, model, config.delta);
    let used = model.used_factor_ids();
    let mut usable = Vec::new();
    let mut skipped = Vec::new();
    for p in projects {
        let ratings = experts.aggregated.get(&p.id);
        let complete = ratings.is_some_and(|r| used.iter().all(|f| r.get(f).is_some()));
        match (p.size, scope.totals.get(&p.id)) {
            (Some(size), Some(&effort)) if size > 0.0 && effort > 0.0 && complete => {
                usable.push(EvaluationProject {
                    id: p.id.clone(),
                    size,
                    effort,
                    ratings: ratings.cloned().unwrap_or_default(),
                })
            }
            _ => skipped.push(p.id.clone()),
        }
    }
    Ok((usable, skipped))
}

fn calibrate_productivity(
    model: &CausalModel,
    projects: &[ProjectRecord],
    config: &IterationConfig,
) -> Result<(crate::calibration::CalibrationResult, Vec<String>)> {
    let (usable, skipped) = evaluation_projects(model, projects, config)?;
    let points = usable
        .iter()
        .map(|p| {
            let dist = simulate_overhead(model, &p.ratings, &config.plan, config.seed.derive(&p.id))?;
            Ok(CalibrationPoint::new(&p.id, p.size, p.effort, mean_overhead(&dist)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((fit_nominal_productivity(&points)?, skipped))
}

fn target_distribution(
    common: &Common,
    target: &Target,
    thresholds: &Thresholds,
) -> Result<CostDistribution> {
    let model = common.model()?;
    let config = thresholds.config(common)?;
    let mut ratings = match &target.ratings {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            serde_json::from_str::<RatingVector>(&text).map_err(|e| Error::Parse {
                path: path.clone(),
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            })?
        }
        None => RatingVector::new(),
    };
    for (factor, level) in &target.inline {
        ratings.insert(factor.clone(), *level);
    }
    let productivity = match (target.productivity, &common.data) {
        (Some(p), _) => p,
        (None, Some(_)) => calibrate_productivity(&model, &common.projects()?, &config)?.0.nominal_productivity,
        (None, None) => return Err(usage("give --productivity or --data to calibrate it")),
    };
    estimate_cost(
        &model,
        &ratings,
        target.size,
        productivity,
        &config.plan,
        config.seed.derive("estimate"),
    )
}

fn synth_command(
    common: &Common,
    spec: SyntheticSpec,
    model_out: &Option<PathBuf>,
    truth_out: &Option<PathBuf>,
    w: &mut dyn Write,
) -> Result<bool> {
    let data = generate_synthetic_dataset(&spec)?;
    let table = io::projects_to_string(&data.projects);
    match &common.out {
        Some(path) => io::write_atomic(path, table.as_bytes())?,
        None => write_out(w, &table)?,
    }
    if let Some(path) = model_out {
        io::save_model(&spec.model, path)?;
    }
    write_text(truth_out, &json(&data.truth))?;
    Ok(false)
}

fn write_out(w: &mut dyn Write, text: &str) -> Result<()> {
    w.write_all(text.as_bytes()).map_err(|source| Error::Io {
        path: Path::new("<stdout>").to_path_buf(),
        source,
    })
}

/// Runs one command; returns whether it found problems.
fn execute(command: Command, w: &mut dyn Write) -> Result<(bool, bool)> {
    match command {
        Command::Validate { common, .. } if common.data.is_none() => {
            // model document only
            let model = common.model()?;
            let violations = validate_model(&model);
            let mut text = String::new();
            if violations.is_empty() {
                text.push_str("no findings\n");
            }
            for v in &violations {
                text.push_str(&format!("{v}\n"));
            }
            write_out(w, &text)?;
            Ok((!violations.is_empty(), common.strict))
        }
        Command::Validate { common, thresholds } => {
            let projects = common.projects()?;
            let model = common.model.as_ref().map(|_| common.model()).transpose()?;
            let config = QualityConfig {
                scope_policy: thresholds.config(&common)?.scope_policy,
                disagreement_threshold: thresholds.delta,
            };
            let report = validate_data(&projects, model.as_ref(), &config);
            let mut text = String::new();
            if report.is_empty() {
                text.push_str("no findings\n");
            }
            for f in &report.findings {
                text.push_str(&format!("[{}] {} / {}: {}\n", f.category, f.project_id, f.field, f.message));
            }
            write_out(w, &text)?;
            write_text(&common.out, &json(&report))?;
            Ok((!report.is_empty(), common.strict))
        }
        Command::Analyze { common, thresholds } => {
            let report = run_iteration(&common.model()?, &common.projects()?, &thresholds.config(&common)?)?;
            let mut text = String::new();
            if let Some(ranking) = &report.ranking {
                for e in &ranking.entries {
                    let rho = e.rho.map_or_else(|| "undefined".into(), |r| format!("{r:+.3}"));
                    let p = e.p_value.map_or_else(|| "-".into(), |p| format!("{p:.4}"));
                    let mark = if e.selected { "*" } else { " " };
                    text.push_str(&format!("{mark} {:<24} rho {rho:>7}  p {p}\n", e.id));
                }
            }
            for a in &report.associations {
                text.push_str(&format!("associated: {} ~ {} (rho {:+.3})\n", a.first, a.second, a.rho));
            }
            for o in &report.outliers.outliers.flagged {
                text.push_str(&format!("outlier: {}\n", o.project_id));
            }
            for g in &report.outliers.groups.separators {
                text.push_str(&format!("group: {} = {} (p {:.4})\n", g.attribute, g.level, g.p_value));
            }
            for d in &report.discrepancies {
                text.push_str(&format!("discrepancy: {:?} {}\n", d.kind, d.candidate));
            }
            write_out(w, &text)?;
            let analysis = serde_json::json!({
                "ranking": report.ranking,
                "associations": report.associations,
                "outliers": report.outliers,
                "discrepancies": report.discrepancies,
            });
            write_text(&common.out, &json(&analysis))?;
            let findings = !report.outliers.outliers.flagged.is_empty() || !report.discrepancies.is_empty();
            Ok((findings, common.strict))
        }
        Command::Calibrate { common, thresholds } => {
            let config = thresholds.config(&common)?;
            let (result, skipped) = calibrate_productivity(&common.model()?, &common.projects()?, &config)?;
            let mut text = format!("nominal productivity {:.9}\n", result.nominal_productivity);
            for (id, p) in &result.per_project_nominal {
                text.push_str(&format!("  {id} {p:.9}\n"));
            }
            for id in &skipped {
                text.push_str(&format!("  skipped {id}\n"));
            }
            write_out(w, &text)?;
            write_text(&common.out, &json(&result))?;
            Ok((!skipped.is_empty(), common.strict))
        }
        Command::Estimate { common, target, thresholds } => {
            let dist = target_distribution(&common, &target, &thresholds)?;
            let convention = thresholds.config(&common)?.convention;
            let mut text = format!("estimate {:.6}\n", point_estimate_with(&dist, convention)?);
            for p in [0.1, 0.5, 0.7, 0.9] {
                text.push_str(&format!("  q{:.2} {:.6}\n", p, quantile(&dist, p)?));
            }
            write_out(w, &text)?;
            if let Some(path) = &common.out {
                io::emit_cdf(&dist, path)?;
            }
            Ok((false, common.strict))
        }
        Command::Risk { common, target, thresholds, budget, probability } => {
            if budget.is_none() && probability.is_none() {
                return Err(usage("give --budget and/or --probability"));
            }
            let dist = target_distribution(&common, &target, &thresholds)?;
            let mut text = String::new();
            if let Some(b) = budget {
                let risk = exceedance_probability(&dist, b)?;
                text.push_str(&format!(
                    "budget {b}: overrun probability {:.4}, within budget {:.4}\n",
                    risk,
                    1.0 - risk
                ));
            }
            if let Some(p) = probability {
                if !(p > 0.0 && p < 1.0) {
                    return Err(Error::ProbabilityOutOfRange(p));
                }
                let needed = quantile(&dist, 1.0 - p)?;
                text.push_str(&format!(
                    "overrun risk {p}: budget {needed:.6} (overrun probability {:.4})\n",
                    exceedance_probability(&dist, needed)?
                ));
            }
            write_out(w, &text)?;
            if let Some(path) = &common.out {
                io::emit_cdf(&dist, path)?;
            }
            Ok((false, common.strict))
        }
        Command::Evaluate { common, thresholds } => {
            let model = common.model()?;
            let config = thresholds.config(&common)?;
            let (usable, _) = evaluation_projects(&model, &common.projects()?, &config)?;
            let report = loocv_evaluate(&model, &usable, &config.plan, config.seed, config.convention)?;
            let m = &report.metrics;
            let mut text = format!(
                "MMRE {:.4}\nMdMRE {:.4}\nPred(0.25) {:.4}\nconsistency {:.4}\n",
                m.mmre, m.mdmre, m.pred25, m.consistency
            );
            for f in &report.folds {
                text.push_str(&format!(
                    "  {} actual {:.6} estimate {:.6} MRE {:.4}\n",
                    f.project_id, f.actual, f.estimate, f.mre
                ));
            }
            write_out(w, &text)?;
            write_text(&common.out, &json(&report))?;
            Ok((m.mmre > config.target_mmre, common.strict))
        }
        Command::Iterate { common, thresholds } => {
            let report = run_iteration(&common.model()?, &common.projects()?, &thresholds.config(&common)?)?;
            write_out(w, &io::render_summary(&report))?;
            if let Some(dir) = &common.out {
                io::emit_report(&report, dir)?;
            }
            Ok((!report.suggestions.is_empty(), common.strict))
        }
        Command::Apply { common, thresholds, kinds } => {
            let projects = common.projects()?;
            let report = run_iteration(&common.model()?, &projects, &thresholds.config(&common)?)?;
            let outcome = apply_suggestions(&projects, &report, &kinds);
            let mut text = String::new();
            for s in &outcome.applied {
                text.push_str(&format!("applied {} {}\n", s.kind, s.subject));
            }
            for s in &outcome.skipped {
                text.push_str(&format!(
                    "skipped {} {}: {}\n",
                    s.suggestion.kind, s.suggestion.subject, s.reason
                ));
            }
            let out = common.out.as_ref().ok_or_else(|| usage("--out is required"))?;
            io::save_projects(&outcome.projects, out)?;
            write_out(w, &text)?;
            Ok((!outcome.skipped.is_empty(), common.strict))
        }
        Command::Synth {
            common,
            projects,
            productivity,
            noise,
            decoys,
            outlier,
            outlier_factor,
            scope_defect,
            missing_phases,
            model_out,
            truth_out,
        } => {
            let model = match &common.model {
                Some(_) => common.model()?,
                None => reference_model(),
            };
            let mut spec = SyntheticSpec::new(model, productivity, projects)
                .with_seed(RandomSeed(common.seed))
                .with_noise(noise)
                .with_decoys(decoys);
            if let Some(project) = outlier {
                spec = spec.with_defect(PlantedDefect::Outlier {
                    project,
                    factor: outlier_factor,
                });
            }
            if !scope_defect.is_empty() {
                spec = spec.with_defect(PlantedDefect::MissingPhases {
                    projects: scope_defect,
                    phases: missing_phases,
                });
            }
            synth_command(&common, spec, &model_out, &truth_out, w)?;
            Ok((false, common.strict))
        }
    }
}

/// Parses `args` (program name first) and runs the command, writing normal
/// output to `stdout` and errors to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(2),
            };
        }
    };
    match execute(cli.command, stdout) {
        Ok((true, true)) => ExitCode::from(1),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            ExitCode::from(2)
        }
    }
}

pub fn main() -> ExitCode {
    run(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr())
}
