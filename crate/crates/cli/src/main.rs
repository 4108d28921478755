//! Command line for the nsp toolkit: splitting types, Betti tables,
//! Property N^S_p verdicts, normality defects, regularity reports,
//! verification campaigns, grid scans and known-threshold checks.
//!
//! Reports are deterministic given `--prime` and `--seed`: rerunning a
//! command with the same flags reproduces the same bytes. Timings are
//! only included when `--timings` is passed.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use nsp_core::bundles::restricted_kernel_splitting;
use nsp_core::field::{default_audit_primes, PrimeField, DEFAULT_PRIME};
use nsp_core::harness::{
    audit_betti, run_campaign, scan, scan_to_csv, verify_known_thresholds, Campaign, CampaignKind,
    ScanConfig,
};
use nsp_core::invariants::ModuleWorkbench;
use nsp_core::models::{RationalCurve, SurfaceKind, SurfaceModel};
use nsp_core::subsystems::{make_subsystem, SubsystemSpec};

#[derive(Parser)]
#[command(
    name = "nsp",
    about = "Exact syzygy, splitting-type, normality and regularity checks for embeddings of rational surfaces",
    version
)]
struct Cli {
    /// Working prime for all exact linear algebra.
    #[arg(long, global = true, env = "NSP_PRIME", default_value_t = DEFAULT_PRIME)]
    prime: u64,

    /// Master seed for anything sampled.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Output::Json)]
    output: Output,

    /// Recompute Betti verdicts at this many distinct primes and report
    /// disagreements (applies to betti and check-ns).
    #[arg(long, global = true, default_value_t = 1)]
    audit_primes: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Output {
    Json,
    Text,
    Csv,
}

#[derive(Args)]
struct Target {
    /// Model spec: p2:d=4 or hirzebruch:e=1,a=2,b=3
    #[arg(long)]
    model: String,

    /// Subsystem spec: complete | generic:t=2,seed=7 |
    /// constrained:t=3,rc=2,seed=1 | file:PATH
    #[arg(long, default_value = "complete")]
    subsystem: String,

    /// Curve spec: conic | section:seed=5 (defaults to the model's
    /// distinguished curve)
    #[arg(long)]
    curve: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Splitting type of the kernel bundle restricted to the curve.
    Splitting(Target),
    /// Graded Betti table of the section module over Sym V.
    Betti {
        #[command(flatten)]
        target: Target,
        /// Largest homological index i.
        #[arg(long, default_value_t = 2)]
        p_max: usize,
        /// Largest internal degree j.
        #[arg(long)]
        window: Option<usize>,
    },
    /// Property N^S_p verdict in a degree window.
    CheckNs {
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value_t = 1)]
        p: usize,
        #[arg(long)]
        window: Option<usize>,
    },
    /// k-normality defect.
    Normality {
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        k: usize,
    },
    /// Castelnuovo-Mumford regularity scan.
    Regularity {
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value_t = 8)]
        bound: usize,
    },
    /// Restriction of the subsystem to the curve: image codimension and
    /// the sections vanishing on it.
    Restrict(Target),
    /// Seeded verification campaign.
    Campaign {
        /// Model spec.
        #[arg(long)]
        model: String,
        /// Which campaign: constrained restriction codimensions, or
        /// generic subsystems at the boundary codimension.
        #[arg(long, value_enum, default_value_t = CampaignChoice::Restriction)]
        check: CampaignChoice,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        codim_min: usize,
        #[arg(long, default_value_t = 3)]
        codim_max: usize,
        /// Seed for the section curve on ruled surfaces.
        #[arg(long, default_value_t = 17)]
        curve_seed: u64,
        #[arg(long)]
        window: Option<usize>,
        /// Where counterexample artifacts are dumped.
        #[arg(long)]
        dump_dir: Option<PathBuf>,
        /// Include wall-clock timings (breaks byte-reproducibility).
        #[arg(long, default_value_t = false)]
        timings: bool,
    },
    /// Sweep a codimension x restriction-codimension grid into a dataset.
    Scan {
        #[arg(long)]
        model: String,
        /// Comma-separated codimensions.
        #[arg(long, value_delimiter = ',')]
        codims: Vec<usize>,
        /// Comma-separated restriction codimensions.
        #[arg(long, value_delimiter = ',')]
        restriction_codims: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        trials_per_cell: usize,
        #[arg(long, default_value_t = 17)]
        curve_seed: u64,
        #[arg(long)]
        window: Option<usize>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the built-in exact Property N_p thresholds.
    Thresholds {
        /// Cap on the largest p scanned.
        #[arg(long, default_value_t = 4)]
        p_cap: usize,
        #[arg(long, default_value_t = 6)]
        window: usize,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CampaignChoice {
    Restriction,
    GenericBoundary,
}

fn parse_curve(
    model: &SurfaceModel,
    field: PrimeField,
    spec: Option<&str>,
    default_seed: u64,
) -> Result<RationalCurve> {
    match spec {
        None => Ok(match model.kind {
            SurfaceKind::ProjectivePlane => RationalCurve::Conic,
            SurfaceKind::Hirzebruch { .. } => RationalCurve::section(model, field, default_seed)?,
        }),
        Some("conic") => {
            if model.kind != SurfaceKind::ProjectivePlane {
                bail!("the conic lives on p2");
            }
            Ok(RationalCurve::Conic)
        }
        Some(s) if s.starts_with("section:seed=") => {
            let seed: u64 = s["section:seed=".len()..]
                .parse()
                .context("curve seed must be an integer")?;
            Ok(RationalCurve::section(model, field, seed)?)
        }
        Some(other) => bail!("cannot parse curve spec {other}"),
    }
}

fn emit(output: Output, value: serde_json::Value, text: String) -> Result<()> {
    match output {
        Output::Json => println!("{}", serde_json::to_string_pretty(&value)?),
        Output::Text | Output::Csv => println!("{text}"),
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let field = PrimeField::new(cli.prime)?;

    match &cli.command {
        Command::Splitting(target) => {
            let (model, class) = SurfaceModel::parse_spec(&target.model)?;
            let curve = parse_curve(&model, field, target.curve.as_deref(), cli.seed)?;
            let spec = SubsystemSpec::parse(&target.subsystem, Some(&curve))?;
            let sub = make_subsystem(&model, class, field, &spec)?;
            let st = restricted_kernel_splitting(&sub, &curve)?;
            let (rc, meet) = sub.restriction_image_codim(&curve)?;
            let value = serde_json::json!({
                "model": model.spec_string(class),
                "subsystem": sub.label,
                "prime": cli.prime,
                "degree": st.degree,
                "restriction_codim": rc,
                "vanishing_meet": meet,
                "twists": st.twists,
                "h0_profile": st.h0_profile,
            });
            let text = format!(
                "splitting type on the curve: ({})  degree {}  restriction codim {}",
                st.twists
                    .iter()
                    .map(|a| a.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
                st.degree,
                rc
            );
            emit(cli.output, value, text)?;
        }
        Command::Betti {
            target,
            p_max,
            window,
        } => {
            let (model, class) = SurfaceModel::parse_spec(&target.model)?;
            let curve = parse_curve(&model, field, target.curve.as_deref(), cli.seed)?;
            let spec = SubsystemSpec::parse(&target.subsystem, Some(&curve))?;
            let sub = make_subsystem(&model, class, field, &spec)?;
            let window = window.unwrap_or(sub.codim + 4);
            let wb = ModuleWorkbench::new(&sub, window + 1)?;
            let verdict = wb.nsp_verdict(*p_max, window)?;
            let audit = maybe_audit(&cli, &model, class, &spec, *p_max, window)?;
            let mut value = serde_json::json!({
                "model": model.spec_string(class),
                "subsystem": sub.label,
                "prime": cli.prime,
                "window": window,
                "table": verdict.table,
                "verdict": verdict.holds_in_window,
                "certifications": {
                    "reductions": verdict.reductions,
                    "k01_equals_codim": verdict.k01 == sub.codim,
                },
            });
            if let Some(audit) = audit {
                value["audit"] = serde_json::to_value(&audit)?;
            }
            emit(cli.output, value, verdict.table.diagram())?;
        }
        Command::CheckNs { target, p, window } => {
            let (model, class) = SurfaceModel::parse_spec(&target.model)?;
            let curve = parse_curve(&model, field, target.curve.as_deref(), cli.seed)?;
            let spec = SubsystemSpec::parse(&target.subsystem, Some(&curve))?;
            let sub = make_subsystem(&model, class, field, &spec)?;
            let window = window.unwrap_or(sub.codim + 4);
            let wb = ModuleWorkbench::new(&sub, window + 1)?;
            let mut verdict = wb.nsp_verdict(*p, window)?;
            verdict.base_point = Some(sub.base_point_free_check()?);
            let audit = maybe_audit(&cli, &model, class, &spec, *p, window)?;
            let mut value = serde_json::json!({
                "model": model.spec_string(class),
                "subsystem": sub.label,
                "prime": cli.prime,
                "window": window,
                "table": verdict.table,
                "verdict": verdict.holds_in_window,
                "offenders": verdict.offenders,
                "k01": verdict.k01,
                "certifications": {
                    "reductions": verdict.reductions,
                    "base_point": verdict.base_point,
                    "very_ample": sub.very_ample_certification(),
                },
            });
            if let Some(audit) = audit {
                value["audit"] = serde_json::to_value(&audit)?;
            }
            let text = format!(
                "N^S_{p} {} in window [2, {window}]{}",
                if verdict.holds_in_window {
                    "holds"
                } else {
                    "FAILS"
                },
                if verdict.offenders.is_empty() {
                    String::new()
                } else {
                    format!("; offenders {:?}", verdict.offenders)
                }
            );
            emit(cli.output, value, text)?;
        }
        Command::Normality { target, k } => {
            let (model, class) = SurfaceModel::parse_spec(&target.model)?;
            let curve = parse_curve(&model, field, target.curve.as_deref(), cli.seed)?;
            let spec = SubsystemSpec::parse(&target.subsystem, Some(&curve))?;
            let sub = make_subsystem(&model, class, field, &spec)?;
            let wb = ModuleWorkbench::new(&sub, (*k).max(2))?;
            let defect = wb.normality_defect(*k)?;
            let value = serde_json::json!({
                "model": model.spec_string(class),
                "subsystem": sub.label,
                "prime": cli.prime,
                "k": k,
                "defect": defect,
            });
            emit(cli.output, value, format!("{k}-normality defect: {defect}"))?;
        }
        Command::Regularity { target, bound } => {
            let (model, class) = SurfaceModel::parse_spec(&target.model)?;
            let curve = parse_curve(&model, field, target.curve.as_deref(), cli.seed)?;
            let spec = SubsystemSpec::parse(&target.subsystem, Some(&curve))?;
            let sub = make_subsystem(&model, class, field, &spec)?;
            let wb = ModuleWorkbench::new(&sub, *bound)?;
            let report = wb.regularity(*bound)?;
            let value = serde_json::json!({
                "model": model.spec_string(class),
                "subsystem": sub.label,
                "prime": cli.prime,
                "report": report,
            });
            let text = format!(
                "regularity: {} (bounds: codim+2 = {}, mixed = {}, degree = {})",
                report
                    .regularity
                    .map(|r| r.to_string())
                    .unwrap_or_else(|| format!("not found <= {bound}")),
                report.bounds.codim_plus_two,
                report.bounds.mixed,
                report.bounds.degree_bound
            );
            emit(cli.output, value, text)?;
        }
        Command::Restrict(target) => {
            let (model, class) = SurfaceModel::parse_spec(&target.model)?;
            let curve = parse_curve(&model, field, target.curve.as_deref(), cli.seed)?;
            let spec = SubsystemSpec::parse(&target.subsystem, Some(&curve))?;
            let sub = make_subsystem(&model, class, field, &spec)?;
            let (rc, meet) = sub.restriction_image_codim(&curve)?;
            let degree = model.curve_degree(&curve, class)?;
            let value = serde_json::json!({
                "model": model.spec_string(class),
                "subsystem": sub.label,
                "prime": cli.prime,
                "curve_degree": degree,
                "self_intersection": curve.self_intersection(&model)?,
                "restriction_codim": rc,
                "vanishing_meet": meet,
            });
            let text = format!(
                "restriction to the curve: image codim {rc} in degree-{degree} forms, {meet} sections vanish"
            );
            emit(cli.output, value, text)?;
        }
        Command::Campaign {
            model,
            check,
            trials,
            codim_min,
            codim_max,
            curve_seed,
            window,
            dump_dir,
            timings,
        } => {
            let (model, class) = SurfaceModel::parse_spec(model)?;
            let kind = match check {
                CampaignChoice::Restriction => CampaignKind::Restriction,
                CampaignChoice::GenericBoundary => CampaignKind::GenericBoundary,
            };
            let mut campaign = Campaign::new(kind, model, class);
            campaign.prime = cli.prime;
            campaign.master_seed = cli.seed;
            campaign.trials = *trials;
            campaign.codim_range = (*codim_min, *codim_max);
            campaign.curve_seed = *curve_seed;
            campaign.window_override = *window;
            campaign.include_timings = *timings;
            campaign.dump_dir = dump_dir.clone();
            let summary = run_campaign(&campaign)?;
            let text = format!(
                "{} trials: {} counterexamples, {} errors, {} capped, N^S_{} held {} times",
                summary.trials,
                summary.counterexamples,
                summary.errored,
                summary.capped,
                campaign.p_index,
                summary.nsp_held
            );
            emit(cli.output, serde_json::to_value(&summary)?, text)?;
            summary.enforce()?;
        }
        Command::Scan {
            model,
            codims,
            restriction_codims,
            trials_per_cell,
            curve_seed,
            window,
            out,
        } => {
            let (model, class) = SurfaceModel::parse_spec(model)?;
            let config = ScanConfig {
                model,
                class,
                prime: cli.prime,
                curve_seed: *curve_seed,
                master_seed: cli.seed,
                codims: codims.clone(),
                restriction_codims: restriction_codims.clone(),
                trials_per_cell: *trials_per_cell,
                p_index: 1,
                window_override: *window,
            };
            let dataset = scan(&config)?;
            let body = match cli.output {
                Output::Json => serde_json::to_string_pretty(&dataset)?,
                _ => scan_to_csv(&dataset)?,
            };
            match out {
                Some(path) => std::fs::write(path, body)?,
                None => print!("{body}"),
            }
        }
        Command::Thresholds { p_cap, window } => {
            let report = verify_known_thresholds(field, *p_cap, *window)?;
            let mut text = String::new();
            for o in &report.outcomes {
                text.push_str(&format!(
                    "{}: N_p holds for p <= {} (threshold {}){}\n",
                    o.model_spec,
                    o.p_checked,
                    o.threshold,
                    match (&o.failure_witness, o.above_skipped_by_cap) {
                        (Some((i, j, k)), _) => format!("; k_({i},{j}) = {k} past the threshold"),
                        (None, true) => "; failure probe skipped by the p cap".to_string(),
                        (None, false) =>
                            "; failure probe found nothing (inconsistent!)".to_string(),
                    }
                ));
            }
            emit(cli.output, serde_json::to_value(&report)?, text)?;
            if !report.all_consistent {
                bail!("threshold fixtures inconsistent with the known values");
            }
        }
    }
    Ok(())
}

fn maybe_audit(
    cli: &Cli,
    model: &SurfaceModel,
    class: nsp_core::models::BundleClass,
    spec: &SubsystemSpec,
    p_max: usize,
    window: usize,
) -> Result<Option<nsp_core::harness::AuditReport>> {
    if cli.audit_primes <= 1 {
        return Ok(None);
    }
    let primes = default_audit_primes(cli.audit_primes);
    Ok(Some(audit_betti(
        model, class, spec, p_max, window, &primes,
    )?))
}
