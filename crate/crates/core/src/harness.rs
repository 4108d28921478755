//! Seeded verification campaigns, known-threshold fixtures, grid scans,
//! the multi-prime audit, and their reports.
//!
//! A campaign runs many seeded trials against one surface, class and
//! curve. Every trial record carries full reproduction data (seeds,
//! prime, codimensions); a trial whose restriction hypothesis holds but
//! whose N^S_p scan fails is a counterexample, fails the whole campaign
//! and dumps its subsystem basis to disk. Identical master seeds produce
//! byte-identical reports regardless of thread count: per-trial seeds are
//! derived from the master seed, trials are collected in index order,
//! and wall-clock timings stay out of reports unless asked for.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bundles::{nsp_restriction_criterion, restricted_kernel_splitting};
use crate::error::Error;
use crate::field::PrimeField;
use crate::invariants::ModuleWorkbench;
use crate::koszul::BettiTable;
use crate::models::{BundleClass, RationalCurve, SurfaceModel};
use crate::subsystems::{make_subsystem, BasePointReport, Certification, Subsystem, SubsystemSpec};

/// SplitMix64 step, used to derive independent per-trial seeds.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index.wrapping_add(1)))
}

/// How the campaign constructs its subsystems.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CampaignKind {
    /// Constrained subsystems with restriction codimension at most the
    /// self-intersection of the curve minus 2 (the sufficient hypothesis).
    Restriction,
    /// Generic subsystems at the boundary codimension
    /// h0(L - C) + C.C - 2 where the genericity argument still applies.
    GenericBoundary,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Campaign {
    pub kind: CampaignKind,
    pub model: SurfaceModel,
    pub class: BundleClass,
    pub prime: u64,
    pub curve_seed: u64,
    pub trials: usize,
    pub master_seed: u64,
    /// Inclusive codimension range cycled through (Restriction only).
    pub codim_range: (usize, usize),
    /// Property index p for the N^S_p scan.
    pub p_index: usize,
    /// Scan window J; pieces are built through J + 1. Default codim + 4.
    pub window_override: Option<usize>,
    /// Check the normality / generator-degree / regularity consequences
    /// on every trial where the N^S_p scan holds.
    pub check_consequences: bool,
    /// Treat consequence failures as counterexamples. The consequences
    /// need V very ample; at the literal generic boundary the projection
    /// center can meet the secant variety, so boundary campaigns record
    /// the consequences without enforcing them.
    pub enforce_consequences: bool,
    /// Per-trial wall-clock cap; exceeding it marks the record, it does
    /// not abort the trial.
    pub time_cap_ms: u64,
    /// Serialize per-trial timings (off keeps reports byte-reproducible).
    pub include_timings: bool,
    /// Where counterexample artifacts are dumped.
    pub dump_dir: Option<PathBuf>,
}

impl Campaign {
    pub fn new(kind: CampaignKind, model: SurfaceModel, class: BundleClass) -> Self {
        Campaign {
            kind,
            model,
            class,
            prime: crate::field::DEFAULT_PRIME,
            curve_seed: 17,
            trials: 10,
            master_seed: 1,
            codim_range: (1, 2),
            p_index: 1,
            window_override: None,
            check_consequences: true,
            enforce_consequences: kind == CampaignKind::Restriction,
            time_cap_ms: 60_000,
            include_timings: false,
            dump_dir: None,
        }
    }

    fn curve(&self, field: PrimeField) -> Result<RationalCurve, Error> {
        match self.model.kind {
            crate::models::SurfaceKind::ProjectivePlane => Ok(RationalCurve::Conic),
            crate::models::SurfaceKind::Hirzebruch { .. } => {
                RationalCurve::section(&self.model, field, self.curve_seed)
            }
        }
    }
}

/// Everything recorded about a single trial.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub subsystem: String,
    pub codim: usize,
    pub dim_v: usize,
    pub ambient: usize,
    pub self_intersection: i64,
    pub restriction_codim_target: Option<usize>,
    pub restriction_codim: usize,
    /// dim of V meet (sections vanishing on the curve)
    pub vanishing_meet: usize,
    pub splitting: Vec<u64>,
    pub base_point: Option<BasePointReport>,
    /// How very-ampleness of V is backed (proven only for complete).
    pub very_ample: Certification,
    /// The sufficient criterion through the restricted kernel bundle.
    pub curve_criterion: bool,
    /// Restriction codimension within the sufficient range.
    pub hypothesis_applies: bool,
    pub window: usize,
    pub nsp_holds: bool,
    pub offenders: Vec<(usize, usize, usize)>,
    pub k00: usize,
    pub k01: usize,
    pub regularity: Option<usize>,
    /// reg <= codim + 2, the consequence the hypothesis guarantees.
    pub regularity_within_codim_bound: Option<bool>,
    /// reg <= max(structure sheaf regularity + 1, codim + 2).
    pub regularity_within_mixed_bound: Option<bool>,
    /// reg <= degree - ambient projective dimension + 3.
    pub regularity_within_degree_bound: Option<bool>,
    /// Defects vanish for codim + 1 <= k <= window.
    pub defects_vanish_from_codim_plus_one: Option<bool>,
    /// All ideal generator degrees within the window are <= codim + 2.
    pub generator_degrees_bounded: Option<bool>,
    pub generator_degrees: BTreeMap<usize, usize>,
    pub counterexample: bool,
    pub error: Option<String>,
    pub capped: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basis_rows: Option<Vec<Vec<u64>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub campaign: Campaign,
    pub model_spec: String,
    pub trials: usize,
    pub counterexamples: usize,
    pub errored: usize,
    pub capped: usize,
    pub nsp_held: usize,
    pub restriction_codim_distribution: BTreeMap<usize, usize>,
    /// Ambient identity: sections on the curve = h0(L) - h0(L - C),
    /// i.e. the complete restriction surjects.
    pub complete_restriction_surjective: bool,
    /// h0(L - C) + C.C - 2, the codimension the genericity argument
    /// reaches when read as a vector-space bound.
    pub boundary_codim: usize,
    /// One less: the safe reading under which the generic subsystem is
    /// also very ample on the built-in models.
    pub boundary_codim_strict: usize,
    pub records: Vec<TrialRecord>,
}

impl CampaignSummary {
    /// Error out when counterexamples were found (after dumping them).
    pub fn enforce(&self) -> Result<(), Error> {
        if self.counterexamples > 0 {
            let dump = self
                .campaign
                .dump_dir
                .as_ref()
                .map(|d| d.display().to_string())
                .unwrap_or_else(|| "(no dump dir configured)".to_string());
            return Err(Error::CounterexampleFound {
                count: self.counterexamples,
                dump,
            });
        }
        Ok(())
    }
}

/// Standing hypothesis of every campaign: no intermediate cohomology for
/// the positive powers of the class across the window.
pub fn h1_vanishes_through(
    model: &SurfaceModel,
    class: BundleClass,
    window: usize,
) -> Result<bool, Error> {
    for j in 1..=window as i64 {
        if model.cohomology_table(class.scale(j))?.1 != 0 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Run a campaign: build one subsystem per trial, check the curve-side
/// criterion and the Betti-side N^S_p scan, and cross-check the
/// normality, generator-degree and regularity consequences.
pub fn run_campaign(campaign: &Campaign) -> Result<CampaignSummary, Error> {
    let field = PrimeField::new(campaign.prime)?;
    if !campaign.model.is_very_ample(campaign.class)? {
        return Err(Error::NotVeryAmple(format!("{}", campaign.class)));
    }
    let max_window = {
        let top_codim = match campaign.kind {
            CampaignKind::Restriction => campaign.codim_range.1,
            CampaignKind::GenericBoundary => boundary_codim(campaign, field)?,
        };
        campaign.window_override.unwrap_or(top_codim + 4)
    };
    if !h1_vanishes_through(&campaign.model, campaign.class, max_window + 1)? {
        return Err(Error::NotVeryAmple(format!(
            "{} has intermediate cohomology inside the window",
            campaign.class
        )));
    }
    let curve = campaign.curve(field)?;

    // the identity behind the boundary codimension: restriction of the
    // complete system surjects onto the sections of the curve
    let restriction = campaign
        .model
        .restriction_matrix(field, &curve, campaign.class)?;
    let h0 = campaign.model.h0(campaign.class)?;
    let h0_vanishing = campaign
        .model
        .h0(campaign.class.sub(curve.class(&campaign.model)?)?)?;
    let complete_restriction_surjective =
        restriction.rank() == restriction.rows() && restriction.rows() == h0 - h0_vanishing;

    let records: Vec<TrialRecord> = (0..campaign.trials)
        .into_par_iter()
        .map(|index| run_trial(campaign, field, &curve, index))
        .collect();

    let boundary = boundary_codim(campaign, field)?;
    let mut summary = CampaignSummary {
        campaign: campaign.clone(),
        model_spec: campaign.model.spec_string(campaign.class),
        trials: records.len(),
        counterexamples: records.iter().filter(|r| r.counterexample).count(),
        errored: records.iter().filter(|r| r.error.is_some()).count(),
        capped: records.iter().filter(|r| r.capped).count(),
        nsp_held: records.iter().filter(|r| r.nsp_holds).count(),
        restriction_codim_distribution: BTreeMap::new(),
        complete_restriction_surjective,
        boundary_codim: boundary,
        boundary_codim_strict: boundary.saturating_sub(1),
        records,
    };
    for r in &summary.records {
        *summary
            .restriction_codim_distribution
            .entry(r.restriction_codim)
            .or_insert(0) += 1;
    }
    if summary.counterexamples > 0 {
        if let Some(dir) = &campaign.dump_dir {
            dump_counterexamples(dir, &summary)?;
        }
    }
    Ok(summary)
}

fn boundary_codim(campaign: &Campaign, field: PrimeField) -> Result<usize, Error> {
    let curve = campaign.curve(field)?;
    let m = curve.self_intersection(&campaign.model)?;
    let vanishing = campaign
        .model
        .h0(campaign.class.sub(curve.class(&campaign.model)?)?)?;
    Ok(vanishing + m as usize - 2)
}

fn run_trial(
    campaign: &Campaign,
    field: PrimeField,
    curve: &RationalCurve,
    index: usize,
) -> TrialRecord {
    let start = Instant::now();
    let seed = derive_seed(campaign.master_seed, index as u64);
    let mut record = TrialRecord {
        trial: index,
        seed,
        subsystem: String::new(),
        codim: 0,
        dim_v: 0,
        ambient: 0,
        self_intersection: 0,
        restriction_codim_target: None,
        restriction_codim: 0,
        vanishing_meet: 0,
        splitting: Vec::new(),
        base_point: None,
        very_ample: Certification::Assumed,
        curve_criterion: false,
        hypothesis_applies: false,
        window: 0,
        nsp_holds: false,
        offenders: Vec::new(),
        k00: 0,
        k01: 0,
        regularity: None,
        regularity_within_codim_bound: None,
        regularity_within_mixed_bound: None,
        regularity_within_degree_bound: None,
        defects_vanish_from_codim_plus_one: None,
        generator_degrees_bounded: None,
        generator_degrees: BTreeMap::new(),
        counterexample: false,
        error: None,
        capped: false,
        elapsed_ms: None,
        basis_rows: None,
    };
    let outcome = run_trial_inner(campaign, field, curve, index, seed, &mut record);
    if let Err(e) = outcome {
        record.error = Some(e.to_string());
    }
    let elapsed = start.elapsed().as_millis() as u64;
    record.capped = elapsed > campaign.time_cap_ms;
    if campaign.include_timings {
        record.elapsed_ms = Some(elapsed);
    }
    record
}

fn run_trial_inner(
    campaign: &Campaign,
    field: PrimeField,
    curve: &RationalCurve,
    index: usize,
    seed: u64,
    record: &mut TrialRecord,
) -> Result<(), Error> {
    let model = &campaign.model;
    let class = campaign.class;
    let m = curve.self_intersection(model)?;
    record.self_intersection = m;
    let sufficient_codim = (m - 2).max(0) as usize;

    let sub: Subsystem = match campaign.kind {
        CampaignKind::Restriction => {
            let (lo, hi) = campaign.codim_range;
            let span = hi.saturating_sub(lo) + 1;
            let codim = lo + index % span;
            let target = feasible_restriction_codim(
                model,
                class,
                field,
                curve,
                codim,
                sufficient_codim,
                seed,
            )?;
            record.restriction_codim_target = Some(target);
            make_subsystem(
                model,
                class,
                field,
                &SubsystemSpec::Constrained {
                    codim,
                    restriction_codim: target,
                    seed,
                    curve: curve.clone(),
                },
            )?
        }
        CampaignKind::GenericBoundary => {
            let codim = boundary_codim(campaign, field)?;
            // a non-general draw (restriction codimension above the
            // sufficient range) is outside the genericity hypothesis;
            // resample with derived seeds and record nothing else
            let mut chosen = None;
            for attempt in 0..8u64 {
                let s = if attempt == 0 {
                    seed
                } else {
                    derive_seed(seed, attempt)
                };
                let candidate = make_subsystem(
                    model,
                    class,
                    field,
                    &SubsystemSpec::Generic { codim, seed: s },
                )?;
                let (rc, _) = candidate.restriction_image_codim(curve)?;
                if rc <= sufficient_codim {
                    chosen = Some(candidate);
                    break;
                }
            }
            chosen.ok_or(Error::RankDeficiency { retries: 8 })?
        }
    };

    record.subsystem = sub.label.clone();
    record.codim = sub.codim;
    record.dim_v = sub.dim();
    record.ambient = sub.ambient_dim();
    record.very_ample = sub.very_ample_certification();
    let (rc, meet) = sub.restriction_image_codim(curve)?;
    record.restriction_codim = rc;
    record.vanishing_meet = meet;
    record.hypothesis_applies = rc <= sufficient_codim;
    record.base_point = Some(sub.base_point_free_check()?);

    let splitting = restricted_kernel_splitting(&sub, curve)?;
    record.splitting = splitting.twists.clone();
    record.curve_criterion = nsp_restriction_criterion(&sub, curve, campaign.p_index)?;

    let window = campaign.window_override.unwrap_or(sub.codim + 4);
    record.window = window;
    let workbench = ModuleWorkbench::new(&sub, window + 1)?;
    let verdict = workbench.nsp_verdict(campaign.p_index, window)?;
    record.nsp_holds = verdict.holds_in_window;
    record.offenders = verdict.offenders.clone();
    record.k00 = verdict.table.get(0, 0).unwrap_or(usize::MAX);
    record.k01 = verdict.k01;

    let bookkeeping_ok = record.k00 == 1 && record.k01 == sub.codim;

    let mut consequences_ok = true;
    if campaign.check_consequences && verdict.holds_in_window {
        // normality from codim + 1 on
        let mut defects_ok = true;
        for k in sub.codim + 1..=window {
            if workbench.normality_defect(k)? != 0 {
                defects_ok = false;
            }
        }
        record.defects_vanish_from_codim_plus_one = Some(defects_ok);

        // ideal generated in degrees <= codim + 2
        let degrees = workbench.ideal_generator_degrees(window.max(sub.codim + 3))?;
        let degrees_ok = degrees.keys().all(|&q| q <= sub.codim + 2);
        record.generator_degrees = degrees;
        record.generator_degrees_bounded = Some(degrees_ok);

        // regularity bounds; a level that never clears the bound is a
        // consequence failure, not a trial error
        match workbench.regularity(window.max(sub.codim + 3)) {
            Ok(reg_report) => {
                record.regularity = reg_report.regularity;
                let reg = reg_report.regularity.unwrap_or(usize::MAX);
                record.regularity_within_codim_bound = Some(reg <= sub.codim + 2);
                record.regularity_within_mixed_bound = Some(reg <= reg_report.bounds.mixed);
                record.regularity_within_degree_bound =
                    Some((reg as i64) <= reg_report.bounds.degree_bound);
            }
            Err(Error::NotFoundWithinBound { .. }) => {
                record.regularity = None;
                record.regularity_within_codim_bound = Some(false);
                record.regularity_within_mixed_bound = Some(false);
                record.regularity_within_degree_bound = Some(false);
            }
            Err(e) => return Err(e),
        }
        consequences_ok = defects_ok
            && degrees_ok
            && record.regularity_within_codim_bound == Some(true)
            && record.regularity_within_mixed_bound == Some(true)
            && record.regularity_within_degree_bound == Some(true);
    }

    // under the restriction hypothesis the verdict must come out positive
    if record.hypothesis_applies
        && (!record.curve_criterion
            || !verdict.holds_in_window
            || !bookkeeping_ok
            || (campaign.enforce_consequences && !consequences_ok))
    {
        record.counterexample = true;
        record.basis_rows = Some((0..sub.dim()).map(|i| sub.basis_row(i)).collect());
    }
    if !bookkeeping_ok {
        // bookkeeping identities must hold for every subsystem
        record.counterexample = true;
        record.basis_rows = Some((0..sub.dim()).map(|i| sub.basis_row(i)).collect());
    }
    Ok(())
}

/// Pick a restriction codimension for the trial: within the feasible
/// range of the constrained construction and within the sufficient range
/// of the curve criterion.
fn feasible_restriction_codim(
    model: &SurfaceModel,
    class: BundleClass,
    field: PrimeField,
    curve: &RationalCurve,
    codim: usize,
    sufficient_codim: usize,
    seed: u64,
) -> Result<usize, Error> {
    let restriction = model.restriction_matrix(field, curve, class)?;
    let ambient = model.h0(class)?;
    let curve_sections = restriction.rows();
    let full_rank = restriction.rank();
    let kernel_dim = ambient - full_rank;
    let dim_v = ambient - codim;
    // meet = dim_v - (curve_sections - rc) must lie in [0, min(dim_v, kernel_dim)],
    // and the image dimension must fit inside the full image.
    let mut feasible: Vec<usize> = Vec::new();
    for rc in 0..=sufficient_codim.min(curve_sections) {
        let meet = dim_v as i64 - (curve_sections as i64 - rc as i64);
        if meet >= 0
            && meet <= kernel_dim.min(dim_v) as i64
            && dim_v as i64 - meet <= full_rank as i64
        {
            feasible.push(rc);
        }
    }
    if feasible.is_empty() {
        return Err(Error::InfeasibleConstraint(format!(
            "no restriction codimension <= {sufficient_codim} reachable at codimension {codim}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5bf0_3635);
    Ok(feasible[rng.gen_range(0..feasible.len())])
}

/// Write one JSON artifact per counterexample record: model, prime,
/// seeds and the full subsystem basis, enough to reproduce the trial.
pub fn dump_counterexamples(dir: &Path, summary: &CampaignSummary) -> Result<(), Error> {
    std::fs::create_dir_all(dir)?;
    for record in summary.records.iter().filter(|r| r.counterexample) {
        let path = dir.join(format!(
            "counterexample_seed{}_trial{}.json",
            summary.campaign.master_seed, record.trial
        ));
        let payload = serde_json::json!({
            "model": summary.model_spec,
            "prime": summary.campaign.prime,
            "master_seed": summary.campaign.master_seed,
            "record": record,
        });
        std::fs::write(path, serde_json::to_string_pretty(&payload)?)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------
// Known-threshold fixtures
// ---------------------------------------------------------------------

/// A polarized surface whose exact Property N_p threshold is known:
/// the complete embedding satisfies N_p exactly for p <= threshold.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ThresholdFixture {
    pub model: SurfaceModel,
    pub class: BundleClass,
    pub threshold: usize,
}

/// The built-in fixtures: plane cubics (threshold 3d - 3) and the two
/// small ruled-surface polarizations (threshold 2a + 2b - ae - 3).
pub fn threshold_fixtures() -> Vec<ThresholdFixture> {
    vec![
        ThresholdFixture {
            model: SurfaceModel::plane(),
            class: BundleClass::plane(3),
            threshold: 6,
        },
        ThresholdFixture {
            model: SurfaceModel::hirzebruch(0),
            class: BundleClass::ruled(2, 2),
            threshold: 5,
        },
        ThresholdFixture {
            model: SurfaceModel::hirzebruch(1),
            class: BundleClass::ruled(2, 3),
            threshold: 5,
        },
    ]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ThresholdOutcome {
    pub model_spec: String,
    pub threshold: usize,
    /// Largest p whose N_p scan ran (capped).
    pub p_checked: usize,
    /// N_p held for every p <= p_checked that the threshold promises.
    pub holds_below: bool,
    /// When the cap allowed probing above the threshold: the nonzero
    /// cell (i, j, value) that witnesses failure of N_{threshold+1}.
    pub failure_witness: Option<(usize, usize, usize)>,
    /// True when the failure probe was skipped because of the p cap.
    pub above_skipped_by_cap: bool,
    pub window: usize,
    pub prime: u64,
    pub table: BettiTable,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub p_cap: usize,
    pub outcomes: Vec<ThresholdOutcome>,
    pub all_consistent: bool,
}

/// Check the built-in threshold fixtures: N_p must hold for every
/// p <= min(cap, threshold), and when the cap reaches past a threshold
/// the next index must visibly fail inside the window.
pub fn verify_known_thresholds(
    field: PrimeField,
    p_cap: usize,
    window: usize,
) -> Result<ThresholdReport, Error> {
    let mut outcomes = Vec::new();
    for fixture in threshold_fixtures() {
        let sub = make_subsystem(
            &fixture.model,
            fixture.class,
            field,
            &SubsystemSpec::Complete,
        )?;
        let workbench = ModuleWorkbench::new(&sub, window + 1)?;
        let p_checked = p_cap.min(fixture.threshold);
        let verdict = workbench.nsp_verdict(p_checked, window)?;
        let mut failure_witness = None;
        let mut above_skipped_by_cap = false;
        if fixture.threshold < p_cap {
            let probe = fixture.threshold + 1;
            'probe: for j in 2..=window {
                let k = workbench.betti_e(probe, j)?;
                if k != 0 {
                    failure_witness = Some((probe, j, k));
                    break 'probe;
                }
            }
        } else {
            above_skipped_by_cap = true;
        }
        outcomes.push(ThresholdOutcome {
            model_spec: fixture.model.spec_string(fixture.class),
            threshold: fixture.threshold,
            p_checked,
            holds_below: verdict.holds_in_window,
            failure_witness,
            above_skipped_by_cap,
            window,
            prime: field.prime(),
            table: verdict.table,
        });
    }
    let all_consistent = outcomes
        .iter()
        .all(|o| o.holds_below && (o.above_skipped_by_cap || o.failure_witness.is_some()));
    Ok(ThresholdReport {
        p_cap,
        outcomes,
        all_consistent,
    })
}

// ---------------------------------------------------------------------
// Grid scan
// ---------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanConfig {
    pub model: SurfaceModel,
    pub class: BundleClass,
    pub prime: u64,
    pub curve_seed: u64,
    pub master_seed: u64,
    pub codims: Vec<usize>,
    pub restriction_codims: Vec<usize>,
    pub trials_per_cell: usize,
    pub p_index: usize,
    pub window_override: Option<usize>,
}

pub const SCAN_COLUMNS: &[&str] = &[
    "model",
    "curve",
    "prime",
    "master_seed",
    "trial",
    "seed",
    "codim",
    "rc_target",
    "rc_measured",
    "vanishing_meet",
    "dim_v",
    "ambient",
    "self_intersection",
    "window",
    "base_point_free",
    "bpf_certification",
    "curve_criterion",
    "hypothesis_applies",
    "nsp_holds",
    "k00",
    "k01",
    "regularity",
    "reg_le_codim_plus_2",
    "defects_ok",
    "generator_degrees_ok",
    "splitting",
    "counterexample",
    "error",
];

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanDataset {
    pub config: ScanConfig,
    pub rows: Vec<TrialRecord>,
    /// Which curve the scan used, echoed for reproduction.
    pub curve_label: String,
}

/// Sweep the codimension x restriction-codimension grid. Infeasible
/// cells produce a record with the error field set.
pub fn scan(config: &ScanConfig) -> Result<ScanDataset, Error> {
    let field = PrimeField::new(config.prime)?;
    let curve = match config.model.kind {
        crate::models::SurfaceKind::ProjectivePlane => RationalCurve::Conic,
        crate::models::SurfaceKind::Hirzebruch { .. } => {
            RationalCurve::section(&config.model, field, config.curve_seed)?
        }
    };
    let curve_label = match &curve {
        RationalCurve::Conic => "conic".to_string(),
        RationalCurve::Section { .. } => format!("section:seed={}", config.curve_seed),
    };
    let mut cells = Vec::new();
    for &codim in &config.codims {
        for &rc in &config.restriction_codims {
            for t in 0..config.trials_per_cell {
                cells.push((codim, rc, t));
            }
        }
    }
    let rows: Vec<TrialRecord> = cells
        .into_par_iter()
        .enumerate()
        .map(|(index, (codim, rc, _))| {
            let seed = derive_seed(config.master_seed, index as u64);
            scan_cell(config, field, &curve, index, codim, rc, seed)
        })
        .collect();
    Ok(ScanDataset {
        config: config.clone(),
        rows,
        curve_label,
    })
}

fn scan_cell(
    config: &ScanConfig,
    field: PrimeField,
    curve: &RationalCurve,
    index: usize,
    codim: usize,
    rc: usize,
    seed: u64,
) -> TrialRecord {
    let campaign = Campaign {
        kind: CampaignKind::Restriction,
        model: config.model,
        class: config.class,
        prime: config.prime,
        curve_seed: config.curve_seed,
        trials: 1,
        master_seed: seed,
        codim_range: (codim, codim),
        p_index: config.p_index,
        window_override: config.window_override,
        check_consequences: true,
        enforce_consequences: true,
        time_cap_ms: 60_000,
        include_timings: false,
        dump_dir: None,
    };
    let mut record = TrialRecord {
        trial: index,
        seed,
        subsystem: String::new(),
        codim,
        dim_v: 0,
        ambient: 0,
        self_intersection: 0,
        restriction_codim_target: Some(rc),
        restriction_codim: 0,
        vanishing_meet: 0,
        splitting: Vec::new(),
        base_point: None,
        very_ample: Certification::Assumed,
        curve_criterion: false,
        hypothesis_applies: false,
        window: 0,
        nsp_holds: false,
        offenders: Vec::new(),
        k00: 0,
        k01: 0,
        regularity: None,
        regularity_within_codim_bound: None,
        regularity_within_mixed_bound: None,
        regularity_within_degree_bound: None,
        defects_vanish_from_codim_plus_one: None,
        generator_degrees_bounded: None,
        generator_degrees: BTreeMap::new(),
        counterexample: false,
        error: None,
        capped: false,
        elapsed_ms: None,
        basis_rows: None,
    };
    let outcome = scan_cell_inner(&campaign, field, curve, codim, rc, seed, &mut record);
    if let Err(e) = outcome {
        record.error = Some(e.to_string());
    }
    record.trial = index;
    record.basis_rows = None;
    record
}

fn scan_cell_inner(
    campaign: &Campaign,
    field: PrimeField,
    curve: &RationalCurve,
    codim: usize,
    rc: usize,
    seed: u64,
    record: &mut TrialRecord,
) -> Result<(), Error> {
    let sub = make_subsystem(
        &campaign.model,
        campaign.class,
        field,
        &SubsystemSpec::Constrained {
            codim,
            restriction_codim: rc,
            seed,
            curve: curve.clone(),
        },
    )?;
    let m = curve.self_intersection(&campaign.model)?;
    record.self_intersection = m;
    record.subsystem = sub.label.clone();
    record.dim_v = sub.dim();
    record.ambient = sub.ambient_dim();
    record.very_ample = sub.very_ample_certification();
    let (found, meet) = sub.restriction_image_codim(curve)?;
    record.restriction_codim = found;
    record.vanishing_meet = meet;
    record.hypothesis_applies = found as i64 <= m - 2;
    record.base_point = Some(sub.base_point_free_check()?);
    let splitting = restricted_kernel_splitting(&sub, curve)?;
    record.splitting = splitting.twists.clone();
    record.curve_criterion = nsp_restriction_criterion(&sub, curve, campaign.p_index)?;
    let window = campaign.window_override.unwrap_or(codim + 4);
    record.window = window;
    let workbench = ModuleWorkbench::new(&sub, window + 1)?;
    let verdict = workbench.nsp_verdict(campaign.p_index, window)?;
    record.nsp_holds = verdict.holds_in_window;
    record.offenders = verdict.offenders.clone();
    record.k00 = verdict.table.get(0, 0).unwrap_or(usize::MAX);
    record.k01 = verdict.k01;
    if verdict.holds_in_window {
        let mut defects_ok = true;
        for k in codim + 1..=window {
            if workbench.normality_defect(k)? != 0 {
                defects_ok = false;
            }
        }
        record.defects_vanish_from_codim_plus_one = Some(defects_ok);
        let degrees = workbench.ideal_generator_degrees(window.max(codim + 3))?;
        record.generator_degrees_bounded = Some(degrees.keys().all(|&q| q <= codim + 2));
        record.generator_degrees = degrees;
        let reg_report = workbench.regularity(window.max(codim + 3))?;
        record.regularity = reg_report.regularity;
        record.regularity_within_codim_bound =
            Some(reg_report.regularity.unwrap_or(usize::MAX) <= codim + 2);
    }
    record.counterexample = record.hypothesis_applies && !record.nsp_holds;
    Ok(())
}

/// Serialize a scan dataset as RFC-4180-style CSV with the fixed column
/// order of [`SCAN_COLUMNS`]. Identical inputs produce identical bytes.
pub fn scan_to_csv(dataset: &ScanDataset) -> Result<String, Error> {
    let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
    writer.write_record(SCAN_COLUMNS)?;
    let model_spec = dataset.config.model.spec_string(dataset.config.class);
    for row in &dataset.rows {
        let bpf = row.base_point.as_ref();
        let fmt_opt_bool = |v: Option<bool>| match v {
            None => String::new(),
            Some(b) => b.to_string(),
        };
        let splitting = row
            .splitting
            .iter()
            .map(|a| a.to_string())
            .collect::<Vec<_>>()
            .join("|");
        writer.write_record(&[
            model_spec.clone(),
            dataset.curve_label.clone(),
            dataset.config.prime.to_string(),
            dataset.config.master_seed.to_string(),
            row.trial.to_string(),
            row.seed.to_string(),
            row.codim.to_string(),
            row.restriction_codim_target
                .map(|v| v.to_string())
                .unwrap_or_default(),
            row.restriction_codim.to_string(),
            row.vanishing_meet.to_string(),
            row.dim_v.to_string(),
            row.ambient.to_string(),
            row.self_intersection.to_string(),
            row.window.to_string(),
            fmt_opt_bool(bpf.map(|b| b.base_point_free)),
            bpf.map(|b| match &b.certification {
                crate::subsystems::Certification::Proven => "proven".to_string(),
                crate::subsystems::Certification::MonteCarlo {
                    trials,
                    extension_degrees,
                } => format!("monte-carlo:{trials}x{extension_degrees}"),
                crate::subsystems::Certification::Assumed => "assumed".to_string(),
            })
            .unwrap_or_default(),
            row.curve_criterion.to_string(),
            row.hypothesis_applies.to_string(),
            row.nsp_holds.to_string(),
            row.k00.to_string(),
            row.k01.to_string(),
            row.regularity.map(|v| v.to_string()).unwrap_or_default(),
            fmt_opt_bool(row.regularity_within_codim_bound),
            fmt_opt_bool(row.defects_vanish_from_codim_plus_one),
            fmt_opt_bool(row.generator_degrees_bounded),
            splitting,
            row.counterexample.to_string(),
            row.error.clone().unwrap_or_default(),
        ])?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::dim(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

// ---------------------------------------------------------------------
// Multi-prime audit
// ---------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AuditReport {
    pub primes: Vec<u64>,
    pub tables: Vec<BettiTable>,
    pub agree: bool,
    /// Cells whose values differ between primes, if any.
    pub disagreements: Vec<(usize, usize, Vec<usize>)>,
}

/// Recompute a Betti table at several primes and compare cell by cell.
/// Seeded subsystems resolve to the same integer coefficients reduced at
/// each prime, so the comparison is meaningful. Disagreements are
/// reported, never resolved.
pub fn audit_betti(
    model: &SurfaceModel,
    class: BundleClass,
    spec: &SubsystemSpec,
    p_max: usize,
    window: usize,
    primes: &[u64],
) -> Result<AuditReport, Error> {
    let mut tables = Vec::new();
    for &p in primes {
        let field = PrimeField::new(p)?;
        let sub = make_subsystem(model, class, field, spec)?;
        let workbench = ModuleWorkbench::new(&sub, window + 1)?;
        let verdict = workbench.nsp_verdict(p_max, window)?;
        tables.push(verdict.table);
    }
    let mut disagreements = Vec::new();
    if let Some(first) = tables.first() {
        for &(i, j, _) in &first.cells {
            let values: Vec<usize> = tables
                .iter()
                .map(|t| t.get(i, j).unwrap_or(usize::MAX))
                .collect();
            if values.windows(2).any(|w| w[0] != w[1]) {
                disagreements.push((i, j, values));
            }
        }
    }
    Ok(AuditReport {
        primes: primes.to_vec(),
        tables,
        agree: disagreements.is_empty(),
        disagreements,
    })
}
