//! Subsystems V of the space of sections of a polarizing class:
//! seeded generic subspaces, subspaces constrained to meet the sections
//! through a curve in prescribed dimension, and base-point-freeness
//! certification.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::binforms;
use crate::error::Error;
use crate::field::{Fp2, PrimeField};
use crate::matrix::Matrix;
use crate::models::{BundleClass, Mono, RationalCurve, SurfaceKind, SurfaceModel};

/// Retry budget for seeded sampling before reporting rank deficiency.
const SAMPLE_RETRIES: u32 = 100;

/// Points sampled over the base field and over the quadratic extension
/// during base-point checks.
const BPF_BASE_TRIALS: u32 = 48;
const BPF_EXT_TRIALS: u32 = 24;

/// How a positive or negative claim about a subsystem is backed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Certification {
    /// Exact computation settles the claim.
    Proven,
    /// Random point sampling found no witness.
    MonteCarlo { trials: u32, extension_degrees: u32 },
    /// Taken as a hypothesis, not checked.
    Assumed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasePointReport {
    pub base_point_free: bool,
    pub certification: Certification,
}

/// Recipe for building a subsystem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SubsystemSpec {
    /// The complete system, codimension 0.
    Complete,
    /// Explicit coefficient rows (reduced modulo the working prime).
    Explicit(Vec<Vec<i64>>),
    /// Seeded uniform coefficients, validated to full row rank.
    Generic { codim: usize, seed: u64 },
    /// Seeded subsystem whose image under restriction to the curve has
    /// the requested codimension, exactly (post-validated).
    Constrained {
        codim: usize,
        restriction_codim: usize,
        seed: u64,
        curve: RationalCurve,
    },
}

impl SubsystemSpec {
    /// Parse `complete | generic:t=2,seed=7 | constrained:t=3,rc=2,seed=1 |
    /// file:<path>`. Constrained specs need the curve supplied separately.
    pub fn parse(spec: &str, curve: Option<&RationalCurve>) -> Result<Self, Error> {
        let err = || Error::Parse {
            what: "subsystem spec",
            input: spec.to_string(),
        };
        if spec.trim() == "complete" {
            return Ok(SubsystemSpec::Complete);
        }
        if let Some(path) = spec.strip_prefix("file:") {
            let text = std::fs::read_to_string(path.trim())?;
            let rows: Vec<Vec<i64>> = serde_json::from_str(&text)?;
            return Ok(SubsystemSpec::Explicit(rows));
        }
        let (head, params) = spec.split_once(':').ok_or_else(err)?;
        let mut kv = std::collections::HashMap::new();
        for part in params.split(',') {
            let (k, v) = part.split_once('=').ok_or_else(err)?;
            let v: i64 = v.trim().parse().map_err(|_| err())?;
            kv.insert(k.trim().to_string(), v);
        }
        let get = |key: &str| kv.get(key).copied().ok_or_else(err);
        match head.trim() {
            "generic" => Ok(SubsystemSpec::Generic {
                codim: get("t")? as usize,
                seed: get("seed")? as u64,
            }),
            "constrained" => Ok(SubsystemSpec::Constrained {
                codim: get("t")? as usize,
                restriction_codim: get("rc")? as usize,
                seed: get("seed")? as u64,
                curve: curve.cloned().ok_or_else(err)?,
            }),
            _ => Err(err()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            SubsystemSpec::Complete => "complete".to_string(),
            SubsystemSpec::Explicit(_) => "explicit".to_string(),
            SubsystemSpec::Generic { codim, seed } => format!("generic:t={codim},seed={seed}"),
            SubsystemSpec::Constrained {
                codim,
                restriction_codim,
                seed,
                ..
            } => format!("constrained:t={codim},rc={restriction_codim},seed={seed}"),
        }
    }
}

/// A subsystem V inside the sections of a very ample class, stored as a
/// full-row-rank coefficient matrix over the monomial basis. Immutable.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Subsystem {
    pub model: SurfaceModel,
    pub class: BundleClass,
    pub field: PrimeField,
    pub codim: usize,
    pub seed: Option<u64>,
    pub label: String,
    basis: Matrix,
}

impl Subsystem {
    /// Ambient section space dimension.
    pub fn ambient_dim(&self) -> usize {
        self.basis.cols()
    }

    /// Dimension of V.
    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn basis_row(&self, i: usize) -> Vec<u64> {
        self.basis.row(i)
    }

    pub fn is_complete(&self) -> bool {
        self.codim == 0
    }

    /// Matrix whose rows are the basis vectors restricted to the curve,
    /// i.e. binary forms of degree class . curve.
    pub fn restricted_basis(&self, curve: &RationalCurve) -> Result<Matrix, Error> {
        let restriction = self
            .model
            .restriction_matrix(self.field, curve, self.class)?;
        self.basis.mul(&restriction.transpose())
    }

    /// Codimension of the image of V in the sections of the curve,
    /// together with the dimension of V meet (sections through the curve).
    pub fn restriction_image_codim(&self, curve: &RationalCurve) -> Result<(usize, usize), Error> {
        let restricted = self.restricted_basis(curve)?;
        let rank = restricted.rank();
        Ok((restricted.cols() - rank, self.dim() - rank))
    }

    /// How the very-ampleness of this subsystem is backed: proven for the
    /// complete system of a very ample class (checked at construction),
    /// assumed for proper subsystems, where deciding it exactly would
    /// need elimination theory.
    pub fn very_ample_certification(&self) -> Certification {
        if self.is_complete() {
            Certification::Proven
        } else {
            Certification::Assumed
        }
    }

    /// Base-point-freeness: proven positively for the complete system of a
    /// very ample class, proven negatively when a common zero is found,
    /// otherwise Monte Carlo evidence from seeded point sampling.
    pub fn base_point_free_check(&self) -> Result<BasePointReport, Error> {
        if self.is_complete() {
            return Ok(BasePointReport {
                base_point_free: true,
                certification: Certification::Proven,
            });
        }
        let monos = self.model.monomial_basis(self.class)?;
        let rows: Vec<Vec<u64>> = (0..self.dim()).map(|i| self.basis.row(i)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed.unwrap_or(0) ^ 0x9e3779b97f4a7c15);
        // Structured probes first: coordinate points and small-entry points
        // catch the base loci explicit subsystems tend to have. Uniform
        // points over the field and its quadratic extension follow.
        let mut points = structured_points(self.model.kind);
        for _ in 0..BPF_BASE_TRIALS {
            points.push(sample_point_base(&mut rng, self.model.kind, self.field));
        }
        for point in points {
            if rows
                .iter()
                .all(|row| eval_row_base(self.field, &monos, row, &point) == 0)
            {
                return Ok(BasePointReport {
                    base_point_free: false,
                    certification: Certification::Proven,
                });
            }
        }
        let non_residue = self.field.non_residue();
        for _ in 0..BPF_EXT_TRIALS {
            let point = sample_point_ext(&mut rng, self.model.kind, self.field, non_residue);
            if rows
                .iter()
                .all(|row| eval_row_ext(self.field, non_residue, &monos, row, &point).is_zero())
            {
                return Ok(BasePointReport {
                    base_point_free: false,
                    certification: Certification::Proven,
                });
            }
        }
        Ok(BasePointReport {
            base_point_free: true,
            certification: Certification::MonteCarlo {
                trials: BPF_BASE_TRIALS + BPF_EXT_TRIALS,
                extension_degrees: 2,
            },
        })
    }
}

/// Base-point-freeness for a span of binary forms on the line: exact,
/// by computing the gcd of the spanning forms.
pub fn base_point_free_on_line(field: PrimeField, forms: &[Vec<u64>]) -> BasePointReport {
    BasePointReport {
        base_point_free: binforms::coprime(&field, forms),
        certification: Certification::Proven,
    }
}

/// Build a subsystem from a spec. Deterministic given the seed.
pub fn make_subsystem(
    model: &SurfaceModel,
    class: BundleClass,
    field: PrimeField,
    spec: &SubsystemSpec,
) -> Result<Subsystem, Error> {
    if !model.is_very_ample(class)? {
        return Err(Error::NotVeryAmple(format!("{class}")));
    }
    let ambient = model.h0(class)?;
    let label = spec.label();
    match spec {
        SubsystemSpec::Complete => Ok(Subsystem {
            model: *model,
            class,
            field,
            codim: 0,
            seed: None,
            label,
            basis: Matrix::identity(field, ambient),
        }),
        SubsystemSpec::Explicit(rows) => {
            if rows.len() > ambient || rows.iter().any(|r| r.len() != ambient) {
                return Err(Error::dim(format!(
                    "explicit basis must be at most {ambient} rows of length {ambient}"
                )));
            }
            let basis = Matrix::from_int_rows(field, rows)?;
            if basis.rank() != basis.rows() {
                return Err(Error::RankDeficiency { retries: 0 });
            }
            Ok(Subsystem {
                model: *model,
                class,
                field,
                codim: ambient - rows.len(),
                seed: None,
                label,
                basis,
            })
        }
        SubsystemSpec::Generic { codim, seed } => {
            check_codim(*codim, ambient)?;
            let dim_v = ambient - codim;
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            for _ in 0..SAMPLE_RETRIES {
                let basis = sample_matrix(&mut rng, field, dim_v, ambient);
                if basis.rank() == dim_v {
                    return Ok(Subsystem {
                        model: *model,
                        class,
                        field,
                        codim: *codim,
                        seed: Some(*seed),
                        label,
                        basis,
                    });
                }
            }
            Err(Error::RankDeficiency {
                retries: SAMPLE_RETRIES,
            })
        }
        SubsystemSpec::Constrained {
            codim,
            restriction_codim,
            seed,
            curve,
        } => {
            check_codim(*codim, ambient)?;
            let dim_v = ambient - codim;
            let restriction = model.restriction_matrix(field, curve, class)?;
            let curve_sections = restriction.rows();
            let full_rank = restriction.rank();
            // sections of the class vanishing on the curve
            let kernel = restriction.kernel_basis();
            let kernel_dim = kernel.len();
            debug_assert_eq!(kernel_dim, ambient - full_rank);

            // dim of V meet kernel forced by the requested image codimension
            let meet = dim_v as i64 - (curve_sections as i64 - *restriction_codim as i64);
            let feasible = *restriction_codim <= curve_sections
                && meet >= 0
                && meet <= kernel_dim.min(dim_v) as i64
                && dim_v as i64 - meet <= full_rank as i64;
            if !feasible {
                return Err(Error::InfeasibleConstraint(format!(
                    "restriction codimension {restriction_codim} unreachable for codim {codim} \
                     (sections on curve: {curve_sections}, vanishing subspace: {kernel_dim})"
                )));
            }
            let meet = meet as usize;
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            for _ in 0..SAMPLE_RETRIES {
                let mut rows: Vec<Vec<u64>> = Vec::with_capacity(dim_v);
                for _ in 0..meet {
                    // random combination of the vanishing subspace
                    let mut v = vec![0u64; ambient];
                    for kv in &kernel {
                        let c = sample_scalar(&mut rng, field);
                        for (slot, &x) in v.iter_mut().zip(kv.iter()) {
                            *slot = field.add(*slot, field.mul(c, x));
                        }
                    }
                    rows.push(v);
                }
                for _ in meet..dim_v {
                    rows.push(
                        (0..ambient)
                            .map(|_| sample_scalar(&mut rng, field))
                            .collect(),
                    );
                }
                let basis = Matrix::from_rows(field, rows)?;
                if basis.rank() != dim_v {
                    continue;
                }
                let candidate = Subsystem {
                    model: *model,
                    class,
                    field,
                    codim: *codim,
                    seed: Some(*seed),
                    label: label.clone(),
                    basis,
                };
                let (codim_found, meet_found) = candidate.restriction_image_codim(curve)?;
                if codim_found == *restriction_codim && meet_found == meet {
                    return Ok(candidate);
                }
            }
            Err(Error::RankDeficiency {
                retries: SAMPLE_RETRIES,
            })
        }
    }
}

fn check_codim(codim: usize, ambient: usize) -> Result<(), Error> {
    // Embedding a surface needs at least 4 independent sections.
    if ambient < codim + 4 {
        return Err(Error::InfeasibleConstraint(format!(
            "codimension {codim} leaves fewer than 4 of {ambient} sections"
        )));
    }
    Ok(())
}

/// Coefficients are drawn from a prime-independent integer range and
/// reduced, so one seed denotes the same subsystem across audit primes.
fn sample_scalar(rng: &mut ChaCha8Rng, field: PrimeField) -> u64 {
    rng.gen_range(0..(1u64 << 30)) % field.prime()
}

fn sample_matrix(rng: &mut ChaCha8Rng, field: PrimeField, rows: usize, cols: usize) -> Matrix {
    let data: Vec<Vec<u64>> = (0..rows)
        .map(|_| (0..cols).map(|_| sample_scalar(rng, field)).collect())
        .collect();
    Matrix::from_rows(field, data).expect("rectangular sample")
}

/// Deterministic probe points with entries in {0, 1, 2}: includes every
/// coordinate point and torus-fixed point of the model.
fn structured_points(kind: SurfaceKind) -> Vec<[u64; 4]> {
    let mut points = Vec::new();
    let small = [0u64, 1, 2];
    match kind {
        SurfaceKind::ProjectivePlane => {
            for &x in &small {
                for &y in &small {
                    for &z in &small {
                        if x != 0 || y != 0 || z != 0 {
                            points.push([x, y, z, 0]);
                        }
                    }
                }
            }
        }
        SurfaceKind::Hirzebruch { .. } => {
            for &x0 in &small {
                for &x1 in &small {
                    for &y0 in &small {
                        for &y1 in &small {
                            if (x0 != 0 || x1 != 0) && (y0 != 0 || y1 != 0) {
                                points.push([x0, x1, y0, y1]);
                            }
                        }
                    }
                }
            }
        }
    }
    points
}

/// A point in homogeneous/Cox coordinates: 3 slots for the plane,
/// 2 + 2 slots for a ruled surface.
fn sample_point_base(rng: &mut ChaCha8Rng, kind: SurfaceKind, field: PrimeField) -> [u64; 4] {
    let p = field.prime();
    match kind {
        SurfaceKind::ProjectivePlane => loop {
            let pt = [
                rng.gen_range(0..p),
                rng.gen_range(0..p),
                rng.gen_range(0..p),
                0,
            ];
            if pt[..3].iter().any(|&c| c != 0) {
                return pt;
            }
        },
        SurfaceKind::Hirzebruch { .. } => loop {
            let pt = [
                rng.gen_range(0..p),
                rng.gen_range(0..p),
                rng.gen_range(0..p),
                rng.gen_range(0..p),
            ];
            if (pt[0] != 0 || pt[1] != 0) && (pt[2] != 0 || pt[3] != 0) {
                return pt;
            }
        },
    }
}

fn sample_point_ext(
    rng: &mut ChaCha8Rng,
    kind: SurfaceKind,
    field: PrimeField,
    _non_residue: u64,
) -> [Fp2; 4] {
    let p = field.prime();
    let draw = |rng: &mut ChaCha8Rng| Fp2 {
        re: rng.gen_range(0..p),
        im: rng.gen_range(0..p),
    };
    match kind {
        SurfaceKind::ProjectivePlane => loop {
            let pt = [draw(rng), draw(rng), draw(rng), Fp2::ZERO];
            if pt[..3].iter().any(|c| !c.is_zero()) {
                return pt;
            }
        },
        SurfaceKind::Hirzebruch { .. } => loop {
            let pt = [draw(rng), draw(rng), draw(rng), draw(rng)];
            if (!pt[0].is_zero() || !pt[1].is_zero()) && (!pt[2].is_zero() || !pt[3].is_zero()) {
                return pt;
            }
        },
    }
}

fn eval_row_base(field: PrimeField, monos: &[Mono], row: &[u64], point: &[u64; 4]) -> u64 {
    let mut acc = 0u64;
    for (coeff, mono) in row.iter().zip(monos.iter()) {
        if *coeff == 0 {
            continue;
        }
        let mut term = *coeff;
        for (slot, &exp) in point.iter().zip(mono.iter()) {
            if exp > 0 {
                term = field.mul(term, field.pow(*slot, exp as u64));
            }
        }
        acc = field.add(acc, term);
    }
    acc
}

fn eval_row_ext(
    field: PrimeField,
    non_residue: u64,
    monos: &[Mono],
    row: &[u64],
    point: &[Fp2; 4],
) -> Fp2 {
    let mut acc = Fp2::ZERO;
    for (coeff, mono) in row.iter().zip(monos.iter()) {
        if *coeff == 0 {
            continue;
        }
        let mut term = Fp2::from_base(*coeff);
        for (slot, &exp) in point.iter().zip(mono.iter()) {
            if exp > 0 {
                term = term.mul(
                    slot.pow(exp as u64, &field, non_residue),
                    &field,
                    non_residue,
                );
            }
        }
        acc = acc.add(term, &field);
    }
    acc
}
