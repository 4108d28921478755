//! Normality defects, Castelnuovo-Mumford regularity, ideal generator
//! degrees and Property N^S_p verdicts for a fixed subsystem.
//!
//! A [`ModuleWorkbench`] owns the section module E of a subsystem (full
//! and reduced), builds the coordinate ring pieces on demand, and shares
//! differential ranks between the operations. The coordinate ring R is a
//! domain, so quotienting by one nonzero element of V is always regular;
//! the strand of R is computed on that quotient. Once the pieces of R
//! saturate (R_k = E_k) and the remaining multiplications of E surject,
//! the two modules agree in every later degree and the strand values of
//! E are reused.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::koszul::{BettiEngine, BettiTable, GradedModule, ModuleKind};
use crate::matrix::{Echelon, EchelonInsert, RankAccumulator};
use crate::subsystems::{BasePointReport, Subsystem};

/// Verdict of a Property N^S_p scan over a finite degree window.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NspVerdict {
    pub holds_in_window: bool,
    pub p: usize,
    /// The scan covers 2 <= j <= window.
    pub window: usize,
    pub prime: u64,
    /// Nonzero cells (i, j, k_{i,j}) with i <= p and j >= 2.
    pub offenders: Vec<(usize, usize, usize)>,
    /// All computed cells i <= p, j <= window.
    pub table: BettiTable,
    /// k_{0,1}, which must equal the codimension.
    pub k01: usize,
    /// Number of regular-element reductions used for the computation.
    pub reductions: usize,
    pub base_point: Option<BasePointReport>,
}

/// Per-level ideal sheaf cohomology used by the regularity scan: the
/// values H^i(I(m - i)) for i = 1, 2, 3 at a candidate level m.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RegularityRow {
    pub level: usize,
    pub h1_ideal: usize,
    pub h2_ideal: usize,
    pub h3_ideal: usize,
}

/// Regularity bounds the report compares against.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RegularityBounds {
    /// codim + 2
    pub codim_plus_two: usize,
    /// max(structure sheaf regularity + 1, codim + 2)
    pub mixed: usize,
    /// degree of the embedded surface - ambient dimension + 3
    pub degree_bound: i64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RegularityReport {
    /// Smallest level at which all three cohomology groups vanish.
    pub regularity: Option<usize>,
    pub bound: usize,
    pub rows: Vec<RegularityRow>,
    pub structure_sheaf_regularity: usize,
    pub bounds: RegularityBounds,
}

/// Coordinate ring pieces: dimensions, and basis rows while they are
/// genuinely smaller than the ambient sections.
struct CoordinateRing {
    dims: Vec<usize>,
    /// Echelon basis rows of R_j in ambient coordinates; empty once the
    /// piece is aliased to the full section space.
    rows: Vec<Vec<Vec<u64>>>,
    /// First level from which R_k equals E_k for every k in the window.
    aliased_from: Option<usize>,
}

/// Everything the invariant computations need about one subsystem,
/// built once and shared.
pub struct ModuleWorkbench {
    pub sub: Subsystem,
    /// Pieces are available for 0..=max_degree.
    pub max_degree: usize,
    e_full: Arc<GradedModule>,
    e_engine: BettiEngine,
    pub e_reductions: usize,
    ring: RefCell<Option<CoordinateRing>>,
    r_strand: RefCell<BTreeMap<usize, usize>>,
}

impl ModuleWorkbench {
    /// Build the section module through degree `max_degree` and reduce it
    /// by as many seeded regular elements as the geometry allows.
    pub fn new(sub: &Subsystem, max_degree: usize) -> Result<Self, Error> {
        let e_full = Arc::new(GradedModule::section_module(sub, max_degree)?);
        let depth = GradedModule::natural_depth(sub.model.kind);
        let seed = sub.seed.unwrap_or(0) ^ sub.field.prime();
        let (reduced, achieved) = e_full.reduce_generic(depth, seed);
        Ok(ModuleWorkbench {
            sub: sub.clone(),
            max_degree,
            e_full,
            e_engine: BettiEngine::new(Arc::new(reduced)),
            e_reductions: achieved,
            ring: RefCell::new(None),
            r_strand: RefCell::new(BTreeMap::new()),
        })
    }

    pub fn section_module(&self) -> &Arc<GradedModule> {
        &self.e_full
    }

    /// k_{i,j} of the section module.
    pub fn betti_e(&self, i: usize, j: usize) -> Result<usize, Error> {
        self.e_engine.betti(i, j)
    }

    /// Scan Property N^S_p over 2 <= j <= window (window + 1 must be
    /// within the built degree range).
    pub fn nsp_verdict(&self, p: usize, window: usize) -> Result<NspVerdict, Error> {
        if window + 1 > self.max_degree {
            return Err(Error::WindowTooSmall {
                need: window + 1,
                got: self.max_degree,
            });
        }
        let mut cells = Vec::new();
        let mut offenders = Vec::new();
        for j in 0..=window {
            for i in 0..=p {
                let k = self.betti_e(i, j)?;
                cells.push((i, j, k));
                if j >= 2 && k != 0 {
                    offenders.push((i, j, k));
                }
            }
        }
        let k01 = self.betti_e(0, 1)?;
        let module = self.e_engine.module();
        let table = BettiTable {
            prime: self.sub.field.prime(),
            label: self.sub.model.spec_string(self.sub.class),
            kind: ModuleKind::SectionModule,
            codim: self.sub.codim,
            p_max: p,
            window,
            cells,
        };
        Ok(NspVerdict {
            holds_in_window: offenders.is_empty(),
            p,
            window,
            prime: self.sub.field.prime(),
            offenders,
            table,
            k01,
            reductions: module.reductions,
            base_point: None,
        })
    }

    fn ensure_ring(&self, upto: usize) -> Result<(), Error> {
        let needed = upto.min(self.max_degree);
        {
            let ring = self.ring.borrow();
            if let Some(r) = ring.as_ref() {
                if r.dims.len() > needed {
                    return Ok(());
                }
            }
        }
        let e = &self.e_full;
        let field = self.sub.field;
        let mut ring = self.ring.borrow_mut();
        if ring.is_none() {
            *ring = Some(CoordinateRing {
                dims: vec![1],
                rows: vec![vec![unit_vector(e.piece_dim(0), 0)]],
                aliased_from: None,
            });
        }
        let r = ring.as_mut().unwrap();
        while r.dims.len() <= needed {
            let j = r.dims.len();
            if let Some(from) = r.aliased_from {
                debug_assert!(j > from);
                r.dims.push(e.piece_dim(j));
                r.rows.push(Vec::new());
                continue;
            }
            let dim_e = e.piece_dim(j);
            let prev_rows = &r.rows[j - 1];
            let mut acc = RankAccumulator::new(field, dim_e);
            let mut scratch = vec![0u64; dim_e];
            'products: for s in 0..e.v_dim {
                for row in prev_rows {
                    scratch.iter_mut().for_each(|x| *x = 0);
                    e.apply_generator(j - 1, s, row, &mut scratch);
                    acc.insert(&mut scratch);
                    if acc.rank() == dim_e {
                        break 'products;
                    }
                }
            }
            let rows: Vec<Vec<u64>> = acc.pivot_rows().map(|r| r.to_vec()).collect();
            r.dims.push(acc.rank());
            let saturated = acc.rank() == dim_e;
            r.rows.push(rows);
            if saturated && self.later_multiplications_surject(j)? {
                r.aliased_from = Some(j);
            }
        }
        Ok(())
    }

    /// Whether every multiplication map of E from level `from` onward
    /// (within the window) surjects, i.e. k_{0,j} = 0 for j > from.
    fn later_multiplications_surject(&self, from: usize) -> Result<bool, Error> {
        for j in from + 1..self.max_degree {
            if self.betti_e(0, j)? != 0 {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Dimension of R_k, the degree-k piece of the coordinate ring.
    pub fn ring_dim(&self, k: usize) -> Result<usize, Error> {
        if k > self.max_degree {
            return Err(Error::WindowTooSmall {
                need: k,
                got: self.max_degree,
            });
        }
        self.ensure_ring(k)?;
        Ok(self.ring.borrow().as_ref().unwrap().dims[k])
    }

    /// k-normality defect: sections of the k-th power not reached by
    /// degree-k combinations of V.
    pub fn normality_defect(&self, k: usize) -> Result<usize, Error> {
        if k == 0 {
            return Ok(0);
        }
        Ok(self.e_full.piece_dim(k) - self.ring_dim(k)?)
    }

    /// Smallest level m such that the ideal sheaf cohomology H^i(I(m-i))
    /// vanishes for i = 1, 2, 3; by upward propagation every later level
    /// vanishes too, so this is the Castelnuovo-Mumford regularity of the
    /// embedded surface.
    pub fn regularity(&self, bound: usize) -> Result<RegularityReport, Error> {
        if bound < 2 {
            return Err(Error::WindowTooSmall {
                need: 2,
                got: bound,
            });
        }
        let model = &self.sub.model;
        let class = self.sub.class;
        let mut rows = Vec::new();
        let mut regularity = None;
        for m in 1..=bound {
            let h1 = self.normality_defect(m - 1)?;
            let h2 = model.cohomology_table(class.scale(m as i64 - 2))?.1;
            let h3 = model.cohomology_table(class.scale(m as i64 - 3))?.2;
            rows.push(RegularityRow {
                level: m,
                h1_ideal: h1,
                h2_ideal: h2,
                h3_ideal: h3,
            });
            if regularity.is_none() && h1 == 0 && h2 == 0 && h3 == 0 {
                regularity = Some(m);
            }
        }
        let sheaf_reg = structure_sheaf_regularity(&self.sub)?;
        let report = RegularityReport {
            regularity,
            bound,
            rows,
            structure_sheaf_regularity: sheaf_reg,
            bounds: RegularityBounds {
                codim_plus_two: self.sub.codim + 2,
                mixed: (sheaf_reg + 1).max(self.sub.codim + 2),
                degree_bound: model.intersection(class, class)? - (self.sub.dim() as i64 - 1) + 3,
            },
        };
        if regularity.is_none() {
            return Err(Error::NotFoundWithinBound { bound });
        }
        Ok(report)
    }

    /// k_{1,j} of the coordinate ring. Where the ring pieces around level
    /// j agree with the section module the strand values coincide and the
    /// section-module engine is reused; otherwise the strand is computed
    /// on the ring reduced by one regular element of V.
    pub fn betti_r1(&self, j: usize) -> Result<usize, Error> {
        if let Some(&hit) = self.r_strand.borrow().get(&j) {
            return Ok(hit);
        }
        if j + 1 > self.max_degree {
            return Err(Error::WindowTooSmall {
                need: j + 1,
                got: self.max_degree,
            });
        }
        self.ensure_ring(j + 1)?;
        let aligned = {
            let ring = self.ring.borrow();
            let r = ring.as_ref().unwrap();
            (j.saturating_sub(1)..=j + 1).all(|q| r.dims[q] == self.e_full.piece_dim(q))
        };
        let value = if aligned {
            self.betti_e(1, j)?
        } else {
            let module = self.reduced_ring_module(j + 1)?;
            let engine = BettiEngine::new(Arc::new(module));
            engine.betti(1, j)?
        };
        self.r_strand.borrow_mut().insert(j, value);
        Ok(value)
    }

    /// Degrees (with multiplicities) of a minimal generating set of the
    /// homogeneous ideal, as far as the window sees them: degree q
    /// generators are counted by k_{1,q-1} of the coordinate ring.
    pub fn ideal_generator_degrees(&self, window: usize) -> Result<BTreeMap<usize, usize>, Error> {
        if window < self.sub.codim + 3 {
            return Err(Error::WindowTooSmall {
                need: self.sub.codim + 3,
                got: window,
            });
        }
        let mut out = BTreeMap::new();
        for q in 2..=window {
            let k = self.betti_r1(q - 1)?;
            if k != 0 {
                out.insert(q, k);
            }
        }
        Ok(out)
    }

    /// The coordinate ring reduced by one generic element of V, built
    /// through piece `window`, in quotient coordinates.
    fn reduced_ring_module(&self, window: usize) -> Result<GradedModule, Error> {
        self.ensure_ring(window)?;
        let field = self.sub.field;
        let e = &self.e_full;
        let ring = self.ring.borrow();
        let r = ring.as_ref().unwrap();
        let r_rows = |q: usize| -> Vec<Vec<u64>> {
            if r.rows[q].is_empty() && r.dims[q] == e.piece_dim(q) {
                (0..e.piece_dim(q))
                    .map(|i| unit_vector(e.piece_dim(q), i))
                    .collect()
            } else {
                r.rows[q].clone()
            }
        };
        let mut rng = ChaCha8Rng::seed_from_u64(
            self.sub.seed.unwrap_or(0) ^ field.prime() ^ 0x243f6a8885a308d3,
        );
        let ell: Vec<u64> = loop {
            let candidate: Vec<u64> = (0..e.v_dim)
                .map(|_| rng.gen_range(0..(1u64 << 30)) % field.prime())
                .collect();
            if candidate.iter().any(|&c| c != 0) {
                break candidate;
            }
        };
        let pivot = ell
            .iter()
            .position(|&c| c != 0)
            .expect("sampled element is nonzero");
        let kept: Vec<usize> = (0..e.v_dim).filter(|&s| s != pivot).collect();

        // Combined echelon per level: the image of multiplication by ell
        // first, then the lifts of the quotient basis.
        struct Level {
            echelon: Echelon,
            block: usize,
            lifts: Vec<Vec<u64>>,
        }
        let mut levels: Vec<Level> = Vec::with_capacity(window + 1);
        for q in 0..=window {
            let dim_e = e.piece_dim(q);
            let mut echelon = Echelon::new(field, dim_e);
            let mut block = 0usize;
            if q > 0 {
                let mut scratch = vec![0u64; dim_e];
                for row in r_rows(q - 1) {
                    scratch.iter_mut().for_each(|x| *x = 0);
                    e.apply_element(q - 1, &ell, &row, &mut scratch);
                    match echelon.insert(scratch.clone()) {
                        EchelonInsert::Independent(_) => block += 1,
                        EchelonInsert::Dependent(_) => {
                            return Err(Error::dim(format!(
                                "ring reduction element not injective at degree {}",
                                q - 1
                            )))
                        }
                    }
                }
            }
            let mut lifts = Vec::new();
            for row in r_rows(q) {
                if let EchelonInsert::Independent(_) = echelon.insert(row.clone()) {
                    lifts.push(row);
                }
            }
            levels.push(Level {
                echelon,
                block,
                lifts,
            });
        }

        let piece_dims: Vec<usize> = levels.iter().map(|l| l.lifts.len()).collect();
        let mut mult = Vec::with_capacity(window);
        for q in 0..window {
            let dim_q = piece_dims[q];
            let next = &levels[q + 1];
            let mut table: Vec<Vec<(u32, u64)>> = vec![Vec::new(); kept.len() * dim_q];
            let mut scratch = vec![0u64; e.piece_dim(q + 1)];
            for (new_s, &old_s) in kept.iter().enumerate() {
                for (b, lift) in levels[q].lifts.iter().enumerate() {
                    scratch.iter_mut().for_each(|x| *x = 0);
                    e.apply_generator(q, old_s, lift, &mut scratch);
                    let coords = next
                        .echelon
                        .coordinates(&scratch)
                        .ok_or_else(|| Error::dim("ring product escaped the next ring piece"))?;
                    let entries: Vec<(u32, u64)> = coords[next.block..]
                        .iter()
                        .enumerate()
                        .filter_map(|(t, &c)| (c != 0).then_some((t as u32, c)))
                        .collect();
                    table[new_s * dim_q + b] = entries;
                }
            }
            mult.push(table);
        }

        Ok(GradedModule::from_parts(
            field,
            ModuleKind::CoordinateRing,
            kept.len(),
            self.sub.codim,
            format!("{} (coordinate ring)", e.label),
            piece_dims,
            1,
            mult,
        ))
    }
}

fn unit_vector(len: usize, pos: usize) -> Vec<u64> {
    let mut v = vec![0u64; len];
    v[pos] = 1;
    v
}

/// Regularity of the structure sheaf with respect to the polarization:
/// the smallest m >= 0 with h1(L^(m-1)) = 0 and h2(L^(m-2)) = 0.
pub fn structure_sheaf_regularity(sub: &Subsystem) -> Result<usize, Error> {
    let model = &sub.model;
    for m in 0..=16usize {
        let h1 = model.cohomology_table(sub.class.scale(m as i64 - 1))?.1;
        let h2 = model.cohomology_table(sub.class.scale(m as i64 - 2))?.2;
        if h1 == 0 && h2 == 0 {
            return Ok(m);
        }
    }
    Err(Error::NotFoundWithinBound { bound: 16 })
}
