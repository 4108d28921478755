//! Graded Betti numbers through Koszul homology.
//!
//! A module here is a finite window of graded pieces M_0..M_W with the
//! multiplication maps V (x) M_j -> M_{j+1} stored column-sparse. The
//! Betti number k_{i,j} is the homology dimension of
//!
//! ```text
//! wedge^{i+1} V (x) M_{j-1}  ->  wedge^i V (x) M_j  ->  wedge^{i-1} V (x) M_{j+1}
//! ```
//!
//! computed as kernel rank minus image rank of the two differentials.
//!
//! Pieces of the section module of a surface grow quadratically, which
//! would make the middle terms large. Because the section module of an
//! integral surface is a domain, multiplication by any nonzero element
//! of V is injective, and quotienting by such an element preserves every
//! k_{i,j} while shrinking the pieces to first differences. Two such
//! reductions leave pieces of bounded size (the degree of the surface),
//! so the strand computations stay small. Injectivity of each reduction
//! is verified degree by degree while the quotient is built, and the
//! unreduced path remains available as a fallback and as an oracle in
//! tests.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::field::PrimeField;
use crate::matrix::{Matrix, RankAccumulator};
use crate::models::{mono_add, MonomialTower, SurfaceKind};
use crate::subsystems::Subsystem;

/// Which graded module over Sym V is being resolved.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModuleKind {
    /// E = direct sum of the sections of all powers of the class.
    SectionModule,
    /// R = image of Sym V inside E (homogeneous coordinate ring).
    CoordinateRing,
}

/// Sparse multiplication table for V (x) M_j -> M_{j+1}: entry s*dim_j + b
/// lists the nonzero target coefficients of (v_s . basis_b).
type MultTable = Vec<Vec<(u32, u64)>>;

/// A finite window of a graded module over Sym V.
#[derive(Clone)]
pub struct GradedModule {
    pub field: PrimeField,
    pub kind: ModuleKind,
    pub v_dim: usize,
    /// Codimension of the defining subsystem (bookkeeping for reports).
    pub codim: usize,
    pub label: String,
    pub piece_dims: Vec<usize>,
    /// How many regular elements have been quotiented out.
    pub reductions: usize,
    mult: Vec<MultTable>,
}

impl GradedModule {
    /// Largest piece index available.
    pub fn window(&self) -> usize {
        self.piece_dims.len() - 1
    }

    pub fn piece_dim(&self, j: usize) -> usize {
        self.piece_dims[j]
    }

    /// The section module of a subsystem, pieces 0..=window.
    pub fn section_module(sub: &Subsystem, window: usize) -> Result<Self, Error> {
        let tower = MonomialTower::surface(&sub.model, sub.class, window)?;
        let v_rows: Vec<Vec<u64>> = (0..sub.dim()).map(|i| sub.basis_row(i)).collect();
        Self::from_tower(
            sub.field,
            &tower,
            &v_rows,
            window,
            sub.codim,
            ModuleKind::SectionModule,
        )
    }

    /// Section module of a subsystem of the degree-n forms on the line:
    /// pieces are the full spaces of degree j*n forms. For a complete
    /// subsystem this is also the coordinate ring of the rational normal
    /// curve, since complete multiplication maps on the line surject.
    pub fn line_section_module(
        field: PrimeField,
        n: usize,
        basis: &Matrix,
        window: usize,
    ) -> Result<Self, Error> {
        if basis.cols() != n + 1 {
            return Err(Error::dim(format!(
                "line subsystem basis has {} columns, expected {}",
                basis.cols(),
                n + 1
            )));
        }
        let tower = MonomialTower::line(n, window);
        let v_rows: Vec<Vec<u64>> = (0..basis.rows()).map(|i| basis.row(i)).collect();
        let codim = n + 1 - basis.rows();
        Self::from_tower(
            field,
            &tower,
            &v_rows,
            window,
            codim,
            ModuleKind::SectionModule,
        )
    }

    /// Assemble multiplication tables over a monomial tower for generators
    /// given as coefficient rows over piece 1.
    fn from_tower(
        field: PrimeField,
        tower: &MonomialTower,
        v_rows: &[Vec<u64>],
        window: usize,
        codim: usize,
        kind: ModuleKind,
    ) -> Result<Self, Error> {
        let piece_dims: Vec<usize> = (0..=window).map(|j| tower.piece_dim(j)).collect();
        let mut mult = Vec::with_capacity(window);
        #[allow(clippy::needless_range_loop)]
        for j in 0..window {
            let dim_j = piece_dims[j];
            let mut table: MultTable = vec![Vec::new(); v_rows.len() * dim_j];
            for (s, row) in v_rows.iter().enumerate() {
                for b in 0..dim_j {
                    let mono_b = tower.piece(j)[b];
                    let mut entries: Vec<(u32, u64)> = Vec::new();
                    for (c, &coeff) in row.iter().enumerate() {
                        if coeff == 0 {
                            continue;
                        }
                        let prod = mono_add(tower.piece(1)[c], mono_b);
                        let tgt = tower
                            .index_of(j + 1, prod)
                            .expect("graded product stays within the tower");
                        entries.push((tgt as u32, coeff));
                    }
                    entries.sort_unstable_by_key(|&(t, _)| t);
                    // merge duplicates (distinct monomials of v can share a product)
                    let mut merged: Vec<(u32, u64)> = Vec::new();
                    for (t, c) in entries {
                        match merged.last_mut() {
                            Some(last) if last.0 == t => last.1 = field.add(last.1, c),
                            _ => merged.push((t, c)),
                        }
                    }
                    merged.retain(|&(_, c)| c != 0);
                    table[s * dim_j + b] = merged;
                }
            }
            mult.push(table);
        }
        Ok(GradedModule {
            field,
            kind,
            v_dim: v_rows.len(),
            codim,
            label: tower.label().to_string(),
            piece_dims,
            reductions: 0,
            mult,
        })
    }

    /// Assemble a module from explicitly constructed parts.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_parts(
        field: PrimeField,
        kind: ModuleKind,
        v_dim: usize,
        codim: usize,
        label: String,
        piece_dims: Vec<usize>,
        reductions: usize,
        mult: Vec<MultTable>,
    ) -> Self {
        GradedModule {
            field,
            kind,
            v_dim,
            codim,
            label,
            piece_dims,
            reductions,
            mult,
        }
    }

    /// Multiply the generator with index `s` into a dense piece-j vector,
    /// writing into `out` (length dim_{j+1}, zeroed by the caller).
    pub(crate) fn apply_generator(&self, j: usize, s: usize, vec: &[u64], out: &mut [u64]) {
        let f = &self.field;
        let dim_j = self.piece_dims[j];
        for (b, &coeff) in vec.iter().enumerate() {
            if coeff == 0 {
                continue;
            }
            for &(tgt, c) in &self.mult[j][s * dim_j + b] {
                let slot = &mut out[tgt as usize];
                *slot = f.add(*slot, f.mul(coeff, c));
            }
        }
    }

    /// Multiply an element of V (coordinates `ell` over the generators)
    /// into a dense piece-j vector.
    pub(crate) fn apply_element(&self, j: usize, ell: &[u64], vec: &[u64], out: &mut [u64]) {
        let f = &self.field;
        let dim_j = self.piece_dims[j];
        for (b, &coeff) in vec.iter().enumerate() {
            if coeff == 0 {
                continue;
            }
            for (s, &es) in ell.iter().enumerate() {
                if es == 0 {
                    continue;
                }
                let scale = f.mul(coeff, es);
                for &(tgt, c) in &self.mult[j][s * dim_j + b] {
                    let slot = &mut out[tgt as usize];
                    *slot = f.add(*slot, f.mul(scale, c));
                }
            }
        }
    }

    /// Quotient by a degree-one element ell (coordinates over the
    /// generators). Fails unless multiplication by ell is injective on
    /// every piece in the window, which certifies that ell is regular as
    /// far as this window can see; the Betti numbers of the quotient over
    /// Sym(V/ell) then agree with those of this module in the window.
    pub fn reduce_by(&self, ell: &[u64]) -> Result<GradedModule, Error> {
        assert_eq!(ell.len(), self.v_dim);
        let window = self.window();
        let pivot = ell
            .iter()
            .position(|&c| c != 0)
            .ok_or_else(|| Error::dim("reduction by the zero element"))?;
        if self.v_dim < 2 {
            return Err(Error::dim("cannot reduce a single-generator module"));
        }

        // Quotient maps piece by piece: pivot basis of ell . M_{j-1} plus
        // the complementary coordinate positions.
        struct Quotient {
            acc: RankAccumulator,
            complement: Vec<usize>,
        }
        let mut quotients: Vec<Quotient> = Vec::with_capacity(window + 1);
        quotients.push(Quotient {
            acc: RankAccumulator::new(self.field, self.piece_dims[0]),
            complement: (0..self.piece_dims[0]).collect(),
        });
        for j in 1..=window {
            let dim_j = self.piece_dims[j];
            let dim_prev = self.piece_dims[j - 1];
            let mut acc = RankAccumulator::new(self.field, dim_j);
            let mut scratch = vec![0u64; dim_j];
            let mut unit = vec![0u64; dim_prev];
            for b in 0..dim_prev {
                unit.iter_mut().for_each(|x| *x = 0);
                unit[b] = 1;
                scratch.iter_mut().for_each(|x| *x = 0);
                self.apply_element(j - 1, ell, &unit, &mut scratch);
                if !acc.insert(&mut scratch) {
                    return Err(Error::dim(format!(
                        "multiplication by the chosen element is not injective on piece {}",
                        j - 1
                    )));
                }
            }
            let pivot_set: std::collections::BTreeSet<usize> =
                acc.pivot_positions().iter().copied().collect();
            let complement: Vec<usize> =
                (0..dim_j).filter(|pos| !pivot_set.contains(pos)).collect();
            quotients.push(Quotient { acc, complement });
        }

        let piece_dims: Vec<usize> = quotients.iter().map(|q| q.complement.len()).collect();
        let kept: Vec<usize> = (0..self.v_dim).filter(|&s| s != pivot).collect();

        let mut mult: Vec<MultTable> = Vec::with_capacity(window);
        for j in 0..window {
            let dim_j = piece_dims[j];
            let dim_next_old = self.piece_dims[j + 1];
            let q_next = &quotients[j + 1];
            let mut table: MultTable = vec![Vec::new(); kept.len() * dim_j];
            let mut scratch = vec![0u64; dim_next_old];
            for (new_s, &old_s) in kept.iter().enumerate() {
                for (new_b, &old_pos) in quotients[j].complement.iter().enumerate() {
                    scratch.iter_mut().for_each(|x| *x = 0);
                    for &(tgt, c) in &self.mult[j][old_s * self.piece_dims[j] + old_pos] {
                        scratch[tgt as usize] = c;
                    }
                    q_next.acc.reduce_only(&mut scratch);
                    let p = self.field.prime();
                    let entries: Vec<(u32, u64)> = q_next
                        .complement
                        .iter()
                        .enumerate()
                        .filter_map(|(new_t, &pos)| {
                            let v = scratch[pos] % p;
                            (v != 0).then_some((new_t as u32, v))
                        })
                        .collect();
                    table[new_s * dim_j + new_b] = entries;
                }
            }
            mult.push(table);
        }

        Ok(GradedModule {
            field: self.field,
            kind: self.kind,
            v_dim: kept.len(),
            codim: self.codim,
            label: self.label.clone(),
            piece_dims,
            reductions: self.reductions + 1,
            mult,
        })
    }

    /// Quotient by up to `depth` seeded generic degree-one elements,
    /// resampling when an injectivity check fails. Returns the reduced
    /// module and the number of reductions achieved.
    pub fn reduce_generic(&self, depth: usize, seed: u64) -> (GradedModule, usize) {
        let mut current = self.clone();
        let mut achieved = 0;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x517cc1b727220a95);
        'stage: for _ in 0..depth {
            if current.v_dim < 2 {
                break;
            }
            for _attempt in 0..8 {
                let ell: Vec<u64> = (0..current.v_dim)
                    .map(|_| rng.gen_range(0..(1u64 << 30)) % self.field.prime())
                    .collect();
                if ell.iter().all(|&c| c == 0) {
                    continue;
                }
                if let Ok(next) = current.reduce_by(&ell) {
                    current = next;
                    achieved += 1;
                    continue 'stage;
                }
            }
            break;
        }
        (current, achieved)
    }

    /// Geometric reduction depth for a subsystem module: the dimension of
    /// the variety (2 for the surfaces handled here).
    pub fn natural_depth(kind: SurfaceKind) -> usize {
        match kind {
            SurfaceKind::ProjectivePlane | SurfaceKind::Hirzebruch { .. } => 2,
        }
    }
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// Lexicographic rank of a sorted k-subset of 0..n.
fn subset_rank(subset: &[usize], n: usize) -> usize {
    let k = subset.len();
    let mut rank = 0usize;
    let mut prev: i64 = -1;
    for (idx, &s) in subset.iter().enumerate() {
        for skipped in (prev + 1) as usize..s {
            rank += binomial(n - skipped - 1, k - idx - 1);
        }
        prev = s as i64;
    }
    rank
}

/// Iterate sorted k-subsets of 0..n in lexicographic order; the visitor
/// returns false to stop early.
fn for_each_subset(n: usize, k: usize, mut visit: impl FnMut(&[usize]) -> bool) {
    if k > n {
        return;
    }
    let mut subset: Vec<usize> = (0..k).collect();
    loop {
        if !visit(&subset) {
            return;
        }
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if subset[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        subset[i] += 1;
        for j in i + 1..k {
            subset[j] = subset[j - 1] + 1;
        }
    }
}

/// Rank and homology computations over a fixed graded module, with the
/// differential ranks cached because adjacent Betti numbers share them.
pub struct BettiEngine {
    module: Arc<GradedModule>,
    ranks: RefCell<BTreeMap<(usize, usize), usize>>,
}

impl BettiEngine {
    pub fn new(module: Arc<GradedModule>) -> Self {
        BettiEngine {
            module,
            ranks: RefCell::new(BTreeMap::new()),
        }
    }

    pub fn module(&self) -> &GradedModule {
        &self.module
    }

    /// Rank of the Koszul differential
    /// wedge^i V (x) M_j -> wedge^(i-1) V (x) M_{j+1}.
    pub fn rank_differential(&self, i: usize, j: usize) -> usize {
        self.rank_differential_bounded(i, j, usize::MAX)
    }

    /// Same, with an early exit at a caller-guaranteed upper bound
    /// (exactness of the complex makes kernel dimensions valid bounds).
    fn rank_differential_bounded(&self, i: usize, j: usize, upper_bound: usize) -> usize {
        let m = &self.module;
        let v = m.v_dim;
        if i == 0 || i > v || j + 1 > m.window() {
            return 0;
        }
        if let Some(&hit) = self.ranks.borrow().get(&(i, j)) {
            return hit;
        }
        let dim_j = m.piece_dims[j];
        let dim_next = m.piece_dims[j + 1];
        let codomain = binomial(v, i - 1) * dim_next;
        let domain = binomial(v, i) * dim_j;
        let cap = upper_bound.min(codomain).min(domain);
        let mut acc = RankAccumulator::new(m.field, codomain);
        let mut scratch = vec![0u64; codomain];
        let p = m.field.prime();
        let mut entries: Vec<(u32, u64)> = Vec::new();
        let mut face: Vec<usize> = Vec::with_capacity(i - 1);
        for_each_subset(v, i, |subset| {
            for b in 0..dim_j {
                if acc.rank() >= cap {
                    return false;
                }
                entries.clear();
                for (r, &s) in subset.iter().enumerate() {
                    face.clear();
                    face.extend(subset.iter().filter(|&&x| x != s));
                    let face_rank = subset_rank(&face, v);
                    let negative = r % 2 == 1;
                    for &(tgt, c) in &m.mult[j][s * dim_j + b] {
                        let val = if negative { p - c } else { c };
                        entries.push(((face_rank * dim_next + tgt as usize) as u32, val));
                    }
                }
                acc.insert_sparse(&entries, &mut scratch);
            }
            true
        });
        let rank = acc.rank();
        self.ranks.borrow_mut().insert((i, j), rank);
        rank
    }

    /// The graded Betti number k_{i,j}: homology of the strand through
    /// wedge^i V (x) M_j.
    pub fn betti(&self, i: usize, j: usize) -> Result<usize, Error> {
        let m = &self.module;
        if j + 1 > m.window() {
            return Err(Error::WindowExceeded {
                need: j + 1,
                built: m.window(),
            });
        }
        let dim_mid = binomial(m.v_dim, i) * m.piece_dims[j];
        let r_out = self.rank_differential_bounded(i, j, usize::MAX);
        let kernel = dim_mid - r_out;
        let r_in = if j == 0 {
            0
        } else {
            self.rank_differential_bounded(i + 1, j - 1, kernel)
        };
        Ok(kernel - r_in)
    }
}

/// One computed Betti table: values k_{i,j} for i <= p_max, j <= window.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BettiTable {
    pub prime: u64,
    pub label: String,
    pub kind: ModuleKind,
    pub codim: usize,
    pub p_max: usize,
    pub window: usize,
    /// (i, j, k_{i,j}) for every i <= p_max, j <= window, sorted.
    pub cells: Vec<(usize, usize, usize)>,
}

impl BettiTable {
    pub fn get(&self, i: usize, j: usize) -> Option<usize> {
        self.cells
            .iter()
            .find(|&&(ci, cj, _)| ci == i && cj == j)
            .map(|&(_, _, v)| v)
    }

    /// Text diagram, rows indexed by j and columns by i.
    pub fn diagram(&self) -> String {
        let mut out = String::new();
        out.push_str("    j\\i");
        for i in 0..=self.p_max {
            out.push_str(&format!("{i:>7}"));
        }
        out.push('\n');
        for j in 0..=self.window {
            out.push_str(&format!("{j:>7}"));
            for i in 0..=self.p_max {
                match self.get(i, j) {
                    Some(0) => out.push_str(&format!("{:>7}", ".")),
                    Some(v) => out.push_str(&format!("{v:>7}")),
                    None => out.push_str(&format!("{:>7}", "?")),
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Compute k_{i,j} for all i <= p_max, j <= window on the given module
/// (which must be built through window + 1).
pub fn betti_table(
    module: Arc<GradedModule>,
    p_max: usize,
    window: usize,
) -> Result<BettiTable, Error> {
    let engine = BettiEngine::new(Arc::clone(&module));
    let mut cells = Vec::new();
    for j in 0..=window {
        for i in 0..=p_max {
            cells.push((i, j, engine.betti(i, j)?));
        }
    }
    cells.sort_unstable();
    Ok(BettiTable {
        prime: module.field.prime(),
        label: module.label.clone(),
        kind: module.kind,
        codim: module.codim,
        p_max,
        window,
        cells,
    })
}
