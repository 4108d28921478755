//! Surface models: the projective plane and the Hirzebruch surfaces,
//! with their line bundle classes, monomial section bases, intersection
//! theory, cohomology tables and distinguished rational curves.
//!
//! Sections are modeled by lattice monomials in the homogeneous
//! coordinate ring: three variables x, y, z for the plane, four
//! bigraded variables x0, x1, y0, y1 for a ruled surface F_e (x_i over
//! the base line, y_j along the fibers, with y1 absorbing the twist e).
//! Monomial bases are sorted in descending lexicographic order on the
//! exponent tuple, fixed once so that every matrix in the crate is
//! reproducible bit for bit.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::binforms;
use crate::error::Error;
use crate::field::PrimeField;
use crate::matrix::Matrix;

/// Exponent tuple of a monomial. The plane uses the first three slots,
/// ruled surfaces all four (x0, x1, y0, y1), the line the first two.
pub type Mono = [u16; 4];

pub fn mono_add(a: Mono, b: Mono) -> Mono {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]
}

/// Descending lexicographic comparison used for every basis.
fn mono_cmp_desc(a: &Mono, b: &Mono) -> std::cmp::Ordering {
    b.cmp(a)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SurfaceKind {
    ProjectivePlane,
    Hirzebruch { e: u32 },
}

/// A surface together with its Picard lattice conventions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceModel {
    pub kind: SurfaceKind,
}

/// A line bundle class on one of the two surface kinds: degree d on the
/// plane, a*C0 + b*f on a ruled surface (C0 the section with C0^2 = -e,
/// f the fiber).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BundleClass {
    Plane { d: i64 },
    Ruled { a: i64, b: i64 },
}

// add/sub return Result because classes from different surface kinds
// cannot be combined, so the std operator traits do not fit.
#[allow(clippy::should_implement_trait)]
impl BundleClass {
    pub fn plane(d: i64) -> Self {
        BundleClass::Plane { d }
    }

    pub fn ruled(a: i64, b: i64) -> Self {
        BundleClass::Ruled { a, b }
    }

    pub fn add(self, other: BundleClass) -> Result<BundleClass, Error> {
        match (self, other) {
            (BundleClass::Plane { d: d1 }, BundleClass::Plane { d: d2 }) => {
                Ok(BundleClass::Plane { d: d1 + d2 })
            }
            (BundleClass::Ruled { a: a1, b: b1 }, BundleClass::Ruled { a: a2, b: b2 }) => {
                Ok(BundleClass::Ruled {
                    a: a1 + a2,
                    b: b1 + b2,
                })
            }
            _ => Err(Error::ClassModelMismatch),
        }
    }

    pub fn sub(self, other: BundleClass) -> Result<BundleClass, Error> {
        self.add(other.scale(-1))
    }

    pub fn scale(self, n: i64) -> BundleClass {
        match self {
            BundleClass::Plane { d } => BundleClass::Plane { d: n * d },
            BundleClass::Ruled { a, b } => BundleClass::Ruled { a: n * a, b: n * b },
        }
    }
}

impl std::fmt::Display for BundleClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BundleClass::Plane { d } => write!(f, "O({d})"),
            BundleClass::Ruled { a, b } => write!(f, "{a}C0+{b}f"),
        }
    }
}

type BasisKey = (SurfaceKind, i64, i64);

fn basis_cache() -> &'static Mutex<HashMap<BasisKey, Arc<Vec<Mono>>>> {
    static CACHE: OnceLock<Mutex<HashMap<BasisKey, Arc<Vec<Mono>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl SurfaceModel {
    pub fn plane() -> Self {
        SurfaceModel {
            kind: SurfaceKind::ProjectivePlane,
        }
    }

    pub fn hirzebruch(e: u32) -> Self {
        SurfaceModel {
            kind: SurfaceKind::Hirzebruch { e },
        }
    }

    /// Parse a model spec string: `p2:d=4` or `hirzebruch:e=1,a=2,b=3`.
    /// Returns the model together with the polarizing class.
    pub fn parse_spec(spec: &str) -> Result<(SurfaceModel, BundleClass), Error> {
        let err = || Error::Parse {
            what: "model spec",
            input: spec.to_string(),
        };
        let (head, params) = spec.split_once(':').ok_or_else(err)?;
        let mut kv = HashMap::new();
        for part in params.split(',') {
            let (k, v) = part.split_once('=').ok_or_else(err)?;
            let v: i64 = v.trim().parse().map_err(|_| err())?;
            kv.insert(k.trim().to_string(), v);
        }
        match head.trim() {
            "p2" => {
                let d = *kv.get("d").ok_or_else(err)?;
                Ok((SurfaceModel::plane(), BundleClass::plane(d)))
            }
            "hirzebruch" | "fe" => {
                let e = *kv.get("e").ok_or_else(err)?;
                if e < 0 {
                    return Err(err());
                }
                let a = *kv.get("a").ok_or_else(err)?;
                let b = *kv.get("b").ok_or_else(err)?;
                Ok((SurfaceModel::hirzebruch(e as u32), BundleClass::ruled(a, b)))
            }
            _ => Err(err()),
        }
    }

    pub fn spec_string(&self, class: BundleClass) -> String {
        match (self.kind, class) {
            (SurfaceKind::ProjectivePlane, BundleClass::Plane { d }) => format!("p2:d={d}"),
            (SurfaceKind::Hirzebruch { e }, BundleClass::Ruled { a, b }) => {
                format!("hirzebruch:e={e},a={a},b={b}")
            }
            _ => "invalid".to_string(),
        }
    }

    fn check_class(&self, class: BundleClass) -> Result<(), Error> {
        match (self.kind, class) {
            (SurfaceKind::ProjectivePlane, BundleClass::Plane { .. }) => Ok(()),
            (SurfaceKind::Hirzebruch { .. }, BundleClass::Ruled { .. }) => Ok(()),
            _ => Err(Error::ClassModelMismatch),
        }
    }

    pub fn zero_class(&self) -> BundleClass {
        match self.kind {
            SurfaceKind::ProjectivePlane => BundleClass::plane(0),
            SurfaceKind::Hirzebruch { .. } => BundleClass::ruled(0, 0),
        }
    }

    pub fn canonical_class(&self) -> BundleClass {
        match self.kind {
            SurfaceKind::ProjectivePlane => BundleClass::plane(-3),
            SurfaceKind::Hirzebruch { e } => BundleClass::ruled(-2, -(e as i64) - 2),
        }
    }

    /// Intersection number of two classes.
    pub fn intersection(&self, c1: BundleClass, c2: BundleClass) -> Result<i64, Error> {
        self.check_class(c1)?;
        self.check_class(c2)?;
        Ok(match (c1, c2) {
            (BundleClass::Plane { d: d1 }, BundleClass::Plane { d: d2 }) => d1 * d2,
            (BundleClass::Ruled { a: a1, b: b1 }, BundleClass::Ruled { a: a2, b: b2 }) => {
                let e = match self.kind {
                    SurfaceKind::Hirzebruch { e } => e as i64,
                    _ => unreachable!(),
                };
                -e * a1 * a2 + a1 * b2 + a2 * b1
            }
            _ => unreachable!(),
        })
    }

    /// Standard toric very-ampleness criterion.
    pub fn is_very_ample(&self, class: BundleClass) -> Result<bool, Error> {
        self.check_class(class)?;
        Ok(match (self.kind, class) {
            (SurfaceKind::ProjectivePlane, BundleClass::Plane { d }) => d >= 1,
            (SurfaceKind::Hirzebruch { e }, BundleClass::Ruled { a, b }) => {
                a >= 1 && b > a * e as i64
            }
            _ => unreachable!(),
        })
    }

    /// Number of global sections, by lattice count.
    pub fn h0(&self, class: BundleClass) -> Result<usize, Error> {
        self.check_class(class)?;
        Ok(match (self.kind, class) {
            (SurfaceKind::ProjectivePlane, BundleClass::Plane { d }) => {
                if d < 0 {
                    0
                } else {
                    ((d + 1) * (d + 2) / 2) as usize
                }
            }
            (SurfaceKind::Hirzebruch { e }, BundleClass::Ruled { a, b }) => {
                if a < 0 {
                    0
                } else {
                    (0..=a)
                        .map(|k| (b - e as i64 * k + 1).max(0) as usize)
                        .sum()
                }
            }
            _ => unreachable!(),
        })
    }

    /// Euler characteristic by Riemann-Roch on the surface.
    pub fn chi(&self, class: BundleClass) -> Result<i64, Error> {
        let k = self.canonical_class();
        let d_sq = self.intersection(class, class)?;
        let d_k = self.intersection(class, k)?;
        let twice = d_sq - d_k;
        assert!(twice % 2 == 0, "Riemann-Roch parity");
        Ok(1 + twice / 2)
    }

    /// (h0, h1, h2) of the class: h2 by duality against the canonical
    /// class, h1 from the Euler characteristic.
    pub fn cohomology_table(&self, class: BundleClass) -> Result<(usize, usize, usize), Error> {
        let h0 = self.h0(class)?;
        let h2 = self.h0(self.canonical_class().sub(class)?)?;
        let chi = self.chi(class)?;
        let h1 = h0 as i64 + h2 as i64 - chi;
        assert!(h1 >= 0, "negative h1 for {class}");
        Ok((h0, h1 as usize, h2))
    }

    /// Ordered monomial basis of the sections of the class; memoized.
    pub fn monomial_basis(&self, class: BundleClass) -> Result<Arc<Vec<Mono>>, Error> {
        self.check_class(class)?;
        let key: BasisKey = match (self.kind, class) {
            (kind, BundleClass::Plane { d }) => (kind, d, 0),
            (kind, BundleClass::Ruled { a, b }) => (kind, a, b),
        };
        if let Some(hit) = basis_cache().lock().unwrap().get(&key) {
            return Ok(Arc::clone(hit));
        }
        let mut monos: Vec<Mono> = Vec::new();
        match (self.kind, class) {
            (SurfaceKind::ProjectivePlane, BundleClass::Plane { d }) => {
                if d >= 0 {
                    let d = d as u16;
                    for i in (0..=d).rev() {
                        for j in (0..=d - i).rev() {
                            monos.push([i, j, d - i - j, 0]);
                        }
                    }
                }
            }
            (SurfaceKind::Hirzebruch { e }, BundleClass::Ruled { a, b }) => {
                if a >= 0 {
                    for d1 in 0..=a {
                        let s = b - e as i64 * d1;
                        if s < 0 {
                            continue;
                        }
                        let d0 = a - d1;
                        for c0 in 0..=s {
                            monos.push([c0 as u16, (s - c0) as u16, d0 as u16, d1 as u16]);
                        }
                    }
                    monos.sort_unstable_by(mono_cmp_desc);
                }
            }
            _ => unreachable!(),
        }
        let arc = Arc::new(monos);
        basis_cache().lock().unwrap().insert(key, Arc::clone(&arc));
        Ok(arc)
    }

    /// Matrix of the bilinear multiplication map
    /// sections(c1) (x) sections(c2) -> sections(c1 + c2), columns indexed
    /// c1-major. Each column carries a single 1.
    pub fn multiplication_map(&self, c1: BundleClass, c2: BundleClass) -> Result<Matrix, Error> {
        let field = PrimeField::default_field();
        self.multiplication_map_over(field, c1, c2)
    }

    pub fn multiplication_map_over(
        &self,
        field: PrimeField,
        c1: BundleClass,
        c2: BundleClass,
    ) -> Result<Matrix, Error> {
        let basis1 = self.monomial_basis(c1)?;
        let basis2 = self.monomial_basis(c2)?;
        let target = self.monomial_basis(c1.add(c2)?)?;
        let mut triplets = Vec::with_capacity(basis1.len() * basis2.len());
        for (i, &m1) in basis1.iter().enumerate() {
            for (j, &m2) in basis2.iter().enumerate() {
                let prod = mono_add(m1, m2);
                let row = target
                    .binary_search_by(|probe| mono_cmp_desc(probe, &prod))
                    .expect("product monomial lies in the target basis");
                triplets.push((row, i * basis2.len() + j, 1));
            }
        }
        Matrix::from_triplets(field, target.len(), basis1.len() * basis2.len(), triplets)
    }

    /// L . C for the given polarization and curve.
    pub fn curve_degree(&self, curve: &RationalCurve, class: BundleClass) -> Result<i64, Error> {
        self.intersection(class, curve.class(self)?)
    }

    /// Matrix of the restriction map sections(class) -> binary forms of
    /// degree class . C, obtained by substituting the parametrization of
    /// the curve. Columns follow the monomial basis; rows follow the
    /// descending binary form basis.
    pub fn restriction_matrix(
        &self,
        field: PrimeField,
        curve: &RationalCurve,
        class: BundleClass,
    ) -> Result<Matrix, Error> {
        curve.check_model(self)?;
        self.check_class(class)?;
        let basis = self.monomial_basis(class)?;
        let degree = self.curve_degree(curve, class)?;
        assert!(degree >= 0, "restriction degree must be nonnegative");
        let rows = degree as usize + 1;
        let mut triplets = Vec::new();
        match curve {
            RationalCurve::Conic => {
                // (x, y, z) = (u^2, uv, v^2): x^i y^j z^k -> u^(2i+j) v^(j+2k).
                for (col, &m) in basis.iter().enumerate() {
                    let v_exp = m[1] as usize + 2 * m[2] as usize;
                    triplets.push((v_exp, col, 1));
                }
            }
            RationalCurve::Section { g_low, g_high } => {
                // (y0, y1) = (g_low(u,v), -g_high(u,v)) over the base point (u : v).
                let max_y = basis.iter().map(|m| m[2].max(m[3])).max().unwrap_or(0) as usize;
                let mut pow_low = Vec::with_capacity(max_y + 1);
                let mut pow_high = Vec::with_capacity(max_y + 1);
                let neg_high = binforms::scale(&field, g_high, field.neg(1));
                for k in 0..=max_y {
                    pow_low.push(binforms::pow(&field, g_low, k));
                    pow_high.push(binforms::pow(&field, &neg_high, k));
                }
                for (col, &m) in basis.iter().enumerate() {
                    let prod =
                        binforms::mul(&field, &pow_low[m[2] as usize], &pow_high[m[3] as usize]);
                    for (idx, &coeff) in prod.iter().enumerate() {
                        if coeff != 0 {
                            // multiply by u^c0 v^c1: shifts the v-exponent by c1
                            triplets.push((idx + m[1] as usize, col, coeff));
                        }
                    }
                }
            }
        }
        Matrix::from_triplets(field, rows, basis.len(), triplets)
    }

    /// Restrict a single coefficient vector along the curve.
    pub fn restrict_form(
        &self,
        field: PrimeField,
        curve: &RationalCurve,
        class: BundleClass,
        coeffs: &[u64],
    ) -> Result<Vec<u64>, Error> {
        self.restriction_matrix(field, curve, class)?.apply(coeffs)
    }
}

/// The distinguished smooth rational curves used as restriction targets:
/// the fixed conic x z = y^2 on the plane, and a section-class curve
/// y0 g_high + y1 g_low = 0 on a ruled surface.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum RationalCurve {
    Conic,
    Section {
        /// degree-1 binary form (coefficient of y1 in the defining section)
        g_low: Vec<u64>,
        /// degree-(e+1) binary form (coefficient of y0)
        g_high: Vec<u64>,
    },
}

impl RationalCurve {
    pub fn conic() -> Self {
        RationalCurve::Conic
    }

    /// A seeded member of |C0 + (e+1)f|, resampled until the two defining
    /// forms share no root so the curve is an irreducible section.
    pub fn section(model: &SurfaceModel, field: PrimeField, seed: u64) -> Result<Self, Error> {
        let e = match model.kind {
            SurfaceKind::Hirzebruch { e } => e as usize,
            _ => return Err(Error::CurveModelMismatch),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = field.prime();
        for _ in 0..100 {
            let g_low: Vec<u64> = (0..2).map(|_| rng.gen_range(0..p)).collect();
            let g_high: Vec<u64> = (0..=e + 1).map(|_| rng.gen_range(0..p)).collect();
            if binforms::is_zero(&g_low) || binforms::is_zero(&g_high) {
                continue;
            }
            if !binforms::share_root_with_linear(&field, &g_low, &g_high) {
                return Ok(RationalCurve::Section { g_low, g_high });
            }
        }
        Err(Error::RankDeficiency { retries: 100 })
    }

    pub fn check_model(&self, model: &SurfaceModel) -> Result<(), Error> {
        match (self, model.kind) {
            (RationalCurve::Conic, SurfaceKind::ProjectivePlane) => Ok(()),
            (RationalCurve::Section { .. }, SurfaceKind::Hirzebruch { .. }) => Ok(()),
            _ => Err(Error::CurveModelMismatch),
        }
    }

    /// Divisor class of the curve.
    pub fn class(&self, model: &SurfaceModel) -> Result<BundleClass, Error> {
        self.check_model(model)?;
        Ok(match (self, model.kind) {
            (RationalCurve::Conic, _) => BundleClass::plane(2),
            (RationalCurve::Section { .. }, SurfaceKind::Hirzebruch { e }) => {
                BundleClass::ruled(1, e as i64 + 1)
            }
            _ => unreachable!(),
        })
    }

    /// Self-intersection number m = C^2.
    pub fn self_intersection(&self, model: &SurfaceModel) -> Result<i64, Error> {
        let class = self.class(model)?;
        model.intersection(class, class)
    }

    /// Coefficient vector of the defining section inside the monomial
    /// basis of the curve class (used by tests and campaigns).
    pub fn defining_section(
        &self,
        model: &SurfaceModel,
        field: PrimeField,
    ) -> Result<Vec<u64>, Error> {
        let class = self.class(model)?;
        let basis = model.monomial_basis(class)?;
        let mut coeffs = vec![0u64; basis.len()];
        let mut set = |mono: Mono, value: u64| {
            let idx = basis
                .binary_search_by(|probe| mono_cmp_desc(probe, &mono))
                .expect("defining monomial in basis");
            coeffs[idx] = value;
        };
        match self {
            RationalCurve::Conic => {
                set([1, 0, 1, 0], 1);
                set([0, 2, 0, 0], field.neg(1));
            }
            RationalCurve::Section { g_low, g_high } => {
                let high_deg = binforms::degree(g_high);
                for (i, &c) in g_high.iter().enumerate() {
                    if c != 0 {
                        set([(high_deg - i) as u16, i as u16, 1, 0], c);
                    }
                }
                for (i, &c) in g_low.iter().enumerate() {
                    if c != 0 {
                        set([(1 - i) as u16, i as u16, 0, 1], c);
                    }
                }
            }
        }
        Ok(coeffs)
    }
}

/// Monomial bases of all powers 0..=max of a fixed class, with product
/// lookup. Shared by the graded module builders for surfaces and for the
/// line rig used in oracle tests.
#[derive(Clone, Debug)]
pub struct MonomialTower {
    pieces: Vec<Arc<Vec<Mono>>>,
    label: String,
}

impl MonomialTower {
    pub fn surface(
        model: &SurfaceModel,
        class: BundleClass,
        max_power: usize,
    ) -> Result<Self, Error> {
        let mut pieces = Vec::with_capacity(max_power + 1);
        for j in 0..=max_power {
            pieces.push(model.monomial_basis(class.scale(j as i64))?);
        }
        Ok(MonomialTower {
            pieces,
            label: model.spec_string(class),
        })
    }

    /// Tower for the line: pieces are binary forms of degree j*n.
    pub fn line(n: usize, max_power: usize) -> Self {
        let mut pieces = Vec::with_capacity(max_power + 1);
        for j in 0..=max_power {
            let deg = (j * n) as u16;
            let monos: Vec<Mono> = (0..=deg).map(|i| [deg - i, i, 0, 0]).collect();
            pieces.push(Arc::new(monos));
        }
        MonomialTower {
            pieces,
            label: format!("p1:n={n}"),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn max_power(&self) -> usize {
        self.pieces.len() - 1
    }

    pub fn piece(&self, j: usize) -> &[Mono] {
        &self.pieces[j]
    }

    pub fn piece_dim(&self, j: usize) -> usize {
        self.pieces[j].len()
    }

    /// Index of a monomial inside piece j.
    pub fn index_of(&self, j: usize, mono: Mono) -> Option<usize> {
        self.pieces[j]
            .binary_search_by(|probe| mono_cmp_desc(probe, &mono))
            .ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field() -> PrimeField {
        PrimeField::default_field()
    }

    #[test]
    fn plane_section_counts() {
        let p2 = SurfaceModel::plane();
        assert_eq!(p2.h0(BundleClass::plane(3)).unwrap(), 10);
        assert_eq!(p2.h0(BundleClass::plane(-1)).unwrap(), 0);
        assert_eq!(p2.h0(BundleClass::plane(0)).unwrap(), 1);
    }

    #[test]
    fn ruled_section_counts_match_enumeration() {
        // Independent oracle: enumerate lattice points with a different loop
        // than the basis builder, then compare against h0 and basis length.
        for e in 0..=3u32 {
            let fe = SurfaceModel::hirzebruch(e);
            for a in 0..=3i64 {
                for b in -2..=6i64 {
                    let class = BundleClass::ruled(a, b);
                    let mut count = 0usize;
                    for d1 in 0..=a.max(0) {
                        for c0 in 0..=b.max(0) {
                            for c1 in 0..=b.max(0) {
                                if d1 <= a && c0 + c1 + e as i64 * d1 == b {
                                    count += 1;
                                }
                            }
                        }
                    }
                    if a < 0 || b < 0 {
                        count = 0;
                    }
                    assert_eq!(fe.h0(class).unwrap(), count, "h0({class}) on F_{e}");
                    assert_eq!(fe.monomial_basis(class).unwrap().len(), count);
                }
            }
        }
        let f1 = SurfaceModel::hirzebruch(1);
        assert_eq!(f1.h0(BundleClass::ruled(2, 3)).unwrap(), 9);
    }

    #[test]
    fn cohomology_tables() {
        let p2 = SurfaceModel::plane();
        assert_eq!(
            p2.cohomology_table(BundleClass::plane(3)).unwrap(),
            (10, 0, 0)
        );
        assert_eq!(
            p2.cohomology_table(BundleClass::plane(-3)).unwrap(),
            (0, 0, 1)
        );
        let f1 = SurfaceModel::hirzebruch(1);
        assert_eq!(
            f1.cohomology_table(BundleClass::ruled(2, 3)).unwrap(),
            (9, 0, 0)
        );
        // chi equals h0 when the higher cohomology vanishes.
        assert_eq!(f1.chi(BundleClass::ruled(2, 3)).unwrap(), 9);
    }

    #[test]
    fn very_ample_powers_have_no_h1() {
        let cases = [
            (SurfaceModel::plane(), BundleClass::plane(3)),
            (SurfaceModel::hirzebruch(0), BundleClass::ruled(2, 2)),
            (SurfaceModel::hirzebruch(1), BundleClass::ruled(2, 3)),
            (SurfaceModel::hirzebruch(2), BundleClass::ruled(2, 5)),
        ];
        for (model, class) in cases {
            assert!(model.is_very_ample(class).unwrap());
            for j in 1..=8 {
                let (_, h1, _) = model.cohomology_table(class.scale(j)).unwrap();
                assert_eq!(h1, 0, "h1 of {class}^{j}");
            }
        }
    }

    #[test]
    fn intersection_form() {
        let p2 = SurfaceModel::plane();
        for d in 0..6 {
            assert_eq!(
                p2.intersection(BundleClass::plane(d), BundleClass::plane(2))
                    .unwrap(),
                2 * d
            );
        }
        for e in 0..4u32 {
            let fe = SurfaceModel::hirzebruch(e);
            let curve_class = BundleClass::ruled(1, e as i64 + 1);
            assert_eq!(
                fe.intersection(curve_class, curve_class).unwrap(),
                e as i64 + 2
            );
            for (a, b) in [(1, 3), (2, 3), (3, 7)] {
                assert_eq!(
                    fe.intersection(BundleClass::ruled(a, b), curve_class)
                        .unwrap(),
                    a + b
                );
            }
        }
    }

    #[test]
    fn very_ampleness_criterion() {
        let p2 = SurfaceModel::plane();
        assert!(p2.is_very_ample(BundleClass::plane(1)).unwrap());
        assert!(!p2.is_very_ample(BundleClass::plane(0)).unwrap());
        let f2 = SurfaceModel::hirzebruch(2);
        assert!(f2.is_very_ample(BundleClass::ruled(1, 3)).unwrap());
        assert!(!f2.is_very_ample(BundleClass::ruled(1, 2)).unwrap());
        assert!(!f2.is_very_ample(BundleClass::ruled(0, 5)).unwrap());
    }

    #[test]
    fn multiplication_surjectivity() {
        let p2 = SurfaceModel::plane();
        let m = p2
            .multiplication_map(BundleClass::plane(1), BundleClass::plane(1))
            .unwrap();
        assert_eq!(m.cokernel_dim(), 0);
        assert_eq!(m.rank(), 6);
        let f1 = SurfaceModel::hirzebruch(1);
        let m = f1
            .multiplication_map(BundleClass::ruled(1, 1), BundleClass::ruled(1, 2))
            .unwrap();
        assert_eq!(m.cokernel_dim(), 0);
    }

    #[test]
    fn conic_restriction_substitutes_parametrization() {
        let p2 = SurfaceModel::plane();
        let field = field();
        for d in 1..=4i64 {
            let class = BundleClass::plane(d);
            let basis = p2.monomial_basis(class).unwrap();
            // x^d is the first monomial in descending order.
            assert_eq!(basis[0], [d as u16, 0, 0, 0]);
            let mut coeffs = vec![0u64; basis.len()];
            coeffs[0] = 1;
            let restricted = p2
                .restrict_form(field, &RationalCurve::Conic, class, &coeffs)
                .unwrap();
            assert_eq!(restricted.len(), 2 * d as usize + 1);
            assert_eq!(restricted[0], 1);
            assert!(restricted[1..].iter().all(|&c| c == 0));
        }
    }

    #[test]
    fn defining_sections_restrict_to_zero() {
        let field = field();
        let p2 = SurfaceModel::plane();
        let conic = RationalCurve::Conic;
        let eq = conic.defining_section(&p2, field).unwrap();
        let restricted = p2
            .restrict_form(field, &conic, conic.class(&p2).unwrap(), &eq)
            .unwrap();
        assert!(restricted.iter().all(|&c| c == 0));

        for e in 0..=2u32 {
            let fe = SurfaceModel::hirzebruch(e);
            let curve = RationalCurve::section(&fe, field, 7).unwrap();
            let eq = curve.defining_section(&fe, field).unwrap();
            let restricted = fe
                .restrict_form(field, &curve, curve.class(&fe).unwrap(), &eq)
                .unwrap();
            assert!(restricted.iter().all(|&c| c == 0), "F_{e} section");
        }
    }

    #[test]
    fn restriction_rank_counts_sections_through_curve() {
        let field = field();
        let p2 = SurfaceModel::plane();
        for d in 1..=5i64 {
            let class = BundleClass::plane(d);
            let m = p2
                .restriction_matrix(field, &RationalCurve::Conic, class)
                .unwrap();
            let expected = p2.h0(class).unwrap() - p2.h0(BundleClass::plane(d - 2)).unwrap();
            assert_eq!(m.rank(), expected, "conic restriction rank at d={d}");
        }
        for e in 0..=2u32 {
            let fe = SurfaceModel::hirzebruch(e);
            let curve = RationalCurve::section(&fe, field, 11).unwrap();
            let curve_class = curve.class(&fe).unwrap();
            for (a, b) in [
                (1, e as i64 + 1),
                (2, 2 * e as i64 + 2),
                (2, 2 * e as i64 + 3),
            ] {
                let class = BundleClass::ruled(a, b);
                if fe.h0(class).unwrap() == 0 {
                    continue;
                }
                let m = fe.restriction_matrix(field, &curve, class).unwrap();
                let expected =
                    fe.h0(class).unwrap() - fe.h0(class.sub(curve_class).unwrap()).unwrap();
                assert_eq!(m.rank(), expected, "F_{e} restriction rank {class}");
            }
        }
    }

    #[test]
    fn towers_look_up_products() {
        let p2 = SurfaceModel::plane();
        let tower = MonomialTower::surface(&p2, BundleClass::plane(2), 3).unwrap();
        assert_eq!(tower.piece_dim(0), 1);
        assert_eq!(tower.piece_dim(1), 6);
        assert_eq!(tower.piece_dim(2), 15);
        assert_eq!(tower.piece_dim(3), 28);
        let m1 = tower.piece(1)[2];
        let m2 = tower.piece(1)[4];
        let idx = tower.index_of(2, mono_add(m1, m2)).unwrap();
        assert_eq!(tower.piece(2)[idx], mono_add(m1, m2));

        let line = MonomialTower::line(3, 2);
        assert_eq!(line.piece_dim(1), 4);
        assert_eq!(line.piece_dim(2), 7);
        assert_eq!(line.index_of(1, [3, 0, 0, 0]).unwrap(), 0);
    }

    #[test]
    fn multiplication_is_associative_on_vectors() {
        // (va * vb) * vc == va * (vb * vc) for random coefficient vectors,
        // checked through the multiplication matrices.
        let field = field();
        let cases: Vec<(SurfaceModel, BundleClass)> = vec![
            (SurfaceModel::plane(), BundleClass::plane(1)),
            (SurfaceModel::hirzebruch(1), BundleClass::ruled(1, 2)),
        ];
        for (model, class) in cases {
            let mul_vec = |ca: BundleClass, va: &[u64], cb: BundleClass, vb: &[u64]| {
                let m = model.multiplication_map_over(field, ca, cb).unwrap();
                let mut tensor = vec![0u64; va.len() * vb.len()];
                for (i, &x) in va.iter().enumerate() {
                    for (j, &y) in vb.iter().enumerate() {
                        tensor[i * vb.len() + j] = field.mul(x, y);
                    }
                }
                m.apply(&tensor).unwrap()
            };
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            let h = model.h0(class).unwrap();
            let va: Vec<u64> = (0..h).map(|_| rng.gen_range(0..field.prime())).collect();
            let vb: Vec<u64> = (0..h).map(|_| rng.gen_range(0..field.prime())).collect();
            let vc: Vec<u64> = (0..h).map(|_| rng.gen_range(0..field.prime())).collect();
            let ab = mul_vec(class, &va, class, &vb);
            let left = mul_vec(class.scale(2), &ab, class, &vc);
            let bc = mul_vec(class, &vb, class, &vc);
            let right = mul_vec(class, &va, class.scale(2), &bc);
            assert_eq!(left, right);
        }
    }
}
