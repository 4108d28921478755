//! Python bindings: the surface models, subsystems and the main
//! verification operations, mirroring the command-line surface.

// the pymethods macro inserts identity error conversions; the verdict
// tuple is part of the Python-facing signature
#![allow(clippy::useless_conversion, clippy::type_complexity)]

use std::collections::BTreeMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use nsp_core::bundles::{nsp_restriction_criterion, restricted_kernel_splitting};
use nsp_core::field::{PrimeField, DEFAULT_PRIME};
use nsp_core::harness::{run_campaign, verify_known_thresholds, CampaignKind};
use nsp_core::invariants::ModuleWorkbench;
use nsp_core::models::{BundleClass, RationalCurve, SurfaceKind, SurfaceModel};
use nsp_core::subsystems::{make_subsystem, SubsystemSpec};

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_field(prime: Option<u64>) -> PyResult<PrimeField> {
    PrimeField::new(prime.unwrap_or(DEFAULT_PRIME)).map_err(err)
}

/// A polarized surface: the projective plane with O(d), or a Hirzebruch
/// surface F_e with a*C0 + b*f.
#[pyclass]
#[derive(Clone)]
struct Surface {
    model: SurfaceModel,
    class: BundleClass,
}

#[pymethods]
impl Surface {
    /// Parse a spec string such as "p2:d=3" or "hirzebruch:e=1,a=2,b=3".
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        let (model, class) = SurfaceModel::parse_spec(spec).map_err(err)?;
        Ok(Surface { model, class })
    }

    fn spec(&self) -> String {
        self.model.spec_string(self.class)
    }

    /// Number of sections of the j-th power of the polarization.
    #[pyo3(signature = (power = 1))]
    fn h0(&self, power: i64) -> PyResult<usize> {
        self.model.h0(self.class.scale(power)).map_err(err)
    }

    /// (h0, h1, h2) of the j-th power.
    #[pyo3(signature = (power = 1))]
    fn cohomology(&self, power: i64) -> PyResult<(usize, usize, usize)> {
        self.model
            .cohomology_table(self.class.scale(power))
            .map_err(err)
    }

    fn is_very_ample(&self) -> PyResult<bool> {
        self.model.is_very_ample(self.class).map_err(err)
    }

    /// Self-intersection of the distinguished rational curve.
    fn curve_self_intersection(&self) -> PyResult<i64> {
        self.default_curve(1)?
            .self_intersection(&self.model)
            .map_err(err)
    }

    /// Intersection number of the polarization with the curve.
    fn curve_degree(&self) -> PyResult<i64> {
        let curve = self.default_curve(1)?;
        self.model.curve_degree(&curve, self.class).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Surface('{}')", self.spec())
    }
}

impl Surface {
    fn default_curve(&self, seed: u64) -> PyResult<RationalCurve> {
        match self.model.kind {
            SurfaceKind::ProjectivePlane => Ok(RationalCurve::Conic),
            SurfaceKind::Hirzebruch { .. } => {
                RationalCurve::section(&self.model, PrimeField::default_field(), seed).map_err(err)
            }
        }
    }
}

/// A subsystem of the sections of the polarization, with the verdict
/// operations attached.
#[pyclass]
struct Subsystem {
    inner: nsp_core::Subsystem,
    curve: RationalCurve,
}

#[pymethods]
impl Subsystem {
    /// Build from spec strings, e.g. Subsystem(Surface("p2:d=3"),
    /// "generic:t=2,seed=7"). Constrained specs use the surface's
    /// distinguished curve.
    #[new]
    #[pyo3(signature = (surface, spec = "complete", prime = None, curve_seed = 17))]
    fn new(surface: Surface, spec: &str, prime: Option<u64>, curve_seed: u64) -> PyResult<Self> {
        let field = parse_field(prime)?;
        let curve = match surface.model.kind {
            SurfaceKind::ProjectivePlane => RationalCurve::Conic,
            SurfaceKind::Hirzebruch { .. } => {
                RationalCurve::section(&surface.model, field, curve_seed).map_err(err)?
            }
        };
        let spec = SubsystemSpec::parse(spec, Some(&curve)).map_err(err)?;
        let inner = make_subsystem(&surface.model, surface.class, field, &spec).map_err(err)?;
        Ok(Subsystem { inner, curve })
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn codim(&self) -> usize {
        self.inner.codim
    }

    fn ambient_dim(&self) -> usize {
        self.inner.ambient_dim()
    }

    /// (image codimension on the curve, sections of V vanishing on it).
    fn restriction_codim(&self) -> PyResult<(usize, usize)> {
        self.inner.restriction_image_codim(&self.curve).map_err(err)
    }

    /// Twists of the kernel bundle restricted to the curve, ascending.
    fn splitting_type(&self) -> PyResult<Vec<u64>> {
        Ok(restricted_kernel_splitting(&self.inner, &self.curve)
            .map_err(err)?
            .twists)
    }

    /// The sufficient criterion for Property N^S_p through the curve.
    #[pyo3(signature = (p = 1))]
    fn curve_criterion(&self, p: usize) -> PyResult<bool> {
        nsp_restriction_criterion(&self.inner, &self.curve, p).map_err(err)
    }

    /// Property N^S_p scan: (holds, offenders, k01).
    #[pyo3(signature = (p = 1, window = None))]
    fn check_nsp(
        &self,
        p: usize,
        window: Option<usize>,
    ) -> PyResult<(bool, Vec<(usize, usize, usize)>, usize)> {
        let window = window.unwrap_or(self.inner.codim + 4);
        let wb = ModuleWorkbench::new(&self.inner, window + 1).map_err(err)?;
        let verdict = wb.nsp_verdict(p, window).map_err(err)?;
        Ok((verdict.holds_in_window, verdict.offenders, verdict.k01))
    }

    /// k-normality defect.
    fn normality_defect(&self, k: usize) -> PyResult<usize> {
        let wb = ModuleWorkbench::new(&self.inner, k.max(2)).map_err(err)?;
        wb.normality_defect(k).map_err(err)
    }

    /// Smallest regular level within the bound, or None.
    #[pyo3(signature = (bound = 8))]
    fn regularity(&self, bound: usize) -> PyResult<Option<usize>> {
        let wb = ModuleWorkbench::new(&self.inner, bound).map_err(err)?;
        match wb.regularity(bound) {
            Ok(report) => Ok(report.regularity),
            Err(nsp_core::Error::NotFoundWithinBound { .. }) => Ok(None),
            Err(e) => Err(err(e)),
        }
    }

    /// Degrees of minimal ideal generators within the window, with
    /// multiplicities.
    #[pyo3(signature = (window = None))]
    fn ideal_generator_degrees(&self, window: Option<usize>) -> PyResult<BTreeMap<usize, usize>> {
        let window = window.unwrap_or(self.inner.codim + 4);
        let wb = ModuleWorkbench::new(&self.inner, window + 1).map_err(err)?;
        wb.ideal_generator_degrees(window).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Subsystem('{}', codim={}, dim={})",
            self.inner.label,
            self.inner.codim,
            self.inner.dim()
        )
    }
}

/// Check the built-in exact threshold fixtures; returns the report as a
/// JSON string.
#[pyfunction]
#[pyo3(signature = (p_cap = 1, window = 4, prime = None))]
fn thresholds(p_cap: usize, window: usize, prime: Option<u64>) -> PyResult<String> {
    let field = parse_field(prime)?;
    let report = verify_known_thresholds(field, p_cap, window).map_err(err)?;
    serde_json::to_string_pretty(&report).map_err(err)
}

/// Run a small verification campaign; returns the summary as JSON.
#[pyfunction]
#[pyo3(signature = (model, kind = "restriction", trials = 5, seed = 1, codim_min = 1, codim_max = 3))]
fn campaign(
    model: &str,
    kind: &str,
    trials: usize,
    seed: u64,
    codim_min: usize,
    codim_max: usize,
) -> PyResult<String> {
    let (model, class) = SurfaceModel::parse_spec(model).map_err(err)?;
    let kind = match kind {
        "restriction" => CampaignKind::Restriction,
        "generic-boundary" => CampaignKind::GenericBoundary,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown campaign kind {other}"
            )))
        }
    };
    let mut campaign = nsp_core::harness::Campaign::new(kind, model, class);
    campaign.trials = trials;
    campaign.master_seed = seed;
    campaign.codim_range = (codim_min, codim_max);
    let summary = run_campaign(&campaign).map_err(err)?;
    serde_json::to_string_pretty(&summary).map_err(err)
}

#[pymodule]
fn nsp(_py: Python<'_>, m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Surface>()?;
    m.add_class::<Subsystem>()?;
    m.add_function(wrap_pyfunction!(thresholds, m)?)?;
    m.add_function(wrap_pyfunction!(campaign, m)?)?;
    m.add("DEFAULT_PRIME", DEFAULT_PRIME)?;
    Ok(())
}
