//! Python bindings: the inference engine, the belief-adjustment baselines,
//! model-comparison criteria, simulations and MAP fitting.

use std::collections::BTreeMap;
use std::sync::Arc;

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

use persuasion::baselines::{self, AdjustParams, StrengthMap};
use persuasion::inference::{self, CompiledModel, LogLikMatrix, ModelSpec, SearchConfig};
use persuasion::io::{self as pio, RunConfig};
use persuasion::rsa::{self, SpeakerParams};
use persuasion::simulation::{self, SweepConfig, SyntheticConfig};
use persuasion::world::{Goal, LengthGrid, StickSet, WorldPrior};
use persuasion::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        other => PyValueError::new_err(format!("[{}] {other}", other.kind())),
    }
}

fn goal(s: &str) -> PyResult<Goal> {
    match s.to_ascii_lowercase().as_str() {
        "longer" => Ok(Goal::Longer),
        "shorter" => Ok(Goal::Shorter),
        other => Err(PyValueError::new_err(format!("goal must be 'longer' or 'shorter', got {other:?}"))),
    }
}

type Belief = (f64, f64, f64);

fn belief(b: &rsa::BeliefState) -> Belief {
    (b.p_longer, b.p_shorter, b.p_tie)
}

/// Exact listener and speaker models over an enumerated stick prior.
///
/// Beliefs are returned as `(p_longer, p_shorter, p_tie)`.
#[pyclass(name = "StickContest", frozen)]
struct PyStickContest {
    inner: Arc<rsa::StickContest>,
}

#[pymethods]
impl PyStickContest {
    /// `values=None` uses the 1..9 experiment grid with midpoint 5.
    #[new]
    #[pyo3(signature = (values=None, midpoint=None, n=5))]
    fn new(values: Option<Vec<f64>>, midpoint: Option<f64>, n: u32) -> PyResult<Self> {
        let grid = match values {
            None => LengthGrid::experiment(),
            Some(v) => {
                let mid = midpoint.unwrap_or_else(|| 0.5 * (v[0] + v[v.len() - 1]));
                LengthGrid::new(v, mid).map_err(py_err)?
            }
        };
        let prior = WorldPrior::new(grid, n).map_err(py_err)?;
        Ok(Self {
            inner: Arc::new(rsa::StickContest::new(&prior).map_err(py_err)?),
        })
    }

    #[getter]
    fn grid(&self) -> Vec<f64> {
        self.inner.grid().values().to_vec()
    }

    #[getter]
    fn n_worlds(&self) -> usize {
        self.inner.table().len()
    }

    /// Prior `(p_longer, p_shorter, p_tie)`.
    #[getter]
    fn prior(&self) -> Belief {
        let p = self.inner.prior_marginals();
        (p.longer, p.shorter, p.tie)
    }

    fn literal_listener(&self, u: f64) -> PyResult<Belief> {
        self.inner.literal_listener(u).map(|b| belief(&b)).map_err(py_err)
    }

    fn pragmatic_listener(&self, u: f64, goal_: &str, beta: f64) -> PyResult<Belief> {
        let g = goal(goal_)?;
        self.inner.pragmatic_listener(u, g, beta).map(|b| belief(&b)).map_err(py_err)
    }

    fn level2_listener(&self, u: f64, goal_: &str, beta: f64, w_c: f64) -> PyResult<Belief> {
        let g = goal(goal_)?;
        self.inner.level2_listener(u, g, beta, w_c).map(|b| belief(&b)).map_err(py_err)
    }

    /// Joint listener over the world and the bias; returns the world belief
    /// and `E|beta|` under the default bias prior.
    fn joint_listener(&self, u: f64, goal_: &str) -> PyResult<(Belief, f64)> {
        let g = goal(goal_)?;
        let j = self
            .inner
            .joint_listener(u, g, self.inner.default_beta_prior())
            .map_err(py_err)?;
        Ok((belief(&j.world), j.expected_abs_beta()))
    }

    fn persuasive_utility(&self, u: f64, goal_: &str) -> PyResult<f64> {
        self.inner.persuasive_utility(u, goal(goal_)?).map_err(py_err)
    }

    fn effect_size(&self, u: f64, goal_: &str, beta: f64) -> PyResult<f64> {
        self.inner.effect_size(u, goal(goal_)?, beta).map_err(py_err)
    }

    /// Level-1 speaker distribution over the distinct lengths in `sticks`.
    fn speaker_choice_dist(&self, sticks: Vec<f64>, goal_: &str, beta: f64) -> PyResult<Vec<(f64, f64)>> {
        let w = StickSet::from_lengths(self.inner.grid(), &sticks).map_err(py_err)?;
        self.inner
            .speaker_choice_dist(&w, goal(goal_)?, &SpeakerParams::level1(beta))
            .map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "StickContest(grid={:?}, n={}, worlds={})",
            self.inner.grid().values(),
            self.inner.n(),
            self.inner.table().len()
        )
    }
}

#[pyfunction]
#[pyo3(signature = (u, growth_rate=1.0, center=5.0))]
fn evidence_strength(u: f64, growth_rate: f64, center: f64) -> PyResult<f64> {
    let map = StrengthMap::new(growth_rate, center).map_err(py_err)?;
    Ok(baselines::evidence_strength(u, &map))
}

/// One adding-rule update. `reference=None` is anchor-and-adjust (R = 0).
#[pyfunction]
#[pyo3(signature = (previous, strength, reference=None))]
fn adjust_update(previous: f64, strength: f64, reference: Option<f64>) -> PyResult<f64> {
    let p = reference.map_or_else(AdjustParams::aa, AdjustParams::mas);
    p.validate().map_err(py_err)?;
    Ok(baselines::adjust_update(previous, strength, &p))
}

fn matrix(rows: Vec<Vec<f64>>) -> PyResult<LogLikMatrix> {
    LogLikMatrix::from_rows(&rows).map_err(py_err)
}

/// WAIC of a samples x data log-likelihood matrix.
#[pyfunction]
fn waic(rows: Vec<Vec<f64>>) -> PyResult<BTreeMap<&'static str, f64>> {
    let w = inference::waic(&matrix(rows)?).map_err(py_err)?;
    Ok(BTreeMap::from([
        ("waic", w.waic),
        ("se", w.se),
        ("elpd", w.elpd),
        ("lppd", w.lppd),
        ("p_waic", w.p_waic),
    ]))
}

/// PSIS-LOO of a samples x data matrix; Pareto k is `None` where the tail was
/// too short to fit.
#[pyfunction]
fn psis_loo(py: Python<'_>, rows: Vec<Vec<f64>>) -> PyResult<Py<PyAny>> {
    let l = inference::psis_loo(&matrix(rows)?).map_err(py_err)?;
    let d = pyo3::types::PyDict::new(py);
    d.set_item("looic", l.looic)?;
    d.set_item("se", l.se)?;
    d.set_item("elpd", l.elpd)?;
    d.set_item("p_loo", l.p_loo)?;
    d.set_item("pareto_k", l.pareto_k)?;
    d.set_item("warnings", l.warnings)?;
    Ok(d.into_any().unbind())
}

/// Weak-evidence effect sizes; returns `(betas, evidence, effects)`.
#[pyfunction]
#[pyo3(signature = (betas=None))]
fn effect_heatmap(betas: Option<Vec<f64>>) -> PyResult<(Vec<f64>, Vec<f64>, Vec<Vec<f64>>)> {
    let mut cfg = SweepConfig::default();
    if let Some(b) = betas {
        cfg.betas = b;
    }
    let h = simulation::effect_heatmap(&cfg).map_err(py_err)?;
    Ok((h.betas, h.evidence, h.effects))
}

/// Literal and pragmatic curves over the experiment grid:
/// `(evidence, j0, j1, prior)`, offset applied.
#[pyfunction]
#[pyo3(signature = (beta=2.03, offset=-0.13))]
fn belief_curves(beta: f64, offset: f64) -> PyResult<(Vec<f64>, Vec<f64>, Vec<f64>, f64)> {
    let engine = rsa::StickContest::new(&WorldPrior::experiment()).map_err(py_err)?;
    let grid = engine.grid().values().to_vec();
    let c = simulation::belief_curves(&engine, beta, offset, &grid).map_err(py_err)?;
    Ok((c.evidence, c.j0, c.j1, c.prior))
}

/// Run the property battery; returns `(all_passed, report)`.
#[pyfunction]
fn theorem_suite() -> PyResult<(bool, String)> {
    let r = simulation::theorem_suite().map_err(py_err)?;
    Ok((r.all_passed(), r.to_string()))
}

/// Synthetic participants as data-file CSV text.
#[pyfunction]
#[pyo3(signature = (seed=0, n_participants=500))]
fn generate_data(seed: u64, n_participants: usize) -> PyResult<String> {
    let cfg = RunConfig::default();
    let engine = cfg.world.engine().map_err(py_err)?;
    let syn = SyntheticConfig {
        seed,
        n_participants,
        ..cfg.synthetic
    };
    let records = simulation::generate_synthetic(&engine, &cfg.world.example(), &syn).map_err(py_err)?;
    Ok(pio::write_records(&records, None))
}

/// MAP fit of a model to data-file CSV text; returns the parameters and the
/// maximum log-likelihood.
#[pyfunction]
#[pyo3(signature = (data, model="rsa", variant="speaker-dependent", levels=None))]
fn map_fit(data: &str, model: &str, variant: &str, levels: Option<&str>) -> PyResult<(BTreeMap<String, f64>, f64)> {
    let levels = levels.map(inference::parse_levels).transpose().map_err(py_err)?.unwrap_or_default();
    let spec = ModelSpec::new(model.parse().map_err(py_err)?, variant.parse().map_err(py_err)?, levels)
        .map_err(py_err)?;
    let world = RunConfig::default().world;
    let engine = Arc::new(world.engine().map_err(py_err)?);
    let (records, _) = pio::ingest_reader(data.as_bytes(), engine.grid(), &world.example()).map_err(py_err)?;
    let compiled = CompiledModel::new(spec, engine, &records).map_err(py_err)?;
    let fit = inference::map_fit(&compiled, &SearchConfig::default());
    let params = compiled.layout().vector(fit.theta);
    Ok((params.into(), fit.log_likelihood))
}

#[pymodule]
fn persuasion_rs(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", pio::VERSION)?;
    m.add_class::<PyStickContest>()?;
    m.add_function(wrap_pyfunction!(evidence_strength, m)?)?;
    m.add_function(wrap_pyfunction!(adjust_update, m)?)?;
    m.add_function(wrap_pyfunction!(waic, m)?)?;
    m.add_function(wrap_pyfunction!(psis_loo, m)?)?;
    m.add_function(wrap_pyfunction!(effect_heatmap, m)?)?;
    m.add_function(wrap_pyfunction!(belief_curves, m)?)?;
    m.add_function(wrap_pyfunction!(theorem_suite, m)?)?;
    m.add_function(wrap_pyfunction!(generate_data, m)?)?;
    m.add_function(wrap_pyfunction!(map_fit, m)?)?;
    Ok(())
}
