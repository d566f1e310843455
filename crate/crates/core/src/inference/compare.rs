//! Fit results and the model-comparison table.

use serde::{Deserialize, Serialize};

use super::criteria::{psis_loo, waic, LogLikMatrix, LooEstimate, WaicEstimate};
use super::map::{map_fit, SearchConfig};
use super::mcmc::{mh_sample, Chain, McmcConfig};
use super::model::{CompiledModel, ModelSpec, ParamVector};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub version: String,
    pub seed: u64,
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub provenance: Provenance,
    pub model: ModelSpec,
    pub label: String,
    pub param_names: Vec<String>,
    pub map_params: ParamVector,
    /// Log-likelihood at the MAP point (uniform priors, so also the maximum).
    pub max_loglik: f64,
    pub n_data: usize,
    pub data_fingerprint: String,
    pub search: SearchConfig,
    pub mcmc: McmcConfig,
    pub chains: Vec<Chain>,
    pub posterior_mean: ParamVector,
    pub effective_sample_size: Vec<f64>,
    /// `None` where undefined (a single chain, or zero within-chain variance).
    pub r_hat: Vec<Option<f64>>,
    pub loglik: LogLikMatrix,
    pub waic: WaicEstimate,
    pub psis_loo: LooEstimate,
    pub warnings: Vec<String>,
}

impl FitResult {
    pub fn n_samples(&self) -> usize {
        self.chains.iter().map(|c| c.samples.len()).sum()
    }
}

/// MAP search, sampling and both criteria for one compiled model.
pub fn fit_model(model: &CompiledModel, search: &SearchConfig, mcmc: &McmcConfig, provenance: Provenance) -> Result<FitResult> {
    model.check()?;
    let map = map_fit(model, search);
    let run = mh_sample(model, mcmc, None)?;
    let w = waic(&run.loglik)?;
    let l = psis_loo(&run.loglik)?;
    let layout = model.layout();
    let mut warnings = vec![format!(
        "MAP grid scan used {} points per dimension ({} evaluations total)",
        map.grid_points_per_dim, map.evaluations
    )];
    warnings.extend(run.warnings.iter().cloned());
    warnings.extend(l.warnings.iter().cloned());
    Ok(FitResult {
        provenance,
        model: model.spec().clone(),
        label: model.spec().label(),
        param_names: layout.names.clone(),
        map_params: layout.vector(map.theta.clone()),
        max_loglik: map.log_likelihood,
        n_data: model.n_data(),
        data_fingerprint: model.fingerprint().to_string(),
        search: search.clone(),
        mcmc: mcmc.clone(),
        posterior_mean: layout.vector(run.posterior_mean()),
        effective_sample_size: run.effective_sample_size(),
        r_hat: run.r_hat().into_iter().map(|r| r.is_finite().then_some(r)).collect(),
        chains: run.chains,
        loglik: run.loglik,
        waic: w,
        psis_loo: l,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub rank: usize,
    pub model: String,
    pub max_loglik: f64,
    pub waic: f64,
    pub waic_se: f64,
    pub psis_loo: f64,
    pub psis_loo_se: f64,
    /// WAIC difference to the best model and its standard error.
    pub delta_waic: f64,
    pub delta_se: f64,
    /// Within one standard error of the best model.
    pub indistinguishable: bool,
}

fn paired_se(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = d.len() as f64;
    if d.len() < 2 {
        return 0.0;
    }
    let m = d.iter().sum::<f64>() / n;
    (n * d.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Rank fits by WAIC (lower is better). All fits must share a dataset.
pub fn compare_models(fits: &[FitResult]) -> Result<Vec<ComparisonRow>> {
    let first = fits
        .first()
        .ok_or_else(|| Error::Validation("no fits to compare".into()))?;
    for f in &fits[1..] {
        if f.data_fingerprint != first.data_fingerprint {
            return Err(Error::DataMismatch(first.label.clone(), f.label.clone()));
        }
    }
    let mut order: Vec<usize> = (0..fits.len()).collect();
    order.sort_by(|&a, &b| fits[a].waic.waic.total_cmp(&fits[b].waic.waic).then(a.cmp(&b)));
    let best = &fits[order[0]];
    Ok(order
        .iter()
        .enumerate()
        .map(|(rank, &i)| {
            let f = &fits[i];
            let delta = f.waic.waic - best.waic.waic;
            let se = paired_se(&f.waic.pointwise, &best.waic.pointwise);
            ComparisonRow {
                rank: rank + 1,
                model: f.label.clone(),
                max_loglik: f.max_loglik,
                waic: f.waic.waic,
                waic_se: f.waic.se,
                psis_loo: f.psis_loo.looic,
                psis_loo_se: f.psis_loo.se,
                delta_waic: delta,
                delta_se: se,
                indistinguishable: rank > 0 && delta <= se,
            }
        })
        .collect())
}
