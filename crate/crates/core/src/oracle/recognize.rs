//! Matching a compiled graph against the mixture family the oracle covers.

use std::collections::BTreeMap;

use super::gmm::GmmSpec;
use crate::frontend::{DistKind, PrimOp};
use crate::graph::{GraphModel, Polarity, Term, Vertex};

/// A recognized mixture and where its cluster means live among the latent
/// coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct GmmLayout {
    pub spec: GmmSpec,
    /// Latent names of the cluster means, in cluster order.
    pub mean_coords: Vec<String>,
}

/// Cluster, selector interval `[lo, hi)`, noise scale and datum.
type Observation = (usize, f64, f64, f64, f64);

fn constant(t: &Term) -> Option<f64> {
    match t {
        Term::Const(v) => Some(*v),
        _ => None,
    }
}

/// `u - c` or `u`, returning `(u, c)`.
fn threshold(t: &Term) -> Option<(&str, f64)> {
    match t {
        Term::Var(u) => Some((u, 0.0)),
        Term::Prim(PrimOp::Sub, args) => match args.as_slice() {
            [Term::Var(u), Term::Const(c)] => Some((u, *c)),
            _ => None,
        },
        _ => None,
    }
}

/// Recognize a mixture with constant Normal priors on the cluster means,
/// one uniform(0, 1) selector per data point and a chain of threshold tests
/// on the selector choosing which cluster observes the point.
pub fn recognize_gmm(model: &GraphModel) -> Option<GmmLayout> {
    let mut means: Vec<&Vertex> = Vec::new();
    let mut selectors: Vec<&Vertex> = Vec::new();
    for v in model.latents() {
        let params: Option<Vec<f64>> = v.dist.params.iter().map(constant).collect();
        let params = params?;
        match v.dist.kind {
            DistKind::Normal => means.push(v),
            DistKind::Uniform if params == [0.0, 1.0] => selectors.push(v),
            DistKind::Uniform => return None,
        }
        if !v.guard.is_empty() {
            return None;
        }
    }
    let k = means.len();
    if k == 0 || selectors.is_empty() {
        return None;
    }
    let (mu0, sigma0) = (
        constant(&means[0].dist.params[0])?,
        constant(&means[0].dist.params[1])?,
    );
    if means.iter().any(|m| m.dist.params != means[0].dist.params) {
        return None;
    }
    let cluster_of: BTreeMap<&str, usize> = means
        .iter()
        .enumerate()
        .map(|(j, m)| (m.name.as_str(), j))
        .collect();
    let selector_index: BTreeMap<&str, usize> = selectors
        .iter()
        .enumerate()
        .map(|(i, u)| (u.name.as_str(), i))
        .collect();

    // Per selector: (cluster, interval, sigma, datum) for each observation.
    let mut groups: Vec<Vec<Observation>> = vec![Vec::new(); selectors.len()];
    for v in model.vertices.iter().filter(|v| !v.is_latent()) {
        if v.dist.kind != DistKind::Normal {
            return None;
        }
        let Term::Var(mu) = &v.dist.params[0] else {
            return None;
        };
        let cluster = *cluster_of.get(mu.as_str())?;
        let sigma = constant(&v.dist.params[1])?;
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let mut sel = None;
        for lit in &v.guard {
            let (u, c) = threshold(&model.predicate(lit.pred).expr)?;
            let i = *selector_index.get(u)?;
            if sel.is_some_and(|s| s != i) {
                return None;
            }
            sel = Some(i);
            match lit.polarity {
                Polarity::Neg => hi = hi.min(c),
                Polarity::Nonneg => lo = lo.max(c),
            }
        }
        let sel = sel?;
        groups[sel].push((cluster, lo, hi, sigma, v.datum?));
    }

    let mut p0 = vec![0.0; k];
    let mut sigma_obs = vec![0.0; k];
    let mut data = Vec::with_capacity(selectors.len());
    for (i, g) in groups.iter_mut().enumerate() {
        if g.len() != k {
            return None;
        }
        g.sort_by(|a, b| a.1.total_cmp(&b.1));
        let mut edge = 0.0;
        let mut seen = vec![false; k];
        for &(cluster, lo, hi, sigma, datum) in g.iter() {
            if lo != edge || !(hi > lo) || seen[cluster] || datum != g[0].4 {
                return None;
            }
            seen[cluster] = true;
            edge = hi;
            if i == 0 {
                p0[cluster] = hi - lo;
                sigma_obs[cluster] = sigma;
            } else if p0[cluster] != hi - lo || sigma_obs[cluster] != sigma {
                return None;
            }
        }
        if edge != 1.0 {
            return None;
        }
        data.push(g[0].4);
    }
    let spec = GmmSpec {
        k,
        mu0,
        sigma0,
        sigma_obs,
        p0,
        data,
    };
    spec.validate().ok()?;
    Some(GmmLayout {
        spec,
        mean_coords: means.iter().map(|m| m.name.clone()).collect(),
    })
}
