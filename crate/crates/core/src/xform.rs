//! Truncation operators on discrete laws and the surrogate-distribution
//! construction (two-sided truncation followed by double shading).

use crate::dist::{DiscreteDist, Dist, ProductDist};
use crate::error::{Error, Result};
use crate::learn::{shade_dist, transform_quantiles, ShadeParams, Shader};

/// Truncate the lowest ε fraction of values: quantiles of positive values
/// are capped at 1−ε, so an atom of mass ≥ ε appears at 0.
pub fn t_min(d: &DiscreteDist, eps: f64) -> Result<DiscreteDist> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::domain(format!("t_min needs eps in [0,1), got {eps}")));
    }
    transform_quantiles(d, |q| q.min(1.0 - eps))
}

/// Truncate values above `v_bar`: all mass above moves onto an atom at
/// `v_bar`; quantiles strictly below `v_bar` are unchanged.
pub fn t_max_value(d: &DiscreteDist, v_bar: f64) -> Result<DiscreteDist> {
    if !(v_bar >= 0.0) {
        return Err(Error::domain(format!("t_max_value needs v_bar >= 0, got {v_bar}")));
    }
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(d.len() + 1);
    let mut above = 0.0;
    for &(v, p) in d.points() {
        if v < v_bar {
            pts.push((v, p));
        } else {
            above += p;
        }
    }
    if above > 0.0 {
        pts.push((v_bar, above));
    }
    DiscreteDist::from_raw_points(pts)
}

/// Truncate the top ε fraction in quantile space: values with quantile < ε
/// collapse onto the value at quantile ε.
pub fn t_max_quantile(d: &DiscreteDist, eps: f64) -> Result<DiscreteDist> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::domain(format!("t_max_quantile needs eps in (0,1], got {eps}")));
    }
    let v_star = d.value_at(eps)?;
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(d.len());
    let mut merged = 0.0;
    for &(v, p) in d.points() {
        if d.quantile(v) >= eps && v != v_star {
            pts.push((v, p));
        } else {
            // v_star itself plus everything above it.
            merged += p;
        }
    }
    if merged > 0.0 {
        pts.push((v_star, merged));
    }
    DiscreteDist::from_raw_points(pts)
}

/// The surrogate pair: D′ = t_min(ε) ∘ t_max_value(v̄) applied per
/// coordinate, and its double-shaded companion D̃′ = shade_d(D′).
pub fn surrogate(
    d: &ProductDist,
    v_bar: &[f64],
    eps: f64,
    p: &ShadeParams,
) -> Result<(ProductDist, ProductDist)> {
    if v_bar.len() != d.n() {
        return Err(Error::domain("cap vector length must match bidder count"));
    }
    let mut prime = Vec::with_capacity(d.n());
    let mut shaded = Vec::with_capacity(d.n());
    for (coord, &cap) in d.coords().iter().zip(v_bar) {
        let disc = coord
            .as_discrete()
            .ok_or_else(|| Error::domain("surrogate requires discrete coordinates"))?;
        let dp = t_min(&t_max_value(disc, cap)?, eps)?;
        shaded.push(Dist::Discrete(shade_dist(p, &dp, Shader::D)?));
        prime.push(Dist::Discrete(dp));
    }
    Ok((ProductDist::new(prime)?, ProductDist::new(shaded)?))
}

/// The cap rule for [0,1]-bounded supports: the largest support value whose
/// quantile is at least ε²/n (so at most ε² of revenue is lost per
/// coordinate).
pub fn cap_bounded(d: &DiscreteDist, eps: f64, n: usize) -> f64 {
    let thresh = eps * eps / n as f64;
    // sup { v : quantile(v) >= thresh } = the first support value whose
    // strict quantile falls below thresh (the top value has quantile 0, so
    // the scan always stops).
    d.points()
        .iter()
        .map(|&(v, _)| v)
        .find(|&v| d.quantile(v) < thresh)
        .unwrap_or_else(|| d.max_value())
}
