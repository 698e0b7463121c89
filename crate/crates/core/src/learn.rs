//! Learning from samples: empirical distributions, quantile shading, the
//! dominated empirical Myerson learner, and the single-bidder baseline
//! pricing rules.

use crate::dist::{DiscreteDist, Dist, ProductDist, SampleMatrix};
use crate::error::{Error, Result};
use crate::mech::{build_myerson, Feasibility, Mechanism};

/// Parameters of the shading functions: sample count m, bidder count n,
/// failure probability δ, and the derived constant c = ln(2mn/δ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShadeParams {
    pub m: usize,
    pub n: usize,
    pub delta: f64,
    pub c: f64,
}

impl ShadeParams {
    pub fn new(m: usize, n: usize, delta: f64) -> Result<Self> {
        if m < 1 || n < 1 || !(delta > 0.0 && delta < 1.0) {
            return Err(Error::domain(format!(
                "shade parameters need m >= 1, n >= 1, delta in (0,1); got m={m}, n={n}, delta={delta}"
            )));
        }
        let c = (2.0 * m as f64 * n as f64 / delta).ln();
        Ok(ShadeParams { m, n, delta, c })
    }
}

/// Which shading function to apply to quantiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shader {
    /// Single shading: q − sqrt(2q(1−q)c/m) − 4c/m, clamped at 0.
    S,
    /// Double shading: q − sqrt(8q(1−q)c/m) − 7c/m, clamped at 0.
    D,
}

/// The single-shading function s_{m,n,δ}.
pub fn shade_s(p: &ShadeParams, q: f64) -> f64 {
    shade(p, q, 2.0, 4.0)
}

/// The double-shading function d_{m,n,δ}.
pub fn shade_d(p: &ShadeParams, q: f64) -> f64 {
    shade(p, q, 8.0, 7.0)
}

fn shade(p: &ShadeParams, q: f64, root_coef: f64, linear_coef: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&q));
    let cm = p.c / p.m as f64;
    (q - (root_coef * q * (1.0 - q) * cm).sqrt() - linear_coef * cm).max(0.0)
}

pub fn apply_shader(p: &ShadeParams, shader: Shader, q: f64) -> f64 {
    match shader {
        Shader::S => shade_s(p, q),
        Shader::D => shade_d(p, q),
    }
}

/// Rebuild a discrete law from a monotone transform `g` of its quantile
/// function: every positive value v keeps quantile g(q(v)), while the
/// quantile at 0 is forced to 1, i.e. all shaved mass lands on an atom at
/// value 0.
pub fn transform_quantiles<F: Fn(f64) -> f64>(d: &DiscreteDist, g: F) -> Result<DiscreteDist> {
    // Positive support values ascending, with the strict quantile just
    // below each of them: q at v_j^- equals q(previous positive value), or
    // q(0) = Pr[X > 0] for the lowest.
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(d.len() + 1);
    let mut g_below = g(d.quantile(0.0)); // new Pr[X > 0]
    pts.push((0.0, 1.0 - g_below));
    for &(v, _) in d.points().iter().filter(|p| p.0 > 0.0) {
        let g_at = g(d.quantile(v));
        let mass = g_below - g_at;
        if mass < 0.0 {
            return Err(Error::domain("quantile transform is not monotone"));
        }
        pts.push((v, mass));
        g_below = g_at;
    }
    // A positive new quantile above the top value would lose mass; the
    // shaders and truncations all map 0 to 0, so assert instead.
    debug_assert!(g_below.abs() < 1e-12, "transform must vanish at quantile 0");
    DiscreteDist::from_raw_points(pts)
}

/// The shaded version of a discrete law: quantiles of positive values are
/// passed through the shader; the shaved mass is deposited at value 0.
pub fn shade_dist(p: &ShadeParams, d: &DiscreteDist, shader: Shader) -> Result<DiscreteDist> {
    transform_quantiles(d, |q| apply_shader(p, shader, q))
}

/// Empirical distribution of one sample column: uniform over the observed
/// values with duplicates merged.
pub fn empirical_column(col: &[f64]) -> Result<DiscreteDist> {
    if col.is_empty() {
        return Err(Error::domain("empirical distribution needs at least one sample"));
    }
    if let Some(x) = col.iter().find(|x| !x.is_finite() || **x < 0.0) {
        return Err(Error::domain(format!("sample value {x} is not a finite nonnegative real")));
    }
    let w = 1.0 / col.len() as f64;
    DiscreteDist::from_raw_points(col.iter().map(|&v| (v, w)).collect())
}

/// Coordinate-wise empirical product distribution of a sample matrix.
pub fn empirical(s: &SampleMatrix) -> Result<ProductDist> {
    let coords = (0..s.n())
        .map(|i| Ok(Dist::Discrete(empirical_column(&s.column(i))?)))
        .collect::<Result<Vec<_>>>()?;
    ProductDist::new(coords)
}

/// The s-shaded empirical product distribution (the learner's model).
pub fn shaded_empirical(s: &SampleMatrix, delta: f64) -> Result<ProductDist> {
    let p = ShadeParams::new(s.m(), s.n(), delta)?;
    let coords = (0..s.n())
        .map(|i| {
            let e = empirical_column(&s.column(i))?;
            Ok(Dist::Discrete(shade_dist(&p, &e, Shader::S)?))
        })
        .collect::<Result<Vec<_>>>()?;
    ProductDist::new(coords)
}

/// Dominated empirical Myerson: Myerson's optimal auction for the s-shaded
/// empirical distribution.
pub fn dominated_empirical_myerson(
    s: &SampleMatrix,
    delta: f64,
    feas: Feasibility,
) -> Result<Mechanism> {
    build_myerson(&shaded_empirical(s, delta)?, feas)
}

/// Best posted price for the empirical distribution of one sample column:
/// argmax over observed values of v·Pr_E[X ≥ v], ties to the lower price.
pub fn empirical_price(col: &[f64]) -> Result<f64> {
    guarded_price(col, 0.0)
}

/// δ-guarded empirical price: the same argmax restricted to values with
/// empirical sale probability at least `delta_g`. Falls back to the lowest
/// sample value when nothing qualifies.
pub fn guarded_price(col: &[f64], delta_g: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&delta_g) {
        return Err(Error::domain(format!("guard {delta_g} outside [0,1]")));
    }
    let e = empirical_column(col)?;
    let pr_ge = e.pr_ge_points();
    let mut best: Option<(f64, f64)> = None; // (price, revenue)
    for (&(v, _), &g) in e.points().iter().zip(&pr_ge) {
        if g < delta_g {
            continue;
        }
        let rev = v * g;
        // Strict improvement only: among ties the lower price wins, and
        // values are scanned in ascending order.
        if best.map_or(true, |(_, r)| rev > r) {
            best = Some((v, rev));
        }
    }
    Ok(best.map_or(e.min_value(), |(v, _)| v))
}

/// Best posted price for an arbitrary discrete law (used for the dominated
/// baseline's price on the shaded empirical distribution). Ties go to the
/// lower price; the all-zero corner falls back to the minimum value.
pub fn best_price(d: &DiscreteDist) -> f64 {
    let pr_ge = d.pr_ge_points();
    let mut best: Option<(f64, f64)> = None;
    for (&(v, _), &g) in d.points().iter().zip(&pr_ge) {
        let rev = v * g;
        if best.map_or(true, |(_, r)| rev > r) {
            best = Some((v, rev));
        }
    }
    best.map_or(d.min_value(), |(v, _)| v)
}
