//! Revenue curves in quantile space, ironing (upper concave envelopes), and
//! (ironed) virtual values.
//!
//! For a discrete law with support v_1 > v_2 > … > v_K (descending) the raw
//! curve has breakpoints (q_k, R_k) with q_k = Pr[X ≥ v_k], R_k = v_k·q_k,
//! and (q_0, R_0) = (0, 0), interpolated linearly (randomized pricing). The
//! slope into breakpoint k is the discrete virtual value φ(v_k); the ironed
//! curve is the upper concave envelope, whose segment slopes are the ironed
//! virtual values φ̄.

use crate::dist::DiscreteDist;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct RevenueCurve {
    /// Support values, descending: values_desc[k-1] is v_k of raw[k].
    values_desc: Vec<f64>,
    /// Raw breakpoints, (0,0) first, q strictly increasing to 1.
    raw: Vec<(f64, f64)>,
    /// phi[k-1] = slope into raw[k] = virtual value of values_desc[k-1].
    phi: Vec<f64>,
    /// Upper concave envelope vertices (subset of raw, collinear merged).
    hull: Vec<(f64, f64)>,
    /// Envelope slope over each value's quantile interval (q_{k-1}, q_k].
    phibar: Vec<f64>,
}

/// Build the revenue curve (with its envelope) of a discrete law.
pub fn revenue_curve(d: &DiscreteDist) -> RevenueCurve {
    let pr_ge = d.pr_ge_points(); // ascending values
    let mut raw = vec![(0.0, 0.0)];
    let mut values_desc = Vec::with_capacity(d.len());
    for (&(v, _), &g) in d.points().iter().zip(&pr_ge).rev() {
        values_desc.push(v);
        raw.push((g, v * g));
    }
    // Pin the final quantile to exactly 1.
    let last = raw.len() - 1;
    raw[last].0 = 1.0;
    raw[last].1 = values_desc[values_desc.len() - 1];

    let phi: Vec<f64> = raw
        .windows(2)
        .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
        .collect();
    let hull = upper_hull(&raw);
    let phibar = values_desc
        .iter()
        .enumerate()
        .map(|(i, _)| hull_slope_right_of(&hull, raw[i].0))
        .collect();
    RevenueCurve { values_desc, raw, phi, hull, phibar }
}

/// Ironing: replace the curve by its upper concave envelope. The envelope is
/// computed eagerly at construction, so this is the identity on the stored
/// hull — exposed for symmetry and idempotence checks.
pub fn iron(c: &RevenueCurve) -> RevenueCurve {
    let mut out = c.clone();
    out.hull = upper_hull(&c.hull);
    out
}

impl RevenueCurve {
    pub fn raw(&self) -> &[(f64, f64)] {
        &self.raw
    }

    pub fn hull(&self) -> &[(f64, f64)] {
        &self.hull
    }

    /// Support values, descending (aligned with `phi`/`phibar`).
    pub fn values_desc(&self) -> &[f64] {
        &self.values_desc
    }

    /// Virtual values, aligned with `values_desc`.
    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    /// Ironed virtual values, aligned with `values_desc`.
    pub fn phibar(&self) -> &[f64] {
        &self.phibar
    }

    /// φ̄ of a specific support value.
    pub fn phibar_at_value(&self, v: f64) -> Option<f64> {
        self.values_desc
            .iter()
            .position(|&x| x == v)
            .map(|i| self.phibar[i])
    }

    /// (value, φ̄) pairs ascending by value — a mechanism step function.
    pub fn phibar_steps(&self) -> Vec<(f64, f64)> {
        self.values_desc
            .iter()
            .zip(&self.phibar)
            .rev()
            .map(|(&v, &p)| (v, p))
            .collect()
    }

    /// Ironed curve value R̄(q) by linear interpolation on the hull.
    pub fn ironed_at(&self, q: f64) -> f64 {
        interp(&self.hull, q)
    }

    /// Raw curve value R(q) by linear interpolation on the breakpoints.
    pub fn raw_at(&self, q: f64) -> f64 {
        interp(&self.raw, q)
    }

    /// Maximum of the ironed curve = the optimal single-bidder revenue.
    pub fn max_ironed(&self) -> f64 {
        self.hull.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max)
    }

    /// CSV dump for plotting: columns q, R_raw, R_ironed at every raw
    /// breakpoint.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "q,r_raw,r_ironed")?;
        for &(q, r) in &self.raw {
            writeln!(w, "{q},{r},{}", self.ironed_at(q))?;
        }
        Ok(())
    }
}

fn interp(pts: &[(f64, f64)], q: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&q));
    let i = pts.partition_point(|p| p.0 < q);
    if i == 0 {
        return pts[0].1;
    }
    if i == pts.len() {
        return pts[pts.len() - 1].1;
    }
    let (qa, ra) = pts[i - 1];
    let (qb, rb) = pts[i];
    if qb == qa {
        return ra.max(rb);
    }
    ra + (rb - ra) * (q - qa) / (qb - qa)
}

/// Upper concave envelope of points sorted by increasing x (monotone chain);
/// collinear interior points are merged.
fn upper_hull(pts: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for &p in pts {
        while hull.len() >= 2 {
            let o = hull[hull.len() - 2];
            let a = hull[hull.len() - 1];
            let cross = (a.0 - o.0) * (p.1 - o.1) - (a.1 - o.1) * (p.0 - o.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

/// Slope of the hull segment lying immediately to the right of quantile `q`
/// (the right derivative of the envelope; at q = 1 the left segment).
fn hull_slope_right_of(hull: &[(f64, f64)], q: f64) -> f64 {
    let i = hull.partition_point(|p| p.0 <= q);
    let i = i.min(hull.len() - 1).max(1);
    let (qa, ra) = hull[i - 1];
    let (qb, rb) = hull[i];
    (rb - ra) / (qb - qa)
}

/// True iff the virtual values are nondecreasing in value.
pub fn is_regular(d: &DiscreteDist) -> bool {
    let c = revenue_curve(d);
    // phi is indexed by descending value, so regularity means
    // nonincreasing along the index.
    c.phi.windows(2).all(|w| w[0] >= w[1] - 1e-12)
}

/// True iff the hazard rate f(v)/Pr[X ≥ v] is nondecreasing in value.
pub fn is_mhr(d: &DiscreteDist) -> bool {
    let pr_ge = d.pr_ge_points();
    let hazards: Vec<f64> = d
        .points()
        .iter()
        .zip(&pr_ge)
        .map(|(&(_, f), &g)| f / g)
        .collect();
    hazards.windows(2).all(|w| w[1] >= w[0] - 1e-12)
}
