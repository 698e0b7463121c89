//! Symmetric KL divergence (exact discrete, numeric continuous), the
//! partition upper bound, sample-scale estimates, and the revenue-based
//! distinguisher.

use crate::dist::{ClosedFormDist, DiscreteDist, SampleMatrix};
use crate::error::{Error, Result};
use crate::mech::Mechanism;

/// Symmetric KL divergence of two discrete laws:
/// Σ (p − q)·ln(p/q) over the union support. Returns +∞ when any atom has
/// one-sided positive mass (the laws are then trivially distinguishable).
pub fn skl_discrete(p: &DiscreteDist, q: &DiscreteDist) -> f64 {
    let mut i = 0;
    let mut j = 0;
    let pp = p.points();
    let qq = q.points();
    let mut sum = 0.0;
    while i < pp.len() || j < qq.len() {
        let (pm, qm) = if i < pp.len() && (j >= qq.len() || pp[i].0 < qq[j].0) {
            let r = (pp[i].1, 0.0);
            i += 1;
            r
        } else if j < qq.len() && (i >= pp.len() || qq[j].0 < pp[i].0) {
            let r = (0.0, qq[j].1);
            j += 1;
            r
        } else {
            let r = (pp[i].1, qq[j].1);
            i += 1;
            j += 1;
            r
        };
        if pm == 0.0 || qm == 0.0 {
            return f64::INFINITY;
        }
        sum += (pm - qm) * (pm / qm).ln();
    }
    sum
}

/// Numeric SKL of two closed-form laws: adaptive quadrature of
/// (p − q)·ln(p/q) over the continuous regions plus exact atom terms.
/// Returns +∞ on support mismatch (density or atom present on one side
/// only over a set of positive mass).
pub fn skl_numeric(p: &ClosedFormDist, q: &ClosedFormDist) -> Result<f64> {
    // Atom terms.
    let mut atoms: Vec<(f64, f64, f64)> = Vec::new(); // (value, p mass, q mass)
    for &(v, m) in &p.atoms() {
        atoms.push((v, m, 0.0));
    }
    for &(v, m) in &q.atoms() {
        if let Some(a) = atoms.iter_mut().find(|a| (a.0 - v).abs() <= 1e-12) {
            a.2 = m;
        } else {
            atoms.push((v, 0.0, m));
        }
    }
    let mut total = 0.0;
    for &(_, pm, qm) in &atoms {
        if pm == 0.0 || qm == 0.0 {
            return Ok(f64::INFINITY);
        }
        total += (pm - qm) * (pm / qm).ln();
    }

    // Continuous part: split at both laws' density breakpoints.
    let (plo, phi_) = p.support();
    let (qlo, qhi) = q.support();
    let lo = plo.min(qlo);
    let hi = phi_.max(qhi);
    let mut cuts: Vec<f64> = p
        .density_breakpoints()
        .into_iter()
        .chain(q.density_breakpoints())
        .filter(|&x| x > lo && x < hi && x.is_finite())
        .collect();
    cuts.push(lo);
    cuts.sort_by(|a, b| a.total_cmp(b));
    cuts.dedup();

    let mismatch = std::cell::Cell::new(false);
    let integrand = |v: f64| -> f64 {
        let fp = p.density(v);
        let fq = q.density(v);
        if fp <= 0.0 && fq <= 0.0 {
            0.0
        } else if fp <= 0.0 || fq <= 0.0 {
            mismatch.set(true);
            0.0
        } else {
            (fp - fq) * (fp / fq).ln()
        }
    };

    const TOL: f64 = 1e-10;
    for w in cuts.windows(2) {
        total += adaptive_simpson(&integrand, w[0], w[1], TOL);
    }
    let last = *cuts.last().expect("at least the lower end");
    if hi.is_finite() {
        if hi > last {
            total += adaptive_simpson(&integrand, last, hi, TOL);
        }
    } else {
        // Map [last, ∞) to t in [0, 1) via v = last + t/(1-t).
        let tail = |t: f64| -> f64 {
            if t >= 1.0 {
                return 0.0;
            }
            let s = 1.0 - t;
            integrand(last + t / s) / (s * s)
        };
        total += adaptive_simpson(&tail, 0.0, 1.0, TOL);
    }
    if mismatch.get() {
        return Ok(f64::INFINITY);
    }
    if !total.is_finite() {
        return Err(Error::domain("SKL quadrature did not converge (non-integrable tail?)"));
    }
    Ok(total)
}

/// Adaptive Simpson quadrature with absolute tolerance.
fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, fa, m, fm, left, lm, flm, 0.5 * tol, depth - 1)
                + rec(f, m, fm, b, fb, right, rm, frm, 0.5 * tol, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, m, fm) = simpson(f, a, fa, b, fb);
    rec(f, a, fa, b, fb, whole, m, fm, tol, 40)
}

/// Partition bound on SKL: Σ P(Ω_i)·ε_i², valid whenever the density ratio
/// on Ω_i lies within [(1+ε_i)^{-1}, 1+ε_i].
pub fn dptrick_bound(partition: &[(f64, f64)]) -> Result<f64> {
    let mut sum = 0.0;
    for &(mass, eps) in partition {
        if !(0.0..=1.0 + 1e-12).contains(&mass) {
            return Err(Error::domain(format!("region mass {mass} outside [0,1]")));
        }
        if !(0.0..1.0).contains(&eps) {
            return Err(Error::domain(format!("partition epsilon {eps} outside [0,1)")));
        }
        sum += mass * eps * eps;
    }
    Ok(sum)
}

/// The Ω(1/SKL) indistinguishability sample scale with an explicit
/// constant: c0 / skl. This is a scale estimate, not a certified bound.
pub fn sample_lb(skl: f64, c0: f64) -> Result<f64> {
    if skl < 0.0 || c0 <= 0.0 {
        return Err(Error::domain("sample_lb needs skl >= 0 and c0 > 0"));
    }
    if skl == 0.0 {
        Ok(f64::INFINITY)
    } else if skl.is_infinite() {
        Ok(0.0)
    } else {
        Ok(c0 / skl)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    PLike,
    QLike,
}

/// Revenue-based distinguisher: estimate the mechanism's revenue on the
/// sample rows (as bid profiles) and label the source P-like iff the
/// estimate is at least `ref_rev − alpha`.
pub fn distinguish(
    m: &Mechanism,
    ref_rev: f64,
    alpha: f64,
    s: &SampleMatrix,
    cap: f64,
) -> Result<Label> {
    if alpha <= 0.0 {
        return Err(Error::domain("distinguish needs alpha > 0"));
    }
    let mut total = 0.0;
    for r in 0..s.m() {
        let (_, pay) = m.run(s.row(r))?;
        let p: f64 = pay.iter().sum();
        if p > cap * (1.0 + 1e-12) {
            return Err(Error::PaymentCapExceeded { payment: p, cap });
        }
        total += p;
    }
    let estimate = total / s.m() as f64;
    Ok(if estimate >= ref_rev - alpha {
        Label::PLike
    } else {
        Label::QLike
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{Dist, ProductDist};
    use crate::eval::rev_exact;
    use crate::mech::{build_myerson, Feasibility};
    use approx::assert_abs_diff_eq;

    #[test]
    fn skl_discrete_basics() {
        let p = DiscreteDist::new(vec![(1.0, 0.6), (2.0, 0.4)]).unwrap();
        assert_eq!(skl_discrete(&p, &p), 0.0);
        let q = DiscreteDist::new(vec![(1.0, 0.4), (2.0, 0.6)]).unwrap();
        assert_abs_diff_eq!(skl_discrete(&p, &q), skl_discrete(&q, &p), epsilon = 1e-15);
        assert!(skl_discrete(&p, &q) > 0.0);
        let a = DiscreteDist::point(1.0).unwrap();
        let b = DiscreteDist::point(2.0).unwrap();
        assert!(skl_discrete(&a, &b).is_infinite());
    }

    #[test]
    fn two_point_pair_closed_form() {
        let eps = 0.05;
        let p = DiscreteDist::new(vec![(1.0, (1.0 + 4.0 * eps) / 2.0), (2.0, (1.0 - 4.0 * eps) / 2.0)])
            .unwrap();
        let q = DiscreteDist::new(vec![(1.0, (1.0 - 4.0 * eps) / 2.0), (2.0, (1.0 + 4.0 * eps) / 2.0)])
            .unwrap();
        let expect = 8.0 * eps * ((1.0 + 4.0 * eps) / (1.0 - 4.0 * eps)).ln();
        assert_abs_diff_eq!(skl_discrete(&p, &q), expect, epsilon = 1e-12);
        assert_abs_diff_eq!(skl_discrete(&p, &q), 0.162186, epsilon = 1e-6);
        assert_abs_diff_eq!(skl_discrete(&p, &q), 0.1621860432432657, epsilon = 1e-15);
    }

    #[test]
    fn skl_numeric_identical_is_zero() {
        let d = ClosedFormDist::HeavyTailRegular;
        let v = skl_numeric(&d, &d).unwrap();
        assert!(v.abs() < 1e-9, "{v}");
        let c = ClosedFormDist::CmhrLow { n: 8 };
        assert!(skl_numeric(&c, &c).unwrap().abs() < 1e-9);
    }

    #[test]
    fn skl_numeric_regular_pair_is_finite_and_positive() {
        let p = ClosedFormDist::RegularLow { n: 4 };
        let q = ClosedFormDist::RegularHigh { n: 4, eps: 0.1 };
        let v = skl_numeric(&p, &q).unwrap();
        assert!(v.is_finite() && v > 0.0, "{v}");
        // Symmetric in its arguments.
        assert_abs_diff_eq!(v, skl_numeric(&q, &p).unwrap(), epsilon = 1e-9);
    }

    #[test]
    fn skl_numeric_detects_support_mismatch() {
        let p = ClosedFormDist::Exponential { rate: 1.0 };
        let q = ClosedFormDist::CmhrLow { n: 8 }; // atom the exponential lacks
        assert!(skl_numeric(&p, &q).unwrap().is_infinite());
    }

    #[test]
    fn dptrick_examples() {
        assert_eq!(dptrick_bound(&[(1.0, 0.0)]).unwrap(), 0.0);
        // The nominal bounded-support assignment: mass 2/(nH), eps.
        let (n, h, eps) = (4.0, 4.0, 0.2);
        assert_abs_diff_eq!(
            dptrick_bound(&[(1.0 - 2.0 / (n * h), 0.0), (2.0 / (n * h), eps)]).unwrap(),
            2.0 * eps * eps / (n * h),
            epsilon = 1e-15
        );
        assert!(dptrick_bound(&[(0.5, 1.0)]).is_err());
        assert!(dptrick_bound(&[(-0.1, 0.5)]).is_err());
    }

    #[test]
    fn sample_lb_arithmetic() {
        assert_abs_diff_eq!(sample_lb(0.01, 1.0).unwrap(), 100.0, epsilon = 1e-12);
        assert_eq!(sample_lb(0.0, 1.0).unwrap(), f64::INFINITY);
        assert_eq!(sample_lb(f64::INFINITY, 1.0).unwrap(), 0.0);
        assert!(sample_lb(-1.0, 1.0).is_err());
    }

    #[test]
    fn distinguisher_labels() {
        let u = DiscreteDist::uniform(&[1.0, 2.0]).unwrap();
        let d = ProductDist::new(vec![Dist::Discrete(u)]).unwrap();
        let m = build_myerson(&d, Feasibility::SingleItem).unwrap();
        let ref_rev = rev_exact(&m, &d).unwrap();
        let mut hits = 0;
        let trials = 30;
        for t in 0..trials {
            let s = SampleMatrix::draw(&d, 400, 7, t).unwrap();
            if distinguish(&m, ref_rev, 0.2, &s, 2.0).unwrap() == Label::PLike {
                hits += 1;
            }
        }
        assert!(hits * 3 >= trials * 2, "{hits}/{trials}");
        // Impossibly high reference revenue flips the label.
        let s = SampleMatrix::draw(&d, 100, 7, 0).unwrap();
        assert_eq!(distinguish(&m, 100.0, 0.2, &s, 2.0).unwrap(), Label::QLike);
        assert!(distinguish(&m, 1.0, 0.0, &s, 2.0).is_err());
    }
}
