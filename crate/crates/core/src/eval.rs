//! Revenue evaluation: exact enumeration over discrete products,
//! Monte-Carlo estimation with Bernstein confidence intervals, and Opt(D).

use crate::dist::{DiscreteDist, ProductDist};
use crate::error::{Error, Result};
use crate::mech::{build_myerson, Feasibility, Mechanism};
use rand::Rng;

/// Largest profile count rev_exact will enumerate.
pub const ENUM_BUDGET: f64 = 1e7;

/// Confidence level of Monte-Carlo intervals is 1 − MC_ETA.
pub const MC_ETA: f64 = 1e-3;

/// Kahan–Babuška compensated accumulator.
#[derive(Default, Clone, Copy)]
struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

fn discrete_coords(d: &ProductDist) -> Result<Vec<&DiscreteDist>> {
    d.coords()
        .iter()
        .map(|c| c.as_discrete().ok_or_else(|| Error::domain("exact evaluation requires discrete coordinates")))
        .collect()
}

/// Run `f` on every value profile of the product, with its probability,
/// iterating in mixed-radix order over support indices.
pub fn for_each_profile<F: FnMut(&[f64], f64)>(d: &ProductDist, mut f: F) -> Result<()> {
    let coords = discrete_coords(d)?;
    let profiles: f64 = coords.iter().map(|c| c.len() as f64).product();
    if profiles > ENUM_BUDGET {
        return Err(Error::EnumerationBudget { profiles, budget: ENUM_BUDGET });
    }
    let n = coords.len();
    let mut idx = vec![0usize; n];
    let mut vals = vec![0.0; n];
    let mut probs = vec![0.0; n];
    loop {
        let mut p = 1.0;
        for i in 0..n {
            let (v, pm) = coords[i].points()[idx[i]];
            vals[i] = v;
            probs[i] = pm;
            p *= pm;
        }
        f(&vals, p);
        // Mixed-radix increment, least-significant coordinate last.
        let mut i = n;
        loop {
            if i == 0 {
                return Ok(());
            }
            i -= 1;
            idx[i] += 1;
            if idx[i] < coords[i].len() {
                break;
            }
            idx[i] = 0;
        }
    }
}

/// Exact expected revenue of a mechanism under a discrete product law.
pub fn rev_exact(m: &Mechanism, d: &ProductDist) -> Result<f64> {
    if m.n() != d.n() {
        return Err(Error::domain("mechanism and distribution bidder counts differ"));
    }
    let mut acc = Kahan::default();
    let mut run_err = None;
    for_each_profile(d, |vals, p| {
        if run_err.is_some() {
            return;
        }
        match m.run(vals) {
            Ok((_, pay)) => acc.add(p * pay.iter().sum::<f64>()),
            Err(e) => run_err = Some(e),
        }
    })?;
    if let Some(e) = run_err {
        return Err(e);
    }
    Ok(acc.total())
}

/// Monte-Carlo revenue estimate with an empirical-Bernstein confidence
/// interval at level 1 − 1e−3. Payments must stay within `payment_cap`;
/// an observation above the cap invalidates the interval and errors.
pub fn rev_mc<R: Rng + ?Sized>(
    m: &Mechanism,
    d: &ProductDist,
    samples: usize,
    rng: &mut R,
    payment_cap: f64,
) -> Result<(f64, f64)> {
    if samples < 1 {
        return Err(Error::domain("Monte-Carlo needs at least one sample"));
    }
    if m.n() != d.n() {
        return Err(Error::domain("mechanism and distribution bidder counts differ"));
    }
    let mut xs = Vec::with_capacity(samples);
    for _ in 0..samples {
        let profile = d.sample_profile(rng);
        let (_, pay) = m.run(&profile)?;
        let total: f64 = pay.iter().sum();
        if total > payment_cap * (1.0 + 1e-12) {
            return Err(Error::PaymentCapExceeded { payment: total, cap: payment_cap });
        }
        xs.push(total);
    }
    Ok(mean_and_bernstein_halfwidth(&xs, payment_cap))
}

/// Mean and empirical-Bernstein halfwidth of bounded observations.
pub fn mean_and_bernstein_halfwidth(xs: &[f64], cap: f64) -> (f64, f64) {
    let n = xs.len() as f64;
    let mut acc = Kahan::default();
    for &x in xs {
        acc.add(x);
    }
    let mean = acc.total() / n;
    let mut var = Kahan::default();
    for &x in xs {
        var.add((x - mean) * (x - mean));
    }
    let sigma2 = var.total() / n;
    let l = (2.0 / MC_ETA).ln();
    // Solve n t^2 / (2 sigma^2 + (2/3) cap t) = l for t.
    let a = (2.0 / 3.0) * cap * l;
    let t = (a + (a * a + 8.0 * n * sigma2 * l).sqrt()) / (2.0 * n);
    (mean, t)
}

/// Expected optimal virtual surplus E[value of the selected winner set in
/// ironed virtual values, clamped at 0] — Myerson's revenue identity.
pub fn virtual_surplus(m: &Mechanism, d: &ProductDist) -> Result<f64> {
    let mut acc = Kahan::default();
    for_each_profile(d, |vals, p| {
        let w = m.weights(vals);
        let total: f64 = m.select(&w).iter().map(|&i| w[i].max(0.0)).sum();
        acc.add(p * total);
    })?;
    Ok(acc.total())
}

/// Optimal revenue Opt(D): the revenue of Myerson's auction for D itself.
/// Also evaluates the virtual-surplus form and asserts the Myerson identity
/// to 1e−9.
pub fn opt(d: &ProductDist, feas: Feasibility) -> Result<f64> {
    let m = build_myerson(d, feas)?;
    let rev = rev_exact(&m, d)?;
    let vs = virtual_surplus(&m, d)?;
    if (rev - vs).abs() > 1e-9 {
        return Err(Error::domain(format!(
            "Myerson identity violated: revenue {rev} vs virtual surplus {vs}"
        )));
    }
    Ok(rev)
}

/// Exhaustive posted-price oracle for a single bidder: the best revenue
/// v·Pr[X ≥ v] over support values, reporting the lower price on ties.
pub fn single_bidder_opt_bruteforce(d: &DiscreteDist) -> (f64, f64) {
    let pr_ge = d.pr_ge_points();
    let mut best_price = d.min_value();
    let mut best_rev = f64::NEG_INFINITY;
    for (&(v, _), &g) in d.points().iter().zip(&pr_ge) {
        let rev = v * g;
        if rev > best_rev {
            best_rev = rev;
            best_price = v;
        }
    }
    (best_price, best_rev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::Dist;
    use approx::assert_abs_diff_eq;

    fn point_x_u12() -> ProductDist {
        ProductDist::new(vec![
            Dist::point(1.0).unwrap(),
            Dist::Discrete(DiscreteDist::uniform(&[1.0, 2.0]).unwrap()),
        ])
        .unwrap()
    }

    #[test]
    fn exact_revenue_examples() {
        let d = point_x_u12();
        let m = build_myerson(&d, Feasibility::SingleItem).unwrap();
        assert_abs_diff_eq!(rev_exact(&m, &d).unwrap(), 1.5, epsilon = 1e-15);
        assert_abs_diff_eq!(opt(&d, Feasibility::SingleItem).unwrap(), 1.5, epsilon = 1e-15);

        // A posted price 2 on uniform{1,2}: single bidder with steps fixed
        // at that reserve.
        let u = ProductDist::new(vec![Dist::Discrete(DiscreteDist::uniform(&[1.0, 2.0]).unwrap())])
            .unwrap();
        let posted = Mechanism {
            version: crate::mech::MECHANISM_VERSION,
            feasibility: Feasibility::SingleItem,
            bidders: vec![crate::mech::StepFn { steps: vec![(2.0, 0.0)] }],
            tie: "lex".into(),
        };
        assert_abs_diff_eq!(rev_exact(&posted, &u).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn single_bidder_oracle() {
        let u = DiscreteDist::uniform(&[1.0, 2.0]).unwrap();
        assert_eq!(single_bidder_opt_bruteforce(&u), (1.0, 1.0));
        let irr = DiscreteDist::new(vec![(1.0, 0.6), (2.0, 0.3), (8.0, 0.1)]).unwrap();
        assert_eq!(single_bidder_opt_bruteforce(&irr), (1.0, 1.0));
        let p = DiscreteDist::point(4.0).unwrap();
        assert_eq!(single_bidder_opt_bruteforce(&p), (4.0, 4.0));
        // opt() agrees with the oracle.
        let d = ProductDist::new(vec![Dist::Discrete(irr.clone())]).unwrap();
        assert_abs_diff_eq!(
            opt(&d, Feasibility::SingleItem).unwrap(),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn budget_guard() {
        let big = DiscreteDist::uniform(&(0..500).map(|i| i as f64).collect::<Vec<_>>()).unwrap();
        let d = ProductDist::new(vec![
            Dist::Discrete(big.clone()),
            Dist::Discrete(big.clone()),
            Dist::Discrete(big),
        ])
        .unwrap();
        let m = build_myerson(&d, Feasibility::SingleItem).unwrap();
        match rev_exact(&m, &d) {
            Err(Error::EnumerationBudget { .. }) => {}
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn mc_matches_exact() {
        let d = point_x_u12();
        let m = build_myerson(&d, Feasibility::SingleItem).unwrap();
        let mut hits = 0;
        let trials = 50;
        for t in 0..trials {
            let mut rng = crate::rng::stream(42, t, 0);
            let (est, hw) = rev_mc(&m, &d, 20_000, &mut rng, 2.0).unwrap();
            if (est - 1.5).abs() <= hw {
                hits += 1;
            }
        }
        // 99.9% nominal coverage; demand at least 48/50.
        assert!(hits >= 48, "coverage {hits}/{trials}");
    }

    #[test]
    fn mc_degenerate_cases() {
        let d = ProductDist::new(vec![Dist::point(2.0).unwrap()]).unwrap();
        let m = build_myerson(&d, Feasibility::SingleItem).unwrap();
        let mut rng = crate::rng::stream(1, 0, 0);
        // Zero variance: halfwidth reduces to the additive cap term.
        let (est, hw) = rev_mc(&m, &d, 100, &mut rng, 2.0).unwrap();
        assert_abs_diff_eq!(est, 2.0, epsilon = 1e-15);
        let l: f64 = (2.0 / MC_ETA).ln();
        assert_abs_diff_eq!(hw, (2.0 / 3.0) * 2.0 * l / 100.0, epsilon = 1e-12);
        // One sample: the interval is at cap scale.
        let (_, hw1) = rev_mc(&m, &d, 1, &mut rng, 2.0).unwrap();
        assert!(hw1 >= 1.0);
        // Cap violations are detected.
        match rev_mc(&m, &d, 10, &mut rng, 1.0) {
            Err(Error::PaymentCapExceeded { .. }) => {}
            other => panic!("expected cap error, got {other:?}"),
        }
    }
}
