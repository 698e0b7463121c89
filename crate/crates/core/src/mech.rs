//! Myerson mechanisms: per-bidder ironed-virtual-value step functions,
//! feasibility structures (single item / k-unit / matroid), greedy winner
//! selection, and threshold (critical-value) payments.

use crate::curve::revenue_curve;
use crate::dist::ProductDist;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub const MECHANISM_VERSION: u32 = 1;

/// Concrete matroid families. The greedy routine works with any
/// independence oracle; these are the serializable ones the CLI exposes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatroidKind {
    /// Uniform matroid of rank k (equivalent to k-unit feasibility).
    Uniform { k: usize },
    /// Partition matroid: bidder i belongs to `groups[i]`; at most
    /// `caps[g]` winners from group g.
    Partition { groups: Vec<usize>, caps: Vec<usize> },
}

impl MatroidKind {
    pub fn is_independent(&self, set: &[usize]) -> bool {
        match self {
            MatroidKind::Uniform { k } => set.len() <= *k,
            MatroidKind::Partition { groups, caps } => {
                let mut counts = vec![0usize; caps.len()];
                for &i in set {
                    let g = groups[i];
                    counts[g] += 1;
                    if counts[g] > caps[g] {
                        return false;
                    }
                }
                true
            }
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        match self {
            MatroidKind::Uniform { k } => {
                if *k == 0 || *k > n {
                    return Err(Error::domain(format!("uniform matroid rank {k} outside [1, {n}]")));
                }
            }
            MatroidKind::Partition { groups, caps } => {
                if groups.len() != n {
                    return Err(Error::domain("partition matroid group labels must cover all bidders"));
                }
                if groups.iter().any(|&g| g >= caps.len()) {
                    return Err(Error::domain("partition matroid group label out of range"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feasibility {
    SingleItem,
    KUnit(usize),
    Matroid(MatroidKind),
}

impl Feasibility {
    fn validate(&self, n: usize) -> Result<()> {
        match self {
            Feasibility::SingleItem => Ok(()),
            Feasibility::KUnit(k) => {
                if *k == 0 || *k > n {
                    Err(Error::domain(format!("k-unit feasibility needs k in [1, {n}], got {k}")))
                } else {
                    Ok(())
                }
            }
            Feasibility::Matroid(m) => m.validate(n),
        }
    }
}

/// A nondecreasing step function from bids to ironed virtual values.
/// Bids below the first breakpoint map to −∞ (never win).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFn {
    /// (value threshold, φ̄ level), strictly increasing in value,
    /// nondecreasing in level.
    pub steps: Vec<(f64, f64)>,
}

impl StepFn {
    fn validate(&self) -> Result<()> {
        if self.steps.is_empty() {
            return Err(Error::domain("step function needs at least one breakpoint"));
        }
        for w in self.steps.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::domain("step thresholds must strictly increase"));
            }
            if w[1].1 < w[0].1 - 1e-12 {
                return Err(Error::domain("step levels must be nondecreasing (monotone allocation)"));
            }
        }
        Ok(())
    }

    /// φ̄ at a bid: the level of the largest threshold ≤ bid, −∞ below all.
    pub fn eval(&self, bid: f64) -> f64 {
        let i = self.steps.partition_point(|&(v, _)| v <= bid);
        if i == 0 {
            f64::NEG_INFINITY
        } else {
            self.steps[i - 1].1
        }
    }
}

fn default_version() -> u32 {
    MECHANISM_VERSION
}

fn default_tie() -> String {
    "lex".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mechanism {
    #[serde(default = "default_version")]
    pub version: u32,
    pub feasibility: Feasibility,
    pub bidders: Vec<StepFn>,
    /// Tie order among equal virtual values: bidder index ascending.
    #[serde(default = "default_tie")]
    pub tie: String,
}

/// Myerson's optimal auction for a discrete product distribution: each
/// bidder's step function is the ironed virtual value of their marginal.
pub fn build_myerson(d: &ProductDist, feas: Feasibility) -> Result<Mechanism> {
    feas.validate(d.n())?;
    let mut bidders = Vec::with_capacity(d.n());
    for coord in d.coords() {
        let disc = coord
            .as_discrete()
            .ok_or_else(|| Error::domain("build_myerson requires discrete coordinates"))?;
        bidders.push(StepFn { steps: revenue_curve(disc).phibar_steps() });
    }
    let m = Mechanism {
        version: MECHANISM_VERSION,
        feasibility: feas,
        bidders,
        tie: default_tie(),
    };
    m.validate()?;
    Ok(m)
}

impl Mechanism {
    pub fn n(&self) -> usize {
        self.bidders.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.bidders.is_empty() {
            return Err(Error::domain("mechanism needs at least one bidder"));
        }
        if self.version != MECHANISM_VERSION {
            return Err(Error::UnsupportedVersion { found: self.version, expected: MECHANISM_VERSION });
        }
        if self.tie != "lex" {
            return Err(Error::domain(format!("unsupported tie order {:?}", self.tie)));
        }
        self.feasibility.validate(self.bidders.len())?;
        for b in &self.bidders {
            b.validate()?;
        }
        Ok(())
    }

    /// Per-bidder ironed virtual values at a bid profile.
    pub fn weights(&self, bids: &[f64]) -> Vec<f64> {
        self.bidders.iter().zip(bids).map(|(s, &b)| s.eval(b)).collect()
    }

    /// Winner set for given virtual-value weights (ascending bidder order).
    /// Single item: lexicographically-first argmax among weights ≥ 0.
    /// K-unit/matroid: greedy max-weight independent set over weights > 0
    /// (ties broken by lower index).
    pub fn select(&self, weights: &[f64]) -> Vec<usize> {
        match &self.feasibility {
            Feasibility::SingleItem => {
                let mut best: Option<usize> = None;
                for (i, &w) in weights.iter().enumerate() {
                    if w >= 0.0 && best.map_or(true, |b| w > weights[b]) {
                        best = Some(i);
                    }
                }
                best.into_iter().collect()
            }
            Feasibility::KUnit(k) => {
                let oracle = |set: &[usize]| set.len() <= *k;
                greedy_independent(weights, &oracle)
            }
            Feasibility::Matroid(m) => {
                let oracle = |set: &[usize]| m.is_independent(set);
                greedy_independent(weights, &oracle)
            }
        }
    }

    /// Run the auction: returns (winners ascending, payments per bidder).
    /// Each winner pays their critical value — the smallest bid at which
    /// they would still win, holding the other bids fixed.
    pub fn run(&self, bids: &[f64]) -> Result<(Vec<usize>, Vec<f64>)> {
        if bids.len() != self.n() {
            return Err(Error::domain(format!(
                "expected {} bids, got {}",
                self.n(),
                bids.len()
            )));
        }
        if let Some(b) = bids.iter().find(|b| !b.is_finite() || **b < 0.0) {
            return Err(Error::domain(format!("bid {b} is not a finite nonnegative real")));
        }
        let weights = self.weights(bids);
        let mut winners = self.select(&weights);
        winners.sort_unstable();
        let mut payments = vec![0.0; self.n()];
        for &i in &winners {
            payments[i] = self.critical_value(i, bids, &weights);
        }
        Ok((winners, payments))
    }

    /// Smallest step value of bidder `i` at which `i` still wins against
    /// the other bids. Allocation is monotone in the bid, so a linear scan
    /// over the (ascending) breakpoints finds the threshold.
    fn critical_value(&self, i: usize, bids: &[f64], weights: &[f64]) -> f64 {
        let mut w = weights.to_vec();
        for &(t, level) in &self.bidders[i].steps {
            if t > bids[i] {
                break;
            }
            w[i] = level;
            if self.select(&w).contains(&i) {
                return t;
            }
        }
        // The bidder wins at their current bid, so the scan cannot fall
        // through; reaching here would mean a non-monotone allocation.
        unreachable!("winner must win at some breakpoint at or below their bid")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("mechanism serializes")
    }

    pub fn from_json(s: &str) -> Result<Mechanism> {
        let m: Mechanism = serde_json::from_str(s).map_err(|e| Error::parse(e.to_string()))?;
        m.validate()?;
        Ok(m)
    }
}

/// Greedy max-weight independent set: consider bidders with strictly
/// positive weight in order of decreasing weight (ties by lower index),
/// keeping each if the set stays independent. Exact for matroids.
pub fn greedy_independent(weights: &[f64], oracle: &dyn Fn(&[usize]) -> bool) -> Vec<usize> {
    let mut order: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] > 0.0).collect();
    order.sort_by(|&a, &b| weights[b].partial_cmp(&weights[a]).unwrap().then(a.cmp(&b)));
    let mut set: Vec<usize> = Vec::new();
    for i in order {
        set.push(i);
        if !oracle(&set) {
            set.pop();
        }
    }
    set.sort_unstable();
    set
}
