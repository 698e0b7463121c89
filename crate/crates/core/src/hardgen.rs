//! Generators and machine validation for the sample-complexity lower-bound
//! instances.
//!
//! Each instance is a triple (D^b, D^ℓ, D^h): a point-mass base and two
//! nearby laws whose (ironed) virtual values straddle the base value v0 on
//! a critical interval [v2, v1). The `validate` report checks the meta
//! conditions (a)–(h) plus two derived quantities: the gap scale n·p·Δ
//! relative to ε·Opt, and the exact SKL against the partition bound.

use crate::curve::{self, revenue_curve, RevenueCurve};
use crate::dist::{ClosedFormDist, DiscreteDist, Dist};
use crate::error::{Error, Result};
use crate::info::{dptrick_bound, skl_discrete, skl_numeric};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Three-point laws on [1, H].
    #[serde(rename = "bounded_1h")]
    Bounded1H,
    /// The H = 10 instance rescaled to [0, 1].
    #[serde(rename = "bounded_01")]
    Bounded01,
    /// Continuous regular pair with density 1/(n(v−1)²).
    Regular,
    /// Discrete MHR pair on {0, …, log₂ n + 1}.
    MhrDiscrete,
    /// Continuous MHR pair (truncated exponential with an atom).
    MhrContinuous,
    /// k-unit / rank-k matroid three-point pair.
    MatroidKUnit,
}

#[derive(Debug, Clone)]
pub struct HardInstance {
    pub family: Family,
    pub n: u32,
    /// Unit demand rank (1 except for the matroid family).
    pub k: u32,
    /// Family perturbation parameter (ε, or ε0 for the MHR families).
    pub eps: f64,
    pub base: Dist,
    pub low: Dist,
    pub high: Dist,
    pub v0: f64,
    /// Upper end of the critical interval; may be +∞.
    pub v1: f64,
    pub v2: f64,
    /// Mass the critical interval must carry under both laws.
    pub p: f64,
    /// Measured virtual-value gap: min over [v2, v1) of
    /// min(v0 − φ̄^ℓ, φ̄^h − v0). Generators refuse nonpositive gaps.
    pub delta: f64,
    /// ε used by the density-ratio band of condition (f).
    pub eps_band: f64,
    low_curve: Option<RevenueCurve>,
    high_curve: Option<RevenueCurve>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Member {
    Low,
    High,
}

const TOL: f64 = 1e-9;

impl HardInstance {
    fn member(&self, m: Member) -> &Dist {
        match m {
            Member::Low => &self.low,
            Member::High => &self.high,
        }
    }

    /// Ironed virtual value of a member at a support/probe point. Discrete
    /// families use the ironed revenue curve; continuous families use the
    /// analytic tables.
    pub fn phibar(&self, m: Member, v: f64) -> f64 {
        match self.family {
            Family::Regular => {
                let eps = self.eps;
                let v2 = 1.0 + 1.0 / eps;
                match m {
                    Member::Low => 1.0,
                    Member::High => {
                        if v < v2 {
                            1.0
                        } else {
                            2.0
                        }
                    }
                }
            }
            Family::MhrContinuous => {
                let r = self.eps.sqrt();
                match m {
                    Member::Low => {
                        if v >= self.v1 {
                            self.v1
                        } else {
                            v - 1.0
                        }
                    }
                    Member::High => {
                        if v >= self.v1 {
                            self.v1
                        } else if v >= self.v2 {
                            v - 1.0 / (1.0 + 3.0 * r)
                        } else {
                            v - 1.0
                        }
                    }
                }
            }
            _ => {
                let curve = match m {
                    Member::Low => self.low_curve.as_ref(),
                    Member::High => self.high_curve.as_ref(),
                }
                .expect("discrete families carry curves");
                curve
                    .phibar_at_value(v)
                    .expect("probes of discrete families are support values")
            }
        }
    }

    /// Density (or atom-mass) ratio high/low at a probe point.
    fn ratio(&self, v: f64) -> f64 {
        match (&self.low, &self.high) {
            (Dist::Discrete(l), Dist::Discrete(h)) => h.mass_at(v) / l.mass_at(v),
            (Dist::ClosedForm(l), Dist::ClosedForm(h)) => {
                let (dl, dh) = (l.density(v), h.density(v));
                if dl > 0.0 || dh > 0.0 {
                    dh / dl
                } else {
                    // Compare atoms instead.
                    let al: f64 = l.atoms().iter().filter(|a| a.0 == v).map(|a| a.1).sum();
                    let ah: f64 = h.atoms().iter().filter(|a| a.0 == v).map(|a| a.1).sum();
                    ah / al
                }
            }
            _ => f64::NAN,
        }
    }

    /// Probe points inside the critical interval [v2, v1).
    fn probes_critical(&self) -> Vec<f64> {
        match &self.low {
            Dist::Discrete(l) => l
                .values()
                .filter(|&v| v >= self.v2 && v < self.v1)
                .collect(),
            Dist::ClosedForm(_) => {
                if self.v1.is_finite() {
                    let (a, b) = (self.v2, self.v1);
                    (0..128).map(|i| a + (b - a) * i as f64 / 128.0).collect()
                } else {
                    // Map [v2, ∞) through v2 + t/(1−t) up to t = 63/64.
                    (0..64)
                        .map(|i| {
                            let t = i as f64 / 64.0;
                            self.v2 + t / (1.0 - t)
                        })
                        .collect()
                }
            }
        }
    }

    /// Probe points strictly below v2 (positive support only).
    fn probes_below(&self) -> Vec<f64> {
        match &self.low {
            Dist::Discrete(l) => l.values().filter(|&v| v < self.v2).collect(),
            Dist::ClosedForm(c) => {
                let (lo, _) = c.support();
                (0..64)
                    .map(|i| lo + (self.v2 - lo) * i as f64 / 64.0)
                    .filter(|&v| v < self.v2)
                    .collect()
            }
        }
    }

    /// Probe points for SKL/ratio work on the whole critical region
    /// [v2, v1] *including* a finite v1 (atoms there matter for the
    /// partition bound).
    fn probes_critical_closed(&self) -> Vec<f64> {
        let mut ps = self.probes_critical();
        if self.v1.is_finite() {
            ps.push(self.v1);
        }
        ps
    }

    /// Mass of the closed critical region [v2, v1] under a member.
    fn critical_mass(&self, m: Member) -> f64 {
        let d = self.member(m);
        if self.v1.is_finite() {
            d.pr_ge(self.v2) - d.quantile(self.v1)
        } else {
            d.pr_ge(self.v2)
        }
    }

    /// Exact (discrete) or numeric (continuous) per-coordinate SKL of the
    /// pair.
    pub fn skl(&self) -> Result<f64> {
        match (&self.low, &self.high) {
            (Dist::Discrete(l), Dist::Discrete(h)) => Ok(skl_discrete(l, h)),
            (Dist::ClosedForm(l), Dist::ClosedForm(h)) => skl_numeric(l, h),
            _ => Err(Error::domain("mixed member kinds")),
        }
    }

    /// Revenue curves of the two members (continuous members are viewed on
    /// the default quantile grid).
    pub fn curves(&self) -> Result<(RevenueCurve, RevenueCurve)> {
        let l = self.low.discretize(crate::dist::DEFAULT_GRID, 1e-9)?;
        let h = self.high.discretize(crate::dist::DEFAULT_GRID, 1e-9)?;
        Ok((revenue_curve(&l), revenue_curve(&h)))
    }

    pub fn validate(&self) -> ValidationReport {
        let mut conditions = Vec::new();

        // (a) the base is a point mass at v0.
        let (a_pass, a_meas) = match &self.base {
            Dist::Discrete(d) => (d.len() == 1 && d.min_value() == self.v0, d.min_value()),
            Dist::ClosedForm(ClosedFormDist::PointMass { v }) => (*v == self.v0, *v),
            _ => (false, f64::NAN),
        };
        conditions.push(Condition::new("a_base_point_mass", a_pass, a_meas,
            "base distribution is a point mass at v0"));

        // (b) Pr[v ≥ v2] ≤ 2k/n under both members (relaxed threshold).
        let b_meas = self
            .member(Member::Low)
            .pr_ge(self.v2)
            .max(self.member(Member::High).pr_ge(self.v2));
        let b_thresh = 2.0 * self.k as f64 / self.n as f64;
        conditions.push(Condition::new("b_tail_mass_small", b_meas <= b_thresh + TOL, b_meas,
            "Pr[v >= v2] <= 2k/n under both members"));

        // (c) Pr[v1 ≥ v ≥ v2] ≥ p under both members.
        let c_meas = self
            .critical_mass(Member::Low)
            .min(self.critical_mass(Member::High));
        conditions.push(Condition::new("c_critical_mass", c_meas >= self.p - TOL, c_meas,
            "Pr[v1 >= v >= v2] >= p under both members"));

        // (d) ironed virtual values straddle v0 by the recorded gap on
        // [v2, v1).
        let mut d_meas = f64::INFINITY;
        for v in self.probes_critical() {
            let gl = self.v0 - self.phibar(Member::Low, v);
            let gh = self.phibar(Member::High, v) - self.v0;
            d_meas = d_meas.min(gl).min(gh);
        }
        conditions.push(Condition::new(
            "d_virtual_value_gap",
            self.delta > 0.0 && d_meas >= self.delta - TOL,
            d_meas,
            "phibar_low + delta <= v0 <= phibar_high - delta on [v2, v1)",
        ));

        // (e) virtual values at most v0 below v2.
        let mut e_meas = f64::NEG_INFINITY;
        for v in self.probes_below() {
            e_meas = e_meas
                .max(self.phibar(Member::Low, v))
                .max(self.phibar(Member::High, v));
        }
        conditions.push(Condition::new("e_no_temptation_below", e_meas <= self.v0 + TOL, e_meas,
            "phibar <= v0 below v2 for both members"));

        // (f) density ratio within the relaxed band on [v2, v1).
        let band_lo = (0.5_f64).sqrt() * (1.0 - self.eps_band);
        let band_hi = (2.0_f64).sqrt() * (1.0 + self.eps_band);
        let mut f_lo = f64::INFINITY;
        let mut f_hi = f64::NEG_INFINITY;
        for v in self.probes_critical() {
            let r = self.ratio(v);
            if r.is_finite() && r > 0.0 {
                f_lo = f_lo.min(r);
                f_hi = f_hi.max(r);
            }
        }
        conditions.push(Condition::new(
            "f_density_ratio_band",
            f_lo >= band_lo - TOL && f_hi <= band_hi + TOL,
            f_hi,
            "high/low density ratio within [2^-1/2 (1-eps), 2^1/2 (1+eps)] on [v2, v1)",
        ));

        // (g) the high member is regular.
        let g_pass = match &self.high {
            Dist::Discrete(h) => curve::is_regular(h),
            Dist::ClosedForm(_) => {
                // Analytic φ̄ nondecreasing along the probe grid.
                let mut ps = self.probes_below();
                ps.extend(self.probes_critical_closed());
                ps.windows(2)
                    .all(|w| self.phibar(Member::High, w[1]) >= self.phibar(Member::High, w[0]) - TOL)
            }
        };
        conditions.push(Condition::new("g_high_regular", g_pass, f64::NAN,
            "the high member is regular"));

        // (h) v1 = ∞, or the support is capped at v1 with an atom there.
        let h_pass = if self.v1.is_infinite() {
            true
        } else {
            match &self.high {
                Dist::Discrete(h) => h.max_value() == self.v1,
                Dist::ClosedForm(c) => c.atoms().iter().any(|a| a.0 == self.v1),
            }
        };
        conditions.push(Condition::new("h_upper_bound", h_pass, self.v1,
            "v1 is infinite or the support ends in an atom at v1"));

        // (i) informational: n·p·Δ relative to ε·Opt(low member).
        let opt_low = self
            .low
            .discretize(crate::dist::DEFAULT_GRID, 1e-9)
            .map(|d| crate::eval::single_bidder_opt_bruteforce(&d).1)
            .unwrap_or(f64::NAN);
        let i_meas = self.n as f64 * self.p * self.delta / (self.eps * opt_low);
        conditions.push(Condition::new("i_gap_scale", true, i_meas,
            "informational: n*p*delta / (eps * Opt(low))"));

        // (j) exact SKL at most the partition bound with measured ratio
        // deviations.
        let (j_pass, j_meas) = match self.skl() {
            Ok(skl) => {
                let mut dev = 0.0_f64;
                for v in self.probes_critical_closed() {
                    let r = self.ratio(v);
                    if r.is_finite() && r > 0.0 {
                        dev = dev.max(r - 1.0).max(1.0 / r - 1.0);
                    }
                }
                let mass2 = self.critical_mass(Member::Low);
                let bound = dptrick_bound(&[(1.0 - mass2, 0.0), (mass2, dev)])
                    .unwrap_or(f64::NAN);
                (skl.is_finite() && skl <= bound + TOL, skl)
            }
            Err(_) => (false, f64::NAN),
        };
        conditions.push(Condition::new("j_skl_partition_bound", j_pass, j_meas,
            "exact SKL <= partition bound with measured ratio deviations"));

        let all_pass = conditions
            .iter()
            .filter(|c| c.name != "i_gap_scale")
            .all(|c| c.pass);
        ValidationReport { conditions, all_pass }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Condition {
    pub name: &'static str,
    pub pass: bool,
    pub measured: f64,
    pub description: &'static str,
}

impl Condition {
    fn new(name: &'static str, pass: bool, measured: f64, description: &'static str) -> Self {
        Condition { name, pass, measured, description }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub conditions: Vec<Condition>,
    pub all_pass: bool,
}

impl ValidationReport {
    pub fn condition(&self, name: &str) -> &Condition {
        self.conditions
            .iter()
            .find(|c| c.name == name)
            .expect("known condition name")
    }
}

/// Measure the condition-(d) gap of a candidate instance and store it as Δ,
/// refusing parameter regimes where the interval degenerates.
fn finalize(mut h: HardInstance) -> Result<HardInstance> {
    if let (Dist::Discrete(l), Dist::Discrete(hh)) = (&h.low, &h.high) {
        h.low_curve = Some(revenue_curve(l));
        h.high_curve = Some(revenue_curve(hh));
    }
    let mut gap = f64::INFINITY;
    for v in h.probes_critical() {
        gap = gap
            .min(h.v0 - h.phibar(Member::Low, v))
            .min(h.phibar(Member::High, v) - h.v0);
    }
    if !(gap > 0.0) {
        return Err(Error::domain(format!(
            "virtual-value gap nonpositive ({gap:.3e}) for {:?} at n={}, eps={}",
            h.family, h.n, h.eps
        )));
    }
    h.delta = gap;
    Ok(h)
}

/// The [1, H]-bounded three-point pair.
pub fn gen_bounded_1h(n: u32, h: f64, eps: f64) -> Result<HardInstance> {
    if n < 2 || !(h > 1.0) || !(eps > 0.0 && eps < 0.5) {
        return Err(Error::domain("bounded family needs n >= 2, H > 1, eps in (0, 1/2)"));
    }
    let nf = n as f64;
    let w1 = 1.0 + 1.0 / nf - 1.0 / (nf * h);
    let v2 = (h + 1.0) / 2.0;
    let p_bulk = 1.0 - 2.0 / (nf * h);
    let m_lo = (1.0 - eps) / (nf * h);
    let m_hi = (1.0 + eps) / (nf * h);
    let low = DiscreteDist::new(vec![(w1, p_bulk), (v2, m_lo), (h, m_hi)])?;
    let high = DiscreteDist::new(vec![(w1, p_bulk), (v2, m_hi), (h, m_lo)])?;
    finalize(HardInstance {
        family: Family::Bounded1H,
        n,
        k: 1,
        eps,
        base: Dist::point(1.0)?,
        low: low.into(),
        high: high.into(),
        v0: 1.0,
        v1: h,
        v2,
        p: 2.0 / (nf * h),
        delta: f64::NAN,
        eps_band: eps,
        low_curve: None,
        high_curve: None,
    })
}

/// The [0, 1]-bounded pair: the H = 10 instance with all values scaled by
/// 1/10 (masses, and hence the SKL, are untouched).
pub fn gen_bounded_01(n: u32, eps: f64) -> Result<HardInstance> {
    let base = gen_bounded_1h(n, 10.0, eps)?;
    let scale = |d: &Dist| -> Result<Dist> {
        let disc = d.as_discrete().expect("bounded family is discrete");
        Ok(Dist::Discrete(DiscreteDist::new(
            disc.points().iter().map(|&(v, m)| (v / 10.0, m)).collect(),
        )?))
    };
    finalize(HardInstance {
        family: Family::Bounded01,
        n,
        k: 1,
        eps,
        base: Dist::point(0.1)?,
        low: scale(&base.low)?,
        high: scale(&base.high)?,
        v0: 0.1,
        v1: 1.0,
        v2: base.v2 / 10.0,
        p: base.p,
        delta: f64::NAN,
        eps_band: eps,
        low_curve: None,
        high_curve: None,
    })
}

/// The continuous regular pair.
pub fn gen_regular(n: u32, eps: f64) -> Result<HardInstance> {
    if n < 2 || !(eps > 0.0 && eps < 0.5) {
        return Err(Error::domain("regular family needs n >= 2, eps in (0, 1/2)"));
    }
    let low = ClosedFormDist::RegularLow { n };
    let high = ClosedFormDist::RegularHigh { n, eps };
    low.validate()?;
    high.validate()?;
    finalize(HardInstance {
        family: Family::Regular,
        n,
        k: 1,
        eps,
        base: Dist::point(1.5)?,
        low: low.into(),
        high: high.into(),
        v0: 1.5,
        v1: f64::INFINITY,
        v2: 1.0 + 1.0 / eps,
        p: eps / n as f64,
        delta: f64::NAN,
        eps_band: eps,
        low_curve: None,
        high_curve: None,
    })
}

/// The discrete MHR pair on {0, …, log₂ n + 1}. Requires n to be a power
/// of two; the mass perturbation is ε0 = ε·log₂ n.
pub fn gen_mhr_discrete(n: u32, eps: f64) -> Result<HardInstance> {
    if n < 4 || !n.is_power_of_two() {
        return Err(Error::domain("discrete MHR family needs n a power of two, n >= 4"));
    }
    let log_n = n.trailing_zeros() as f64;
    let eps0 = eps * log_n;
    if !(eps0 > 0.0 && eps0 < 0.5) {
        return Err(Error::domain(format!(
            "discrete MHR family needs eps0 = eps*log2(n) in (0, 1/2), got {eps0}"
        )));
    }
    let nf = n as f64;
    let mut low_pts = Vec::new();
    let mut high_pts = Vec::new();
    for v in 0..(log_n as u32) {
        let m = (2.0_f64).powi(-(v as i32) - 1);
        low_pts.push((v as f64, m));
        high_pts.push((v as f64, m));
    }
    low_pts.push((log_n, 1.0 / (2.0 * nf)));
    low_pts.push((log_n + 1.0, 1.0 / (2.0 * nf)));
    high_pts.push((log_n, (1.0 + eps0) / (2.0 * nf)));
    high_pts.push((log_n + 1.0, (1.0 - eps0) / (2.0 * nf)));
    finalize(HardInstance {
        family: Family::MhrDiscrete,
        n,
        k: 1,
        eps: eps0,
        base: Dist::point(log_n - 1.0 + eps0)?,
        low: Dist::Discrete(DiscreteDist::new(low_pts)?),
        high: Dist::Discrete(DiscreteDist::new(high_pts)?),
        v0: log_n - 1.0 + eps0,
        v1: log_n + 1.0,
        v2: log_n,
        p: 1.0 / nf,
        delta: f64::NAN,
        eps_band: eps0,
        low_curve: None,
        high_curve: None,
    })
}

/// The continuous MHR pair with perturbation ε0 given directly.
pub fn gen_mhr_continuous_from_eps0(n: u32, eps0: f64) -> Result<HardInstance> {
    if n < 4 || !(eps0 > 0.0 && eps0 < 1.0) {
        return Err(Error::domain("continuous MHR family needs n >= 4, eps0 in (0,1)"));
    }
    let nf = n as f64;
    let r = eps0.sqrt();
    let v1 = nf.ln();
    let v2 = (nf / (1.0 + r)).ln();
    let v0 = v1 - 1.0 + r;
    let low = ClosedFormDist::CmhrLow { n };
    let high = ClosedFormDist::CmhrHigh { n, eps0 };
    low.validate()?;
    high.validate()?;
    finalize(HardInstance {
        family: Family::MhrContinuous,
        n,
        k: 1,
        eps: eps0,
        base: Dist::point(v0)?,
        low: low.into(),
        high: high.into(),
        v0,
        v1,
        v2,
        p: 2.0 * r / nf,
        delta: f64::NAN,
        eps_band: r,
        low_curve: None,
        high_curve: None,
    })
}

/// The continuous MHR pair parameterized like the discrete one:
/// ε0 = ε·ln n.
pub fn gen_mhr_continuous(n: u32, eps: f64) -> Result<HardInstance> {
    gen_mhr_continuous_from_eps0(n, eps * (n as f64).ln())
}

/// The single-bidder MHR two-point pair {1, 2} with masses (1±4ε)/2,
/// together with its exact SKL.
pub fn gen_single_mhr_two_point(eps: f64) -> Result<(DiscreteDist, DiscreteDist, f64)> {
    if !(eps > 0.0 && eps < 0.25) {
        return Err(Error::domain("two-point pair needs eps in (0, 1/4)"));
    }
    let d1 = DiscreteDist::new(vec![(1.0, (1.0 + 4.0 * eps) / 2.0), (2.0, (1.0 - 4.0 * eps) / 2.0)])?;
    let d2 = DiscreteDist::new(vec![(1.0, (1.0 - 4.0 * eps) / 2.0), (2.0, (1.0 + 4.0 * eps) / 2.0)])?;
    let skl = 8.0 * eps * ((1.0 + 4.0 * eps) / (1.0 - 4.0 * eps)).ln();
    Ok((d1, d2, skl))
}

/// The k-unit/matroid three-point pair (n ≥ 2k).
pub fn gen_matroid_kunit(n: u32, k: u32, eps: f64) -> Result<HardInstance> {
    if k < 1 || n < 2 * k || !(eps > 0.0 && eps < 0.5) {
        return Err(Error::domain("matroid family needs k >= 1, n >= 2k, eps in (0, 1/2)"));
    }
    let (nf, kf) = (n as f64, k as f64);
    let v3 = 0.5 + kf / (8.0 * nf);
    let v2 = 0.75;
    let v1 = 1.0;
    let bulk = 1.0 - kf / (2.0 * nf);
    let m_lo = (kf - eps) / (4.0 * nf);
    let m_hi = (kf + eps) / (4.0 * nf);
    let low = DiscreteDist::new(vec![(v3, bulk), (v2, m_lo), (v1, m_hi)])?;
    let high = DiscreteDist::new(vec![(v3, bulk), (v2, m_hi), (v1, m_lo)])?;
    let inst = finalize(HardInstance {
        family: Family::MatroidKUnit,
        n,
        k,
        eps,
        base: Dist::point(0.5)?,
        low: low.into(),
        high: high.into(),
        v0: 0.5,
        v1,
        v2,
        p: kf / (2.0 * nf),
        delta: f64::NAN,
        eps_band: eps,
        low_curve: None,
        high_curve: None,
    })?;

    // Generator postconditions: the closed forms of the critical virtual
    // values, exact to 1e−12.
    let phi_h_v2 = (kf + 2.0 * eps) / (2.0 * (kf + eps));
    debug_assert!((inst.phibar(Member::High, v2) - phi_h_v2).abs() < 1e-12);
    let ironed_low = (4.0 * nf - kf - 2.0 * eps) / (2.0 * (4.0 * nf - kf - eps));
    debug_assert!((inst.phibar(Member::Low, v2) - ironed_low).abs() < 1e-12);
    Ok(inst)
}
