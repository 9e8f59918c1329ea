//! Hypothesis tests, agreement, regression and the cohort longevity table.
//!
//! p-values come from the exact Student t and F distributions, both reduced
//! to the regularized incomplete beta function, which is evaluated by its
//! continued fraction with the modified Lentz method.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::flips::AgentClass;
use crate::ingest::{ProfileSnapshot, Timestamp};
use crate::{CoreError, CoreResult};

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if libm::fabs(d) < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=500 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if libm::fabs(d) < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if libm::fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if libm::fabs(d) < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if libm::fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if libm::fabs(del - 1.0) < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = libm::lgamma(a + b) - libm::lgamma(a) - libm::lgamma(b) + a * libm::log(x) + b * libm::log1p(-x);
    let front = libm::exp(ln_front);
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b
    }
}

/// Two-sided tail probability `P(|T| >= |t|)` for Student's t with `df`
/// degrees of freedom.
pub fn student_t_two_sided(t: f64, df: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    if t.is_infinite() {
        return 0.0;
    }
    incomplete_beta(df / 2.0, 0.5, df / (df + t * t)).clamp(0.0, 1.0)
}

/// Upper tail `P(F >= f)` of the F distribution.
pub fn f_upper_tail(f: f64, d1: f64, d2: f64) -> f64 {
    if f <= 0.0 {
        return 1.0;
    }
    if f.is_infinite() {
        return 0.0;
    }
    incomplete_beta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f)).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTest {
    pub t: f64,
    pub df: f64,
    pub p_value: f64,
}

fn check_two_samples(a: &[f64], b: &[f64]) -> CoreResult<(f64, f64)> {
    if a.len() < 2 || b.len() < 2 {
        return Err(CoreError::Degenerate("sample size below 2"));
    }
    let (va, vb) = (sample_variance(a), sample_variance(b));
    if va == 0.0 && vb == 0.0 {
        return Err(CoreError::Degenerate("zero variance in both samples"));
    }
    Ok((va, vb))
}

/// Unequal-variance t-test with Welch-Satterthwaite degrees of freedom.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> CoreResult<TTest> {
    let (va, vb) = check_two_samples(a, b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (sa, sb) = (va / na, vb / nb);
    let t = (mean(a) - mean(b)) / libm::sqrt(sa + sb);
    let df = (sa + sb) * (sa + sb) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    Ok(TTest { t, df, p_value: student_t_two_sided(t, df) })
}

/// Pooled-variance (Student) t-test.
pub fn pooled_t_test(a: &[f64], b: &[f64]) -> CoreResult<TTest> {
    let (va, vb) = check_two_samples(a, b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let df = na + nb - 2.0;
    let sp2 = ((na - 1.0) * va + (nb - 1.0) * vb) / df;
    let t = (mean(a) - mean(b)) / libm::sqrt(sp2 * (1.0 / na + 1.0 / nb));
    Ok(TTest { t, df, p_value: student_t_two_sided(t, df) })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anova {
    pub f: f64,
    pub df_between: f64,
    pub df_within: f64,
    pub p_value: f64,
}

pub fn one_way_anova<S: AsRef<[f64]>>(groups: &[S]) -> CoreResult<Anova> {
    if groups.len() < 2 {
        return Err(CoreError::Degenerate("fewer than two groups"));
    }
    if groups.iter().any(|g| g.as_ref().len() < 2) {
        return Err(CoreError::Degenerate("group with fewer than two points"));
    }
    let k = groups.len() as f64;
    let n: usize = groups.iter().map(|g| g.as_ref().len()).sum();
    let grand = groups.iter().flat_map(|g| g.as_ref().iter()).sum::<f64>() / n as f64;
    let mut ss_between = 0.0;
    let mut ss_within = 0.0;
    for g in groups {
        let g = g.as_ref();
        let m = mean(g);
        ss_between += g.len() as f64 * (m - grand) * (m - grand);
        ss_within += g.iter().map(|x| (x - m) * (x - m)).sum::<f64>();
    }
    let df_between = k - 1.0;
    let df_within = n as f64 - k;
    let ms_between = ss_between / df_between;
    let ms_within = ss_within / df_within;
    if ms_within == 0.0 {
        if ms_between == 0.0 {
            return Err(CoreError::Degenerate("all observations equal"));
        }
        return Ok(Anova { f: f64::INFINITY, df_between, df_within, p_value: 0.0 });
    }
    let f = ms_between / ms_within;
    Ok(Anova { f, df_between, df_within, p_value: f_upper_tail(f, df_between, df_within) })
}

/// Cohen's kappa for two annotators. When chance agreement is total the
/// annotators used one shared label throughout and kappa is taken as 1.
pub fn cohen_kappa<T: Ord>(labels_a: &[T], labels_b: &[T]) -> CoreResult<f64> {
    if labels_a.is_empty() {
        return Err(CoreError::Empty("annotations"));
    }
    if labels_a.len() != labels_b.len() {
        return Err(CoreError::Degenerate("annotation lists differ in length"));
    }
    let n = labels_a.len() as f64;
    let mut marg_a: BTreeMap<&T, usize> = BTreeMap::new();
    let mut marg_b: BTreeMap<&T, usize> = BTreeMap::new();
    let mut agree = 0usize;
    for (a, b) in labels_a.iter().zip(labels_b) {
        *marg_a.entry(a).or_default() += 1;
        *marg_b.entry(b).or_default() += 1;
        if a == b {
            agree += 1;
        }
    }
    let p_o = agree as f64 / n;
    let p_e: f64 = marg_a
        .iter()
        .map(|(label, &ca)| ca as f64 * marg_b.get(label).copied().unwrap_or(0) as f64)
        .sum::<f64>()
        / (n * n);
    if p_e >= 1.0 {
        return Ok(1.0);
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
}

impl LinearFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// Ordinary least squares.
pub fn linear_fit(points: &[(f64, f64)]) -> CoreResult<LinearFit> {
    if points.len() < 2 {
        return Err(CoreError::Degenerate("fewer than two points"));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return Err(CoreError::Degenerate("all x equal"));
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Ok(LinearFit { slope, intercept: my - slope * mx })
}

/// Class encoding on the x axis of the longevity regression.
pub fn class_position(class: AgentClass) -> f64 {
    match class {
        AgentClass::Cyborg => 0.0,
        AgentClass::Human => 1.0,
        AgentClass::Bot => 2.0,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CohortRow {
    pub class: AgentClass,
    pub n: usize,
    pub n_suspended: usize,
    /// `None` when the class is empty.
    pub prop_suspended: Option<f64>,
    /// Non-suspended accounts contributing to the lifespan columns.
    pub n_alive: usize,
    pub mean_lifespan_days: Option<f64>,
    /// Sample standard deviation; needs two alive accounts.
    pub stddev_lifespan_days: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CohortReport {
    /// Bot, Cyborg, Human.
    pub rows: Vec<CohortRow>,
    /// ANOVA over alive lifespans; `Err` text when it cannot be computed.
    pub anova: Result<Anova, String>,
    /// OLS through `(class_position, mean lifespan)`.
    pub fit: Result<LinearFit, String>,
    /// Alive lifespans per class, in row order.
    pub lifespans: Vec<Vec<f64>>,
}

/// Whole days from account creation to `analysis_date`, never negative.
pub fn lifespan_days(profile: &ProfileSnapshot, analysis_date: Timestamp) -> i64 {
    analysis_date.days_since(profile.account_created_at).max(0)
}

/// Suspension share over each full class and lifespan statistics over the
/// accounts still alive. Accounts whose suspension status is unknown count
/// as alive. Agents missing from `classes` are ignored.
pub fn cohort_report(
    profiles: &BTreeMap<String, ProfileSnapshot>,
    classes: &BTreeMap<String, AgentClass>,
    analysis_date: Timestamp,
) -> CohortReport {
    let order = AgentClass::ALL;
    let mut members: Vec<Vec<&ProfileSnapshot>> = alloc::vec![Vec::new(); order.len()];
    for (agent, profile) in profiles {
        if let Some(class) = classes.get(agent) {
            let slot = order.iter().position(|c| c == class).expect("class in order");
            members[slot].push(profile);
        }
    }
    let mut rows = Vec::new();
    let mut lifespans = Vec::new();
    for (class, group) in order.iter().zip(&members) {
        let n = group.len();
        let n_suspended = group.iter().filter(|p| p.is_suspended == Some(true)).count();
        let alive: Vec<f64> = group
            .iter()
            .filter(|p| p.is_suspended != Some(true))
            .map(|p| lifespan_days(p, analysis_date) as f64)
            .collect();
        rows.push(CohortRow {
            class: *class,
            n,
            n_suspended,
            prop_suspended: (n > 0).then(|| n_suspended as f64 / n as f64),
            n_alive: alive.len(),
            mean_lifespan_days: (!alive.is_empty()).then(|| mean(&alive)),
            stddev_lifespan_days: (alive.len() >= 2).then(|| libm::sqrt(sample_variance(&alive))),
        });
        lifespans.push(alive);
    }
    let anova = one_way_anova(&lifespans).map_err(|e| alloc::format!("{e}"));
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.mean_lifespan_days.map(|m| (class_position(r.class), m)))
        .collect();
    let fit = linear_fit(&points).map_err(|e| alloc::format!("{e}"));
    CohortReport { rows, anova, fit, lifespans }
}
