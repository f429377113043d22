//! Hypothesis tests used to validate class separation and RAT differences.
//!
//! Tail probabilities come from the regularized incomplete gamma
//! (chi-square) and beta (Student t) functions.

use serde::{Deserialize, Serialize};
use statrs::function::{beta::beta_reg, erf::erfc, gamma::gamma_ur};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TestMethod {
    KruskalWallis,
    MannWhitneyU,
    PearsonR,
    PooledT,
    WelchT,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub method: TestMethod,
    pub statistic: f64,
    pub df: Option<f64>,
    pub p_value: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub p_adjusted: Option<f64>,
}

impl TestResult {
    fn new(method: TestMethod, statistic: f64, df: Option<f64>, p_value: f64) -> Self {
        Self {
            method,
            statistic,
            df,
            p_value: p_value.clamp(0.0, 1.0),
            p_adjusted: None,
        }
    }
}

/// Upper tail of the chi-square distribution.
pub fn chi_square_sf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    gamma_ur(df / 2.0, x / 2.0)
}

/// Two-sided tail `P(|T| >= |t|)` of Student's t.
pub fn student_t_two_sided(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    beta_reg(df / 2.0, 0.5, df / (df + t * t))
}

/// Upper tail of the standard normal.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

/// Midranks (1-based) of the pooled values plus the size of every tie group.
pub fn midranks(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i..j (0-based) share rank mean((i+1)..=j)
        let r = (i + 1 + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            ranks[idx] = r;
        }
        if j - i > 1 {
            ties.push(j - i);
        }
        i = j;
    }
    (ranks, ties)
}

fn tie_sum(ties: &[usize]) -> f64 {
    ties.iter()
        .map(|&t| {
            let t = t as f64;
            t * t * t - t
        })
        .sum()
}

fn check_finite(values: &[f64]) -> Result<()> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite observation".into()));
    }
    Ok(())
}

/// Kruskal-Wallis H test with midranks and tie correction.
pub fn kruskal_wallis(groups: &[&[f64]]) -> Result<TestResult> {
    if groups.len() < 2 {
        return Err(Error::InvalidArgument(
            "Kruskal-Wallis needs at least 2 groups".into(),
        ));
    }
    if groups.iter().any(|g| g.is_empty()) {
        return Err(Error::EmptyInput {
            what: "Kruskal-Wallis group",
        });
    }
    let pooled: Vec<f64> = groups.iter().flat_map(|g| g.iter().copied()).collect();
    check_finite(&pooled)?;
    let n = pooled.len() as f64;
    if pooled.len() < 3 {
        return Err(Error::InvalidArgument(
            "Kruskal-Wallis needs at least 3 observations".into(),
        ));
    }
    let df = (groups.len() - 1) as f64;
    let (ranks, ties) = midranks(&pooled);
    let correction = 1.0 - tie_sum(&ties) / (n * n * n - n);
    if correction <= 0.0 {
        return Ok(TestResult::new(
            TestMethod::KruskalWallis,
            0.0,
            Some(df),
            1.0,
        ));
    }
    let mut offset = 0;
    let mut acc = 0.0;
    for g in groups {
        let r: f64 = ranks[offset..offset + g.len()].iter().sum();
        acc += r * r / g.len() as f64;
        offset += g.len();
    }
    let h = ((12.0 / (n * (n + 1.0)) * acc - 3.0 * (n + 1.0)) / correction).max(0.0);
    Ok(TestResult::new(
        TestMethod::KruskalWallis,
        h,
        Some(df),
        chi_square_sf(h, df),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MannWhitneyOptions {
    pub continuity_correction: bool,
}

impl Default for MannWhitneyOptions {
    fn default() -> Self {
        Self {
            continuity_correction: true,
        }
    }
}

/// Full Mann-Whitney computation: `U_a`, `min(U_a, U_b)`, the standardized z
/// (signed, `U_a` relative to its mean) and the two-sided p.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MannWhitneyDetail {
    pub u_a: f64,
    pub u: f64,
    pub z: f64,
    pub p_value: f64,
}

pub fn mann_whitney_detail(
    a: &[f64],
    b: &[f64],
    opts: MannWhitneyOptions,
) -> Result<MannWhitneyDetail> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput {
            what: "Mann-Whitney sample",
        });
    }
    check_finite(a)?;
    check_finite(b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let n = na + nb;
    let (ranks, ties) = midranks(&pooled);
    let r_a: f64 = ranks[..a.len()].iter().sum();
    let u_a = r_a - na * (na + 1.0) / 2.0;
    let u_b = na * nb - u_a;
    let u = u_a.min(u_b);
    let mean = na * nb / 2.0;
    let var = na * nb / 12.0 * ((n + 1.0) - tie_sum(&ties) / (n * (n - 1.0)));
    if var <= 0.0 {
        return Ok(MannWhitneyDetail {
            u_a,
            u,
            z: 0.0,
            p_value: 1.0,
        });
    }
    let sd = var.sqrt();
    let dev = u_a - mean;
    let z = dev / sd;
    let cc = if opts.continuity_correction { 0.5 } else { 0.0 };
    let z_abs = (dev.abs() - cc) / sd;
    let p = (2.0 * normal_sf(z_abs)).clamp(0.0, 1.0);
    Ok(MannWhitneyDetail {
        u_a,
        u,
        z,
        p_value: p,
    })
}

/// Two-sided Mann-Whitney U (normal approximation, tie-corrected variance,
/// continuity correction of 0.5). The statistic is `min(U_a, U_b)`.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<TestResult> {
    mann_whitney_u_with(a, b, MannWhitneyOptions::default())
}

pub fn mann_whitney_u_with(a: &[f64], b: &[f64], opts: MannWhitneyOptions) -> Result<TestResult> {
    let d = mann_whitney_detail(a, b, opts)?;
    Ok(TestResult::new(
        TestMethod::MannWhitneyU,
        d.u,
        None,
        d.p_value,
    ))
}

/// Multiplies each p-value by the number of comparisons, capped at 1.
pub fn bonferroni(p_values: &[f64]) -> Result<Vec<f64>> {
    if let Some(p) = p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidArgument(format!(
            "p-value {p} outside [0, 1]"
        )));
    }
    let m = p_values.len() as f64;
    Ok(p_values.iter().map(|p| (p * m).min(1.0)).collect())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sum of squared deviations from the mean.
fn sum_sq_dev(v: &[f64], m: f64) -> f64 {
    v.iter().map(|x| (x - m) * (x - m)).sum()
}

/// Pearson correlation with a two-sided Student-t p-value (df = n - 2).
pub fn pearson(x: &[f64], y: &[f64]) -> Result<TestResult> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 3 {
        return Err(Error::InvalidArgument(
            "Pearson needs at least 3 pairs".into(),
        ));
    }
    check_finite(x)?;
    check_finite(y)?;
    let (mx, my) = (mean(x), mean(y));
    let sxx = sum_sq_dev(x, mx);
    let syy = sum_sq_dev(y, my);
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate(
            "zero variance in correlation input".into(),
        ));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    let df = (x.len() - 2) as f64;
    let p = if r.abs() == 1.0 {
        0.0
    } else {
        let t = r * (df / (1.0 - r * r)).sqrt();
        student_t_two_sided(t, df)
    };
    Ok(TestResult::new(TestMethod::PearsonR, r, Some(df), p))
}

fn two_sample_check(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InvalidArgument(
            "t-test needs at least 2 observations per group".into(),
        ));
    }
    check_finite(a)?;
    check_finite(b)
}

/// Student's two-sample t-test with pooled variance, df = n_a + n_b - 2.
pub fn pooled_t_test(a: &[f64], b: &[f64]) -> Result<TestResult> {
    two_sample_check(a, b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, mb) = (mean(a), mean(b));
    let df = na + nb - 2.0;
    let pooled_var = (sum_sq_dev(a, ma) + sum_sq_dev(b, mb)) / df;
    if pooled_var == 0.0 {
        if ma == mb {
            return Ok(TestResult::new(TestMethod::PooledT, 0.0, Some(df), 1.0));
        }
        return Err(Error::Degenerate(
            "zero pooled variance with unequal group means".into(),
        ));
    }
    let t = (ma - mb) / (pooled_var * (1.0 / na + 1.0 / nb)).sqrt();
    Ok(TestResult::new(
        TestMethod::PooledT,
        t,
        Some(df),
        student_t_two_sided(t, df),
    ))
}

/// Welch's unequal-variance t-test with Satterthwaite df.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<TestResult> {
    two_sample_check(a, b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, mb) = (mean(a), mean(b));
    let va = sum_sq_dev(a, ma) / (na - 1.0) / na;
    let vb = sum_sq_dev(b, mb) / (nb - 1.0) / nb;
    let se2 = va + vb;
    if se2 == 0.0 {
        if ma == mb {
            return Ok(TestResult::new(
                TestMethod::WelchT,
                0.0,
                Some(na + nb - 2.0),
                1.0,
            ));
        }
        return Err(Error::Degenerate(
            "zero variance with unequal group means".into(),
        ));
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    Ok(TestResult::new(
        TestMethod::WelchT,
        t,
        Some(df),
        student_t_two_sided(t, df),
    ))
}
