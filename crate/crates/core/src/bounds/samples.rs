//! Sample-count thresholds for exact completion.
//!
//! The constants are not known numerically. The defaults `C = C₁ = C₂ = 1` and
//! `β = 3` are placeholders; only the growth in `N`, `r` and `μ` is meaningful.

use std::fmt;

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleConstants {
    pub c: f64,
    pub c1: f64,
    pub c2: f64,
    /// Probability exponent, must exceed 2.
    pub beta: f64,
}

impl Default for SampleConstants {
    fn default() -> Self {
        Self {
            c: 1.0,
            c1: 1.0,
            c2: 1.0,
            beta: 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    General,
    Improved,
    StrongFirst,
    StrongSecond,
}

impl Branch {
    pub fn name(self) -> &'static str {
        match self {
            Self::General => "general",
            Self::Improved => "improved",
            Self::StrongFirst => "strong_log2",
            Self::StrongSecond => "strong_log6",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleThresholds {
    /// `C·max(μ₁², μ₀^{1/2}μ₁, μ₀N^{1/4})·N r β log N`.
    pub general: f64,
    /// `C μ₀ N^{6/5} r β log N`, evaluated regardless of eligibility.
    pub improved: f64,
    /// `r ≤ N^{1/5}/μ₀`.
    pub improved_eligible: bool,
    /// `C₁ μ⁴ N r² log² N`.
    pub strong_first: f64,
    /// `C₂ μ² N r log⁶ N`.
    pub strong_second: f64,
    /// Smallest applicable branch.
    pub smallest: Branch,
}

impl SampleThresholds {
    pub fn value(&self, b: Branch) -> f64 {
        match b {
            Branch::General => self.general,
            Branch::Improved => self.improved,
            Branch::StrongFirst => self.strong_first,
            Branch::StrongSecond => self.strong_second,
        }
    }
}

impl fmt::Display for SampleThresholds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "general={}", self.general)?;
        writeln!(f, "improved={}", self.improved)?;
        writeln!(f, "improved_eligible={}", self.improved_eligible)?;
        writeln!(f, "strong_log2={}", self.strong_first)?;
        writeln!(f, "strong_log6={}", self.strong_second)?;
        writeln!(f, "smallest={}", self.smallest.name())
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive, got {v}")))
    }
}

/// Thresholds for an `N₁ × N₂` matrix with `N = max(N₁, N₂)`, rank `r` and
/// incoherence parameters `μ₀`, `μ₁`, `μ`. Logarithms are natural.
pub fn sample_requirement(
    n: usize,
    r: usize,
    mu0: f64,
    mu1: f64,
    mu_strong: f64,
    k: &SampleConstants,
) -> Result<SampleThresholds> {
    if n == 0 || r == 0 {
        return Err(invalid("N and r must be positive"));
    }
    positive("mu0", mu0)?;
    positive("mu1", mu1)?;
    positive("mu", mu_strong)?;
    for (name, v) in [("C", k.c), ("C1", k.c1), ("C2", k.c2)] {
        positive(name, v)?;
    }
    if !(k.beta > 2.0) {
        return Err(invalid("beta must exceed 2"));
    }
    let nf = n as f64;
    let rf = r as f64;
    let ln = nf.ln();
    let lead = (mu1 * mu1).max(mu0.sqrt() * mu1).max(mu0 * nf.powf(0.25));
    let general = k.c * lead * nf * rf * k.beta * ln;
    let improved = k.c * mu0 * nf.powf(1.2) * rf * k.beta * ln;
    let improved_eligible = rf <= nf.powf(0.2) / mu0;
    let strong_first = k.c1 * mu_strong.powi(4) * nf * rf * rf * ln * ln;
    let strong_second = k.c2 * mu_strong * mu_strong * nf * rf * ln.powi(6);
    let mut out = SampleThresholds {
        general,
        improved,
        improved_eligible,
        strong_first,
        strong_second,
        smallest: Branch::General,
    };
    let mut candidates = vec![Branch::General, Branch::StrongFirst, Branch::StrongSecond];
    if improved_eligible {
        candidates.push(Branch::Improved);
    }
    out.smallest = candidates
        .into_iter()
        .min_by(|a, b| out.value(*a).total_cmp(&out.value(*b)))
        .unwrap_or(Branch::General);
    Ok(out)
}

/// The two sample counts for `K` targets and `M = max(M_t, M_r)`:
/// `C₁K⁴M log²M` and `C₂K²M log⁶M`.
pub fn target_sample_counts(k_targets: usize, m: usize, k: &SampleConstants) -> Result<(f64, f64)> {
    if k_targets == 0 || m == 0 {
        return Err(invalid("K and M must be positive"));
    }
    let kf = k_targets as f64;
    let mf = m as f64;
    let ln = mf.ln();
    Ok((k.c1 * kf.powi(4) * mf * ln * ln, k.c2 * kf * kf * mf * ln.powi(6)))
}
