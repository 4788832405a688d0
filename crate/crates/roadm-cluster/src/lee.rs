//! Closed-form blocking model for the three-stage fabric.
//!
//! The per-wavelength fabric is treated as a link-independence graph: with
//! `N` line cards per chassis carrying `a` erlang each, `M` middle-stage
//! chassis and packing degree `d`, the shared-link occupancy is
//! `p = (N a - d) / (M - d)` and the path blocking probability is
//! `[1 - (1 - p)^2]^(M - d)`. Per-degree blocking figures combine through a
//! load-weighted mean, and a load-averaged figure integrates the model over
//! a uniform grid of per-card loads.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("packing degree d={d} must be below the middle-stage count m={m}")]
    PackingAtOrAboveMiddle { d: u32, m: u32 },
    #[error("offered load n*a={na} is below the packing degree d={d}")]
    LoadBelowPacking { na: f64, d: u32 },
    #[error("offered load n*a={na} exceeds the middle-stage capacity m={m}")]
    LoadExceedsCapacity { na: f64, m: u32 },
    #[error("per-degree profile must not be empty")]
    EmptyProfile,
    #[error("per-degree loads must sum to a positive value")]
    ZeroTotalLoad,
    #[error("load {value} is negative or not finite")]
    InvalidLoad { value: f64 },
    #[error("blocking probability {value} lies outside [0, 1]")]
    InvalidProbability { value: f64 },
    #[error("sample_count must be at least 1")]
    InvalidSampleCount,
    #[error("no load grid point satisfies the model preconditions")]
    NoEvaluablePoints,
    #[error("domain error at load grid point p_{index}={load}: {source}")]
    AtGridPoint {
        index: u32,
        load: f64,
        #[source]
        source: Box<DomainError>,
    },
}

/// Shared-link occupancy `p = (N a - d) / (M - d)`.
///
/// Errors when `d >= M`, when the offered load falls below the packing
/// degree, or when it exceeds the middle-stage capacity (`N a > M`), naming
/// the violated bound.
pub fn link_occupancy(n: u32, m: u32, a: f64, d: u32) -> Result<f64, DomainError> {
    if d >= m {
        return Err(DomainError::PackingAtOrAboveMiddle { d, m });
    }
    let na = f64::from(n) * a;
    if !na.is_finite() {
        return Err(DomainError::InvalidLoad { value: a });
    }
    if na < f64::from(d) {
        return Err(DomainError::LoadBelowPacking { na, d });
    }
    if na > f64::from(m) {
        return Err(DomainError::LoadExceedsCapacity { na, m });
    }
    Ok((na - f64::from(d)) / f64::from(m - d))
}

/// Total path blocking probability `[1 - (1 - p)^2]^(M - d)`.
///
/// The base is evaluated as `p (2 - p)`, which is algebraically identical
/// and avoids cancellation near `p = 0`; below `p = 1e-8` the power is taken
/// through the exponential so golden values stay stable to 1e-12 relative.
pub fn lee_blocking(n: u32, m: u32, a: f64, d: u32) -> Result<f64, DomainError> {
    let p = link_occupancy(n, m, a, d)?;
    if p == 0.0 {
        return Ok(0.0);
    }
    let base = p * (2.0 - p);
    let exponent = m - d;
    let blocking = if p < 1e-8 {
        (f64::from(exponent) * base.ln()).exp()
    } else {
        base.powi(exponent as i32)
    };
    Ok(blocking.clamp(0.0, 1.0))
}

/// Load-weighted mean blocking over degrees: `sum(P_b * lambda) / sum(lambda)`.
pub fn weighted_blocking(per_degree: &[(f64, f64)]) -> Result<f64, DomainError> {
    if per_degree.is_empty() {
        return Err(DomainError::EmptyProfile);
    }
    let mut weighted = 0.0;
    let mut total = 0.0;
    for &(blocking, load) in per_degree {
        if !(0.0..=1.0).contains(&blocking) {
            return Err(DomainError::InvalidProbability { value: blocking });
        }
        if !load.is_finite() || load < 0.0 {
            return Err(DomainError::InvalidLoad { value: load });
        }
        weighted += blocking * load;
        total += load;
    }
    if total <= 0.0 {
        return Err(DomainError::ZeroTotalLoad);
    }
    Ok(weighted / total)
}

/// Mean of `integrand` over the uniform load grid `p_i = i / sample_count`,
/// `i = 0..=sample_count`. An integrand may return `None` to mark a grid
/// point as outside its domain; the mean is taken over the points actually
/// evaluated. Summation is compensated so a constant integrand comes back
/// essentially exactly.
pub fn average_over_load_grid<F>(sample_count: u32, mut integrand: F) -> Result<f64, DomainError>
where
    F: FnMut(f64) -> Option<Result<f64, DomainError>>,
{
    if sample_count == 0 {
        return Err(DomainError::InvalidSampleCount);
    }
    let mut sum = 0.0f64;
    let mut compensation = 0.0f64;
    let mut evaluated = 0u64;
    for i in 0..=sample_count {
        let load = f64::from(i) / f64::from(sample_count);
        let value = match integrand(load) {
            None => continue,
            Some(Ok(value)) => value,
            Some(Err(err)) => {
                return Err(DomainError::AtGridPoint {
                    index: i,
                    load,
                    source: Box::new(err),
                })
            }
        };
        // Neumaier-compensated accumulation.
        let t = sum + value;
        if sum.abs() >= value.abs() {
            compensation += (sum - t) + value;
        } else {
            compensation += (value - t) + sum;
        }
        sum = t;
        evaluated += 1;
    }
    if evaluated == 0 {
        return Err(DomainError::NoEvaluablePoints);
    }
    Ok((sum + compensation) / evaluated as f64)
}

/// Load-averaged blocking: evaluates the weighted per-degree blocking at
/// per-card loads `a = p_i` over the uniform grid and returns the mean.
///
/// Grid loads are clamped so `N a <= M`; points below the packing degree
/// (`N a < d`) are outside the model and are skipped. All degrees see the
/// same per-card load, weighted by `lambda_profile`.
pub fn load_averaged_blocking(
    n: u32,
    m: u32,
    d: u32,
    lambda_profile: &[f64],
    sample_count: u32,
) -> Result<f64, DomainError> {
    if lambda_profile.is_empty() {
        return Err(DomainError::EmptyProfile);
    }
    for &load in lambda_profile {
        if !load.is_finite() || load < 0.0 {
            return Err(DomainError::InvalidLoad { value: load });
        }
    }
    if lambda_profile.iter().sum::<f64>() <= 0.0 {
        return Err(DomainError::ZeroTotalLoad);
    }
    if d >= m {
        return Err(DomainError::PackingAtOrAboveMiddle { d, m });
    }
    let a_cap = f64::from(m) / f64::from(n);
    let mut pairs = vec![(0.0f64, 0.0f64); lambda_profile.len()];
    average_over_load_grid(sample_count, |load| {
        let a = load.min(a_cap);
        if f64::from(n) * a < f64::from(d) {
            return None;
        }
        Some(lee_blocking(n, m, a, d).and_then(|blocking| {
            for (pair, &lambda) in pairs.iter_mut().zip(lambda_profile) {
                *pair = (blocking, lambda);
            }
            weighted_blocking(&pairs)
        }))
    })
}

/// One evaluated sweep cell: either a blocking probability or the domain
/// error hit at that cell.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepOutcome {
    Blocking(f64),
    Error(DomainError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub a: f64,
    pub d: u32,
    pub outcome: SweepOutcome,
}

/// Cartesian sweep of the blocking model over loads and packing degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub n: u32,
    pub m: u32,
    pub rows: Vec<SweepRow>,
}

/// Evaluate the full `loads x d_values` grid in input order. Per-cell domain
/// errors are recorded in place and do not abort the sweep. With
/// `clamp_overload`, loads beyond the middle-stage capacity report blocking
/// 1 instead of an error.
pub fn analytic_sweep(
    n: u32,
    m: u32,
    loads: &[f64],
    d_values: &[u32],
    clamp_overload: bool,
) -> SweepTable {
    let mut rows = Vec::with_capacity(loads.len() * d_values.len());
    for &a in loads {
        for &d in d_values {
            let outcome = match lee_blocking(n, m, a, d) {
                Ok(value) => SweepOutcome::Blocking(value),
                Err(DomainError::LoadExceedsCapacity { .. }) if clamp_overload => {
                    SweepOutcome::Blocking(1.0)
                }
                Err(err) => SweepOutcome::Error(err),
            };
            rows.push(SweepRow { a, d, outcome });
        }
    }
    SweepTable { n, m, rows }
}

impl SweepTable {
    /// CSV with the fixed header `a,d,P_b`. Error cells carry the quoted
    /// error message in the `P_b` column.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("a,d,P_b\n");
        for row in &self.rows {
            match &row.outcome {
                SweepOutcome::Blocking(value) => {
                    out.push_str(&format!("{},{},{}\n", row.a, row.d, value));
                }
                SweepOutcome::Error(err) => {
                    out.push_str(&format!("{},{},\"{}\"\n", row.a, row.d, err));
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| match &row.outcome {
                SweepOutcome::Blocking(value) => serde_json::json!({
                    "a": row.a,
                    "d": row.d,
                    "p_b": value,
                }),
                SweepOutcome::Error(err) => serde_json::json!({
                    "a": row.a,
                    "d": row.d,
                    "error": err.to_string(),
                }),
            })
            .collect();
        serde_json::json!({ "n": self.n, "m": self.m, "rows": rows })
    }
}
