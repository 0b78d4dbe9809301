use super::AnalysisError;

/// Values below this are treated as having reached the rounding floor; the
/// fitted sequence is cut at the first one.
pub const RATE_UNDERFLOW: f64 = 1e-14;

const MIN_TAIL: usize = 4;

/// Least-squares geometric rate of a positive sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct RateReport {
    /// `exp` of the fitted slope of `log(values)` against the index.
    pub fitted_q: f64,
    pub theoretical_q: Option<f64>,
    /// First index used by the fit.
    pub tail_start: usize,
    /// RMS of the fit residual in the log domain.
    pub residual: f64,
}

impl RateReport {
    pub fn with_theory(mut self, q: f64) -> Self {
        self.theoretical_q = Some(q);
        self
    }
}

/// Fits `values_k ≈ c qᵏ` over the last `tail_fraction` of the sequence
/// (at least 4 entries). The sequence is first cut at the first entry below
/// [`RATE_UNDERFLOW`].
pub fn fit_linear_rate(values: &[f64], tail_fraction: f64) -> Result<RateReport, AnalysisError> {
    if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| v.is_nan() || **v < 0.0) {
        return Err(AnalysisError::NonPositiveValue { index, value });
    }
    let usable = values.iter().position(|v| *v < RATE_UNDERFLOW).unwrap_or(values.len());
    if usable < MIN_TAIL {
        return Err(AnalysisError::TooShort {
            len: usable,
            needed: MIN_TAIL,
        });
    }
    let fraction = tail_fraction.clamp(0.0, 1.0);
    let tail_len = ((usable as f64 * fraction).ceil() as usize).clamp(MIN_TAIL, usable);
    let tail_start = usable - tail_len;

    let xs: Vec<f64> = (tail_start..usable).map(|i| i as f64).collect();
    let ys: Vec<f64> = values[tail_start..usable].iter().map(|v| v.ln()).collect();
    let (slope, intercept) = least_squares(&xs, &ys);
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - (intercept + slope * x)).powi(2))
        .sum::<f64>()
        / xs.len() as f64)
        .sqrt();
    Ok(RateReport {
        fitted_q: slope.exp(),
        theoretical_q: None,
        tail_start,
        residual,
    })
}

/// Ordinary least squares `y ≈ a + b x`; returns `(b, a)`.
pub(crate) fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Least-squares slope of `log ys` against `log xs`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    least_squares(&lx, &ly).0
}

/// Outcome of a per-step or envelope rate check.
#[derive(Clone, Debug, PartialEq)]
pub struct RateCheck {
    pub passed: bool,
    /// Largest observed ratio (per-step ratio, or `value_k / (qᵏ value_0)`
    /// for envelopes).
    pub worst_ratio: f64,
    pub worst_index: Option<usize>,
    pub violations: usize,
    /// Number of comparisons actually made.
    pub checked: usize,
}

fn collect(pairs: impl Iterator<Item = (usize, f64, bool)>) -> RateCheck {
    let mut check = RateCheck {
        passed: true,
        worst_ratio: 0.0,
        worst_index: None,
        violations: 0,
        checked: 0,
    };
    for (index, ratio, ok) in pairs {
        check.checked += 1;
        if ratio > check.worst_ratio || check.worst_index.is_none() {
            check.worst_ratio = ratio;
            check.worst_index = Some(index);
        }
        if !ok {
            check.violations += 1;
            check.passed = false;
        }
    }
    check
}

/// Checks `value_{k+1} ≤ q · value_k · (1 + slack)` for every consecutive
/// pair with `value_k > 0`.
pub fn check_rate_bound(values: &[f64], q: f64, slack: f64) -> RateCheck {
    check_rate_bound_above(values, q, slack, 0.0)
}

/// As [`check_rate_bound`], restricted to pairs whose later value is at
/// least `floor`. Asymptotically tight bounds are indistinguishable from
/// rounding once the compared quantities approach machine precision.
pub fn check_rate_bound_above(values: &[f64], q: f64, slack: f64, floor: f64) -> RateCheck {
    collect(values.windows(2).enumerate().filter_map(|(k, w)| {
        if w[0].is_nan() || w[0] <= 0.0 || w[1] < floor {
            return None;
        }
        let ratio = w[1] / w[0];
        Some((k + 1, ratio, w[1] <= q * w[0] * (1.0 + slack)))
    }))
}

/// Checks the envelope `value_k ≤ qᵏ value_0 (1 + slack)` for every `k`
/// whose envelope value is at least `floor`.
pub fn check_geometric_envelope(values: &[f64], q: f64, slack: f64, floor: f64) -> RateCheck {
    let Some(&first) = values.first() else {
        return collect(std::iter::empty());
    };
    collect(values.iter().enumerate().filter_map(|(k, &v)| {
        let envelope = q.powi(k as i32) * first;
        if envelope < floor || envelope <= 0.0 {
            return None;
        }
        Some((k, v / envelope, v <= envelope * (1.0 + slack)))
    }))
}
