//! Two-series comparisons: paired-t on means and the F-based variance ratio,
//! rendered in the fixed-column layout of a classic simulation output
//! analyser.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::dist::f_quantile;
use super::summary::{mean, t_critical, variance};
use crate::error::StatsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComparisonKind {
    Means,
    Variances,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    FailToReject,
    Reject,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesExtent {
    pub n: usize,
    pub min: f64,
    pub max: f64,
}

impl SeriesExtent {
    fn of(series: &[f64]) -> Self {
        Self {
            n: series.len(),
            min: series.iter().copied().fold(f64::INFINITY, f64::min),
            max: series.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub kind: ComparisonKind,
    pub identifier: String,
    /// Mean difference (means) or variance ratio (variances).
    pub estimate: f64,
    /// Standard deviation of the paired differences; means only.
    pub sd: Option<f64>,
    /// Half-width of the difference interval; means only.
    pub half_width: Option<f64>,
    pub ci_low: f64,
    pub ci_high: f64,
    pub alpha: f64,
    pub a: SeriesExtent,
    pub b: SeriesExtent,
    pub verdict: Verdict,
}

fn check_alpha(alpha: f64) -> Result<(), StatsError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(StatsError::InvalidParameter(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

/// Paired-t comparison of means, pairing observations by index.
pub fn paired_t_compare(
    identifier: &str,
    a: &[f64],
    b: &[f64],
    alpha: f64,
) -> Result<ComparisonReport, StatsError> {
    check_alpha(alpha)?;
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch { a: a.len(), b: b.len() });
    }
    if a.len() < 2 {
        return Err(StatsError::TooFewObservations { needed: 2, got: a.len() });
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let estimate = mean(&diffs).expect("nonempty");
    let sd = variance(&diffs).expect("n >= 2").sqrt();
    let hw = t_critical(diffs.len(), 1.0 - alpha) * sd / (diffs.len() as f64).sqrt();
    let (ci_low, ci_high) = (estimate - hw, estimate + hw);
    let verdict = if ci_low <= 0.0 && 0.0 <= ci_high {
        Verdict::FailToReject
    } else {
        Verdict::Reject
    };
    Ok(ComparisonReport {
        kind: ComparisonKind::Means,
        identifier: identifier.to_owned(),
        estimate,
        sd: Some(sd),
        half_width: Some(hw),
        ci_low,
        ci_high,
        alpha,
        a: SeriesExtent::of(a),
        b: SeriesExtent::of(b),
        verdict,
    })
}

/// Ratio of sample variances `var(a) / var(b)` with its F interval.
pub fn variance_ratio_compare(
    identifier: &str,
    a: &[f64],
    b: &[f64],
    alpha: f64,
) -> Result<ComparisonReport, StatsError> {
    check_alpha(alpha)?;
    for s in [a, b] {
        if s.len() < 2 {
            return Err(StatsError::TooFewObservations { needed: 2, got: s.len() });
        }
    }
    let var_b = variance(b).expect("n >= 2");
    if var_b == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    let var_a = variance(a).expect("n >= 2");
    let ratio = if a == b { 1.0 } else { var_a / var_b };
    let (da, db) = ((a.len() - 1) as f64, (b.len() - 1) as f64);
    let p = 1.0 - alpha / 2.0;
    let ci_low = ratio / f_quantile(p, da, db);
    let ci_high = ratio * f_quantile(p, db, da);
    let verdict = if ci_low <= 1.0 && 1.0 <= ci_high {
        Verdict::FailToReject
    } else {
        Verdict::Reject
    };
    Ok(ComparisonReport {
        kind: ComparisonKind::Variances,
        identifier: identifier.to_owned(),
        estimate: ratio,
        sd: None,
        half_width: None,
        ci_low,
        ci_high,
        alpha,
        a: SeriesExtent::of(a),
        b: SeriesExtent::of(b),
        verdict,
    })
}

/// `%.3g` with a three-digit exponent, as the analyser prints numbers.
pub fn analyser_number(x: f64) -> String {
    if x == 0.0 {
        return "0".to_owned();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.2e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..3).contains(&exp) {
        let decimals = (2 - exp) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:03}", trim_zeros(mantissa.to_owned()), exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_owned()
    } else {
        s
    }
}

fn level_label(alpha: f64) -> String {
    format!("{:.3}", 1.0 - alpha)
}

fn table(headers: &[String], row: &[String]) -> String {
    let widths: Vec<usize> = headers.iter().zip(row).map(|(h, v)| h.len().max(v.len())).collect();
    let line = |cells: &[String]| {
        let mut out = String::new();
        for (i, (cell, w)) in cells.iter().zip(&widths).enumerate() {
            if i + 1 == cells.len() {
                out.push_str(cell);
            } else {
                let _ = write!(out, "{cell:<w$}  ");
            }
        }
        out
    };
    format!("{}\n{}\n", line(headers), line(row))
}

impl ComparisonReport {
    pub fn verdict_line(&self) -> String {
        let subject = match self.kind {
            ComparisonKind::Means => "MEANS",
            ComparisonKind::Variances => "VARIANCES",
        };
        match self.verdict {
            Verdict::FailToReject => {
                format!("FAIL TO REJECT H0 => {subject} ARE EQUAL AT {} LEVEL", self.alpha)
            }
            Verdict::Reject => {
                format!("REJECT H0 => {subject} ARE NOT EQUAL AT {} LEVEL", self.alpha)
            }
        }
    }

    /// Fixed-column text block.
    pub fn render_text(&self) -> String {
        let level = level_label(self.alpha);
        let pair = |x: f64, y: f64| format!("{} {}", analyser_number(x), analyser_number(y));
        let extent = [
            pair(self.a.min, self.b.min),
            pair(self.a.max, self.b.max),
            format!("{} {}", self.a.n, self.b.n),
        ];
        let (title, headers, values) = match self.kind {
            ComparisonKind::Means => (
                "Paired-T Means Comparison:",
                vec![
                    "IDENTIFIER".to_owned(),
                    "ESTD. MEAN DIFFERENCE".to_owned(),
                    "STANDARD DEVIATION".to_owned(),
                    format!("{level} C.I. HALF-WIDTH"),
                ],
                vec![
                    self.identifier.clone(),
                    analyser_number(self.estimate),
                    analyser_number(self.sd.unwrap_or(f64::NAN)),
                    analyser_number(self.half_width.unwrap_or(f64::NAN)),
                ],
            ),
            ComparisonKind::Variances => (
                "Variances Comparison:",
                vec![
                    "IDENTIFIER".to_owned(),
                    "VARIANCE RATIO".to_owned(),
                    format!("UPPER {level} C.I.LIMIT"),
                    format!("LOWER {level} C.I.LIMIT"),
                ],
                vec![
                    self.identifier.clone(),
                    analyser_number(self.estimate),
                    analyser_number(self.ci_high),
                    analyser_number(self.ci_low),
                ],
            ),
        };
        let mut headers = headers;
        headers.extend(["MINIMUM VALUE", "MAXIMUM VALUE", "NUMBER OF OBS"].map(String::from));
        let mut values = values;
        values.extend(extent);
        format!("{title}\n\n{}\n{}\n", table(&headers, &values), self.verdict_line())
    }

    pub const CSV_HEADER: &'static str = "kind,identifier,estimate,sd,half_width,ci_low,ci_high,alpha,n_a,min_a,max_a,n_b,min_b,max_b,verdict";

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            match self.kind {
                ComparisonKind::Means => "means",
                ComparisonKind::Variances => "variances",
            },
            self.identifier,
            self.estimate,
            opt(self.sd),
            opt(self.half_width),
            self.ci_low,
            self.ci_high,
            self.alpha,
            self.a.n,
            self.a.min,
            self.a.max,
            self.b.n,
            self.b.min,
            self.b.max,
            match self.verdict {
                Verdict::FailToReject => "fail-to-reject",
                Verdict::Reject => "reject",
            }
        )
    }
}
