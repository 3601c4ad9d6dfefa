//! Regularity condition (b): the block expressions `A_M(k, l)`, `B_M(k, l)`,
//! greedy search and verification of Lusky numbers, and the inverse
//! construction of a sequence realizing a prescribed chain.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::growth::{bounded_trend, Verdict};
use crate::numeric::{close, ls_slope, tol};
use crate::sequence::{DeltaSeq, WeightSequence};

fn check_indices(k: usize, l: usize, horizon: usize) -> Result<()> {
    if k < 1 {
        return Err(Error::InvalidIndices { k, l, reason: "k must be at least 1".into() });
    }
    if k >= l {
        return Err(Error::InvalidIndices { k, l, reason: "need k < l".into() });
    }
    if l + 1 > horizon {
        return Err(Error::HorizonExceeded { needed: l + 1, horizon });
    }
    Ok(())
}

/// `(ln A_M(k, l), ln B_M(k, l))` from the quotients:
/// `ln A = sum_{i=k+1}^{l} (lambda_{l+1} - lambda_i)`,
/// `ln B = sum_{i=k+1}^{l} (lambda_i - lambda_{k+1})`.
pub fn log_ab(ws: &WeightSequence, k: usize, l: usize) -> Result<(f64, f64)> {
    check_indices(k, l, ws.horizon())?;
    let top = ws.lambda(l + 1);
    let bottom = ws.lambda(k + 1);
    let (mut a, mut b) = (0.0, 0.0);
    for i in k + 1..=l {
        let li = ws.lambda(i);
        a += top - li;
        b += li - bottom;
    }
    Ok((a, b))
}

/// The same pair from the increments:
/// `ln A = (l-k) delta_{l+1} + sum_{i=1}^{l-k-1} i delta_{k+1+i}`,
/// `ln B = (l-k) sum_{i=k+2}^{l} delta_i - sum_{i=1}^{l-k-1} i delta_{k+1+i}`.
pub fn log_ab_delta(ds: &DeltaSeq, k: usize, l: usize) -> Result<(f64, f64)> {
    check_indices(k, l, ds.horizon())?;
    let n = (l - k) as f64;
    let weighted: f64 = (1..l - k).map(|i| i as f64 * ds.get(k + 1 + i)).sum();
    let plain: f64 = (k + 2..=l).map(|i| ds.get(i)).sum();
    Ok((n * ds.get(l + 1) + weighted, n * plain - weighted))
}

/// Anything that evaluates `(ln A, ln B)` at integer anchors.
pub trait AbOracle {
    /// Name of the sequence the oracle evaluates; certificates must match it.
    fn sequence_name(&self) -> &str;
    /// Largest admissible `l`.
    fn max_index(&self) -> usize;
    fn log_ab(&self, k: usize, l: usize) -> Result<(f64, f64)>;
}

/// The entire-function case.
#[derive(Debug, Clone, Copy)]
pub struct EntireOracle<'a>(pub &'a WeightSequence);

impl AbOracle for EntireOracle<'_> {
    fn sequence_name(&self) -> &str {
        self.0.name()
    }

    fn max_index(&self) -> usize {
        self.0.horizon().saturating_sub(1)
    }

    fn log_ab(&self, k: usize, l: usize) -> Result<(f64, f64)> {
        log_ab(self.0, k, l)
    }
}

/// A chain `(a_j)` with bounds `ln b`, `ln K` and the per-block values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LuskyCertificate {
    pub sequence: String,
    pub a: Vec<usize>,
    pub logb: f64,
    #[serde(rename = "logK")]
    pub log_k: f64,
    pub rows: Vec<(f64, f64)>,
}

impl LuskyCertificate {
    pub fn gaps(&self) -> Vec<usize> {
        self.a.windows(2).map(|w| w[1].saturating_sub(w[0])).collect()
    }

    /// Drop the first `s` anchors (and rows).
    pub fn forward_shift(&self, s: usize) -> Result<Self> {
        if s + 2 > self.a.len() {
            return Err(invalid(format!("cannot drop {s} anchors from a chain of {}", self.a.len())));
        }
        Ok(LuskyCertificate {
            sequence: self.sequence.clone(),
            a: self.a[s..].to_vec(),
            logb: self.logb,
            log_k: self.log_k,
            rows: self.rows[s.min(self.rows.len())..].to_vec(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    #[serde(rename = "A-low")]
    ALow,
    #[serde(rename = "A-high")]
    AHigh,
    #[serde(rename = "B-low")]
    BLow,
    #[serde(rename = "B-high")]
    BHigh,
    #[serde(rename = "horizon")]
    Horizon,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Violation::ALow => "A-low",
            Violation::AHigh => "A-high",
            Violation::BLow => "B-low",
            Violation::BHigh => "B-high",
            Violation::Horizon => "horizon",
        })
    }
}

/// First bound violated by `(log_a, log_b)`, checking A before B and low
/// before high.
pub fn classify(log_a: f64, log_b: f64, logb: f64, log_k: f64) -> Option<Violation> {
    if log_a < logb - tol::BOUND {
        Some(Violation::ALow)
    } else if log_a > log_k + tol::BOUND {
        Some(Violation::AHigh)
    } else if log_b < logb - tol::BOUND {
        Some(Violation::BLow)
    } else if log_b > log_k + tol::BOUND {
        Some(Violation::BHigh)
    } else {
        None
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateRow {
    pub gap: usize,
    /// `None` for candidates beyond the horizon.
    pub log_ab: Option<(f64, f64)>,
    pub violation: Violation,
}

/// Where a greedy search got stuck and why every candidate was rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct FailureTrace {
    pub sequence: String,
    /// 1-based position of the anchor that could not be extended.
    pub stuck_j: usize,
    pub stuck_a: usize,
    /// Anchors accepted before getting stuck.
    pub chain: Vec<usize>,
    pub candidates: Vec<CandidateRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SearchOutcome {
    Certificate(LuskyCertificate),
    Failure(FailureTrace),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchParams {
    pub logb: f64,
    pub log_k: f64,
    pub a1: usize,
    pub gap_max: usize,
}

impl SearchParams {
    pub const DEFAULT_GAP_MAX: usize = 64;

    pub fn new(logb: f64, log_k: f64, a1: usize) -> Self {
        SearchParams { logb, log_k, a1, gap_max: Self::DEFAULT_GAP_MAX }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.logb > std::f64::consts::LN_2) {
            return Err(invalid(format!("ln b must exceed ln 2, got {}", self.logb)));
        }
        if !(self.log_k >= self.logb) || !self.log_k.is_finite() {
            return Err(invalid(format!("ln K = {} must be finite and at least ln b = {}", self.log_k, self.logb)));
        }
        if self.a1 < 1 {
            return Err(invalid("a_1 must be at least 1"));
        }
        if self.gap_max < 2 {
            return Err(invalid("gap_max must be at least 2"));
        }
        Ok(())
    }
}

/// Greedy smallest-admissible-gap search without backtracking. Succeeds when
/// the chain cannot be extended by even a gap of 2 inside the horizon.
pub fn search_lusky<O: AbOracle + ?Sized>(oracle: &O, params: SearchParams) -> Result<SearchOutcome> {
    params.validate()?;
    let max_l = oracle.max_index();
    if params.a1 + 2 > max_l {
        return Err(Error::HorizonExceeded { needed: params.a1 + 3, horizon: max_l + 1 });
    }
    let mut a = vec![params.a1];
    let mut rows = Vec::new();
    loop {
        let cur = a[a.len() - 1];
        if cur + 2 > max_l {
            break;
        }
        let mut candidates = Vec::new();
        let mut accepted = None;
        for gap in 2..=params.gap_max {
            let l = cur + gap;
            if l > max_l {
                candidates.push(CandidateRow { gap, log_ab: None, violation: Violation::Horizon });
                continue;
            }
            let (la, lb) = oracle.log_ab(cur, l)?;
            match classify(la, lb, params.logb, params.log_k) {
                None => {
                    accepted = Some((l, la, lb));
                    break;
                }
                Some(violation) => candidates.push(CandidateRow { gap, log_ab: Some((la, lb)), violation }),
            }
        }
        match accepted {
            Some((l, la, lb)) => {
                a.push(l);
                rows.push((la, lb));
            }
            None => {
                return Ok(SearchOutcome::Failure(FailureTrace {
                    sequence: oracle.sequence_name().to_string(),
                    stuck_j: a.len(),
                    stuck_a: cur,
                    chain: a,
                    candidates,
                }))
            }
        }
    }
    Ok(SearchOutcome::Certificate(LuskyCertificate {
        sequence: oracle.sequence_name().to_string(),
        a,
        logb: params.logb,
        log_k: params.log_k,
        rows,
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verification {
    pub ok: bool,
    /// 0-based index of the first failing row.
    pub first_failure: Option<usize>,
    /// Recomputed rows; `None` where the anchors are not increasing.
    pub rows: Vec<Option<(f64, f64)>>,
    /// Whether the stored rows agree with the recomputed ones.
    pub rows_match: bool,
    pub max_gap: usize,
    /// Verdict of the bounded-gap heuristic on the chain.
    pub gaps_bounded: Verdict,
}

impl Verification {
    /// Solid on the horizon: verified and bounded gaps.
    pub fn solid(&self) -> bool {
        self.gaps_bounded == Verdict::HoldsOnHorizon
    }
}

/// Recompute every row of `cert` with `oracle` and check the bounds.
pub fn verify_certificate<O: AbOracle + ?Sized>(oracle: &O, cert: &LuskyCertificate) -> Result<Verification> {
    if cert.sequence != oracle.sequence_name() {
        return Err(Error::SequenceMismatch {
            expected: oracle.sequence_name().to_string(),
            found: cert.sequence.clone(),
        });
    }
    if cert.a.len() < 2 {
        return Err(invalid("a certificate needs at least two anchors"));
    }
    if cert.a[0] < 1 {
        return Err(invalid("anchors must be positive"));
    }
    if !(cert.logb > std::f64::consts::LN_2) || !(cert.log_k >= cert.logb) {
        return Err(invalid(format!("bounds need ln 2 < ln b <= ln K, got ({}, {})", cert.logb, cert.log_k)));
    }
    let last = *cert.a.iter().max().unwrap();
    if last > oracle.max_index() {
        return Err(Error::HorizonExceeded { needed: last + 1, horizon: oracle.max_index() + 1 });
    }
    let mut rows = Vec::with_capacity(cert.a.len() - 1);
    let mut first_failure = None;
    for (j, w) in cert.a.windows(2).enumerate() {
        let row = if w[1] > w[0] { Some(oracle.log_ab(w[0], w[1])?) } else { None };
        let bad = match row {
            None => true,
            Some((la, lb)) => w[1] < w[0] + 2 || classify(la, lb, cert.logb, cert.log_k).is_some(),
        };
        if bad && first_failure.is_none() {
            first_failure = Some(j);
        }
        rows.push(row);
    }
    let rows_match = rows.len() == cert.rows.len()
        && rows.iter().zip(&cert.rows).all(|(r, s)| match r {
            Some((a, b)) => close(*a, s.0, tol::IDENTITY_REL) && close(*b, s.1, tol::IDENTITY_REL),
            None => false,
        });
    let gaps: Vec<f64> = cert.gaps().iter().map(|&g| g as f64).collect();
    let max_gap = cert.gaps().into_iter().max().unwrap_or(0);
    Ok(Verification {
        ok: first_failure.is_none(),
        first_failure,
        rows,
        rows_match,
        max_gap,
        gaps_bounded: bounded_trend(&gaps).verdict,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Trend {
    Divergent,
    Convergent,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NecessaryReport {
    pub min_gap: usize,
    /// 0-based index of the first gap below 2.
    pub first_short_gap: Option<usize>,
    /// Partial sums of `1 / (a_{j+1} - a_j)`.
    pub partial_sums: Vec<f64>,
    /// Fitted exponent `alpha` in `gap_j ~ j^alpha`, from the growth of the
    /// anchors over the second half of the chain.
    pub exponent: Option<f64>,
    pub trend: Trend,
}

impl NecessaryReport {
    pub fn passed(&self) -> bool {
        self.first_short_gap.is_none() && self.trend != Trend::Convergent
    }
}

/// Shorter chains get no exponent fit.
pub const MIN_TREND_ANCHORS: usize = 8;

/// Gap condition and a divergence estimate for `sum 1/(a_{j+1} - a_j)`.
/// The series diverges for gaps growing like `j^alpha` with `alpha <= 1`.
pub fn necessary_check(a: &[usize]) -> Result<NecessaryReport> {
    if a.len() < 2 {
        return Err(invalid("need at least two anchors"));
    }
    if let Some(i) = a.windows(2).position(|w| w[1] <= w[0]) {
        return Err(invalid(format!("anchors not strictly increasing at position {}", i + 1)));
    }
    let gaps: Vec<usize> = a.windows(2).map(|w| w[1] - w[0]).collect();
    let min_gap = *gaps.iter().min().unwrap();
    let first_short_gap = gaps.iter().position(|&g| g < 2);
    let mut acc = 0.0;
    let partial_sums = gaps
        .iter()
        .map(|&g| {
            acc += 1.0 / g as f64;
            acc
        })
        .collect();
    // Fit a_j ~ j^(1 + alpha) over the second half; the anchors are far
    // less noisy than the individual gaps.
    let exponent = if a.len() >= MIN_TREND_ANCHORS {
        let start = a.len() / 2;
        let xs: Vec<f64> = (start..a.len()).map(|j| ((j + 1) as f64).ln()).collect();
        let ys: Vec<f64> = a[start..].iter().map(|&v| (v as f64).ln()).collect();
        ls_slope(&xs, &ys).map(|beta| beta - 1.0)
    } else {
        None
    };
    let trend = match exponent {
        Some(e) if e <= 1.0 => Trend::Divergent,
        Some(e) if e > 1.1 => Trend::Convergent,
        _ => Trend::Inconclusive,
    };
    Ok(NecessaryReport { min_gap, first_short_gap, partial_sums, exponent, trend })
}

/// The sequence whose increments are `d_j = C / (a_{j+1} - a_j + 1)` at
/// positions `a_j + 2` and `a_{j+1} + 1`, zero elsewhere. It satisfies
/// condition (b) on the chain with `ln b = 1`, `ln K = C`.
pub fn build_from_lusky(a: &[usize], c: f64, horizon: usize) -> Result<WeightSequence> {
    if a.len() < 2 {
        return Err(invalid("need at least two anchors"));
    }
    if a[0] < 1 {
        return Err(invalid("anchors must be positive"));
    }
    if let Some(i) = a.windows(2).position(|w| w[1] < w[0] + 2) {
        return Err(invalid(format!("gap a_{} - a_{} is below 2", i + 2, i + 1)));
    }
    if !(c >= 3.0 && c.is_finite()) {
        return Err(invalid(format!("C must be at least 3, got {c}")));
    }
    let last = a[a.len() - 1];
    if horizon < last + 1 {
        return Err(Error::HorizonExceeded { needed: last + 1, horizon });
    }
    let mut delta = vec![0.0; horizon];
    for w in a.windows(2) {
        let d = c / (w[1] - w[0] + 1) as f64;
        delta[w[0] + 1] = d;
        delta[w[1]] = d;
    }
    Ok(WeightSequence::from_deltas(&DeltaSeq::new(delta), false)?.with_name("lusky-construction"))
}

/// Sufficient condition for (b) when all increments lie in `[d1, d2]` and the
/// gaps in `[C1, C2]`.
pub fn uniform_delta_sufficient(d1: f64, d2: f64, c1: f64, c2: f64) -> Result<bool> {
    if !(d1 >= 0.0 && d1 <= d2 && d2.is_finite()) {
        return Err(invalid(format!("need 0 <= d1 <= d2, got d1 = {d1}, d2 = {d2}")));
    }
    if !(c1 >= 2.0 && c1 <= c2 && c2.is_finite()) {
        return Err(invalid(format!("need 2 <= C1 <= C2, got C1 = {c1}, C2 = {c2}")));
    }
    let first = 2.0 <= d1 * c1 * (1.0 + c1);
    let second = 1.0 + d2 * c2 * (c2 - 1.0) / 2.0 <= d1 * c1 * (c1 - 1.0);
    Ok(first && second)
}

/// Whether stretching the chain by `r` leaves every row unchanged on the
/// r-interpolating sequence.
pub fn stretch_check(ws: &WeightSequence, r: usize, cert: &LuskyCertificate) -> Result<bool> {
    let ip = ws.interpolate(r)?;
    for w in cert.a.windows(2) {
        let base = log_ab(ws, w[0], w[1])?;
        let stretched = log_ab(&ip, r * w[0], r * w[1])?;
        if !close(base.0, stretched.0, tol::IDENTITY_REL) || !close(base.1, stretched.1, tol::IDENTITY_REL) {
            return Ok(false);
        }
    }
    Ok(true)
}
