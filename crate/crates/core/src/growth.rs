//! Growth and regularity conditions decided on a finite horizon.
//!
//! Suprema and limits inferior over infinitely many indices cannot be decided
//! from a prefix. Each check reports a statistic, the window it used and a
//! three-valued verdict; the heuristics are documented on [`bounded_trend`]
//! and [`liminf_verdict`].

use std::fmt;

use serde::Serialize;

use crate::assoc::Omega;
use crate::error::{invalid, Error, Result};
use crate::numeric::{log_sum_exp, tol};
use crate::sequence::WeightSequence;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "holds-on-horizon")]
    HoldsOnHorizon,
    #[serde(rename = "fails")]
    Fails,
    #[serde(rename = "inconclusive")]
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::HoldsOnHorizon => "holds-on-horizon",
            Verdict::Fails => "fails",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub property: String,
    pub statistic: f64,
    /// Inclusive index range the statistic was taken over.
    pub window: (usize, usize),
    pub verdict: Verdict,
    /// Index and value backing a `fails` verdict (also filled when useful
    /// otherwise).
    pub witness: Option<(usize, f64)>,
    pub note: Option<String>,
}

/// Outcome of [`bounded_trend`]. `argmax` is a 0-based position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrendReport {
    pub verdict: Verdict,
    pub max: f64,
    pub argmax: usize,
}

/// Heuristic for "bounded above" on a finite prefix.
///
/// Holds when the running maximum sets no new record in the last decile.
/// Otherwise the running-max increments over the last two dyadic windows are
/// compared: `rho = (R(n) - R(n/2)) / (R(n/2) - R(n/4))` is about 1 for
/// logarithmic growth, 2 for linear growth and 1/2 for a `1/n` approach to a
/// limit. `rho <= 0.75` holds, `rho >= 0.9` fails, anything else (or a
/// window of fewer than 8 values) is inconclusive.
pub fn bounded_trend(values: &[f64]) -> TrendReport {
    let n = values.len();
    let mut argmax = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[argmax] {
            argmax = i;
        }
    }
    let max = values.get(argmax).copied().unwrap_or(f64::NAN);
    if n < 8 {
        return TrendReport { verdict: Verdict::Inconclusive, max, argmax };
    }
    let mut running = Vec::with_capacity(n);
    let mut r = f64::NEG_INFINITY;
    for &v in values {
        r = r.max(v);
        running.push(r);
    }
    let slack = tol::TREND_REL * running.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let last_record = (1..n).rev().find(|&i| running[i] > running[i - 1] + slack).unwrap_or(0);
    if (last_record as f64) < 0.9 * n as f64 {
        return TrendReport { verdict: Verdict::HoldsOnHorizon, max, argmax };
    }
    let late = running[n - 1] - running[n / 2 - 1];
    let early = running[n / 2 - 1] - running[n / 4 - 1];
    let verdict = if late <= slack {
        Verdict::HoldsOnHorizon
    } else if early <= slack {
        Verdict::Inconclusive
    } else {
        let rho = late / early;
        if rho <= 0.75 {
            Verdict::HoldsOnHorizon
        } else if rho >= 0.9 {
            Verdict::Fails
        } else {
            Verdict::Inconclusive
        }
    };
    TrendReport { verdict, max, argmax }
}

/// Verdict for `liminf > threshold` from the tail values: decided by the
/// tail minimum unless the tail is non-monotone and the minimum lies within
/// 10% of the threshold (scale `max(|threshold|, ln 2)`). Returns the verdict
/// and the 0-based position of the minimum.
pub fn liminf_verdict(tail: &[f64], threshold: f64) -> (Verdict, usize, f64) {
    let mut argmin = 0;
    for (i, &v) in tail.iter().enumerate() {
        if v < tail[argmin] {
            argmin = i;
        }
    }
    let min = tail[argmin];
    let slack = 1e-12 * tail.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let up = tail.windows(2).all(|w| w[1] >= w[0] - slack);
    let down = tail.windows(2).all(|w| w[1] <= w[0] + slack);
    let margin = min - threshold;
    let band = 0.1 * threshold.abs().max(std::f64::consts::LN_2);
    let verdict = if !(up || down) && margin.abs() <= band {
        Verdict::Inconclusive
    } else if margin > 0.0 {
        Verdict::HoldsOnHorizon
    } else {
        Verdict::Fails
    };
    (verdict, argmin, min)
}

fn trend_report(property: &str, values: &[f64], first_index: usize) -> PropertyReport {
    let t = bounded_trend(values);
    let witness = Some((first_index + t.argmax, t.max));
    PropertyReport {
        property: property.to_string(),
        statistic: t.max,
        window: (first_index, first_index + values.len() - 1),
        verdict: t.verdict,
        witness,
        note: None,
    }
}

/// Monotonicity report: holds when every increment of `values` is
/// non-negative (up to rounding); the statistic is the smallest increment.
fn monotone_report(property: &str, values: &[f64], first_index: usize) -> PropertyReport {
    let mut stat = f64::INFINITY;
    let mut witness = None;
    for i in 1..values.len() {
        let d = values[i] - values[i - 1];
        let slack = 1e-12 * values[i].abs().max(values[i - 1].abs()).max(1.0);
        if d < stat {
            stat = d;
        }
        if d < -slack && witness.is_none() {
            witness = Some((first_index + i, d));
        }
    }
    if values.len() < 2 {
        stat = 0.0;
    }
    PropertyReport {
        property: property.to_string(),
        statistic: stat,
        window: (first_index, first_index + values.len() - 1),
        verdict: if witness.is_some() { Verdict::Fails } else { Verdict::HoldsOnHorizon },
        witness,
        note: None,
    }
}

/// Normalization, log-convexity, strong log-convexity and derivation
/// closedness.
pub fn structural_checks(ws: &WeightSequence) -> Vec<PropertyReport> {
    let p_max = ws.horizon();
    let l1 = ws.lambda(1);
    let normalized = PropertyReport {
        property: "normalized".into(),
        statistic: l1,
        window: (1, 1),
        verdict: if l1 >= 0.0 { Verdict::HoldsOnHorizon } else { Verdict::Fails },
        witness: if l1 >= 0.0 { None } else { Some((1, l1)) },
        note: None,
    };
    let lc = monotone_report("log-convex", ws.lambdas(), 1);
    let slc_vals: Vec<f64> = (1..=p_max).map(|p| ws.lambda(p) - (p as f64).ln()).collect();
    let slc = monotone_report("slc", &slc_vals, 1);
    let dc_vals: Vec<f64> = (1..=p_max).map(|p| ws.lambda(p) / p as f64).collect();
    let dc = trend_report("dc", &dc_vals, 1);
    vec![normalized, lc, slc, dc]
}

/// Moderate growth, the two strong non-quasianalyticity variants and
/// `gamma_1`. `q` is the ratio used by `beta_1` / `beta_3`; `tail_fraction`
/// selects the share of the window used for limits inferior.
pub fn asymptotic_stats(ws: &WeightSequence, q: usize, tail_fraction: f64) -> Result<Vec<PropertyReport>> {
    if q < 2 {
        return Err(invalid("Q must be at least 2"));
    }
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(invalid(format!("tail fraction must lie in (0, 1], got {tail_fraction}")));
    }
    let p_max = ws.horizon();
    let half = p_max / 2;
    let top = p_max / q;
    if half == 0 || top == 0 {
        return Err(invalid(format!("window empty: horizon {p_max} is too small for Q = {q}")));
    }

    let mg_vals: Vec<f64> = (1..=half).map(|p| ws.lambda(2 * p) - ws.lambda(p)).collect();
    let mg = trend_report("mg", &mg_vals, 1);

    let start = ((1.0 - tail_fraction) * top as f64).ceil().max(1.0) as usize;
    let start = start.min(top);
    let tail: Vec<f64> = (start..=top).map(|p| ws.lambda(q * p) - ws.lambda(p)).collect();
    let beta = |name: &str, threshold: f64| {
        let (verdict, i, min) = liminf_verdict(&tail, threshold);
        PropertyReport {
            property: name.into(),
            statistic: min,
            window: (start, top),
            verdict,
            witness: Some((start + i, min)),
            note: Some(format!("liminf estimated over the tail window with Q = {q}")),
        }
    };
    let beta1 = beta("beta1", (q as f64).ln());
    let beta3 = beta("beta3", 0.0);

    // log of (mu_j / j) * sum_{k=j}^{P} 1/mu_k, suffix sums in log domain
    let mut suffix = vec![f64::NEG_INFINITY; p_max + 2];
    for k in (1..=p_max).rev() {
        suffix[k] = log_sum_exp([suffix[k + 1], -ws.lambda(k)]);
    }
    let g_vals: Vec<f64> = (1..=half).map(|j| ws.lambda(j) - (j as f64).ln() + suffix[j]).collect();
    let mut gamma = trend_report("gamma1", &g_vals, 1);
    gamma.statistic = gamma.statistic.exp();
    gamma.witness = gamma.witness.map(|(i, v)| (i, v.exp()));
    gamma.note = Some(format!(
        "inner series truncated at P = {p_max}; last retained term 1/mu_P = {:e}",
        (-ws.lambda(p_max)).exp()
    ));

    Ok(vec![mg, beta1, beta3, gamma])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    /// `ws1 <= ws2`: statistic `max_j (ln M1_j - ln M2_j) / j`.
    pub forward: PropertyReport,
    /// `ws2 <= ws1`.
    pub backward: PropertyReport,
    pub equivalent: Verdict,
}

pub fn compare_sequences(ws1: &WeightSequence, ws2: &WeightSequence) -> Result<Comparison> {
    if ws1.horizon() != ws2.horizon() {
        return Err(Error::HorizonMismatch { left: ws1.horizon(), right: ws2.horizon() });
    }
    let p_max = ws1.horizon();
    let fwd: Vec<f64> = (1..=p_max).map(|j| (ws1.log_m(j) - ws2.log_m(j)) / j as f64).collect();
    let bwd: Vec<f64> = fwd.iter().map(|v| -v).collect();
    let forward = trend_report("precedes", &fwd, 1);
    let backward = trend_report("preceded-by", &bwd, 1);
    let equivalent = match (forward.verdict, backward.verdict) {
        (Verdict::HoldsOnHorizon, Verdict::HoldsOnHorizon) => Verdict::HoldsOnHorizon,
        (Verdict::Fails, _) | (_, Verdict::Fails) => Verdict::Fails,
        _ => Verdict::Inconclusive,
    };
    Ok(Comparison { forward, backward, equivalent })
}

/// Smallest candidate `H` with `2 omega(t) <= omega(H t) + H` at every
/// sample `ln t`; fails with the worst sample for the largest candidate.
pub fn omega6_check(ws: &WeightSequence, h_candidates: &[f64], logt_samples: &[f64]) -> Result<PropertyReport> {
    if h_candidates.is_empty() || logt_samples.is_empty() {
        return Err(invalid("need at least one candidate H and one sample"));
    }
    if h_candidates.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
        return Err(invalid("candidates H must be positive"));
    }
    let om = Omega::new(ws)?;
    let mut hs = h_candidates.to_vec();
    hs.sort_by(f64::total_cmp);
    let mut worst = (0usize, f64::NEG_INFINITY);
    for &h in &hs {
        worst = (0, f64::NEG_INFINITY);
        for (i, &x) in logt_samples.iter().enumerate() {
            let excess = 2.0 * om.at_log(x)? - om.at_log(x + h.ln())? - h;
            if excess > worst.1 {
                worst = (i, excess);
            }
        }
        if worst.1 <= tol::BOUND {
            return Ok(PropertyReport {
                property: "omega6".into(),
                statistic: h,
                window: (0, logt_samples.len() - 1),
                verdict: Verdict::HoldsOnHorizon,
                witness: None,
                note: None,
            });
        }
    }
    Ok(PropertyReport {
        property: "omega6".into(),
        statistic: hs[hs.len() - 1],
        window: (0, logt_samples.len() - 1),
        verdict: Verdict::Fails,
        witness: Some(worst),
        note: Some("witness is (sample index, excess of 2 omega(t) over omega(Ht) + H) for the largest H".into()),
    })
}
