//! The associated weight function `omega_M`, its companions `h_M` and
//! `Sigma_M`, and conversion between sampled weight functions and sequences.
//!
//! All evaluations take `ln t` where possible; `t` itself overflows long
//! before the sequences of interest run out.

use crate::error::{invalid, Error, Result};
use crate::numeric::{golden_section_max, tol};
use crate::sequence::WeightSequence;

/// Evaluator for `omega_M` bound to a sequence that has been checked to be
/// normalized and log-convex once.
#[derive(Debug, Clone, Copy)]
pub struct Omega<'a> {
    ws: &'a WeightSequence,
}

impl<'a> Omega<'a> {
    pub fn new(ws: &'a WeightSequence) -> Result<Self> {
        ws.require_lc()?;
        Ok(Omega { ws })
    }

    pub fn sequence(&self) -> &'a WeightSequence {
        self.ws
    }

    /// Largest `ln t` inside the horizon coverage, i.e. `lambda_P`.
    pub fn coverage(&self) -> f64 {
        self.ws.lambda(self.ws.horizon())
    }

    /// `j_t = #{p : lambda_p <= ln t}`.
    pub fn index(&self, logt: f64) -> usize {
        self.ws.lambdas().partition_point(|&l| l <= logt)
    }

    /// `omega_M(e^logt)`; errors beyond `mu_P`.
    pub fn at_log(&self, logt: f64) -> Result<f64> {
        if logt.is_nan() {
            return Err(invalid("log t is NaN"));
        }
        if logt > self.coverage() {
            return Err(Error::OutsideCoverage { logt, limit: self.coverage() });
        }
        let j = self.index(logt);
        if j == 0 {
            return Ok(0.0);
        }
        Ok(j as f64 * logt - self.ws.log_m(j))
    }
}

/// `omega_M(t)` for `t > 0`.
pub fn omega_eval(ws: &WeightSequence, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(invalid(format!("t must be positive, got {t}")));
    }
    Omega::new(ws)?.at_log(t.ln())
}

/// `ln h_M(t) = -omega_M(1/t)`.
pub fn h_eval(ws: &WeightSequence, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(invalid(format!("t must be positive, got {t}")));
    }
    Ok(-Omega::new(ws)?.at_log(-t.ln())?)
}

/// `Sigma_M(t)` on the horizon. `saturated` is set when every stored
/// quotient is `<= t`, so the true count may be larger.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Count {
    pub count: usize,
    pub saturated: bool,
}

pub fn counting_log(ws: &WeightSequence, logt: f64) -> Count {
    let count = ws.lambdas().partition_point(|&l| l <= logt);
    Count { count, saturated: count == ws.horizon() }
}

pub fn counting_eval(ws: &WeightSequence, t: f64) -> Count {
    counting_log(ws, t.ln())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RamificationRow {
    pub logt: f64,
    /// `omega_M(t^r)`.
    pub omega_m: f64,
    /// `omega_{P^{M,r}}(t)`.
    pub omega_p: f64,
    /// `None` when both sides vanish.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatioClass {
    One,
    RSquared,
    Neither,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RamificationReport {
    pub r: usize,
    pub rows: Vec<RamificationRow>,
    pub max_dev_from_one: f64,
    pub max_dev_from_r2: f64,
    pub class: RatioClass,
    /// Always populated; states the empirical ratio next to the `r^2`
    /// relation found in the literature.
    pub note: String,
}

/// Compare `omega_M(t^r)` with `omega_{P^{M,r}}(t)` at the given `ln t`.
pub fn ramification_check(ws: &WeightSequence, r: usize, logt_samples: &[f64]) -> Result<RamificationReport> {
    let om = Omega::new(ws)?;
    let interp = ws.interpolate(r)?;
    let op = Omega::new(&interp)?;
    let rf = r as f64;
    let mut rows = Vec::with_capacity(logt_samples.len());
    let (mut dev1, mut dev2) = (0.0f64, 0.0f64);
    for &x in logt_samples {
        let omega_m = om.at_log(rf * x)?;
        let omega_p = op.at_log(x)?;
        let ratio = if omega_p == 0.0 && omega_m == 0.0 { None } else { Some(omega_m / omega_p) };
        if let Some(q) = ratio {
            dev1 = dev1.max((q - 1.0).abs());
            dev2 = dev2.max((q - rf * rf).abs() / (rf * rf));
        }
        rows.push(RamificationRow { logt: x, omega_m, omega_p, ratio });
    }
    let any = rows.iter().any(|r| r.ratio.is_some());
    let class = if !any {
        RatioClass::Undetermined
    } else if dev1 <= tol::IDENTITY_REL {
        RatioClass::One
    } else if dev2 <= tol::IDENTITY_REL {
        RatioClass::RSquared
    } else {
        RatioClass::Neither
    };
    let observed = match class {
        RatioClass::One => "1".to_string(),
        RatioClass::RSquared => format!("r^2 = {}", r * r),
        RatioClass::Neither => format!("neither 1 nor r^2 (max deviation from 1: {dev1:.3e})"),
        RatioClass::Undetermined => "undetermined (all samples in the zero region)".to_string(),
    };
    let note = if r == 1 {
        format!("r = 1: the interpolating sequence is M itself; empirical ratio {observed}")
    } else {
        format!(
            "discrepancy: the r^2 scaling omega_M(t^r) = r^2 omega_P(t) does not hold (r^2 = {}), \
             but the empirical ratio omega_M(t^r)/omega_P(t) is {observed}; consistent with Sigma_P(t) = r Sigma_M(t^r)",
            r * r
        )
    };
    Ok(RamificationReport { r, rows, max_dev_from_one: dev1, max_dev_from_r2: dev2, class, note })
}

/// Sampled `ln v` on a `ln t` grid, linearly interpolated in `ln t`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightFunctionGrid {
    logt: Vec<f64>,
    logv: Vec<f64>,
    normalized: bool,
    convex: bool,
}

impl WeightFunctionGrid {
    /// Validates shape, ordering, monotonicity and (when claimed)
    /// normalization; records whether `x -> -ln v(e^x)` is convex.
    pub fn new(logt: Vec<f64>, logv: Vec<f64>, normalized: bool) -> Result<Self> {
        if logt.len() < 3 {
            return Err(Error::Grid("need at least three grid points".into()));
        }
        if logt.len() != logv.len() {
            return Err(Error::Grid(format!("logt has {} points but logv has {}", logt.len(), logv.len())));
        }
        if let Some(i) = logt.iter().chain(&logv).position(|x| !x.is_finite()) {
            return Err(Error::Grid(format!("non-finite entry at flat position {i}")));
        }
        if let Some(i) = logt.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::Grid(format!("logt not strictly increasing at index {}", i + 1)));
        }
        for i in 1..logv.len() {
            if logv[i] > logv[i - 1] + 1e-12 * logv[i - 1].abs().max(1.0) {
                return Err(Error::Grid(format!("logv increases at index {i}")));
            }
        }
        if normalized {
            if let Some(i) = logt.iter().zip(&logv).position(|(t, v)| *t <= 0.0 && v.abs() > tol::GRID) {
                return Err(Error::Grid(format!("normalized grid has logv = {} at logt = {} <= 0", logv[i], logt[i])));
            }
        }
        let convex = (1..logt.len() - 1).all(|i| {
            let s0 = (logv[i - 1] - logv[i]) / (logt[i] - logt[i - 1]);
            let s1 = (logv[i] - logv[i + 1]) / (logt[i + 1] - logt[i]);
            s1 >= s0 - 1e-8 * s0.abs().max(1.0)
        });
        Ok(WeightFunctionGrid { logt, logv, normalized, convex })
    }

    /// `ln v = f(ln t)` on the given grid.
    pub fn from_fn<F: Fn(f64) -> f64>(logt: Vec<f64>, f: F, normalized: bool) -> Result<Self> {
        let logv = logt.iter().map(|&x| f(x)).collect();
        Self::new(logt, logv, normalized)
    }

    /// `v_M(t) = exp(-omega_M(t))` sampled on `logt`.
    pub fn from_sequence(ws: &WeightSequence, logt: Vec<f64>) -> Result<Self> {
        let om = Omega::new(ws)?;
        let logv = logt.iter().map(|&x| om.at_log(x).map(|w| -w)).collect::<Result<Vec<_>>>()?;
        Self::new(logt, logv, true)
    }

    /// `n` equally spaced points on `[lo, hi]`.
    pub fn uniform(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        let step = (hi - lo) / (n - 1) as f64;
        (0..n).map(|i| if i == n - 1 { hi } else { lo + i as f64 * step }).collect()
    }

    pub fn logt(&self) -> &[f64] {
        &self.logt
    }

    pub fn logv(&self) -> &[f64] {
        &self.logv
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn is_convex(&self) -> bool {
        self.convex
    }

    /// The weight `u(s) = v(s^{1/r})^r` on the stretched grid.
    pub fn ramify(&self, r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(invalid("ramification exponent must be positive"));
        }
        Self::new(self.logt.iter().map(|x| r * x).collect(), self.logv.iter().map(|v| r * v).collect(), self.normalized)
    }

    /// `ln v` at `x = ln t` by linear interpolation. Left of the grid a
    /// normalized weight is 1 for `x <= 0`; anything else off-grid errors.
    pub fn logv_at(&self, x: f64) -> Result<f64> {
        let n = self.logt.len();
        if x < self.logt[0] {
            if self.normalized && x <= 0.0 {
                return Ok(0.0);
            }
            return Err(Error::Grid(format!("log t = {x} is left of the grid start {}", self.logt[0])));
        }
        if x > self.logt[n - 1] {
            return Err(Error::Grid(format!("log t = {x} is right of the grid end {}", self.logt[n - 1])));
        }
        let i = self.logt.partition_point(|&t| t <= x);
        if i >= n {
            return Ok(self.logv[n - 1]);
        }
        let (x0, x1) = (self.logt[i - 1], self.logt[i]);
        let (v0, v1) = (self.logv[i - 1], self.logv[i]);
        Ok(v0 + (v1 - v0) * (x - x0) / (x1 - x0))
    }

    /// Index of the grid maximizer of `m x + ln v(e^x)`; ties resolve to the
    /// rightmost node, matching the canonical anchor `r_k = mu_{k+1}`.
    fn argmax_node(&self, m: f64) -> (usize, f64) {
        let vals: Vec<f64> = self.logt.iter().zip(&self.logv).map(|(x, v)| m * x + v).collect();
        let best = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let slack = 1e-12 * best.abs().max(1.0);
        let i = vals.iter().rposition(|v| *v >= best - slack).unwrap_or(0);
        (i, vals[i])
    }

    /// Whether `k x + ln v(e^x)` peaks strictly inside the grid.
    pub fn rapid_decay_ok(&self, k: f64) -> bool {
        self.argmax_node(k).0 + 1 < self.logt.len()
    }

    /// Maximizer `(x_m, value)` of `m x + ln v(e^x)`: grid scan followed by
    /// golden-section refinement between the neighbouring nodes.
    pub fn maximize(&self, m: f64) -> Result<(f64, f64)> {
        let (i, node_val) = self.argmax_node(m);
        let n = self.logt.len();
        if i == 0 || i + 1 == n {
            return Err(Error::GridBoundary { m });
        }
        let f = |x: f64| m * x + self.logv_at(x).unwrap_or(f64::NEG_INFINITY);
        let (x, fx) = golden_section_max(f, self.logt[i - 1], self.logt[i + 1], tol::GOLDEN);
        if fx > node_val + 1e-13 * node_val.abs().max(1.0) {
            Ok((x, fx))
        } else {
            Ok((self.logt[i], node_val))
        }
    }
}

/// The associated weight sequence `M^v` and the maximizers `ln t_p`.
pub fn conjugate_with_maximizers(w: &WeightFunctionGrid, horizon: usize) -> Result<(WeightSequence, Vec<f64>)> {
    if !w.normalized {
        return Err(Error::Grid("conjugation needs a normalized weight".into()));
    }
    if !w.convex {
        return Err(Error::Grid("conjugation needs x -> -ln v(e^x) convex on the grid".into()));
    }
    if horizon == 0 {
        return Err(invalid("horizon must be positive"));
    }
    let mut log_m = Vec::with_capacity(horizon);
    let mut maximizers = Vec::with_capacity(horizon);
    for p in 1..=horizon {
        let (x, val) = w.maximize(p as f64).map_err(|e| match e {
            Error::GridBoundary { .. } => Error::RapidDecay { p },
            other => other,
        })?;
        log_m.push(val);
        maximizers.push(x);
    }
    // The conjugate is log-convex; rounding in the maxima can break that by a
    // few ulps, which is clamped. Anything larger is reported.
    let mut lambda: Vec<f64> = Vec::with_capacity(horizon);
    let mut prev = 0.0;
    for (i, &l) in log_m.iter().enumerate() {
        let mut d = l - prev;
        prev = l;
        if let Some(&last) = lambda.last() {
            if d < last {
                if last - d > tol::GRID * last.abs().max(1.0) {
                    return Err(Error::Inconsistent(format!("conjugate quotients decrease at p = {}", i + 1)));
                }
                d = last;
            }
        }
        lambda.push(d);
    }
    Ok((WeightSequence::named("conjugate", lambda)?, maximizers))
}

/// `M^v_p = sup_t t^p v(t)` for `p = 1..=horizon`.
pub fn conjugate_sequence(w: &WeightFunctionGrid, horizon: usize) -> Result<WeightSequence> {
    conjugate_with_maximizers(w, horizon).map(|(ws, _)| ws)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SandwichReport {
    /// `sup (omega^v - 2 omega_{M^v})` over the samples.
    pub log_a: f64,
    /// Largest `omega_{M^v} - omega^v`, which must stay below tolerance.
    pub max_lower_violation: f64,
}

/// Check `omega_{M^v} <= omega^v` at the samples and report the smallest
/// `ln A` with `omega^v <= 2 omega_{M^v} + ln A`.
pub fn sandwich_check(
    w: &WeightFunctionGrid,
    ws: &WeightSequence,
    logt_samples: &[f64],
    tolerance: f64,
) -> Result<SandwichReport> {
    let om = Omega::new(ws)?;
    let mut log_a = f64::NEG_INFINITY;
    let mut worst = f64::NEG_INFINITY;
    for &x in logt_samples {
        let omega_v = -w.logv_at(x)?;
        let omega_m = om.at_log(x)?;
        worst = worst.max(omega_m - omega_v);
        if omega_m > omega_v + tolerance {
            return Err(Error::Inconsistent(format!(
                "omega_M^v = {omega_m} exceeds omega^v = {omega_v} at log t = {x}"
            )));
        }
        log_a = log_a.max(omega_v - 2.0 * omega_m);
    }
    Ok(SandwichReport { log_a, max_lower_violation: worst })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightAb {
    pub logt_k: f64,
    pub logt_l: f64,
    pub log_a: f64,
    pub log_b: f64,
}

/// `A_v(k, l)` and `B_v(k, l)` from the numerically located maximizers. When
/// `conjugate` is given and `k`, `l` are integers within its horizon, the
/// sequence forms are cross-checked at `tolerance`.
pub fn weight_ab_numeric(
    w: &WeightFunctionGrid,
    k: f64,
    l: f64,
    conjugate: Option<&WeightSequence>,
    tolerance: f64,
) -> Result<WeightAb> {
    if !(k > 0.0 && k < l && l.is_finite()) {
        return Err(invalid(format!("need 0 < k < l, got k = {k}, l = {l}")));
    }
    let (xk, vk) = w.maximize(k)?;
    let (xl, vl) = w.maximize(l)?;
    let lvk = vk - k * xk;
    let lvl = vl - l * xl;
    let log_a = k * (xk - xl) + lvk - lvl;
    let log_b = l * (xl - xk) + lvl - lvk;
    if let Some(ms) = conjugate {
        let integral = k.fract() == 0.0 && l.fract() == 0.0 && (l as usize) <= ms.horizon();
        if integral {
            let (ki, li) = (k as usize, l as usize);
            let dm = ms.log_m(li) - ms.log_m(ki);
            let seq_a = (l - k) * xl - dm;
            let seq_b = dm - (l - k) * xk;
            if (seq_a - log_a).abs() > tolerance * log_a.abs().max(1.0)
                || (seq_b - log_b).abs() > tolerance * log_b.abs().max(1.0)
            {
                return Err(Error::Inconsistent(format!(
                    "sequence form ({seq_a}, {seq_b}) disagrees with weight form ({log_a}, {log_b})"
                )));
            }
        }
    }
    Ok(WeightAb { logt_k: xk, logt_l: xl, log_a, log_b })
}
