//! Finite-horizon weight sequences stored as log-quotients.
//!
//! A sequence `M` with `M_0 = 1` is kept as `lambda[p - 1] = ln mu_p` for
//! `p = 1..=P`, where `mu_p = M_p / M_{p-1}`, together with the prefix sums
//! `log_m[p] = ln M_p`.

use std::fmt;
use std::str::FromStr;

use crate::condition_b;
use crate::error::{invalid, Error, Result};

/// Largest horizon any constructor will produce.
pub const MAX_HORIZON: usize = 1 << 26;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightSequence {
    name: String,
    lambda: Vec<f64>,
    log_m: Vec<f64>,
}

impl WeightSequence {
    /// Build from `lambda_1..lambda_P`. Normalization and log-convexity are
    /// reported by [`is_normalized`](Self::is_normalized) and
    /// [`is_log_convex`](Self::is_log_convex), not enforced.
    pub fn from_log_quotients(lambda: Vec<f64>) -> Result<Self> {
        Self::named("custom", lambda)
    }

    pub fn named(name: impl Into<String>, lambda: Vec<f64>) -> Result<Self> {
        if lambda.is_empty() {
            return Err(Error::Empty);
        }
        if lambda.len() > MAX_HORIZON {
            return Err(invalid(format!("horizon {} exceeds the maximum {MAX_HORIZON}", lambda.len())));
        }
        let mut log_m = Vec::with_capacity(lambda.len() + 1);
        log_m.push(0.0);
        let mut acc = 0.0;
        for (i, &l) in lambda.iter().enumerate() {
            if !l.is_finite() {
                return Err(Error::NonFinite { index: i + 1, value: l });
            }
            acc += l;
            if !acc.is_finite() {
                return Err(Error::NonFinite { index: i + 1, value: acc });
            }
            log_m.push(acc);
        }
        Ok(WeightSequence { name: name.into(), lambda, log_m })
    }

    fn from_parts(name: String, lambda: Vec<f64>, log_m: Vec<f64>) -> Self {
        debug_assert_eq!(lambda.len() + 1, log_m.len());
        WeightSequence { name, lambda, log_m }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// The horizon `P`.
    pub fn horizon(&self) -> usize {
        self.lambda.len()
    }

    /// `lambda_p` for `p` in `0..=P` (`lambda_0 = 0`). Panics beyond `P`.
    pub fn lambda(&self, p: usize) -> f64 {
        if p == 0 {
            0.0
        } else {
            self.lambda[p - 1]
        }
    }

    /// `lambda_1..lambda_P`.
    pub fn lambdas(&self) -> &[f64] {
        &self.lambda
    }

    /// `ln M_p` for `p` in `0..=P`. Panics beyond `P`.
    pub fn log_m(&self, p: usize) -> f64 {
        self.log_m[p]
    }

    /// `ln M_0..ln M_P`.
    pub fn log_ms(&self) -> &[f64] {
        &self.log_m
    }

    pub fn is_normalized(&self) -> bool {
        self.lambda[0] >= 0.0
    }

    pub fn is_log_convex(&self) -> bool {
        self.convexity_break().is_none()
    }

    /// First `p` with `lambda_p < lambda_{p-1}`, if any.
    pub fn convexity_break(&self) -> Option<usize> {
        self.lambda.windows(2).position(|w| w[1] < w[0]).map(|i| i + 2)
    }

    /// Error unless the sequence is normalized and log-convex.
    pub fn require_lc(&self) -> Result<()> {
        if !self.is_normalized() {
            return Err(Error::NotNormalized { lambda1: self.lambda[0] });
        }
        if let Some(index) = self.convexity_break() {
            return Err(Error::NotLogConvex { index });
        }
        Ok(())
    }

    /// Increments `delta_p = lambda_p - lambda_{p-1}`, adjusted by at most a
    /// few ulps so that [`from_deltas`](Self::from_deltas) reproduces `lambda`
    /// bit for bit. That is possible whenever the increment is no coarser
    /// than `lambda_p` itself, which covers every non-negative,
    /// non-decreasing sequence. A sign change after a value much larger in
    /// magnitude can leave an error of one ulp of the increment.
    pub fn deltas(&self) -> DeltaSeq {
        let mut prev = 0.0f64;
        let mut delta = Vec::with_capacity(self.lambda.len());
        for &lam in &self.lambda {
            let mut d = lam - prev;
            for _ in 0..16 {
                let s = prev + d;
                if s == lam {
                    break;
                }
                d = if s < lam { d.next_up() } else { d.next_down() };
            }
            delta.push(d);
            // Track the value the running sum will actually hold so that a
            // step that cannot land exactly does not push later ones off.
            prev += d;
        }
        DeltaSeq { delta }
    }

    /// Rebuild from increments by running summation. Negative increments are
    /// rejected unless `allow_non_lc` is set.
    pub fn from_deltas(ds: &DeltaSeq, allow_non_lc: bool) -> Result<Self> {
        if ds.delta.is_empty() {
            return Err(Error::Empty);
        }
        let mut lambda = Vec::with_capacity(ds.delta.len());
        let mut prev = 0.0;
        for (i, &d) in ds.delta.iter().enumerate() {
            if !d.is_finite() {
                return Err(Error::NonFinite { index: i + 1, value: d });
            }
            if d < 0.0 && !allow_non_lc {
                return Err(Error::NegativeDelta { index: i + 1, value: d });
            }
            prev += d;
            lambda.push(prev);
        }
        Self::named("from-deltas", lambda)
    }

    /// The `s`-th power `M^s`.
    pub fn power_scale(&self, s: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(invalid(format!("power s must be positive and finite, got {s}")));
        }
        let lambda = self.lambda.iter().map(|l| s * l).collect();
        let log_m = self.log_m.iter().map(|l| s * l).collect();
        Ok(Self::from_parts(format!("({})^{s}", self.name), lambda, log_m))
    }

    /// Product `M * N` or quotient `M / N`.
    pub fn combine(&self, other: &WeightSequence, mode: Combine) -> Result<Self> {
        if self.horizon() != other.horizon() {
            return Err(Error::HorizonMismatch { left: self.horizon(), right: other.horizon() });
        }
        let sign = match mode {
            Combine::Product => 1.0,
            Combine::Quotient => -1.0,
        };
        let lambda = self.lambda.iter().zip(&other.lambda).map(|(a, b)| a + sign * b).collect();
        let log_m = self.log_m.iter().zip(&other.log_m).map(|(a, b)| a + sign * b).collect();
        let op = match mode {
            Combine::Product => "*",
            Combine::Quotient => "/",
        };
        Ok(Self::from_parts(format!("({}){op}({})", self.name, other.name), lambda, log_m))
    }

    /// The r-interpolating sequence: horizon `r * P`, quotients
    /// `lambda'_{rk+j} = lambda_{k+1} / r` for `j = 1..=r`. `ln M'_{rk}` is
    /// copied from `ln M_k` so the anchor identity holds exactly.
    pub fn interpolate(&self, r: usize) -> Result<Self> {
        if r == 0 {
            return Err(invalid("interpolation factor r must be at least 1"));
        }
        let horizon = self.horizon().checked_mul(r).filter(|h| *h <= MAX_HORIZON).ok_or_else(|| {
            invalid(format!("r * P = {r} * {} exceeds the maximum horizon {MAX_HORIZON}", self.horizon()))
        })?;
        let rf = r as f64;
        let mut lambda = Vec::with_capacity(horizon);
        let mut log_m = Vec::with_capacity(horizon + 1);
        log_m.push(0.0);
        for k in 0..self.horizon() {
            let q = self.lambda[k] / rf;
            let (lo, hi) = (self.log_m[k], self.log_m[k + 1]);
            for j in 1..=r {
                lambda.push(q);
                log_m.push(if j == r { hi } else { lo + j as f64 * q });
            }
        }
        Ok(Self::from_parts(format!("{}|interp{r}", self.name), lambda, log_m))
    }

    /// The first `horizon` quotients.
    pub fn truncate(&self, horizon: usize) -> Result<Self> {
        if horizon == 0 || horizon > self.horizon() {
            return Err(invalid(format!("truncation horizon {horizon} not in 1..={}", self.horizon())));
        }
        Ok(Self::from_parts(self.name.clone(), self.lambda[..horizon].to_vec(), self.log_m[..=horizon].to_vec()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Combine {
    Product,
    Quotient,
}

/// Increments `delta_p = ln(mu_p / mu_{p-1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaSeq {
    pub delta: Vec<f64>,
}

impl DeltaSeq {
    pub fn new(delta: Vec<f64>) -> Self {
        DeltaSeq { delta }
    }

    pub fn horizon(&self) -> usize {
        self.delta.len()
    }

    /// `delta_p` for `p` in `1..=P`. Panics outside that range.
    pub fn get(&self, p: usize) -> f64 {
        self.delta[p - 1]
    }
}

/// How the gaps of a generated Lusky chain evolve.
#[derive(Debug, Clone, PartialEq)]
pub enum GapRule {
    /// Every gap equals the given value.
    Constant(usize),
    /// `a_{j+1} - a_j = j + 2`.
    Linear,
}

impl GapRule {
    /// Chain starting at `a_1 = 1`, extended while `a_{j+1} + 1 <= horizon`.
    pub fn chain(&self, horizon: usize) -> Vec<usize> {
        let mut a = vec![1usize];
        for j in 1.. {
            let g = match self {
                GapRule::Constant(g) => *g,
                GapRule::Linear => j + 2,
            };
            let next = a[a.len() - 1] + g;
            if next + 1 > horizon {
                break;
            }
            a.push(next);
        }
        a
    }
}

/// Piecewise-constant quotients: `mu_p = c_j` for `b_j <= p < b_{j+1}`.
#[derive(Debug, Clone, PartialEq)]
pub enum StepRule {
    /// `b_j = Q^{j-1}`, `c_j = D^{b_j}`.
    PowerLevels { ratio: usize, base: f64 },
    /// `b_i = 2^i`, `c_i = base^i` for `i >= 0`.
    Dyadic { base: f64 },
    /// Explicit starts `b_1 = 1 < b_2 < ...` and levels `ln c_j`.
    Explicit { starts: Vec<usize>, log_levels: Vec<f64> },
}

impl StepRule {
    fn expand(&self, horizon: usize) -> Result<(Vec<usize>, Vec<f64>)> {
        match self {
            StepRule::PowerLevels { ratio, base } => {
                if *ratio < 2 {
                    return Err(invalid("block ratio Q must be at least 2"));
                }
                if !(*base > 1.0) {
                    return Err(invalid("block base D must exceed 1"));
                }
                let mut starts = vec![];
                let mut levels = vec![];
                let mut b = 1usize;
                while b <= horizon {
                    starts.push(b);
                    levels.push(b as f64 * base.ln());
                    b = b.saturating_mul(*ratio);
                }
                Ok((starts, levels))
            }
            StepRule::Dyadic { base } => {
                if !(*base > 1.0) {
                    return Err(invalid("dyadic base must exceed 1"));
                }
                let mut starts = vec![];
                let mut levels = vec![];
                let mut b = 1usize;
                let mut i = 0u32;
                while b <= horizon {
                    starts.push(b);
                    levels.push(i as f64 * base.ln());
                    b = b.saturating_mul(2);
                    i += 1;
                }
                Ok((starts, levels))
            }
            StepRule::Explicit { starts, log_levels } => {
                if starts.is_empty() || starts.len() != log_levels.len() {
                    return Err(invalid("explicit steps need equally many starts and levels"));
                }
                if starts[0] != 1 {
                    return Err(invalid("first block must start at b_1 = 1"));
                }
                if starts.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(invalid("block starts must be strictly increasing"));
                }
                if log_levels.windows(2).any(|w| w[1] <= w[0]) || log_levels.iter().any(|l| !l.is_finite()) {
                    return Err(invalid("block levels must be finite and strictly increasing"));
                }
                Ok((starts.clone(), log_levels.clone()))
            }
        }
    }
}

/// The built-in families.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Gevrey {
        s: f64,
    },
    HarmonicGevrey {
        s: f64,
    },
    QGevrey {
        q: f64,
    },
    QAlphaGevrey {
        q: f64,
        alpha: f64,
    },
    BlockSteps(StepRule),
    /// The two-spike construction realizing a prescribed Lusky chain.
    Lusky {
        gaps: GapRule,
        c: f64,
    },
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Gevrey { s } => write!(f, "gevrey:{s}"),
            Family::HarmonicGevrey { s } => write!(f, "harmonic:{s}"),
            Family::QGevrey { q } => write!(f, "qgevrey:{q}"),
            Family::QAlphaGevrey { q, alpha } => write!(f, "qalpha:{q},{alpha}"),
            Family::BlockSteps(StepRule::PowerLevels { ratio, base }) => write!(f, "steps:{ratio},{base}"),
            Family::BlockSteps(StepRule::Dyadic { base }) => write!(f, "dyadic:{base}"),
            Family::BlockSteps(StepRule::Explicit { .. }) => write!(f, "steps:explicit"),
            Family::Lusky { gaps: GapRule::Linear, c } => write!(f, "lusky:linear,{c}"),
            Family::Lusky { gaps: GapRule::Constant(g), c } => write!(f, "lusky:{g},{c}"),
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    /// Parses `gevrey:s`, `harmonic:s`, `qgevrey:q`, `qalpha:q,alpha`,
    /// `steps:Q,D`, `dyadic:base`, `lusky:linear,C` and `lusky:g,C`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, args) =
            s.split_once(':').ok_or_else(|| invalid(format!("family {s:?} is not of the form kind:params")))?;
        let nums = |n: usize| -> Result<Vec<f64>> {
            let v: Vec<f64> = args
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| invalid(format!("family {s:?}: parameters must be numbers")))?;
            if v.len() != n {
                return Err(invalid(format!("family {s:?}: expected {n} parameter(s)")));
            }
            Ok(v)
        };
        let fam = match kind {
            "gevrey" => Family::Gevrey { s: nums(1)?[0] },
            "harmonic" => Family::HarmonicGevrey { s: nums(1)?[0] },
            "qgevrey" => Family::QGevrey { q: nums(1)?[0] },
            "qalpha" => {
                let v = nums(2)?;
                Family::QAlphaGevrey { q: v[0], alpha: v[1] }
            }
            "steps" => {
                let v = nums(2)?;
                if v[0].fract() != 0.0 || v[0] < 2.0 {
                    return Err(invalid("steps:Q,D needs an integer Q >= 2"));
                }
                Family::BlockSteps(StepRule::PowerLevels { ratio: v[0] as usize, base: v[1] })
            }
            "dyadic" => Family::BlockSteps(StepRule::Dyadic { base: nums(1)?[0] }),
            "lusky" => {
                let (g, c) =
                    args.split_once(',').ok_or_else(|| invalid("lusky family is lusky:linear,C or lusky:g,C"))?;
                let c: f64 = c.trim().parse().map_err(|_| invalid("lusky: C must be a number"))?;
                let gaps = if g.trim() == "linear" {
                    GapRule::Linear
                } else {
                    GapRule::Constant(
                        g.trim().parse().map_err(|_| invalid("lusky: gap must be an integer or 'linear'"))?,
                    )
                };
                Family::Lusky { gaps, c }
            }
            _ => return Err(invalid(format!("unknown family kind {kind:?}"))),
        };
        fam.validate()?;
        Ok(fam)
    }
}

impl Family {
    fn validate(&self) -> Result<()> {
        let pos = |x: f64, what: &str| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(invalid(format!("{what} must be positive, got {x}")))
            }
        };
        match self {
            Family::Gevrey { s } | Family::HarmonicGevrey { s } => pos(*s, "s"),
            Family::QGevrey { q } => {
                if *q > 1.0 && q.is_finite() {
                    Ok(())
                } else {
                    Err(invalid(format!("q must exceed 1, got {q}")))
                }
            }
            Family::QAlphaGevrey { q, alpha } => {
                if !(*q > 1.0 && q.is_finite()) {
                    return Err(invalid(format!("q must exceed 1, got {q}")));
                }
                if !(*alpha > 2.0 && alpha.is_finite()) {
                    return Err(invalid(format!("alpha must exceed 2, got {alpha}")));
                }
                Ok(())
            }
            Family::BlockSteps(_) => Ok(()),
            Family::Lusky { gaps, c } => {
                if let GapRule::Constant(g) = gaps {
                    if *g < 2 {
                        return Err(invalid("Lusky gaps must be at least 2"));
                    }
                }
                if !(*c >= 3.0 && c.is_finite()) {
                    return Err(invalid(format!("C must be at least 3, got {c}")));
                }
                Ok(())
            }
        }
    }
}

/// A family together with its horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilySpec {
    pub variant: Family,
    pub horizon: usize,
}

impl FamilySpec {
    pub fn new(variant: Family, horizon: usize) -> Self {
        FamilySpec { variant, horizon }
    }

    pub fn build(&self) -> Result<WeightSequence> {
        family(self)
    }
}

/// Generate the quotients of a built-in family.
pub fn family(spec: &FamilySpec) -> Result<WeightSequence> {
    let p_max = spec.horizon;
    if p_max == 0 {
        return Err(invalid("horizon must be positive"));
    }
    if p_max > MAX_HORIZON {
        return Err(invalid(format!("horizon {p_max} exceeds the maximum {MAX_HORIZON}")));
    }
    spec.variant.validate()?;
    let name = spec.variant.to_string();
    let lambda: Vec<f64> = match &spec.variant {
        Family::Gevrey { s } => (1..=p_max).map(|p| s * (p as f64).ln()).collect(),
        Family::HarmonicGevrey { s } => {
            let mut h = 0.0;
            (1..=p_max)
                .map(|p| {
                    h += 1.0 / p as f64;
                    s * h
                })
                .collect()
        }
        Family::QGevrey { q } => (1..=p_max).map(|p| (2 * p - 1) as f64 * q.ln()).collect(),
        Family::QAlphaGevrey { q, alpha } => (1..=p_max)
            .map(|p| {
                let p = p as f64;
                (p.powf(*alpha) - (p - 1.0).powf(*alpha)) * q.ln()
            })
            .collect(),
        Family::BlockSteps(rule) => {
            let (starts, levels) = rule.expand(p_max)?;
            if starts.len() < 2 || starts[1] > p_max {
                return Err(invalid(format!("horizon {p_max} is too small to contain one full block of {name}")));
            }
            let mut j = 0;
            (1..=p_max)
                .map(|p| {
                    while j + 1 < starts.len() && starts[j + 1] <= p {
                        j += 1;
                    }
                    levels[j]
                })
                .collect()
        }
        Family::Lusky { gaps, c } => {
            let a = gaps.chain(p_max);
            return Ok(condition_b::build_from_lusky(&a, *c, p_max)?.with_name(name));
        }
    };
    WeightSequence::named(name, lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const LN2: f64 = std::f64::consts::LN_2;

    fn fam(s: &str, horizon: usize) -> WeightSequence {
        family(&FamilySpec::new(s.parse().unwrap(), horizon)).unwrap()
    }

    #[test]
    fn from_log_quotients_examples() {
        let ws = WeightSequence::from_log_quotients(vec![0.0]).unwrap();
        assert_eq!(ws.horizon(), 1);
        assert_eq!(ws.log_ms(), &[0.0, 0.0]);

        let ws = WeightSequence::from_log_quotients(vec![LN2, 2.0 * LN2, 3.0 * LN2]).unwrap();
        assert!((ws.log_m(3) - 6.0 * LN2).abs() < 1e-15);

        let ws = WeightSequence::from_log_quotients(vec![1.0, 0.5, 2.0]).unwrap();
        assert!(!ws.is_log_convex());
        assert_eq!(ws.convexity_break(), Some(2));
    }

    #[test]
    fn rejects_non_finite_with_index() {
        let err = WeightSequence::from_log_quotients(vec![0.0, f64::NAN]).unwrap_err();
        assert!(matches!(err, Error::NonFinite { index: 2, .. }));
        assert!(matches!(WeightSequence::from_log_quotients(vec![]), Err(Error::Empty)));
    }

    #[test]
    fn delta_examples() {
        let ws = WeightSequence::from_log_quotients(vec![1.0, 3.0, 6.0]).unwrap();
        assert_eq!(ws.deltas().delta, vec![1.0, 2.0, 3.0]);
        let flat = WeightSequence::from_deltas(&DeltaSeq::new(vec![0.0; 3]), false).unwrap();
        assert_eq!(flat.lambdas(), &[0.0, 0.0, 0.0]);
        let neg = DeltaSeq::new(vec![1.0, -0.5]);
        assert!(matches!(WeightSequence::from_deltas(&neg, false), Err(Error::NegativeDelta { index: 2, .. })));
        assert_eq!(WeightSequence::from_deltas(&neg, true).unwrap().lambdas(), &[1.0, 0.5]);
    }

    #[test]
    fn family_examples() {
        assert!((fam("qgevrey:2", 5).lambda(3) - 5.0 * LN2).abs() < 1e-15);
        assert!((fam("gevrey:1", 5).log_m(4) - 24f64.ln()).abs() < 1e-14);
        assert!((fam("harmonic:1", 5).lambda(3) - 11.0 / 6.0).abs() < 1e-15);
        let q = fam("qalpha:2,3", 4);
        assert!((q.lambda(2) - 7.0 * LN2).abs() < 1e-14);
    }

    #[test]
    fn block_steps_examples() {
        let cor = fam("steps:2,2", 20);
        // lambda_p = 2^floor(log2 p) ln 2
        for p in 1..=20usize {
            let b = 1usize << (usize::BITS - 1 - p.leading_zeros());
            assert!((cor.lambda(p) - b as f64 * LN2).abs() < 1e-14, "p = {p}");
        }
        let dy = fam("dyadic:3", 20);
        assert_eq!(dy.lambda(1), 0.0);
        assert!((dy.lambda(7) - 2.0 * 3f64.ln()).abs() < 1e-15);
        assert!((dy.lambda(8) - 3.0 * 3f64.ln()).abs() < 1e-15);
        assert!(family(&FamilySpec::new("steps:4,2".parse().unwrap(), 3)).is_err());
    }

    #[test]
    fn family_parse_errors() {
        assert!("qgevrey:1".parse::<Family>().is_err());
        assert!("qalpha:2,2".parse::<Family>().is_err());
        assert!("gevrey:-1".parse::<Family>().is_err());
        assert!("nope:1".parse::<Family>().is_err());
        assert!("lusky:1,3".parse::<Family>().is_err());
        assert_eq!("qalpha:2,3".parse::<Family>().unwrap().to_string(), "qalpha:2,3");
    }

    #[test]
    fn power_and_combine_examples() {
        let q2 = fam("qgevrey:2", 30);
        let q4 = fam("qgevrey:4", 30);
        let sq = q2.power_scale(2.0).unwrap();
        let prod = q2.combine(&q2, Combine::Product).unwrap();
        for p in 1..=30 {
            assert!((sq.lambda(p) - q4.lambda(p)).abs() < 1e-12);
            assert!((prod.lambda(p) - q4.lambda(p)).abs() < 1e-12);
        }
        let half = WeightSequence::from_log_quotients(vec![2.0, 4.0]).unwrap().power_scale(0.5).unwrap();
        assert_eq!(half.lambdas(), &[1.0, 2.0]);
        assert!(q2.power_scale(0.0).is_err());
        let g2 = fam("gevrey:2", 10);
        let g1 = fam("gevrey:1", 10);
        let quo = g2.combine(&g1, Combine::Quotient).unwrap();
        for p in 1..=10 {
            assert!((quo.lambda(p) - g1.lambda(p)).abs() < 1e-14);
        }
        let flat = WeightSequence::from_log_quotients(vec![0.0; 10]).unwrap();
        assert_eq!(g1.combine(&flat, Combine::Product).unwrap().lambdas(), g1.lambdas());
        assert!(matches!(g1.combine(&q2, Combine::Product), Err(Error::HorizonMismatch { .. })));
    }

    #[test]
    fn interpolate_examples() {
        let ws = WeightSequence::from_log_quotients(vec![1.0, 2.0]).unwrap();
        assert_eq!(ws.interpolate(1).unwrap().lambdas(), ws.lambdas());
        let i2 = ws.interpolate(2).unwrap();
        assert_eq!(i2.lambdas(), &[0.5, 0.5, 1.0, 1.0]);
        assert_eq!(i2.log_m(2), 1.0);
        let g = fam("gevrey:1", 20).interpolate(2).unwrap();
        let mut fact = 0.0;
        for k in 1..=20 {
            fact += (k as f64).ln();
            assert!((g.log_m(2 * k) - fact).abs() < 1e-12);
        }
        assert!(ws.interpolate(0).is_err());
        assert!(ws.interpolate(MAX_HORIZON).is_err());
    }

    /// Non-negative, not necessarily monotone: each entry is at least half
    /// the previous one.
    fn dipping_lambda() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec((0.5f64..1.0, 0.0f64..1e5), 1..80).prop_map(|v| {
            let mut prev = 0.0f64;
            v.into_iter()
                .map(|(f, x)| {
                    prev = if x < 5e4 { prev * f } else { prev + x };
                    prev
                })
                .collect()
        })
    }

    fn lc_lambda() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(prop_oneof![Just(0.0), 0.0f64..3.0], 1..60).prop_map(|d| {
            let mut acc = 0.0;
            d.into_iter()
                .map(|x| {
                    acc += x;
                    acc
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn delta_round_trip_is_bitwise(lambda in dipping_lambda()) {
            let ws = WeightSequence::from_log_quotients(lambda.clone()).unwrap();
            let back = WeightSequence::from_deltas(&ws.deltas(), true).unwrap();
            prop_assert_eq!(back.lambdas(), &lambda[..]);
        }

        #[test]
        fn delta_round_trip_mixed_signs(lambda in proptest::collection::vec(-1e6f64..1e6, 1..80)) {
            let ws = WeightSequence::from_log_quotients(lambda.clone()).unwrap();
            let back = WeightSequence::from_deltas(&ws.deltas(), true).unwrap();
            let mut prev = 0.0f64;
            for (b, l) in back.lambdas().iter().zip(&lambda) {
                let scale = prev.abs() + l.abs();
                prop_assert!((b - l).abs() <= f64::EPSILON * scale, "{} vs {}", b, l);
                prev = *l;
            }
        }

        #[test]
        fn lc_round_trip_needs_no_flag(lambda in lc_lambda()) {
            let ws = WeightSequence::from_log_quotients(lambda.clone()).unwrap();
            let back = WeightSequence::from_deltas(&ws.deltas(), false).unwrap();
            prop_assert_eq!(back.lambdas(), &lambda[..]);
        }

        #[test]
        fn power_scale_is_pointwise(lambda in lc_lambda(), s in 0.01f64..20.0) {
            let ws = WeightSequence::from_log_quotients(lambda).unwrap();
            let sc = ws.power_scale(s).unwrap();
            for p in 1..=ws.horizon() {
                prop_assert_eq!(sc.lambda(p), s * ws.lambda(p));
            }
        }

        #[test]
        fn interpolation_anchors(lambda in lc_lambda(), r in 1usize..6) {
            let ws = WeightSequence::from_log_quotients(lambda).unwrap();
            let ip = ws.interpolate(r).unwrap();
            for j in 0..=ws.horizon() {
                prop_assert!((ip.log_m(r * j) - ws.log_m(j)).abs() <= 1e-12);
            }
            for p in 1..=ip.horizon() {
                prop_assert!((ip.log_m(p) - ip.log_m(p - 1) - ip.lambda(p)).abs() <= 1e-12 * ip.log_m(p).abs().max(1.0));
            }
        }

        #[test]
        fn families_are_lc(p in 1usize..400, s in 0.1f64..4.0, q in 1.01f64..5.0, alpha in 2.01f64..4.0) {
            for f in [
                Family::Gevrey { s },
                Family::HarmonicGevrey { s },
                Family::QGevrey { q },
                Family::QAlphaGevrey { q, alpha },
            ] {
                let ws = family(&FamilySpec::new(f, p)).unwrap();
                prop_assert!(ws.is_normalized() && ws.is_log_convex());
            }
        }

        #[test]
        fn block_steps_dc_bound(ratio in 2usize..5, d in 1.1f64..4.0, horizon in 16usize..600) {
            let ws = family(&FamilySpec::new(Family::BlockSteps(StepRule::PowerLevels { ratio, base: d }), horizon)).unwrap();
            prop_assert!(ws.is_normalized() && ws.is_log_convex());
            for p in 1..=horizon {
                prop_assert!(ws.lambda(p) <= p as f64 * d.ln() * (1.0 + 1e-15));
            }
        }
    }
}
