//! Solid hull and solid core block statistics for coefficient prefixes.

use crate::assoc::Omega;
use crate::condition_b::{verify_certificate, AbOracle, EntireOracle, LuskyCertificate};
use crate::error::{invalid, Error, Result};
use crate::growth::Verdict;
use crate::numeric::{log_sum_exp, ls_slope};
use crate::sequence::WeightSequence;

/// `ln |b_l|` for `l = 0..=N`; `-inf` encodes a zero coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientPrefix {
    logabs: Vec<f64>,
}

impl CoefficientPrefix {
    pub fn new(logabs: Vec<f64>) -> Result<Self> {
        if logabs.is_empty() {
            return Err(Error::Empty);
        }
        if let Some(i) = logabs.iter().position(|x| x.is_nan() || *x == f64::INFINITY) {
            return Err(Error::NonFinite { index: i, value: logabs[i] });
        }
        Ok(CoefficientPrefix { logabs })
    }

    pub fn zeros(len: usize) -> Self {
        CoefficientPrefix { logabs: vec![f64::NEG_INFINITY; len.max(1)] }
    }

    /// Largest index `N`.
    pub fn max_index(&self) -> usize {
        self.logabs.len() - 1
    }

    pub fn logabs(&self) -> &[f64] {
        &self.logabs
    }

    pub fn get(&self, l: usize) -> f64 {
        self.logabs[l]
    }

    /// Multiply every coefficient by `e^shift`.
    pub fn scaled(&self, shift: f64) -> Self {
        CoefficientPrefix { logabs: self.logabs.iter().map(|x| x + shift).collect() }
    }

    /// `b_l -> e^{l * log_ratio} b_l`.
    pub fn reweighted(&self, log_ratio: f64) -> Self {
        CoefficientPrefix { logabs: self.logabs.iter().enumerate().map(|(l, x)| x + l as f64 * log_ratio).collect() }
    }
}

/// Which quotient anchors a block: `mu_{a_j + 1}` or the shifted
/// `mu_{a_{j+1} + 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Anchor {
    #[default]
    Start,
    Next,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockOptions {
    pub anchor: Anchor,
    /// Largest `|slope|` (nats per block) over the last third of blocks that
    /// still counts as bounded.
    pub slope_threshold: f64,
}

impl Default for BlockOptions {
    fn default() -> Self {
        BlockOptions { anchor: Anchor::Start, slope_threshold: 0.01 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockRow {
    /// 1-based block index.
    pub j: usize,
    pub a_j: usize,
    pub a_j1: usize,
    pub log_hull: f64,
    pub log_core: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockReport {
    pub rows: Vec<BlockRow>,
    pub sup_hull: f64,
    pub sup_core: f64,
    pub slope_hull: Option<f64>,
    pub slope_core: Option<f64>,
    pub bounded_hull: Verdict,
    pub bounded_core: Verdict,
}

fn tail_slope(rows: &[BlockRow], stat: impl Fn(&BlockRow) -> f64, threshold: f64) -> (Option<f64>, Verdict) {
    let start = rows.len() - rows.len() / 3;
    let pts: Vec<(f64, f64)> =
        rows[start.min(rows.len())..].iter().map(|r| (r.j as f64, stat(r))).filter(|(_, y)| y.is_finite()).collect();
    if pts.len() < 3 {
        return (None, Verdict::Inconclusive);
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let slope = ls_slope(&xs, &ys);
    let verdict = match slope {
        Some(s) if s.abs() < threshold => Verdict::HoldsOnHorizon,
        Some(_) => Verdict::Fails,
        None => Verdict::Inconclusive,
    };
    (slope, verdict)
}

/// Shared block mechanics: `log_radius(lambda)` turns the anchor quotient into
/// the log of the evaluation radius.
pub(crate) fn block_stats_with<F: Fn(f64) -> f64>(
    ws: &WeightSequence,
    cert: &LuskyCertificate,
    coeffs: &CoefficientPrefix,
    opts: BlockOptions,
    log_radius: F,
) -> Result<BlockReport> {
    let n = coeffs.max_index();
    if cert.a.len() < 2 || n < cert.a[1] {
        return Err(invalid(format!(
            "coefficient prefix (max index {n}) is shorter than the first block ending at {}",
            cert.a.get(1).copied().unwrap_or(0)
        )));
    }
    let mut rows = Vec::new();
    for (i, w) in cert.a.windows(2).enumerate() {
        let (aj, aj1) = (w[0], w[1]);
        if aj1 > n {
            break;
        }
        let m = match opts.anchor {
            Anchor::Start => aj + 1,
            Anchor::Next => aj1 + 1,
        };
        if m > ws.horizon() {
            return Err(Error::HorizonExceeded { needed: m, horizon: ws.horizon() });
        }
        let lam = ws.lambda(m);
        let prefactor = ws.log_m(m) - m as f64 * lam;
        let rho = log_radius(lam);
        let terms: Vec<f64> = (aj + 1..=aj1).map(|l| coeffs.get(l) + l as f64 * rho).collect();
        let hull = 0.5 * log_sum_exp(terms.iter().map(|t| 2.0 * t));
        let core = log_sum_exp(terms.iter().copied());
        rows.push(BlockRow { j: i + 1, a_j: aj, a_j1: aj1, log_hull: prefactor + hull, log_core: prefactor + core });
    }
    let sup_hull = rows.iter().map(|r| r.log_hull).fold(f64::NEG_INFINITY, f64::max);
    let sup_core = rows.iter().map(|r| r.log_core).fold(f64::NEG_INFINITY, f64::max);
    let (slope_hull, bounded_hull) = tail_slope(&rows, |r| r.log_hull, opts.slope_threshold);
    let (slope_core, bounded_core) = tail_slope(&rows, |r| r.log_core, opts.slope_threshold);
    Ok(BlockReport { rows, sup_hull, sup_core, slope_hull, slope_core, bounded_hull, bounded_core })
}

pub(crate) fn require_verified<O: AbOracle + ?Sized>(oracle: &O, cert: &LuskyCertificate) -> Result<()> {
    let v = verify_certificate(oracle, cert)?;
    match v.first_failure {
        Some(row) => Err(Error::UnverifiedCertificate { row }),
        None => Ok(()),
    }
}

/// Per-block hull (l2) and core (l1) statistics in the entire case, with
/// block radius `mu_{a_j+1} / c`.
pub fn block_stats(
    ws: &WeightSequence,
    cert: &LuskyCertificate,
    c: f64,
    coeffs: &CoefficientPrefix,
    opts: BlockOptions,
) -> Result<BlockReport> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(invalid(format!("c must be positive, got {c}")));
    }
    require_verified(&EntireOracle(ws), cert)?;
    let lc = c.ln();
    block_stats_with(ws, cert, coeffs, opts, |lam| lam - lc)
}

/// `max over ln r of [ln sum |b_j| r^j - omega_M(c r)]`.
pub fn core_sup_grid(ws: &WeightSequence, c: f64, coeffs: &CoefficientPrefix, logr_grid: &[f64]) -> Result<f64> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(invalid(format!("c must be positive, got {c}")));
    }
    if logr_grid.is_empty() {
        return Err(invalid("empty radius grid"));
    }
    let om = Omega::new(ws)?;
    let lc = c.ln();
    let mut best = f64::NEG_INFINITY;
    for &y in logr_grid {
        let series = log_sum_exp(coeffs.logabs().iter().enumerate().map(|(j, b)| b + j as f64 * y));
        let val = series - om.at_log(lc + y)?;
        best = best.max(val);
    }
    Ok(best)
}

/// `ln D` for the smallest `D` with `|b_j| <= D c^j / M_j` on the prefix.
pub fn coeff_class_bound(ws: &WeightSequence, c: f64, coeffs: &CoefficientPrefix) -> Result<f64> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(invalid(format!("c must be positive, got {c}")));
    }
    let lc = c.ln();
    let top = coeffs.max_index().min(ws.horizon());
    Ok((0..=top).map(|j| coeffs.get(j) + ws.log_m(j) - j as f64 * lc).fold(f64::NEG_INFINITY, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::condition_b::{search_lusky, SearchOutcome, SearchParams};
    use crate::sequence::{family, FamilySpec};
    use proptest::prelude::*;

    const LN2: f64 = std::f64::consts::LN_2;

    fn qgevrey_setup(horizon: usize) -> (WeightSequence, LuskyCertificate) {
        let ws = family(&FamilySpec::new("qgevrey:2".parse().unwrap(), horizon)).unwrap();
        let SearchOutcome::Certificate(cert) =
            search_lusky(&EntireOracle(&ws), SearchParams::new(1.0, 10.0, 1)).unwrap()
        else {
            panic!()
        };
        (ws, cert)
    }

    #[test]
    fn zero_coefficients() {
        let (ws, cert) = qgevrey_setup(60);
        let rep = block_stats(&ws, &cert, 1.0, &CoefficientPrefix::zeros(60), BlockOptions::default()).unwrap();
        assert!(rep.rows.iter().all(|r| r.log_hull == f64::NEG_INFINITY && r.log_core == f64::NEG_INFINITY));
        assert_eq!(rep.sup_core, f64::NEG_INFINITY);
    }

    #[test]
    fn qgevrey_boundary_blocks_are_constant() {
        let (ws, cert) = qgevrey_setup(80);
        let logabs: Vec<f64> =
            (0..=79).map(|l| if l % 2 == 0 && l > 0 { -((l * l) as f64) * LN2 } else { f64::NEG_INFINITY }).collect();
        let rep =
            block_stats(&ws, &cert, 1.0, &CoefficientPrefix::new(logabs).unwrap(), BlockOptions::default()).unwrap();
        for r in &rep.rows {
            // direct: ln M_{2j} - 2j lambda_{2j} + ln b_{2j} + 2j lambda_{2j}
            let l = r.a_j + 1;
            let direct = ws.log_m(l) - ((l * l) as f64) * LN2;
            assert!((r.log_core - direct).abs() < 1e-9);
            assert!(r.log_core.abs() < 1e-9 && r.log_hull.abs() < 1e-9);
        }
        assert_eq!(rep.bounded_core, Verdict::HoldsOnHorizon);
    }

    #[test]
    fn unverified_certificate_rejected() {
        let (ws, mut cert) = qgevrey_setup(60);
        cert.logb = 3.0;
        cert.log_k = 3.5;
        let err = block_stats(&ws, &cert, 1.0, &CoefficientPrefix::zeros(60), BlockOptions::default()).unwrap_err();
        assert!(matches!(err, Error::UnverifiedCertificate { row: 0 }));
        let (ws, cert) = qgevrey_setup(60);
        assert!(block_stats(&ws, &cert, 1.0, &CoefficientPrefix::zeros(2), BlockOptions::default()).is_err());
    }

    #[test]
    fn core_sup_examples() {
        let ws = family(&FamilySpec::new("gevrey:1".parse().unwrap(), 400)).unwrap();
        let mut one = vec![f64::NEG_INFINITY; 30];
        one[0] = 0.0;
        let grid: Vec<f64> = (0..200).map(|i| -8.0 + i as f64 * 0.06).collect();
        let v = core_sup_grid(&ws, 1.0, &CoefficientPrefix::new(one.clone()).unwrap(), &grid).unwrap();
        assert!(v.abs() < 1e-15);
        let boundary: Vec<f64> = (0..=60).map(|j| -ws.log_m(j)).collect();
        let b = CoefficientPrefix::new(boundary).unwrap();
        let s1 = core_sup_grid(&ws, 1.0, &b, &grid).unwrap();
        let s2 = core_sup_grid(&ws, 1.0, &b.scaled(LN2), &grid).unwrap();
        assert!(s1.is_finite() && (s2 - s1 - LN2).abs() < 1e-12);
    }

    #[test]
    fn coeff_bound_examples() {
        let ws = family(&FamilySpec::new("gevrey:1".parse().unwrap(), 40)).unwrap();
        let inv_fact: Vec<f64> = (0..=40).map(|j| -ws.log_m(j)).collect();
        let b = CoefficientPrefix::new(inv_fact).unwrap();
        assert!(coeff_class_bound(&ws, 1.0, &b).unwrap().abs() < 1e-12);
        assert!((coeff_class_bound(&ws, 1.0, &b.scaled(LN2)).unwrap() - LN2).abs() < 1e-12);
        assert_eq!(coeff_class_bound(&ws, 1.0, &CoefficientPrefix::zeros(10)).unwrap(), f64::NEG_INFINITY);
        let c = 3.0f64;
        let scaled = b.reweighted(c.ln());
        assert!(coeff_class_bound(&ws, c, &scaled).unwrap().abs() < 1e-12);
    }

    fn coeffs(n: usize) -> impl Strategy<Value = CoefficientPrefix> {
        proptest::collection::vec(prop_oneof![1 => Just(f64::NEG_INFINITY), 4 => -200.0f64..5.0], n..=n)
            .prop_map(|v| CoefficientPrefix::new(v).unwrap())
    }

    proptest! {
        #[test]
        fn norm_sandwich_and_homogeneity(b in coeffs(101), shift in -5.0f64..5.0) {
            let (ws, cert) = qgevrey_setup(120);
            let rep = block_stats(&ws, &cert, 1.0, &b, BlockOptions::default()).unwrap();
            for r in &rep.rows {
                if r.log_core.is_finite() {
                    let d = r.log_core - r.log_hull;
                    prop_assert!(d >= -1e-12 && d <= 0.5 * ((r.a_j1 - r.a_j) as f64).ln() + 1e-12);
                }
            }
            let shifted = block_stats(&ws, &cert, 1.0, &b.scaled(shift), BlockOptions::default()).unwrap();
            for (r, s) in rep.rows.iter().zip(&shifted.rows) {
                if r.log_core.is_finite() {
                    prop_assert!((s.log_core - r.log_core - shift).abs() < 1e-9);
                    prop_assert!((s.log_hull - r.log_hull - shift).abs() < 1e-9);
                }
            }
        }

        #[test]
        fn c_shift_and_forward_shift(b in coeffs(101), c in 0.2f64..5.0, d in 0.2f64..5.0) {
            let (ws, cert) = qgevrey_setup(120);
            let base = block_stats(&ws, &cert, c, &b, BlockOptions::default()).unwrap();
            let moved = block_stats(&ws, &cert, d, &b.reweighted((d / c).ln()), BlockOptions::default()).unwrap();
            for (r, s) in base.rows.iter().zip(&moved.rows) {
                if r.log_core.is_finite() {
                    // rounding scale: the largest term entering the block sum
                    let scale = r.a_j1 as f64 * (ws.lambda(r.a_j + 1) + c.ln().abs() + d.ln().abs()) + ws.log_m(r.a_j + 1).abs() + 200.0;
                    prop_assert!((r.log_core - s.log_core).abs() <= 1e-12 * scale);
                    prop_assert!((r.log_hull - s.log_hull).abs() <= 1e-12 * scale);
                }
            }
            let shifted = block_stats(&ws, &cert.forward_shift(1).unwrap(), c, &b, BlockOptions::default()).unwrap();
            for (r, s) in base.rows[1..].iter().zip(&shifted.rows) {
                prop_assert_eq!((r.a_j, r.a_j1), (s.a_j, s.a_j1));
                prop_assert!(r.log_core == s.log_core && r.log_hull == s.log_hull);
            }
        }

        #[test]
        fn core_sup_dominates_block(b in coeffs(61), pick in 0usize..25) {
            let (ws, cert) = qgevrey_setup(120);
            let rep = block_stats(&ws, &cert, 1.0, &b, BlockOptions::default()).unwrap();
            let row = &rep.rows[pick.min(rep.rows.len() - 1)];
            let y = ws.lambda(row.a_j + 1);
            let sup = core_sup_grid(&ws, 1.0, &b, &[y]).unwrap();
            prop_assert!(sup >= row.log_core - 1e-9 * row.log_core.abs().max(1.0));
        }
    }
}
