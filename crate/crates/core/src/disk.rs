//! The disc case: radial weights `v(r) = exp(-omega_M(1 / (1 - c r)))` on
//! `|z| < 1/c`, the anchors `k_p = p (mu_{p+1} - 1)` at which the maximizer
//! of `r^k v(r)` hits an interval endpoint, and the disc block expressions.

use crate::assoc::Omega;
use crate::condition_b::{AbOracle, LuskyCertificate};
use crate::error::{invalid, Error, Result};
use crate::hull::{block_stats_with, require_verified, BlockOptions, BlockReport, CoefficientPrefix};
use crate::numeric::{close, ln_one_minus_exp_neg};
use crate::sequence::WeightSequence;

fn check_c(c: f64) -> Result<()> {
    if c > 0.0 && c.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("c must be positive, got {c}")))
    }
}

fn guard(ws: &WeightSequence) -> Result<()> {
    ws.require_lc()?;
    if ws.horizon() < 2 || !(ws.lambda(2) > 0.0) {
        return Err(Error::Degenerate("the disc case needs mu_2 > 1".into()));
    }
    Ok(())
}

/// `k_p = p (mu_{p+1} - 1)`, erroring once it leaves the double range.
fn anchor(ws: &WeightSequence, p: usize) -> Result<f64> {
    let lam = ws.lambda(p + 1);
    if !(lam > 0.0) {
        return Err(Error::Degenerate(format!("mu_{} = 1 gives k_{p} = 0", p + 1)));
    }
    let k = p as f64 * lam.exp_m1();
    if !k.is_finite() {
        return Err(Error::Overflow(format!(
            "k_{p} = {p} (mu_{} - 1) exceeds the double range (lambda = {lam})",
            p + 1
        )));
    }
    Ok(k)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskMaxRow {
    pub p: usize,
    pub k_p: f64,
    /// `ln r` with `r = (1 - 1/mu_{p+1}) / c`.
    pub log_r: f64,
    /// `ln v(r) = ln M_{p+1} - (p+1) lambda_{p+1}`.
    pub log_v: f64,
}

/// Maximizer data at the anchor `k_p`.
pub fn disk_geometry(ws: &WeightSequence, c: f64, p: usize) -> Result<DiskMaxRow> {
    check_c(c)?;
    guard(ws)?;
    if p < 1 {
        return Err(invalid("p must be at least 1"));
    }
    if p + 1 > ws.horizon() {
        return Err(Error::HorizonExceeded { needed: p + 1, horizon: ws.horizon() });
    }
    let k_p = anchor(ws, p)?;
    let lam = ws.lambda(p + 1);
    let log_r = ln_one_minus_exp_neg(lam) - c.ln();
    let log_v = ws.log_m(p + 1) - (p + 1) as f64 * lam;
    let via_s = -(p as f64 / k_p).ln_1p() - c.ln();
    if !close(via_s, log_r, 1e-12) {
        return Err(Error::Inconsistent(format!("k/(c(k+p)) gives ln r = {via_s}, endpoint gives {log_r}")));
    }
    Ok(DiskMaxRow { p, k_p, log_r, log_v })
}

/// `ln(r^k v(r))` with `v(r) = exp(-omega_M(1/(1 - c r)))`, for `0 < r < 1/c`.
pub fn log_g(ws: &WeightSequence, c: f64, k: f64, log_r: f64) -> Result<f64> {
    check_c(c)?;
    let cr = c * log_r.exp();
    if !(cr < 1.0) {
        return Err(invalid(format!("r = {} is outside (0, 1/c)", log_r.exp())));
    }
    let om = Omega::new(ws)?;
    Ok(k * log_r - om.at_log(-(-cr).ln_1p())?)
}

/// Maximizer of `r^k v(r)` for real `k > 0` by the interval case analysis.
/// Returns the interval index `p` (0 for the constant regime) and `ln r`.
pub fn disk_maximizer(ws: &WeightSequence, c: f64, k: f64) -> Result<(usize, f64)> {
    check_c(c)?;
    guard(ws)?;
    if !(k > 0.0 && k.is_finite()) {
        return Err(invalid(format!("k must be positive, got {k}")));
    }
    // r^k v(r) is log-concave in r, so the first piece whose stationary
    // point is not past its right end holds the maximizer, clamped to the
    // left end when the stationary point falls short of it (a kink).
    let lc = c.ln();
    let l1 = ws.lambda(1);
    if k <= l1.exp_m1() {
        return Ok((0, ln_one_minus_exp_neg(l1) - lc));
    }
    for p in 1..ws.horizon() {
        let s = -(p as f64 / k).ln_1p() - lc;
        let lo = if ws.lambda(p) > 0.0 { ln_one_minus_exp_neg(ws.lambda(p)) - lc } else { f64::NEG_INFINITY };
        let hi = ln_one_minus_exp_neg(ws.lambda(p + 1)) - lc;
        if s <= hi {
            return Ok((p, s.max(lo)));
        }
    }
    Err(Error::HorizonExceeded { needed: ws.horizon() + 1, horizon: ws.horizon() })
}

fn check_pq(ws: &WeightSequence, p: usize, q: usize) -> Result<()> {
    if p < 1 || p >= q {
        return Err(Error::InvalidIndices { k: p, l: q, reason: "need 1 <= p < q".into() });
    }
    if q + 1 > ws.horizon() {
        return Err(Error::HorizonExceeded { needed: q + 1, horizon: ws.horizon() });
    }
    Ok(())
}

/// `(ln A_D(p, q), ln B_D(p, q))` from the closed forms in the quotients.
/// The `B` form carries the exponent `k_q + p + 1` on `mu_{p+1}`, which is
/// what [`disk_log_ab_direct`] reproduces.
///
/// Written out, `ln A = k_p ln((mu_{p+1}-1)/(mu_{q+1}-1)) + (k_p+q) lambda_{q+1}
/// - (p mu_{p+1} + 1) lambda_{p+1} - sum_{i=p+2}^{q} lambda_i`. The terms are
/// of size `k_p lambda` while the result is O(1), so they are regrouped with
/// `p mu_{p+1} = k_p + p` before summing.
pub fn disk_log_ab(ws: &WeightSequence, p: usize, q: usize) -> Result<(f64, f64)> {
    guard(ws)?;
    check_pq(ws, p, q)?;
    let kp = anchor(ws, p)?;
    let kq = anchor(ws, q)?;
    let (lp, lq) = (ws.lambda(p + 1), ws.lambda(q + 1));
    // ln((mu_{p+1}-1)/(mu_{q+1}-1)) + lambda_{q+1} - lambda_{p+1}
    let ratio = ln_one_minus_exp_neg(lp) - ln_one_minus_exp_neg(lq);
    let mid: f64 = (p + 2..=q).map(|i| ws.lambda(i)).sum();
    let (pf, qf) = (p as f64, q as f64);
    let log_a = kp * ratio + qf * lq - (pf + 1.0) * lp - mid;
    let log_b = -kq * ratio + (pf + 1.0) * lp + mid - qf * lq;
    Ok((log_a, log_b))
}

/// The same pair straight from the definition
/// `ln A = k_p (ln r_p - ln r_q) + ln v(r_p) - ln v(r_q)` and symmetrically
/// for `B` with `k_q`.
pub fn disk_log_ab_direct(ws: &WeightSequence, p: usize, q: usize) -> Result<(f64, f64)> {
    guard(ws)?;
    check_pq(ws, p, q)?;
    let gp = disk_geometry(ws, 1.0, p)?;
    let gq = disk_geometry(ws, 1.0, q)?;
    let log_a = gp.k_p * (gp.log_r - gq.log_r) + gp.log_v - gq.log_v;
    let log_b = gq.k_p * (gq.log_r - gp.log_r) + gq.log_v - gp.log_v;
    Ok((log_a, log_b))
}

/// Disc-case oracle for the generic Lusky search.
#[derive(Debug, Clone, Copy)]
pub struct DiskOracle<'a>(pub &'a WeightSequence);

impl AbOracle for DiskOracle<'_> {
    fn sequence_name(&self) -> &str {
        self.0.name()
    }

    fn max_index(&self) -> usize {
        self.0.horizon().saturating_sub(1)
    }

    fn log_ab(&self, k: usize, l: usize) -> Result<(f64, f64)> {
        disk_log_ab(self.0, k, l)
    }
}

/// Block statistics with radius `(1 - 1/mu_{a_j+1}) / c`.
pub fn disk_block_stats(
    ws: &WeightSequence,
    cert: &LuskyCertificate,
    c: f64,
    coeffs: &CoefficientPrefix,
    opts: BlockOptions,
) -> Result<BlockReport> {
    check_c(c)?;
    guard(ws)?;
    require_verified(&DiskOracle(ws), cert)?;
    let lc = c.ln();
    block_stats_with(
        ws,
        cert,
        coeffs,
        opts,
        |lam| {
            if lam > 0.0 {
                ln_one_minus_exp_neg(lam) - lc
            } else {
                f64::NEG_INFINITY
            }
        },
    )
}
