//! Iteration schemes and contraction certificates.
//!
//! The generalized iterates of `f` at `x` are produced by the lifted map
//! `f̃(x) = (f(x), x_0, x_1, ...)`: after `k` steps the state is
//! `(x^k, ..., x^1, x_0, x_1, ...)`. A [`ContractionCertificate`] witnessing
//! `L_{s,q}(f) < 1` or `L_{p,q}(f) < (1-q)^{1/p}` makes `f̃` a Banach
//! contraction, which yields the a priori bounds used to pick iteration counts.

use crate::error::{ensure_finite, Error, Result};
use crate::maps::{truncate, FiniteArityMap, LinearSeqMap, MapRef, SeqMap};
use crate::metrics::{pow_n, Metric, PExponent};
use crate::sequences::BoundedSeq;

/// Hard cap on the number of generalized iterates a single solve may run.
pub const MAX_STEPS: usize = 50_000;

/// Bisection rounds used when searching for a sup-metric certificate.
const BISECTION_ROUNDS: usize = 50;

/// Largest exponent probed by [`find_p_certificate`] (`2^20`).
const MAX_P_DOUBLINGS: u32 = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContractionCertificate {
    /// `L_{s,q}(f) <= lipschitz < 1`, `q ∈ (0, 1)`.
    SupQ { q: f64, lipschitz: f64 },
    /// `L_{p,q}(f) <= lipschitz < (1-q)^{1/p}`, `q ∈ (0, 1)`.
    PQ {
        p: PExponent,
        q: f64,
        lipschitz: f64,
    },
}

impl ContractionCertificate {
    pub fn sup_q(q: f64, lipschitz: f64) -> Result<Self> {
        let cert = ContractionCertificate::SupQ { q, lipschitz };
        cert.validate()?;
        Ok(cert)
    }

    pub fn pq(p: f64, q: f64, lipschitz: f64) -> Result<Self> {
        let cert = ContractionCertificate::PQ {
            p: PExponent::new(p)?,
            q,
            lipschitz,
        };
        cert.validate()?;
        Ok(cert)
    }

    pub fn validate(&self) -> Result<()> {
        let q = self.q();
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidCertificate(format!("q = {q} outside (0, 1)")));
        }
        let l = self.lipschitz();
        if !(l.is_finite() && l >= 0.0) {
            return Err(Error::InvalidCertificate(format!(
                "Lipschitz constant {l} must be finite and nonnegative"
            )));
        }
        match *self {
            ContractionCertificate::SupQ { .. } if l >= 1.0 => Err(Error::InvalidCertificate(
                format!("L_s,q = {l} is not below 1"),
            )),
            ContractionCertificate::PQ { p, q, .. } => {
                let limit = (1.0 - q).powf(1.0 / p.get());
                if l < limit {
                    Ok(())
                } else {
                    Err(Error::InvalidCertificate(format!(
                        "L_p,q = {l} is not below (1-q)^(1/p) = {limit}"
                    )))
                }
            }
            _ => Ok(()),
        }
    }

    pub fn q(&self) -> f64 {
        match *self {
            ContractionCertificate::SupQ { q, .. } | ContractionCertificate::PQ { q, .. } => q,
        }
    }

    pub fn lipschitz(&self) -> f64 {
        match *self {
            ContractionCertificate::SupQ { lipschitz, .. }
            | ContractionCertificate::PQ { lipschitz, .. } => lipschitz,
        }
    }

    pub fn metric(&self) -> Metric {
        match *self {
            ContractionCertificate::SupQ { q, .. } => Metric::Sup { q },
            ContractionCertificate::PQ { p, q, .. } => Metric::P { p, q },
        }
    }

    /// Lipschitz constant of the lifted map in the certificate's metric.
    pub fn contraction_factor(&self) -> f64 {
        match *self {
            ContractionCertificate::SupQ { q, lipschitz } => lipschitz.max(q),
            ContractionCertificate::PQ { p, q, lipschitz } => {
                (lipschitz.powf(p.get()) + q).powf(1.0 / p.get())
            }
        }
    }

    /// Upper bound on the Lipschitz constant of `t ↦ f(t, t, ...)`.
    pub fn diagonal_lipschitz(&self) -> f64 {
        match *self {
            ContractionCertificate::SupQ { lipschitz, .. } => lipschitz,
            ContractionCertificate::PQ { p, q, lipschitz } => {
                lipschitz / (1.0 - q).powf(1.0 / p.get())
            }
        }
    }

    /// A priori bound on `|x^k - x*|` given `d1 = D(x̃^1, x̃^0)`, for `k >= 1`.
    pub fn a_priori_bound(&self, k: usize, d1: f64) -> f64 {
        match *self {
            ContractionCertificate::SupQ { q, lipschitz } => {
                a_priori_bound_sup(q, lipschitz, k, d1)
            }
            ContractionCertificate::PQ { p, q, lipschitz } => {
                a_priori_bound_p(p, q, lipschitz, k, d1)
            }
        }
    }

    /// Smallest `k >= 1` whose a priori bound is at most `tol`.
    pub fn steps_for(&self, tol: f64, d1: f64) -> Result<usize> {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::InvalidTolerance(tol));
        }
        let l = self.lipschitz();
        if d1 == 0.0 || l == 0.0 {
            return Ok(1);
        }
        let factor = self.contraction_factor();
        let first = self.a_priori_bound(1, d1);
        let mut k = if first <= tol {
            1
        } else {
            let est = 1.0 + ((tol / first).ln() / factor.ln()).ceil();
            if !est.is_finite() || est > MAX_STEPS as f64 {
                return Err(Error::IterationLimit(MAX_STEPS));
            }
            est.max(1.0) as usize
        };
        while self.a_priori_bound(k, d1) > tol {
            k += 1;
            if k > MAX_STEPS {
                return Err(Error::IterationLimit(MAX_STEPS));
            }
        }
        while k > 1 && self.a_priori_bound(k - 1, d1) <= tol {
            k -= 1;
        }
        Ok(k)
    }
}

/// `L · max(L, q)^{k-1} / (1 - max(L, q)) · d1`.
pub fn a_priori_bound_sup(q: f64, lipschitz: f64, k: usize, d1: f64) -> f64 {
    if d1 == 0.0 {
        return 0.0;
    }
    let m = lipschitz.max(q);
    lipschitz * pow_n(m, k.saturating_sub(1)) / (1.0 - m) * d1
}

/// `L · (L^p + q)^{(k-1)/p} / (1 - (L^p + q)^{1/p}) · d1`.
pub fn a_priori_bound_p(p: PExponent, q: f64, lipschitz: f64, k: usize, d1: f64) -> f64 {
    if d1 == 0.0 {
        return 0.0;
    }
    let p = p.get();
    let base = lipschitz.powf(p) + q;
    let factor = base.powf(1.0 / p);
    lipschitz * base.powf(k.saturating_sub(1) as f64 / p) / (1.0 - factor) * d1
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub k: usize,
    pub x: f64,
    pub bound: Option<f64>,
    /// `|f(x^k, x^k, ...) - x^k|`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct IterationTrace {
    pub rows: Vec<TraceRow>,
    /// `D(x̃^1, x̃^0)` in the certificate's metric, when a certificate was used.
    pub initial_gap: Option<f64>,
}

impl IterationTrace {
    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    pub fn values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.x).collect()
    }
}

/// One application of the lifted map: `(f(x), (f(x), x_0, x_1, ...))`.
pub fn lift_step(f: &dyn SeqMap, x: &BoundedSeq) -> Result<(f64, BoundedSeq)> {
    let v = f.eval(x)?;
    let next = x.shift_in(v)?;
    Ok((v, next))
}

fn iterate(
    f: &dyn SeqMap,
    x0: &BoundedSeq,
    k_max: usize,
    cert: Option<&ContractionCertificate>,
) -> Result<IterationTrace> {
    if k_max == 0 {
        return Err(Error::InvalidMap("k_max must be at least 1".into()));
    }
    if k_max > MAX_STEPS {
        return Err(Error::IterationLimit(MAX_STEPS));
    }
    let mut state = x0.clone();
    let mut trace = IterationTrace::default();
    for k in 1..=k_max {
        let (v, next) = lift_step(f, &state)?;
        if k == 1 {
            if let Some(c) = cert {
                trace.initial_gap = Some(c.metric().distance(&next, x0)?);
            }
        }
        let residual = (f.diagonal_eval(v)? - v).abs();
        let bound = match (cert, trace.initial_gap) {
            (Some(c), Some(d1)) => Some(c.a_priori_bound(k, d1)),
            _ => None,
        };
        trace.rows.push(TraceRow {
            k,
            x: v,
            bound,
            residual,
        });
        state = next;
    }
    Ok(trace)
}

/// The first `k_max` generalized iterates of `f` at `x0`, without bounds.
pub fn generalized_iterates(
    f: &dyn SeqMap,
    x0: &BoundedSeq,
    k_max: usize,
) -> Result<IterationTrace> {
    iterate(f, x0, k_max, None)
}

/// Generalized iterates annotated with the certificate's a priori bounds.
pub fn certified_iterates(
    f: &dyn SeqMap,
    x0: &BoundedSeq,
    cert: &ContractionCertificate,
    k_max: usize,
) -> Result<IterationTrace> {
    cert.validate()?;
    iterate(f, x0, k_max, Some(cert))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub x_star: f64,
    pub k_used: usize,
    pub trace: IterationTrace,
}

/// Runs exactly as many generalized iterates as the a priori bound needs for
/// `|x^k - x*| <= tol`, then checks the residual against
/// `tol (1 + λ) / (1 - λ)` where `λ` bounds the diagonal map's Lipschitz constant.
pub fn solve_gcfp(
    f: &dyn SeqMap,
    x0: &BoundedSeq,
    cert: &ContractionCertificate,
    tol: f64,
) -> Result<Solution> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidTolerance(tol));
    }
    cert.validate()?;
    let (_, first) = lift_step(f, x0)?;
    let d1 = cert.metric().distance(&first, x0)?;
    let k = cert.steps_for(tol, d1)?;
    let trace = iterate(f, x0, k, Some(cert))?;
    let last = *trace.last().expect("k >= 1");
    let lambda = cert.diagonal_lipschitz();
    let allowed = tol * (1.0 + lambda) / (1.0 - lambda) + 1e-12 * (1.0 + last.x.abs());
    if last.residual > allowed {
        return Err(Error::BoundViolation(format!(
            "residual {} at k = {k} exceeds {allowed}",
            last.residual
        )));
    }
    Ok(Solution {
        x_star: last.x,
        k_used: k,
        trace,
    })
}

/// Searches for `q` with `L_{s,q}(f) < 1`.
///
/// Linear maps: bisection on `q` targeting `L_{s,q} = (1 + Σ|b_n|)/2`, the
/// returned constant is exact. Embedded finite maps with a hint `ℓ < 1`:
/// `q^{m-1} = (1 + ℓ)/2`. Every other map is uncertified.
pub fn find_sup_certificate(f: &dyn SeqMap) -> Option<ContractionCertificate> {
    if let Some(lin) = f.as_linear() {
        return linear_sup_certificate(lin);
    }
    if let Some(g) = f.as_finite() {
        return embedded_sup_certificate(g);
    }
    None
}

fn linear_sup_certificate(f: &LinearSeqMap) -> Option<ContractionCertificate> {
    let total = f.sum_abs_coeffs();
    if total >= 1.0 {
        return None;
    }
    if total == 0.0 {
        return ContractionCertificate::sup_q(0.5, 0.0).ok();
    }
    let target = (1.0 + total) / 2.0;
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut best = None;
    for _ in 0..BISECTION_ROUNDS {
        let mid = 0.5 * (lo + hi);
        match f.lip_sq(mid) {
            Ok(l) if l <= target => {
                hi = mid;
                best = Some((mid, l));
            }
            _ => lo = mid,
        }
    }
    let (q, l) = best?;
    ContractionCertificate::sup_q(q, l).ok()
}

fn embedded_sup_certificate(g: &FiniteArityMap) -> Option<ContractionCertificate> {
    let hint = g.lipschitz_hint()?;
    if hint >= 1.0 {
        return None;
    }
    let m = g.arity();
    if m == 1 {
        return ContractionCertificate::sup_q(0.5, hint).ok();
    }
    let q = ((1.0 + hint) / 2.0).powf(1.0 / (m - 1) as f64);
    let l = g.embedded_lip_bound(q)?;
    ContractionCertificate::sup_q(q, l).ok()
}

/// Searches `p ∈ {1, 2, 4, ..., 2^20}` for `L_{p,q0}(f) < (1-q0)^{1/p}`.
///
/// Only attempted when a sup-metric certificate exists; `Ok(None)` means the
/// grid was exhausted, not that no exponent works.
pub fn find_p_certificate(f: &LinearSeqMap, q0: f64) -> Result<Option<ContractionCertificate>> {
    if !(q0 > 0.0 && q0 < 1.0) {
        return Err(Error::InvalidRatio {
            q: q0,
            range: "(0, 1)",
        });
    }
    if linear_sup_certificate(f).is_none() {
        return Ok(None);
    }
    for e in 0..=MAX_P_DOUBLINGS {
        let p = f64::from(1u32 << e);
        let l = f.lip_pq(p, q0)?;
        if l < (1.0 - q0).powf(1.0 / p) {
            return Ok(Some(ContractionCertificate::pq(p, q0, l)?));
        }
    }
    Ok(None)
}

/// Converts a `p`-metric certificate into a sup-metric one through
/// `L_{s,q'} <= L_{p,q} / (1 - q/q'^p)^{1/p}` for `q'^p > q`.
///
/// Picks `q'^p` halfway between `q/(1 - L^p)` and 1, which keeps the bound below 1.
pub fn sup_certificate_from_p(cert: &ContractionCertificate) -> Result<ContractionCertificate> {
    cert.validate()?;
    match *cert {
        ContractionCertificate::SupQ { .. } => Ok(*cert),
        ContractionCertificate::PQ { p, q, lipschitz } => {
            let p = p.get();
            let floor = q / (1.0 - lipschitz.powf(p));
            let target = 0.5 * (floor + 1.0);
            let q_sup = target.powf(1.0 / p);
            let l_sup = lipschitz / (1.0 - q / target).powf(1.0 / p);
            ContractionCertificate::sup_q(q_sup, l_sup)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeceleanStep {
    pub k: usize,
    pub y: f64,
    pub bound: f64,
}

/// `y_k = f(f_s^k(x_0), f_s^k(x_1), ...)` with `f_s(t) = f(t, t, ...)`, for
/// `k = 0..=k_max`, each paired with `Lip^{k+1}/(1 - Lip) · sup_i |f_s(x_i) - x_i|`.
///
/// `lipschitz` is the `d_{s,1}` constant; when absent the map's own
/// [`SeqMap::sup_lipschitz`] is used, and the call is refused if neither is known.
pub fn secelean_iterates(
    f: &dyn SeqMap,
    x: &BoundedSeq,
    k_max: usize,
    lipschitz: Option<f64>,
) -> Result<Vec<SeceleanStep>> {
    let lip = lipschitz.or_else(|| f.sup_lipschitz()).ok_or_else(|| {
        Error::Uncertified("no Lipschitz constant for the plain supremum metric".into())
    })?;
    if !(0.0..1.0).contains(&lip) {
        return Err(Error::Uncertified(format!(
            "supremum-metric Lipschitz constant {lip} is not below 1"
        )));
    }
    if k_max > MAX_STEPS {
        return Err(Error::IterationLimit(MAX_STEPS));
    }
    let mut spread: f64 = 0.0;
    for v in x.values() {
        spread = spread.max((f.diagonal_eval(v)? - v).abs());
    }
    let mut coords = x.clone();
    let mut out = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let y = f.eval(&coords)?;
        let bound = pow_n(lip, k + 1) / (1.0 - lip) * spread;
        out.push(SeceleanStep { k, y, bound });
        if k < k_max {
            coords = coords.map_values(|v| f.diagonal_eval(v))?;
        }
    }
    Ok(out)
}

/// `x_{m+k} = g(x_{k+m-1}, ..., x_k)` from `seeds = (x_0, ..., x_{m-1})`.
///
/// Returns the `k_max` new terms `x_m, ..., x_{m+k_max-1}`.
pub fn presic_iterates(g: &FiniteArityMap, seeds: &[f64], k_max: usize) -> Result<Vec<f64>> {
    let m = g.arity();
    if seeds.len() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            got: seeds.len(),
        });
    }
    for &s in seeds {
        ensure_finite(s, "Prešić seed")?;
    }
    if k_max > MAX_STEPS {
        return Err(Error::IterationLimit(MAX_STEPS));
    }
    // Newest first, matching g's argument order.
    let mut window: Vec<f64> = seeds.iter().rev().copied().collect();
    let mut out = Vec::with_capacity(k_max);
    for _ in 0..k_max {
        let next = g.apply(&window)?;
        window.pop();
        window.insert(0, next);
        out.push(next);
    }
    Ok(out)
}

/// `(x_{m-1}, ..., x_0, x_0, x_0, ...)`: the starting sequence whose generalized
/// iterates under the embedded map reproduce the Prešić recursion.
pub fn presic_initial_sequence(seeds: &[f64]) -> Result<BoundedSeq> {
    let tail = *seeds
        .first()
        .ok_or_else(|| Error::InvalidMap("at least one seed is required".into()))?;
    BoundedSeq::new(seeds.iter().rev().copied().collect(), tail)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationRow {
    pub n: usize,
    pub x_star_n: f64,
    pub error: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncationReport {
    /// Reference fixed point of the full map, solved at `tol / 1000`.
    pub x_star: f64,
    pub rows: Vec<TruncationRow>,
}

/// Fixed points of the truncations `f_n = f(·, ..., ·, base, base, ...)` for
/// `n = 1..=n_max`, each checked against `q^n L/(1-L) |x* - base|`.
///
/// Every `f_n` embedded back into sequences inherits the certificate `(q, L)`,
/// so its Prešić iteration from `(base, ..., base)` is run for the number of
/// steps the same a priori bound prescribes at `tol / 10`.
pub fn truncation_study(
    f: &MapRef,
    cert: &ContractionCertificate,
    base: f64,
    n_max: usize,
    tol: f64,
) -> Result<TruncationReport> {
    let (q, l) = match *cert {
        ContractionCertificate::SupQ { q, lipschitz } => (q, lipschitz),
        ContractionCertificate::PQ { .. } => {
            return Err(Error::InvalidCertificate(
                "truncation bounds need a sup-metric certificate".into(),
            ))
        }
    };
    cert.validate()?;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidTolerance(tol));
    }
    let start = BoundedSeq::constant(base)?;
    let x_star = solve_gcfp(f.as_ref(), &start, cert, tol / 1000.0)?.x_star;
    let gap = (x_star - base).abs();
    let mut rows = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let g = truncate(f, n, base)?;
        let seeds = vec![base; n];
        let d1 = (g.apply(&seeds)? - base).abs();
        let steps = cert.steps_for(tol / 10.0, d1)?;
        let x_star_n = *presic_iterates(&g, &seeds, steps)?
            .last()
            .expect("steps >= 1");
        let error = (x_star_n - x_star).abs();
        let bound = pow_n(q, n) * l / (1.0 - l) * gap;
        if error > bound + tol {
            return Err(Error::BoundViolation(format!(
                "truncation n = {n}: error {error} exceeds bound {bound} + {tol}"
            )));
        }
        rows.push(TruncationRow {
            n,
            x_star_n,
            error,
            bound,
        });
    }
    Ok(TruncationReport { x_star, rows })
}

/// Turns a contraction constant for general weights `(a_n)` with
/// `a_n / a_{n-1} <= ratio_bound < 1` into a geometric certificate at `q = ratio_bound`.
///
/// Sup case: `a_0 L < 1` gives `(q, a_0 L)`. `p` case:
/// `L < ((1 - M)/a_0)^{1/p}` gives `(p, q, a_0^{1/p} L)`.
pub fn reduce_general_weights(
    a0: f64,
    ratio_bound: f64,
    l_general: f64,
    p: Option<PExponent>,
) -> Result<Option<ContractionCertificate>> {
    if !(ratio_bound > 0.0 && ratio_bound < 1.0) {
        return Err(Error::InvalidRatio {
            q: ratio_bound,
            range: "(0, 1)",
        });
    }
    if !(a0.is_finite() && a0 > 0.0) {
        return Err(Error::InvalidWeights(format!(
            "a_0 = {a0} must be positive"
        )));
    }
    if !(l_general.is_finite() && l_general >= 0.0) {
        return Err(Error::InvalidCertificate(format!(
            "Lipschitz constant {l_general} must be finite and nonnegative"
        )));
    }
    match p {
        None if a0 * l_general < 1.0 => {
            ContractionCertificate::sup_q(ratio_bound, a0 * l_general).map(Some)
        }
        None => Ok(None),
        Some(p) => {
            let pv = p.get();
            if l_general < ((1.0 - ratio_bound) / a0).powf(1.0 / pv) {
                let l = a0.powf(1.0 / pv) * l_general;
                // Rounding can push the product onto the boundary.
                Ok(ContractionCertificate::pq(pv, ratio_bound, l).ok())
            } else {
                Ok(None)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{embed_finite, SupHalfMap};
    use std::sync::Arc;

    const EPS: f64 = 1e-12;

    fn worked_example() -> LinearSeqMap {
        LinearSeqMap::new(vec![1.0 / 3.0], 1.0 / 6.0, 0.5, 1.0).unwrap()
    }

    fn powers(b: f64) -> LinearSeqMap {
        LinearSeqMap::new(vec![0.0], b, b, 0.0).unwrap()
    }

    fn averaging() -> FiniteArityMap {
        FiniteArityMap::affine(vec![0.25, 0.25], 1.0).unwrap()
    }

    #[test]
    fn certificate_validation() {
        assert!(ContractionCertificate::sup_q(0.8, 8.0 / 9.0).is_ok());
        assert!(ContractionCertificate::sup_q(1.0, 0.5).is_err());
        assert!(ContractionCertificate::sup_q(0.5, 1.0).is_err());
        assert!(ContractionCertificate::sup_q(0.5, f64::NAN).is_err());
        assert!(ContractionCertificate::pq(2.0, 0.5, 0.7).is_ok());
        assert!(ContractionCertificate::pq(2.0, 0.5, 0.71).is_err());
        assert!(ContractionCertificate::pq(0.5, 0.5, 0.1).is_err());
    }

    #[test]
    fn sup_bound_closed_form() {
        let (l, q) = (8.0 / 9.0, 0.8);
        for k in 1..=50 {
            let b = a_priori_bound_sup(q, l, k, 1.0);
            let nine = 9.0 * (8.0_f64 / 9.0).powi(k as i32);
            let eight = 8.0 * (8.0_f64 / 9.0).powi(k as i32 - 1);
            assert!((b - nine).abs() < EPS);
            assert!((nine - eight).abs() < EPS);
        }
        assert_eq!(a_priori_bound_sup(q, l, 7, 0.0), 0.0);
        assert!((a_priori_bound_sup(0.5, 0.5, 1, 2.0) - 2.0).abs() < EPS);
    }

    #[test]
    fn p_bound_closed_form() {
        let p1 = PExponent::new(1.0).unwrap();
        assert!((a_priori_bound_p(p1, 0.5, 0.25, 1, 1.0) - 1.0).abs() < EPS);
        assert_eq!(a_priori_bound_p(p1, 0.5, 0.25, 3, 0.0), 0.0);
        let p2 = PExponent::new(2.0).unwrap();
        let mut prev = f64::INFINITY;
        for k in 1..40 {
            let b = a_priori_bound_p(p2, 0.3, 0.6, k, 1.0);
            assert!(b < prev);
            prev = b;
        }
    }

    #[test]
    fn steps_for_is_minimal() {
        let cert = ContractionCertificate::sup_q(0.8, 8.0 / 9.0).unwrap();
        let k = cert.steps_for(1e-6, 1.0).unwrap();
        assert!(cert.a_priori_bound(k, 1.0) <= 1e-6);
        assert!(cert.a_priori_bound(k - 1, 1.0) > 1e-6);
        // 9 (8/9)^136 ≈ 9.94e-7 while 9 (8/9)^135 ≈ 1.12e-6.
        assert_eq!(k, 136);
        assert_eq!(cert.steps_for(1e-6, 0.0).unwrap(), 1);
        assert!(cert.steps_for(0.0, 1.0).is_err());
        assert!(cert.steps_for(1e-300, 1e300).is_err());
    }

    #[test]
    fn lift_step_examples() {
        let f = LinearSeqMap::finite(vec![], 5.0).unwrap();
        let (v, next) = lift_step(&f, &BoundedSeq::zero()).unwrap();
        assert_eq!(v, 5.0);
        assert_eq!(next.prefix(), &[5.0]);
        assert_eq!(next.tail(), 0.0);

        let g = worked_example();
        let fixed = BoundedSeq::constant(3.0).unwrap();
        let (v, next) = lift_step(&g, &fixed).unwrap();
        assert!((v - 3.0).abs() < EPS);
        assert!(next.prefix().iter().all(|e| (e - 3.0).abs() < EPS));
        assert_eq!(next.tail(), 3.0);
    }

    #[test]
    fn lifted_state_matches_history() {
        let f = worked_example();
        let x0 = BoundedSeq::new(vec![0.5, -1.0], 2.0).unwrap();
        let trace = generalized_iterates(&f, &x0, 6).unwrap();
        let mut state = x0.clone();
        for _ in 0..6 {
            state = lift_step(&f, &state).unwrap().1;
        }
        let vals = trace.values();
        for k in 0..6 {
            assert_eq!(state.at(k), vals[5 - k]);
        }
        for n in 0..5 {
            assert_eq!(state.at(6 + n), x0.at(n));
        }
    }

    #[test]
    fn worked_example_recursion() {
        let f = worked_example();
        let trace = generalized_iterates(&f, &BoundedSeq::zero(), 200).unwrap();
        let xs = trace.values();
        assert_eq!(xs[0], 1.0);
        assert!((xs[1] - 4.0 / 3.0).abs() < EPS);
        assert!((xs[199] - 3.0).abs() < 1e-8);
        let last = trace.last().unwrap();
        assert!((last.residual - (f.diagonal_eval(last.x).unwrap() - last.x).abs()).abs() < EPS);
    }

    #[test]
    fn certified_trace_bounds_decrease() {
        let f = worked_example();
        let cert = ContractionCertificate::sup_q(0.8, f.lip_sq(0.8).unwrap()).unwrap();
        let trace = certified_iterates(&f, &BoundedSeq::zero(), &cert, 60).unwrap();
        assert_eq!(trace.initial_gap, Some(1.0));
        let bounds: Vec<f64> = trace.rows.iter().map(|r| r.bound.unwrap()).collect();
        assert!(bounds.windows(2).all(|w| w[1] <= w[0]));
        for r in &trace.rows {
            assert!((r.x - 3.0).abs() <= r.bound.unwrap() + 1e-12);
        }
    }

    #[test]
    fn sup_half_iterates_stay_away_from_zero() {
        let delta = 0.6;
        let x0 = BoundedSeq::new(vec![0.0, 0.0, delta], 0.0).unwrap();
        let trace = generalized_iterates(&SupHalfMap, &x0, 100).unwrap();
        assert!(trace.rows.iter().all(|r| r.x >= delta / 2.0));
    }

    #[test]
    fn solve_worked_example() {
        let f = worked_example();
        let cert = ContractionCertificate::sup_q(0.8, f.lip_sq(0.8).unwrap()).unwrap();
        let sol = solve_gcfp(&f, &BoundedSeq::zero(), &cert, 1e-6).unwrap();
        assert!((sol.x_star - 3.0).abs() <= 1e-6);
        assert_eq!(sol.k_used, 136);
        assert_eq!(sol.trace.rows.len(), 136);
    }

    #[test]
    fn solve_constant_map_in_one_step() {
        let f = LinearSeqMap::finite(vec![], 7.0).unwrap();
        let cert = find_sup_certificate(&f).unwrap();
        assert_eq!(cert.lipschitz(), 0.0);
        let sol = solve_gcfp(&f, &BoundedSeq::new(vec![1.0], 4.0).unwrap(), &cert, 1e-9).unwrap();
        assert_eq!(sol.x_star, 7.0);
        assert_eq!(sol.k_used, 1);
    }

    #[test]
    fn solve_embedded_averaging_map() {
        let f = embed_finite(averaging());
        let cert = find_sup_certificate(&f).unwrap();
        assert!(cert.lipschitz() < 1.0);
        let sol = solve_gcfp(&f, &BoundedSeq::zero(), &cert, 1e-10).unwrap();
        assert!((sol.x_star - 2.0).abs() <= 1e-10);
    }

    #[test]
    fn solve_rejects_bad_inputs() {
        let f = worked_example();
        let cert = ContractionCertificate::sup_q(0.8, 0.9).unwrap();
        assert!(matches!(
            solve_gcfp(&f, &BoundedSeq::zero(), &cert, 0.0),
            Err(Error::InvalidTolerance(_))
        ));
        let bogus = ContractionCertificate::SupQ {
            q: 0.8,
            lipschitz: 1.2,
        };
        assert!(matches!(
            solve_gcfp(&f, &BoundedSeq::zero(), &bogus, 1e-3),
            Err(Error::InvalidCertificate(_))
        ));
    }

    #[test]
    fn solve_detects_a_wrong_certificate() {
        // f(x) = 0.9 x_0 + 1 really has L_{s,q} = 0.9; claiming 0.01 stops far too early.
        let f = LinearSeqMap::finite(vec![0.9], 1.0).unwrap();
        let lie = ContractionCertificate::sup_q(0.5, 0.01).unwrap();
        assert!(matches!(
            solve_gcfp(&f, &BoundedSeq::zero(), &lie, 1e-6),
            Err(Error::BoundViolation(_))
        ));
    }

    #[test]
    fn sup_certificate_search() {
        let f = worked_example();
        let cert = find_sup_certificate(&f).unwrap();
        let ContractionCertificate::SupQ { q, lipschitz } = cert else {
            panic!("expected a sup certificate");
        };
        assert!(q > 0.0 && q < 1.0);
        assert!((lipschitz - f.lip_sq(q).unwrap()).abs() < EPS);
        assert!(lipschitz <= (1.0 + 2.0 / 3.0) / 2.0 + EPS);

        assert!(find_sup_certificate(&powers(0.5)).is_none());
        for &b in &[0.1, 0.25, 0.4] {
            let cert = find_sup_certificate(&powers(b)).unwrap();
            assert!(cert.q() > 2.0 * b);
        }
        assert!(find_sup_certificate(&SupHalfMap).is_none());
    }

    #[test]
    fn embedded_certificates() {
        let f = embed_finite(averaging());
        let cert = find_sup_certificate(&f).unwrap();
        assert!((cert.q() - 0.75).abs() < EPS);
        assert!((cert.lipschitz() - 0.5 / 0.75).abs() < EPS);

        let single = embed_finite(FiniteArityMap::affine(vec![0.3], 0.0).unwrap());
        let cert = find_sup_certificate(&single).unwrap();
        assert_eq!(cert.q(), 0.5);
        assert_eq!(cert.lipschitz(), 0.3);

        let expanding = embed_finite(FiniteArityMap::affine(vec![0.6, 0.6], 0.0).unwrap());
        assert!(find_sup_certificate(&expanding).is_none());
        let unhinted = embed_finite(FiniteArityMap::new(2, |xs| Ok(xs[0]), None).unwrap());
        assert!(find_sup_certificate(&unhinted).is_none());
    }

    #[test]
    fn p_certificate_search() {
        let single = LinearSeqMap::finite(vec![0.0, 0.3], 0.0).unwrap();
        let cert = find_p_certificate(&single, 0.5).unwrap().unwrap();
        let ContractionCertificate::PQ { p, q, lipschitz } = cert else {
            panic!("expected a p certificate");
        };
        assert_eq!(p.get(), 2.0);
        assert_eq!(q, 0.5);
        assert!((lipschitz - 0.3 / 0.5f64.sqrt()).abs() < EPS);

        let unit = LinearSeqMap::finite(vec![0.0, 1.0], 0.0).unwrap();
        assert_eq!(find_p_certificate(&unit, 0.5).unwrap(), None);

        let zero = LinearSeqMap::finite(vec![], 2.0).unwrap();
        let cert = find_p_certificate(&zero, 0.3).unwrap().unwrap();
        assert!(
            matches!(cert, ContractionCertificate::PQ { p, lipschitz, .. } if p.get() == 1.0 && lipschitz == 0.0)
        );

        assert!(find_p_certificate(&zero, 1.0).is_err());
    }

    #[test]
    fn p_to_sup_bridge() {
        let f = LinearSeqMap::new(vec![0.2, -0.1], 0.2, 0.3, 1.0).unwrap();
        let pc = find_p_certificate(&f, 0.5).unwrap().unwrap();
        let sc = sup_certificate_from_p(&pc).unwrap();
        assert!(sc.lipschitz() < 1.0);
        assert!(f.lip_sq(sc.q()).unwrap() <= sc.lipschitz() + EPS);
        assert_eq!(sup_certificate_from_p(&sc).unwrap(), sc);
    }

    #[test]
    fn secelean_on_sup_half() {
        let x = BoundedSeq::new(vec![0.6], 0.0).unwrap();
        let steps = secelean_iterates(&SupHalfMap, &x, 30, None).unwrap();
        assert_eq!(steps.len(), 31);
        for s in &steps {
            assert!(s.y.abs() <= s.bound + 1e-15);
        }
        assert!(steps[25].y < 1e-6);
    }

    #[test]
    fn secelean_at_fixed_point_is_constant() {
        let f = worked_example();
        let x = BoundedSeq::constant(3.0).unwrap();
        for s in secelean_iterates(&f, &x, 10, None).unwrap() {
            assert!((s.y - 3.0).abs() < EPS);
            assert!(s.bound < 1e-14);
        }
    }

    #[test]
    fn secelean_linear_bound_decay() {
        let f = LinearSeqMap::new(vec![0.3], 0.2, 0.5, 0.0).unwrap();
        let lip = f.sum_abs_coeffs();
        let x = BoundedSeq::new(vec![1.0, -2.0], 0.5).unwrap();
        let steps = secelean_iterates(&f, &x, 20, None).unwrap();
        for w in steps.windows(2) {
            assert!((w[1].bound / w[0].bound - lip).abs() < 1e-12);
        }
        for s in &steps {
            assert!(s.y.abs() <= s.bound + EPS);
        }
    }

    #[test]
    fn secelean_refuses_uncertified() {
        let f = powers(0.5);
        assert!(matches!(
            secelean_iterates(&f, &BoundedSeq::zero(), 5, None),
            Err(Error::Uncertified(_))
        ));
        let g = embed_finite(FiniteArityMap::new(1, |xs| Ok(xs[0] / 2.0), None).unwrap());
        assert!(secelean_iterates(&g, &BoundedSeq::zero(), 5, None).is_err());
        assert!(secelean_iterates(&g, &BoundedSeq::zero(), 5, Some(0.5)).is_ok());
    }

    #[test]
    fn presic_converges_and_matches_embedding() {
        let g = averaging();
        let xs = presic_iterates(&g, &[0.0, 0.0], 80).unwrap();
        assert!((xs[79] - 2.0).abs() < 1e-10);

        let seeds = [0.3, -1.0, 2.5];
        let h = FiniteArityMap::affine(vec![0.2, 0.1, 0.3], -0.5).unwrap();
        let direct = presic_iterates(&h, &seeds, 30).unwrap();
        let start = presic_initial_sequence(&seeds).unwrap();
        let lifted = generalized_iterates(&embed_finite(h), &start, 30).unwrap();
        assert_eq!(direct, lifted.values());
    }

    #[test]
    fn presic_arity_one_is_picard() {
        let g = FiniteArityMap::affine(vec![0.5], 1.0).unwrap();
        let xs = presic_iterates(&g, &[10.0], 5).unwrap();
        let mut t = 10.0;
        for v in xs {
            t = 0.5 * t + 1.0;
            assert_eq!(v, t);
        }
        assert!(presic_iterates(&g, &[1.0, 2.0], 3).is_err());
    }

    #[test]
    fn truncation_study_linear() {
        let f: MapRef = Arc::new(worked_example());
        let cert = ContractionCertificate::sup_q(0.8, 8.0 / 9.0).unwrap();
        let report = truncation_study(&f, &cert, 0.0, 12, 1e-8).unwrap();
        assert!((report.x_star - 3.0).abs() < 1e-10);
        let lin = worked_example();
        for row in &report.rows {
            let head: f64 = (0..row.n).map(|k| lin.coeff(k)).sum();
            let oracle = 1.0 / (1.0 - head);
            assert!((row.x_star_n - oracle).abs() < 1e-8);
            assert!(row.error <= row.bound + 1e-8);
        }
    }

    #[test]
    fn truncation_at_fixed_point_is_exact() {
        let f: MapRef = Arc::new(worked_example());
        let cert = ContractionCertificate::sup_q(0.8, 8.0 / 9.0).unwrap();
        let report = truncation_study(&f, &cert, 3.0, 6, 1e-8).unwrap();
        for row in &report.rows {
            assert!(row.error < 1e-9);
            assert!(row.bound < 1e-9);
        }
        let pc = ContractionCertificate::pq(1.0, 0.5, 0.1).unwrap();
        assert!(truncation_study(&f, &pc, 0.0, 3, 1e-6).is_err());
    }

    #[test]
    fn sup_half_truncations_fix_at_half_base() {
        let f: MapRef = Arc::new(SupHalfMap);
        let base = 0.8;
        for n in 1..6 {
            let g = truncate(&f, n, base).unwrap();
            let xs = presic_iterates(&g, &vec![base; n], 60).unwrap();
            assert!((xs[59] - base / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn general_weight_reduction() {
        let c = reduce_general_weights(1.0, 0.5, 0.9, None)
            .unwrap()
            .unwrap();
        assert_eq!(c, ContractionCertificate::sup_q(0.5, 0.9).unwrap());
        assert_eq!(reduce_general_weights(2.0, 0.5, 0.6, None).unwrap(), None);
        let p1 = PExponent::new(1.0).unwrap();
        let c = reduce_general_weights(1.0, 0.5, 0.4, Some(p1))
            .unwrap()
            .unwrap();
        assert_eq!(c, ContractionCertificate::pq(1.0, 0.5, 0.4).unwrap());
        assert_eq!(
            reduce_general_weights(1.0, 0.5, 0.6, Some(p1)).unwrap(),
            None
        );
        assert!(reduce_general_weights(1.0, 1.0, 0.1, None).is_err());
        assert!(reduce_general_weights(0.0, 0.5, 0.1, None).is_err());
    }
}
