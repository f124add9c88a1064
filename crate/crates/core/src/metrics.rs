//! Weighted metrics on eventually constant sequences.
//!
//! For a positive weight sequence `(a_n)`:
//!
//! ```text
//! d_{s,(a_n)}(x, y) = sup_n a_n |x_n - y_n|
//! d_{p,(a_n)}(x, y) = (Σ_n a_n |x_n - y_n|^p)^{1/p}
//! ```
//!
//! The supremum form is a metric iff the weights are positive and bounded,
//! the `p` form iff they are positive and summable. Weights are a finite head
//! continued geometrically, so both values close in finitely many operations.

use crate::error::{Error, Result};
use crate::sequences::BoundedSeq;

/// `a_n = head[n]` for `n < N`, then `a_n = head[N-1] · ratio^{n-N+1}`
/// (or `ratio^n` when the head is empty).
///
/// Construction does not validate; use [`WeightSeq::is_valid_sup`] or
/// [`WeightSeq::is_valid_p`], which the distance functions also check.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSeq {
    head: Vec<f64>,
    ratio: f64,
}

impl WeightSeq {
    pub fn new(head: Vec<f64>, ratio: f64) -> Self {
        WeightSeq { head, ratio }
    }

    /// `(q^n)`.
    pub fn geometric(q: f64) -> Self {
        WeightSeq {
            head: Vec::new(),
            ratio: q,
        }
    }

    pub fn head(&self) -> &[f64] {
        &self.head
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    fn head_ok(&self) -> bool {
        self.head.iter().all(|a| a.is_finite() && *a > 0.0)
    }

    /// Positive and bounded: the condition for `d_{s,(a_n)}` to be a metric.
    pub fn is_valid_sup(&self) -> bool {
        self.head_ok() && self.ratio > 0.0 && self.ratio <= 1.0
    }

    /// Positive and summable: the condition for `d_{p,(a_n)}` to be a metric.
    pub fn is_valid_p(&self) -> bool {
        self.head_ok() && self.ratio > 0.0 && self.ratio < 1.0
    }

    pub fn at(&self, n: usize) -> f64 {
        let len = self.head.len();
        match self.head.last() {
            _ if n < len => self.head[n],
            Some(&last) => last * pow_n(self.ratio, n - len + 1),
            None => pow_n(self.ratio, n),
        }
    }

    /// `sup_{n ≥ m} a_n`. Requires `ratio <= 1`.
    pub fn sup_from(&self, m: usize) -> f64 {
        if m < self.head.len() {
            // Geometric continuation never exceeds the last head entry.
            self.head[m..].iter().copied().fold(0.0, f64::max)
        } else {
            self.at(m)
        }
    }

    /// `Σ_{n ≥ m} a_n`. Requires `ratio < 1`.
    pub fn sum_from(&self, m: usize) -> f64 {
        let len = self.head.len();
        let head_part: f64 = self.head.iter().skip(m).sum();
        head_part + self.at(m.max(len)) / (1.0 - self.ratio)
    }
}

/// `base^n` for a nonnegative integer exponent.
pub(crate) fn pow_n(base: f64, n: usize) -> f64 {
    match i32::try_from(n) {
        Ok(e) => base.powi(e),
        Err(_) => base.powf(n as f64),
    }
}

/// Exponent `p ∈ [1, ∞)` of the weighted `p`-metric.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PExponent(f64);

impl PExponent {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_finite() && p >= 1.0 {
            Ok(PExponent(p))
        } else {
            Err(Error::InvalidExponent(p))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// Distance on the base space `X = ℝ`.
pub fn base_dist(x: f64, y: f64) -> f64 {
    (x - y).abs()
}

pub fn validate_sup_weights(w: &WeightSeq) -> bool {
    w.is_valid_sup()
}

pub fn validate_p_weights(w: &WeightSeq) -> bool {
    w.is_valid_p()
}

pub fn weight_at(w: &WeightSeq, n: usize) -> f64 {
    w.at(n)
}

fn joint_len(x: &BoundedSeq, y: &BoundedSeq) -> usize {
    x.prefix_len().max(y.prefix_len())
}

/// `sup_n a_n |x_n - y_n|`, exact.
pub fn dist_sup_weighted(x: &BoundedSeq, y: &BoundedSeq, w: &WeightSeq) -> Result<f64> {
    if !w.is_valid_sup() {
        return Err(Error::InvalidWeights(format!(
            "supremum metric needs positive head entries and ratio in (0, 1], got {w:?}"
        )));
    }
    let m = joint_len(x, y);
    let head = (0..m)
        .map(|n| w.at(n) * base_dist(x.at(n), y.at(n)))
        .fold(0.0, f64::max);
    let tail_gap = base_dist(x.tail(), y.tail());
    let tail = if tail_gap == 0.0 {
        0.0
    } else {
        tail_gap * w.sup_from(m)
    };
    Ok(head.max(tail))
}

/// `(Σ_n a_n |x_n - y_n|^p)^{1/p}`, exact up to rounding.
///
/// Terms are scaled by the largest coordinate gap before raising to `p`, so
/// large exponents neither overflow nor lose the result to underflow.
pub fn dist_p_weighted(x: &BoundedSeq, y: &BoundedSeq, p: PExponent, w: &WeightSeq) -> Result<f64> {
    if !w.is_valid_p() {
        return Err(Error::InvalidWeights(format!(
            "p-metric needs positive head entries and ratio in (0, 1), got {w:?}"
        )));
    }
    let p = p.get();
    let m = joint_len(x, y);
    let gaps: Vec<f64> = (0..m).map(|n| base_dist(x.at(n), y.at(n))).collect();
    let tail_gap = base_dist(x.tail(), y.tail());
    let scale = gaps.iter().copied().fold(tail_gap, f64::max);
    if scale == 0.0 {
        return Ok(0.0);
    }
    let mut total: f64 = gaps
        .iter()
        .enumerate()
        .filter(|(_, g)| **g > 0.0)
        .map(|(n, g)| w.at(n) * (g / scale).powf(p))
        .sum();
    if tail_gap > 0.0 {
        total += (tail_gap / scale).powf(p) * w.sum_from(m);
    }
    Ok(scale * total.powf(1.0 / p))
}

fn check_sup_ratio(q: f64) -> Result<()> {
    if q > 0.0 && q <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidRatio { q, range: "(0, 1]" })
    }
}

fn check_open_ratio(q: f64) -> Result<()> {
    if q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidRatio { q, range: "(0, 1)" })
    }
}

/// `d_{s,q}(x, y) = sup_n q^n |x_n - y_n|`, `q ∈ (0, 1]`.
pub fn dist_sq(x: &BoundedSeq, y: &BoundedSeq, q: f64) -> Result<f64> {
    check_sup_ratio(q)?;
    dist_sup_weighted(x, y, &WeightSeq::geometric(q))
}

/// `d_{p,q}(x, y) = (Σ_n q^n |x_n - y_n|^p)^{1/p}`, `q ∈ (0, 1)`.
pub fn dist_pq(x: &BoundedSeq, y: &BoundedSeq, p: PExponent, q: f64) -> Result<f64> {
    check_open_ratio(q)?;
    dist_p_weighted(x, y, p, &WeightSeq::geometric(q))
}

/// Maximum metric on `X^m`.
pub fn dist_max(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() || u.is_empty() {
        return Err(Error::LengthMismatch {
            expected: u.len().max(1),
            got: v.len(),
        });
    }
    Ok(u.iter()
        .zip(v)
        .map(|(a, b)| base_dist(*a, *b))
        .fold(0.0, f64::max))
}

/// One of the two geometric metric families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric {
    /// `d_{s,q}`, `q ∈ (0, 1]`.
    Sup { q: f64 },
    /// `d_{p,q}`, `q ∈ (0, 1)`.
    P { p: PExponent, q: f64 },
}

impl Metric {
    pub fn sup(q: f64) -> Result<Self> {
        check_sup_ratio(q)?;
        Ok(Metric::Sup { q })
    }

    pub fn p(p: f64, q: f64) -> Result<Self> {
        check_open_ratio(q)?;
        Ok(Metric::P {
            p: PExponent::new(p)?,
            q,
        })
    }

    pub fn distance(&self, x: &BoundedSeq, y: &BoundedSeq) -> Result<f64> {
        match *self {
            Metric::Sup { q } => dist_sq(x, y, q),
            Metric::P { p, q } => dist_pq(x, y, p, q),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = 1e-12;

    fn seq(prefix: &[f64], tail: f64) -> BoundedSeq {
        BoundedSeq::new(prefix.to_vec(), tail).unwrap()
    }

    fn p(v: f64) -> PExponent {
        PExponent::new(v).unwrap()
    }

    #[test]
    fn base_distance() {
        assert_eq!(base_dist(3.0, 3.0), 0.0);
        assert_eq!(base_dist(0.0, 1.0), 1.0);
        assert_eq!(base_dist(-2.0, 5.0), 7.0);
    }

    #[test]
    fn weight_validation() {
        assert!(validate_sup_weights(&WeightSeq::geometric(1.0)));
        assert!(validate_sup_weights(&WeightSeq::new(vec![2.0, 0.5], 0.9)));
        assert!(!validate_sup_weights(&WeightSeq::new(vec![1.0, -1.0], 0.5)));
        assert!(!validate_sup_weights(&WeightSeq::new(vec![1.0, 0.0], 0.5)));
        assert!(!validate_sup_weights(&WeightSeq::geometric(1.5)));

        assert!(validate_p_weights(&WeightSeq::geometric(0.5)));
        assert!(!validate_p_weights(&WeightSeq::geometric(1.0)));
        assert!(validate_p_weights(&WeightSeq::new(vec![3.0], 0.99)));
    }

    #[test]
    fn weights_by_index() {
        assert!((weight_at(&WeightSeq::geometric(0.8), 2) - 0.64).abs() < EPS);
        assert!((weight_at(&WeightSeq::new(vec![5.0], 0.5), 3) - 0.625).abs() < EPS);
        assert_eq!(weight_at(&WeightSeq::new(vec![2.0, 4.0], 0.5), 1), 4.0);
    }

    #[test]
    fn tail_sup_uses_remaining_head() {
        // Non-monotone head: the supremum beyond index 0 is the later, larger entry.
        let w = WeightSeq::new(vec![1.0, 5.0], 0.5);
        assert_eq!(w.sup_from(0), 5.0);
        assert_eq!(w.sup_from(2), 2.5);
        let d = dist_sup_weighted(&BoundedSeq::constant(1.0).unwrap(), &BoundedSeq::zero(), &w)
            .unwrap();
        assert_eq!(d, 5.0);
    }

    #[test]
    fn tail_sum_closed_form() {
        let w = WeightSeq::new(vec![3.0, 1.0], 0.5);
        // 3 + 1 + 0.5 + 0.25 + ... = 5
        assert!((w.sum_from(0) - 5.0).abs() < EPS);
        assert!((w.sum_from(1) - 2.0).abs() < EPS);
        assert!((w.sum_from(4) - 0.25).abs() < EPS);
    }

    #[test]
    fn sup_metric_values() {
        let one = BoundedSeq::constant(1.0).unwrap();
        let zero = BoundedSeq::zero();
        assert_eq!(dist_sq(&one, &one, 0.5).unwrap(), 0.0);
        assert_eq!(dist_sq(&one, &zero, 0.5).unwrap(), 1.0);
        let x = seq(&[0.0, 1.0, 2.0], 0.0);
        assert!((dist_sq(&x, &zero, 0.5).unwrap() - 0.5).abs() < EPS);
        let x = seq(&[0.0, 4.0], 0.0);
        assert!((dist_sq(&x, &zero, 0.5).unwrap() - 2.0).abs() < EPS);
        // q = 1 is the plain supremum metric.
        let x = seq(&[0.0, 4.0, -9.0], 2.0);
        assert_eq!(dist_sq(&x, &zero, 1.0).unwrap(), 9.0);
    }

    #[test]
    fn p_metric_values() {
        let one = BoundedSeq::constant(1.0).unwrap();
        let zero = BoundedSeq::zero();
        assert_eq!(dist_pq(&one, &one, p(2.0), 0.5).unwrap(), 0.0);
        let q = 0.3;
        assert!((dist_pq(&one, &zero, p(1.0), q).unwrap() - 1.0 / (1.0 - q)).abs() < EPS);
        let expected = (4.0_f64 / 3.0).sqrt();
        assert!((dist_pq(&one, &zero, p(2.0), 0.25).unwrap() - expected).abs() < EPS);
    }

    #[test]
    fn p_metric_large_exponent_is_finite() {
        let x = seq(&[30.0, -200.0], 7.0);
        let d = dist_pq(&x, &BoundedSeq::zero(), p(4096.0), 0.5).unwrap();
        assert!(d.is_finite());
        assert!(d <= 200.0 + EPS && d > 199.0);
    }

    #[test]
    fn ratio_ranges_enforced() {
        let z = BoundedSeq::zero();
        assert!(dist_sq(&z, &z, 0.0).is_err());
        assert!(dist_sq(&z, &z, 1.01).is_err());
        assert!(dist_pq(&z, &z, p(1.0), 1.0).is_err());
        assert!(dist_p_weighted(&z, &z, p(1.0), &WeightSeq::geometric(1.0)).is_err());
        assert!(PExponent::new(0.5).is_err());
        assert!(PExponent::new(f64::INFINITY).is_err());
    }

    #[test]
    fn max_metric() {
        assert_eq!(dist_max(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(dist_max(&[0.0, 0.0], &[3.0, -4.0]).unwrap(), 4.0);
        assert_eq!(dist_max(&[-2.0], &[5.0]).unwrap(), base_dist(-2.0, 5.0));
        assert!(dist_max(&[1.0], &[1.0, 2.0]).is_err());
        assert!(dist_max(&[], &[]).is_err());
    }

    #[test]
    fn staircase_consecutive_gaps() {
        // x^k = (0, 1, ..., k, 0, 0, ...); consecutive sup distances are (k+1) a_{k+1}.
        let w = WeightSeq::new(vec![1.0, 0.7, 0.2], 0.25);
        let stair = |k: usize| seq(&(0..=k).map(|i| i as f64).collect::<Vec<_>>(), 0.0);
        for k in 0..30 {
            let d = dist_sup_weighted(&stair(k), &stair(k + 1), &w).unwrap();
            let expected = (k + 1) as f64 * w.at(k + 1);
            assert!((d - expected).abs() < EPS * (1.0 + expected), "k={k}");
        }
    }

    #[test]
    fn sup_and_p_metrics_separate_on_spike_sequences() {
        // x^k_i = 1 / ((k+1)^{1/p} q^i) for i <= k: d_{s,q} -> 0 but d_{p,q^p} stays 1.
        for &pv in &[1.0, 2.0, 3.5] {
            let q: f64 = 0.6;
            for k in 0..25 {
                let prefix: Vec<f64> = (0..=k)
                    .map(|i| 1.0 / (((k + 1) as f64).powf(1.0 / pv) * q.powi(i)))
                    .collect();
                let x = seq(&prefix, 0.0);
                let z = BoundedSeq::zero();
                let ds = dist_sq(&x, &z, q).unwrap();
                let dp = dist_pq(&x, &z, p(pv), q.powf(pv)).unwrap();
                assert!((ds - ((k + 1) as f64).powf(-1.0 / pv)).abs() < 1e-12);
                assert!((dp - 1.0).abs() < 1e-9, "p={pv} k={k} dp={dp}");
            }
        }
    }
}
