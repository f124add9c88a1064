//! Maps from bounded sequences to the real line.
//!
//! [`LinearSeqMap`] carries closed-form Lipschitz constants for both metric
//! families. [`SupHalfMap`] is the standard example that contracts in the
//! plain supremum metric but has no generalized contractive fixed point.
//! [`FiniteArityMap`] covers maps on `ℝ^m`, either user rules or truncations
//! of a sequence map, and [`embed_finite`] lifts them back to sequences.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{ensure_finite, Error, Result};
use crate::metrics::{pow_n, Metric};
use crate::sequences::BoundedSeq;

/// Witness truncation depth for the sharpness constructions.
pub const WITNESS_DEPTH: usize = 64;

/// A map `f: ℓ∞(ℝ) → ℝ` restricted to eventually constant sequences.
///
/// Implementations must be pure: the solver and the CLI call `eval`
/// concurrently from several threads.
pub trait SeqMap: Send + Sync + fmt::Debug {
    fn eval(&self, x: &BoundedSeq) -> Result<f64>;

    /// `f(t, t, ...)`.
    fn diagonal_eval(&self, t: f64) -> Result<f64> {
        self.eval(&BoundedSeq::constant(t)?)
    }

    fn as_linear(&self) -> Option<&LinearSeqMap> {
        None
    }

    /// The finite-arity rule, when this map only reads its first `m` coordinates.
    fn as_finite(&self) -> Option<&FiniteArityMap> {
        None
    }

    /// Known Lipschitz constant with respect to the plain supremum metric `d_{s,1}`.
    fn sup_lipschitz(&self) -> Option<f64> {
        None
    }
}

pub type MapRef = Arc<dyn SeqMap>;

/// `f(x) = c + Σ_n b_n x_n` with `b_n = head[n]` for `n < N` and
/// `b_n = β ρ^{n-N}` afterwards, `|ρ| < 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSeqMap {
    head: Vec<f64>,
    tail_coeff: f64,
    tail_ratio: f64,
    offset: f64,
}

impl LinearSeqMap {
    pub fn new(head: Vec<f64>, tail_coeff: f64, tail_ratio: f64, offset: f64) -> Result<Self> {
        for &b in &head {
            ensure_finite(b, "coefficient head")?;
        }
        ensure_finite(tail_coeff, "tail coefficient")?;
        ensure_finite(offset, "offset")?;
        if tail_ratio.is_nan() || tail_ratio.abs() >= 1.0 {
            return Err(Error::InvalidMap(format!(
                "tail ratio must satisfy |ρ| < 1, got {tail_ratio}"
            )));
        }
        Ok(LinearSeqMap {
            head,
            tail_coeff,
            tail_ratio,
            offset,
        })
    }

    /// Finitely many nonzero coefficients.
    pub fn finite(head: Vec<f64>, offset: f64) -> Result<Self> {
        LinearSeqMap::new(head, 0.0, 0.0, offset)
    }

    pub fn head(&self) -> &[f64] {
        &self.head
    }

    pub fn tail_coeff(&self) -> f64 {
        self.tail_coeff
    }

    pub fn tail_ratio(&self) -> f64 {
        self.tail_ratio
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn coeff(&self, n: usize) -> f64 {
        let len = self.head.len();
        if n < len {
            self.head[n]
        } else {
            self.tail_coeff * pow_n(self.tail_ratio, n - len)
        }
    }

    /// `Σ_{n ≥ m} b_n`.
    pub fn tail_sum_from(&self, m: usize) -> f64 {
        let len = self.head.len();
        let head_part: f64 = self.head.iter().skip(m).sum();
        let start = m.max(len);
        head_part + self.coeff(start) / (1.0 - self.tail_ratio)
    }

    pub fn sum_coeffs(&self) -> f64 {
        self.tail_sum_from(0)
    }

    pub fn sum_abs_coeffs(&self) -> f64 {
        let head: f64 = self.head.iter().map(|b| b.abs()).sum();
        head + self.tail_coeff.abs() / (1.0 - self.tail_ratio.abs())
    }

    /// Lipschitz constant with respect to `d_{s,q}`: `Σ_n |b_n| / q^n`.
    ///
    /// Infinite when the geometric tail decays no faster than `q^n`.
    pub fn lip_sq(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q <= 1.0) {
            return Err(Error::InvalidRatio { q, range: "(0, 1]" });
        }
        let head: f64 = self
            .head
            .iter()
            .enumerate()
            .map(|(n, b)| b.abs() / pow_n(q, n))
            .sum();
        if self.tail_coeff == 0.0 {
            return Ok(head);
        }
        let rho = self.tail_ratio.abs();
        if rho >= q {
            return Ok(f64::INFINITY);
        }
        let tail = self.tail_coeff.abs() / pow_n(q, self.head.len()) / (1.0 - rho / q);
        Ok(head + tail)
    }

    /// Lipschitz constant with respect to `d_{p,q}`.
    ///
    /// For `p > 1` this is `(Σ_n |b_n|^{p/(p-1)} / q^{n/(p-1)})^{(p-1)/p}`,
    /// for `p = 1` it is `sup_n |b_n| / q^n`.
    pub fn lip_pq(&self, p: f64, q: f64) -> Result<f64> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::InvalidExponent(p));
        }
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidRatio { q, range: "(0, 1)" });
        }
        let len = self.head.len();
        let rho = self.tail_ratio.abs();
        let beta = self.tail_coeff.abs();
        if p == 1.0 {
            let head = self
                .head
                .iter()
                .enumerate()
                .map(|(n, b)| b.abs() / pow_n(q, n))
                .fold(0.0, f64::max);
            if beta == 0.0 {
                return Ok(head);
            }
            if rho > q {
                return Ok(f64::INFINITY);
            }
            // |ρ|/q <= 1, so the first tail term dominates the tail.
            return Ok(head.max(beta / pow_n(q, len)));
        }
        let r = p / (p - 1.0);
        let s = 1.0 / (p - 1.0);
        let ln_q = q.ln();
        // Terms are kept as logarithms: for p near 1 the exponent r is huge and
        // |b|^r underflows long before the final 1/r-th root brings it back.
        let log_term = |b: f64, n: usize| r * b.abs().ln() - n as f64 * s * ln_q;
        let mut logs: Vec<f64> = self
            .head
            .iter()
            .enumerate()
            .filter(|(_, b)| **b != 0.0)
            .map(|(n, b)| log_term(*b, n))
            .collect();
        if beta > 0.0 {
            let log_ratio = if rho == 0.0 {
                f64::NEG_INFINITY
            } else {
                r * rho.ln() - s * ln_q
            };
            if log_ratio >= 0.0 {
                return Ok(f64::INFINITY);
            }
            logs.push(log_term(beta, len) - (-log_ratio.exp()).ln_1p());
        }
        let Some(m) = logs.iter().copied().reduce(f64::max) else {
            return Ok(0.0);
        };
        let sum: f64 = logs.iter().map(|l| (l - m).exp()).sum();
        Ok(((m + sum.ln()) / r).exp())
    }

    /// `c / (1 - Σ b_n)`, the unique generalized fixed point when the sum is not 1.
    pub fn closed_fixed_point(&self) -> Result<f64> {
        let s = self.sum_coeffs();
        if (1.0 - s).abs() <= 4.0 * f64::EPSILON {
            return Err(Error::DegenerateFixedPoint);
        }
        Ok(self.offset / (1.0 - s))
    }
}

impl SeqMap for LinearSeqMap {
    fn eval(&self, x: &BoundedSeq) -> Result<f64> {
        let m = x.prefix_len();
        let head: f64 = x
            .prefix()
            .iter()
            .enumerate()
            .map(|(n, v)| self.coeff(n) * v)
            .sum();
        let tail = if x.tail() == 0.0 {
            0.0
        } else {
            x.tail() * self.tail_sum_from(m)
        };
        ensure_finite(self.offset + head + tail, "linear map value")
    }

    fn diagonal_eval(&self, t: f64) -> Result<f64> {
        ensure_finite(self.offset + t * self.sum_coeffs(), "linear map value")
    }

    fn as_linear(&self) -> Option<&LinearSeqMap> {
        Some(self)
    }

    fn sup_lipschitz(&self) -> Option<f64> {
        Some(self.sum_abs_coeffs())
    }
}

/// `f(x) = ½ sup_n x_n` on sequences with entries in `[0, 1]`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SupHalfMap;

impl SeqMap for SupHalfMap {
    fn eval(&self, x: &BoundedSeq) -> Result<f64> {
        if x.values().any(|v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::OutOfDomain(
                "sup-half map needs every entry in [0, 1]".into(),
            ));
        }
        Ok(0.5 * x.sup())
    }

    fn sup_lipschitz(&self) -> Option<f64> {
        Some(0.5)
    }
}

pub type Rule = Arc<dyn Fn(&[f64]) -> Result<f64> + Send + Sync>;

/// A map `g: ℝ^m → ℝ` with an optional caller-supplied `Lip(g)` for the max metric.
#[derive(Clone)]
pub struct FiniteArityMap {
    arity: usize,
    rule: Rule,
    lipschitz_hint: Option<f64>,
    label: String,
}

impl fmt::Debug for FiniteArityMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteArityMap")
            .field("arity", &self.arity)
            .field("label", &self.label)
            .field("lipschitz_hint", &self.lipschitz_hint)
            .finish()
    }
}

impl FiniteArityMap {
    pub fn new<F>(arity: usize, rule: F, lipschitz_hint: Option<f64>) -> Result<Self>
    where
        F: Fn(&[f64]) -> Result<f64> + Send + Sync + 'static,
    {
        Self::with_label(arity, Arc::new(rule), lipschitz_hint, "custom".into())
    }

    fn with_label(
        arity: usize,
        rule: Rule,
        lipschitz_hint: Option<f64>,
        label: String,
    ) -> Result<Self> {
        if arity == 0 {
            return Err(Error::InvalidMap("arity must be at least 1".into()));
        }
        if let Some(l) = lipschitz_hint {
            if !(l.is_finite() && l >= 0.0) {
                return Err(Error::InvalidMap(format!(
                    "Lipschitz hint must be finite and nonnegative, got {l}"
                )));
            }
        }
        Ok(FiniteArityMap {
            arity,
            rule,
            lipschitz_hint,
            label,
        })
    }

    /// `g(x) = offset + Σ_i weights[i] x_i`, with `Lip(g) = Σ |weights[i]|`.
    pub fn affine(weights: Vec<f64>, offset: f64) -> Result<Self> {
        for &w in &weights {
            ensure_finite(w, "affine weight")?;
        }
        ensure_finite(offset, "affine offset")?;
        let lip = weights.iter().map(|w| w.abs()).sum();
        let arity = weights.len();
        let rule: Rule = Arc::new(move |xs: &[f64]| {
            Ok(offset + weights.iter().zip(xs).map(|(w, x)| w * x).sum::<f64>())
        });
        Self::with_label(arity, rule, Some(lip), "affine".into())
    }

    /// `g(x) = offset + scale · max_i x_i`, with `Lip(g) = |scale|`.
    pub fn scaled_max(arity: usize, scale: f64, offset: f64) -> Result<Self> {
        ensure_finite(scale, "scale")?;
        ensure_finite(offset, "offset")?;
        let rule: Rule = Arc::new(move |xs: &[f64]| {
            Ok(offset + scale * xs.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        });
        Self::with_label(arity, rule, Some(scale.abs()), "scaled_max".into())
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn lipschitz_hint(&self) -> Option<f64> {
        self.lipschitz_hint
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn apply(&self, xs: &[f64]) -> Result<f64> {
        if xs.len() != self.arity {
            return Err(Error::LengthMismatch {
                expected: self.arity,
                got: xs.len(),
            });
        }
        ensure_finite((self.rule)(xs)?, "finite-arity map value")
    }

    /// `Lip(g) / q^{m-1}`, an upper bound on `L_{s,q}` of the embedded map.
    pub fn embedded_lip_bound(&self, q: f64) -> Option<f64> {
        self.lipschitz_hint.map(|l| l / pow_n(q, self.arity - 1))
    }
}

/// `f(x_0, x_1, ...) = g(x_0, ..., x_{m-1})`.
#[derive(Debug, Clone)]
pub struct EmbeddedMap {
    inner: FiniteArityMap,
}

pub fn embed_finite(g: FiniteArityMap) -> EmbeddedMap {
    EmbeddedMap { inner: g }
}

impl SeqMap for EmbeddedMap {
    fn eval(&self, x: &BoundedSeq) -> Result<f64> {
        let args: Vec<f64> = (0..self.inner.arity).map(|n| x.at(n)).collect();
        self.inner.apply(&args)
    }

    fn as_finite(&self) -> Option<&FiniteArityMap> {
        Some(&self.inner)
    }

    fn sup_lipschitz(&self) -> Option<f64> {
        // The max metric on the first m coordinates is dominated by d_{s,1}.
        self.inner.lipschitz_hint
    }
}

/// `f_n(x_0, ..., x_{n-1}) = f(x_0, ..., x_{n-1}, base, base, ...)`.
///
/// The hint is `Σ_{k<n} |b_k|` for linear maps and the map's `d_{s,1}`
/// constant otherwise; both bound `Lip(f_n)` in the max metric.
pub fn truncate(f: &MapRef, n: usize, base: f64) -> Result<FiniteArityMap> {
    if n == 0 {
        return Err(Error::InvalidMap(
            "truncation length must be positive".into(),
        ));
    }
    ensure_finite(base, "truncation base")?;
    let hint = match f.as_linear() {
        Some(lin) => Some((0..n).map(|k| lin.coeff(k).abs()).sum()),
        None => f.sup_lipschitz(),
    };
    let inner = Arc::clone(f);
    let rule: Rule = Arc::new(move |xs: &[f64]| inner.eval(&BoundedSeq::padded(xs, base)?));
    FiniteArityMap::with_label(n, rule, hint, format!("truncation(n={n}, base={base})"))
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn random_seq(rng: &mut ChaCha8Rng) -> BoundedSeq {
    let len = rng.random_range(0..=16);
    let prefix = (0..len).map(|_| rng.random::<f64>()).collect();
    let tail = if rng.random_bool(0.3) {
        0.0
    } else {
        rng.random::<f64>()
    };
    BoundedSeq::new(prefix, tail).expect("unit-interval samples are finite")
}

/// Extremal pairs `(x, 0)` from the sharpness construction for linear maps.
fn linear_witnesses(lin: &LinearSeqMap, metric: Metric) -> Vec<BoundedSeq> {
    let coeffs: Vec<f64> = (0..=WITNESS_DEPTH).map(|n| lin.coeff(n)).collect();
    // Witnesses are only defined up to scale. Magnitudes are built from
    // logarithms and shifted so the largest weighted entry is 1, which keeps
    // the distance to 0 near 1 and the p-witness powers finite for p near 1.
    let scaled = |weight_log: f64, log_mag: &dyn Fn(usize, f64) -> f64| -> Vec<f64> {
        let logs: Vec<f64> = coeffs
            .iter()
            .enumerate()
            .map(|(n, b)| {
                if *b == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    log_mag(n, *b)
                }
            })
            .collect();
        let m = logs
            .iter()
            .enumerate()
            .map(|(n, l)| l + n as f64 * weight_log)
            .fold(f64::NEG_INFINITY, f64::max);
        if m == f64::NEG_INFINITY {
            return Vec::new();
        }
        coeffs
            .iter()
            .zip(&logs)
            .map(|(b, l)| sign(*b) * (l - m).exp())
            .collect()
    };
    let prefix: Vec<f64> = match metric {
        Metric::Sup { q } => scaled(q.ln(), &|n, _| -(n as f64) * q.ln()),
        Metric::P { p, q } if p.get() == 1.0 => {
            let best = coeffs
                .iter()
                .enumerate()
                .map(|(n, b)| (n, b.abs() / pow_n(q, n)))
                .fold((0, 0.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
            // A single spike of unit distance from 0.
            let mut v = vec![0.0; best.0 + 1];
            v[best.0] = 1.0 / pow_n(q, best.0);
            v
        }
        Metric::P { p, q } => {
            let e = 1.0 / (p.get() - 1.0);
            scaled(q.ln() / p.get(), &|n, b| {
                e * (b.abs().ln() - n as f64 * q.ln())
            })
        }
    };
    match BoundedSeq::new(prefix, 0.0) {
        Ok(x) => vec![x],
        Err(_) => Vec::new(),
    }
}

/// Largest observed `|f(x) - f(y)| / D(x, y)` over random pairs with entries
/// in `[0, 1]`, plus the extremal witnesses when `f` is linear.
///
/// Pairs outside the map's domain or with non-finite ratios are skipped, so
/// the result never exceeds the true Lipschitz constant beyond rounding.
pub fn empirical_lip_lower_bound(
    f: &dyn SeqMap,
    metric: Metric,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    if trials == 0 {
        return Err(Error::InvalidMap("at least one trial is required".into()));
    }
    let ratio = |x: &BoundedSeq, y: &BoundedSeq| -> Option<f64> {
        let d = metric.distance(x, y).ok()?;
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        let diff = (f.eval(x).ok()? - f.eval(y).ok()?).abs();
        let r = diff / d;
        r.is_finite().then_some(r)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: f64 = 0.0;
    for _ in 0..trials {
        let x = random_seq(&mut rng);
        let y = random_seq(&mut rng);
        if let Some(r) = ratio(&x, &y) {
            best = best.max(r);
        }
    }
    if let Some(lin) = f.as_linear() {
        let zero = BoundedSeq::zero();
        for w in linear_witnesses(lin, metric) {
            if let Some(r) = ratio(&w, &zero) {
                best = best.max(r);
            }
        }
    }
    Ok(best)
}
