//! Eventually constant real sequences.
//!
//! A [`BoundedSeq`] stores a finite prefix and the value repeated forever
//! after it. Every value produced by the lifted map `x ↦ (f(x), x_0, x_1, ...)`
//! stays in this class, since each step only prepends one point.

use crate::error::{ensure_finite, Result};

/// `x_n = prefix[n]` for `n < prefix.len()`, `x_n = tail` afterwards.
///
/// Always held in canonical form: the last prefix entry differs from the
/// tail. Two sequences are equal as sequences iff their representations are
/// equal, so the derived `PartialEq` is sequence equality.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundedSeq {
    prefix: Vec<f64>,
    tail: f64,
}

impl BoundedSeq {
    /// Builds a sequence from raw parts, trimming redundant prefix entries.
    pub fn new(prefix: Vec<f64>, tail: f64) -> Result<Self> {
        ensure_finite(tail, "sequence tail")?;
        for &v in &prefix {
            ensure_finite(v, "sequence prefix")?;
        }
        let mut seq = BoundedSeq { prefix, tail };
        seq.trim();
        Ok(seq)
    }

    /// The constant sequence `(t, t, ...)`.
    pub fn constant(t: f64) -> Result<Self> {
        ensure_finite(t, "constant sequence")?;
        Ok(BoundedSeq {
            prefix: Vec::new(),
            tail: t,
        })
    }

    pub fn zero() -> Self {
        BoundedSeq {
            prefix: Vec::new(),
            tail: 0.0,
        }
    }

    pub fn prefix(&self) -> &[f64] {
        &self.prefix
    }

    pub fn tail(&self) -> f64 {
        self.tail
    }

    /// Number of stored prefix entries; every index at or beyond it reads the tail.
    pub fn prefix_len(&self) -> usize {
        self.prefix.len()
    }

    pub fn at(&self, n: usize) -> f64 {
        self.prefix.get(n).copied().unwrap_or(self.tail)
    }

    /// `(p, x_0, x_1, ...)`.
    pub fn shift_in(&self, p: f64) -> Result<Self> {
        ensure_finite(p, "shifted-in point")?;
        if self.prefix.is_empty() && p == self.tail {
            return Ok(self.clone());
        }
        let mut prefix = Vec::with_capacity(self.prefix.len() + 1);
        prefix.push(p);
        prefix.extend_from_slice(&self.prefix);
        Ok(BoundedSeq {
            prefix,
            tail: self.tail,
        })
    }

    /// Keeps coordinates `0..n` and replaces every later coordinate by `base`.
    pub fn truncated(&self, n: usize, base: f64) -> Result<Self> {
        let prefix = (0..n).map(|i| self.at(i)).collect();
        BoundedSeq::new(prefix, base)
    }

    /// Finite sequence `(values..., tail, tail, ...)` padded with `tail`.
    pub fn padded(values: &[f64], tail: f64) -> Result<Self> {
        BoundedSeq::new(values.to_vec(), tail)
    }

    /// Every value the sequence takes (prefix entries followed by the tail).
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.prefix
            .iter()
            .copied()
            .chain(std::iter::once(self.tail))
    }

    /// Applies `g` to every coordinate.
    pub fn map_values<F>(&self, mut g: F) -> Result<Self>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let prefix = self
            .prefix
            .iter()
            .map(|&v| g(v))
            .collect::<Result<Vec<_>>>()?;
        let tail = g(self.tail)?;
        BoundedSeq::new(prefix, tail)
    }

    pub fn sup(&self) -> f64 {
        self.values().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn inf(&self) -> f64 {
        self.values().fold(f64::INFINITY, f64::min)
    }

    fn trim(&mut self) {
        while self.prefix.last() == Some(&self.tail) {
            self.prefix.pop();
        }
    }
}

/// Canonical form of a raw `(prefix, tail)` pair.
pub fn normalize(prefix: &[f64], tail: f64) -> Result<BoundedSeq> {
    BoundedSeq::new(prefix.to_vec(), tail)
}
