use crate::error::{Error, Result};

/// Split of the hypothesis indices `0..n` into true nulls (I0) and false
/// nulls (I1). At least one true null is required.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HypothesisPartition {
    /// `true` at index i means hypothesis i is a true null.
    null_mask: Vec<bool>,
    n0: usize,
}

impl HypothesisPartition {
    /// Builds a partition from explicit index sets. The sets must be
    /// disjoint and cover `0..n` exactly.
    pub fn new(n: usize, i0: &[usize], i1: &[usize]) -> Result<Self> {
        if i0.is_empty() {
            return Err(Error::config("partition requires n0 >= 1"));
        }
        if i0.len() + i1.len() != n {
            return Err(Error::config(format!(
                "partition covers {} indices, expected n = {}",
                i0.len() + i1.len(),
                n
            )));
        }
        let mut seen = vec![false; n];
        let mut null_mask = vec![false; n];
        for &i in i0 {
            if i >= n || seen[i] {
                return Err(Error::config("i0 indices must be unique and < n"));
            }
            seen[i] = true;
            null_mask[i] = true;
        }
        for &i in i1 {
            if i >= n || seen[i] {
                return Err(Error::config("i0 and i1 must be disjoint and cover 0..n"));
            }
            seen[i] = true;
        }
        Ok(HypothesisPartition {
            null_mask,
            n0: i0.len(),
        })
    }

    /// Partition with the false nulls occupying the leading indices
    /// `0..n1` and the true nulls `n1..n`. This is the layout every
    /// scenario generator emits; thresholds only depend on order
    /// statistics, so the layout is observationally irrelevant.
    pub fn leading_false(n: usize, n1: usize) -> Result<Self> {
        if n1 >= n {
            return Err(Error::config(format!(
                "n1 = {n1} leaves no true null among n = {n} hypotheses"
            )));
        }
        let mut null_mask = vec![true; n];
        for m in null_mask.iter_mut().take(n1) {
            *m = false;
        }
        Ok(HypothesisPartition {
            null_mask,
            n0: n - n1,
        })
    }

    pub fn n(&self) -> usize {
        self.null_mask.len()
    }

    pub fn n0(&self) -> usize {
        self.n0
    }

    pub fn n1(&self) -> usize {
        self.null_mask.len() - self.n0
    }

    pub fn is_true_null(&self, i: usize) -> bool {
        self.null_mask[i]
    }

    /// Indices of the true nulls (I0), ascending.
    pub fn i0(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.null_mask[i]).collect()
    }

    /// Indices of the false nulls (I1), ascending.
    pub fn i1(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| !self.null_mask[i]).collect()
    }
}

/// One draw of n p-values together with the (known, simulated) truth.
#[derive(Debug, Clone, PartialEq)]
pub struct PValueSample {
    values: Vec<f64>,
    partition: HypothesisPartition,
}

impl PValueSample {
    pub fn new(values: Vec<f64>, partition: HypothesisPartition) -> Result<Self> {
        if values.len() != partition.n() {
            return Err(Error::config(format!(
                "sample has {} values but partition describes {} hypotheses",
                values.len(),
                partition.n()
            )));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::config("p-values must lie in [0, 1]"));
        }
        Ok(PValueSample { values, partition })
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn partition(&self) -> &HypothesisPartition {
        &self.partition
    }

    /// Counts (V, S, R) of rejected true nulls, rejected false nulls and
    /// total rejections at threshold `tau` (weak comparison).
    pub fn count_rejections(&self, tau: f64) -> (usize, usize, usize) {
        let mut v = 0;
        let mut s = 0;
        for (i, &p) in self.values.iter().enumerate() {
            if p <= tau {
                if self.partition.is_true_null(i) {
                    v += 1;
                } else {
                    s += 1;
                }
            }
        }
        (v, s, v + s)
    }
}
