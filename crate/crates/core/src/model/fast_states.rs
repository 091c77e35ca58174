use std::collections::HashMap;

use crate::error::{Error, Result};

pub const DEFAULT_STATE_CAP: usize = 100_000;

/// The configurations `{n in N^m : sum n_i = M}` of the fast species, in
/// lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct FastStateSpace {
    fast_dim: usize,
    total: u32,
    states: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
}

/// `binomial(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: u64, k: u64) -> u128 {
    let k = k.min(n.saturating_sub(k));
    let mut acc: u128 = 1;
    for i in 0..k {
        // exact at every step: acc * (n - i) is divisible by (i + 1)
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

impl FastStateSpace {
    pub fn enumerate(fast_dim: usize, total: u32) -> Result<Self> {
        Self::enumerate_capped(fast_dim, total, DEFAULT_STATE_CAP)
    }

    pub fn enumerate_capped(fast_dim: usize, total: u32, cap: usize) -> Result<Self> {
        if fast_dim == 0 {
            return Err(Error::InvalidArgument("fast dimension must be at least 1".into()));
        }
        let count = binomial(total as u64 + fast_dim as u64 - 1, fast_dim as u64 - 1);
        if count > cap as u128 {
            return Err(Error::Capacity { count, cap });
        }
        let mut states = Vec::with_capacity(count as usize);
        let mut current = vec![0u32; fast_dim];
        fill(&mut current, 0, total, &mut states);
        let index = states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Ok(Self { fast_dim, total, states, index })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn fast_dim(&self) -> usize {
        self.fast_dim
    }

    pub fn total(&self) -> u32 {
        self.total
    }

    pub fn states(&self) -> &[Vec<u32>] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &[u32] {
        &self.states[i]
    }

    pub fn index_of(&self, state: &[u32]) -> Option<usize> {
        self.index.get(state).copied()
    }

    /// Index of `states[from] + jump`, if that lands in the space.
    pub fn shifted(&self, from: usize, jump: &[i64]) -> Option<usize> {
        let mut target = Vec::with_capacity(self.fast_dim);
        for (&n, &g) in self.states[from].iter().zip(jump) {
            let v = n as i64 + g;
            if v < 0 {
                return None;
            }
            target.push(v as u32);
        }
        self.index_of(&target)
    }
}

fn fill(current: &mut [u32], pos: usize, remaining: u32, out: &mut Vec<Vec<u32>>) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(current.to_vec());
        return;
    }
    for v in 0..=remaining {
        current[pos] = v;
        fill(current, pos + 1, remaining - v, out);
    }
}
