//! Rank-2 free Lie algebra combinatorics.
//!
//! Dimensions come from the necklace formula; the Hall set and a brute-force
//! rank computation in the free associative algebra serve as independent oracles.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::exactalg::linalg;

fn mobius(n: u64) -> i64 {
    let mut n = n;
    let mut result = 1i64;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            result = -result;
        }
        p += 1;
    }
    if n > 1 {
        result = -result;
    }
    result
}

/// Dimension of the length-`l` component of the free Lie algebra on two generators.
pub fn free_lie_dim(l: u32) -> u64 {
    assert!(l >= 1);
    let l64 = l as u64;
    let total: i128 = (1..=l64)
        .filter(|d| l64 % d == 0)
        .map(|d| mobius(d) as i128 * (1i128 << (l64 / d)))
        .sum();
    (total / l as i128) as u64
}

/// `[m_1, …, m_{l_max}]`.
pub fn free_lie_dims(l_max: u32) -> Vec<u64> {
    (1..=l_max).map(free_lie_dim).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreeLieProfile {
    pub k: usize,
    /// `m[ℓ-1] = m_ℓ` for ℓ = 1..=ρ.
    pub m: Vec<u64>,
    /// Cumulative `n[ℓ-1] = n_ℓ`.
    pub n: Vec<u64>,
    pub rho: usize,
    /// `(m_2, …, m_{ρ-1}, m'_ρ)`.
    pub mults: Vec<u64>,
    /// `2 + k < n_ρ`.
    pub strict: bool,
}

impl FreeLieProfile {
    pub fn for_codim(k: usize) -> Self {
        assert!(k >= 1, "codimension must be positive");
        let target = 2 + k as u64;
        let mut m = Vec::new();
        let mut n = Vec::new();
        let mut acc = 0;
        let mut l = 1;
        loop {
            let ml = free_lie_dim(l);
            acc += ml;
            m.push(ml);
            n.push(acc);
            if acc >= target {
                break;
            }
            l += 1;
        }
        let rho = l as usize;
        let mut mults: Vec<u64> = m[1..rho - 1].to_vec();
        let used: u64 = mults.iter().sum();
        mults.push(k as u64 - used);
        FreeLieProfile { k, m, n, rho, mults, strict: target < acc }
    }

    /// Multiplicity of new coordinates of weight `j` (2 ≤ j ≤ ρ).
    pub fn mult(&self, j: usize) -> u64 {
        self.mults[j - 2]
    }
}

/// `(ρ, 2+k < n_ρ)` for codimension `k`.
pub fn model_length(k: usize) -> (usize, bool) {
    let p = FreeLieProfile::for_codim(k);
    (p.rho, p.strict)
}

/// A bracket expression in the generators `h1`, `h2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LieWord {
    Gen(u8),
    Bracket(Box<LieWord>, Box<LieWord>),
}

impl LieWord {
    pub fn len(&self) -> usize {
        match self {
            LieWord::Gen(_) => 1,
            LieWord::Bracket(a, b) => a.len() + b.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Expansion in the free associative algebra: word → integer coefficient.
    pub fn expand(&self) -> BTreeMap<Vec<u8>, i64> {
        match self {
            LieWord::Gen(g) => BTreeMap::from([(vec![*g], 1)]),
            LieWord::Bracket(a, b) => {
                let (ea, eb) = (a.expand(), b.expand());
                let mut out: BTreeMap<Vec<u8>, i64> = BTreeMap::new();
                for (wa, ca) in &ea {
                    for (wb, cb) in &eb {
                        let mut ab = wa.clone();
                        ab.extend(wb);
                        *out.entry(ab).or_default() += ca * cb;
                        let mut ba = wb.clone();
                        ba.extend(wa);
                        *out.entry(ba).or_default() -= ca * cb;
                    }
                }
                out.retain(|_, c| *c != 0);
                out
            }
        }
    }
}

impl fmt::Display for LieWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LieWord::Gen(g) => write!(f, "h{g}"),
            LieWord::Bracket(a, b) => write!(f, "[{a},{b}]"),
        }
    }
}

/// Hall set of the free Lie algebra on `h1 < h2`, ordered by length and then by
/// creation; `[u,v]` is admitted when `u < v` and, if `v = [v',v'']`, `v' ≤ u`.
/// Returns the elements of length exactly `l`.
pub fn hall_word_oracle(l: usize) -> Vec<LieWord> {
    assert!((1..=10).contains(&l), "Hall oracle is limited to lengths 1..=10");
    // (word, length, left factor index if bracket)
    let mut hall: Vec<(LieWord, usize, Option<usize>)> =
        vec![(LieWord::Gen(1), 1, None), (LieWord::Gen(2), 1, None)];
    let mut by_len: Vec<Vec<usize>> = vec![vec![], vec![0, 1]];
    for n in 2..=l {
        let mut fresh = Vec::new();
        for lu in 1..n {
            let lv = n - lu;
            for &u in &by_len[lu] {
                for &v in &by_len[lv] {
                    if u >= v {
                        continue;
                    }
                    if let Some(vl) = hall[v].2 {
                        if vl > u {
                            continue;
                        }
                    }
                    let w = LieWord::Bracket(Box::new(hall[u].0.clone()), Box::new(hall[v].0.clone()));
                    fresh.push((w, n, Some(u)));
                }
            }
        }
        let mut idx = Vec::new();
        for f in fresh {
            idx.push(hall.len());
            hall.push(f);
        }
        by_len.push(idx);
    }
    by_len[l].iter().map(|&i| hall[i].0.clone()).collect()
}

fn rank_of_expansions(exps: &[BTreeMap<Vec<u8>, i64>]) -> usize {
    let mut cols: BTreeMap<Vec<u8>, usize> = BTreeMap::new();
    for e in exps {
        for w in e.keys() {
            let n = cols.len();
            cols.entry(w.clone()).or_insert(n);
        }
    }
    let zero = BigRational::from_integer(BigInt::from(0));
    let mut m: Vec<Vec<BigRational>> = exps
        .iter()
        .filter(|e| !e.is_empty())
        .map(|e| {
            let mut row = vec![zero.clone(); cols.len()];
            for (w, c) in e {
                row[cols[w]] = BigRational::from_integer(BigInt::from(*c));
            }
            row
        })
        .collect();
    if m.is_empty() {
        return 0;
    }
    linalg::rref(&mut m).len()
}

/// Dimension of the length-`l` component computed by brute force: the rank of all
/// `2^l` left-normed brackets `[h_{i1},[h_{i2},[…,h_{il}]]]` in the free associative algebra.
pub fn brute_force_dim(l: usize) -> usize {
    assert!((1..=10).contains(&l));
    let exps: Vec<BTreeMap<Vec<u8>, i64>> = (0..(1u32 << l))
        .map(|bits| {
            let letters: Vec<u8> = (0..l).map(|i| 1 + ((bits >> i) & 1) as u8).collect();
            let mut w = LieWord::Gen(letters[l - 1]);
            for &g in letters[..l - 1].iter().rev() {
                w = LieWord::Bracket(Box::new(LieWord::Gen(g)), Box::new(w));
            }
            w.expand()
        })
        .collect();
    rank_of_expansions(&exps)
}

/// Rank of the Hall words of length `l` in the free associative algebra.
pub fn hall_rank(l: usize) -> usize {
    let exps: Vec<_> = hall_word_oracle(l).iter().map(LieWord::expand).collect();
    rank_of_expansions(&exps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_dimensions() {
        assert_eq!(free_lie_dims(8), vec![2, 1, 2, 3, 6, 9, 18, 30]);
    }

    #[test]
    fn hall_small_lengths() {
        let w2 = hall_word_oracle(2);
        assert_eq!(w2.len(), 1);
        assert_eq!(w2[0].to_string(), "[h1,h2]");
        assert_eq!(hall_word_oracle(3).len(), 2);
        assert_eq!(hall_word_oracle(4).len(), 3);
    }

    #[test]
    fn profile_examples() {
        assert_eq!(model_length(1), (2, false));
        assert_eq!(model_length(3), (3, false));
        assert_eq!(model_length(6), (4, false));
        assert_eq!(model_length(2), (3, true));
        let p = FreeLieProfile::for_codim(6);
        assert_eq!(p.mults, vec![1, 2, 3]);
        let p = FreeLieProfile::for_codim(2);
        assert_eq!(p.mults, vec![1, 1]);
        let p = FreeLieProfile::for_codim(7);
        assert_eq!((p.rho, p.mults.clone()), (5, vec![1, 2, 3, 1]));
    }
}
