//! Exact Young-diagram combinatorics: enumeration, irrep dimensions,
//! natural-representation multiplicities, characters and branching.
//!
//! Everything here is integer or rational arithmetic on arbitrary-precision
//! numbers; no floating point enters any result.

use std::collections::HashMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{PbtError, Result};

/// Integer partition (Young diagram) with weakly decreasing positive parts.
///
/// The empty list is the unique partition of 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    parts: Vec<u32>,
}

impl Partition {
    pub fn new(parts: Vec<u32>) -> Result<Self> {
        for w in parts.windows(2) {
            if w[0] < w[1] {
                return Err(PbtError::InvalidPartition(format!(
                    "parts not weakly decreasing: {:?}",
                    parts
                )));
            }
        }
        if parts.iter().any(|&p| p == 0) {
            return Err(PbtError::InvalidPartition(format!(
                "zero part in {:?}",
                parts
            )));
        }
        Ok(Self { parts })
    }

    pub fn empty() -> Self {
        Self { parts: Vec::new() }
    }

    /// Total box count.
    pub fn n(&self) -> u32 {
        self.parts.iter().sum()
    }

    /// Number of rows.
    pub fn height(&self) -> usize {
        self.parts.len()
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    /// Row length, 0 beyond the last row (rows are 0-indexed).
    pub fn row(&self, i: usize) -> u32 {
        self.parts.get(i).copied().unwrap_or(0)
    }

    /// Conjugate (transposed) diagram.
    pub fn conjugate(&self) -> Partition {
        let cols = self.row(0) as usize;
        let mut parts = Vec::with_capacity(cols);
        for j in 0..cols {
            parts.push(self.parts.iter().filter(|&&p| p > j as u32).count() as u32);
        }
        Partition { parts }
    }

    /// Compact label, e.g. `3+1`; the empty diagram prints as `0`.
    pub fn label(&self) -> String {
        if self.parts.is_empty() {
            "0".to_string()
        } else {
            self.parts
                .iter()
                .map(|p| p.to_string())
                .collect::<Vec<_>>()
                .join("+")
        }
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// Descending lexicographic order on part lists: (4) before (3,1) before (2,2).
pub fn desc_lex_cmp(a: &Partition, b: &Partition) -> std::cmp::Ordering {
    b.parts.cmp(&a.parts)
}

/// Partition together with its exact irrep dimension and natural-representation
/// multiplicity at a fixed local dimension.
#[derive(Debug, Clone)]
pub struct IrrepData {
    pub partition: Partition,
    pub dim: BigUint,
    pub mult: BigUint,
}

impl IrrepData {
    pub fn compute(partition: Partition, d: u32) -> Self {
        let dim = dim_sn(&partition);
        let mult = mult_natural(&partition, d);
        Self {
            partition,
            dim,
            mult,
        }
    }
}

/// A branch pair (α ⊢ n−2, μ ⊢ n−1) with μ = α plus one box, heights ≤ d.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BranchPair {
    pub alpha: Partition,
    pub mu: Partition,
}

/// All partitions of `n` with height ≤ `d`, descending lexicographic.
pub fn enumerate_partitions(n: u32, d: u32) -> Vec<Partition> {
    let mut out = Vec::new();
    let mut parts = Vec::new();
    fn rec(remaining: u32, max_part: u32, rows_left: u32, parts: &mut Vec<u32>, out: &mut Vec<Partition>) {
        if remaining == 0 {
            out.push(Partition {
                parts: parts.clone(),
            });
            return;
        }
        if rows_left == 0 {
            return;
        }
        // smallest admissible first part: must fit the rest in rows_left rows
        let lo = remaining.div_ceil(rows_left);
        let hi = max_part.min(remaining);
        for p in (lo..=hi).rev() {
            parts.push(p);
            rec(remaining - p, p, rows_left - 1, parts, out);
            parts.pop();
        }
    }
    rec(n, n.max(1), d, &mut parts, &mut out);
    out
}

/// Hook lengths of every cell, row-major.
fn hooks(lambda: &Partition) -> Vec<u32> {
    let conj = lambda.conjugate();
    let mut hs = Vec::with_capacity(lambda.n() as usize);
    for (i, &li) in lambda.parts.iter().enumerate() {
        for j in 0..li as usize {
            // arm + leg + 1
            hs.push(li - j as u32 + conj.row(j) - i as u32 - 1);
        }
    }
    hs
}

/// Dimension of the S(n) irrep labelled by λ: count of standard Young
/// tableaux, via the hook-length formula. `dim_sn(∅) = 1`.
pub fn dim_sn(lambda: &Partition) -> BigUint {
    let n = lambda.n();
    let mut num = BigUint::one();
    for k in 2..=n {
        num *= k;
    }
    let mut den = BigUint::one();
    for h in hooks(lambda) {
        den *= h;
    }
    num / den
}

/// Multiplicity m_λ of the irrep λ in the natural representation of S(n) on
/// (C^d)^⊗n, i.e. the number of semistandard tableaux of shape λ with entries
/// in {1..d}. Returns 0 when the diagram is taller than d.
///
/// Evaluated as the GL(d) Weyl dimension product
/// Π_{i<j} (λ_i − λ_j + j − i)/(j − i), which is O(d²) per diagram; the
/// hook-content form is kept in the test suite as an independent route.
pub fn mult_natural(lambda: &Partition, d: u32) -> BigUint {
    if lambda.height() > d as usize {
        return BigUint::zero();
    }
    if let Some(m) = mult_natural_u128(lambda, d) {
        return BigUint::from(m);
    }
    let d = d as usize;
    let shifted: Vec<u64> = (0..d)
        .map(|i| lambda.row(i) as u64 + (d - 1 - i) as u64)
        .collect();
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..d {
        for j in i + 1..d {
            num *= shifted[i] - shifted[j];
            den *= (j - i) as u64;
        }
    }
    num / den
}

/// Fast path: the Weyl product fits u128 for every (λ, d) the sweeps touch.
fn mult_natural_u128(lambda: &Partition, d: u32) -> Option<u128> {
    let d = d as usize;
    let shifted: Vec<u128> = (0..d)
        .map(|i| lambda.row(i) as u128 + (d - 1 - i) as u128)
        .collect();
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 0..d {
        for j in i + 1..d {
            num = num.checked_mul(shifted[i] - shifted[j])?;
            den *= (j - i) as u128;
        }
    }
    Some(num / den)
}

/// Normalized character χ^λ(12)/d_λ of a transposition, exact rational in
/// [−1, 1]. Defined for |λ| ≥ 2.
pub fn normalized_char_transposition(lambda: &Partition) -> Result<BigRational> {
    let n = lambda.n();
    if n < 2 {
        return Err(PbtError::InvalidArgument(format!(
            "normalized transposition character needs |λ| ≥ 2, got {}",
            n
        )));
    }
    // Σ_j λ_j (λ_j − 2j + 1) / 2, rows 1-indexed
    let mut num = BigInt::zero();
    for (idx, &p) in lambda.parts.iter().enumerate() {
        let j = (idx + 1) as i64;
        num += BigInt::from(p as i64) * BigInt::from(p as i64 - 2 * j + 1);
    }
    let pairs = BigInt::from(n as u64) * BigInt::from((n - 1) as u64);
    Ok(BigRational::new(num, pairs))
}

/// All μ obtained from α by adding one box, height-capped at d;
/// descending lexicographic.
pub fn branch_add(alpha: &Partition, d: u32) -> Vec<Partition> {
    let mut out = Vec::new();
    let h = alpha.height();
    for i in 0..=h {
        if i == h && h == d as usize {
            break;
        }
        let can = i == 0 || alpha.row(i - 1) > alpha.row(i);
        if can {
            let mut parts = alpha.parts.clone();
            if i == h {
                parts.push(1);
            } else {
                parts[i] += 1;
            }
            out.push(Partition { parts });
        }
    }
    out
}

/// All α obtained from μ by removing one corner box; descending lexicographic.
pub fn branch_remove(mu: &Partition) -> Vec<Partition> {
    let mut out = Vec::new();
    let h = mu.height();
    for i in (0..h).rev() {
        let removable = i + 1 == h || mu.row(i) > mu.row(i + 1);
        if removable {
            let mut parts = mu.parts.clone();
            parts[i] -= 1;
            if parts[i] == 0 {
                parts.pop();
            }
            out.push(Partition { parts });
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MultSquareMethod {
    Direct,
    CycleSum,
}

/// Σ_{ν ⊢ n, h(ν) ≤ d} m_ν², either by direct enumeration or by the
/// cycle-count average (1/n!)·Σ_{σ ∈ S(n)} d^{2·cycles(σ)}.
pub fn mult_square_sum(n: u32, d: u32, method: MultSquareMethod) -> Result<BigRational> {
    match method {
        MultSquareMethod::Direct => {
            let mut total = BigUint::zero();
            for nu in enumerate_partitions(n, d) {
                let m = mult_natural(&nu, d);
                total += &m * &m;
            }
            Ok(BigRational::from(BigInt::from(total)))
        }
        MultSquareMethod::CycleSum => {
            const MAX_N: u32 = 9;
            if n > MAX_N {
                return Err(PbtError::EnumerationGuard { n, max: MAX_N });
            }
            let mut total = BigUint::zero();
            let base = BigUint::from(d) * BigUint::from(d);
            for sigma in all_permutations(n as usize) {
                total += base.pow(cycle_count(&sigma) as u32);
            }
            let mut fact = BigUint::one();
            for k in 2..=n {
                fact *= k;
            }
            Ok(BigRational::new(BigInt::from(total), BigInt::from(fact)))
        }
    }
}

/// Σ m_ν² for every ν ⊢ k, h(ν) ≤ d, for all k ≤ nmax in a single
/// enumeration pass. Index k of the result holds the sum for box count k.
pub fn mult_square_sums_upto(nmax: u32, d: u32) -> Vec<BigUint> {
    let mut sums = vec![BigUint::zero(); nmax as usize + 1];
    let mut parts: Vec<u32> = Vec::new();
    fn rec(used: u32, nmax: u32, max_part: u32, rows_left: u32, d: u32, parts: &mut Vec<u32>, sums: &mut [BigUint]) {
        let p = Partition {
            parts: parts.clone(),
        };
        let m = mult_natural(&p, d);
        sums[used as usize] += &m * &m;
        if rows_left == 0 {
            return;
        }
        for next in 1..=max_part.min(nmax - used) {
            parts.push(next);
            rec(used + next, nmax, next, rows_left - 1, d, parts, sums);
            parts.pop();
        }
    }
    rec(0, nmax, nmax, d, d, &mut parts, &mut sums);
    sums
}

/// All permutations of {0..n−1} in index form (σ[i] = image of i).
pub fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    fn heap(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(cur.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, cur, out);
            if k % 2 == 0 {
                cur.swap(i, k - 1);
            } else {
                cur.swap(0, k - 1);
            }
        }
    }
    heap(n, &mut cur, &mut out);
    out
}

/// Number of cycles of a permutation in index form.
pub fn cycle_count(sigma: &[usize]) -> usize {
    let mut seen = vec![false; sigma.len()];
    let mut cycles = 0;
    for mut i in 0..sigma.len() {
        if seen[i] {
            continue;
        }
        cycles += 1;
        while !seen[i] {
            seen[i] = true;
            i = sigma[i];
        }
    }
    cycles
}

/// Cycle type of a permutation as a partition of its degree.
pub fn cycle_type(sigma: &[usize]) -> Partition {
    let mut seen = vec![false; sigma.len()];
    let mut lens = Vec::new();
    for mut i in 0..sigma.len() {
        if seen[i] {
            continue;
        }
        let mut len = 0u32;
        while !seen[i] {
            seen[i] = true;
            i = sigma[i];
            len += 1;
        }
        lens.push(len);
    }
    lens.sort_unstable_by(|a, b| b.cmp(a));
    Partition { parts: lens }
}

/// Symmetric-group character χ^λ on a conjugacy class, by the
/// Murnaghan–Nakayama rule with memoization.
pub struct CharacterTable {
    memo: HashMap<(Vec<u32>, Vec<u32>), BigInt>,
}

impl CharacterTable {
    pub fn new() -> Self {
        Self {
            memo: HashMap::new(),
        }
    }

    pub fn character(&mut self, lambda: &Partition, class: &Partition) -> BigInt {
        assert_eq!(lambda.n(), class.n(), "character: size mismatch");
        self.mn(&lambda.parts, &class.parts)
    }

    fn mn(&mut self, lambda: &[u32], class: &[u32]) -> BigInt {
        if class.is_empty() {
            return BigInt::one();
        }
        let key = (lambda.to_vec(), class.to_vec());
        if let Some(v) = self.memo.get(&key) {
            return v.clone();
        }
        let t = class[0] as i64;
        let rest = &class[1..];
        let h = lambda.len();
        // beta numbers: strictly decreasing first-column hook lengths
        let beta: Vec<i64> = (0..h).map(|i| lambda[i] as i64 + (h - 1 - i) as i64).collect();
        let mut total = BigInt::zero();
        for i in 0..h {
            let target = beta[i] - t;
            if target < 0 || beta.contains(&target) {
                continue;
            }
            // removing the strip crosses every beta number strictly between
            let crossed = beta.iter().filter(|&&b| b < beta[i] && b > target).count();
            let sign = if crossed % 2 == 0 {
                BigInt::one()
            } else {
                -BigInt::one()
            };
            let mut nb = beta.clone();
            nb[i] = target;
            nb.sort_unstable_by(|a, b| b.cmp(a));
            // convert back to a partition, dropping trailing zeros
            let mut nl: Vec<u32> = nb
                .iter()
                .enumerate()
                .map(|(k, &b)| (b - (h - 1 - k) as i64) as u32)
                .collect();
            while nl.last() == Some(&0) {
                nl.pop();
            }
            total += sign * self.mn(&nl, rest);
        }
        self.memo.insert(key, total.clone());
        total
    }
}

impl Default for CharacterTable {
    fn default() -> Self {
        Self::new()
    }
}

/// d_λ as an exact check value used by tests: χ^λ on the identity class.
pub fn dim_from_character(table: &mut CharacterTable, lambda: &Partition) -> BigInt {
    let class = Partition {
        parts: vec![1; lambda.n() as usize],
    };
    if lambda.n() == 0 {
        return BigInt::one();
    }
    table.character(lambda, &class)
}

pub fn rational_is_in_unit_interval(r: &BigRational) -> bool {
    r.abs() <= BigRational::one()
}
