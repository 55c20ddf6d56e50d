//! Explicit orthogonal matrix representations of S(n) in the chain-adapted
//! (Young orthogonal) basis, which realizes the partially reduced
//! irreducible representation (PRIR) property: restriction to S(n−1) is
//! block diagonal with blocks labelled by μ − □ in descending-lex order.
//!
//! Also provides the group-algebra operators E_ij^α and F_ij^μ on tensor
//! space and numerical verification of every representation identity used
//! by the spectral analysis.

use std::ops::Range;

use faer::Mat;
use num_traits::ToPrimitive;

use crate::error::{PbtError, Result};
use crate::oracle::{dim_checked, perm_operator, DenseOperator, OracleReport};
use crate::partitions::{all_permutations, normalized_char_transposition, Partition};

/// Standard Young tableau: cell coordinates (row, col), 0-based, of each
/// value 1..n (index v−1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tableau {
    cells: Vec<(usize, usize)>,
}

impl Tableau {
    pub fn n(&self) -> usize {
        self.cells.len()
    }

    pub fn cell(&self, value: usize) -> (usize, usize) {
        self.cells[value - 1]
    }

    /// col − row of a value's cell.
    pub fn content(&self, value: usize) -> i64 {
        let (r, c) = self.cell(value);
        c as i64 - r as i64
    }

    /// Shape of the subtableau with values ≤ k.
    pub fn shape_upto(&self, k: usize) -> Partition {
        let mut rows: Vec<u32> = Vec::new();
        for v in 1..=k {
            let (r, _) = self.cell(v);
            if r >= rows.len() {
                rows.resize(r + 1, 0);
            }
            rows[r] += 1;
        }
        Partition::new(rows).expect("valid subshape")
    }
}

fn generate_syt(shape: &Partition) -> Vec<Tableau> {
    let n = shape.n() as usize;
    let rows = shape.parts();
    let mut out = Vec::new();
    let mut fill: Vec<usize> = vec![0; rows.len()]; // boxes placed per row
    let mut cells: Vec<(usize, usize)> = Vec::with_capacity(n);
    fn rec(
        v: usize,
        n: usize,
        rows: &[u32],
        fill: &mut Vec<usize>,
        cells: &mut Vec<(usize, usize)>,
        out: &mut Vec<Tableau>,
    ) {
        if v > n {
            out.push(Tableau {
                cells: cells.clone(),
            });
            return;
        }
        for r in 0..rows.len() {
            let c = fill[r];
            if c < rows[r] as usize && (r == 0 || fill[r - 1] > c) {
                fill[r] += 1;
                cells.push((r, c));
                rec(v + 1, n, rows, fill, cells, out);
                cells.pop();
                fill[r] -= 1;
            }
        }
    }
    rec(1, n, rows, &mut fill, &mut cells, &mut out);
    out
}

/// Chain order: compare shapes of the restrictions n−1, n−2, … with
/// descending-lex at each level; groups restriction blocks contiguously.
fn chain_cmp(a: &Tableau, b: &Tableau) -> std::cmp::Ordering {
    for k in (1..a.n()).rev() {
        let sa = a.shape_upto(k);
        let sb = b.shape_upto(k);
        let ord = crate::partitions::desc_lex_cmp(&sa, &sb);
        if ord != std::cmp::Ordering::Equal {
            return ord;
        }
    }
    std::cmp::Ordering::Equal
}

/// Orthogonal irreducible matrix representation of S(n) for shape μ in the
/// chain-adapted basis.
#[derive(Debug, Clone)]
pub struct IrrepMatrixRep {
    mu: Partition,
    tableaux: Vec<Tableau>,
    generators: Vec<Mat<f64>>, // [k−1] = image of the adjacent swap (k, k+1)
}

pub const MAX_REP_BOXES: u32 = 8;

/// Young orthogonal representation of S(n), n = |μ| ≤ 8.
pub fn young_orthogonal_rep(mu: &Partition) -> Result<IrrepMatrixRep> {
    let n = mu.n();
    if n == 0 {
        return Err(PbtError::InvalidArgument(
            "empty shape has no representation".into(),
        ));
    }
    if n > MAX_REP_BOXES {
        return Err(PbtError::EnumerationGuard {
            n,
            max: MAX_REP_BOXES,
        });
    }
    let mut tableaux = generate_syt(mu);
    tableaux.sort_by(chain_cmp);
    let dim = tableaux.len();
    let mut generators = Vec::new();
    for k in 1..n as usize {
        let mut g = Mat::zeros(dim, dim);
        for (t, tab) in tableaux.iter().enumerate() {
            let dist = (tab.content(k + 1) - tab.content(k)) as f64;
            let r = 1.0 / dist;
            g[(t, t)] += r;
            if dist.abs() > 1.0 {
                // k and k+1 in neither the same row nor column: swap is valid
                let mut swapped = tab.clone();
                swapped.cells.swap(k - 1, k);
                let t2 = tableaux
                    .iter()
                    .position(|u| u == &swapped)
                    .expect("swapped tableau is standard");
                g[(t2, t)] += (1.0 - r * r).sqrt();
            }
        }
        generators.push(g);
    }
    Ok(IrrepMatrixRep {
        mu: mu.clone(),
        tableaux,
        generators,
    })
}

impl IrrepMatrixRep {
    pub fn shape(&self) -> &Partition {
        &self.mu
    }

    pub fn n(&self) -> usize {
        self.mu.n() as usize
    }

    pub fn dim(&self) -> usize {
        self.tableaux.len()
    }

    pub fn tableaux(&self) -> &[Tableau] {
        &self.tableaux
    }

    /// Image of the adjacent transposition (k, k+1), 1 ≤ k ≤ n−1.
    pub fn generator(&self, k: usize) -> &Mat<f64> {
        &self.generators[k - 1]
    }

    /// Image of an arbitrary permutation (one-line, 0-based) via a reduced
    /// word in adjacent transpositions.
    pub fn matrix(&self, sigma: &[usize]) -> Mat<f64> {
        assert_eq!(sigma.len(), self.n());
        let dim = self.dim();
        let mut work = sigma.to_vec();
        let mut out = Mat::<f64>::identity(dim, dim);
        // sort `work` by adjacent swaps: σ·s_{w1}·…·s_{wm} = id, so
        // D(σ) = G[wm]·…·G[w1]; left-multiplying as we go builds that order
        loop {
            let mut swapped = false;
            for j in 0..work.len() - 1 {
                if work[j] > work[j + 1] {
                    work.swap(j, j + 1);
                    out = &self.generators[j] * &out;
                    swapped = true;
                }
            }
            if !swapped {
                break;
            }
        }
        out
    }

    /// Image of the transposition (a b), 1-based.
    pub fn transposition_matrix(&self, a: usize, b: usize) -> Mat<f64> {
        let mut sigma: Vec<usize> = (0..self.n()).collect();
        sigma.swap(a - 1, b - 1);
        self.matrix(&sigma)
    }

    /// Restriction blocks: (α, index range) per α = μ − □, descending-lex.
    pub fn block_ranges(&self) -> Vec<(Partition, Range<usize>)> {
        let n = self.n();
        let mut out: Vec<(Partition, Range<usize>)> = Vec::new();
        for (i, tab) in self.tableaux.iter().enumerate() {
            let alpha = tab.shape_upto(n - 1);
            match out.last_mut() {
                Some((a, range)) if *a == alpha => range.end = i + 1,
                _ => out.push((alpha, i..i + 1)),
            }
        }
        out
    }

    pub fn block_view(&self, sigma: &[usize]) -> PrirBlockView {
        PrirBlockView {
            ranges: self.block_ranges(),
            matrix: self.matrix(sigma),
        }
    }
}

/// A full matrix image together with its PRIR block coordinates.
#[derive(Debug, Clone)]
pub struct PrirBlockView {
    pub ranges: Vec<(Partition, Range<usize>)>,
    pub matrix: Mat<f64>,
}

impl PrirBlockView {
    pub fn block(&self, i: usize, j: usize) -> Mat<f64> {
        let (_, r) = &self.ranges[i];
        let (_, c) = &self.ranges[j];
        Mat::from_fn(r.len(), c.len(), |a, b| {
            self.matrix[(r.start + a, c.start + b)]
        })
    }
}

fn normalized_char_f64(lambda: &Partition) -> f64 {
    if lambda.n() < 2 {
        return 0.0;
    }
    normalized_char_transposition(lambda)
        .expect("|λ| ≥ 2")
        .to_f64()
        .expect("small rational")
}

fn max_abs_diff(a: &Mat<f64>, b: &Mat<f64>) -> f64 {
    let mut m: f64 = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max((a[(i, j)] - b[(i, j)]).abs());
        }
    }
    m
}

/// Σ_{a=1}^{n−1} φ_R^μ(a n) must equal, per diagonal block α, the scalar
/// ½n(n−1)χ^μ(12)/d_μ − ½(n−1)(n−2)χ^α(12)/d_α times the identity.
pub fn verify_prir_sum_rule(mu: &Partition) -> Result<OracleReport> {
    let rep = young_orthogonal_rep(mu)?;
    let n = rep.n();
    let dim = rep.dim();
    let mut sum = Mat::<f64>::zeros(dim, dim);
    for a in 1..n {
        sum = &sum + &rep.transposition_matrix(a, n);
    }
    let r_mu = normalized_char_f64(mu);
    let mut expected = Mat::<f64>::zeros(dim, dim);
    for (alpha, range) in rep.block_ranges() {
        let scalar = 0.5 * (n * (n - 1)) as f64 * r_mu
            - 0.5 * ((n - 1) * (n - 2)) as f64 * normalized_char_f64(&alpha);
        for i in range {
            expected[(i, i)] = scalar;
        }
    }
    let mut report = OracleReport::new(&format!("prir_sum_rule μ={mu}"), 1e-10);
    report.add("sum rule".to_string(), max_abs_diff(&sum, &expected));
    Ok(report.finish())
}

/// Bilinear orthogonality: Σ_{a=1}^{n} φ^{αβ}(a n)·φ^{βγ}(a n) =
/// n·(d_β/d_μ)·δ^{αγ}·1, where (n n) is the identity.
pub fn verify_prir_orthogonality(mu: &Partition) -> Result<OracleReport> {
    let n = mu.n();
    if n > 7 {
        return Err(PbtError::EnumerationGuard { n, max: 7 });
    }
    let rep = young_orthogonal_rep(mu)?;
    let nm = rep.n();
    let dim = rep.dim();
    let d_mu = dim as f64;
    let ranges = rep.block_ranges();
    let mut images: Vec<Mat<f64>> = (1..nm).map(|a| rep.transposition_matrix(a, nm)).collect();
    images.push(Mat::identity(dim, dim)); // the a = n term
    let mut report = OracleReport::new(&format!("prir_orthogonality μ={mu}"), 1e-10);
    for (bi, (beta, brange)) in ranges.iter().enumerate() {
        // Σ_a A_a E_β A_a restricted to (α, γ) blocks
        let mut m = Mat::<f64>::zeros(dim, dim);
        for img in &images {
            let sel = Mat::from_fn(dim, dim, |i, j| {
                if i == j && brange.contains(&i) {
                    1.0
                } else {
                    0.0
                }
            });
            m = &m + &(&(img * &sel) * img);
        }
        let d_beta = brange.len() as f64;
        for (ai, (_, arange)) in ranges.iter().enumerate() {
            for (gi, (_, grange)) in ranges.iter().enumerate() {
                let expect = if ai == gi {
                    nm as f64 * d_beta / d_mu
                } else {
                    0.0
                };
                let mut dev: f64 = 0.0;
                for (ii, i) in arange.clone().enumerate() {
                    for (jj, j) in grange.clone().enumerate() {
                        let want = if ai == gi && ii == jj { expect } else { 0.0 };
                        dev = dev.max((m[(i, j)] - want).abs());
                    }
                }
                report.add(format!("β={beta} block ({ai},{gi})"), dev);
            }
        }
        let _ = bi;
    }
    Ok(report.finish())
}

/// Per diagonal block α, tr φ^{αα}(a n) is the same for every a = 1..n−1
/// and equals (n/2)(d_α/d_μ)χ^μ(12) − ((n−2)/2)χ^α(12).
pub fn verify_trace_class_invariance(mu: &Partition) -> Result<OracleReport> {
    let rep = young_orthogonal_rep(mu)?;
    let n = rep.n();
    let dim = rep.dim();
    let d_mu = dim as f64;
    let chi_mu = normalized_char_f64(mu) * d_mu;
    let ranges = rep.block_ranges();
    let mut report = OracleReport::new(&format!("trace_class μ={mu}"), 1e-10);
    let images: Vec<Mat<f64>> = (1..n).map(|a| rep.transposition_matrix(a, n)).collect();
    for (alpha, range) in &ranges {
        let d_alpha = range.len() as f64;
        let chi_alpha = normalized_char_f64(alpha) * d_alpha;
        let expect = 0.5 * n as f64 * (d_alpha / d_mu) * chi_mu
            - 0.5 * (n as f64 - 2.0) * chi_alpha;
        let traces: Vec<f64> = images
            .iter()
            .map(|img| range.clone().map(|i| img[(i, i)]).sum())
            .collect();
        let mut dev: f64 = 0.0;
        for t in &traces {
            dev = dev.max((t - expect).abs());
            for u in &traces {
                dev = dev.max((t - u).abs());
            }
        }
        report.add(format!("block α={alpha}"), dev);
    }
    // character consistency: full trace of any transposition image
    let full_expect = chi_mu;
    for (a, img) in images.iter().enumerate() {
        let tr: f64 = (0..dim).map(|i| img[(i, i)]).sum();
        report.add(format!("character ({},{n})", a + 1), (tr - full_expect).abs());
    }
    Ok(report.finish())
}

/// E_ij^α = (d_α/k!)·Σ_{g∈S(k)} D^α_{ji}(g⁻¹)·V(g) on (C^d)^⊗k; i, j are
/// 1-based matrix indices of the irrep α ⊢ k.
pub fn operator_e(alpha: &Partition, i: usize, j: usize, d: u32) -> Result<DenseOperator> {
    let k = alpha.n();
    dim_checked(k, d)?;
    let rep = young_orthogonal_rep(alpha)?;
    if i < 1 || j < 1 || i > rep.dim() || j > rep.dim() {
        return Err(PbtError::InvalidArgument(format!(
            "index ({i},{j}) out of range for d_α = {}",
            rep.dim()
        )));
    }
    let mut fact = 1.0;
    for v in 2..=k as u64 {
        fact *= v as f64;
    }
    let scale = rep.dim() as f64 / fact;
    let mut out = DenseOperator::zeros(k, d)?;
    for g in all_permutations(k as usize) {
        let mut inv = vec![0usize; g.len()];
        for (p, &q) in g.iter().enumerate() {
            inv[q] = p;
        }
        let coeff = rep.matrix(&inv)[(j - 1, i - 1)];
        if coeff.abs() < 1e-15 {
            continue;
        }
        out = out.add(&perm_operator(&g, d)?.scaled(coeff));
    }
    Ok(out.scaled(scale))
}

/// F_ij^μ = Σ_{π ∈ S(n−2)} φ^μ_{ji}(π⁻¹)·V(π) on (C^d)^⊗(n−2), where
/// φ^μ is the irrep of μ ⊢ n−1 evaluated on the subgroup S(n−2).
pub fn operator_f_mu_ij(mu: &Partition, i: usize, j: usize, n: u32, d: u32) -> Result<DenseOperator> {
    if mu.n() != n - 1 {
        return Err(PbtError::InvalidArgument(format!(
            "need μ ⊢ n−1, got |μ| = {} at n = {n}",
            mu.n()
        )));
    }
    dim_checked(n - 2, d)?;
    let rep = young_orthogonal_rep(mu)?;
    if i < 1 || j < 1 || i > rep.dim() || j > rep.dim() {
        return Err(PbtError::InvalidArgument(format!(
            "index ({i},{j}) out of range for d_μ = {}",
            rep.dim()
        )));
    }
    let m = n as usize - 2;
    let mut out = DenseOperator::zeros(n - 2, d)?;
    for pi in all_permutations(m) {
        let mut inv_ext: Vec<usize> = vec![0; m + 1];
        for (p, &q) in pi.iter().enumerate() {
            inv_ext[q] = p;
        }
        inv_ext[m] = m; // extend π⁻¹ by the fixed point n−1
        let coeff = rep.matrix(&inv_ext)[(j - 1, i - 1)];
        if coeff.abs() < 1e-15 {
            continue;
        }
        out = out.add(&perm_operator(&pi, d)?.scaled(coeff));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{kron, young_projector};
    use crate::partitions::{dim_sn, enumerate_partitions, mult_natural};
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(parts: &[u32]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    fn mat_id(dim: usize) -> Mat<f64> {
        Mat::identity(dim, dim)
    }

    #[test]
    fn tiny_reps() {
        let triv = young_orthogonal_rep(&p(&[2])).unwrap();
        assert_eq!(triv.dim(), 1);
        assert!((triv.generator(1)[(0, 0)] - 1.0).abs() < 1e-15);
        let sign = young_orthogonal_rep(&p(&[1, 1])).unwrap();
        assert!((sign.generator(1)[(0, 0)] + 1.0).abs() < 1e-15);
        let std2 = young_orthogonal_rep(&p(&[2, 1])).unwrap();
        assert_eq!(std2.dim(), 2);
        for a in 1..=2 {
            let t = std2.transposition_matrix(a, 3);
            let tr = t[(0, 0)] + t[(1, 1)];
            assert!(tr.abs() < 1e-12, "trace of transposition must vanish");
        }
    }

    #[test]
    fn generator_relations() {
        for n in 2..=6u32 {
            for mu in enumerate_partitions(n, n) {
                let rep = young_orthogonal_rep(&mu).unwrap();
                let dim = rep.dim();
                assert_eq!(dim, dim_sn(&mu).to_usize().unwrap());
                let id = mat_id(dim);
                for k in 1..n as usize {
                    let g = rep.generator(k);
                    assert!(max_abs_diff(&(g * g), &id) < 1e-12, "involution μ={mu}");
                    assert!(
                        max_abs_diff(&(g * g.transpose()), &id) < 1e-12,
                        "orthogonal μ={mu}"
                    );
                }
                for k in 1..n as usize {
                    for l in k + 2..n as usize {
                        let (g, h) = (rep.generator(k), rep.generator(l));
                        assert!(max_abs_diff(&(g * h), &(h * g)) < 1e-12, "commute μ={mu}");
                    }
                }
                for k in 1..n as usize - 1 {
                    let (g, h) = (rep.generator(k), rep.generator(k + 1));
                    let lhs = &(g * h) * g;
                    let rhs = &(h * g) * h;
                    assert!(max_abs_diff(&lhs, &rhs) < 1e-12, "braid μ={mu}");
                }
            }
        }
    }

    #[test]
    fn homomorphism_on_random_words() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for mu in [p(&[3, 2]), p(&[2, 2, 1]), p(&[4, 1, 1])] {
            let rep = young_orthogonal_rep(&mu).unwrap();
            let n = rep.n();
            let perms = all_permutations(n);
            for _ in 0..8 {
                let s = perms.choose(&mut rng).unwrap();
                let t = perms.choose(&mut rng).unwrap();
                let st: Vec<usize> = (0..n).map(|k| s[t[k]]).collect();
                let lhs = &rep.matrix(s) * &rep.matrix(t);
                assert!(max_abs_diff(&lhs, &rep.matrix(&st)) < 1e-12, "μ={mu}");
            }
        }
    }

    #[test]
    fn restriction_is_block_diagonal() {
        for mu in [p(&[3, 1]), p(&[2, 2]), p(&[3, 2, 1]), p(&[2, 2, 1, 1])] {
            let rep = young_orthogonal_rep(&mu).unwrap();
            let n = rep.n();
            let ranges = rep.block_ranges();
            // block labels are μ − □ in descending-lex order with dims d_α
            let expected: Vec<Partition> = crate::partitions::branch_remove(&mu);
            let got: Vec<Partition> = ranges.iter().map(|(a, _)| a.clone()).collect();
            assert_eq!(got, expected, "μ={mu}");
            for (alpha, range) in &ranges {
                assert_eq!(range.len(), dim_sn(alpha).to_usize().unwrap());
            }
            for k in 1..n - 1 {
                let g = rep.generator(k);
                for (_, r) in &ranges {
                    for (_, c) in &ranges {
                        if r.start == c.start {
                            continue;
                        }
                        for i in r.clone() {
                            for j in c.clone() {
                                assert!(
                                    g[(i, j)].abs() < 1e-14,
                                    "off-block leak μ={mu} k={k}"
                                );
                            }
                        }
                    }
                }
            }
            // reassembling a block view reproduces the matrix exactly
            let sigma: Vec<usize> = (0..n).rev().collect();
            let view = rep.block_view(&sigma);
            let full = rep.matrix(&sigma);
            let mut rebuilt = Mat::<f64>::zeros(rep.dim(), rep.dim());
            for (bi, (_, r)) in view.ranges.iter().enumerate() {
                for (bj, (_, c)) in view.ranges.iter().enumerate() {
                    let blk = view.block(bi, bj);
                    for (ii, i) in r.clone().enumerate() {
                        for (jj, j) in c.clone().enumerate() {
                            rebuilt[(i, j)] = blk[(ii, jj)];
                        }
                    }
                }
            }
            assert_eq!(max_abs_diff(&rebuilt, &full), 0.0);
        }
    }

    #[test]
    fn sum_rule_reports() {
        // hand value: μ=(2,1), block α=(2): scalar −1
        let rep = young_orthogonal_rep(&p(&[2, 1])).unwrap();
        let s = &rep.transposition_matrix(1, 3) + &rep.transposition_matrix(2, 3);
        let ranges = rep.block_ranges();
        assert_eq!(ranges[0].0, p(&[2]));
        let i = ranges[0].1.start;
        assert!((s[(i, i)] + 1.0).abs() < 1e-12);
        for n in 2..=6u32 {
            for mu in enumerate_partitions(n, n) {
                let r = verify_prir_sum_rule(&mu).unwrap();
                assert!(r.pass, "μ={mu} dev={}", r.max_dev);
            }
        }
    }

    #[test]
    fn orthogonality_reports() {
        for n in 2..=5u32 {
            for mu in enumerate_partitions(n, n) {
                let r = verify_prir_orthogonality(&mu).unwrap();
                assert!(r.pass, "μ={mu} dev={}", r.max_dev);
            }
        }
        // hand value: μ=(2,1), α=γ=(2), β=(1,1): n·d_β/d_μ = 3/2 appears as
        // the diagonal of the β=(1,1) partial sum restricted to block (2)
        let rep = young_orthogonal_rep(&p(&[2, 1])).unwrap();
        let ranges = rep.block_ranges();
        assert_eq!(ranges[1].0, p(&[1, 1]));
        let bsel = ranges[1].1.clone();
        let dim = rep.dim();
        let mut m = Mat::<f64>::zeros(dim, dim);
        let mut images: Vec<Mat<f64>> =
            (1..3).map(|a| rep.transposition_matrix(a, 3)).collect();
        images.push(mat_id(dim));
        for img in &images {
            let sel = Mat::from_fn(dim, dim, |i, j| {
                if i == j && bsel.contains(&i) {
                    1.0
                } else {
                    0.0
                }
            });
            m = &m + &(&(img * &sel) * img);
        }
        let a0 = ranges[0].1.start;
        assert!((m[(a0, a0)] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn trace_class_reports() {
        for n in 2..=6u32 {
            for mu in enumerate_partitions(n, n) {
                let r = verify_trace_class_invariance(&mu).unwrap();
                assert!(r.pass, "μ={mu} dev={}", r.max_dev);
            }
        }
        // hand value: μ=(2,1), α=(2), n=3 → −1/2
        let rep = young_orthogonal_rep(&p(&[2, 1])).unwrap();
        let img = rep.transposition_matrix(1, 3);
        let range = &rep.block_ranges()[0].1;
        let tr: f64 = range.clone().map(|i| img[(i, i)]).sum();
        assert!((tr + 0.5).abs() < 1e-12);
    }

    #[test]
    fn operator_e_properties() {
        // S(2) on (C²)^⊗2: E^{(2)}_{11} is the symmetrizer, rank 3
        let e = operator_e(&p(&[2]), 1, 1, 2).unwrap();
        let sym = young_projector(&p(&[2]), 2, 2, 2).unwrap();
        assert!(e.max_abs_diff(&sym) < 1e-12);
        // composition rule, idempotence, completeness, HS orthogonality
        let k = 3u32;
        let d = 2u32;
        let shapes = enumerate_partitions(k, k);
        let mut family: Vec<(usize, usize, usize, DenseOperator)> = Vec::new();
        for (si, shape) in shapes.iter().enumerate() {
            let da = dim_sn(shape).to_usize().unwrap();
            for i in 1..=da {
                for j in 1..=da {
                    family.push((si, i, j, operator_e(shape, i, j, d).unwrap()));
                }
            }
        }
        let mut total = DenseOperator::zeros(k, d).unwrap();
        for (si, i, j, e) in &family {
            if i == j {
                total = total.add(e);
            }
            for (ti, g_i, l, f) in &family {
                let prod = e.mul(f);
                let expect = if si == ti && j == g_i {
                    Some((*i, *l))
                } else {
                    None
                };
                match expect {
                    Some((ei, el)) => {
                        let target = family
                            .iter()
                            .find(|(xi, a, b, _)| xi == si && *a == ei && *b == el)
                            .unwrap();
                        assert!(prod.max_abs_diff(&target.3) < 1e-10);
                    }
                    None => assert!(prod.max_abs() < 1e-10),
                }
                // tr[(E_ij)† E_kl] = m_α δ δ δ; real operators: † = transpose
                let et = DenseOperator {
                    n: e.n,
                    d: e.d,
                    mat: e.mat.transpose().to_owned(),
                };
                let hs = et.trace_product(f);
                let want = if si == ti && i == g_i && j == l {
                    mult_natural(&shapes[*si], d).to_f64().unwrap()
                } else {
                    0.0
                };
                assert!((hs - want).abs() < 1e-10);
            }
        }
        assert!(total.max_abs_diff(&DenseOperator::identity(k, d).unwrap()) < 1e-10);
    }

    #[test]
    fn operator_f_reconstruction() {
        // μ=(2), n=3, d=2: F_11 = identity on one system; reconstruction of
        // P_μ gives the (anti)symmetrizer
        let f = operator_f_mu_ij(&p(&[2]), 1, 1, 3, 2).unwrap();
        assert!(f.max_abs_diff(&DenseOperator::identity(1, 2).unwrap()) < 1e-12);
        for (mu, _) in [(p(&[2]), "sym"), (p(&[1, 1]), "anti")] {
            let rebuilt = reconstruct_p_mu(&mu, 3, 2);
            let direct = young_projector(&mu, 2, 2, 2).unwrap();
            assert!(rebuilt.max_abs_diff(&direct) < 1e-10, "μ={mu}");
        }
        for mu in enumerate_partitions(3, 2) {
            let rebuilt = reconstruct_p_mu(&mu, 4, 2);
            let direct = young_projector(&mu, 3, 3, 2).unwrap();
            assert!(rebuilt.max_abs_diff(&direct) < 1e-10, "μ={mu}");
        }
    }

    fn reconstruct_p_mu(mu: &Partition, n: u32, d: u32) -> DenseOperator {
        // P_μ = (d_μ/(n−1)!)·Σ_{a,i,j} φ^μ_{ij}(a,n−1)·V(a,n−1)·F_ij^μ
        let rep = young_orthogonal_rep(mu).unwrap();
        let dm = rep.dim();
        let m = n as usize - 1;
        let mut fact = 1.0;
        for v in 2..=m as u64 {
            fact *= v as f64;
        }
        let mut out = DenseOperator::zeros(n - 1, d).unwrap();
        for a in 1..=m {
            let img = rep.transposition_matrix(a, m);
            let v = perm_operator(&crate::oracle::transposition(a - 1, m - 1, m), d).unwrap();
            for i in 1..=dm {
                for j in 1..=dm {
                    let coeff = img[(i - 1, j - 1)];
                    if coeff.abs() < 1e-15 {
                        continue;
                    }
                    let f = kron(
                        &operator_f_mu_ij(mu, i, j, n, d).unwrap(),
                        &DenseOperator::identity(1, d).unwrap(),
                    );
                    out = out.add(&v.mul(&f).scaled(coeff));
                }
            }
        }
        out.scaled(dm as f64 / fact)
    }

    #[test]
    fn operator_f_block_form() {
        // F_ij^μ = ⊕_β ((n−2)!/d_β)·E^β at n=4, d=2, using the PRIR index
        // layout of the restriction μ ↓ S(n−2)
        let n = 4u32;
        let d = 2u32;
        for mu in enumerate_partitions(3, d) {
            let rep = young_orthogonal_rep(&mu).unwrap();
            let ranges = rep.block_ranges();
            let fact = 2.0; // (n−2)!
            for (bi, (beta, brange)) in ranges.iter().enumerate() {
                for (bj, (_, crange)) in ranges.iter().enumerate() {
                    for (il, i) in brange.clone().enumerate() {
                        for (jl, j) in crange.clone().enumerate() {
                            let f = operator_f_mu_ij(&mu, i + 1, j + 1, n, d).unwrap();
                            if bi == bj {
                                let e = operator_e(beta, il + 1, jl + 1, d).unwrap();
                                let scale = fact / dim_sn(beta).to_f64().unwrap();
                                assert!(
                                    f.max_abs_diff(&e.scaled(scale)) < 1e-10,
                                    "μ={mu} β={beta}"
                                );
                            } else {
                                assert!(f.max_abs() < 1e-10, "μ={mu} cross-block");
                            }
                        }
                    }
                }
            }
        }
        // trace identity tr[E_ij^β P_α] = δ_ij·m_α on (C²)^⊗2
        for beta in enumerate_partitions(2, 2) {
            let rep_dim = dim_sn(&beta).to_usize().unwrap();
            for alpha in enumerate_partitions(2, 2) {
                let p_a = young_projector(&alpha, 2, 2, 2).unwrap();
                for i in 1..=rep_dim {
                    for j in 1..=rep_dim {
                        let e = operator_e(&beta, i, j, 2).unwrap();
                        let want = if beta == alpha && i == j {
                            mult_natural(&alpha, 2).to_f64().unwrap()
                        } else {
                            0.0
                        };
                        assert!((e.trace_product(&p_a) - want).abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn guards() {
        assert!(matches!(
            young_orthogonal_rep(&p(&[5, 4])),
            Err(PbtError::EnumerationGuard { .. })
        ));
        assert!(matches!(
            verify_prir_orthogonality(&p(&[4, 4])),
            Err(PbtError::EnumerationGuard { .. })
        ));
        assert!(matches!(
            operator_e(&p(&[2]), 3, 1, 2),
            Err(PbtError::InvalidArgument(_))
        ));
    }
}
