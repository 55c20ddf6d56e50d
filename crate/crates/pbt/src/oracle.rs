//! Brute-force dense-operator oracle: builds every operator explicitly on
//! (C^d)^⊗n at small scale and independently verifies the closed-form
//! spectrum, fidelity, partial-trace identities, and SDP certificates.
//!
//! Everything here is real: permutations, partial transposes, P⁺, and all
//! projectors have real entries in the computational product basis.

use std::collections::BTreeMap;

use faer::{Mat, Side};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{PbtError, Result};
use crate::formulas;
use crate::partitions::{
    all_permutations, branch_add, dim_sn, enumerate_partitions, mult_natural, CharacterTable,
    Partition,
};

/// Hard cap on the dense dimension d^n.
pub const MAX_DENSE_DIM: u128 = 16384;
/// Hard cap on k! enumeration for Young projectors.
pub const MAX_PROJECTOR_BOXES: u32 = 9;

/// Real square matrix on (C^d)^⊗n, computational product basis, system 1
/// is the most significant digit.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    pub n: u32,
    pub d: u32,
    pub mat: Mat<f64>,
}

impl DenseOperator {
    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn zeros(n: u32, d: u32) -> Result<Self> {
        let dim = dim_checked(n, d)?;
        Ok(Self {
            n,
            d,
            mat: Mat::zeros(dim, dim),
        })
    }

    pub fn identity(n: u32, d: u32) -> Result<Self> {
        let dim = dim_checked(n, d)?;
        Ok(Self {
            n,
            d,
            mat: Mat::from_fn(dim, dim, |i, j| if i == j { 1.0 } else { 0.0 }),
        })
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.mat[(i, i)]).sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            n: self.n,
            d: self.d,
            mat: Mat::from_fn(self.dim(), self.dim(), |i, j| self.mat[(i, j)] * s),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim());
        Self {
            n: self.n,
            d: self.d,
            mat: &self.mat + &other.mat,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim());
        Self {
            n: self.n,
            d: self.d,
            mat: &self.mat - &other.mat,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim());
        Self {
            n: self.n,
            d: self.d,
            mat: &self.mat * &other.mat,
        }
    }

    pub fn max_abs(&self) -> f64 {
        let mut m: f64 = 0.0;
        for j in 0..self.mat.ncols() {
            for i in 0..self.mat.nrows() {
                m = m.max(self.mat[(i, j)].abs());
            }
        }
        m
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.sub(other).max_abs()
    }

    /// tr[self · other] without forming the product.
    pub fn trace_product(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim());
        let mut t = 0.0;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                t += self.mat[(i, j)] * other.mat[(j, i)];
            }
        }
        t
    }

    /// Eigenvalues of a symmetric operator, descending, with eigenvectors.
    pub fn eig_sym(&self) -> (Vec<f64>, Mat<f64>) {
        let evd = self.mat.self_adjoint_eigen(Side::Lower).expect("eigen failed");
        let s = evd.S();
        let sv = s.column_vector();
        let u = evd.U();
        let dim = self.dim();
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| sv[b].partial_cmp(&sv[a]).unwrap());
        let vals: Vec<f64> = order.iter().map(|&i| sv[i]).collect();
        let vecs = Mat::from_fn(dim, dim, |i, j| u[(i, order[j])]);
        (vals, vecs)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        *self
            .eig_sym()
            .0
            .last()
            .expect("nonempty spectrum")
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eig_sym().0[0]
    }
}

/// Checked dense dimension d^n.
pub fn dim_checked(n: u32, d: u32) -> Result<usize> {
    let dim = (d as u128).checked_pow(n).unwrap_or(u128::MAX);
    if dim > MAX_DENSE_DIM {
        return Err(PbtError::DimensionGuard {
            dim,
            max: MAX_DENSE_DIM,
        });
    }
    Ok(dim as usize)
}

/// Pass/fail record for one oracle check.
#[derive(Debug, Clone)]
pub struct OracleReport {
    pub name: String,
    pub tol: f64,
    pub max_dev: f64,
    pub pass: bool,
    pub details: Vec<(String, f64)>,
}

impl OracleReport {
    pub(crate) fn new(name: &str, tol: f64) -> Self {
        Self {
            name: name.to_string(),
            tol,
            max_dev: 0.0,
            pass: true,
            details: Vec::new(),
        }
    }

    pub(crate) fn add(&mut self, label: String, dev: f64) {
        self.max_dev = self.max_dev.max(dev);
        self.details.push((label, dev));
    }

    pub(crate) fn finish(mut self) -> Self {
        self.pass = self.max_dev <= self.tol;
        self
    }
}

fn digits(mut idx: usize, n: usize, d: usize) -> Vec<usize> {
    let mut x = vec![0usize; n];
    for k in (0..n).rev() {
        x[k] = idx % d;
        idx /= d;
    }
    x
}

/// Basis-index image map of V(σ): column c ↦ row map[c].
fn basis_map(sigma: &[usize], d: u32) -> Vec<usize> {
    let n = sigma.len();
    let d = d as usize;
    let dim = d.pow(n as u32);
    let mut map = vec![0usize; dim];
    for c in 0..dim {
        let x = digits(c, n, d);
        let mut y = vec![0usize; n];
        for k in 0..n {
            y[sigma[k]] = x[k];
        }
        let mut r = 0usize;
        for k in 0..n {
            r = r * d + y[k];
        }
        map[c] = r;
    }
    map
}

/// One-line 0-based transposition (a b) on n letters.
pub fn transposition(a: usize, b: usize, n: usize) -> Vec<usize> {
    let mut s: Vec<usize> = (0..n).collect();
    s.swap(a, b);
    s
}

/// Permutation operator V(σ); σ in one-line 0-based notation, σ[k] is the
/// destination of system k.
pub fn perm_operator(sigma: &[usize], d: u32) -> Result<DenseOperator> {
    let n = sigma.len() as u32;
    let mut op = DenseOperator::zeros(n, d)?;
    for (c, &r) in basis_map(sigma, d).iter().enumerate() {
        op.mat[(r, c)] = 1.0;
    }
    Ok(op)
}

/// V(σ)·op·V(σ)⁻¹ without matrix multiplication.
pub fn conjugate_by_perm(op: &DenseOperator, sigma: &[usize]) -> DenseOperator {
    let map = basis_map(sigma, op.d);
    let dim = op.dim();
    let mut out = Mat::zeros(dim, dim);
    for c in 0..dim {
        for r in 0..dim {
            out[(map[r], map[c])] = op.mat[(r, c)];
        }
    }
    DenseOperator {
        n: op.n,
        d: op.d,
        mat: out,
    }
}

/// Partial transpose on the last subsystem.
pub fn partial_transpose_last(op: &DenseOperator) -> DenseOperator {
    let d = op.d as usize;
    let dim = op.dim();
    let blocks = dim / d;
    let mut out = Mat::zeros(dim, dim);
    for r0 in 0..blocks {
        for rl in 0..d {
            for c0 in 0..blocks {
                for cl in 0..d {
                    out[(r0 * d + cl, c0 * d + rl)] = op.mat[(r0 * d + rl, c0 * d + cl)];
                }
            }
        }
    }
    DenseOperator {
        n: op.n,
        d: op.d,
        mat: out,
    }
}

/// Partial trace over the 0-based subsystems in `traced` (sorted, distinct).
pub fn partial_trace(op: &DenseOperator, traced: &[usize]) -> DenseOperator {
    let n = op.n as usize;
    let d = op.d as usize;
    let keep: Vec<usize> = (0..n).filter(|k| !traced.contains(k)).collect();
    let nk = keep.len();
    let nt = traced.len();
    let kd = d.pow(nk as u32);
    let td = d.pow(nt as u32);
    // weight of each system position in the full index
    let weight: Vec<usize> = (0..n).map(|k| d.pow((n - 1 - k) as u32)).collect();
    let spread = |systems: &[usize], idx: usize| -> usize {
        let x = digits(idx, systems.len(), d);
        systems
            .iter()
            .zip(&x)
            .map(|(&s, &v)| weight[s] * v)
            .sum()
    };
    let keep_spread: Vec<usize> = (0..kd).map(|i| spread(&keep, i)).collect();
    let tr_spread: Vec<usize> = (0..td).map(|i| spread(traced, i)).collect();
    let mut out = Mat::zeros(kd, kd);
    for r in 0..kd {
        for c in 0..kd {
            let mut v = 0.0;
            for m in 0..td {
                v += op.mat[(keep_spread[r] + tr_spread[m], keep_spread[c] + tr_spread[m])];
            }
            out[(r, c)] = v;
        }
    }
    DenseOperator {
        n: nk as u32,
        d: op.d,
        mat: out,
    }
}

/// Unnormalized maximally entangled projector P⁺ = Σ_{ik} |ii⟩⟨kk| on two
/// systems.
pub fn p_plus(d: u32) -> DenseOperator {
    let du = d as usize;
    let mut op = DenseOperator::zeros(2, d).expect("d² within guard");
    for i in 0..du {
        for k in 0..du {
            op.mat[(i * du + i, k * du + k)] = 1.0;
        }
    }
    op
}

/// Kronecker product; `a` occupies the leading (most significant) systems.
pub fn kron(a: &DenseOperator, b: &DenseOperator) -> DenseOperator {
    assert_eq!(a.d, b.d);
    let (da, db) = (a.dim(), b.dim());
    let mat = Mat::from_fn(da * db, da * db, |r, c| {
        a.mat[(r / db, c / db)] * b.mat[(r % db, c % db)]
    });
    DenseOperator {
        n: a.n + b.n,
        d: a.d,
        mat,
    }
}

/// η = Σ_{a=1}^{n−1} V^{t_n}(a, n) on (C^d)^⊗n.
pub fn eta_operator(n: u32, d: u32) -> Result<DenseOperator> {
    if n < 2 {
        return Err(PbtError::InvalidArgument(format!("eta needs n ≥ 2, got {n}")));
    }
    let mut eta = DenseOperator::zeros(n, d)?;
    for a in 0..(n as usize - 1) {
        let v = perm_operator(&transposition(a, n as usize - 1, n as usize), d)?;
        eta = eta.add(&partial_transpose_last(&v));
    }
    Ok(eta)
}

/// Young projector P_λ for λ ⊢ k on the first k of n systems (identity on
/// the rest): P_λ = (d_λ/k!) Σ_{σ∈S(k)} χ^λ(σ) V(σ).
pub fn young_projector(lambda: &Partition, k: u32, n: u32, d: u32) -> Result<DenseOperator> {
    if lambda.n() != k || k > n {
        return Err(PbtError::InvalidArgument(format!(
            "projector shape {lambda} does not fit k={k}, n={n}"
        )));
    }
    if k > MAX_PROJECTOR_BOXES {
        return Err(PbtError::EnumerationGuard {
            n: k,
            max: MAX_PROJECTOR_BOXES,
        });
    }
    dim_checked(n, d)?;
    if k <= 1 {
        return DenseOperator::identity(n, d);
    }
    let mut table = CharacterTable::new();
    let dim_l = dim_sn(lambda).to_f64().expect("small dim");
    let mut fact = 1.0;
    for i in 2..=k as u64 {
        fact *= i as f64;
    }
    let scale = dim_l / fact;
    let mut head = DenseOperator::zeros(k, d)?;
    let mut chi_cache: std::collections::HashMap<Vec<u32>, f64> = std::collections::HashMap::new();
    for sigma in all_permutations(k as usize) {
        let class = crate::partitions::cycle_type(&sigma);
        let chi = *chi_cache.entry(class.parts().to_vec()).or_insert_with(|| {
            table
                .character(lambda, &class)
                .to_f64()
                .expect("small character")
        });
        if chi == 0.0 {
            continue;
        }
        for (c, &r) in basis_map(&sigma, d).iter().enumerate() {
            head.mat[(r, c)] += chi;
        }
    }
    head = head.scaled(scale);
    if k == n {
        Ok(head)
    } else {
        Ok(kron(&head, &DenseOperator::identity(n - k, d)?))
    }
}

fn gamma_value(alpha: &Partition, mu: &Partition, n: u32, d: u32) -> f64 {
    let num = (n as u64 - 1) as f64
        * mult_natural(mu, d).to_f64().unwrap()
        * dim_sn(alpha).to_f64().unwrap();
    let den = mult_natural(alpha, d).to_f64().unwrap() * dim_sn(mu).to_f64().unwrap();
    num / den
}

/// η(α) = Σ_{a=1}^{n−1} V(a,n−1)·(P_α ⊗ P⁺)·V(a,n−1) with P_α on the first
/// n−2 systems.
fn eta_alpha(alpha: &Partition, n: u32, d: u32) -> Result<DenseOperator> {
    let p_alpha = young_projector(alpha, n - 2, n - 2, d)?;
    let base = kron(&p_alpha, &p_plus(d));
    let mut eta = base.clone();
    for a in 0..(n as usize - 2) {
        eta = eta.add(&conjugate_by_perm(
            &base,
            &transposition(a, n as usize - 2, n as usize),
        ));
    }
    Ok(eta)
}

/// Eigenprojector F_μ(α) = γ_μ(α)⁻¹ · P_μ η(α) P_μ.
pub fn f_projector(alpha: &Partition, mu: &Partition, n: u32, d: u32) -> Result<DenseOperator> {
    if alpha.n() != n - 2 || mu.n() != n - 1 || !branch_add(alpha, d).contains(mu) {
        return Err(PbtError::InvalidArgument(format!(
            "invalid branch pair α={alpha}, μ={mu} at n={n}"
        )));
    }
    let p_mu = young_projector(mu, n - 1, n, d)?;
    let ea = eta_alpha(alpha, n, d)?;
    let gamma = gamma_value(alpha, mu, n, d);
    Ok(p_mu.mul(&ea).mul(&p_mu).scaled(1.0 / gamma))
}

fn branch_pairs(n: u32, d: u32) -> Vec<(Partition, Partition)> {
    let mut pairs = Vec::new();
    for alpha in enumerate_partitions(n - 2, d) {
        for mu in branch_add(&alpha, d) {
            pairs.push((alpha.clone(), mu));
        }
    }
    pairs
}

/// Spectrum cross-check: eigenvalues of the dense η must match the
/// closed-form multiset {γ_μ(α), degeneracy d_μ·m_α}.
pub fn verify_spectrum(n: u32, d: u32) -> Result<OracleReport> {
    let eta = eta_operator(n, d)?;
    let (evals, _) = eta.eig_sym();
    let lambda_max = evals[0].max(0.0);
    let nonzero: Vec<f64> = evals
        .iter()
        .copied()
        .filter(|v| v.abs() > 1e-10 * lambda_max)
        .collect();
    // aggregate closed-form degeneracies over γ collisions
    let table = formulas::spectrum(n - 1, d);
    let mut expected: BTreeMap<BigRational, BigUint> = BTreeMap::new();
    for e in &table.entries {
        *expected
            .entry(e.gamma.clone())
            .or_insert_with(|| BigUint::from(0u32)) += &e.degeneracy;
    }
    let mut report = OracleReport::new("spectrum", 1e-8);
    let total: usize = expected
        .values()
        .map(|m| m.to_usize().expect("small degeneracy"))
        .sum();
    if total != nonzero.len() {
        report.add(
            format!("nonzero count {} vs expected {}", nonzero.len(), total),
            f64::INFINITY,
        );
        return Ok(report.finish());
    }
    let mut idx = 0usize;
    for (gamma, mult) in expected.iter().rev() {
        let g = gamma.to_f64().expect("small gamma");
        let m = mult.to_usize().unwrap();
        let mut dev: f64 = 0.0;
        for _ in 0..m {
            dev = dev.max((nonzero[idx] - g).abs() / g);
            idx += 1;
        }
        report.add(format!("gamma {} x{}", g, m), dev);
    }
    // PSD of η itself
    let min_eig = *evals.last().unwrap();
    report.add(
        "eta PSD".to_string(),
        (-min_eig).max(0.0) / lambda_max.max(1.0),
    );
    Ok(report.finish())
}

/// Bridged restriction of σ ∈ S(n) to S(n−1): the expected closed form of
/// tr_n V^{t_n}(σ).
fn trace_out_last(sigma: &[usize]) -> (f64, Vec<usize>) {
    let n = sigma.len();
    if sigma[n - 1] == n - 1 {
        return (1.0, sigma[..n - 1].to_vec());
    }
    let mut tau = sigma[..n - 1].to_vec();
    let j = tau.iter().position(|&v| v == n - 1).unwrap();
    tau[j] = sigma[n - 1];
    (0.0, tau) // the d-factor applies only in the fixed case
}

/// All partial-trace and algebra facts at one (n, d), default sampling seed.
pub fn verify_partial_trace_facts(n: u32, d: u32) -> Result<OracleReport> {
    verify_partial_trace_facts_seeded(n, d, 20240817)
}

/// Same, with an explicit seed for the trace-closure permutation sample.
pub fn verify_partial_trace_facts_seeded(n: u32, d: u32, seed: u64) -> Result<OracleReport> {
    dim_checked(n, d)?;
    let mut report = OracleReport::new("partial_trace_facts", 1e-10);
    let nm = n as usize;
    let vt = kron(
        &DenseOperator::identity(n - 2, d)?,
        &p_plus(d),
    ); // V^{t_n}(n−1,n)
    let pairs = branch_pairs(n, d);
    let mut f_ops: Vec<DenseOperator> = Vec::new();
    for (alpha, mu) in &pairs {
        f_ops.push(f_projector(alpha, mu, n, d)?);
    }
    // Fact: tr_{n−1,n}[V^{t_n}(n−1,n)·F_μ(α)] = (m_μ/m_α)·P_α
    for ((alpha, mu), f) in pairs.iter().zip(&f_ops) {
        let lhs = partial_trace(&vt.mul(f), &[nm - 2, nm - 1]);
        let ratio = mult_natural(mu, d).to_f64().unwrap() / mult_natural(alpha, d).to_f64().unwrap();
        let rhs = young_projector(alpha, n - 2, n - 2, d)?.scaled(ratio);
        report.add(format!("tr[Vt F] α={alpha} μ={mu}"), lhs.max_abs_diff(&rhs));
    }
    // Identity: tr_n F_μ(α) = (m_α/m_μ)·P_μ
    for ((alpha, mu), f) in pairs.iter().zip(&f_ops) {
        let lhs = partial_trace(f, &[nm - 1]);
        let ratio = mult_natural(alpha, d).to_f64().unwrap() / mult_natural(mu, d).to_f64().unwrap();
        let rhs = young_projector(mu, n - 1, n - 1, d)?.scaled(ratio);
        report.add(format!("tr_n F α={alpha} μ={mu}"), lhs.max_abs_diff(&rhs));
    }
    // M_α V^{t_n}(n−1,n) = P_α V^{t_n}(n−1,n)
    for alpha in enumerate_partitions(n - 2, d) {
        let mut m_op = DenseOperator::zeros(n, d)?;
        for ((a, _), f) in pairs.iter().zip(&f_ops) {
            if a == &alpha {
                m_op = m_op.add(f);
            }
        }
        let p_alpha = young_projector(&alpha, n - 2, n, d)?;
        report.add(
            format!("M Vt = P Vt α={alpha}"),
            m_op.mul(&vt).max_abs_diff(&p_alpha.mul(&vt)),
        );
    }
    // Σ_k V(k,n−1) P_μ V(k,n−1) = (n−1)·P_μ on n−1 systems
    for mu in enumerate_partitions(n - 1, d) {
        let p_mu = young_projector(&mu, n - 1, n - 1, d)?;
        let mut sum = DenseOperator::zeros(n - 1, d)?;
        for k in 0..(nm - 1) {
            sum = sum.add(&conjugate_by_perm(&p_mu, &transposition(k, nm - 2, nm - 1)));
        }
        report.add(
            format!("center sum μ={mu}"),
            sum.max_abs_diff(&p_mu.scaled((n - 1) as f64)),
        );
    }
    // maximally entangled sandwich, both cases
    for k in 0..(nm - 1) {
        let v = perm_operator(&transposition(k, nm - 2, nm), d)?;
        let lhs = vt.mul(&v).mul(&vt);
        let rhs = if k == nm - 2 {
            vt.scaled(d as f64)
        } else {
            vt.clone()
        };
        report.add(format!("sandwich k={}", k + 1), lhs.max_abs_diff(&rhs));
    }
    // trace closure: tr_n V^{t_n}(σ) ∈ C[S(n−1)], exhaustively for small n,
    // seeded sample otherwise
    let sigmas = {
        let mut all = all_permutations(nm);
        if all.len() > 720 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            all.shuffle(&mut rng);
            all.truncate(200);
        }
        all
    };
    let mut closure_dev: f64 = 0.0;
    for sigma in &sigmas {
        let lhs = partial_trace(
            &partial_transpose_last(&perm_operator(sigma, d)?),
            &[nm - 1],
        );
        let (_, tau) = trace_out_last(sigma);
        let factor = if sigma[nm - 1] == nm - 1 { d as f64 } else { 1.0 };
        let rhs = perm_operator(&tau, d)?.scaled(factor);
        closure_dev = closure_dev.max(lhs.max_abs_diff(&rhs));
    }
    report.add(format!("trace closure ({} σ)", sigmas.len()), closure_dev);
    // reconstruction Σ γ F = η and projector family properties
    let eta = eta_operator(n, d)?;
    let mut rebuilt = DenseOperator::zeros(n, d)?;
    for ((alpha, mu), f) in pairs.iter().zip(&f_ops) {
        rebuilt = rebuilt.add(&f.scaled(gamma_value(alpha, mu, n, d)));
    }
    report.add("Σ γ F = η".to_string(), rebuilt.max_abs_diff(&eta));
    for (i, ((alpha, mu), f)) in pairs.iter().zip(&f_ops).enumerate() {
        report.add(
            format!("F idempotent α={alpha} μ={mu}"),
            f.mul(f).max_abs_diff(f),
        );
        let expect_tr = dim_sn(mu).to_f64().unwrap() * mult_natural(alpha, d).to_f64().unwrap();
        report.add(
            format!("tr F = d_μ m_α α={alpha} μ={mu}"),
            (f.trace() - expect_tr).abs() / expect_tr,
        );
        for (g_pair, g) in pairs.iter().zip(&f_ops).skip(i + 1) {
            report.add(
                format!("F orth ({alpha},{mu})·({},{})", g_pair.0, g_pair.1),
                f.mul(g).max_abs(),
            );
        }
    }
    Ok(report.finish())
}

fn pseudo_fn_sym(op: &DenseOperator, f: impl Fn(f64) -> f64, cutoff_rel: f64) -> DenseOperator {
    let (evals, u) = op.eig_sym();
    let lambda_max = evals[0].max(0.0);
    let dim = op.dim();
    let b = Mat::from_fn(dim, dim, |i, j| {
        let lam = evals[j];
        if lam > cutoff_rel * lambda_max {
            u[(i, j)] * f(lam)
        } else {
            0.0
        }
    });
    DenseOperator {
        n: op.n,
        d: op.d,
        mat: &b * u.transpose(),
    }
}

fn fidelity_direct_with_cutoff(n: u32, d: u32, cutoff: f64) -> Result<f64> {
    let ports = n - 1;
    let eta = eta_operator(n, d)?;
    let inv_sqrt = pseudo_fn_sym(&eta, |l| 1.0 / l.sqrt(), cutoff);
    let vt = kron(&DenseOperator::identity(n - 2, d)?, &p_plus(d));
    let m = vt.mul(&inv_sqrt);
    let f = ports as f64 / (d as f64).powi(ports as i32 + 2) * m.trace_product(&m);
    Ok(f)
}

/// F = (N/d^{N+2})·tr[V^{t_n}(n−1,n) η^{−1/2} V^{t_n}(n−1,n) η^{−1/2}] with
/// pseudo-inverse square root (relative cutoff 1e−10).
pub fn fidelity_direct(n: u32, d: u32) -> Result<f64> {
    fidelity_direct_with_cutoff(n, d, 1e-10)
}

/// ζ cross-check: tr[V^t F_μ(α) V^t F_μ'(α')] against the closed form
/// δ_{αα'}·d_μ d_μ'·m_α·γ_μ(α)γ_μ'(α)/((n−1)²·d_α).
pub fn verify_zeta(n: u32, d: u32) -> Result<OracleReport> {
    dim_checked(n, d)?;
    let mut report = OracleReport::new("zeta", 1e-8);
    let vt = kron(&DenseOperator::identity(n - 2, d)?, &p_plus(d));
    let pairs = branch_pairs(n, d);
    let t_ops: Vec<DenseOperator> = pairs
        .iter()
        .map(|(alpha, mu)| Ok(vt.mul(&f_projector(alpha, mu, n, d)?)))
        .collect::<Result<_>>()?;
    let mut fid_sum = 0.0;
    for (i, (alpha, mu)) in pairs.iter().enumerate() {
        for (j, (alpha2, mu2)) in pairs.iter().enumerate() {
            let zeta = t_ops[i].trace_product(&t_ops[j]);
            let ga = gamma_value(alpha, mu, n, d);
            let gb = gamma_value(alpha2, mu2, n, d);
            fid_sum += zeta / (ga.sqrt() * gb.sqrt());
            if alpha == alpha2 {
                let expect = dim_sn(mu).to_f64().unwrap()
                    * dim_sn(mu2).to_f64().unwrap()
                    * mult_natural(alpha, d).to_f64().unwrap()
                    * ga
                    * gb
                    / (((n - 1) * (n - 1)) as f64 * dim_sn(alpha).to_f64().unwrap());
                report.add(
                    format!("ζ α={alpha} μ={mu} μ'={mu2}"),
                    (zeta - expect).abs() / expect,
                );
            } else {
                report.add(format!("ζ cross α={alpha} α'={alpha2}"), zeta.abs());
            }
        }
    }
    // reassembled fidelity must match the direct oracle value
    let ports = n - 1;
    let f_from_zeta = ports as f64 / (d as f64).powi(ports as i32 + 2) * fid_sum;
    let f_direct = fidelity_direct(n, d)?;
    report.add(
        "fidelity from ζ".to_string(),
        (f_from_zeta - f_direct).abs(),
    );
    Ok(report.finish())
}

/// End-to-end square-root-measurement channel: returns the entanglement
/// fidelity after explicit POVM construction and propagation.
pub fn simulate_deterministic_channel(n: u32, d: u32) -> Result<f64> {
    dim_checked(n, d)?;
    let ports = n - 1;
    let nm = n as usize;
    let dn = (d as f64).powi(ports as i32);
    let eta = eta_operator(n, d)?;
    let inv_sqrt = pseudo_fn_sym(&eta, |l| 1.0 / l.sqrt(), 1e-10);
    let support = pseudo_fn_sym(&eta, |_| 1.0, 1e-10);
    let identity = DenseOperator::identity(n, d)?;
    let delta = identity.sub(&support).scaled(1.0 / ports as f64);
    let mut povms: Vec<DenseOperator> = Vec::new();
    let mut states: Vec<DenseOperator> = Vec::new();
    for a in 0..(nm - 1) {
        let vta = partial_transpose_last(&perm_operator(&transposition(a, nm - 1, nm), d)?);
        let varrho = vta.scaled(1.0 / dn);
        let pi = inv_sqrt.mul(&vta).mul(&inv_sqrt).add(&delta);
        povms.push(pi);
        states.push(varrho);
    }
    // completeness and positivity
    let mut total = DenseOperator::zeros(n, d)?;
    for pi in &povms {
        total = total.add(pi);
    }
    let completeness = total.max_abs_diff(&identity);
    if completeness > 1e-10 {
        return Err(PbtError::Verification(format!(
            "POVM completeness residual {completeness:.3e}"
        )));
    }
    for pi in &povms {
        let min_eig = pi.min_eigenvalue();
        if min_eig < -1e-10 {
            return Err(PbtError::Verification(format!(
                "POVM element not PSD: min eigenvalue {min_eig:.3e}"
            )));
        }
    }
    let mut f = 0.0;
    for (varrho, pi) in states.iter().zip(&povms) {
        f += varrho.trace_product(pi);
    }
    Ok(f / (d as f64 * d as f64))
}

/// Primal/dual feasibility certificates for the maximally-entangled-resource
/// SDP; both values must equal the closed-form success probability.
pub fn verify_sdp_epr(n: u32, d: u32) -> Result<OracleReport> {
    dim_checked(n, d)?;
    let mut report = OracleReport::new("sdp_epr", 1e-10);
    let nm = n as usize;
    let ports = n - 1;
    let sol = formulas::optimal_solution(ports, d, formulas::Variant::EprResource);
    let p_exact = formulas::prob_success_epr(ports, d).to_f64().unwrap();
    // primal: Θ = d·Σ_α min_μ (1/γ)·P_α on n−2 systems
    let mut theta = DenseOperator::zeros(n - 2, d)?;
    for (alpha, x) in &sol.povm_coeffs {
        let p_alpha = young_projector(alpha, n - 2, n - 2, d)?;
        theta = theta.add(&p_alpha.scaled(x.to_f64().unwrap()));
    }
    report.add(
        "Θ PSD".to_string(),
        (-theta.min_eigenvalue()).max(0.0),
    );
    let base = kron(&theta, &p_plus(d).scaled(1.0 / d as f64));
    let mut constraint = base.clone();
    for a in 0..(nm - 2) {
        constraint = constraint.add(&conjugate_by_perm(
            &base,
            &transposition(a, nm - 2, nm),
        ));
    }
    let max_eig = constraint.max_eigenvalue();
    report.add(
        "Σ P⁺⊗Θ ⪯ 1".to_string(),
        (max_eig - 1.0).max(0.0),
    );
    report.add(
        "primal constraint saturates".to_string(),
        (max_eig - 1.0).abs(),
    );
    let primal = ports as f64 * theta.trace() / (d as f64).powi(ports as i32 + 1);
    report.add("primal value".to_string(), (primal - p_exact).abs());
    // dual: Ω = Σ_α d·(m_α/m_{μ*})·F_{μ*}(α)
    let mut omega = DenseOperator::zeros(n, d)?;
    for ((alpha, mu_star), x) in &sol.dual_coeffs {
        let f = f_projector(alpha, mu_star, n, d)?;
        omega = omega.add(&f.scaled(x.to_f64().unwrap()));
    }
    report.add("Ω PSD".to_string(), (-omega.min_eigenvalue()).max(0.0));
    for a in 0..(nm - 1) {
        let p_plus_an = partial_transpose_last(&perm_operator(
            &transposition(a, nm - 1, nm),
            d,
        )?)
        .scaled(1.0 / d as f64);
        let reduced = partial_trace(&p_plus_an.mul(&omega), &[a, nm - 1]);
        report.add(
            format!("tr_{{a,n}}[P⁺Ω] ⪰ 1, a={}", a + 1),
            (1.0 - reduced.min_eigenvalue()).max(0.0),
        );
    }
    let dual = omega.trace() / (d as f64).powi(ports as i32 + 1);
    report.add("dual value".to_string(), (dual - p_exact).abs());
    Ok(report.finish())
}

/// Primal/dual certificates for the optimized-resource SDP.
pub fn verify_sdp_optimal(n: u32, d: u32) -> Result<OracleReport> {
    dim_checked(n, d)?;
    let mut report = OracleReport::new("sdp_optimal", 1e-10);
    let nm = n as usize;
    let ports = n - 1;
    let dn = (d as f64).powi(ports as i32);
    let sol = formulas::optimal_solution(ports, d, formulas::Variant::OptimizedResource);
    let p_exact = formulas::prob_success_optimal(ports, d).to_f64().unwrap();
    // X_A = Σ_μ c_μ P_μ on n−1 systems
    let mut x_a = DenseOperator::zeros(n - 1, d)?;
    for (mu, c) in &sol.state_coeffs {
        x_a = x_a.add(&young_projector(mu, n - 1, n - 1, d)?.scaled(c.to_f64().unwrap()));
    }
    report.add("tr X_A = d^N".to_string(), (x_a.trace() - dn).abs() / dn);
    // Θ_ā = Σ_α u(α)·P_α and the binding constraint
    let mut theta = DenseOperator::zeros(n - 2, d)?;
    for (alpha, u) in &sol.povm_coeffs {
        theta = theta.add(&young_projector(alpha, n - 2, n - 2, d)?.scaled(u.to_f64().unwrap()));
    }
    report.add("Θ PSD".to_string(), (-theta.min_eigenvalue()).max(0.0));
    let base = kron(&theta, &p_plus(d).scaled(1.0 / d as f64));
    let mut lhs = base.clone();
    for a in 0..(nm - 2) {
        lhs = lhs.add(&conjugate_by_perm(&base, &transposition(a, nm - 2, nm)));
    }
    let diff = kron(&x_a, &DenseOperator::identity(1, d)?).sub(&lhs);
    report.add(
        "Σ P⁺⊗Θ ⪯ X_A⊗1".to_string(),
        (-diff.min_eigenvalue()).max(0.0),
    );
    // equality on the support of η ("satisfied with the equality")
    let eta = eta_operator(n, d)?;
    let support = pseudo_fn_sym(&eta, |_| 1.0, 1e-10);
    report.add(
        "binding on supp η".to_string(),
        diff.mul(&support).max_abs(),
    );
    let primal = ports as f64 * theta.trace() / (d as f64).powi(ports as i32 + 1);
    report.add("primal value".to_string(), (primal - p_exact).abs());
    // dual: Ω = (d/(N+d²−1))·η, value d^N·b
    let scale = d as f64 / (ports as f64 + (d * d) as f64 - 1.0);
    let omega = eta.scaled(scale);
    for a in 0..(nm - 1) {
        let p_plus_an = partial_transpose_last(&perm_operator(
            &transposition(a, nm - 1, nm),
            d,
        )?)
        .scaled(1.0 / d as f64);
        let reduced = partial_trace(&p_plus_an.mul(&omega), &[a, nm - 1]);
        report.add(
            format!("tr_{{a,n}}[P⁺Ω] = 1, a={}", a + 1),
            reduced.max_abs_diff(&DenseOperator::identity(n - 2, d)?),
        );
    }
    // third constraint: b·1 − (1/d^{N+1})·tr_n Ω ⪰ 0 (saturated)
    let b = sol.dual_b.as_ref().unwrap().to_f64().unwrap();
    let slack = DenseOperator::identity(n - 1, d)?
        .scaled(b)
        .sub(&partial_trace(&omega, &[nm - 1]).scaled(1.0 / (d as f64).powi(ports as i32 + 1)));
    report.add(
        "b·1 − tr_n Ω/d^{N+1} ⪰ 0".to_string(),
        (-slack.min_eigenvalue()).max(0.0),
    );
    // tr_n Ω = (dN/(N+d²−1))·1
    let trn = partial_trace(&omega, &[nm - 1]);
    let expect = d as f64 * ports as f64 / (ports as f64 + (d * d) as f64 - 1.0);
    report.add(
        "tr_n Ω ∝ 1".to_string(),
        trn.max_abs_diff(&DenseOperator::identity(n - 1, d)?.scaled(expect)),
    );
    let b = sol.dual_b.as_ref().unwrap().to_f64().unwrap();
    report.add("dual value".to_string(), (dn * b - p_exact).abs());
    Ok(report.finish())
}

/// Cutoff-sensitivity guard for the pseudo-inverse square root.
pub fn fidelity_cutoff_sensitivity(n: u32, d: u32) -> Result<f64> {
    let a = fidelity_direct_with_cutoff(n, d, 1e-8)?;
    let b = fidelity_direct_with_cutoff(n, d, 1e-12)?;
    Ok((a - b).abs())
}

/// Direct matrix fidelity vs the closed form, plus cutoff sensitivity.
pub fn verify_fidelity(n: u32, d: u32) -> Result<OracleReport> {
    let mut report = OracleReport::new("fidelity", 1e-9);
    let direct = fidelity_direct(n, d)?;
    let closed = formulas::fidelity_deterministic(n - 1, d, 64).to_f64();
    report.add("direct vs closed form".to_string(), (direct - closed).abs());
    report.add(
        "cutoff sensitivity".to_string(),
        fidelity_cutoff_sensitivity(n, d)?,
    );
    Ok(report.finish())
}

/// Full channel simulation vs the closed form.
pub fn verify_channel(n: u32, d: u32) -> Result<OracleReport> {
    let mut report = OracleReport::new("channel", 1e-9);
    let simulated = simulate_deterministic_channel(n, d)?;
    let closed = formulas::fidelity_deterministic(n - 1, d, 64).to_f64();
    report.add(
        "simulation vs closed form".to_string(),
        (simulated - closed).abs(),
    );
    Ok(report.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partitions::cycle_count;

    fn p(parts: &[u32]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    #[test]
    fn perm_composition_and_trace() {
        let d = 2;
        let perms = all_permutations(4);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let s = perms.choose(&mut rng).unwrap();
            let t = perms.choose(&mut rng).unwrap();
            let st: Vec<usize> = (0..4).map(|k| s[t[k]]).collect();
            let prod = perm_operator(s, d).unwrap().mul(&perm_operator(t, d).unwrap());
            assert_eq!(prod.max_abs_diff(&perm_operator(&st, d).unwrap()), 0.0);
            let tr = perm_operator(s, d).unwrap().trace();
            assert_eq!(tr, (d as f64).powi(cycle_count(s) as i32));
        }
    }

    #[test]
    fn swap_trace_and_guard() {
        let swap = perm_operator(&transposition(0, 1, 2), 2).unwrap();
        assert_eq!(swap.trace(), 2.0);
        assert!(matches!(
            dim_checked(15, 2),
            Err(PbtError::DimensionGuard { .. })
        ));
    }

    #[test]
    fn partial_transpose_properties() {
        // (swap)^{t_2} = P⁺ with P⁺² = d·P⁺
        for d in 2..=3 {
            let swap = perm_operator(&transposition(0, 1, 2), d).unwrap();
            let pt = partial_transpose_last(&swap);
            assert!(pt.max_abs_diff(&p_plus(d)) == 0.0);
            assert!(pt.mul(&pt).max_abs_diff(&pt.scaled(d as f64)) < 1e-12);
            assert_eq!(partial_transpose_last(&pt).max_abs_diff(&swap), 0.0);
        }
        // trace preserved on a random symmetric operator
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let dim = 8;
        let m = Mat::from_fn(dim, dim, |_, _| {
            rand::Rng::gen_range(&mut rng, -1.0..1.0)
        });
        let op = DenseOperator {
            n: 3,
            d: 2,
            mat: &m + m.transpose(),
        };
        assert!((partial_transpose_last(&op).trace() - op.trace()).abs() < 1e-12);
    }

    #[test]
    fn partial_trace_small() {
        // tr_2 of swap on 2 qubits = identity
        let swap = perm_operator(&transposition(0, 1, 2), 2).unwrap();
        let t = partial_trace(&swap, &[1]);
        assert!(t.max_abs_diff(&DenseOperator::identity(1, 2).unwrap()) < 1e-12);
        // tracing everything gives the full trace
        let full = partial_trace(&swap, &[0, 1]);
        assert!((full.mat[(0, 0)] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn eta_basics() {
        // n=2: η = P⁺
        for d in 2..=3 {
            let eta = eta_operator(2, d).unwrap();
            assert_eq!(eta.max_abs_diff(&p_plus(d)), 0.0);
        }
        // n=3, d=2: nonzero spectrum {3,3,1,1}
        let eta = eta_operator(3, 2).unwrap();
        let (evals, _) = eta.eig_sym();
        let nz: Vec<f64> = evals.iter().copied().filter(|v| v.abs() > 1e-10).collect();
        assert_eq!(nz.len(), 4);
        assert!((nz[0] - 3.0).abs() < 1e-10 && (nz[1] - 3.0).abs() < 1e-10);
        assert!((nz[2] - 1.0).abs() < 1e-10 && (nz[3] - 1.0).abs() < 1e-10);
        // tr η = (n−1)·d^{n−1}
        let eta = eta_operator(4, 3).unwrap();
        assert!((eta.trace() - 3.0 * 27.0).abs() < 1e-9);
    }

    #[test]
    fn young_projectors_small() {
        let sym = young_projector(&p(&[2]), 2, 2, 2).unwrap();
        assert!((sym.trace() - 3.0).abs() < 1e-12);
        assert!(sym.mul(&sym).max_abs_diff(&sym) < 1e-12);
        let anti = young_projector(&p(&[1, 1]), 2, 2, 2).unwrap();
        assert!((anti.trace() - 1.0).abs() < 1e-12);
        assert!(sym.mul(&anti).max_abs() < 1e-12);
        // completeness at k=3, d=2
        let mut total = DenseOperator::zeros(3, 2).unwrap();
        for lam in enumerate_partitions(3, 2) {
            let p_l = young_projector(&lam, 3, 3, 2).unwrap();
            let expect = dim_sn(&lam).to_f64().unwrap() * mult_natural(&lam, 2).to_f64().unwrap();
            assert!((p_l.trace() - expect).abs() < 1e-10, "{lam}");
            total = total.add(&p_l);
        }
        assert!(total.max_abs_diff(&DenseOperator::identity(3, 2).unwrap()) < 1e-10);
        assert!(matches!(
            young_projector(&p(&[10]), 10, 10, 2),
            Err(PbtError::EnumerationGuard { .. })
        ));
    }

    #[test]
    fn f_projector_small() {
        // n=3, d=2, α=(1), μ=(2): rank-2 projector
        let f = f_projector(&p(&[1]), &p(&[2]), 3, 2).unwrap();
        assert!(f.mul(&f).max_abs_diff(&f) < 1e-10);
        assert!((f.trace() - 2.0).abs() < 1e-10);
        let g = f_projector(&p(&[1]), &p(&[1, 1]), 3, 2).unwrap();
        assert!(f.mul(&g).max_abs() < 1e-12);
        // Full reconstruction Σ γ·F = η at n=4, d=2
        let eta = eta_operator(4, 2).unwrap();
        let mut rebuilt = DenseOperator::zeros(4, 2).unwrap();
        for (alpha, mu) in branch_pairs(4, 2) {
            let f = f_projector(&alpha, &mu, 4, 2).unwrap();
            rebuilt = rebuilt.add(&f.scaled(gamma_value(&alpha, &mu, 4, 2)));
        }
        assert!(rebuilt.max_abs_diff(&eta) < 1e-10);
    }

    #[test]
    fn spectrum_reports() {
        for (n, d) in [(3u32, 2u32), (4, 2), (3, 3), (5, 2)] {
            let r = verify_spectrum(n, d).unwrap();
            assert!(r.pass, "n={} d={}: {:?}", n, d, r.details);
        }
    }

    #[test]
    fn partial_trace_facts_small() {
        for (n, d) in [(3u32, 2u32), (4, 2), (3, 3)] {
            let r = verify_partial_trace_facts(n, d).unwrap();
            assert!(r.pass, "n={} d={} max_dev={}", n, d, r.max_dev);
        }
    }

    #[test]
    fn fidelity_direct_values() {
        let f = fidelity_direct(3, 2).unwrap();
        assert!((f - (2.0 + 3f64.sqrt()) / 8.0).abs() < 1e-10);
        let f = fidelity_direct(4, 2).unwrap();
        assert!((f - 0.625).abs() < 1e-10);
        for d in 2..=3 {
            let f = fidelity_direct(2, d).unwrap();
            assert!((f - 1.0 / (d * d) as f64).abs() < 1e-10);
        }
        // matches the closed form
        for (n, d) in [(5u32, 2u32), (4, 3)] {
            let f = fidelity_direct(n, d).unwrap();
            let exact = formulas::fidelity_deterministic(n - 1, d, 64).to_f64();
            assert!((f - exact).abs() < 1e-9, "n={} d={}", n, d);
        }
        assert!(fidelity_cutoff_sensitivity(4, 2).unwrap() < 1e-9);
    }

    #[test]
    fn zeta_reports() {
        // hand value: n=3, d=2, μ=μ'=(2), α=α'=(1) → 4.5
        let vt = kron(&DenseOperator::identity(1, 2).unwrap(), &p_plus(2));
        let f = f_projector(&p(&[1]), &p(&[2]), 3, 2).unwrap();
        let t = vt.mul(&f);
        assert!((t.trace_product(&t) - 4.5).abs() < 1e-10);
        for (n, d) in [(3u32, 2u32), (4, 2), (3, 3)] {
            let r = verify_zeta(n, d).unwrap();
            assert!(r.pass, "n={} d={} max_dev={}", n, d, r.max_dev);
        }
    }

    #[test]
    fn channel_simulation() {
        let f = simulate_deterministic_channel(2, 2).unwrap();
        assert!((f - 0.25).abs() < 1e-10);
        let f = simulate_deterministic_channel(3, 2).unwrap();
        assert!((f - (2.0 + 3f64.sqrt()) / 8.0).abs() < 1e-9);
        let f = simulate_deterministic_channel(4, 2).unwrap();
        assert!((f - 0.625).abs() < 1e-9);
    }

    #[test]
    fn sdp_reports() {
        for (n, d) in [(3u32, 2u32), (4, 2), (3, 3)] {
            let r = verify_sdp_epr(n, d).unwrap();
            assert!(r.pass, "epr n={} d={}: {:?}", n, d, r.details);
            let r = verify_sdp_optimal(n, d).unwrap();
            assert!(r.pass, "opt n={} d={}: {:?}", n, d, r.details);
        }
    }
}
