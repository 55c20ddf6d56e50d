//! Closed-form, polynomial-time evaluation of port-based teleportation
//! performance: operator spectrum, deterministic fidelity, success
//! probabilities, and the optimal coefficient families.
//!
//! All spectral and probabilistic quantities are exact rationals; only the
//! deterministic fidelity is a high-precision real (nested square roots).

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{PbtError, Result};
use crate::partitions::{
    branch_add, branch_remove, enumerate_partitions, mult_natural, normalized_char_transposition,
    BranchPair, Partition,
};
use crate::precise::Precise;

/// One eigenvalue block of the PBT operator.
#[derive(Debug, Clone)]
pub struct SpectrumEntry {
    pub pair: BranchPair,
    /// Eigenvalue γ_μ(α) of the unnormalized operator η.
    pub gamma: BigRational,
    /// Eigenvalue λ_μ(α) = γ_μ(α)/d^N of the normalized operator ρ.
    pub lambda: BigRational,
    /// d_μ · m_α.
    pub degeneracy: BigUint,
}

/// Full spectrum of the PBT operator for `N` ports at local dimension `d`.
#[derive(Debug, Clone)]
pub struct SpectrumTable {
    pub ports: u32,
    pub local_dim: u32,
    pub entries: Vec<SpectrumEntry>,
}

impl SpectrumTable {
    /// Σ γ·degeneracy; must equal N·d^N (the trace of η).
    pub fn trace(&self) -> BigRational {
        self.entries
            .iter()
            .map(|e| &e.gamma * BigRational::from(BigInt::from(e.degeneracy.clone())))
            .sum()
    }

    pub fn expected_trace(&self) -> BigRational {
        let dn = BigUint::from(self.local_dim).pow(self.ports);
        BigRational::from(BigInt::from(dn * self.ports))
    }

    pub fn trace_identity_holds(&self) -> bool {
        self.trace() == self.expected_trace()
    }

    /// Lookup γ by (α, μ).
    pub fn gamma_map(&self) -> HashMap<(Partition, Partition), BigRational> {
        self.entries
            .iter()
            .map(|e| {
                (
                    (e.pair.alpha.clone(), e.pair.mu.clone()),
                    e.gamma.clone(),
                )
            })
            .collect()
    }
}

/// Per-(N, d) evaluator with cached dimensions and multiplicities.
///
/// Dimensions are filled level-by-level with the branching sum
/// d_μ = Σ_{α ∈ μ} d_α, which amortizes sweeps over many `N`; the
/// hook-length route stays available in `partitions::dim_sn` and the two are
/// cross-checked in the tests.
pub struct Evaluator {
    d: u32,
    levels: HashMap<u32, HashMap<Partition, (BigUint, BigUint)>>,
}

impl Evaluator {
    pub fn new(d: u32) -> Self {
        Self {
            d,
            levels: HashMap::new(),
        }
    }

    pub fn local_dim(&self) -> u32 {
        self.d
    }

    /// (dim, mult) table for all diagrams of `n` boxes, height ≤ d.
    pub fn level(&mut self, n: u32) -> &HashMap<Partition, (BigUint, BigUint)> {
        let mut start = n;
        while start > 0 && !self.levels.contains_key(&(start - 1)) {
            if self.levels.contains_key(&start) {
                break;
            }
            start -= 1;
        }
        for k in start..=n {
            if self.levels.contains_key(&k) {
                continue;
            }
            let built = self.build_level(k);
            self.levels.insert(k, built);
        }
        &self.levels[&n]
    }

    fn build_level(&self, n: u32) -> HashMap<Partition, (BigUint, BigUint)> {
        if n == 0 {
            let mut map = HashMap::new();
            map.insert(Partition::empty(), (BigUint::one(), BigUint::one()));
            return map;
        }
        let prev = &self.levels[&(n - 1)];
        let mut map = HashMap::new();
        for lam in enumerate_partitions(n, self.d) {
            let dim: BigUint = branch_remove(&lam)
                .iter()
                .map(|a| prev.get(a).map(|(d, _)| d.clone()).unwrap_or_else(BigUint::zero))
                .sum();
            let mult = mult_natural(&lam, self.d);
            map.insert(lam, (dim, mult));
        }
        map
    }

    /// Drop cached levels below `n` (sliding-window sweeps).
    pub fn prune_below(&mut self, n: u32) {
        self.levels.retain(|&k, _| k >= n);
    }

    /// Σ m_λ² over the level. Avoids the dimension DP when the level is not
    /// already cached (multiplicities alone are cheap even for huge n).
    pub fn mult_square_sum(&mut self, n: u32) -> BigUint {
        if let Some(map) = self.levels.get(&n) {
            return map.values().map(|(_, m)| m * m).sum();
        }
        enumerate_partitions(n, self.d)
            .iter()
            .map(|lam| {
                let m = mult_natural(lam, self.d);
                &m * &m
            })
            .sum()
    }

    pub fn spectrum(&mut self, ports: u32) -> SpectrumTable {
        let d = self.d;
        let n_alpha = ports - 1;
        self.level(n_alpha);
        self.level(ports);
        let alphas = enumerate_partitions(n_alpha, d);
        let lower = &self.levels[&n_alpha];
        let upper = &self.levels[&ports];
        let dn = BigRational::from(BigInt::from(BigUint::from(d).pow(ports)));
        let mut entries = Vec::new();
        for alpha in alphas {
            let (d_a, m_a) = &lower[&alpha];
            for mu in branch_add(&alpha, d) {
                let (d_m, m_m) = &upper[&mu];
                let gamma = BigRational::new(
                    BigInt::from(ports) * BigInt::from(m_m.clone()) * BigInt::from(d_a.clone()),
                    BigInt::from(m_a.clone()) * BigInt::from(d_m.clone()),
                );
                let lambda = &gamma / &dn;
                entries.push(SpectrumEntry {
                    pair: BranchPair {
                        alpha: alpha.clone(),
                        mu,
                    },
                    degeneracy: d_m * m_a,
                    gamma,
                    lambda,
                });
            }
        }
        SpectrumTable {
            ports,
            local_dim: d,
            entries,
        }
    }

    /// Spectrum via the transposition-character form; must agree exactly
    /// with `spectrum`.
    pub fn spectrum_char_form(&mut self, ports: u32) -> SpectrumTable {
        let d = self.d;
        let n = ports + 1; // system count
        let n_alpha = ports - 1;
        self.level(n_alpha);
        self.level(ports);
        let alphas = enumerate_partitions(n_alpha, d);
        let lower = &self.levels[&n_alpha];
        let upper = &self.levels[&ports];
        let dn = BigRational::from(BigInt::from(BigUint::from(d).pow(ports)));
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let mut entries = Vec::new();
        for alpha in alphas {
            let (_, m_a) = &lower[&alpha];
            let alpha_term = if alpha.n() >= 2 {
                &half
                    * BigRational::from(BigInt::from((n - 2) as u64 * (n - 3) as u64))
                    * normalized_char_transposition(&alpha).expect("|α| ≥ 2")
            } else {
                BigRational::zero()
            };
            for mu in branch_add(&alpha, d) {
                let (d_m, _) = &upper[&mu];
                let mu_term = if mu.n() >= 2 {
                    &half
                        * BigRational::from(BigInt::from((n - 1) as u64 * (n - 2) as u64))
                        * normalized_char_transposition(&mu).expect("|μ| ≥ 2")
                } else {
                    BigRational::zero()
                };
                let gamma = BigRational::from(BigInt::from(d)) + mu_term - &alpha_term;
                let lambda = &gamma / &dn;
                entries.push(SpectrumEntry {
                    pair: BranchPair {
                        alpha: alpha.clone(),
                        mu,
                    },
                    degeneracy: d_m * m_a,
                    gamma,
                    lambda,
                });
            }
        }
        SpectrumTable {
            ports,
            local_dim: d,
            entries,
        }
    }

    /// Deterministic entanglement fidelity
    /// F = d^{−(N+2)} Σ_α (Σ_{μ ∈ α} √(d_μ m_μ))².
    ///
    /// Fixed summation order (descending-lex α, μ) at `precision_bits + 32`
    /// working bits; the certified relative error is ≤ 2^{−(precision_bits−8)}.
    pub fn fidelity_deterministic(&mut self, ports: u32, precision_bits: u32) -> Precise {
        assert!(precision_bits >= 64, "precision_bits must be ≥ 64");
        let d = self.d;
        let wp = precision_bits + 32;
        self.level(ports - 1);
        self.level(ports);
        let alphas = enumerate_partitions(ports - 1, d);
        let upper = &self.levels[&ports];
        // per-α contributions computed in parallel, reduced in canonical order
        let squares: Vec<BigUint> = alphas
            .par_iter()
            .map(|alpha| {
                let mut s = BigUint::zero();
                for mu in branch_add(alpha, d) {
                    let (d_m, m_m) = &upper[&mu];
                    s += (d_m * m_m << (2 * wp)).sqrt();
                }
                &s * &s
            })
            .collect();
        let mut total = BigUint::zero();
        for sq in squares {
            total += sq;
        }
        let denom = BigUint::from(d).pow(ports + 2) << (2 * wp - precision_bits);
        Precise::from_scaled(total / denom, precision_bits)
    }

    /// Success probability with a maximally entangled resource,
    /// cross-checked against the per-α primal form.
    pub fn prob_success_epr(&mut self, ports: u32) -> BigRational {
        let d = self.d;
        self.level(ports - 1);
        self.level(ports);
        let alphas = enumerate_partitions(ports - 1, d);
        let lower = &self.levels[&(ports - 1)];
        let upper = &self.levels[&ports];
        let mut sum = BigRational::zero();
        let mut primal_sum = BigRational::zero();
        for alpha in &alphas {
            let (d_a, m_a) = &lower[alpha];
            let mut best: Option<BigRational> = None;
            let mut gamma_star: Option<BigRational> = None;
            for mu in branch_add(alpha, d) {
                let (d_m, m_m) = &upper[&mu];
                let ratio = BigRational::new(BigInt::from(d_m.clone()), BigInt::from(m_m.clone()));
                // μ* = argmax γ = argmin d_μ/m_μ; first wins ties (descending-lex)
                if best.as_ref().map_or(true, |b| ratio < *b) {
                    best = Some(ratio);
                    gamma_star = Some(BigRational::new(
                        BigInt::from(ports) * BigInt::from(m_m.clone()) * BigInt::from(d_a.clone()),
                        BigInt::from(m_a.clone()) * BigInt::from(d_m.clone()),
                    ));
                }
            }
            let best = best.expect("every α branches");
            let m_a_r = BigRational::from(BigInt::from(m_a.clone()));
            sum += &m_a_r * &m_a_r * best;
            primal_sum += &m_a_r * BigRational::from(BigInt::from(d_a.clone()))
                / gamma_star.expect("γ* set with best");
        }
        let dn = BigRational::from(BigInt::from(BigUint::from(d).pow(ports)));
        let p = sum / &dn;
        // Primal bookkeeping: p = (N/d^N)·Σ_α m_α d_α / γ_{μ*}(α)
        let p_primal = BigRational::from(BigInt::from(ports)) * primal_sum / &dn;
        assert_eq!(p, p_primal, "closed and primal forms must agree");
        p
    }

    /// Optimal-resource success probability N/(N+d²−1), cross-checked
    /// against the multiplicity-square ratio.
    pub fn prob_success_optimal(&mut self, ports: u32) -> BigRational {
        let d = self.d;
        let closed = BigRational::new(
            BigInt::from(ports),
            BigInt::from(ports as u64 + (d as u64) * (d as u64) - 1),
        );
        let num = self.mult_square_sum(ports - 1);
        let den = self.mult_square_sum(ports);
        let ratio = BigRational::new(BigInt::from(num), BigInt::from(den));
        assert_eq!(closed, ratio, "closed form and multiplicity ratio must agree");
        closed
    }
}

pub fn spectrum(ports: u32, d: u32) -> SpectrumTable {
    Evaluator::new(d).spectrum(ports)
}

pub fn spectrum_char_form(ports: u32, d: u32) -> SpectrumTable {
    Evaluator::new(d).spectrum_char_form(ports)
}

pub fn fidelity_deterministic(ports: u32, d: u32, precision_bits: u32) -> Precise {
    Evaluator::new(d).fidelity_deterministic(ports, precision_bits)
}

/// Average fidelity f = (F·d + 1)/(d + 1).
pub fn average_fidelity(fid: &Precise, d: u32) -> Result<Precise> {
    if fid.as_rational() > BigRational::one() {
        return Err(PbtError::InvalidArgument(format!(
            "fidelity {} > 1",
            fid.to_f64()
        )));
    }
    Ok(fid.affine_avg(d))
}

pub fn prob_success_epr(ports: u32, d: u32) -> BigRational {
    Evaluator::new(d).prob_success_epr(ports)
}

pub fn prob_success_optimal(ports: u32, d: u32) -> BigRational {
    Evaluator::new(d).prob_success_optimal(ports)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    EprResource,
    OptimizedResource,
}

/// Exact optimal coefficient families for one protocol variant.
#[derive(Debug, Clone)]
pub struct OptimalSolution {
    pub variant: Variant,
    /// Optimized variant only: μ → c_μ.
    pub state_coeffs: Vec<(Partition, BigRational)>,
    /// α → x_α (EPR) or α → u(α) (optimized).
    pub povm_coeffs: Vec<(Partition, BigRational)>,
    /// (α, μ) → dual certificate coefficient.
    pub dual_coeffs: Vec<((Partition, Partition), BigRational)>,
    /// Optimized variant only: the dual scalar b.
    pub dual_b: Option<BigRational>,
    /// g(N) = 1/Σ_ν m_ν².
    pub g: BigRational,
}

pub fn optimal_solution(ports: u32, d: u32, variant: Variant) -> OptimalSolution {
    let mut ev = Evaluator::new(d);
    let n_alpha = ports - 1;
    ev.level(n_alpha);
    ev.level(ports);
    let g = BigRational::new(BigInt::one(), BigInt::from(ev.mult_square_sum(ports)));
    let table = ev.spectrum(ports);
    let gammas = table.gamma_map();
    let lower = ev.level(n_alpha).clone();
    let upper = ev.level(ports).clone();
    let alphas = enumerate_partitions(n_alpha, d);
    let dn = BigRational::from(BigInt::from(BigUint::from(d).pow(ports)));
    let d_r = BigRational::from(BigInt::from(d));
    match variant {
        Variant::EprResource => {
            let mut povm = Vec::new();
            let mut dual = Vec::new();
            for alpha in &alphas {
                let (_, m_a) = &lower[alpha];
                // μ* maximizes γ; branch_add order breaks ties descending-lex
                let mus = branch_add(alpha, d);
                let mu_star = mus
                    .iter()
                    .max_by(|a, b| {
                        gammas[&(alpha.clone(), (*a).clone())]
                            .cmp(&gammas[&(alpha.clone(), (*b).clone())])
                            .then(std::cmp::Ordering::Greater)
                    })
                    .expect("nonempty branching")
                    .clone();
                let gamma_star = &gammas[&(alpha.clone(), mu_star.clone())];
                povm.push((alpha.clone(), &d_r / gamma_star));
                let (_, m_ms) = &upper[&mu_star];
                dual.push((
                    (alpha.clone(), mu_star.clone()),
                    &d_r * BigRational::new(
                        BigInt::from(m_a.clone()),
                        BigInt::from(m_ms.clone()),
                    ),
                ));
            }
            OptimalSolution {
                variant,
                state_coeffs: Vec::new(),
                povm_coeffs: povm,
                dual_coeffs: dual,
                dual_b: None,
                g,
            }
        }
        Variant::OptimizedResource => {
            let mut state = Vec::new();
            for mu in enumerate_partitions(ports, d) {
                let (d_m, m_m) = &upper[&mu];
                let c = &dn
                    * &g
                    * BigRational::new(BigInt::from(m_m.clone()), BigInt::from(d_m.clone()));
                state.push((mu, c));
            }
            // trace normalization Σ c_μ d_μ m_μ = d^N
            let trace: BigRational = state
                .iter()
                .map(|(mu, c)| {
                    let (d_m, m_m) = &upper[mu];
                    c * BigRational::from(BigInt::from(d_m * m_m))
                })
                .sum();
            assert_eq!(trace, dn, "optimal state trace must equal d^N");
            let state_map: HashMap<&Partition, &BigRational> =
                state.iter().map(|(m, c)| (m, c)).collect();
            let mut povm = Vec::new();
            let mut dual = Vec::new();
            let n_ratio = BigRational::new(
                BigInt::from(d),
                BigInt::from((d as u64) * (d as u64) + ports as u64 - 1),
            );
            for alpha in &alphas {
                let (d_a, m_a) = &lower[alpha];
                let u = BigRational::from(BigInt::from(BigUint::from(d).pow(ports + 1)))
                    * &g
                    * BigRational::new(
                        BigInt::from(m_a.clone()),
                        BigInt::from(ports) * BigInt::from(d_a.clone()),
                    );
                // consistency u(α) = (d/γ_μ(α))·c_μ for every μ ∈ α
                for mu in branch_add(alpha, d) {
                    let gamma = &gammas[&(alpha.clone(), mu.clone())];
                    assert_eq!(
                        u,
                        &d_r / gamma * state_map[&mu].clone(),
                        "binding constraint must hold with equality"
                    );
                    dual.push(((alpha.clone(), mu.clone()), &n_ratio * gamma));
                }
                povm.push((alpha.clone(), u));
            }
            let b = BigRational::new(
                BigInt::from(ports),
                BigInt::from(BigUint::from(d).pow(ports))
                    * BigInt::from(ports as u64 + (d as u64) * (d as u64) - 1),
            );
            OptimalSolution {
                variant,
                state_coeffs: state,
                povm_coeffs: povm,
                dual_coeffs: dual,
                dual_b: Some(b),
                g,
            }
        }
    }
}

/// All headline quantities for one (N, d).
#[derive(Debug, Clone)]
pub struct PerformanceReport {
    pub ports: u32,
    pub local_dim: u32,
    pub fidelity: Precise,
    pub avg_fidelity: Precise,
    pub p_epr: BigRational,
    pub p_opt: BigRational,
    pub precision_bits: u32,
}

pub fn performance_report(ports: u32, d: u32, precision_bits: u32) -> PerformanceReport {
    let mut ev = Evaluator::new(d);
    let fidelity = ev.fidelity_deterministic(ports, precision_bits);
    let avg_fidelity = fidelity.affine_avg(d);
    let p_epr = ev.prob_success_epr(ports);
    let p_opt = ev.prob_success_optimal(ports);
    PerformanceReport {
        ports,
        local_dim: d,
        fidelity,
        avg_fidelity,
        p_epr,
        p_opt,
        precision_bits,
    }
}
