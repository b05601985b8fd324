//! Generalization-bound calculator for memory classifiers.
//!
//! All logarithms are natural. Two right-hand sides are provided: the
//! headline bound, which pays `C(n, q, δ)`, and the cascade form it is
//! derived from, which pays `C(n, q + 1, δ)` and keeps the per-memory
//! `min(n_k⁺/n, ·)` terms. The headline bound is usually, but not always,
//! the larger of the two: when the mins do not bind and `n` is large the
//! extra `C` increment of the cascade form can dominate.

use num_bigint::BigUint;
use num_integer::binomial;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::{pairwise_sum, Scalar};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct BoundParams<T> {
    pub n: usize,
    pub q: usize,
    pub delta: T,
    pub rho: T,
    pub kappa: T,
    /// Empirical Rademacher complexity of each within-cluster class.
    pub rademacher_h: Vec<T>,
    pub empirical_risk: T,
    /// Points routed to each memory and classified correctly.
    #[serde(default)]
    pub n_k_plus: Option<Vec<usize>>,
}

impl<T: Scalar> BoundParams<T> {
    pub fn new(n: usize, q: usize, delta: T) -> Self {
        Self {
            n,
            q,
            delta,
            rho: T::one(),
            kappa: T::one(),
            rademacher_h: vec![T::zero(); q],
            empirical_risk: T::zero(),
            n_k_plus: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_nq(self.n, self.q)?;
        check_delta(self.q, self.delta)?;
        if !(self.rho > T::zero() && self.rho.is_finite()) {
            return Err(Error::Domain(format!("rho = {} must be positive", self.rho)));
        }
        if !(self.kappa > T::zero() && self.kappa.is_finite()) {
            return Err(Error::Domain(format!("kappa = {} must be positive", self.kappa)));
        }
        if self.rademacher_h.len() != self.q {
            return Err(Error::Input(format!(
                "expected {} Rademacher estimates, got {}",
                self.q,
                self.rademacher_h.len()
            )));
        }
        let unit = |v: T| v >= T::zero() && v <= T::one();
        if let Some(r) = self.rademacher_h.iter().find(|&&r| !unit(r)) {
            return Err(Error::Domain(format!("Rademacher estimate {r} outside [0, 1]")));
        }
        if !unit(self.empirical_risk) {
            return Err(Error::Domain(format!("empirical risk {} outside [0, 1]", self.empirical_risk)));
        }
        if let Some(nk) = &self.n_k_plus {
            if nk.len() != self.q {
                return Err(Error::Input(format!("expected {} n_k_plus counts, got {}", self.q, nk.len())));
            }
            if let Some(c) = nk.iter().find(|&&c| c > self.n) {
                return Err(Error::Input(format!("n_k_plus entry {c} exceeds n = {}", self.n)));
            }
        }
        Ok(())
    }
}

fn check_nq(n: usize, q: usize) -> Result<()> {
    if n == 0 || q == 0 {
        return Err(Error::Domain(format!("need n >= 1 and q >= 1, got n = {n}, q = {q}")));
    }
    Ok(())
}

fn check_delta<T: Scalar>(q: usize, delta: T) -> Result<()> {
    if !(delta > T::zero() && delta <= T::one() / T::of_usize(q)) {
        return Err(Error::Domain(format!("delta = {delta} must lie in (0, 1/{q}]")));
    }
    Ok(())
}

/// `(1/δ)·√(ln q / n)·(2 + √ln(ρ²n / ln q)) + √(ln(4/δ) / n)`, which
/// reduces to `√(ln(4/δ) / n)` at `q = 1`. Requires `0 < δ ≤ 1/q`.
pub fn c_term<T: Scalar>(n: usize, q: usize, delta: T, rho: T) -> Result<T> {
    check_nq(n, q)?;
    check_delta(q, delta)?;
    c_term_unchecked(n, q, delta, rho)
}

fn c_term_unchecked<T: Scalar>(n: usize, q: usize, delta: T, rho: T) -> Result<T> {
    if !(rho > T::zero()) {
        return Err(Error::Domain(format!("rho = {rho} must be positive")));
    }
    let nf = T::of_usize(n);
    let tail = ((T::of(4.0) / delta).ln() / nf).sqrt();
    if q == 1 {
        return Ok(tail);
    }
    let lq = T::of_usize(q).ln();
    let inner = rho * rho * nf / lq;
    if !(inner > T::one()) {
        return Err(Error::Domain(format!(
            "ln(rho^2 n / ln q) needs rho^2 n / ln q > 1, got {inner}"
        )));
    }
    Ok((lq / nf).sqrt() / delta * (T::of(2.0) + inner.ln().sqrt()) + tail)
}

/// `N_{n,q} = n · C(n-1, q-1)`, exactly.
pub fn count_selector_hypotheses(n: usize, q: usize) -> Result<BigUint> {
    if q == 0 || q > n {
        return Err(Error::Input(format!("need 1 <= q <= n, got n = {n}, q = {q}")));
    }
    Ok(BigUint::from(n) * binomial(BigUint::from(n - 1), BigUint::from(q - 1)))
}

/// Natural log of an arbitrary-size positive integer.
pub fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("finite below 2^1000").ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().expect("64-bit");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `q(1 + ln n) / √n`.
pub fn selector_rademacher_bound<T: Scalar>(n: usize, q: usize) -> T {
    let nf = T::of_usize(n);
    T::of_usize(q) * (T::one() + nf.ln()) / nf.sqrt()
}

/// Whether `4q · q(1 + ln n)/√n ≥ 1`, in which case the headline bound
/// cannot be below 1.
pub fn is_vacuous<T: Scalar>(n: usize, q: usize) -> bool {
    T::of(4.0) * T::of_usize(q) * selector_rademacher_bound::<T>(n, q) >= T::one()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct BoundValue<T> {
    pub raw: T,
    /// `min(raw, 1)`; a risk bound above 1 says nothing.
    pub clamped: T,
}

impl<T: Scalar> BoundValue<T> {
    fn new(raw: T) -> Self {
        Self { raw, clamped: raw.min(T::one()) }
    }
}

/// `R̂ + 4q[(q(1 + ln n) + κ)/√n + max_k R_k] + C(n, q, δ)`.
pub fn generalization_bound_rhs<T: Scalar>(p: &BoundParams<T>) -> Result<BoundValue<T>> {
    p.validate()?;
    let nf = T::of_usize(p.n);
    let qf = T::of_usize(p.q);
    let max_r = p.rademacher_h.iter().copied().fold(T::zero(), T::max);
    let complexity = (qf * (T::one() + nf.ln()) + p.kappa) / nf.sqrt() + max_r;
    let c = c_term(p.n, p.q, p.delta, p.rho)?;
    Ok(BoundValue::new(p.empirical_risk + T::of(4.0) * qf * complexity + c))
}

/// `R̂ + Σ_k min(n_k⁺/n, 4[R_k + q(1 + ln n)/√n + κ/√n]) + C(n, q + 1, δ)`.
pub fn intermediate_bound_rhs<T: Scalar>(p: &BoundParams<T>) -> Result<BoundValue<T>> {
    p.validate()?;
    let nk = p
        .n_k_plus
        .as_ref()
        .ok_or_else(|| Error::Input("intermediate bound needs n_k_plus".into()))?;
    let nf = T::of_usize(p.n);
    let selector = selector_rademacher_bound::<T>(p.n, p.q) + p.kappa / nf.sqrt();
    let terms: Vec<T> = nk
        .iter()
        .zip(&p.rademacher_h)
        .map(|(&c, &r)| (T::of_usize(c) / nf).min(T::of(4.0) * (r + selector)))
        .collect();
    let c = c_term_unchecked(p.n, p.q + 1, p.delta, p.rho)?;
    Ok(BoundValue::new(p.empirical_risk + pairwise_sum(&terms) + c))
}

/// Summary printed by the `bound` command.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub c_term: f64,
    pub selector_bound: f64,
    pub rhs: f64,
    pub rhs_clamped: f64,
    pub vacuous: bool,
}

pub fn bound_report(p: &BoundParams<f64>) -> Result<BoundReport> {
    let rhs = generalization_bound_rhs(p)?;
    Ok(BoundReport {
        c_term: c_term(p.n, p.q, p.delta, p.rho)?,
        selector_bound: selector_rademacher_bound(p.n, p.q),
        rhs: rhs.raw,
        rhs_clamped: rhs.clamped,
        vacuous: is_vacuous::<f64>(p.n, p.q),
    })
}

fn check_predictions<T: Scalar>(predictions: &[Vec<T>]) -> Result<usize> {
    let first = predictions
        .first()
        .ok_or_else(|| Error::Input("hypothesis set is empty".into()))?;
    let n = first.len();
    if n == 0 {
        return Err(Error::Input("hypotheses are evaluated on zero points".into()));
    }
    if predictions.iter().any(|h| h.len() != n) {
        return Err(Error::Input("hypotheses disagree on the number of points".into()));
    }
    if predictions.iter().flatten().any(|v| !(v.abs() <= T::one())) {
        return Err(Error::Input("predictions must lie in [-1, 1]".into()));
    }
    Ok(n)
}

/// Monte-Carlo estimate of `n⁻¹ E sup_h Σ_i ε_i h(x_i)` for a finite class
/// given as one prediction row per hypothesis. Draw `d` uses its own
/// derived stream, so the result is independent of the thread count.
pub fn empirical_rademacher_finite<T: Scalar>(predictions: &[Vec<T>], num_draws: usize, seed: u64) -> Result<T> {
    let n = check_predictions(predictions)?;
    if num_draws == 0 {
        return Err(Error::Input("num_draws must be at least 1".into()));
    }
    let nf = T::of_usize(n);
    let sups: Vec<T> = (0..num_draws)
        .into_par_iter()
        .map(|d| {
            let mut r = rng::stream(seed, &[d as u64]);
            let eps: Vec<bool> = (0..n).map(|_| r.gen()).collect();
            predictions
                .iter()
                .map(|h| {
                    h.iter()
                        .zip(&eps)
                        .fold(T::zero(), |acc, (&v, &e)| if e { acc + v } else { acc - v })
                })
                .fold(T::neg_infinity(), T::max)
                / nf
        })
        .collect();
    Ok(pairwise_sum(&sups) / T::of_usize(num_draws))
}

/// Massart's finite-class bound `max_h ‖h‖ · √(2 ln |H|) / n`.
pub fn massart_bound<T: Scalar>(predictions: &[Vec<T>]) -> Result<T> {
    let n = check_predictions(predictions)?;
    let max_norm = predictions
        .iter()
        .map(|h| h.iter().map(|&v| v * v).sum::<T>().sqrt())
        .fold(T::zero(), T::max);
    let ln_h = T::of_usize(predictions.len()).ln();
    Ok(max_norm * (T::of(2.0) * ln_h).sqrt() / T::of_usize(n))
}

/// The same bound with `ln |H|` in place of `√(2 ln |H|)`. Only valid when
/// `|H| ≥ e²`, where it dominates [`massart_bound`].
pub fn massart_bound_log_form<T: Scalar>(predictions: &[Vec<T>]) -> Result<T> {
    let n = check_predictions(predictions)?;
    let max_norm = predictions
        .iter()
        .map(|h| h.iter().map(|&v| v * v).sum::<T>().sqrt())
        .fold(T::zero(), T::max);
    Ok(max_norm * T::of_usize(predictions.len()).ln() / T::of_usize(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_term_single_memory() {
        for n in [1usize, 10, 1000, 123_456] {
            let v: f64 = c_term(n, 1, 0.05, 1.0).unwrap();
            assert!((v - (80f64.ln() / n as f64).sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn c_term_shrinks_with_n() {
        let mut prev = f64::INFINITY;
        for n in [16usize, 64, 256, 1024, 4096] {
            let v: f64 = c_term(n, 4, 0.05, 1.0).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn c_term_increases_with_q() {
        for n in [100usize, 1000, 10_000] {
            for delta in [0.01, 0.05, 0.1] {
                let qmax = (1.0 / delta) as usize;
                let mut prev = 0.0;
                for q in 1..=qmax.min(20) {
                    let v: f64 = c_term(n, q, delta, 1.0).unwrap();
                    assert!(v > prev, "n={n} delta={delta} q={q}");
                    prev = v;
                }
            }
        }
    }

    #[test]
    fn c_term_domain_errors() {
        assert!(matches!(c_term(1, 2, 0.05f64, 0.5), Err(Error::Domain(_))));
        assert!(matches!(c_term(100, 4, 0.3f64, 1.0), Err(Error::Domain(_))));
        assert!(matches!(c_term(100, 4, 0.0f64, 1.0), Err(Error::Domain(_))));
        assert!(matches!(c_term(100, 0, 0.05f64, 1.0), Err(Error::Domain(_))));
        assert!(matches!(c_term(100, 2, 0.05f64, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn selector_counts() {
        assert_eq!(count_selector_hypotheses(5, 1).unwrap(), BigUint::from(5u32));
        // first memory: 5 choices, remaining one of the other 4
        let brute = (0..5).flat_map(|a| (0..5).filter(move |&b| b != a)).count();
        assert_eq!(count_selector_hypotheses(5, 2).unwrap(), BigUint::from(brute));
        assert!(count_selector_hypotheses(3, 4).is_err());
        assert!(count_selector_hypotheses(3, 0).is_err());
    }

    #[test]
    fn selector_bound_values() {
        assert_eq!(selector_rademacher_bound::<f64>(1, 3), 3.0);
        let n = 7usize;
        let expected = 2.0 * (1.0 + 7f64.ln()) / 7f64.sqrt();
        assert!((selector_rademacher_bound::<f64>(n, 2) - expected).abs() < 1e-15);
        for q in 1..10 {
            assert_eq!(
                selector_rademacher_bound::<f64>(500, 2 * q),
                2.0 * selector_rademacher_bound::<f64>(500, q)
            );
        }
    }

    #[test]
    fn generalization_single_memory_reduction() {
        let n = 2000;
        let mut p = BoundParams::new(n, 1, 0.05f64);
        p.kappa = 1e-12;
        let got = generalization_bound_rhs(&p).unwrap().raw;
        let nf = n as f64;
        let expected = 4.0 * (1.0 + nf.ln()) / nf.sqrt() + (80f64.ln() / nf).sqrt();
        assert!((got - expected).abs() < 1e-9);
    }

    #[test]
    fn clamped_companion() {
        let p = BoundParams::new(50, 3, 0.05f64);
        let v = generalization_bound_rhs(&p).unwrap();
        assert!(v.raw > 1.0);
        assert_eq!(v.clamped, 1.0);
        assert!(is_vacuous::<f64>(50, 3));
        assert!(!is_vacuous::<f64>(10_000_000, 1));
    }

    #[test]
    fn intermediate_zero_counts() {
        let mut p = BoundParams::new(1000, 2, 0.05f64);
        p.empirical_risk = 0.1;
        p.n_k_plus = Some(vec![0, 0]);
        let got = intermediate_bound_rhs(&p).unwrap().raw;
        let expected = 0.1 + c_term_unchecked(1000, 3, 0.05, 1.0).unwrap();
        assert!((got - expected).abs() < 1e-15);
        p.n_k_plus = None;
        assert!(matches!(intermediate_bound_rhs(&p), Err(Error::Input(_))));
    }

    #[test]
    fn intermediate_can_exceed_headline() {
        // Equal R_k and non-binding mins: the complexity terms coincide and
        // the cascade form pays C(n, q+1) - C(n, q) on top.
        let mut p = BoundParams::new(1_000_000_000, 2, 0.05f64);
        p.n_k_plus = Some(vec![1_000_000_000, 1_000_000_000]);
        p.rademacher_h = vec![0.0, 0.0];
        let inter = intermediate_bound_rhs(&p).unwrap().raw;
        let headline = generalization_bound_rhs(&p).unwrap().raw;
        assert!(inter > headline);
    }

    #[test]
    fn params_validation() {
        let mut p = BoundParams::new(100, 2, 0.05f64);
        assert!(p.validate().is_ok());
        p.rademacher_h = vec![0.1];
        assert!(p.validate().is_err());
        p.rademacher_h = vec![0.1, 1.5];
        assert!(p.validate().is_err());
        p.rademacher_h = vec![0.1, 0.1];
        p.n_k_plus = Some(vec![10, 101]);
        assert!(p.validate().is_err());
        p.n_k_plus = None;
        p.kappa = 0.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn rademacher_shattering() {
        let n = 4;
        let all: Vec<Vec<f64>> = (0..1u32 << n)
            .map(|m| (0..n).map(|i| if m >> i & 1 == 1 { 1.0 } else { -1.0 }).collect())
            .collect();
        let est = empirical_rademacher_finite(&all, 2000, 3).unwrap();
        assert!((est - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rademacher_errors_and_determinism() {
        let empty: Vec<Vec<f64>> = vec![];
        assert!(empirical_rademacher_finite(&empty, 10, 0).is_err());
        assert!(empirical_rademacher_finite(&[vec![2.0]], 10, 0).is_err());
        let h = vec![vec![1.0, -1.0, 0.5], vec![0.0, 1.0, 1.0]];
        assert_eq!(
            empirical_rademacher_finite(&h, 500, 9).unwrap(),
            empirical_rademacher_finite(&h, 500, 9).unwrap()
        );
    }

    #[test]
    fn log_form_needs_large_classes() {
        // Two hypotheses: the ln|H| form drops below the true Massart bound.
        let h = vec![vec![1.0; 4], vec![-1.0; 4]];
        assert!(massart_bound_log_form(&h).unwrap() < massart_bound(&h).unwrap());
    }

    #[test]
    fn big_log() {
        let x = count_selector_hypotheses(3000, 1500).unwrap();
        let direct: f64 = (1..=1499).map(|i| ((2999 - 1499 + i) as f64 / i as f64).ln()).sum::<f64>() + 3000f64.ln();
        assert!((ln_biguint(&x) - direct).abs() / direct < 1e-12);
    }
}
