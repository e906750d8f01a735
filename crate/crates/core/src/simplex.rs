//! The open unit simplex Δ_n and its multiplicative calculus.
//!
//! Δ_n carries a commutative group structure: coordinatewise products
//! renormalized back to the simplex ([`odot`]), with the barycenter ē as
//! identity and normalized reciprocals as inverse ([`invert`]). Powering
//! ([`power`]) is the scalar action. The transport cost
//!
//! ```text
//! c(p, q) = log( (1/n) Σᵢ qᵢ/pᵢ ) − (1/n) Σᵢ log(qᵢ/pᵢ)
//! ```
//!
//! is a Jensen gap, hence nonnegative and zero only on the diagonal; it
//! equals the relative entropy H(ē | q ⊙ p⁻¹). The σ-finite reference
//! measure μ₀ (density 1/(p₁⋯p_n) in the chart dropping the last
//! coordinate) is the Haar measure of the group and is exposed through its
//! log-density and a sampler on a truncated simplex only.
//!
//! Ratios and powers are evaluated in log space with a single max shift so
//! downstream density weights survive exponents up to 10⁴.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::special::log_sum_exp;

/// Smallest admissible coordinate after renormalization.
const MIN_COORD: f64 = 1e-300;

/// A strictly positive probability vector in Δ_n, n ≥ 2.
///
/// Construction renormalizes; all formulas in this crate blow up on the
/// boundary, so zero (or denormal) coordinates are rejected outright.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexPoint {
    coords: Vec<f64>,
}

impl SimplexPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::dimension("simplex point needs n >= 2"));
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain("simplex point has non-finite coordinate"));
        }
        if coords.iter().any(|&x| x <= 0.0) {
            return Err(Error::domain("simplex point must be strictly positive"));
        }
        let sum: f64 = coords.iter().sum();
        if !(sum > 0.0) || !sum.is_finite() {
            return Err(Error::domain("simplex point has invalid total mass"));
        }
        let coords: Vec<f64> = coords.into_iter().map(|x| x / sum).collect();
        if coords.iter().any(|&x| x <= MIN_COORD) {
            return Err(Error::domain(
                "simplex point coordinate below 1e-300 after renormalization",
            ));
        }
        Ok(SimplexPoint { coords })
    }

    /// The barycenter ē = (1/n, …, 1/n), identity of ⊙.
    pub fn barycenter(n: usize) -> Self {
        assert!(n >= 2, "barycenter needs n >= 2");
        SimplexPoint {
            coords: vec![1.0 / n as f64; n],
        }
    }

    /// Normalized exp of log-weights (softmax with max shift).
    pub fn from_log_weights(log_weights: &[f64]) -> Result<Self> {
        if log_weights.len() < 2 {
            return Err(Error::dimension("simplex point needs n >= 2"));
        }
        if log_weights.iter().any(|x| x.is_nan() || *x == f64::INFINITY) {
            return Err(Error::domain("log weights must be finite or -inf"));
        }
        let lse = log_sum_exp(log_weights);
        if !lse.is_finite() {
            return Err(Error::domain("log weights have no mass"));
        }
        SimplexPoint::new(log_weights.iter().map(|lw| (lw - lse).exp()).collect())
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn log_coords(&self) -> Vec<f64> {
        self.coords.iter().map(|x| x.ln()).collect()
    }

    /// Max-abs distance, for coincidence checks.
    pub fn max_abs_diff(&self, other: &SimplexPoint) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

pub fn euclidean_distance(p: &SimplexPoint, q: &SimplexPoint) -> f64 {
    p.coords()
        .iter()
        .zip(q.coords())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

fn check_dims(p: &SimplexPoint, q: &SimplexPoint) -> Result<()> {
    if p.dim() != q.dim() {
        return Err(Error::dimension(format!(
            "points have dimensions {} and {}",
            p.dim(),
            q.dim()
        )));
    }
    Ok(())
}

/// Group operation p ⊙ q: coordinatewise product, renormalized.
pub fn odot(p: &SimplexPoint, q: &SimplexPoint) -> Result<SimplexPoint> {
    check_dims(p, q)?;
    let lw: Vec<f64> = p
        .coords()
        .iter()
        .zip(q.coords())
        .map(|(a, b)| a.ln() + b.ln())
        .collect();
    SimplexPoint::from_log_weights(&lw)
}

/// Group inverse p⁻¹: normalized reciprocals.
pub fn invert(p: &SimplexPoint) -> SimplexPoint {
    let lw: Vec<f64> = p.coords().iter().map(|a| -a.ln()).collect();
    SimplexPoint::from_log_weights(&lw).expect("inverse of interior point is interior")
}

/// Powering λ ⊗ p: normalized coordinatewise powers.
pub fn power(lambda: f64, p: &SimplexPoint) -> SimplexPoint {
    let lw: Vec<f64> = p.coords().iter().map(|a| lambda * a.ln()).collect();
    SimplexPoint::from_log_weights(&lw).expect("power of interior point is interior")
}

/// Transport cost in nats; zero exactly on the diagonal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostValue {
    value: f64,
}

impl CostValue {
    pub fn value(&self) -> f64 {
        self.value
    }
}

/// c(p, q), evaluated through exponential coordinates for stability.
pub fn cost(p: &SimplexPoint, q: &SimplexPoint) -> Result<CostValue> {
    check_dims(p, q)?;
    let x: Vec<f64> = p
        .coords()
        .iter()
        .zip(q.coords())
        .map(|(pi, qi)| qi.ln() - pi.ln())
        .collect();
    Ok(CostValue {
        value: jensen_gap(&x),
    })
}

/// log((1/n) Σ e^{xᵢ}) − (1/n) Σ xᵢ ≥ 0.
fn jensen_gap(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean: f64 = x.iter().sum::<f64>() / n;
    let gap = log_sum_exp(x) - n.ln() - mean;
    debug_assert!(gap > -1e-9, "Jensen gap must be nonnegative, got {gap}");
    gap.max(0.0)
}

/// Relative entropy H(p | q) = Σ pᵢ log(pᵢ/qᵢ) ≥ 0.
pub fn relative_entropy(p: &SimplexPoint, q: &SimplexPoint) -> Result<f64> {
    check_dims(p, q)?;
    let h: f64 = p
        .coords()
        .iter()
        .zip(q.coords())
        .map(|(pi, qi)| pi * (pi.ln() - qi.ln()))
        .sum();
    debug_assert!(h > -1e-9, "relative entropy must be nonnegative, got {h}");
    Ok(h.max(0.0))
}

/// Log-density of μ₀ relative to Lebesgue measure on the chart 𝒟_{n−1}:
/// −Σᵢ log pᵢ.
pub fn mu0_log_density(p: &SimplexPoint) -> f64 {
    -p.coords().iter().map(|x| x.ln()).sum::<f64>()
}

/// Exponential coordinates θᵢ = −log pᵢ.
pub fn exp_coords(p: &SimplexPoint) -> Vec<f64> {
    p.coords().iter().map(|x| -x.ln()).collect()
}

/// Inverse of [`exp_coords`] up to the additive-constant gauge.
pub fn from_exp_coords(theta: &[f64]) -> Result<SimplexPoint> {
    let lw: Vec<f64> = theta.iter().map(|t| -t).collect();
    SimplexPoint::from_log_weights(&lw)
}

/// Cost evaluated purely in exponential coordinates:
/// c = log((1/n) Σ e^{θᵢ−φᵢ}) − (1/n) Σ (θᵢ − φᵢ).
pub fn cost_from_exp_coords(theta: &[f64], phi: &[f64]) -> Result<f64> {
    if theta.len() != phi.len() || theta.len() < 2 {
        return Err(Error::dimension("exponential coordinate lengths differ"));
    }
    let x: Vec<f64> = theta.iter().zip(phi).map(|(t, f)| t - f).collect();
    Ok(jensen_gap(&x))
}

/// Uniform sample from Δ_n (flat Dirichlet).
pub fn sample_uniform(n: usize, rng: &mut ChaCha8Rng) -> SimplexPoint {
    sample_dirichlet(&vec![1.0; n], rng).expect("flat Dirichlet parameters are valid")
}

/// Dirichlet(α) sample via independent Gamma draws.
pub fn sample_dirichlet(alpha: &[f64], rng: &mut ChaCha8Rng) -> Result<SimplexPoint> {
    if alpha.len() < 2 {
        return Err(Error::dimension("Dirichlet needs n >= 2"));
    }
    if alpha.iter().any(|&a| !(a > 0.0) || !a.is_finite()) {
        return Err(Error::parameter("Dirichlet alpha must be positive"));
    }
    loop {
        let draws: Vec<f64> = alpha
            .iter()
            .map(|&a| {
                Gamma::new(a, 1.0)
                    .expect("positive gamma shape")
                    .sample(rng)
            })
            .collect();
        // tiny shapes can underflow a coordinate to zero; redraw
        if let Ok(p) = SimplexPoint::new(draws) {
            return Ok(p);
        }
    }
}

/// Sample from μ₀ restricted to the truncated simplex {p : pᵢ ≥ ε}.
///
/// μ₀ is the pushforward of Lebesgue measure on ℝ^{n−1} under
/// (y₁,…,y_{n−1}) ↦ softmax(y₁,…,y_{n−1},0), so rejection from a uniform
/// box in y is exact. μ₀ itself is σ-finite, not a probability, which is
/// why only truncated sampling is offered.
pub fn sample_mu0_truncated(n: usize, eps: f64, rng: &mut ChaCha8Rng) -> Result<SimplexPoint> {
    if n < 2 {
        return Err(Error::dimension("mu0 sampler needs n >= 2"));
    }
    if !(eps > 0.0) || eps >= 1.0 / n as f64 {
        return Err(Error::parameter("truncation eps must lie in (0, 1/n)"));
    }
    let bound = -eps.ln();
    loop {
        let mut lw: Vec<f64> = (0..n - 1)
            .map(|_| rng.random::<f64>() * 2.0 * bound - bound)
            .collect();
        lw.push(0.0);
        let p = SimplexPoint::from_log_weights(&lw)?;
        if p.coords().iter().all(|&x| x >= eps) {
            return Ok(p);
        }
    }
}
