//! Exponentially concave generators and the maps they induce.
//!
//! A function φ on Δ_n is exponentially concave when e^φ is concave. Its
//! portfolio map
//!
//! ```text
//! πᵢ(r) = rᵢ (1 + ∇_{eᵢ−r} φ(r))
//! ```
//!
//! is the multiplicative displacement of the transport: T(p) = p ⊙ π(p⁻¹)
//! pushes a source law to its Monge image, and the induced coupling is
//! optimal because the portfolio map is multiplicatively cyclically
//! monotone. The local shape of φ is captured by the L-divergence
//! D[r:r'] = log(1 + ∇φ(r')·(r−r')) − (φ(r) − φ(r')) with curvature matrix
//! L(r) = −∇²φ − ∇φ∇φᵀ.
//!
//! Builtins expose analytic gradients and Hessians; finite differences stay
//! in the tests as oracles, since the Monge–Ampère machinery downstream
//! needs accurate det(L̃).

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{tangent_restrict, Matrix};
use crate::rng::StreamFactory;
use crate::simplex::{self, euclidean_distance, SimplexPoint};

/// Evaluation interface of an exponentially concave generator.
///
/// `value`, `gradient` and `hessian` are the natural extensions to the
/// positive orthant; every quantity consumed downstream (directional
/// derivatives along tangent vectors, the quadratic form L) is invariant
/// under the gauge this leaves open.
pub trait Generator: Send + Sync {
    fn name(&self) -> String;
    fn value(&self, r: &SimplexPoint) -> f64;
    fn gradient(&self, r: &SimplexPoint) -> Vec<f64>;
    fn hessian(&self, r: &SimplexPoint) -> Matrix;
}

pub type GeneratorRef = Arc<dyn Generator>;

/// φ0(r) = (1/n) Σ log rᵢ — log geometric mean; generates the
/// equal-weighted portfolio and the identity transport.
#[derive(Debug, Clone, Copy, Default)]
pub struct GeometricMean;

impl Generator for GeometricMean {
    fn name(&self) -> String {
        "phi0".to_string()
    }

    fn value(&self, r: &SimplexPoint) -> f64 {
        let n = r.dim() as f64;
        r.coords().iter().map(|x| x.ln()).sum::<f64>() / n
    }

    fn gradient(&self, r: &SimplexPoint) -> Vec<f64> {
        let n = r.dim() as f64;
        r.coords().iter().map(|x| 1.0 / (n * x)).collect()
    }

    fn hessian(&self, r: &SimplexPoint) -> Matrix {
        let n = r.dim() as f64;
        let coords = r.coords();
        Matrix::from_fn(r.dim(), r.dim(), |i, j| {
            if i == j {
                -1.0 / (n * coords[i] * coords[i])
            } else {
                0.0
            }
        })
    }
}

/// φ^{(λ)}(r) = (λ/n) Σ log rᵢ for λ ∈ (0, 1]; portfolio map
/// πᵢ(r) = λ/n + (1−λ) rᵢ.
#[derive(Debug, Clone, Copy)]
pub struct Power {
    lambda: f64,
}

impl Power {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::parameter(format!(
                "power generator needs lambda in (0, 1], got {lambda}"
            )));
        }
        Ok(Power { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

impl Generator for Power {
    fn name(&self) -> String {
        format!("power:{}", self.lambda)
    }

    fn value(&self, r: &SimplexPoint) -> f64 {
        self.lambda * GeometricMean.value(r)
    }

    fn gradient(&self, r: &SimplexPoint) -> Vec<f64> {
        GeometricMean
            .gradient(r)
            .into_iter()
            .map(|g| self.lambda * g)
            .collect()
    }

    fn hessian(&self, r: &SimplexPoint) -> Matrix {
        GeometricMean.hessian(r).scale(self.lambda)
    }
}

/// φ(r) = log(b·r) with b > 0 coordinatewise. e^φ is affine, so the
/// L-divergence vanishes identically; the degenerate end of the family.
#[derive(Debug, Clone)]
pub struct Affine {
    b: Vec<f64>,
}

impl Affine {
    pub fn new(b: Vec<f64>) -> Result<Self> {
        if b.len() < 2 {
            return Err(Error::parameter("affine generator needs n >= 2 weights"));
        }
        if b.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(Error::parameter("affine generator needs positive weights"));
        }
        Ok(Affine { b })
    }
}

impl Generator for Affine {
    fn name(&self) -> String {
        let parts: Vec<String> = self.b.iter().map(|x| format!("{x}")).collect();
        format!("affine:{}", parts.join(","))
    }

    fn value(&self, r: &SimplexPoint) -> f64 {
        self.b
            .iter()
            .zip(r.coords())
            .map(|(b, x)| b * x)
            .sum::<f64>()
            .ln()
    }

    fn gradient(&self, r: &SimplexPoint) -> Vec<f64> {
        let dot: f64 = self.b.iter().zip(r.coords()).map(|(b, x)| b * x).sum();
        self.b.iter().map(|b| b / dot).collect()
    }

    fn hessian(&self, r: &SimplexPoint) -> Matrix {
        // ∇² log(b·r) = −ggᵀ; sharing the gradient code path makes the
        // cancellation in L(r) = −∇²φ − ∇φ∇φᵀ bitwise exact
        let g = self.gradient(r);
        Matrix::outer(&g, &g).scale(-1.0)
    }
}

/// Convex combination (1−t)φ_a + tφ_b, exponentially concave for t ∈ [0,1].
#[derive(Clone)]
pub struct Mix {
    t: f64,
    first: GeneratorRef,
    second: GeneratorRef,
}

impl Mix {
    pub fn new(t: f64, first: GeneratorRef, second: GeneratorRef) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::parameter(format!(
                "mix generator needs t in [0, 1], got {t}"
            )));
        }
        Ok(Mix { t, first, second })
    }
}

impl Generator for Mix {
    fn name(&self) -> String {
        format!("mix:{},{},{}", self.t, self.first.name(), self.second.name())
    }

    fn value(&self, r: &SimplexPoint) -> f64 {
        (1.0 - self.t) * self.first.value(r) + self.t * self.second.value(r)
    }

    fn gradient(&self, r: &SimplexPoint) -> Vec<f64> {
        self.first
            .gradient(r)
            .iter()
            .zip(self.second.gradient(r))
            .map(|(a, b)| (1.0 - self.t) * a + self.t * b)
            .collect()
    }

    fn hessian(&self, r: &SimplexPoint) -> Matrix {
        self.first
            .hessian(r)
            .scale(1.0 - self.t)
            .add(&self.second.hessian(r).scale(self.t))
            .expect("builtin hessian shapes agree")
    }
}

/// Coordinate-relabelled generator: the new coordinate i is the inner
/// generator's coordinate σ(i). Used by the chart-independence checks.
#[derive(Clone)]
pub struct Permuted {
    inner: GeneratorRef,
    sigma: Vec<usize>,
}

impl Permuted {
    pub fn new(inner: GeneratorRef, sigma: Vec<usize>) -> Result<Self> {
        let n = sigma.len();
        let mut seen = vec![false; n];
        for &s in &sigma {
            if s >= n || seen[s] {
                return Err(Error::parameter("sigma is not a permutation"));
            }
            seen[s] = true;
        }
        Ok(Permuted { inner, sigma })
    }

    fn scatter(&self, r: &SimplexPoint) -> SimplexPoint {
        let mut coords = vec![0.0; r.dim()];
        for (i, &s) in self.sigma.iter().enumerate() {
            coords[s] = r.coords()[i];
        }
        SimplexPoint::new(coords).expect("permutation preserves the simplex")
    }
}

impl Generator for Permuted {
    fn name(&self) -> String {
        format!("permuted:{}", self.inner.name())
    }

    fn value(&self, r: &SimplexPoint) -> f64 {
        self.inner.value(&self.scatter(r))
    }

    fn gradient(&self, r: &SimplexPoint) -> Vec<f64> {
        let g = self.inner.gradient(&self.scatter(r));
        self.sigma.iter().map(|&s| g[s]).collect()
    }

    fn hessian(&self, r: &SimplexPoint) -> Matrix {
        let h = self.inner.hessian(&self.scatter(r));
        Matrix::from_fn(r.dim(), r.dim(), |i, j| h.get(self.sigma[i], self.sigma[j]))
    }
}

/// The interpolant generator φ_t = (1−t)φ0 + tφ1.
pub fn time_slice(g1: &GeneratorRef, t: f64) -> Result<GeneratorRef> {
    Ok(Arc::new(Mix::new(t, Arc::new(GeometricMean), g1.clone())?))
}

/// Parse a generator spec: `phi0`, `power:0.5`, `affine:b1,b2,...`,
/// `mix:t,gA,gB`. For `mix`, the split between `gA` and `gB` is the first
/// comma position at which both halves parse.
pub fn parse_generator(spec: &str, n: usize) -> Result<GeneratorRef> {
    let spec = spec.trim();
    if spec == "phi0" {
        return Ok(Arc::new(GeometricMean));
    }
    if let Some(rest) = spec.strip_prefix("power:") {
        let lambda: f64 = rest
            .parse()
            .map_err(|_| Error::parameter(format!("bad power parameter '{rest}'")))?;
        return Ok(Arc::new(Power::new(lambda)?));
    }
    if let Some(rest) = spec.strip_prefix("affine:") {
        let b: Vec<f64> = rest
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::parameter(format!("bad affine weight '{s}'")))
            })
            .collect::<Result<_>>()?;
        if b.len() != n {
            return Err(Error::parameter(format!(
                "affine generator has {} weights but n = {n}",
                b.len()
            )));
        }
        return Ok(Arc::new(Affine::new(b)?));
    }
    if let Some(rest) = spec.strip_prefix("mix:") {
        let (t_str, tail) = rest
            .split_once(',')
            .ok_or_else(|| Error::parameter("mix needs t,gA,gB"))?;
        let t: f64 = t_str
            .trim()
            .parse()
            .map_err(|_| Error::parameter(format!("bad mix weight '{t_str}'")))?;
        let commas: Vec<usize> = tail
            .char_indices()
            .filter(|(_, c)| *c == ',')
            .map(|(i, _)| i)
            .collect();
        for &cut in &commas {
            let (a, b) = (&tail[..cut], &tail[cut + 1..]);
            if let (Ok(ga), Ok(gb)) = (parse_generator(a, n), parse_generator(b, n)) {
                return Ok(Arc::new(Mix::new(t, ga, gb)?));
            }
        }
        return Err(Error::parameter(format!("cannot split mix spec '{tail}'")));
    }
    Err(Error::parameter(format!("unknown generator '{spec}'")))
}

/// Portfolio weights: a point of the closed simplex (weights may touch 0).
#[derive(Debug, Clone)]
pub struct PortfolioWeights {
    weights: Vec<f64>,
}

impl PortfolioWeights {
    /// Wrap raw weights (callers guarantee nonnegativity and unit sum up to
    /// roundoff).
    pub fn from_weights(weights: Vec<f64>) -> Self {
        debug_assert!(weights.iter().all(|&w| w >= -1e-12));
        PortfolioWeights { weights }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn to_point(&self) -> Result<SimplexPoint> {
        SimplexPoint::new(self.weights.clone())
    }
}

/// πᵢ(r) = rᵢ (1 + ∂ᵢφ(r) − r·∇φ(r)); sums to one, clamped at zero when
/// roundoff dips below (weights legitimately live on the closed simplex).
pub fn portfolio_map(g: &dyn Generator, r: &SimplexPoint) -> PortfolioWeights {
    let grad = g.gradient(r);
    let coords = r.coords();
    let r_dot_grad: f64 = coords.iter().zip(&grad).map(|(x, d)| x * d).sum();
    let mut weights: Vec<f64> = coords
        .iter()
        .zip(&grad)
        .map(|(x, d)| x * (1.0 + d - r_dot_grad))
        .collect();
    for w in &mut weights {
        debug_assert!(*w >= -1e-12, "portfolio weight {w} below clamp window");
        if *w < 0.0 {
            *w = 0.0;
        }
    }
    let sum: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= sum;
    }
    PortfolioWeights { weights }
}

/// Deterministic transport T(p) = p ⊙ π(p⁻¹).
pub fn transport_map(g: &dyn Generator, p: &SimplexPoint) -> Result<SimplexPoint> {
    let r = simplex::invert(p);
    let pi = portfolio_map(g, &r);
    let lw: Vec<f64> = p
        .coords()
        .iter()
        .zip(pi.weights())
        .map(|(pc, w)| pc.ln() + w.ln())
        .collect();
    SimplexPoint::from_log_weights(&lw)
}

/// Same map through the weight-ratio identity qᵢ ∝ πᵢ(r)/rᵢ with r = p⁻¹.
pub fn transport_map_weight_ratio(g: &dyn Generator, p: &SimplexPoint) -> Result<SimplexPoint> {
    let r = simplex::invert(p);
    let pi = portfolio_map(g, &r);
    let lw: Vec<f64> = pi
        .weights()
        .iter()
        .zip(r.coords())
        .map(|(w, rc)| w.ln() - rc.ln())
        .collect();
    SimplexPoint::from_log_weights(&lw)
}

/// L-divergence D[r : r'] = log(1 + ∇φ(r')·(r − r')) − (φ(r) − φ(r')).
pub fn l_divergence(g: &dyn Generator, r: &SimplexPoint, r_prime: &SimplexPoint) -> Result<f64> {
    if r.dim() != r_prime.dim() {
        return Err(Error::dimension("l_divergence dimension mismatch"));
    }
    let grad = g.gradient(r_prime);
    let dot: f64 = grad
        .iter()
        .zip(r.coords().iter().zip(r_prime.coords()))
        .map(|(d, (a, b))| d * (a - b))
        .sum();
    if dot <= -1.0 {
        return Err(Error::domain(format!(
            "log argument 1 + ∇φ(r')·(r − r') = {} is nonpositive",
            1.0 + dot
        )));
    }
    let div = dot.ln_1p() - (g.value(r) - g.value(r_prime));
    debug_assert!(div > -1e-9, "L-divergence must be nonnegative, got {div}");
    Ok(div.max(0.0))
}

/// Portfolio form of the L-divergence:
/// log(Σᵢ πᵢ(r') rᵢ/r'ᵢ) − (φ(r) − φ(r')). Second code path for tests.
pub fn l_divergence_portfolio_form(
    g: &dyn Generator,
    r: &SimplexPoint,
    r_prime: &SimplexPoint,
) -> Result<f64> {
    if r.dim() != r_prime.dim() {
        return Err(Error::dimension("l_divergence dimension mismatch"));
    }
    let pi = portfolio_map(g, r_prime);
    let s: f64 = pi
        .weights()
        .iter()
        .zip(r.coords().iter().zip(r_prime.coords()))
        .map(|(w, (a, b))| w * a / b)
        .sum();
    Ok(s.ln() - (g.value(r) - g.value(r_prime)))
}

/// L(r) = −∇²φ(r) − ∇φ(r)∇φ(r)ᵀ as a full n × n matrix; exponential
/// concavity of φ is exactly its positive semidefiniteness on tangent
/// vectors.
pub fn l_matrix(g: &dyn Generator, r: &SimplexPoint) -> Matrix {
    let grad = g.gradient(r);
    g.hessian(r)
        .scale(-1.0)
        .sub(&Matrix::outer(&grad, &grad))
        .expect("shapes agree")
}

/// Gradient of φ̃(r̃) = φ(r̃, 1 − Σr̃) in the chart dropping the last
/// coordinate: ∂ᵢφ̃ = ∂ᵢφ − ∂ₙφ.
pub fn chart_gradient(g: &dyn Generator, r: &SimplexPoint) -> Vec<f64> {
    let grad = g.gradient(r);
    let n = r.dim();
    (0..n - 1).map(|i| grad[i] - grad[n - 1]).collect()
}

/// Hessian of φ̃ in the same chart: H̃ᵢⱼ = Hᵢⱼ − Hᵢₙ − Hₙⱼ + Hₙₙ.
pub fn chart_hessian(g: &dyn Generator, r: &SimplexPoint) -> Matrix {
    let h = g.hessian(r);
    let n = r.dim();
    Matrix::from_fn(n - 1, n - 1, |i, j| {
        h.get(i, j) - h.get(i, n - 1) - h.get(n - 1, j) + h.get(n - 1, n - 1)
    })
}

/// L̃(r) = −∇²φ̃ − ∇φ̃∇φ̃ᵀ on the (n−1)-chart; its determinant drives the
/// Monge–Ampère density.
pub fn l_matrix_chart(g: &dyn Generator, r: &SimplexPoint) -> Matrix {
    let grad = chart_gradient(g, r);
    chart_hessian(g, r)
        .scale(-1.0)
        .sub(&Matrix::outer(&grad, &grad))
        .expect("shapes agree")
}

/// Log of the multiplicative-cyclical-monotonicity product
/// Σₛ log(Σᵢ πᵢ(r(s)) rᵢ(s+1)/rᵢ(s)) over the closed cycle; ≥ 0 for any
/// exponentially concave generator.
pub fn mcm_check(g: &dyn Generator, cycle: &[SimplexPoint]) -> Result<f64> {
    if cycle.is_empty() {
        return Err(Error::domain("mcm_check needs a nonempty cycle"));
    }
    let n = cycle[0].dim();
    if cycle.iter().any(|p| p.dim() != n) {
        return Err(Error::dimension("cycle points have mixed dimensions"));
    }
    let m = cycle.len();
    let mut log_product = 0.0;
    for s in 0..m {
        let next = &cycle[(s + 1) % m];
        let pi = portfolio_map(g, &cycle[s]);
        let ratio: f64 = pi
            .weights()
            .iter()
            .zip(next.coords().iter().zip(cycle[s].coords()))
            .map(|(w, (a, b))| w * a / b)
            .sum();
        log_product += ratio.ln();
    }
    Ok(log_product)
}

/// Sampled regularity constants of a generator on a truncated simplex:
/// the bounds α, α′ of D[q':q] / ‖q'−q‖² over stratified pairs, plus the
/// analytic lower bound α = C₂/(M + C₃) built from the sampled curvature
/// constants −∇²φ ≤ C₁I, −∇²e^φ ≥ C₂I (on tangent vectors), ‖∇e^φ‖ ≤ C₃,
/// e^φ ≤ M.
#[derive(Debug, Clone)]
pub struct RegularityEstimate {
    pub alpha: f64,
    pub alpha_prime: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub m_bound: f64,
    pub alpha_analytic: f64,
    /// α ≈ 0: the λ_N policy of the mixture experiment must reject this
    /// generator.
    pub degenerate: bool,
}

/// The truncated simplex {p ∈ Δ_n : pᵢ ≥ ε}.
#[derive(Debug, Clone, Copy)]
pub struct TruncatedSimplex {
    pub n: usize,
    pub eps: f64,
}

impl TruncatedSimplex {
    pub fn new(n: usize, eps: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::dimension("simplex needs n >= 2"));
        }
        if !(eps > 0.0) || eps >= 1.0 / n as f64 {
            return Err(Error::parameter("truncation eps must lie in (0, 1/n)"));
        }
        Ok(TruncatedSimplex { n, eps })
    }

    pub fn contains(&self, p: &SimplexPoint) -> bool {
        p.dim() == self.n && p.coords().iter().all(|&x| x >= self.eps)
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> SimplexPoint {
        loop {
            let p = simplex::sample_uniform(self.n, rng);
            if self.contains(&p) {
                return p;
            }
        }
    }
}

pub fn estimate_regularity(
    g: &dyn Generator,
    domain: TruncatedSimplex,
    pair_budget: usize,
    seed: u64,
) -> Result<RegularityEstimate> {
    let streams = StreamFactory::new(seed).child("regularity");
    let mut rng = streams.stream("pairs", 0);
    let n = domain.n;

    // pair ratios D / dist², distances stratified log-uniformly in
    // [1e-3, diam]: the ratio degenerates at coincident pairs
    let mut alpha = f64::INFINITY;
    let mut alpha_prime: f64 = 0.0;
    let d_lo: f64 = 1e-3;
    let d_hi: f64 = 0.5;
    let mut accepted = 0usize;
    while accepted < pair_budget {
        let q = domain.sample(&mut rng);
        let u: f64 = rng.random();
        let dist = d_lo * (d_hi / d_lo).powf(u);
        let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        let mean = v.iter().sum::<f64>() / n as f64;
        for x in &mut v {
            *x -= mean;
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-12 {
            continue;
        }
        let coords: Vec<f64> = q
            .coords()
            .iter()
            .zip(&v)
            .map(|(x, d)| x + dist * d / norm)
            .collect();
        if coords.iter().any(|&x| x < domain.eps) {
            continue;
        }
        let q_prime = SimplexPoint::new(coords)?;
        let d2 = euclidean_distance(&q_prime, &q).powi(2);
        if d2 < 1e-12 {
            continue;
        }
        let ratio = l_divergence(g, &q_prime, &q)? / d2;
        alpha = alpha.min(ratio);
        alpha_prime = alpha_prime.max(ratio);
        accepted += 1;
    }

    // curvature constants for the analytic lower bound, on a fresh sample
    let mut rng2 = streams.stream("constants", 0);
    let mut c1: f64 = 0.0;
    let mut c2 = f64::INFINITY;
    let mut c3: f64 = 0.0;
    let mut m_bound: f64 = 0.0;
    for _ in 0..512 {
        let q = domain.sample(&mut rng2);
        let e_phi = g.value(&q).exp();
        let grad = g.gradient(&q);
        let hess = g.hessian(&q);
        let neg_hess_t = tangent_restrict(&hess.scale(-1.0))?;
        c1 = c1.max(*neg_hess_t.eigenvalues_symmetric()?.last().unwrap());
        // −∇²e^φ = −e^φ (∇²φ + ∇φ∇φᵀ) = e^φ L
        let neg_hess_exp = l_matrix(g, &q).scale(e_phi);
        c2 = c2.min(tangent_restrict(&neg_hess_exp)?.min_eigenvalue_symmetric()?);
        let grad_exp_norm: f64 = grad.iter().map(|d| (e_phi * d).powi(2)).sum::<f64>().sqrt();
        c3 = c3.max(grad_exp_norm);
        m_bound = m_bound.max(e_phi);
    }

    let degenerate = !(alpha > 1e-9);
    let alpha_analytic = if c2 > 0.0 { c2 / (m_bound + c3) } else { 0.0 };
    Ok(RegularityEstimate {
        alpha,
        alpha_prime,
        c1,
        c2: c2.max(0.0),
        c3,
        m_bound,
        alpha_analytic,
        degenerate,
    })
}
