//! Computational geometry of the transport: coordinate maps, Jacobian
//! determinant identities, the Monge–Ampère density and the
//! entropy-convexity experiment.
//!
//! All determinants live on the (n−1)-chart that drops the last coordinate
//! (a chart-independence test permutes which coordinate is dropped). The
//! transport factors as p ↦ r = p⁻¹ ↦ u ↦ q with
//!
//! ```text
//! u = 1 + ∇φ̃_t(r̃) / (1 − r̃ᵀ∇φ̃_t(r̃)),   qᵢ = uᵢ / (1 + Σⱼ uⱼ),
//! ```
//!
//! and the middle factor carries all the curvature:
//! |det J_t(r)| = (r_nⁿ/π_nⁿ) det(L̃_t(r)). Chaining the three factors gives
//! the Monge–Ampère update for densities relative to μ₀,
//!
//! ```text
//! ρ_t(q) = ρ₀(p) · (π₁⋯π_n) / det(L̃_t(r)) · 1/(r₁²⋯r_n²),
//! ```
//!
//! which in turn makes Ent_{μ₀}(P_t) + n𝐂(P₀, P_t) equal, per sample, to a
//! constant minus log det L̃_t(r): convex in t because t ↦ L̃_t(r) is concave
//! in the Löwner order and −log det is convex and order-reversing.

use std::sync::Arc;

use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::interpolation::{portfolio_at, second_differences, transport_at};
use crate::linalg::Matrix;
use crate::portfolio::{chart_gradient, l_matrix_chart, time_slice, Generator, GeneratorRef};
use crate::rng::StreamFactory;
use crate::simplex::{self, relative_entropy, SimplexPoint};
use crate::special::ln_gamma;

/// A source law P₀ given by its log-density with respect to μ₀ and a
/// sampler consistent with it.
pub trait DensityModel: Send + Sync {
    fn name(&self) -> String;
    fn dim(&self) -> usize;
    fn log_density_mu0(&self, p: &SimplexPoint) -> f64;
    fn sample(&self, rng: &mut ChaCha8Rng) -> SimplexPoint;
}

pub type DensityModelRef = Arc<dyn DensityModel>;

/// Uniform law on Δ_n: ρ₀(p) = (n−1)! · p₁⋯p_n relative to μ₀.
#[derive(Debug, Clone, Copy)]
pub struct UniformModel {
    n: usize,
}

impl UniformModel {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::dimension("model needs n >= 2"));
        }
        Ok(UniformModel { n })
    }
}

impl DensityModel for UniformModel {
    fn name(&self) -> String {
        "uniform".to_string()
    }

    fn dim(&self) -> usize {
        self.n
    }

    fn log_density_mu0(&self, p: &SimplexPoint) -> f64 {
        ln_gamma(self.n as f64) + p.coords().iter().map(|x| x.ln()).sum::<f64>()
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> SimplexPoint {
        simplex::sample_uniform(self.n, rng)
    }
}

/// Uniform law restricted to {p : pᵢ ≥ ε}; the truncated region is a scaled
/// simplex, so the normalizer (1 − nε)^{n−1} is exact.
#[derive(Debug, Clone, Copy)]
pub struct TruncatedUniformModel {
    n: usize,
    eps: f64,
}

impl TruncatedUniformModel {
    pub fn new(n: usize, eps: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::dimension("model needs n >= 2"));
        }
        if !(eps > 0.0) || eps >= 1.0 / n as f64 {
            return Err(Error::parameter("truncation eps must lie in (0, 1/n)"));
        }
        Ok(TruncatedUniformModel { n, eps })
    }
}

impl DensityModel for TruncatedUniformModel {
    fn name(&self) -> String {
        format!("uniform:{}", self.eps)
    }

    fn dim(&self) -> usize {
        self.n
    }

    fn log_density_mu0(&self, p: &SimplexPoint) -> f64 {
        let scale = 1.0 - self.n as f64 * self.eps;
        ln_gamma(self.n as f64) - (self.n as f64 - 1.0) * scale.ln()
            + p.coords().iter().map(|x| x.ln()).sum::<f64>()
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> SimplexPoint {
        loop {
            let p = simplex::sample_uniform(self.n, rng);
            if p.coords().iter().all(|&x| x >= self.eps) {
                return p;
            }
        }
    }
}

/// Dirichlet(α) with αᵢ ≥ 1: ρ₀(p) = Π pᵢ^{αᵢ} / B(α) relative to μ₀.
#[derive(Debug, Clone)]
pub struct DirichletModel {
    alpha: Vec<f64>,
    log_beta: f64,
}

impl DirichletModel {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.len() < 2 {
            return Err(Error::dimension("model needs n >= 2"));
        }
        if alpha.iter().any(|&a| !(a >= 1.0) || !a.is_finite()) {
            return Err(Error::parameter(
                "dirichlet model needs alpha_i >= 1 (bounded density)",
            ));
        }
        let log_beta =
            alpha.iter().map(|&a| ln_gamma(a)).sum::<f64>() - ln_gamma(alpha.iter().sum());
        Ok(DirichletModel { alpha, log_beta })
    }
}

impl DensityModel for DirichletModel {
    fn name(&self) -> String {
        let parts: Vec<String> = self.alpha.iter().map(|a| format!("{a}")).collect();
        format!("dirichlet:{}", parts.join(","))
    }

    fn dim(&self) -> usize {
        self.alpha.len()
    }

    fn log_density_mu0(&self, p: &SimplexPoint) -> f64 {
        self.alpha
            .iter()
            .zip(p.coords())
            .map(|(a, x)| a * x.ln())
            .sum::<f64>()
            - self.log_beta
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> SimplexPoint {
        simplex::sample_dirichlet(&self.alpha, rng).expect("valid alphas")
    }
}

/// Parse a model spec: `uniform`, `uniform:0.02`, `dirichlet:a1,...,an`.
pub fn parse_model(spec: &str, n: usize) -> Result<DensityModelRef> {
    let spec = spec.trim();
    if spec == "uniform" {
        return Ok(Arc::new(UniformModel::new(n)?));
    }
    if let Some(rest) = spec.strip_prefix("uniform:") {
        let eps: f64 = rest
            .parse()
            .map_err(|_| Error::parameter(format!("bad truncation '{rest}'")))?;
        return Ok(Arc::new(TruncatedUniformModel::new(n, eps)?));
    }
    if let Some(rest) = spec.strip_prefix("dirichlet:") {
        let alpha: Vec<f64> = rest
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::parameter(format!("bad alpha '{s}'")))
            })
            .collect::<Result<_>>()?;
        if alpha.len() != n {
            return Err(Error::parameter(format!(
                "dirichlet model has {} parameters but n = {n}",
                alpha.len()
            )));
        }
        return Ok(Arc::new(DirichletModel::new(alpha)?));
    }
    Err(Error::parameter(format!("unknown density model '{spec}'")))
}

/// The chart map r̃ ↦ u of the transport at the given interpolant.
pub fn u_map(g_t: &dyn Generator, r: &SimplexPoint) -> Result<Vec<f64>> {
    let grad = chart_gradient(g_t, r);
    let r_chart = &r.coords()[..r.dim() - 1];
    let denom = 1.0 - r_chart.iter().zip(&grad).map(|(x, d)| x * d).sum::<f64>();
    if denom <= 0.0 {
        return Err(Error::numerical(format!(
            "u map denominator {denom} is nonpositive"
        )));
    }
    Ok(grad.iter().map(|d| 1.0 + d / denom).collect())
}

/// The closing chart map u ↦ q: qᵢ = uᵢ/(1 + Σu), q_n = 1/(1 + Σu).
pub fn q_of_u(u: &[f64]) -> Result<SimplexPoint> {
    if u.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::domain("u must be strictly positive"));
    }
    let s = 1.0 + u.iter().sum::<f64>();
    let mut coords: Vec<f64> = u.iter().map(|x| x / s).collect();
    coords.push(1.0 / s);
    SimplexPoint::new(coords)
}

/// |det J_t(r)| of r̃ ↦ u via the identity (r_nⁿ/π_nⁿ) det(L̃_t(r)).
pub fn jacobian_det_u(g_t: &dyn Generator, r: &SimplexPoint) -> Result<f64> {
    let n = r.dim();
    let lt = l_matrix_chart(g_t, r);
    let det = lt.det()?;
    if det <= 1e-300 {
        return Err(Error::numerical(format!(
            "singular interpolant curvature: det(L~) = {det}"
        )));
    }
    let pi = crate::portfolio::portfolio_map(g_t, r);
    let pi_n = pi.weights()[n - 1];
    if pi_n <= 0.0 {
        return Err(Error::numerical("portfolio weight vanished in the chart"));
    }
    let ratio = r.coords()[n - 1] / pi_n;
    Ok(ratio.powi(n as i32) * det)
}

/// |∂(r₁..r_{n−1})/∂(p₁..p_{n−1})| for the inversion map: (r₁⋯r_n)/(p₁⋯p_n).
pub fn inversion_jacobian(p: &SimplexPoint) -> f64 {
    let r = simplex::invert(p);
    (r.coords().iter().map(|x| x.ln()).sum::<f64>()
        - p.coords().iter().map(|x| x.ln()).sum::<f64>())
    .exp()
}

/// The Monge–Ampère density update along the interpolation: returns
/// q = T_t(p) and log ρ_t(q) = log ρ₀(p) + Σ log πᵢ − log det(L̃_t(r)) −
/// 2 Σ log rᵢ with r = p⁻¹, π = π_t(r).
pub fn monge_ampere_log_density(
    model: &dyn DensityModel,
    g1: &GeneratorRef,
    t: f64,
    p: &SimplexPoint,
) -> Result<(SimplexPoint, f64)> {
    if p.dim() != model.dim() {
        return Err(Error::dimension("model dimension vs point"));
    }
    let q = transport_at(g1.as_ref(), t, p)?;
    let r = simplex::invert(p);
    let pi = portfolio_at(g1.as_ref(), t, &r);
    let g_t = time_slice(g1, t)?;
    let lt = l_matrix_chart(g_t.as_ref(), &r);
    let det = lt.det()?;
    if det <= 1e-300 {
        return Err(Error::numerical(format!(
            "singular interpolant curvature: det(L~) = {det}"
        )));
    }
    let log_rho = model.log_density_mu0(p)
        + pi.weights().iter().map(|w| w.ln()).sum::<f64>()
        - det.ln()
        - 2.0 * r.coords().iter().map(|x| x.ln()).sum::<f64>();
    Ok((q, log_rho))
}

/// Monte Carlo estimate of Ent_{μ₀}(P_t) through the pushforward identity
/// Ent = ∫ log ρ_t(T_t(p)) dP₀(p).
pub fn entropy_of_pushforward(
    model: &dyn DensityModel,
    g1: &GeneratorRef,
    t: f64,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if samples == 0 {
        return Err(Error::parameter("entropy estimate needs samples"));
    }
    let mut rng = StreamFactory::new(seed).stream("entropy", 0);
    let mut acc = 0.0;
    for _ in 0..samples {
        let p = model.sample(&mut rng);
        let (_, log_rho) = monge_ampere_log_density(model, g1, t, &p)?;
        acc += log_rho;
    }
    Ok(acc / samples as f64)
}

/// Result of the entropy-convexity experiment.
#[derive(Debug, Clone)]
pub struct EntropyConvexityReport {
    pub t_grid: Vec<f64>,
    /// Direct curve Ent_{μ₀}(P_t) + n 𝐂(P₀, P_t), common random numbers.
    pub curve_a: Vec<f64>,
    /// Proof surrogate −(1/M) Σ log det L̃_t(r_m) (constant K dropped).
    pub curve_b: Vec<f64>,
    pub second_differences_b: Vec<f64>,
    /// max − min of curve_a − curve_b over the grid.
    pub diff_range: f64,
    /// Monte Carlo standard error of the difference estimator.
    pub diff_se: f64,
    pub convex_ok: bool,
    pub diff_ok: bool,
}

/// Entropy convexity along the interpolation: the per-sample surrogate
/// −log det L̃_t is exactly convex in t, and the direct curve differs from
/// it by a t-independent constant.
pub fn entropy_convexity_experiment(
    model: &dyn DensityModel,
    g1: &GeneratorRef,
    t_grid: &[f64],
    samples: usize,
    seed: u64,
) -> Result<EntropyConvexityReport> {
    if t_grid.len() < 3 {
        return Err(Error::parameter("t grid needs at least three points"));
    }
    if samples == 0 {
        return Err(Error::parameter("experiment needs samples"));
    }
    let n = model.dim();
    let e = SimplexPoint::barycenter(n);
    let mut rng = StreamFactory::new(seed).stream("entropy-convexity", 0);
    let points: Vec<SimplexPoint> = (0..samples).map(|_| model.sample(&mut rng)).collect();
    let inverted: Vec<SimplexPoint> = points.iter().map(simplex::invert).collect();

    let mut curve_a = Vec::with_capacity(t_grid.len());
    let mut curve_b = Vec::with_capacity(t_grid.len());
    let mut diffs: Vec<f64> = Vec::with_capacity(t_grid.len());
    let mut diff_samples_se = 0.0;
    for (ti, &t) in t_grid.iter().enumerate() {
        let g_t = time_slice(g1, t)?;
        let mut ent_acc = 0.0;
        let mut cost_acc = 0.0;
        let mut logdet_acc = 0.0;
        let mut per_sample_diff: Vec<f64> = Vec::with_capacity(samples);
        for (p, r) in points.iter().zip(&inverted) {
            let pi = portfolio_at(g1.as_ref(), t, r);
            let lt = l_matrix_chart(g_t.as_ref(), r);
            let det = lt.det()?;
            if det <= 1e-300 {
                return Err(Error::numerical(
                    "interpolant curvature not strictly positive definite",
                ));
            }
            let log_rho0 = model.log_density_mu0(p);
            let sum_log_pi: f64 = pi.weights().iter().map(|w| w.ln()).sum();
            let sum_log_r: f64 = r.coords().iter().map(|x| x.ln()).sum();
            let log_rho_t = log_rho0 + sum_log_pi - det.ln() - 2.0 * sum_log_r;
            let h = relative_entropy(&e, &pi.to_point()?)?;
            ent_acc += log_rho_t;
            cost_acc += h;
            logdet_acc += det.ln();
            per_sample_diff.push(log_rho0 + sum_log_pi - 2.0 * sum_log_r + n as f64 * h);
        }
        let m = samples as f64;
        curve_a.push(ent_acc / m + n as f64 * cost_acc / m);
        curve_b.push(-logdet_acc / m);
        diffs.push(curve_a[ti] - curve_b[ti]);
        if ti == 0 {
            let mean = per_sample_diff.iter().sum::<f64>() / m;
            let var = per_sample_diff
                .iter()
                .map(|d| (d - mean) * (d - mean))
                .sum::<f64>()
                / (m - 1.0);
            diff_samples_se = (var / m).sqrt();
        }
    }
    let d2 = second_differences(t_grid, &curve_b);
    let convex_ok = d2.iter().all(|&d| d >= -1e-10);
    let diff_range = diffs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - diffs.iter().cloned().fold(f64::INFINITY, f64::min);
    let diff_ok = diff_range <= 5.0 * diff_samples_se.max(1e-12);
    Ok(EntropyConvexityReport {
        t_grid: t_grid.to_vec(),
        curve_a,
        curve_b,
        second_differences_b: d2,
        diff_range,
        diff_se: diff_samples_se,
        convex_ok,
        diff_ok,
    })
}

/// Löwner-concavity residual of t ↦ L̃_t at r:
/// L̃_t − [(1−α)L̃_{t₁} + αL̃_{t₂}] for t = (1−α)t₁ + αt₂, together with its
/// rank-one closed form α(1−α)(∇φ̃_{t₁} − ∇φ̃_{t₂})(∇φ̃_{t₁} − ∇φ̃_{t₂})ᵀ.
#[derive(Debug, Clone)]
pub struct LownerReport {
    pub residual: Matrix,
    pub expected: Matrix,
    pub max_abs_error: f64,
    pub min_eigenvalue: f64,
    /// Magnitude of the L̃ matrices entering the difference; float noise in
    /// the residual is proportional to it.
    pub scale: f64,
}

pub fn lowner_concavity_identity(
    g1: &GeneratorRef,
    r: &SimplexPoint,
    t1: f64,
    t2: f64,
    alpha: f64,
) -> Result<LownerReport> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::parameter("alpha must lie in [0, 1]"));
    }
    let t = (1.0 - alpha) * t1 + alpha * t2;
    let g_t = time_slice(g1, t)?;
    let g_t1 = time_slice(g1, t1)?;
    let g_t2 = time_slice(g1, t2)?;
    let lt = l_matrix_chart(g_t.as_ref(), r);
    let l1 = l_matrix_chart(g_t1.as_ref(), r);
    let l2 = l_matrix_chart(g_t2.as_ref(), r);
    let scale = lt.max_abs().max(l1.max_abs()).max(l2.max_abs());
    let residual = lt.sub(&l1.scale(1.0 - alpha).add(&l2.scale(alpha))?)?;
    let grad_diff: Vec<f64> = chart_gradient(g_t1.as_ref(), r)
        .iter()
        .zip(chart_gradient(g_t2.as_ref(), r))
        .map(|(a, b)| a - b)
        .collect();
    let expected = Matrix::outer(&grad_diff, &grad_diff).scale(alpha * (1.0 - alpha));
    let max_abs_error = residual.sub(&expected)?.max_abs();
    let min_eigenvalue = residual.min_eigenvalue_symmetric()?;
    Ok(LownerReport {
        residual,
        expected,
        max_abs_error,
        min_eigenvalue,
        scale,
    })
}
