//! The dynamic picture: measures on (0,1], the Lagrangian action, gamma
//! subordinators, Dirichlet-process bridges and path convergence.
//!
//! Probability measures on (0,1] project onto Δ_n through the masses of the
//! subintervals Eᵢ = ((i−1)/n, i/n]. A path specification f ∈ 𝓘_n (one
//! strictly increasing coordinate per subinterval, f(1) ∈ Δ_n) represents a
//! measure μ_f, is charged the action
//!
//! ```text
//! I(f) = H(Leb | μ_f) = −log n − (1/n) Σᵢ ∫₀¹ log ḟᵢ(s) ds,
//! ```
//!
//! and induces the simplex path q(t) = p ⊙ π(t) with π(t) ∝ (1−t)/n + fᵢ(t).
//! The infimum of I over {f(1) = π} is the discrete entropy H(ē | π) =
//! c(p, q), attained by f(t) = tπ — the displacement interpolation. The
//! −log n constant comes from the density of μ_f (which is n·ḟᵢ on Eᵢ) and
//! makes that equality exact.
//!
//! The stochastic counterpart replaces the deterministic speed by a gamma
//! subordinator: the Dirichlet process D^λ(t) = γ(tλ)/γ(λ), whose bridge
//! with prescribed Eᵢ-masses π factors into n independent normalized
//! subordinators fᵢ(t) = (γᵢ(tλ)/γᵢ(λ)) πᵢ. As λ → ∞ the normalized paths
//! flatten to t and the random paths collapse onto the optimal
//! interpolation.

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::rng::{parallel_map_indexed, StreamFactory};
use crate::simplex::{self, euclidean_distance, relative_entropy, SimplexPoint};

/// Grid representation of f ∈ 𝓘_n: values[i][k] = fᵢ(k/G), strictly
/// increasing in k with fᵢ(0) = 0, and Σᵢ fᵢ(1) = 1.
#[derive(Debug, Clone)]
pub struct MonotonePath {
    values: Vec<Vec<f64>>,
}

impl MonotonePath {
    pub fn new(values: Vec<Vec<f64>>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::dimension("path needs n >= 2 coordinates"));
        }
        let g = values[0].len();
        if g < 2 || values.iter().any(|f| f.len() != g) {
            return Err(Error::dimension("path coordinates need a common grid"));
        }
        for f in &values {
            if f[0].abs() > 1e-15 {
                return Err(Error::domain("path must start at zero"));
            }
            if f.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::domain("path increments must be strictly positive"));
            }
        }
        let total: f64 = values.iter().map(|f| f[f.len() - 1]).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!(
                "path endpoint must lie on the simplex, total {total}"
            )));
        }
        Ok(MonotonePath { values })
    }

    /// The constant-speed representative f(t) = tπ.
    pub fn linear(pi: &SimplexPoint, grid: usize) -> Self {
        let values = pi
            .coords()
            .iter()
            .map(|&w| (0..=grid).map(|k| w * k as f64 / grid as f64).collect())
            .collect();
        MonotonePath { values }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn grid(&self) -> usize {
        self.values[0].len() - 1
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    /// Endpoint masses fᵢ(1).
    pub fn endpoint(&self) -> Vec<f64> {
        self.values.iter().map(|f| f[f.len() - 1]).collect()
    }
}

/// Projection of a measure on (0,1] onto the simplex: masses of the
/// subintervals Eᵢ.
#[derive(Debug, Clone)]
pub struct MeasureProjection {
    pub masses: Vec<f64>,
    /// False when some Eᵢ carries no mass (the projection leaves the open
    /// simplex).
    pub interior: bool,
}

impl MeasureProjection {
    pub fn point(&self) -> Result<SimplexPoint> {
        if !self.interior {
            return Err(Error::domain(
                "projection touches the simplex boundary (empty subinterval)",
            ));
        }
        SimplexPoint::new(self.masses.clone())
    }
}

/// Project a grid distribution function (values at j/M, j = 0..=M, M a
/// multiple of n) onto Δ_n via μ(Eᵢ) = F(i/n) − F((i−1)/n).
pub fn project_measure(cdf: &[f64], n: usize) -> Result<MeasureProjection> {
    if n < 2 {
        return Err(Error::dimension("projection needs n >= 2"));
    }
    let m = cdf.len().saturating_sub(1);
    if m == 0 || !m.is_multiple_of(n) {
        return Err(Error::dimension(
            "grid size must be a positive multiple of n",
        ));
    }
    if cdf[0].abs() > 1e-12 {
        return Err(Error::domain("measure has an atom at zero"));
    }
    if (cdf[m] - 1.0).abs() > 1e-9 {
        return Err(Error::domain("distribution function must end at one"));
    }
    if cdf.windows(2).any(|w| w[1] < w[0] - 1e-12) {
        return Err(Error::domain("distribution function must be nondecreasing"));
    }
    let step = m / n;
    let masses: Vec<f64> = (0..n)
        .map(|i| (cdf[(i + 1) * step] - cdf[i * step]).max(0.0))
        .collect();
    let interior = masses.iter().all(|&x| x > 0.0);
    Ok(MeasureProjection { masses, interior })
}

/// Lagrangian action I(f) = H(Leb | μ_f) on the grid: −log n − (1/n) Σᵢ
/// mean of log(G·Δfᵢ). Nonpositive increments charge +∞.
pub fn lagrangian_action(path: &MonotonePath) -> f64 {
    let n = path.dim() as f64;
    let g = path.grid() as f64;
    let mut acc = 0.0;
    for f in path.values() {
        for w in f.windows(2) {
            let increment = w[1] - w[0];
            if increment <= 0.0 {
                return f64::INFINITY;
            }
            acc += (g * increment).ln();
        }
    }
    -n.ln() - acc / (n * g)
}

/// A particle trajectory: the weight curve f (one coordinate per subinterval) and the
/// induced simplex path q(t) = p ⊙ normalize((1−t)ē + f(t)).
#[derive(Debug, Clone)]
pub struct BridgePath {
    pub particle: usize,
    pub lambda: f64,
    pub times: Vec<f64>,
    /// fᵢ(t_k) per grid time (row) and coordinate (column).
    pub weight_curve: Vec<Vec<f64>>,
    pub points: Vec<SimplexPoint>,
}

/// Build the simplex path induced by a weight curve with f(1) = q ⊙ p⁻¹.
pub fn path_from_weight_curve(
    particle: usize,
    lambda: f64,
    p: &SimplexPoint,
    times: &[f64],
    weight_curve: Vec<Vec<f64>>,
) -> Result<BridgePath> {
    if times.len() != weight_curve.len() || times.is_empty() {
        return Err(Error::dimension("one weight row per grid time"));
    }
    let n = p.dim();
    let points: Vec<SimplexPoint> = times
        .iter()
        .zip(&weight_curve)
        .map(|(&t, f)| {
            if f.len() != n {
                return Err(Error::dimension("weight row dimension"));
            }
            let mix: Vec<f64> = f.iter().map(|&fi| (1.0 - t) / n as f64 + fi).collect();
            let pi_t = SimplexPoint::new(mix)?;
            simplex::odot(p, &pi_t)
        })
        .collect::<Result<_>>()?;
    Ok(BridgePath {
        particle,
        lambda,
        times: times.to_vec(),
        weight_curve,
        points,
    })
}

fn uniform_times(grid: usize) -> Vec<f64> {
    (0..=grid).map(|k| k as f64 / grid as f64).collect()
}

/// The unique cost-minimizing interpolation between p and q:
/// π(t) = (1−t)ē + t(q ⊙ p⁻¹), q(t) = p ⊙ π(t).
pub fn optimal_path(p: &SimplexPoint, q: &SimplexPoint, grid: usize) -> Result<BridgePath> {
    if p.dim() != q.dim() {
        return Err(Error::dimension("endpoint dimensions differ"));
    }
    if grid < 1 {
        return Err(Error::parameter("grid needs at least one step"));
    }
    let pi = simplex::odot(q, &simplex::invert(p))?;
    let times = uniform_times(grid);
    let curve: Vec<Vec<f64>> = times
        .iter()
        .map(|&t| pi.coords().iter().map(|&w| t * w).collect())
        .collect();
    path_from_weight_curve(0, f64::INFINITY, p, &times, curve)
}

/// Gamma subordinator at grid times: γ(t_k λ), independent
/// Gamma(λ Δt, 1) increments, γ(0) = 0.
pub fn sample_gamma_subordinator(
    lambda_total: f64,
    grid: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    if !(lambda_total > 0.0) {
        return Err(Error::parameter("subordinator needs lambda > 0"));
    }
    if grid < 1 {
        return Err(Error::parameter("grid needs at least one step"));
    }
    let shape = lambda_total / grid as f64;
    let gamma = Gamma::new(shape, 1.0).map_err(|e| Error::parameter(format!("gamma: {e}")))?;
    let mut path = Vec::with_capacity(grid + 1);
    let mut acc = 0.0;
    path.push(0.0);
    for _ in 0..grid {
        acc += gamma.sample(rng);
        path.push(acc);
    }
    Ok(path)
}

/// Dirichlet process distribution function D^λ(t) = γ(tλ)/γ(λ) at grid
/// times; D^λ(1) = 1 exactly.
pub fn sample_dirichlet_process(
    lambda: f64,
    grid: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    let gamma_path = sample_gamma_subordinator(lambda, grid, rng)?;
    let total = gamma_path[grid];
    if !(total > 0.0) {
        return Err(Error::numerical("gamma subordinator underflowed to zero"));
    }
    Ok(gamma_path.into_iter().map(|g| g / total).collect())
}

/// Conditional bridge between p and q at noise level λ: n independent
/// subordinators give fᵢ(t) = (γᵢ(tλ)/γᵢ(λ)) πᵢ with π = q ⊙ p⁻¹; endpoints
/// are exact.
pub fn sample_conditional_bridge(
    p: &SimplexPoint,
    q: &SimplexPoint,
    lambda: f64,
    grid: usize,
    rng: &mut ChaCha8Rng,
) -> Result<BridgePath> {
    if p.dim() != q.dim() {
        return Err(Error::dimension("endpoint dimensions differ"));
    }
    let n = p.dim();
    let pi = simplex::odot(q, &simplex::invert(p))?;
    let normalized: Vec<Vec<f64>> = (0..n)
        .map(|_| sample_dirichlet_process(lambda, grid, rng))
        .collect::<Result<_>>()?;
    let times = uniform_times(grid);
    let curve: Vec<Vec<f64>> = (0..=grid)
        .map(|k| {
            (0..n)
                .map(|i| normalized[i][k] * pi.coords()[i])
                .collect()
        })
        .collect();
    path_from_weight_curve(0, lambda, p, &times, curve)
}

#[derive(Debug, Clone)]
pub struct PathConvergenceRecord {
    pub lambda: f64,
    pub seed: u64,
    /// Mean over particles of sup_{t,i} |fᵢ(t)/πᵢ − t|.
    pub sup_deviation: f64,
    /// Mean over particles of sup_t ‖q_sim(t) − q_opt(t)‖.
    pub mean_path_dist: f64,
}

/// Path convergence of conditional bridges to the optimal interpolation.
///
/// For each λ and seed, every coupled pair (p, q) gets one bridge; the
/// sup-deviation statistic shrinks like the subordinator's law of large
/// numbers and the simplex paths collapse onto [`optimal_path`].
pub fn path_convergence_experiment(
    pairs: &[(SimplexPoint, SimplexPoint)],
    lambdas: &[f64],
    grid: usize,
    seeds: usize,
    master_seed: u64,
    threads: usize,
) -> Result<Vec<PathConvergenceRecord>> {
    if pairs.is_empty() {
        return Err(Error::dimension("experiment needs coupled pairs"));
    }
    let optimal: Vec<BridgePath> = pairs
        .iter()
        .map(|(p, q)| optimal_path(p, q, grid))
        .collect::<Result<_>>()?;
    let streams = StreamFactory::new(master_seed).child("path-convergence");
    let jobs: Vec<(f64, u64)> = lambdas
        .iter()
        .flat_map(|&l| (0..seeds as u64).map(move |s| (l, s)))
        .collect();
    let run_one = |idx: usize| -> Result<PathConvergenceRecord> {
        let (lambda, seed) = jobs[idx];
        let mut rng = streams.stream("replica", (idx as u64) << 20 | seed);
        let mut sup_dev = 0.0;
        let mut path_dist = 0.0;
        for (j, (p, q)) in pairs.iter().enumerate() {
            let bridge = sample_conditional_bridge(p, q, lambda, grid, &mut rng)?;
            let pi = simplex::odot(q, &simplex::invert(p))?;
            let mut dev: f64 = 0.0;
            for (k, t) in bridge.times.iter().enumerate() {
                for i in 0..p.dim() {
                    dev = dev.max((bridge.weight_curve[k][i] / pi.coords()[i] - t).abs());
                }
            }
            sup_dev += dev;
            let mut dist: f64 = 0.0;
            for (sim, opt) in bridge.points.iter().zip(&optimal[j].points) {
                dist = dist.max(euclidean_distance(sim, opt));
            }
            path_dist += dist;
        }
        Ok(PathConvergenceRecord {
            lambda,
            seed,
            sup_deviation: sup_dev / pairs.len() as f64,
            mean_path_dist: path_dist / pairs.len() as f64,
        })
    };
    parallel_map_indexed(jobs.len(), threads, run_one)
        .into_iter()
        .collect()
}

#[derive(Debug, Clone)]
pub struct EntropyRestrictionReport {
    /// H(ē | π), the analytic infimum over the constraint set.
    pub discrete_entropy: f64,
    /// Action of each candidate, in input order.
    pub actions: Vec<f64>,
}

/// Check H(Leb | μ) ≥ H(ē | π) for grid measures with μ(Eᵢ) = πᵢ.
///
/// Candidates whose endpoint masses do not match π are rejected.
pub fn entropy_restriction_check(
    pi: &SimplexPoint,
    candidates: &[MonotonePath],
) -> Result<EntropyRestrictionReport> {
    let e = SimplexPoint::barycenter(pi.dim());
    let h_pi = relative_entropy(&e, pi)?;
    let mut actions = Vec::with_capacity(candidates.len());
    for path in candidates {
        if path.dim() != pi.dim() {
            return Err(Error::dimension("candidate dimension vs pi"));
        }
        let endpoint = path.endpoint();
        for (fe, &w) in endpoint.iter().zip(pi.coords()) {
            if (fe - w).abs() > 1e-9 {
                return Err(Error::domain(format!(
                    "candidate violates the constraint mu(E_i) = pi_i: {fe} vs {w}"
                )));
            }
        }
        let action = lagrangian_action(path);
        // grid discretization can only lose O(1/G) against the continuum inf
        let slack = 1e-9 + 4.0 / path.grid() as f64;
        if action < h_pi - slack {
            return Err(Error::numerical(format!(
                "action {action} fell below the discrete entropy {h_pi}"
            )));
        }
        actions.push(action);
    }
    Ok(EntropyRestrictionReport {
        discrete_entropy: h_pi,
        actions,
    })
}
