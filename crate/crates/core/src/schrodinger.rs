//! The multiplicative Schrödinger machinery.
//!
//! Multiplying a point p ∈ Δ_n coordinatewise by independent Gamma(αᵢ)
//! noise and renormalizing gives Q = p ⊙ D with D Dirichlet(α); its density
//! f(q | p) is explicit, and with the symmetric choice αᵢ = λ/n the scaled
//! log-density −(1/λ) log f_λ(q|p) converges to the transport cost c(p, q)
//! as λ → ∞. Conditioning N independent such moves on hitting a prescribed
//! empirical target measure produces the permutation mixture
//!
//! ```text
//! M_N = Σ_σ ν_N^σ M_N^σ,   ν_N^σ ∝ Π_j f_λ(q(σ(j)) | p(j)),
//! ```
//!
//! the discrete Schrödinger bridge. Only the reduced log-weight matrix
//! A[j][k] = −λ log Σᵢ qᵢ(k)/pᵢ(j) matters: the remaining density factors
//! are permutation-invariant and cancel between numerator and denominator.
//! Exact weights are enumerated for N ≤ 10; pair marginals for N ≤ 16 come
//! from Ryser permanents of the cofactors. Above those caps the builder
//! refuses rather than approximate.

use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::ot::{self, l2_matching_cost};
use crate::portfolio::{estimate_regularity, transport_map, Generator, TruncatedSimplex};
use crate::rng::{parallel_map_indexed, StreamFactory};
use crate::simplex::{self, SimplexPoint};
use crate::special::{ln_gamma, log_sum_exp};

/// Gamma multiplication kernel with shape parameters α₁..α_n > 0.
#[derive(Debug, Clone)]
pub struct GammaKernel {
    alpha: Vec<f64>,
}

impl GammaKernel {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.len() < 2 {
            return Err(Error::dimension("kernel needs n >= 2"));
        }
        if alpha.iter().any(|&a| !(a > 0.0) || !a.is_finite()) {
            return Err(Error::parameter("kernel shapes must be positive"));
        }
        Ok(GammaKernel { alpha })
    }

    /// Symmetric kernel αᵢ = λ/n.
    pub fn symmetric(lambda: f64, n: usize) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::parameter("lambda must be positive"));
        }
        GammaKernel::new(vec![lambda / n as f64; n])
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    /// One draw of Q = p ⊙ D with D ~ Dirichlet(α).
    pub fn sample(&self, p: &SimplexPoint, rng: &mut ChaCha8Rng) -> Result<SimplexPoint> {
        if p.dim() != self.dim() {
            return Err(Error::dimension("kernel dimension vs point"));
        }
        let d = simplex::sample_dirichlet(&self.alpha, rng)?;
        simplex::odot(p, &d)
    }
}

/// log f(q | p) with respect to Lebesgue measure on the chart 𝒟_{n−1}.
pub fn log_density_general(
    kernel: &GammaKernel,
    p: &SimplexPoint,
    q: &SimplexPoint,
) -> Result<f64> {
    if p.dim() != kernel.dim() || q.dim() != kernel.dim() {
        return Err(Error::dimension("density dimension mismatch"));
    }
    let alpha = kernel.alpha();
    let alpha_sum: f64 = alpha.iter().sum();
    let log_ratios: Vec<f64> = q
        .coords()
        .iter()
        .zip(p.coords())
        .map(|(qi, pi)| qi.ln() - pi.ln())
        .collect();
    let mut log_f = ln_gamma(alpha_sum);
    for (i, &a) in alpha.iter().enumerate() {
        log_f += -ln_gamma(a) - q.coords()[i].ln() + a * log_ratios[i];
    }
    log_f -= alpha_sum * log_sum_exp(&log_ratios);
    Ok(log_f)
}

/// log f_λ(q | p): the symmetric kernel αᵢ = λ/n.
pub fn log_density_symmetric(lambda: f64, p: &SimplexPoint, q: &SimplexPoint) -> Result<f64> {
    let kernel = GammaKernel::symmetric(lambda, p.dim())?;
    log_density_general(&kernel, p, q)
}

/// One row of the large-deviation table.
#[derive(Debug, Clone, Copy)]
pub struct LdpRow {
    pub lambda: f64,
    /// −(1/λ) log f_λ(q | p)
    pub scaled_neg_log_density: f64,
    /// |scaled value − c(p, q)|
    pub deviation: f64,
}

/// Table of −(1/λ) log f_λ(q|p) against the cost; the deviation decays like
/// O(log λ / λ) by the Stirling step of the limit.
pub fn ldp_limit_check(lambdas: &[f64], p: &SimplexPoint, q: &SimplexPoint) -> Result<Vec<LdpRow>> {
    let c = simplex::cost(p, q)?.value();
    lambdas
        .iter()
        .map(|&lambda| {
            if !(lambda > 0.0) {
                return Err(Error::parameter("lambda grid must be positive"));
            }
            let v = -log_density_symmetric(lambda, p, q)? / lambda;
            Ok(LdpRow {
                lambda,
                scaled_neg_log_density: v,
                deviation: (v - c).abs(),
            })
        })
        .collect()
}

/// Permanent of a small nonnegative matrix by Ryser's inclusion–exclusion
/// with Gray-code subset updates, O(2^N N).
pub fn permanent(m: &Matrix) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::dimension("permanent needs a square matrix"));
    }
    let n = m.rows();
    if n == 0 {
        return Ok(1.0);
    }
    if n > 20 {
        return Err(Error::SizeLimit(format!("permanent of side {n} > 20")));
    }
    let mut row_sums = vec![0.0f64; n];
    let mut total = 0.0f64;
    let full: u64 = 1 << n;
    let mut prev: u64 = 0;
    for k in 1..full {
        let gray = k ^ (k >> 1);
        let changed = gray ^ prev;
        let j = changed.trailing_zeros() as usize;
        if gray & changed != 0 {
            for (i, rs) in row_sums.iter_mut().enumerate() {
                *rs += m.get(i, j);
            }
        } else {
            for (i, rs) in row_sums.iter_mut().enumerate() {
                *rs -= m.get(i, j);
            }
        }
        prev = gray;
        let prod: f64 = row_sums.iter().product();
        if (n as u32 - gray.count_ones()).is_multiple_of(2) {
            total += prod;
        } else {
            total -= prod;
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MixtureMode {
    Exact,
    Marginal,
}

impl MixtureMode {
    pub fn label(&self) -> &'static str {
        match self {
            MixtureMode::Exact => "exact",
            MixtureMode::Marginal => "marginal",
        }
    }
}

/// The permutation-mixture coupling of two equal-size atom lists.
#[derive(Debug, Clone)]
pub struct MixtureCoupling {
    pub mode: MixtureMode,
    pub lambda: f64,
    pub source: Vec<SimplexPoint>,
    pub target: Vec<SimplexPoint>,
    /// Exact mode: log ν^σ in lexicographic permutation order.
    pub log_weights: Option<Vec<f64>>,
    /// Pair-marginal matrix m[i][j]; (1/N)·doubly stochastic.
    pub pair_marginal: Matrix,
    /// Whether exact atom ties were perturbed (by 1e-12) to keep the
    /// disintegration argument's distinctness.
    pub perturbed: bool,
}

const EXACT_CAP: usize = 10;
const MARGINAL_CAP: usize = 16;

/// Reduced log-weight matrix A[j][k] = −λ log Σᵢ qᵢ(k)/pᵢ(j); the
/// permutation-invariant density factors are dropped because they cancel in
/// the normalization.
pub fn reduced_log_weight_matrix(
    source: &[SimplexPoint],
    target: &[SimplexPoint],
    lambda: f64,
) -> Result<Matrix> {
    if source.len() != target.len() || source.is_empty() {
        return Err(Error::dimension("mixture needs equal nonempty atom lists"));
    }
    let n_particles = source.len();
    let mut a = Matrix::zeros(n_particles, n_particles);
    for j in 0..n_particles {
        let log_p = source[j].log_coords();
        for k in 0..n_particles {
            let log_ratios: Vec<f64> = target[k]
                .log_coords()
                .iter()
                .zip(&log_p)
                .map(|(lq, lp)| lq - lp)
                .collect();
            a.set(j, k, -lambda * log_sum_exp(&log_ratios));
        }
    }
    Ok(a)
}

/// Perturb exact duplicate atoms by 1e-12 so all atoms are distinct.
fn perturb_ties(points: &mut [SimplexPoint]) -> bool {
    let mut perturbed = false;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if points[i].max_abs_diff(&points[j]) == 0.0 {
                let mut coords = points[j].coords().to_vec();
                coords[0] *= 1.0 + 1e-12;
                points[j] = SimplexPoint::new(coords).expect("perturbation stays interior");
                perturbed = true;
            }
        }
    }
    perturbed
}

fn lambda_valid(lambda: f64) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::parameter("mixture lambda must be positive"));
    }
    Ok(())
}

/// Exact mixture: log ν^σ for every σ ∈ S_N in lexicographic order,
/// normalized by log-sum-exp. N ≤ 10.
pub fn build_mixture_exact(
    source: &[SimplexPoint],
    target: &[SimplexPoint],
    lambda: f64,
) -> Result<MixtureCoupling> {
    lambda_valid(lambda)?;
    let n = source.len();
    if n > EXACT_CAP {
        return Err(Error::SizeLimit(format!(
            "exact mixture caps at N = {EXACT_CAP}, got {n}"
        )));
    }
    let mut source = source.to_vec();
    let mut target = target.to_vec();
    let perturbed = perturb_ties(&mut source) | perturb_ties(&mut target);
    let a = reduced_log_weight_matrix(&source, &target, lambda)?;

    let mut perm: Vec<usize> = (0..n).collect();
    let mut raw = Vec::new();
    loop {
        let s: f64 = (0..n).map(|j| a.get(j, perm[j])).sum();
        raw.push(s);
        if !next_permutation(&mut perm) {
            break;
        }
    }
    let norm = log_sum_exp(&raw);
    let log_weights: Vec<f64> = raw.into_iter().map(|s| s - norm).collect();

    // aggregate the pair marginal Σ_σ ν^σ 1{σ(i)=j} / N
    let mut pair = Matrix::zeros(n, n);
    let mut perm: Vec<usize> = (0..n).collect();
    let mut idx = 0usize;
    loop {
        let w = log_weights[idx].exp() / n as f64;
        for (i, &j) in perm.iter().enumerate() {
            pair.set(i, j, pair.get(i, j) + w);
        }
        idx += 1;
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(MixtureCoupling {
        mode: MixtureMode::Exact,
        lambda,
        source,
        target,
        log_weights: Some(log_weights),
        pair_marginal: pair,
        perturbed,
    })
}

/// Pair-marginal mixture via Ryser permanents:
/// m[i][j] = (1/N) B[i][j] perm(B^{(i,j)}) / perm(B) with B = exp(A − row
/// shifts). N ≤ 16.
pub fn build_mixture_marginal(
    source: &[SimplexPoint],
    target: &[SimplexPoint],
    lambda: f64,
) -> Result<MixtureCoupling> {
    lambda_valid(lambda)?;
    let n = source.len();
    if n > MARGINAL_CAP {
        return Err(Error::SizeLimit(format!(
            "marginal mixture caps at N = {MARGINAL_CAP}, got {n}"
        )));
    }
    let mut source = source.to_vec();
    let mut target = target.to_vec();
    let perturbed = perturb_ties(&mut source) | perturb_ties(&mut target);
    let a = reduced_log_weight_matrix(&source, &target, lambda)?;

    // Log-domain Sinkhorn balancing: B = exp(A − r − cᵀ) with unit row and
    // column sums. Row and column scales cancel exactly in the marginal
    // ratio below, and a balanced matrix keeps perm(B) ≥ N!/Nᴺ, far above
    // Ryser's cancellation noise — plain row shifts leave perm(B) under the
    // noise floor once λ concentrates the weights.
    let mut row_shift = vec![0.0f64; n];
    let mut col_shift = vec![0.0f64; n];
    for _ in 0..200 {
        let mut movement = 0.0f64;
        for i in 0..n {
            let terms: Vec<f64> = (0..n).map(|j| a.get(i, j) - col_shift[j]).collect();
            let new = log_sum_exp(&terms);
            movement = movement.max((new - row_shift[i]).abs());
            row_shift[i] = new;
        }
        for j in 0..n {
            let terms: Vec<f64> = (0..n).map(|i| a.get(i, j) - row_shift[i]).collect();
            let new = log_sum_exp(&terms);
            movement = movement.max((new - col_shift[j]).abs());
            col_shift[j] = new;
        }
        if movement < 1e-13 {
            break;
        }
    }
    let b = Matrix::from_fn(n, n, |i, j| (a.get(i, j) - row_shift[i] - col_shift[j]).exp());
    let perm_b = permanent(&b)?;
    let noise_floor = (n as f64) * (1u64 << n) as f64 * 1e-15;
    if !(perm_b > noise_floor) || !perm_b.is_finite() {
        return Err(Error::numerical(format!(
            "permanent underflow/overflow: perm(B) = {perm_b}"
        )));
    }
    let mut pair = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let bij = b.get(i, j);
            if bij == 0.0 {
                continue;
            }
            let cof = permanent(&b.minor(i, j))?;
            pair.set(i, j, bij * cof / perm_b / n as f64);
        }
    }
    Ok(MixtureCoupling {
        mode: MixtureMode::Marginal,
        lambda,
        source,
        target,
        log_weights: None,
        pair_marginal: pair,
        perturbed,
    })
}

/// Lexicographic next permutation; false once the order wraps.
fn next_permutation(perm: &mut [usize]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// W₂² between a pair-mass coupling (atoms (pᵢ, qⱼ) ⊂ ℝ^{2n}) and the
/// reference coupling {(pⱼ, q̂ⱼ), 1/N}.
pub fn coupling_w2_sq(
    pair_mass: &Matrix,
    source: &[SimplexPoint],
    target: &[SimplexPoint],
    reference: &[(SimplexPoint, SimplexPoint)],
) -> Result<f64> {
    let n = source.len();
    let mut atoms: Vec<(usize, usize)> = Vec::new();
    let mut masses: Vec<f64> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let m = pair_mass.get(i, j);
            if m > 1e-14 {
                atoms.push((i, j));
                masses.push(m);
            }
        }
    }
    let total: f64 = masses.iter().sum();
    for m in &mut masses {
        *m /= total;
    }
    let ref_mass = vec![1.0 / reference.len() as f64; reference.len()];
    let cost = Matrix::from_fn(atoms.len(), reference.len(), |a, b| {
        let (i, j) = atoms[a];
        let (rp, rq) = &reference[b];
        let dp: f64 = source[i]
            .coords()
            .iter()
            .zip(rp.coords())
            .map(|(x, y)| (x - y) * (x - y))
            .sum();
        let dq: f64 = target[j]
            .coords()
            .iter()
            .zip(rq.coords())
            .map(|(x, y)| (x - y) * (x - y))
            .sum();
        dp + dq
    });
    let (_, value) = ot::min_cost_lp(&cost, &masses, &ref_mass)?;
    Ok(value)
}

/// λ schedule for the convergence experiment.
#[derive(Debug, Clone, Copy)]
pub enum LambdaPolicy {
    /// λ_N = (4/α̂) N^{2/n} with α̂ from `estimate_regularity`.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone)]
pub struct MixtureConvergenceConfig {
    pub n: usize,
    pub n_grid: Vec<usize>,
    pub seeds: usize,
    pub lambda: LambdaPolicy,
    /// Truncation for the regularity estimate.
    pub eps: f64,
    pub threads: usize,
}

#[derive(Debug, Clone)]
pub struct MixtureConvergenceRecord {
    pub n: usize,
    pub n_particles: usize,
    pub lambda: f64,
    pub seed: u64,
    pub w2_sq: f64,
    pub w2_sq_baseline: f64,
    pub w_n: f64,
    pub mode: &'static str,
}

#[derive(Debug, Clone)]
pub struct MixtureConvergenceOutput {
    pub alpha_hat: f64,
    pub records: Vec<MixtureConvergenceRecord>,
}

/// Convergence of the mixture coupling to the Monge coupling.
///
/// P₁ is the pushforward of P₀ under the generator's transport map, so the
/// optimal coupling R* = (p, T(p)) is known by construction; per (N, seed)
/// the experiment samples fresh sources and independent targets, builds the
/// mixture at λ_N, and scores W₂²(M_N, R*_N) against the empirical optimal
/// coupling plus the uniform-permutation baseline.
pub fn mixture_convergence_experiment(
    sampler: &(dyn Fn(&mut ChaCha8Rng) -> SimplexPoint + Sync),
    generator: &dyn Generator,
    cfg: &MixtureConvergenceConfig,
    master_seed: u64,
) -> Result<MixtureConvergenceOutput> {
    let domain = TruncatedSimplex::new(cfg.n, cfg.eps)?;
    let reg = estimate_regularity(generator, domain, 2048, master_seed)?;
    let alpha_hat = reg.alpha;
    if matches!(cfg.lambda, LambdaPolicy::Auto) && reg.degenerate {
        return Err(Error::numerical(
            "auto lambda needs a generator with alpha > 0 (quadratic-equivalence regularity)",
        ));
    }
    for &n_particles in &cfg.n_grid {
        if n_particles > MARGINAL_CAP {
            return Err(Error::SizeLimit(format!(
                "N = {n_particles} beyond the marginal cap {MARGINAL_CAP}"
            )));
        }
        if n_particles == 0 {
            return Err(Error::parameter("N grid entries must be positive"));
        }
    }

    let streams = StreamFactory::new(master_seed).child("mixture-convergence");
    let jobs: Vec<(usize, u64)> = cfg
        .n_grid
        .iter()
        .flat_map(|&np| (0..cfg.seeds as u64).map(move |s| (np, s)))
        .collect();

    let run_one = |job: usize| -> Result<MixtureConvergenceRecord> {
        let (n_particles, seed) = jobs[job];
        let lambda = match cfg.lambda {
            LambdaPolicy::Auto => {
                (4.0 / alpha_hat) * (n_particles as f64).powf(2.0 / cfg.n as f64)
            }
            LambdaPolicy::Fixed(l) => l,
        };
        let mut rng = streams.stream("replica", (n_particles as u64) << 32 | seed);
        let sources: Vec<SimplexPoint> = (0..n_particles).map(|_| sampler(&mut rng)).collect();
        let targets: Vec<SimplexPoint> = (0..n_particles)
            .map(|_| transport_map(generator, &sampler(&mut rng)))
            .collect::<Result<_>>()?;
        let reference: Vec<(SimplexPoint, SimplexPoint)> = sources
            .iter()
            .map(|p| Ok((p.clone(), transport_map(generator, p)?)))
            .collect::<Result<_>>()?;

        let mixture = if n_particles <= 8 {
            build_mixture_exact(&sources, &targets, lambda)?
        } else {
            build_mixture_marginal(&sources, &targets, lambda)?
        };
        let w2_sq = coupling_w2_sq(
            &mixture.pair_marginal,
            &mixture.source,
            &mixture.target,
            &reference,
        )?;
        let uniform =
            Matrix::from_fn(n_particles, n_particles, |_, _| 1.0 / (n_particles * n_particles) as f64);
        let w2_sq_baseline =
            coupling_w2_sq(&uniform, &mixture.source, &mixture.target, &reference)?;
        let images: Vec<SimplexPoint> = reference.iter().map(|(_, q)| q.clone()).collect();
        let (_, w_n) = l2_matching_cost(&mixture.target, &images)?;
        Ok(MixtureConvergenceRecord {
            n: cfg.n,
            n_particles,
            lambda,
            seed,
            w2_sq,
            w2_sq_baseline,
            w_n,
            mode: mixture.mode.label(),
        })
    };

    let results = parallel_map_indexed(jobs.len(), cfg.threads, run_one);
    let records = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(MixtureConvergenceOutput { alpha_hat, records })
}
