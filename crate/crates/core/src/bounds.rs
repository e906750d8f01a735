//! Dimension-free bounds of the transport cost through order-statistics
//! gaps.
//!
//! Sorting n−1 points of (0,1) and taking successive differences produces a
//! simplex point; pushing uniform points through a quantile function G =
//! F⁻¹ couples the flat Dirichlet law to the gap law of F. The coupled cost
//! splits exactly into
//!
//! ```text
//! c(p, q) = log((1/n) Σ ΔG/ΔU) − (1/n) Σ log(ΔG/ΔU),
//! ```
//!
//! whose first term vanishes as n grows while the second converges to
//! ∫₀¹ f log f dx — a bound on the transport cost that never mentions the
//! dimension. The reported "entropy bound" is +∫ f log f (the relative
//! entropy of F's law against Lebesgue), the quantity the substitution
//! x = G(u) actually produces and the only sign compatible with c ≥ 0.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::quadrature::adaptive_simpson;
use crate::rng::{parallel_map_indexed, StreamFactory};
use crate::simplex::{self, SimplexPoint};

/// A distribution function on [0,1] with continuous strictly positive
/// density.
pub trait GapModel: Send + Sync {
    fn name(&self) -> String;
    fn cdf(&self, x: f64) -> f64;
    fn pdf(&self, x: f64) -> f64;

    /// Quantile function; monotone bisection to 1e-12 unless a closed form
    /// overrides it.
    fn inverse_cdf(&self, u: f64) -> f64 {
        let mut lo = 0.0f64;
        let mut hi = 1.0f64;
        while hi - lo > 1e-12 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// ∫₀¹ f log f dx by adaptive quadrature.
    fn entropy_bound(&self) -> f64 {
        adaptive_simpson(
            &|x| {
                let f = self.pdf(x);
                f * f.ln()
            },
            1e-12,
            1.0 - 1e-12,
            1e-10,
        )
    }
}

/// f ≡ 1: the identity coupling, zero cost.
#[derive(Debug, Clone, Copy)]
pub struct UniformGaps;

impl GapModel for UniformGaps {
    fn name(&self) -> String {
        "uniform".to_string()
    }

    fn cdf(&self, x: f64) -> f64 {
        x.clamp(0.0, 1.0)
    }

    fn pdf(&self, _x: f64) -> f64 {
        1.0
    }

    fn inverse_cdf(&self, u: f64) -> f64 {
        u
    }
}

/// f(x) = 0.5 + x, F(x) = x/2 + x²/2, quantile by the quadratic formula.
#[derive(Debug, Clone, Copy)]
pub struct LinearGaps;

impl GapModel for LinearGaps {
    fn name(&self) -> String {
        "linear".to_string()
    }

    fn cdf(&self, x: f64) -> f64 {
        0.5 * x + 0.5 * x * x
    }

    fn pdf(&self, x: f64) -> f64 {
        0.5 + x
    }

    fn inverse_cdf(&self, u: f64) -> f64 {
        0.5 * ((1.0 + 8.0 * u).sqrt() - 1.0)
    }
}

/// Exponential density truncated to [0,1]: f(x) = θe^{−θx}/(1 − e^{−θ}).
#[derive(Debug, Clone, Copy)]
pub struct TruncExpGaps {
    theta: f64,
}

impl TruncExpGaps {
    pub fn new(theta: f64) -> Result<Self> {
        if !(theta > 0.0) || !theta.is_finite() {
            return Err(Error::parameter("theta must be positive"));
        }
        Ok(TruncExpGaps { theta })
    }

    fn normalizer(&self) -> f64 {
        1.0 - (-self.theta).exp()
    }
}

impl GapModel for TruncExpGaps {
    fn name(&self) -> String {
        format!("truncexp:{}", self.theta)
    }

    fn cdf(&self, x: f64) -> f64 {
        (1.0 - (-self.theta * x).exp()) / self.normalizer()
    }

    fn pdf(&self, x: f64) -> f64 {
        self.theta * (-self.theta * x).exp() / self.normalizer()
    }

    fn inverse_cdf(&self, u: f64) -> f64 {
        -(1.0 - u * self.normalizer()).ln() / self.theta
    }
}

/// Parse a gap model spec: `uniform`, `linear`, `truncexp:θ`.
pub fn parse_gap_model(spec: &str) -> Result<std::sync::Arc<dyn GapModel>> {
    let spec = spec.trim();
    match spec {
        "uniform" => Ok(std::sync::Arc::new(UniformGaps)),
        "linear" => Ok(std::sync::Arc::new(LinearGaps)),
        _ => {
            if let Some(rest) = spec.strip_prefix("truncexp:") {
                let theta: f64 = rest
                    .parse()
                    .map_err(|_| Error::parameter(format!("bad theta '{rest}'")))?;
                Ok(std::sync::Arc::new(TruncExpGaps::new(theta)?))
            } else {
                Err(Error::parameter(format!("unknown gap model '{spec}'")))
            }
        }
    }
}

/// Gap vector of n−1 interior points: sorted differences including both
/// boundary gaps. Exact ties are perturbed by 1e-12 (flagged).
pub fn gaps_from_points(points: &[f64]) -> Result<(SimplexPoint, bool)> {
    if points.is_empty() {
        return Err(Error::dimension("gaps need at least one point"));
    }
    if points.iter().any(|&u| !(u > 0.0 && u < 1.0)) {
        return Err(Error::domain("points must lie strictly inside (0, 1)"));
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut perturbed = false;
    for i in 1..sorted.len() {
        if sorted[i] <= sorted[i - 1] {
            sorted[i] = sorted[i - 1] + 1e-12;
            perturbed = true;
        }
    }
    if *sorted.last().unwrap() >= 1.0 {
        return Err(Error::domain("tie perturbation pushed a point to 1"));
    }
    let mut gaps = Vec::with_capacity(sorted.len() + 1);
    let mut prev = 0.0;
    for &u in &sorted {
        gaps.push(u - prev);
        prev = u;
    }
    gaps.push(1.0 - prev);
    Ok((SimplexPoint::new(gaps)?, perturbed))
}

/// One coupled draw: the cost and its two-term decomposition.
#[derive(Debug, Clone, Copy)]
pub struct CostSample {
    pub cost: f64,
    /// log((1/n) Σ ΔG/ΔU)
    pub term1: f64,
    /// −(1/n) Σ log(ΔG/ΔU)
    pub term2: f64,
}

/// Deterministic core: the coupled cost for given interior points.
pub fn coupled_cost_from_points(model: &dyn GapModel, points: &[f64]) -> Result<CostSample> {
    let (u_gaps, _) = gaps_from_points(points)?;
    let images: Vec<f64> = {
        let mut sorted = points.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        sorted.iter().map(|&u| model.inverse_cdf(u)).collect()
    };
    let (x_gaps, _) = gaps_from_points(&images)?;
    let n = u_gaps.dim() as f64;
    let ratios: Vec<f64> = x_gaps
        .coords()
        .iter()
        .zip(u_gaps.coords())
        .map(|(q, p)| q / p)
        .collect();
    let term1 = (ratios.iter().sum::<f64>() / n).ln();
    let term2 = -ratios.iter().map(|r| r.ln()).sum::<f64>() / n;
    let cost = simplex::cost(&u_gaps, &x_gaps)?.value();
    Ok(CostSample { cost, term1, term2 })
}

/// Draw U₁..U_{n−1} uniform and return the coupled transport cost between
/// the uniform gaps and their F⁻¹ images.
pub fn coupled_cost_sample(
    model: &dyn GapModel,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Result<CostSample> {
    if n < 2 {
        return Err(Error::dimension("coupled cost needs n >= 2"));
    }
    let points: Vec<f64> = (0..n - 1)
        .map(|_| {
            // keep strictly interior
            let mut u: f64 = rng.random();
            while u <= 0.0 || u >= 1.0 {
                u = rng.random();
            }
            u
        })
        .collect();
    coupled_cost_from_points(model, &points)
}

#[derive(Debug, Clone)]
pub struct GapBoundRow {
    pub n: usize,
    pub replicas: usize,
    pub mean_cost: f64,
    pub mean_term1: f64,
    pub mean_term2: f64,
    pub median_term1: f64,
    pub quadrature_bound: f64,
}

/// Dimension sweep of the coupled cost: term-1 → 0, term-2 → ∫ f log f,
/// mean cost → the quadrature bound.
pub fn gap_bound_experiment(
    model: &dyn GapModel,
    n_grid: &[usize],
    replicas: usize,
    master_seed: u64,
    threads: usize,
) -> Result<Vec<GapBoundRow>> {
    if replicas == 0 {
        return Err(Error::parameter("experiment needs replicas"));
    }
    let bound = model.entropy_bound();
    let streams = StreamFactory::new(master_seed).child("gap-bound");
    let mut rows = Vec::with_capacity(n_grid.len());
    for (gi, &n) in n_grid.iter().enumerate() {
        if n < 2 {
            return Err(Error::parameter("n grid entries must be at least 2"));
        }
        let samples = parallel_map_indexed(replicas, threads, |rep| {
            let mut rng = streams.stream("replica", ((gi as u64) << 32) | rep as u64);
            coupled_cost_sample(model, n, &mut rng)
        });
        let samples: Vec<CostSample> = samples.into_iter().collect::<Result<_>>()?;
        let m = replicas as f64;
        let mut t1: Vec<f64> = samples.iter().map(|s| s.term1).collect();
        t1.sort_by(|a, b| a.partial_cmp(b).unwrap());
        rows.push(GapBoundRow {
            n,
            replicas,
            mean_cost: samples.iter().map(|s| s.cost).sum::<f64>() / m,
            mean_term1: samples.iter().map(|s| s.term1).sum::<f64>() / m,
            mean_term2: samples.iter().map(|s| s.term2).sum::<f64>() / m,
            median_term1: t1[t1.len() / 2],
            quadrature_bound: bound,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamFactory;

    #[test]
    fn gaps_examples() {
        let (g, perturbed) = gaps_from_points(&[0.3]).unwrap();
        assert!(!perturbed);
        assert!((g.coords()[0] - 0.3).abs() < 1e-15);
        assert!((g.coords()[1] - 0.7).abs() < 1e-15);

        // equally spaced points give the barycenter
        let pts: Vec<f64> = (1..5).map(|k| k as f64 / 5.0).collect();
        let (g, _) = gaps_from_points(&pts).unwrap();
        for w in g.coords() {
            assert!((w - 0.2).abs() < 1e-14);
        }

        // uniform points: mean first gap = 1/n over many draws
        let mut rng = StreamFactory::new(91).stream("gaps", 0);
        let n = 8usize;
        let m = 10_000;
        let mut acc = 0.0;
        let mut acc2 = 0.0;
        for _ in 0..m {
            let pts: Vec<f64> = (0..n - 1).map(|_| rng.random::<f64>()).collect();
            let (g, _) = gaps_from_points(&pts).unwrap();
            acc += g.coords()[0];
            acc2 += g.coords()[0] * g.coords()[0];
        }
        let mean = acc / m as f64;
        let var = acc2 / m as f64 - mean * mean;
        let se = (var / m as f64).sqrt();
        assert!((mean - 1.0 / n as f64).abs() <= 3.0 * se, "mean gap {mean}");

        // duplicates perturbed with a flag
        let (_, perturbed) = gaps_from_points(&[0.4, 0.4]).unwrap();
        assert!(perturbed);
        // out-of-range rejected
        assert!(gaps_from_points(&[0.0]).is_err());
        assert!(gaps_from_points(&[]).is_err());
    }

    #[test]
    fn coupled_cost_examples() {
        // uniform model: the identity coupling costs exactly zero
        let mut rng = StreamFactory::new(92).stream("cc", 0);
        for _ in 0..50 {
            let s = coupled_cost_sample(&UniformGaps, 16, &mut rng).unwrap();
            assert_eq!(s.cost, 0.0);
            assert_eq!(s.term1, 0.0);
            assert_eq!(s.term2, 0.0);
        }

        // hand value: n = 2, U₁ = 0.5, f = 0.5 + x. The matched gaps are
        // (0.5, 0.5) → (x, 1−x) with x = (√5−1)/2, so term1 = ln 1 = 0 and
        // cost = −½ ln(4√5 − 8) = 0.0286705570…
        let s = coupled_cost_from_points(&LinearGaps, &[0.5]).unwrap();
        let x = 0.5 * ((5.0f64).sqrt() - 1.0);
        assert!((x - 0.618034).abs() < 1e-6);
        assert!(s.term1.abs() < 1e-14);
        assert!((s.cost - 0.0286705570).abs() < 1e-9, "cost {}", s.cost);

        // nonnegativity and the exact two-term split
        for _ in 0..500 {
            let s = coupled_cost_sample(&LinearGaps, 8, &mut rng).unwrap();
            assert!(s.cost >= 0.0);
            assert!((s.term1 + s.term2 - s.cost).abs() <= 1e-12);
        }
    }

    #[test]
    fn quantiles_match_bisection_default() {
        // closed forms agree with the generic bisection to 1e-9
        struct Bisected<M: GapModel>(M);
        impl<M: GapModel> GapModel for Bisected<M> {
            fn name(&self) -> String {
                format!("bisected:{}", self.0.name())
            }
            fn cdf(&self, x: f64) -> f64 {
                self.0.cdf(x)
            }
            fn pdf(&self, x: f64) -> f64 {
                self.0.pdf(x)
            }
            // no inverse override: the default bisection runs
        }
        for u in [0.05, 0.3, 0.5, 0.77, 0.99] {
            assert!((Bisected(LinearGaps).inverse_cdf(u) - LinearGaps.inverse_cdf(u)).abs() < 1e-9);
            let te = TruncExpGaps::new(1.0).unwrap();
            assert!((Bisected(te).inverse_cdf(u) - te.inverse_cdf(u)).abs() < 1e-9);
        }
    }

    #[test]
    fn entropy_bounds() {
        // Jensen: ∫ f log f ≥ 0, zero only for the flat density
        assert!(UniformGaps.entropy_bound().abs() < 1e-12);
        let linear = LinearGaps.entropy_bound();
        assert!((linear - 0.042791).abs() < 1e-6, "linear bound {linear}");
        // truncated exponential: analytic value log θ − log Z − θ E[X]
        let theta = 1.0f64;
        let te = TruncExpGaps::new(theta).unwrap();
        let z = 1.0 - (-theta).exp();
        let mean = 1.0 / theta - (-theta).exp() / z;
        let analytic = theta.ln() - z.ln() - theta * mean;
        assert!((te.entropy_bound() - analytic).abs() < 1e-8);
        assert!(te.entropy_bound() > 0.0);
    }

    #[test]
    fn gap_bound_trends() {
        // term-1 decreasing toward zero in median (the median scales like
        // ~0.2/n, so at 200 replicas only well-separated levels resolve;
        // the acceptance suite pins the full grid at 20000 replicas),
        // mean cost near the quadrature bound
        let rows = gap_bound_experiment(&LinearGaps, &[64, 4096], 200, 7, 2).unwrap();
        assert!(
            rows[1].median_term1 < rows[0].median_term1,
            "{} vs {}",
            rows[1].median_term1,
            rows[0].median_term1
        );
        let last = rows.last().unwrap();
        assert!((last.mean_cost - last.quadrature_bound).abs() <= 0.01);
        for r in &rows {
            assert!(r.mean_cost >= 0.0);
        }

        // flat control: cost stays at zero
        let rows = gap_bound_experiment(&UniformGaps, &[64, 4096], 20, 7, 2).unwrap();
        for r in &rows {
            assert!(r.mean_cost <= 0.005);
        }
    }

    #[test]
    fn parse_gap_model_specs() {
        assert!(parse_gap_model("uniform").is_ok());
        assert!(parse_gap_model("linear").is_ok());
        assert!(parse_gap_model("truncexp:1.5").is_ok());
        assert!(parse_gap_model("truncexp:-1").is_err());
        assert!(parse_gap_model("cauchy").is_err());
    }
}
