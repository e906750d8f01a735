//! Displacement interpolation of maps and discrete measures.
//!
//! The interpolant generator φ_t = (1−t)φ0 + tφ1 has portfolio map
//! π_t = (1−t)ē + tπ₁, so particles move along T_t(p) = p ⊙ π_t(p⁻¹):
//! straight lines in the simplex run at non-uniform speed. The transport
//! cost to time t is pointwise explicit,
//! 𝐂(P₀, P_t) = Σⱼ wⱼ H(ē | π_t(pⱼ⁻¹)), and is increasing and strictly
//! convex in t whenever the generator moves the support at all.

use crate::error::{Error, Result};
use crate::ot::DiscreteMeasure;
use crate::portfolio::{portfolio_map, Generator, GeneratorRef, PortfolioWeights};
use crate::simplex::{self, relative_entropy, SimplexPoint};

/// A generator plus the time grid on which to interpolate.
#[derive(Clone)]
pub struct InterpolationSchedule {
    generator: GeneratorRef,
    grid: Vec<f64>,
}

impl InterpolationSchedule {
    pub fn new(generator: GeneratorRef, grid: Vec<f64>) -> Result<Self> {
        if grid.len() < 2 {
            return Err(Error::parameter("time grid needs at least two points"));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::parameter("time grid must be strictly increasing"));
        }
        if grid[0] != 0.0 || *grid.last().unwrap() != 1.0 {
            return Err(Error::parameter("time grid must include both endpoints"));
        }
        Ok(InterpolationSchedule { generator, grid })
    }

    /// Uniform grid with `points` entries (default 33 in the experiments).
    pub fn uniform(generator: GeneratorRef, points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::parameter("time grid needs at least two points"));
        }
        let grid = (0..points)
            .map(|k| k as f64 / (points - 1) as f64)
            .collect();
        InterpolationSchedule::new(generator, grid)
    }

    pub fn generator(&self) -> &GeneratorRef {
        &self.generator
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }
}

/// π_t(r) = (1−t)ē + t π₁(r), exact affine combination.
pub fn portfolio_at(g1: &dyn Generator, t: f64, r: &SimplexPoint) -> PortfolioWeights {
    let pi_1 = portfolio_map(g1, r);
    let n = r.dim() as f64;
    PortfolioWeights::from_weights(
        pi_1.weights()
            .iter()
            .map(|&w| (1.0 - t) / n + t * w)
            .collect(),
    )
}

/// T_t(p) = p ⊙ π_t(p⁻¹).
pub fn transport_at(g1: &dyn Generator, t: f64, p: &SimplexPoint) -> Result<SimplexPoint> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::parameter(format!("time {t} outside [0, 1]")));
    }
    let r = simplex::invert(p);
    let pi_t = portfolio_at(g1, t, &r).to_point()?;
    simplex::odot(p, &pi_t)
}

/// Pushforward of a discrete measure under T_t; weights are untouched.
pub fn interpolate_measure(
    g1: &dyn Generator,
    source: &DiscreteMeasure,
    t: f64,
) -> Result<DiscreteMeasure> {
    let atoms: Vec<SimplexPoint> = source
        .atoms()
        .iter()
        .map(|p| transport_at(g1, t, p))
        .collect::<Result<_>>()?;
    DiscreteMeasure::new(atoms, source.weights().to_vec())
}

/// The curve t ↦ 𝐂(P₀, P_t) with its monotonicity/convexity verdicts.
#[derive(Debug, Clone)]
pub struct CostCurve {
    pub ts: Vec<f64>,
    pub costs: Vec<f64>,
    pub monotone: bool,
    pub convex: bool,
}

/// 𝐂(P₀, P_t) along the schedule, computed through the Monge value
/// Σⱼ wⱼ H(ē | π_t(pⱼ⁻¹)).
pub fn cost_curve(schedule: &InterpolationSchedule, source: &DiscreteMeasure) -> Result<CostCurve> {
    let g1 = schedule.generator().as_ref();
    let n = source.atoms()[0].dim();
    let e = SimplexPoint::barycenter(n);
    let inverted: Vec<SimplexPoint> = source.atoms().iter().map(simplex::invert).collect();
    let pi_1: Vec<PortfolioWeights> = inverted.iter().map(|r| portfolio_map(g1, r)).collect();

    let mut costs = Vec::with_capacity(schedule.grid().len());
    for &t in schedule.grid() {
        let mut total = 0.0;
        for (pi, w) in pi_1.iter().zip(source.weights()) {
            let mixed: Vec<f64> = pi
                .weights()
                .iter()
                .map(|&x| (1.0 - t) / n as f64 + t * x)
                .collect();
            let pi_t = SimplexPoint::new(mixed)?;
            total += w * relative_entropy(&e, &pi_t)?;
        }
        costs.push(total);
    }
    let monotone = costs.windows(2).all(|w| w[1] >= w[0] - 1e-12);
    let convex = second_differences(schedule.grid(), &costs)
        .iter()
        .all(|&d| d >= -1e-10);
    Ok(CostCurve {
        ts: schedule.grid().to_vec(),
        costs,
        monotone,
        convex,
    })
}

/// Second differences on a (possibly nonuniform) grid, scaled like a second
/// derivative times the local step squared.
pub fn second_differences(ts: &[f64], ys: &[f64]) -> Vec<f64> {
    (1..ts.len().saturating_sub(1))
        .map(|k| {
            let h1 = ts[k] - ts[k - 1];
            let h2 = ts[k + 1] - ts[k];
            // uneven-grid second difference, positive iff locally convex
            (ys[k + 1] - ys[k]) / h2 - (ys[k] - ys[k - 1]) / h1
        })
        .collect()
}
