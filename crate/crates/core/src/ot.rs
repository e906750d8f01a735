//! Exact discrete optimal transport on weighted atom sets.
//!
//! Assignment (equal weights, permutations) through a shortest-augmenting-
//! path Hungarian solver with lexicographic tie-breaking, and the general
//! Kantorovich LP through successive shortest paths with node potentials on
//! the bipartite transportation graph. Instances are desk scale (≤ a few
//! hundred atoms), so exactness wins over speed everywhere: ties are broken
//! by re-solving, and the LP finishes with a complementary-slackness check
//! at 1e-9.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::StreamFactory;
use crate::simplex::{self, euclidean_distance, SimplexPoint};

/// Weighted atoms on Δ_n; weights renormalized to sum to one.
#[derive(Debug, Clone)]
pub struct DiscreteMeasure {
    atoms: Vec<SimplexPoint>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<SimplexPoint>, weights: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() || atoms.len() != weights.len() {
            return Err(Error::dimension(
                "measure needs equally many atoms and weights, at least one",
            ));
        }
        let n = atoms[0].dim();
        if atoms.iter().any(|a| a.dim() != n) {
            return Err(Error::dimension("atoms have mixed dimensions"));
        }
        if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(Error::domain("weights must be nonnegative"));
        }
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0) {
            return Err(Error::domain("weights must have positive total mass"));
        }
        Ok(DiscreteMeasure {
            atoms,
            weights: weights.into_iter().map(|w| w / sum).collect(),
        })
    }

    pub fn equal_weights(atoms: Vec<SimplexPoint>) -> Result<Self> {
        let n = atoms.len();
        DiscreteMeasure::new(atoms, vec![1.0; n])
    }

    pub fn dirac(atom: SimplexPoint) -> Self {
        DiscreteMeasure {
            atoms: vec![atom],
            weights: vec![1.0],
        }
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[SimplexPoint] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Pushforward under the group inversion, for the duality checks.
    pub fn inverted(&self) -> DiscreteMeasure {
        DiscreteMeasure {
            atoms: self.atoms.iter().map(simplex::invert).collect(),
            weights: self.weights.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostKind {
    Dirichlet,
    SqEuclidean,
}

impl CostKind {
    pub fn label(&self) -> &'static str {
        match self {
            CostKind::Dirichlet => "dirichlet",
            CostKind::SqEuclidean => "sq_euclidean",
        }
    }
}

pub fn pair_cost(kind: CostKind, p: &SimplexPoint, q: &SimplexPoint) -> Result<f64> {
    match kind {
        CostKind::Dirichlet => Ok(simplex::cost(p, q)?.value()),
        CostKind::SqEuclidean => Ok(euclidean_distance(p, q).powi(2)),
    }
}

pub fn cost_matrix(
    source: &DiscreteMeasure,
    target: &DiscreteMeasure,
    kind: CostKind,
) -> Result<Matrix> {
    let mut m = Matrix::zeros(source.len(), target.len());
    for i in 0..source.len() {
        for j in 0..target.len() {
            m.set(i, j, pair_cost(kind, &source.atoms[i], &target.atoms[j])?);
        }
    }
    Ok(m)
}

#[derive(Debug, Clone)]
pub struct Assignment {
    pub permutation: Vec<usize>,
    pub value: f64,
}

/// Shortest-augmenting-path Hungarian algorithm for square minimization.
/// Returns the row → column assignment and the optimal value.
fn hungarian(cost: &Matrix) -> (Vec<usize>, f64) {
    let n = cost.rows();
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![n; n + 1]; // p[j] = row matched to column j; index n is the virtual column
    let mut way = vec![0usize; n + 1];
    for i in 0..n {
        p[n] = i;
        let mut j0 = n;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = n;
            for j in 0..n {
                if !used[j] {
                    let cur = cost.get(i0, j) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == n {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == n {
                break;
            }
        }
    }
    let mut perm = vec![0usize; n];
    for j in 0..n {
        if p[j] < n {
            perm[p[j]] = j;
        }
    }
    let value = (0..n).map(|i| cost.get(i, perm[i])).sum();
    (perm, value)
}

/// Rectangular helper: optimal value of assigning each row to a distinct
/// column (rows ≤ cols).
fn hungarian_rect_value(cost: &Matrix) -> f64 {
    let (r, c) = (cost.rows(), cost.cols());
    if r == 0 {
        return 0.0;
    }
    if r == c {
        return hungarian(cost).1;
    }
    // pad with zero-cost dummy rows
    let padded = Matrix::from_fn(c, c, |i, j| if i < r { cost.get(i, j) } else { 0.0 });
    hungarian(&padded).1
}

/// Exact minimum over permutations of Σ cost[i][σ(i)], ties broken by the
/// lexicographically smallest permutation (greedy prefix fixing against the
/// optimal value, tolerance 1e-9·(1 + |V*|)).
pub fn solve_assignment(cost: &Matrix) -> Result<Assignment> {
    if !cost.is_square() {
        return Err(Error::dimension("assignment needs a square cost matrix"));
    }
    let n = cost.rows();
    if n == 1 {
        return Ok(Assignment {
            permutation: vec![0],
            value: cost.get(0, 0),
        });
    }
    let (_, best) = hungarian(cost);
    let tol = 1e-9 * (1.0 + best.abs());

    let mut perm = vec![usize::MAX; n];
    let mut free_cols: Vec<usize> = (0..n).collect();
    let mut prefix_cost = 0.0;
    for i in 0..n {
        let mut chosen = None;
        for (slot, &j) in free_cols.iter().enumerate() {
            let rest_rows: Vec<usize> = (i + 1..n).collect();
            let rest_cols: Vec<usize> =
                free_cols.iter().copied().filter(|&c| c != j).collect();
            let sub_value = if rest_rows.is_empty() {
                0.0
            } else {
                let sub = Matrix::from_fn(rest_rows.len(), rest_cols.len(), |a, b| {
                    cost.get(rest_rows[a], rest_cols[b])
                });
                hungarian_rect_value(&sub)
            };
            if prefix_cost + cost.get(i, j) + sub_value <= best + tol {
                chosen = Some((slot, j));
                break;
            }
        }
        let (slot, j) = chosen.expect("optimal completion always exists");
        perm[i] = j;
        prefix_cost += cost.get(i, j);
        free_cols.remove(slot);
    }
    let value = (0..n).map(|i| cost.get(i, perm[i])).sum();
    Ok(Assignment {
        permutation: perm,
        value,
    })
}

/// Nonnegative mass matrix with prescribed marginals.
#[derive(Debug, Clone)]
pub struct Coupling {
    pub mass: Matrix,
}

impl Coupling {
    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.mass.rows())
            .map(|i| self.mass.row(i).iter().sum())
            .collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        (0..self.mass.cols())
            .map(|j| (0..self.mass.rows()).map(|i| self.mass.get(i, j)).sum())
            .collect()
    }

    pub fn check_marginals(
        &self,
        source: &DiscreteMeasure,
        target: &DiscreteMeasure,
        tol: f64,
    ) -> Result<()> {
        for (s, w) in self.row_sums().iter().zip(source.weights()) {
            if (s - w).abs() > tol {
                return Err(Error::numerical(format!("row marginal off by {}", s - w)));
            }
        }
        for (s, w) in self.col_sums().iter().zip(target.weights()) {
            if (s - w).abs() > tol {
                return Err(Error::numerical(format!("col marginal off by {}", s - w)));
            }
        }
        Ok(())
    }

    /// Support pairs with mass above `floor`.
    pub fn support(&self, floor: f64) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.mass.rows() {
            for j in 0..self.mass.cols() {
                let m = self.mass.get(i, j);
                if m > floor {
                    out.push((i, j, m));
                }
            }
        }
        out
    }
}

/// Exact transportation LP: minimize Σ cost[i][j] f[i][j] subject to the
/// given supplies and demands (balanced totals). Successive shortest paths
/// with potentials; ends with a complementary-slackness certificate.
pub fn min_cost_lp(cost: &Matrix, supply: &[f64], demand: &[f64]) -> Result<(Matrix, f64)> {
    let m = supply.len();
    let k = demand.len();
    if cost.rows() != m || cost.cols() != k {
        return Err(Error::dimension("cost matrix shape vs supplies/demands"));
    }
    let total_s: f64 = supply.iter().sum();
    let total_d: f64 = demand.iter().sum();
    if (total_s - total_d).abs() > 1e-9 {
        return Err(Error::domain("supplies and demands must balance"));
    }
    // shift so the first Dijkstra sees nonnegative arcs
    let min_cost = (0..m)
        .flat_map(|i| (0..k).map(move |j| (i, j)))
        .map(|(i, j)| cost.get(i, j))
        .fold(f64::INFINITY, f64::min);
    if !min_cost.is_finite() {
        return Err(Error::domain("costs must be finite"));
    }
    let shifted = Matrix::from_fn(m, k, |i, j| cost.get(i, j) - min_cost);

    let nodes = m + k;
    let mut flow = Matrix::zeros(m, k);
    let mut rem_s = supply.to_vec();
    let mut rem_d = demand.to_vec();
    let mut potential = vec![0.0f64; nodes];

    let residual_floor = 1e-15;
    for _iter in 0..(4 * nodes + 16) {
        if rem_s.iter().cloned().fold(0.0, f64::max) <= 1e-13 {
            break;
        }
        let mut dist = vec![f64::INFINITY; nodes];
        let mut parent = vec![usize::MAX; nodes];
        let mut done = vec![false; nodes];
        for (i, &s) in rem_s.iter().enumerate() {
            if s > residual_floor {
                dist[i] = 0.0;
            }
        }
        for _ in 0..nodes {
            let mut u = usize::MAX;
            let mut best = f64::INFINITY;
            for (x, &d) in dist.iter().enumerate() {
                if !done[x] && d < best {
                    best = d;
                    u = x;
                }
            }
            if u == usize::MAX {
                break;
            }
            done[u] = true;
            if u < m {
                for j in 0..k {
                    let red = shifted.get(u, j) + potential[u] - potential[m + j];
                    let nd = dist[u] + red.max(0.0);
                    if nd < dist[m + j] {
                        dist[m + j] = nd;
                        parent[m + j] = u;
                    }
                }
            } else {
                let j = u - m;
                for i in 0..m {
                    if flow.get(i, j) > residual_floor {
                        let red = -(shifted.get(i, j) + potential[i] - potential[m + j]);
                        let nd = dist[u] + red.max(0.0);
                        if nd < dist[i] {
                            dist[i] = nd;
                            parent[i] = u;
                        }
                    }
                }
            }
        }
        let mut sink = usize::MAX;
        let mut best = f64::INFINITY;
        for (j, &d) in rem_d.iter().enumerate() {
            if d > residual_floor && dist[m + j] < best {
                best = dist[m + j];
                sink = m + j;
            }
        }
        if sink == usize::MAX {
            // supplies and demands can leave unequal float dust; the final
            // marginal check at 1e-10 still governs
            if rem_s.iter().cloned().fold(0.0, f64::max) <= 1e-11 {
                break;
            }
            return Err(Error::numerical("transportation LP ran out of paths"));
        }
        let reach = dist[sink];
        for x in 0..nodes {
            potential[x] += if dist[x].is_finite() { dist[x].min(reach) } else { reach };
        }
        // bottleneck along the augmenting path
        let mut delta = rem_d[sink - m];
        let mut x = sink;
        while parent[x] != usize::MAX {
            let p = parent[x];
            if x < m {
                delta = delta.min(flow.get(x, p - m));
            }
            x = p;
        }
        delta = delta.min(rem_s[x]);
        let mut y = sink;
        while parent[y] != usize::MAX {
            let p = parent[y];
            if y >= m {
                flow.set(p, y - m, flow.get(p, y - m) + delta);
            } else {
                flow.set(y, p - m, flow.get(y, p - m) - delta);
            }
            y = p;
        }
        rem_s[y] = (rem_s[y] - delta).max(0.0);
        rem_d[sink - m] = (rem_d[sink - m] - delta).max(0.0);
    }
    if rem_s.iter().any(|&s| s > 1e-10) || rem_d.iter().any(|&d| d > 1e-10) {
        return Err(Error::numerical("transportation LP left unrouted mass"));
    }

    // complementary slackness at 1e-9: reduced costs nonnegative everywhere,
    // zero on the support
    let scale = 1.0 + shifted.max_abs();
    for i in 0..m {
        for j in 0..k {
            let red = shifted.get(i, j) + potential[i] - potential[m + j];
            if red < -1e-9 * scale {
                return Err(Error::numerical(format!(
                    "complementary slackness violated: reduced cost {red}"
                )));
            }
            if flow.get(i, j) > 1e-12 && red.abs() > 1e-9 * scale {
                return Err(Error::numerical(format!(
                    "complementary slackness violated on support: {red}"
                )));
            }
        }
    }

    let mut value = 0.0;
    for i in 0..m {
        for j in 0..k {
            value += flow.get(i, j) * cost.get(i, j);
        }
    }
    Ok((flow, value))
}

/// Exact Kantorovich optimum between two discrete measures.
pub fn solve_kantorovich(
    source: &DiscreteMeasure,
    target: &DiscreteMeasure,
    kind: CostKind,
) -> Result<(Coupling, f64)> {
    let cost = cost_matrix(source, target, kind)?;
    let (mass, value) = min_cost_lp(&cost, source.weights(), target.weights())?;
    let coupling = Coupling { mass };
    coupling.check_marginals(source, target, 1e-10)?;
    Ok((coupling, value))
}

/// Wasserstein-2 distance (square root of the squared-Euclidean LP value).
pub fn w2_distance(a: &DiscreteMeasure, b: &DiscreteMeasure) -> Result<f64> {
    let (_, value) = solve_kantorovich(a, b, CostKind::SqEuclidean)?;
    Ok(value.max(0.0).sqrt())
}

/// L²-matching distance W_N = min_σ (1/N) Σ ‖x_j − y_{σ(j)}‖² between two
/// equal-size samples.
pub fn l2_matching_cost(xs: &[SimplexPoint], ys: &[SimplexPoint]) -> Result<(Assignment, f64)> {
    if xs.len() != ys.len() || xs.is_empty() {
        return Err(Error::dimension("matching needs equal nonempty samples"));
    }
    let n = xs.len();
    let cost = Matrix::from_fn(n, n, |i, j| euclidean_distance(&xs[i], &ys[j]).powi(2));
    let assignment = solve_assignment(&cost)?;
    let w = assignment.value / n as f64;
    Ok((assignment, w))
}

/// Result of sampling c-cyclical-monotonicity cycles on a coupling support.
#[derive(Debug, Clone)]
pub struct McmReport {
    pub min_log_product: f64,
    pub cycles_checked: usize,
    /// A cycle with log-product < −1e-9, if one was found (atom index pairs).
    pub violating_cycle: Option<Vec<(usize, usize)>>,
}

impl McmReport {
    pub fn certified(&self) -> bool {
        self.min_log_product >= -1e-9
    }
}

/// Sample cycles through the support of a coupling and evaluate the
/// multiplicative cyclical monotonicity product; min ≥ −1e-9 certifies
/// consistency with optimality on the sampled cycles.
pub fn certify_c_monotone(
    coupling: &Coupling,
    source: &DiscreteMeasure,
    target: &DiscreteMeasure,
    cycle_budget: usize,
    seed: u64,
) -> Result<McmReport> {
    let support = coupling.support(1e-12);
    if support.len() < 2 {
        return Ok(McmReport {
            min_log_product: 0.0,
            cycles_checked: 0,
            violating_cycle: None,
        });
    }
    let inv_atoms: Vec<SimplexPoint> = source.atoms().iter().map(simplex::invert).collect();
    let portfolios: Vec<SimplexPoint> = support
        .iter()
        .map(|&(i, j, _)| simplex::odot(&target.atoms()[j], &inv_atoms[i]))
        .collect::<Result<_>>()?;

    let mut rng = StreamFactory::new(seed).stream("mcm-cycles", 0);
    let mut min_log = f64::INFINITY;
    let mut violating = None;
    let mut checked = 0usize;
    while checked < cycle_budget {
        let len = (2 + (rng.random::<u32>() as usize) % 5).min(support.len());
        if len < 2 {
            break;
        }
        let mut idx = Vec::with_capacity(len);
        while idx.len() < len {
            let c = (rng.random::<u32>() as usize) % support.len();
            if !idx.contains(&c) {
                idx.push(c);
            }
        }
        let mut log_product = 0.0;
        for s in 0..len {
            let cur = idx[s];
            let next = idx[(s + 1) % len];
            let r_cur = &inv_atoms[support[cur].0];
            let r_next = &inv_atoms[support[next].0];
            let ratio: f64 = portfolios[cur]
                .coords()
                .iter()
                .zip(r_next.coords().iter().zip(r_cur.coords()))
                .map(|(w, (a, b))| w * a / b)
                .sum();
            log_product += ratio.ln();
        }
        if log_product < min_log {
            min_log = log_product;
            if log_product < -1e-9 {
                violating = Some(idx.iter().map(|&c| (support[c].0, support[c].1)).collect());
            }
        }
        checked += 1;
    }
    Ok(McmReport {
        min_log_product: min_log,
        cycles_checked: checked,
        violating_cycle: violating,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::portfolio::{transport_map, GeometricMean, Power};
    use crate::simplex::sample_uniform;

    fn pt(v: &[f64]) -> SimplexPoint {
        SimplexPoint::new(v.to_vec()).unwrap()
    }

    fn random_measure(
        n_atoms: usize,
        dim: usize,
        rng: &mut rand_chacha::ChaCha8Rng,
    ) -> DiscreteMeasure {
        let atoms = (0..n_atoms).map(|_| sample_uniform(dim, rng)).collect();
        let weights: Vec<f64> = (0..n_atoms).map(|_| 0.1 + rng.random::<f64>()).collect();
        DiscreteMeasure::new(atoms, weights).unwrap()
    }

    #[test]
    fn cost_matrix_examples() {
        let mut rng = StreamFactory::new(31).stream("cm", 0);
        let atoms: Vec<SimplexPoint> = (0..3).map(|_| sample_uniform(3, &mut rng)).collect();
        let m = DiscreteMeasure::equal_weights(atoms).unwrap();
        let c = cost_matrix(&m, &m, CostKind::Dirichlet).unwrap();
        for i in 0..3 {
            assert!(c.get(i, i).abs() < 1e-14);
        }
        // sq_euclidean symmetric, dirichlet generally not
        let a = random_measure(3, 3, &mut rng);
        let b = random_measure(3, 3, &mut rng);
        let ce = cost_matrix(&a, &b, CostKind::SqEuclidean).unwrap();
        let cd = cost_matrix(&a, &b, CostKind::Dirichlet).unwrap();
        let ce_t = cost_matrix(&b, &a, CostKind::SqEuclidean).unwrap();
        let cd_t = cost_matrix(&b, &a, CostKind::Dirichlet).unwrap();
        let mut asym = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                assert!((ce.get(i, j) - ce_t.get(j, i)).abs() < 1e-14);
                asym = asym.max((cd.get(i, j) - cd_t.get(j, i)).abs());
            }
        }
        assert!(asym > 1e-6, "dirichlet cost should be asymmetric");
        // single pair
        let one = DiscreteMeasure::dirac(pt(&[0.5, 0.5]));
        let two = DiscreteMeasure::dirac(pt(&[0.25, 0.75]));
        let c = cost_matrix(&one, &two, CostKind::Dirichlet).unwrap();
        assert!((c.get(0, 0) - 0.5 * (4.0f64 / 3.0).ln()).abs() < 1e-12);
    }

    #[test]
    fn assignment_examples() {
        let a = solve_assignment(&Matrix::from_rows(vec![vec![3.0]]).unwrap()).unwrap();
        assert_eq!(a.permutation, vec![0]);
        assert_eq!(a.value, 3.0);

        // dominant diagonal picks the identity
        let c = Matrix::from_rows(vec![
            vec![0.0, 5.0, 5.0],
            vec![5.0, 0.0, 5.0],
            vec![5.0, 5.0, 0.0],
        ])
        .unwrap();
        let a = solve_assignment(&c).unwrap();
        assert_eq!(a.permutation, vec![0, 1, 2]);
        assert_eq!(a.value, 0.0);

        assert!(solve_assignment(&Matrix::zeros(2, 3)).is_err());

        // ties resolve to the lexicographically smallest permutation
        let c = Matrix::from_fn(4, 4, |_, _| 1.0);
        let a = solve_assignment(&c).unwrap();
        assert_eq!(a.permutation, vec![0, 1, 2, 3]);
    }

    #[test]
    fn assignment_matches_brute_force() {
        let mut rng = StreamFactory::new(32).stream("bf", 0);
        for _ in 0..50 {
            let c = Matrix::from_fn(3, 3, |_, _| rng.random::<f64>());
            let a = solve_assignment(&c).unwrap();
            let perms: [[usize; 3]; 6] = [
                [0, 1, 2],
                [0, 2, 1],
                [1, 0, 2],
                [1, 2, 0],
                [2, 0, 1],
                [2, 1, 0],
            ];
            let best = perms
                .iter()
                .map(|p| (0..3).map(|i| c.get(i, p[i])).sum::<f64>())
                .fold(f64::INFINITY, f64::min);
            assert!((a.value - best).abs() < 1e-12);
        }
    }

    #[test]
    fn kantorovich_examples() {
        let mut rng = StreamFactory::new(33).stream("lp", 0);
        // identical measures, dirichlet cost: zero value, diagonal coupling
        let m = random_measure(5, 3, &mut rng);
        let (coupling, value) = solve_kantorovich(&m, &m, CostKind::Dirichlet).unwrap();
        assert!(value.abs() < 1e-12);
        for i in 0..5 {
            assert!((coupling.mass.get(i, i) - m.weights()[i]).abs() < 1e-10);
        }

        // two 2-atom equal-weight measures: min over the two matchings
        let s = DiscreteMeasure::equal_weights(vec![pt(&[0.2, 0.8]), pt(&[0.7, 0.3])]).unwrap();
        let t = DiscreteMeasure::equal_weights(vec![pt(&[0.3, 0.7]), pt(&[0.6, 0.4])]).unwrap();
        let c = cost_matrix(&s, &t, CostKind::Dirichlet).unwrap();
        let direct = 0.5 * (c.get(0, 0) + c.get(1, 1));
        let swapped = 0.5 * (c.get(0, 1) + c.get(1, 0));
        let (_, value) = solve_kantorovich(&s, &t, CostKind::Dirichlet).unwrap();
        assert!((value - direct.min(swapped)).abs() < 1e-12);
    }

    #[test]
    fn lp_value_below_feasible_couplings() {
        let mut rng = StreamFactory::new(34).stream("feas", 0);
        for _ in 0..5 {
            let s = random_measure(6, 3, &mut rng);
            let t = random_measure(4, 3, &mut rng);
            let cost = cost_matrix(&s, &t, CostKind::Dirichlet).unwrap();
            let (_, value) = solve_kantorovich(&s, &t, CostKind::Dirichlet).unwrap();
            for _ in 0..10 {
                // random feasible coupling by proportional fitting
                let mut f = Matrix::from_fn(6, 4, |_, _| 0.1 + rng.random::<f64>());
                for _ in 0..200 {
                    for i in 0..6 {
                        let rs: f64 = f.row(i).iter().sum();
                        for j in 0..4 {
                            f.set(i, j, f.get(i, j) * s.weights()[i] / rs);
                        }
                    }
                    for j in 0..4 {
                        let cs: f64 = (0..6).map(|i| f.get(i, j)).sum();
                        for i in 0..6 {
                            f.set(i, j, f.get(i, j) * t.weights()[j] / cs);
                        }
                    }
                }
                let feasible_value: f64 = (0..6)
                    .flat_map(|i| (0..4).map(move |j| (i, j)))
                    .map(|(i, j)| f.get(i, j) * cost.get(i, j))
                    .sum();
                assert!(value <= feasible_value + 1e-8);
            }
        }
    }

    #[test]
    fn assignment_agrees_with_lp_on_equal_weights() {
        let mut rng = StreamFactory::new(35).stream("agree", 0);
        for _ in 0..10 {
            let atoms_a: Vec<SimplexPoint> =
                (0..6).map(|_| sample_uniform(3, &mut rng)).collect();
            let atoms_b: Vec<SimplexPoint> =
                (0..6).map(|_| sample_uniform(3, &mut rng)).collect();
            let a = DiscreteMeasure::equal_weights(atoms_a).unwrap();
            let b = DiscreteMeasure::equal_weights(atoms_b).unwrap();
            let cost = cost_matrix(&a, &b, CostKind::Dirichlet).unwrap();
            let assign = solve_assignment(&cost).unwrap();
            let (_, lp_value) = solve_kantorovich(&a, &b, CostKind::Dirichlet).unwrap();
            assert!((assign.value / 6.0 - lp_value).abs() <= 1e-10);
        }
    }

    #[test]
    fn dirichlet_cost_duality_lifts_to_measures() {
        // 𝐂(P,Q) under c equals 𝐂(Q̃,P̃) with inverted atoms
        let mut rng = StreamFactory::new(36).stream("dual", 0);
        for _ in 0..5 {
            let p = random_measure(5, 3, &mut rng);
            let q = random_measure(7, 3, &mut rng);
            let (_, v1) = solve_kantorovich(&p, &q, CostKind::Dirichlet).unwrap();
            let (_, v2) =
                solve_kantorovich(&q.inverted(), &p.inverted(), CostKind::Dirichlet).unwrap();
            assert!((v1 - v2).abs() <= 1e-10, "{v1} vs {v2}");
        }
    }

    #[test]
    fn w2_examples() {
        let mut rng = StreamFactory::new(37).stream("w2", 0);
        let m = random_measure(4, 3, &mut rng);
        assert!(w2_distance(&m, &m).unwrap() < 1e-9);

        let p = pt(&[0.2, 0.8]);
        let q = pt(&[0.5, 0.5]);
        let d = w2_distance(
            &DiscreteMeasure::dirac(p.clone()),
            &DiscreteMeasure::dirac(q.clone()),
        )
        .unwrap();
        assert!((d - euclidean_distance(&p, &q)).abs() < 1e-12);

        // triangle inequality on random triples
        for _ in 0..10 {
            let a = DiscreteMeasure::equal_weights(
                (0..4).map(|_| sample_uniform(3, &mut rng)).collect(),
            )
            .unwrap();
            let b = DiscreteMeasure::equal_weights(
                (0..4).map(|_| sample_uniform(3, &mut rng)).collect(),
            )
            .unwrap();
            let c = DiscreteMeasure::equal_weights(
                (0..4).map(|_| sample_uniform(3, &mut rng)).collect(),
            )
            .unwrap();
            let ab = w2_distance(&a, &b).unwrap();
            let bc = w2_distance(&b, &c).unwrap();
            let ac = w2_distance(&a, &c).unwrap();
            assert!(ac <= ab + bc + 1e-9);
        }

        // L²-matching equals the LP on equal weights
        let xs: Vec<SimplexPoint> = (0..5).map(|_| sample_uniform(3, &mut rng)).collect();
        let ys: Vec<SimplexPoint> = (0..5).map(|_| sample_uniform(3, &mut rng)).collect();
        let (_, w_n) = l2_matching_cost(&xs, &ys).unwrap();
        let a = DiscreteMeasure::equal_weights(xs).unwrap();
        let b = DiscreteMeasure::equal_weights(ys).unwrap();
        let (_, lp) = solve_kantorovich(&a, &b, CostKind::SqEuclidean).unwrap();
        assert!((w_n - lp).abs() <= 1e-10);
    }

    #[test]
    fn certify_c_monotone_examples() {
        let mut rng = StreamFactory::new(38).stream("cert", 0);
        // identity coupling on φ0-generated data: all cycles clean
        let atoms: Vec<SimplexPoint> = (0..6).map(|_| sample_uniform(3, &mut rng)).collect();
        let images: Vec<SimplexPoint> = atoms
            .iter()
            .map(|p| transport_map(&GeometricMean, p).unwrap())
            .collect();
        let src = DiscreteMeasure::equal_weights(atoms).unwrap();
        let tgt = DiscreteMeasure::equal_weights(images).unwrap();
        let diag = Coupling {
            mass: Matrix::from_fn(6, 6, |i, j| if i == j { 1.0 / 6.0 } else { 0.0 }),
        };
        let report = certify_c_monotone(&diag, &src, &tgt, 2000, 5).unwrap();
        assert!(report.certified(), "min {}", report.min_log_product);

        // optimal assignment output certifies
        let g = Power::new(0.5).unwrap();
        let atoms: Vec<SimplexPoint> = (0..8).map(|_| sample_uniform(3, &mut rng)).collect();
        let images: Vec<SimplexPoint> =
            atoms.iter().map(|p| transport_map(&g, p).unwrap()).collect();
        let src = DiscreteMeasure::equal_weights(atoms).unwrap();
        let tgt = DiscreteMeasure::equal_weights(images).unwrap();
        let cost = cost_matrix(&src, &tgt, CostKind::Dirichlet).unwrap();
        let assign = solve_assignment(&cost).unwrap();
        let mut mass = Matrix::zeros(8, 8);
        for (i, &j) in assign.permutation.iter().enumerate() {
            mass.set(i, j, 1.0 / 8.0);
        }
        let report = certify_c_monotone(&Coupling { mass }, &src, &tgt, 10_000, 6).unwrap();
        assert!(report.certified(), "min {}", report.min_log_product);

        // swapping one pair of a strict optimum produces a negative cycle
        let c00 = cost.get(0, assign.permutation[0]);
        let c11 = cost.get(1, assign.permutation[1]);
        let c01 = cost.get(0, assign.permutation[1]);
        let c10 = cost.get(1, assign.permutation[0]);
        assert!(c00 + c11 < c01 + c10 - 1e-9, "need a strict 2-swap margin");
        let mut swapped = Matrix::zeros(8, 8);
        for (i, &j) in assign.permutation.iter().enumerate() {
            match i {
                0 => swapped.set(i, assign.permutation[1], 1.0 / 8.0),
                1 => swapped.set(i, assign.permutation[0], 1.0 / 8.0),
                _ => swapped.set(i, j, 1.0 / 8.0),
            }
        }
        let report =
            certify_c_monotone(&Coupling { mass: swapped }, &src, &tgt, 10_000, 7).unwrap();
        assert!(!report.certified(), "min {}", report.min_log_product);
        assert!(report.violating_cycle.is_some());
    }

    #[test]
    fn measure_validation() {
        assert!(DiscreteMeasure::new(vec![], vec![]).is_err());
        let p = pt(&[0.5, 0.5]);
        assert!(DiscreteMeasure::new(vec![p.clone()], vec![-1.0]).is_err());
        assert!(DiscreteMeasure::new(vec![p.clone()], vec![0.0]).is_err());
        let m = DiscreteMeasure::new(vec![p.clone(), p], vec![3.0, 1.0]).unwrap();
        assert!((m.weights()[0] - 0.75).abs() < 1e-15);
    }
}
