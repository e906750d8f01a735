//! The eight experiment commands.
//!
//! Every command reads its parameters from the merged key=value config,
//! validates them (collecting per-field errors), runs the corresponding
//! library experiment and packages a JSON payload plus CSV mirrors. The
//! payload never contains timestamps, paths or thread counts, so identical
//! (config, seed) pairs produce identical bytes.


use dtrans_core::bounds::{parse_gap_model, gap_bound_experiment};
use dtrans_core::dynamics::{sample_conditional_bridge, path_convergence_experiment};
use dtrans_core::geometry::{parse_model, entropy_convexity_experiment};
use dtrans_core::interpolation::{cost_curve, InterpolationSchedule};
use dtrans_core::ot::{
    certify_c_monotone, solve_kantorovich, CostKind, DiscreteMeasure,
};
use dtrans_core::portfolio::{
    estimate_regularity, parse_generator, transport_map, GeneratorRef, TruncatedSimplex,
};
use dtrans_core::rng::{thread_count, StreamFactory};
use dtrans_core::schrodinger::{mixture_convergence_experiment, LambdaPolicy, MixtureConvergenceConfig};
use dtrans_core::simplex::{cost, SimplexPoint};
use dtrans_core::{Error, Result};

use crate::config::RawConfig;
use crate::report::{cell_f, cell_i, num_array, CsvTable, Json};

pub struct RunOutput {
    pub kind: &'static str,
    pub seed: u64,
    pub stdout: String,
    pub config_echo: Json,
    pub results: Json,
    pub tables: Vec<CsvTable>,
    /// Validate runs deliver their report, then exit 2.
    pub failed_validation: bool,
}

pub const KINDS: &[&str] = &[
    "cost",
    "couple",
    "schrodinger",
    "paths",
    "interpolate",
    "entropy",
    "gaps",
    "validate",
];

pub fn run(kind: &str, cfg: &RawConfig) -> Result<RunOutput> {
    match kind {
        "cost" => run_cost(cfg),
        "couple" => run_couple(cfg),
        "schrodinger" => run_schrodinger(cfg),
        "paths" => run_paths(cfg),
        "interpolate" => run_interpolate(cfg),
        "entropy" => run_entropy(cfg),
        "gaps" => run_gaps(cfg),
        "validate" => run_validate(cfg),
        _ => Err(Error::parameter(format!(
            "unknown command '{kind}' (expected one of {KINDS:?})"
        ))),
    }
}

fn fail_on(errors: Vec<String>) -> Result<()> {
    if errors.is_empty() {
        Ok(())
    } else {
        Err(Error::parameter(errors.join("; ")))
    }
}

fn generator_from(cfg: &RawConfig, n: usize, errors: &mut Vec<String>) -> Option<GeneratorRef> {
    let spec = cfg.get_or("generator", "power:0.5");
    match parse_generator(&spec, n) {
        Ok(g) => Some(g),
        Err(e) => {
            errors.push(format!("generator: {e}"));
            None
        }
    }
}

/// Sample atoms from the truncated uniform law.
fn sample_atoms(
    n: usize,
    eps: f64,
    count: usize,
    streams: &StreamFactory,
    label: &str,
) -> Result<Vec<SimplexPoint>> {
    let domain = TruncatedSimplex::new(n, eps)?;
    let mut rng = streams.stream(label, 0);
    Ok((0..count).map(|_| domain.sample(&mut rng)).collect())
}

fn run_cost(cfg: &RawConfig) -> Result<RunOutput> {
    let mut errors = Vec::new();
    let p_raw = cfg.point("p", &mut errors);
    let q_raw = cfg.point("q", &mut errors);
    fail_on(errors)?;
    let p = SimplexPoint::new(p_raw.unwrap())?;
    let q = SimplexPoint::new(q_raw.unwrap())?;
    if let Some(n_str) = cfg.get("n") {
        let n: usize = n_str
            .parse()
            .map_err(|_| Error::parameter(format!("n: bad integer '{n_str}'")))?;
        if n != p.dim() {
            return Err(Error::parameter(format!(
                "n = {n} but p has {} coordinates",
                p.dim()
            )));
        }
    }
    let value = cost(&p, &q)?.value();

    let mut echo = Json::obj();
    echo.push("n", Json::Int(p.dim() as i64));
    echo.push("p", num_array(p.coords()));
    echo.push("q", num_array(q.coords()));

    let mut results = Json::obj();
    results.push("cost", Json::Num(value));

    let mut table = CsvTable::new("cost", &["cost"]);
    table.rows.push(vec![cell_f(value)]);

    Ok(RunOutput {
        kind: "cost",
        seed: 0,
        stdout: format!("{value:.7}\n"),
        config_echo: echo,
        results,
        tables: vec![table],
        failed_validation: false,
    })
}

fn run_couple(cfg: &RawConfig) -> Result<RunOutput> {
    let mut errors = Vec::new();
    let n = cfg.usize_or("n", 2, &mut errors);
    let atoms = cfg.usize_or("atoms", 8, &mut errors);
    let seed = cfg.u64_or("seed", 0, &mut errors);
    let eps = cfg.f64_or("eps", 0.02, &mut errors);
    let budget = cfg.usize_or("budget", 10_000, &mut errors);
    let cost_kind = match cfg.get_or("cost", "dirichlet").as_str() {
        "dirichlet" => CostKind::Dirichlet,
        "sq_euclidean" => CostKind::SqEuclidean,
        other => {
            errors.push(format!("cost: unknown kind '{other}'"));
            CostKind::Dirichlet
        }
    };
    let generator = generator_from(cfg, n, &mut errors);
    fail_on(errors)?;
    let generator = generator.unwrap();

    let streams = StreamFactory::new(seed).child("couple");
    let sources = sample_atoms(n, eps, atoms, &streams, "atoms")?;
    let targets: Vec<SimplexPoint> = sources
        .iter()
        .map(|p| transport_map(generator.as_ref(), p))
        .collect::<Result<_>>()?;
    let src = DiscreteMeasure::equal_weights(sources)?;
    let tgt = DiscreteMeasure::equal_weights(targets)?;
    let (coupling, value) = solve_kantorovich(&src, &tgt, cost_kind)?;
    let report = certify_c_monotone(&coupling, &src, &tgt, budget, seed)?;
    let (_, dual_value) = solve_kantorovich(&tgt.inverted(), &src.inverted(), cost_kind)?;

    let mut echo = Json::obj();
    echo.push("n", Json::Int(n as i64));
    echo.push("atoms", Json::Int(atoms as i64));
    echo.push("generator", Json::Str(generator.name()));
    echo.push("cost", Json::Str(cost_kind.label().to_string()));
    echo.push("eps", Json::Num(eps));
    echo.push("budget", Json::Int(budget as i64));

    let support = coupling.support(1e-12);
    let mut triples = Vec::with_capacity(support.len());
    let mut table = CsvTable::new("coupling", &["i", "j", "mass"]);
    for &(i, j, mass) in &support {
        triples.push(Json::Arr(vec![
            Json::Int(i as i64),
            Json::Int(j as i64),
            Json::Num(mass),
        ]));
        table
            .rows
            .push(vec![cell_i(i as i64), cell_i(j as i64), cell_f(mass)]);
    }

    let mut cert = Json::obj();
    cert.push("min_log_product", Json::Num(report.min_log_product));
    cert.push("cycles_checked", Json::Int(report.cycles_checked as i64));
    cert.push("certified", Json::Bool(report.certified()));

    let mut results = Json::obj();
    results.push("value", Json::Num(value));
    results.push("dual_value", Json::Num(dual_value));
    results.push("coupling", Json::Arr(triples));
    results.push("certificate", cert);

    Ok(RunOutput {
        kind: "couple",
        seed,
        stdout: format!(
            "optimal value {value:.7} (dual {dual_value:.7}), certificate min log-product {:.3e} over {} cycles\n",
            report.min_log_product, report.cycles_checked
        ),
        config_echo: echo,
        results,
        tables: vec![table],
        failed_validation: false,
    })
}

fn run_schrodinger(cfg: &RawConfig) -> Result<RunOutput> {
    let mut errors = Vec::new();
    let n = cfg.usize_or("n", 2, &mut errors);
    let n_grid = cfg.usize_list_or("N", &[4, 6, 8, 10], &mut errors);
    let seeds = cfg.usize_or("seeds", 20, &mut errors);
    let seed = cfg.u64_or("seed", 0, &mut errors);
    let eps = cfg.f64_or("eps", 0.02, &mut errors);
    let lambda = match cfg.get_or("lambda", "auto").as_str() {
        "auto" => LambdaPolicy::Auto,
        v => match v.parse::<f64>() {
            Ok(x) if x > 0.0 => LambdaPolicy::Fixed(x),
            _ => {
                errors.push(format!("lambda: expected 'auto' or a positive real, got '{v}'"));
                LambdaPolicy::Auto
            }
        },
    };
    let generator = generator_from(cfg, n, &mut errors);
    fail_on(errors)?;
    let generator = generator.unwrap();

    let exp_cfg = MixtureConvergenceConfig {
        n,
        n_grid: n_grid.clone(),
        seeds,
        lambda,
        eps,
        threads: thread_count(None),
    };
    let domain = TruncatedSimplex::new(n, eps)?;
    let sampler = move |rng: &mut dtrans_core::ChaCha8Rng| domain.sample(rng);
    let out = mixture_convergence_experiment(&sampler, generator.as_ref(), &exp_cfg, seed)?;

    let mut echo = Json::obj();
    echo.push("n", Json::Int(n as i64));
    echo.push("generator", Json::Str(generator.name()));
    echo.push(
        "N",
        Json::Arr(n_grid.iter().map(|&x| Json::Int(x as i64)).collect()),
    );
    echo.push("seeds", Json::Int(seeds as i64));
    echo.push(
        "lambda",
        match lambda {
            LambdaPolicy::Auto => Json::Str("auto".into()),
            LambdaPolicy::Fixed(x) => Json::Num(x),
        },
    );
    echo.push("eps", Json::Num(eps));

    let mut records = Vec::new();
    let mut table = CsvTable::new(
        "schrodinger",
        &["n", "N", "lambda", "seed", "w2_sq", "w2_sq_baseline", "w_n", "mode"],
    );
    for r in &out.records {
        let mut rec = Json::obj();
        rec.push("n", Json::Int(r.n as i64));
        rec.push("N", Json::Int(r.n_particles as i64));
        rec.push("lambda", Json::Num(r.lambda));
        rec.push("seed", Json::Int(r.seed as i64));
        rec.push("w2_sq", Json::Num(r.w2_sq));
        rec.push("w2_sq_baseline", Json::Num(r.w2_sq_baseline));
        rec.push("w_n", Json::Num(r.w_n));
        rec.push("mode", Json::Str(r.mode.to_string()));
        records.push(rec);
        table.rows.push(vec![
            cell_i(r.n as i64),
            cell_i(r.n_particles as i64),
            cell_f(r.lambda),
            cell_i(r.seed as i64),
            cell_f(r.w2_sq),
            cell_f(r.w2_sq_baseline),
            cell_f(r.w_n),
            r.mode.to_string(),
        ]);
    }

    let mut stdout = String::new();
    for &np in &n_grid {
        let mut w2: Vec<f64> = out
            .records
            .iter()
            .filter(|r| r.n_particles == np)
            .map(|r| r.w2_sq)
            .collect();
        let mut base: Vec<f64> = out
            .records
            .iter()
            .filter(|r| r.n_particles == np)
            .map(|r| r.w2_sq_baseline)
            .collect();
        w2.sort_by(|a, b| a.partial_cmp(b).unwrap());
        base.sort_by(|a, b| a.partial_cmp(b).unwrap());
        stdout.push_str(&format!(
            "N={np}: median w2_sq {:.6} (baseline {:.6})\n",
            w2[w2.len() / 2],
            base[base.len() / 2]
        ));
    }

    let mut results = Json::obj();
    results.push("alpha_hat", Json::Num(out.alpha_hat));
    results.push("records", Json::Arr(records));

    Ok(RunOutput {
        kind: "schrodinger",
        seed,
        stdout,
        config_echo: echo,
        results,
        tables: vec![table],
        failed_validation: false,
    })
}

fn run_paths(cfg: &RawConfig) -> Result<RunOutput> {
    let mut errors = Vec::new();
    let n = cfg.usize_or("n", 2, &mut errors);
    let particles = cfg.usize_or("particles", 8, &mut errors);
    let lambdas = cfg.f64_list_or("lambda", &[1e2, 1e3, 1e4], &mut errors);
    let grid = cfg.usize_or("grid", 256, &mut errors);
    let seeds = cfg.usize_or("seeds", 20, &mut errors);
    let seed = cfg.u64_or("seed", 0, &mut errors);
    let eps = cfg.f64_or("eps", 0.02, &mut errors);
    let generator = generator_from(cfg, n, &mut errors);
    fail_on(errors)?;
    let generator = generator.unwrap();

    let streams = StreamFactory::new(seed).child("paths");
    let sources = sample_atoms(n, eps, particles, &streams, "atoms")?;
    let pairs: Vec<(SimplexPoint, SimplexPoint)> = sources
        .into_iter()
        .map(|p| {
            let q = transport_map(generator.as_ref(), &p)?;
            Ok((p, q))
        })
        .collect::<Result<_>>()?;
    let records =
        path_convergence_experiment(&pairs, &lambdas, grid, seeds, seed, thread_count(None))?;

    let mut echo = Json::obj();
    echo.push("n", Json::Int(n as i64));
    echo.push("generator", Json::Str(generator.name()));
    echo.push("particles", Json::Int(particles as i64));
    echo.push("lambda", num_array(&lambdas));
    echo.push("grid", Json::Int(grid as i64));
    echo.push("seeds", Json::Int(seeds as i64));
    echo.push("eps", Json::Num(eps));

    let mut recs = Vec::new();
    let mut table = CsvTable::new("paths_records", &["lambda", "seed", "s", "mean_path_dist"]);
    for r in &records {
        let mut rec = Json::obj();
        rec.push("lambda", Json::Num(r.lambda));
        rec.push("seed", Json::Int(r.seed as i64));
        rec.push("s", Json::Num(r.sup_deviation));
        rec.push("mean_path_dist", Json::Num(r.mean_path_dist));
        recs.push(rec);
        table.rows.push(vec![
            cell_f(r.lambda),
            cell_i(r.seed as i64),
            cell_f(r.sup_deviation),
            cell_f(r.mean_path_dist),
        ]);
    }

    // per-particle trajectory dump at each λ (one dedicated stream)
    let mut header: Vec<String> = vec!["lambda".into(), "particle".into(), "t".into()];
    for i in 1..=n {
        header.push(format!("q_{i}"));
    }
    for i in 1..=n {
        header.push(format!("pi_{i}"));
    }
    let mut dump = CsvTable {
        name: "paths".into(),
        header,
        rows: Vec::new(),
    };
    let mut rng = streams.stream("dump", 0);
    for &lambda in &lambdas {
        for (j, (p, q)) in pairs.iter().enumerate() {
            let bridge = sample_conditional_bridge(p, q, lambda, grid, &mut rng)?;
            for (k, t) in bridge.times.iter().enumerate() {
                let mut row = vec![cell_f(lambda), cell_i(j as i64), cell_f(*t)];
                for c in bridge.points[k].coords() {
                    row.push(cell_f(*c));
                }
                for c in &bridge.weight_curve[k] {
                    row.push(cell_f(*c));
                }
                dump.rows.push(row);
            }
        }
    }

    let mut stdout = String::new();
    for &lambda in &lambdas {
        let mut s: Vec<f64> = records
            .iter()
            .filter(|r| r.lambda == lambda)
            .map(|r| r.sup_deviation)
            .collect();
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        stdout.push_str(&format!("lambda={lambda}: median S {:.6}\n", s[s.len() / 2]));
    }

    let mut results = Json::obj();
    results.push("records", Json::Arr(recs));

    Ok(RunOutput {
        kind: "paths",
        seed,
        stdout,
        config_echo: echo,
        results,
        tables: vec![table, dump],
        failed_validation: false,
    })
}

fn run_interpolate(cfg: &RawConfig) -> Result<RunOutput> {
    let mut errors = Vec::new();
    let n = cfg.usize_or("n", 2, &mut errors);
    let atoms = cfg.usize_or("atoms", 50, &mut errors);
    let points = cfg.usize_or("t-grid", 33, &mut errors);
    let seed = cfg.u64_or("seed", 0, &mut errors);
    let eps = cfg.f64_or("eps", 0.02, &mut errors);
    let generator = generator_from(cfg, n, &mut errors);
    fail_on(errors)?;
    let generator = generator.unwrap();

    let streams = StreamFactory::new(seed).child("interpolate");
    let sources = sample_atoms(n, eps, atoms, &streams, "atoms")?;
    let measure = DiscreteMeasure::equal_weights(sources)?;
    let schedule = InterpolationSchedule::uniform(generator.clone(), points)?;
    let curve = cost_curve(&schedule, &measure)?;

    let mut echo = Json::obj();
    echo.push("n", Json::Int(n as i64));
    echo.push("generator", Json::Str(generator.name()));
    echo.push("atoms", Json::Int(atoms as i64));
    echo.push("t-grid", Json::Int(points as i64));
    echo.push("eps", Json::Num(eps));

    let mut results = Json::obj();
    results.push("t", num_array(&curve.ts));
    results.push("cost", num_array(&curve.costs));
    results.push("monotone", Json::Bool(curve.monotone));
    results.push("convex", Json::Bool(curve.convex));

    let mut table = CsvTable::new("interpolate", &["t", "cost"]);
    for (t, c) in curve.ts.iter().zip(&curve.costs) {
        table.rows.push(vec![cell_f(*t), cell_f(*c)]);
    }

    Ok(RunOutput {
        kind: "interpolate",
        seed,
        stdout: format!(
            "cost curve over {points} points: monotone={} convex={} final={:.6}\n",
            curve.monotone,
            curve.convex,
            curve.costs.last().unwrap()
        ),
        config_echo: echo,
        results,
        tables: vec![table],
        failed_validation: false,
    })
}

fn run_entropy(cfg: &RawConfig) -> Result<RunOutput> {
    let mut errors = Vec::new();
    let n = cfg.usize_or("n", 2, &mut errors);
    let points = cfg.usize_or("t-grid", 33, &mut errors);
    let samples = cfg.usize_or("samples", 10_000, &mut errors);
    let seed = cfg.u64_or("seed", 0, &mut errors);
    let eps = cfg.f64_or("eps", 0.02, &mut errors);
    let generator = generator_from(cfg, n, &mut errors);
    let model_spec = cfg.get_or("model", &format!("uniform:{eps}"));
    let model = match parse_model(&model_spec, n) {
        Ok(m) => Some(m),
        Err(e) => {
            errors.push(format!("model: {e}"));
            None
        }
    };
    fail_on(errors)?;
    let generator = generator.unwrap();
    let model = model.unwrap();

    let t_grid: Vec<f64> = (0..points)
        .map(|k| k as f64 / (points - 1) as f64)
        .collect();
    let report = entropy_convexity_experiment(model.as_ref(), &generator, &t_grid, samples, seed)?;

    let mut echo = Json::obj();
    echo.push("n", Json::Int(n as i64));
    echo.push("generator", Json::Str(generator.name()));
    echo.push("model", Json::Str(model.name()));
    echo.push("t-grid", Json::Int(points as i64));
    echo.push("samples", Json::Int(samples as i64));

    let mut verdicts = Json::obj();
    verdicts.push("convex", Json::Bool(report.convex_ok));
    verdicts.push("offset_constant", Json::Bool(report.diff_ok));

    let mut results = Json::obj();
    results.push("t_grid", num_array(&report.t_grid));
    results.push("curve_a", num_array(&report.curve_a));
    results.push("curve_b", num_array(&report.curve_b));
    results.push(
        "second_differences",
        num_array(&report.second_differences_b),
    );
    results.push("diff_range", Json::Num(report.diff_range));
    results.push("diff_se", Json::Num(report.diff_se));
    results.push("verdicts", verdicts);

    let mut table = CsvTable::new("entropy", &["t", "curve_a", "curve_b"]);
    for ((t, a), b) in report
        .t_grid
        .iter()
        .zip(&report.curve_a)
        .zip(&report.curve_b)
    {
        table.rows.push(vec![cell_f(*t), cell_f(*a), cell_f(*b)]);
    }

    Ok(RunOutput {
        kind: "entropy",
        seed,
        stdout: format!(
            "entropy convexity: convex={} offset_constant={} (range {:.3e})\n",
            report.convex_ok, report.diff_ok, report.diff_range
        ),
        config_echo: echo,
        results,
        tables: vec![table],
        failed_validation: false,
    })
}

fn run_gaps(cfg: &RawConfig) -> Result<RunOutput> {
    let mut errors = Vec::new();
    let n_grid = cfg.usize_list_or(
        "n-grid",
        &[64, 128, 256, 512, 1024, 2048, 4096],
        &mut errors,
    );
    let replicas = cfg.usize_or("replicas", 200, &mut errors);
    let seed = cfg.u64_or("seed", 0, &mut errors);
    let model_spec = cfg.get_or("model", "linear");
    let model = match parse_gap_model(&model_spec) {
        Ok(m) => Some(m),
        Err(e) => {
            errors.push(format!("model: {e}"));
            None
        }
    };
    fail_on(errors)?;
    let model = model.unwrap();
    if n_grid.iter().any(|&n| n < 2) {
        return Err(Error::parameter("n-grid entries must be at least 2"));
    }

    let rows = gap_bound_experiment(model.as_ref(), &n_grid, replicas, seed, thread_count(None))?;

    let mut echo = Json::obj();
    echo.push("model", Json::Str(model.name()));
    echo.push(
        "n-grid",
        Json::Arr(n_grid.iter().map(|&x| Json::Int(x as i64)).collect()),
    );
    echo.push("replicas", Json::Int(replicas as i64));

    let mut recs = Vec::new();
    let mut table = CsvTable::new(
        "gaps",
        &["n", "replicas", "mean_cost", "term1", "term2", "median_term1", "quadrature_bound"],
    );
    for r in &rows {
        let mut rec = Json::obj();
        rec.push("n", Json::Int(r.n as i64));
        rec.push("replicas", Json::Int(r.replicas as i64));
        rec.push("mean_cost", Json::Num(r.mean_cost));
        rec.push("term1", Json::Num(r.mean_term1));
        rec.push("term2", Json::Num(r.mean_term2));
        rec.push("median_term1", Json::Num(r.median_term1));
        rec.push("quadrature_bound", Json::Num(r.quadrature_bound));
        recs.push(rec);
        table.rows.push(vec![
            cell_i(r.n as i64),
            cell_i(r.replicas as i64),
            cell_f(r.mean_cost),
            cell_f(r.mean_term1),
            cell_f(r.mean_term2),
            cell_f(r.median_term1),
            cell_f(r.quadrature_bound),
        ]);
    }

    let last = rows.last().unwrap();
    let mut results = Json::obj();
    results.push("records", Json::Arr(recs));

    Ok(RunOutput {
        kind: "gaps",
        seed,
        stdout: format!(
            "n={}: mean cost {:.6} vs quadrature bound {:.6}\n",
            last.n, last.mean_cost, last.quadrature_bound
        ),
        config_echo: echo,
        results,
        tables: vec![table],
        failed_validation: false,
    })
}

fn run_validate(cfg: &RawConfig) -> Result<RunOutput> {
    let kind = cfg.get_or("kind", "");
    let mut errors: Vec<String> = Vec::new();
    if kind.is_empty() {
        errors.push("kind: required (one of cost, couple, schrodinger, paths, interpolate, entropy, gaps)".into());
    } else if !KINDS.contains(&kind.as_str()) || kind == "validate" {
        errors.push(format!("kind: unknown experiment '{kind}'"));
    }

    let mut alpha_hat: Option<f64> = None;
    let mut schedule: Vec<(usize, f64)> = Vec::new();

    if kind == "schrodinger" {
        let n = cfg.usize_or("n", 2, &mut errors);
        let n_grid = cfg.usize_list_or("N", &[4, 6, 8, 10], &mut errors);
        let _ = cfg.usize_or("seeds", 20, &mut errors);
        let seed = cfg.u64_or("seed", 0, &mut errors);
        let eps = cfg.f64_or("eps", 0.02, &mut errors);
        if n_grid.iter().any(|&x| x > 16) {
            errors.push("N: entries beyond the marginal-mode cap 16".into());
        }
        let generator = generator_from(cfg, n, &mut errors);
        let lambda_raw = cfg.get_or("lambda", "auto");
        let auto = lambda_raw == "auto";
        if !auto && lambda_raw.parse::<f64>().map(|x| x <= 0.0).unwrap_or(true) {
            errors.push(format!("lambda: expected 'auto' or a positive real, got '{lambda_raw}'"));
        }
        if let (Some(g), true) = (generator.as_ref(), errors.is_empty()) {
            // dry run of the λ policy: estimate α̂ and derive the schedule
            let domain = TruncatedSimplex::new(n, eps)?;
            let reg = estimate_regularity(g.as_ref(), domain, 2048, seed)?;
            alpha_hat = Some(reg.alpha);
            if auto {
                if reg.degenerate {
                    errors.push(
                        "lambda: auto policy needs alpha > 0, generator is degenerate".into(),
                    );
                } else {
                    for &np in &n_grid {
                        let l = (4.0 / reg.alpha) * (np as f64).powf(2.0 / n as f64);
                        schedule.push((np, l));
                    }
                }
            }
        }
    } else if !kind.is_empty() && KINDS.contains(&kind.as_str()) && kind != "validate" {
        // shared numeric sanity for the remaining kinds
        let _ = cfg.usize_or("n", 2, &mut errors);
        let _ = cfg.u64_or("seed", 0, &mut errors);
        let _ = cfg.f64_or("eps", 0.02, &mut errors);
        if let Some(ngrid) = cfg.get("N") {
            if ngrid.split(',').any(|s| s.trim().parse::<usize>().is_err()) {
                errors.push(format!("N: expected positive integers, got '{ngrid}'"));
            }
        }
        if kind != "gaps" && kind != "cost" {
            let n = {
                let mut tmp = Vec::new();
                cfg.usize_or("n", 2, &mut tmp)
            };
            let _ = generator_from(cfg, n, &mut errors);
        }
    }

    let valid = errors.is_empty();
    let mut echo = Json::obj();
    echo.push("kind", Json::Str(kind.clone()));

    let mut results = Json::obj();
    results.push("valid", Json::Bool(valid));
    results.push(
        "errors",
        Json::Arr(errors.iter().map(|e| Json::Str(e.clone())).collect()),
    );
    if let Some(a) = alpha_hat {
        results.push("alpha_hat", Json::Num(a));
    }
    if !schedule.is_empty() {
        let mut rows = Vec::new();
        for (np, l) in &schedule {
            let mut rec = Json::obj();
            rec.push("N", Json::Int(*np as i64));
            rec.push("lambda", Json::Num(*l));
            rows.push(rec);
        }
        results.push("lambda_schedule", Json::Arr(rows));
    }

    let mut stdout = String::new();
    if valid {
        stdout.push_str("config valid\n");
        if let Some(a) = alpha_hat {
            stdout.push_str(&format!("alpha_hat = {a:.6}\n"));
        }
        for (np, l) in &schedule {
            stdout.push_str(&format!("N={np}: lambda_N = {l:.4}\n"));
        }
    } else {
        for e in &errors {
            stdout.push_str(&format!("error: {e}\n"));
        }
    }

    Ok(RunOutput {
        kind: "validate",
        seed: 0,
        stdout,
        config_echo: echo,
        results,
        tables: Vec::new(),
        failed_validation: !valid,
    })
}
