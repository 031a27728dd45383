//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Set `SKIGP_ACCEPTANCE_STRICT=1` to exit nonzero when any criterion fails.
//! `SKIGP_ACCEPTANCE_ONLY=3,5` restricts the run to the listed criteria.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use skigp::experiments::{run_infill, run_kernel_learning, run_reconstruct, ExperimentConfig, Method, SchemeChoice};
use skigp::gp::{
    global_gp_weights, learn_hypers, sample_prior, ski_dense, Dataset, GpModel, LogDetMethod, OptConfig, Scheme,
    SkiOperator, SkiSpec,
};
use skigp::interp::{build_w, padded_grid, InterpScheme, ProductGrid};
use skigp::kernels::Kernel;
use skigp::solver::{cg_solve, CgConfig};
use skigp::structla::{KuuStructure, StructuredKuu};
use skigp::Points;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn uniform(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den.max(f64::MIN_POSITIVE)
}

/// Dense Kronecker product, built entry by entry.
fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    DMatrix::from_fn(ra * rb, ca * cb, |i, j| a[(i / rb, j / cb)] * b[(i % rb, j % cb)])
}

fn structured_matvecs() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for case in 0..200 {
        if case % 2 == 0 {
            let m = rng.random_range(1..=512);
            let ell = rng.random_range(0.5..50.0);
            let col: Vec<f64> =
                (0..m).map(|k| (-0.5 * (k as f64 / ell).powi(2)).exp() + if k == 0 { 0.1 } else { 0.0 }).collect();
            let t = StructuredKuu::toeplitz(col.clone()).unwrap();
            let dense = DMatrix::from_fn(m, m, |i, j| col[i.abs_diff(j)]);
            let v = gaussian(&mut rng, m);
            let slow = &dense * DVector::from_column_slice(&v);
            worst = worst.max(rel_err(&t.matvec(&v).unwrap(), slow.as_slice()));
        } else {
            let dims = rng.random_range(2..=3);
            let mut sizes = Vec::new();
            let mut total = 1;
            for _ in 0..dims {
                let cap = (512 / total).clamp(1, 24);
                let s = rng.random_range(1..=cap);
                total *= s;
                sizes.push(s);
            }
            let factors: Vec<DMatrix<f64>> = sizes
                .iter()
                .map(|&s| {
                    let b = DMatrix::from_fn(s, s, |_, _| rng.random_range(-1.0..1.0));
                    &b * b.transpose() + DMatrix::identity(s, s)
                })
                .collect();
            let op =
                StructuredKuu::kronecker(factors.iter().map(|f| StructuredKuu::dense(f.clone()).unwrap()).collect())
                    .unwrap();
            let dense = factors[1..].iter().fold(factors[0].clone(), |acc, f| kron(&acc, f));
            let v = gaussian(&mut rng, total);
            let slow = &dense * DVector::from_column_slice(&v);
            worst = worst.max(rel_err(&op.matvec(&v).unwrap(), slow.as_slice()));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(worst <= 1e-10 && secs <= 10.0, format!("max relative error {worst:.2e} over 200 instances, {secs:.2}s"))
}

fn exact_on_nodes() -> Outcome {
    let kernel = Kernel::rbf(2, 0.9, 1.3).unwrap();
    let axes = vec![
        (0..25).map(|i| -3.0 + 0.25 * i as f64).collect::<Vec<_>>(),
        (0..20).map(|i| 1.0 + 0.3 * i as f64).collect(),
    ];
    let grid = ProductGrid::new(axes.clone()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut coords = Vec::new();
    for _ in 0..400 {
        coords.push(axes[0][rng.random_range(0..25)]);
        coords.push(axes[1][rng.random_range(0..20)]);
    }
    let x = Points::new(coords, 2).unwrap();
    let u = grid.points();
    let kuu = kernel.eval_matrix(&u, &u).unwrap();
    let exact = DMatrix::from_fn(400, 400, |i, j| {
        let r2: f64 = (0..2).map(|p| (x.row(i)[p] - x.row(j)[p]).powi(2)).sum();
        1.3 * (-0.5 * r2 / 0.81).exp()
    });
    let mut parts = Vec::new();
    let mut worst: f64 = 0.0;
    for s in [InterpScheme::Linear, InterpScheme::Cubic, InterpScheme::Idw] {
        let w = build_w(&x, &grid, s).unwrap();
        let err = (ski_dense(&w, &w, &kuu) - &exact).amax();
        worst = worst.max(err);
        parts.push(format!("{} {err:.1e}", s.name()));
    }
    outcome(worst <= 1e-10, format!("max abs error n=400 2D: {}", parts.join(", ")))
}

fn sor_unification() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = Points::from_1d(uniform(&mut rng, 50, -4.0, 4.0));
    let u = Points::from_1d((0..20).map(|i| -4.0 + 8.0 * i as f64 / 19.0).collect());
    let kernel = Kernel::rbf(1, 1.2, 1.0).unwrap();
    let (wgp, kuu) = global_gp_weights(&x, &u, &kernel).unwrap();
    let ski = &wgp * kuu * wgp.transpose();
    // Independent oracle: K_XU K_UU⁻¹ K_UX by LU on the closed-form matrices,
    // with the same 1e-8·k(0) diagonal jitter every K_UU inverse carries.
    let k = |a: f64, b: f64| (-0.5 * ((a - b) / 1.2).powi(2)).exp();
    let kxu = DMatrix::from_fn(50, 20, |i, j| k(x.row(i)[0], u.row(j)[0]));
    let sor = |jitter: f64| {
        let kuu = DMatrix::from_fn(20, 20, |i, j| k(u.row(i)[0], u.row(j)[0]) + if i == j { jitter } else { 0.0 });
        &kxu * kuu.lu().solve(&kxu.transpose()).unwrap()
    };
    let err = (&ski - sor(1e-8)).amax();
    let raw = (&ski - sor(0.0)).amax();
    outcome(err <= 1e-8, format!("max abs difference {err:.2e} (n=50, m=20); {raw:.2e} against an unjittered K_UU"))
}

fn reconstruction() -> Outcome {
    let start = Instant::now();
    let report = run_reconstruct(&ExperimentConfig::default()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let g = report.error(SchemeChoice::GlobalGp, 40).unwrap();
    let c = report.error(SchemeChoice::Cubic, 40).unwrap();
    let l = report.error(SchemeChoice::Linear, 40).unwrap();
    let curve: Vec<f64> = report.curve(SchemeChoice::Cubic).iter().map(|p| p.1).collect();
    let inversions: Vec<f64> = curve.windows(2).filter(|w| w[1] > w[0]).map(|w| w[1] / w[0] - 1.0).collect();
    let monotone = inversions.len() <= 1 && inversions.iter().all(|&r| r <= 0.05);
    let pass = g < c && c < l && monotone && secs <= 120.0;
    let curve_txt: Vec<String> = curve.iter().map(|e| format!("{e:.2e}")).collect();
    outcome(
        pass,
        format!(
            "m=40 globalgp {g:.2e} < cubic {c:.2e} < linear {l:.2e}; cubic curve [{}]; {secs:.1}s",
            curve_txt.join(", ")
        ),
    )
}

fn cg_correctness() -> Outcome {
    let mut worst_err: f64 = 0.0;
    let mut worst_iters = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..4 {
        let (x, grid, kernel) = if case < 2 {
            let x = Points::from_1d(uniform(&mut rng, 400, -5.0, 5.0));
            let grid = padded_grid(&x.bounds(), &[200], 2).unwrap();
            (x, grid, Kernel::rbf(1, 0.5 + case as f64, 1.0).unwrap())
        } else {
            let x = Points::new(uniform(&mut rng, 800, -2.0, 2.0), 2).unwrap();
            let grid = padded_grid(&x.bounds(), &[30, 30], 2).unwrap();
            (x, grid, Kernel::rbf(2, 0.7, 1.0).unwrap())
        };
        let sigma2 = 0.1;
        let w = build_w(&x, &grid, InterpScheme::Cubic).unwrap();
        let kuu = StructuredKuu::from_kernel(&kernel, &grid, KuuStructure::Auto).unwrap();
        let op = SkiOperator::new(w, kuu, sigma2).unwrap();
        let mut a = op.kernel_dense().unwrap();
        for i in 0..400 {
            a[(i, i)] += sigma2;
        }
        let y = gaussian(&mut rng, 400);
        let direct = a.clone().lu().solve(&DVector::from_column_slice(&y)).unwrap();
        let report = cg_solve(|v, o| o.copy_from_slice(&op.apply(v).unwrap()), &y, &CgConfig::with_tol(1e-8)).unwrap();
        worst_err = worst_err.max(rel_err(&report.solution, direct.as_slice()));
        worst_iters = worst_iters.max(report.iterations);
    }
    outcome(
        worst_err <= 1e-6 && worst_iters <= 300,
        format!("max relative error {worst_err:.2e}, max iterations {worst_iters} over 4 systems (n=400, tol 1e-8)"),
    )
}

/// `log|K_SKI + σ²I|` on a 1D grid, scaled eigenvalues and dense Cholesky.
fn logdets(x: &Points, axis: Vec<f64>, kernel: &Kernel, sigma2: f64) -> (f64, f64) {
    let n = x.len();
    let grid = ProductGrid::new(vec![axis]).unwrap();
    let mut out = [0.0; 2];
    for (slot, method) in [LogDetMethod::Scaled, LogDetMethod::Dense].into_iter().enumerate() {
        let mut spec = SkiSpec::new(grid.clone(), InterpScheme::Cubic);
        spec.logdet = method;
        let model =
            GpModel::new(Dataset::new(x.clone(), vec![0.0; n]).unwrap(), kernel.clone(), sigma2, Scheme::Ski(spec))
                .unwrap();
        // With y = 0 the likelihood is -(log det + n log 2π) / 2.
        out[slot] = -2.0 * model.log_marginal_likelihood().unwrap().value - n as f64 * (2.0 * PI).ln();
    }
    (out[0], out[1])
}

fn logdet_accuracy() -> Outcome {
    let n = 200;
    let span = 50.0;
    let kernel = Kernel::rbf(1, 1.0, 1.0).unwrap();
    let sigma2 = 0.01;
    let axis = |m: usize| (0..m).map(|i| span * i as f64 / (m - 1) as f64).collect::<Vec<f64>>();
    // Desk configuration: every other node of a 400-point grid.
    let a400 = axis(400);
    let x = Points::from_1d((0..n).map(|i| a400[2 * i]).collect());
    let (s, d) = logdets(&x, a400, &kernel, sigma2);
    let desk = ((s - d) / d).abs();
    // Trend with inputs on the grid at every ratio: m = r(n-1)+1, inputs at every r-th node.
    let on_grid: Vec<f64> = [1, 2, 4]
        .iter()
        .map(|&r| {
            let ax = axis(r * (n - 1) + 1);
            let xr = Points::from_1d((0..n).map(|i| ax[r * i]).collect());
            let (s, d) = logdets(&xr, ax, &kernel, sigma2);
            ((s - d) / d).abs()
        })
        .collect();
    // Same trend for inputs between nodes, for reference.
    let xo = Points::from_1d((0..n).map(|i| (i as f64 + 0.37) * span / n as f64 * 0.999).collect());
    let off_grid: Vec<f64> = [1, 2, 4]
        .iter()
        .map(|&r| {
            let (s, d) = logdets(&xo, axis(r * n), &kernel, sigma2);
            ((s - d) / d).abs()
        })
        .collect();
    let trend = on_grid.windows(2).all(|w| w[1] <= w[0]);
    let fmt = |v: &[f64]| v.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>().join(", ");
    outcome(
        desk <= 0.05 && trend,
        format!(
            "desk relative error {desk:.2e}; on-grid errors at m/n=1,2,4 [{}]; off-grid [{}]",
            fmt(&on_grid),
            fmt(&off_grid)
        ),
    )
}

fn kernel_learning() -> Outcome {
    let start = Instant::now();
    // 1D: draw from an RBF by dense Cholesky, refit the lengthscale with SKI.
    let n = 500;
    let true_ell = 0.8;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut xs = uniform(&mut rng, n, 0.0, 20.0);
    xs.sort_by(f64::total_cmp);
    let k = DMatrix::from_fn(n, n, |i, j| {
        (-0.5 * ((xs[i] - xs[j]) / true_ell).powi(2)).exp() + if i == j { 0.01 + 1e-10 } else { 0.0 }
    });
    let l = k.cholesky().unwrap().l();
    let y: Vec<f64> = (l * DVector::from_vec(gaussian(&mut rng, n))).as_slice().to_vec();
    let x = Points::from_1d(xs);
    let grid = padded_grid(&x.bounds(), &[512], 2).unwrap();
    let model = GpModel::new(
        Dataset::new(x, y).unwrap(),
        Kernel::rbf(1, 2.0, 0.5).unwrap(),
        0.1,
        Scheme::Ski(SkiSpec::new(grid, InterpScheme::Cubic)),
    )
    .unwrap();
    let fit = learn_hypers(&model, &OptConfig::default()).unwrap();
    let ell = fit.model.kernel().named_hypers()[0].1.exp();
    let ell_ok = ((ell - true_ell) / true_ell).abs() <= 0.2;

    // 2D: generate-and-refit with a spectral mixture, SKI against FITC.
    let report = run_kernel_learning(&ExperimentConfig::default()).unwrap();
    let ski = report.fit(Method::Ski).unwrap();
    let fitc = report.fit(Method::Fitc).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let ski_ok = ski.correlations.iter().all(|&c| c >= 0.95);
    let order_ok = ski.correlations.iter().zip(&fitc.correlations).all(|(s, f)| s > f);
    let fmt = |c: &[f64]| c.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>().join(", ");
    outcome(
        ell_ok && ski_ok && order_ok && secs <= 900.0,
        format!(
            "1D lengthscale {ell:.3} vs {true_ell}; 2D correlations SKI [{}] FITC [{}]; SKI {:.0}s, FITC {:.0}s; total {secs:.0}s",
            fmt(&ski.correlations),
            fmt(&fitc.correlations),
            ski.learn_time_s,
            fitc.learn_time_s
        ),
    )
}

fn infill() -> Outcome {
    let start = Instant::now();
    let report = run_infill(&ExperimentConfig::default()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let budgets = report.matched_budgets();
    let ordered = !budgets.is_empty() && budgets.iter().all(|b| b.ski_best < b.fitc_best);
    let baseline = report.baseline_smae;
    let pairs: Vec<String> =
        budgets.iter().map(|b| format!("{:.2}s {:.3}/{:.3}", b.budget_s, b.ski_best, b.fitc_best)).collect();
    outcome(
        ordered && baseline == Some(1.0) && secs <= 600.0,
        format!(
            "n_train {}; mean baseline SMAE {:?}; budgets (SKI/FITC) [{}]; {secs:.0}s",
            report.n_train,
            baseline,
            pairs.join("; ")
        ),
    )
}

fn median_apply_time(op: &SkiOperator, v: &[f64], reps: usize) -> f64 {
    op.apply(v).unwrap();
    let mut t: Vec<f64> = (0..reps)
        .map(|_| {
            let s = Instant::now();
            std::hint::black_box(op.apply(v).unwrap());
            s.elapsed().as_secs_f64()
        })
        .collect();
    t.sort_by(f64::total_cmp);
    t[reps / 2]
}

fn scaling() -> Outcome {
    let n = 1 << 21;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let x = Points::from_1d(uniform(&mut rng, n, 0.0, 1000.0));
    let kernel = Kernel::rbf(1, 2.0, 1.0).unwrap();
    let v = gaussian(&mut rng, n);
    let mut times = Vec::new();
    for m in [1usize << 16, 1 << 17] {
        let grid = padded_grid(&x.bounds(), &[m], 2).unwrap();
        let kuu = StructuredKuu::from_kernel(&kernel, &grid, KuuStructure::Auto).unwrap();
        let op = SkiOperator::new(build_w(&x, &grid, InterpScheme::Cubic).unwrap(), kuu, 0.1).unwrap();
        times.push(median_apply_time(&op, &v, 15));
    }
    let ratio = times[1] / times[0];
    outcome(
        ratio <= 1.3,
        format!(
            "n=2^21 median apply {:.1} ms (m=2^16) vs {:.1} ms (m=2^17), ratio {ratio:.3}",
            times[0] * 1e3,
            times[1] * 1e3
        ),
    )
}

fn prior_sampling() -> Outcome {
    let kernel = Kernel::product(vec![Kernel::rbf(1, 0.8, 1.5).unwrap(), Kernel::rbf(1, 1.3, 1.0).unwrap()]).unwrap();
    let x = Points::new(vec![0.1, 0.2, 0.5, 0.4, 1.3, -0.7, -1.1, 1.6, 2.2, 0.05], 2).unwrap();
    let grid = padded_grid(&[(-2.0, 2.5), (-2.0, 2.0)], &[24, 22], 2).unwrap();
    let count = 10_000;
    let samples = sample_prior(&x, &grid, InterpScheme::Cubic, &kernel, 10, count).unwrap();
    let w = build_w(&x, &grid, InterpScheme::Cubic).unwrap();
    let u = grid.points();
    let target = ski_dense(&w, &w, &kernel.eval_matrix(&u, &u).unwrap());
    let mut worst: f64 = 0.0;
    for i in 0..5 {
        for j in i..5 {
            let est = samples.iter().map(|s| s[i] * s[j]).sum::<f64>() / count as f64;
            // Standard error of a Gaussian product moment.
            let se = ((target[(i, i)] * target[(j, j)] + target[(i, j)].powi(2)) / count as f64).sqrt();
            worst = worst.max((est - target[(i, j)]).abs() / se);
        }
    }
    outcome(worst <= 5.0, format!("largest deviation {worst:.2} standard errors over 15 covariance entries"))
}

fn main() -> ExitCode {
    let criteria: [(usize, &str, fn() -> Outcome); 10] = [
        (1, "structured matvecs match dense", structured_matvecs),
        (2, "SKI exact on grid nodes", exact_on_nodes),
        (3, "SoR equals SKI with global weights", sor_unification),
        (4, "reconstruction orderings", reconstruction),
        (5, "CG matches direct solve", cg_correctness),
        (6, "scaled log-determinant", logdet_accuracy),
        (7, "kernel learning recovery", kernel_learning),
        (8, "infill ordering", infill),
        (9, "Toeplitz apply scaling", scaling),
        (10, "prior sampler covariance", prior_sampling),
    ];
    let only: Option<Vec<usize>> = std::env::var("SKIGP_ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    let mut failed = 0;
    for (id, name, f) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let o = f();
        if !o.pass {
            failed += 1;
        }
        println!("criterion {id:>2} {}: {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {failed} failed");
    if failed > 0 && std::env::var("SKIGP_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
