//! Acceptance criteria 1-8. Prints one PASS/FAIL line per criterion and exits non-zero on any failure.

use std::fs;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use witten_core::decay::{
    correlation_profile, covariance_decay_check, fit_decay_rate, weighted_gradient_report, Aggregation,
    CovarianceRoute, NOISE_SIGMAS,
};
use witten_core::lattice::{Lattice, SiteSet};
use witten_core::model::{certificate_for, max_admissible_kappa, min_weighted_hessian_eig, Hamiltonian, WeightSpec};
use witten_core::sampler::{correlation_matrix, estimate_covariance, run_chain, ChainConfig, Proposal};
use witten_core::witten_grid::{witten_equivalence_check, GridFunction, GridSpec, SolverOptions, WittenGrid};
use witten_core::Observable;

const IDENTITY_TOL: f64 = 1e-4;
const MCMC_SIGMAS: f64 = 3.0;
const HS_FLOOR: f64 = 1e-4;
const REFINEMENT_GAIN: f64 = 3.0;
const EIG_SLACK: f64 = 1e-10;
const LAMBDA_GROWTH: f64 = 0.05;
const DELTA_FLOOR: f64 = 0.05;
const R2_MIN: f64 = 0.9;
const SLOPE: f64 = 2.0;
const SLOPE_TOL: f64 = 0.3;
const KERNEL_TOL: f64 = 1e-3;
const BL_RTOL: f64 = 1e-6;

type Outcome = Result<String, String>;

fn quad(m: usize) -> Hamiltonian<f64> {
    Hamiltonian::quadratic(Lattice::chain(m).unwrap())
}

fn kac(m: usize, nu: f64) -> Hamiltonian<f64> {
    Hamiltonian::kac(Lattice::chain(m).unwrap(), nu).unwrap()
}

fn grid(h: &Hamiltonian<f64>, l: f64, n: usize) -> WittenGrid<f64> {
    WittenGrid::new(h, GridSpec::new(l, n, h.dim()).unwrap()).unwrap()
}

fn coord(spec: GridSpec<f64>, i: usize) -> GridFunction<f64> {
    GridFunction::from_fn(spec, |x| x[i])
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn log_slope(hs: &[f64], errs: &[f64]) -> f64 {
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn gaussian_three_routes() -> Outcome {
    let model = quad(2);
    let g = grid(&model, 8.0, 81);
    let spec = *g.spec();
    let opts = SolverOptions::default();
    let chain = run_chain(&model, &ChainConfig::new(2, 1_000_000, 1)).map_err(|e| e.to_string())?;
    let mut worst_grid = 0.0_f64;
    let mut worst_z = 0.0_f64;
    for (i, j) in [(0, 0), (0, 1), (1, 1)] {
        let expect = if i == j { 1.0 } else { 0.0 };
        let (gi, gj) = (coord(spec, i), coord(spec, j));
        let direct = g.covariance_direct(&gi, &gj).map_err(|e| e.to_string())?;
        let hs = g.covariance_hs(&gi, &gj, &opts).map_err(|e| e.to_string())?;
        for (name, v) in [("direct", direct), ("hs", hs)] {
            ensure((v - expect).abs() <= IDENTITY_TOL, || format!("{name} cov({i},{j}) = {v:e}"))?;
        }
        worst_grid = worst_grid.max((direct - expect).abs()).max((hs - expect).abs());
        let mc = estimate_covariance(&chain, i, j).map_err(|e| e.to_string())?;
        let z = (mc.estimate - expect).abs() / mc.stderr;
        ensure(z <= MCMC_SIGMAS, || format!("mcmc cov({i},{j}) = {} +- {}", mc.estimate, mc.stderr))?;
        worst_z = worst_z.max(z);
    }
    Ok(format!("grid max err {worst_grid:.2e}, mcmc max |z| {worst_z:.2}"))
}

fn kac_cross_route() -> Outcome {
    let model = kac(2, 0.1);
    let opts = SolverOptions::default();
    let mut gaps = Vec::new();
    for n in [41, 81] {
        let g = grid(&model, 8.0, n);
        let spec = *g.spec();
        let tol = HS_FLOOR.max(5.0 * spec.spacing().powi(2));
        let mut worst = 0.0_f64;
        for (i, j) in [(0, 0), (0, 1)] {
            let (gi, gj) = (coord(spec, i), coord(spec, j));
            let direct = g.covariance_direct(&gi, &gj).map_err(|e| e.to_string())?;
            let hs = g.covariance_hs(&gi, &gj, &opts).map_err(|e| e.to_string())?;
            let gap = (hs - direct).abs();
            ensure(gap <= tol, || format!("n={n} pair ({i},{j}) gap {gap:e} > {tol:e}"))?;
            worst = worst.max(gap);
        }
        gaps.push(worst);
    }
    let gain = gaps[0] / gaps[1];
    ensure(gain >= REFINEMENT_GAIN, || format!("refinement gain {gain:.2}"))?;
    Ok(format!("gap {:.2e} -> {:.2e} (x{gain:.2})", gaps[0], gaps[1]))
}

fn certificate_oracle() -> Outcome {
    let lat = Lattice::chain(6).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = f64::INFINITY;
    for _ in 0..20 {
        let kappa = rng.random_range(0.0..2.0);
        let nu_c = 1.0 / (2.0 * (2.0 + f64::exp(kappa)));
        let nu = rng.random_range(0.02..0.98) * nu_c;
        let model = Hamiltonian::kac(lat.clone(), nu).unwrap();
        let cert = certificate_for(&model, kappa);
        ensure(cert.admissible, || format!("nu={nu} kappa={kappa} not admissible"))?;
        let w = WeightSpec::new(&lat, kappa, SiteSet::singleton(rng.random_range(0..6))).unwrap();
        let mut points = vec![vec![0.0; 6]];
        points.extend((1..1000).map(|_| (0..6).map(|_| rng.random_range(-6.0..6.0)).collect::<Vec<f64>>()));
        let eig = min_weighted_hessian_eig(&model, &w, &points).map_err(|e| e.to_string())?;
        ensure(eig >= cert.delta0 - EIG_SLACK, || {
            format!("nu={nu} kappa={kappa}: eig {eig} < delta0 {}", cert.delta0)
        })?;
        worst = worst.min(eig - cert.delta0);
    }
    for k in 0..10 {
        let kappa = 0.2 * k as f64;
        let nu_c = 1.0 / (2.0 * (2.0 + f64::exp(kappa)));
        let model = Hamiltonian::kac(lat.clone(), nu_c * (1.0 + 1e-9)).unwrap();
        let cert = certificate_for(&model, kappa);
        ensure(!cert.admissible, || format!("kappa={kappa} just past threshold still admissible"))?;
    }
    Ok(format!("min eig - delta0 = {worst:.3e}; 10/10 past threshold inadmissible"))
}

fn weighted_gradient_suite() -> Outcome {
    let nu = 0.05;
    let kmax = max_admissible_kappa(nu, 1, DELTA_FLOOR).ok_or("no admissible kappa")?;
    let kappas = [0.1, 0.2, kmax];
    let opts = SolverOptions::default();
    let s0 = SiteSet::singleton(0);
    let sups = |m: usize, n: usize| -> Result<Vec<(f64, f64, bool)>, String> {
        let g = grid(&kac(m, nu), 8.0, n);
        let x0 = coord(*g.spec(), 0);
        let f = g.solve_zero_mean(&x0, &opts).map_err(|e| e.to_string())?.field;
        let (df, dg) = (f.gradient(), x0.gradient());
        kappas
            .iter()
            .map(|&k| {
                let r = weighted_gradient_report(&g, &df, &dg, &s0, k).map_err(|e| e.to_string())?;
                Ok((r.sup_weighted_norm, r.rhs_bound, r.pass))
            })
            .collect()
    };
    let main = sups(3, 21)?;
    for (k, (sup, rhs, pass)) in kappas.iter().zip(&main) {
        ensure(*pass, || format!("kappa={k}: sup {sup} > {rhs}"))?;
    }
    let (three, four) = (sups(3, 15)?, sups(4, 15)?);
    for (k, (a, b)) in kappas.iter().zip(three.iter().zip(&four)) {
        ensure(b.0 <= a.0 * (1.0 + LAMBDA_GROWTH), || format!("kappa={k}: sup grows {} -> {}", a.0, b.0))?;
    }
    Ok(format!(
        "sup {:.4}/{:.4}/{:.4} at kappa 0.1/0.2/{kmax:.4}; m 3->4 at kappa_max {:.4} -> {:.4}",
        main[0].0, main[1].0, main[2].0, three[2].0, four[2].0
    ))
}

fn exponential_decay() -> Outcome {
    let nu = 0.05;
    let model = kac(8, nu);
    let cfg = ChainConfig {
        proposal: Proposal::SingleSiteIndependent,
        proposal_scale: 1.0,
        ..ChainConfig::new(8, 4_000_000, 7)
    };
    let chain = run_chain(&model, &cfg).map_err(|e| e.to_string())?;
    let corr = correlation_matrix(&chain).map_err(|e| e.to_string())?;
    let profile = correlation_profile(&corr, model.lattice(), 0, Aggregation::Max).map_err(|e| e.to_string())?;
    ensure(profile.is_decreasing_within(NOISE_SIGMAS), || format!("profile not decreasing: {:?}", profile.entries))?;
    let fit = fit_decay_rate(&profile).map_err(|e| e.to_string())?;
    ensure(fit.kappa_fit > 0.0 && fit.r_squared >= R2_MIN, || format!("{fit:?}"))?;
    let kmax = max_admissible_kappa(nu, 1, DELTA_FLOOR).ok_or("no admissible kappa")?;
    let mut tightest = 0.0_f64;
    for j in 3..8 {
        let c = covariance_decay_check(
            &model,
            CovarianceRoute::Chain(&chain),
            &Observable::Coordinate(0),
            &Observable::Coordinate(j),
            kmax,
            None,
        )
        .map_err(|e| e.to_string())?;
        ensure(c.pass, || format!("j={j}: {c:?}"))?;
        tightest = tightest.max(c.lhs / c.rhs);
    }
    Ok(format!(
        "{} profile points, kappa_fit {:.3} +- {:.3}, r2 {:.4}; max lhs/rhs {tightest:.3}",
        profile.entries.len(),
        fit.kappa_fit,
        fit.kappa_stderr,
        fit.r_squared
    ))
}

fn operator_identities() -> Outcome {
    let mut notes = Vec::new();
    for (name, model) in [("quadratic", quad(1)), ("kac", kac(1, 0.1))] {
        let mut hs = Vec::new();
        let mut errs = Vec::new();
        for n in [41, 81, 161, 321] {
            let spec = GridSpec::new(8.0, n, 1).unwrap();
            let v = GridFunction::from_fn(spec, |x: &[f64]| x[0].sin());
            errs.push(witten_equivalence_check(&model, spec, &v).map_err(|e| e.to_string())?);
            hs.push(spec.spacing());
        }
        let s = log_slope(&hs, &errs);
        ensure((s - SLOPE).abs() <= SLOPE_TOL, || format!("{name}: slope {s:.3} from {errs:?}"))?;
        notes.push(format!("{name} slope {s:.3}"));
    }
    for (name, model) in [("quadratic", quad(1)), ("kac 1-site", kac(1, 0.1)), ("kac pair", kac(2, 0.1))] {
        let r = grid(&model, 8.0, 161).kernel_residual();
        ensure(r <= KERNEL_TOL, || format!("{name}: kernel residual {r:e}"))?;
        notes.push(format!("{name} kernel {r:.2e}"));
    }
    Ok(notes.join(", "))
}

fn brascamp_lieb() -> Outcome {
    let mut worst = 0.0_f64;
    for model in [quad(2), kac(2, 0.1)] {
        let g = grid(&model, 8.0, 81);
        let spec = *g.spec();
        let obs: [(&str, fn(&[f64]) -> f64); 3] =
            [("x_0", |x| x[0]), ("x_0^2", |x| x[0] * x[0]), ("x_0 x_1", |x| x[0] * x[1])];
        for (name, f) in obs {
            let r = g.brascamp_lieb_check(&GridFunction::from_fn(spec, f)).map_err(|e| e.to_string())?;
            ensure(r.holds(BL_RTOL), || format!("{name}: variance {} > bound {}", r.variance, r.bl_bound))?;
            worst = worst.max(r.variance / r.bl_bound);
        }
    }
    Ok(format!("max variance/bound {worst:.6}"))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = dir.path().join("config.json");
    fs::write(
        &cfg,
        r#"{"model": {"kind": "kac", "nu": 0.1}, "lattice": {"extents": [2]},
            "grid": {"half_width": 8, "points_per_axis": 41},
            "chain": {"n_steps": 50000}, "kappas": [0.1, 0.3], "seed": 21}"#,
    )
    .map_err(|e| e.to_string())?;
    let snapshot = |task: &str, run: usize| -> Result<Vec<(String, Vec<u8>)>, String> {
        let out = dir.path().join(format!("{task}{run}"));
        let status = Command::new(env!("CARGO_BIN_EXE_witten-decay"))
            .args([task, "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .status()
            .map_err(|e| e.to_string())?;
        ensure(status.success(), || format!("{task} exited with {status}"))?;
        let mut files: Vec<_> = fs::read_dir(&out)
            .map_err(|e| e.to_string())?
            .map(|e| {
                let e = e.unwrap();
                (e.file_name().into_string().unwrap(), fs::read(e.path()).unwrap())
            })
            .collect();
        files.sort();
        Ok(files)
    };
    let mut n = 0;
    for task in ["crosscheck", "decay"] {
        let a = snapshot(task, 0)?;
        let b = snapshot(task, 1)?;
        ensure(a == b, || format!("{task} outputs differ"))?;
        n += a.len();
    }
    Ok(format!("{n} files byte-identical"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, u64); 8] = [
        ("1 gaussian three-route agreement", gaussian_three_routes, 120),
        ("2 kac cross-route agreement", kac_cross_route, 300),
        ("3 certificate vs eigenvalue oracle", certificate_oracle, 60),
        ("4 weighted gradient suite", weighted_gradient_suite, 1200),
        ("5 exponential decay", exponential_decay, 600),
        ("6 operator identities", operator_identities, 60),
        ("7 brascamp-lieb ordering", brascamp_lieb, 120),
        ("8 determinism", determinism, 600),
    ];
    let mut failed = 0;
    for (name, run, limit) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if elapsed > Duration::from_secs(limit) => Err(format!("{msg}; runtime over {limit} s")),
            other => other,
        };
        match outcome {
            Ok(msg) => println!("PASS criterion {name}: {msg} [{:.1} s]", elapsed.as_secs_f64()),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {name}: {msg} [{:.1} s]", elapsed.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all 8 acceptance criteria passed");
}
