//! The six batch tasks. Each writes its outputs and returns whether every check passed.

use serde_json::{json, Value};
use witten_core::decay::{
    correlation_profile, covariance_decay_check, fit_decay_rate, weighted_gradient_report, CovarianceRoute,
    DecayCheck, DecayFit, DecayProfile,
};
use witten_core::model::{certificate_for, check_assumptions, AssumptionReport, ConvexityCertificate, ModelKind, ShellWitness};
use witten_core::sampler::{
    correlation_matrix, estimate_cross, estimate_mean, run_chain, ChainConfig, CorrelationEstimate, CorrelationMatrix,
    Proposal,
};
use witten_core::witten_grid::{GridFunction, GridSpec, WittenGrid};
use witten_core::{Error, Hamiltonian64, Lattice, Observable};

use crate::config::{config_err, RouteConfig, RunConfig};
use crate::output::{num, nums, OutDir};

const DEFAULT_RADII: [f64; 6] = [0.5, 1.0, 2.0, 4.0, 8.0, 16.0];
const DEFAULT_ASSUMPTION_SAMPLES: usize = 64;
/// Relative accuracy required of the synthetic fit.
const SYNTHETIC_FIT_RTOL: f64 = 1e-9;

pub struct Context<'a> {
    pub cfg: &'a RunConfig,
    pub model: Hamiltonian64,
    pub seed: u64,
    pub out: OutDir,
}

fn model_json(h: &Hamiltonian64) -> Value {
    let extents = h.lattice().extents().to_vec();
    match h.kind() {
        ModelKind::Quadratic => json!({"kind": "quadratic", "extents": extents}),
        ModelKind::Kac { nu } => json!({"kind": "kac", "nu": num(nu), "extents": extents}),
        ModelKind::GaussianBump { amplitude, width } => json!({
            "kind": "gaussian_bump", "amplitude": num(amplitude), "width": num(width), "extents": extents
        }),
    }
}

fn certificate_json(c: &ConvexityCertificate<f64>) -> Value {
    json!({
        "nu": num(c.nu),
        "dim": c.dim,
        "kappa": num(c.kappa),
        "row_bound": num(c.row_bound),
        "col_bound": num(c.col_bound),
        "delta0": num(c.delta0),
        "admissible": c.admissible,
    })
}

fn shell_json(w: &ShellWitness<f64>) -> Value {
    json!({"order": w.order, "shell_max": nums(&w.shell_max), "constant": num(w.constant), "pass": w.pass})
}

fn assumptions_json(r: &AssumptionReport<f64>) -> Value {
    json!({
        "seed": r.seed,
        "n_samples": r.n_samples,
        "radii": nums(&r.radii),
        "gradient_growth": {
            "norms": r.gradient_growth.norms.iter().map(|row| nums(row)).collect::<Vec<_>>(),
            "pass": r.gradient_growth.pass,
        },
        "bounded_derivative": shell_json(&r.bounded_derivative),
        "derivative_ratios": r.derivative_ratios.iter().map(shell_json).collect::<Vec<_>>(),
        "convexity": {
            "min_eigenvalue": num(r.convexity.min_eigenvalue),
            "argmin": nums(&r.convexity.argmin),
            "pass": r.convexity.pass,
        },
        "pass": r.all_pass(),
    })
}

fn grid_json(spec: &GridSpec<f64>) -> Value {
    json!({
        "half_width": num(spec.half_width()),
        "points_per_axis": spec.points_per_axis(),
        "dim": spec.dim(),
        "spacing": num(spec.spacing()),
        "nodes": spec.node_count(),
    })
}

fn chain_json(cfg: &ChainConfig<f64>) -> Value {
    let proposal = match cfg.proposal {
        Proposal::FullVector => "full_vector",
        Proposal::SingleSite => "single_site",
        Proposal::SingleSiteIndependent => "single_site_independent",
        Proposal::Langevin => "langevin",
    };
    json!({
        "n_steps": cfg.n_steps,
        "burn_in": cfg.burn_in,
        "proposal_scale": num(cfg.proposal_scale),
        "seed": cfg.seed,
        "thin": cfg.thin,
        "proposal": proposal,
    })
}

fn estimate_json(e: &CorrelationEstimate) -> Value {
    json!({"i": e.i, "j": e.j, "estimate": num(e.estimate), "stderr": num(e.stderr), "tau_int": num(e.tau_int)})
}

fn check_json(model: &Value, g: &Observable, h: &Observable, c: &DecayCheck) -> Value {
    json!({
        "model": model,
        "kappa": num(c.kappa),
        "delta0": num(c.delta0),
        "lhs": num(c.lhs),
        "rhs": num(c.rhs),
        "pass": c.pass,
        "g": g.to_string(),
        "h": h.to_string(),
        "distance": c.distance,
        "cov": num(c.cov),
        "cov_stderr": num(c.cov_stderr),
        "c_ref": num(c.c_ref),
    })
}

fn profile_json(p: &DecayProfile) -> Value {
    json!({
        "anchor": p.anchor,
        "aggregation": format!("{:?}", p.aggregation).to_lowercase(),
        "entries": p.entries.iter().map(|e| json!({
            "distance": e.distance,
            "abs_correlation": num(e.abs_correlation),
            "stderr": num(e.stderr),
            "pairs": e.pairs,
        })).collect::<Vec<_>>(),
        "truncated_at": p.truncated_at,
    })
}

fn fit_json(f: &DecayFit) -> Value {
    json!({
        "kappa_fit": num(f.kappa_fit),
        "c_fit": num(f.c_fit),
        "r_squared": num(f.r_squared),
        "n_points": f.n_points,
        "kappa_stderr": num(f.kappa_stderr),
    })
}

fn validate_kappas(kappas: &[f64]) -> anyhow::Result<()> {
    match kappas.iter().position(|k| !(k.is_finite() && *k >= 0.0)) {
        Some(i) => Err(config_err(format!("kappas[{i}] must be finite and >= 0"))),
        None => Ok(()),
    }
}

fn file_label(o: &Observable) -> String {
    o.to_string().replace('*', "_")
}

pub fn certify(ctx: &Context) -> anyhow::Result<bool> {
    let kappas = ctx.cfg.kappas();
    validate_kappas(&kappas)?;
    let a = ctx.cfg.assumptions.clone().unwrap_or(crate::config::AssumptionConfig {
        n_samples: None,
        radii: None,
    });
    let n_samples = a.n_samples.unwrap_or(DEFAULT_ASSUMPTION_SAMPLES);
    let radii = a.radii.unwrap_or_else(|| DEFAULT_RADII.to_vec());
    if n_samples == 0 {
        return Err(config_err("assumptions.n_samples must be at least 1"));
    }
    if radii.is_empty() || radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(config_err("assumptions.radii must be a non-empty list of positive numbers"));
    }
    let certs: Vec<_> = kappas.iter().map(|&k| certificate_for(&ctx.model, k)).collect();
    let report = check_assumptions(&ctx.model, ctx.seed, n_samples, &radii);
    let pass = certs.iter().all(|c| c.admissible) && report.all_pass();
    ctx.out.write_json(
        "certify.json",
        &json!({
            "task": "certify",
            "model": model_json(&ctx.model),
            "certificates": certs.iter().map(certificate_json).collect::<Vec<_>>(),
            "assumptions": assumptions_json(&report),
            "pass": pass,
        }),
    )?;
    Ok(pass)
}

fn build_grid(ctx: &Context) -> anyhow::Result<(WittenGrid<f64>, witten_core::witten_grid::SolverOptions<f64>)> {
    let (spec, opts) = ctx.cfg.grid_spec(ctx.model.dim())?;
    Ok((WittenGrid::new(&ctx.model, spec)?, opts))
}

pub fn solve(ctx: &Context) -> anyhow::Result<bool> {
    let (grid, opts) = build_grid(ctx)?;
    let spec = *grid.spec();
    let kappas = ctx.cfg.kappas.clone().unwrap_or_default();
    validate_kappas(&kappas)?;
    let mut pass = true;
    let mut results = Vec::new();
    for g in ctx.cfg.observables(ctx.model.lattice())? {
        let gf = GridFunction::from_fn(spec, |x| g.value(x));
        let sol = match grid.solve_zero_mean(&gf, &opts) {
            Ok(s) => s,
            Err(Error::NotConverged { iterations, residual }) => {
                pass = false;
                results.push(json!({
                    "observable": g.to_string(),
                    "converged": false,
                    "iterations": iterations,
                    "residual": num(residual),
                }));
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let name = format!("solve_{}.csv", file_label(&g));
        ctx.out.write(&name, |w| sol.field.write_csv(w))?;
        let (df, dg) = (sol.field.gradient(), gf.gradient());
        let mut weighted = Vec::new();
        for &k in &kappas {
            let cert = certificate_for(&ctx.model, k);
            if !cert.admissible || g.support().is_empty() {
                pass &= cert.admissible;
                weighted.push(json!({"kappa": num(k), "certificate": certificate_json(&cert), "pass": false}));
                continue;
            }
            let r = weighted_gradient_report(&grid, &df, &dg, &g.support(), k)?;
            pass &= r.pass;
            weighted.push(json!({
                "kappa": num(r.kappa),
                "delta0": num(r.delta0),
                "sup_weighted_norm": num(r.sup_weighted_norm),
                "rhs_bound": num(r.rhs_bound),
                "pass": r.pass,
            }));
        }
        results.push(json!({
            "observable": g.to_string(),
            "converged": true,
            "iterations": sol.stats.iterations,
            "residual": num(sol.stats.residual),
            "output": name,
            "weighted_gradient": weighted,
        }));
    }
    ctx.out.write_json(
        "solve.json",
        &json!({
            "task": "solve",
            "model": model_json(&ctx.model),
            "grid": grid_json(&spec),
            "kernel_residual": num(grid.kernel_residual()),
            "results": results,
            "pass": pass,
        }),
    )?;
    Ok(pass)
}

pub fn cov(ctx: &Context) -> anyhow::Result<bool> {
    let (grid, opts) = build_grid(ctx)?;
    let spec = *grid.spec();
    let tol_floor = ctx.cfg.crosscheck.clone().unwrap_or_default().grid_tol;
    let tol = tol_floor.max(5.0 * spec.spacing().powi(2));
    let mut rows = Vec::new();
    let mut csv = vec!["g,h,cov_direct,cov_hs,discrepancy".to_string()];
    let mut pass = true;
    for (g, h) in ctx.cfg.pairs(ctx.model.lattice())? {
        let gf = GridFunction::from_fn(spec, |x| g.value(x));
        let hf = GridFunction::from_fn(spec, |x| h.value(x));
        let direct = grid.covariance_direct(&gf, &hf)?;
        let hs = grid.covariance_hs(&gf, &hf, &opts)?;
        let gap = (hs - direct).abs();
        let ok = gap <= tol;
        pass &= ok;
        csv.push(format!("{g},{h},{direct:.16e},{hs:.16e},{gap:.16e}"));
        rows.push(json!({
            "pair": [g.to_string(), h.to_string()],
            "cov_direct": num(direct),
            "cov_hs": num(hs),
            "discrepancy": num(gap),
            "pass": ok,
        }));
    }
    ctx.out.write("cov.csv", |w| writeln!(w, "{}", csv.join("\n")))?;
    ctx.out.write_json(
        "cov.json",
        &json!({
            "task": "cov",
            "model": model_json(&ctx.model),
            "grid": grid_json(&spec),
            "tolerance": num(tol),
            "pairs": rows,
            "pass": pass,
        }),
    )?;
    Ok(pass)
}

pub fn sample(ctx: &Context) -> anyhow::Result<bool> {
    let cfg = ctx.cfg.chain_config(ctx.model.dim(), ctx.seed)?;
    let chain = run_chain(&ctx.model, &cfg)?;
    let cm = correlation_matrix(&chain)?;
    if ctx.cfg.chain.as_ref().and_then(|c| c.write_chain).unwrap_or(true) {
        ctx.out.write("chain.csv", |w| chain.write_csv(w))?;
    }
    ctx.out.write("covariance.csv", |w| cm.write_csv(w, false))?;
    ctx.out.write("correlation.csv", |w| cm.write_csv(w, true))?;
    let means = (0..chain.dim())
        .map(|i| {
            let e = estimate_mean(&chain, |x| x[i])?;
            Ok(json!({"site": i, "estimate": num(e.estimate), "stderr": num(e.stderr), "tau_int": num(e.tau_int)}))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    ctx.out.write_json(
        "sample.json",
        &json!({
            "task": "sample",
            "model": model_json(&ctx.model),
            "chain": chain_json(&cfg),
            "n_samples": chain.len(),
            "acceptance_rate": num(chain.acceptance_rate()),
            "means": means,
            "covariance": cm.cov.iter().map(estimate_json).collect::<Vec<_>>(),
            "pass": true,
        }),
    )?;
    Ok(true)
}

/// Correlation matrix from grid quadrature, with zero error bars.
fn grid_correlations(grid: &WittenGrid<f64>) -> anyhow::Result<CorrelationMatrix> {
    let spec = *grid.spec();
    let m = spec.dim();
    let coords: Vec<GridFunction<f64>> = (0..m).map(|i| GridFunction::from_fn(spec, |x| x[i])).collect();
    let mut cov = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            cov.push(grid.covariance_direct(&coords[i], &coords[j])?);
        }
    }
    let est = |i: usize, j: usize, v: f64| CorrelationEstimate {
        i,
        j,
        estimate: v,
        stderr: 0.0,
        tau_int: 0.5,
    };
    let mut cells = Vec::with_capacity(m * m);
    let mut cors = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            let c = cov[i * m + j];
            cells.push(est(i, j, c));
            let r = if i == j { 1.0 } else { c / (cov[i * m + i] * cov[j * m + j]).sqrt() };
            cors.push(est(i, j, r));
        }
    }
    Ok(CorrelationMatrix {
        dim: m,
        cov: cells,
        cor: cors,
    })
}

fn default_decay_pairs(lat: &Lattice, anchor: usize) -> Vec<(Observable, Observable)> {
    (0..lat.len())
        .filter(|&j| j != anchor)
        .map(|j| (Observable::Coordinate(anchor), Observable::Coordinate(j)))
        .collect()
}

pub fn decay(ctx: &Context) -> anyhow::Result<bool> {
    let section = ctx.cfg.decay.clone().unwrap_or_default();
    let lat = ctx.model.lattice().clone();
    let model = model_json(&ctx.model);
    if section.anchor >= lat.len() {
        return Err(config_err(format!("decay.anchor {} is not a site", section.anchor)));
    }
    let aggregation = ctx.cfg.aggregation();

    if let Some(syn) = &section.synthetic {
        if !(syn.kappa.is_finite() && syn.c.is_finite() && syn.c > 0.0) {
            return Err(config_err("decay.synthetic needs finite kappa and positive c"));
        }
        let corr = CorrelationMatrix::from_correlations(lat.len(), |i, j| {
            syn.c * (-syn.kappa * lat.distance(i, j).unwrap_or(0) as f64).exp()
        });
        let profile = correlation_profile(&corr, &lat, section.anchor, aggregation)?;
        let fit = fit_decay_rate(&profile);
        let recovered = match &fit {
            Ok(f) => {
                (f.kappa_fit - syn.kappa).abs() <= SYNTHETIC_FIT_RTOL * syn.kappa.abs().max(1.0)
                    && (f.c_fit / syn.c - 1.0).abs() <= SYNTHETIC_FIT_RTOL
            }
            Err(_) => false,
        };
        return finish_decay(ctx, &model, "synthetic", Vec::new(), Vec::new(), &profile, fit, recovered);
    }

    let kappas = ctx.cfg.kappas();
    validate_kappas(&kappas)?;
    let certs: Vec<_> = kappas.iter().map(|&k| certificate_for(&ctx.model, k)).collect();
    let cert_values: Vec<Value> = certs.iter().map(certificate_json).collect();
    if let Some(bad) = certs.iter().find(|c| !c.admissible) {
        ctx.out.write_json(
            "decay.json",
            &json!({
                "task": "decay",
                "model": model,
                "certificates": cert_values,
                "error": format!("kappa {} is not admissible (delta0 = {:.16e})", bad.kappa, bad.delta0),
                "pass": false,
            }),
        )?;
        return Ok(false);
    }
    let pairs = match ctx.cfg.pairs {
        Some(_) => ctx.cfg.pairs(&lat)?,
        None => default_decay_pairs(&lat, section.anchor),
    };

    let (route_name, corr, checks) = match section.route {
        RouteConfig::Mcmc => {
            let cfg = ctx.cfg.chain_config(ctx.model.dim(), ctx.seed)?;
            let chain = run_chain(&ctx.model, &cfg)?;
            let corr = correlation_matrix(&chain)?;
            let mut checks = Vec::new();
            for &k in &kappas {
                for (g, h) in &pairs {
                    let c = covariance_decay_check(&ctx.model, CovarianceRoute::Chain(&chain), g, h, k, section.c_ref)?;
                    checks.push((*g, *h, c));
                }
            }
            ("mcmc", corr, checks)
        }
        RouteConfig::Grid => {
            let (grid, _) = build_grid(ctx)?;
            let corr = grid_correlations(&grid)?;
            let mut checks = Vec::new();
            for &k in &kappas {
                for (g, h) in &pairs {
                    let c = covariance_decay_check(&ctx.model, CovarianceRoute::Grid(&grid), g, h, k, section.c_ref)?;
                    checks.push((*g, *h, c));
                }
            }
            ("grid", corr, checks)
        }
    };
    ctx.out.write("correlation.csv", |w| corr.write_csv(w, true))?;
    let profile = correlation_profile(&corr, &lat, section.anchor, aggregation)?;
    let fit = fit_decay_rate(&profile);
    let pass = checks.iter().all(|(_, _, c)| c.pass);
    let check_values = checks.iter().map(|(g, h, c)| check_json(&model, g, h, c)).collect();
    finish_decay(ctx, &model, route_name, cert_values, check_values, &profile, fit, pass)
}

#[allow(clippy::too_many_arguments)]
fn finish_decay(
    ctx: &Context,
    model: &Value,
    route: &str,
    certificates: Vec<Value>,
    checks: Vec<Value>,
    profile: &DecayProfile,
    fit: witten_core::Result<DecayFit>,
    pass: bool,
) -> anyhow::Result<bool> {
    ctx.out.write("profile.csv", |w| profile.write_csv(w))?;
    let fit_value = match &fit {
        Ok(f) => {
            ctx.out.write("fit.csv", |w| f.write_csv(w))?;
            fit_json(f)
        }
        Err(e) => json!({"error": e.to_string()}),
    };
    ctx.out.write_json(
        "decay.json",
        &json!({
            "task": "decay",
            "model": model,
            "route": route,
            "certificates": certificates,
            "checks": checks,
            "profile": profile_json(profile),
            "fit": fit_value,
            "pass": pass,
        }),
    )?;
    Ok(pass)
}

pub fn crosscheck(ctx: &Context) -> anyhow::Result<bool> {
    let (grid, opts) = build_grid(ctx)?;
    let cfg = ctx.cfg.chain_config(ctx.model.dim(), ctx.seed)?;
    let tol = ctx.cfg.crosscheck.clone().unwrap_or_default();
    let spec = *grid.spec();
    let grid_tol = tol.grid_tol.max(5.0 * spec.spacing().powi(2));
    let chain = run_chain(&ctx.model, &cfg)?;
    let mut rows = Vec::new();
    let mut csv = vec!["g,h,cov_direct,cov_hs,cov_mcmc,cov_mcmc_stderr,max_discrepancy,pass".to_string()];
    let mut pass = true;
    for (g, h) in ctx.cfg.pairs(ctx.model.lattice())? {
        let gf = GridFunction::from_fn(spec, |x| g.value(x));
        let hf = GridFunction::from_fn(spec, |x| h.value(x));
        let direct = grid.covariance_direct(&gf, &hf)?;
        let hs = grid.covariance_hs(&gf, &hf, &opts)?;
        let mc = estimate_cross(&chain, |x| g.value(x), |x| h.value(x))?;
        let discrepancy = [(hs - direct).abs(), (mc.estimate - direct).abs(), (mc.estimate - hs).abs()]
            .into_iter()
            .fold(0.0, f64::max);
        let ok = (hs - direct).abs() <= grid_tol
            && (mc.estimate - direct).abs() <= tol.mcmc_sigmas * mc.stderr + grid_tol;
        pass &= ok;
        csv.push(format!(
            "{g},{h},{direct:.16e},{hs:.16e},{:.16e},{:.16e},{discrepancy:.16e},{ok}",
            mc.estimate, mc.stderr
        ));
        rows.push(json!({
            "pair": [g.to_string(), h.to_string()],
            "cov_direct": num(direct),
            "cov_hs": num(hs),
            "cov_mcmc": num(mc.estimate),
            "cov_mcmc_stderr": num(mc.stderr),
            "max_discrepancy": num(discrepancy),
            "pass": ok,
        }));
    }
    ctx.out.write("crosscheck.csv", |w| writeln!(w, "{}", csv.join("\n")))?;
    ctx.out.write_json(
        "crosscheck.json",
        &json!({
            "task": "crosscheck",
            "model": model_json(&ctx.model),
            "grid": grid_json(&spec),
            "chain": chain_json(&cfg),
            "grid_tolerance": num(grid_tol),
            "mcmc_sigmas": num(tol.mcmc_sigmas),
            "table": rows,
            "pass": pass,
        }),
    )?;
    Ok(pass)
}
