use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use varham::diagnostics::{
    check_containment, check_convexity_and_zero, doubling_certificate, ContainmentKind, ContainmentSpec, ConvexityConfig,
    DoublingConfig,
};
use varham::hamiltonian::CrnHamiltonian;
use varham::hjb::{solve_evolution, solve_stationary, EvolutionConfig, Grid, GridFunction, StationaryConfig};
use varham::lagrangian::{legendre, path_action, LegendreConfig, PathSample};
use varham::model::{
    builtin_michaelis_menten, check_conservation, check_irreducibility, check_product_form, parse_control, parse_model,
    parse_model_structural, ControlHamiltonian,
};
use varham::{Error, Hamiltonian};

use crate::manifest::{envelope, sha256_hex, ManifestBuilder};
use crate::{
    ActionArgs, Cli, Command, DoublingArgs, EvolutionArgs, HamCommand, LagrangianCommand, LegendreArgs, ModelCommand,
    SolveCommand, Source, StationaryArgs, VerifyArgs,
};

pub enum Outcome {
    Ok,
    Invalid,
}

#[derive(Debug)]
pub enum CliError {
    Io(PathBuf, std::io::Error),
    Lib(Error),
    Usage(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Io(p, e) => write!(f, "{}: {e}", p.display()),
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Usage(s) => write!(f, "{s}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(
                Error::Schema(_)
                | Error::DimensionMismatch { .. }
                | Error::ZeroJump { .. }
                | Error::NegativeCoefficient { .. }
                | Error::ConservationViolated { .. }
                | Error::NoReactions,
            ) => 2,
            _ => 1,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn read(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn write(path: &Path, bytes: &[u8]) -> CliResult<()> {
    fs::write(path, bytes).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn emit(out: &Option<PathBuf>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => write(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_grid_function(path: &Path) -> CliResult<GridFunction> {
    Ok(GridFunction::read_csv(read(path)?.as_slice())?)
}

fn write_grid_function(path: &Path, f: &GridFunction) -> CliResult<()> {
    let mut buf = Vec::new();
    f.write_csv(&mut buf)?;
    write(path, &buf)
}

/// Either kind of Hamiltonian behind one evaluator.
enum Loaded {
    Crn(CrnHamiltonian),
    Control(ControlHamiltonian),
}

impl Hamiltonian for Loaded {
    fn slow_dim(&self) -> usize {
        match self {
            Loaded::Crn(h) => h.slow_dim(),
            Loaded::Control(h) => Hamiltonian::slow_dim(h),
        }
    }

    fn value_and_grad(&self, x: &[f64], p: &[f64]) -> varham::Result<(f64, Vec<f64>)> {
        match self {
            Loaded::Crn(h) => h.value_and_grad(x, p),
            Loaded::Control(h) => h.value_and_grad(x, p),
        }
    }
}

fn load(source: &Source, m: &mut ManifestBuilder) -> CliResult<Loaded> {
    if let Some(path) = &source.model {
        let bytes = read(path)?;
        m.model_sha256 = Some(sha256_hex(&bytes));
        let net = parse_model(&String::from_utf8_lossy(&bytes))?;
        // grids include the zero faces, where fast dynamics may be reducible
        Ok(Loaded::Crn(CrnHamiltonian::new(net)?.allowing_boundary()))
    } else if let Some(path) = &source.control {
        let bytes = read(path)?;
        m.model_sha256 = Some(sha256_hex(&bytes));
        Ok(Loaded::Control(parse_control(&String::from_utf8_lossy(&bytes))?))
    } else {
        Err(CliError::Usage("one of --model or --control is required".into()))
    }
}

fn source_json(s: &Source) -> Value {
    json!({ "model": s.model, "control": s.control })
}

fn legendre_config(a: &LegendreArgs) -> LegendreConfig {
    LegendreConfig { p_radius: a.p_radius, tol: a.tol, max_iter: a.max_iter, ..Default::default() }
}

fn check_dim(h: &Loaded, what: &str, v: &[f64]) -> CliResult<()> {
    if v.len() != h.slow_dim() {
        return Err(CliError::Usage(format!("--{what} needs {} components, got {}", h.slow_dim(), v.len())));
    }
    Ok(())
}

fn finish<T: Serialize>(m: &ManifestBuilder, config: Value, out: &Option<PathBuf>, result: &T) -> CliResult<()> {
    emit(out, &envelope(&m.finish(config), result))
}

pub fn run(cli: &Cli, argv: Vec<String>) -> CliResult<Outcome> {
    let mut m = ManifestBuilder::start(argv, cli.seed);
    match &cli.command {
        Command::Model(ModelCommand::Mm { k, m: total, out }) => {
            let k: [f64; 4] = k
                .as_slice()
                .try_into()
                .map_err(|_| CliError::Usage(format!("--k needs 4 rate constants, got {}", k.len())))?;
            let net = builtin_michaelis_menten(k, *total)?;
            let text = net.to_json() + "\n";
            match out {
                Some(p) => write(p, text.as_bytes())?,
                None => print!("{text}"),
            }
            Ok(Outcome::Ok)
        }
        Command::Model(ModelCommand::Validate { path, out }) => model_validate(&mut m, path, out),
        Command::Ham(HamCommand::Eval { source, x, p, out }) => {
            let h = load(source, &mut m)?;
            check_dim(&h, "x", x)?;
            check_dim(&h, "p", p)?;
            let result = match &h {
                Loaded::Crn(c) => {
                    let v = c.eval(x, p)?;
                    json!({ "x": x, "p": p, "H": v.value, "grad_p": v.grad_p, "theta_star": v.theta_star, "eigen_residual": v.residual })
                }
                Loaded::Control(c) => {
                    let v = c.eval(x, p)?;
                    json!({ "x": x, "p": p, "H": v.value, "grad_p": v.grad_p, "control": v.label })
                }
            };
            finish(&m, json!({ "source": source_json(source), "x": x, "p": p }), out, &result)?;
            Ok(Outcome::Ok)
        }
        Command::Ham(HamCommand::Table { source, p, grid, csv, out }) => {
            let h = load(source, &mut m)?;
            check_dim(&h, "p", p)?;
            let g = Grid::uniform(h.slow_dim(), grid.xmax, grid.cells)?;
            let values = g.nodes().map(|x| h.value_and_grad(&x, p).map(|vg| (x, vg))).collect::<varham::Result<Vec<_>>>()?;
            if let Some(path) = csv {
                let l = g.dim();
                let mut text = (1..=l).map(|i| format!("x_{i}")).chain((1..=l).map(|i| format!("p_{i}"))).collect::<Vec<_>>().join(",");
                text.push_str(",H\n");
                for (x, (v, _)) in &values {
                    let cells: Vec<String> = x.iter().chain(p.iter()).chain([v]).map(|a| a.to_string()).collect();
                    text.push_str(&cells.join(","));
                    text.push('\n');
                }
                write(path, text.as_bytes())?;
            }
            let rows: Vec<Value> = values.into_iter().map(|(x, (v, grad))| json!({ "x": x, "H": v, "grad_p": grad })).collect();
            let config = json!({ "source": source_json(source), "p": p, "xmax": grid.xmax, "cells": grid.cells, "csv": csv });
            finish(&m, config, out, &json!({ "rows": rows }))?;
            Ok(Outcome::Ok)
        }
        Command::Lagrangian(LagrangianCommand::Eval { source, x, v, legendre: la, out }) => {
            let h = load(source, &mut m)?;
            check_dim(&h, "x", x)?;
            check_dim(&h, "v", v)?;
            let r = legendre(&h, x, v, &legendre_config(la))?;
            let value = if r.unbounded { f64::INFINITY } else { r.value };
            let result = json!({
                "value": value,
                "flags": r.flags(),
                "argmax_p": r.argmax_p,
                "iterations": r.iterations,
                "converged": r.converged,
            });
            let config = json!({ "source": source_json(source), "x": x, "v": v, "p_radius": la.p_radius, "tol": la.tol, "max_iter": la.max_iter });
            finish(&m, config, out, &result)?;
            Ok(Outcome::Ok)
        }
        Command::Action(a) => action(&mut m, a),
        Command::Solve(SolveCommand::Stationary(a)) => stationary(&mut m, a),
        Command::Solve(SolveCommand::Evolution(a)) => evolution(&mut m, a),
        Command::Verify(a) => verify(&mut m, a, cli.seed),
        Command::Doubling(a) => doubling(&mut m, a),
    }
}

fn model_validate(m: &mut ManifestBuilder, path: &Path, out: &Option<PathBuf>) -> CliResult<Outcome> {
    let bytes = read(path)?;
    m.model_sha256 = Some(sha256_hex(&bytes));
    let text = String::from_utf8_lossy(&bytes);
    let config = json!({ "path": path });
    let result = match parse_model_structural(&text) {
        Err(e) => json!({ "valid": false, "error": e.to_string() }),
        Ok(net) => {
            let conservation = check_conservation(&net);
            let strict = parse_model(&text);
            json!({
                "valid": strict.is_ok(),
                "error": strict.err().map(|e| e.to_string()),
                "slow_dim": net.slow_dim(),
                "fast_dim": net.fast_dim(),
                "conservation_M": net.conservation(),
                "classes": net.classes(),
                "conservation": conservation,
                "product_form": check_product_form(&net),
            })
        }
    };
    let valid = result["valid"] == json!(true);
    finish(m, config, out, &result)?;
    Ok(if valid { Outcome::Ok } else { Outcome::Invalid })
}

fn action(m: &mut ManifestBuilder, a: &ActionArgs) -> CliResult<Outcome> {
    let h = load(&a.source, m)?;
    let path = PathSample::read_csv(read(&a.path)?.as_slice())?;
    let r = path_action(&h, &path, &legendre_config(&a.legendre))?;
    let config = json!({ "source": source_json(&a.source), "path": a.path, "p_radius": a.legendre.p_radius, "tol": a.legendre.tol });
    finish(m, config, &a.out, &json!({ "value": r.value, "flags": r.flags, "segments": r.segments }))?;
    Ok(Outcome::Ok)
}

fn stationary(m: &mut ManifestBuilder, a: &StationaryArgs) -> CliResult<Outcome> {
    let h = load(&a.source, m)?;
    let rhs = match (&a.h, a.h_const) {
        (Some(p), _) => read_grid_function(p)?,
        (None, Some(c)) => GridFunction::constant(&Grid::uniform(h.slow_dim(), a.grid.xmax, a.grid.cells)?, c)?,
        (None, None) => return Err(CliError::Usage("one of --h or --h-const is required".into())),
    };
    let cfg = StationaryConfig { vgrid: a.vgrid, dt: a.dt, tol: a.tol, max_iter: a.max_iter, ..Default::default() };
    let (f, report) = solve_stationary(&h, &rhs, a.lambda, &cfg)?;
    if let Some(p) = &a.csv {
        write_grid_function(p, &f)?;
    }
    let config = json!({
        "source": source_json(&a.source),
        "h": a.h,
        "h_const": a.h_const,
        "lambda": a.lambda,
        "grid": { "upper": f.grid.upper(), "cells": f.grid.cells() },
        "solver": cfg,
    });
    finish(m, config, &a.out, &json!({ "report": report, "values": f.values }))?;
    Ok(Outcome::Ok)
}

fn evolution(m: &mut ManifestBuilder, a: &EvolutionArgs) -> CliResult<Outcome> {
    let h = load(&a.source, m)?;
    let u0 = read_grid_function(&a.u0)?;
    let cfg = EvolutionConfig { cfl: a.cfl, sigma: a.sigma.clone(), dt: a.dt, snapshots: a.snapshots.clone() };
    let (snaps, report) = solve_evolution(&h, &u0, a.t_final, &cfg)?;
    if let Some(prefix) = &a.csv_prefix {
        for (k, s) in snaps.iter().enumerate() {
            write_grid_function(Path::new(&format!("{prefix}_{k}.csv")), &s.u)?;
        }
    }
    let config = json!({ "source": source_json(&a.source), "u0": a.u0, "T": a.t_final, "solver": cfg });
    let result = json!({
        "report": report,
        "snapshots": snaps.iter().map(|s| json!({ "time": s.time, "values": s.u.values })).collect::<Vec<_>>(),
    });
    finish(m, config, &a.out, &result)?;
    Ok(Outcome::Ok)
}

fn parse_point(s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| CliError::Usage(format!("--at {s}: {e}"))))
        .collect()
}

fn verify(m: &mut ManifestBuilder, a: &VerifyArgs, seed: u64) -> CliResult<Outcome> {
    let bytes = read(&a.model)?;
    m.model_sha256 = Some(sha256_hex(&bytes));
    let net = parse_model_structural(&String::from_utf8_lossy(&bytes))?;
    let l = net.slow_dim();
    let extra = a.at.iter().map(|s| parse_point(s)).collect::<CliResult<Vec<_>>>()?;
    if let Some(bad) = extra.iter().find(|x| x.len() != l) {
        return Err(CliError::Usage(format!("--at point {bad:?} needs {l} components")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<Vec<f64>> =
        (0..a.samples).map(|_| (0..l).map(|_| rng.random_range(0.05..1.0) * a.grid.xmax).collect()).collect();
    let config = json!({ "model": a.model, "xmax": a.grid.xmax, "cells": a.grid.cells, "samples": a.samples, "at": extra });

    let conservation = check_conservation(&net);
    let product_form = check_product_form(&net);
    let mut checks = serde_json::Map::new();
    checks.insert("conservation".into(), json!(conservation));
    checks.insert("product_form".into(), json!(product_form));
    let mut pass = conservation.pass && product_form.pass;

    if conservation.pass {
        let strict = CrnHamiltonian::new(net.clone())?;
        let fss = strict.fast_states();
        let mut irreducibility = Vec::new();
        for (x, user) in samples.iter().map(|x| (x, false)).chain(extra.iter().map(|x| (x, true))) {
            let r = check_irreducibility(&net, x, fss);
            pass &= r.pass;
            irreducibility.push(json!({ "x": x, "user_sample": user, "pass": r.pass, "violations": r.violations }));
        }
        checks.insert("irreducibility".into(), json!(irreducibility));

        let h = strict.clone().allowing_boundary();
        let grid = Grid::uniform(l, a.grid.xmax, a.grid.cells)?;
        let mut containment = Vec::new();
        let mut any = false;
        for kind in [ContainmentKind::LogQuadratic, ContainmentKind::Quadratic] {
            match check_containment(&h, ContainmentSpec::new(kind), &grid) {
                Ok(r) => {
                    any |= r.pass;
                    containment.push(json!(r));
                }
                Err(e) => containment.push(json!({ "spec": ContainmentSpec::new(kind), "pass": false, "error": e.to_string() })),
            }
        }
        // one containment function is enough; both are reported
        pass &= any;
        checks.insert("containment".into(), json!({ "pass": any, "candidates": containment }));

        let cfg = ConvexityConfig { seed, ..Default::default() };
        let convexity = check_convexity_and_zero(&h, &samples, &cfg)?;
        pass &= convexity.pass;
        checks.insert("convexity_and_zero".into(), json!(convexity));
    } else {
        for name in ["irreducibility", "containment", "convexity_and_zero"] {
            checks.insert(name.into(), json!({ "pass": false, "skipped": "fast molecules are not conserved" }));
        }
    }
    finish(m, config, &a.out, &json!({ "pass": pass, "checks": checks }))?;
    Ok(if pass { Outcome::Ok } else { Outcome::Invalid })
}

fn doubling(m: &mut ManifestBuilder, a: &DoublingArgs) -> CliResult<Outcome> {
    let h = load(&a.source, m)?;
    let u = read_grid_function(&a.u)?;
    let v = read_grid_function(&a.v)?;
    let kind = match a.kind.as_str() {
        "log-quadratic" => ContainmentKind::LogQuadratic,
        "quadratic" => ContainmentKind::Quadratic,
        other => return Err(CliError::Usage(format!("unknown containment kind {other}"))),
    };
    let cfg = DoublingConfig { tol: a.tol, ..Default::default() };
    let report = doubling_certificate(&u, &v, ContainmentSpec::new(kind), &a.eps, &a.alpha, &h, &cfg)?;
    if let Some(p) = &a.csv {
        let mut buf = Vec::new();
        report.write_csv(&mut buf)?;
        write(p, &buf)?;
    }
    let config = json!({ "source": source_json(&a.source), "u": a.u, "v": a.v, "eps": a.eps, "alpha": a.alpha, "kind": a.kind, "tol": a.tol });
    let pass = report.pass;
    finish(m, config, &a.out, &report)?;
    Ok(if pass { Outcome::Ok } else { Outcome::Invalid })
}
