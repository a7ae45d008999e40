use std::fmt;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use nalgebra::DVector;
use rand::SeedableRng;
use serde_json::{json, Value};

use polyrep::collapse::hamiltonian_collapse;
use polyrep::dissipativity::{admissible_seeded, check_with_scaling, find_scaling, Admissibility};
use polyrep::dynamics::{first_integrals, integrate, lv_to_replicator, LVSystem, Monitor, Trajectory};
use polyrep::generate::random_interior_state;
use polyrep::io::{emit_game, parse_list, parse_matrix, read_game, write_game};
use polyrep::reduction::{classify_attractor, run_with, ReductionContext, ScanOrder, TraceEntry};
use polyrep::vertex::{enumerate_vertices, vertex_graph, vertex_matrix, VertexLabel};
use polyrep::{
    formal_equilibria, games_equivalent, interior_equilibria, DiagonalScaling, Game, GameType, PolymatrixGame,
    PrismState, Tolerances,
};

use crate::render::{labels, matrix, matrix_json, num, one_based, strategies, type_json, vector, vector_json};
use crate::{exit, Cli, Command, Format, SimulateArgs};

/// Bad user input that the library does not classify itself.
#[derive(Debug)]
struct InputError(String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

pub fn exit_code(e: &anyhow::Error) -> u8 {
    use polyrep::Error as E;
    if e.downcast_ref::<InputError>().is_some() || e.downcast_ref::<std::io::Error>().is_some() {
        return exit::INPUT;
    }
    match e.downcast_ref::<E>() {
        Some(E::Parse { .. } | E::Io(_) | E::InvalidGame(_) | E::InvalidType(_) | E::InvalidState(_)) => exit::INPUT,
        Some(E::Certificate(_)) => exit::CERTIFICATE,
        _ => exit::OTHER,
    }
}

pub fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<u8> {
    let tol = Tolerances::default().with_semidef(cli.tol);
    match &cli.command {
        Command::Check { game } => check(cli, &tol, game, out),
        Command::Vertices { game } => vertices(cli, &tol, game, out),
        Command::Reduce { game } => reduce(cli, &tol, game, out),
        Command::Collapse { game, emit_game } => collapse(cli, &tol, game, emit_game.as_deref(), out),
        Command::Simulate(args) => simulate(cli, &tol, args, out),
        Command::Equilibrium { game } => equilibrium(cli, &tol, game, out),
        Command::Lv2rep { a, r, emit_game } => lv2rep(cli, a, r, emit_game.as_deref(), out),
    }
}

fn load(path: &Path) -> Result<Game> {
    read_game(path).with_context(|| format!("reading {}", path.display()))
}

fn emit_json(out: &mut dyn Write, v: &Value) -> Result<()> {
    writeln!(out, "{}", serde_json::to_string_pretty(v)?)?;
    Ok(())
}

fn classification_code(adm: &Admissibility<f64>) -> u8 {
    if adm.admissible {
        exit::OK
    } else if adm.classification.kind.is_dissipative() {
        exit::NOT_ADMISSIBLE
    } else {
        exit::OTHER
    }
}

fn scaling_json(d: &Option<DiagonalScaling<f64>>) -> Value {
    d.as_ref().map_or(Value::Null, |d| json!(d.per_group()))
}

fn classification_json(adm: &Admissibility<f64>) -> Value {
    let c = &adm.classification;
    json!({
        "kind": c.kind.as_str(),
        "lambda_max": c.lambda_max,
        "scaling": scaling_json(&c.scaling),
        "witness": c.witness.as_ref().map(vector_json),
    })
}

fn check(cli: &Cli, tol: &Tolerances, path: &Path, out: &mut dyn Write) -> Result<u8> {
    let game = load(path)?;
    let adm = admissible_seeded(&game, tol, cli.seed);
    let eq = interior_equilibria(&game, tol);
    let c = &adm.classification;
    let verdict = if adm.admissible { "admissible" } else { "not admissible" };
    if cli.format == Format::Json {
        let vs: Vec<Value> = adm
            .reports
            .iter()
            .map(|(v, r)| json!({"vertex": v.to_string(), "stable": r.stable, "failures": r.failures}))
            .collect();
        emit_json(
            out,
            &json!({
                "type": type_json(game.game_type()),
                "classification": classification_json(&adm),
                "interior_equilibrium": eq.interior_point.as_ref().map(vector_json),
                "admissible": adm.admissible,
                "v_star": adm.v_star.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
                "vertices": vs,
            }),
        )?;
    } else {
        writeln!(out, "{}, {verdict}, V*={{{}}}", c.kind, labels(&adm.v_star))?;
        writeln!(out, "type: {}", game.game_type())?;
        if let Some(d) = &c.scaling {
            writeln!(out, "scaling D: {}", vector(&DVector::from_column_slice(d.per_group())))?;
        }
        if let Some(l) = c.lambda_max {
            writeln!(out, "lambda_max: {}", num(l))?;
        }
        if let Some(w) = &c.witness {
            writeln!(out, "witness w: {}", vector(w))?;
        }
        match &eq.interior_point {
            Some(q) => writeln!(out, "interior equilibrium: {}", vector(q))?,
            None => writeln!(out, "interior equilibrium: none")?,
        }
        for (v, r) in &adm.reports {
            if !r.stable {
                writeln!(out, "vertex {v} not in V*: {}", r.failures.join("; "))?;
            }
        }
    }
    Ok(classification_code(&adm))
}

fn vertices(cli: &Cli, tol: &Tolerances, path: &Path, out: &mut dyn Write) -> Result<u8> {
    let game = load(path)?;
    let adm = admissible_seeded(&game, tol, cli.seed);
    let mut rows = Vec::new();
    for (k, (v, report)) in adm.reports.iter().enumerate() {
        let vm = vertex_matrix(&game, v)?;
        let g = vertex_graph(&vm, tol);
        let edges: Vec<(usize, usize)> = g.strategy_edges();
        let strong: Vec<(usize, usize)> =
            g.edges.iter().filter(|&&(a, b)| g.is_strong(a, b)).map(|&(a, b)| (g.vertices[a], g.vertices[b])).collect();
        if cli.format == Format::Json {
            rows.push(json!({
                "vertex": v.to_string(),
                "index_set": one_based(&vm.index_set),
                "matrix": matrix_json(&vm.entries),
                "edges": edges.iter().map(|&(a, b)| [a + 1, b + 1]).collect::<Vec<_>>(),
                "strong_links": strong.iter().map(|&(a, b)| [a + 1, b + 1]).collect::<Vec<_>>(),
                "stable": report.stable,
                "failures": report.failures,
            }));
        } else {
            let tag = if report.stable { "in V*" } else { "not in V*" };
            writeln!(out, "v{} = {v}  {tag}", k + 1)?;
            writeln!(out, "  index set: {}", strategies(&vm.index_set))?;
            writeln!(out, "{}", matrix(&vm.entries, "    "))?;
            let fmt_pairs = |p: &[(usize, usize)]| p.iter().map(|&(a, b)| format!("{{{},{}}}", a + 1, b + 1)).collect::<Vec<_>>().join(" ");
            writeln!(out, "  edges: {}", fmt_pairs(&edges))?;
            if !strong.is_empty() {
                writeln!(out, "  strong links: {}", fmt_pairs(&strong))?;
            }
            for f in &report.failures {
                writeln!(out, "  {f}")?;
            }
        }
    }
    if cli.format == Format::Json {
        emit_json(out, &json!({"type": type_json(game.game_type()), "vertices": rows}))?;
    }
    Ok(exit::OK)
}

/// Consecutive applications of the same rule shown as one step.
fn merged_steps(trace: &[TraceEntry]) -> Vec<(u8, Vec<VertexLabel>, Vec<usize>)> {
    let mut steps: Vec<(u8, Vec<VertexLabel>, Vec<usize>)> = Vec::new();
    for e in trace {
        match steps.last_mut() {
            Some((rule, vs, ss)) if *rule == e.rule => {
                for v in &e.vertices {
                    if !vs.contains(v) {
                        vs.push(v.clone());
                    }
                }
                ss.extend(e.strategies.iter().copied());
            }
            _ => steps.push((e.rule, e.vertices.clone(), e.strategies.clone())),
        }
    }
    for (_, vs, ss) in steps.iter_mut() {
        vs.sort();
        ss.sort_unstable();
        ss.dedup();
    }
    steps
}

fn not_admissible(cli: &Cli, adm: &Admissibility<f64>, out: &mut dyn Write) -> Result<u8> {
    if cli.format == Format::Json {
        emit_json(out, &json!({"admissible": false, "classification": classification_json(adm)}))?;
    } else {
        writeln!(out, "game is {}, not admissible", adm.classification.kind)?;
    }
    Ok(classification_code(adm))
}

fn reduce(cli: &Cli, tol: &Tolerances, path: &Path, out: &mut dyn Write) -> Result<u8> {
    let game = load(path)?;
    let adm = admissible_seeded(&game, tol, cli.seed);
    if !adm.admissible {
        return not_admissible(cli, &adm, out);
    }
    let ctx = ReductionContext::new(&game, &adm.v_star, tol)?;
    let r = run_with(&ctx, &ScanOrder::Canonical);
    let steps = merged_steps(&r.info.trace);
    let q = interior_equilibria(&game, tol).interior_point;
    let statement = q.as_ref().map(|q| classify_attractor(&r, q).statement);
    let ty = game.game_type();
    if cli.format == Format::Json {
        let trace: Vec<Value> = r
            .info
            .trace
            .iter()
            .map(|e| {
                json!({"rule": e.rule, "vertices": e.vertices.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
                       "strategies": one_based(&e.strategies)})
            })
            .collect();
        let table: Vec<Value> = steps
            .iter()
            .enumerate()
            .map(|(k, (rule, vs, ss))| {
                json!({"step": k + 1, "rule": rule, "vertices": vs.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
                       "strategies": one_based(ss)})
            })
            .collect();
        emit_json(
            out,
            &json!({
                "v_star": adm.v_star.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
                "trace": trace,
                "steps": table,
                "colors": r.info.colors.iter().map(|c| c.name()).collect::<Vec<_>>(),
                "links": r.info.links.iter().map(|&(a, b)| [a + 1, b + 1]).collect::<Vec<_>>(),
                "verdict": r.verdict.as_str(),
                "statement": statement,
            }),
        )?;
        return Ok(exit::OK);
    }
    writeln!(out, "V* = {{{}}}", labels(&adm.v_star))?;
    writeln!(out, "{:<6}{:<6}{:<28}strategy", "step", "rule", "vertex")?;
    for (k, (rule, vs, ss)) in steps.iter().enumerate() {
        let vtxt = if vs.is_empty() { "-".to_string() } else { labels(vs) };
        writeln!(out, "{:<6}{:<6}{:<28}{}", k + 1, rule, vtxt, strategies(ss))?;
    }
    for g in 0..ty.p() {
        let cells: Vec<String> = ty.range(g).map(|i| format!("{}{}", i + 1, r.info.colors[i].symbol())).collect();
        writeln!(out, "group {}: {}", g + 1, cells.join(" "))?;
    }
    let links: Vec<String> = r.info.links.iter().map(|&(a, b)| format!("{{{},{}}}", a + 1, b + 1)).collect();
    writeln!(out, "links: {}", if links.is_empty() { "none".into() } else { links.join(" ") })?;
    writeln!(out, "verdict: {}", r.verdict)?;
    if let Some(s) = statement {
        writeln!(out, "attractor: {s}")?;
    }
    Ok(exit::OK)
}

fn collapse(cli: &Cli, tol: &Tolerances, path: &Path, emit: Option<&Path>, out: &mut dyn Write) -> Result<u8> {
    let game = load(path)?;
    let adm = admissible_seeded(&game, tol, cli.seed);
    if !adm.admissible {
        return not_admissible(cli, &adm, out);
    }
    let q = interior_equilibria(&game, tol)
        .interior_point
        .ok_or_else(|| polyrep::Error::Precondition("the game has no interior equilibrium".into()))?;
    let c = hamiltonian_collapse(&game, &q, tol)?;
    let fty = c.final_game.game_type().clone();
    let trivial = games_equivalent(&c.final_game, &PolymatrixGame::zero(fty.clone()), tol)?;
    let kind = check_with_scaling(&c.final_game, &c.conservative_certificate, tol)?.kind;
    if let Some(p) = emit {
        write_game(&c.final_game, p).with_context(|| format!("writing {}", p.display()))?;
    }
    if cli.format == Format::Json {
        let steps: Vec<Value> = c
            .steps
            .iter()
            .map(|s| {
                json!({"removed": s.removed + 1, "group": s.group + 1, "q_ell": s.q_ell,
                       "before": type_json(&s.before), "after": type_json(&s.after),
                       "scaling_factor": s.scaling_factor, "cleanup": s.cleanup.map(|i| i + 1)})
            })
            .collect();
        emit_json(
            out,
            &json!({
                "vertex": c.vertex.to_string(),
                "steps": steps,
                "final_type": type_json(&fty),
                "final_payoff": matrix_json(c.final_game.payoff()),
                "final_equilibrium": vector_json(&c.final_equilibrium),
                "certificate": {"scaling": c.conservative_certificate.per_group(), "kind": kind.as_str()},
                "equivalent_to_zero": trivial,
            }),
        )?;
        return Ok(exit::OK);
    }
    writeln!(out, "vertex: {}", c.vertex)?;
    for (k, s) in c.steps.iter().enumerate() {
        write!(
            out,
            "step {}: removed strategy {} from group {}, type {} -> {}, scaling factor {}",
            k + 1,
            s.removed + 1,
            s.group + 1,
            s.before,
            s.after,
            num(s.scaling_factor)
        )?;
        match s.cleanup {
            Some(p) => writeln!(out, " (group dropped with strategy {})", p + 1)?,
            None => writeln!(out)?,
        }
    }
    if c.steps.is_empty() {
        writeln!(out, "no strategy removed")?;
    }
    writeln!(out, "final type: {fty}")?;
    writeln!(out, "final payoff:\n{}", matrix(c.final_game.payoff(), "  "))?;
    writeln!(out, "final equilibrium: {}", vector(&c.final_equilibrium))?;
    writeln!(
        out,
        "certificate D = {}: {kind}",
        vector(&DVector::from_column_slice(c.conservative_certificate.per_group()))
    )?;
    if trivial {
        writeln!(out, "equivalent to the trivial game")?;
    }
    if let Some(p) = emit {
        writeln!(out, "wrote {}", p.display())?;
    }
    Ok(exit::OK)
}

fn initial_state(cli: &Cli, ty: &GameType, spec: &str, tol: &Tolerances) -> Result<PrismState<f64>> {
    let spec = spec.trim();
    let seed = if spec == "random" {
        Some(cli.seed)
    } else if let Some(s) = spec.strip_prefix("random:") {
        Some(s.trim().parse::<u64>().map_err(|_| InputError(format!("bad seed in `{spec}`")))?)
    } else {
        None
    };
    if let Some(seed) = seed {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        return Ok(random_interior_state(ty, &mut rng));
    }
    let x = parse_list(spec).map_err(|e| InputError(format!("--x0: {e}")))?;
    Ok(PrismState::new(ty, DVector::from_vec(x), tol.prism)?)
}

fn monitors(cli: &Cli, tol: &Tolerances, game: &Game, spec: &str) -> Result<Vec<Monitor<f64>>> {
    let ty = game.game_type();
    let mut out = Vec::new();
    for tok in spec.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        match tok {
            "h" => {
                let q = interior_equilibria(game, tol)
                    .interior_point
                    .ok_or_else(|| polyrep::Error::Precondition("h needs an interior equilibrium".into()))?;
                let d = find_scaling(game, tol).unwrap_or_else(|| DiagonalScaling::identity(ty));
                out.push(Monitor::Lyapunov { q, d });
            }
            "gb" => {
                let adm = admissible_seeded(game, tol, cli.seed);
                let v = adm.v_star.first().cloned().unwrap_or_else(|| enumerate_vertices(ty)[0].clone());
                for (k, integral) in first_integrals(game, &v, tol)?.into_iter().enumerate() {
                    out.push(Monitor::Integral { name: format!("g{}", k + 1), integral });
                }
            }
            "ratios" => {
                for g in 0..ty.p() {
                    let r = ty.range(g);
                    for i in r.start..r.end.saturating_sub(1) {
                        out.push(Monitor::Ratio(i, i + 1));
                    }
                }
            }
            other => {
                let pair = other.strip_prefix("ratio:").and_then(|p| p.split_once('/')).and_then(|(a, b)| {
                    Some((a.trim().parse::<usize>().ok()?, b.trim().parse::<usize>().ok()?))
                });
                match pair {
                    Some((i, j)) if i >= 1 && j >= 1 && i <= ty.n() && j <= ty.n() => out.push(Monitor::Ratio(i - 1, j - 1)),
                    _ => return Err(InputError(format!("unknown monitor `{other}`")).into()),
                }
            }
        }
    }
    Ok(out)
}

fn write_csv(traj: &Trajectory<f64>, n: usize, out: &mut dyn Write) -> std::io::Result<()> {
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|i| format!("x_{i}")));
    header.extend(traj.monitor_order.iter().cloned());
    writeln!(out, "{}", header.join(","))?;
    let series: Vec<&[f64]> = traj.monitor_order.iter().map(|m| traj.series(m).expect("recorded")).collect();
    for (k, (t, x)) in traj.times.iter().zip(&traj.states).enumerate() {
        let mut row = vec![t.to_string()];
        row.extend(x.iter().map(|v| v.to_string()));
        row.extend(series.iter().map(|s| s[k].to_string()));
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

fn simulate(cli: &Cli, tol: &Tolerances, args: &SimulateArgs, out: &mut dyn Write) -> Result<u8> {
    let game = load(&args.game)?;
    let ty = game.game_type().clone();
    let x0 = initial_state(cli, &ty, &args.x0, tol)?;
    let mons = monitors(cli, tol, &game, &args.monitors)?;
    let traj = integrate(&game, &x0, args.t_end, args.dt, &mons)?;
    let code = if traj.error.is_some() { exit::OTHER } else { exit::OK };
    let Some(path) = &args.csv else {
        write_csv(&traj, ty.n(), out)?;
        if let Some(e) = &traj.error {
            eprintln!("warning: {e}");
        }
        return Ok(code);
    };
    let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = std::io::BufWriter::new(file);
    write_csv(&traj, ty.n(), &mut w)?;
    w.flush()?;
    let stats: Vec<(String, f64, f64, f64)> = traj
        .monitor_order
        .iter()
        .map(|name| {
            let s = traj.series(name).expect("recorded");
            let finite = s.iter().copied().filter(|v| v.is_finite());
            let lo = finite.clone().fold(f64::INFINITY, f64::min);
            let hi = finite.fold(f64::NEG_INFINITY, f64::max);
            let drift = s.last().copied().unwrap_or(f64::NAN) - s[0];
            (name.clone(), lo, hi, drift)
        })
        .collect();
    if cli.format == Format::Json {
        let m: serde_json::Map<String, Value> =
            stats.iter().map(|(n, lo, hi, d)| (n.clone(), json!({"min": lo, "max": hi, "drift": d}))).collect();
        emit_json(
            out,
            &json!({
                "steps": traj.times.len() - 1,
                "final_time": traj.times.last(),
                "final_state": vector_json(traj.last()),
                "max_correction": traj.max_correction,
                "error": traj.error,
                "monitors": m,
                "csv": path.display().to_string(),
            }),
        )?;
    } else {
        writeln!(out, "steps: {}, final time {}", traj.times.len() - 1, num(*traj.times.last().unwrap_or(&0.0)))?;
        writeln!(out, "final state: {}", vector(traj.last()))?;
        writeln!(out, "max renormalisation correction: {:e}", traj.max_correction)?;
        for (n, lo, hi, d) in &stats {
            writeln!(out, "{n}: min {lo:e}, max {hi:e}, drift {d:e}")?;
        }
        if let Some(e) = &traj.error {
            writeln!(out, "integration stopped: {e}")?;
        }
        writeln!(out, "wrote {}", path.display())?;
    }
    Ok(code)
}

fn equilibrium(cli: &Cli, tol: &Tolerances, path: &Path, out: &mut dyn Write) -> Result<u8> {
    let game = load(path)?;
    let formal = formal_equilibria(&game, tol);
    let interior = interior_equilibria(&game, tol);
    if cli.format == Format::Json {
        let basis: Vec<Value> = formal.basis.column_iter().map(|c| vector_json(&c.into_owned())).collect();
        emit_json(
            out,
            &json!({
                "consistent": !formal.is_empty(),
                "particular": formal.particular.as_ref().map(vector_json),
                "dimension": formal.dimension(),
                "basis": basis,
                "interior": interior.interior_flag(),
                "interior_point": interior.interior_point.as_ref().map(vector_json),
            }),
        )?;
        return Ok(exit::OK);
    }
    let Some(p) = &formal.particular else {
        writeln!(out, "no formal equilibrium")?;
        return Ok(exit::OK);
    };
    writeln!(out, "formal equilibria: {} + span of {} direction(s)", vector(p), formal.dimension())?;
    for c in formal.basis.column_iter() {
        writeln!(out, "  {}", vector(&c.into_owned()))?;
    }
    match &interior.interior_point {
        Some(q) => writeln!(out, "interior equilibrium: {}", vector(q))?,
        None => writeln!(out, "no interior equilibrium")?,
    }
    Ok(exit::OK)
}

fn lv2rep(cli: &Cli, a: &Path, r: &str, emit: Option<&Path>, out: &mut dyn Write) -> Result<u8> {
    let text = std::fs::read_to_string(a).with_context(|| format!("reading {}", a.display()))?;
    let m = parse_matrix(&text).with_context(|| format!("parsing {}", a.display()))?;
    let rv = parse_list(r).map_err(|e| InputError(format!("--r: {e}")))?;
    let lv = LVSystem::new(m, DVector::from_vec(rv)).map_err(|e| InputError(e.to_string()))?;
    let game = lv_to_replicator(&lv);
    if let Some(p) = emit {
        write_game(&game, p).with_context(|| format!("writing {}", p.display()))?;
    }
    if cli.format == Format::Json {
        emit_json(out, &json!({"type": type_json(game.game_type()), "payoff": matrix_json(game.payoff())}))?;
    } else {
        write!(out, "{}", emit_game(&game))?;
        if let Some(p) = emit {
            writeln!(out, "wrote {}", p.display())?;
        }
    }
    Ok(exit::OK)
}
