//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use polyrep::collapse::{q_ell_reduction, reduced_equilibrium, slice_point, tangency_on_segment};
use polyrep::dissipativity::{admissible, kernel_duality, stably_dissipative};
use polyrep::dynamics::{
    first_integrals, h_derivative, integrate, lv_embed, lv_pushforward, lv_to_replicator, lyapunov_h,
    quotient_rule_check, FirstIntegral, LVSystem, Monitor,
};
use polyrep::fixtures::{worked_example, worked_example_equilibrium};
use polyrep::generate::{
    curated_stable_matrices, dissipative_pair, equal_row_perturbation, random_admissible_game, random_game,
    random_integer_game, random_integer_scaling, random_interior_state, random_tangent, random_type, random_vertex,
    AdmissibleOptions,
};
use polyrep::reduction::{rule_sequence, run_to_fixpoint, run_with, Color, ReductionContext, ScanOrder, Verdict};
use polyrep::vertex::{enumerate_vertices, quadratic_form, quadratic_via_vertex, vertex_matrix, VertexLabel};
use polyrep::{games_equivalent, DiagonalScaling, GameType, PolymatrixGame, PrismState, Tolerances};

type Outcome = Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Outcome {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant) -> Outcome {
    let el = start.elapsed();
    ensure(el < limit, || format!("took {el:?}, limit {limit:?}"))
}

fn q() -> DVector<f64> {
    DVector::from_vec(worked_example_equilibrium())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

fn table_vertex_matrices() -> Outcome {
    let start = Instant::now();
    let g = worked_example();
    let expected: [[f64; 9]; 6] = [
        [0., 27., 0., -27., -9., 18., 0., -18., 0.],
        [0., 27., 0., -27., -9., -18., 0., 18., 0.],
        [0., -27., 0., 27., -9., 18., 0., -18., 0.],
        [0., -27., 0., 27., -9., -18., 0., 18., 0.],
        [-9., 18., -18., -36., -9., -18., 18., 18., 0.],
        [-9., 18., 18., -36., -9., 18., -18., -18., 0.],
    ];
    let vs = enumerate_vertices(g.game_type());
    ensure(vs.len() == 6, || format!("{} vertices", vs.len()))?;
    for (k, v) in vs.iter().enumerate() {
        let vm = vertex_matrix(&g, v).map_err(|e| e.to_string())?;
        let want = DMatrix::from_row_slice(3, 3, &expected[k]);
        ensure(vm.entries == want, || format!("A_v at {v} is {} expected {want}", vm.entries))?;
    }
    within(Duration::from_secs(1), start)
}

fn v_star() -> Outcome {
    let start = Instant::now();
    let g = worked_example();
    let tol = Tolerances::default();
    let stable: Vec<bool> = enumerate_vertices(g.game_type())
        .iter()
        .map(|v| stably_dissipative(&vertex_matrix(&g, v).unwrap().entries, &tol).stable)
        .collect();
    ensure(stable == [true, true, true, true, false, false], || format!("stability {stable:?}"))?;
    let adm = admissible(&g, &tol);
    let expected: Vec<VertexLabel> =
        [[1, 4], [1, 5], [2, 4], [2, 5]].iter().map(|c| VertexLabel::from_one_based(g.game_type(), c).unwrap()).collect();
    ensure(adm.admissible && adm.v_star == expected, || format!("V* = {:?}", adm.v_star))?;
    within(Duration::from_secs(1), start)
}

fn quadratic() -> Outcome {
    let g = worked_example();
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let w = random_tangent(g.game_type(), &mut rng);
        let got = quadratic_form(&g, &w, &tol).map_err(|e| e.to_string())?;
        let want = -9.0 * w[2] * w[2];
        ensure(rel(got, want) <= 1e-9 || (got - want).abs() <= 1e-15, || format!("Q(w) = {got}, expected {want}"))?;
    }
    Ok(())
}

fn reduction_trace() -> Outcome {
    let g = worked_example();
    let r = run_to_fixpoint(&g, &Tolerances::default()).map_err(|e| e.to_string())?;
    let seq = rule_sequence(&r.info.trace);
    ensure(seq == [1, 4, 6, 3], || format!("rule sequence {seq:?}"))?;
    use Color::*;
    ensure(r.info.colors == [Plus, Plus, Black, Plus, Plus], || format!("colors {:?}", r.info.colors))?;
    let links: Vec<_> = r.info.links.iter().copied().collect();
    ensure(links == [(3, 4)], || format!("links {links:?}"))?;
    ensure(r.verdict == Verdict::BlackPlus, || format!("verdict {}", r.verdict))
}

fn collapse_example() -> Outcome {
    let g = worked_example();
    let reduced = q_ell_reduction(&g, &q(), 2).map_err(|e| e.to_string())?;
    let want = DMatrix::from_row_slice(4, 4, &[-9., 9., 9., -9., -9., 9., 9., -9., -6., 6., 6., -6., -6., 6., 6., -6.]);
    ensure(reduced.payoff() == &want, || format!("reduced payoff {}", reduced.payoff()))?;
    let zero = PolymatrixGame::zero(GameType::new(vec![2, 2]).unwrap());
    let eq = games_equivalent(&reduced, &zero, &Tolerances::default()).map_err(|e| e.to_string())?;
    ensure(eq, || "reduced game is not equivalent to the zero game".into())
}

fn dynamics_runs() -> Outcome {
    let start = Instant::now();
    let g = worked_example();
    let ty = g.game_type().clone();
    let d = DiagonalScaling::identity(&ty);
    let integral = FirstIntegral { coefficients: DVector::from_vec(vec![-2.0, 2.0, 0.0, -3.0, 3.0]) };
    let monitors = vec![
        Monitor::Lyapunov { q: q(), d: d.clone() },
        Monitor::Integral { name: "g".into(), integral },
        Monitor::Ratio(3, 4),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for run in 0..10 {
        let x0: PrismState<f64> = random_interior_state(&ty, &mut rng);
        let t = integrate(&g, &x0, 500.0, 0.01, &monitors).map_err(|e| e.to_string())?;
        ensure(t.error.is_none(), || format!("run {run}: {:?}", t.error))?;
        let x3 = t.last()[2];
        ensure((x3 - 1.0 / 3.0).abs() <= 1e-4, || format!("run {run}: x3(T) = {x3}"))?;
        let h = t.series("h").unwrap();
        let rise = h.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
        ensure(rise <= 1e-9, || format!("run {run}: h increased by {rise}"))?;
        let gs = t.series("g").unwrap();
        let drift = gs.iter().map(|v| (v - gs[0]).abs()).fold(0.0, f64::max);
        ensure(drift <= 1e-6, || format!("run {run}: first integral drift {drift}"))?;
        let r = &t.series("x4/x5").unwrap()[t.index_at(250.0)..];
        let spread = r.iter().copied().fold(f64::NEG_INFINITY, f64::max) - r.iter().copied().fold(f64::INFINITY, f64::min);
        ensure(spread <= 1e-5, || format!("run {run}: tail ratio drift {spread}"))?;
        ensure(t.max_correction < 1e-9, || format!("run {run}: renormalisation {}", t.max_correction))?;
    }
    within(Duration::from_secs(30), start)
}

fn property_suites() -> Outcome {
    let tol = Tolerances::default();
    let trials = 1000;

    // vertex representation of the quadratic form
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    for k in 0..trials {
        let p = rng.random_range(1..=3);
        let ty = random_type(p, 4, &mut rng);
        let g = random_game(&ty, 10.0, &mut rng);
        let v = random_vertex(&ty, &mut rng);
        let x: PrismState<f64> = random_interior_state(&ty, &mut rng);
        let qq: PrismState<f64> = random_interior_state(&ty, &mut rng);
        let via = quadratic_via_vertex(&g, &v, &x, &qq).unwrap();
        let direct = {
            let w = x.as_vector() - qq.as_vector();
            w.dot(&(g.payoff() * &w))
        };
        ensure(rel(via, direct) <= 1e-9 || (via - direct).abs() <= 1e-12, || {
            format!("representation trial {k}: {via} vs {direct}")
        })?;
    }

    // scaled vertex matrix, exact on integers
    let mut rng = ChaCha8Rng::seed_from_u64(72);
    for k in 0..trials {
        let ty = random_type(rng.random_range(1..=3), 4, &mut rng);
        let g = random_integer_game(&ty, 20, &mut rng);
        let d = random_integer_scaling(&ty, 9, &mut rng);
        let v = random_vertex(&ty, &mut rng);
        let lhs = vertex_matrix(&g.scaled(&d).unwrap(), &v).unwrap().entries;
        let rhs = vertex_matrix(&g, &v).unwrap().scaled(&d);
        ensure(lhs == rhs, || format!("scaling transport trial {k}"))?;
    }

    // equivalent games share the vector field
    let mut rng = ChaCha8Rng::seed_from_u64(73);
    for k in 0..trials {
        let ty = random_type(rng.random_range(1..=3), 4, &mut rng);
        let g = random_game(&ty, 5.0, &mut rng);
        let h = PolymatrixGame::new(ty.clone(), g.payoff() + equal_row_perturbation(&ty, 5.0, &mut rng)).unwrap();
        let x: PrismState<f64> = random_interior_state(&ty, &mut rng);
        let gap = (g.velocity(x.as_vector()) - h.velocity(x.as_vector())).amax();
        ensure(gap <= 1e-10, || format!("equivalence trial {k}: gap {gap}"))?;
    }

    // h' against central differences
    let mut rng = ChaCha8Rng::seed_from_u64(74);
    for k in 0..trials {
        let ty = random_type(rng.random_range(1..=3), 3, &mut rng);
        let opts = AdmissibleOptions { damped: rng.random_range(0..=2), scaled: true, noise: true };
        let a = random_admissible_game(&ty, &opts, &mut rng);
        let x = random_interior_state::<f64>(&ty, &mut rng).into_vector();
        let f = a.game.velocity(&x);
        let eps = 1e-6;
        // h(x + εF) − h(x − εF) summed as log ratios to avoid cancellation
        let dv = a.scaling.expand();
        let diff: f64 = (0..x.len())
            .map(|i| -a.q[i] / dv[i] * (2.0 * eps * f[i] / (x[i] - eps * f[i])).ln_1p())
            .sum();
        let fd = diff / (2.0 * eps);
        let hp = lyapunov_h(&a.q, &a.scaling, &(&x + &f * eps)).unwrap();
        let hm = lyapunov_h(&a.q, &a.scaling, &(&x - &f * eps)).unwrap();
        ensure((hp - hm - diff).abs() <= 1e-12, || format!("derivative trial {k}: h differences disagree"))?;
        let exact = h_derivative(&a.game, &a.q, &a.scaling, &x).unwrap();
        ensure((fd - exact).abs() <= (1e-6 * exact.abs()).max(1e-10) || rel(fd, exact) <= 1e-6, || {
            format!("derivative trial {k}: {exact} vs {fd}")
        })?;
    }

    // quotient rule
    let mut rng = ChaCha8Rng::seed_from_u64(75);
    for k in 0..trials {
        let ty = random_type(rng.random_range(1..=3), 4, &mut rng);
        let opts = AdmissibleOptions { damped: 1, scaled: rng.random_bool(0.5), noise: true };
        let a = random_admissible_game(&ty, &opts, &mut rng);
        let v = random_vertex(&ty, &mut rng);
        let x = random_interior_state::<f64>(&ty, &mut rng).into_vector();
        let r = quotient_rule_check(&a.game, &a.q, &v, &x).unwrap();
        ensure(r <= 1e-9, || format!("quotient trial {k}: residual {r}"))?;
    }

    // kernel duality
    let mut rng = ChaCha8Rng::seed_from_u64(76);
    for k in 0..trials {
        let m = rng.random_range(1..=6);
        let (mat, d) = dissipative_pair(m, &mut rng);
        let ok = kernel_duality(&mat, &d, &tol).map_err(|e| format!("duality trial {k}: {e}"))?;
        ensure(ok, || format!("duality trial {k}: kernels differ\n{mat}"))?;
    }

    // closure of stable dissipativity under scaling and submatrices
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for (k, m) in curated_stable_matrices().into_iter().enumerate() {
        let n = m.nrows();
        for _ in 0..5 {
            let p = DVector::from_fn(n, |_, _| rng.random_range(0.2..5.0));
            let mp = &m * DMatrix::from_diagonal(&p);
            let pm = DMatrix::from_diagonal(&p.map(|v| 1.0 / v)) * &m;
            ensure(stably_dissipative(&mp, &tol).stable, || format!("closure {k}: M P unstable\n{mp}"))?;
            ensure(stably_dissipative(&pm, &tol).stable, || format!("closure {k}: P⁻¹M unstable\n{pm}"))?;
        }
        for mask in 1u32..(1 << n) {
            let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            let sub = m.select_rows(&idx).select_columns(&idx);
            ensure(stably_dissipative(&sub, &tol).stable, || format!("closure {k}: submatrix {idx:?} unstable"))?;
        }
    }
    Ok(())
}

fn slice_consistency() -> Outcome {
    let g = worked_example();
    let ty = g.game_type().clone();
    let ell = 2;
    let qv = q();
    let reduced = q_ell_reduction(&g, &qv, ell).map_err(|e| e.to_string())?;
    let factor = 1.0 / (1.0 - qv[ell]);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut u = move || rng.random::<f64>();
    let mut found = 0;
    let mut attempts = 0;
    while found < 20 {
        attempts += 1;
        ensure(attempts < 10_000, || format!("only {found} tangency points found"))?;
        let a = slice_point(&ty, qv[ell], ell, &mut u);
        let b = slice_point(&ty, qv[ell], ell, &mut u);
        let Some(x) = tangency_on_segment(&g, ell, &a, &b, 1e-12) else { continue };
        found += 1;
        let vel = g.velocity(&x);
        let kept: Vec<usize> = (0..ty.n()).filter(|&i| i != ell).collect();
        let y = DVector::from_iterator(
            kept.len(),
            kept.iter().map(|&i| if ty.same_group(i, ell) { x[i] * factor } else { x[i] }),
        );
        let rv = reduced.velocity(&y);
        for (k, &i) in kept.iter().enumerate() {
            let orig = if ty.same_group(i, ell) { vel[i] * factor } else { vel[i] };
            ensure((orig - rv[k]).abs() <= 1e-8, || format!("coordinate {}: {orig} vs {}", i + 1, rv[k]))?;
        }
        ensure(reduced.velocity(&reduced_equilibrium(&ty, &qv, ell)).amax() <= 1e-10, || {
            "reduced equilibrium is not stationary".into()
        })?;
    }
    Ok(())
}

fn compactification() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for s in 0..5 {
        let n = rng.random_range(2..=5);
        let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-3.0..3.0));
        let r = DVector::from_fn(n, |_, _| rng.random_range(-3.0..3.0));
        let lv = LVSystem::new(a, r).map_err(|e| e.to_string())?;
        let g = lv_to_replicator(&lv);
        for _ in 0..20 {
            let z: DVector<f64> = DVector::from_fn(n, |_, _| rng.random_range(0.01..10.0));
            let x = lv_embed(&z);
            let push = lv_pushforward(&lv, &z);
            let field = g.velocity(&x) / x[n];
            let scale = push.amax().max(field.amax()).max(1e-300);
            let err = (&push - &field).amax() / scale;
            ensure(err <= 1e-8, || format!("system {s}: relative mismatch {err}"))?;
        }
    }
    Ok(())
}

/// Randomised scan orders; differences are reported, not asserted.
fn confluence_diagnostic() {
    let tol = Tolerances::default();
    let mut games = vec![worked_example()];
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    while games.len() < 51 {
        let ty = random_type(rng.random_range(1..=3), 3, &mut rng);
        let opts = AdmissibleOptions { damped: rng.random_range(0..=2), scaled: false, noise: true };
        games.push(random_admissible_game(&ty, &opts, &mut rng).game);
    }
    let mut divergent = 0;
    for (k, g) in games.iter().enumerate() {
        let adm = admissible(g, &tol);
        if !adm.admissible {
            println!("confluence: game {k} not recognised as admissible, skipped");
            continue;
        }
        let ctx = ReductionContext::new(g, &adm.v_star, &tol).unwrap();
        let base = run_with(&ctx, &ScanOrder::Canonical).info.colors;
        for seed in 0..5 {
            let other = run_with(&ctx, &ScanOrder::random(g.game_type(), seed)).info.colors;
            if other != base {
                divergent += 1;
                println!("confluence: game {k} seed {seed} differs: {base:?} vs {other:?}");
            }
        }
    }
    println!("confluence: {divergent} divergent orderings over {} games", games.len());
}

#[test]
fn acceptance() {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("1 vertex matrices of the worked example", table_vertex_matrices),
        ("2 stably dissipative vertices", v_star),
        ("3 quadratic form -9 w3^2", quadratic),
        ("4 reduction trace and verdict", reduction_trace),
        ("5 (q,3)-reduction and equivalence to zero", collapse_example),
        ("6 long-run dynamics of the worked example", dynamics_runs),
        ("7 randomised property suites", property_suites),
        ("8 slice consistency at tangency points", slice_consistency),
        ("9 Lotka-Volterra compactification", compactification),
    ];
    let mut failed = Vec::new();
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match outcome {
            Ok(()) => println!("PASS criterion {name} ({:.2?})", start.elapsed()),
            Err(msg) => {
                println!("FAIL criterion {name}: {msg}");
                failed.push(name);
            }
        }
    }
    confluence_diagnostic();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

#[test]
fn fixture_file_matches_worked_example() {
    let g: PolymatrixGame<f64> =
        polyrep::io::read_game(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/worked_example.game")).unwrap();
    assert_eq!(g, worked_example());
    let v1 = VertexLabel::from_one_based(g.game_type(), &[1, 4]).unwrap();
    assert_eq!(first_integrals(&g, &v1, &Tolerances::default()).unwrap().len(), 1);
}
