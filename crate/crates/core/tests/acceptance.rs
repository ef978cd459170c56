use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gm_surrogate::cli::{cmd_match, cmd_oracle, cmd_verify, MatchOptions, VerifyProblem};
use gm_surrogate::polytope::random_basis;
use gm_surrogate::rational::{ceil, int, rat};
use gm_surrogate::{
    basic_solution, brute_force_vertex_max, build_birkhoff, build_objective, build_perturbed, enumerate_vertices,
    eval_f, maximize_convex, oracle_gm, perturb_and_resolve, AdjacencyMatrix, BasicSolution, Basis, ConstraintSystem,
    ConvexObjective, Permutation, PerturbationParams, Rational, SensitivityTrial, SeparableQuadratic, SolverOptions,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn values(v: &[(i64, i64)]) -> Vec<Rational> {
    v.iter().map(|&(p, q)| rat(p, q)).collect()
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] != i + n - k) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Every basic solution of `sys`, from all nonsingular column subsets.
fn all_basic_solutions(sys: &ConstraintSystem) -> Vec<BasicSolution> {
    let rows: Vec<usize> = (0..sys.rows()).collect();
    combinations(sys.cols(), sys.rows())
        .into_iter()
        .filter(|cols| sys.matrix().minor(&rows, cols) != 0)
        .map(|cols| basic_solution(sys, &Basis::new(cols, sys).unwrap()).unwrap())
        .collect()
}

fn random_graph(rng: &mut ChaCha8Rng, n: usize) -> AdjacencyMatrix {
    let density = rng.gen_range(0.2..0.8);
    let mut edges = Vec::new();
    for u in 1..=n {
        for v in u + 1..=n {
            if rng.gen_bool(density) {
                edges.push((u, v));
            }
        }
    }
    AdjacencyMatrix::from_edges(n, &edges).unwrap()
}

fn random_t(rng: &mut ChaCha8Rng, n: usize) -> Rational {
    let d = 10_007;
    rat(rng.gen_range(1..d), n as i64 * d)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let f = SeparableQuadratic::near_tie_2x2();
    let sys = build_perturbed(2, &(rat(1, 2) - rat(1, 2000))).map_err(|e| e.to_string())?;
    let trace = maximize_convex(&f, &sys, &SolverOptions::default()).map_err(|e| e.to_string())?;
    let want = values(&[(999, 2000), (1, 1000), (1001, 2000), (0, 1)]);
    ensure!(
        trace.final_vertex.values() == want.as_slice(),
        "surrogate vertex {:?}",
        trace.final_vertex.values()
    );

    let optimum = trace.final_vertex.values().to_vec();
    let best = f.evaluate(&optimum);
    let ties = enumerate_vertices(&sys)
        .filter(|v| f.evaluate(v.values()) == best)
        .count();
    ensure!(ties == 1, "{ties} vertices attain the surrogate maximum");

    let (vertex, _) = brute_force_vertex_max(&f, &build_birkhoff(2).unwrap());
    ensure!(
        vertex.values() == values(&[(1, 1), (0, 1), (0, 1), (1, 1)]).as_slice(),
        "t=0 maximizer {:?}",
        vertex.values()
    );
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!("exact vertices reproduced in {elapsed:?}"))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let f = SeparableQuadratic::diagonal_preference_3x3();
    let original = build_birkhoff(3).unwrap();
    let perturbed = build_perturbed(3, &rat(1, 1000)).unwrap();
    let cells = |c: &[(usize, usize)], sys: &ConstraintSystem| Basis::from_cells(sys, c).unwrap();

    let spurious = [(1, 1), (2, 2), (2, 3), (3, 1), (3, 3)];
    let at0 = basic_solution(&original, &cells(&spurious, &original)).unwrap();
    ensure!(
        at0.is_feasible() && at0.is_degenerate(),
        "spurious basis at t=0: {:?}",
        at0.values()
    );
    let at_t = basic_solution(&perturbed, &cells(&spurious, &perturbed)).unwrap();
    ensure!(!at_t.is_feasible(), "spurious basis stays feasible at t=1/1000");
    ensure!(*at_t.at(3, 1, 2) == rat(-1, 1000), "witness x23 = {}", at_t.at(3, 1, 2));

    let good = [(1, 1), (2, 2), (3, 1), (3, 2), (3, 3)];
    let (_, best0) = brute_force_vertex_max(&f, &original);
    let good0 = basic_solution(&original, &cells(&good, &original)).unwrap();
    ensure!(
        good0.is_feasible() && f.evaluate(good0.values()) == best0,
        "good basis not optimal at t=0"
    );

    let good_t = basic_solution(&perturbed, &cells(&good, &perturbed)).unwrap();
    let best_t = all_basic_solutions(&perturbed)
        .into_iter()
        .filter(BasicSolution::is_feasible)
        .map(|s| (f.evaluate(s.values()), s.basis().sorted()))
        .collect::<Vec<_>>();
    let max = best_t.iter().map(|(v, _)| v.clone()).max().unwrap();
    let winners: Vec<_> = best_t.iter().filter(|(v, _)| *v == max).collect();
    ensure!(
        winners.len() == 1,
        "{} optimal feasible bases at t=1/1000",
        winners.len()
    );
    ensure!(
        winners[0].1 == good_t.basis().sorted(),
        "optimal basis is {:?}",
        winners[0].1.cells(3)
    );

    let trace = maximize_convex(&f, &perturbed, &SolverOptions::default()).unwrap();
    ensure!(
        trace.final_basis == good_t.basis().sorted(),
        "solver basis {:?}",
        trace.final_basis.cells(3)
    );
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!("bases classified in {elapsed:?}"))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let plan = [(3, 20), (4, 15), (5, 15)];
    let mut solved = 0;
    for (n, count) in plan {
        for _ in 0..count {
            let g1 = random_graph(&mut rng, n);
            let g2 = random_graph(&mut rng, n);
            let report = cmd_match(&g1, &g2, &MatchOptions::default()).map_err(|e| e.to_string())?;
            let oracle = cmd_oracle(&g1, &g2).map_err(|e| e.to_string())?;
            ensure!(report.is_optimal(), "n={n}: solver status {}", report.solver_status);
            ensure!(
                report.symdiff == oracle.min_symdiff as u64,
                "n={n}: symdiff {} vs oracle {}",
                report.symdiff,
                oracle.min_symdiff
            );
            ensure!(report.gap == 0, "n={n}: gap {}", report.gap);
            solved += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(format!("{solved} seeded pairs optimal with gap 0 in {elapsed:?}"))
}

fn check_positive(sol: &BasicSolution) -> Result<(), String> {
    if sol.is_feasible() {
        if let Some(v) = sol.basic_values().into_iter().find(|v| !v.is_positive()) {
            return Err(format!("basis {:?} has basic value {v}", sol.basis().columns()));
        }
    }
    Ok(())
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut feasible = 0;
    for _ in 0..5 {
        let t = random_t(&mut rng, 3);
        let sys = build_perturbed(3, &t).unwrap();
        for sol in all_basic_solutions(&sys) {
            check_positive(&sol).map_err(|e| format!("n=3 t={t}: {e}"))?;
            feasible += usize::from(sol.is_feasible());
        }
    }
    for _ in 0..5 {
        let t = random_t(&mut rng, 4);
        let sys = build_perturbed(4, &t).unwrap();
        for _ in 0..1000 {
            let sol = basic_solution(&sys, &random_basis(&sys, &mut rng)).unwrap();
            check_positive(&sol).map_err(|e| format!("n=4 t={t}: {e}"))?;
            feasible += usize::from(sol.is_feasible());
        }
    }
    ensure!(feasible > 0, "no feasible basis sampled");
    Ok(format!("{feasible} feasible bases, all strictly positive"))
}

fn criterion_5() -> Outcome {
    for (n, expected) in [(3, 6), (4, 24)] {
        let vertices: Vec<BasicSolution> = enumerate_vertices(&build_birkhoff(n).unwrap()).collect();
        ensure!(vertices.len() == expected, "n={n}: {} vertices", vertices.len());
        let mut seen = std::collections::HashSet::new();
        for v in &vertices {
            let image: Vec<usize> = (0..n)
                .map(|i| (0..n).find(|&j| *v.at(n, i, j) == int(1)))
                .collect::<Option<_>>()
                .ok_or("row without a unit entry")?;
            let sigma = Permutation::new(image).map_err(|e| e.to_string())?;
            ensure!(
                v.values() == sigma.to_matrix().as_slice(),
                "vertex {:?} is not a permutation matrix",
                v.values()
            );
            ensure!(seen.insert(sigma.clone()), "vertex {sigma} repeated");
        }
    }
    Ok("6 and 24 permutation matrices".into())
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut trials = 0;
    for n in [2, 3, 4] {
        let sys = build_birkhoff(n).unwrap();
        let m = sys.rows() as i64;
        for _ in 0..1000 {
            let b: Vec<BigInt> = (0..m).map(|_| BigInt::from(rng.gen_range(-5..=5))).collect();
            let gamma_bound = rat(rng.gen_range(1..=1000), rng.gen_range(1..=1000));
            let limit = &gamma_bound / int(m);
            let gamma: Vec<Rational> = (0..m).map(|_| &limit * rat(rng.gen_range(-999..=999), 1000)).collect();
            let basis = random_basis(&sys, &mut rng);
            let trial = SensitivityTrial::new(&sys, b, gamma, gamma_bound.clone(), basis).map_err(|e| e.to_string())?;
            let dev = perturb_and_resolve(&trial).map_err(|e| e.to_string())?;
            ensure!(
                dev.max() < gamma_bound,
                "n={n}: deviation {} >= {gamma_bound}",
                dev.max()
            );
            let cap = int(m) * &gamma_bound * &gamma_bound;
            ensure!(
                dev.squared_norm() < cap,
                "n={n}: squared norm {} >= {cap}",
                dev.squared_norm()
            );
            trials += 1;
        }
    }
    Ok(format!("{trials} trials within bounds"))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut infeasible = 0;
    for n in [3, 4] {
        let sys = build_birkhoff(n).unwrap();
        for _ in 0..1000 {
            let sol = basic_solution(&sys, &random_basis(&sys, &mut rng)).unwrap();
            ensure!(
                sol.values().iter().all(Rational::is_integer),
                "fractional solution {:?}",
                sol.values()
            );
            if !sol.is_feasible() {
                let min = sol.values().iter().min().unwrap();
                ensure!(*min <= int(-1), "infeasible solution with minimum {min}");
                infeasible += 1;
            }
        }
    }
    Ok(format!(
        "2000 integral bases, {infeasible} infeasible with a component <= -1"
    ))
}

/// Rational `u >= sqrt(r)`.
fn sqrt_upper(r: &Rational) -> Rational {
    let approx = num_traits::ToPrimitive::to_f64(r).unwrap().sqrt();
    let mut u = rat((approx * 1e9).ceil() as i64 + 1, 1_000_000_000);
    while &u * &u < *r {
        u *= rat(1001, 1000);
    }
    u
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = Rational::zero();
    for n in [3, 4, 5] {
        let g1 = if n == 5 {
            AdjacencyMatrix::complete(n)
        } else {
            random_graph(&mut rng, n)
        };
        let g2 = random_graph(&mut rng, n);
        let obj = build_objective(&g1, &g2).unwrap();
        let delta = PerturbationParams::for_objective(&obj).unwrap().delta_hat;
        for _ in 0..1000 {
            let mut image: Vec<usize> = (0..n).collect();
            image.shuffle(&mut rng);
            let x = Permutation::new(image).unwrap().to_matrix();
            let dir: Vec<Rational> = (0..n * n).map(|_| rat(rng.gen_range(-1000..=1000), 1000)).collect();
            let norm2: Rational = dir.iter().map(|d| d * d).sum();
            if norm2.is_zero() {
                continue;
            }
            let radius = &delta * rat(rng.gen_range(1..=999), 1000);
            let scale = radius / sqrt_upper(&norm2);
            let y: Vec<Rational> = x.iter().zip(&dir).map(|(a, d)| a + d * &scale).collect();
            let dist2: Rational = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum();
            ensure!(dist2 < &delta * &delta, "sample outside the ball");
            let diff = (eval_f(&obj, &x).unwrap() - eval_f(&obj, &y).unwrap()).abs();
            ensure!(diff < rat(1, 2), "n={n}: |f(x) - f(y)| = {diff}");
            worst = worst.max(diff);
        }
    }
    Ok(format!(
        "3000 samples, largest change {:.6}",
        num_traits::ToPrimitive::to_f64(&worst).unwrap()
    ))
}

fn criterion_9() -> Outcome {
    let pairs = [
        ("K3/P3", AdjacencyMatrix::complete(3), AdjacencyMatrix::path(3)),
        ("C4/P4", AdjacencyMatrix::cycle(4), AdjacencyMatrix::path(4)),
    ];
    let mut entries = 0;
    for (name, g1, g2) in pairs {
        let obj = build_objective(&g1, &g2).unwrap();
        let params = PerturbationParams::for_objective(&obj).unwrap();
        let oracle = oracle_gm(&g1, &g2).unwrap();
        let optimum = BigInt::from(obj.mu() * obj.n() as u64 + oracle.max_qform as u64);
        let sys = build_perturbed(obj.n(), &params.t).unwrap();
        for opts in [SolverOptions::default(), SolverOptions::with_max_iterations(1).unwrap()] {
            let trace = maximize_convex(&obj, &sys, &opts).unwrap();
            for entry in &trace.iterations {
                let ub = ceil(&entry.upper_bound);
                ensure!(
                    ub >= optimum,
                    "{name}: iteration {} bound {ub} < {optimum}",
                    entry.iteration
                );
                entries += 1;
            }
            let report = cmd_match(&g1, &g2, &MatchOptions { solver: opts, t: None }).unwrap();
            ensure!(
                BigInt::from(report.upper_bound_int) >= optimum,
                "{name}: report bound {} < {optimum}",
                report.upper_bound_int
            );
        }
    }
    Ok(format!("{entries} trace entries bound the optimum"))
}

fn criterion_10() -> Outcome {
    let problem = VerifyProblem::Objective(SeparableQuadratic::near_tie_2x2());
    let report = cmd_verify(&problem, Some(&rat(999, 2000)), &SolverOptions::default()).map_err(|e| e.to_string())?;
    ensure!(!report.equivalent, "surrogate reported equivalent");
    let control = cmd_verify(&problem, Some(&rat(1, 10_000)), &SolverOptions::default()).map_err(|e| e.to_string())?;
    ensure!(control.equivalent, "small perturbation not equivalent");
    Ok(format!(
        "equivalent=false (restricted value {} vs optimum {})",
        report.restricted_value, report.oracle_value
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("near-tie 2x2 vertices", criterion_1),
        ("3x3 basis classification", criterion_2),
        ("end-to-end matching vs oracle", criterion_3),
        ("non-degeneracy of perturbed bases", criterion_4),
        ("Birkhoff vertices are permutations", criterion_5),
        ("right-hand side sensitivity", criterion_6),
        ("integrality of unperturbed bases", criterion_7),
        ("objective continuity radius", criterion_8),
        ("upper bound trace validity", criterion_9),
        ("oversized perturbation detected", criterion_10),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
