//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fail.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use swarm_ot::admm::{run_until_converged, AdmmConfig};
use swarm_ot::dynamic::{dynamic_loop, extract_assignment, DynamicConfig, DynamicState, NoEvents};
use swarm_ot::experiments::{compare_random, random_integer_problem, summarize, UpdateProtocol};
use swarm_ot::oracle::brute_force_optimal;
use swarm_ot::projection::project_capped_simplex;
use swarm_ot::sim::{
    decode_message, encode_message, MissionReport, RandomScenario, SimConfig, WaypointMessage,
};
use swarm_ot::{aggregate_utility, fixtures, Error};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn case_study_reproduction() -> Outcome {
    let start = Instant::now();
    let problem = fixtures::case_study();
    let config = AdmmConfig {
        max_iterations: 2000,
        ..AdmmConfig::default()
    };
    let (state, report) = run_until_converged(&problem, &config).map_err(|e| e.to_string())?;
    let assignment =
        extract_assignment(&state, &problem.topology, config.epsilon).map_err(|e| e.to_string())?;
    let utility = aggregate_utility(&assignment, &problem.params);
    let elapsed = start.elapsed();
    check(
        report.primal_residual < 1e-6
            && assignment == fixtures::case_study_assignment()
            && utility == 50.0
            && elapsed < Duration::from_secs(1),
        format!(
            "{assignment}, utility {utility}, {} iterations, residual {:e}, {elapsed:?}",
            report.iterations, report.primal_residual
        ),
    )
}

fn centralized_agreement() -> Outcome {
    let problem = fixtures::case_study();
    let (_, report) =
        run_until_converged(&problem, &AdmmConfig::default()).map_err(|e| e.to_string())?;
    let (_, best) =
        brute_force_optimal(&problem.topology, &problem.params).map_err(|e| e.to_string())?;
    let last = *report.utility_trace.last().ok_or("empty trace")?;
    check(
        (last - best).abs() <= 1e-4,
        format!("final trace value {last}, enumeration {best}"),
    )
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let config = AdmmConfig::default();
    let mut worst = 0;
    for instance in 0..200 {
        let agents = rng.gen_range(2..=4);
        let waypoints = rng.gen_range(agents.max(4)..=12);
        let problem =
            random_integer_problem(&mut rng, agents, waypoints).map_err(|e| e.to_string())?;
        let (state, report) = run_until_converged(&problem, &config)
            .map_err(|e| format!("instance {instance}: {e}"))?;
        let assignment = extract_assignment(&state, &problem.topology, config.epsilon)
            .map_err(|e| e.to_string())?;
        let (_, best) =
            brute_force_optimal(&problem.topology, &problem.params).map_err(|e| e.to_string())?;
        let utility = aggregate_utility(&assignment, &problem.params);
        if utility != best {
            return Err(format!(
                "instance {instance} ({agents}x{waypoints}): {utility} vs optimum {best}"
            ));
        }
        worst = worst.max(report.iterations);
    }
    let elapsed = start.elapsed();
    check(
        elapsed < Duration::from_secs(30),
        format!("200/200 match, max {worst} iterations, {elapsed:?}"),
    )
}

fn dynamic_reconvergence() -> Outcome {
    let problem = fixtures::case_study();
    let updates = UpdateProtocol::max_updates(&problem);
    let mut protocol = UpdateProtocol::new(7, 250, updates);
    let mut state = DynamicState::new(problem, 10.0);
    let config = DynamicConfig {
        admm: AdmmConfig {
            max_iterations: 250,
            ..AdmmConfig::default()
        },
        ..DynamicConfig::default()
    };
    let records = dynamic_loop(&mut state, &mut protocol, &config).map_err(|e| e.to_string())?;
    for epoch in &protocol.settled {
        let (_, best) = brute_force_optimal(&epoch.problem.topology, &epoch.problem.params)
            .map_err(|e| e.to_string())?;
        let utility = aggregate_utility(&epoch.assignment, &epoch.problem.params);
        if utility != best {
            return Err(format!(
                "epoch at iteration {}: {utility} vs optimum {best}",
                epoch.iteration
            ));
        }
    }
    let iterations: Vec<usize> = records.iter().map(|r| r.report.iterations).collect();
    check(
        protocol.missed == 0
            && records.len() == updates + 1
            && protocol.settled.len() == updates + 1
            && records
                .iter()
                .all(|r| r.report.primal_residual < 1e-6 && r.report.iterations <= 250),
        format!(
            "{} epochs over {updates} updates, iterations per epoch {iterations:?}",
            records.len()
        ),
    )
}

fn projection_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let dist2 = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>();
    for instance in 0..1000 {
        let n = rng.gen_range(1..=10);
        let w: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let lower = if rng.gen_bool(0.2) {
            0.0
        } else {
            rng.gen_range(0.0..2.0)
        };
        let upper = if rng.gen_bool(0.3) {
            lower
        } else {
            lower + rng.gen_range(0.0..2.0)
        };
        let v = project_capped_simplex(&w, lower, upper);
        let sum: f64 = v.iter().sum();
        if v.iter().any(|&x| x < 0.0) || sum < lower - 1e-9 || sum > upper + 1e-9 {
            return Err(format!(
                "instance {instance}: infeasible output, sum {sum} not in [{lower}, {upper}]"
            ));
        }
        let again = project_capped_simplex(&v, lower, upper);
        if v.iter().zip(&again).any(|(a, b)| (a - b).abs() > 1e-12) {
            return Err(format!("instance {instance}: not idempotent"));
        }
        let best = dist2(&v, &w);
        for _ in 0..100 {
            let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
            let total: f64 = raw.iter().sum();
            let target = rng.gen_range(lower..=upper);
            let p: Vec<f64> = raw.iter().map(|x| x * target / total).collect();
            // Compare distances, not squares, against the tolerance.
            if dist2(&p, &w).sqrt() < best.sqrt() - 1e-9 {
                return Err(format!(
                    "instance {instance}: sampled point closer than projection"
                ));
            }
        }
    }
    Ok("1000 triples, 100000 feasible samples".into())
}

fn each_waypoint_once(report: &MissionReport, waypoints: usize) -> bool {
    let mut seen: Vec<usize> = report.visit_order.iter().map(|v| v.waypoint).collect();
    seen.sort_unstable();
    seen == (0..waypoints).collect::<Vec<_>>()
}

fn simulation_comparison() -> Outcome {
    let start = Instant::now();
    let spec = RandomScenario::default();
    let rows = compare_random(100, 7, &spec, &SimConfig::default()).map_err(|e| e.to_string())?;
    let complete = rows.iter().all(|r| {
        each_waypoint_once(&r.greedy, spec.waypoints) && each_waypoint_once(&r.ot, spec.waypoints)
    });
    let (greedy, ot, wins) = summarize(&rows);
    let elapsed = start.elapsed();
    check(
        complete && ot < greedy && wins >= 0.70 && elapsed < Duration::from_secs(60),
        format!(
            "mean greedy {greedy:.1} m, mean OT {ot:.1} m, OT <= greedy on {:.0}% (need mean OT < greedy and >= 70%), every waypoint once: {complete}, {elapsed:?}",
            wins * 100.0
        ),
    )
}

fn codec() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10_000 {
        let msg = WaypointMessage::new(rng.gen(), rng.gen(), rng.gen_range(0..=1))
            .map_err(|e| e.to_string())?;
        let bytes = encode_message(&msg);
        if bytes.len() != 12 || decode_message(&bytes).map_err(|e| e.to_string())? != msg {
            return Err(format!("round trip failed for {msg:?}"));
        }
    }
    for len in (0..=24).filter(|&l| l != 12) {
        if !matches!(decode_message(&vec![0u8; len]), Err(Error::WrongLength(l)) if l == len) {
            return Err(format!("{len}-byte input accepted"));
        }
    }
    let mut bad = encode_message(&WaypointMessage::new(1, 2, 1).map_err(|e| e.to_string())?);
    bad[8] = 2;
    check(
        matches!(decode_message(&bad), Err(Error::InvalidReading(2))),
        "10000 round trips, 24 malformed lengths rejected".into(),
    )
}

fn degeneracy() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut problems = vec![fixtures::case_study()];
    for _ in 0..20 {
        problems.push(random_integer_problem(&mut rng, 3, 8).map_err(|e| e.to_string())?);
    }
    let config = AdmmConfig::default();
    for (i, problem) in problems.into_iter().enumerate() {
        let (static_state, static_report) =
            run_until_converged(&problem, &config).map_err(|e| e.to_string())?;
        let static_assignment =
            extract_assignment(&static_state, &problem.topology, config.epsilon)
                .map_err(|e| e.to_string())?;
        let mut state = DynamicState::new(problem, config.eta);
        let dyn_config = DynamicConfig {
            admm: config,
            ..DynamicConfig::default()
        };
        let records =
            dynamic_loop(&mut state, &mut NoEvents, &dyn_config).map_err(|e| e.to_string())?;
        let [record] = records.as_slice() else {
            return Err(format!("instance {i}: {} epochs", records.len()));
        };
        if record.assignment != static_assignment
            || record.report != static_report
            || state.admm.pi != static_state.pi
            || state.admm.alpha != static_state.alpha
        {
            return Err(format!("instance {i}: iterate sequences differ"));
        }
    }
    Ok("21 instances: identical traces, plans, duals and assignments".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("case-study reproduction", case_study_reproduction),
        ("centralized-distributed agreement", centralized_agreement),
        ("oracle equivalence", oracle_equivalence),
        ("dynamic re-convergence", dynamic_reconvergence),
        ("projection properties", projection_properties),
        ("simulation comparison", simulation_comparison),
        ("message codec", codec),
        ("zero-event degeneracy", degeneracy),
    ];
    let mut failed = 0;
    for (name, criterion) in criteria {
        match criterion() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
