//! Acceptance run: one line per criterion, exit status 1 if any fails.
//!
//! Every statistical check uses a fixed seed, so the printed numbers are
//! reproducible bit for bit.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use tridot::haar::{correlation_decay_table, exact_probability, independence_check, sample_haar, CylinderEvent};
use tridot::ribbon::{
    ambiguity_probability, decode, drift_audit, periodic_point_u, phi, sample_mu, sample_mu1, theta_embed,
    transition_graph, NuId,
};
use tridot::rng::derive_seed;
use tridot::sigma::{force_join, JoinOutcome};
use tridot::stats::{
    classify, deep_structure_audit, merge_rate_curve, triangle_suite, Budget, DeepParams, Measure, Thresholds,
    TriangleSuite, DEFAULT_SEED,
};
use tridot::{Error, Geometry, Patch, Position};

const SEED: u64 = 20_240_601;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// A small geometry of one of four shapes, anywhere near the origin.
fn mixed_geometry(rng: &mut ChaCha8Rng) -> Geometry {
    let base = Position::new(rng.random_range(-20..=20), rng.random_range(-20..=20));
    match rng.random_range(0..4) {
        0 => Geometry::triangle(base, rng.random_range(0..=24)),
        1 => {
            let m = base.level();
            let c = base.cross();
            Geometry::band(m..=m + rng.random_range(0..=16), c - rng.random_range(1..=12)..=c + rng.random_range(1..=12))
                .unwrap()
        }
        2 => Geometry::rect(base.k..=base.k + rng.random_range(0..=14), base.l..=base.l + rng.random_range(0..=14))
            .unwrap(),
        _ => Geometry::square_at(base, rng.random_range(1..=12), rng.random_range(1..=12)),
    }
}

fn criterion_1() -> Outcome {
    const N: u64 = 10_000;
    let kinds = ["sample_haar", "sample_mu1", "sample_mu", "theta_embed", "periodic_point_u"];
    let fails: Vec<u64> = kinds
        .iter()
        .enumerate()
        .map(|(kind, _)| {
            (0..N)
                .into_par_iter()
                .filter(|&i| {
                    let seed = derive_seed(SEED, 100 + kind as u64, i);
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let g = mixed_geometry(&mut rng);
                    let x = match kind {
                        0 => sample_haar(&g, seed),
                        1 => sample_mu1(&g, seed),
                        2 => sample_mu(&g, seed),
                        3 => theta_embed(&sample_haar(&g, seed)),
                        _ => periodic_point_u(&g, NuId(rng.random_range(0..3))),
                    };
                    x.rule_check().is_err()
                })
                .count() as u64
        })
        .collect();
    let detail = kinds.iter().zip(&fails).map(|(k, f)| format!("{k} {f}/{N}")).collect::<Vec<_>>().join(", ");
    outcome(fails.iter().all(|&f| f == 0), format!("rule violations: {detail}"))
}

fn criterion_2() -> Outcome {
    const N: u64 = 100_000;
    let window = Geometry::rect(0..=9, 0..=9).unwrap();
    let cells: Vec<Position> = window.cells().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let events: Vec<CylinderEvent> = (0..50)
        .map(|_| {
            let size = rng.random_range(1..=6);
            let mut chosen: Vec<Position> = Vec::new();
            while chosen.len() < size {
                let p = cells[rng.random_range(0..cells.len())];
                if !chosen.contains(&p) {
                    chosen.push(p);
                }
            }
            CylinderEvent::new(chosen.into_iter().map(|p| (p, rng.random_bool(0.5)))).unwrap()
        })
        .collect();
    let exact: Vec<f64> = events.iter().map(|e| exact_probability(e).unwrap().to_f64()).collect();
    let hits = (0..N)
        .into_par_iter()
        .map(|i| {
            let x = sample_haar(&window, derive_seed(SEED, 200, i));
            events.iter().map(|e| e.holds(&x).unwrap() as u64).collect::<Vec<_>>()
        })
        .reduce(|| vec![0; events.len()], |a, b| a.iter().zip(b).map(|(s, t)| s + t).collect());
    let mut worst = 0.0f64;
    let mut bad = 0;
    for (&p, &h) in exact.iter().zip(&hits) {
        let f = h as f64 / N as f64;
        let sd = (p * (1.0 - p) / N as f64).sqrt();
        let z = if sd == 0.0 {
            if f == p { 0.0 } else { f64::INFINITY }
        } else {
            (f - p).abs() / sd
        };
        worst = worst.max(z);
        bad += (z > 3.0) as usize;
    }
    let half = exact_probability(&CylinderEvent::cell(Position::ORIGIN)).unwrap();
    let origin = Geometry::rect(0..=0, 0..=0).unwrap();
    let ones = (0..N).into_par_iter().filter(|&i| sample_mu(&origin, derive_seed(SEED, 201, i)).bit(Position::ORIGIN)).count();
    let mu_rate = ones as f64 / N as f64;
    let pass = bad == 0 && half.to_string() == "2^-1" && (mu_rate - 13.0 / 24.0).abs() <= 0.01;
    outcome(
        pass,
        format!(
            "{bad}/50 events beyond 3 sd (max |z| = {worst:.2}); Haar P(x00=1) = {half}; mu P(x00=1) = {mu_rate:.4} vs 13/24 = {:.4}",
            13.0 / 24.0
        ),
    )
}

fn suites() -> Vec<TriangleSuite> {
    [Measure::Haar, Measure::Mu].iter().map(|m| triangle_suite(m, &[8, 16, 32, 64], 1000, SEED)).collect()
}

fn criterion_3(suites: &[TriangleSuite]) -> Outcome {
    let fails: u64 = suites.iter().flat_map(|s| &s.points).map(|p| p.lemma22_failures).sum();
    let samples: u64 = suites.iter().flat_map(|s| &s.points).map(|p| p.samples).sum();
    outcome(fails == 0, format!("{fails}/{samples} triangles fail the per-component inequality or compatibility"))
}

fn criterion_4(suites: &[TriangleSuite]) -> Outcome {
    let interior: u64 = suites.iter().flat_map(|s| &s.points).map(|p| p.interior_budget_failures).sum();
    let full: u64 = suites.iter().flat_map(|s| &s.points).map(|p| p.full_budget_failures).sum();
    let ratios: Vec<(String, f64)> = suites
        .iter()
        .map(|s| (s.sampler.clone(), s.at(64).unwrap().deep2_density / s.at(16).unwrap().deep2_density))
        .collect();
    let pass = interior == 0 && ratios.iter().all(|r| r.1 < 0.5);
    let shown = ratios.iter().map(|(m, r)| format!("{m} {r:.3}")).collect::<Vec<_>>().join(", ");
    outcome(pass, format!("interior 3n-2 failures {interior}; 5n+1 failures {full} (reported); deep2 density ratio 64/16: {shown}"))
}

fn criterion_5(suites: &[TriangleSuite]) -> Outcome {
    let fails: u64 = suites.iter().flat_map(|s| &s.points).map(|p| p.extremal_failures).sum();
    let worst = suites
        .iter()
        .flat_map(|s| &s.points)
        .map(|p| p.mean_components / (p.n as f64 + 1.0))
        .fold(0.0, f64::max);
    outcome(fails == 0, format!("{fails} triangles over n+1 components or with repeated extremals; max mean count/(n+1) = {worst:.3}"))
}

fn criterion_6() -> Outcome {
    const TRAJ: u64 = 10_000;
    const STEPS: usize = 1000;
    let band = Geometry::band(0..=STEPS as i64, -14..=14).unwrap();
    let graph = transition_graph();
    // (edge violations, ψ violations, max drift over defined starts, audited)
    let (edges, psi, drift, audited) = (0..TRAJ)
        .into_par_iter()
        .map(|i| {
            let x = sample_mu(&band, derive_seed(SEED, 600, i));
            let Some(p) = (0..=6).flat_map(|k| [Position::new(k, -k), Position::new(-k, k)]).find(|&p| x.bit(p)) else {
                return (0, 0, 0, 0);
            };
            let r = drift_audit(&x, p, STEPS).expect("trajectory stays in the band");
            let edges = r
                .steps
                .iter()
                .filter(|s| s.mv.is_some_and(|m| !graph.iter().any(|e| e.from == s.state && e.mv == m)))
                .count() as u64;
            let psi = r.violations.len() as u64 - edges;
            let drift = if phi(r.start_state).is_some() { r.max_drift } else { 0 };
            (edges, psi, drift, 1)
        })
        .reduce(|| (0, 0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2.max(b.2), a.3 + b.3));
    let a = edges == 0;
    let b = drift <= 4 && psi == 0;

    let c_curve = merge_rate_curve(&Measure::Mu, 12, &[16, 64, 256], TRAJ, SEED);
    let c = c_curve.points.iter().all(|p| p.merged == 0) && c_curve.points[0].pairs > 0;

    let window = Geometry::rect(0..=11, 0..=11).unwrap();
    let ambiguous = (0..TRAJ)
        .into_par_iter()
        .filter(|&i| matches!(decode(&sample_mu(&window, derive_seed(SEED, 601, i))), Err(Error::Ambiguous(_))))
        .count();
    let oracle = ambiguity_probability(&window).unwrap();
    let d = ambiguous == 0;

    let deep = deep_structure_audit(&Measure::Mu, DeepParams::default(), SEED);
    let (d16, d64) = (deep.at(16).unwrap(), deep.at(64).unwrap());
    let ratio = d64.density / d16.density;
    let e = (0.8..=1.25).contains(&ratio);
    let f = d64.unique_fraction > d16.unique_fraction;

    let flag = |b: bool| if b { "ok" } else { "FAIL" };
    outcome(
        a && b && c && d && e && f,
        format!(
            "(a) {} {edges} off-graph moves in {audited} trajectories; (b) {} max drift {drift}, {psi} potential violations; \
             (c) {} h=12 merges {} of {} pairs; (d) {} {ambiguous}/{TRAJ} ambiguous 12x12 decodes (exact rate {oracle:.5}, expected {:.1}); \
             (e) {} deep density ratio {ratio:.3}; (f) {} unique fraction {:.4} -> {:.4}",
            flag(a),
            flag(b),
            flag(c),
            c_curve.points.last().unwrap().merged,
            c_curve.points[0].pairs,
            flag(d),
            oracle * TRAJ as f64,
            flag(e),
            flag(f),
            d16.unique_fraction,
            d64.unique_fraction,
        ),
    )
}

/// Level-0 pasts `(k,-k)`, `0 ≤ k ≤ h + 1`, with both endpoints in Y.
fn valid_pasts(h: i64, count: usize) -> Vec<Patch> {
    let g = Geometry::from_cells((0..=h + 1).map(|k| Position::new(k, -k))).unwrap();
    (0..)
        .map(|i| sample_haar(&g, derive_seed(SEED, 700 + h as u64, i)))
        .filter(|x| x.bit(Position::ORIGIN) && x.bit(Position::new(h, -h)))
        .take(count)
        .collect()
}

fn criterion_7() -> Outcome {
    let mut worst = (0, 1.0f64);
    let mut joined_all = true;
    let mut fractions = Vec::new();
    for h in 1..=16i64 {
        let pasts = valid_pasts(h, 1000);
        let ok = pasts
            .par_iter()
            .filter(|x| matches!(force_join(x, h, h as usize).unwrap(), JoinOutcome::Joined { .. }))
            .count();
        let frac = ok as f64 / pasts.len() as f64;
        fractions.push(format!("{h}:{frac:.3}"));
        if frac < worst.1 {
            worst = (h, frac);
        }
        joined_all &= ok == pasts.len();
    }
    let curve = merge_rate_curve(&Measure::Haar, 4, &[16, 64, 256], 10_000, SEED);
    let trend = curve.is_non_decreasing() && curve.rate_at(256).unwrap() > curve.rate_at(16).unwrap();
    let deep = deep_structure_audit(&Measure::Haar, DeepParams::default(), SEED);
    let decays = deep.at(64).unwrap().density < deep.at(16).unwrap().density;
    let flag = |b: bool| if b { "ok" } else { "FAIL" };
    outcome(
        joined_all && trend && decays,
        format!(
            "{} force_join within h levels, joined fraction per h [{}]; {} h=4 merge rate {:.3} -> {:.3} -> {:.3}; {} Haar deep density {:.4} -> {:.4}",
            flag(joined_all),
            fractions.join(" "),
            flag(trend),
            curve.points[0].rate,
            curve.points[1].rate,
            curve.points[2].rate,
            flag(decays),
            deep.at(16).unwrap().density,
            deep.at(64).unwrap().density,
        ),
    )
}

fn criterion_8() -> Outcome {
    let run = |m: Measure| {
        let v = classify(&m, &Budget::default(), &Thresholds::default(), DEFAULT_SEED).unwrap();
        (v.verdict, serde_json::to_string(&v).unwrap())
    };
    let (haar, haar_json) = run(Measure::Haar);
    let (mu, mu_json) = run(Measure::Mu);
    let stable = run(Measure::Haar).1 == haar_json && run(Measure::Mu).1 == mu_json;
    let pass = format!("{haar:?}") == "TreeType" && format!("{mu:?}") == "RibbonType" && stable;
    outcome(pass, format!("haar -> {haar:?}, mu -> {mu:?}, byte-stable reruns: {stable}"))
}

fn criterion_9() -> Outcome {
    let cells: Vec<Position> = Geometry::rect(0..=11, 0..=11).unwrap().cells().collect();
    let pairs: Vec<(Position, Position)> =
        cells.iter().enumerate().flat_map(|(i, &p)| cells[i + 1..].iter().map(move |&q| (p, q))).collect();
    let dependent = pairs.par_iter().filter(|&&(p, q)| !independence_check(p, q)).count();
    let a = CylinderEvent::cell(Position::ORIGIN);
    let shifts: Vec<(i64, i64)> = (1..=16i64)
        .flat_map(|s| [(s, 0), (-s, 0), (0, s), (0, -s), (s, -s), (-s, s)])
        .collect();
    let nonzero = correlation_decay_table(&a, &a, &shifts).unwrap().iter().filter(|r| !r.difference.is_zero()).count();
    let at_zero = correlation_decay_table(&a, &a, &[(0, 0)]).unwrap()[0].difference;
    outcome(
        dependent == 0 && nonzero == 0,
        format!(
            "{dependent}/{} dependent cell pairs; {nonzero}/{} nonzero ray differences (difference at shift 0 is {at_zero})",
            pairs.len(),
            shifts.len()
        ),
    )
}

fn main() -> ExitCode {
    let mut all = true;
    let mut report = |n: usize, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let o = f();
        all &= o.pass;
        println!(
            "criterion {n} {name}: {} ({}) [{:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
    };
    report(1, "rule exactness", &mut criterion_1);
    report(2, "sampler vs oracle", &mut criterion_2);
    let suites = suites();
    report(3, "per-component branch bound", &mut || criterion_3(&suites));
    report(4, "triangle deep2 budgets", &mut || criterion_4(&suites));
    report(5, "component count", &mut || criterion_5(&suites));
    report(6, "ribbon suite", &mut criterion_6);
    report(7, "tree suite", &mut criterion_7);
    report(8, "classifier", &mut criterion_8);
    report(9, "exact independence", &mut criterion_9);
    if all { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
