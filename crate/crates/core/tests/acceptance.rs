//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails or overruns its time budget.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use sympack_core::certify::{self, Mode, Target};
use sympack_core::planner::{self, BasinModel, Curve, Polarization};
use sympack_core::rational::{self, int, ratio, Rational};
use sympack_core::{cremona, lattice, weights, BlowupForm, DEFAULT_PRECISION};

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Partial quotients by plain `i64` Euclid.
fn quotients(mut n: i64, mut d: i64) -> Vec<i64> {
    let mut out = Vec::new();
    while d != 0 {
        out.push(n / d);
        (n, d) = (d, n % d);
    }
    out
}

/// One subtraction per weight.
fn subtraction_weights(a: &Rational) -> Vec<Rational> {
    let (mut x, mut y) = (a.clone(), Rational::one());
    let mut out = Vec::new();
    while !x.is_zero() {
        if x < y {
            std::mem::swap(&mut x, &mut y);
        }
        out.push(y.clone());
        x -= &y;
    }
    out
}

fn weight_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut longest = 0;
    for _ in 0..1000 {
        let q = rng.gen_range(1..=1000i64);
        let n = rng.gen_range(q + 1..=100 * q);
        let a = ratio(n, q);
        let q = a.denom().to_i64().unwrap();
        let w = weights::weight_sequence(&a).map_err(|e| e.to_string())?;
        check(w.sum_of_squares() == a, || {
            format!("sum of squares of w({a}) is {}", w.sum_of_squares())
        })?;
        let expected = &a + int(1) - ratio(1, q);
        check(w.sum() == expected, || {
            format!("sum of w({a}) is {}, expected {expected}", w.sum())
        })?;
        let p: i64 = quotients(a.numer().to_i64().unwrap(), q).iter().sum();
        check(w.len() == p as u64, || {
            format!("p({a}) = {} but quotient sum is {p}", w.len())
        })?;
        check(weights::weight_count(&a).unwrap() == p as u64, || {
            format!("weight_count({a}) != {p}")
        })?;
        if p <= 2000 {
            check(w.to_vec() == subtraction_weights(&a), || {
                format!("w({a}) differs from subtraction")
            })?;
        }
        longest = longest.max(p);
    }
    Ok(format!("1000 rationals, longest expansion {longest}"))
}

fn cremona_regression() -> Outcome {
    let expected = [
        int(1),
        ratio(1, 2),
        ratio(1, 2),
        ratio(1, 2),
        ratio(2, 5),
        ratio(2, 5),
        ratio(3, 8),
        ratio(6, 17),
        ratio(1, 3),
    ];
    let tol = ratio(1, 1_000_000_000);
    let got: Vec<Rational> = (1..=9)
        .into_par_iter()
        .map(|n| cremona::max_equal_ball(n, &tol))
        .collect();
    for (n, (g, e)) in got.iter().zip(&expected).enumerate() {
        let diff = if g > e { g - e } else { e - g };
        check(diff <= tol, || format!("N = {}: got {g}, expected {e}", n + 1))?;
    }
    Ok("N = 1..9 within 1e-9".into())
}

fn random_blowup(rng: &mut ChaCha8Rng, max_p: usize, max_sq: &Rational) -> BlowupForm {
    loop {
        let p = rng.gen_range(1..=max_p);
        let ls: Vec<Rational> = (0..p).map(|_| ratio(rng.gen_range(1..=95), 100)).collect();
        let sq: Rational = ls.iter().map(|l| l * l).sum();
        if &sq <= max_sq {
            if let Ok(f) = BlowupForm::new(ls) {
                return f;
            }
        }
    }
}

fn dominance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let forms: Vec<BlowupForm> = (0..500).map(|_| random_blowup(&mut rng, 6, &ratio(9, 10))).collect();
    let results: Vec<Result<u64, String>> = forms
        .par_iter()
        .map(|f| {
            let lower = lattice::d_omega_bound(f, DEFAULT_PRECISION);
            let s = lattice::d_omega_search(f, 8).map_err(|e| e.to_string())?;
            check(lower.value() <= &s.value, || {
                format!("lambdas {:?}: search {} below bound {}", f.lambdas(), s.value, lower)
            })?;
            check(s.proof_step_violations.is_empty(), || {
                format!(
                    "lambdas {:?}: Omega(B) <= k(1-kappa) for {:?}",
                    f.lambdas(),
                    s.proof_step_violations
                )
            })?;
            Ok(s.admissible_classes)
        })
        .collect();
    let mut classes = 0;
    for r in results {
        classes += r?;
    }
    Ok(format!("500 forms, {classes} admissible classes checked"))
}

fn balls_below(rng: &mut ChaCha8Rng, bound: &Rational, volume: &Rational) -> Vec<Rational> {
    // a rational with a small denominator strictly below the threshold
    let cap = rational::approximate_below(bound, 10_000);
    let cap = if &cap == bound { cap * ratio(9999, 10000) } else { cap };
    let full = rng.gen_bool(0.5);
    let mut balls = Vec::new();
    let mut used = Rational::zero();
    let limit = 1500;
    if full {
        // equal balls as close to the volume as possible
        let c = &cap * ratio(rng.gen_range(800..1000), 1000);
        let per = &c * &c / int(2);
        let n = (volume / &per).floor().to_integer().to_usize().unwrap().min(limit);
        balls = vec![c; n];
    } else {
        let n = rng.gen_range(1..=200);
        for _ in 0..n {
            let c = &cap * ratio(rng.gen_range(1..1000), 1000);
            let v = &c * &c / int(2);
            if &used + &v > *volume {
                break;
            }
            used += v;
            balls.push(c);
        }
    }
    balls
}

fn certifier_soundness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut instances = Vec::with_capacity(10_000);
    while instances.len() < 10_000 {
        let t = if rng.gen_bool(0.5) {
            let f = random_blowup(&mut rng, 5, &ratio(99, 100));
            match Target::blowup(f.lambdas().to_vec()) {
                Ok(t) => t,
                Err(_) => continue,
            }
        } else {
            let d = rng.gen_range(1..=8);
            let a = ratio(rng.gen_range(d + 1..=6 * d), d);
            Target::ellipsoid(int(1), a).unwrap()
        };
        let bound = certify::lambda_bound(&t, Mode::Conservative, DEFAULT_PRECISION)
            .unwrap()
            .bound;
        let balls = balls_below(&mut rng, bound.value(), &t.volume());
        if balls.is_empty() {
            continue;
        }
        instances.push((t, balls));
    }
    let failures: Vec<String> = instances
        .par_iter()
        .filter_map(|(t, balls)| {
            let cert = certify::certify_packing(t, balls, Mode::Conservative, DEFAULT_PRECISION).unwrap();
            if !cert.is_certified() {
                return Some(format!("generator produced an uncertified instance for {t}"));
            }
            let accepted = match t {
                Target::Ellipsoid { b, .. } => certify::decide_balls_into_ellipsoid(b, balls)
                    .map(|tr| tr.verdict.is_accepted())
                    .unwrap(),
                _ => certify::decide_balls_into(t, balls).unwrap(),
            };
            (!accepted).then(|| format!("{t} with {} balls certified but rejected", balls.len()))
        })
        .collect();
    match failures.first() {
        None => {
            let total: usize = instances.iter().map(|(_, b)| b.len()).sum();
            Ok(format!("10000 certified instances, {total} balls, 0 counterexamples"))
        }
        Some(f) => Err(format!("{} failures, first: {f}", failures.len())),
    }
}

fn full_filling() -> Outcome {
    let t = certify::decide_balls_into_ellipsoid(&int(2), &[int(1), int(1)]).map_err(|e| e.to_string())?;
    check(t.verdict.is_accepted(), || "E(1,2) with (1,1) rejected".into())?;
    check(t.input.sum_of_squares() == t.input.mu.clone() * &t.input.mu, || {
        "E(1,2) volume not equal".into()
    })?;

    let t = certify::decide_balls_into_ellipsoid(&ratio(5, 2), &[int(1), int(1), ratio(1, 2), ratio(1, 2)])
        .map_err(|e| e.to_string())?;
    check(t.verdict.is_accepted(), || {
        "E(1,5/2) with (1,1,1/2,1/2) rejected".into()
    })?;
    // (5/2)²·Σλᵢ² = 25/4 on both sides
    let scaled = t.input.sum_of_squares() * ratio(25, 1);
    check(scaled == int(25), || format!("volume ratio {scaled}/25"))?;
    check(t.steps.len() == 4, || {
        format!("trace has {} steps, expected 4", t.steps.len())
    })?;
    check(t.volume_check, || "terminal volume check failed".into())?;
    Ok("E(1,2) and E(1,5/2) filled exactly, 4-step trace".into())
}

fn random_polarization(rng: &mut ChaCha8Rng) -> Polarization {
    let l = rng.gen_range(1..=8);
    let alphas: Vec<Rational> = (0..l)
        .map(|_| ratio(rng.gen_range(1..=60), rng.gen_range(1..=30)))
        .collect();
    let max = alphas.iter().max().unwrap().clone();
    let curves = alphas
        .into_iter()
        .map(|a| Curve::new(&max * int(10) + ratio(rng.gen_range(0..=400), rng.gen_range(1..=20)), a))
        .collect();
    Polarization::new(curves)
}

fn piece_volumes(p: &Polarization, alloc: &planner::DiscAllocation) -> Result<Vec<Rational>, String> {
    let pieces = planner::pieces(p, alloc).map_err(|e| e.to_string())?;
    Ok(pieces.into_iter().map(|x| x.volume).collect())
}

fn decomposition_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..1000 {
        let p = random_polarization(&mut rng);
        let alloc = planner::plan_discs(&p).map_err(|e| e.to_string())?;
        let pieces = piece_volumes(&p, &alloc)?;
        let total: Rational = pieces.iter().sum();
        check(total == p.implied_volume(), || {
            format!("pieces sum to {total} for {p:?}")
        })?;
        let same = planner::perturb_allocation(&p, &alloc, &pieces).map_err(|e| e.to_string())?;
        check(same == alloc, || "nominal targets moved the allocation".into())?;

        let delta = planner::retarget_slack(&p, &alloc).unwrap().unwrap_or_else(|| int(1));
        let n = pieces.len();
        let mut errs: Vec<Rational> = (0..n)
            .map(|_| &delta * ratio(rng.gen_range(-1000..=1000), 1001))
            .collect();
        let mean = errs.iter().sum::<Rational>() / int(n as i64);
        for e in &mut errs {
            *e -= &mean;
        }
        let targets: Vec<Rational> = pieces.iter().zip(&errs).map(|(v, e)| v + e).collect();
        let moved = planner::perturb_allocation(&p, &alloc, &targets).map_err(|e| e.to_string())?;
        let got = piece_volumes(&p, &moved)?;
        check(got == targets, || "perturbed volumes differ from targets".into())?;
    }

    let p = Polarization::new(vec![Curve::new(int(1), ratio(1, 10)); 3]);
    let alloc = planner::plan_discs(&p).map_err(|e| e.to_string())?;
    let dec = |s: &str| rational::parse(s).unwrap();
    let targets: Vec<Rational> = ["0.036", "0.015", "0.035", "0.015", "0.035", "0.014"].map(dec).to_vec();
    let out = planner::perturb_allocation(&p, &alloc, &targets).map_err(|e| e.to_string())?;
    let expected: Vec<Rational> = ["0.72", "0.13", "0.17", "0.7", "0.13", "0.17", "0.7", "0.13", "0.15"]
        .map(dec)
        .to_vec();
    check(out.cascade_order() == expected, || {
        format!("worked example gave {:?}", out.cascade_order())
    })?;
    Ok("1000 polarizations exact; worked 3-curve example reproduced".into())
}

fn flow_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut basins = Vec::new();
    for _ in 0..10 {
        let p = random_polarization(&mut rng);
        let alloc = planner::plan_discs(&p).map_err(|e| e.to_string())?;
        let l = p.len();
        for i in 0..l {
            let d = &alloc.discs[i];
            basins.push(BasinModel::disc(&d.own, &p.curves[i].residue).map_err(|e| e.to_string())?);
            if l > 1 {
                let j = (i + 1) % l;
                let m = BasinModel::cross(
                    &d.next,
                    &p.curves[i].residue,
                    &alloc.discs[j].prev,
                    &p.curves[j].residue,
                )
                .map_err(|e| e.to_string())?;
                basins.push(m);
            }
        }
    }
    let mut compared = 0usize;
    for (k, m) in basins.iter().enumerate() {
        let vs = m.polytope().vertices();
        let xmax = vs.iter().map(|v| v.0.clone()).max().unwrap() * ratio(5, 4);
        let ymax = vs.iter().map(|v| v.1.clone()).max().unwrap() * ratio(5, 4);
        for _ in 0..1000 {
            let pt = (
                &xmax * ratio(rng.gen_range(0..=1 << 20), 1 << 20),
                &ymax * ratio(rng.gen_range(0..=1 << 20), 1 << 20),
            );
            let f = (rational::to_f64(&pt.0), rational::to_f64(&pt.1));
            if m.boundary_distance(f) <= 1e-6 {
                continue;
            }
            compared += 1;
            let by_flow = m.flows_from_disc(f, 1e-9);
            check(by_flow == m.contains(&pt), || {
                format!("basin {k}: point {f:?} flow says {by_flow}, polytope disagrees")
            })?;
        }
    }
    Ok(format!(
        "{} basins, {compared} points outside the 1e-6 band agree",
        basins.len()
    ))
}

fn atlas_sanity() -> Outcome {
    let rows = certify::atlas(&ratio(11, 10), &int(10), &ratio(1, 10), DEFAULT_PRECISION).map_err(|e| e.to_string())?;
    check(rows.len() == 90, || format!("{} rows", rows.len()))?;
    for r in &rows {
        for b in [&r.conservative, &r.optimistic] {
            let x = b.to_f64();
            check(x > 0.0 && x.is_finite(), || format!("a = {}: bound {x}", r.a))?;
        }
    }
    let at = |a: Rational| rows.iter().find(|r| r.a == a).unwrap().optimistic.to_f64();
    let (two, seven) = (at(int(2)), at(int(7)));
    check(format!("{two:.4}") == "0.1327", || format!("a = 2 row {two}"))?;
    check(format!("{seven:.4}") == "0.0920", || format!("a = 7 row {seven}"))?;
    Ok(format!("90 rows positive and finite, a=2: {two:.5}, a=7: {seven:.5}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("weight identities", Duration::from_secs(5), weight_identities),
        ("Cremona regression", Duration::from_secs(10), cremona_regression),
        ("d_Omega dominance", Duration::from_secs(60), dominance),
        ("certifier soundness", Duration::from_secs(120), certifier_soundness),
        ("full-filling regressions", Duration::MAX, full_filling),
        ("decomposition exactness", Duration::MAX, decomposition_exactness),
        ("flow-polytope consistency", Duration::MAX, flow_consistency),
        ("atlas sanity", Duration::from_secs(10), atlas_sanity),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if took > *budget => Err(format!("{detail}; over the {}s budget", budget.as_secs())),
            other => other,
        };
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("[{tag}] {} {name} ({:.2}s): {detail}", i + 1, took.as_secs_f64());
        failed += outcome.is_err() as usize;
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
