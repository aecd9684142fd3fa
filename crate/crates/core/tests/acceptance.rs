//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::process::Command;
use std::time::{Duration, Instant};

use common::{gallery_names, gaussian, load, norm_families, random_basis_change, rng, tensor_check, v};
use homfinsler::curvature::{
    constant_length_critical, flag_curvature_go, is_geodesic_orbit, ricci_scalar, riemannian_sectional, RicciBackend,
};
use homfinsler::rigidity::{abelian_ideal_flag_scan, classify_solvable_negative, positivity_implies_spectrum, FailureReason};
use homfinsler::sampling::SphereSampler;
use homfinsler::space::{self, SpaceDefinition};
use nalgebra::DVector;
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn unit(n: usize, i: usize) -> DVector<f64> {
    let mut x = DVector::zeros(n);
    x[i] = 1.0;
    x
}

struct FlagTally {
    applicable: usize,
    min: f64,
}

impl FlagTally {
    fn record(&mut self, k: f64) {
        self.applicable += 1;
        self.min = self.min.min(k);
    }
}

fn formula_nonnegativity() -> Outcome {
    let mut t = FlagTally {
        applicable: 0,
        min: f64::INFINITY,
    };
    let mut r = rng(1);

    for name in ["abelian2", "abelian3-quartic"] {
        let s = load(name);
        let n = s.decomposition.m_dim();
        for _ in 0..300 {
            let (u, w) = (gaussian(&mut r, n), gaussian(&mut r, n));
            match flag_curvature_go(&s.decomposition, &s.norm, &u, &w, 1e-8) {
                Ok(f) => t.record(f.curvature),
                Err(e) if e.is_inapplicable() => {}
                Err(e) => return Err(format!("{name}: {e}")),
            }
        }
    }

    let s = load("rotation21");
    for i in 0..200 {
        let (a, b) = if i % 2 == 0 { (1, 2) } else { (2, 1) };
        let lambda = 0.2 + 4.0 * (i as f64 / 200.0);
        let (mu, kappa): (f64, f64) = (r.gen_range(-3.0..3.0), r.gen_range(-3.0..3.0));
        if mu.abs() < 1e-3 {
            continue;
        }
        let f = flag_curvature_go(&s.decomposition, &s.norm, &(unit(3, a) * lambda), &(unit(3, b) * mu + unit(3, a) * kappa), 1e-8)
            .map_err(|e| format!("rotation21: {e}"))?;
        t.record(f.curvature);
    }

    let s = load("saddle4");
    for _ in 0..300 {
        let a = r.gen_range(0.2..2.0) * if r.gen_bool(0.5) { 1.0 } else { -1.0 };
        let sign = if r.gen_bool(0.5) { 1.0 } else { -1.0 };
        let u = v(&[0.0, a, sign * a, r.gen_range(-2.0..2.0)]);
        let w = v(&[0.0, r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0)]);
        match flag_curvature_go(&s.decomposition, &s.norm, &u, &w, 1e-8) {
            Ok(f) => t.record(f.curvature),
            Err(e) if e.is_inapplicable() => {}
            Err(e) => return Err(format!("saddle4: {e}")),
        }
    }

    for name in gallery_names() {
        let s = load(&name);
        let Some(ideal) = s.algebra().find_abelian_ideal(1e-9).map_err(|e| e.to_string())? else {
            continue;
        };
        if let Ok(scan) = abelian_ideal_flag_scan(&s.decomposition, &s.norm, &ideal, 100, 2, 1e-8) {
            for f in &scan.flags {
                t.record(f.curvature);
            }
        }
    }

    ensure(t.applicable >= 1000, || format!("only {} applicable flags", t.applicable))?;
    ensure(t.min >= -1e-12, || format!("min K = {:e}", t.min))?;
    Ok(format!("{} applicable flags, min K = {:e}", t.applicable, t.min))
}

fn oracle_equivalence() -> Outcome {
    let s = load("rotation21");
    let (d, n) = (&s.decomposition, &s.norm);
    let k0 = flag_curvature_go(d, n, &unit(3, 1), &unit(3, 2), 1e-8).map_err(|e| e.to_string())?.curvature;
    let s0 = riemannian_sectional(d, n, &unit(3, 1), &unit(3, 2), 1e-8).map_err(|e| e.to_string())?;
    ensure((k0 - 0.25).abs() <= 1e-10 && (s0 - 0.25).abs() <= 1e-10, || format!("K(e1,e2) = {k0}, sectional {s0}"))?;

    let mut r = rng(2);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let (a, b) = if i % 2 == 0 { (1, 2) } else { (2, 1) };
        let lambda = r.gen_range(0.1..5.0);
        let theta: f64 = r.gen_range(0.1..std::f64::consts::PI - 0.1);
        let rho = r.gen_range(0.1..5.0);
        let u = unit(3, a) * lambda;
        let w = (unit(3, a) * theta.cos() + unit(3, b) * theta.sin()) * rho;
        let k = flag_curvature_go(d, n, &u, &w, 1e-8).map_err(|e| e.to_string())?.curvature;
        let sec = riemannian_sectional(d, n, &u, &w, 1e-8).map_err(|e| e.to_string())?;
        worst = worst.max((k - sec).abs());
    }
    ensure(worst <= 1e-8, || format!("max |go - oracle| = {worst:e}"))?;
    Ok(format!("K(e1,e2) = {k0}, max |go - oracle| = {worst:e} over 100 flags"))
}

fn hyperbolic_oracle() -> Outcome {
    let mut parts = Vec::new();
    for dim in [2usize, 3, 5] {
        let s = load(&format!("hyperbolic{dim}"));
        let (d, n) = (&s.decomposition, &s.norm);
        let mut r = rng(dim as u64);
        let mut sec_err: f64 = 0.0;
        for _ in 0..100 {
            let (x, y) = (gaussian(&mut r, dim), gaussian(&mut r, dim));
            let k = riemannian_sectional(d, n, &x, &y, 1e-8).map_err(|e| e.to_string())?;
            sec_err = sec_err.max((k + 1.0).abs());
        }
        let sampler = SphereSampler::new(dim as u64);
        let mut ric_err: f64 = 0.0;
        for i in 0..(dim + 20) {
            let y = if i < dim { unit(dim, i) } else { sampler.direction(dim, i) };
            let ric = ricci_scalar(d, n, &y, RicciBackend::Riemannian, 1e-8).map_err(|e| e.to_string())?;
            ric_err = ric_err.max((ric.value + (dim as f64 - 1.0)).abs());
        }
        ensure(sec_err <= 1e-9, || format!("n={dim}: sectional error {sec_err:e}"))?;
        ensure(ric_err <= 1e-8, || format!("n={dim}: Ricci error {ric_err:e}"))?;
        parts.push(format!("n={dim} ({sec_err:.0e}, {ric_err:.0e})"));
    }
    Ok(format!("K = -1 and Ric = -(n-1): {}", parts.join(", ")))
}

fn classifier_truth_table() -> Outcome {
    let table: [(&str, Option<FailureReason>); 6] = [
        ("hyperbolic2", None),
        ("hyperbolic3", None),
        ("hyperbolic5", None),
        ("heisenberg", Some(FailureReason::DimensionGap)),
        ("rotation11", Some(FailureReason::SpectrumImaginaryAxis)),
        ("diagonal-mixed", Some(FailureReason::SpectrumMixed)),
    ];
    let mut r = rng(4);
    let mut worst: f64 = 0.0;
    for (name, expected) in table {
        let alg = load(name).algebra().clone();
        let base = classify_solvable_negative(&alg, 1e-9);
        ensure(base.failure_reason == expected && base.admits_negative_metric == expected.is_none(), || {
            format!("{name}: {}", base.summary())
        })?;
        let ev0 = base.normalized_eigenvalues();
        for _ in 0..20 {
            let p = random_basis_change(&mut r, alg.dim());
            let moved = classify_solvable_negative(&alg.change_basis(&p).map_err(|e| e.to_string())?, 1e-9);
            ensure(moved.failure_reason == expected, || format!("{name} after basis change: {}", moved.summary()))?;
            let ev = moved.normalized_eigenvalues();
            ensure(ev.len() == ev0.len(), || format!("{name}: spectrum size changed"))?;
            for (a, b) in ev0.iter().zip(&ev) {
                worst = worst.max((a - b).norm());
            }
        }
    }
    ensure(worst <= 1e-7, || format!("relative eigenvalue drift {worst:e}"))?;
    Ok(format!("6 verdicts stable under 20 basis changes each (drift {worst:.1e})"))
}

fn positivity_consistency() -> Outcome {
    let mut applicable = Vec::new();
    let mut passing = 0;
    for name in gallery_names() {
        let s = load(&name);
        match positivity_implies_spectrum(&s.decomposition, &s.norm, 10_000, 5, 1e-8) {
            Ok(rep) => {
                ensure(rep.consistent, || format!("{name}: positivity scan passes but classifier rejects"))?;
                if rep.passing_orientation.is_some() {
                    passing += 1;
                }
                applicable.push(name);
            }
            Err(e) if e.is_inapplicable() => {}
            Err(e) => return Err(format!("{name}: {e}")),
        }
    }
    ensure(passing > 0, || "no gallery space passes the positivity scan".into())?;
    Ok(format!(
        "{} spaces meet the hypotheses, {passing} pass the scan, no counterexample ({})",
        applicable.len(),
        applicable.join(", ")
    ))
}

fn tensor_validation() -> Outcome {
    let mut norms = norm_families();
    let gallery: Vec<_> = ["abelian2", "abelian3-quartic", "saddle4"].iter().map(|n| (*n, load(n).norm)).collect();
    norms.extend(gallery);
    let mut worst = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (name, norm) in &norms {
        let r = tensor_check(norm, 100, 6);
        ensure(r.g_rel <= 1e-6, || format!("{name}: g vs finite differences {:e}", r.g_rel))?;
        ensure(r.c_rel <= 1e-6, || format!("{name}: C vs finite differences {:e}", r.c_rel))?;
        ensure(r.euler <= 1e-10, || format!("{name}: g(y,y) vs F² {:e}", r.euler))?;
        ensure(r.cartan_y <= 1e-9, || format!("{name}: C(y,.,.) {:e}", r.cartan_y))?;
        worst = (worst.0.max(r.g_rel), worst.1.max(r.c_rel), worst.2.max(r.euler), worst.3.max(r.cartan_y));
    }
    Ok(format!(
        "{} norms: g {:.1e}, C {:.1e}, g(y,y)-F² {:.1e}, C(y) {:.1e}",
        norms.len(),
        worst.0,
        worst.1,
        worst.2,
        worst.3
    ))
}

fn geodesic_orbit_checks() -> Outcome {
    for name in ["abelian2", "so3-sphere"] {
        let s = load(name);
        let rep = is_geodesic_orbit(&s.decomposition, &s.norm, 1000, 7, 1e-8).map_err(|e| e.to_string())?;
        ensure(rep.passed, || format!("{name} fails with residual {:e}", rep.max_residual))?;
    }
    let s = load("hyperbolic3");
    let rep = is_geodesic_orbit(&s.decomposition, &s.norm, 1000, 7, 1e-8).map_err(|e| e.to_string())?;
    let worst = rep.worst_direction.clone().unwrap_or_default();
    ensure(!rep.passed, || "hyperbolic3 passes".into())?;
    ensure((rep.max_residual - 1.0).abs() <= 1e-9, || format!("hyperbolic3 residual {}", rep.max_residual))?;
    ensure(worst == vec![0.0, 1.0, 0.0], || format!("hyperbolic3 worst direction {worst:?}"))?;
    Ok(format!("abelian2, so3-sphere pass; hyperbolic3 fails with residual {} at e1", rep.max_residual))
}

fn constant_length_condition() -> Outcome {
    let s = load("abelian2");
    let sampler = SphereSampler::new(8);
    for i in 0..1000 {
        let y = sampler.direction(2, i) * (0.1 + (i % 10) as f64);
        let rep = constant_length_critical(&s.decomposition, &s.norm, &y, 1e-8).map_err(|e| e.to_string())?;
        ensure(rep.critical, || format!("abelian2 not critical at {y:?}"))?;
    }
    let s = load("rotation21");
    let rot = constant_length_critical(&s.decomposition, &s.norm, &unit(3, 1), 1e-8).map_err(|e| e.to_string())?;
    ensure(rot.critical, || format!("rotation21 e1 residual {:e}", rot.m_residual))?;
    let s = load("hyperbolic3");
    let hyp = constant_length_critical(&s.decomposition, &s.norm, &unit(3, 1), 1e-8).map_err(|e| e.to_string())?;
    ensure(!hyp.critical, || "hyperbolic3 e1 is critical".into())?;
    let res = hyp.h_residual.max(hyp.m_residual);
    ensure((res - 1.0).abs() <= 1e-9, || format!("hyperbolic3 e1 residual {res}"))?;
    Ok(format!("abelian2 critical on 1000 vectors; rotation21 e1 critical; hyperbolic3 e1 residual {res}"))
}

fn cli_contract() -> Outcome {
    let run = |args: &[&str]| -> (i32, String) {
        let out = Command::new(env!("CARGO_BIN_EXE_homfinsler"))
            .env("NO_COLOR", "1")
            .args(args)
            .output()
            .expect("binary runs");
        (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned())
    };
    let g = |n: &str| space::gallery_path(n).display().to_string();

    let (code, out) = run(&["classify", &g("heisenberg")]);
    ensure(code == 1 && out.contains("does NOT admit: dimension-gap (3 ≠ 1+1)"), || format!("classify: {code} {out}"))?;
    let (code, out) = run(&["flag", &g("rotation21"), "--u", "0,1,0", "--v", "0,0,1"]);
    ensure(code == 0 && out.contains("K = 0.25"), || format!("flag rotation21: {code} {out}"))?;
    let (code, out) = run(&["flag", &g("hyperbolic3"), "--u", "0,1,0", "--v", "0,0,1"]);
    ensure(code == 2 && out.contains("anchor condition residual 1.0"), || format!("flag hyperbolic3: {code} {out}"))?;

    let names = gallery_names();
    for name in &names {
        let text = std::fs::read_to_string(space::gallery_path(name)).map_err(|e| e.to_string())?;
        let def = SpaceDefinition::from_json(&text).map_err(|e| format!("{name}: {e}"))?;
        let again = SpaceDefinition::from_json(&def.to_json()).map_err(|e| format!("{name}: {e}"))?;
        ensure(def == again, || format!("{name}: JSON round trip differs"))?;
    }
    Ok(format!("3 command examples; {} gallery files round-trip", names.len()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("formula nonnegativity", Duration::from_secs(5), formula_nonnegativity),
        ("oracle equivalence", Duration::from_secs(2), oracle_equivalence),
        ("hyperbolic oracle", Duration::from_secs(3), hyperbolic_oracle),
        ("classifier truth table", Duration::from_secs(3), classifier_truth_table),
        ("positivity implies spectrum", Duration::from_secs(5), positivity_consistency),
        ("tensor calculus", Duration::from_secs(5), tensor_validation),
        ("geodesic-orbit checks", Duration::from_secs(3), geodesic_orbit_checks),
        ("constant-length critical condition", Duration::from_secs(1), constant_length_condition),
        ("CLI contract", Duration::from_secs(2), cli_contract),
    ];
    let mut failures = 0;
    for (name, budget, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let timing = if elapsed > budget {
            format!("{:.2}s, over {:.0}s budget", elapsed.as_secs_f64(), budget.as_secs_f64())
        } else {
            format!("{:.2}s", elapsed.as_secs_f64())
        };
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail} [{timing}]"),
            Err(detail) => {
                failures += 1;
                println!("FAIL  {name}: {detail} [{timing}]");
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", 9 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
