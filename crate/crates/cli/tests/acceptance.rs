//! Acceptance suite: one line per criterion, nonzero exit if any criterion fails.

use levymap::classify::{check_iv, compose_from_witness, construct_witness, corollary2_check, factorization_check};
use levymap::classify::{ClassifyOptions, Decision};
use levymap::simulate::{sample_increment, sample_integral, sample_integral_pair, sample_maflp, SimConfig};
use levymap::verify::{cauchy_check, compare};
use levymap::{
    exponent_of, i_transform, jbeta_transform, map_exponent, v_law, z_law, CharFn, Family, IntegralMapSpec, Interval, Kernel,
    LevyTriple, ProbeGrid, TimeChange,
};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

const EXPONENT_GAP: f64 = 1e-6;
const CRITERION1_SECONDS: f64 = 30.0;
const WITNESS_GAP: f64 = 1e-5;
const CRITERION4_SECONDS: f64 = 60.0;
const CONFIDENCE: f64 = 3.0;
const MC_SAMPLES: usize = 100_000;
const SELF_TEST_RUNS: u64 = 50;
const SELF_TEST_SAMPLES: usize = 2_000;
const MAX_SELF_TEST_FAILURES: usize = 2;
const CAUCHY_SAMPLES: usize = 20_000;
const ALPHA: f64 = 0.25;

type Outcome = Result<String, String>;

fn fixtures() -> Vec<(&'static str, LevyTriple)> {
    vec![
        ("gaussian(0,1)", Family::gaussian(0.0, 1.0).triple().unwrap()),
        ("gamma(1,1)", Family::gamma(1.0, 1.0).triple().unwrap()),
        ("gamma(2,0.5)", Family::gamma(2.0, 0.5).triple().unwrap()),
        ("compound_poisson(1, atom 2)", Family::compound_poisson(1.0, &[(2.0, 1.0)]).triple().unwrap()),
        ("stable(0.7)", Family::stable(0.7, 1.0, None).triple().unwrap()),
    ]
}

fn err<E: std::fmt::Display>(ctx: &str) -> impl FnOnce(E) -> String + '_ {
    move |e| format!("{ctx}: {e}")
}

fn gap(a: &CharFn, b: &CharFn, ctx: &str) -> Result<f64, String> {
    a.sup_gap(b).map_err(err(ctx))
}

fn closed_forms_match_quadrature() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for (name, nu) in fixtures() {
        let phi = exponent_of(&nu).map_err(err(name))?;
        for beta in [0.5, 1.0, 4.0] {
            let exact = exponent_of(&jbeta_transform(&nu, beta).map_err(err(name))?).map_err(err(name))?;
            let quad = map_exponent(&IntegralMapSpec::jbeta(beta).unwrap(), &phi).map_err(err(name))?;
            let g = gap(&exact, &quad, name)?;
            if g >= EXPONENT_GAP {
                return Err(format!("{name}, J^{beta}: gap {g:.2e}"));
            }
            worst = worst.max(g);
        }
        let exact = exponent_of(&i_transform(&nu).map_err(err(name))?).map_err(err(name))?;
        let quad = map_exponent(&IntegralMapSpec::selfdecomposable(), &phi).map_err(err(name))?;
        let g = gap(&exact, &quad, name)?;
        if g >= EXPONENT_GAP {
            return Err(format!("{name}, I: gap {g:.2e}"));
        }
        worst = worst.max(g);
    }
    let secs = start.elapsed().as_secs_f64();
    if secs >= CRITERION1_SECONDS {
        return Err(format!("max gap {worst:.2e} but took {secs:.1}s (limit {CRITERION1_SECONDS}s)"));
    }
    Ok(format!("max gap {worst:.2e} < {EXPONENT_GAP:.0e} over 5 fixtures x (J^0.5, J^1, J^4, I), {secs:.1}s"))
}

fn witness_roundtrip() -> Outcome {
    let rhos = [
        ("gamma(1,1)", Family::gamma(1.0, 1.0).triple().unwrap()),
        ("gaussian(0,1)", Family::gaussian(0.0, 1.0).triple().unwrap()),
        ("stable(0.7) cut at 10", Family::stable(0.7, 1.0, Some(10.0)).triple().unwrap()),
    ];
    let opts = ClassifyOptions::default();
    let mut worst: f64 = 0.0;
    for (name, rho0) in rhos {
        for beta in [1.0, 3.0] {
            let ctx = format!("{name}, β={beta}");
            let nu = compose_from_witness(&rho0, beta).map_err(err(&ctx))?;
            let report = check_iv(&nu, beta, &opts).map_err(err(&ctx))?;
            if report.decision != Decision::Yes {
                return Err(format!("{ctx}: decision {:?}", report.decision));
            }
            let rho = construct_witness(&nu, beta).map_err(err(&ctx))?;
            let g = gap(&exponent_of(&rho).unwrap(), &exponent_of(&rho0).unwrap(), &ctx)?;
            if g >= WITNESS_GAP {
                return Err(format!("{ctx}: witness gap {g:.2e}"));
            }
            worst = worst.max(g);
            let f = factorization_check(&nu, &rho, beta).map_err(err(&ctx))?;
            let c = corollary2_check(&nu, &rho, beta).map_err(err(&ctx))?;
            if !f.pass || !c.pass {
                return Err(format!("{ctx}: factorization gap {:.2e}, triple relations {c:?}", f.gap));
            }
        }
    }
    let atom = Family::compound_poisson(1.0, &[(1.0, 1.0)]).triple().unwrap();
    let r = check_iv(&atom, 1.0, &opts).map_err(err("single atom"))?;
    if r.decision != Decision::No {
        return Err(format!("single atom: decision {:?}", r.decision));
    }
    Ok(format!("6 roundtrips decided yes, witness gap max {worst:.2e} < {WITNESS_GAP:.0e}; single atom decided no"))
}

fn j1_on(a: f64, b: f64) -> IntegralMapSpec {
    IntegralMapSpec::new(Kernel::Power { alpha: 1.0 }, TimeChange::Power { beta: 1.0 }, Interval::new(a, b).unwrap()).unwrap()
}

fn homomorphism_suite() -> Outcome {
    let start = Instant::now();
    let spec = j1_on(0.0, 1.0);
    let fx = fixtures();
    let mut worst: f64 = 0.0;
    let mut check = |g: f64, what: String| -> Result<(), String> {
        worst = worst.max(g);
        if g >= EXPONENT_GAP {
            Err(format!("{what}: gap {g:.2e}"))
        } else {
            Ok(())
        }
    };
    let mapped = |t: &LevyTriple, s: &IntegralMapSpec| -> Result<CharFn, String> {
        map_exponent(s, &exponent_of(t).map_err(err("exponent"))?).map_err(err("map"))
    };
    for (i, (name, nu)) in fx.iter().enumerate() {
        let base = mapped(nu, &spec)?;
        let (other_name, other) = &fx[(i + 1) % fx.len()];
        let conv = nu.convolve(other).map_err(err(name))?;
        let sum = base.plus(&mapped(other, &spec)?).map_err(err(name))?;
        check(gap(&mapped(&conv, &spec)?, &sum, name)?, format!("{name} * {other_name}"))?;
        for u in [-2.0, 0.5, 3.0] {
            let d = nu.dilate(u).map_err(err(name))?;
            check(gap(&mapped(&d, &spec)?, &base.dilated(u), name)?, format!("{name} dilated by {u}"))?;
        }
        for s in [0.5, 2.0] {
            let p = nu.conv_power(s).map_err(err(name))?;
            check(gap(&mapped(&p, &spec)?, &base.scaled(s), name)?, format!("{name} power {s}"))?;
        }
        for b in [0.3, 0.7] {
            let split = mapped(nu, &j1_on(0.0, b))?.plus(&mapped(nu, &j1_on(b, 1.0))?).map_err(err(name))?;
            check(gap(&base, &split, name)?, format!("{name} split at {b}"))?;
        }
    }
    Ok(format!(
        "convolution, dilation, convolution power and interval additivity: max gap {worst:.2e} < {EXPONENT_GAP:.0e}, {:.1}s",
        start.elapsed().as_secs_f64()
    ))
}

fn var_band(v: f64, n: usize) -> f64 {
    CONFIDENCE * v * (2.0 / (n as f64 - 1.0)).sqrt()
}

fn maflp_gaussian_marginals() -> Outcome {
    let start = Instant::now();
    let g = Family::gaussian(0.0, 1.0).triple().unwrap();
    let mut notes = Vec::new();
    for (k, t) in [0.5, 1.0, 2.0].into_iter().enumerate() {
        let cfg = SimConfig { n_samples: MC_SAMPLES, seed: 100 + k as u64, ..SimConfig::default() };
        let s = sample_maflp(&g, ALPHA, t, &cfg).map_err(err("sampling"))?;
        let v_exact = t.powf(2.0 * ALPHA + 1.0) / (2.0 * ALPHA + 1.0);
        let v_hat = s.v.variance()[0];
        if (v_hat - v_exact).abs() > var_band(v_exact, MC_SAMPLES) {
            return Err(format!("t={t}: Var V {v_hat:.4} vs {v_exact:.4}"));
        }
        let z = z_law(&g, ALPHA, t, levymap::integral_map::DEFAULT_TAIL_TOL).map_err(err("z law"))?;
        let z_var = -2.0 * z.eval(&[1.0]).map_err(err("z law"))?.re;
        let z_hat = s.z.variance()[0];
        if (z_hat - z_var).abs() > var_band(z_var, MC_SAMPLES) {
            return Err(format!("t={t}: Var Z {z_hat:.4} vs {z_var:.4}"));
        }
        let r = compare(&s.z, &z, CONFIDENCE).map_err(err("compare"))?;
        if !r.pass {
            return Err(format!("t={t}: ECF gap {:.4} > band {:.4} at {} probes", r.max_gap(), r.band[0], r.failures()));
        }
        notes.push(format!("t={t}: Var V {v_hat:.4}/{v_exact:.4}, Var Z {z_hat:.4}/{z_var:.4}, ECF {:.4}", r.max_gap()));
    }
    let secs = start.elapsed().as_secs_f64();
    if secs >= CRITERION4_SECONDS {
        return Err(format!("took {secs:.1}s (limit {CRITERION4_SECONDS}s)"));
    }
    Ok(format!("{}; band {:.4}; {secs:.1}s", notes.join("; "), CONFIDENCE / (MC_SAMPLES as f64).sqrt()))
}

fn composition_matches_direct_integral() -> Outcome {
    let t = 2.0;
    let spec = IntegralMapSpec::maflp_v(ALPHA, t).unwrap();
    let mut notes = Vec::new();
    for (k, (name, nu)) in [("gaussian(0,1)", Family::gaussian(0.0, 1.0)), ("gamma(1,1)", Family::gamma(1.0, 1.0))]
        .into_iter()
        .enumerate()
    {
        let nu = nu.triple().unwrap();
        let law = exponent_of(&v_law(&nu, ALPHA, t).map_err(err(name))?).map_err(err(name))?;
        let cfg = SimConfig { n_samples: MC_SAMPLES, seed: 200 + k as u64, ..SimConfig::default() };
        let b = sample_integral(&spec, &nu, &cfg).map_err(err(name))?;
        let r = compare(&b, &law, CONFIDENCE).map_err(err(name))?;
        if !r.pass {
            return Err(format!("{name}: ECF gap {:.4} > band {:.4}", r.max_gap(), r.band[0]));
        }
        notes.push(format!("{name} ECF gap {:.4}", r.max_gap()));
    }
    Ok(format!("{} (band {:.4})", notes.join(", "), CONFIDENCE / (MC_SAMPLES as f64).sqrt()))
}

fn simulation_fidelity() -> Outcome {
    let probes = ProbeGrid::default_for(1).unwrap();
    let mut notes = Vec::new();
    for (name, nu) in fixtures() {
        let phi = exponent_of(&nu).map_err(err(name))?;
        let mut failures = 0;
        for seed in 0..SELF_TEST_RUNS {
            let cfg = SimConfig { seed: 1000 + seed, ..SimConfig::default() };
            let b = sample_increment(&nu, 1.0, &cfg, SELF_TEST_SAMPLES).map_err(err(name))?;
            if !compare(&b, &phi, CONFIDENCE).map_err(err(name))?.pass {
                failures += 1;
            }
        }
        if failures > MAX_SELF_TEST_FAILURES {
            return Err(format!("{name}: {failures}/{SELF_TEST_RUNS} self-tests failed"));
        }
        let mut shift: f64 = 0.0;
        for spec in [IntegralMapSpec::jbeta(1.0).unwrap(), IntegralMapSpec::selfdecomposable()] {
            let cfg = SimConfig { n_samples: CAUCHY_SAMPLES, seed: 7, ..SimConfig::default() };
            let (coarse, fine) = sample_integral_pair(&spec, &nu, &cfg).map_err(err(name))?;
            let c = cauchy_check(&coarse, &fine, probes.points(), CONFIDENCE).map_err(err(name))?;
            if !c.pass {
                return Err(format!("{name}: doubling steps moved the ECF by {:.4} > {:.4}", c.max_shift, c.band));
            }
            shift = shift.max(c.max_shift);
        }
        notes.push(format!("{name} {failures}/{SELF_TEST_RUNS} fail, shift {shift:.1e}"));
    }
    Ok(notes.join("; "))
}

fn run_bin(dir: &Path, threads: &str, args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_levymap"))
        .current_dir(dir)
        .env("LEVYMAP_THREADS", threads)
        .args(args)
        .output()
        .map_err(err("spawn"))?;
    if out.status.code() != Some(0) {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok(())
}

fn manifests_reproduce() -> Outcome {
    let dir = tempfile::tempdir().map_err(err("tempdir"))?;
    let d = dir.path();
    let runs: [&[&str]; 3] = [
        &["simulate", "--dist", "gamma", "--n", "5000", "--seed", "3", "--out", "inc.csv"],
        &["simulate", "--dist", r#"{"family":"stable","index":0.7,"scale":1,"cutoff":10}"#, "--spec", r#"{"map":"i"}"#, "--n", "2000", "--seed", "4", "--out", "int.csv"],
        &["maflp", "--dist", "gaussian", "--alpha", "0.25", "--t", "1", "--n", "5000", "--seed", "5", "--parts", "--out", "z.csv"],
    ];
    let mut files = 0;
    for args in runs {
        run_bin(d, "1", args)?;
        let out = args[args.len() - 1];
        let manifest = format!("{out}.manifest.json");
        let recorded: serde_json::Value =
            serde_json::from_slice(&std::fs::read(d.join(&manifest)).map_err(err("manifest"))?).map_err(err("manifest"))?;
        let outputs: Vec<String> =
            recorded["outputs"].as_array().unwrap().iter().map(|o| o["path"].as_str().unwrap().to_string()).collect();
        let before: Vec<Vec<u8>> = outputs.iter().map(|p| std::fs::read(d.join(p)).unwrap()).collect();
        for p in &outputs {
            std::fs::remove_file(d.join(p)).map_err(err("remove"))?;
        }
        run_bin(d, "2", &["replay", &manifest])?;
        for (p, b) in outputs.iter().zip(&before) {
            if &std::fs::read(d.join(p)).map_err(err("reread"))? != b {
                return Err(format!("{p} differs after replay"));
            }
            files += 1;
        }
    }
    Ok(format!("{files} sample CSVs from 3 manifests reproduced bit-exactly on replay with a different thread count"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("closed-form transforms match quadrature", closed_forms_match_quadrature),
        ("witness roundtrip and negative control", witness_roundtrip),
        ("homomorphism and equivariance identities", homomorphism_suite),
        ("fractional process Gaussian marginals", maflp_gaussian_marginals),
        ("composed V law matches direct integral", composition_matches_direct_integral),
        ("simulation self-tests and partition refinement", simulation_fidelity),
        ("determinism of manifests", manifests_reproduce),
    ];
    let mut failed = 0;
    for (i, (title, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("criterion {} PASS  {title}: {msg} [{secs:.1}s]", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {} FAIL  {title}: {msg} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
