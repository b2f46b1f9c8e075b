//! Acceptance suite: one PASS/FAIL line per criterion, written straight to
//! stderr so it shows without `--nocapture`.

use std::io::Write;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;

use sserw::dynamics::{simulate, write_dump, EventKind, PreparedTilt, SimulationSpec, TiltMode, TiltParams};
use sserw::fields::empirical_density;
use sserw::harness::{
    run_entropy_experiment, run_experiment, run_importance_sampling, run_lln_experiment,
    run_perturbed_lln_experiment, ExperimentConfig,
};
use sserw::hydro::{solve_heat, solve_perturbed, SpaceTimeGrid};
use sserw::ldp::{a_star_forms, entropy_h, i_ex, i_rw, legendre_cost, BasisSpec, WalkerPath};
use sserw::model::{
    canonical_average, sample_bernoulli, DensityProfile, Diffusion, InitialState, LocalFunction, LocalRate,
    MeanField, TiltedInitial, TorusLattice,
};
use sserw::rng::stream;
use sserw::stats::Estimate;
use sserw::testfn::{TestFunctionH, TimeFunction};

// Pinned tolerances.
const Z: f64 = 4.0;
const LLN_L1_MAX: f64 = 0.05;
const ENTROPY_GAP_MAX: f64 = 0.05;
const CLOSED_FORM_TOL: f64 = 1e-6;
const LEGENDRE_TOL: f64 = 1e-4;
const A_STAR_TOL: f64 = 1e-10;
const ZERO_COST_TOL: f64 = 1e-3;
const IS_RATE_TOL: f64 = 0.15;
const MASS_TOL: f64 = 1e-12;

type Verdict = Result<(bool, String), String>;

fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

fn cfg(text: &str) -> Result<ExperimentConfig, String> {
    ExperimentConfig::from_toml_str(text).map_err(|e| e.to_string())
}

fn velocity() -> Verdict {
    let rates = LocalRate::intro();
    let field = MeanField::new(&rates);
    let mut exact = true;
    for (p, q) in [(0, 1), (1, 4), (1, 2), (1, 1)] {
        let rho = rat(p, q);
        let (_, _, v) = field.at_exact(&rho);
        exact &= v == (rat(2, 1) * &rho - rat(1, 1)) / rat(3, 1);
    }

    let n = 256;
    let t_max = 1.0;
    let lattice = TorusLattice::new(n).map_err(|e| e.to_string())?;
    let spec = SimulationSpec::new(lattice, &rates, t_max);
    let mut speeds = Vec::with_capacity(500);
    for i in 0..500 {
        let mut rng = stream(2024, i);
        let init = InitialState::untilted(sample_bernoulli(&vec![0.25; n], &mut rng));
        let out = simulate(&spec, init, &mut rng).map_err(|e| e.to_string())?;
        speeds.push(out.trajectory.final_position() / t_max);
    }
    let est = Estimate::from_samples(&speeds);
    let ok = est.agrees_with(-1.0 / 6.0, Z, 0.0);
    Ok((
        exact && ok,
        format!(
            "exact polynomial {exact}; x_T/T = {:.5} +- {:.5} vs -1/6 ({} replicas)",
            est.mean, est.stderr, est.count
        ),
    ))
}

const LLN: &str = r#"
kind = "lln"
[model]
n = [32, 64, 128, 256]
t_max = 0.2
rates = { kind = "intro" }
u0 = { kind = "cosine", mean = 0.5, amplitude = 0.25 }
[run]
replicas = 200
seed = 1
frames = 20
[tolerances]
lln_l1_max = 0.05
"#;

fn lln_summary(report: &sserw::harness::ExperimentReport) -> String {
    format!(
        "L1 {:?}, walker sup {:?}",
        report.series("l1_density").iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>(),
        report.series("walker_sup").iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>()
    )
}

fn lln() -> Verdict {
    let report = run_lln_experiment(&cfg(LLN)?).map_err(|e| e.to_string())?;
    let last = *report.series("l1_density").last().unwrap();
    Ok((report.passed() && last <= LLN_L1_MAX, lln_summary(&report)))
}

fn martingale() -> Verdict {
    let rates = LocalRate::intro();
    let t_max = 0.5;
    let u0 = DensityProfile::cosine(0.5, 0.2, 1, 128).map_err(|e| e.to_string())?;
    // K = 1, Chebyshev degree 1: 0.04 cos(2 pi x) + 0.02 tau sin(2 pi x)
    let h = TestFunctionH::new(1, 1, t_max, vec![0.0, 0.04, 0.0, 0.0, 0.0, 0.02]).map_err(|e| e.to_string())?;
    let a = TimeFunction::samples(vec![0.0, t_max], vec![0.15, 0.05]).map_err(|e| e.to_string())?;
    let tilt = TiltParams::new(u0.clone(), h, a);
    let mut ok = true;
    let mut detail = Vec::new();
    for n in [32usize, 64] {
        let lattice = TorusLattice::new(n).map_err(|e| e.to_string())?;
        let prep = PreparedTilt::new(&tilt, &lattice, t_max, 1e-10).map_err(|e| e.to_string())?;
        let init_law = TiltedInitial::new(&lattice, &u0, &u0).map_err(|e| e.to_string())?;
        let spec = SimulationSpec::new(lattice, &rates, t_max).with_tilt(TiltMode::Observe(&prep));
        let mut w = Vec::with_capacity(2000);
        for i in 0..2000 {
            let mut rng = stream(77, (n as u64) << 32 | i);
            let out = simulate(&spec, init_law.sample(&mut rng), &mut rng).map_err(|e| e.to_string())?;
            w.push((n as f64 * (out.tilt.log_ma + out.tilt.log_mh)).exp());
        }
        let est = Estimate::from_samples(&w);
        ok &= est.agrees_with(1.0, Z, 0.0);
        detail.push(format!("n={n}: {:.4} +- {:.4}", est.mean, est.stderr));
    }
    Ok((ok, detail.join("; ")))
}

fn perturbed() -> Verdict {
    let text = r#"
kind = "perturbed-lln"
[model]
n = [32, 64, 128, 256]
t_max = 0.2
rates = { kind = "intro" }
u0 = { kind = "cosine", mean = 0.5, amplitude = 0.25 }
[tilt]
h = { kind = "cosine", k = 1, amplitude = 0.2 }
a = { kind = "constant", value = 0.3 }
[run]
replicas = 200
seed = 2
frames = 20
"#;
    let report = run_perturbed_lln_experiment(&cfg(text)?).map_err(|e| e.to_string())?;
    Ok((report.passed(), lln_summary(&report)))
}

fn relative_entropy() -> Verdict {
    let text = r#"
kind = "entropy"
[model]
n = [32, 64, 128]
t_max = 0.5
rates = { kind = "intro" }
u0 = { kind = "constant", value = 0.5 }
[tilt]
a = { kind = "constant", value = 0.3 }
[run]
replicas = 400
seed = 3
[tolerances]
entropy_gap_max = 0.05
"#;
    let report = run_entropy_experiment(&cfg(text)?).map_err(|e| e.to_string())?;
    // constant density 1/2: v+ = v- = 1/2, so j = T (a sinh a - cosh a + 1)
    let a: f64 = 0.3;
    let closed = 0.5 * (a * a.sinh() - a.cosh() + 1.0);
    let limit = report.rows[0].value("limit").unwrap();
    let gap_last = *report.value_series("gap").last().unwrap();
    let ok = report.passed() && (limit - closed).abs() <= CLOSED_FORM_TOL && gap_last <= ENTROPY_GAP_MAX;
    Ok((
        ok,
        format!(
            "limit {limit:.6} (closed form {closed:.6}); gaps {:?}; {}",
            report.value_series("gap").iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>(),
            report.check("gap_decreasing").unwrap().detail
        ),
    ))
}

/// `sup_a [a x' - v+(e^a - 1) - v-(e^-a - 1)]` by a grid scan refined twice.
fn grid_sup(xp: f64, vp: f64, vm: f64) -> f64 {
    let g = |a: f64| a * xp - vp * (a.exp() - 1.0) - vm * ((-a).exp() - 1.0);
    let (mut lo, mut hi) = (-12.0, 12.0);
    let mut best = f64::NEG_INFINITY;
    for _ in 0..3 {
        let steps = 4000;
        let h = (hi - lo) / steps as f64;
        let mut arg = lo;
        for k in 0..=steps {
            let a = lo + h * k as f64;
            let v = g(a);
            if v > best {
                best = v;
                arg = a;
            }
        }
        lo = arg - h;
        hi = arg + h;
    }
    best
}

fn legendre() -> Verdict {
    let mut rng = stream(6, 0);
    let mut worst: f64 = 0.0;
    let mut worst_forms: f64 = 0.0;
    for _ in 0..10_000 {
        let xp = rng.random_range(-2.0..2.0);
        let vp = rng.random_range(0.05..1.5);
        let vm = rng.random_range(0.05..1.5);
        worst = worst.max((legendre_cost(xp, vp, vm) - grid_sup(xp, vp, vm)).abs());
        let (a1, a2) = a_star_forms(xp, vp, vm);
        worst_forms = worst_forms.max((a1 - a2).abs());
    }
    Ok((
        worst <= LEGENDRE_TOL && worst_forms <= A_STAR_TOL,
        format!("max |closed - grid| = {worst:.2e}; max |a1 - a2| = {worst_forms:.2e}"),
    ))
}

fn zero_cost() -> Verdict {
    let u0 = DensityProfile::cosine(0.5, 0.25, 1, 256).map_err(|e| e.to_string())?;
    let rates = LocalRate::intro();
    let t_max = 0.5;
    let grid = SpaceTimeGrid::new(256, t_max, 200).map_err(|e| e.to_string())?;
    let heat = solve_heat(&u0, Diffusion::ONE, &grid).map_err(|e| e.to_string())?;
    let ex = i_ex(&heat, &u0, BasisSpec::default(), Diffusion::ONE).map_err(|e| e.to_string())?;
    let sol = solve_perturbed(&TiltParams::null(&u0, t_max), &rates, Diffusion::ONE, &grid).map_err(|e| e.to_string())?;
    let path = WalkerPath::from_field(&sol.u).map_err(|e| e.to_string())?;
    let rw = i_rw(&path, &heat, &rates);
    let h = entropy_h(&u0, &u0);
    Ok((
        ex.value.abs() <= ZERO_COST_TOL && rw.value.abs() <= ZERO_COST_TOL && h == 0.0,
        format!("I_ex = {:.2e}, I_rw = {:.2e}, h(u0|u0) = {h}", ex.value, rw.value),
    ))
}

fn ensembles() -> Verdict {
    let pair = LocalFunction::product(&[1, 2]);
    let single = LocalFunction::occupation(1);
    let mut checked = 0;
    for ell in 2..=12usize {
        for k in 0..=ell {
            let second = canonical_average(&pair, k, ell).map_err(|e| e.to_string())?;
            let first = canonical_average(&single, k, ell).map_err(|e| e.to_string())?;
            let l = ell as i64;
            let k = k as i64;
            if second != rat(k * (k - 1), l * (l - 1)) || first != rat(k, l) {
                return Ok((false, format!("mismatch at k = {k}, ell = {ell}")));
            }
            checked += 1;
        }
    }
    Ok((true, format!("{checked} (k, ell) pairs exact in rational arithmetic")))
}

fn importance() -> Verdict {
    let text = r#"
kind = "importance-sampling"
[model]
n = [16, 128]
t_max = 1.0
rates = { kind = "intro" }
u0 = { kind = "constant", value = 0.5 }
[tilt]
a = { kind = "constant", value = 0.3 }
[run]
replicas = 1000
seed = 4
[event]
density_radius = 0.15
walker_radius = 0.15
naive_max_n = 16
naive_replicas = 4000
[tolerances]
is_rate_tol = 0.15
"#;
    let report = run_importance_sampling(&cfg(text)?).map_err(|e| e.to_string())?;
    let matches = report.check("is_matches_naive_n16").map(|c| c.passed).unwrap_or(false);
    let last = report.rows.last().unwrap();
    let rate_is = last.value("rate_is").unwrap();
    let rate = last.value("rate").unwrap();
    let ok = report.passed() && matches && (rate_is - rate).abs() <= IS_RATE_TOL;
    Ok((
        ok,
        format!(
            "{}; n=128: -(1/n) log P = {rate_is:.4}, I_rw + I_ex = {rate:.4}",
            report.check("is_matches_naive_n16").map(|c| c.detail.clone()).unwrap_or_default()
        ),
    ))
}

fn invariants() -> Verdict {
    let mut notes = Vec::new();
    let rates = LocalRate::intro();
    let u0 = DensityProfile::cosine(0.5, 0.3, 1, 128).map_err(|e| e.to_string())?;
    let tilt = TiltParams::new(
        u0.clone(),
        TestFunctionH::cosine(1, 0.3, 0.3),
        TimeFunction::constant(0.4),
    );

    // particle count along every event of tilted and untilted runs
    let n = 48;
    let lattice = TorusLattice::new(n).map_err(|e| e.to_string())?;
    let prep = PreparedTilt::new(&tilt, &lattice, 0.3, 1e-10).map_err(|e| e.to_string())?;
    let init_law = TiltedInitial::new(&lattice, &u0, &u0).map_err(|e| e.to_string())?;
    let mut conserved = true;
    let mut in_unit = true;
    for (i, mode) in [TiltMode::None, TiltMode::Drive(&prep)].into_iter().enumerate() {
        let spec = SimulationSpec::new(lattice, &rates, 0.3)
            .with_tilt(mode)
            .with_uniform_recording(6)
            .with_event_log(true);
        for r in 0..10 {
            let mut rng = stream(10, (i * 100 + r) as u64);
            let out = simulate(&spec, init_law.sample(&mut rng), &mut rng).map_err(|e| e.to_string())?;
            let traj = &out.trajectory;
            let mut eta = traj.initial().as_slice().to_vec();
            let k: u32 = eta.iter().map(|&b| b as u32).sum();
            for e in traj.events().unwrap() {
                if let EventKind::Exchange(p) = e.kind {
                    let (x, y) = lattice.pair(p as usize);
                    eta.swap(x, y);
                    conserved &= eta.iter().map(|&b| b as u32).sum::<u32>() == k;
                }
            }
            conserved &= eta == traj.final_config().as_slice();
            for s in traj.snapshots() {
                let (lo, hi) = empirical_density(&s.config).bounds();
                in_unit &= (0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi);
            }
        }
    }
    notes.push(format!("particles conserved {conserved}"));

    // PDE mass and range
    let grid = SpaceTimeGrid::new(128, 0.3, 30).map_err(|e| e.to_string())?;
    let heat = solve_heat(&u0, Diffusion::ONE, &grid).map_err(|e| e.to_string())?;
    let driven = solve_perturbed(&tilt, &rates, Diffusion::ONE, &grid).map_err(|e| e.to_string())?;
    let m0 = heat.frames[0].mass();
    let mut drift: f64 = 0.0;
    for f in heat.frames.iter().chain(&driven.u.frames) {
        drift = drift.max((f.mass() - m0).abs());
        let (lo, hi) = f.bounds();
        in_unit &= lo >= 0.0 && hi <= 1.0;
    }
    let mass_ok = drift <= MASS_TOL && driven.clamped == 0;
    notes.push(format!("PDE mass drift {drift:.1e}"));
    notes.push(format!("densities in [0,1] {in_unit}"));

    // deterministic replay: dumps and reports are byte-identical
    let spec = SimulationSpec::new(lattice, &rates, 0.3)
        .with_tilt(TiltMode::Drive(&prep))
        .with_event_log(true);
    let dump = |seed: u64| -> Result<Vec<u8>, String> {
        let mut rng = stream(seed, 0);
        let out = simulate(&spec, init_law.sample(&mut rng), &mut rng).map_err(|e| e.to_string())?;
        let mut buf = Vec::new();
        write_dump(&mut buf, &out.trajectory, seed, tilt.fingerprint()).map_err(|e| e.to_string())?;
        Ok(buf)
    };
    let mut replay = dump(5)? == dump(5)?;
    let small = r#"
kind = "entropy"
[model]
n = [8, 16]
t_max = 0.2
rates = { kind = "intro" }
u0 = { kind = "cosine", mean = 0.5, amplitude = 0.2 }
[tilt]
h = { kind = "cosine", amplitude = 0.2 }
a = { kind = "constant", value = 0.2 }
[run]
replicas = 20
seed = 8
"#;
    let a = run_experiment(&cfg(small)?).map_err(|e| e.to_string())?;
    let b = run_experiment(&cfg(small)?).map_err(|e| e.to_string())?;
    replay &= a.to_json().map_err(|e| e.to_string())? == b.to_json().map_err(|e| e.to_string())?;
    notes.push(format!("byte-identical replay {replay}"));

    Ok((conserved && mass_ok && in_unit && replay, notes.join("; ")))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("1 mean-field velocity", velocity),
        ("2 hydrodynamic LLN", lln),
        ("3 martingale unit expectation", martingale),
        ("4 perturbed hydrodynamic limit", perturbed),
        ("5 relative-entropy convergence", relative_entropy),
        ("6 Legendre duality", legendre),
        ("7 zero-cost paths", zero_cost),
        ("8 equivalence of ensembles", ensembles),
        ("9 importance-sampling consistency", importance),
        ("10 conservation and invariants", invariants),
    ];
    let mut failed = Vec::new();
    for (name, run) in criteria {
        let start = std::time::Instant::now();
        let (ok, detail) = run().unwrap_or_else(|e| (false, format!("error: {e}")));
        let line = format!(
            "{} criterion {name}: {detail} [{:.1}s]\n",
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
        let _ = std::io::stderr().write_all(line.as_bytes());
        if !ok {
            failed.push(name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
