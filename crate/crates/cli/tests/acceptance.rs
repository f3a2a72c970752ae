mod common;

use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sqzcool::cooling::{
    bath_occupancy_at, bath_occupancy_lossy_cavity, equilibrium_occupancy, pond_squeezing, pond_squeezing_normalized,
    sideband_limit, strong_coupling_estimate, Branch, ClosedForm, Langevin, OccupancyModel,
};
use sqzcool::langevin::{detected_spectrum, output_spectrum, phonon_occupancy_numeric, FreqGrid, SpectrumKind};
use sqzcool::model::{
    critical_squeezing, drive_from_loss, optical_spring, optimal_detuning, scattering_rates, OmParams, OmSystem,
    SqueezedDrive,
};
use sqzcool::thermometry::{effective_occupancies_given, fit_sideband, retrieve_state, Observation, Sideband};
use sqzcool::units::squeezing_db;
use sqzcool_cli::config::RunConfig;

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn device_system() -> OmSystem {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/device.toml");
    RunConfig::load(&path).unwrap_or_else(|e| panic!("{e}")).system
}

fn normalized(kappa: f64, g: f64, gamma_m: f64, n_th: f64) -> OmSystem {
    let p = OmParams { gamma_m, n_th, ..OmParams::normalized(kappa, -1.0, g) };
    OmSystem::new(p).unwrap().at_optimal_detuning().unwrap()
}

/// n_m⁰ = 0.33 ± 0.01 and r_c = 0.55 ± 0.01.
fn derived_constants() -> Outcome {
    let sys = device_system();
    let n0 = sideband_limit(&sys).map_err(|e| e.to_string())?;
    let rc = critical_squeezing(&sys);
    check(
        (n0 - 0.33).abs() <= 0.01 && (rc - 0.55).abs() <= 0.01,
        format!("n_m0 = {n0:.4} (0.33 ± 0.01), r_c = {rc:.4} (0.55 ± 0.01)"),
    )
}

/// Coherent n_m within 15% above n_m⁰; Γ_opt/(Γ·n_th) = 30 ± 3.
fn coherent_equilibrium() -> Outcome {
    let sys = device_system();
    let n0 = sideband_limit(&sys).map_err(|e| e.to_string())?;
    let n_m = equilibrium_occupancy(&sys, n0).map_err(|e| e.to_string())?;
    let factor = scattering_rates(&sys).gamma_opt / (sys.gamma_m() * sys.n_th());
    let excess = n_m / n0 - 1.0;
    check(
        (0.0..=0.15).contains(&excess) && (factor - 30.0).abs() <= 3.0,
        format!("n_m = {n_m:.4}, {:.1}% above n_m0 (≤ 15%); Γ_opt/(Γ n_th) = {factor:.2} (30 ± 3)", 100.0 * excess),
    )
}

/// Minimum of the η_in = 0.57 cooling curve: n_m ∈ [0.16, 0.21] at r = 0.30 ± 0.05, > 2 dB below n_m⁰.
fn cooling_curve() -> Outcome {
    let sys = device_system();
    let n0 = sideband_limit(&sys).map_err(|e| e.to_string())?;
    let theta = Branch::Theta0.phase(&sys);
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..=1200 {
        let (r, n_l) = drive_from_loss(i as f64 * 1e-3, 0.57).map_err(|e| e.to_string())?;
        let drive = SqueezedDrive::new(r, n_l, theta).map_err(|e| e.to_string())?;
        let n_m = ClosedForm.phonon_occupancy(&sys, &drive).map_err(|e| e.to_string())?;
        if n_m < best.0 {
            best = (n_m, r);
        }
    }
    let (n_m, r) = best;
    let below_db = 10.0 * (n0 / n_m).log10();
    check(
        (0.16..=0.21).contains(&n_m) && (r - 0.30).abs() <= 0.05 && below_db > 2.0,
        format!("min n_m = {n_m:.4} ([0.16, 0.21]) at r = {r:.3} (0.30 ± 0.05), {below_db:.2} dB below n_m0 (> 2)"),
    )
}

/// Local deviation of a heterodyne sideband from the straight line joining its window edges.
fn sideband_flatness(sys: &OmSystem, drive: &SqueezedDrive, centre: f64, half: f64) -> Result<f64, String> {
    let grid = FreqGrid::around(centre, half, 401).map_err(|e| e.to_string())?;
    let spec = output_spectrum(sys, drive, SpectrumKind::Heterodyne, &grid).map_err(|e| e.to_string())?;
    let (a, b) = (spec.values[0], spec.values[grid.count - 1]);
    let worst = spec
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let floor = a + (b - a) * i as f64 / (grid.count - 1) as f64;
            (v - floor).abs() / floor
        })
        .fold(0.0, f64::max);
    Ok(worst)
}

/// At r_c, Δ₀, θ₀: n_eff⁺ = 0 and n_eff⁻ = −1 to 1e−10; numeric sidebands flat to < 1% of the floor.
fn critical_nulling() -> Outcome {
    let sys = normalized(2.7, 0.01, 1e-8, 0.0);
    let rc = critical_squeezing(&sys);
    let w0 = optical_spring(&sys).map_err(|e| e.to_string())?;
    let half = 10.0 * scattering_rates(&sys).gamma_tot;
    let (mut closed, mut flat): (f64, f64) = (0.0, 0.0);
    for n_l in [0.0, 0.5, 2.0] {
        // Strong damping: the mode sits at the optical bath occupancy.
        let n_m = bath_occupancy_at(&sys, rc, n_l, Branch::Theta0).map_err(|e| e.to_string())?.n_bath;
        let e = effective_occupancies_given(&sys, rc, n_l, n_m, Branch::Theta0).map_err(|e| e.to_string())?;
        closed = closed.max(e.upper.abs()).max((e.lower + 1.0).abs());
        let drive = SqueezedDrive::new(rc, n_l, Branch::Theta0.phase(&sys)).map_err(|e| e.to_string())?;
        for centre in [w0, -w0] {
            flat = flat.max(sideband_flatness(&sys, &drive, centre, half)?);
        }
    }
    check(
        closed <= 1e-10 && flat < 0.01,
        format!("closed-form deviation {closed:.1e} (≤ 1e-10); sideband flatness {:.3}% of floor (< 1%)", 100.0 * flat),
    )
}

/// Numeric Langevin occupancy against the closed form within 2% on 50 random weak-coupling systems.
fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: (f64, String) = (0.0, String::new());
    for _ in 0..50 {
        let kappa = rng.random_range(0.2..5.0);
        let kappa_0 = kappa * rng.random_range(0.0..0.3);
        let g = kappa * rng.random_range(0.002..0.02);
        let p = OmParams {
            kappa_0,
            kappa_ext: kappa - kappa_0,
            gamma_m: 10f64.powf(rng.random_range(-8.0..-5.0)),
            n_th: rng.random_range(0.0..100.0),
            ..OmParams::normalized(kappa, -rng.random_range(0.3..2.5), g)
        };
        let sys = OmSystem::new(p).map_err(|e| e.to_string())?;
        let branch = if rng.random_bool(0.5) { Branch::Theta0 } else { Branch::Theta0MinusPi };
        let drive = SqueezedDrive::new(rng.random_range(0.0..1.0), rng.random_range(0.0..1.0), branch.phase(&sys))
            .map_err(|e| e.to_string())?;
        let closed = ClosedForm.phonon_occupancy(&sys, &drive).map_err(|e| e.to_string())?;
        let numeric = Langevin.phonon_occupancy(&sys, &drive).map_err(|e| e.to_string())?;
        let err = rel(numeric, closed);
        if err > worst.0 {
            worst = (err, format!("κ={kappa:.3} g/κ={:.4} Δ={:.3} {branch:?}", g / kappa, sys.delta()));
        }
    }
    check(worst.0 < 0.02, format!("worst relative deviation {:.2e} (< 2e-2) at {}", worst.0, worst.1))
}

/// Numeric occupancy at κ/Ω = 0.1 against (κ/4Ω)² + ½(g/Ω)² within 10%.
fn strong_coupling() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for g in [0.01, 0.03, 0.1] {
        let sys = normalized(0.1, g, 1e-9, 0.0);
        let numeric = phonon_occupancy_numeric(&sys, &SqueezedDrive::coherent()).map_err(|e| e.to_string())?;
        let estimate = strong_coupling_estimate(&sys);
        let err = rel(numeric, estimate);
        ok &= err < 0.10;
        parts.push(format!("g={g}: {numeric:.3e} vs {estimate:.3e} ({:.1}%)", 100.0 * err));
    }
    check(ok, format!("{} (< 10%)", parts.join(", ")))
}

/// r_OM(Δ₀) = 2r_c; −10.0 ± 0.1 dB and −5.0 ± 0.1 dB at κ/Ω = 2.85; r_OM(Δ̃) = r_OM(1/Δ̃).
fn ponderomotive() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut doubling: f64 = 0.0;
    for kappa in [0.1, 0.5, 1.0, 2.7, 2.85, 10.0] {
        let sys = normalized(kappa, 0.01, 1e-9, 0.0);
        let r_om = pond_squeezing(&sys).map_err(|e| e.to_string())?;
        doubling = doubling.max(rel(r_om, 2.0 * critical_squeezing(&sys)));
    }
    let sys = normalized(2.85, 0.01, 1e-9, 0.0);
    let pond_db = squeezing_db(pond_squeezing(&sys).map_err(|e| e.to_string())?);
    let crit_db = squeezing_db(critical_squeezing(&sys));

    let mut symmetry: f64 = 0.0;
    for _ in 0..20 {
        let kappa = rng.random_range(0.1..5.0);
        let dt = rng.random_range(0.05..1.0);
        let base = normalized(kappa, 0.01, 1e-9, 0.0);
        let d0 = optimal_detuning(&base).map_err(|e| e.to_string())?;
        let at = |x: f64| -> Result<f64, String> {
            pond_squeezing(&base.with_delta(x * d0).map_err(|e| e.to_string())?).map_err(|e| e.to_string())
        };
        let (a, b) = (at(dt)?, at(1.0 / dt)?);
        let c = pond_squeezing_normalized(dt, kappa).map_err(|e| e.to_string())?;
        symmetry = symmetry.max(rel(a, b)).max(rel(a, c));
    }
    check(
        doubling <= 1e-10 && (pond_db + 10.0).abs() <= 0.1 && (crit_db + 5.0).abs() <= 0.1 && symmetry <= 1e-10,
        format!(
            "r_OM/2r_c − 1 = {doubling:.1e} (≤ 1e-10); {pond_db:.3} dB (−10.0 ± 0.1); r_c {crit_db:.3} dB (−5.0 ± 0.1); symmetry {symmetry:.1e} (≤ 1e-10)"
        ),
    )
}

fn lossy(kappa_ext: f64, kappa_0: f64) -> Result<OmSystem, String> {
    let p = OmParams { kappa_ext, kappa_0, ..OmParams::normalized(kappa_ext + kappa_0, -1.0, 0.01) };
    OmSystem::new(p).and_then(|s| s.at_optimal_detuning()).map_err(|e| e.to_string())
}

/// κ_ext/κ₀ = 10³: ñ_bath = κ₀/4Ω and n_m⁰ = κ_ext/4Ω within 5%; κ_ext/κ₀ = 10⁻³: both reach n_m⁰(κ₀) within 1%.
fn cavity_loss_limits() -> Outcome {
    let critical = |sys: &OmSystem| SqueezedDrive::new(critical_squeezing(sys), 0.0, Branch::Theta0.phase(sys));
    let over = lossy(100.0, 0.1)?;
    let a =
        bath_occupancy_lossy_cavity(&over, &critical(&over).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let n0 = sideband_limit(&over).map_err(|e| e.to_string())?;
    let (e1, e2) = (rel(a.bath.n_bath, 0.1 / 4.0), rel(n0, 100.0 / 4.0));

    let under = lossy(1e-4, 0.1)?;
    let b = bath_occupancy_lossy_cavity(&under, &critical(&under).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let floor = b.internal_floor;
    let (e3, e4) = (rel(b.bath.n_bath, floor), rel(sideband_limit(&under).map_err(|e| e.to_string())?, floor));
    check(
        e1 < 0.05 && e2 < 0.05 && e3 < 0.01 && e4 < 0.01,
        format!(
            "overcoupled: ñ_bath {:.2}%, n_m0 {:.2}% (< 5%); undercoupled: ñ_bath {:.3}%, n_m0 {:.3}% of n_m0(κ0) (< 1%)",
            100.0 * e1,
            100.0 * e2,
            100.0 * e3,
            100.0 * e4
        ),
    )
}

const ETA_DET: f64 = 0.065;

/// Random (r, n_l, n_th) on a g/κ ≈ 1e-3 device; returns the system, the state and its θ₀ occupancy.
fn thermometry_state(rng: &mut ChaCha8Rng) -> Result<(OmSystem, f64, f64, f64), String> {
    let base = normalized(2.7, 0.003, 1e-6, 0.0);
    let r = rng.random_range(0.05..1.0);
    let n_l = rng.random_range(0.05..1.0);
    let n_th = 10f64.powf(rng.random_range(-1.0..2.0));
    let sys = base.with_thermal(base.gamma_m(), n_th).map_err(|e| e.to_string())?;
    let drive = SqueezedDrive::new(r, n_l, Branch::Theta0.phase(&sys)).map_err(|e| e.to_string())?;
    let n_m = ClosedForm.phonon_occupancy(&sys, &drive).map_err(|e| e.to_string())?;
    Ok((sys, r, n_l, n_m))
}

fn observe(sys: &OmSystem, r: f64, n_l: f64) -> Result<Vec<Observation>, String> {
    let w0 = optical_spring(sys).map_err(|e| e.to_string())?;
    let half = 12.0 * scattering_rates(sys).gamma_tot;
    let mut out = Vec::new();
    for branch in [Branch::Theta0, Branch::Theta0MinusPi] {
        let drive = SqueezedDrive::new(r, n_l, branch.phase(sys)).map_err(|e| e.to_string())?;
        for (sideband, centre) in [(Sideband::Upper, w0), (Sideband::Lower, -w0)] {
            let grid = FreqGrid::around(centre, half, 481).map_err(|e| e.to_string())?;
            let spec = output_spectrum(sys, &drive, SpectrumKind::Heterodyne, &grid).map_err(|e| e.to_string())?;
            let spec = detected_spectrum(&spec, ETA_DET).map_err(|e| e.to_string())?;
            let fit = fit_sideband(&spec, (grid.start, grid.stop)).map_err(|e| e.to_string())?;
            out.push(Observation { sideband, branch, fit });
        }
    }
    Ok(out)
}

/// 100 random states: (r, n_l, n_m) recovered from detected spectra within 1%; upper and lower n_m within 0.5%.
fn thermometry_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let (mut state_err, mut split): (f64, f64) = (0.0, 0.0);
    let mut failures = Vec::new();
    for i in 0..100 {
        let (sys, r, n_l, n_m) = thermometry_state(&mut rng)?;
        match observe(&sys, r, n_l).and_then(|obs| retrieve_state(&obs, &sys, ETA_DET).map_err(|e| e.to_string())) {
            Ok(res) => {
                let e = rel(res.r, r).max(rel(res.n_l, n_l)).max(rel(res.n_m, n_m));
                let s = rel(res.n_m_upper.unwrap_or(f64::NAN), res.n_m_lower.unwrap_or(f64::NAN));
                state_err = state_err.max(e);
                split = split.max(s);
                if !(e < 0.01 && s < 0.005) {
                    failures.push(format!("#{i} (r={r:.3}, n_l={n_l:.3}, n_m={n_m:.3}): err {e:.2e}, split {s:.2e}"));
                }
            }
            Err(e) => failures.push(format!("#{i} (r={r:.3}, n_l={n_l:.3}, n_m={n_m:.3}): {e}")),
        }
    }
    let summary = format!(
        "worst state error {:.3}% (< 1%), worst upper/lower split {:.3}% (< 0.5%)",
        100.0 * state_err,
        100.0 * split
    );
    if failures.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{summary}; {} failures, first: {}", failures.len(), failures[0]))
    }
}

/// `map`, `spectra`, `coolcurve` reproduce the stored golden outputs byte-for-byte at 1 and 4 threads.
fn sweep_regression() -> Outcome {
    let mut files = 0;
    for name in common::GOLDEN {
        files += common::check_golden(name)?;
    }
    Ok(format!("{} configs, {files} files byte-identical across runs and thread counts", common::GOLDEN.len()))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        ("derived constants at device parameters", Duration::from_secs(1), derived_constants),
        ("coherent-state equilibrium", Duration::from_secs(1), coherent_equilibrium),
        ("cooling curve minimum", Duration::from_secs(5), cooling_curve),
        ("critical nulling", Duration::from_secs(30), critical_nulling),
        ("closed form vs Langevin oracle", Duration::from_secs(120), oracle_equivalence),
        ("strong-coupling expansion", Duration::from_secs(60), strong_coupling),
        ("ponderomotive benchmarks", Duration::from_secs(10), ponderomotive),
        ("cavity-loss limits", Duration::from_secs(10), cavity_loss_limits),
        ("thermometry round trip", Duration::from_secs(120), thermometry_round_trip),
        ("sweep-output regression", Duration::from_secs(60), sweep_regression),
    ];
    let mut failed = Vec::new();
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= *budget;
        let (pass, detail) = match outcome {
            Ok(d) => (in_time, d),
            Err(d) => (false, d),
        };
        println!(
            "{} {:>2}. {name}: {detail} [{:.2} s, budget {} s{}]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64(),
            budget.as_secs(),
            if in_time { "" } else { ", over budget" }
        );
        if !pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
