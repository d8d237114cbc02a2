//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use balloon_sim::atmosphere::AtmosphereModel;
use balloon_sim::cli::{self, EpisodeArgs, SweepArgs};
use balloon_sim::config::{EnvConfig, Mode};
use balloon_sim::control::{self, Command, MAX_MOLE_ITERATIONS};
use balloon_sim::dynamics::{self, BalloonParams, MassState, DRAG_COEFFICIENT_LIMITS};
use balloon_sim::env::Env;
use balloon_sim::integrate::{self, Scheme, StateVector};
use balloon_sim::policy::{Policy, PolicySpec};
use balloon_sim::Result;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Reference values: geopotential altitude (m), T (K), P (Pa), rho (kg/m^3).
const ATMOSPHERE_TABLE: [(f64, f64, f64, f64); 8] = [
    (0.0, 288.15, 101_325.0, 1.2250),
    (5_000.0, 255.65, 54_019.9, 0.73612),
    (11_000.0, 216.65, 22_632.1, 0.36392),
    (20_000.0, 216.65, 5_474.89, 0.088035),
    (32_000.0, 228.65, 868.019, 0.013225),
    (47_000.0, 270.65, 110.906, 0.0014275),
    (71_000.0, 214.65, 3.95642, 6.4211e-5),
    (84_852.0, 186.946, 0.37338, 6.958e-6),
];

fn atmosphere_oracle() -> Result<Outcome> {
    let model = AtmosphereModel::new();
    let mut worst_rel = 0.0f64;
    let mut worst_dt = 0.0f64;
    for &(h, t, p, rho) in &ATMOSPHERE_TABLE {
        let s = model.sample_geopotential(h)?;
        worst_dt = worst_dt.max((s.temperature - t).abs());
        worst_rel = worst_rel
            .max(((s.pressure - p) / p).abs())
            .max(((s.density - rho) / rho).abs());
    }
    Ok(outcome(
        worst_rel <= 1e-3 && worst_dt <= 0.05,
        format!("max relative P/rho error {worst_rel:.2e} (tol 1e-3), max |dT| {worst_dt:.2e} K (tol 0.05)"),
    ))
}

/// Random balloon at a random altitude: (rho, V, A, mass, c_d).
fn random_balloon(
    rng: &mut ChaCha8Rng,
    model: &AtmosphereModel,
    lift_ratio: f64,
) -> Result<(f64, f64, f64, f64, f64)> {
    let atm = model.sample(rng.gen_range(0.0..32_000.0))?;
    let n = rng.gen_range(5.0..2_000.0);
    let volume = dynamics::envelope_volume(
        n,
        atm.temperature,
        atm.pressure,
        dynamics::DEFAULT_GAS_CONSTANT,
    )?;
    let area = dynamics::cross_section_area(volume)?;
    let mass = atm.density * volume / lift_ratio;
    let c_drag = rng.gen_range(DRAG_COEFFICIENT_LIMITS.0..=DRAG_COEFFICIENT_LIMITS.1);
    Ok((atm.density, volume, area, mass, c_drag))
}

fn fixed_point() -> Result<Outcome> {
    let model = AtmosphereModel::new();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let g = dynamics::DEFAULT_GRAVITY;
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let lift_ratio = rng.gen_range(0.2..5.0);
        let (rho, volume, area, mass, c_drag) = random_balloon(&mut rng, &model, lift_ratio)?;
        let v = dynamics::steady_ascent_rate(rho, volume, mass, c_drag, area, g)?;
        let a = dynamics::vertical_acceleration(
            StateVector::new(0.0, v),
            rho,
            volume,
            mass,
            c_drag,
            area,
            g,
        )?;
        worst = worst.max(a.abs());
    }
    Ok(outcome(
        worst <= 1e-9,
        format!("1000 sets, max |acceleration| at steady rate {worst:.2e} m/s^2 (tol 1e-9)"),
    ))
}

fn terminal_velocity() -> Result<Outcome> {
    let model = AtmosphereModel::new();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let g = dynamics::DEFAULT_GRAVITY;
    let mut worst = 0.0f64;
    let (mut positive, mut negative, mut redrawn) = (0, 0, 0);
    while positive + negative < 100 {
        // Alternate the sign of the net lift.
        let rising = (positive + negative) % 2 == 0;
        let lift_ratio = if rising {
            rng.gen_range(1.05..3.0)
        } else {
            rng.gen_range(0.3..0.95)
        };
        let (rho, volume, area, mass, c_drag) = random_balloon(&mut rng, &model, lift_ratio)?;
        let v_term = dynamics::steady_ascent_rate(rho, volume, mass, c_drag, area, g)?;
        let a0 = (rho * volume * g - mass * g) / mass;
        // Approach is v_term * tanh(t / tau); sets with tau beyond 20 s cannot
        // settle to 1% inside 60 s for any integrator.
        if (v_term / a0).abs() > 20.0 {
            redrawn += 1;
            continue;
        }
        let f = |_t: f64, y: StateVector| -> Result<StateVector> {
            let a = dynamics::vertical_acceleration(y, rho, volume, mass, c_drag, area, g)?;
            Ok(StateVector::new(y.rate, a))
        };
        let end =
            integrate::integrate_to(&f, StateVector::new(0.0, 0.0), 0.0, 60.0, 0.1, Scheme::Rk4)?;
        worst = worst.max(((end.rate - v_term) / v_term).abs());
        if rising {
            positive += 1;
        } else {
            negative += 1;
        }
    }
    Ok(outcome(
        worst <= 0.01,
        format!(
            "{positive} positive + {negative} negative lift sets ({redrawn} redrawn with time constant > 20 s), max relative gap at 60 s {worst:.2e} (tol 1e-2)"
        ),
    ))
}

fn growth_error(scheme: Scheme, dt: f64) -> Result<f64> {
    let f =
        |_t: f64, y: StateVector| -> Result<StateVector> { Ok(StateVector::new(y.altitude, 0.0)) };
    let end = integrate::integrate_to(&f, StateVector::new(1.0, 0.0), 0.0, 1.0, dt, scheme)?;
    Ok((end.altitude - 1f64.exp()).abs())
}

/// Least-squares slope of log(error) against log(dt).
fn measured_order(scheme: Scheme, steps: &[f64]) -> Result<f64> {
    let points: Vec<(f64, f64)> = steps
        .iter()
        .map(|&dt| Ok((dt.ln(), growth_error(scheme, dt)?.ln())))
        .collect::<Result<_>>()?;
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

fn integrator_order() -> Result<Outcome> {
    let euler = measured_order(Scheme::Euler, &[0.01, 0.005, 0.0025, 0.00125])?;
    let rk4 = measured_order(Scheme::Rk4, &[0.1, 0.05, 0.025])?;
    let f =
        |_t: f64, y: StateVector| -> Result<StateVector> { Ok(StateVector::new(y.altitude, 0.0)) };
    let one = integrate::rk4_step(&f, 0.0, StateVector::new(1.0, 0.0), 0.1)?;
    let single = (one.altitude - 0.1f64.exp()).abs();
    Ok(outcome(
        euler >= 0.95 && rk4 >= 3.9 && single < 1e-7,
        format!("Euler order {euler:.3} (>= 0.95), RK4 order {rk4:.3} (>= 3.9), single RK4 step error {single:.2e} (< 1e-7)"),
    ))
}

fn controller_round_trip() -> Result<Outcome> {
    let model = AtmosphereModel::new();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let params = BalloonParams::default();
    let g = params.g;
    let (mut worst_mass, mut worst_mole, mut max_iterations) = (0.0f64, 0.0f64, 0usize);
    for _ in 0..1000 {
        let atm = model.sample(rng.gen_range(2_000.0..30_000.0))?;
        let rate = rng.gen_range(-3.0..=3.0);

        let n = rng.gen_range(50.0..1_000.0);
        let volume =
            dynamics::envelope_volume(n, atm.temperature, atm.pressure, params.gas_constant)?;
        let area = dynamics::cross_section_area(volume)?;
        let mass =
            control::required_mass_for_rate(atm.density, volume, rate, params.c_drag, area, g);
        let back = dynamics::steady_ascent_rate(atm.density, volume, mass, params.c_drag, area, g)?;
        worst_mass = worst_mass.max((back - rate).abs());

        let m_fixed = rng.gen_range(2.0..20.0);
        let sol = control::required_moles_for_rate(&params, m_fixed, &atm, rate)?;
        max_iterations = max_iterations.max(sol.iterations);
        let carrier = BalloonParams {
            m_envelope: 0.0,
            m_payload: m_fixed,
            ..params
        };
        let state = MassState {
            n_helium: sol.n_helium,
            m_sand: 0.0,
        };
        let back = control::steady_rate(&carrier, &state, &atm)?;
        worst_mole = worst_mole.max((back - rate).abs());
    }
    Ok(outcome(
        worst_mass <= 1e-6 && worst_mole <= 1e-6 && max_iterations <= MAX_MOLE_ITERATIONS,
        format!(
            "1000 states, max rate error mass {worst_mass:.2e} / moles {worst_mole:.2e} m/s (tol 1e-6), max iterations {max_iterations} (<= {MAX_MOLE_ITERATIONS})"
        ),
    ))
}

fn resource_monotonicity() -> Result<Outcome> {
    let mut violations = 0usize;
    let mut steps = 0usize;
    for seed in 0..100u64 {
        let mut env = Env::new(EnvConfig::default())?;
        let mut policy = Policy::build(&PolicySpec::Random { seed: None }, seed)?;
        env.reset(Some(seed))?;
        let mut prev = env.state().mass;
        loop {
            let action = policy.act(env.state())?;
            let r = env.step(action)?;
            let mass = env.state().mass;
            let d = r.diagnostics.delta;
            if mass.n_helium > prev.n_helium
                || mass.m_sand > prev.m_sand
                || (d.d_n_helium != 0.0 && d.d_m_sand != 0.0)
            {
                violations += 1;
            }
            prev = mass;
            steps += 1;
            if r.terminated || r.truncated {
                break;
            }
        }
    }
    Ok(outcome(
        violations == 0,
        format!("100 random-policy episodes, {steps} steps, {violations} violations"),
    ))
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn sweep_determinism() -> Result<Outcome> {
    let dir = tempfile::tempdir().expect("tempdir");
    let config = dir.path().join("env.toml");
    std::fs::write(&config, "schema = 1\nmode = \"dynamic\"\n").expect("write config");
    let sweep = |parallelism: usize| -> Result<Vec<(String, Vec<u8>)>> {
        let out = dir.path().join(format!("p{parallelism}"));
        let report = cli::sweep(&SweepArgs {
            episode: EpisodeArgs {
                config: Some(config.clone()),
                policy: "random".into(),
                wind: None,
                wind_synth: Some("random-columns:speed=10,columns=5:42".into()),
                format: "csv".into(),
            },
            seeds: "0-9".into(),
            parallelism: Some(parallelism),
            out: out.clone(),
        })?;
        assert_eq!(report.failures(), 0);
        Ok(read_dir_sorted(&out))
    };
    let serial = sweep(1)?;
    let parallel = sweep(8)?;
    let trajectories = serial
        .iter()
        .filter(|(name, _)| name.starts_with("seed_"))
        .count();
    Ok(outcome(
        trajectories == 10 && serial == parallel,
        format!(
            "{trajectories} trajectories + summary, parallelism 1 vs 8 byte-identical: {}",
            serial == parallel
        ),
    ))
}

fn final_altitude(mode: Mode) -> Result<(f64, f64)> {
    let config = EnvConfig {
        mode,
        ..EnvConfig::default()
    };
    let steps = (300.0 / config.dt_control).round() as u32;
    let mut env = Env::with_wind(
        config,
        Arc::new(balloon_sim::env::load_wind(&Default::default())?),
    )?;
    env.reset(None)?;
    let start = env.state().vertical.altitude;
    for _ in 0..steps {
        env.step(Command::Float)?;
    }
    Ok((start, env.state().vertical.altitude))
}

fn mode_agreement() -> Result<Outcome> {
    let (start, kinematic) = final_altitude(Mode::Kinematic)?;
    let (_, dynamic) = final_altitude(Mode::Dynamic)?;
    let change = (kinematic - start).abs().max((dynamic - start).abs());
    let gap = (kinematic - dynamic).abs();
    Ok(outcome(
        gap <= 0.02 * change,
        format!("final altitude kinematic {kinematic} m, dynamic {dynamic} m, gap {gap:.3e} m, total change {change:.3e} m (tol 2%)"),
    ))
}

type Criterion = (&'static str, fn() -> Result<Outcome>, Duration);

fn main() {
    let criteria: [Criterion; 8] = [
        (
            "atmosphere oracle",
            atmosphere_oracle,
            Duration::from_secs(1),
        ),
        (
            "fixed-point force balance",
            fixed_point,
            Duration::from_secs(1),
        ),
        (
            "terminal-velocity equivalence",
            terminal_velocity,
            Duration::from_secs(10),
        ),
        ("integrator order", integrator_order, Duration::from_secs(1)),
        (
            "controller inversion round-trip",
            controller_round_trip,
            Duration::from_secs(5),
        ),
        (
            "resource monotonicity and exclusivity",
            resource_monotonicity,
            Duration::from_secs(30),
        ),
        (
            "sweep determinism",
            sweep_determinism,
            Duration::from_secs(60),
        ),
        (
            "kinematic/dynamic agreement",
            mode_agreement,
            Duration::from_secs(10),
        ),
    ];
    let mut failed = 0;
    for (name, check, budget) in criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let (pass, detail) = match result {
            Ok(o) => (o.pass && elapsed <= budget, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} {name}: {detail}; {:.3} s (budget {} s)",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!("acceptance: {} passed, {failed} failed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
