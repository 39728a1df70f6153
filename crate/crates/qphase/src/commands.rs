use qphase_core::ensembles::{
    canonical_density_matrix, canonical_energy_pdf, conventional_gibbs_dm, microcanonical_dm,
    phase_space_volume, simplex_exp_moment, simplex_weighted_occupations, thermodynamics, McParams,
    ThermoSource,
};
use qphase_core::flow::{
    energy_drift, evolve_exact, evolve_numeric, max_circle_gap, overlap_invariants, phase_speed,
    relative_phases, torus_coverage, Trajectory,
};
use qphase_core::two_state::{BlochCoords, TwoLevelSystem};
use qphase_core::{
    fs_angle, transition_probability, DensityMatrix, HermitianObservable, PureState, C64,
};
use serde::Serialize;

use crate::cli::{
    Cli, Command, CrosscheckArgs, CurvesArgs, DynamicsArgs, Ensemble, EstimateArgs,
    HamiltonianSource, McArgs,
};
use crate::error::{CliError, Result};
use crate::hamiltonian::{parse_levels, read_hamiltonian};
use crate::output::{emit, energy_density_csv, g9, to_json, Csv, EstimateJson, MatrixJson};

const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Curves(a) => curves(&a),
        Command::Estimate(a) => estimate(&a),
        Command::Dynamics(a) => dynamics(&a),
        Command::Crosscheck(a) => crosscheck(&a),
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(usage(format!("--{name} must be positive, got {v}")))
    }
}

fn load(source: &HamiltonianSource) -> Result<HermitianObservable> {
    match (&source.hamiltonian, &source.levels) {
        (Some(path), None) => read_hamiltonian(path),
        (None, Some(list)) => parse_levels(list),
        _ => Err(usage("give exactly one of --hamiltonian and --levels")),
    }
}

fn mc_params(a: &McArgs) -> Result<McParams> {
    let mut mc = McParams::new(a.samples, a.seed).with_chunks(a.chunks);
    if let Some(w) = a.shell {
        positive("shell", w)?;
        mc = mc.with_shell_width(w);
    }
    if let Some(b) = a.bandwidth {
        positive("bandwidth", b)?;
        mc = mc.with_bandwidth(b);
    }
    mc.validate()?;
    Ok(mc)
}

fn curves(a: &CurvesArgs) -> Result<()> {
    positive("h", a.h)?;
    positive("k", a.k)?;
    positive("tmin", a.tmin)?;
    if a.tmax <= a.tmin || !a.tmax.is_finite() {
        return Err(usage("--tmax must exceed --tmin"));
    }
    if a.steps < 2 {
        return Err(usage("--steps must be at least 2"));
    }
    let sys = TwoLevelSystem::spin(a.h)?;
    let mut csv = Csv::new(&[
        "T",
        "E_gamma",
        "E_conventional",
        "C_gamma",
        "C_conventional",
    ]);
    let last = (a.steps - 1) as f64;
    for i in 0..a.steps {
        let f = i as f64 / last;
        let t = if i + 1 == a.steps {
            a.tmax
        } else if a.log {
            a.tmin * (a.tmax / a.tmin).powf(f)
        } else {
            a.tmin + (a.tmax - a.tmin) * f
        };
        let beta = 1.0 / (a.k * t);
        let g = sys.gamma_closed_forms(beta);
        let c = sys.conventional_closed_forms(beta);
        csv.row(&[
            t,
            g.energy,
            c.energy,
            a.k * g.heat_capacity,
            a.k * c.heat_capacity,
        ]);
    }
    emit(a.out.as_deref(), csv.as_str())
}

#[derive(Serialize)]
struct McSettings {
    samples: usize,
    seed: u64,
    chunks: usize,
    shell_width: f64,
    bandwidth: f64,
}

#[derive(Serialize)]
struct EstimateReport {
    program: &'static str,
    version: &'static str,
    ensemble: &'static str,
    dim: usize,
    levels: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    energy: Option<f64>,
    /// Nearest exact density matrix.
    density_matrix: MatrixJson,
    /// Its eigen-occupations, ascending levels.
    populations: Vec<f64>,
    energy_expectation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    raw_density_matrix: Option<EstimateJson<MatrixJson>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    population_estimate: Option<EstimateJson<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mean_energy: Option<EstimateJson<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    partition: Option<EstimateJson<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    effective_sample_size: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    shell_hits: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    monte_carlo: Option<McSettings>,
}

fn estimate(a: &EstimateArgs) -> Result<()> {
    let h = load(&a.source)?;
    let mc = mc_params(&a.mc)?;
    let spec = h.spectrum();
    let settings = McSettings {
        samples: mc.samples,
        seed: mc.seed,
        chunks: mc.chunks,
        shell_width: mc.resolved_shell_width(spec),
        bandwidth: mc.resolved_bandwidth(spec),
    };
    let need_beta = || {
        let b = a
            .beta
            .ok_or_else(|| usage("--beta is required for this ensemble"))?;
        if !b.is_finite() {
            return Err(usage("--beta must be finite"));
        }
        Ok(b)
    };
    if a.pdf.is_some() && a.ensemble != Ensemble::Canonical {
        return Err(usage("--pdf is only available for the canonical ensemble"));
    }
    let mut report = EstimateReport {
        program: "qphase",
        version: VERSION,
        ensemble: "",
        dim: h.dim(),
        levels: spec.eigenvalues().to_vec(),
        beta: None,
        energy: None,
        density_matrix: MatrixJson {
            dim: 0,
            entries: Vec::new(),
        },
        populations: Vec::new(),
        energy_expectation: 0.0,
        raw_density_matrix: None,
        population_estimate: None,
        mean_energy: None,
        partition: None,
        effective_sample_size: None,
        shell_hits: None,
        monte_carlo: None,
    };
    let rho: DensityMatrix = match a.ensemble {
        Ensemble::Gibbs => {
            let beta = need_beta()?;
            report.ensemble = "gibbs";
            report.beta = Some(beta);
            conventional_gibbs_dm(&h, beta)?
        }
        Ensemble::Canonical => {
            let beta = need_beta()?;
            let est = canonical_density_matrix(&h, beta, &mc)?;
            if let Some(path) = &a.pdf {
                let pdf = canonical_energy_pdf(&h, beta, &mc)?;
                emit(Some(path), energy_density_csv(&pdf).as_str())?;
            }
            report.ensemble = "canonical";
            report.beta = Some(beta);
            report.raw_density_matrix = Some((&est.raw).into());
            report.population_estimate = Some((&est.populations).into());
            report.mean_energy = Some((&est.energy).into());
            report.partition = Some((&est.partition).into());
            report.effective_sample_size = Some(est.effective_sample_size);
            report.monte_carlo = Some(settings);
            est.density
        }
        Ensemble::Microcanonical => {
            let e = a
                .energy
                .filter(|e| e.is_finite())
                .ok_or_else(|| usage("--energy is required for the microcanonical ensemble"))?;
            let est = microcanonical_dm(&h, e, &mc)?;
            report.ensemble = "microcanonical";
            report.energy = Some(e);
            report.raw_density_matrix = Some((&est.raw).into());
            report.population_estimate = Some((&est.populations).into());
            report.mean_energy = Some((&est.energy).into());
            report.shell_hits = Some(est.hits);
            report.monte_carlo = Some(settings);
            est.density
        }
    };
    report.density_matrix = rho.matrix().into();
    report.populations = rho.populations(spec)?;
    report.energy_expectation = rho.expectation(&h)?;

    let summary: Vec<String> = report.populations.iter().map(|p| g9(*p)).collect();
    eprintln!(
        "{} ensemble: populations [{}], energy {}",
        report.ensemble,
        summary.join(", "),
        g9(report.energy_expectation)
    );
    emit(a.out.as_deref(), &to_json(&report))
}

fn parse_state(text: &str, dim: usize) -> Result<PureState> {
    let amps = text
        .split_whitespace()
        .map(|tok| {
            let (re, im) = tok
                .split_once(',')
                .ok_or_else(|| usage(format!("--state: `{tok}` is not a `re,im` pair")))?;
            let p = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| usage(format!("--state: `{s}` is not a number")))
            };
            Ok(C64::new(p(re)?, p(im)?))
        })
        .collect::<Result<Vec<C64>>>()?;
    if amps.len() != dim {
        return Err(usage(format!(
            "--state has {} amplitudes but the Hamiltonian has dimension {dim}",
            amps.len()
        )));
    }
    Ok(PureState::new(amps)?)
}

fn initial_state(a: &DynamicsArgs, h: &HermitianObservable) -> Result<PureState> {
    if let Some(theta) = a.theta {
        if h.dim() != 2 {
            return Err(usage("--theta/--phi need a two-level Hamiltonian"));
        }
        let spec = h.spectrum();
        let sys = TwoLevelSystem::new(
            spec.eigenvalues()[0],
            spec.eigenvalues()[1],
            spec.eigenvector(1),
        )?;
        let coords =
            BlochCoords::new(theta, a.phi).map_err(|e| usage(format!("--theta/--phi: {e}")))?;
        return Ok(sys.state_at(coords));
    }
    if let Some(s) = &a.state {
        return parse_state(s, h.dim());
    }
    Ok(PureState::new(vec![C64::new(1.0, 0.0); h.dim()])?)
}

#[derive(Serialize)]
struct Coverage {
    statistic: &'static str,
    value: f64,
}

#[derive(Serialize)]
struct DynamicsReport {
    dim: usize,
    t: f64,
    dt: f64,
    steps: usize,
    max_energy_drift: f64,
    max_overlap_drift: f64,
    speed_residual: f64,
    path_length: f64,
    stationary: bool,
    final_mismatch: f64,
    phase_coverage: Coverage,
}

const SPEED_STEP: f64 = 1e-6;
const SPEED_PROBES: usize = 101;

fn speed_residual(h: &HermitianObservable, traj: &Trajectory) -> Result<f64> {
    let n = traj.len();
    let mut worst: f64 = 0.0;
    for j in 0..SPEED_PROBES.min(n) {
        let i = j * (n - 1) / (SPEED_PROBES.min(n) - 1).max(1);
        let x = &traj.states()[i];
        let y = evolve_exact(h, x, SPEED_STEP)?;
        let fd = fs_angle(x, &y)? / SPEED_STEP;
        worst = worst.max((fd - phase_speed(h, x)?).abs());
    }
    Ok(worst)
}

fn coverage(h: &HermitianObservable, traj: &Trajectory) -> Result<Coverage> {
    if h.dim() == 2 {
        let phases = traj
            .states()
            .iter()
            .map(|s| relative_phases(h, s).map(|p| p[0]))
            .collect::<qphase_core::Result<Vec<f64>>>()?;
        return Ok(Coverage {
            statistic: "max_circle_gap",
            value: max_circle_gap(&phases),
        });
    }
    let axes = (h.dim() - 1) as f64;
    let bins = ((1u64 << 20) as f64)
        .powf(1.0 / axes)
        .floor()
        .clamp(2.0, 32.0) as usize;
    Ok(Coverage {
        statistic: "torus_coverage",
        value: torus_coverage(h, traj, bins)?,
    })
}

fn dynamics(a: &DynamicsArgs) -> Result<()> {
    let h = load(&a.source)?;
    positive("t", a.t)?;
    positive("dt", a.dt)?;
    if a.every == 0 {
        return Err(usage("--every must be at least 1"));
    }
    let x0 = initial_state(a, &h)?;
    let traj = evolve_numeric(&h, &x0, a.t, a.dt)?;

    let dim = h.dim();
    let mut header: Vec<String> = vec!["t".into()];
    for k in 0..dim {
        header.push(format!("re{k}"));
        header.push(format!("im{k}"));
    }
    header.push("energy".into());
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut csv = Csv::new(&header_refs);
    let n = traj.len();
    let mut row = Vec::with_capacity(2 * dim + 2);
    for (i, (t, s)) in traj.times().iter().zip(traj.states()).enumerate() {
        if i % a.every != 0 && i + 1 != n {
            continue;
        }
        row.clear();
        row.push(*t);
        for z in s.amplitudes() {
            row.push(z.re);
            row.push(z.im);
        }
        row.push(qphase_core::expectation(&h, s)?);
        csv.row(&row);
    }
    emit(a.out.as_deref(), csv.as_str())?;

    let path_length: f64 = traj
        .states()
        .windows(2)
        .map(|w| fs_angle(&w[0], &w[1]))
        .sum::<qphase_core::Result<f64>>()?;
    let exact_final = evolve_exact(&h, &x0, a.t)?;
    let report = DynamicsReport {
        dim,
        t: a.t,
        dt: traj.times()[1] - traj.times()[0],
        steps: n - 1,
        max_energy_drift: energy_drift(&h, &traj)?,
        max_overlap_drift: overlap_invariants(&h, &traj)?.max_drift(),
        speed_residual: speed_residual(&h, &traj)?,
        path_length,
        stationary: path_length < 1e-9,
        final_mismatch: 1.0 - transition_probability(traj.last(), &exact_final)?,
        phase_coverage: coverage(&h, &traj)?,
    };
    match &a.report {
        Some(path) => emit(Some(path), &to_json(&report)),
        None => {
            let lines = [
                format!("steps: {}", report.steps),
                format!("max_energy_drift: {}", g9(report.max_energy_drift)),
                format!("max_overlap_drift: {}", g9(report.max_overlap_drift)),
                format!("speed_residual: {}", g9(report.speed_residual)),
                format!("path_length: {}", g9(report.path_length)),
                format!("stationary: {}", report.stationary),
                format!("final_mismatch: {}", g9(report.final_mismatch)),
                format!(
                    "{}: {}",
                    report.phase_coverage.statistic,
                    g9(report.phase_coverage.value)
                ),
            ];
            // The trajectory may own standard output.
            if a.out.is_some() {
                println!("{}", lines.join("\n"));
            } else {
                eprintln!("{}", lines.join("\n"));
            }
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct CheckRow {
    quantity: String,
    estimate: f64,
    std_error: f64,
    reference: f64,
    z: f64,
    pass: bool,
}

#[derive(Serialize)]
struct CheckReport {
    levels: Vec<f64>,
    beta: f64,
    samples: usize,
    seed: u64,
    chunks: usize,
    rows: Vec<CheckRow>,
    pass: bool,
}

const Z_LIMIT: f64 = 3.0;

fn crosscheck(a: &CrosscheckArgs) -> Result<()> {
    let h = parse_levels(&a.levels)?;
    let mc = mc_params(&a.mc)?;
    if !a.beta.is_finite() {
        return Err(usage("--beta must be finite"));
    }
    let levels = h.spectrum().eigenvalues().to_vec();
    // Closed forms first: they refuse degenerate spectra before any sampling.
    let moment = simplex_exp_moment(&levels, a.beta)?;
    let occupations = simplex_weighted_occupations(&levels, a.beta)?;
    let est = canonical_density_matrix(&h, a.beta, &mc)?;

    let mut rows = Vec::new();
    let mut push = |quantity: String, estimate: f64, std_error: f64, reference: f64| {
        let z = if std_error > 0.0 {
            (estimate - reference) / std_error
        } else if estimate == reference {
            0.0
        } else {
            f64::INFINITY
        };
        rows.push(CheckRow {
            quantity,
            estimate,
            std_error,
            reference,
            z,
            pass: z.abs() <= Z_LIMIT,
        });
    };
    push(
        "Z".into(),
        est.partition.value,
        est.partition.std_error,
        phase_space_volume(h.dim()) * moment,
    );
    for (k, &p) in occupations.iter().enumerate() {
        push(
            format!("rho_{k}{k}"),
            est.populations.value[k],
            est.populations.std_error[k],
            p,
        );
    }
    let energy = thermodynamics(
        &h,
        &[a.beta.abs().max(f64::MIN_POSITIVE)],
        ThermoSource::ClosedForm,
    )
    .ok()
    .filter(|_| a.beta > 0.0)
    .map(|r| r[0].energy)
    .unwrap_or_else(|| levels.iter().zip(&occupations).map(|(e, p)| e * p).sum());
    push("E".into(), est.energy.value, est.energy.std_error, energy);
    if h.dim() == 2 {
        let cf = TwoLevelSystem::standard(levels[0], levels[1])?.gamma_closed_forms(a.beta);
        for k in 0..2 {
            push(
                format!("two_level_rho_{k}{k}"),
                est.populations.value[k],
                est.populations.std_error[k],
                cf.populations[k],
            );
        }
    }

    let pass = rows.iter().all(|r| r.pass);
    let report = CheckReport {
        levels,
        beta: a.beta,
        samples: mc.samples,
        seed: mc.seed,
        chunks: mc.chunks,
        rows,
        pass,
    };
    let mut text = String::from("quantity,estimate,std_error,reference,z,result\n");
    for r in &report.rows {
        text.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.quantity,
            g9(r.estimate),
            g9(r.std_error),
            g9(r.reference),
            g9(r.z),
            if r.pass { "PASS" } else { "FAIL" }
        ));
    }
    match &a.out {
        Some(path) => emit(Some(path), &to_json(&report))?,
        None => emit(None, &text)?,
    }
    if !pass {
        return Err(CliError::CheckFailed(format!(
            "crosscheck failed: some |z| exceeds {Z_LIMIT}"
        )));
    }
    Ok(())
}
