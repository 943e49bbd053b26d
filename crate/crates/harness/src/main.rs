use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use wpt_core::analysis::{cycle_metrics, linear_regression};
use wpt_core::circuit::{energy_audit, Simulator};
use wpt_core::magnetics::resonance_capacitance;

use wpt_harness::calibrate::{calibrate, CalibrationOptions, FreeParam};
use wpt_harness::config::{bundled, load_scenario};
use wpt_harness::dataset::table_i_dataset;
use wpt_harness::exposure::run_exposure;
use wpt_harness::scenario::Scenario;
use wpt_harness::sweep::{controller_for, run_sweep};
use wpt_harness::units::{parse_quantity, Dim};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "wptlink", version, about = "Resonant inductive link simulator")]
struct Cli {
    /// Scenario file, or the name of a bundled one (`default`, `table1`).
    #[arg(long, global = true, default_value = "default")]
    config: String,
    /// Directory for output files.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Series capacitance that tunes an inductance to a frequency.
    Resonance {
        #[arg(long, short = 'l')]
        inductance: String,
        #[arg(long, short = 'f', default_value = "127kHz")]
        frequency: String,
    },
    /// One closed-loop transient at a single spacing.
    Simulate {
        #[arg(long)]
        distance: Option<String>,
        #[arg(long, default_value = "4ms")]
        duration: String,
    },
    /// Closed-loop runs at every scenario distance.
    Sweep,
    /// Fit parasitics to the embedded measurements.
    Calibrate {
        /// Comma-separated subset of tx.esr, rx.esr, diode_vf, k_scale.
        #[arg(long, default_value = "k_scale,rx.esr")]
        free: String,
        #[arg(long, default_value_t = 60)]
        max_iters: u64,
    },
    /// Induced fields in the tissue phantom and the compliant coil current.
    Dosimetry,
    /// Least-squares line through efficiency versus distance.
    Regress {
        /// Sweep CSV to fit instead of the embedded measurements.
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

enum Failure {
    Config(String),
    Numerical(String),
}

impl From<wpt_core::Error> for Failure {
    fn from(e: wpt_core::Error) -> Self {
        use wpt_core::Error::*;
        match e {
            Instability { .. } | NotConverged { .. } => Failure::Numerical(e.to_string()),
            other => Failure::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Config(format!("i/o: {e}"))
    }
}

type Outcome = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("numerical failure: {m}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Resonance { inductance, frequency } => resonance(cli, inductance, frequency),
        Command::Regress { input } => regress(cli, input.as_deref()),
        Command::Simulate { distance, duration } => simulate(cli, &scenario(cli)?, distance.as_deref(), duration),
        Command::Sweep => sweep(cli, &scenario(cli)?),
        Command::Calibrate { free, max_iters } => calibrate_cmd(cli, &scenario(cli)?, free, *max_iters),
        Command::Dosimetry => dosimetry(cli, &scenario(cli)?),
    }
}

fn scenario(cli: &Cli) -> Result<Scenario, Failure> {
    let text = match bundled(&cli.config) {
        Some(t) => t.to_string(),
        None => fs::read_to_string(&cli.config).map_err(|e| Failure::Config(format!("{}: {e}", cli.config)))?,
    };
    load_scenario(&text).map_err(|e| Failure::Config(e.to_string()))
}

fn quantity(text: &str, dim: Dim) -> Result<f64, Failure> {
    parse_quantity(text, dim).map_err(Failure::Config)
}

fn create(cli: &Cli, name: &str) -> Result<BufWriter<File>, Failure> {
    fs::create_dir_all(&cli.out)?;
    Ok(BufWriter::new(File::create(cli.out.join(name))?))
}

fn emit_json(cli: &Cli, name: &str, value: &serde_json::Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("json values always serialize");
    println!("{text}");
    let mut f = create(cli, name)?;
    writeln!(f, "{text}")?;
    Ok(())
}

fn resonance(cli: &Cli, inductance: &str, frequency: &str) -> Outcome {
    let l = quantity(inductance, Dim::Inductance)?;
    let f = quantity(frequency, Dim::Frequency)?;
    let c = resonance_capacitance(l, f)?;
    match cli.format {
        Format::Json => println!("{}", json!({ "inductance_h": l, "frequency_hz": f, "capacitance_f": c })),
        Format::Csv => println!("C = {:.4} nF  (L = {} uH, f0 = {} kHz)", c * 1e9, l * 1e6, f * 1e-3),
    }
    Ok(true)
}

fn simulate(cli: &Cli, s: &Scenario, distance: Option<&str>, duration: &str) -> Outcome {
    let d = match distance {
        Some(text) => quantity(text, Dim::Length)?,
        None => *s.distances.first().ok_or_else(|| Failure::Config("scenario lists no distances".into()))?,
    };
    let duration = quantity(duration, Dim::Time)?;
    let mut circuit = s.circuit.clone();
    circuit.m = s.mutual_at(d)?;
    let ctrl = controller_for(s, &circuit)?;
    let mut sim = Simulator::new(circuit.clone(), ctrl, s.sim.dt, s.sim.dt_out)?;
    sim.advance(duration)?;
    let st = *sim.controller();
    let run = sim.into_run();
    let trace = &run.trace;
    let t_end = trace.end_time();
    let period = if st.locked_frequency().is_some() { st.period_estimate } else { 1.0 / s.controller.f_search };
    let cycles = (s.sim.window / period).floor().max(1.0);
    let start = t_end - cycles * period;
    let report = if start > trace.start_time() { Some(cycle_metrics(trace, start, t_end, period)?) } else { None };
    let audit = report.as_ref().and_then(|_| energy_audit(&circuit, trace, start, t_end).ok());

    trace.write_csv(create(cli, "trace.csv")?)?;
    let summary = json!({
        "distance_m": d,
        "k": circuit.coupling(),
        "mode": format!("{:?}", st.mode),
        "fault": run.fault.map(|f| f.as_str()),
        "lock_time_s": st.lock_time(),
        "f_lock_hz": st.locked_frequency(),
        "p_source_w": report.map(|r| r.p_source),
        "p_load_w": report.map(|r| r.p_load),
        "v_load_v": report.map(|r| r.v_load),
        "i_load_a": report.map(|r| r.i_load),
        "efficiency": report.map(|r| r.efficiency),
        "energy_residual": audit.map(|a| a.relative_residual),
    });
    match cli.format {
        Format::Json => emit_json(cli, "simulate.json", &summary)?,
        Format::Csv => {
            for (k, v) in summary.as_object().expect("summary is an object") {
                println!("{k} = {v}");
            }
        }
    }
    Ok(run.fault.is_none())
}

fn sweep(cli: &Cli, s: &Scenario) -> Outcome {
    let report = run_sweep(s);
    report.write_table_csv(create(cli, "sweep.csv")?)?;
    report.write_status_csv(create(cli, "sweep_status.csv")?)?;
    match cli.format {
        Format::Json => emit_json(cli, "sweep.json", &serde_json::to_value(&report).expect("report serializes"))?,
        Format::Csv => {
            report.write_table_csv(std::io::stdout().lock())?;
            for p in &report.points {
                println!("# {:.1} cm: {}{}", p.distance * 100.0, p.status.label(), if p.passes { " (pass)" } else { "" });
            }
            match report.max_passing_distance {
                Some(d) => println!("# requirement met up to {:.1} cm", d * 100.0),
                None => println!("# requirement not met at any distance"),
            }
        }
    }
    Ok(report.all_simulated_pass())
}

fn calibrate_cmd(cli: &Cli, s: &Scenario, free: &str, max_iters: u64) -> Outcome {
    let free = free
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| FreeParam::parse(p.trim()).ok_or_else(|| Failure::Config(format!("unknown free parameter `{}`", p.trim()))))
        .collect::<Result<Vec<_>, _>>()?;
    let opts = CalibrationOptions { max_iters, ..Default::default() };
    let cal = calibrate(s, &table_i_dataset(), &free, opts).map_err(|e| Failure::Config(e.to_string()))?;
    let mut f = create(cli, "calibrated.cfg")?;
    write!(f, "{}", cal.fragment())?;
    match cli.format {
        Format::Json => emit_json(cli, "calibration.json", &serde_json::to_value(&cal).expect("calibration serializes"))?,
        Format::Csv => {
            let mut w = create(cli, "calibration.csv")?;
            writeln!(w, "distance_cm,measured_pct,simulated_pct,k")?;
            for r in &cal.residuals {
                writeln!(w, "{},{},{:.4},{}", r.distance * 100.0, r.measured_pct, r.simulated_pct, r.coupling.unwrap_or(f64::NAN))?;
            }
            print!("{}", cal.fragment());
            println!("# iterations {}", cal.iterations);
        }
    }
    Ok(true)
}

fn dosimetry(cli: &Cli, s: &Scenario) -> Outcome {
    let (map, report) = run_exposure(s)?;
    map.write_csv(create(cli, "fieldmap.csv")?)?;
    match cli.format {
        Format::Json => emit_json(cli, "dosimetry.json", &serde_json::to_value(report).expect("report serializes"))?,
        Format::Csv => {
            println!("gap = {} mm, coil current = {} A peak at {} kHz", report.gap_m * 1e3, report.i_ref_a, report.frequency_hz * 1e-3);
            println!("E peak = {:.4} V/m", report.e_peak_vpm);
            println!("J peak = {:.4} A/m2", report.j_peak_apm2);
            println!("B peak = {:.4e} T", report.b_peak_t);
            println!("SAR 10g = {:.4e} W/kg", report.sar_10g_wpkg);
            println!("max compliant current = {:.3} A", report.max_compliant_current_a);
            println!("compliant at {} A: {}", report.operating_current_a, report.compliant);
            println!("note: {}", report.note);
        }
    }
    Ok(report.compliant)
}

fn read_sweep_csv(path: &Path) -> Result<Vec<(f64, f64)>, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or("").split(',').collect();
    let col = |name: &str| header.iter().position(|h| h.trim() == name);
    let (dc, ec) = col("distance_cm")
        .zip(col("efficiency_pct"))
        .ok_or_else(|| Failure::Config(format!("{}: needs distance_cm and efficiency_pct columns", path.display())))?;
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let f: Vec<&str> = l.split(',').collect();
            let get = |c: usize| f.get(c).and_then(|v| v.trim().parse::<f64>().ok());
            get(dc).zip(get(ec)).ok_or_else(|| Failure::Config(format!("{}: bad row {}", path.display(), i + 2)))
        })
        .collect()
}

fn regress(cli: &Cli, input: Option<&Path>) -> Outcome {
    let points = match input {
        Some(p) => read_sweep_csv(p)?,
        None => table_i_dataset().iter().map(|r| (r.distance * 100.0, r.efficiency * 100.0)).collect(),
    };
    let fit = linear_regression(&points)?;
    match cli.format {
        Format::Json => println!(
            "{}",
            json!({ "slope_pct_per_cm": fit.slope, "intercept_pct": fit.intercept, "r_squared": fit.r_squared, "points": points.len() })
        ),
        Format::Csv => {
            println!("slope_pct_per_cm,intercept_pct,r_squared");
            println!("{:.12},{:.12},{:.12}", fit.slope, fit.intercept, fit.r_squared);
        }
    }
    Ok(true)
}
