use clap::{Parser, Subcommand};
use icta_cli::commands::{self, CalibrateInputs};
use icta_cli::config::{
    parse_freq_grid, parse_xi_grid, resolve_device, resolve_distribution, resolve_out_path,
};
use icta_cli::results::ResultsDocument;
use std::path::PathBuf;
use std::process::ExitCode;

/// Gain, bandwidth and noise analysis for DC-biased Josephson parametric
/// amplifiers: model prediction under bias noise, linewidth fitting and
/// readout-chain calibration.
#[derive(Parser)]
#[command(name = "icta", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Gain/bandwidth/noise-ratio tradeoff over a pump-strength grid.
    Predict {
        /// Device preset (sample_A, sample_B) or JSON parameter file.
        #[arg(long, default_value = "sample_A")]
        device: String,
        /// Bias distribution: a fit-result/distribution JSON file or one or
        /// more lorentzian:FWHM_MHZ[,CENTER_MHZ[,WEIGHT]] components.
        #[arg(long, required = true, num_args = 1..)]
        dist: Vec<String>,
        /// Pump-strength grid start:stop:n with values in [0, 1).
        #[arg(long, default_value = "0.3:0.995:30")]
        xi_grid: String,
        /// Monte-Carlo verification samples per grid point (0 disables).
        #[arg(long, default_value_t = 0)]
        mc_samples: usize,
        /// Seed for the Monte-Carlo verification.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output path (defaults to predict.json under $ICTA_OUT_DIR).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write one flat CSV per table.
        #[arg(long)]
        csv: bool,
    },
    /// Two-dimensional gain/noise map over pump strength and frequency.
    Sweep {
        #[arg(long, default_value = "sample_A")]
        device: String,
        #[arg(long, required = true, num_args = 1..)]
        dist: Vec<String>,
        #[arg(long, default_value = "0.5:0.99:8")]
        xi_grid: String,
        /// Input-frequency grid start:stop:n in MHz.
        #[arg(long, required = true)]
        freq_grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: bool,
    },
    /// Fit a measured linewidth scan (CSV with wj_mhz,psd columns) to a
    /// Lorentzian mixture.
    FitLinewidth {
        /// Input CSV path.
        input: PathBuf,
        /// Number of Lorentzian components.
        #[arg(long, default_value_t = 1)]
        components: usize,
        /// Bias impedance in ohms; enables effective-temperature output.
        #[arg(long)]
        impedance: Option<f64>,
        /// Constrain side peaks to mirror around the central one.
        #[arg(long)]
        symmetric: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: bool,
    },
    /// Full measurement calibration: Y-factor, line attenuation, device
    /// gain and quantum-limit-referred noise.
    Calibrate {
        /// Hot-load spectrum CSV (freq_mhz,value).
        #[arg(long)]
        hot: PathBuf,
        /// Cold-load spectrum CSV.
        #[arg(long)]
        cold: PathBuf,
        /// Switch-short reflection gain CSV.
        #[arg(long)]
        short: PathBuf,
        /// Probe gain CSV with the device on.
        #[arg(long)]
        gain_on: PathBuf,
        /// Probe gain CSV with the device off.
        #[arg(long)]
        gain_off: PathBuf,
        /// Noise spectrum CSV at the working point (no input signal).
        #[arg(long)]
        noise_on: PathBuf,
        /// Noise spectrum CSV in the superconducting (zero-bias) state.
        #[arg(long)]
        noise_sc: PathBuf,
        /// Hot-load temperature in mK.
        #[arg(long)]
        t_hot: f64,
        /// Cold-load temperature in mK.
        #[arg(long)]
        t_cold: f64,
        /// Allowed attenuation ripple across the band in dB.
        #[arg(long, default_value_t = 0.2)]
        max_ripple_db: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: bool,
    },
}

fn run(cli: Cli) -> icta_cli::Result<()> {
    let (doc, out_path, csv): (ResultsDocument, PathBuf, bool) = match cli.command {
        Command::Predict {
            device,
            dist,
            xi_grid,
            mc_samples,
            seed,
            out,
            csv,
        } => {
            let (params, echo) = resolve_device(&device)?;
            let dist_echo = resolve_distribution(&dist)?;
            let xis = parse_xi_grid(&xi_grid)?;
            let doc = commands::cmd_predict(&params, &echo, &dist_echo, &xis, mc_samples, seed)?;
            (doc, resolve_out_path(out, "predict.json"), csv)
        }
        Command::Sweep {
            device,
            dist,
            xi_grid,
            freq_grid,
            out,
            csv,
        } => {
            let (params, echo) = resolve_device(&device)?;
            let dist_echo = resolve_distribution(&dist)?;
            let xis = parse_xi_grid(&xi_grid)?;
            let freqs = parse_freq_grid(&freq_grid)?;
            let doc = commands::cmd_sweep(&params, &echo, &dist_echo, &xis, &freqs)?;
            (doc, resolve_out_path(out, "sweep.json"), csv)
        }
        Command::FitLinewidth {
            input,
            components,
            impedance,
            symmetric,
            out,
            csv,
        } => {
            let doc = commands::cmd_fit_linewidth(&input, components, impedance, symmetric)?;
            (doc, resolve_out_path(out, "fit-linewidth.json"), csv)
        }
        Command::Calibrate {
            hot,
            cold,
            short,
            gain_on,
            gain_off,
            noise_on,
            noise_sc,
            t_hot,
            t_cold,
            max_ripple_db,
            out,
            csv,
        } => {
            let doc = commands::cmd_calibrate(&CalibrateInputs {
                hot: &hot,
                cold: &cold,
                short: &short,
                gain_on: &gain_on,
                gain_off: &gain_off,
                noise_on: &noise_on,
                noise_sc: &noise_sc,
                t_hot_mk: t_hot,
                t_cold_mk: t_cold,
                max_ripple_db,
            })?;
            (doc, resolve_out_path(out, "calibrate.json"), csv)
        }
    };

    doc.write_json(&out_path)?;
    println!("wrote {}", out_path.display());
    if csv {
        for p in doc.write_csv_tables(&out_path)? {
            println!("wrote {}", p.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
