//! Command-line front end.

pub mod commands;
pub mod config;
pub mod output;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Result;
use crate::gas::GasState;
use crate::scheme::Mode;

pub use commands::{cmd_riemann, cmd_run, cmd_validate, RunOutcome, EXIT_AUDIT_FAILURE, RH_THRESHOLD};
pub use config::{Overrides, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "nozzle-lf", version, about = "Modified Lax-Friedrichs scheme for isentropic nozzle flow")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Modified,
    BaselineLf,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Modified => Mode::Modified,
            ModeArg::BaselineLf => Mode::BaselineLf,
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long, value_name = "N")]
    pub stride: Option<u64>,
    #[arg(long, value_name = "F")]
    pub dx: Option<f64>,
    #[arg(long = "t-final", value_name = "F")]
    pub t_final: Option<f64>,
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            out: self.out.clone(),
            mode: self.mode.map(Mode::from),
            stride: self.stride,
            dx: self.dx,
            t_final: self.t_final,
        }
    }

    fn load(&self) -> Result<RunConfig> {
        RunConfig::from_path(&self.config)?.apply(&self.overrides())
    }
}

/// `rho,v` pair.
fn parse_state(s: &str) -> std::result::Result<GasState, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [r, v] = parts[..] else {
        return Err(format!("expected RHO,V, got {s:?}"));
    };
    let r: f64 = r.parse().map_err(|e| format!("density {r:?}: {e}"))?;
    let v: f64 = v.parse().map_err(|e| format!("velocity {v:?}: {e}"))?;
    GasState::try_new(r, r * v).map_err(|e| e.to_string())
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the scheme and write snapshots, the energy series and an audit.
    Run(RunArgs),
    /// Solve one Riemann problem and print the sampled solution.
    Riemann {
        /// Left state as RHO,V.
        #[arg(long, value_parser = parse_state, allow_hyphen_values = true)]
        left: GasState,
        /// Right state as RHO,V.
        #[arg(long, value_parser = parse_state, allow_hyphen_values = true)]
        right: GasState,
        #[arg(long, default_value_t = 1.4)]
        gamma: f64,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 21)]
        samples: usize,
        #[arg(long = "x-min", default_value_t = -1.0, allow_hyphen_values = true)]
        x_min: f64,
        #[arg(long = "x-max", default_value_t = 1.0, allow_hyphen_values = true)]
        x_max: f64,
    },
    /// Check the nozzle admissibility condition for a configuration.
    Validate(RunArgs),
}

/// Runs a parsed command; the result is the process exit status.
pub fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    match cli.command {
        Command::Run(a) => Ok(cmd_run(&a.load()?, out)?.exit),
        Command::Riemann {
            left,
            right,
            gamma,
            t,
            samples,
            x_min,
            x_max,
        } => {
            cmd_riemann(left, right, gamma, t, samples, (x_min, x_max), out)?;
            Ok(0)
        }
        Command::Validate(a) => Ok(if cmd_validate(&a.load()?, out)? { 0 } else { 1 }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_parse() {
        let cli = Cli::try_parse_from([
            "nozzle-lf", "run", "--config", "a.toml", "--out", "o", "--mode", "baseline-lf", "--stride", "5",
            "--dx", "0.01", "--t-final", "0.3",
        ])
        .unwrap();
        let Command::Run(a) = cli.command else { panic!() };
        let o = a.overrides();
        assert_eq!(o.mode, Some(Mode::BaselineLf));
        assert_eq!((o.stride, o.dx, o.t_final), (Some(5), Some(0.01), Some(0.3)));

        let cli = Cli::try_parse_from(["nozzle-lf", "riemann", "--left", "1,-0.5", "--right", "0.5,0"]).unwrap();
        let Command::Riemann { left, .. } = cli.command else { panic!() };
        assert_eq!(left, GasState::from_velocity(1.0, -0.5));
        assert!(Cli::try_parse_from(["nozzle-lf", "riemann", "--left", "-1,0", "--right", "1,0"]).is_err());
    }
}
