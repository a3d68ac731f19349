use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Integrate the flow and write observables and final state.
    Evolve,
    /// Coefficient ladders and right-hand side of the flow at t = 0.
    Hierarchy,
    /// Run the invariant suite.
    Check,
    /// Two nearby solutions and their fitted Gronwall envelope.
    Closeness,
    /// Preservation of power-law asymptotics under window doubling.
    Asymptotics,
    /// Eigenvalues of the truncated Lax operator at t = 0 and t1.
    Spectrum,
    /// Spreading of compactly supported data in one step.
    Support,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

/// Ablowitz-Ladik hierarchy laboratory.
#[derive(Debug, Parser)]
#[command(name = "al", version)]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,

    /// JSON run configuration; flags override its fields.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Flow preset: al_system, dnls_1, dnls_2, schur.
    #[arg(long, value_name = "PRESET")]
    pub flow: Option<String>,

    /// Flow order (r_-, r_+), with --c-minus and --c-plus.
    #[arg(long, num_args = 2, value_names = ["R-", "R+"])]
    pub r: Option<Vec<usize>>,

    /// c_{0,+} .. c_{r+,+}, each RE or RE,IM.
    #[arg(long = "c-plus", num_args = 1.., action = clap::ArgAction::Append, value_name = "C")]
    pub c_plus: Vec<String>,

    /// c_{0,-} .. c_{r-,-}, each RE or RE,IM.
    #[arg(long = "c-minus", num_args = 1.., action = clap::ArgAction::Append, value_name = "C")]
    pub c_minus: Vec<String>,

    #[arg(long, num_args = 2, allow_negative_numbers = true, value_names = ["NMIN", "NMAX"])]
    pub window: Option<Vec<i64>>,

    /// pad_zero, periodic, frozen_edges or frozen_edges:BAND.
    #[arg(long, value_name = "MODE")]
    pub boundary: Option<String>,

    #[arg(long, allow_negative_numbers = true)]
    pub h: Option<f64>,

    #[arg(long, allow_negative_numbers = true)]
    pub t1: Option<f64>,

    /// Output directory (overrides AL_OUT_DIR and the config file).
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub format: Option<Format>,

    #[arg(long)]
    pub seed: Option<u64>,
}

/// Values after `--c-plus`/`--c-minus` may start with a minus sign (`-1,0.5`), which clap
/// would read as a flag. Such tokens are rewritten to the attached `--c-plus=VALUE` form.
pub fn attach_constant_values(args: impl IntoIterator<Item = String>) -> Vec<String> {
    let mut out = Vec::new();
    // (flag, whether a value has been attached yet)
    let mut current: Option<(String, bool)> = None;
    for a in args {
        if let Some((flag, attached)) = current.take() {
            if !a.starts_with("--") {
                out.push(format!("{flag}={a}"));
                current = Some((flag, true));
                continue;
            }
            if !attached {
                out.push(flag);
            }
        }
        if a == "--c-plus" || a == "--c-minus" {
            current = Some((a, false));
        } else {
            out.push(a);
        }
    }
    if let Some((flag, false)) = current {
        out.push(flag);
    }
    out
}
