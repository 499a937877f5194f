use std::path::PathBuf;

use anyhow::Result;
use clap::Args;

use crate::csvfmt::f64_cell;
use crate::manifest::{write_manifest, Manifest};

use super::FamilyArg;

#[derive(Args)]
pub struct CritArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    alpha: f64,
    /// Family parameter delta (su-delta, rejection-curve)
    #[arg(long)]
    delta: Option<f64>,
    /// Rejection-curve slope parameter b
    #[arg(long)]
    b: Option<f64>,
    /// Output CSV path (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: CritArgs) -> Result<u8> {
    let spec = args.family.to_spec(args.alpha, args.delta, args.b);
    let schedule = spec.materialize(args.n)?;
    let mut csv = String::from("i,alpha_i\n");
    for (i, &a) in schedule.alphas().iter().enumerate() {
        csv.push_str(&format!("{},{}\n", i + 1, f64_cell(a)));
    }
    crate::emit(&csv, args.out.as_ref())?;
    if let Some(out) = &args.out {
        let mut argv = vec![
            "crit".to_string(),
            "--family".to_string(),
            args.family.flag_name().to_string(),
            "--n".to_string(),
            args.n.to_string(),
            "--alpha".to_string(),
            args.alpha.to_string(),
        ];
        if let Some(d) = args.delta {
            argv.extend(["--delta".to_string(), d.to_string()]);
        }
        if let Some(b) = args.b {
            argv.extend(["--b".to_string(), b.to_string()]);
        }
        argv.extend(["--out".to_string(), out.display().to_string()]);
        let manifest = Manifest::new("crit", argv, vec![out.display().to_string()]);
        write_manifest(out, &manifest)?;
    }
    Ok(0)
}
