use std::path::PathBuf;

use anyhow::Result;
use clap::Args;

use mtp_core::calibrate::{du_fdr_curve, solve_kappa, KappaSolution};

use crate::csvfmt::f64_cell;
use crate::manifest::{write_manifest, Manifest};

#[derive(Args)]
pub struct CalibrateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    alpha: f64,
    /// Tolerance on |worst-case FDR − alpha|
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    /// Result CSV path; the per-n1 FDR curve at kappa is written next to
    /// it as <stem>_curve.csv (stdout, result only, if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: CalibrateArgs) -> Result<u8> {
    let solution = solve_kappa(args.n, args.alpha, args.tol)?;
    let mut csv =
        String::from("status,kappa,worst_case_fdr,argmax_n1,iterations,bracket_width\n");
    let kappa = match &solution {
        KappaSolution::Converged(r) => {
            csv.push_str(&format!(
                "converged,{},{},{},{},{}\n",
                f64_cell(r.kappa),
                f64_cell(r.worst_case_fdr_at_kappa),
                r.argmax_n1,
                r.iterations,
                f64_cell(r.bracket_width)
            ));
            Some(r.kappa)
        }
        KappaSolution::Infeasible {
            worst_at_lo,
            worst_at_hi,
            detail,
        } => {
            eprintln!("calibrate: infeasible: {detail}");
            csv.push_str(&format!(
                "infeasible,nan,{},nan,0,nan\n",
                f64_cell(*worst_at_hi)
            ));
            eprintln!(
                "calibrate: worst-case FDR ranges over [{}, {}]",
                f64_cell(*worst_at_lo),
                f64_cell(*worst_at_hi)
            );
            None
        }
        KappaSolution::Bracket {
            lo,
            hi,
            worst_at_lo,
            worst_at_hi,
            iterations,
        } => {
            eprintln!(
                "calibrate: bracket [{lo}, {hi}] with worst-case FDR [{worst_at_lo}, {worst_at_hi}]"
            );
            csv.push_str(&format!(
                "bracket,{},{},nan,{},{}\n",
                f64_cell(0.5 * (lo + hi)),
                f64_cell(0.5 * (worst_at_lo + worst_at_hi)),
                iterations,
                f64_cell(hi - lo)
            ));
            None
        }
    };
    crate::emit(&csv, args.out.as_ref())?;
    if let Some(out) = &args.out {
        let mut outputs = vec![out.display().to_string()];
        if let Some(kappa) = kappa {
            let curve = du_fdr_curve(args.n, args.alpha, kappa)?;
            let mut curve_csv = String::from("n1,fdr_du\n");
            for (n1, fdr) in curve.iter().enumerate() {
                curve_csv.push_str(&format!("{n1},{}\n", f64_cell(*fdr)));
            }
            let curve_path = out.with_file_name(format!(
                "{}_curve.csv",
                out.file_stem().map(|s| s.to_string_lossy()).unwrap_or_default()
            ));
            std::fs::write(&curve_path, curve_csv)?;
            outputs.push(curve_path.display().to_string());
        }
        let argv = vec![
            "calibrate".to_string(),
            "--n".to_string(),
            args.n.to_string(),
            "--alpha".to_string(),
            args.alpha.to_string(),
            "--tol".to_string(),
            args.tol.to_string(),
            "--out".to_string(),
            out.display().to_string(),
        ];
        let manifest = Manifest::new("calibrate", argv, outputs);
        write_manifest(out, &manifest)?;
    }
    Ok(0)
}
