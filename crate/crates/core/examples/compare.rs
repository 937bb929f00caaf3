//! Runs every method on the synthetic fixtures and prints PSNR, iterations
//! and the final primal residual.
//!
//! `cargo run --release --example compare -- [size] [fixtures] [seeds] [key=value ...]`
//!
//! Keys: rho, lr_iters, lr_tol, lambda_r, lambda_tv, lambda_l0, lambda_l0psi, start (warm|zero),
//! methods (comma list).
//!
//! Set `DEPTHFILL_DUMP=<dir>` to also write every result as PNG.

use std::time::Instant;

use depthfill::io::{write_image, ImageFormat};
use depthfill::mask::gen_random_mask;
use depthfill::metrics::{format_psnr, psnr_on_mask};
use depthfill::synthetic::depth_fixture;
use depthfill::lowrank::solve_lr;
use depthfill::{solve_from, AdmmStart, Method, SolverConfig};

fn main() -> depthfill::Result<()> {
    let raw: Vec<String> = std::env::args().skip(1).collect();
    let args: Vec<usize> = raw.iter().filter_map(|a| a.parse().ok()).collect();
    let mut base = SolverConfig::default();
    let mut methods = Method::ALL.to_vec();
    for kv in raw.iter().filter_map(|a| a.split_once('=')) {
        match kv {
            ("rho", v) => base.rho = v.parse().expect("rho"),
            ("lambda_r", v) => base.lambda_r = v.parse().expect("lambda_r"),
            ("lambda_tv", v) => base.lambda_tv = v.parse().expect("lambda_tv"),
            ("lambda_l0", v) => base.lambda_l0 = v.parse().expect("lambda_l0"),
            ("lambda_l0psi", v) => base.lambda_l0psi = v.parse().expect("lambda_l0psi"),
            ("lr_iters", v) => base.lr_max_iters = v.parse().expect("lr_iters"),
            ("lr_tol", v) => base.lr_rel_tol = v.parse().expect("lr_tol"),
            ("start", "zero") => base.admm_start = AdmmStart::Zero,
            ("start", _) => base.admm_start = AdmmStart::LowRankWarm,
            ("methods", v) => methods = v.split(',').map(|m| m.parse().expect("method")).collect(),
            (k, _) => panic!("unknown key {k}"),
        }
    }
    let size = args.first().copied().unwrap_or(128);
    let fixtures = args.get(1).copied().unwrap_or(5) as u64;
    let seeds = args.get(2).copied().unwrap_or(3) as u64;

    let dump = std::env::var_os("DEPTHFILL_DUMP").map(std::path::PathBuf::from);
    println!("fixture,seed,method,psnr,iters,rel_change,residual,secs");
    for f in 0..fixtures {
        let gt = depth_fixture(size, size, f)?;
        if let Some(dir) = &dump {
            write_image(&gt, dir.join(format!("f{f}_gt.png")), ImageFormat::Png)?;
        }
        for s in 0..seeds {
            let mask = gen_random_mask(size, size, 0.5, 1000 + s)?;
            let lr = solve_lr(&gt, &mask, &base)?;
            for &method in &methods {
                let cfg = SolverConfig { method, ..base.clone() };
                let t = Instant::now();
                let (out, state) = solve_from(&gt, &mask, &cfg, lr.clone())?;
                if let Some(dir) = &dump {
                    write_image(&out, dir.join(format!("f{f}_s{s}_{method}.png")), ImageFormat::Png)?;
                }
                println!(
                    "{f},{s},{method},{},{},{:.2e},{:.2e},{:.2}",
                    format_psnr(psnr_on_mask(&gt, &out, &mask)?),
                    if method == Method::Lr { state.objective_trace.len() } else { state.iter },
                    state.rel_change,
                    state.primal_residual(),
                    t.elapsed().as_secs_f64()
                );
            }
        }
    }
    Ok(())
}
