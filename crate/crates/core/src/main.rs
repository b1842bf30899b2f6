use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use tiesim::cli::{resolve, Cli};
use tiesim::output::{write_outputs, MANIFEST_FILE};
use tiesim::sim::{aggregate, run_sweep};

fn main() -> ExitCode {
    let cli = Cli::try_parse().unwrap_or_else(|e| e.exit());
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tiesim: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> tiesim::Result<()> {
    let inv = resolve(cli)?;
    let trials: usize = inv.configs.iter().map(|c| c.trials).sum();
    eprintln!(
        "running {} configuration(s), {trials} trial(s) in total",
        inv.configs.len()
    );
    let start = Instant::now();
    let runs = run_sweep(&inv.configs)?;
    let outcomes = aggregate(&inv.configs, runs)?;
    write_outputs(&outcomes, &inv.out_dir, inv.emit_svg)?;

    println!(
        "{:>4} {:>6} {:>4} {:>6} | {:>10} {:>9} {:>6} {:>6} | {:>10} {:>9} {:>6} {:>6}",
        "m", "eps", "k", "trials", "count peak", "at n", "pre", "post", "lcc peak", "at n", "pre",
        "post"
    );
    for o in &outcomes {
        let c = &o.config;
        let at = |i: usize| o.mean[i].n_nodes;
        let (sc, sl) = (&o.summary_count, &o.summary_lcc);
        println!(
            "{:>4} {:>6} {:>4} {:>6} | {:>10.1} {:>9} {:>+6.2} {:>+6.2} | {:>10.1} {:>9} {:>+6.2} {:>+6.2}",
            c.m,
            c.epsilon,
            c.k,
            c.trials,
            sc.peak_value,
            at(sc.peak_index),
            sc.pre_trend,
            sc.post_trend,
            sl.peak_value,
            at(sl.peak_index),
            sl.pre_trend,
            sl.post_trend
        );
    }
    eprintln!(
        "wrote {} in {:.1}s",
        inv.out_dir.join(MANIFEST_FILE).display(),
        start.elapsed().as_secs_f64()
    );
    Ok(())
}
