//! Minimizes the Dirichlet energy of two-valued maps on the unit disk whose
//! boundary values are the two square roots of z, and compares the result
//! with the energy of sqrt(z) itself.
//!
//!     cargo run --release -p qv-core --example sqrt_disk -- [grid] [runs]

use std::time::Instant;

use qv_core::energy::{complex_sqrt_pair, discrete_energy, solve_dirichlet, BoundaryData, SolveOptions};

fn main() -> qv_core::Result<()> {
    let mut args = std::env::args().skip(1);
    let nodes: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(64);
    let restarts: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(3);

    let boundary = BoundaryData::circle(4096, complex_sqrt_pair)?;
    let grid = boundary.grid(nodes)?;
    let data = boundary.on_grid(&grid)?;

    let mut candidate = data.clone();
    for i in grid.interior_nodes().collect::<Vec<_>>() {
        let x = grid.coord(i);
        candidate.set(i, complex_sqrt_pair(x[0], x[1]))?;
    }
    let reference = discrete_energy(&candidate, 2.0)?.total;

    let t = Instant::now();
    let opts = SolveOptions {
        restarts,
        ..SolveOptions::default()
    };
    let sol = solve_dirichlet(&data, 2.0, &opts)?;
    println!(
        "grid {nodes}, {} active nodes, h = {:.5}",
        grid.active_nodes().count(),
        grid.h()
    );
    println!("sqrt(z) energy  {reference:.9}");
    println!("minimized       {:.9}  ({:.2?})", sol.report.total, t.elapsed());
    for (k, run) in sol.runs.iter().enumerate() {
        println!(
            "  run {k}: {:.9} after {} iterations, converged {}",
            run.energy, run.iterations, run.converged
        );
    }
    Ok(())
}
