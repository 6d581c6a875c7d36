//! Build a cooling schedule, restrict it to a window and print the per-step
//! drops in ln Z for a concrete histogram.

use gibbs_anneal::schedule::{build_schedule, truncate_schedule, ScheduleParameters};
use gibbs_anneal::{HamiltonianHistogram, InverseTemperature};

fn main() -> gibbs_anneal::Result<()> {
    let hist = HamiltonianHistogram::new(vec![1, 6, 15, 20, 15, 6, 1])?;
    let params = ScheduleParameters::new(hist.q(), hist.max_hamiltonian() as u64)?;
    let full = build_schedule(&params);
    println!("full schedule: {} temperatures (bound {:.0})", full.len(), params.length_bound());

    let window = truncate_schedule(&full, InverseTemperature::new(0.5)?, InverseTemperature::INFINITY)?;
    let betas = window.betas();
    for (pair, note) in betas.windows(2).zip(window.annotations()) {
        let drop = hist.log_z(pair[0])? - hist.log_z(pair[1])?;
        println!("{:>10} -> {:<10} drop {drop:.4}  {note:?}", pair[0].to_string(), pair[1].to_string());
    }
    Ok(())
}
