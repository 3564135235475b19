//! Per-option models under call-and-return execution, and the splitting each
//! option induces on its own policy's evaluation system.

use optsplit::bench::generators::{gen_four_rooms, HALLWAYS};
use optsplit::call_return::{option_models, splitting_identity};
use optsplit::{check_regular, iterate_splitting, SolveConfig};

fn main() -> optsplit::Result<()> {
    let (mdp, set) = gen_four_rooms(0.95)?;
    for (w, hallway) in set.options().iter().zip(HALLWAYS) {
        let models = option_models(&mdp, w)?;
        let split = splitting_identity(&mdp, w)?;
        let report = check_regular(&split)?;
        let run = iterate_splitting(&split, &models.r_w, &SolveConfig::default())?;
        // F_w 1 is the expected discount at termination.
        let reach = models.f_w.column_sum().max();
        println!(
            "to hallway {hallway:?}: regular {}, rho {:.4}, {} iterations, max E[gamma^T] {:.4}",
            report.is_regular, report.rho, run.iterations, reach
        );
    }
    Ok(())
}
