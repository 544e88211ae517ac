//! Noise-free SPSA variants on a small Ising chain, driven through ask/tell.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qismet::ansatz::{AnsatzKind, AnsatzSpec};
use qismet::hamiltonian::{tfim_1d, Boundary};
use qismet::optimizer::{Spsa, SpsaConfig, Variant};

fn main() -> qismet::Result<()> {
    let h = tfim_1d(4, 1.0, 1.0, Boundary::Open)?;
    let e0 = h.exact_ground_energy()?;
    let ansatz = AnsatzSpec::new(AnsatzKind::Ra, 4, 3)?;
    println!("exact {e0:.6}");
    for variant in [Variant::Plain, Variant::Resampling, Variant::Blocking, Variant::SecondOrder] {
        let cfg = SpsaConfig { iterations: 300, variant, ..SpsaConfig::default() };
        let mut tuner = Spsa::new(cfg, vec![0.1; ansatz.param_count()], ChaCha8Rng::seed_from_u64(5))?;
        let mut evals = 0;
        while tuner.steps() < 300 {
            let e = h.expectation(&ansatz.prepare(tuner.ask())?)?;
            evals += 1;
            tuner.tell(e)?;
        }
        let e = h.expectation(&ansatz.prepare(tuner.theta())?)?;
        println!("{variant:<13} energy {e:.6} after {evals} evaluations");
    }
    Ok(())
}
