//! Exact ground energies of open and periodic Ising chains across the field.

use qismet::hamiltonian::{tfim_1d, Boundary};

fn main() -> qismet::Result<()> {
    println!("{:>5} {:>12} {:>12}", "h", "open", "periodic");
    for i in 0..=8 {
        let h = 0.25 * i as f64;
        let open = tfim_1d(8, 1.0, h, Boundary::Open)?.exact_ground_energy()?;
        let ring = tfim_1d(8, 1.0, h, Boundary::Periodic)?.exact_ground_energy()?;
        println!("{h:>5.2} {open:>12.6} {ring:>12.6}");
    }
    Ok(())
}
