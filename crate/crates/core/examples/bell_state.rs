//! Prepare a Bell pair and read off Pauli expectations.

use qismet::statevector::{Circuit, Gate, PauliString};

fn main() -> qismet::Result<()> {
    let mut c = Circuit::new(2)?;
    c.push(Gate::h(0))?;
    c.push(Gate::cx(0, 1))?;
    let state = c.simulate();
    for (i, a) in state.amplitudes().iter().enumerate() {
        println!("|{i:02b}>  {:+.4} {:+.4}i", a.re, a.im);
    }
    for p in ["ZZ", "XX", "YY", "ZI", "XI"] {
        let p: PauliString = p.parse()?;
        println!("<{p}> = {:+.4}", state.expectation(&p)?);
    }
    Ok(())
}
