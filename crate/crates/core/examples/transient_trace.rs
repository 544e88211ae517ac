//! Generate a synthetic spike trace and summarize it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qismet::device::{gen_synthetic_trace, SpikeSign, SyntheticTraceParams};

fn main() -> qismet::Result<()> {
    let params = SyntheticTraceParams {
        base_sigma: 0.01,
        spike_prob: 0.05,
        spike_mag: 1.0,
        spike_sign: SpikeSign::Positive,
        length: 2000,
    };
    let trace = gen_synthetic_trace(&params, &mut ChaCha8Rng::seed_from_u64(1))?;
    let spikes: Vec<usize> = (0..trace.len()).filter(|&j| trace.offsets()[j] > 0.5).collect();
    println!("{} jobs, {} spikes", trace.len(), spikes.len());
    println!("first spikes at jobs {:?}", &spikes[..spikes.len().min(10)]);
    let path = std::env::temp_dir().join("qismet_trace.txt");
    trace.write(&path)?;
    println!("written to {}", path.display());
    Ok(())
}
