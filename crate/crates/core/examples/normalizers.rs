//! The normalizing constants a_k: closed forms, quadrature and Monte Carlo.
use scaledim::{compute_normalizer, NormalizerMethod, NormalizerTable};

fn main() -> scaledim::Result<()> {
    let table = NormalizerTable::standard(10)?;
    println!("{:>3} {:>12} {:>12} {:>10}", "k", "a_k", "monte-carlo", "source");
    for (k, entry) in table.iter() {
        let mc = compute_normalizer(k, NormalizerMethod::MonteCarlo { samples: 200_000, seed: k as u64 })?;
        println!("{k:>3} {:>12.8} {mc:>12.6} {:>10}", entry.value, entry.provenance.as_str());
    }
    print!("\n{}", table.to_text());
    Ok(())
}
