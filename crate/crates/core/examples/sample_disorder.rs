//! Samples a small-world environment, compares its edge density with the
//! delay kernel, and writes the edge list.
//!
//! `cargo run --release --example sample_disorder -- [n] [edges.csv]`

use std::fs::File;
use std::io::BufWriter;

use num_complex::Complex64;

use delaynet::disorder::{kernel_transform, sample_realization, write_edge_list, DisorderLaw};

fn main() -> delaynet::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(2000, |s| s.parse().expect("n"));
    let path = args.next();
    let (a, beta) = (2.5, 0.1);
    let law = DisorderLaw::small_world(a, beta, 1.3, -5.0)?;
    let real = sample_realization(&law, n, 1)?;

    let density = real.edge_count() as f64 / (n * (n - 1)) as f64;
    let k = kernel_transform(Complex64::new(beta, 0.0), a)?.re;
    println!("n={n}: edges {} (density {density:.4}, expected K(β) = {k:.4})", real.edge_count());
    println!("delays in [{:.3}, {:.3}]", real.tau_min(), real.tau_max());
    for (re, im) in [(0.0, 0.0), (0.1, 0.0), (0.1, 2.0), (-0.5, 10.0)] {
        let c = Complex64::new(re, im);
        println!("K({c}) = {:.6}", kernel_transform(c, a)?);
    }
    if let Some(path) = path {
        write_edge_list(&real, BufWriter::new(File::create(&path)?))?;
        println!("wrote {path}");
    }
    Ok(())
}
