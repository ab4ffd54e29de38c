//! Certified GF(2) rank of a single matrix in SMS coordinate format.
//!
//! ```console
//! $ cargo run --release --example rank_sms -- matrix.sms [seed]
//! ```
//!
//! Prints the certificate as JSON on stdout. The dense oracle handles small
//! inputs; anything past the default cap goes through the randomized
//! black-box path (seed defaults to 0).

use std::fs::File;
use std::io::BufReader;
use std::process::ExitCode;
use std::time::Instant;

use dessin_homology::gf2::SparseBoolMatrix;
use dessin_homology::wiedemann::rank_certified;

fn main() -> ExitCode {
    let mut args = std::env::args().skip(1);
    let Some(path) = args.next() else {
        eprintln!("usage: rank_sms <matrix.sms> [seed]");
        return ExitCode::FAILURE;
    };
    let seed: u64 = match args.next().map(|s| s.parse()).transpose() {
        Ok(seed) => seed.unwrap_or(0),
        Err(e) => {
            eprintln!("bad seed: {e}");
            return ExitCode::FAILURE;
        }
    };

    let file = match File::open(&path) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("{path}: {e}");
            return ExitCode::FAILURE;
        }
    };
    let matrix = match SparseBoolMatrix::read_sms(BufReader::new(file)) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("{path}: {e}");
            return ExitCode::FAILURE;
        }
    };
    eprintln!(
        "{path}: {} x {}, {} nonzeros",
        matrix.rows(),
        matrix.cols(),
        matrix.nnz()
    );

    let start = Instant::now();
    match rank_certified(&matrix, seed, 0.999, None) {
        Ok(certificate) => {
            eprintln!("certified in {:.1?}", start.elapsed());
            println!("{}", serde_json::to_string_pretty(&certificate).unwrap());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("rank failed: {e}");
            ExitCode::FAILURE
        }
    }
}
