//! Prints a generated corpus in CoNLL format.
//!
//! `cargo run -p ner-core --example synthetic_corpus -- 500 1 > corpus.conll`

use ner_core::corpus::serialize_conll;
use ner_core::synthetic;

fn main() {
    let mut args = std::env::args().skip(1);
    let n = args.next().and_then(|a| a.parse().ok()).unwrap_or(500);
    let seed = args.next().and_then(|a| a.parse().ok()).unwrap_or(1);
    print!("{}", serialize_conll(&synthetic::generate(n, seed)));
}
