//! Seeded synthetic inputs for the kernel benchmarks.

use std::fmt::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use semshift_core::{read_word2vec_text, Period, UsageMatrix, VectorSpace};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `rows × dim` usage matrix with entries uniform in [-1, 1).
pub fn usage_matrix(rows: usize, dim: usize, period: Period, seed: u64) -> UsageMatrix {
    let mut r = rng(seed);
    let data: Vec<Vec<f64>> = (0..rows)
        .map(|_| (0..dim).map(|_| r.random_range(-1.0..1.0)).collect())
        .collect();
    UsageMatrix::from_rows("bench", period, dim, &data)
}

/// Flat row-major points drawn around `centers` well-separated blobs.
pub fn blobs(n: usize, dim: usize, centers: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    let c: Vec<Vec<f64>> = (0..centers)
        .map(|_| (0..dim).map(|_| r.random_range(-10.0..10.0)).collect())
        .collect();
    let mut out = Vec::with_capacity(n * dim);
    for i in 0..n {
        for x in &c[i % centers] {
            out.push(x + r.random_range(-0.5..0.5));
        }
    }
    out
}

/// CoNLL-U text of `sentences` five-token sentences over a small vocabulary.
pub fn conllu(sentences: usize, seed: u64) -> String {
    const LEMMAS: [&str; 6] = ["run", "grow", "see", "take", "make", "hold"];
    const RELS: [&str; 4] = ["obj", "nsubj", "advcl", "ccomp"];
    let mut r = rng(seed);
    let mut s = String::with_capacity(sentences * 200);
    for i in 0..sentences {
        writeln!(s, "# sent_id = {i}").unwrap();
        for t in 1..=5 {
            let lemma = LEMMAS[r.random_range(0..LEMMAS.len())];
            let tense = if r.random_bool(0.5) { "Past" } else { "Pres" };
            let rel = if t == 1 { "root" } else { RELS[r.random_range(0..RELS.len())] };
            let head = if t == 1 { 0 } else { 1 };
            writeln!(s, "{t}\t{lemma}\t{lemma}\tVERB\t_\tMood=Ind|Tense={tense}\t{head}\t{rel}\t_\t_").unwrap();
        }
        s.push('\n');
    }
    s
}

/// Two spaces over the same `vocab` words; the second is a coordinate
/// permutation of the first plus small noise.
pub fn vector_spaces(vocab: usize, dim: usize, seed: u64) -> (VectorSpace, VectorSpace) {
    let mut r = rng(seed);
    let (mut a, mut b) = (format!("{vocab} {dim}\n"), format!("{vocab} {dim}\n"));
    for w in 0..vocab {
        let v: Vec<f64> = (0..dim).map(|_| r.random_range(-1.0..1.0)).collect();
        write!(a, "w{w}").unwrap();
        write!(b, "w{w}").unwrap();
        for k in 0..dim {
            write!(a, " {}", v[k]).unwrap();
            write!(b, " {}", v[(k + 1) % dim] + r.random_range(-0.01..0.01)).unwrap();
        }
        a.push('\n');
        b.push('\n');
    }
    (
        read_word2vec_text(a.as_bytes()).expect("generated vectors"),
        read_word2vec_text(b.as_bytes()).expect("generated vectors"),
    )
}
