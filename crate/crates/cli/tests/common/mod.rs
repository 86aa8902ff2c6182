//! Synthetic two-period fixture: CoNLL-U corpora, usage matrices, targets
//! and gold with a known degree of change per target.

#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semshift_core::contextual::{write_usage_matrix, UsageMatrix};
use semshift_core::Period;

pub const N_TARGETS: usize = 20;
pub const USAGES: usize = 50;
pub const DIM: usize = 16;
/// Positions of the engineered changed targets.
pub const CHANGED: [usize; 5] = [2, 6, 11, 15, 18];

pub struct Fixture {
    pub root: PathBuf,
    pub lemmas: Vec<String>,
    pub degrees: Vec<f64>,
}

impl Fixture {
    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn changed_lemmas(&self) -> Vec<String> {
        CHANGED.iter().map(|&i| self.lemmas[i].clone()).collect()
    }
}

fn degrees() -> Vec<f64> {
    let mut stable = (0..15).map(|k| 0.02 * k as f64);
    let mut changed = [0.8, 0.6, 1.0, 0.7, 0.9].into_iter();
    (0..N_TARGETS)
        .map(|i| {
            if CHANGED.contains(&i) {
                changed.next().unwrap()
            } else {
                stable.next().unwrap()
            }
        })
        .collect()
}

fn noise(rng: &mut ChaCha8Rng) -> f64 {
    (0..4).map(|_| rng.random_range(-0.5..0.5)).sum::<f64>()
}

fn sentence(id: &str, lemma: &str, past: bool, advcl: bool) -> String {
    let (form, tense) = if past { (format!("{lemma}ed"), "Past") } else { (format!("{lemma}s"), "Pres") };
    let rel = if advcl { "advcl" } else { "ccomp" };
    format!(
        "# sent_id = {id}\n\
         1\tShe\tshe\tPRON\t_\tCase=Nom|Number=Sing|Person=3\t2\tnsubj\t_\t_\n\
         2\tsaid\tsay\tVERB\t_\tMood=Ind|Tense=Past|VerbForm=Fin\t0\troot\t_\t_\n\
         3\tthey\tthey\tPRON\t_\tCase=Nom|Number=Plur|Person=3\t4\tnsubj\t_\t_\n\
         4\t{form}\t{lemma}\tVERB\t_\tMood=Ind|Tense={tense}|VerbForm=Fin\t2\t{rel}\t_\t_\n\
         5\tit\tit\tPRON\t_\tNumber=Sing|Person=3\t4\tobj\t_\t_\n\
         6\t.\t.\tPUNCT\t_\t_\t2\tpunct\t_\t_\n\n"
    )
}

fn flags(n: usize, fraction: f64) -> Vec<bool> {
    let k = (n as f64 * fraction).round() as usize;
    (0..n).map(|i| i < k).collect()
}

/// Writes the fixture under `root`:
/// `corpus.t1.conllu`, `corpus.t2.conllu`, `targets.tsv`, `gold.tsv`,
/// `umx/t1/*.umx`, `umx/t2/*.umx`.
pub fn write_fixture(root: &Path, seed: u64) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lemmas: Vec<String> = (0..N_TARGETS).map(|i| format!("verb{i:02}")).collect();
    let degrees = degrees();
    fs::create_dir_all(root.join("umx/t1")).unwrap();
    fs::create_dir_all(root.join("umx/t2")).unwrap();

    let mut targets = String::new();
    let mut gold = String::from("lemma\tgraded\tbinary\n");
    for (l, d) in lemmas.iter().zip(&degrees) {
        targets += &format!("{l}\tVERB\n");
        gold += &format!("{l}\t{d}\t{}\n", u8::from(*d >= 0.5));
    }
    fs::write(root.join("targets.tsv"), targets).unwrap();
    fs::write(root.join("gold.tsv"), gold).unwrap();

    for (pi, period) in Period::BOTH.into_iter().enumerate() {
        let mut sentences = Vec::new();
        for (i, lemma) in lemmas.iter().enumerate() {
            let d = if pi == 0 { 0.0 } else { degrees[i] };
            let mut past = flags(USAGES, 0.1 + 0.8 * d);
            let mut advcl = flags(USAGES, 0.2 + 0.6 * d);
            past.shuffle(&mut rng);
            advcl.shuffle(&mut rng);
            for u in 0..USAGES {
                sentences.push((lemma.as_str(), past[u], advcl[u]));
            }
        }
        sentences.shuffle(&mut rng);
        let mut text = String::new();
        for (k, (lemma, past, advcl)) in sentences.into_iter().enumerate() {
            text += &sentence(&format!("{}-{k:05}", period.dir_name()), lemma, past, advcl);
        }
        fs::write(root.join(format!("corpus.{}.conllu", period.dir_name())), text).unwrap();
    }

    for (i, lemma) in lemmas.iter().enumerate() {
        let base: Vec<f64> = (0..DIM).map(|_| noise(&mut rng)).collect();
        let mut other: Vec<f64> = (0..DIM).map(|_| noise(&mut rng)).collect();
        // Gram-Schmidt: unit base, unit direction orthogonal to it
        let nb = base.iter().map(|x| x * x).sum::<f64>().sqrt();
        let b: Vec<f64> = base.iter().map(|x| x / nb).collect();
        let proj: f64 = other.iter().zip(&b).map(|(x, y)| x * y).sum();
        other.iter_mut().zip(&b).for_each(|(x, y)| *x -= proj * y);
        let no = other.iter().map(|x| x * x).sum::<f64>().sqrt();
        let o: Vec<f64> = other.iter().map(|x| x / no).collect();

        for (pi, period) in Period::BOTH.into_iter().enumerate() {
            let theta = if pi == 0 { 0.0 } else { degrees[i] * std::f64::consts::FRAC_PI_2 };
            let centre: Vec<f64> = b.iter().zip(&o).map(|(x, y)| theta.cos() * x + theta.sin() * y).collect();
            let rows: Vec<Vec<f64>> = (0..USAGES)
                .map(|_| centre.iter().map(|c| c + 0.15 * noise(&mut rng)).collect())
                .collect();
            let m = UsageMatrix::from_rows(lemma, period, DIM, &rows);
            let path = root.join(format!("umx/{}/{lemma}.umx", period.dir_name()));
            write_usage_matrix(fs::File::create(path).unwrap(), &m).unwrap();
        }
    }
    Fixture {
        root: root.to_owned(),
        lemmas,
        degrees,
    }
}

pub fn semshift(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semshift"))
        .args(args)
        .env("SEMSHIFT_LOG", "error")
        .output()
        .expect("run semshift")
}

/// Runs and panics with stderr unless the exit status is 0.
pub fn semshift_ok(args: &[&str]) -> Output {
    let out = semshift(args);
    assert!(
        out.status.success(),
        "semshift {args:?} failed ({:?}): {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Runs the profile → embed-score → ensemble → classify → evaluate chain
/// into `out`.
pub fn run_pipeline(f: &Fixture, out: &Path) {
    let o = s(out);
    semshift_ok(&[
        "profile",
        "--corpus-t1", s(&f.path("corpus.t1.conllu")),
        "--corpus-t2", s(&f.path("corpus.t2.conllu")),
        "--targets", s(&f.path("targets.tsv")),
        "--kind", "morph,synt,morphsynt",
        "--out", o,
    ]);
    semshift_ok(&[
        "embed-score",
        "--umx-t1", s(&f.path("umx/t1")),
        "--umx-t2", s(&f.path("umx/t2")),
        "--metric", "prt,apd,jsd",
        "--max-usages", "40",
        "--seed", "7",
        "--out", o,
    ]);
    semshift_ok(&["ensemble", "--in", s(&out.join("PRT.tsv")), s(&out.join("MORPHSYNT.tsv")), "--out", o]);
    semshift_ok(&["classify", "--in", s(&out.join("PRT-MORPHSYNT.tsv")), "--out", o]);
    semshift_ok(&["evaluate", "--pred", s(&out.join("PRT-MORPHSYNT.tsv")), "--gold", s(&f.path("gold.tsv")), "--task", "rank", "--out", o]);
    semshift_ok(&["evaluate", "--pred", s(&out.join("PRT-MORPHSYNT.labels.tsv")), "--gold", s(&f.path("gold.tsv")), "--task", "class", "--out", o]);
}
