mod common;

use std::fs;
use std::path::Path;

use common::{s, semshift, semshift_ok};
use semshift_core::contextual::{write_usage_matrix, UsageMatrix};
use semshift_core::Period;

fn read(p: &Path) -> String {
    fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn manifest(p: &Path) -> serde_json::Value {
    serde_json::from_str(&read(p)).unwrap()
}

/// `lemma -> score` from a score TSV.
fn scores(p: &Path) -> Vec<(String, String)> {
    read(p)
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            (f[0].to_owned(), f[1].to_owned())
        })
        .collect()
}

fn score(p: &Path, lemma: &str) -> f64 {
    scores(p).into_iter().find(|(l, _)| l == lemma).unwrap().1.parse().unwrap()
}

fn verb(id: usize, form: &str, lemma: &str, tense: &str, rel: &str) -> String {
    format!("{id}\t{form}\t{lemma}\tVERB\t_\tTense={tense}\t0\t{rel}\t_\t_\n")
}

fn corpus(tense: &str) -> String {
    let mut s = String::new();
    for i in 0..4 {
        s += &format!("# sent_id = {i}\n");
        s += "1\tit\tit\tPRON\t_\tNumber=Sing\t2\tnsubj\t_\t_\n";
        s += &verb(2, "grew", "grow", tense, "root");
        s += &verb(3, "ran", "run", "Past", "conj");
        s += "\n";
    }
    s
}

#[test]
fn profile_tense_flip_and_identical_corpora() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("a.conllu"), corpus("Past")).unwrap();
    fs::write(d.join("b.conllu"), corpus("Pres")).unwrap();
    fs::write(d.join("targets.tsv"), "grow\nrun\nabsent\n").unwrap();

    let out = d.join("flip");
    semshift_ok(&[
        "profile", "--corpus-t1", s(&d.join("a.conllu")), "--corpus-t2", s(&d.join("b.conllu")),
        "--targets", s(&d.join("targets.tsv")), "--kind", "morph", "--kind", "synt,morphsynt", "--out", s(&out),
    ]);
    assert_eq!(score(&out.join("MORPH.tsv"), "grow"), 1.0);
    assert_eq!(score(&out.join("SYNT.tsv"), "grow"), 0.0);
    assert_eq!(score(&out.join("MORPHSYNT.tsv"), "grow"), 1.0);
    assert_eq!(score(&out.join("MORPH.tsv"), "run"), 0.0);
    assert!(scores(&out.join("MORPH.tsv")).contains(&("absent".into(), "NA".into())));
    let m = manifest(&out.join("profile.manifest.json"));
    assert_eq!(m["command"], "profile");
    assert_eq!(m["inputs"].as_object().unwrap().len(), 3);
    assert!(m["warnings"].as_array().unwrap().iter().any(|w| w["lemma"] == "absent"));
    let docs: serde_json::Value = serde_json::from_str(&read(&out.join("profiles.t2.json"))).unwrap();
    assert_eq!(docs[0]["lemma"], "grow");
    assert_eq!(docs[0]["morph"]["Tense"]["Pres"], 4);

    let same = d.join("same");
    semshift_ok(&[
        "profile", "--corpus-t1", s(&d.join("a.conllu")), "--corpus-t2", s(&d.join("a.conllu")),
        "--targets", s(&d.join("targets.tsv")), "--kind", "morphsynt", "--out", s(&same),
    ]);
    for (l, v) in scores(&same.join("MORPHSYNT.tsv")) {
        assert!(v == "0" || (l == "absent" && v == "NA"), "{l}: {v}");
    }
}

#[test]
fn usage_and_runtime_errors_have_distinct_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("a.conllu"), corpus("Past")).unwrap();
    let missing = semshift(&[
        "profile", "--corpus-t1", s(&d.join("a.conllu")), "--corpus-t2", s(&d.join("a.conllu")),
        "--targets", s(&d.join("nope.tsv")), "--kind", "morph", "--out", s(&d.join("o")),
    ]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("nope.tsv"));

    assert_eq!(semshift(&["profile", "--kind", "bogus"]).status.code(), Some(2));

    // malformed CoNLL-U in strict mode is a runtime failure
    fs::write(d.join("bad.conllu"), "1\tx\tx\tX\t_\t_\t0\troot\t_\n\n").unwrap();
    fs::write(d.join("t.tsv"), "x\n").unwrap();
    let bad = semshift(&[
        "profile", "--corpus-t1", s(&d.join("bad.conllu")), "--corpus-t2", s(&d.join("a.conllu")),
        "--targets", s(&d.join("t.tsv")), "--kind", "morph", "--strict", "--out", s(&d.join("o")),
    ]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("line 1"));
}

#[test]
fn lenient_parse_skips_are_recorded_in_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut text = corpus("Past");
    text += "1\tbroken\tline\n\n";
    fs::write(d.join("a.conllu"), text).unwrap();
    fs::write(d.join("t.tsv"), "grow\n").unwrap();
    let out = d.join("o");
    semshift_ok(&[
        "profile", "--corpus-t1", s(&d.join("a.conllu")), "--corpus-t2", s(&d.join("a.conllu")),
        "--targets", s(&d.join("t.tsv")), "--kind", "morph", "--out", s(&out),
    ]);
    let m = manifest(&out.join("profile.manifest.json"));
    let corpus_warnings = m["warnings"].as_array().unwrap().iter().filter(|w| w["stage"] == "corpus").count();
    assert_eq!(corpus_warnings, 2); // one per period
}

fn write_umx(dir: &Path, lemma: &str, rows: &[Vec<f64>]) {
    fs::create_dir_all(dir).unwrap();
    let m = UsageMatrix::from_rows(lemma, Period::T1, rows[0].len(), rows);
    write_usage_matrix(fs::File::create(dir.join(format!("{lemma}.umx"))).unwrap(), &m).unwrap();
}

#[test]
fn embed_score_examples() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (t1, t2) = (d.join("t1"), d.join("t2"));
    write_umx(&t1, "same", &[vec![1.0, 0.0], vec![0.3, 0.7]]);
    write_umx(&t2, "same", &[vec![1.0, 0.0], vec![0.3, 0.7]]);
    write_umx(&t1, "ortho", &[vec![1.0, 0.0]]);
    write_umx(&t2, "ortho", &[vec![0.0, 1.0]]);
    write_umx(&t1, "half", &[vec![1.0, 0.0], vec![0.0, 1.0]]);
    write_umx(&t2, "half", &[vec![1.0, 0.0]]);
    write_umx(&t1, "only1", &[vec![1.0, 0.0]]);
    fs::write(t1.join("half.meta.jsonl"), "{\"sentence_index\":0,\"token_index\":1}\n").unwrap();

    let out = d.join("o");
    semshift_ok(&[
        "embed-score", "--umx-t1", s(&t1), "--umx-t2", s(&t2), "--metric", "apd,prt,apd-prt,jsd", "--out", s(&out),
    ]);
    let apd = out.join("APD.tsv");
    // APD also averages cross-usage pairs, so identical sets are not at 0
    assert!(score(&apd, "same") > 0.0);
    assert_eq!(score(&out.join("PRT.tsv"), "same"), 0.0);
    assert_eq!(score(&apd, "ortho"), 1.0);
    assert_eq!(score(&apd, "half"), 0.5);
    assert_eq!(score(&out.join("PRT.tsv"), "ortho"), 1.0);
    assert_eq!(score(&out.join("JSD.tsv"), "same"), 0.0);
    assert!(out.join("APD-PRT.tsv").is_file());
    assert!(scores(&apd).contains(&("only1".into(), "NA".into())));
    let m = manifest(&out.join("embed-score.manifest.json"));
    assert_eq!(m["seed"], 0);
    let warnings = m["warnings"].as_array().unwrap();
    assert!(warnings.iter().any(|w| w["lemma"] == "only1"));
    // the sidecar lists one row for a two-row matrix
    assert!(warnings.iter().any(|w| w["lemma"] == "half"));
    assert!(m["results"]["jsd"]["same"]["converged"].as_bool().unwrap());
}

#[test]
fn embed_score_subsampling_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let rows: Vec<Vec<f64>> = (0..30).map(|i| vec![1.0, i as f64 / 10.0, (i % 7) as f64]).collect();
    let rows2: Vec<Vec<f64>> = rows.iter().map(|r| vec![r[2], r[0], r[1]]).collect();
    write_umx(&d.join("t1"), "w", &rows);
    write_umx(&d.join("t2"), "w", &rows2);
    let run = |seed: &str, out: &str| {
        semshift_ok(&[
            "embed-score", "--umx-t1", s(&d.join("t1")), "--umx-t2", s(&d.join("t2")), "--metric", "apd",
            "--max-usages", "5", "--seed", seed, "--out", s(&d.join(out)),
        ]);
        read(&d.join(out).join("APD.tsv"))
    };
    assert_eq!(run("1", "a"), run("1", "b"));
    assert_ne!(run("1", "a"), run("2", "c"));
}

#[test]
fn static_score_examples() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let x = "4 3\ncat 1 0 0\ndog 0 1 0\nfox 0.5 0.5 1\nowl -1 2 0.5\n";
    // rotation by 90° in the first two coordinates
    let y = "4 3\ncat 0 1 0\ndog -1 0 0\nfox -0.5 0.5 1\nowl -2 -1 0.5\n";
    fs::write(d.join("x.vec"), x).unwrap();
    fs::write(d.join("y.vec"), y).unwrap();
    fs::write(d.join("t.tsv"), "cat\nfox\nyak\n").unwrap();

    let out = d.join("same");
    semshift_ok(&["static-score", "--vec-t1", s(&d.join("x.vec")), "--vec-t2", s(&d.join("x.vec")), "--targets", s(&d.join("t.tsv")), "--out", s(&out)]);
    assert!(score(&out.join("SGNS-raw.tsv"), "cat").abs() < 1e-12);

    let out = d.join("rot");
    semshift_ok(&[
        "static-score", "--vec-t1", s(&d.join("x.vec")), "--vec-t2", s(&d.join("y.vec")), "--targets", s(&d.join("t.tsv")),
        "--mode", "lemma", "--dump-alignment", "--out", s(&out),
    ]);
    let t = out.join("SGNS-lemma.tsv");
    assert!(score(&t, "cat").abs() <= 1e-6);
    assert!(score(&t, "fox").abs() <= 1e-6);
    assert!(scores(&t).contains(&("yak".into(), "NA".into())));
    assert_eq!(fs::metadata(out.join("alignment.umx")).unwrap().len(), 12 + 9 * 4);
}

#[test]
fn ensemble_classify_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("ZERO.tsv"), "lemma\tscore\na\t0\nb\t0\nc\t0\n").unwrap();
    fs::write(d.join("PRT.tsv"), "lemma\tscore\na\t0.3\nb\t0.9\nc\tNA\n").unwrap();
    let out = d.join("o");
    semshift_ok(&["ensemble", "--in", s(&d.join("ZERO.tsv")), s(&d.join("PRT.tsv")), "--out", s(&out)]);
    let e = scores(&out.join("ZERO-PRT.tsv"));
    assert_eq!(e, vec![("a".into(), "0".into()), ("b".into(), "0".into()), ("c".into(), "NA".into())]);
    let m = manifest(&out.join("ensemble.manifest.json"));
    assert_eq!(m["results"]["dropped"], serde_json::json!(["c"]));

    let six = "lemma\tscore\nu\t10\nv\t9.5\nw\t9\nx\t1\ny\t0.9\nz\t0.8\n";
    fs::write(d.join("SIX.tsv"), six).unwrap();
    semshift_ok(&["classify", "--in", s(&d.join("SIX.tsv")), "--out", s(&out)]);
    let m = manifest(&out.join("classify.manifest.json"));
    assert_eq!(m["results"]["change_point_n"], 3);
    assert_eq!(read(&out.join("SIX.labels.tsv")), "lemma\tlabel\nu\t1\nv\t1\nw\t1\nx\t0\ny\t0\nz\t0\n");

    fs::write(d.join("gold.tsv"), "u\t10\t1\nv\t9.5\t1\nw\t9\t1\nx\t1\t0\ny\t0.9\t0\nz\t0.8\t0\n").unwrap();
    semshift_ok(&["evaluate", "--pred", s(&d.join("SIX.tsv")), "--gold", s(&d.join("gold.tsv")), "--task", "rank", "--out", s(&out)]);
    let r: serde_json::Value = serde_json::from_str(&read(&out.join("evaluation.rank.json"))).unwrap();
    assert_eq!(r[0]["spearman"], 1.0);
    assert_eq!(r[0]["fp"], serde_json::json!([]));
    semshift_ok(&["evaluate", "--pred", s(&out.join("SIX.labels.tsv")), "--gold", s(&d.join("gold.tsv")), "--task", "class", "--out", s(&out)]);
    let r: serde_json::Value = serde_json::from_str(&read(&out.join("evaluation.class.json"))).unwrap();
    assert_eq!(r[0]["accuracy"], 1.0);
    assert_eq!(r[0]["method_id"], "SIX");
    assert!(read(&out.join("evaluation.class.tsv")).starts_with("method\tspearman"));

    let bad = semshift(&["evaluate", "--pred", s(&d.join("SIX.tsv")), "--gold", s(&d.join("gold.tsv")), "--task", "rank", "--bin-fraction", "0", "--out", s(&out)]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn correlate_single_and_by_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for (ds, flip) in [("en", false), ("de", true)] {
        fs::create_dir_all(d.join(ds)).unwrap();
        fs::write(d.join(ds).join("A.tsv"), "a\t1\nb\t2\nc\t3\nd\t4\n").unwrap();
        let b = if flip { "a\t4\nb\t3\nc\t2\nd\t1\n" } else { "a\t1\nb\t2\nc\t3\nd\t4\n" };
        fs::write(d.join(ds).join("B.tsv"), b).unwrap();
        fs::write(d.join(ds).join("C.tsv"), "a\t1\nb\t3\nc\t2\nd\t4\n").unwrap();
    }
    let out = d.join("o");
    let en: Vec<String> = ["A", "B", "C"].iter().map(|m| s(&d.join("en").join(format!("{m}.tsv"))).to_owned()).collect();
    let mut args = vec!["correlate", "--out", s(&out), "--in"];
    args.extend(en.iter().map(String::as_str));
    semshift_ok(&args);
    let m: serde_json::Value = serde_json::from_str(&read(&out.join("correlation.json"))).unwrap();
    assert_eq!(m["methods"], serde_json::json!(["A", "B", "C"]));
    assert_eq!(m["rho"][0][1], 1.0);
    assert_eq!(m["rho"][2][2], 1.0);
    assert_eq!(m["rho"][0][2], m["rho"][2][0]);

    let all: Vec<String> = ["en", "de"]
        .iter()
        .flat_map(|ds| ["A", "B", "C"].map(|m| s(&d.join(ds).join(format!("{m}.tsv"))).to_owned()))
        .collect();
    let out2 = d.join("o2");
    let mut args = vec!["correlate", "--by-dataset", "--out", s(&out2), "--in"];
    args.extend(all.iter().map(String::as_str));
    semshift_ok(&args);
    let m: serde_json::Value = serde_json::from_str(&read(&out2.join("correlation.json"))).unwrap();
    assert_eq!(m["rho"][0][1], 0.0); // mean of 1 and -1
    let tsv = read(&out2.join("correlation.tsv"));
    assert!(tsv.starts_with("method\tA\tB\tC\nA\t1\t0\t"));
}

#[test]
fn profile_merges_several_files_per_period() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("a.conllu"), corpus("Past")).unwrap();
    fs::write(d.join("b.conllu"), corpus("Pres")).unwrap();
    fs::write(d.join("t.tsv"), "grow\n").unwrap();
    let out = d.join("o");
    semshift_ok(&[
        "profile", "--corpus-t1", s(&d.join("a.conllu")), s(&d.join("b.conllu")), "--corpus-t2", s(&d.join("b.conllu")),
        "--targets", s(&d.join("t.tsv")), "--kind", "morph", "--out", s(&out),
    ]);
    let docs: serde_json::Value = serde_json::from_str(&read(&out.join("profiles.t1.json"))).unwrap();
    assert_eq!(docs[0]["morph"]["Tense"], serde_json::json!({"Past": 4, "Pres": 4}));
    // cos((4,4),(0,4)) = 1/√2
    assert!((score(&out.join("MORPH.tsv"), "grow") - (1.0 - 0.5f64.sqrt())).abs() < 1e-12);
}
