//! Subcommand bodies. Each one reads its inputs, calls the core library,
//! and writes outputs plus `<command>.manifest.json` into `--out`.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::BufRead;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use semshift_core::binarize::{binarize, BinaryLabels};
use semshift_core::contextual::{
    apd, apd_prt, jsd_score, prt, read_usage_matrix, write_usage_matrix, AffinityConfig, ContextualMetric,
    UsageMatrix,
};
use semshift_core::corpus::{read_conllu, read_gold, read_targets, ParseMode, TargetLexicon};
use semshift_core::evaluation::{average_correlation_matrices, method_correlation_matrix, EvaluationReport};
use semshift_core::profiling::{score_profiles, GrammaticalProfile, ProfileAccumulator, ProfileConfig, ProfileKind};
use semshift_core::scoring::{ensemble as ensemble_tables, ChangeScoreTable};
use semshift_core::static_embeddings::{procrustes_align, read_word2vec_text, AlignmentMode};
use semshift_core::{Diagnostics, Period, RunManifest};

use crate::files::{method_id, open, record_input, require_dir, require_file, CliError, OutDir, Result};
use crate::{
    ClassifyArgs, CorrelateArgs, EmbedArgs, EnsembleArgs, EvaluateArgs, ProfileArgs, StaticArgs, TaskArg,
};

fn manifest<A: serde::Serialize>(command: &str, args: &A) -> RunManifest {
    let mut m = RunManifest::new(command);
    m.config = serde_json::to_value(args).unwrap_or_default();
    m
}

fn target_lemmas(path: &Path) -> Result<Vec<String>> {
    let entries = read_targets(open(path)?).map_err(|e| CliError::runtime(path.display(), e))?;
    Ok(entries.into_iter().map(|e| e.lemma).collect())
}

fn read_scores(path: &Path) -> Result<ChangeScoreTable> {
    ChangeScoreTable::read_tsv(&method_id(path), open(path)?).map_err(|e| CliError::runtime(path.display(), e))
}

fn write_table(out: &OutDir, table: &ChangeScoreTable) -> Result<PathBuf> {
    out.write(&format!("{}.tsv", table.method_id), |w| table.write_tsv(w))
}

pub fn profile(a: &ProfileArgs) -> Result<()> {
    let inputs: Vec<&PathBuf> = a.corpus_t1.iter().chain(&a.corpus_t2).chain([&a.targets]).collect();
    for p in &inputs {
        require_file(p)?;
    }
    let out = OutDir::create(&a.out)?;
    let mut m = manifest("profile", a);
    let mut diag = Diagnostics::new();
    for p in inputs {
        record_input(&mut m, p)?;
    }

    let entries = read_targets(open(&a.targets)?).map_err(|e| CliError::runtime(a.targets.display(), e))?;
    let lexicon = TargetLexicon::new("und", entries, a.case_fold).map_err(|e| CliError::runtime(a.targets.display(), e))?;
    let mode = if a.strict { ParseMode::Strict } else { ParseMode::Lenient };

    let mut profiles: BTreeMap<Period, Vec<GrammaticalProfile>> = BTreeMap::new();
    for (period, paths) in [(Period::T1, &a.corpus_t1), (Period::T2, &a.corpus_t2)] {
        let mut acc: Vec<ProfileAccumulator> = lexicon.lemmas().map(|l| ProfileAccumulator::new(l, period)).collect();
        for path in paths {
            let file = fs::File::open(path).map_err(|e| CliError::runtime(path.display(), e))?;
            let mut reader = read_conllu(file, mode);
            for sentence in reader.by_ref() {
                let sentence = sentence.map_err(|e| CliError::runtime(path.display(), e))?;
                for t in &sentence.tokens {
                    if let Some(i) = lexicon.match_token(t) {
                        acc[i].add(t);
                    }
                }
            }
            reader.drain_warnings(&path.display().to_string(), &mut diag);
        }
        let done: Vec<GrammaticalProfile> = acc.into_iter().map(ProfileAccumulator::finish).collect();
        for p in done.iter().filter(|p| p.n_usages == 0) {
            diag.warn_lemma("profile", &p.lemma, format!("no usages in {period}; scores missing"));
        }
        profiles.insert(period, done);
    }

    let config = ProfileConfig {
        min_category_count: a.min_category_count,
    };
    let kinds: BTreeSet<ProfileKind> = a.kind.iter().map(|&k| k.into()).collect();
    for kind in kinds {
        let mut table = ChangeScoreTable::new(kind.method_id());
        for (p1, p2) in profiles[&Period::T1].iter().zip(&profiles[&Period::T2]) {
            let score = score_profiles(p1, p2, kind, &config).map_err(|e| CliError::runtime(&p1.lemma, e))?;
            if score.is_none() && p1.n_usages > 0 && p2.n_usages > 0 {
                diag.warn_lemma(
                    "profile",
                    &p1.lemma,
                    format!("{}: no category observed in both periods", kind.method_id()),
                );
            }
            table.insert(&p1.lemma, score);
        }
        write_table(&out, &table)?;
    }

    let mut usages = BTreeMap::new();
    for (period, ps) in &profiles {
        let docs: Vec<_> = ps.iter().map(GrammaticalProfile::to_document).collect();
        out.write_json(&format!("profiles.{}.json", period.dir_name()), &docs)?;
        for p in ps {
            usages.entry(p.lemma.clone()).or_insert_with(Vec::new).push(p.n_usages);
        }
    }
    m.results.insert("n_usages".into(), json!(usages));
    m.warnings = diag;
    out.write_manifest(m)?;
    Ok(())
}

fn umx_stems(dir: &Path) -> Result<BTreeSet<String>> {
    let mut out = BTreeSet::new();
    for entry in fs::read_dir(dir).map_err(|e| CliError::runtime(dir.display(), e))? {
        let path = entry.map_err(|e| CliError::runtime(dir.display(), e))?.path();
        if path.extension().is_some_and(|x| x == "umx") {
            if let Some(stem) = path.file_stem() {
                out.insert(stem.to_string_lossy().into_owned());
            }
        }
    }
    Ok(out)
}

fn load_usages(
    dir: &Path,
    lemma: &str,
    period: Period,
    m: &mut RunManifest,
    diag: &mut Diagnostics,
) -> Result<Option<UsageMatrix>> {
    let path = dir.join(format!("{lemma}.umx"));
    if !path.is_file() {
        diag.warn_lemma("embed", lemma, format!("no usage matrix in {}", dir.display()));
        return Ok(None);
    }
    record_input(m, &path)?;
    let u = read_usage_matrix(open(&path)?)
        .map_err(|e| CliError::runtime(path.display(), e))?
        .labelled(lemma, period);
    let meta = dir.join(format!("{lemma}.meta.jsonl"));
    if meta.is_file() {
        record_input(m, &meta)?;
        let rows = open(&meta)?
            .lines()
            .map_while(std::result::Result::ok)
            .filter(|l| !l.trim().is_empty())
            .count();
        if rows != u.rows() {
            diag.warn_lemma(
                "embed",
                lemma,
                format!("{} lists {rows} rows but the matrix has {}", meta.display(), u.rows()),
            );
        }
    }
    Ok(Some(u))
}

pub fn embed_score(a: &EmbedArgs) -> Result<()> {
    require_dir(&a.umx_t1)?;
    require_dir(&a.umx_t2)?;
    if let Some(t) = &a.targets {
        require_file(t)?;
    }
    if a.max_usages == Some(0) {
        return Err(CliError::Usage("--max-usages must be positive".into()));
    }
    let out = OutDir::create(&a.out)?;
    let mut m = manifest("embed-score", a);
    m.seed = Some(a.seed);
    let mut diag = Diagnostics::new();

    let lemmas: Vec<String> = match &a.targets {
        Some(t) => {
            record_input(&mut m, t)?;
            target_lemmas(t)?
        }
        None => {
            let mut s = umx_stems(&a.umx_t1)?;
            s.extend(umx_stems(&a.umx_t2)?);
            s.into_iter().collect()
        }
    };
    let metrics: BTreeSet<ContextualMetric> = a.metric.iter().map(|&x| x.into()).collect();
    let mut tables: BTreeMap<ContextualMetric, ChangeScoreTable> =
        metrics.iter().map(|&x| (x, ChangeScoreTable::new(x.method_id()))).collect();
    let ap = AffinityConfig {
        noise_seed: a.seed,
        ..AffinityConfig::default()
    };
    let mut clusterings = BTreeMap::new();

    for (i, lemma) in lemmas.iter().enumerate() {
        let u1 = load_usages(&a.umx_t1, lemma, Period::T1, &mut m, &mut diag)?;
        let u2 = load_usages(&a.umx_t2, lemma, Period::T2, &mut m, &mut diag)?;
        let (Some(mut u1), Some(mut u2)) = (u1, u2) else {
            for t in tables.values_mut() {
                t.insert(lemma, None);
            }
            continue;
        };
        if let Some(cap) = a.max_usages {
            // one independent stream per (target, period), so results do not
            // depend on which other targets are scored
            for (k, u) in [&mut u1, &mut u2].into_iter().enumerate() {
                if u.rows() > cap {
                    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
                    rng.set_stream((2 * i + k) as u64);
                    *u = u.subsample(cap, &mut rng);
                }
            }
        }
        for (&metric, table) in tables.iter_mut() {
            let score = match metric {
                ContextualMetric::Apd => apd(&u1, &u2),
                ContextualMetric::Prt => prt(&u1, &u2),
                ContextualMetric::ApdPrt => apd_prt(&u1, &u2),
                ContextualMetric::Jsd => jsd_score(&u1, &u2, &ap).map(|o| {
                    if !o.converged() {
                        diag.warn_lemma(
                            "jsd",
                            lemma,
                            format!("affinity propagation did not converge after {} iterations; single cluster used", o.clustering.iterations),
                        );
                    }
                    clusterings.insert(
                        lemma.clone(),
                        json!({
                            "clusters": o.clustering.n_clusters(),
                            "converged": o.converged(),
                            "iterations": o.clustering.iterations,
                            "t1": o.t1.probs,
                            "t2": o.t2.probs,
                        }),
                    );
                    o.score
                }),
            };
            let score = match score {
                Ok(s) => Some(s),
                Err(e) if e.is_missing_score() => {
                    diag.warn_lemma("embed", lemma, format!("{}: {e}", metric.method_id()));
                    None
                }
                Err(e) => return Err(CliError::Runtime(e.to_string())),
            };
            table.insert(lemma, score);
        }
    }
    for t in tables.values() {
        write_table(&out, t)?;
    }
    if !clusterings.is_empty() {
        m.results.insert("jsd".into(), json!(clusterings));
    }
    m.warnings = diag;
    out.write_manifest(m)?;
    Ok(())
}

pub fn static_score(a: &StaticArgs) -> Result<()> {
    for p in [&a.vec_t1, &a.vec_t2, &a.targets] {
        require_file(p)?;
    }
    let out = OutDir::create(&a.out)?;
    let mut m = manifest("static-score", a);
    let mut diag = Diagnostics::new();
    for p in [&a.vec_t1, &a.vec_t2, &a.targets] {
        record_input(&mut m, p)?;
    }
    let load = |p: &Path| read_word2vec_text(open(p)?).map_err(|e| CliError::runtime(p.display(), e));
    let x = load(&a.vec_t1)?;
    let y = load(&a.vec_t2)?;
    let al = procrustes_align(&x, &y, &mut diag).map_err(|e| CliError::runtime("alignment", e))?;

    let mode: AlignmentMode = a.mode.into();
    let mut table = ChangeScoreTable::new(mode.method_id());
    for lemma in target_lemmas(&a.targets)? {
        let s = al.score(&lemma);
        if s.is_none() {
            diag.warn_lemma("static", &lemma, "missing from at least one vector space");
        }
        table.insert(&lemma, s);
    }
    write_table(&out, &table)?;
    if a.dump_alignment {
        let d = al.q.nrows();
        let rows: Vec<Vec<f64>> = al.q.row_iter().map(|r| r.iter().copied().collect()).collect();
        let q = UsageMatrix::from_rows("alignment", Period::T1, d, &rows);
        out.write("alignment.umx", |w| write_usage_matrix(w, &q).map_err(std::io::Error::other))?;
    }
    m.results.insert("shared_vocabulary".into(), json!(al.shared.len()));
    m.results.insert("residual".into(), json!(al.residual(&al.q)));
    m.warnings = diag;
    out.write_manifest(m)?;
    Ok(())
}

pub fn ensemble(a: &EnsembleArgs) -> Result<()> {
    for p in &a.inputs {
        require_file(p)?;
    }
    let out = OutDir::create(&a.out)?;
    let mut m = manifest("ensemble", a);
    let mut diag = Diagnostics::new();
    for p in &a.inputs {
        record_input(&mut m, p)?;
    }
    let t1 = read_scores(&a.inputs[0])?;
    let t2 = read_scores(&a.inputs[1])?;
    let e = ensemble_tables(&t1, &t2, &mut diag).map_err(|e| CliError::Runtime(e.to_string()))?;
    write_table(&out, &e)?;
    m.results.insert("method_id".into(), json!(e.method_id));
    m.results.insert("dropped".into(), json!(e.missing().collect::<Vec<_>>()));
    m.warnings = diag;
    out.write_manifest(m)?;
    Ok(())
}

pub fn classify(a: &ClassifyArgs) -> Result<()> {
    require_file(&a.input)?;
    let out = OutDir::create(&a.out)?;
    let mut m = manifest("classify", a);
    let mut diag = Diagnostics::new();
    record_input(&mut m, &a.input)?;
    let t = read_scores(&a.input)?;
    for l in t.missing() {
        diag.warn_lemma("classify", l, "no score; left unlabelled");
    }
    let labels = binarize(&t).map_err(|e| CliError::runtime(a.input.display(), e))?;
    out.write(&format!("{}.labels.tsv", labels.method_id), |w| labels.write_tsv(w))?;
    m.results.insert("method_id".into(), json!(labels.method_id));
    m.results.insert("change_point_n".into(), json!(labels.change_point_n));
    m.warnings = diag;
    out.write_manifest(m)?;
    Ok(())
}

pub fn evaluate(a: &EvaluateArgs) -> Result<()> {
    require_file(&a.gold)?;
    for p in &a.pred {
        require_file(p)?;
    }
    if !(a.bin_fraction > 0.0 && a.bin_fraction <= 1.0) {
        return Err(CliError::Usage(format!("--bin-fraction {} outside (0, 1]", a.bin_fraction)));
    }
    let out = OutDir::create(&a.out)?;
    let mut m = manifest("evaluate", a);
    let mut diag = Diagnostics::new();
    record_input(&mut m, &a.gold)?;
    let gold = read_gold(open(&a.gold)?).map_err(|e| CliError::runtime(a.gold.display(), e))?;

    let mut reports = Vec::new();
    for p in &a.pred {
        record_input(&mut m, p)?;
        let report = match a.task {
            TaskArg::Rank => {
                let graded: BTreeMap<String, f64> =
                    gold.iter().filter_map(|(l, g)| g.graded.map(|v| (l.clone(), v))).collect();
                if graded.is_empty() {
                    return Err(CliError::runtime(a.gold.display(), "no graded gold scores"));
                }
                EvaluationReport::ranking(&read_scores(p)?, &graded, a.bin_fraction, &mut diag)
            }
            TaskArg::Class => {
                let binary: BTreeMap<String, u8> =
                    gold.iter().filter_map(|(l, g)| g.binary.map(|v| (l.clone(), v))).collect();
                if binary.is_empty() {
                    return Err(CliError::runtime(a.gold.display(), "no binary gold labels"));
                }
                let labels = BinaryLabels::read_tsv(&method_id(p), open(p)?)
                    .map_err(|e| CliError::runtime(p.display(), e))?;
                EvaluationReport::classification(&labels, &binary, &mut diag)
            }
        };
        reports.push(report.map_err(|e| CliError::runtime(p.display(), e))?);
    }
    let task = match a.task {
        TaskArg::Rank => "rank",
        TaskArg::Class => "class",
    };
    out.write_json(&format!("evaluation.{task}.json"), &reports)?;
    out.write(&format!("evaluation.{task}.tsv"), |w| EvaluationReport::write_tsv(&reports, w))?;
    m.warnings = diag;
    out.write_manifest(m)?;
    Ok(())
}

pub fn correlate(a: &CorrelateArgs) -> Result<()> {
    for p in &a.inputs {
        require_file(p)?;
    }
    let out = OutDir::create(&a.out)?;
    let mut m = manifest("correlate", a);
    let mut diag = Diagnostics::new();
    for p in &a.inputs {
        record_input(&mut m, p)?;
    }
    let mut groups: BTreeMap<PathBuf, Vec<ChangeScoreTable>> = BTreeMap::new();
    for p in &a.inputs {
        let key = if a.by_dataset {
            p.parent().map(Path::to_path_buf).unwrap_or_default()
        } else {
            PathBuf::new()
        };
        groups.entry(key).or_default().push(read_scores(p)?);
    }
    let mut matrices = Vec::new();
    for (dataset, tables) in groups.iter_mut() {
        tables.sort_by(|x, y| x.method_id.cmp(&y.method_id));
        if let Some(w) = tables.windows(2).find(|w| w[0].method_id == w[1].method_id) {
            return Err(CliError::Usage(format!(
                "method {} given twice for dataset {}",
                w[0].method_id,
                dataset.display()
            )));
        }
        let matrix = method_correlation_matrix(tables, &mut diag).map_err(|e| CliError::Usage(e.to_string()))?;
        if let Some(first) = matrices.first() {
            let first: &semshift_core::CorrelationMatrix = first;
            if first.methods != matrix.methods {
                return Err(CliError::Usage(format!(
                    "dataset {} has methods {:?}, expected {:?}",
                    dataset.display(),
                    matrix.methods,
                    first.methods
                )));
            }
        }
        matrices.push(matrix);
    }
    let avg = average_correlation_matrices(&matrices).expect("at least one dataset");
    out.write("correlation.tsv", |w| avg.write_tsv(w))?;
    out.write_json("correlation.json", &avg)?;
    if a.by_dataset {
        let per: BTreeMap<String, _> = groups
            .keys()
            .map(|k| k.display().to_string())
            .zip(matrices.iter())
            .collect();
        m.results.insert("per_dataset".into(), json!(per));
    }
    m.warnings = diag;
    out.write_manifest(m)?;
    Ok(())
}
