//! Streaming CoNLL-U reader and writer.
//!
//! Only plain syntactic-word lines are kept. Multiword-token ranges (`1-2`)
//! and empty nodes (`1.1`) are skipped. The reader reuses one line buffer and
//! holds at most one sentence at a time.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{self, BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use super::CorpusError;
use crate::manifest::Diagnostics;

/// Morphological features of a token, keyed by category (`Tense`, `Number`, ...).
pub type Features = BTreeMap<String, String>;

const COLUMNS: usize = 10;
/// Skipped lines beyond this many are summarised rather than listed.
const MAX_REPORTED_SKIPS: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    /// Value of the ID column.
    pub id: usize,
    pub form: String,
    pub lemma: String,
    pub upos: String,
    pub xpos: String,
    pub feats: Features,
    pub head: Option<usize>,
    /// Relation to the syntactic head, or `_` when unannotated.
    pub deprel: String,
    pub deps: String,
    pub misc: String,
    pub sentence_index: usize,
    /// Position among the sentence's syntactic words, starting at 0.
    pub token_index: usize,
}

impl Token {
    /// Renders the token as one CoNLL-U line (without the newline).
    pub fn to_conllu_line(&self) -> String {
        let feats = if self.feats.is_empty() {
            "_".to_owned()
        } else {
            let mut s = String::new();
            for (i, (k, v)) in self.feats.iter().enumerate() {
                if i > 0 {
                    s.push('|');
                }
                let _ = write!(s, "{k}={v}");
            }
            s
        };
        let head = self.head.map_or_else(|| "_".to_owned(), |h| h.to_string());
        [
            self.id.to_string().as_str(),
            &self.form,
            &self.lemma,
            &self.upos,
            &self.xpos,
            &feats,
            &head,
            &self.deprel,
            &self.deps,
            &self.misc,
        ]
        .join("\t")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub index: usize,
    pub comments: Vec<String>,
    pub tokens: Vec<Token>,
}

/// What to do with a malformed token line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ParseMode {
    /// Abort on the first malformed line.
    Strict,
    /// Skip malformed lines and count them.
    #[default]
    Lenient,
}

enum LineKind {
    Word(Token),
    Skipped,
}

fn parse_feats(raw: &str, line: usize) -> Result<Features, CorpusError> {
    let mut feats = Features::new();
    if raw == "_" {
        return Ok(feats);
    }
    for pair in raw.split('|') {
        match pair.split_once('=') {
            Some((k, v)) if !k.is_empty() && !v.is_empty() => {
                feats.insert(k.to_owned(), v.to_owned());
            }
            _ => {
                return Err(CorpusError::Malformed {
                    line,
                    reason: format!("bad FEATS pair {pair:?}"),
                })
            }
        }
    }
    Ok(feats)
}

fn parse_line(
    text: &str,
    line: usize,
    sentence_index: usize,
    token_index: usize,
) -> Result<LineKind, CorpusError> {
    let cols: Vec<&str> = text.split('\t').collect();
    if cols.len() != COLUMNS {
        return Err(CorpusError::ColumnCount {
            line,
            found: cols.len(),
        });
    }
    let id = cols[0];
    if id.contains('-') || id.contains('.') {
        return Ok(LineKind::Skipped);
    }
    let id: usize = id.parse().map_err(|_| CorpusError::Malformed {
        line,
        reason: format!("bad ID {id:?}"),
    })?;
    let head = match cols[6] {
        "_" => None,
        h => Some(h.parse().map_err(|_| CorpusError::Malformed {
            line,
            reason: format!("bad HEAD {h:?}"),
        })?),
    };
    let deprel = cols[7];
    if deprel.is_empty() {
        return Err(CorpusError::Malformed {
            line,
            reason: "empty DEPREL".to_owned(),
        });
    }
    Ok(LineKind::Word(Token {
        id,
        form: cols[1].to_owned(),
        lemma: cols[2].to_owned(),
        upos: cols[3].to_owned(),
        xpos: cols[4].to_owned(),
        feats: parse_feats(cols[5], line)?,
        head,
        deprel: deprel.to_owned(),
        deps: cols[8].to_owned(),
        misc: cols[9].to_owned(),
        sentence_index,
        token_index,
    }))
}

/// Iterator over the sentences of a CoNLL-U stream.
pub struct ConlluReader<R> {
    reader: R,
    mode: ParseMode,
    buf: String,
    line_no: usize,
    next_sentence: usize,
    done: bool,
    skipped: Vec<(usize, String)>,
    skipped_count: usize,
}

impl<R: BufRead> ConlluReader<R> {
    pub fn new(reader: R, mode: ParseMode) -> Self {
        Self {
            reader,
            mode,
            buf: String::new(),
            line_no: 0,
            next_sentence: 0,
            done: false,
            skipped: Vec::new(),
            skipped_count: 0,
        }
    }

    /// Number of malformed lines skipped so far (lenient mode).
    pub fn skipped_lines(&self) -> usize {
        self.skipped_count
    }

    /// Capacity of the internal line buffer; bounded by the longest line.
    pub fn buffer_capacity(&self) -> usize {
        self.buf.capacity()
    }

    /// Moves the skip log into `diag`, one warning per skipped line.
    pub fn drain_warnings(&mut self, source: &str, diag: &mut Diagnostics) {
        for (line, reason) in self.skipped.drain(..) {
            diag.warn("corpus", format!("{source}:{line}: skipped malformed line ({reason})"));
        }
        if self.skipped_count > MAX_REPORTED_SKIPS {
            diag.warn(
                "corpus",
                format!(
                    "{source}: {} further malformed lines skipped",
                    self.skipped_count - MAX_REPORTED_SKIPS
                ),
            );
        }
        self.skipped_count = 0;
    }

    fn read_sentence(&mut self) -> Result<Option<Sentence>, CorpusError> {
        let mut comments = Vec::new();
        let mut tokens = Vec::new();
        let mut in_block = false;
        loop {
            self.buf.clear();
            let n = self.reader.read_line(&mut self.buf).map_err(|source| CorpusError::Io {
                line: self.line_no + 1,
                source,
            })?;
            if n == 0 {
                break;
            }
            self.line_no += 1;
            let text = self.buf.trim_end_matches(['\n', '\r']);
            if text.trim().is_empty() {
                if in_block {
                    if tokens.is_empty() {
                        // A block of comments or skipped lines only.
                        comments.clear();
                        in_block = false;
                        continue;
                    }
                    break;
                }
                continue;
            }
            in_block = true;
            if let Some(c) = text.strip_prefix('#') {
                comments.push(c.trim_start().to_owned());
                continue;
            }
            match parse_line(text, self.line_no, self.next_sentence, tokens.len()) {
                Ok(LineKind::Word(t)) => tokens.push(t),
                Ok(LineKind::Skipped) => {}
                Err(e) => match self.mode {
                    ParseMode::Strict => return Err(e),
                    ParseMode::Lenient => {
                        self.skipped_count += 1;
                        if self.skipped.len() < MAX_REPORTED_SKIPS {
                            self.skipped.push((self.line_no, e.to_string()));
                        }
                    }
                },
            }
        }
        if tokens.is_empty() {
            return Ok(None);
        }
        let s = Sentence {
            index: self.next_sentence,
            comments,
            tokens,
        };
        self.next_sentence += 1;
        Ok(Some(s))
    }
}

impl<R: BufRead> Iterator for ConlluReader<R> {
    type Item = Result<Sentence, CorpusError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        match self.read_sentence() {
            Ok(Some(s)) => Some(Ok(s)),
            Ok(None) => {
                self.done = true;
                None
            }
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}

/// Streams sentences from any byte source.
pub fn read_conllu<R: Read>(stream: R, mode: ParseMode) -> ConlluReader<BufReader<R>> {
    ConlluReader::new(BufReader::new(stream), mode)
}

/// Writes sentences in CoNLL-U, comments included.
pub fn write_conllu<'a, W, I>(mut out: W, sentences: I) -> io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a Sentence>,
{
    for s in sentences {
        for c in &s.comments {
            writeln!(out, "# {c}")?;
        }
        for t in &s.tokens {
            writeln!(out, "{}", t.to_conllu_line())?;
        }
        writeln!(out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse_all(text: &str, mode: ParseMode) -> Result<Vec<Sentence>, CorpusError> {
        read_conllu(text.as_bytes(), mode).collect()
    }

    const SAMPLE: &str = "# sent_id = 1\n\
# text = The trees grew.\n\
1\tThe\tthe\tDET\tDT\tDefinite=Def|PronType=Art\t2\tdet\t_\t_\n\
2\ttrees\ttree\tNOUN\tNNS\tNumber=Plur\t3\tnsubj\t_\t_\n\
3\tgrew\tgrow\tVERB\tVBD\tTense=Past|VerbForm=Fin\t0\troot\t_\tSpaceAfter=No\n\
4\t.\t.\tPUNCT\t.\t_\t3\tpunct\t_\t_\n\
\n\
1-2\tdon't\t_\t_\t_\t_\t_\t_\t_\t_\n\
1\tdo\tdo\tAUX\tVBP\tMood=Ind\t3\taux\t_\t_\n\
2\tn't\tnot\tPART\tRB\t_\t3\tadvmod\t_\t_\n\
2.1\tgo\tgo\tVERB\t_\t_\t_\t_\t0:root\t_\n\
3\tgo\tgo\tVERB\tVB\tVerbForm=Inf\t0\troot\t_\t_\n\
\n";

    #[test]
    fn parses_feats_and_skips_ranges() {
        let s = parse_all(SAMPLE, ParseMode::Strict).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].comments, vec!["sent_id = 1", "text = The trees grew."]);
        let grew = &s[0].tokens[2];
        assert_eq!(grew.feats.get("Tense").unwrap(), "Past");
        assert_eq!(grew.feats.get("VerbForm").unwrap(), "Fin");
        assert_eq!(grew.deprel, "root");
        assert_eq!(grew.head, Some(0));
        assert!(s[0].tokens[3].feats.is_empty());
        // range and empty node skipped
        assert_eq!(s[1].tokens.len(), 3);
        assert_eq!(s[1].tokens[2].form, "go");
        assert_eq!(s[1].tokens[2].token_index, 2);
        assert_eq!(s[1].tokens[2].sentence_index, 1);
    }

    #[test]
    fn nine_columns_is_an_error_with_line_number() {
        let text = "1\ta\ta\tX\t_\t_\t0\troot\t_\t_\n2\tb\tb\tX\t_\t_\t1\tdep\t_\n\n";
        let err = parse_all(text, ParseMode::Strict).unwrap_err();
        match err {
            CorpusError::ColumnCount { line, found } => {
                assert_eq!(line, 2);
                assert_eq!(found, 9);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn lenient_mode_skips_and_counts() {
        let text = "1\ta\ta\tX\t_\t_\t0\troot\t_\t_\n2\tb\tb\tX\t_\t_\t1\tdep\t_\n\n";
        let mut r = read_conllu(text.as_bytes(), ParseMode::Lenient);
        let s: Vec<_> = r.by_ref().collect::<Result<_, _>>().unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].tokens.len(), 1);
        assert_eq!(r.skipped_lines(), 1);
        let mut d = Diagnostics::new();
        r.drain_warnings("x.conllu", &mut d);
        assert_eq!(d.len(), 1);
        assert!(d.warnings()[0].message.contains("x.conllu:2"));
    }

    #[test]
    fn bad_feats_pair_rejected() {
        let text = "1\ta\ta\tX\t_\tTense\t0\troot\t_\t_\n\n";
        assert!(matches!(
            parse_all(text, ParseMode::Strict),
            Err(CorpusError::Malformed { line: 1, .. })
        ));
    }

    #[test]
    fn missing_trailing_blank_line_and_crlf() {
        let text = "1\ta\ta\tX\t_\t_\t0\troot\t_\t_\r\n2\tb\tb\tX\t_\t_\t1\tdep\t_\t_";
        let s = parse_all(text, ParseMode::Strict).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].tokens[1].misc, "_");
    }

    #[test]
    fn empty_input() {
        assert!(parse_all("", ParseMode::Strict).unwrap().is_empty());
        assert!(parse_all("\n\n# only a comment\n\n", ParseMode::Strict)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn write_then_read_is_identity() {
        let s = parse_all(SAMPLE, ParseMode::Strict).unwrap();
        let mut out = Vec::new();
        write_conllu(&mut out, &s).unwrap();
        let again = parse_all(std::str::from_utf8(&out).unwrap(), ParseMode::Strict).unwrap();
        let flat = |v: &[Sentence]| v.iter().flat_map(|s| s.tokens.clone()).collect::<Vec<_>>();
        assert_eq!(flat(&s), flat(&again));
    }
}
