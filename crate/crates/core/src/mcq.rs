//! Multiple-choice questions: parsing, answer weighting, undecidability
//! detection, answer selection, and scoring.
//!
//! A question and its three candidate answers are bags of words compared in
//! the semantic space; the chosen answer is the one most similar to the
//! question, first index winning exact ties. Questions whose correct answer
//! is lexically indistinguishable from a wrong one (identical bags after
//! lemmatization, stop filtering, and vocabulary restriction) are hard
//! undecidable and leave the score denominator.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::space::{cosine, fold_in, SemanticSpace};
use crate::text::lemma::{TermId, TermMap};
use crate::text::tokenize_words;
use crate::vsm::{entropy_weight_of_profile, GlobalWeights};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ManualFlag {
    /// Topic absent from the corpora; rejected by the question author.
    OutOfSubject,
    /// Stem and answers are textually unrelated by design.
    Uncorrelated,
}

impl ManualFlag {
    pub fn as_str(&self) -> &'static str {
        match self {
            ManualFlag::OutOfSubject => "out_of_subject",
            ManualFlag::Uncorrelated => "uncorrelated",
        }
    }
}

impl fmt::Display for ManualFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct Question {
    pub id: String,
    pub stem: String,
    pub answers: [String; 3],
    /// 1-based index of the reference answer.
    pub correct_index: usize,
    pub manual_flags: BTreeSet<ManualFlag>,
}

/// Parses the line-oriented MCQ file format.
///
/// ```text
/// Q <id>
/// <stem, one or more lines>
/// A1 <answer text>
/// A2 <answer text>
/// A3 <answer text>
/// CORRECT <1|2|3>
/// FLAGS <out_of_subject|uncorrelated>[,...]   (optional)
/// ```
///
/// Blank lines separate questions; `#` lines between questions are comments.
pub fn parse_mcq(text: &str, path: &str) -> Result<Vec<Question>> {
    let lines: Vec<&str> = text.lines().collect();
    let mut questions: Vec<Question> = Vec::new();
    let mut seen_ids: HashSet<String> = HashSet::new();
    let mut i = 0;

    let directive = |line: &str| -> Option<&'static str> {
        let first = line.split_whitespace().next()?;
        ["Q", "A1", "A2", "A3", "CORRECT", "FLAGS"]
            .iter()
            .find(|&&d| d == first)
            .copied()
    };

    while i < lines.len() {
        let trimmed = lines[i].trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            i += 1;
            continue;
        }

        // header
        let header_no = i + 1;
        let rest = trimmed
            .strip_prefix('Q')
            .filter(|r| r.starts_with(char::is_whitespace))
            .ok_or_else(|| Error::parse(path, header_no, "expected `Q <id>`"))?;
        let id = rest.trim().to_string();
        if id.is_empty() || id.chars().any(char::is_whitespace) {
            return Err(Error::parse(path, header_no, "question id must be one token"));
        }
        if !seen_ids.insert(id.clone()) {
            return Err(Error::parse(
                path,
                header_no,
                format!("duplicate question id `{id}`"),
            ));
        }
        i += 1;

        // stem lines until A1
        let mut stem_lines: Vec<&str> = Vec::new();
        while i < lines.len() && !lines[i].trim().is_empty() {
            match directive(lines[i].trim()) {
                Some("A1") => break,
                Some(other) => {
                    return Err(Error::parse(
                        path,
                        i + 1,
                        format!("expected stem text or A1, found {other}"),
                    ));
                }
                None => {
                    stem_lines.push(lines[i].trim());
                    i += 1;
                }
            }
        }
        if stem_lines.is_empty() {
            return Err(Error::parse(path, header_no, format!("question {id}: missing stem")));
        }

        // exactly three answers, in order
        let mut answers: Vec<String> = Vec::new();
        for expected in ["A1", "A2", "A3"] {
            if i >= lines.len() || lines[i].trim().is_empty() {
                return Err(Error::parse(
                    path,
                    i.min(lines.len() - 1) + 1,
                    format!("question {id}: expected 3 answers, found {}", answers.len()),
                ));
            }
            let line = lines[i].trim();
            match directive(line) {
                Some(d) if d == expected => {
                    answers.push(line[expected.len()..].trim().to_string());
                    i += 1;
                }
                Some("CORRECT") => {
                    return Err(Error::parse(
                        path,
                        i + 1,
                        format!("question {id}: expected 3 answers, found {}", answers.len()),
                    ));
                }
                _ => {
                    return Err(Error::parse(
                        path,
                        i + 1,
                        format!("question {id}: expected {expected}"),
                    ));
                }
            }
        }

        // CORRECT
        if i >= lines.len()
            || lines[i].trim().is_empty()
            || directive(lines[i].trim()) != Some("CORRECT")
        {
            return Err(Error::parse(
                path,
                i.min(lines.len() - 1) + 1,
                format!("question {id}: missing CORRECT line"),
            ));
        }
        let value = lines[i].trim()["CORRECT".len()..].trim();
        let correct_index: usize = match value {
            "1" => 1,
            "2" => 2,
            "3" => 3,
            other => {
                return Err(Error::parse(
                    path,
                    i + 1,
                    format!("question {id}: CORRECT must be 1, 2 or 3, found `{other}`"),
                ));
            }
        };
        i += 1;

        // optional FLAGS
        let mut manual_flags = BTreeSet::new();
        if i < lines.len() && !lines[i].trim().is_empty() {
            let line = lines[i].trim();
            if directive(line) == Some("FLAGS") {
                for flag in line["FLAGS".len()..].trim().split(',') {
                    match flag.trim() {
                        "out_of_subject" => {
                            manual_flags.insert(ManualFlag::OutOfSubject);
                        }
                        "uncorrelated" => {
                            manual_flags.insert(ManualFlag::Uncorrelated);
                        }
                        other => {
                            return Err(Error::parse(
                                path,
                                i + 1,
                                format!("question {id}: unknown flag `{other}`"),
                            ));
                        }
                    }
                }
                i += 1;
            }
        }

        // block must end here
        if i < lines.len() && !lines[i].trim().is_empty() && directive(lines[i].trim()) != Some("Q")
        {
            return Err(Error::parse(
                path,
                i + 1,
                format!("question {id}: unexpected content after question"),
            ));
        }

        let answers: [String; 3] = answers.try_into().expect("three answers collected");
        questions.push(Question {
            id,
            stem: stem_lines.join("\n"),
            answers,
            correct_index,
            manual_flags,
        });
    }
    Ok(questions)
}

pub fn load_mcq(path: &Path) -> Result<Vec<Question>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    parse_mcq(&text, &path.display().to_string())
}

/// A term-frequency bag after lemmatization, stop filtering, and restriction
/// to the corpus vocabulary. Keyed by term representative.
pub type Bag = BTreeMap<String, u32>;

/// Builds the corpus-restricted bag of a text fragment.
pub fn restricted_bag(
    text: &str,
    vocabulary: &HashSet<String>,
    term_map: &TermMap,
    stop_terms: &HashSet<TermId>,
) -> Bag {
    let mut bag = Bag::new();
    for word in tokenize_words(text) {
        let Some(term) = term_map.term_of(&word) else {
            continue;
        };
        if stop_terms.contains(&term) {
            continue;
        }
        let rep = term_map.representative(term);
        if !vocabulary.contains(rep) {
            continue;
        }
        *bag.entry(rep.to_string()).or_insert(0) += 1;
    }
    bag
}

/// Entropy weights of answer terms over the three-answer micro-collection.
#[derive(Debug, Clone)]
pub struct AnswerWeights(BTreeMap<String, f64>);

impl AnswerWeights {
    pub fn get(&self, term: &str) -> f64 {
        self.0.get(term).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(t, &w)| (t.as_str(), w))
    }
}

/// Applies entropy global weighting to the three answers treated as one
/// three-document micro-collection: a term unique to one answer weighs 1, a
/// term spread evenly over all three weighs 0.
pub fn three_set_entropy(answer_bags: &[Bag; 3]) -> Result<AnswerWeights> {
    if answer_bags.iter().all(Bag::is_empty) {
        return Err(Error::NoCorpusTerms);
    }
    let terms: BTreeSet<&String> = answer_bags.iter().flat_map(|b| b.keys()).collect();
    let mut weights = BTreeMap::new();
    for term in terms {
        let profile: Vec<u32> = answer_bags
            .iter()
            .map(|b| b.get(term).copied().unwrap_or(0))
            .collect();
        let w = entropy_weight_of_profile(&profile)?;
        weights.insert(term.clone(), w);
    }
    Ok(AnswerWeights(weights))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Undecidability {
    Decidable,
    /// The correct answer and at least one incorrect answer share one bag.
    Hard,
    /// The two incorrect answers share one bag; the correct one stands apart.
    Soft,
}

fn classify_bags(bags: &[Bag; 3], correct_index: usize) -> Undecidability {
    let correct = correct_index - 1;
    let incorrect: Vec<usize> = (0..3).filter(|&i| i != correct).collect();
    if incorrect.iter().any(|&i| bags[i] == bags[correct]) {
        Undecidability::Hard
    } else if bags[incorrect[0]] == bags[incorrect[1]] {
        Undecidability::Soft
    } else {
        Undecidability::Decidable
    }
}

/// Compares the three answers' term multisets after lemmatization, stop
/// filtering, and restriction to `vocabulary`.
pub fn detect_undecidability(
    question: &Question,
    vocabulary: &HashSet<String>,
    term_map: &TermMap,
    stop_terms: &HashSet<TermId>,
) -> Undecidability {
    let bags = answer_bags(question, vocabulary, term_map, stop_terms);
    classify_bags(&bags, question.correct_index)
}

fn answer_bags(
    question: &Question,
    vocabulary: &HashSet<String>,
    term_map: &TermMap,
    stop_terms: &HashSet<TermId>,
) -> [Bag; 3] {
    [0, 1, 2].map(|i| restricted_bag(&question.answers[i], vocabulary, term_map, stop_terms))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictStatus {
    Answered,
    RejectedManual,
    HardUndecidable,
    SoftUndecidableAnswered,
}

impl VerdictStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            VerdictStatus::Answered => "answered",
            VerdictStatus::RejectedManual => "rejected_manual",
            VerdictStatus::HardUndecidable => "hard_undecidable",
            VerdictStatus::SoftUndecidableAnswered => "soft_undecidable_answered",
        }
    }
}

impl fmt::Display for VerdictStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of answering one question.
#[derive(Debug, Clone)]
pub struct Verdict {
    pub id: String,
    pub status: VerdictStatus,
    /// 1-based index of the most similar answer. Recorded even for hard
    /// undecidable questions (it is still logged), but never scored there.
    pub chosen_index: Option<usize>,
    pub correct_index: usize,
    /// Cosine per answer; NaN when no similarity was computed.
    pub cosines: [f64; 3],
    /// Vector angle per answer; NaN when no similarity was computed.
    pub angles: [f64; 3],
    /// Whether the chosen index equals the reference answer.
    pub is_correct: bool,
    pub note: Option<String>,
}

impl Verdict {
    /// Hard-undecidable and manually rejected questions leave the score.
    pub fn counts_in_score(&self) -> bool {
        matches!(
            self.status,
            VerdictStatus::Answered | VerdictStatus::SoftUndecidableAnswered
        )
    }

    fn excluded(id: &str, correct_index: usize, status: VerdictStatus, note: String) -> Verdict {
        Verdict {
            id: id.to_string(),
            status,
            chosen_index: None,
            correct_index,
            cosines: [f64::NAN; 3],
            angles: [f64::NAN; 3],
            is_correct: false,
            note: Some(note),
        }
    }
}

/// Shared state needed to answer questions against one semantic space.
pub struct AnswerContext<'a> {
    pub space: &'a SemanticSpace,
    /// Entropy weights of the corpus matrix rows; `None` when the space was
    /// built without a global weighting.
    pub corpus_weights: Option<&'a GlobalWeights>,
    pub term_map: &'a TermMap,
    pub stop_terms: &'a HashSet<TermId>,
    /// Corpus-attested term representatives (the space vocabulary).
    pub vocabulary: &'a HashSet<String>,
    /// Weight answer terms over the three-answer micro-collection instead of
    /// reusing the corpus global weight.
    pub three_set: bool,
}

impl<'a> AnswerContext<'a> {
    fn corpus_weight(&self, term: &str) -> f64 {
        match self.corpus_weights {
            Some(w) => self
                .space
                .row_of_term(term)
                .map(|row| w.get(row))
                .unwrap_or(0.0),
            None => 1.0,
        }
    }
}

/// Similarity assigned to an answer whose bag is empty after vocabulary
/// restriction: the minimum of the cosine range, so an empty answer can never
/// beat a non-empty one and two empty answers tie.
const EMPTY_ANSWER_SIMILARITY: f64 = -1.0;

/// Answers one question: folds the stem and the three answers into the space
/// and picks the answer with the highest cosine, lowest index on ties.
pub fn answer_question(question: &Question, ctx: &AnswerContext) -> Verdict {
    if !question.manual_flags.is_empty() {
        let flags: Vec<&str> = question.manual_flags.iter().map(|f| f.as_str()).collect();
        return Verdict::excluded(
            &question.id,
            question.correct_index,
            VerdictStatus::RejectedManual,
            format!("manually rejected: {}", flags.join(",")),
        );
    }

    let stem_bag = restricted_bag(&question.stem, ctx.vocabulary, ctx.term_map, ctx.stop_terms);
    let bags = answer_bags(question, ctx.vocabulary, ctx.term_map, ctx.stop_terms);
    let undecidability = classify_bags(&bags, question.correct_index);

    if stem_bag.is_empty() {
        return Verdict::excluded(
            &question.id,
            question.correct_index,
            VerdictStatus::HardUndecidable,
            "empty bag of words (question)".into(),
        );
    }
    if bags.iter().all(Bag::is_empty) {
        return Verdict::excluded(
            &question.id,
            question.correct_index,
            VerdictStatus::HardUndecidable,
            "empty bag of words (answers)".into(),
        );
    }

    // question vector: local log(1+f) times the corpus global weight
    let stem_weighted: BTreeMap<String, f64> = stem_bag
        .iter()
        .map(|(t, &f)| (t.clone(), (f as f64).ln_1p() * ctx.corpus_weight(t)))
        .collect();
    let folded_stem = fold_in(&stem_weighted, ctx.space);
    if folded_stem.is_empty() {
        return Verdict::excluded(
            &question.id,
            question.correct_index,
            VerdictStatus::HardUndecidable,
            "empty bag of words (question weights all zero)".into(),
        );
    }

    let three_set_weights = if ctx.three_set {
        Some(three_set_entropy(&bags).expect("some answer bag is non-empty"))
    } else {
        None
    };

    let mut cosines = [f64::NAN; 3];
    let mut angles = [f64::NAN; 3];
    for i in 0..3 {
        if bags[i].is_empty() {
            cosines[i] = EMPTY_ANSWER_SIMILARITY;
            angles[i] = std::f64::consts::PI;
            continue;
        }
        let weighted: BTreeMap<String, f64> = bags[i]
            .iter()
            .map(|(t, &f)| {
                let global = match &three_set_weights {
                    Some(w) => w.get(t),
                    None => ctx.corpus_weight(t),
                };
                (t.clone(), (f as f64).ln_1p() * global)
            })
            .collect();
        let folded = fold_in(&weighted, ctx.space);
        if folded.is_empty() {
            cosines[i] = EMPTY_ANSWER_SIMILARITY;
            angles[i] = std::f64::consts::PI;
        } else {
            let cos = cosine(&folded_stem, &folded).expect("both pseudo-documents non-empty");
            cosines[i] = cos;
            angles[i] = cos.acos();
        }
    }

    // strict comparison keeps the first index on exact ties
    let mut chosen = 0;
    for i in 1..3 {
        if cosines[i] > cosines[chosen] {
            chosen = i;
        }
    }
    let chosen_index = chosen + 1;

    let status = match undecidability {
        Undecidability::Hard => VerdictStatus::HardUndecidable,
        Undecidability::Soft => VerdictStatus::SoftUndecidableAnswered,
        Undecidability::Decidable => VerdictStatus::Answered,
    };
    let note = match undecidability {
        Undecidability::Hard => Some(hard_note(&bags, question.correct_index)),
        Undecidability::Soft => Some(soft_note(question.correct_index)),
        Undecidability::Decidable => None,
    };

    Verdict {
        id: question.id.clone(),
        status,
        chosen_index: Some(chosen_index),
        correct_index: question.correct_index,
        cosines,
        angles,
        is_correct: chosen_index == question.correct_index,
        note,
    }
}

fn hard_note(bags: &[Bag; 3], correct_index: usize) -> String {
    let correct = correct_index - 1;
    let mut pair: Vec<usize> = (0..3)
        .filter(|&i| i != correct && bags[i] == bags[correct])
        .collect();
    pair.push(correct);
    pair.sort_unstable();
    let indices: Vec<String> = pair.iter().map(|i| (i + 1).to_string()).collect();
    format!("{} hard undecidable for a bag of words", indices.join(", "))
}

fn soft_note(correct_index: usize) -> String {
    let incorrect: Vec<usize> = (0..3).filter(|&i| i + 1 != correct_index).collect();
    format!(
        "{}, {} soft undecidable for the bag of words",
        incorrect[0] + 1,
        incorrect[1] + 1
    )
}

/// Aggregate score of one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Score {
    pub correct: usize,
    /// Questions neither manually rejected nor hard undecidable.
    pub denominator: usize,
    /// Ids excluded from the denominator.
    pub excluded: Vec<String>,
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.correct, self.denominator)
    }
}

pub fn score(verdicts: &[Verdict]) -> Score {
    let mut correct = 0;
    let mut denominator = 0;
    let mut excluded = Vec::new();
    for v in verdicts {
        if v.counts_in_score() {
            denominator += 1;
            if v.is_correct {
                correct += 1;
            }
        } else {
            excluded.push(v.id.clone());
        }
    }
    Score {
        correct,
        denominator,
        excluded,
    }
}

/// Verdicts as CSV:
/// `id,status,chosen,correct_index,cos1,cos2,cos3,angle1,angle2,angle3,is_correct`.
/// Unavailable numeric fields render as `NaN`, an unset chosen index as an
/// empty field.
pub fn verdicts_to_csv(verdicts: &[Verdict]) -> String {
    let mut out = String::from(
        "id,status,chosen,correct_index,cos1,cos2,cos3,angle1,angle2,angle3,is_correct\n",
    );
    for v in verdicts {
        let chosen = v
            .chosen_index
            .map(|c| c.to_string())
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            v.id,
            v.status,
            chosen,
            v.correct_index,
            v.cosines[0],
            v.cosines[1],
            v.cosines[2],
            v.angles[0],
            v.angles[1],
            v.angles[2],
            v.is_correct
        ));
    }
    out
}

/// Re-renders `text` with every word whose term survives lemmatization, stop
/// filtering, and vocabulary restriction wrapped in brackets, keeping
/// punctuation and case. Mirrors the per-question log display.
pub fn bracket_text(
    text: &str,
    vocabulary: &HashSet<String>,
    term_map: &TermMap,
    stop_terms: &HashSet<TermId>,
) -> String {
    let mut out = String::with_capacity(text.len() + 16);
    let mut run = String::new();
    let flush = |run: &mut String, out: &mut String| {
        if run.is_empty() {
            return;
        }
        let word = run.to_lowercase();
        let in_vocab = term_map
            .term_of(&word)
            .filter(|t| !stop_terms.contains(t))
            .map(|t| vocabulary.contains(term_map.representative(t)))
            .unwrap_or(false);
        if in_vocab {
            out.push('[');
            out.push_str(run);
            out.push(']');
        } else {
            out.push_str(run);
        }
        run.clear();
    };
    for ch in text.chars() {
        if ch.is_alphabetic() {
            run.push(ch);
        } else {
            flush(&mut run, &mut out);
            out.push(ch);
        }
    }
    flush(&mut run, &mut out);
    out
}
