//! Parameter tuning: single runs, dimension scans, one-parameter-at-a-time
//! ablation, rule-of-thumb dimensionality estimates, and correlation of
//! answer angles with external choice frequencies.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::ops::RangeInclusive;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mcq::{answer_question, score, AnswerContext, Question, Score, Verdict, VerdictStatus};
use crate::space::{svd_full, SemanticSpace};
use crate::text::lemma::{
    build_term_map, joint_term_map, ExceptionSet, SuffixRule, TermId, TermMap,
};
use crate::text::tokenize_words;
use crate::text::StopList;
use crate::vsm::{
    count_matrix, entropy_weights, weight_matrix, Corpus, GlobalWeighting, GlobalWeights,
    TermDocMatrix, WeightedMatrix, WeightingConfig,
};

/// Everything a run consumes, already parsed.
#[derive(Debug, Clone)]
pub struct PipelineInputs {
    pub corpus: Corpus,
    pub questions: Vec<Question>,
    pub rules: Vec<SuffixRule>,
    pub exceptions: ExceptionSet,
    pub stop_words: StopList,
    pub min_stem: usize,
}

impl PipelineInputs {
    pub fn new(corpus: Corpus, questions: Vec<Question>) -> Self {
        PipelineInputs {
            corpus,
            questions,
            rules: Vec::new(),
            exceptions: ExceptionSet::new(),
            stop_words: StopList::empty(),
            min_stem: crate::text::DEFAULT_MIN_STEM,
        }
    }
}

/// Retained dimensionality of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truncation {
    Dim(usize),
    /// No reduction: keep the full numerical rank.
    Full,
}

impl fmt::Display for Truncation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Truncation::Dim(k) => write!(f, "k={k}"),
            Truncation::Full => f.write_str("full"),
        }
    }
}

/// The seven tunable parameters of a run: titles, document normalization,
/// joint lemmatization, frequency normalization, 3-set entropy weighting,
/// stop words, and the truncation dimensionality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub weighting: WeightingConfig,
    pub joint_lemmatization: bool,
    pub use_stoplist: bool,
    pub three_set: bool,
    pub truncation: Truncation,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            weighting: WeightingConfig::default(),
            joint_lemmatization: true,
            use_stoplist: true,
            three_set: true,
            truncation: Truncation::Full,
        }
    }
}

/// Artifacts shared by every dimensionality of one configuration.
pub struct BuiltPipeline {
    pub term_map: TermMap,
    pub stop_terms: HashSet<TermId>,
    pub matrix: TermDocMatrix,
    pub corpus_weights: Option<GlobalWeights>,
    pub weighted: WeightedMatrix,
    /// Decomposition at the full numerical rank; slice it per `k`.
    pub space: SemanticSpace,
    pub vocabulary: HashSet<String>,
}

fn mcq_vocabulary(questions: &[Question]) -> BTreeSet<String> {
    let mut vocab = BTreeSet::new();
    for q in questions {
        vocab.extend(tokenize_words(&q.stem));
        for a in &q.answers {
            vocab.extend(tokenize_words(a));
        }
    }
    vocab
}

/// Runs text and matrix stages and decomposes once at full rank.
pub fn build_pipeline(inputs: &PipelineInputs, config: &RunConfig) -> Result<BuiltPipeline> {
    let corpus_vocab = inputs.corpus.vocabulary(config.weighting.use_titles);

    let term_map = if config.joint_lemmatization {
        joint_term_map(
            &corpus_vocab,
            &mcq_vocabulary(&inputs.questions),
            &inputs.rules,
            &inputs.exceptions,
            inputs.min_stem,
        )
    } else {
        build_term_map(&corpus_vocab, &inputs.rules, &inputs.exceptions, inputs.min_stem)
    }
    .map_err(|e| e.at_stage("text"))?;

    let stoplist = if config.use_stoplist {
        inputs.stop_words.clone()
    } else {
        StopList::empty()
    };
    let stop_terms = stoplist.term_set(&term_map);

    let matrix = count_matrix(&inputs.corpus, &term_map, &stoplist, config.weighting.use_titles)
        .map_err(|e| e.at_stage("vsm"))?;
    let corpus_weights = match config.weighting.global {
        GlobalWeighting::Entropy => {
            Some(entropy_weights(&matrix).map_err(|e| e.at_stage("vsm"))?)
        }
        GlobalWeighting::None => None,
    };
    let weighted =
        weight_matrix(&matrix, &config.weighting).map_err(|e| e.at_stage("vsm"))?;
    let space = svd_full(&weighted).map_err(|e| e.at_stage("space"))?;
    let vocabulary: HashSet<String> = space.term_labels().iter().cloned().collect();

    Ok(BuiltPipeline {
        term_map,
        stop_terms,
        matrix,
        corpus_weights,
        weighted,
        space,
        vocabulary,
    })
}

impl BuiltPipeline {
    /// Answers every question against the rank-`k` slice of the space.
    pub fn answer_at(&self, k: usize, questions: &[Question], three_set: bool) -> Result<Vec<Verdict>> {
        let space = self.space.truncate(k).map_err(|e| e.at_stage("space"))?;
        let ctx = AnswerContext {
            space: &space,
            corpus_weights: self.corpus_weights.as_ref(),
            term_map: &self.term_map,
            stop_terms: &self.stop_terms,
            vocabulary: &self.vocabulary,
            three_set,
        };
        Ok(questions.iter().map(|q| answer_question(q, &ctx)).collect())
    }
}

/// Result of one full pipeline run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub score: Score,
    pub verdicts: Vec<Verdict>,
    /// Dimensionality actually used (after any clamping).
    pub k: usize,
    /// Numerical rank of the weighted matrix.
    pub rank: usize,
}

/// Executes text, matrix, space, and answering stages for one configuration.
pub fn run_once(inputs: &PipelineInputs, config: &RunConfig) -> Result<RunOutput> {
    let built = build_pipeline(inputs, config)?;
    let rank = built.space.rank();
    let k = match config.truncation {
        Truncation::Dim(k) => k.min(rank),
        Truncation::Full => rank,
    };
    let verdicts = built.answer_at(k, &inputs.questions, config.three_set)?;
    Ok(RunOutput {
        score: score(&verdicts),
        verdicts,
        k,
        rank,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DimScanEntry {
    pub k: usize,
    pub correct: usize,
}

/// Scores per retained dimensionality.
#[derive(Debug, Clone)]
pub struct DimScan {
    pub entries: Vec<DimScanEntry>,
    pub denominator: usize,
    /// Smallest dimensionality attaining the maximum score.
    pub best_k: usize,
    pub best_score: usize,
    pub rank: usize,
}

impl DimScan {
    /// Plot-ready CSV: `k,correct,denominator`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,correct,denominator\n");
        for e in &self.entries {
            out.push_str(&format!("{},{},{}\n", e.k, e.correct, self.denominator));
        }
        out
    }
}

/// Evaluates every `k` of `k_range` (whole rank interval when `None`) by
/// slicing one full-rank decomposition.
pub fn dimension_scan(
    inputs: &PipelineInputs,
    config: &RunConfig,
    k_range: Option<RangeInclusive<usize>>,
) -> Result<DimScan> {
    let built = build_pipeline(inputs, config)?;
    let rank = built.space.rank();
    let range = k_range.unwrap_or(1..=rank);
    let (lo, hi) = (*range.start(), *range.end());
    if lo == 0 {
        return Err(Error::BadDimension {
            k: 0,
            reason: "scan range must start at 1".into(),
        });
    }
    if lo > rank {
        return Err(Error::BadDimension {
            k: lo,
            reason: format!("scan range starts beyond the rank {rank}"),
        });
    }
    let hi = if hi > rank {
        log::warn!("scan upper bound {hi} exceeds the rank {rank}; clamped");
        rank
    } else {
        hi
    };

    let mut entries = Vec::with_capacity(hi - lo + 1);
    let mut denominator = 0;
    for k in lo..=hi {
        let verdicts = built.answer_at(k, &inputs.questions, config.three_set)?;
        let s = score(&verdicts);
        denominator = s.denominator;
        entries.push(DimScanEntry {
            k,
            correct: s.correct,
        });
    }
    // smallest k attaining the maximum
    let best = entries
        .iter()
        .max_by(|a, b| a.correct.cmp(&b.correct).then(b.k.cmp(&a.k)))
        .expect("scan range is non-empty");
    Ok(DimScan {
        best_k: best.k,
        best_score: best.correct,
        entries,
        denominator,
        rank,
    })
}

/// The seven parameters of the one-at-a-time ablation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AblationParameter {
    Titles,
    DocumentNormalization,
    JointLemmatization,
    FrequencyNormalization,
    ThreeSetWeighting,
    StopWords,
    LsaTruncation,
}

impl AblationParameter {
    pub const ALL: [AblationParameter; 7] = [
        AblationParameter::Titles,
        AblationParameter::DocumentNormalization,
        AblationParameter::JointLemmatization,
        AblationParameter::FrequencyNormalization,
        AblationParameter::ThreeSetWeighting,
        AblationParameter::StopWords,
        AblationParameter::LsaTruncation,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            AblationParameter::Titles => "titles",
            AblationParameter::DocumentNormalization => "document_normalization",
            AblationParameter::JointLemmatization => "joint_lemmatization",
            AblationParameter::FrequencyNormalization => "frequency_normalization",
            AblationParameter::ThreeSetWeighting => "three_set_weighting",
            AblationParameter::StopWords => "stop_words",
            AblationParameter::LsaTruncation => "lsa_truncation",
        }
    }
}

impl fmt::Display for AblationParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Flips one parameter away from its setting in `best`. The truncation flip
/// always means no reduction (full rank).
pub fn flip_parameter(best: &RunConfig, parameter: AblationParameter) -> RunConfig {
    let mut config = best.clone();
    match parameter {
        AblationParameter::Titles => {
            config.weighting.use_titles = !config.weighting.use_titles;
        }
        AblationParameter::DocumentNormalization => {
            config.weighting.document_normalization = !config.weighting.document_normalization;
        }
        AblationParameter::JointLemmatization => {
            config.joint_lemmatization = !config.joint_lemmatization;
        }
        AblationParameter::FrequencyNormalization => {
            config.weighting.frequency_normalization = !config.weighting.frequency_normalization;
        }
        AblationParameter::ThreeSetWeighting => {
            config.three_set = !config.three_set;
        }
        AblationParameter::StopWords => {
            config.use_stoplist = !config.use_stoplist;
        }
        AblationParameter::LsaTruncation => {
            config.truncation = Truncation::Full;
        }
    }
    config
}

fn setting_of(config: &RunConfig, parameter: AblationParameter) -> String {
    let on_off = |b: bool| if b { "on" } else { "off" }.to_string();
    match parameter {
        AblationParameter::Titles => on_off(config.weighting.use_titles),
        AblationParameter::DocumentNormalization => on_off(config.weighting.document_normalization),
        AblationParameter::JointLemmatization => on_off(config.joint_lemmatization),
        AblationParameter::FrequencyNormalization => {
            on_off(config.weighting.frequency_normalization)
        }
        AblationParameter::ThreeSetWeighting => on_off(config.three_set),
        AblationParameter::StopWords => on_off(config.use_stoplist),
        AblationParameter::LsaTruncation => config.truncation.to_string(),
    }
}

#[derive(Debug, Clone)]
pub struct AblationRow {
    pub parameter: AblationParameter,
    pub best_setting: String,
    pub ablated_setting: String,
    pub ablated_score: usize,
    pub ablated_denominator: usize,
    /// `(best - ablated) / best`, as a fraction.
    pub relative_contribution: f64,
    /// Questions that turned hard undecidable under the flip.
    pub newly_hard: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct AblationReport {
    pub best_score: usize,
    pub denominator: usize,
    pub rows: Vec<AblationRow>,
}

/// `(best - ablated) / best`; zero when the best score is zero.
pub fn relative_contribution(best: usize, ablated: usize) -> f64 {
    if best == 0 {
        return 0.0;
    }
    (best as f64 - ablated as f64) / best as f64
}

/// Rounds a fraction to tenths of a percent, half away from zero.
pub fn percent_tenths(fraction: f64) -> i64 {
    (fraction * 1000.0).round() as i64
}

/// Renders tenths of a percent with a decimal point or comma.
pub fn format_percent_tenths(tenths: i64, decimal_comma: bool) -> String {
    let sep = if decimal_comma { ',' } else { '.' };
    let sign = if tenths < 0 { "-" } else { "" };
    let a = tenths.abs();
    format!("{sign}{}{sep}{}%", a / 10, a % 10)
}

impl AblationReport {
    /// CSV mirroring the scores-and-contributions table layout, prefixed with
    /// an echo of the best configuration.
    pub fn to_csv(&self, best: &RunConfig, decimal_comma: bool) -> String {
        let mut out = String::new();
        let echo: Vec<String> = AblationParameter::ALL
            .iter()
            .map(|&p| format!("{}={}", p.as_str(), setting_of(best, p)))
            .collect();
        out.push_str(&format!("# best_config: {}\n", echo.join(" ")));
        out.push_str(&format!(
            "# best_score: {}/{}\n",
            self.best_score, self.denominator
        ));
        out.push_str(
            "parameter,best_setting,ablated_setting,correct,denominator,relative_contribution,newly_hard\n",
        );
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                row.parameter,
                row.best_setting,
                row.ablated_setting,
                row.ablated_score,
                row.ablated_denominator,
                format_percent_tenths(percent_tenths(row.relative_contribution), decimal_comma),
                row.newly_hard.join(";"),
            ));
        }
        out
    }
}

fn hard_ids(verdicts: &[Verdict]) -> BTreeSet<String> {
    verdicts
        .iter()
        .filter(|v| v.status == VerdictStatus::HardUndecidable)
        .map(|v| v.id.clone())
        .collect()
}

/// Re-runs the pipeline once per parameter, flipped away from `best`, and
/// reports each score with its relative contribution. Flips that create hard
/// undecidability list the affected question ids.
pub fn ablate(inputs: &PipelineInputs, best: &RunConfig) -> Result<AblationReport> {
    let base = run_once(inputs, best)?;
    let base_hard = hard_ids(&base.verdicts);
    let mut rows = Vec::with_capacity(AblationParameter::ALL.len());
    for parameter in AblationParameter::ALL {
        let flipped = flip_parameter(best, parameter);
        let out = run_once(inputs, &flipped)?;
        let newly_hard: Vec<String> = hard_ids(&out.verdicts)
            .difference(&base_hard)
            .cloned()
            .collect();
        rows.push(AblationRow {
            parameter,
            best_setting: setting_of(best, parameter),
            ablated_setting: setting_of(&flipped, parameter),
            ablated_score: out.score.correct,
            ablated_denominator: out.score.denominator,
            relative_contribution: relative_contribution(base.score.correct, out.score.correct),
            newly_hard,
        });
    }
    Ok(AblationReport {
        best_score: base.score.correct,
        denominator: base.score.denominator,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WildMode {
    /// Fraction of the term count.
    Terms,
    /// Fraction of `min(terms, documents)`.
    Min,
}

/// Default fraction of the dimensionality rule of thumb.
pub const WILD_FRACTION: f64 = 1.0 / 50.0;

/// Rule-of-thumb dimensionality: `floor(fraction * base)`, at least 1, where
/// `base` is the term count or `min(terms, documents)`.
pub fn wild_estimate(n_terms: usize, n_docs: usize, mode: WildMode, fraction: f64) -> usize {
    let base = match mode {
        WildMode::Terms => n_terms,
        WildMode::Min => n_terms.min(n_docs),
    };
    let estimate = (fraction * base as f64).floor() as usize;
    estimate.max(1)
}

/// Observed frequency of choice per (question id, 1-based answer index).
#[derive(Debug, Clone, Default)]
pub struct ChoiceFrequencies {
    by_answer: HashMap<(String, usize), f64>,
}

impl ChoiceFrequencies {
    pub fn get(&self, question: &str, answer: usize) -> Option<f64> {
        self.by_answer.get(&(question.to_string(), answer)).copied()
    }

    pub fn insert(&mut self, question: impl Into<String>, answer: usize, frequency: f64) {
        self.by_answer.insert((question.into(), answer), frequency);
    }

    pub fn len(&self) -> usize {
        self.by_answer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_answer.is_empty()
    }

    /// Parses CSV rows `question_id,answer_index,frequency`; a leading header
    /// row and `#` comments are accepted.
    pub fn parse(text: &str, path: &str) -> Result<ChoiceFrequencies> {
        let mut freqs = ChoiceFrequencies::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if idx == 0 && line.eq_ignore_ascii_case("question_id,answer_index,frequency") {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(Error::parse(
                    path,
                    idx + 1,
                    "expected `question_id,answer_index,frequency`",
                ));
            }
            let answer: usize = fields[1]
                .trim()
                .parse()
                .map_err(|_| Error::parse(path, idx + 1, "answer index must be 1, 2 or 3"))?;
            if !(1..=3).contains(&answer) {
                return Err(Error::parse(path, idx + 1, "answer index must be 1, 2 or 3"));
            }
            let frequency: f64 = fields[2]
                .trim()
                .parse()
                .map_err(|_| Error::parse(path, idx + 1, "frequency must be a number"))?;
            if !frequency.is_finite() {
                return Err(Error::parse(path, idx + 1, "frequency must be finite"));
            }
            freqs.insert(fields[0].trim(), answer, frequency);
        }
        Ok(freqs)
    }

    pub fn load(path: &Path) -> Result<ChoiceFrequencies> {
        let text =
            fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        ChoiceFrequencies::parse(&text, &path.display().to_string())
    }
}

/// Pearson correlation between the answer angles of scored questions and the
/// supplied choice frequencies. Every scored (question, answer) pair must
/// have a frequency.
pub fn correlate_with_choices(verdicts: &[Verdict], freqs: &ChoiceFrequencies) -> Result<f64> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for v in verdicts.iter().filter(|v| v.counts_in_score()) {
        for answer in 1..=3 {
            let frequency = freqs.get(&v.id, answer).ok_or(Error::MissingFrequency {
                question: v.id.clone(),
                answer,
            })?;
            xs.push(v.angles[answer - 1]);
            ys.push(frequency);
        }
    }
    pearson(&xs, &ys)
}

fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() < 2 {
        return Err(Error::ZeroVariance { side: "angle" });
    }
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mean_x, y - mean_y);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 {
        return Err(Error::ZeroVariance { side: "angle" });
    }
    if syy == 0.0 {
        return Err(Error::ZeroVariance { side: "frequency" });
    }
    Ok(sxy / (sxx * syy).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcq::parse_mcq;
    use crate::vsm::parse_corpus;

    fn fixture_inputs() -> PipelineInputs {
        // two blocks of vocabulary; each question's correct answer shares its
        // stem's block
        let corpus = parse_corpus(
            "air poumon sang côte respire\n\n\
             poumon air côte respire sang\n\n\
             air sang respire poumon\n\n\
             muscle énergie effort travail nutriment\n\n\
             effort muscle nutriment travail énergie\n\n\
             muscle travail énergie effort\n",
            "fixture",
        )
        .unwrap();
        let mcq = "\
Q 1
air poumon
A1 sang côte respire
A2 muscle effort
A3 énergie travail
CORRECT 1

Q 2
muscle énergie
A1 air côte
A2 effort travail nutriment
A3 sang poumon
CORRECT 2
";
        let questions = parse_mcq(mcq, "fixture.mcq").unwrap();
        PipelineInputs::new(corpus, questions)
    }

    #[test]
    fn run_once_scores_topic_fixture_perfectly_at_k2() {
        let inputs = fixture_inputs();
        let config = RunConfig {
            truncation: Truncation::Dim(2),
            ..RunConfig::default()
        };
        let out = run_once(&inputs, &config).unwrap();
        assert_eq!(out.k, 2);
        assert_eq!(out.score.correct, 2);
        assert_eq!(out.score.denominator, 2);
    }

    #[test]
    fn empty_mcq_scores_zero_over_zero() {
        let mut inputs = fixture_inputs();
        inputs.questions.clear();
        let out = run_once(&inputs, &RunConfig::default()).unwrap();
        assert_eq!((out.score.correct, out.score.denominator), (0, 0));
        assert!(out.verdicts.is_empty());
    }

    #[test]
    fn scan_slicing_equals_independent_runs() {
        let inputs = fixture_inputs();
        let config = RunConfig::default();
        let scan = dimension_scan(&inputs, &config, None).unwrap();
        assert_eq!(scan.entries.len(), scan.rank);
        for entry in &scan.entries {
            let per_k = run_once(
                &inputs,
                &RunConfig {
                    truncation: Truncation::Dim(entry.k),
                    ..config.clone()
                },
            )
            .unwrap();
            assert_eq!(per_k.score.correct, entry.correct, "k = {}", entry.k);
        }
    }

    #[test]
    fn scan_best_k_is_smallest_among_ties() {
        let inputs = fixture_inputs();
        let scan = dimension_scan(&inputs, &RunConfig::default(), None).unwrap();
        let max = scan.entries.iter().map(|e| e.correct).max().unwrap();
        let smallest = scan.entries.iter().find(|e| e.correct == max).unwrap().k;
        assert_eq!(scan.best_k, smallest);
        assert_eq!(scan.best_score, max);
    }

    #[test]
    fn scan_range_validation() {
        let inputs = fixture_inputs();
        let config = RunConfig::default();
        assert!(dimension_scan(&inputs, &config, Some(0..=3)).is_err());
        let scan = dimension_scan(&inputs, &config, Some(1..=1000)).unwrap();
        assert_eq!(scan.entries.last().unwrap().k, scan.rank);
    }

    #[test]
    fn scan_csv_layout() {
        let inputs = fixture_inputs();
        let scan = dimension_scan(&inputs, &RunConfig::default(), Some(1..=2)).unwrap();
        let csv = scan.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("k,correct,denominator"));
        assert!(lines.next().unwrap().starts_with("1,"));
        assert!(lines.next().unwrap().starts_with("2,"));
    }

    #[test]
    fn ablation_produces_seven_rows() {
        let inputs = fixture_inputs();
        let best = RunConfig {
            truncation: Truncation::Dim(2),
            ..RunConfig::default()
        };
        let report = ablate(&inputs, &best).unwrap();
        assert_eq!(report.rows.len(), 7);
        assert_eq!(report.best_score, 2);
        for row in &report.rows {
            assert!(row.ablated_score <= report.best_score + report.denominator);
            let expected =
                relative_contribution(report.best_score, row.ablated_score);
            assert_eq!(row.relative_contribution, expected);
        }
        let csv = report.to_csv(&best, false);
        assert!(csv.contains("# best_config:"));
        assert!(csv.contains("lsa_truncation,k=2,full"));
    }

    #[test]
    fn flips_change_exactly_one_parameter() {
        let best = RunConfig {
            truncation: Truncation::Dim(5),
            ..RunConfig::default()
        };
        for parameter in AblationParameter::ALL {
            let flipped = flip_parameter(&best, parameter);
            let mut differences = 0;
            if flipped.weighting.use_titles != best.weighting.use_titles {
                differences += 1;
            }
            if flipped.weighting.document_normalization != best.weighting.document_normalization {
                differences += 1;
            }
            if flipped.joint_lemmatization != best.joint_lemmatization {
                differences += 1;
            }
            if flipped.weighting.frequency_normalization != best.weighting.frequency_normalization
            {
                differences += 1;
            }
            if flipped.three_set != best.three_set {
                differences += 1;
            }
            if flipped.use_stoplist != best.use_stoplist {
                differences += 1;
            }
            if flipped.truncation != best.truncation {
                differences += 1;
            }
            assert_eq!(differences, 1, "{parameter} must flip exactly one field");
        }
    }

    #[test]
    fn contribution_arithmetic_and_rendering() {
        assert_eq!(percent_tenths(relative_contribution(27, 18)), 333);
        assert_eq!(percent_tenths(relative_contribution(27, 26)), 37);
        assert_eq!(percent_tenths(relative_contribution(22, 13)), 409);
        assert_eq!(percent_tenths(relative_contribution(5, 5)), 0);
        assert_eq!(format_percent_tenths(333, false), "33.3%");
        assert_eq!(format_percent_tenths(333, true), "33,3%");
        assert_eq!(format_percent_tenths(40, false), "4.0%");
        assert_eq!(format_percent_tenths(-15, false), "-1.5%");
        assert_eq!(relative_contribution(0, 0), 0.0);
    }

    #[test]
    fn wild_rule_reference_values() {
        assert_eq!(wild_estimate(1418, 149, WildMode::Terms, WILD_FRACTION), 28);
        assert_eq!(wild_estimate(3174, 425, WildMode::Terms, WILD_FRACTION), 63);
        assert_eq!(wild_estimate(976, 191, WildMode::Terms, WILD_FRACTION), 19);
        assert_eq!(wild_estimate(1083, 294, WildMode::Terms, WILD_FRACTION), 21);
        assert_eq!(wild_estimate(50, 100, WildMode::Terms, WILD_FRACTION), 1);
        assert_eq!(wild_estimate(1418, 149, WildMode::Min, WILD_FRACTION), 2);
    }

    #[test]
    fn wild_rule_is_monotone_in_terms() {
        let mut last = 0;
        for t in (1..3000).step_by(37) {
            let estimate = wild_estimate(t, 10_000, WildMode::Terms, WILD_FRACTION);
            assert!(estimate >= last);
            last = estimate;
        }
    }

    #[test]
    fn correlation_of_perfect_linear_relation() {
        let inputs = fixture_inputs();
        let config = RunConfig {
            truncation: Truncation::Dim(2),
            ..RunConfig::default()
        };
        let out = run_once(&inputs, &config).unwrap();
        let mut freqs = ChoiceFrequencies::default();
        for v in &out.verdicts {
            for a in 1..=3 {
                // frequency = negated, rescaled angle
                freqs.insert(v.id.clone(), a, 1.0 - v.angles[a - 1] / std::f64::consts::PI);
            }
        }
        let r = correlate_with_choices(&out.verdicts, &freqs).unwrap();
        assert!((r + 1.0).abs() < 1e-12);
    }

    #[test]
    fn correlation_requires_all_frequencies() {
        let inputs = fixture_inputs();
        let out = run_once(
            &inputs,
            &RunConfig {
                truncation: Truncation::Dim(2),
                ..RunConfig::default()
            },
        )
        .unwrap();
        let freqs = ChoiceFrequencies::default();
        assert!(matches!(
            correlate_with_choices(&out.verdicts, &freqs),
            Err(Error::MissingFrequency { .. })
        ));
    }

    #[test]
    fn correlation_rejects_zero_variance() {
        let inputs = fixture_inputs();
        let out = run_once(
            &inputs,
            &RunConfig {
                truncation: Truncation::Dim(2),
                ..RunConfig::default()
            },
        )
        .unwrap();
        let mut freqs = ChoiceFrequencies::default();
        for v in &out.verdicts {
            for a in 1..=3 {
                freqs.insert(v.id.clone(), a, 0.5);
            }
        }
        assert!(matches!(
            correlate_with_choices(&out.verdicts, &freqs),
            Err(Error::ZeroVariance { side: "frequency" })
        ));
    }

    #[test]
    fn frequencies_csv_parsing() {
        let text = "question_id,answer_index,frequency\n1,1,0.8\n1,2,0.1\n# note\n1,3,0.1\n";
        let freqs = ChoiceFrequencies::parse(text, "freqs.csv").unwrap();
        assert_eq!(freqs.len(), 3);
        assert_eq!(freqs.get("1", 1), Some(0.8));
        assert!(ChoiceFrequencies::parse("1,9,0.5", "freqs.csv").is_err());
        assert!(ChoiceFrequencies::parse("1,1", "freqs.csv").is_err());
        assert!(ChoiceFrequencies::parse("1,1,abc", "freqs.csv").is_err());
    }
}
