//! Suffix-pair lemmatization.
//!
//! Two words merge into one term when they share a stem and their differing
//! suffixes form a predefined permissible pair, e.g. with the pair `("e",
//! "ons")` the words `respire` and `respirons` land in the same class. Merges
//! are closed transitively; each class is represented by its shortest member.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// An unordered pair of suffixes that co-triggers a merge.
///
/// At most one side may be empty (an empty side matches a bare stem, as in
/// `("", "s")` merging `pousse` with `pousses`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SuffixRule {
    a: String,
    b: String,
}

impl SuffixRule {
    pub fn new(a: impl Into<String>, b: impl Into<String>) -> Result<Self> {
        let (a, b) = (a.into(), b.into());
        if a == b {
            return Err(Error::InvalidRule(format!(
                "sides must differ, got \"{a}\" twice"
            )));
        }
        if a.chars().any(char::is_whitespace) || b.chars().any(char::is_whitespace) {
            return Err(Error::InvalidRule(format!(
                "whitespace in suffix \"{a}\"/\"{b}\""
            )));
        }
        // store the lexicographically smaller side first: the pair is unordered
        if a <= b {
            Ok(SuffixRule { a, b })
        } else {
            Ok(SuffixRule { a: b, b: a })
        }
    }

    pub fn sides(&self) -> (&str, &str) {
        (&self.a, &self.b)
    }
}

/// Parses a suffix-rule file: one `suffix_a,suffix_b` per line, `#` comments,
/// blank lines ignored. An empty side is allowed (`,s`).
pub fn parse_suffix_rules(text: &str, path: &str) -> Result<Vec<SuffixRule>> {
    let mut rules = Vec::new();
    let mut seen = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (a, b) = line
            .split_once(',')
            .ok_or_else(|| Error::parse(path, idx + 1, "expected `suffix_a,suffix_b`"))?;
        let rule = SuffixRule::new(a.trim(), b.trim())
            .map_err(|e| Error::parse(path, idx + 1, e.to_string()))?;
        if seen.insert(rule.clone()) {
            rules.push(rule);
        }
    }
    Ok(rules)
}

pub fn load_suffix_rules(path: &Path) -> Result<Vec<SuffixRule>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    parse_suffix_rules(&text, &path.display().to_string())
}

/// Unordered word pairs whose merge edge is blocked.
///
/// An exception blocks only the direct edge between the two words; the pair
/// can still end up merged transitively through a third word.
#[derive(Debug, Clone, Default)]
pub struct ExceptionSet {
    pairs: HashSet<(String, String)>,
}

impl ExceptionSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, w1: impl Into<String>, w2: impl Into<String>) {
        let (w1, w2) = (w1.into(), w2.into());
        let pair = if w1 <= w2 { (w1, w2) } else { (w2, w1) };
        self.pairs.insert(pair);
    }

    pub fn blocks(&self, w1: &str, w2: &str) -> bool {
        let key = if w1 <= w2 { (w1, w2) } else { (w2, w1) };
        self.pairs
            .contains(&(key.0.to_string(), key.1.to_string()))
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Parses an exceptions file: one `word_a,word_b` pair per line, `#` comments.
pub fn parse_exceptions(text: &str, path: &str) -> Result<ExceptionSet> {
    let mut set = ExceptionSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (a, b) = line
            .split_once(',')
            .ok_or_else(|| Error::parse(path, idx + 1, "expected `word_a,word_b`"))?;
        let (a, b) = (a.trim(), b.trim());
        if a.is_empty() || b.is_empty() {
            return Err(Error::parse(path, idx + 1, "empty word in exception pair"));
        }
        set.insert(a, b);
    }
    Ok(set)
}

pub fn load_exceptions(path: &Path) -> Result<ExceptionSet> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    parse_exceptions(&text, &path.display().to_string())
}

/// Identifier of a term (an equivalence class of surface words).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermId(pub u32);

/// Equivalence classes mapping surface words to lemmatized terms.
#[derive(Debug, Clone)]
pub struct TermMap {
    term_of_word: HashMap<String, TermId>,
    representatives: Vec<String>,
    members: Vec<Vec<String>>,
}

impl TermMap {
    /// Term of a surface word, if the word was in the mapped vocabulary.
    pub fn term_of(&self, word: &str) -> Option<TermId> {
        self.term_of_word.get(word).copied()
    }

    /// Representative (shortest member, lexicographic tie-break) of a class.
    pub fn representative(&self, term: TermId) -> &str {
        &self.representatives[term.0 as usize]
    }

    /// Representative of the class a word belongs to, if mapped.
    pub fn representative_of(&self, word: &str) -> Option<&str> {
        self.term_of(word).map(|t| self.representative(t))
    }

    pub fn n_terms(&self) -> usize {
        self.representatives.len()
    }

    pub fn n_words(&self) -> usize {
        self.term_of_word.len()
    }

    /// Members of a class, sorted.
    pub fn members(&self, term: TermId) -> &[String] {
        &self.members[term.0 as usize]
    }

    pub fn terms(&self) -> impl Iterator<Item = TermId> + '_ {
        (0..self.representatives.len() as u32).map(TermId)
    }
}

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        let (big, small) = if self.size[ra] >= self.size[rb] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[small] = big;
        self.size[big] += self.size[small];
    }
}

fn char_len(s: &str) -> usize {
    s.chars().count()
}

/// Builds the term map over `vocabulary`.
///
/// Two words `w1`, `w2` merge iff some rule `(s_a, s_b)` writes them as
/// `stem + s_a` and `stem + s_b` with the stem at least `min_stem` characters
/// long and the pair not listed in `exceptions`. Merges are closed
/// transitively (union-find), so chains through intermediate words are kept.
/// Classes larger than 5 words are logged as spurious-merge suspects.
pub fn build_term_map(
    vocabulary: &BTreeSet<String>,
    rules: &[SuffixRule],
    exceptions: &ExceptionSet,
    min_stem: usize,
) -> Result<TermMap> {
    if min_stem == 0 {
        return Err(Error::MinStemZero);
    }
    let words: Vec<&String> = vocabulary.iter().collect();
    let index: HashMap<&str, usize> = words
        .iter()
        .enumerate()
        .map(|(i, w)| (w.as_str(), i))
        .collect();
    let mut uf = UnionFind::new(words.len());

    for (i, word) in words.iter().enumerate() {
        for rule in rules {
            let (sa, sb) = rule.sides();
            // try the word as stem+sa looking for stem+sb, then the mirror
            for (own, other) in [(sa, sb), (sb, sa)] {
                let Some(stem) = word.strip_suffix(own) else {
                    continue;
                };
                if char_len(stem) < min_stem {
                    continue;
                }
                let partner = format!("{stem}{other}");
                if partner.as_str() == word.as_str() {
                    continue;
                }
                if let Some(&j) = index.get(partner.as_str()) {
                    if !exceptions.blocks(word, &partner) {
                        uf.union(i, j);
                    }
                }
            }
        }
    }

    // group members per root
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for i in 0..words.len() {
        groups.entry(uf.find(i)).or_default().push(i);
    }

    // representative = shortest member, lexicographic tie-break; classes are
    // numbered in representative order so TermIds are deterministic
    let mut classes: Vec<(String, Vec<String>)> = groups
        .into_values()
        .map(|member_idx| {
            let mut members: Vec<String> =
                member_idx.iter().map(|&i| words[i].clone()).collect();
            members.sort();
            let rep = members
                .iter()
                .min_by(|a, b| char_len(a).cmp(&char_len(b)).then_with(|| a.cmp(b)))
                .expect("class has at least one member")
                .clone();
            (rep, members)
        })
        .collect();
    classes.sort_by(|(ra, _), (rb, _)| ra.cmp(rb));

    let mut term_of_word = HashMap::with_capacity(words.len());
    let mut representatives = Vec::with_capacity(classes.len());
    let mut members_out = Vec::with_capacity(classes.len());
    for (id, (rep, members)) in classes.into_iter().enumerate() {
        let term = TermId(id as u32);
        if members.len() > 5 {
            log::warn!(
                "spurious equivalence class risk: \"{rep}\" has {} members",
                members.len()
            );
        }
        for w in &members {
            term_of_word.insert(w.clone(), term);
        }
        representatives.push(rep);
        members_out.push(members);
    }

    Ok(TermMap {
        term_of_word,
        representatives,
        members: members_out,
    })
}

/// Lemmatizes the union of corpus and questionnaire vocabularies, so
/// questionnaire-only surface forms can land in corpus-attested classes.
pub fn joint_term_map(
    corpus_vocab: &BTreeSet<String>,
    mcq_vocab: &BTreeSet<String>,
    rules: &[SuffixRule],
    exceptions: &ExceptionSet,
    min_stem: usize,
) -> Result<TermMap> {
    let union: BTreeSet<String> = corpus_vocab.union(mcq_vocab).cloned().collect();
    build_term_map(&union, rules, exceptions, min_stem)
}

/// Default minimum stem length: stems of 1-2 letters merge too eagerly.
pub const DEFAULT_MIN_STEM: usize = 3;

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab(words: &[&str]) -> BTreeSet<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    fn rules(pairs: &[(&str, &str)]) -> Vec<SuffixRule> {
        pairs
            .iter()
            .map(|(a, b)| SuffixRule::new(*a, *b).unwrap())
            .collect()
    }

    #[test]
    fn rule_rejects_equal_sides() {
        assert!(SuffixRule::new("e", "e").is_err());
        assert!(SuffixRule::new("", "").is_err());
        assert!(SuffixRule::new("", "s").is_ok());
    }

    #[test]
    fn min_stem_zero_is_rejected() {
        let err = build_term_map(&vocab(&["ab"]), &rules(&[("e", "ons")]), &ExceptionSet::new(), 0);
        assert!(matches!(err, Err(Error::MinStemZero)));
    }

    #[test]
    fn co_triggered_merge() {
        let map = build_term_map(
            &vocab(&["respire", "respirons"]),
            &rules(&[("e", "ons")]),
            &ExceptionSet::new(),
            3,
        )
        .unwrap();
        assert_eq!(map.n_terms(), 1);
        assert_eq!(map.representative_of("respirons"), Some("respire"));
        assert_eq!(map.representative_of("respire"), Some("respire"));
    }

    #[test]
    fn exception_blocks_direct_edge() {
        let mut exceptions = ExceptionSet::new();
        exceptions.insert("respire", "respirons");
        let map = build_term_map(
            &vocab(&["respire", "respirons"]),
            &rules(&[("e", "ons")]),
            &exceptions,
            3,
        )
        .unwrap();
        assert_eq!(map.n_terms(), 2);
    }

    #[test]
    fn unrelated_words_stay_apart() {
        let map = build_term_map(
            &vocab(&["abc", "xyz"]),
            &rules(&[("e", "ons"), ("", "s")]),
            &ExceptionSet::new(),
            3,
        )
        .unwrap();
        assert_eq!(map.n_terms(), 2);
    }

    /// Brute-force oracle: merge every pair that any rule relates, then close
    /// transitively by repeated sweeps over an explicit class list.
    fn brute_force_classes(
        words: &BTreeSet<String>,
        rules: &[SuffixRule],
        exceptions: &ExceptionSet,
        min_stem: usize,
    ) -> Vec<BTreeSet<String>> {
        let words: Vec<&String> = words.iter().collect();
        let mut classes: Vec<BTreeSet<String>> = words
            .iter()
            .map(|w| std::iter::once((*w).clone()).collect())
            .collect();
        let pair_merges = |w1: &str, w2: &str| -> bool {
            if exceptions.blocks(w1, w2) {
                return false;
            }
            rules.iter().any(|r| {
                let (sa, sb) = r.sides();
                let forward = w1.strip_suffix(sa).is_some_and(|stem| {
                    stem.chars().count() >= min_stem && format!("{stem}{sb}") == w2
                });
                let backward = w1.strip_suffix(sb).is_some_and(|stem| {
                    stem.chars().count() >= min_stem && format!("{stem}{sa}") == w2
                });
                forward || backward
            })
        };
        loop {
            let mut merged_any = false;
            'outer: for i in 0..classes.len() {
                for j in (i + 1)..classes.len() {
                    let related = classes[i].iter().any(|w1| {
                        classes[j].iter().any(|w2| pair_merges(w1, w2))
                    });
                    if related {
                        let other = classes.remove(j);
                        classes[i].extend(other);
                        merged_any = true;
                        break 'outer;
                    }
                }
            }
            if !merged_any {
                return classes;
            }
        }
    }

    fn classes_of(map: &TermMap) -> Vec<BTreeSet<String>> {
        map.terms()
            .map(|t| map.members(t).iter().cloned().collect())
            .collect()
    }

    #[test]
    fn transitive_closure_matches_brute_force() {
        let v = vocab(&["pousse", "poussons", "pousser"]);
        let r = rules(&[("e", "ons"), ("e", "er")]);
        let map = build_term_map(&v, &r, &ExceptionSet::new(), 3).unwrap();
        assert_eq!(map.n_terms(), 1);
        assert_eq!(map.representative_of("pousser"), Some("pousse"));

        let mut expected = brute_force_classes(&v, &r, &ExceptionSet::new(), 3);
        let mut got = classes_of(&map);
        expected.sort();
        got.sort();
        assert_eq!(got, expected);
    }

    #[test]
    fn brute_force_agreement_on_mixed_vocabulary() {
        let v = vocab(&[
            "respire",
            "respirons",
            "respirer",
            "pousse",
            "pousses",
            "air",
            "airs",
            "abaisse",
            "abaissent",
            "cote",
            "muscle",
            "muscles",
        ]);
        let r = rules(&[("e", "ons"), ("e", "er"), ("", "s"), ("e", "ent")]);
        let mut exceptions = ExceptionSet::new();
        exceptions.insert("pousse", "pousses");
        let map = build_term_map(&v, &r, &exceptions, 3).unwrap();

        let mut expected = brute_force_classes(&v, &r, &exceptions, 3);
        let mut got = classes_of(&map);
        expected.sort();
        got.sort();
        assert_eq!(got, expected);
    }

    #[test]
    fn exception_does_not_block_transitive_path() {
        // direct edge pousse-pousses blocked, but both merge with pousser
        let v = vocab(&["pousse", "pousses", "pousser"]);
        let r = rules(&[("", "s"), ("e", "er"), ("es", "er")]);
        let mut exceptions = ExceptionSet::new();
        exceptions.insert("pousse", "pousses");
        let map = build_term_map(&v, &r, &exceptions, 3).unwrap();
        assert_eq!(map.n_terms(), 1);
    }

    #[test]
    fn joint_map_bridges_mcq_only_forms() {
        // corpus has "risen"-like form, questionnaire has "raise"-like form
        let corpus = vocab(&["leve", "cote"]);
        let mcq = vocab(&["levons"]);
        let map = joint_term_map(&corpus, &mcq, &rules(&[("e", "ons")]), &ExceptionSet::new(), 3)
            .unwrap();
        assert_eq!(map.representative_of("levons"), Some("leve"));

        // corpus-only run cannot know the questionnaire form at all
        let corpus_only =
            build_term_map(&corpus, &rules(&[("e", "ons")]), &ExceptionSet::new(), 3).unwrap();
        assert_eq!(corpus_only.term_of("levons"), None);
    }

    #[test]
    fn joint_map_has_fewer_classes_when_sets_bridge() {
        let corpus = vocab(&["marche", "marcher", "sang"]);
        let mcq = vocab(&["marchons"]);
        let r = rules(&[("e", "ons"), ("e", "er")]);
        let joint = joint_term_map(&corpus, &mcq, &r, &ExceptionSet::new(), 3).unwrap();
        // separate maps over the union-as-singletons would hold 4 words;
        // the joint map folds all three verb forms into one class
        assert_eq!(joint.n_terms(), 2);
        let disjoint = build_term_map(
            &corpus.union(&mcq).cloned().collect(),
            &[],
            &ExceptionSet::new(),
            3,
        )
        .unwrap();
        assert!(joint.n_terms() < disjoint.n_terms());
    }

    #[test]
    fn disjoint_vocabularies_without_matches_stay_singletons() {
        let corpus = vocab(&["sang", "air"]);
        let mcq = vocab(&["oxymetre"]);
        let map = joint_term_map(&corpus, &mcq, &rules(&[("e", "ons")]), &ExceptionSet::new(), 3)
            .unwrap();
        assert_eq!(map.n_terms(), 3);
    }

    #[test]
    fn representative_is_shortest_member_lexicographic_ties() {
        let map = build_term_map(
            &vocab(&["portes", "portee"]),
            &rules(&[("s", "e")]),
            &ExceptionSet::new(),
            3,
        )
        .unwrap();
        // both 6 chars: lexicographic tie-break picks "portee"
        assert_eq!(map.n_terms(), 1);
        assert_eq!(map.representative_of("portes"), Some("portee"));
    }

    #[test]
    fn idempotent_on_representatives() {
        let v = vocab(&["respire", "respirons", "pousse", "poussons"]);
        let r = rules(&[("e", "ons")]);
        let map = build_term_map(&v, &r, &ExceptionSet::new(), 3).unwrap();
        let reps: BTreeSet<String> = map.terms().map(|t| map.representative(t).to_string()).collect();
        // "respire" and "pousse" share no rule pair, so nothing merges again
        let again = build_term_map(&reps, &r, &ExceptionSet::new(), 3).unwrap();
        assert_eq!(again.n_terms(), reps.len());
    }

    #[test]
    fn empty_suffix_side_matches_bare_stem() {
        let map = build_term_map(
            &vocab(&["air", "airs"]),
            &rules(&[("", "s")]),
            &ExceptionSet::new(),
            3,
        )
        .unwrap();
        assert_eq!(map.n_terms(), 1);
        assert_eq!(map.representative_of("airs"), Some("air"));
    }

    #[test]
    fn min_stem_counts_characters_not_bytes() {
        // "côt" is 3 characters (4 bytes); with min_stem 3 the merge happens
        let map = build_term_map(
            &vocab(&["côte", "côtes"]),
            &rules(&[("e", "es")]),
            &ExceptionSet::new(),
            3,
        )
        .unwrap();
        assert_eq!(map.n_terms(), 1);
    }

    #[test]
    fn parse_rules_file() {
        let text = "# verb endings\ne,ons\n,s\n\ne , er\n";
        let rules = parse_suffix_rules(text, "rules.txt").unwrap();
        assert_eq!(rules.len(), 3);
        assert!(parse_suffix_rules("e;ons", "rules.txt").is_err());
        assert!(parse_suffix_rules("e,e", "rules.txt").is_err());
    }

    #[test]
    fn parse_exceptions_file() {
        let set = parse_exceptions("# none\nrespire,respirons\n", "exc.txt").unwrap();
        assert!(set.blocks("respirons", "respire"));
        assert!(!set.blocks("respire", "pousse"));
        assert!(parse_exceptions("respire", "exc.txt").is_err());
        assert!(parse_exceptions("respire,", "exc.txt").is_err());
    }
}
