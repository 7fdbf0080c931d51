//! Tokenization, co-triggered suffix-pair lemmatization, and stop lists.

pub mod lemma;
pub mod stoplist;
pub mod tokenize;

pub use lemma::{
    build_term_map, joint_term_map, load_exceptions, load_suffix_rules, parse_exceptions,
    parse_suffix_rules, ExceptionSet, SuffixRule, TermId, TermMap, DEFAULT_MIN_STEM,
};
pub use stoplist::{stoplist_candidates, StopList};
pub use tokenize::{tokenize, tokenize_words, Token};
