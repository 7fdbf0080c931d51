//! Corpus documents and the plain-text corpus file format.
//!
//! A corpus file holds documents separated by one or more blank lines. When a
//! document block's first line starts with `#`, the remainder of that line is
//! the document title; titles only enter the matrix when title usage is
//! switched on. A directory of `.txt` files (one document each, same title
//! convention) is accepted as an alternative layout.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::text::tokenize_words;

#[derive(Debug, Clone)]
pub struct Document {
    pub title: Option<String>,
    pub body: String,
}

impl Document {
    /// Tokens contributing to this document's column.
    pub fn tokens(&self, use_titles: bool) -> Vec<String> {
        let mut toks = tokenize_words(&self.body);
        if use_titles {
            if let Some(title) = &self.title {
                toks.extend(tokenize_words(title));
            }
        }
        toks
    }
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub name: String,
    pub documents: Vec<Document>,
}

impl Corpus {
    pub fn n_docs(&self) -> usize {
        self.documents.len()
    }

    /// Surface vocabulary over all documents (titles included when used).
    pub fn vocabulary(&self, use_titles: bool) -> BTreeSet<String> {
        let mut vocab = BTreeSet::new();
        for doc in &self.documents {
            vocab.extend(doc.tokens(use_titles));
        }
        vocab
    }

    pub fn from_file(path: &Path) -> Result<Corpus> {
        let text =
            fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "corpus".into());
        parse_corpus(&text, &name)
    }

    /// Loads every `.txt` file of a directory as one document, in file-name
    /// order so column indices are reproducible.
    pub fn from_dir(path: &Path) -> Result<Corpus> {
        let mut files: Vec<_> = fs::read_dir(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|ext| ext == "txt"))
            .collect();
        files.sort();
        let mut documents = Vec::new();
        for file in &files {
            let text =
                fs::read_to_string(file).map_err(|e| Error::io(file.display().to_string(), e))?;
            documents.push(parse_block(&text));
        }
        if documents.is_empty() {
            return Err(Error::parse(
                path.display().to_string(),
                0,
                "no .txt documents in directory",
            ));
        }
        let name = path
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "corpus".into());
        Ok(Corpus { name, documents })
    }
}

fn parse_block(block: &str) -> Document {
    let mut lines = block.lines();
    let mut title = None;
    let mut body_lines: Vec<&str> = Vec::new();
    if let Some(first) = lines.next() {
        if let Some(rest) = first.trim_start().strip_prefix('#') {
            title = Some(rest.trim().to_string());
        } else {
            body_lines.push(first);
        }
    }
    body_lines.extend(lines);
    Document {
        title,
        body: body_lines.join("\n"),
    }
}

/// Parses blank-line-separated document blocks.
pub fn parse_corpus(text: &str, name: &str) -> Result<Corpus> {
    let mut documents = Vec::new();
    let mut block: Vec<&str> = Vec::new();
    for line in text.lines().chain(std::iter::once("")) {
        if line.trim().is_empty() {
            if !block.is_empty() {
                documents.push(parse_block(&block.join("\n")));
                block.clear();
            }
        } else {
            block.push(line);
        }
    }
    if documents.is_empty() {
        return Err(Error::parse(name, 0, "corpus holds no documents"));
    }
    Ok(Corpus {
        name: name.to_string(),
        documents,
    })
}
