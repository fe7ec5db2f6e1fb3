use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{CorpusError, DocId, TermId};

/// Sparse document–term count matrix, stored row-compressed by document.
///
/// Every stored count is positive and term ids ascend within a row, so two
/// matrices holding the same cells compare equal regardless of input order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocTermMatrix {
    n_docs: usize,
    n_terms: usize,
    row_ptr: Vec<usize>,
    terms: Vec<TermId>,
    counts: Vec<u64>,
}

impl DocTermMatrix {
    /// Builds a matrix from `(doc, term, count)` cells in any order.
    pub fn from_triplets<I>(n_docs: usize, n_terms: usize, cells: I) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = (DocId, TermId, u64)>,
    {
        let mut cells: Vec<(DocId, TermId, u64)> = cells.into_iter().collect();
        for &(doc, term, count) in &cells {
            check_cell(n_docs, n_terms, doc as u64, term as u64, count as i64)?;
        }
        cells.sort_unstable_by_key(|&(d, t, _)| (d, t));
        for w in cells.windows(2) {
            if w[0].0 == w[1].0 && w[0].1 == w[1].1 {
                return Err(CorpusError::DuplicateCell {
                    doc: w[0].0,
                    term: w[0].1,
                });
            }
        }
        Ok(Self::from_sorted(n_docs, n_terms, &cells))
    }

    fn from_sorted(n_docs: usize, n_terms: usize, cells: &[(DocId, TermId, u64)]) -> Self {
        let mut row_ptr = vec![0usize; n_docs + 1];
        for &(d, _, _) in cells {
            row_ptr[d as usize + 1] += 1;
        }
        for i in 0..n_docs {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            n_docs,
            n_terms,
            row_ptr,
            terms: cells.iter().map(|c| c.1).collect(),
            counts: cells.iter().map(|c| c.2).collect(),
        }
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    /// Number of stored (nonzero) cells.
    pub fn nnz(&self) -> usize {
        self.terms.len()
    }

    pub fn doc_terms(&self, doc: DocId) -> &[TermId] {
        let d = doc as usize;
        &self.terms[self.row_ptr[d]..self.row_ptr[d + 1]]
    }

    pub fn doc_counts(&self, doc: DocId) -> &[u64] {
        let d = doc as usize;
        &self.counts[self.row_ptr[d]..self.row_ptr[d + 1]]
    }

    pub fn row(&self, doc: DocId) -> impl Iterator<Item = (TermId, u64)> + '_ {
        self.doc_terms(doc)
            .iter()
            .copied()
            .zip(self.doc_counts(doc).iter().copied())
    }

    pub fn get(&self, doc: DocId, term: TermId) -> u64 {
        match self.doc_terms(doc).binary_search(&term) {
            Ok(pos) => self.doc_counts(doc)[pos],
            Err(_) => 0,
        }
    }

    pub fn contains(&self, doc: DocId, term: TermId) -> bool {
        self.doc_terms(doc).binary_search(&term).is_ok()
    }

    /// All cells in (doc, term) order.
    pub fn triplets(&self) -> impl Iterator<Item = (DocId, TermId, u64)> + '_ {
        (0..self.n_docs as DocId).flat_map(move |d| self.row(d).map(move |(t, c)| (d, t, c)))
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Number of documents containing each term.
    pub fn document_frequencies(&self) -> Vec<u32> {
        let mut df = vec![0u32; self.n_terms];
        for &t in &self.terms {
            df[t as usize] += 1;
        }
        df
    }

    /// Total count of each term over the whole collection.
    pub fn collection_frequencies(&self) -> Vec<u64> {
        let mut cf = vec![0u64; self.n_terms];
        for (&t, &c) in self.terms.iter().zip(&self.counts) {
            cf[t as usize] += c;
        }
        cf
    }

    /// Posting lists: for each term, the ascending list of documents containing it.
    pub fn postings(&self) -> Vec<Vec<DocId>> {
        let mut post = vec![Vec::new(); self.n_terms];
        for (d, t, _) in self.triplets() {
            post[t as usize].push(d);
        }
        post
    }

    /// Keeps only the listed terms, renumbering them `0..kept.len()` in the given order.
    pub(crate) fn select_terms(&self, kept: &[TermId]) -> Self {
        let mut new_id = vec![None; self.n_terms];
        for (new, &old) in kept.iter().enumerate() {
            new_id[old as usize] = Some(new as TermId);
        }
        let mut cells = Vec::new();
        for (d, t, c) in self.triplets() {
            if let Some(nt) = new_id[t as usize] {
                cells.push((d, nt, c));
            }
        }
        cells.sort_unstable_by_key(|&(d, t, _)| (d, t));
        Self::from_sorted(self.n_docs, kept.len(), &cells)
    }

    pub fn read_from<R: BufRead>(reader: R) -> Result<Self, CorpusError> {
        let mut header: Option<(usize, usize)> = None;
        let mut cells = Vec::new();
        let mut lines = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let lineno = idx + 1;
            let line = line.map_err(|e| CorpusError::Parse {
                line: lineno,
                msg: e.to_string(),
            })?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            match header {
                None => {
                    if fields.len() != 2 {
                        return Err(parse_err(lineno, "expected header \"n_docs n_terms\""));
                    }
                    let n_docs = parse_field::<usize>(fields[0], lineno, "n_docs")?;
                    let n_terms = parse_field::<usize>(fields[1], lineno, "n_terms")?;
                    header = Some((n_docs, n_terms));
                }
                Some((n_docs, n_terms)) => {
                    if fields.len() != 3 {
                        return Err(parse_err(lineno, "expected \"doc term count\""));
                    }
                    let doc = parse_field::<u64>(fields[0], lineno, "doc-id")?;
                    let term = parse_field::<u64>(fields[1], lineno, "term-id")?;
                    let count = parse_field::<i64>(fields[2], lineno, "count")?;
                    check_cell(n_docs, n_terms, doc, term, count).map_err(|e| e.at_line(lineno))?;
                    cells.push((doc as DocId, term as TermId, count as u64));
                    lines.push(lineno);
                }
            }
        }
        let (n_docs, n_terms) = header.ok_or_else(|| parse_err(1, "missing header"))?;

        let mut order: Vec<usize> = (0..cells.len()).collect();
        order.sort_unstable_by_key(|&i| (cells[i].0, cells[i].1));
        for w in order.windows(2) {
            let (a, b) = (cells[w[0]], cells[w[1]]);
            if a.0 == b.0 && a.1 == b.1 {
                let line = lines[w[0].max(w[1])];
                return Err(CorpusError::DuplicateCell { doc: a.0, term: a.1 }.at_line(line));
            }
        }
        let sorted: Vec<_> = order.into_iter().map(|i| cells[i]).collect();
        Ok(Self::from_sorted(n_docs, n_terms, &sorted))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CorpusError> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::read_from(BufReader::new(file))
    }

    /// Writes the canonical text form: header, then cells in (doc, term) order.
    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{} {}", self.n_docs, self.n_terms)?;
        for (d, t, c) in self.triplets() {
            writeln!(w, "{d} {t} {c}")?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), CorpusError> {
        let path = path.as_ref();
        let io_err = |source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        };
        let file = File::create(path).map_err(io_err)?;
        let mut w = BufWriter::new(file);
        self.write_to(&mut w).map_err(io_err)?;
        w.flush().map_err(io_err)
    }
}

fn check_cell(n_docs: usize, n_terms: usize, doc: u64, term: u64, count: i64) -> Result<(), CorpusError> {
    if doc >= n_docs as u64 {
        return Err(CorpusError::DocOutOfRange { doc, n_docs });
    }
    if term >= n_terms as u64 {
        return Err(CorpusError::TermOutOfRange { term, n_terms });
    }
    if count <= 0 {
        return Err(CorpusError::NonPositiveCount { doc, term, count });
    }
    Ok(())
}

fn parse_err(line: usize, msg: &str) -> CorpusError {
    CorpusError::Parse {
        line,
        msg: msg.to_string(),
    }
}

fn parse_field<T: std::str::FromStr>(s: &str, line: usize, what: &str) -> Result<T, CorpusError> {
    s.parse::<T>().map_err(|_| CorpusError::Parse {
        line,
        msg: format!("invalid {what} {s:?}"),
    })
}
