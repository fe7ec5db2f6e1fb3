use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{CorpusError, TermId};

/// Term surfaces indexed by dense term id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    surfaces: Vec<String>,
    index: HashMap<String, TermId>,
}

impl Vocabulary {
    pub fn new(surfaces: Vec<String>) -> Result<Self, CorpusError> {
        let mut index = HashMap::with_capacity(surfaces.len());
        for (id, s) in surfaces.iter().enumerate() {
            let id = id as TermId;
            if s.is_empty() {
                return Err(CorpusError::EmptySurface { term: id });
            }
            if let Some(first) = index.insert(s.clone(), id) {
                return Err(CorpusError::DuplicateSurface {
                    surface: s.clone(),
                    first,
                    second: id,
                });
            }
        }
        Ok(Self { surfaces, index })
    }

    /// Placeholder surfaces `t0..t{n-1}` for runs without a vocabulary file.
    pub fn synthetic(n_terms: usize) -> Self {
        Self::new((0..n_terms).map(|i| format!("t{i}")).collect()).expect("synthetic surfaces are unique")
    }

    pub fn len(&self) -> usize {
        self.surfaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.surfaces.is_empty()
    }

    pub fn surface(&self, term: TermId) -> &str {
        &self.surfaces[term as usize]
    }

    pub fn id(&self, surface: &str) -> Option<TermId> {
        self.index.get(surface).copied()
    }

    pub fn surfaces(&self) -> &[String] {
        &self.surfaces
    }

    /// Keeps the listed old ids, renumbered in order.
    pub fn select(&self, kept: &[TermId]) -> Self {
        Self::new(kept.iter().map(|&t| self.surfaces[t as usize].clone()).collect())
            .expect("subset of a valid vocabulary is valid")
    }

    /// Reads `term_id<TAB>surface` lines. Ids may appear in any order but must
    /// cover `0..n` exactly.
    pub fn read_from<R: BufRead>(reader: R) -> Result<Self, CorpusError> {
        let mut entries: Vec<(usize, String, usize)> = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let lineno = idx + 1;
            let line = line.map_err(|e| CorpusError::Parse {
                line: lineno,
                msg: e.to_string(),
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let (id, surface) = line.split_once('\t').ok_or_else(|| CorpusError::Parse {
                line: lineno,
                msg: "expected \"term_id<TAB>surface\"".into(),
            })?;
            let id: usize = id.trim().parse().map_err(|_| CorpusError::Parse {
                line: lineno,
                msg: format!("invalid term id {id:?}"),
            })?;
            entries.push((id, surface.trim_end_matches('\r').to_string(), lineno));
        }
        entries.sort_by_key(|e| e.0);
        for (expected, (id, _, line)) in entries.iter().enumerate() {
            if *id != expected {
                return Err(CorpusError::NonContiguousTermIds { expected, found: *id }.at_line(*line));
            }
        }
        Self::new(entries.into_iter().map(|e| e.1).collect())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CorpusError> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::read_from(BufReader::new(file))
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (id, s) in self.surfaces.iter().enumerate() {
            writeln!(w, "{id}\t{s}")?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), CorpusError> {
        let path = path.as_ref();
        let io_err = |source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
        self.write_to(&mut w).map_err(io_err)?;
        w.flush().map_err(io_err)
    }
}
