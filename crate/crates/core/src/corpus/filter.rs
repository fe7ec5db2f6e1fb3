use super::{CorpusError, DocTermMatrix, TermId};

/// Old term ids kept by a filter, indexed by their new id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermRemap {
    pub kept: Vec<TermId>,
}

impl TermRemap {
    pub fn old_id(&self, new: TermId) -> TermId {
        self.kept[new as usize]
    }
}

/// Integer document-frequency bounds `(min_df, max_df)` for fractional bounds.
///
/// Fractions are rounded half away from zero, which reproduces the integer
/// ranges reported for collections of 321–65991 documents at 1%/10%.
pub fn df_bounds(n_docs: usize, low: f64, high: f64) -> (u64, u64) {
    let n = n_docs as f64;
    ((low * n).round() as u64, (high * n).round() as u64)
}

/// Keeps terms whose document frequency lies in the inclusive integer range
/// derived from `low`/`high`, renumbering the survivors in ascending order.
pub fn salton_df_filter(
    matrix: &DocTermMatrix,
    low: f64,
    high: f64,
) -> Result<(DocTermMatrix, TermRemap), CorpusError> {
    if !(0.0..=1.0).contains(&low) || !(0.0..=1.0).contains(&high) || low >= high {
        return Err(CorpusError::InvalidFilterBounds { low, high });
    }
    let (min_df, max_df) = df_bounds(matrix.n_docs(), low, high);
    let kept: Vec<TermId> = matrix
        .document_frequencies()
        .iter()
        .enumerate()
        .filter(|(_, &df)| (min_df..=max_df).contains(&(df as u64)))
        .map(|(t, _)| t as TermId)
        .collect();
    if kept.is_empty() {
        return Err(CorpusError::EmptyVocabularyAfterFilter);
    }
    Ok((matrix.select_terms(&kept), TermRemap { kept }))
}
