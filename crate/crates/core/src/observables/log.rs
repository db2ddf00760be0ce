/// Time-ordered measurements of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableLog<R> {
    records: Vec<R>,
}

impl<R> Default for ObservableLog<R> {
    fn default() -> Self {
        Self {
            records: Vec::new(),
        }
    }
}

impl<R> ObservableLog<R> {
    pub fn push(&mut self, record: R) {
        self.records.push(record);
    }

    pub fn records(&self) -> &[R] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&R> {
        self.records.last()
    }

    /// Projects every record onto a `(t, value)` series.
    pub fn series(&self, f: impl Fn(&R) -> (f64, f64)) -> Vec<(f64, f64)> {
        self.records.iter().map(f).collect()
    }
}

impl<R> FromIterator<R> for ObservableLog<R> {
    fn from_iter<I: IntoIterator<Item = R>>(iter: I) -> Self {
        Self {
            records: iter.into_iter().collect(),
        }
    }
}
