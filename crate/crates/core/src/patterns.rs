//! Groups identical rows so that per-row solves run once per distinct pattern.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::matrix::Matrix;

#[derive(Debug, Clone)]
pub(crate) struct RowPatterns {
    /// First row index carrying each pattern, in order of first appearance.
    pub reps: Vec<usize>,
    /// Number of rows per pattern.
    pub counts: Vec<usize>,
    /// Pattern id of every row.
    pub of_row: Vec<usize>,
    /// Rows of each pattern in increasing order.
    pub members: Vec<Vec<usize>>,
}

impl RowPatterns {
    pub fn new(x: &Matrix) -> Self {
        let mut seen: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
        let mut reps = Vec::new();
        let mut counts = Vec::new();
        let mut members: Vec<Vec<usize>> = Vec::new();
        let mut of_row = Vec::with_capacity(x.rows());
        for (i, row) in x.iter_rows().enumerate() {
            // -0.0 and 0.0 must land in the same bucket
            let key: Vec<u64> = row.iter().map(|v| (v + 0.0).to_bits()).collect();
            let id = *seen.entry(key).or_insert_with(|| {
                reps.push(i);
                counts.push(0);
                members.push(Vec::new());
                reps.len() - 1
            });
            counts[id] += 1;
            members[id].push(i);
            of_row.push(id);
        }
        RowPatterns { reps, counts, of_row, members }
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }
}
