//! Global sequence alignment with unit costs (match 0; insert/replace/delete 1).
//!
//! `align(hyp, target)` returns the minimum-cost pairing of the two sequences.
//! Ties are broken reading the alignment left to right, preferring the
//! diagonal step (Unchange/Replace), then Delete, then Insert, so equal-cost
//! alignments always come out the same way.

use serde::{Deserialize, Serialize};

/// The four edit operations, from the hypothesis's point of view:
/// Delete drops a hyp symbol, Insert adds a target symbol the hyp lacked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EditOp {
    Unchange,
    Insert,
    Replace,
    Delete,
}

/// One aligned pair: indices into the hyp and target sequences, where present.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlignedPair {
    pub hyp_index: Option<usize>,
    pub target_index: Option<usize>,
    pub op: EditOp,
}

/// A full alignment: ordered pairs covering both sequences, plus the edit cost.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alignment {
    pub pairs: Vec<AlignedPair>,
    pub cost: usize,
}

/// Align `hyp` against `target`, minimizing unit-cost edits.
pub fn align<T: PartialEq>(hyp: &[T], target: &[T]) -> Alignment {
    let m = hyp.len();
    let n = target.len();
    // sdp[i][j] = edit distance between hyp[i..] and target[j..]; filling the
    // suffix table lets the walk below break ties in left-to-right order.
    let w = n + 1;
    let mut sdp = vec![0usize; (m + 1) * w];
    for j in (0..n).rev() {
        sdp[m * w + j] = n - j;
    }
    for i in (0..m).rev() {
        sdp[i * w + n] = m - i;
        for j in (0..n).rev() {
            let sub = usize::from(hyp[i] != target[j]);
            let diag = sdp[(i + 1) * w + j + 1] + sub;
            let del = sdp[(i + 1) * w + j] + 1;
            let ins = sdp[i * w + j + 1] + 1;
            sdp[i * w + j] = diag.min(del).min(ins);
        }
    }

    let mut pairs = Vec::with_capacity(m.max(n));
    let (mut i, mut j) = (0, 0);
    while i < m || j < n {
        let here = sdp[i * w + j];
        if i < m && j < n {
            let sub = usize::from(hyp[i] != target[j]);
            if sdp[(i + 1) * w + j + 1] + sub == here {
                let op = if sub == 0 { EditOp::Unchange } else { EditOp::Replace };
                pairs.push(AlignedPair { hyp_index: Some(i), target_index: Some(j), op });
                i += 1;
                j += 1;
                continue;
            }
        }
        if i < m && sdp[(i + 1) * w + j] + 1 == here {
            pairs.push(AlignedPair { hyp_index: Some(i), target_index: None, op: EditOp::Delete });
            i += 1;
            continue;
        }
        pairs.push(AlignedPair { hyp_index: None, target_index: Some(j), op: EditOp::Insert });
        j += 1;
    }

    Alignment { pairs, cost: sdp[0] }
}

/// Unit-cost edit distance, computed with a rolling row. Always equals
/// `align(a, b).cost`; the two routes are kept separate so tests can compare.
pub fn edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let n = b.len();
    let mut prev: Vec<usize> = (0..=n).collect();
    let mut cur = vec![0usize; n + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[n]
}
