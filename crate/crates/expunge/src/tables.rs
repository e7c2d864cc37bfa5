//! Exact-integer tables and the combinatorial predicates on them.
//!
//! Everything here is pure integer arithmetic: sequences over `[0, r]` with
//! occurrence and prefix constraints, twist vectors encoding multidegrees,
//! the `(r+1) × g` vanishing-order table, its `C(r+m, m) × g` tensor table
//! (rows indexed by size-`m` multisets), and the erasure mask that records
//! which entries survive a given twist vector. All arithmetic is checked
//! 64-bit; overflow is a hard error, never wraparound.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// Exact binomial coefficient `C(n, k)` in checked 64-bit arithmetic.
///
/// Returns 0 when `k < 0` or `k > n`. Panics on overflow.
pub fn binom(n: i64, k: i64) -> i64 {
    if k < 0 || k > n || n < 0 {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: i64 = 1;
    for i in 0..k {
        acc = acc
            .checked_mul(n - i)
            .expect("binomial coefficient overflows i64");
        acc /= i + 1;
    }
    acc
}

// ─────────────────────────────────────────────────────────────────────────
// Case parameters
// ─────────────────────────────────────────────────────────────────────────

/// The numeric parameters of one case: genus `g`, rank `r`, degree `d`, and
/// multiplication power `m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CaseParams {
    pub g: i64,
    pub r: i64,
    pub d: i64,
    pub m: i64,
}

impl CaseParams {
    pub fn new(g: i64, r: i64, d: i64, m: i64) -> Result<Self> {
        if g < 1 || r < 3 || d < 1 || m < 2 {
            return Err(Error::OutOfScope(format!(
                "need g >= 1, r >= 3, d >= 1, m >= 2; got (g, r, d, m) = ({g}, {r}, {d}, {m})"
            )));
        }
        Ok(CaseParams { g, r, d, m })
    }

    /// Brill–Noether number `ρ = g − (r+1)(r+g−d)`.
    pub fn rho(&self) -> i64 {
        self.g - (self.r + 1) * (self.r + self.g - self.d)
    }

    /// Dimension `C(r+m, m)` of the source of the multiplication map.
    pub fn domain_dim(&self) -> i64 {
        binom(self.r + self.m, self.m)
    }

    /// Dimension `md + 1 − g` of the target of the multiplication map.
    pub fn codomain_dim(&self) -> i64 {
        self.m * self.d + 1 - self.g
    }

    /// The rank the Maximal Rank Conjecture predicts:
    /// `min(C(r+m, m), md + 1 − g)`.
    pub fn target_rank(&self) -> i64 {
        self.domain_dim().min(self.codomain_dim())
    }

    /// True when `C(r+m, m) <= md + 1 − g` (full rank means injective).
    pub fn injective_range(&self) -> bool {
        self.domain_dim() <= self.codomain_dim()
    }

    /// True when `C(r+m, m) >= md + 1 − g` (full rank means surjective).
    pub fn surjective_range(&self) -> bool {
        self.domain_dim() >= self.codomain_dim()
    }
}

impl fmt::Display for CaseParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(g, r, d, m) = ({}, {}, {}, {})",
            self.g, self.r, self.d, self.m
        )
    }
}

// ─────────────────────────────────────────────────────────────────────────
// Sequences
// ─────────────────────────────────────────────────────────────────────────

/// A validated length-`g` sequence over `[0, r]` with an optional shift `a`.
///
/// Validity (relative to a degree `d`) requires every integer in `[0, r]`
/// to occur at least `a + r + g − d` times, and the prefix condition: for
/// each position `i`, no integer smaller than `δ_i` occurs among
/// `δ_1, …, δ_i` strictly fewer times than `δ_i` does.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrdSequence {
    entries: Vec<i64>,
    shift: i64,
    r: i64,
}

impl GrdSequence {
    pub fn g(&self) -> usize {
        self.entries.len()
    }

    pub fn r(&self) -> i64 {
        self.r
    }

    pub fn shift(&self) -> i64 {
        self.shift
    }

    pub fn entries(&self) -> &[i64] {
        &self.entries
    }

    /// Number of occurrences of `value` in the sequence.
    pub fn count(&self, value: i64) -> usize {
        self.entries.iter().filter(|&&x| x == value).count()
    }
}

/// Validate `entries` as a (shifted) sequence for the case `(g, r, d)`.
///
/// Reports the first violated constraint: an out-of-range entry, an
/// occurrence deficit, or a prefix violation.
pub fn validate_sequence(
    entries: &[i64],
    g: usize,
    r: i64,
    d: i64,
    shift: i64,
) -> Result<GrdSequence> {
    if entries.len() != g {
        return Err(Error::LengthMismatch {
            expected: g,
            got: entries.len(),
        });
    }
    for (pos, &v) in entries.iter().enumerate() {
        if v < 0 || v > r {
            return Err(Error::EntryOutOfRange {
                position: pos + 1,
                value: v,
                r,
            });
        }
    }
    let required = shift + r + g as i64 - d;
    if required > 0 {
        for v in 0..=r {
            let count = entries.iter().filter(|&&x| x == v).count();
            if (count as i64) < required {
                return Err(Error::OccurrenceDeficit {
                    value: v,
                    count,
                    required,
                });
            }
        }
    }
    // Prefix condition: scan left to right keeping running occurrence counts.
    let mut counts = vec![0usize; (r + 1) as usize];
    for (pos, &v) in entries.iter().enumerate() {
        counts[v as usize] += 1;
        for smaller in 0..v {
            if counts[smaller as usize] < counts[v as usize] {
                return Err(Error::PrefixViolation {
                    position: pos + 1,
                    smaller,
                    value: v,
                });
            }
        }
    }
    Ok(GrdSequence {
        entries: entries.to_vec(),
        shift,
        r,
    })
}

/// True when the sequence can absorb extra trailing entries that cycle
/// through `0, …, r`: the value 0 must occur at most one time more than
/// `r` does.
pub fn is_extendable(seq: &GrdSequence) -> bool {
    seq.count(0) <= seq.count(seq.r()) + 1
}

/// Default sequence for a case when none is given: a block of each value
/// `0..=r` long enough to meet the occurrence requirement, then the
/// `0..r` cycle for the remaining entries. Fails when the required blocks
/// do not fit in `g` entries (negative Brill–Noether number).
pub fn default_sequence(g: i64, r: i64, d: i64, shift: i64) -> Result<Vec<i64>> {
    if g < 1 || r < 1 {
        return Err(Error::OutOfScope(format!(
            "need g >= 1 and r >= 1, got g = {g}, r = {r}"
        )));
    }
    let ell = (shift + r + g - d).max(0);
    if (r + 1) * ell > g {
        return Err(Error::OutOfScope(format!(
            "no default sequence: {ell} occurrences of each value 0..={r} \
             do not fit in {g} entries"
        )));
    }
    let mut delta = Vec::with_capacity(g as usize);
    for value in 0..=r {
        for _ in 0..ell {
            delta.push(value);
        }
    }
    let mut k = 0;
    while delta.len() < g as usize {
        delta.push(k % (r + 1));
        k += 1;
    }
    Ok(delta)
}

// ─────────────────────────────────────────────────────────────────────────
// Twist vectors and multidegrees
// ─────────────────────────────────────────────────────────────────────────

/// A twist vector `w = (c_2, …, c_g)` together with the total degree it
/// distributes. Entries are unrestricted integers: negative values and
/// values beyond the total degree are intentionally allowed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwistVector {
    entries: Vec<i64>,
    total_degree: i64,
}

impl TwistVector {
    pub fn new(entries: Vec<i64>, total_degree: i64) -> Self {
        TwistVector {
            entries,
            total_degree,
        }
    }

    pub fn entries(&self) -> &[i64] {
        &self.entries
    }

    pub fn total_degree(&self) -> i64 {
        self.total_degree
    }

    /// The component degrees `(c_2, c_3 − c_2, …, d′ − c_g)`; they sum to
    /// the total degree.
    pub fn multidegree(&self) -> Vec<i64> {
        multidegree(&self.entries, self.total_degree)
    }
}

/// Component degrees `(c_2, c_3 − c_2, …, d′ − c_g)` of the twist vector
/// `w` at total degree `d′`. The result has `g = w.len() + 1` entries and
/// sums to `d′`.
pub fn multidegree(w: &[i64], d_prime: i64) -> Vec<i64> {
    let mut out = Vec::with_capacity(w.len() + 1);
    let mut prev = 0;
    for &c in w {
        out.push(c - prev);
        prev = c;
    }
    out.push(d_prime - prev);
    out
}

/// Gap condition making erasure patterns automatic: every internal step
/// `c_{i+1} − c_i` is at least `m`. The first entry is unconstrained, so a
/// vector with at most one entry always qualifies.
pub fn is_unimaginative(w: &[i64], m: i64) -> bool {
    w.windows(2).all(|p| p[1] - p[0] >= m)
}

// ─────────────────────────────────────────────────────────────────────────
// Erasure pattern of a pair of twist vectors
// ─────────────────────────────────────────────────────────────────────────

/// Per-column survival bits of `w′` against `w` (both of length `g − 1`).
///
/// Bit `i` (1-based, `i = 1, …, g`) is set exactly when the suffix sum
/// `Σ_{j>i} (c′_j − c_j)` attains the minimum over all positions; the empty
/// suffix at `i = g` counts as 0. At least one bit is always set.
pub fn epsilon(w_prime: &[i64], w: &[i64]) -> Vec<bool> {
    assert_eq!(w_prime.len(), w.len(), "twist vectors must have equal length");
    let g = w.len() + 1;
    // suffix[c] = Σ_{k >= c} (w′[k] − w[k]); suffix[g−1] = 0 (empty).
    let mut suffix = vec![0i128; g];
    for c in (0..g - 1).rev() {
        suffix[c] = suffix[c + 1] + (w_prime[c] as i128 - w[c] as i128);
    }
    let min = *suffix.iter().min().expect("g >= 1");
    suffix.iter().map(|&s| s == min).collect()
}

/// Shortcut form of [`epsilon`] valid when the signs of `c′_i − c_i` are
/// weakly decreasing (nonnegative entries before nonpositive ones).
///
/// Bit `i` is then set exactly when `c′_i ≥ c_i` and `c′_{i+1} ≤ c_{i+1}`,
/// ignoring the missing inequality at each boundary. Agrees with
/// [`epsilon`] on its whole precondition domain.
pub fn epsilon_fast(w_prime: &[i64], w: &[i64]) -> Result<Vec<bool>> {
    assert_eq!(w_prime.len(), w.len(), "twist vectors must have equal length");
    let g = w.len() + 1;
    let sign = |k: usize| (w_prime[k] - w[k]).signum();
    for k in 1..w.len() {
        if sign(k) > sign(k - 1) {
            return Err(Error::PreconditionViolated { index: k + 2 });
        }
    }
    // Column c (0-based) corresponds to i = c + 1; the left inequality
    // involves entry index c − 1 and the right one entry index c.
    Ok((0..g)
        .map(|c| {
            let left = c == 0 || w_prime[c - 1] >= w[c - 1];
            let right = c == g - 1 || w_prime[c] <= w[c];
            left && right
        })
        .collect())
}

/// True when the difference vector `w′ − w` admits a pivot: nonnegative
/// entries first, nonpositive entries after. Equivalently, no strictly
/// positive difference occurs after a strictly negative one.
pub fn is_steady_pair(w_prime: &[i64], w: &[i64]) -> bool {
    assert_eq!(w_prime.len(), w.len(), "twist vectors must have equal length");
    let mut seen_negative = false;
    for (&cp, &c) in w_prime.iter().zip(w) {
        if cp < c {
            seen_negative = true;
        } else if cp > c && seen_negative {
            return false;
        }
    }
    true
}

// ─────────────────────────────────────────────────────────────────────────
// Vanishing table
// ─────────────────────────────────────────────────────────────────────────

/// The `(r+1) × g` table of vanishing-order pairs `(a^i_j, b^i_j)` built
/// from a sequence and a degree `d`.
///
/// Row `j` starts with `a^1_j = shift + j`; in column `i`,
/// `b^i_j = d − a^i_j` when `j = δ_i` and `d − 1 − a^i_j` otherwise, and
/// the next column starts at `a^{i+1}_j = d − b^i_j`. Within each column
/// the `a`-values are strictly increasing in `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VanishingTable {
    seq: GrdSequence,
    d: i64,
    rows: Vec<Vec<(i64, i64)>>,
}

/// Build the vanishing table of `seq` at degree `d`.
pub fn build_vanishing_table(seq: &GrdSequence, d: i64) -> VanishingTable {
    let g = seq.g();
    let r = seq.r();
    let mut rows = Vec::with_capacity((r + 1) as usize);
    for j in 0..=r {
        let mut row = Vec::with_capacity(g);
        let mut a = seq.shift() + j;
        for i in 0..g {
            let b = if seq.entries()[i] == j { d - a } else { d - 1 - a };
            row.push((a, b));
            a = d - b;
        }
        rows.push(row);
    }
    let table = VanishingTable {
        seq: seq.clone(),
        d,
        rows,
    };
    debug_assert!(table.columns_strictly_increasing());
    table
}

impl VanishingTable {
    pub fn g(&self) -> usize {
        self.seq.g()
    }

    pub fn r(&self) -> i64 {
        self.seq.r()
    }

    pub fn d(&self) -> i64 {
        self.d
    }

    pub fn seq(&self) -> &GrdSequence {
        &self.seq
    }

    /// The pair `(a^i_j, b^i_j)` at row `j` and 0-based column `col`.
    pub fn pair(&self, j: usize, col: usize) -> (i64, i64) {
        self.rows[j][col]
    }

    fn columns_strictly_increasing(&self) -> bool {
        (0..self.g()).all(|col| {
            self.rows
                .windows(2)
                .all(|pair| pair[0][col].0 < pair[1][col].0)
        })
    }
}

// ─────────────────────────────────────────────────────────────────────────
// Row indices and the tensor table
// ─────────────────────────────────────────────────────────────────────────

/// A sorted size-`m` multiset `(j_1 ≤ … ≤ j_m)` of integers in `[0, r]`,
/// naming one row of a tensor table. The derived order is lexicographic.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RowIndex(Vec<i64>);

impl RowIndex {
    /// Canonicalize `entries` into sorted order.
    pub fn new(mut entries: Vec<i64>) -> Self {
        entries.sort_unstable();
        RowIndex(entries)
    }

    /// The row `(j, j, …, j)` with `m` copies.
    pub fn diagonal(j: i64, m: usize) -> Self {
        RowIndex(vec![j; m])
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of entries equal to `j`.
    pub fn multiplicity(&self, j: i64) -> usize {
        self.0.iter().filter(|&&x| x == j).count()
    }
}

impl fmt::Display for RowIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, v) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// All size-`m` multisets over `[0, r]` in lexicographic order; there are
/// `C(r+m, m)` of them.
pub fn row_indices(r: i64, m: usize) -> Vec<RowIndex> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(m);
    fn rec(r: i64, m: usize, lo: i64, current: &mut Vec<i64>, out: &mut Vec<RowIndex>) {
        if current.len() == m {
            out.push(RowIndex(current.clone()));
            return;
        }
        for j in lo..=r {
            current.push(j);
            rec(r, m, j, current, out);
            current.pop();
        }
    }
    rec(r, m, 0, &mut current, &mut out);
    debug_assert_eq!(out.len() as i64, binom(r + m as i64, m as i64));
    out
}

/// The `C(r+m, m) × g` table whose row `J = (j_1, …, j_m)` is the entrywise
/// sum of rows `j_1, …, j_m` of a vanishing table. Rows are stored in
/// lexicographic [`RowIndex`] order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TensorTable {
    vtable: VanishingTable,
    m: i64,
    labels: Vec<RowIndex>,
    entries: Vec<Vec<(i64, i64)>>,
}

/// Build the `m`-fold tensor table over `vtable`.
pub fn build_tensor_table(vtable: &VanishingTable, m: i64) -> TensorTable {
    assert!(m >= 2, "tensor table needs m >= 2");
    let g = vtable.g();
    let labels = row_indices(vtable.r(), m as usize);
    let entries: Vec<Vec<(i64, i64)>> = labels
        .iter()
        .map(|label| {
            (0..g)
                .map(|col| {
                    let mut a = 0i64;
                    let mut b = 0i64;
                    for &j in label.entries() {
                        let (aj, bj) = vtable.pair(j as usize, col);
                        a = a.checked_add(aj).expect("tensor entry overflows i64");
                        b = b.checked_add(bj).expect("tensor entry overflows i64");
                    }
                    (a, b)
                })
                .collect()
        })
        .collect();
    let table = TensorTable {
        vtable: vtable.clone(),
        m,
        labels,
        entries,
    };
    debug_assert!(table.sum_invariant_holds());
    table
}

impl TensorTable {
    pub fn g(&self) -> usize {
        self.vtable.g()
    }

    pub fn r(&self) -> i64 {
        self.vtable.r()
    }

    pub fn d(&self) -> i64 {
        self.vtable.d()
    }

    pub fn m(&self) -> i64 {
        self.m
    }

    /// Total degree `m · d` of the tensor rows.
    pub fn md(&self) -> i64 {
        self.m * self.vtable.d()
    }

    pub fn seq(&self) -> &GrdSequence {
        &self.vtable.seq
    }

    pub fn vanishing_table(&self) -> &VanishingTable {
        &self.vtable
    }

    pub fn num_rows(&self) -> usize {
        self.labels.len()
    }

    /// Row labels in storage (lexicographic) order.
    pub fn labels(&self) -> &[RowIndex] {
        &self.labels
    }

    /// Storage position of `label`, if it belongs to this table.
    pub fn row_position(&self, label: &RowIndex) -> Option<usize> {
        self.labels.binary_search(label).ok()
    }

    /// The pair `(a^i_J, b^i_J)` at storage row `row` and 0-based column.
    pub fn pair(&self, row: usize, col: usize) -> (i64, i64) {
        self.entries[row][col]
    }

    pub fn a(&self, row: usize, col: usize) -> i64 {
        self.entries[row][col].0
    }

    pub fn b(&self, row: usize, col: usize) -> i64 {
        self.entries[row][col].1
    }

    /// The comparison vector `(a^2_J, …, a^g_J)` of a row: its `a`-values
    /// from the second column on, read as a twist vector.
    pub fn row_twist(&self, row: usize) -> Vec<i64> {
        (1..self.g()).map(|col| self.a(row, col)).collect()
    }

    fn sum_invariant_holds(&self) -> bool {
        let md = self.md();
        self.labels.iter().enumerate().all(|(row, label)| {
            (0..self.g()).all(|col| {
                let (a, b) = self.pair(row, col);
                let mult = label.multiplicity(self.seq().entries()[col]) as i64;
                a + b == md - self.m + mult
            })
        })
    }
}

/// True when every row's comparison vector forms a steady pair with `w`.
pub fn is_steady_table(ttable: &TensorTable, w: &[i64]) -> bool {
    (0..ttable.num_rows()).all(|row| is_steady_pair(&ttable.row_twist(row), w))
}

// ─────────────────────────────────────────────────────────────────────────
// Erasure masks
// ─────────────────────────────────────────────────────────────────────────

/// Presence matrix over a tensor table: `present(row, col)` is true when
/// the entry survives erasure against a twist vector. Every row keeps at
/// least one present column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ErasureMask {
    present: Vec<Vec<bool>>,
}

/// Compute the erasure mask of `ttable` against the twist vector `w`
/// (length `g − 1`): row `J`'s bits are the survival bits of its
/// comparison vector against `w`.
pub fn erase(ttable: &TensorTable, w: &[i64]) -> ErasureMask {
    assert_eq!(
        w.len() + 1,
        ttable.g(),
        "twist vector length must be g - 1"
    );
    let present: Vec<Vec<bool>> = (0..ttable.num_rows())
        .map(|row| epsilon(&ttable.row_twist(row), w))
        .collect();
    debug_assert!(present.iter().all(|row| row.iter().any(|&p| p)));
    ErasureMask { present }
}

impl ErasureMask {
    pub fn num_rows(&self) -> usize {
        self.present.len()
    }

    pub fn num_cols(&self) -> usize {
        self.present.first().map_or(0, Vec::len)
    }

    pub fn present(&self, row: usize, col: usize) -> bool {
        self.present[row][col]
    }

    /// Presence bits of one row.
    pub fn row(&self, row: usize) -> &[bool] {
        &self.present[row]
    }
}

// ─────────────────────────────────────────────────────────────────────────
// Shifts
// ─────────────────────────────────────────────────────────────────────────

/// Re-express `(seq, w)` at degree `d_new` with shift `a`: the sequence
/// keeps its entries but is revalidated as an `a`-shifted sequence for
/// `d_new`, and `w` gains `m·a` on every entry. The erasure mask of the
/// new pair equals the old one, so expungeability is preserved.
pub fn shift_pair(
    seq: &GrdSequence,
    w: &TwistVector,
    d: i64,
    m: i64,
    a: i64,
    d_new: i64,
) -> Result<(GrdSequence, TwistVector)> {
    if a < 0 || a > d_new - d {
        return Err(Error::ShiftOutOfRange {
            shift: a,
            max: d_new - d,
        });
    }
    let shifted = validate_sequence(seq.entries(), seq.g(), seq.r(), d_new, a)?;
    let entries = w.entries().iter().map(|&c| c + m * a).collect();
    Ok((shifted, TwistVector::new(entries, m * d_new)))
}

/// The defect `C(r+2, 2) − (2d + 1 − g)` between the two sides of the
/// `m = 2` rank bound. Positive in the surjective range, negative in the
/// injective range, zero exactly when both bounds agree.
pub fn m2_rank_gap(g: i64, r: i64, d: i64) -> i64 {
    let gap = binom(r + 2, 2) - (2 * d + 1 - g);
    let rho = g - (r + 1) * (r + g - d);
    assert_eq!(
        gap,
        binom(r, 2) - rho - (g + r - d) * (r - 1),
        "rank-gap identity must hold"
    );
    gap
}

// ─────────────────────────────────────────────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(entries: &[i64], g: usize, r: i64, d: i64) -> GrdSequence {
        validate_sequence(entries, g, r, d, 0).expect("valid sequence")
    }

    #[test]
    fn binom_small_values() {
        assert_eq!(binom(5, 2), 10);
        assert_eq!(binom(7, 3), 35);
        assert_eq!(binom(4, 0), 1);
        assert_eq!(binom(3, 5), 0);
        assert_eq!(binom(-1, 0), 0);
    }

    #[test]
    fn validate_accepts_known_sequences() {
        assert!(validate_sequence(&[0, 1, 2, 3], 4, 3, 6, 0).is_ok());
        assert!(validate_sequence(&[0, 0, 1, 1, 2, 2, 3, 3, 4, 4], 10, 4, 12, 0).is_ok());
        assert!(validate_sequence(&[0, 1, 2, 3, 0], 5, 3, 7, 0).is_ok());
    }

    #[test]
    fn validate_rejects_prefix_violation() {
        let err = validate_sequence(&[1, 0, 2, 3], 4, 3, 6, 0).unwrap_err();
        match err {
            Error::PrefixViolation {
                position, smaller, ..
            } => {
                assert_eq!(position, 1);
                assert_eq!(smaller, 0);
            }
            other => panic!("expected prefix violation, got {other}"),
        }
    }

    #[test]
    fn validate_rejects_occurrence_deficit() {
        // (g, r, d) = (4, 3, 6) requires every value once; 3 is missing.
        let err = validate_sequence(&[0, 1, 2, 2], 4, 3, 6, 0).unwrap_err();
        assert!(matches!(err, Error::OccurrenceDeficit { value: 3, .. }));
    }

    #[test]
    fn extendability_counts_zeros_against_top_value() {
        assert!(is_extendable(&seq(&[0, 1, 2, 3, 0], 5, 3, 7)));
        assert!(is_extendable(&seq(&[0, 1, 2, 3], 4, 3, 6)));
        // 0 occurs three times, 3 only once (degree chosen so that no
        // occurrence minimum applies).
        assert!(!is_extendable(&seq(&[0, 0, 0, 1, 2, 3, 1, 2], 8, 3, 11)));
    }

    #[test]
    fn vanishing_table_first_columns() {
        let t = build_vanishing_table(&seq(&[0, 1, 2, 3], 4, 3, 6), 6);
        let col = |i: usize| (0..4).map(|j| t.pair(j, i)).collect::<Vec<_>>();
        assert_eq!(col(0), vec![(0, 6), (1, 4), (2, 3), (3, 2)]);
        assert_eq!(col(1), vec![(0, 5), (2, 4), (3, 2), (4, 1)]);
    }

    #[test]
    fn vanishing_table_last_column() {
        let t = build_vanishing_table(&seq(&[0, 1, 2, 3, 0], 5, 3, 7), 7);
        let col: Vec<_> = (0..4).map(|j| t.pair(j, 4)).collect();
        assert_eq!(col, vec![(3, 4), (4, 2), (5, 1), (6, 0)]);
    }

    #[test]
    fn vanishing_table_with_shift() {
        let s = validate_sequence(&[0, 1, 2, 3], 4, 3, 7, 1).expect("shifted sequence");
        let t = build_vanishing_table(&s, 7);
        let col: Vec<_> = (0..4).map(|j| t.pair(j, 0)).collect();
        assert_eq!(col, vec![(1, 6), (2, 4), (3, 3), (4, 2)]);
    }

    #[test]
    fn tensor_rows_are_sums() {
        let vt = build_vanishing_table(&seq(&[0, 1, 2, 3], 4, 3, 6), 6);
        let t = build_tensor_table(&vt, 2);
        let row = t.row_position(&RowIndex::new(vec![0, 1])).unwrap();
        let pairs: Vec<_> = (0..4).map(|i| t.pair(row, i)).collect();
        assert_eq!(pairs, vec![(1, 10), (2, 9), (3, 7), (5, 5)]);
        let row = t.row_position(&RowIndex::new(vec![3, 3])).unwrap();
        let pairs: Vec<_> = (0..4).map(|i| t.pair(row, i)).collect();
        assert_eq!(pairs, vec![(6, 4), (8, 2), (10, 0), (12, 0)]);
    }

    #[test]
    fn diagonal_row_reaches_full_degree() {
        let vt = build_vanishing_table(&seq(&[0, 1, 2, 3], 4, 3, 6), 6);
        let t = build_tensor_table(&vt, 2);
        for (col, &dv) in t.seq().entries().to_vec().iter().enumerate() {
            let row = t.row_position(&RowIndex::diagonal(dv, 2)).unwrap();
            let (a, b) = t.pair(row, col);
            assert_eq!(a + b, t.md());
        }
    }

    #[test]
    fn row_index_order_is_lexicographic() {
        let rows = row_indices(3, 2);
        assert_eq!(rows.len(), 10);
        assert_eq!(rows[0], RowIndex::new(vec![0, 0]));
        assert_eq!(rows[1], RowIndex::new(vec![0, 1]));
        assert_eq!(rows[4], RowIndex::new(vec![1, 1]));
        assert!(rows.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn epsilon_matches_hand_computations() {
        assert_eq!(
            epsilon(&[0, 2, 4], &[2, 6, 8]),
            vec![true, false, false, false]
        );
        assert_eq!(
            epsilon(&[7, 9, 10], &[2, 6, 8]),
            vec![false, false, false, true]
        );
        assert_eq!(epsilon(&[5, 9], &[5, 9]), vec![true, true, true]);
    }

    #[test]
    fn epsilon_fast_agrees_on_examples() {
        assert_eq!(
            epsilon_fast(&[0, 2, 4], &[2, 6, 8]).unwrap(),
            epsilon(&[0, 2, 4], &[2, 6, 8])
        );
        assert_eq!(
            epsilon_fast(&[5, 3], &[3, 3]).unwrap(),
            vec![false, true, true]
        );
        assert_eq!(
            epsilon_fast(&[4, 7], &[4, 7]).unwrap(),
            vec![true, true, true]
        );
    }

    #[test]
    fn epsilon_fast_rejects_sign_increase() {
        // Differences (−1, 2): a negative sign followed by a positive one.
        assert!(matches!(
            epsilon_fast(&[2, 9], &[3, 7]),
            Err(Error::PreconditionViolated { .. })
        ));
    }

    #[test]
    fn steadiness_examples() {
        assert!(is_steady_pair(&[0, 2, 4], &[2, 6, 8])); // diffs all nonpositive
        assert!(is_steady_pair(&[6, 3, 1], &[3, 3, 3])); // signs decrease
        assert!(!is_steady_pair(&[2, 9], &[3, 7])); // negative before positive
        assert!(is_steady_pair(&[4, 3, 5, 2], &[3, 3, 3, 3])); // +,0,+,− pivots late
    }

    #[test]
    fn steady_table_for_known_case() {
        let vt = build_vanishing_table(&seq(&[0, 1, 2, 3], 4, 3, 6), 6);
        let t = build_tensor_table(&vt, 2);
        assert!(is_steady_table(&t, &[2, 6, 8]));
    }

    #[test]
    fn unimaginative_gap_check() {
        assert!(is_unimaginative(&[2, 6, 8], 2));
        assert!(!is_unimaginative(
            &[3, 5, 7, 12, 16, 19, 22, 24, 28, 31, 35, 37, 41, 44, 47],
            3
        ));
        assert!(is_unimaginative(&[7], 5));
        assert!(is_unimaginative(&[], 2));
    }

    #[test]
    fn erase_keeps_every_row_alive() {
        let vt = build_vanishing_table(&seq(&[0, 1, 2, 3], 4, 3, 6), 6);
        let t = build_tensor_table(&vt, 2);
        let mask = erase(&t, &[2, 6, 8]);
        for row in 0..t.num_rows() {
            assert!((0..t.g()).any(|col| mask.present(row, col)));
        }
        // Row (0,0) has comparison vector (0,2,4): survives only in column 1.
        let row = t.row_position(&RowIndex::new(vec![0, 0])).unwrap();
        assert_eq!(mask.row(row), &[true, false, false, false]);
    }

    #[test]
    fn multidegree_sums_to_total() {
        assert_eq!(multidegree(&[2, 6, 8], 12), vec![2, 4, 2, 4]);
        assert_eq!(
            multidegree(&[4, 7, 10, 13, 17, 21], 27),
            vec![4, 3, 3, 3, 4, 4, 6]
        );
        assert_eq!(multidegree(&[0, 0, 0], 9), vec![0, 0, 0, 9]);
        for (w, dp) in [(vec![2, 6, 8], 12), (vec![-3, 1, 40], 11)] {
            assert_eq!(multidegree(&w, dp).iter().sum::<i64>(), dp);
        }
    }

    #[test]
    fn shift_preserves_erasure_mask() {
        let s = seq(&[0, 1, 2, 3], 4, 3, 6);
        let w = TwistVector::new(vec![2, 6, 8], 12);
        let (s2, w2) = shift_pair(&s, &w, 6, 2, 1, 7).expect("shift fits");
        assert_eq!(w2.entries(), &[4, 8, 10]);
        assert_eq!(s2.shift(), 1);
        let before = erase(&build_tensor_table(&build_vanishing_table(&s, 6), 2), w.entries());
        let after = erase(
            &build_tensor_table(&build_vanishing_table(&s2, 7), 2),
            w2.entries(),
        );
        assert_eq!(before, after);
    }

    #[test]
    fn shift_zero_is_identity() {
        let s = seq(&[0, 1, 2, 3], 4, 3, 6);
        let w = TwistVector::new(vec![2, 6, 8], 12);
        let (s2, w2) = shift_pair(&s, &w, 6, 2, 0, 6).expect("identity shift");
        assert_eq!(s2, s);
        assert_eq!(w2, w);
    }

    #[test]
    fn shift_out_of_range_is_rejected() {
        let s = seq(&[0, 1, 2, 3], 4, 3, 6);
        let w = TwistVector::new(vec![2, 6, 8], 12);
        assert!(matches!(
            shift_pair(&s, &w, 6, 2, 2, 7),
            Err(Error::ShiftOutOfRange { .. })
        ));
    }

    #[test]
    fn rank_gap_values() {
        assert_eq!(m2_rank_gap(4, 3, 6), 1);
        assert_eq!(m2_rank_gap(5, 3, 7), 0);
        assert_eq!(m2_rank_gap(10, 4, 12), 0);
    }

    #[test]
    fn case_params_ranges() {
        let c = CaseParams::new(4, 3, 6, 2).unwrap();
        assert_eq!(c.rho(), 0);
        assert_eq!(c.domain_dim(), 10);
        assert_eq!(c.codomain_dim(), 9);
        assert_eq!(c.target_rank(), 9);
        assert!(c.surjective_range() && !c.injective_range());
        let c = CaseParams::new(7, 3, 9, 3).unwrap();
        assert_eq!(c.domain_dim(), 20);
        assert_eq!(c.codomain_dim(), 21);
        assert!(c.injective_range());
    }
}
