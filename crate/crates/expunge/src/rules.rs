//! The row-elimination rules, replayable certificates, and the verifier.
//!
//! A certificate fixes a case, a sequence, a twist vector, and a set of
//! `N` selected rows of the erased tensor table, followed by an ordered
//! list of rule applications that must eliminate every selected row. Each
//! rule's preconditions are checked verbatim against the rows still
//! remaining and the erasure mask; verification is deterministic and
//! failures are reported, never thrown.
//!
//! Throughout, a row "appears in column i" when it is still remaining and
//! its entry in column `i` is present (not erased).

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::tables::{
    build_tensor_table, build_vanishing_table, erase, is_steady_table, validate_sequence,
    CaseParams, ErasureMask, RowIndex, TensorTable,
};

/// Current certificate file format version.
pub const FORMAT_VERSION: &str = "1";

/// The six row-elimination rules that can appear as certificate steps.
/// (The initial selection of `N` rows is stored separately on the
/// certificate, not as a step.)
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Rule {
    /// Drop the unique appearing row whose `a`-value in the column is
    /// strictly minimal among all appearing rows.
    II,
    /// Drop the unique appearing row whose `b`-value in the column is
    /// strictly minimal among all appearing rows.
    III,
    /// When at most two rows appear in the column, drop them all.
    IV,
    /// For a value `j ≠ δ_i` and a threshold `n`: when every appearing row
    /// has at least `n` entries equal to `j` and exactly one has exactly
    /// `n`, drop that row.
    V,
    /// Drop a pair of rows that tie for the strict minimum of `a` in
    /// column `i` and of `b` in column `i+1`, subject to a multiplicity
    /// and offset condition at a witness column.
    VI,
    /// (`m = 2` only.) Drop a family of `n` straddling rows with equal
    /// `a`-values across `n` consecutive equal-valued columns, together
    /// with the diagonal row, when nothing else appears there.
    VII,
}

impl Rule {
    pub fn name(&self) -> &'static str {
        match self {
            Rule::II => "II",
            Rule::III => "III",
            Rule::IV => "IV",
            Rule::V => "V",
            Rule::VI => "VI",
            Rule::VII => "VII",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Rule-specific parameters carried by a step.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StepParams {
    /// Rule V: the value `j` counted and the exact multiplicity `n` of the
    /// dropped row.
    V { j: i64, n: i64 },
    /// Rule VI: the witness column `i′ ∈ {i, i+1}` (1-based).
    Vi { witness_column: usize },
    /// Rule VII: the number `n ≥ 2` of straddling rows and columns.
    Vii { n: usize },
}

/// One elimination step: the rule, the 1-based column it acts on, the rows
/// it drops, and any rule-specific parameters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleStep {
    pub rule: Rule,
    pub column: usize,
    pub rows: Vec<RowIndex>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub params: Option<StepParams>,
}

impl RuleStep {
    pub fn new(rule: Rule, column: usize, rows: Vec<RowIndex>) -> Self {
        RuleStep {
            rule,
            column,
            rows,
            params: None,
        }
    }

    pub fn with_params(rule: Rule, column: usize, rows: Vec<RowIndex>, params: StepParams) -> Self {
        RuleStep {
            rule,
            column,
            rows,
            params: Some(params),
        }
    }
}

impl fmt::Display for RuleStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rule {} at column {} drops", self.rule, self.column)?;
        for row in &self.rows {
            write!(f, " {row}")?;
        }
        match &self.params {
            Some(StepParams::V { j, n }) => write!(f, " (j = {j}, n = {n})"),
            Some(StepParams::Vi { witness_column }) => write!(f, " (witness column {witness_column})"),
            Some(StepParams::Vii { n }) => write!(f, " (n = {n})"),
            None => Ok(()),
        }
    }
}

/// A complete, replayable elimination certificate for one case.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub case: CaseParams,
    pub delta: Vec<i64>,
    pub shift: i64,
    pub w: Vec<i64>,
    /// The `N` rows kept by the initial selection; all other rows are
    /// discarded up front.
    pub selected: Vec<RowIndex>,
    pub steps: Vec<RuleStep>,
    #[serde(rename = "format-version")]
    pub format_version: String,
}

impl Certificate {
    pub fn new(
        case: CaseParams,
        delta: Vec<i64>,
        shift: i64,
        w: Vec<i64>,
        selected: Vec<RowIndex>,
        steps: Vec<RuleStep>,
    ) -> Self {
        Certificate {
            case,
            delta,
            shift,
            w,
            selected,
            steps,
            format_version: FORMAT_VERSION.to_string(),
        }
    }

    /// The number of rows the certificate eliminates.
    pub fn n(&self) -> usize {
        self.selected.len()
    }

    /// Canonical JSON serialization: sorted keys, two-space indentation,
    /// trailing newline. Byte-stable across serialize → parse → serialize.
    pub fn to_json(&self) -> Result<String> {
        // Routing through `serde_json::Value` sorts object keys (its map
        // is a BTreeMap), which struct serialization alone would not do.
        let value = serde_json::to_value(self)?;
        let mut out = serde_json::to_string_pretty(&value)?;
        out.push('\n');
        Ok(out)
    }

    pub fn from_json(text: &str) -> Result<Certificate> {
        let cert: Certificate = serde_json::from_str(text)?;
        if cert.format_version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported format version {:?}",
                cert.format_version
            )));
        }
        Ok(cert)
    }
}

// ─────────────────────────────────────────────────────────────────────────
// Verifier state
// ─────────────────────────────────────────────────────────────────────────

/// Mutable replay state: the rows still remaining, against a fixed table
/// and mask.
#[derive(Clone)]
pub struct VerifierState<'a> {
    ttable: &'a TensorTable,
    mask: &'a ErasureMask,
    remaining: Vec<bool>,
    /// When set (the default), Rule VI requires its two rows themselves to
    /// appear in both of the columns it compares.
    pub strict_vi: bool,
}

impl<'a> VerifierState<'a> {
    /// Start a replay with exactly `selected` remaining.
    pub fn new(
        ttable: &'a TensorTable,
        mask: &'a ErasureMask,
        selected: &[RowIndex],
        strict_vi: bool,
    ) -> Result<Self> {
        let mut remaining = vec![false; ttable.num_rows()];
        for label in selected {
            let pos = ttable.row_position(label).ok_or_else(|| {
                Error::Format(format!("selected row {label} does not belong to the table"))
            })?;
            if remaining[pos] {
                return Err(Error::Format(format!("selected row {label} listed twice")));
            }
            remaining[pos] = true;
        }
        Ok(VerifierState {
            ttable,
            mask,
            remaining,
            strict_vi,
        })
    }

    pub fn table(&self) -> &TensorTable {
        self.ttable
    }

    pub fn mask(&self) -> &ErasureMask {
        self.mask
    }

    pub fn is_remaining(&self, row: usize) -> bool {
        self.remaining[row]
    }

    pub fn remaining_count(&self) -> usize {
        self.remaining.iter().filter(|&&x| x).count()
    }

    /// Storage positions of the remaining rows, ascending.
    pub fn remaining_rows(&self) -> Vec<usize> {
        (0..self.remaining.len())
            .filter(|&row| self.remaining[row])
            .collect()
    }

    /// Row labels of the remaining rows.
    pub fn remaining_labels(&self) -> Vec<RowIndex> {
        self.remaining_rows()
            .into_iter()
            .map(|row| self.ttable.labels()[row].clone())
            .collect()
    }

    /// True when `row` is remaining and present (not erased) in the
    /// 0-based column `col`.
    pub fn appears(&self, row: usize, col: usize) -> bool {
        self.remaining[row] && self.mask.present(row, col)
    }

    /// Storage positions of the rows appearing in 0-based column `col`.
    pub fn appearing_rows(&self, col: usize) -> Vec<usize> {
        (0..self.remaining.len())
            .filter(|&row| self.appears(row, col))
            .collect()
    }

    fn drop_rows(&mut self, rows: &[usize]) {
        for &row in rows {
            self.remaining[row] = false;
        }
    }
}

// ─────────────────────────────────────────────────────────────────────────
// Step checking
// ─────────────────────────────────────────────────────────────────────────

fn violation(step_index: usize, step: &RuleStep, reason: impl Into<String>) -> Error {
    Error::RuleViolation {
        step: step_index,
        rule: step.rule.name(),
        column: step.column,
        reason: reason.into(),
    }
}

/// Resolve the step's row labels to storage positions, requiring them to
/// be pairwise distinct and currently remaining.
fn resolve_rows(state: &VerifierState, step_index: usize, step: &RuleStep) -> Result<Vec<usize>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(step.rows.len());
    for label in &step.rows {
        let pos = state.ttable.row_position(label).ok_or_else(|| {
            Error::Format(format!("step {step_index}: row {label} does not belong to the table"))
        })?;
        if !seen.insert(pos) {
            return Err(Error::RuleArityMismatch {
                step: step_index,
                reason: format!("row {label} listed twice"),
            });
        }
        if !state.is_remaining(pos) {
            return Err(Error::RowAlreadyDropped {
                step: step_index,
                row: label.to_string(),
            });
        }
        out.push(pos);
    }
    Ok(out)
}

/// Check one step's preconditions against the current state. On success
/// the returned positions are exactly the rows to drop; the diagnostic of
/// the first failed condition is reported otherwise.
pub fn check_step(state: &VerifierState, step_index: usize, step: &RuleStep) -> Result<Vec<usize>> {
    let g = state.ttable.g();
    if step.column < 1 || step.column > g {
        return Err(violation(
            step_index,
            step,
            format!("column out of range (table has {g} columns)"),
        ));
    }
    if step.rows.is_empty() {
        return Err(Error::RuleArityMismatch {
            step: step_index,
            reason: "step drops no rows".into(),
        });
    }
    let rows = resolve_rows(state, step_index, step)?;
    let col = step.column - 1;
    match step.rule {
        Rule::II => check_extremal(state, step_index, step, &rows, col, false)?,
        Rule::III => check_extremal(state, step_index, step, &rows, col, true)?,
        Rule::IV => check_at_most_two(state, step_index, step, &rows, col)?,
        Rule::V => check_unique_multiplicity(state, step_index, step, &rows, col)?,
        Rule::VI => check_tied_pair(state, step_index, step, &rows, col)?,
        Rule::VII => check_straddling_family(state, step_index, step, &rows, col)?,
    }
    Ok(rows)
}

/// Rules II and III: the dropped row appears in the column and its
/// `a`-value (`b`-value when `use_b`) is strictly minimal among all
/// appearing rows.
fn check_extremal(
    state: &VerifierState,
    step_index: usize,
    step: &RuleStep,
    rows: &[usize],
    col: usize,
    use_b: bool,
) -> Result<()> {
    if rows.len() != 1 {
        return Err(Error::RuleArityMismatch {
            step: step_index,
            reason: format!("rule {} drops exactly one row", step.rule),
        });
    }
    let row = rows[0];
    if !state.appears(row, col) {
        return Err(violation(step_index, step, "row does not appear in the column"));
    }
    let value = |r: usize| {
        if use_b {
            state.ttable.b(r, col)
        } else {
            state.ttable.a(r, col)
        }
    };
    for other in state.appearing_rows(col) {
        if other != row && value(other) <= value(row) {
            return Err(violation(
                step_index,
                step,
                format!(
                    "not strictly minimal: row {} has {} = {} <= {}",
                    state.ttable.labels()[other],
                    if use_b { "b" } else { "a" },
                    value(other),
                    value(row),
                ),
            ));
        }
    }
    Ok(())
}

/// Rule IV: at most two rows appear in the column, and the step drops
/// exactly those.
fn check_at_most_two(
    state: &VerifierState,
    step_index: usize,
    step: &RuleStep,
    rows: &[usize],
    col: usize,
) -> Result<()> {
    let appearing = state.appearing_rows(col);
    if appearing.len() > 2 {
        return Err(violation(
            step_index,
            step,
            format!("{} rows appear in the column, more than two", appearing.len()),
        ));
    }
    let dropped: BTreeSet<usize> = rows.iter().copied().collect();
    let expected: BTreeSet<usize> = appearing.into_iter().collect();
    if dropped != expected {
        return Err(violation(
            step_index,
            step,
            "dropped rows must be exactly the rows appearing in the column",
        ));
    }
    Ok(())
}

/// Rule V: for a value `j ≠ δ_i` and `n ≥ 0`, every appearing row has at
/// least `n` entries equal to `j`, and the dropped row is the unique one
/// with exactly `n`.
fn check_unique_multiplicity(
    state: &VerifierState,
    step_index: usize,
    step: &RuleStep,
    rows: &[usize],
    col: usize,
) -> Result<()> {
    let Some(StepParams::V { j, n }) = step.params else {
        return Err(Error::RuleArityMismatch {
            step: step_index,
            reason: "rule V needs parameters j and n".into(),
        });
    };
    if rows.len() != 1 {
        return Err(Error::RuleArityMismatch {
            step: step_index,
            reason: "rule V drops exactly one row".into(),
        });
    }
    if n < 0 {
        return Err(violation(step_index, step, "n must be nonnegative"));
    }
    let delta_i = state.ttable.seq().entries()[col];
    if j == delta_i {
        return Err(violation(
            step_index,
            step,
            format!("j = {j} must differ from the column value {delta_i}"),
        ));
    }
    let row = rows[0];
    if !state.appears(row, col) {
        return Err(violation(step_index, step, "row does not appear in the column"));
    }
    let mut exact = Vec::new();
    for other in state.appearing_rows(col) {
        let mult = state.ttable.labels()[other].multiplicity(j) as i64;
        if mult < n {
            return Err(violation(
                step_index,
                step,
                format!(
                    "row {} has only {} entries equal to {}, fewer than n = {}",
                    state.ttable.labels()[other],
                    mult,
                    j,
                    n
                ),
            ));
        }
        if mult == n {
            exact.push(other);
        }
    }
    if exact != vec![row] {
        return Err(violation(
            step_index,
            step,
            format!(
                "the row with exactly n = {} entries equal to {} is not unique or not the dropped row",
                n, j
            ),
        ));
    }
    Ok(())
}

/// Rule VI: two rows tie for the strict minimum of `a` in column `i` and
/// of `b` in column `i+1`; at a witness column `i′ ∈ {i, i+1}`, all but
/// exactly two entries of each row equal `δ_{i′}`, and the rows' `a`-value
/// there avoids the diagonal row's `a`-value minus one.
fn check_tied_pair(
    state: &VerifierState,
    step_index: usize,
    step: &RuleStep,
    rows: &[usize],
    col: usize,
) -> Result<()> {
    let Some(StepParams::Vi { witness_column }) = step.params else {
        return Err(Error::RuleArityMismatch {
            step: step_index,
            reason: "rule VI needs a witness column".into(),
        });
    };
    if rows.len() != 2 {
        return Err(Error::RuleArityMismatch {
            step: step_index,
            reason: "rule VI drops exactly two rows".into(),
        });
    }
    let g = state.ttable.g();
    if step.column >= g {
        return Err(violation(
            step_index,
            step,
            "rule VI needs a successor column",
        ));
    }
    if witness_column != step.column && witness_column != step.column + 1 {
        return Err(violation(
            step_index,
            step,
            format!(
                "witness column {} must be {} or {}",
                witness_column,
                step.column,
                step.column + 1
            ),
        ));
    }
    let (r1, r2) = (rows[0], rows[1]);
    let table = state.ttable;

    // Tie for the strict minimum of a in column i.
    if state.strict_vi && !(state.appears(r1, col) && state.appears(r2, col)) {
        return Err(violation(
            step_index,
            step,
            "both rows must appear in the column",
        ));
    }
    if table.a(r1, col) != table.a(r2, col) {
        return Err(violation(step_index, step, "rows do not tie on a in the column"));
    }
    for other in state.appearing_rows(col) {
        if other != r1 && other != r2 && table.a(other, col) <= table.a(r1, col) {
            return Err(violation(
                step_index,
                step,
                format!(
                    "row {} has a = {} <= {} in the column",
                    table.labels()[other],
                    table.a(other, col),
                    table.a(r1, col)
                ),
            ));
        }
    }

    // Tie for the strict minimum of b in column i+1.
    let next = col + 1;
    if state.strict_vi && !(state.appears(r1, next) && state.appears(r2, next)) {
        return Err(violation(
            step_index,
            step,
            "both rows must appear in the successor column",
        ));
    }
    if table.b(r1, next) != table.b(r2, next) {
        return Err(violation(
            step_index,
            step,
            "rows do not tie on b in the successor column",
        ));
    }
    for other in state.appearing_rows(next) {
        if other != r1 && other != r2 && table.b(other, next) <= table.b(r1, next) {
            return Err(violation(
                step_index,
                step,
                format!(
                    "row {} has b = {} <= {} in the successor column",
                    table.labels()[other],
                    table.b(other, next),
                    table.b(r1, next)
                ),
            ));
        }
    }

    // Witness-column condition.
    let wcol = witness_column - 1;
    let delta_w = table.seq().entries()[wcol];
    let m = table.m() as usize;
    for &row in &[r1, r2] {
        let mult = table.labels()[row].multiplicity(delta_w);
        if mult != m - 2 {
            return Err(violation(
                step_index,
                step,
                format!(
                    "row {} has {} entries equal to {}, not exactly {}",
                    table.labels()[row],
                    mult,
                    delta_w,
                    m - 2
                ),
            ));
        }
    }
    let diagonal = RowIndex::diagonal(delta_w, m);
    let diag_pos = table
        .row_position(&diagonal)
        .expect("diagonal row exists in every table");
    if table.a(r1, wcol) == table.a(diag_pos, wcol) - 1 {
        return Err(violation(
            step_index,
            step,
            "a-value at the witness column is exactly one below the diagonal row's",
        ));
    }
    Ok(())
}

/// Rule VII (`m = 2` only): `n ≥ 2` rows straddling the column value, with
/// equal `a`-values, appearing in all of `n` consecutive columns of that
/// same value, where the only other row allowed to appear is the diagonal;
/// all of them (diagonal included, when still remaining) are dropped.
fn check_straddling_family(
    state: &VerifierState,
    step_index: usize,
    step: &RuleStep,
    rows: &[usize],
    col: usize,
) -> Result<()> {
    let table = state.ttable;
    if table.m() != 2 {
        return Err(Error::MNotTwo { m: table.m() });
    }
    let Some(StepParams::Vii { n }) = step.params else {
        return Err(Error::RuleArityMismatch {
            step: step_index,
            reason: "rule VII needs the family size n".into(),
        });
    };
    if n < 2 {
        return Err(violation(step_index, step, "n must be at least 2"));
    }
    let g = state.ttable.g();
    if col + n > g {
        return Err(violation(
            step_index,
            step,
            format!("columns {}..{} exceed the table", step.column, step.column + n - 1),
        ));
    }
    let delta_i = table.seq().entries()[col];
    for c in col..col + n {
        if table.seq().entries()[c] != delta_i {
            return Err(violation(
                step_index,
                step,
                format!("column {} does not carry the value {}", c + 1, delta_i),
            ));
        }
    }
    let diagonal = RowIndex::diagonal(delta_i, 2);
    let diag_pos = table
        .row_position(&diagonal)
        .expect("diagonal row exists in every table");

    // Partition the dropped rows into the straddling family and the
    // optional diagonal row.
    let mut family = Vec::new();
    let mut has_diagonal = false;
    for &row in rows {
        if row == diag_pos {
            has_diagonal = true;
        } else {
            family.push(row);
        }
    }
    if family.len() != n {
        return Err(Error::RuleArityMismatch {
            step: step_index,
            reason: format!("expected n = {} straddling rows, got {}", n, family.len()),
        });
    }
    if state.is_remaining(diag_pos) && !has_diagonal {
        return Err(violation(
            step_index,
            step,
            format!("the diagonal row {diagonal} is remaining and must be dropped too"),
        ));
    }

    for &row in &family {
        let label = table.labels()[row].entries();
        if !(label[0] < delta_i && delta_i < label[1]) {
            return Err(violation(
                step_index,
                step,
                format!(
                    "row {} does not straddle the value {}",
                    table.labels()[row],
                    delta_i
                ),
            ));
        }
    }
    let a0 = table.a(family[0], col);
    for &row in &family {
        if table.a(row, col) != a0 {
            return Err(violation(
                step_index,
                step,
                "straddling rows do not share one a-value",
            ));
        }
    }
    for c in col..col + n {
        for &row in &family {
            if !state.appears(row, c) {
                return Err(violation(
                    step_index,
                    step,
                    format!(
                        "row {} does not appear in column {}",
                        table.labels()[row],
                        c + 1
                    ),
                ));
            }
        }
        for other in state.appearing_rows(c) {
            if other != diag_pos && !family.contains(&other) {
                return Err(violation(
                    step_index,
                    step,
                    format!(
                        "row {} also appears in column {}",
                        table.labels()[other],
                        c + 1
                    ),
                ));
            }
        }
    }
    Ok(())
}

/// Apply a checked step, returning the successor state. The input state is
/// left untouched.
pub fn apply_step<'a>(
    state: &VerifierState<'a>,
    step_index: usize,
    step: &RuleStep,
) -> Result<VerifierState<'a>> {
    let rows = check_step(state, step_index, step)?;
    let mut next = state.clone();
    next.drop_rows(&rows);
    Ok(next)
}

// ─────────────────────────────────────────────────────────────────────────
// Verification
// ─────────────────────────────────────────────────────────────────────────

/// Outcome of replaying one step during verification.
#[derive(Clone, Debug)]
pub struct StepTrace {
    pub description: String,
    pub ok: bool,
    pub remaining_after: usize,
}

/// Result of replaying a certificate.
#[derive(Clone, Debug)]
pub struct VerificationReport {
    /// All steps checked and no selected row left at the end.
    pub valid: bool,
    /// Number of selected rows (the `N` of `N`-expungeable).
    pub n: usize,
    /// Whether the table is steady with respect to the certificate's `w`.
    pub steady: bool,
    pub trace: Vec<StepTrace>,
    /// Diagnostic of the first failure, when not valid.
    pub failure: Option<String>,
}

/// Rebuild the tensor table and erasure mask a certificate refers to,
/// revalidating its sequence and twist data along the way. Pass the
/// results straight to [`verify_certificate`] to replay the certificate
/// from the file alone.
pub fn replay_tables(cert: &Certificate) -> Result<(TensorTable, ErasureMask)> {
    let case = cert.case;
    let seq = validate_sequence(&cert.delta, case.g as usize, case.r, case.d, cert.shift)?;
    if cert.w.len() + 1 != case.g as usize {
        return Err(Error::LengthMismatch {
            expected: case.g as usize - 1,
            got: cert.w.len(),
        });
    }
    let vtable = build_vanishing_table(&seq, case.d);
    let ttable = build_tensor_table(&vtable, case.m);
    let mask = erase(&ttable, &cert.w);
    Ok((ttable, mask))
}

/// Replay `cert` against a table and mask built from the same data.
///
/// The report carries validity, `N`, table steadiness, and a per-step
/// trace; check failures are reported in place of being thrown.
pub fn verify_certificate(
    ttable: &TensorTable,
    mask: &ErasureMask,
    cert: &Certificate,
    strict_vi: bool,
) -> VerificationReport {
    let n = cert.selected.len();
    let steady = is_steady_table(ttable, &cert.w);
    let mut trace = Vec::with_capacity(cert.steps.len());

    let mismatch = |reason: String| VerificationReport {
        valid: false,
        n,
        steady,
        trace: Vec::new(),
        failure: Some(reason),
    };
    if ttable.g() != cert.delta.len() {
        return mismatch(format!(
            "table has {} columns but the certificate sequence has {} entries",
            ttable.g(),
            cert.delta.len()
        ));
    }
    if ttable.seq().entries() != cert.delta {
        return mismatch("certificate sequence differs from the table's".into());
    }
    if cert.w.len() + 1 != ttable.g() {
        return mismatch(format!(
            "twist vector has {} entries; expected {}",
            cert.w.len(),
            ttable.g() - 1
        ));
    }

    let mut state = match VerifierState::new(ttable, mask, &cert.selected, strict_vi) {
        Ok(state) => state,
        Err(err) => return mismatch(err.to_string()),
    };

    for (step_index, step) in cert.steps.iter().enumerate() {
        match check_step(&state, step_index, step) {
            Ok(rows) => {
                state.drop_rows(&rows);
                trace.push(StepTrace {
                    description: step.to_string(),
                    ok: true,
                    remaining_after: state.remaining_count(),
                });
            }
            Err(err) => {
                trace.push(StepTrace {
                    description: step.to_string(),
                    ok: false,
                    remaining_after: state.remaining_count(),
                });
                return VerificationReport {
                    valid: false,
                    n,
                    steady,
                    trace,
                    failure: Some(err.to_string()),
                };
            }
        }
    }

    let leftover = state.remaining_count();
    if leftover > 0 {
        let names: Vec<String> = state
            .remaining_labels()
            .iter()
            .map(ToString::to_string)
            .collect();
        return VerificationReport {
            valid: false,
            n,
            steady,
            trace,
            failure: Some(format!("{leftover} rows remain: {}", names.join(" "))),
        };
    }
    VerificationReport {
        valid: true,
        n,
        steady,
        trace,
        failure: None,
    }
}

// ─────────────────────────────────────────────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tables::{
        build_tensor_table, build_vanishing_table, erase, validate_sequence, CaseParams,
    };

    /// The smallest worked case: delta = (0,1,2,3), w = (2,6,8), d = 6.
    fn small_case() -> (TensorTable, ErasureMask) {
        let seq = validate_sequence(&[0, 1, 2, 3], 4, 3, 6, 0).unwrap();
        let vt = build_vanishing_table(&seq, 6);
        let tt = build_tensor_table(&vt, 2);
        let mask = erase(&tt, &[2, 6, 8]);
        (tt, mask)
    }

    fn ri(entries: &[i64]) -> RowIndex {
        RowIndex::new(entries.to_vec())
    }

    #[test]
    fn rule_ii_drops_strict_minimum() {
        let (tt, mask) = small_case();
        let selected: Vec<RowIndex> = tt
            .labels()
            .iter()
            .filter(|l| **l != ri(&[0, 3]))
            .cloned()
            .collect();
        let state = VerifierState::new(&tt, &mask, &selected, true).unwrap();
        // Column 1: row (0,0) has the strictly smallest a among appearing rows.
        let step = RuleStep::new(Rule::II, 1, vec![ri(&[0, 0])]);
        let rows = check_step(&state, 0, &step).expect("valid step");
        assert_eq!(rows, vec![0]);
        let next = apply_step(&state, 0, &step).unwrap();
        assert_eq!(next.remaining_count(), 8);
    }

    #[test]
    fn rule_ii_rejects_ties() {
        let (tt, _) = small_case();
        // A large constant twist vector keeps these rows present only in
        // column 1, where (1,2) and (0,3) tie at a = 3.
        let mask = erase(&tt, &[9, 9, 9]);
        let selected = vec![ri(&[1, 2]), ri(&[0, 3])];
        let state = VerifierState::new(&tt, &mask, &selected, true).unwrap();
        let step = RuleStep::new(Rule::II, 1, vec![ri(&[1, 2])]);
        let err = check_step(&state, 0, &step).unwrap_err();
        assert!(err.to_string().contains("not strictly minimal"), "{err}");
    }

    #[test]
    fn rule_iv_requires_exact_row_set() {
        let (tt, mask) = small_case();
        // Rows appearing in column 4 among the full table: a-values there
        // survive for (2,3), (3,3) and (1,3) only; restrict to make it two.
        let selected = vec![ri(&[2, 3]), ri(&[3, 3])];
        let state = VerifierState::new(&tt, &mask, &selected, true).unwrap();
        let good = RuleStep::new(Rule::IV, 4, vec![ri(&[2, 3]), ri(&[3, 3])]);
        assert!(check_step(&state, 0, &good).is_ok());
        let partial = RuleStep::new(Rule::IV, 4, vec![ri(&[2, 3])]);
        assert!(check_step(&state, 0, &partial).is_err());
    }

    #[test]
    fn rule_v_uniqueness_enforced() {
        let (tt, mask) = small_case();
        // Column 2 has delta = 1. Appearing rows there: (0,1),(0,2),(1,1),(1,2).
        let selected = vec![ri(&[0, 1]), ri(&[0, 2]), ri(&[1, 1]), ri(&[1, 2])];
        let state = VerifierState::new(&tt, &mask, &selected, true).unwrap();
        // j = 0: (1,1) and (1,2) have zero entries equal to 0 — not unique.
        let step = RuleStep::with_params(
            Rule::V,
            2,
            vec![ri(&[1, 1])],
            StepParams::V { j: 0, n: 0 },
        );
        assert!(check_step(&state, 0, &step).is_err());
        // j = 2: the unique appearing row with no entry equal to 2 among
        // those requiring at least zero... all qualify; exactly-zero rows
        // are (0,1) and (1,1) — still not unique.
        // j = 1 is forbidden (equals the column value).
        let forbidden = RuleStep::with_params(
            Rule::V,
            2,
            vec![ri(&[0, 2])],
            StepParams::V { j: 1, n: 0 },
        );
        assert!(check_step(&state, 0, &forbidden).is_err());
        // j = 2, n = 1: rows (0,2),(1,2) have exactly one entry equal to 2,
        // (0,1),(1,1) have zero — the "at least n" premise fails.
        let premise = RuleStep::with_params(
            Rule::V,
            2,
            vec![ri(&[0, 2])],
            StepParams::V { j: 2, n: 1 },
        );
        assert!(check_step(&state, 0, &premise).is_err());
    }

    #[test]
    fn rule_vii_requires_m_two() {
        let seq = validate_sequence(&[0, 0, 1, 1, 2, 2, 3], 7, 3, 9, 0).unwrap();
        let vt = build_vanishing_table(&seq, 9);
        let tt = build_tensor_table(&vt, 3);
        let mask = erase(&tt, &[4, 7, 10, 13, 17, 21]);
        let state = VerifierState::new(&tt, &mask, &tt.labels().to_vec(), true).unwrap();
        let step = RuleStep::with_params(
            Rule::VII,
            1,
            vec![ri(&[0, 0, 1]), ri(&[0, 0, 2])],
            StepParams::Vii { n: 2 },
        );
        assert!(matches!(
            check_step(&state, 0, &step),
            Err(Error::MNotTwo { m: 3 })
        ));
    }

    #[test]
    fn full_replay_of_smallest_case() {
        let (tt, mask) = small_case();
        let selected: Vec<RowIndex> = tt
            .labels()
            .iter()
            .filter(|l| **l != ri(&[0, 3]))
            .cloned()
            .collect();
        // Sweep rows in an order where each is, at its turn, the strict
        // minimum of a in its first present column; (2,2) goes before
        // (1,3) because it is also present in column 4 with a smaller a.
        let order = [
            ri(&[0, 0]),
            ri(&[0, 1]),
            ri(&[0, 2]),
            ri(&[1, 1]),
            ri(&[1, 2]),
            ri(&[2, 2]),
            ri(&[1, 3]),
            ri(&[2, 3]),
            ri(&[3, 3]),
        ];
        let steps: Vec<RuleStep> = order
            .iter()
            .map(|label| {
                let pos = tt.row_position(label).unwrap();
                let col = (0..tt.g()).find(|&c| mask.present(pos, c)).unwrap();
                RuleStep::new(Rule::II, col + 1, vec![label.clone()])
            })
            .collect();
        let cert = Certificate::new(
            CaseParams::new(4, 3, 6, 2).unwrap(),
            vec![0, 1, 2, 3],
            0,
            vec![2, 6, 8],
            selected,
            steps,
        );
        let report = verify_certificate(&tt, &mask, &cert, true);
        assert!(report.valid, "{:?}", report.failure);
        assert_eq!(report.n, 9);
        assert!(report.steady);
    }

    #[test]
    fn empty_certificate_reports_leftover_rows() {
        let (tt, mask) = small_case();
        let cert = Certificate::new(
            CaseParams::new(4, 3, 6, 2).unwrap(),
            vec![0, 1, 2, 3],
            0,
            vec![2, 6, 8],
            vec![ri(&[0, 0])],
            vec![],
        );
        let report = verify_certificate(&tt, &mask, &cert, true);
        assert!(!report.valid);
        assert!(report.failure.as_deref().unwrap().contains("rows remain"));
    }

    #[test]
    fn json_round_trip_is_byte_stable() {
        let cert = Certificate::new(
            CaseParams::new(4, 3, 6, 2).unwrap(),
            vec![0, 1, 2, 3],
            0,
            vec![2, 6, 8],
            vec![ri(&[0, 0]), ri(&[0, 1])],
            vec![
                RuleStep::new(Rule::II, 1, vec![ri(&[0, 0])]),
                RuleStep::with_params(Rule::V, 2, vec![ri(&[0, 1])], StepParams::V { j: 3, n: 0 }),
                RuleStep::with_params(Rule::VII, 3, vec![ri(&[0, 1])], StepParams::Vii { n: 2 }),
            ],
        );
        let json = cert.to_json().unwrap();
        let parsed = Certificate::from_json(&json).unwrap();
        assert_eq!(parsed, cert);
        assert_eq!(parsed.to_json().unwrap(), json);
        // Keys are sorted at every level.
        let case_pos = json.find("\"case\"").unwrap();
        let delta_pos = json.find("\"delta\"").unwrap();
        let version_pos = json.find("\"format-version\"").unwrap();
        assert!(case_pos < delta_pos && delta_pos < version_pos);
    }

    #[test]
    fn step_params_survive_untagged_serialization() {
        for params in [
            StepParams::V { j: 3, n: 1 },
            StepParams::Vi { witness_column: 5 },
            StepParams::Vii { n: 2 },
        ] {
            let json = serde_json::to_string(&params).unwrap();
            let back: StepParams = serde_json::from_str(&json).unwrap();
            assert_eq!(back, params, "via {json}");
        }
    }
}
