//! Closed-form certificate builders.
//!
//! Where the search module discovers elimination orders, this module writes
//! them down directly for whole families of cases: small hand-checked
//! catalog cases, the critical m = 2 family for every rank, rank-reduction
//! lifts, column-appending extensions of injective cases, a single-column
//! construction for very large genus, and anchor-row families for m = 3
//! surjective cases. Every builder returns a [`ConstructionResult`] whose
//! certificate has already been replayed through the verifier; a result is
//! never handed out on faith.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::rules::{
    apply_step, verify_certificate, Certificate, Rule, RuleStep, StepParams, VerifierState,
};
use crate::search::surjective_sweep;
use crate::tables::{
    binom, build_tensor_table, build_vanishing_table, default_sequence, erase, is_extendable,
    is_unimaginative, validate_sequence, CaseParams, ErasureMask, GrdSequence, RowIndex,
    TensorTable, TwistVector,
};

// ─────────────────────────────────────────────────────────────────────────
// Results and provenance
// ─────────────────────────────────────────────────────────────────────────

/// Which builder produced a certificate. The outermost builder wins: a
/// catalog case extended by column appending reports the extension.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    /// Hand-checked m = 2 catalog case.
    M2Catalog,
    /// Critical m = 2 family member.
    CriticalM2,
    /// Rank-reduction lift from a smaller verified case.
    BasicReductionLift,
    /// Column-appending extension of an injective case.
    InjectiveExtend,
    /// Large-genus single-column injective construction.
    BigGInject,
    /// Anchor-row m = 3 surjective family.
    SurjM3,
    /// Hand-checked m = 3 catalog case.
    M3Catalog,
    /// Found by the generic searcher rather than a closed-form builder.
    Search,
}

impl Provenance {
    /// Stable lowercase identifier, as printed by the command-line tools.
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::M2Catalog => "m2_catalog",
            Provenance::CriticalM2 => "critical_m2",
            Provenance::BasicReductionLift => "basic_reduction_lift",
            Provenance::InjectiveExtend => "injective_extend",
            Provenance::BigGInject => "big_g_inject",
            Provenance::SurjM3 => "surj_m3",
            Provenance::M3Catalog => "m3_catalog",
            Provenance::Search => "search",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A fully assembled case: parameters, sequence, twist vector, the number
/// of rows eliminated, and a certificate that has passed verification.
#[derive(Clone, Debug)]
pub struct ConstructionResult {
    pub case: CaseParams,
    pub seq: GrdSequence,
    pub w: TwistVector,
    /// Number of rows the certificate eliminates (`certificate.n()`).
    pub n: usize,
    pub certificate: Option<Certificate>,
    pub provenance: Provenance,
}

/// Replay `steps` against freshly built tables and package the result.
/// Fails with [`Error::Format`] if the assembled certificate does not
/// verify — builders must never emit an unverified result.
fn finish(
    case: CaseParams,
    seq: GrdSequence,
    w: TwistVector,
    selected: Vec<RowIndex>,
    steps: Vec<RuleStep>,
    provenance: Provenance,
) -> Result<ConstructionResult> {
    let vtable = build_vanishing_table(&seq, case.d);
    let ttable = build_tensor_table(&vtable, case.m);
    let mask = erase(&ttable, w.entries());
    finish_with(&ttable, &mask, case, seq, w, selected, steps, provenance)
}

/// As [`finish`], reusing tables the caller already built.
#[allow(clippy::too_many_arguments)]
fn finish_with(
    ttable: &TensorTable,
    mask: &ErasureMask,
    case: CaseParams,
    seq: GrdSequence,
    w: TwistVector,
    selected: Vec<RowIndex>,
    steps: Vec<RuleStep>,
    provenance: Provenance,
) -> Result<ConstructionResult> {
    let cert = Certificate::new(
        case,
        seq.entries().to_vec(),
        seq.shift(),
        w.entries().to_vec(),
        selected,
        steps,
    );
    let report = verify_certificate(ttable, mask, &cert, true);
    if !report.valid {
        let why = report
            .failure
            .unwrap_or_else(|| "no failure recorded".to_string());
        return Err(Error::Format(format!(
            "{provenance} assembled a certificate that fails verification: {why}"
        )));
    }
    let n = cert.n();
    Ok(ConstructionResult {
        case,
        seq,
        w,
        n,
        certificate: Some(cert),
        provenance,
    })
}

// ─────────────────────────────────────────────────────────────────────────
// Plan expansion
// ─────────────────────────────────────────────────────────────────────────

/// A shorthand instruction expanded against live replay state. Directives
/// let a catalog entry say "keep dropping the strict minimum in column 3"
/// instead of spelling out every row label.
#[derive(Clone, Copy, Debug)]
enum Directive {
    /// Repeat Rule II drops in a column while a strict a-minimum exists.
    SweepIi(usize),
    /// Repeat Rule III drops in a column while a strict b-minimum exists.
    SweepIii(usize),
    /// One Rule II drop of the a-minimal appearing row.
    Ii(usize),
    /// One Rule III drop of the b-minimal appearing row.
    Iii(usize),
    /// Drop all appearing rows of a column (one or two) with Rule IV.
    Iv(usize),
    /// As [`Directive::Iv`], but a no-op when the column is empty.
    IvOpt(usize),
    /// Rule V drop in a column counting occurrences of the given value.
    V(usize, i64),
    /// Rule VI drop of the a-tied pair in a column, witness auto-chosen.
    Vi(usize),
    /// Rule VII drop of the straddling family across `n` columns.
    Vii(usize, usize),
}

/// Expand directives into concrete steps, validating each against the
/// replay state as it is produced.
fn expand_plan(state: &mut VerifierState<'_>, plan: &[Directive]) -> Result<Vec<RuleStep>> {
    let mut steps: Vec<RuleStep> = Vec::new();
    for &directive in plan {
        match directive {
            Directive::SweepIi(col) => sweep(state, &mut steps, col, true, false)?,
            Directive::SweepIii(col) => sweep(state, &mut steps, col, false, true)?,
            Directive::Ii(col) => {
                let row = extreme_row(state, col, true)
                    .ok_or_else(|| plan_error("no appearing row", col))?;
                emit(state, &mut steps, single_drop(state, Rule::II, col, row))?;
            }
            Directive::Iii(col) => {
                let row = extreme_row(state, col, false)
                    .ok_or_else(|| plan_error("no appearing row", col))?;
                emit(state, &mut steps, single_drop(state, Rule::III, col, row))?;
            }
            Directive::Iv(col) | Directive::IvOpt(col) => {
                let app = state.appearing_rows(col - 1);
                if app.is_empty() {
                    if matches!(directive, Directive::IvOpt(_)) {
                        continue;
                    }
                    return Err(plan_error("no appearing row", col));
                }
                let rows = labels_of(state, &app);
                emit(state, &mut steps, RuleStep::new(Rule::IV, col, rows))?;
            }
            Directive::V(col, j) => {
                let app = state.appearing_rows(col - 1);
                let n = app
                    .iter()
                    .map(|&p| state.table().labels()[p].multiplicity(j))
                    .min()
                    .ok_or_else(|| plan_error("no appearing row", col))?;
                let matching: Vec<usize> = app
                    .iter()
                    .copied()
                    .filter(|&p| state.table().labels()[p].multiplicity(j) == n)
                    .collect();
                let [row] = matching[..] else {
                    return Err(plan_error("count minimum is not unique", col));
                };
                emit(
                    state,
                    &mut steps,
                    RuleStep::with_params(
                        Rule::V,
                        col,
                        labels_of(state, &[row]),
                        StepParams::V { j, n: n as i64 },
                    ),
                )?;
            }
            Directive::Vi(col) => {
                let step = propose_pair_drop(state, col)?;
                emit(state, &mut steps, step)?;
            }
            Directive::Vii(col, n) => {
                let step = propose_straddle_drop(state, col, n)?;
                emit(state, &mut steps, step)?;
            }
        }
    }
    Ok(steps)
}

fn plan_error(reason: &str, col: usize) -> Error {
    Error::Format(format!("plan directive at column {col} failed: {reason}"))
}

/// Validate one step, advance the state, and record it.
fn emit(state: &mut VerifierState<'_>, steps: &mut Vec<RuleStep>, step: RuleStep) -> Result<()> {
    *state = apply_step(state, steps.len(), &step)?;
    steps.push(step);
    Ok(())
}

fn labels_of(state: &VerifierState<'_>, positions: &[usize]) -> Vec<RowIndex> {
    positions
        .iter()
        .map(|&p| state.table().labels()[p].clone())
        .collect()
}

fn single_drop(state: &VerifierState<'_>, rule: Rule, col: usize, row: usize) -> RuleStep {
    RuleStep::new(rule, col, labels_of(state, &[row]))
}

/// Position of the appearing row minimizing the a-value (`by_a`) or the
/// b-value of a column; ties resolve to the earliest storage position.
fn extreme_row(state: &VerifierState<'_>, col: usize, by_a: bool) -> Option<usize> {
    state.appearing_rows(col - 1).into_iter().min_by_key(|&p| {
        if by_a {
            state.table().a(p, col - 1)
        } else {
            state.table().b(p, col - 1)
        }
    })
}

/// Drain a column with Rule II and/or Rule III drops while a strict
/// minimum exists, preferring Rule II when both are allowed.
fn sweep(
    state: &mut VerifierState<'_>,
    steps: &mut Vec<RuleStep>,
    col: usize,
    allow_ii: bool,
    allow_iii: bool,
) -> Result<()> {
    loop {
        let app = state.appearing_rows(col - 1);
        if app.is_empty() {
            return Ok(());
        }
        let strict_min = |by_a: bool| -> bool {
            let mut vals: Vec<i64> = app
                .iter()
                .map(|&p| {
                    if by_a {
                        state.table().a(p, col - 1)
                    } else {
                        state.table().b(p, col - 1)
                    }
                })
                .collect();
            vals.sort_unstable();
            vals.len() == 1 || vals[0] < vals[1]
        };
        if allow_ii && strict_min(true) {
            let row = extreme_row(state, col, true).expect("column is nonempty");
            emit(state, steps, single_drop(state, Rule::II, col, row))?;
        } else if allow_iii && strict_min(false) {
            let row = extreme_row(state, col, false).expect("column is nonempty");
            emit(state, steps, single_drop(state, Rule::III, col, row))?;
        } else {
            return Ok(());
        }
    }
}

/// Build the Rule VI step for a column: the two rows tied at the strict
/// a-minimum, with the witness column chosen automatically.
fn propose_pair_drop(state: &VerifierState<'_>, col: usize) -> Result<RuleStep> {
    let table = state.table();
    let app = state.appearing_rows(col - 1);
    let a0 = app
        .iter()
        .map(|&p| table.a(p, col - 1))
        .min()
        .ok_or_else(|| plan_error("no appearing row", col))?;
    let pair: Vec<usize> = app
        .iter()
        .copied()
        .filter(|&p| table.a(p, col - 1) == a0)
        .collect();
    if pair.len() != 2 {
        return Err(plan_error("a-minimum is not a two-row tie", col));
    }
    let m = table.m();
    for witness in [col, col + 1] {
        let dv = table.seq().entries()[witness - 1];
        let both_short = pair
            .iter()
            .all(|&p| table.labels()[p].multiplicity(dv) == (m - 2) as usize);
        if !both_short {
            continue;
        }
        let diag = table
            .row_position(&RowIndex::diagonal(dv, m as usize))
            .ok_or_else(|| plan_error("diagonal row missing from the table", col))?;
        if table.a(pair[0], witness - 1) != table.a(diag, witness - 1) - 1 {
            return Ok(RuleStep::with_params(
                Rule::VI,
                col,
                labels_of(state, &pair),
                StepParams::Vi {
                    witness_column: witness,
                },
            ));
        }
    }
    Err(plan_error("no admissible witness column", col))
}

/// Build the Rule VII step for a column: every appearing non-diagonal row
/// of the column, plus the diagonal row when it is still remaining.
fn propose_straddle_drop(state: &VerifierState<'_>, col: usize, n: usize) -> Result<RuleStep> {
    let table = state.table();
    let dv = table.seq().entries()[col - 1];
    let diag_label = RowIndex::diagonal(dv, table.m() as usize);
    let diag = table
        .row_position(&diag_label)
        .ok_or_else(|| plan_error("diagonal row missing from the table", col))?;
    let mut rows: Vec<RowIndex> = state
        .appearing_rows(col - 1)
        .into_iter()
        .filter(|&p| p != diag)
        .map(|p| table.labels()[p].clone())
        .collect();
    if state.is_remaining(diag) {
        rows.push(diag_label);
    }
    Ok(RuleStep::with_params(
        Rule::VII,
        col,
        rows,
        StepParams::Vii { n },
    ))
}

/// Build tables for `(g, r, d, m)` with the given sequence and twist,
/// select every row except `excluded`, expand `plan`, and require that it
/// eliminates everything.
#[allow(clippy::too_many_arguments)]
fn build_from_plan(
    g: i64,
    r: i64,
    d: i64,
    m: i64,
    delta: Vec<i64>,
    w: Vec<i64>,
    excluded: &[RowIndex],
    plan: &[Directive],
    provenance: Provenance,
) -> Result<ConstructionResult> {
    let case = CaseParams::new(g, r, d, m)?;
    let seq = validate_sequence(&delta, g as usize, r, d, 0)?;
    let vtable = build_vanishing_table(&seq, d);
    let ttable = build_tensor_table(&vtable, m);
    let wv = TwistVector::new(w, m * d);
    let mask = erase(&ttable, wv.entries());
    let selected: Vec<RowIndex> = ttable
        .labels()
        .iter()
        .filter(|label| !excluded.contains(label))
        .cloned()
        .collect();
    let mut state = VerifierState::new(&ttable, &mask, &selected, true)?;
    let steps = expand_plan(&mut state, plan)?;
    if state.remaining_count() != 0 {
        return Err(Error::Format(format!(
            "{provenance}: plan left {} rows uneliminated",
            state.remaining_count()
        )));
    }
    finish_with(&ttable, &mask, case, seq, wv, selected, steps, provenance)
}

// ─────────────────────────────────────────────────────────────────────────
// m = 2 catalog cases
// ─────────────────────────────────────────────────────────────────────────

/// The smallest surjective m = 2 case at rank 3: one corner row is set
/// aside and four column sweeps drain the other nine rows.
fn catalog_m2_r3_g4() -> Result<ConstructionResult> {
    build_from_plan(
        4,
        3,
        6,
        2,
        vec![0, 1, 2, 3],
        vec![2, 6, 8],
        &[RowIndex::new(vec![0, 3])],
        &[
            Directive::SweepIi(1),
            Directive::SweepIi(2),
            Directive::SweepIi(3),
            Directive::SweepIi(4),
        ],
        Provenance::M2Catalog,
    )
}

/// The balanced m = 2 case at rank 3 and genus 5: all ten rows are
/// eliminated, finishing each of the two crowded columns with Rule IV.
fn catalog_m2_r3_g5() -> Result<ConstructionResult> {
    build_from_plan(
        5,
        3,
        7,
        2,
        vec![0, 1, 2, 3, 0],
        vec![2, 6, 8, 10],
        &[],
        &[
            Directive::SweepIii(5),
            Directive::Iv(5),
            Directive::Iv(3),
            Directive::SweepIi(1),
            Directive::SweepIi(2),
        ],
        Provenance::M2Catalog,
    )
}

// ─────────────────────────────────────────────────────────────────────────
// Critical m = 2 family
// ─────────────────────────────────────────────────────────────────────────

/// Parameters `(g, d, ell)` of the critical m = 2 case at rank `r`: the
/// unique balanced case where domain and codomain dimensions agree for
/// even `r`, and its odd-rank analogue.
fn critical_params(r: i64) -> (i64, i64, i64) {
    if r % 2 == 0 {
        let ell = r / 2;
        ((r + 1) * r / 2, (r + 2) * r / 2, ell)
    } else {
        let ell = (r + 1) / 2;
        ((r + 1) * (r + 1) / 2, r * (r + 3) / 2, ell)
    }
}

/// Twist boundaries of the critical case: steps of 2 with a step of 3 once
/// per block of `ell`, the bump moving one slot at the halfway column.
fn critical_w(g: i64, ell: i64) -> Vec<i64> {
    let mut w = vec![2i64];
    for i in 3..=g {
        let bump = if i <= g / 2 + 1 {
            i.rem_euclid(ell) == 2i64.rem_euclid(ell)
        } else {
            i.rem_euclid(ell) == 1i64.rem_euclid(ell)
        };
        w.push(w.last().copied().expect("w is nonempty") + if bump { 3 } else { 2 });
    }
    w
}

/// Certificate for the critical m = 2 case at rank `r >= 4`. Every row is
/// eliminated: outer blocks drain column by column with Rule IV, inner
/// blocks open with a Rule VII family drop.
pub fn critical_m2(r: i64) -> Result<ConstructionResult> {
    if r < 4 {
        return Err(Error::OutOfScope(format!(
            "critical m = 2 family starts at rank 4, got r = {r}"
        )));
    }
    let (g, d, ell) = critical_params(r);
    let delta: Vec<i64> = (0..=r)
        .flat_map(|v| std::iter::repeat(v).take(ell as usize))
        .collect();
    let w = critical_w(g, ell);

    let (left_blocks, right_blocks, center): (Vec<i64>, Vec<i64>, Option<i64>) = if r % 2 == 0 {
        (
            (0..r / 2).collect(),
            (r / 2 + 1..=r).rev().collect(),
            Some(r / 2),
        )
    } else {
        (
            (0..(r + 1) / 2).collect(),
            ((r + 1) / 2..=r).rev().collect(),
            None,
        )
    };

    let mut plan: Vec<Directive> = Vec::new();
    for i in left_blocks {
        let base = i * ell;
        if i <= 1 {
            for c in base + 1..=base + ell {
                plan.push(Directive::IvOpt(c as usize));
            }
        } else {
            plan.push(Directive::Vii((base + 1) as usize, i as usize));
            for c in base + i + 1..=base + ell {
                plan.push(Directive::IvOpt(c as usize));
            }
        }
    }
    for i in right_blocks {
        let base = i * ell;
        let k = r - i;
        if k <= 1 || (r % 2 == 1 && i == (r + 1) / 2) {
            for c in (base + 1..=base + ell).rev() {
                plan.push(Directive::IvOpt(c as usize));
            }
        } else {
            plan.push(Directive::Vii((base + ell - k + 1) as usize, k as usize));
            for c in (base + 1..=base + ell - k).rev() {
                plan.push(Directive::IvOpt(c as usize));
            }
        }
    }
    if let Some(cb) = center {
        plan.push(Directive::Vii((cb * ell + 1) as usize, ell as usize));
    }

    build_from_plan(g, r, d, 2, delta, w, &[], &plan, Provenance::CriticalM2)
}

// ─────────────────────────────────────────────────────────────────────────
// Rank reduction and its lift
// ─────────────────────────────────────────────────────────────────────────

/// One rank-reduction step: the number `t` of columns absorbed and the
/// smaller case `(g - t, r - 1, d - t - 1)` the problem reduces to.
pub fn reduction_step(g: i64, r: i64, d: i64) -> (i64, (i64, i64, i64)) {
    let rho = g - (r + 1) * (r + g - d);
    let t = (rho + (r + g - d)).min(r - 1);
    (t, (g - t, r - 1, d - t - 1))
}

/// Lift a verified certificate for the reduced case back to `(g, r, d)`:
/// `t` fresh leading columns carry `t + 2` new rows, drained by three Rule
/// II drops and a run of singleton Rule IV drops, and every datum of the
/// smaller certificate shifts one rank and `t` columns up.
pub fn basic_reduction_lift(
    sub: &ConstructionResult,
    g: i64,
    r: i64,
    d: i64,
) -> Result<ConstructionResult> {
    let (t, (gs, rs, ds)) = reduction_step(g, r, d);
    let sc = sub.case;
    if (sc.g, sc.r, sc.d, sc.m) != (gs, rs, ds, 2) {
        return Err(Error::ReductionMismatch(format!(
            "lift to ({g}, {r}, {d}) needs a verified ({gs}, {rs}, {ds}) case with m = 2, \
             got ({}, {}, {}) with m = {}",
            sc.g, sc.r, sc.d, sc.m
        )));
    }
    let sub_cert = sub.certificate.as_ref().ok_or_else(|| {
        Error::ReductionMismatch("lift needs a certificate-bearing base case".to_string())
    })?;
    if !is_unimaginative(sub.w.entries(), 2) {
        return Err(Error::ReductionMismatch(
            "base twist vector is not unimaginative".to_string(),
        ));
    }
    if sub.w.entries().first().copied().unwrap_or(0) < 2 {
        return Err(Error::ReductionMismatch(
            "base twist vector starts below 2".to_string(),
        ));
    }
    if (0..=rs).any(|v| sub.seq.count(v) as i64 > rs) {
        return Err(Error::ReductionMismatch(format!(
            "base sequence repeats a value more than {rs} times"
        )));
    }

    let mut delta: Vec<i64> = vec![0; t as usize];
    delta.extend(sub.seq.entries().iter().map(|&x| x + 1));

    let mut w = vec![3i64];
    for _ in 3..=t + 1 {
        w.push(w.last().copied().expect("w is nonempty") + 2);
    }
    for i in t + 2..=g {
        w.push(sub.w.entries()[(i - t - 2) as usize] + 2 * t + 2);
    }

    let bump_row = |row: &RowIndex| RowIndex::new(row.entries().iter().map(|&x| x + 1).collect());
    let mut selected: Vec<RowIndex> = (0..=t + 1).map(|j| RowIndex::new(vec![0, j])).collect();
    selected.extend(sub_cert.selected.iter().map(bump_row));

    let mut steps: Vec<RuleStep> = (0..3)
        .map(|j| RuleStep::new(Rule::II, 1, vec![RowIndex::new(vec![0, j])]))
        .collect();
    for i in 2..=t {
        steps.push(RuleStep::new(
            Rule::IV,
            i as usize,
            vec![RowIndex::new(vec![0, i + 1])],
        ));
    }
    for step in &sub_cert.steps {
        let params = step.params.as_ref().map(|p| match *p {
            StepParams::V { j, n } => StepParams::V { j: j + 1, n },
            StepParams::Vi { witness_column } => StepParams::Vi {
                witness_column: witness_column + t as usize,
            },
            StepParams::Vii { n } => StepParams::Vii { n },
        });
        steps.push(RuleStep {
            rule: step.rule,
            column: step.column + t as usize,
            rows: step.rows.iter().map(bump_row).collect(),
            params,
        });
    }

    let case = CaseParams::new(g, r, d, 2)?;
    let seq = validate_sequence(&delta, g as usize, r, d, 0)?;
    let wv = TwistVector::new(w, 2 * d);
    finish(case, seq, wv, selected, steps, Provenance::BasicReductionLift)
}

// ─────────────────────────────────────────────────────────────────────────
// Injective extension
// ─────────────────────────────────────────────────────────────────────────

/// Extend an injective case (every row eliminated) to larger genus and
/// degree by appending columns that are fully erased by fresh twist
/// entries. The certificate itself is reused unchanged: appended columns
/// never show a row, so every step replays exactly as before.
pub fn injective_extend(
    sub: &ConstructionResult,
    g_new: i64,
    d_new: i64,
) -> Result<ConstructionResult> {
    let CaseParams { g, r, d, m } = sub.case;
    let expected = binom(r + m, m);
    if sub.n as i64 != expected {
        return Err(Error::NotInjective {
            n: sub.n,
            expected,
        });
    }
    if g_new < g {
        return Err(Error::OutOfScope(format!(
            "extension target g = {g_new} is below the base g = {g}"
        )));
    }
    if g_new == g && d_new == d {
        return Ok(sub.clone());
    }
    let sub_cert = sub.certificate.as_ref().ok_or_else(|| {
        Error::OutOfScope("extension needs a certificate-bearing base case".to_string())
    })?;

    let k = (g_new - g) as usize;
    let tail: Vec<i64> = if g_new - d_new <= g - d {
        // Appending zeros never disturbs occurrence counts or prefixes.
        vec![0; k]
    } else {
        if !is_extendable(&sub.seq) {
            return Err(Error::NotExtendable {
                zeros: sub.seq.count(0),
                rs: sub.seq.count(r),
                r,
            });
        }
        let beta = g % (r + 1);
        (0..k as i64).map(|i| (beta + i) % (r + 1)).collect()
    };
    let mut delta = sub.seq.entries().to_vec();
    delta.extend(tail);

    let md_new = m * d_new;
    let mut w = sub.w.entries().to_vec();
    let start = md_new.max(w.last().copied().unwrap_or(md_new));
    for i in 0..k as i64 {
        w.push(start + m * (i + 1));
    }

    let case = CaseParams::new(g_new, r, d_new, m)?;
    let seq = validate_sequence(&delta, g_new as usize, r, d_new, 0)?;
    let wv = TwistVector::new(w, md_new);
    finish(
        case,
        seq,
        wv,
        sub_cert.selected.clone(),
        sub_cert.steps.clone(),
        Provenance::InjectiveExtend,
    )
}

// ─────────────────────────────────────────────────────────────────────────
// m = 2 driver
// ─────────────────────────────────────────────────────────────────────────

/// Certify any m = 2 case with `r >= 3`, nonnegative rho, and
/// `r + g - d > 0`, eliminating `min(C(r+2, 2), 2d + 1 - g)` rows.
///
/// Surjective cases reduce rank by rank down to a catalog case or the
/// critical case; injective cases shrink along the diagonal `(g-s, d-s)`
/// until the ranks tie, then extend back up by appending columns. A case
/// that ties in both dimensions with rho = 0 is the critical case itself.
pub fn m2_certify(g: i64, r: i64, d: i64) -> Result<ConstructionResult> {
    let rho = g - (r + 1) * (r + g - d);
    if r < 3 || rho < 0 || r + g - d <= 0 {
        return Err(Error::OutOfScope(format!(
            "m = 2 driver covers r >= 3, rho >= 0 and r + g - d > 0; \
             got (g, r, d) = ({g}, {r}, {d}) with rho = {rho}"
        )));
    }
    let c = binom(r + 2, 2);
    let target = 2 * d + 1 - g;
    if c >= target {
        // Surjective range.
        if c == target && rho == 0 {
            return critical_m2(r);
        }
        if r == 3 {
            return match (g, d) {
                (4, 6) => catalog_m2_r3_g4(),
                (5, 7) => catalog_m2_r3_g5(),
                _ => Err(Error::OutOfScope(format!(
                    "no surjective rank-3 case exists at (g, d) = ({g}, {d})"
                ))),
            };
        }
        let (_, (gs, rs, ds)) = reduction_step(g, r, d);
        let sub = m2_certify(gs, rs, ds)?;
        return basic_reduction_lift(&sub, g, r, d);
    }
    // Strictly injective range.
    if r == 3 {
        return injective_extend(&catalog_m2_r3_g5()?, g, d);
    }
    let s = (target - c).min(rho);
    if s > 0 {
        let sub = m2_certify(g - s, r, d - s)?;
        return injective_extend(&sub, g, d);
    }
    injective_extend(&critical_m2(r)?, g, d)
}

// ─────────────────────────────────────────────────────────────────────────
// Large-genus injective construction
// ─────────────────────────────────────────────────────────────────────────

/// Injective certificate built around one dense column: the sequence is
/// laid out so that at column `i0` the section orders form base-(m+1)
/// digits, making every row sum distinct, and the whole table drains with
/// Rule II drops in that single column.
///
/// `g` and `d` default to the smallest admissible genus and the degree
/// with rho = 0.
pub fn big_g_inject(r: i64, m: i64, g: Option<i64>, d: Option<i64>) -> Result<ConstructionResult> {
    if r < 3 || m < 2 {
        return Err(Error::OutOfScope(format!(
            "dense-column construction needs r >= 3 and m >= 2, got r = {r}, m = {m}"
        )));
    }
    let span = (m + 1).checked_pow((r - 1) as u32).ok_or_else(|| {
        Error::OutOfScope(format!("(m+1)^(r-1) overflows for r = {r}, m = {m}"))
    })?;
    let g = g.unwrap_or((r + 1) * (span - r));
    let d = d.unwrap_or(g + r - (span - r));
    if g < (r + 1) * (span - r) {
        return Err(Error::OutOfScope(format!(
            "dense-column construction needs g >= {}, got g = {g}",
            (r + 1) * (span - r)
        )));
    }
    let rho = g - (r + 1) * (r + g - d);
    if rho < 0 {
        return Err(Error::OutOfScope(format!(
            "dense-column construction needs rho >= 0, got rho = {rho}"
        )));
    }

    let mut delta: Vec<i64> = vec![0; (span - r) as usize];
    for i in 1..r {
        let reps = span - (m + 1).pow((i - 1) as u32) - (r - i);
        delta.extend(std::iter::repeat(i).take(reps as usize));
    }
    let i0 = delta.len() + 1;
    delta.extend(std::iter::repeat(2).take((m - 1) as usize));
    for i in 3..=r {
        let reps = (m + 1).pow((i - 1) as u32) - i;
        delta.extend(std::iter::repeat(i).take(reps as usize));
    }
    if delta.len() > g as usize {
        return Err(Error::OutOfScope(format!(
            "genus {g} is too small for the dense-column layout ({} entries)",
            delta.len()
        )));
    }
    let pad = g as usize - delta.len();
    delta.extend((0..pad).map(|kk| kk as i64 % (r + 1)));

    let md = m * d;
    let mut w = vec![0i64; i0 - 1];
    w.extend(std::iter::repeat(md).take(g as usize - i0));

    let case = CaseParams::new(g, r, d, m)?;
    let seq = validate_sequence(&delta, g as usize, r, d, 0)?;
    let vtable = build_vanishing_table(&seq, d);

    // The single dense column must realize base-(m+1) digit offsets so
    // that all row sums are distinct.
    let base = vtable.pair(0, i0 - 1).0;
    for j in 1..=r {
        let got = vtable.pair(j as usize, i0 - 1).0 - base;
        let want = (m + 1).pow((j - 1) as u32);
        if got != want {
            return Err(Error::DistinctnessFailure {
                column: i0,
                reason: format!("section {j} sits at offset {got}, expected {want}"),
            });
        }
    }

    let ttable = build_tensor_table(&vtable, m);
    let wv = TwistVector::new(w, md);
    let mask = erase(&ttable, wv.entries());
    let mut by_a: BTreeMap<i64, usize> = BTreeMap::new();
    for row in 0..ttable.num_rows() {
        if !mask.present(row, i0 - 1) {
            return Err(Error::DistinctnessFailure {
                column: i0,
                reason: format!("row {} does not appear", ttable.labels()[row]),
            });
        }
        let a = ttable.a(row, i0 - 1);
        if let Some(&other) = by_a.get(&a) {
            return Err(Error::DistinctnessFailure {
                column: i0,
                reason: format!(
                    "rows {} and {} share the value a = {a}",
                    ttable.labels()[other],
                    ttable.labels()[row]
                ),
            });
        }
        by_a.insert(a, row);
    }

    let selected: Vec<RowIndex> = ttable.labels().to_vec();
    let steps: Vec<RuleStep> = by_a
        .values()
        .map(|&row| RuleStep::new(Rule::II, i0, vec![ttable.labels()[row].clone()]))
        .collect();
    finish_with(
        &ttable,
        &mask,
        case,
        seq,
        wv,
        selected,
        steps,
        Provenance::BigGInject,
    )
}

// ─────────────────────────────────────────────────────────────────────────
// m = 3 surjective anchor families
// ─────────────────────────────────────────────────────────────────────────

/// Surjective m = 3 certificate for the two smallest shortfalls
/// `r + g - d`, passed explicitly as `shortfall` and checked against the
/// parameters. Anchor rows pin each twist boundary to a concrete row's
/// a-value; a column sweep then assembles the certificate, eliminating
/// `3d + 1 - g` rows.
pub fn surj_m3(g: i64, r: i64, d: i64, shortfall: i64) -> Result<ConstructionResult> {
    let ell = r + g - d;
    if shortfall != ell {
        return Err(Error::HypothesisViolation(format!(
            "declared shortfall {shortfall} does not match r + g - d = {ell}"
        )));
    }
    let rho = g - (r + 1) * ell;
    if rho < 0 {
        return Err(Error::HypothesisViolation(format!(
            "family needs rho >= 0, got rho = {rho}"
        )));
    }

    let mut anchors: BTreeMap<i64, RowIndex> = BTreeMap::new();
    let anchor = |x: i64, y: i64, z: i64| RowIndex::new(vec![x, y, z]);
    let (delta, i0): (Vec<i64>, i64) = match ell {
        1 => {
            if 2 * r - 3 < rho + 1 {
                return Err(Error::HypothesisViolation(format!(
                    "shortfall-1 family needs 2r - 3 >= rho + 1, got rho = {rho} at r = {r}"
                )));
            }
            let n = (r - 1).min(rho + 2);
            let mut delta = vec![0i64; rho as usize];
            delta.extend(0..=r);
            for i in 0..=n - 2 {
                anchors.insert(rho + 2 - i, anchor(0, n - i, n - i));
            }
            for i in 3..=r + 1 {
                anchors.insert(rho + i, anchor(i - 2, i - 2, r));
            }
            (delta, rho + 3 - n)
        }
        2 => {
            if r < 4 {
                return Err(Error::HypothesisViolation(format!(
                    "rank {r} is too small for the shortfall-2 family (needs r >= 4)"
                )));
            }
            if 2 * r - 3 < rho + 2 {
                return Err(Error::HypothesisViolation(format!(
                    "shortfall-2 family needs 2r - 3 >= rho + 2, got rho = {rho} at r = {r}"
                )));
            }
            let n = if rho > 0 { (r - 1).min(rho + 1) } else { 2 };
            let mut delta = vec![0i64; rho as usize];
            delta.extend((0..=r).flat_map(|j| [j, j]));
            for i in 0..=n - 2 {
                anchors.insert(rho + 3 - i, anchor(0, n - i, n - i));
            }
            for i in 2..r - 1 {
                anchors.insert(rho + 2 * i, anchor(i - 1, i - 1, r - 2));
            }
            for i in 2..r {
                anchors.insert(rho + 2 * i + 1, anchor(i - 1, i - 1, r));
            }
            anchors.insert(rho + 2 * r - 2, anchor(r - 3, r - 2, r));
            anchors.insert(rho + 2 * r, anchor(r - 2, r - 1, r - 1));
            anchors.insert(rho + 2 * r + 1, anchor(r - 3, r - 1, r));
            anchors.insert(rho + 2 * r + 2, anchor(r - 2, r, r));
            (delta, rho + 4 - n)
        }
        other => {
            return Err(Error::HypothesisViolation(format!(
                "only shortfalls 1 and 2 are covered, got r + g - d = {other}"
            )));
        }
    };

    let case = CaseParams::new(g, r, d, 3)?;
    let seq = validate_sequence(&delta, g as usize, r, d, 0)?;
    let vtable = build_vanishing_table(&seq, d);
    // A row's a-value is a sum of section orders, which depend only on the
    // sequence — so anchors can be read off before the twist exists.
    let a_of = |label: &RowIndex, col: i64| -> i64 {
        label
            .entries()
            .iter()
            .map(|&j| vtable.pair(j as usize, col as usize - 1).0)
            .sum()
    };

    let mut w: Vec<i64> = Vec::with_capacity(g as usize - 1);
    for i in 2..=g {
        if i <= i0 {
            w.push(-3 * (i0 - i) - 1);
        } else {
            let label = anchors.get(&i).ok_or_else(|| {
                Error::HypothesisViolation(format!("no anchor row for column {i}"))
            })?;
            w.push(a_of(label, i));
        }
    }
    if !is_unimaginative(&w, 3) {
        return Err(Error::HypothesisViolation(
            "anchor rows produced a twist vector that is not unimaginative".to_string(),
        ));
    }

    let ttable = build_tensor_table(&vtable, 3);
    let wv = TwistVector::new(w, 3 * d);
    let mask = erase(&ttable, wv.entries());
    let (_selected, cert) = surjective_sweep(&ttable, &mask, &wv, i0 as usize)?;
    let n = cert.n();
    Ok(ConstructionResult {
        case,
        seq,
        w: wv,
        n,
        certificate: Some(cert),
        provenance: Provenance::SurjM3,
    })
}

// ─────────────────────────────────────────────────────────────────────────
// m = 3 catalog cases
// ─────────────────────────────────────────────────────────────────────────

/// Hand-checked injective m = 3 certificate at rank `r` in `{3, 4, 5}`;
/// every row of the table is eliminated.
pub fn m3_catalog(r: i64) -> Result<ConstructionResult> {
    use Directive::{Ii, Iii, Iv, SweepIi, SweepIii, Vi, V};
    match r {
        3 => build_from_plan(
            7,
            3,
            9,
            3,
            vec![0, 0, 1, 1, 2, 2, 3],
            vec![4, 7, 10, 13, 17, 21],
            &[],
            &[
                SweepIi(1),
                SweepIi(3),
                SweepIi(4),
                SweepIi(7),
                SweepIii(6),
                Iv(2),
                Iv(1),
                Iv(5),
            ],
            Provenance::M3Catalog,
        ),
        4 => build_from_plan(
            16,
            4,
            17,
            3,
            vec![0, 0, 0, 0, 1, 1, 1, 2, 2, 2, 3, 3, 3, 4, 4, 4],
            vec![3, 5, 7, 12, 16, 19, 22, 24, 28, 31, 35, 37, 41, 44, 47],
            &[],
            &[
                Ii(1),
                Iv(1),
                Iv(2),
                Iv(3),
                Ii(4),
                Ii(4),
                Iv(4),
                Iii(5),
                Iv(5),
                Iv(6),
                Iv(7),
                Iv(8),
                Ii(9),
                Iv(9),
                Iv(10),
                Ii(11),
                Iv(11),
                Iv(12),
                Ii(13),
                Iv(13),
                Iv(14),
                Iv(15),
                Ii(16),
                Iv(16),
            ],
            Provenance::M3Catalog,
        ),
        5 => {
            let mut delta = Vec::new();
            for (v, reps) in [(0, 5), (1, 5), (2, 4), (3, 4), (4, 4), (5, 4)] {
                delta.extend(std::iter::repeat(v as i64).take(reps));
            }
            build_from_plan(
                26,
                5,
                27,
                3,
                delta,
                vec![
                    3, 6, 8, 11, 15, 18, 21, 24, 28, 31, 34, 37, 41, 44, 47, 50, 53, 56, 60, 63,
                    66, 70, 73, 76, 78,
                ],
                &[],
                &[
                    SweepIii(1),
                    SweepIii(4),
                    SweepIii(17),
                    SweepIii(24),
                    SweepIii(25),
                    SweepIii(26),
                    SweepIi(18),
                    Iv(3),
                    Iv(2),
                    Iv(23),
                    V(22, 5),
                    Iv(22),
                    Iv(21),
                    Iv(20),
                    Iv(19),
                    V(6, 0),
                    V(7, 2),
                    Iv(7),
                    Iv(6),
                    Iv(5),
                    Iv(8),
                    V(10, 2),
                    V(9, 2),
                    Iv(9),
                    Iv(10),
                    Iv(11),
                    Iv(12),
                    V(13, 3),
                    V(14, 3),
                    Iv(14),
                    Iv(13),
                    Vi(15),
                    Iv(15),
                ],
                Provenance::M3Catalog,
            )
        }
        _ => Err(Error::UnsupportedRank { r }),
    }
}

/// Certify an m = 3 case at a catalog rank by extending the catalog
/// certificate to the requested genus and degree.
pub fn m3_certify(g: i64, r: i64, d: i64) -> Result<ConstructionResult> {
    if !(3..=5).contains(&r) {
        return Err(Error::UnsupportedRank { r });
    }
    injective_extend(&m3_catalog(r)?, g, d)
}

// ─────────────────────────────────────────────────────────────────────────
// Driver
// ─────────────────────────────────────────────────────────────────────────

/// Build a certificate for one case by whichever route applies: the
/// complete `m = 2` chain; for `m = 3` the stored catalogs with column
/// extension, then the anchor-row surjective families; and otherwise a
/// search over a default sequence (value blocks followed by the `0..r`
/// cycle) within `budget`. Returns the certificate with the provenance of
/// the route that produced it.
pub fn certify_driver(
    g: i64,
    r: i64,
    d: i64,
    m: i64,
    budget: std::time::Duration,
    strict_vi: bool,
) -> Result<(Certificate, Provenance)> {
    let case = CaseParams::new(g, r, d, m)?;
    if m == 2 {
        return take_certificate(m2_certify(g, r, d)?);
    }
    if m == 3 {
        if (3..=5).contains(&r) {
            if let Ok(result) = m3_certify(g, r, d) {
                return take_certificate(result);
            }
        }
        let shortfall = r + g - d;
        if (1..=2).contains(&shortfall) {
            if let Ok(result) = surj_m3(g, r, d, shortfall) {
                return take_certificate(result);
            }
        }
    }
    let delta = default_sequence(g, r, d, 0)?;
    let w: Vec<i64> = (0..g - 1).map(|k| 2 + m * k).collect();
    let cert = crate::search::search_case(case, &delta, &w, 0, budget, strict_vi)?;
    Ok((cert, Provenance::Search))
}

fn take_certificate(result: ConstructionResult) -> Result<(Certificate, Provenance)> {
    match result.certificate {
        Some(cert) => Ok((cert, result.provenance)),
        None => Err(Error::Format(format!(
            "{} produced no replayable certificate",
            result.provenance
        ))),
    }
}

// ─────────────────────────────────────────────────────────────────────────
