//! Certificate search.
//!
//! Two engines live here. [`search_certificate`] runs a depth-first search
//! over the elimination rules: the single-outcome rules (II–V) are applied
//! greedily in preference order, while the scarce pair/family rules (VI,
//! VII) form the backtracking points; an optional full-backtracking mode
//! branches on every applicable step instead. [`surjective_sweep`] builds
//! a certificate column by column for twist vectors whose columns cover
//! every reachable value, selecting one row per value and eliminating each
//! column with unique-minimum drops — plus a paired drop when the top
//! value of a column is covered twice one step lower instead.
//!
//! The search is sound — every returned certificate is re-verified before
//! it is handed back — but incomplete: a `NotFound` outcome reports the
//! deepest state reached, not a proof that no certificate exists.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::time::{Duration, Instant};

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::rules::{
    apply_step, check_step, verify_certificate, Certificate, Rule, RuleStep, StepParams,
    VerifierState,
};
use crate::tables::{
    build_tensor_table, build_vanishing_table, erase, validate_sequence, CaseParams, ErasureMask,
    RowIndex, TensorTable, TwistVector,
};

// ─────────────────────────────────────────────────────────────────────────
// Configuration
// ─────────────────────────────────────────────────────────────────────────

/// How the initial keep-exactly-these-rows choice is made before the rule
/// replay starts.
#[derive(Clone, Debug)]
pub enum SelectionStrategy {
    /// Keep every row of the table; the requested `n` must equal the row
    /// count (the injective-range setting).
    FullRowSet,
    /// Keep exactly the given rows; their number must equal `n`.
    Explicit(Vec<RowIndex>),
    /// Choose rows with the surjective column sweep starting at column
    /// `i0`, then return the sweep's certificate directly.
    ColumnSweep { i0: usize },
    /// Try every size-`n` subset of the rows in lexicographic order,
    /// subject to [`SearchConfig::subset_cap`].
    ExhaustiveSmall,
}

/// Tuning knobs for [`search_certificate`].
#[derive(Clone, Debug)]
pub struct SearchConfig {
    /// Preference order in which rules are tried. Defaults to
    /// II, III, IV, V, VI, VII.
    pub rule_order: Vec<Rule>,
    /// Maximum depth of the backtracking stack (branching steps only;
    /// greedy drops are free).
    pub backtrack_depth: usize,
    /// How the initial row selection is chosen.
    pub selection: SelectionStrategy,
    /// Wall-clock budget for the whole search; exceeding it reports
    /// [`Error::BudgetExhausted`], distinct from a failed search.
    pub budget: Duration,
    /// Upper bound on the number of subsets `ExhaustiveSmall` may try.
    pub subset_cap: u64,
    /// Branch on every applicable step instead of committing greedily to
    /// the single-outcome rules. Exhaustive up to the depth limit, and far
    /// slower; meant for small tables and oracle comparisons.
    pub full_backtrack: bool,
    /// Require Rule VI's row pair to be present in both compared columns.
    pub strict_vi: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            rule_order: vec![Rule::II, Rule::III, Rule::IV, Rule::V, Rule::VI, Rule::VII],
            backtrack_depth: 10_000,
            selection: SelectionStrategy::FullRowSet,
            budget: Duration::from_secs(10),
            subset_cap: 1_000_000,
            full_backtrack: false,
            strict_vi: true,
        }
    }
}

/// `C(n, k)` with an early exit: `None` when the count exceeds `cap`.
fn subset_count_within_cap(n: usize, k: usize, cap: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i as u128 + 1);
        if acc > cap as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

// ─────────────────────────────────────────────────────────────────────────
// Searcher
// ─────────────────────────────────────────────────────────────────────────

/// Outcome of exploring one subtree.
enum Explored {
    Found(Vec<RuleStep>),
    /// Every branch below failed outright; the state may be memoized.
    Exhausted,
    /// The depth limit truncated the subtree, so failure is inconclusive.
    Cut,
}

struct Searcher<'a> {
    ttable: &'a TensorTable,
    /// Single-outcome rules applied greedily, in preference order.
    greedy_rules: Vec<Rule>,
    /// Branching rules, in preference order.
    branch_rules: Vec<Rule>,
    backtrack_depth: usize,
    full_backtrack: bool,
    deadline: Instant,
    visited: u64,
    /// Remaining-row sets already proven dead, as packed bitmasks.
    memo: HashSet<Vec<u64>>,
    /// Fewest remaining rows observed, with the rows themselves.
    deepest: Option<(usize, Vec<RowIndex>)>,
    /// Names of rules that produced at least one applicable step.
    attempted: BTreeSet<&'static str>,
}

impl<'a> Searcher<'a> {
    fn new(ttable: &'a TensorTable, config: &SearchConfig) -> Self {
        let single = [Rule::II, Rule::III, Rule::IV, Rule::V];
        let greedy_rules: Vec<Rule> = config
            .rule_order
            .iter()
            .copied()
            .filter(|rule| single.contains(rule))
            .collect();
        let branch_rules: Vec<Rule> = if config.full_backtrack {
            config.rule_order.clone()
        } else {
            config
                .rule_order
                .iter()
                .copied()
                .filter(|rule| !single.contains(rule))
                .collect()
        };
        Searcher {
            ttable,
            greedy_rules,
            branch_rules,
            backtrack_depth: config.backtrack_depth,
            full_backtrack: config.full_backtrack,
            deadline: Instant::now() + config.budget,
            visited: 0,
            memo: HashSet::new(),
            deepest: None,
            attempted: BTreeSet::new(),
        }
    }

    fn tick(&mut self) -> Result<()> {
        self.visited += 1;
        if Instant::now() >= self.deadline {
            return Err(Error::BudgetExhausted {
                visited: self.visited,
            });
        }
        Ok(())
    }

    fn note_deepest(&mut self, state: &VerifierState) {
        let count = state.remaining_count();
        if self.deepest.as_ref().is_none_or(|(best, _)| count < *best) {
            self.deepest = Some((count, state.remaining_labels()));
        }
    }

    fn state_key(&self, state: &VerifierState) -> Vec<u64> {
        let words = self.ttable.num_rows().div_ceil(64);
        let mut key = vec![0u64; words];
        for row in state.remaining_rows() {
            key[row / 64] |= 1 << (row % 64);
        }
        key
    }

    /// Applicable steps of one rule in column order, validated against the
    /// current state. With `first_only` the scan stops at the first hit.
    fn candidates(
        &mut self,
        state: &VerifierState<'a>,
        rule: Rule,
        first_only: bool,
    ) -> Vec<RuleStep> {
        let mut out = Vec::new();
        for step in proposals(state, rule) {
            if check_step(state, 0, &step).is_ok() {
                self.attempted.insert(rule.name());
                out.push(step);
                if first_only {
                    break;
                }
            }
        }
        out
    }

    fn first_greedy_step(&mut self, state: &VerifierState<'a>) -> Option<RuleStep> {
        let rules = self.greedy_rules.clone();
        for rule in rules {
            if let Some(step) = self.candidates(state, rule, true).into_iter().next() {
                return Some(step);
            }
        }
        None
    }

    fn dfs(
        &mut self,
        mut state: VerifierState<'a>,
        mut steps: Vec<RuleStep>,
        depth: usize,
    ) -> Result<Explored> {
        self.tick()?;
        if !self.full_backtrack {
            // Greedy phase: commit to single-outcome drops without
            // branching until none is left.
            while state.remaining_count() > 0 {
                let Some(step) = self.first_greedy_step(&state) else {
                    break;
                };
                state = apply_step(&state, steps.len(), &step)?;
                steps.push(step);
                self.tick()?;
            }
        }
        if state.remaining_count() == 0 {
            return Ok(Explored::Found(steps));
        }
        self.note_deepest(&state);
        let key = self.state_key(&state);
        if self.memo.contains(&key) {
            return Ok(Explored::Exhausted);
        }
        if depth >= self.backtrack_depth {
            return Ok(Explored::Cut);
        }
        let mut cut = false;
        let branch_rules = self.branch_rules.clone();
        for rule in branch_rules {
            for step in self.candidates(&state, rule, false) {
                let next = apply_step(&state, steps.len(), &step)?;
                let mut next_steps = steps.clone();
                next_steps.push(step);
                match self.dfs(next, next_steps, depth + 1)? {
                    Explored::Found(done) => return Ok(Explored::Found(done)),
                    Explored::Cut => cut = true,
                    Explored::Exhausted => {}
                }
            }
        }
        if cut {
            Ok(Explored::Cut)
        } else {
            // Only a fully explored failure may be memoized: a subtree cut
            // off by the depth limit could still succeed when reached via
            // a shorter branch prefix.
            self.memo.insert(key);
            Ok(Explored::Exhausted)
        }
    }
}

// ─────────────────────────────────────────────────────────────────────────
// Step proposals
// ─────────────────────────────────────────────────────────────────────────

/// Cheap, possibly overeager step proposals for `rule`; callers validate
/// each one with [`check_step`] before use. Rule VI proposals follow the
/// strict reading (the pair itself appears in both compared columns).
fn proposals(state: &VerifierState, rule: Rule) -> Vec<RuleStep> {
    let table = state.table();
    let g = table.g();
    let labels = table.labels();
    let mut out = Vec::new();
    match rule {
        Rule::II | Rule::III => {
            let use_b = rule == Rule::III;
            for col in 0..g {
                let app = state.appearing_rows(col);
                let value = |row: usize| {
                    if use_b {
                        table.b(row, col)
                    } else {
                        table.a(row, col)
                    }
                };
                let Some(&best) = app.iter().min_by_key(|&&row| value(row)) else {
                    continue;
                };
                let strict = app
                    .iter()
                    .all(|&other| other == best || value(other) > value(best));
                if strict {
                    out.push(RuleStep::new(rule, col + 1, vec![labels[best].clone()]));
                }
            }
        }
        Rule::IV => {
            for col in 0..g {
                let app = state.appearing_rows(col);
                if (1..=2).contains(&app.len()) {
                    let rows = app.iter().map(|&row| labels[row].clone()).collect();
                    out.push(RuleStep::new(Rule::IV, col + 1, rows));
                }
            }
        }
        Rule::V => {
            for col in 0..g {
                let app = state.appearing_rows(col);
                if app.is_empty() {
                    continue;
                }
                let delta_i = table.seq().entries()[col];
                for j in 0..=table.r() {
                    if j == delta_i {
                        continue;
                    }
                    let mult = |row: usize| labels[row].multiplicity(j) as i64;
                    let n = app.iter().map(|&row| mult(row)).min().unwrap();
                    let exact: Vec<usize> =
                        app.iter().copied().filter(|&row| mult(row) == n).collect();
                    if let [row] = exact[..] {
                        out.push(RuleStep::with_params(
                            Rule::V,
                            col + 1,
                            vec![labels[row].clone()],
                            StepParams::V { j, n },
                        ));
                    }
                }
            }
        }
        Rule::VI => {
            for col in 0..g.saturating_sub(1) {
                let app = state.appearing_rows(col);
                if app.len() < 2 {
                    continue;
                }
                let amin = app.iter().map(|&row| table.a(row, col)).min().unwrap();
                let tied: Vec<usize> = app
                    .iter()
                    .copied()
                    .filter(|&row| table.a(row, col) == amin)
                    .collect();
                if tied.len() != 2 {
                    continue;
                }
                let rows: Vec<RowIndex> =
                    tied.iter().map(|&row| labels[row].clone()).collect();
                // The two witness choices drop the same rows; the first
                // valid one wins at validation time.
                for witness in [col + 1, col + 2] {
                    out.push(RuleStep::with_params(
                        Rule::VI,
                        col + 1,
                        rows.clone(),
                        StepParams::Vi {
                            witness_column: witness,
                        },
                    ));
                }
            }
        }
        Rule::VII => {
            if table.m() != 2 {
                return out;
            }
            let entries = table.seq().entries();
            for col in 0..g {
                let delta_i = entries[col];
                let run = entries[col..].iter().take_while(|&&v| v == delta_i).count();
                let diag = RowIndex::diagonal(delta_i, 2);
                let diag_pos = table
                    .row_position(&diag)
                    .expect("diagonal row exists in every table");
                for n in 2..=run {
                    let mut family = BTreeSet::new();
                    for c in col..col + n {
                        family.extend(
                            state.appearing_rows(c).into_iter().filter(|&row| row != diag_pos),
                        );
                    }
                    if family.len() != n {
                        continue;
                    }
                    let mut rows: Vec<RowIndex> =
                        family.iter().map(|&row| labels[row].clone()).collect();
                    if state.is_remaining(diag_pos) {
                        rows.push(diag.clone());
                    }
                    out.push(RuleStep::with_params(
                        Rule::VII,
                        col + 1,
                        rows,
                        StepParams::Vii { n },
                    ));
                }
            }
        }
    }
    out
}

// ─────────────────────────────────────────────────────────────────────────
// Entry points
// ─────────────────────────────────────────────────────────────────────────

fn make_certificate(
    ttable: &TensorTable,
    w: &TwistVector,
    selected: Vec<RowIndex>,
    steps: Vec<RuleStep>,
) -> Result<Certificate> {
    let case = CaseParams::new(ttable.g() as i64, ttable.r(), ttable.d(), ttable.m())?;
    Ok(Certificate::new(
        case,
        ttable.seq().entries().to_vec(),
        ttable.seq().shift(),
        w.entries().to_vec(),
        selected,
        steps,
    ))
}

fn check_dimensions(ttable: &TensorTable, mask: &ErasureMask, w: &TwistVector) -> Result<()> {
    if w.entries().len() + 1 != ttable.g() {
        return Err(Error::LengthMismatch {
            expected: ttable.g() - 1,
            got: w.entries().len(),
        });
    }
    if mask.num_rows() != ttable.num_rows() || mask.num_cols() != ttable.g() {
        return Err(Error::Format(
            "erasure mask dimensions do not match the table".into(),
        ));
    }
    Ok(())
}

/// Search for a certificate that eliminates `n` rows of `ttable`.
///
/// `mask` must be the erasure mask of `ttable` against `w`; the twist
/// vector is recorded in the returned certificate, which has already been
/// re-verified. On failure, [`Error::NotFound`] describes the deepest
/// remaining-set reached and the rules attempted — failure does not prove
/// that no certificate exists. A blown time budget is reported separately
/// as [`Error::BudgetExhausted`].
pub fn search_certificate(
    ttable: &TensorTable,
    mask: &ErasureMask,
    w: &TwistVector,
    n: usize,
    config: &SearchConfig,
) -> Result<Certificate> {
    check_dimensions(ttable, mask, w)?;
    let rows = ttable.num_rows();
    if n > rows {
        return Err(Error::OutOfScope(format!(
            "cannot eliminate {n} of {rows} rows"
        )));
    }
    if n == 0 {
        let cert = make_certificate(ttable, w, Vec::new(), Vec::new())?;
        return Ok(cert);
    }

    let mut searcher = Searcher::new(ttable, config);
    let mut selections: Vec<Vec<RowIndex>> = Vec::new();
    match &config.selection {
        SelectionStrategy::FullRowSet => {
            if n != rows {
                return Err(Error::OutOfScope(format!(
                    "full-row selection keeps all {rows} rows, but n = {n} was requested"
                )));
            }
            selections.push(ttable.labels().to_vec());
        }
        SelectionStrategy::Explicit(chosen) => {
            if chosen.len() != n {
                return Err(Error::OutOfScope(format!(
                    "explicit selection has {} rows, but n = {n} was requested",
                    chosen.len()
                )));
            }
            selections.push(chosen.clone());
        }
        SelectionStrategy::ColumnSweep { i0 } => {
            let (_, cert) = surjective_sweep(ttable, mask, w, *i0)?;
            if cert.n() != n {
                return Err(Error::OutOfScope(format!(
                    "column sweep selects {} rows, but n = {n} was requested",
                    cert.n()
                )));
            }
            return Ok(cert);
        }
        SelectionStrategy::ExhaustiveSmall => {
            if subset_count_within_cap(rows, rows - n, config.subset_cap).is_none() {
                return Err(Error::OutOfScope(format!(
                    "C({rows}, {}) exceeds the subset cap {}",
                    rows - n,
                    config.subset_cap
                )));
            }
            for combo in (0..rows).combinations(n) {
                selections.push(combo.into_iter().map(|row| ttable.labels()[row].clone()).collect());
            }
        }
    }

    for selected in selections {
        let state = VerifierState::new(ttable, mask, &selected, config.strict_vi)?;
        if let Explored::Found(steps) = searcher.dfs(state, Vec::new(), 0)? {
            let cert = make_certificate(ttable, w, selected, steps)?;
            let report = verify_certificate(ttable, mask, &cert, config.strict_vi);
            if !report.valid {
                return Err(Error::Format(format!(
                    "internal: searched certificate failed re-verification: {}",
                    report.failure.unwrap_or_default()
                )));
            }
            return Ok(cert);
        }
    }

    let (deep_count, deep_labels) = searcher.deepest.unwrap_or((n, Vec::new()));
    let shown: Vec<String> = deep_labels.iter().take(12).map(ToString::to_string).collect();
    let ellipsis = if deep_labels.len() > 12 { ", …" } else { "" };
    let attempted = if searcher.attempted.is_empty() {
        "none applicable".to_string()
    } else {
        searcher.attempted.iter().copied().collect::<Vec<_>>().join(", ")
    };
    Err(Error::NotFound(format!(
        "deepest state reached has {deep_count} of {n} rows remaining ({}{}); \
         rules attempted: {attempted}",
        shown.join(", "),
        ellipsis
    )))
}

/// Search with automatic strategy choice for one fully specified case:
/// validate `delta` and `w`, build the tables, target the full rank bound,
/// and search. The full row set is kept in the injective range; otherwise
/// the column sweep is tried from every start column, then small-subset
/// enumeration, all within `budget`.
pub fn search_case(
    case: CaseParams,
    delta: &[i64],
    w: &[i64],
    shift: i64,
    budget: Duration,
    strict_vi: bool,
) -> Result<Certificate> {
    let seq = validate_sequence(delta, case.g as usize, case.r, case.d, shift)?;
    if w.len() + 1 != case.g as usize {
        return Err(Error::LengthMismatch {
            expected: case.g as usize - 1,
            got: w.len(),
        });
    }
    let vtable = build_vanishing_table(&seq, case.d);
    let ttable = build_tensor_table(&vtable, case.m);
    let twist = TwistVector::new(w.to_vec(), case.m * case.d);
    let mask = erase(&ttable, w);
    let n = case.target_rank().max(0) as usize;

    let mut config = SearchConfig {
        budget,
        strict_vi,
        ..SearchConfig::default()
    };
    if n == ttable.num_rows() {
        config.selection = SelectionStrategy::FullRowSet;
        return search_certificate(&ttable, &mask, &twist, n, &config);
    }

    let deadline = Instant::now() + budget;
    let remaining = |last_err: &Option<Error>| -> Result<Duration> {
        match deadline.checked_duration_since(Instant::now()) {
            Some(left) if !left.is_zero() => Ok(left),
            _ => Err(match last_err {
                Some(Error::NotFound(msg)) => Error::NotFound(msg.clone()),
                _ => Error::BudgetExhausted { visited: 0 },
            }),
        }
    };
    let mut last_err: Option<Error> = None;
    for i0 in 1..=case.g as usize {
        config.selection = SelectionStrategy::ColumnSweep { i0 };
        config.budget = remaining(&last_err)?;
        match search_certificate(&ttable, &mask, &twist, n, &config) {
            Ok(cert) => return Ok(cert),
            Err(err @ Error::BudgetExhausted { .. }) => return Err(err),
            Err(err) => last_err = Some(err),
        }
    }
    config.selection = SelectionStrategy::ExhaustiveSmall;
    config.budget = remaining(&last_err)?;
    match search_certificate(&ttable, &mask, &twist, n, &config) {
        Ok(cert) => Ok(cert),
        // Subset enumeration refused outright (too many subsets): report
        // the most informative sweep failure instead.
        Err(Error::OutOfScope(_)) if last_err.is_some() => Err(last_err.unwrap()),
        Err(err) => Err(err),
    }
}

// ─────────────────────────────────────────────────────────────────────────
// Surjective column sweep
// ─────────────────────────────────────────────────────────────────────────

/// Build a certificate for `n = md + 1 − g` by sweeping columns left to
/// right from `i0`, keeping one row per required value.
///
/// Writing `c_1 = 0`, `c_{i+1} = w_i`, `c_{g+1} = md`, the required values
/// are `0` and `i0..c_{i0+1}` in column `i0`, `c_i+1..c_{i+1}` in each later
/// column `i < g`, and `c_g+1..md−2` plus `md` in column `g`. Each column
/// is cleared by unique-minimum drops in increasing value order; when a
/// column's top value is missing but the value below it appears at least
/// twice, two rows of that value are kept and cleared by a paired drop
/// instead. A required value with no available row is a
/// [`Error::CoverageGap`].
///
/// `mask` must be the erasure mask of `ttable` against `w`. The returned
/// selection lists rows in the order they were picked; the certificate has
/// been re-verified.
pub fn surjective_sweep(
    ttable: &TensorTable,
    mask: &ErasureMask,
    w: &TwistVector,
    i0: usize,
) -> Result<(Vec<RowIndex>, Certificate)> {
    check_dimensions(ttable, mask, w)?;
    let g = ttable.g();
    let md = ttable.md();
    let labels = ttable.labels();
    if i0 < 1 || i0 > g {
        return Err(Error::HypothesisViolation(format!(
            "start column {i0} outside 1..={g}"
        )));
    }
    // 1-based twist boundaries with c(1) = 0 and c(g+1) = md.
    let c = |i: usize| -> i64 {
        if i <= 1 {
            0
        } else if i > g {
            md
        } else {
            w.entries()[i - 2]
        }
    };
    let target = md + 1 - g as i64;
    if target < 0 || target > ttable.num_rows() as i64 {
        return Err(Error::HypothesisViolation(format!(
            "sweep needs 0 <= md + 1 - g <= C(r+m, m), got {target}"
        )));
    }
    for i in 2..=g {
        if c(i + 1) <= c(i) {
            return Err(Error::HypothesisViolation(format!(
                "column {i} has nonpositive width: c_{} = {} <= c_{i} = {}",
                i + 1,
                c(i + 1),
                c(i)
            )));
        }
    }
    if c(i0 + 1) < i0 as i64 {
        return Err(Error::HypothesisViolation(format!(
            "start column {i0} cannot absorb the leading drops: c_{} = {} < {i0}",
            i0 + 1,
            c(i0 + 1)
        )));
    }

    let mut chosen: HashSet<usize> = HashSet::new();
    let mut selected: Vec<RowIndex> = Vec::new();
    let mut steps: Vec<RuleStep> = Vec::new();

    for col in i0..=g {
        let mut values: Vec<i64> = if col == i0 {
            std::iter::once(0).chain(i0 as i64..c(i0 + 1)).collect()
        } else if col == g {
            (c(g) + 1..md - 1).chain(std::iter::once(md)).collect()
        } else {
            (c(col) + 1..c(col + 1)).collect()
        };

        // Unchosen rows present in this column, grouped by a-value.
        let mut by_value: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        for row in 0..ttable.num_rows() {
            if !chosen.contains(&row) && mask.present(row, col - 1) {
                by_value.entry(ttable.a(row, col - 1)).or_default().push(row);
            }
        }

        let mut doubled: Option<i64> = None;
        if let Some(&top) = values.last() {
            if !by_value.contains_key(&top) {
                let below = top - 1;
                let twice = values.contains(&below)
                    && by_value.get(&below).is_some_and(|rows| rows.len() >= 2);
                if !twice {
                    return Err(Error::CoverageGap {
                        column: col,
                        value: top,
                    });
                }
                values.pop();
                doubled = Some(below);
            }
        }
        for &v in &values {
            if !by_value.contains_key(&v) {
                return Err(Error::CoverageGap {
                    column: col,
                    value: v,
                });
            }
        }

        let mut picked: Vec<usize> = Vec::new();
        for &v in &values {
            let mut cands = by_value[&v].clone();
            // Prefer rows that are erased in the next column: they are
            // useless later, so spending them here wastes nothing.
            cands.sort_by_key(|&row| {
                let spills = col < g && mask.present(row, col);
                (spills, labels[row].clone())
            });
            picked.push(cands[0]);
            if doubled == Some(v) {
                picked.push(cands[1]);
            }
        }
        for &row in &picked {
            chosen.insert(row);
            selected.push(labels[row].clone());
        }
        let pair_from = if doubled.is_some() {
            picked.len() - 2
        } else {
            picked.len()
        };
        for (k, &row) in picked.iter().enumerate() {
            if k < pair_from {
                steps.push(RuleStep::new(Rule::II, col, vec![labels[row].clone()]));
            } else if k == pair_from {
                steps.push(RuleStep::new(
                    Rule::IV,
                    col,
                    vec![
                        labels[picked[pair_from]].clone(),
                        labels[picked[pair_from + 1]].clone(),
                    ],
                ));
            }
        }
    }

    if selected.len() as i64 != target {
        return Err(Error::HypothesisViolation(format!(
            "sweep selected {} rows, expected md + 1 - g = {target}",
            selected.len()
        )));
    }
    let cert = make_certificate(ttable, w, selected.clone(), steps)?;
    let report = verify_certificate(ttable, mask, &cert, true);
    if !report.valid {
        return Err(Error::HypothesisViolation(format!(
            "sweep certificate failed verification: {}",
            report.failure.unwrap_or_default()
        )));
    }
    Ok((selected, cert))
}

// ─────────────────────────────────────────────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tables::{
        build_tensor_table, build_vanishing_table, erase, row_indices, validate_sequence,
    };

    fn setup(
        g: usize,
        r: i64,
        d: i64,
        m: i64,
        delta: &[i64],
        w: &[i64],
    ) -> (TensorTable, ErasureMask, TwistVector) {
        let seq = validate_sequence(delta, g, r, d, 0).unwrap();
        let vtable = build_vanishing_table(&seq, d);
        let ttable = build_tensor_table(&vtable, m);
        let mask = erase(&ttable, w);
        let twist = TwistVector::new(w.to_vec(), m * d);
        (ttable, mask, twist)
    }

    /// Twist vector of the canonical-series sweep: `c_i` is the `a`-value
    /// of row `(i−2, …, i−2, r)` in column `i` (independent of the twist).
    fn canonical_w(ttable: &TensorTable, r: i64, m: i64) -> Vec<i64> {
        (2..=ttable.g())
            .map(|i| {
                let mut entries = vec![i as i64 - 2; (m - 1) as usize];
                entries.push(r);
                let row = ttable.row_position(&RowIndex::new(entries)).unwrap();
                ttable.a(row, i - 1)
            })
            .collect()
    }

    #[test]
    fn canonical_series_sweep_succeeds_for_all_small_ranks() {
        for r in 3..=8i64 {
            for m in [2i64, 3] {
                let g = (r + 1) as usize;
                let d = 2 * r;
                let delta: Vec<i64> = (0..=r).collect();
                let seq = validate_sequence(&delta, g, r, d, 0).unwrap();
                let vtable = build_vanishing_table(&seq, d);
                let ttable = build_tensor_table(&vtable, m);
                let w = canonical_w(&ttable, r, m);
                assert_eq!(w[0], r + 1, "r={r} m={m}: first boundary");
                for k in 1..w.len() {
                    assert_eq!(w[k] - w[k - 1], 2 * (m - 1) + 1, "r={r} m={m}: gap {k}");
                }
                let mask = erase(&ttable, &w);
                let twist = TwistVector::new(w.clone(), m * d);
                let (selected, cert) =
                    surjective_sweep(&ttable, &mask, &twist, 1).unwrap();
                let n = (m * d + 1 - g as i64) as usize;
                assert_eq!(selected.len(), n, "r={r} m={m}");
                assert_eq!(cert.n(), n);
            }
        }
    }

    #[test]
    fn sweep_doubles_top_value_with_paired_finish() {
        // Raising the middle boundary by one removes the top value of
        // column 2 but leaves the value below it covered twice.
        let (ttable, mask, w) = setup(4, 3, 6, 2, &[0, 1, 2, 3], &[4, 8, 10]);
        let (selected, cert) = surjective_sweep(&ttable, &mask, &w, 1).unwrap();
        assert_eq!(selected.len(), 9);
        assert!(cert.steps.iter().any(|step| step.rule == Rule::IV));
    }

    #[test]
    fn sweep_reports_coverage_gap() {
        // Raising the middle boundary by two leaves value 8 of column 2
        // with no row at all.
        let (ttable, mask, w) = setup(4, 3, 6, 2, &[0, 1, 2, 3], &[4, 9, 10]);
        let err = surjective_sweep(&ttable, &mask, &w, 1).unwrap_err();
        match err {
            Error::CoverageGap { column, value } => {
                assert_eq!((column, value), (2, 8));
            }
            other => panic!("expected CoverageGap, got {other}"),
        }
    }

    #[test]
    fn greedy_saturation_is_pure_rule_ii_after_exclusion() {
        let (ttable, mask, w) = setup(4, 3, 6, 2, &[0, 1, 2, 3], &[2, 6, 8]);
        let excluded = RowIndex::new(vec![0, 3]);
        let kept: Vec<RowIndex> = row_indices(3, 2)
            .into_iter()
            .filter(|row| *row != excluded)
            .collect();
        let config = SearchConfig {
            rule_order: vec![Rule::II],
            selection: SelectionStrategy::Explicit(kept),
            ..SearchConfig::default()
        };
        let cert = search_certificate(&ttable, &mask, &w, 9, &config).unwrap();
        assert_eq!(cert.n(), 9);
        assert!(cert.steps.iter().all(|step| step.rule == Rule::II));
    }

    #[test]
    fn full_table_search_backtracks_through_a_scarce_rule() {
        // The full 15-row table needs a paired or family drop in the
        // middle block; the greedy rules alone jam.
        let (ttable, mask, w) = setup(
            10,
            4,
            12,
            2,
            &[0, 0, 1, 1, 2, 2, 3, 3, 4, 4],
            &[2, 4, 7, 9, 12, 15, 17, 20, 22],
        );
        let cert = search_certificate(&ttable, &mask, &w, 15, &SearchConfig::default()).unwrap();
        assert_eq!(cert.n(), 15);
        assert!(cert
            .steps
            .iter()
            .any(|step| step.rule == Rule::VI || step.rule == Rule::VII));
    }

    #[test]
    fn exhaustive_selection_finds_a_workable_exclusion() {
        let (ttable, mask, w) = setup(4, 3, 6, 2, &[0, 1, 2, 3], &[2, 6, 8]);
        let config = SearchConfig {
            selection: SelectionStrategy::ExhaustiveSmall,
            ..SearchConfig::default()
        };
        let cert = search_certificate(&ttable, &mask, &w, 9, &config).unwrap();
        assert_eq!(cert.n(), 9);
        assert_eq!(cert.selected.len(), 9);
    }

    #[test]
    fn keeping_every_row_of_a_deficient_table_fails() {
        // With all ten rows kept, two rows tie in every shared column and
        // no scarce rule separates them; the search must report failure,
        // not hang or panic.
        let (ttable, mask, w) = setup(4, 3, 6, 2, &[0, 1, 2, 3], &[2, 6, 8]);
        let config = SearchConfig {
            full_backtrack: true,
            ..SearchConfig::default()
        };
        let err = search_certificate(&ttable, &mask, &w, 10, &config).unwrap_err();
        match err {
            Error::NotFound(message) => {
                assert!(message.contains("rows remaining"), "message: {message}");
                assert!(message.contains("rules attempted"), "message: {message}");
            }
            other => panic!("expected NotFound, got {other}"),
        }
    }

    #[test]
    fn zero_budget_is_reported_distinctly() {
        let (ttable, mask, w) = setup(4, 3, 6, 2, &[0, 1, 2, 3], &[2, 6, 8]);
        let config = SearchConfig {
            budget: Duration::ZERO,
            ..SearchConfig::default()
        };
        let err = search_certificate(&ttable, &mask, &w, 10, &config).unwrap_err();
        assert!(matches!(err, Error::BudgetExhausted { .. }));
    }

    #[test]
    fn zero_rows_yields_the_empty_certificate() {
        let (ttable, mask, w) = setup(4, 3, 6, 2, &[0, 1, 2, 3], &[2, 6, 8]);
        let cert = search_certificate(&ttable, &mask, &w, 0, &SearchConfig::default()).unwrap();
        assert_eq!(cert.n(), 0);
        assert!(cert.steps.is_empty());
        let report = verify_certificate(&ttable, &mask, &cert, true);
        assert!(report.valid);
    }

    #[test]
    fn full_row_selection_rejects_mismatched_n() {
        let (ttable, mask, w) = setup(4, 3, 6, 2, &[0, 1, 2, 3], &[2, 6, 8]);
        let err =
            search_certificate(&ttable, &mask, &w, 9, &SearchConfig::default()).unwrap_err();
        assert!(matches!(err, Error::OutOfScope(_)));
    }

    #[test]
    fn subset_cap_guards_exhaustive_selection() {
        let (ttable, mask, w) = setup(4, 3, 6, 2, &[0, 1, 2, 3], &[2, 6, 8]);
        let config = SearchConfig {
            selection: SelectionStrategy::ExhaustiveSmall,
            subset_cap: 3,
            ..SearchConfig::default()
        };
        let err = search_certificate(&ttable, &mask, &w, 5, &config).unwrap_err();
        assert!(matches!(err, Error::OutOfScope(_)));
    }

    #[test]
    fn subset_counter_matches_binomials() {
        assert_eq!(subset_count_within_cap(10, 1, 100), Some(10));
        assert_eq!(subset_count_within_cap(10, 5, 1000), Some(252));
        assert_eq!(subset_count_within_cap(10, 5, 251), None);
        assert_eq!(subset_count_within_cap(5, 9, 10), Some(0));
    }
}
