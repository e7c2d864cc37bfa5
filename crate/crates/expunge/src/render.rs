//! Table rendering: plain-text grids, CSV cell grids, and LaTeX tabulars.
//!
//! Every renderer works from a [`TableView`], a format-independent snapshot
//! of one table: row labels, `(a, b)` cells with erased cells as `None`,
//! and optional twist boundary rows (the `c_i` across the top and
//! `md − c_i` across the bottom). Views are built from the section table,
//! the row-sum table, or the row-sum table with its erasure mask applied.
//!
//! Row order is lexicographic by default; builders accept an explicit
//! permutation so printed layouts that interleave degrees can be
//! reproduced exactly.

use crate::error::{Error, Result};
use crate::tables::{ErasureMask, TensorTable, TwistVector, VanishingTable};

// ─────────────────────────────────────────────────────────────────────────
// Views
// ─────────────────────────────────────────────────────────────────────────

/// One cell: the `(a, b)` pair, or `None` where the erasure mask hides it.
pub type Cell = Option<(i64, i64)>;

/// A format-independent table snapshot ready for rendering.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableView {
    /// One label per row: a section index or a row-index tuple.
    pub row_labels: Vec<String>,
    /// `cells[row][col]`, all rows the same width.
    pub cells: Vec<Vec<Cell>>,
    /// Twist boundaries `c_1 … c_g` shown above the grid, when known.
    pub header: Option<Vec<i64>>,
    /// Complements `md − c_1 … md − c_g` shown below the grid, when known.
    pub footer: Option<Vec<i64>>,
}

impl TableView {
    pub fn num_rows(&self) -> usize {
        self.cells.len()
    }

    pub fn num_cols(&self) -> usize {
        self.cells.first().map_or(0, Vec::len)
    }
}

/// Resolve an optional row permutation: entries are storage positions in
/// the order they should be printed.
fn print_order(num_rows: usize, order: Option<&[usize]>) -> Result<Vec<usize>> {
    match order {
        None => Ok((0..num_rows).collect()),
        Some(perm) => {
            let mut seen = vec![false; num_rows];
            for &p in perm {
                if p >= num_rows || seen[p] {
                    return Err(Error::Format(format!(
                        "row order must be a permutation of 0..{num_rows}"
                    )));
                }
                seen[p] = true;
            }
            if perm.len() != num_rows {
                return Err(Error::Format(format!(
                    "row order lists {} of {num_rows} rows",
                    perm.len()
                )));
            }
            Ok(perm.to_vec())
        }
    }
}

/// View of the per-section order table: one row per section index.
pub fn vanishing_view(vtable: &VanishingTable) -> TableView {
    let g = vtable.g();
    let rows = (vtable.r() + 1) as usize;
    TableView {
        row_labels: (0..rows).map(|j| j.to_string()).collect(),
        cells: (0..rows)
            .map(|j| (0..g).map(|col| Some(vtable.pair(j, col))).collect())
            .collect(),
        header: None,
        footer: None,
    }
}

/// View of the full row-sum table, optionally in a custom row order.
pub fn tensor_view(ttable: &TensorTable, order: Option<&[usize]>) -> Result<TableView> {
    let g = ttable.g();
    let order = print_order(ttable.num_rows(), order)?;
    Ok(TableView {
        row_labels: order
            .iter()
            .map(|&row| ttable.labels()[row].to_string())
            .collect(),
        cells: order
            .iter()
            .map(|&row| (0..g).map(|col| Some(ttable.pair(row, col))).collect())
            .collect(),
        header: None,
        footer: None,
    })
}

/// View of the row-sum table with its erasure mask applied and the twist
/// boundaries on display: `c_i` on top, `md − c_i` underneath.
pub fn erased_view(
    ttable: &TensorTable,
    mask: &ErasureMask,
    w: &TwistVector,
    order: Option<&[usize]>,
) -> Result<TableView> {
    let g = ttable.g();
    let md = ttable.md();
    let order = print_order(ttable.num_rows(), order)?;
    // c_1 = 0; later boundaries come from the twist vector.
    let boundaries: Vec<i64> = std::iter::once(0)
        .chain(w.entries().iter().copied())
        .collect();
    Ok(TableView {
        row_labels: order
            .iter()
            .map(|&row| ttable.labels()[row].to_string())
            .collect(),
        cells: order
            .iter()
            .map(|&row| {
                (0..g)
                    .map(|col| mask.present(row, col).then(|| ttable.pair(row, col)))
                    .collect()
            })
            .collect(),
        header: Some(boundaries.clone()),
        footer: Some(boundaries.iter().map(|&c| md - c).collect()),
    })
}

// ─────────────────────────────────────────────────────────────────────────
// Text
// ─────────────────────────────────────────────────────────────────────────

fn cell_text(cell: &Cell) -> String {
    match cell {
        Some((a, b)) => format!("{a}:{b}"),
        None => "·".to_string(),
    }
}

/// Fixed-width text grid: label column, one column per table column, twist
/// boundary rows when the view carries them.
pub fn to_text(view: &TableView) -> String {
    let cols = view.num_cols();
    let mut label_width = view.row_labels.iter().map(String::len).max().unwrap_or(0);
    if view.header.is_some() {
        label_width = label_width.max("md-c".len());
    }
    let mut widths = vec![0usize; cols];
    let mut texts: Vec<Vec<String>> = Vec::with_capacity(view.num_rows());
    for row in &view.cells {
        let rendered: Vec<String> = row.iter().map(cell_text).collect();
        for (w, t) in widths.iter_mut().zip(&rendered) {
            *w = (*w).max(t.chars().count());
        }
        texts.push(rendered);
    }
    for extra in [&view.header, &view.footer].into_iter().flatten() {
        for (w, v) in widths.iter_mut().zip(extra) {
            *w = (*w).max(v.to_string().len());
        }
    }

    let mut out = String::new();
    let mut push_line = |label: &str, cells: Vec<String>| {
        out.push_str(&format!("{label:<label_width$}"));
        for (width, text) in widths.iter().zip(cells) {
            let pad = width - text.chars().count();
            out.push_str("  ");
            out.push_str(&" ".repeat(pad));
            out.push_str(&text);
        }
        out.push('\n');
    };

    if let Some(header) = &view.header {
        push_line("c", header.iter().map(i64::to_string).collect());
    }
    for (label, cells) in view.row_labels.iter().zip(texts) {
        push_line(label, cells);
    }
    if let Some(footer) = &view.footer {
        push_line("md-c", footer.iter().map(i64::to_string).collect());
    }
    out
}

// ─────────────────────────────────────────────────────────────────────────
// CSV
// ─────────────────────────────────────────────────────────────────────────

/// Bare CSV cell grid — one record per row, one `a:b` or `·` field per
/// column. Labels and twist rows are deliberately omitted so the output is
/// exactly an `N × g` grid.
pub fn to_csv(view: &TableView) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in &view.cells {
        let record: Vec<String> = row.iter().map(cell_text).collect();
        writer
            .write_record(&record)
            .map_err(|e| Error::Format(format!("CSV write failed: {e}")))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::Format(format!("CSV write failed: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Format(format!("CSV is not UTF-8: {e}")))
}

/// Parse a grid produced by [`to_csv`] back into its cells.
pub fn parse_csv(text: &str) -> Result<Vec<Vec<Cell>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<Cell>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Format(format!("CSV parse failed: {e}")))?;
        let mut row: Vec<Cell> = Vec::with_capacity(record.len());
        for field in record.iter() {
            row.push(parse_cell(field)?);
        }
        rows.push(row);
    }
    if let Some(width) = rows.first().map(Vec::len) {
        if rows.iter().any(|row| row.len() != width) {
            return Err(Error::Format("CSV rows have differing widths".to_string()));
        }
    }
    Ok(rows)
}

fn parse_cell(field: &str) -> Result<Cell> {
    let field = field.trim();
    if field == "·" || field == "." {
        return Ok(None);
    }
    let (a, b) = field
        .split_once(':')
        .ok_or_else(|| Error::Format(format!("cell {field:?} is not `a:b` or `·`")))?;
    let parse = |s: &str| {
        s.trim()
            .parse::<i64>()
            .map_err(|_| Error::Format(format!("cell {field:?} holds a non-integer")))
    };
    Ok(Some((parse(a)?, parse(b)?)))
}

// ─────────────────────────────────────────────────────────────────────────
// LaTeX
// ─────────────────────────────────────────────────────────────────────────

/// LaTeX `tabular`: label column, twist boundary rows above and below when
/// present, and a gray shade on every non-erased cell when the view has
/// erasures (requires `\usepackage[table]{xcolor}`).
pub fn to_latex(view: &TableView) -> String {
    let cols = view.num_cols();
    let has_erasures = view
        .cells
        .iter()
        .any(|row| row.iter().any(Option::is_none));
    let mut out = String::new();
    out.push_str("% requires \\usepackage[table]{xcolor}\n");
    out.push_str(&format!("\\begin{{tabular}}{{r|{}}}\n", "c".repeat(cols)));
    if let Some(header) = &view.header {
        let cells: Vec<String> = header.iter().map(i64::to_string).collect();
        out.push_str(&format!(" & {} \\\\\n\\hline\n", cells.join(" & ")));
    }
    for (label, row) in view.row_labels.iter().zip(&view.cells) {
        let cells: Vec<String> = row
            .iter()
            .map(|cell| match cell {
                Some((a, b)) if has_erasures => {
                    format!("\\cellcolor[gray]{{0.85}}${a}\\,{b}$")
                }
                Some((a, b)) => format!("${a}\\,{b}$"),
                None => "$\\cdot$".to_string(),
            })
            .collect();
        out.push_str(&format!("{label} & {} \\\\\n", cells.join(" & ")));
    }
    if let Some(footer) = &view.footer {
        let cells: Vec<String> = footer.iter().map(i64::to_string).collect();
        out.push_str(&format!("\\hline\n & {} \\\\\n", cells.join(" & ")));
    }
    out.push_str("\\end{tabular}\n");
    out
}

// ─────────────────────────────────────────────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tables::{build_tensor_table, build_vanishing_table, erase, validate_sequence};

    fn small_case() -> (TensorTable, ErasureMask, TwistVector) {
        let seq = validate_sequence(&[0, 1, 2, 3], 4, 3, 6, 0).unwrap();
        let vtable = build_vanishing_table(&seq, 6);
        let ttable = build_tensor_table(&vtable, 2);
        let w = TwistVector::new(vec![2, 6, 8], 12);
        let mask = erase(&ttable, w.entries());
        (ttable, mask, w)
    }

    #[test]
    fn text_grid_shows_labels_cells_and_twist_rows() {
        let (ttable, mask, w) = small_case();
        let view = erased_view(&ttable, &mask, &w, None).unwrap();
        let text = to_text(&view);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 12, "twist rows + ten data rows");
        assert!(lines[0].starts_with('c'));
        assert!(lines[0].contains('0') && lines[0].contains('8'));
        assert!(lines[1].starts_with("(0,0)"));
        assert!(lines[1].contains("0:12"));
        assert!(text.contains('·'));
        assert!(lines[11].starts_with("md-c"));
    }

    #[test]
    fn csv_is_a_bare_grid_that_round_trips() {
        let (ttable, mask, w) = small_case();
        let view = erased_view(&ttable, &mask, &w, None).unwrap();
        let csv = to_csv(&view).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 10);
        assert!(lines.iter().all(|l| l.split(',').count() == 4));
        assert_eq!(lines[0], "0:12,·,·,·");

        let cells = parse_csv(&csv).unwrap();
        assert_eq!(cells, view.cells);
    }

    #[test]
    fn csv_accepts_an_ascii_dot_for_erased_cells() {
        let cells = parse_csv("0:12,.\n3:4,5:6\n").unwrap();
        assert_eq!(cells, vec![vec![Some((0, 12)), None], vec![Some((3, 4)), Some((5, 6))]]);
    }

    #[test]
    fn csv_rejects_malformed_cells() {
        assert!(parse_csv("0:12,oops\n").is_err());
        assert!(parse_csv("1:2\n3:4,5:6\n").is_err());
    }

    #[test]
    fn section_table_view_has_one_row_per_section() {
        let seq = validate_sequence(&[0, 1, 2, 3], 4, 3, 6, 0).unwrap();
        let vtable = build_vanishing_table(&seq, 6);
        let view = vanishing_view(&vtable);
        assert_eq!(view.num_rows(), 4);
        assert_eq!(view.num_cols(), 4);
        assert_eq!(view.cells[0][0], Some((0, 6)));
        assert_eq!(view.cells[3][3], Some((6, 0)));
        let csv = to_csv(&view).unwrap();
        assert_eq!(csv.lines().next().unwrap(), "0:6,0:5,1:4,2:3");
    }

    #[test]
    fn row_order_permutation_reproduces_a_printed_layout() {
        let (ttable, _, _) = small_case();
        // Printed order interleaves degrees: (1,1) before (0,3).
        let order = [0, 1, 2, 4, 3, 5, 6, 7, 8, 9];
        let view = tensor_view(&ttable, Some(&order)).unwrap();
        assert_eq!(view.row_labels[3], "(1,1)");
        assert_eq!(view.row_labels[4], "(0,3)");
        assert_eq!(view.cells[3][0], Some((2, 8)));

        assert!(tensor_view(&ttable, Some(&[0, 0, 1])).is_err());
        assert!(tensor_view(&ttable, Some(&[1, 2, 3])).is_err());
    }

    #[test]
    fn latex_shades_present_cells_and_carries_twist_rows() {
        let (ttable, mask, w) = small_case();
        let view = erased_view(&ttable, &mask, &w, None).unwrap();
        let latex = to_latex(&view);
        assert!(latex.starts_with("% requires"));
        assert!(latex.contains("\\begin{tabular}{r|cccc}"));
        assert!(latex.contains(" & 0 & 2 & 6 & 8 \\\\"));
        assert!(latex.contains("\\cellcolor[gray]{0.85}$0\\,12$"));
        assert!(latex.contains("$\\cdot$"));
        assert!(latex.contains(" & 12 & 10 & 6 & 4 \\\\"));
        assert!(latex.trim_end().ends_with("\\end{tabular}"));

        // A full table renders without shading.
        let full = tensor_view(&ttable, None).unwrap();
        assert!(!to_latex(&full).contains("cellcolor"));
    }
}
