//! Golden-data checks: the six stored table fixtures must be reproduced
//! cell-for-cell, presence pattern included.

use std::collections::BTreeMap;
use std::path::Path;

use expunge::tables::{
    build_tensor_table, build_vanishing_table, erase, is_steady_table, validate_sequence,
    RowIndex,
};

/// One parsed fixture: case data plus the three stored grids.
struct Fixture {
    g: usize,
    r: i64,
    d: i64,
    m: i64,
    delta: Vec<i64>,
    w: Vec<i64>,
    vanishing: Vec<Vec<(i64, i64)>>,
    tensor: BTreeMap<RowIndex, Vec<(i64, i64)>>,
    present: BTreeMap<RowIndex, Vec<bool>>,
}

fn parse_label(text: &str) -> RowIndex {
    let inner = text
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .unwrap_or_else(|| panic!("bad row label {text:?}"));
    RowIndex::new(
        inner
            .split(',')
            .map(|x| x.parse().expect("label entry"))
            .collect(),
    )
}

fn parse_pairs(cells: &[&str]) -> Vec<(i64, i64)> {
    cells
        .iter()
        .map(|cell| {
            let (a, b) = cell.split_once(':').unwrap_or_else(|| panic!("bad cell {cell:?}"));
            (a.parse().expect("a value"), b.parse().expect("b value"))
        })
        .collect()
}

fn load_fixture(name: &str) -> Fixture {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name);
    let text = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("cannot read {}: {e}", path.display()));
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));

    let header = lines.next().expect("header line");
    let mut fields = BTreeMap::new();
    for part in header.split_whitespace() {
        let (k, v) = part.split_once('=').expect("k=v header field");
        fields.insert(k.to_string(), v.parse::<i64>().expect("numeric header"));
    }
    let parse_list = |line: &str, key: &str| -> Vec<i64> {
        line.strip_prefix(&format!("{key}="))
            .unwrap_or_else(|| panic!("expected {key}= line, got {line:?}"))
            .split(',')
            .map(|x| x.parse().expect("list entry"))
            .collect()
    };
    let delta = parse_list(lines.next().expect("delta line"), "delta");
    let w = parse_list(lines.next().expect("w line"), "w");

    assert_eq!(lines.next(), Some("[vanishing]"));
    let g = fields["g"] as usize;
    let r = fields["r"];
    let mut vanishing = Vec::new();
    for _ in 0..=r {
        let cells: Vec<&str> = lines.next().expect("vanishing row").split_whitespace().collect();
        assert_eq!(cells.len(), g);
        vanishing.push(parse_pairs(&cells));
    }

    assert_eq!(lines.next(), Some("[tensor]"));
    let mut tensor = BTreeMap::new();
    for line in lines.by_ref() {
        if line == "[present]" {
            break;
        }
        let cells: Vec<&str> = line.split_whitespace().collect();
        tensor.insert(parse_label(cells[0]), parse_pairs(&cells[1..]));
    }
    let mut present = BTreeMap::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let (label, bits) = line.split_once(' ').expect("present row");
        present.insert(
            parse_label(label),
            bits.chars().map(|c| c == '1').collect(),
        );
    }

    Fixture {
        g,
        r,
        d: fields["d"],
        m: fields["m"],
        delta,
        w,
        vanishing,
        tensor,
        present,
    }
}

fn check_fixture(name: &str) {
    let fx = load_fixture(name);
    let seq = validate_sequence(&fx.delta, fx.g, fx.r, fx.d, 0)
        .unwrap_or_else(|e| panic!("{name}: stored sequence invalid: {e}"));
    let vt = build_vanishing_table(&seq, fx.d);
    for (j, row) in fx.vanishing.iter().enumerate() {
        for (col, &expected) in row.iter().enumerate() {
            assert_eq!(
                vt.pair(j, col),
                expected,
                "{name}: vanishing row {j} column {}",
                col + 1
            );
        }
    }

    let tt = build_tensor_table(&vt, fx.m);
    assert_eq!(tt.num_rows(), fx.tensor.len(), "{name}: row count");
    for (label, row) in &fx.tensor {
        let pos = tt
            .row_position(label)
            .unwrap_or_else(|| panic!("{name}: row {label} missing"));
        for (col, &expected) in row.iter().enumerate() {
            assert_eq!(
                tt.pair(pos, col),
                expected,
                "{name}: tensor row {label} column {}",
                col + 1
            );
        }
    }

    let mask = erase(&tt, &fx.w);
    for (label, bits) in &fx.present {
        let pos = tt.row_position(label).expect("label exists");
        for (col, &expected) in bits.iter().enumerate() {
            assert_eq!(
                mask.present(pos, col),
                expected,
                "{name}: presence of row {label} column {}",
                col + 1
            );
        }
    }

    assert!(
        is_steady_table(&tt, &fx.w),
        "{name}: table must be steady for its stored twist vector"
    );
}

#[test]
fn golden_m2_r3_g4() {
    check_fixture("m2_r3_g4.txt");
}

#[test]
fn golden_m2_r3_g5() {
    check_fixture("m2_r3_g5.txt");
}

#[test]
fn golden_m2_r4_g10() {
    check_fixture("m2_r4_g10.txt");
}

#[test]
fn golden_m3_r3_g7() {
    check_fixture("m3_r3_g7.txt");
}

#[test]
fn golden_m3_r4_g16() {
    check_fixture("m3_r4_g16.txt");
}

#[test]
fn golden_m3_r5_g26() {
    check_fixture("m3_r5_g26.txt");
}
