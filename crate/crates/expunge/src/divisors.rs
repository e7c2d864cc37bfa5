//! Torsion-order divisor combinatorics on twice-marked genus-1 curves.
//!
//! Sections with prescribed vanishing at the two marked points determine a
//! rational function whose divisor is a formal sum of torsion loci: for
//! each vanishing order `a` against a pivot `c`, the third zero of the
//! section lands on the marked points exactly at `|a+1−c|`- resp.
//! `|a−c|`-torsion. The two pair-elimination rules lean on nonvanishing
//! resp. nondegeneracy of these functions, which reduce to the integer
//! predicates implemented here. Everything assumes characteristic 0, so
//! torsion loci are reduced and coefficients are plain integers.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

// ─────────────────────────────────────────────────────────────────────────
// Torsion divisors
// ─────────────────────────────────────────────────────────────────────────

/// A formal integer combination of torsion loci, keyed by torsion order.
///
/// The coefficient of order `n` weights the translate of the full
/// `n`-torsion subgroup. Zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TorsionDivisor {
    coeffs: BTreeMap<i64, i64>,
}

impl TorsionDivisor {
    pub fn zero() -> Self {
        TorsionDivisor::default()
    }

    /// Add `coeff` times the order-`n` torsion locus. `n` must be positive:
    /// order 0 cannot arise from valid section data and is rejected
    /// defensively.
    pub fn add(&mut self, n: i64, coeff: i64) {
        assert!(n > 0, "torsion order must be positive, got {n}");
        if coeff == 0 {
            return;
        }
        let entry = self.coeffs.entry(n).or_insert(0);
        *entry += coeff;
        if *entry == 0 {
            self.coeffs.remove(&n);
        }
    }

    pub fn coeff(&self, n: i64) -> i64 {
        self.coeffs.get(&n).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Sum of all coefficients; always 0 for divisors of rational functions.
    pub fn coeff_sum(&self) -> i64 {
        self.coeffs.values().sum()
    }

    /// The nonzero (order, coefficient) pairs in increasing order.
    pub fn terms(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        self.coeffs.iter().map(|(&n, &c)| (n, c))
    }

    pub fn negate(&self) -> TorsionDivisor {
        TorsionDivisor {
            coeffs: self.coeffs.iter().map(|(&n, &c)| (n, -c)).collect(),
        }
    }
}

impl fmt::Display for TorsionDivisor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (k, (n, c)) in self.terms().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            if c >= 0 && k > 0 {
                f.write_str("+ ")?;
            } else if c < 0 {
                f.write_str("- ")?;
            }
            let mag = c.abs();
            if mag != 1 {
                write!(f, "{mag}·")?;
            }
            write!(f, "[{n}]")?;
        }
        Ok(())
    }
}

// ─────────────────────────────────────────────────────────────────────────
// Section data
// ─────────────────────────────────────────────────────────────────────────

/// Vanishing orders of two tensor sections at the first marked point,
/// together with the pivot `c` and the degree `d`.
///
/// Validity: every order satisfies `a + b = d − 1` with `b ≥ 0` (so
/// `a ≤ d − 1`), no order may equal `c` or `c − 1`, and the two order
/// lists have equal sums.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SectionData {
    a: Vec<i64>,
    a_prime: Vec<i64>,
    c: i64,
    d: i64,
}

impl SectionData {
    pub fn new(a: Vec<i64>, a_prime: Vec<i64>, c: i64, d: i64) -> Result<Self> {
        if a.len() != a_prime.len() || a.len() < 2 {
            return Err(Error::InvalidSectionData(format!(
                "need two order lists of equal length >= 2, got {} and {}",
                a.len(),
                a_prime.len()
            )));
        }
        for &x in a.iter().chain(&a_prime) {
            if x < 0 || x > d - 1 {
                return Err(Error::InvalidSectionData(format!(
                    "order {x} outside [0, d-1] = [0, {}]",
                    d - 1
                )));
            }
            if x == c || x == c - 1 {
                return Err(Error::InvalidSectionData(format!(
                    "order {x} collides with the pivot {c}: a - c must avoid 0 and -1"
                )));
            }
        }
        let (sum, sum_prime) = (a.iter().sum::<i64>(), a_prime.iter().sum::<i64>());
        if sum != sum_prime {
            return Err(Error::InvalidSectionData(format!(
                "order sums differ: {sum} vs {sum_prime}"
            )));
        }
        Ok(SectionData { a, a_prime, c, d })
    }

    pub fn a(&self) -> &[i64] {
        &self.a
    }

    pub fn a_prime(&self) -> &[i64] {
        &self.a_prime
    }

    pub fn c(&self) -> i64 {
        self.c
    }

    pub fn d(&self) -> i64 {
        self.d
    }

    /// The same data with the two order lists swapped.
    pub fn swapped(&self) -> SectionData {
        SectionData {
            a: self.a_prime.clone(),
            a_prime: self.a.clone(),
            c: self.c,
            d: self.d,
        }
    }
}

// ─────────────────────────────────────────────────────────────────────────
// Operations
// ─────────────────────────────────────────────────────────────────────────

/// The two torsion orders attached to a vanishing order `a` against the
/// pivot `c`: the section's third zero hits the first marked point at
/// `|a+1−c|`-torsion and the second at `|a−c|`-torsion.
pub fn r_offset(a: i64, c: i64) -> (i64, i64) {
    assert!(a != c && a != c - 1, "a - c must avoid 0 and -1");
    (a + 1 - c, a - c)
}

/// Divisor of the comparison function of a pair of tensor sections:
/// `Σ_i ([|a_i−c|] − [|a′_i−c|] − [|a_i+1−c|] + [|a′_i+1−c|])`, with like
/// terms cancelled. The coefficients always sum to 0.
pub fn div_f(data: &SectionData) -> TorsionDivisor {
    let c = data.c;
    let mut out = TorsionDivisor::zero();
    for (&ai, &api) in data.a.iter().zip(&data.a_prime) {
        out.add((ai - c).abs(), 1);
        out.add((api - c).abs(), -1);
        out.add((ai + 1 - c).abs(), -1);
        out.add((api + 1 - c).abs(), 1);
    }
    debug_assert_eq!(out.coeff_sum(), 0);
    out
}

/// Exact nonconstancy predicate for a pair of two-fold tensor sections:
/// the comparison function is nonconstant iff the order multisets differ
/// and `a_1 + a_2 ≠ 2c − 1`. Agrees with `div_f(..) ≠ 0` on all valid
/// inputs.
pub fn is_nonconstant_m2(a1: i64, a2: i64, a1p: i64, a2p: i64, c: i64) -> bool {
    let mut lhs = [a1, a2];
    let mut rhs = [a1p, a2p];
    lhs.sort_unstable();
    rhs.sort_unstable();
    lhs != rhs && a1 + a2 != 2 * c - 1
}

/// Nondegeneracy hypotheses for a family of two-fold sections indexed by
/// columns: all orders pairwise distinct, no column sums to `2c − 1`, and
/// each column has exactly one order below the pivot.
pub fn nondegen_hypotheses(columns: &[(i64, i64)], c: i64) -> bool {
    let mut seen = std::collections::BTreeSet::new();
    for &(a1, a2) in columns {
        if !seen.insert(a1) || !seen.insert(a2) {
            return false;
        }
        if a1 + a2 == 2 * c - 1 {
            return false;
        }
        if ((a1 < c) as u8 + (a2 < c) as u8) != 1 {
            return false;
        }
    }
    true
}

// ─────────────────────────────────────────────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn r_offset_substitutions() {
        assert_eq!(r_offset(0, 2), (-1, -2));
        assert_eq!(r_offset(3, 2), (2, 1)); // a = c + 1
    }

    #[test]
    #[should_panic(expected = "avoid 0 and -1")]
    fn r_offset_rejects_pivot_collision() {
        let _ = r_offset(2, 2);
    }

    #[test]
    fn div_f_worked_example() {
        // a = (0,6), a' = (1,5), c = 3: 3·[3] + [1] − 3·[2] − [4].
        let data = SectionData::new(vec![0, 6], vec![1, 5], 3, 10).unwrap();
        let div = div_f(&data);
        assert_eq!(div.coeff(3), 3);
        assert_eq!(div.coeff(1), 1);
        assert_eq!(div.coeff(2), -3);
        assert_eq!(div.coeff(4), -1);
        assert_eq!(div.terms().count(), 4);
        assert_eq!(div.coeff_sum(), 0);
        assert_eq!(div.to_string(), "[1] - 3·[2] + 3·[3] - [4]");
    }

    #[test]
    fn div_f_equal_multisets_vanishes() {
        let data = SectionData::new(vec![1, 5, 7], vec![7, 1, 5], 3, 10).unwrap();
        assert!(div_f(&data).is_zero());
    }

    #[test]
    fn div_f_antisymmetric_pivot_sum_vanishes() {
        // a_1 + a_2 = 2c − 1 = 5 with c = 3: both pairs sum to 5.
        let data = SectionData::new(vec![0, 5], vec![1, 4], 3, 10).unwrap();
        assert!(div_f(&data).is_zero());
    }

    #[test]
    fn div_f_swap_negates() {
        let data = SectionData::new(vec![0, 6], vec![1, 5], 3, 10).unwrap();
        assert_eq!(div_f(&data.swapped()), div_f(&data).negate());
    }

    #[test]
    fn nonconstancy_examples() {
        assert!(is_nonconstant_m2(0, 6, 1, 5, 3));
        assert!(!is_nonconstant_m2(1, 5, 5, 1, 3)); // equal multisets
        assert!(!is_nonconstant_m2(0, 5, 1, 4, 3)); // sums to 2c − 1
    }

    #[test]
    fn nonconstancy_matches_divisor() {
        // Exhaustive scan over small valid inputs.
        let c = 3;
        let d = 12;
        for a1 in 0..d {
            for a2 in 0..d {
                for a1p in 0..d {
                    let a2p = a1 + a2 - a1p;
                    if !(0..d).contains(&a2p) {
                        continue;
                    }
                    if [a1, a2, a1p, a2p].iter().any(|&x| x == c || x == c - 1) {
                        continue;
                    }
                    let data =
                        SectionData::new(vec![a1, a2], vec![a1p, a2p], c, d).unwrap();
                    assert_eq!(
                        is_nonconstant_m2(a1, a2, a1p, a2p, c),
                        !div_f(&data).is_zero(),
                        "disagreement at ({a1},{a2}),({a1p},{a2p}),c={c}"
                    );
                }
            }
        }
    }

    #[test]
    fn section_data_validation() {
        assert!(SectionData::new(vec![0, 6], vec![1, 5], 3, 10).is_ok());
        // Pivot collision.
        assert!(SectionData::new(vec![3, 6], vec![4, 5], 3, 10).is_err());
        assert!(SectionData::new(vec![2, 6], vec![4, 4], 3, 10).is_err());
        // Sum mismatch.
        assert!(SectionData::new(vec![0, 6], vec![1, 6], 3, 10).is_err());
        // Out of range.
        assert!(SectionData::new(vec![0, 10], vec![4, 6], 3, 10).is_err());
    }

    #[test]
    fn nondegen_hypotheses_examples() {
        // Straddling-family data from column 5 of the (10, 4, 12, 2) table:
        // the family rows (0,4) and (1,3) give section order pairs against
        // the pivot c = a^5_2 of the column's own value.
        let seq = crate::tables::validate_sequence(
            &[0, 0, 1, 1, 2, 2, 3, 3, 4, 4],
            10,
            4,
            12,
            0,
        )
        .unwrap();
        let vtable = crate::tables::build_vanishing_table(&seq, 12);
        let order = |j: usize| vtable.pair(j, 4).0;
        let columns = [(order(0), order(4)), (order(1), order(3))];
        let c = order(2);
        assert_eq!(columns, [(2, 8), (3, 7)]);
        assert_eq!(c, 6);
        assert!(nondegen_hypotheses(&columns, c));

        assert!(!nondegen_hypotheses(&[(1, 2), (0, 8)], 5)); // both below
        assert!(!nondegen_hypotheses(&[(2, 8), (2, 7)], 6)); // repeat
        assert!(!nondegen_hypotheses(&[(2, 9)], 6)); // sums to 2c − 1
    }

    #[test]
    fn divisor_display_and_zero() {
        let mut div = TorsionDivisor::zero();
        assert_eq!(div.to_string(), "0");
        div.add(2, 1);
        div.add(2, -1);
        assert!(div.is_zero());
    }
}
