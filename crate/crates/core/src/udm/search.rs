//! Exhaustive search for UDMs at desk scale.
//!
//! Any UDMs can be brought to `A_0 = I`, `A_1 = J` by UDM-preserving moves,
//! so only the remaining `L - 2` matrices are enumerated. Two necessary
//! conditions prune the search before the full rank check:
//!
//! * the first row of every `A_l`, `l >= 2`, is entirely nonzero (tuple
//!   `k_0 = m`, `k_1 = n - m - 1`, `k_l = 1`);
//! * for `n >= 2` the ratios `[A_l]_{0,n-2} / [A_l]_{0,n-1}` are pairwise
//!   distinct (tuple `k_0 = n - 2`, `k_l = k_l' = 1`).
//!
//! Together they bound `L` by `q + 1`; with `L = q + 2` the search comes back
//! empty.

use crate::gf::{Elem, Field};
use crate::linalg::FieldMatrix;

use super::{verify, UdmError, UdmFamily};

/// Default cap on `q^(n^2 (L-2))`.
pub const DEFAULT_SEARCH_BUDGET: u128 = 10_000_000;

pub const MAX_EXAMPLES: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchReport {
    pub channels: usize,
    pub n: usize,
    pub q: u32,
    /// Assignments of the free matrices before pruning: `q^(n^2 (L-2))`.
    pub candidates: u128,
    /// Assignments surviving both necessary conditions; each got a full
    /// verification.
    pub after_pruning: u128,
    /// Assignments that verified as UDMs.
    pub found: u128,
    /// The first [`MAX_EXAMPLES`] families found, in enumeration order.
    pub examples: Vec<UdmFamily>,
    /// `n = 1`: `L` copies of `(1)` are UDMs for every `L`, so the bound does
    /// not apply.
    pub trivial_block: bool,
}

impl SearchReport {
    pub fn exists(&self) -> bool {
        self.found > 0
    }

    pub fn first_found(&self) -> Option<&UdmFamily> {
        self.examples.first()
    }
}

/// Searches all `(L, n, q)` families with `A_0 = I`, `A_1 = J`.
pub fn exhaustive_search(
    field: &Field,
    channels: usize,
    n: usize,
    budget: u128,
) -> Result<SearchReport, UdmError> {
    if channels == 0 || n == 0 {
        return Err(UdmError::BadParameters("L and n must be positive".into()));
    }
    let q = field.order();
    let free = channels.saturating_sub(2);
    let cells = (n * n * free) as u32;
    let candidates = (q as u128).checked_pow(cells).filter(|&c| c <= budget);
    let Some(candidates) = candidates else {
        let candidates = (q as u128).checked_pow(cells).unwrap_or(u128::MAX);
        return Err(UdmError::BudgetExceeded { candidates, budget });
    };

    let mut fixed = vec![FieldMatrix::identity(field, n)];
    if channels >= 2 {
        fixed.push(FieldMatrix::anti_identity(field, n));
    }

    // Per-slot survivors of the first-row condition.
    let per_matrix = (q as u128).pow((n * n) as u32);
    let mut slot = Vec::new();
    if free > 0 {
        for idx in 0..per_matrix {
            let mut x = idx;
            let m = FieldMatrix::from_fn(field, n, n, |_, _| {
                let v = (x % q as u128) as u32;
                x /= q as u128;
                field.element(v as u64).expect("digit below q")
            });
            if m.row(0).iter().all(|e| !e.is_zero()) {
                slot.push(m);
            }
        }
    }
    let ratio = |m: &FieldMatrix| -> Option<Elem> {
        (n >= 2).then(|| {
            field
                .div(m.get(0, n - 2), m.get(0, n - 1))
                .expect("first row is nonzero")
        })
    };

    let mut report = SearchReport {
        channels,
        n,
        q,
        candidates,
        after_pruning: 0,
        found: 0,
        examples: Vec::new(),
        trivial_block: n == 1,
    };
    let mut chosen: Vec<usize> = Vec::with_capacity(free);
    let mut ratios: Vec<Option<Elem>> = Vec::with_capacity(free);
    descend(
        field,
        &fixed,
        &slot,
        free,
        &ratio,
        &mut chosen,
        &mut ratios,
        &mut report,
    )?;
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn descend(
    field: &Field,
    fixed: &[FieldMatrix],
    slot: &[FieldMatrix],
    free: usize,
    ratio: &dyn Fn(&FieldMatrix) -> Option<Elem>,
    chosen: &mut Vec<usize>,
    ratios: &mut Vec<Option<Elem>>,
    report: &mut SearchReport,
) -> Result<(), UdmError> {
    if chosen.len() == free {
        report.after_pruning += 1;
        let mut matrices = fixed.to_vec();
        matrices.extend(chosen.iter().map(|&c| slot[c].clone()));
        let family = UdmFamily::new(field, matrices)?;
        if verify(&family).passed {
            report.found += 1;
            if report.examples.len() < MAX_EXAMPLES {
                report.examples.push(family);
            }
        }
        return Ok(());
    }
    for (idx, m) in slot.iter().enumerate() {
        let r = ratio(m);
        if r.is_some() && ratios.contains(&r) {
            continue;
        }
        chosen.push(idx);
        ratios.push(r);
        descend(field, fixed, slot, free, ratio, chosen, ratios, report)?;
        chosen.pop();
        ratios.pop();
    }
    Ok(())
}

/// Searches for `(q+2, n, q)`-UDMs, which cannot exist for `n >= 2`.
pub fn refute_bound(field: &Field, n: usize) -> Result<SearchReport, UdmError> {
    exhaustive_search(field, field.order() as usize + 2, n, DEFAULT_SEARCH_BUDGET)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::udm::construct;

    fn gf(q: u64) -> Field {
        Field::from_order(q).unwrap()
    }

    /// Brute force without any pruning.
    fn count_unpruned(field: &Field, channels: usize, n: usize) -> u128 {
        let q = field.order() as u128;
        let free = channels - 2;
        let total = q.pow((n * n * free) as u32);
        let mut found = 0;
        for idx in 0..total {
            let mut x = idx;
            let mut matrices = vec![
                FieldMatrix::identity(field, n),
                FieldMatrix::anti_identity(field, n),
            ];
            for _ in 0..free {
                matrices.push(FieldMatrix::from_fn(field, n, n, |_, _| {
                    let v = (x % q) as u64;
                    x /= q;
                    field.element(v).unwrap()
                }));
            }
            if verify(&UdmFamily::new(field, matrices).unwrap()).passed {
                found += 1;
            }
        }
        found
    }

    #[test]
    fn no_four_channel_family_over_gf2() {
        let f = gf(2);
        let report = refute_bound(&f, 2).unwrap();
        assert_eq!(report.channels, 4);
        assert_eq!(report.candidates, 256);
        assert!(report.after_pruning <= 256);
        assert!(!report.exists());
        assert!(report.first_found().is_none());
        assert_eq!(count_unpruned(&f, 4, 2), 0);
    }

    #[test]
    fn three_channel_family_over_gf2_exists() {
        let f = gf(2);
        let report = exhaustive_search(&f, 3, 2, DEFAULT_SEARCH_BUDGET).unwrap();
        assert_eq!(report.candidates, 16);
        assert!(report.exists());
        assert_eq!(report.found, count_unpruned(&f, 3, 2));
        assert_eq!(report.found, 2);
        let constructed = construct(&f, 3, 2).unwrap();
        assert!(report
            .examples
            .iter()
            .any(|fam| fam.matrices() == constructed.matrices()));
    }

    #[test]
    fn pruning_never_loses_a_family() {
        for (q, channels, n) in [(2u64, 3usize, 2usize), (3, 3, 2), (3, 4, 2), (2, 3, 3)] {
            let f = gf(q);
            let pruned = exhaustive_search(&f, channels, n, DEFAULT_SEARCH_BUDGET).unwrap();
            assert_eq!(
                pruned.found,
                count_unpruned(&f, channels, n),
                "q={q} L={channels} n={n}"
            );
        }
    }

    #[test]
    fn bound_holds_over_gf3() {
        let report = refute_bound(&gf(3), 2).unwrap();
        assert_eq!(report.channels, 5);
        assert!(!report.exists());
    }

    #[test]
    fn single_row_blocks_escape_the_bound() {
        let report = refute_bound(&gf(2), 1).unwrap();
        assert!(report.trivial_block);
        assert!(report.exists());
        let fam = report.first_found().unwrap();
        assert!(fam.matrices().iter().all(|m| m.to_rows() == vec![vec![1]]));
    }

    #[test]
    fn budget_is_enforced() {
        let err = exhaustive_search(&gf(5), 7, 3, DEFAULT_SEARCH_BUDGET).unwrap_err();
        assert!(matches!(err, UdmError::BudgetExceeded { .. }));
        assert!(exhaustive_search(&gf(2), 0, 2, DEFAULT_SEARCH_BUDGET).is_err());
    }
}
