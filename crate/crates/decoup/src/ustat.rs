//! Tuple enumeration and the coupled / decoupled / polarized sums.
//!
//! All sums run over ordered k-tuples of pairwise-distinct indices in
//! {0..n-1}, in lexicographic order. Accumulation is grouped by the first
//! index and the group subtotals are merged in index order, so results do not
//! depend on how the tuple range might be partitioned across workers; for
//! integer-valued kernels every sum is exact in f64.

use crate::error::{Error, Result};
use crate::model::kernel::KernelFamily;
use crate::model::norm::{norm_of, NormSpec};
use crate::model::value::{Point, VectorValue};
use crate::model::SampleBlock;

/// Lexicographic stream of ordered k-tuples with pairwise-distinct entries.
///
/// Yields exactly n(n-1)...(n-k+1) tuples; empty when n < k.
#[derive(Debug, Clone)]
pub struct TupleStream {
    n: usize,
    k: usize,
    next: Option<Vec<usize>>,
}

impl TupleStream {
    pub fn new(n: usize, k: usize) -> TupleStream {
        assert!(k >= 1, "tuple order k must be >= 1");
        let next = if n >= k { Some(first_tuple(n, k)) } else { None };
        TupleStream { n, k, next }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of tuples the stream yields, n^(k falling).
    pub fn count_exact(&self) -> u128 {
        falling_factorial(self.n, self.k)
    }
}

pub fn enumerate_tuples(n: usize, k: usize) -> TupleStream {
    TupleStream::new(n, k)
}

pub fn falling_factorial(n: usize, k: usize) -> u128 {
    if n < k {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k {
        acc *= (n - i) as u128;
    }
    acc
}

fn first_tuple(n: usize, k: usize) -> Vec<usize> {
    debug_assert!(n >= k);
    (0..k).collect()
}

impl Iterator for TupleStream {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.take()?;
        self.next = advance(&current, self.n);
        Some(current)
    }
}

/// Smallest tuple strictly after `t` in lexicographic order, if any.
fn advance(t: &[usize], n: usize) -> Option<Vec<usize>> {
    let k = t.len();
    let mut next = t.to_vec();
    // Walk from the last slot: bump it to the next unused value; on overflow
    // carry into the previous slot.
    let mut pos = k;
    while pos > 0 {
        pos -= 1;
        let prefix = &next[..pos];
        let mut cand = next[pos] + 1;
        while cand < n && prefix.contains(&cand) {
            cand += 1;
        }
        if cand < n {
            next[pos] = cand;
            // Fill the suffix with the smallest unused values, ascending.
            let mut fill = 0usize;
            for slot in pos + 1..k {
                while next[..slot].contains(&fill) {
                    fill += 1;
                }
                next[slot] = fill;
                fill += 1;
            }
            return Some(next);
        }
    }
    None
}

/// Visit every distinct ordered k-tuple whose first entry is `first`.
fn for_each_tuple_with_first(
    n: usize,
    k: usize,
    first: usize,
    f: &mut impl FnMut(&[usize]) -> Result<()>,
) -> Result<()> {
    let mut tuple = vec![0usize; k];
    tuple[0] = first;
    let mut used = vec![false; n];
    used[first] = true;
    fill_slots(n, k, 1, &mut tuple, &mut used, f)
}

fn fill_slots(
    n: usize,
    k: usize,
    depth: usize,
    tuple: &mut Vec<usize>,
    used: &mut Vec<bool>,
    f: &mut impl FnMut(&[usize]) -> Result<()>,
) -> Result<()> {
    if depth == k {
        return f(tuple);
    }
    for cand in 0..n {
        if used[cand] {
            continue;
        }
        tuple[depth] = cand;
        used[cand] = true;
        fill_slots(n, k, depth + 1, tuple, used, f)?;
        used[cand] = false;
    }
    Ok(())
}

/// Sum kernel evaluations over all distinct tuples, where slot r of the
/// argument list is taken from `rows[row_for_slot(r)]` at the tuple's r-th
/// index. Grouped-by-first-index accumulation for order determinism.
fn tuple_sum(
    kernel: &KernelFamily,
    rows: &[&[Point]],
    row_for_slot: &[usize],
    n: usize,
) -> Result<VectorValue> {
    let k = kernel.order();
    debug_assert_eq!(row_for_slot.len(), k);
    let mut total = VectorValue::zero(kernel.dim());
    if n < k {
        return Ok(total);
    }
    let mut args: Vec<&Point> = Vec::with_capacity(k);
    for first in 0..n {
        let mut group = VectorValue::zero(kernel.dim());
        for_each_tuple_with_first(n, k, first, &mut |tuple| {
            args.clear();
            for (slot, &idx) in tuple.iter().enumerate() {
                args.push(&rows[row_for_slot[slot]][idx]);
            }
            let v = kernel.eval(tuple, &args).map_err(|e| Error::KernelEval {
                tuple: tuple.to_vec(),
                source: Box::new(e),
            })?;
            group.add_assign(&v)
        })?;
        total.add_assign(&group)?;
    }
    Ok(total)
}

/// Coupled-sum value without the norm; the engine-facing entry point.
pub(crate) fn coupled_value(kernel: &KernelFamily, row: &[Point]) -> Result<VectorValue> {
    let rows = [row];
    let slots = vec![0usize; kernel.order()];
    tuple_sum(kernel, &rows, &slots, row.len())
}

pub(crate) fn decoupled_value(kernel: &KernelFamily, rows: &[&[Point]]) -> Result<VectorValue> {
    let k = kernel.order();
    if rows.len() != k {
        return Err(Error::CopyCount { expected: k, got: rows.len() });
    }
    let n = rows[0].len();
    for r in rows {
        if r.len() != n {
            return Err(Error::RowLength { a: n, b: r.len() });
        }
    }
    let slots: Vec<usize> = (0..k).collect();
    tuple_sum(kernel, rows, &slots, n)
}

pub(crate) fn cross_value(
    kernel: &KernelFamily,
    row_slot1: &[Point],
    row_slot2: &[Point],
) -> Result<VectorValue> {
    require_order2(kernel)?;
    if row_slot1.len() != row_slot2.len() {
        return Err(Error::RowLength { a: row_slot1.len(), b: row_slot2.len() });
    }
    let rows = [row_slot1, row_slot2];
    tuple_sum(kernel, &rows, &[0, 1], row_slot1.len())
}

pub(crate) fn polarized_value(
    kernel: &KernelFamily,
    x: &[Point],
    xt: &[Point],
) -> Result<VectorValue> {
    require_order2(kernel)?;
    if x.len() != xt.len() {
        return Err(Error::RowLength { a: x.len(), b: xt.len() });
    }
    let n = x.len();
    let mut total = VectorValue::zero(kernel.dim());
    for i in 0..n {
        let mut group = VectorValue::zero(kernel.dim());
        for j in 0..n {
            if j == i {
                continue;
            }
            let tuple = [i, j];
            for (p, q) in [(&x[i], &x[j]), (&x[i], &xt[j]), (&xt[i], &x[j]), (&xt[i], &xt[j])] {
                let v = kernel.eval(&tuple, &[p, q]).map_err(|e| Error::KernelEval {
                    tuple: tuple.to_vec(),
                    source: Box::new(e),
                })?;
                group.add_assign(&v)?;
            }
        }
        total.add_assign(&group)?;
    }
    Ok(total)
}

/// The coupled sum over one sample row.
pub fn coupled_sum(
    kernel: &KernelFamily,
    block: &SampleBlock,
    norm: &NormSpec,
) -> Result<(VectorValue, f64)> {
    if block.copies() != 1 {
        return Err(Error::CopyCount { expected: 1, got: block.copies() });
    }
    let value = coupled_value(kernel, block.row(0))?;
    let nv = norm_of(&value, norm)?;
    Ok((value, nv))
}

/// The decoupled sum: slot j of every kernel evaluation uses copy j.
pub fn decoupled_sum(
    kernel: &KernelFamily,
    block: &SampleBlock,
    norm: &NormSpec,
) -> Result<(VectorValue, f64)> {
    let k = kernel.order();
    if block.copies() != k {
        return Err(Error::CopyCount { expected: k, got: block.copies() });
    }
    let rows: Vec<&[Point]> = (0..k).map(|j| block.row(j)).collect();
    let value = decoupled_value(kernel, &rows)?;
    let nv = norm_of(&value, norm)?;
    Ok((value, nv))
}

/// Sum over ordered distinct pairs of f_{ij}(a_i, b_j); the k = 2 building
/// block for mixed statistics (a is argument slot 1, b is slot 2).
pub fn cross_sum(
    kernel: &KernelFamily,
    row_slot1: &[Point],
    row_slot2: &[Point],
    norm: &NormSpec,
) -> Result<(VectorValue, f64)> {
    let value = cross_value(kernel, row_slot1, row_slot2)?;
    let nv = norm_of(&value, norm)?;
    Ok((value, nv))
}

/// The polarized sum T_n: for every ordered distinct pair (i, j), the
/// four-term bracket mixing both copies in both argument slots.
pub fn polarized_sum_tn(
    kernel: &KernelFamily,
    x: &[Point],
    xt: &[Point],
    norm: &NormSpec,
) -> Result<(VectorValue, f64)> {
    let value = polarized_value(kernel, x, xt)?;
    let nv = norm_of(&value, norm)?;
    Ok((value, nv))
}

/// Average of the kernel over all k! permutations of (index, argument)
/// orderings; the output passes the permutation-symmetry check.
pub fn symmetrize_kernel(kernel: KernelFamily) -> KernelFamily {
    kernel.symmetrized()
}

fn require_order2(kernel: &KernelFamily) -> Result<()> {
    if kernel.order() != 2 {
        return Err(Error::KernelOrder { expected: 2, got: kernel.order() });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SampleBlock;
    use itertools::Itertools;

    fn scalar_row(xs: &[f64]) -> Vec<Point> {
        xs.iter().map(|&x| Point::scalar(x)).collect()
    }

    /// Independent oracle: enumerate distinct ordered tuples by filtering the
    /// full product set, structurally unlike the streaming iterator.
    fn oracle_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
        (0..k)
            .map(|_| 0..n)
            .multi_cartesian_product()
            .filter(|t| t.iter().unique().count() == k)
            .collect()
    }

    #[test]
    fn enumerates_ordered_pairs_of_three() {
        let got: Vec<Vec<usize>> = enumerate_tuples(3, 2).collect();
        let want = vec![
            vec![0, 1],
            vec![0, 2],
            vec![1, 0],
            vec![1, 2],
            vec![2, 0],
            vec![2, 1],
        ];
        assert_eq!(got, want);
    }

    #[test]
    fn four_choose_all_orderings() {
        assert_eq!(enumerate_tuples(4, 4).count(), 24);
    }

    #[test]
    fn empty_when_n_below_k() {
        assert_eq!(enumerate_tuples(2, 3).count(), 0);
    }

    #[test]
    fn matches_oracle_and_falling_factorial() {
        for n in 0..=8 {
            for k in 1..=4 {
                let got: Vec<Vec<usize>> = enumerate_tuples(n, k).collect();
                let want = oracle_tuples(n, k);
                assert_eq!(got, want, "n={n} k={k}");
                assert_eq!(got.len() as u128, falling_factorial(n, k), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn constant_kernel_counts_tuples() {
        let k = KernelFamily::constant(3, 1.0);
        let block = SampleBlock::from_rows(vec![scalar_row(&[5.0, 6.0, 7.0])]).unwrap();
        let (v, norm) = coupled_sum(&k, &block, &NormSpec::Absolute).unwrap();
        assert_eq!(v.coords(), &[6.0]);
        assert_eq!(norm, 6.0);
    }

    #[test]
    fn product_kernel_brute_force() {
        // Oracle: sum x_i x_j over distinct ordered pairs of (1,2,3) is 22.
        let xs = [1.0, 2.0, 3.0];
        let mut oracle = 0.0;
        for t in oracle_tuples(3, 2) {
            oracle += xs[t[0]] * xs[t[1]];
        }
        assert_eq!(oracle, 22.0);

        let k = KernelFamily::product(3, 2);
        let block = SampleBlock::from_rows(vec![scalar_row(&xs)]).unwrap();
        let (v, _) = coupled_sum(&k, &block, &NormSpec::Absolute).unwrap();
        assert_eq!(v.coords(), &[oracle]);
    }

    #[test]
    fn zero_kernel_sums_to_zero() {
        let k = KernelFamily::constant(4, 0.0);
        let block = SampleBlock::from_rows(vec![scalar_row(&[1.0, 2.0, 3.0, 4.0])]).unwrap();
        let (v, norm) = coupled_sum(&k, &block, &NormSpec::Absolute).unwrap();
        assert_eq!(v.coords(), &[0.0]);
        assert_eq!(norm, 0.0);
    }

    #[test]
    fn decoupled_equals_coupled_on_identical_copies() {
        let k = KernelFamily::lookup_from_fn(4, 3, 2, |i, j, a, b| {
            vec![(i + 2 * j + a) as f64, (3 * b) as f64 - 4.0]
        })
        .unwrap();
        let row: Vec<Point> = vec![Point::Label(2), Point::Label(0), Point::Label(1), Point::Label(2)];
        let coupled_block = SampleBlock::from_rows(vec![row.clone()]).unwrap();
        let dec_block = SampleBlock::from_rows(vec![row.clone(), row]).unwrap();
        let (cv, _) = coupled_sum(&k, &coupled_block, &NormSpec::Supremum).unwrap();
        let (dv, _) = decoupled_sum(&k, &dec_block, &NormSpec::Supremum).unwrap();
        assert_eq!(cv, dv);
    }

    #[test]
    fn decoupled_product_same_rows_is_22() {
        let k = KernelFamily::product(3, 2);
        let row = scalar_row(&[1.0, 2.0, 3.0]);
        let block = SampleBlock::from_rows(vec![row.clone(), row]).unwrap();
        let (v, _) = decoupled_sum(&k, &block, &NormSpec::Absolute).unwrap();
        assert_eq!(v.coords(), &[22.0]);
    }

    #[test]
    fn decoupled_rejects_wrong_copy_count() {
        let k = KernelFamily::product(3, 2);
        let block = SampleBlock::from_rows(vec![scalar_row(&[1.0, 2.0, 3.0])]).unwrap();
        assert!(matches!(
            decoupled_sum(&k, &block, &NormSpec::Absolute),
            Err(Error::CopyCount { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn coupled_sum_for_k3_matches_oracle() {
        let xs = [1.0, -2.0, 3.0, 2.0];
        let k = KernelFamily::product(4, 3);
        let mut oracle = 0.0;
        for t in oracle_tuples(4, 3) {
            oracle += xs[t[0]] * xs[t[1]] * xs[t[2]];
        }
        let block = SampleBlock::from_rows(vec![scalar_row(&xs)]).unwrap();
        let (v, _) = coupled_sum(&k, &block, &NormSpec::Absolute).unwrap();
        assert_eq!(v.coords(), &[oracle]);
    }

    #[test]
    fn polarized_constant_kernel() {
        let k = KernelFamily::constant(3, 1.0);
        let x = scalar_row(&[0.0, 0.0, 0.0]);
        let xt = scalar_row(&[0.0, 0.0, 0.0]);
        let (v, _) = polarized_sum_tn(&k, &x, &xt, &NormSpec::Absolute).unwrap();
        assert_eq!(v.coords(), &[24.0]); // 4 terms x 6 ordered pairs
    }

    #[test]
    fn polarized_product_matches_expansion() {
        // T_n = sum_{i != j} (x_i + xt_i)(x_j + xt_j) for the product kernel.
        let k = KernelFamily::product(2, 2);
        let x = scalar_row(&[1.0, 2.0]);
        let xt = scalar_row(&[3.0, 4.0]);
        let (v, _) = polarized_sum_tn(&k, &x, &xt, &NormSpec::Absolute).unwrap();
        assert_eq!(v.coords(), &[48.0]); // 2 * 4 * 6
    }

    #[test]
    fn polarized_with_equal_rows_is_four_times_coupled() {
        let k = KernelFamily::lookup_from_fn(3, 2, 1, |i, j, a, b| {
            vec![((i + 1) * (j + 2)) as f64 * (1 + a * 2 + b) as f64]
        })
        .unwrap();
        let row = vec![Point::Label(0), Point::Label(1), Point::Label(1)];
        let block = SampleBlock::from_rows(vec![row.clone()]).unwrap();
        let (c, _) = coupled_sum(&k, &block, &NormSpec::Absolute).unwrap();
        let (t, _) = polarized_sum_tn(&k, &row, &row, &NormSpec::Absolute).unwrap();
        assert_eq!(t, c.scale(4.0));
    }

    #[test]
    fn polarized_rejects_higher_order_kernels() {
        let k = KernelFamily::product(4, 3);
        let row = scalar_row(&[1.0, 2.0, 3.0, 4.0]);
        assert!(polarized_sum_tn(&k, &row, &row, &NormSpec::Absolute).is_err());
    }

    #[test]
    fn ordered_sum_is_twice_unordered_for_symmetric_kernels() {
        let k = KernelFamily::lookup_from_fn(4, 2, 1, |i, j, a, b| {
            vec![((i * j) as f64) + ((a + b) as f64) * 3.0]
        })
        .unwrap()
        .symmetrized();
        let row = vec![Point::Label(1), Point::Label(0), Point::Label(1), Point::Label(0)];
        let block = SampleBlock::from_rows(vec![row.clone()]).unwrap();
        let (v, _) = coupled_sum(&k, &block, &NormSpec::Absolute).unwrap();

        let mut unordered = 0.0;
        for i in 0..4 {
            for j in i + 1..4 {
                let val = k.eval_points(&[i, j], &[row[i].clone(), row[j].clone()]).unwrap();
                unordered += val.coords()[0];
            }
        }
        assert_eq!(v.coords(), &[2.0 * unordered]);
    }

    #[test]
    fn cross_sum_uses_slots_as_declared() {
        // f(x, y) = x + 2y distinguishes the slots.
        let k = KernelFamily::polynomial(2, vec![vec![0.0, 2.0], vec![1.0]], false);
        let a = scalar_row(&[1.0, 10.0]);
        let b = scalar_row(&[100.0, 1000.0]);
        // pairs (0,1): a0 + 2 b1 = 2001, (1,0): a1 + 2 b0 = 210
        let (v, _) = cross_sum(&k, &a, &b, &NormSpec::Absolute).unwrap();
        assert_eq!(v.coords(), &[2211.0]);
    }
}
