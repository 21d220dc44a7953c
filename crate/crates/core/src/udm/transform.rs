//! Operations that map UDMs to UDMs, and the closed-form identities of the
//! constructed family.

use crate::gf::{Elem, Field};
use crate::linalg::FieldMatrix;

use super::{UdmError, UdmFamily};

fn check_square(family: &UdmFamily, m: &FieldMatrix) -> Result<(), UdmError> {
    let n = family.block_len();
    if m.rows() != n || m.cols() != n {
        return Err(UdmError::BadParameters(format!(
            "expected an {n}x{n} matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if m.field() != family.field() {
        return Err(crate::linalg::LinalgError::FieldMismatch.into());
    }
    Ok(())
}

/// Replaces `A_l` by `C * A_l` for lower triangular `C` with nonzero
/// diagonal. Each row of `A_l` becomes a nonzero multiple of itself plus a
/// combination of the rows above it, which keeps every prefix span intact.
pub fn left_transform(
    family: &UdmFamily,
    l: usize,
    c: &FieldMatrix,
) -> Result<UdmFamily, UdmError> {
    if l >= family.num_channels() {
        return Err(UdmError::BadParameters(format!("no matrix with index {l}")));
    }
    check_square(family, c)?;
    if !c.is_lower_triangular() {
        return Err(UdmError::NotLowerTriangular);
    }
    if !c.has_nonzero_diagonal() {
        return Err(UdmError::ZeroDiagonal);
    }
    Ok(family.replace(l, c.matmul(family.matrix(l))?))
}

/// Replaces every `A_l` by `A_l * B` for invertible `B`.
pub fn right_multiply(family: &UdmFamily, b: &FieldMatrix) -> Result<UdmFamily, UdmError> {
    check_square(family, b)?;
    if b.rank() < family.block_len() {
        return Err(UdmError::Singular);
    }
    let matrices = family
        .matrices()
        .iter()
        .map(|a| a.matmul(b))
        .collect::<Result<Vec<_>, _>>()?;
    UdmFamily::new(family.field(), matrices)
}

/// `m`-fold Kronecker powers of every matrix.
///
/// The result is only a candidate `(L, n^m, q)` family; it has to be
/// verified, except for the prime-field construction with `n = p`, where it
/// coincides with the construction for `n = p^m`.
pub fn tensor_power(family: &UdmFamily, m: usize) -> Result<UdmFamily, UdmError> {
    if m == 0 {
        return Err(UdmError::BadParameters(
            "tensor power must be at least 1".into(),
        ));
    }
    let matrices = family
        .matrices()
        .iter()
        .map(|a| {
            let mut acc = a.clone();
            for _ in 1..m {
                acc = acc.kron(a)?;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>, UdmError>>()?;
    UdmFamily::new(family.field(), matrices)
}

/// Rewrites each pair `(A_{2j}, A_{2j+1})` so that `A'_{2j+1} = J * A'_{2j}`,
/// using only row operations that preserve the UDMs property.
///
/// Step `i` stacks rows `0..=i` of `A'_{2j}` over rows `0..n-i` of
/// `A'_{2j+1}`, takes a left null vector `b = (b0 | b1)` of that
/// `(n+1) x n` matrix and replaces row `i` of `A'_{2j}` by `b0^T B0` and row
/// `n-1-i` of `A'_{2j+1}` by `-b1^T B1`; the two new rows coincide. An odd
/// trailing matrix is left alone.
pub fn reverse_pairs(family: &UdmFamily) -> Result<UdmFamily, UdmError> {
    let f = family.field();
    let n = family.block_len();
    let mut out = family.clone().with_alpha(None);
    for pair in 0..family.num_channels() / 2 {
        let mut a0 = family.matrix(2 * pair).clone();
        let mut a1 = family.matrix(2 * pair + 1).clone();
        for i in 0..n {
            let b0 = a0.top_rows(i + 1);
            let b1 = a1.top_rows(n - i);
            let stacked = b0.vstack(&b1)?;
            let b = stacked
                .left_null_vector()
                .expect("an (n+1) x n matrix has a left null vector");
            let (c0, c1) = b.as_slice().split_at(i + 1);
            if c0[i].is_zero() || c1[n - i - 1].is_zero() {
                return Err(UdmError::DegenerateNullVector { pair, step: i });
            }
            let row0 = b0.left_mul(c0)?;
            let row1: Vec<Elem> = b1.left_mul(c1)?.into_iter().map(|x| f.neg(x)).collect();
            debug_assert_eq!(row0, row1);
            a0.set_row(i, &row0);
            a1.set_row(n - 1 - i, &row1);
        }
        out = out.replace(2 * pair, a0).replace(2 * pair + 1, a1);
    }
    Ok(out)
}

/// `(L, n, q)` with `A_0 = I`, `A_1 = J` to `(L, n-1, q)`: `A_1` loses its
/// first column and last row, every other matrix its last column and last
/// row.
pub fn reduce(family: &UdmFamily) -> Result<UdmFamily, UdmError> {
    let f = family.field();
    let n = family.block_len();
    if n < 2 {
        return Err(UdmError::BadParameters("reduction needs n >= 2".into()));
    }
    if family.num_channels() < 2
        || *family.matrix(0) != FieldMatrix::identity(f, n)
        || *family.matrix(1) != FieldMatrix::anti_identity(f, n)
    {
        return Err(UdmError::BadNormalization);
    }
    let matrices = family
        .matrices()
        .iter()
        .enumerate()
        .map(|(l, a)| {
            if l == 1 {
                a.submatrix(0..n - 1, 1..n)
            } else {
                a.submatrix(0..n - 1, 0..n - 1)
            }
        })
        .collect();
    UdmFamily::new(f, matrices)
}

/// `Delta_t`: ones on the diagonal and `-1` at `(t'-1, t')` for
/// `t < t' <= n-1`.
pub fn delta_matrix(field: &Field, n: usize, t: usize) -> FieldMatrix {
    let minus_one = field.neg(Elem::ONE);
    FieldMatrix::from_fn(field, n, n, |r, c| {
        if r == c {
            Elem::ONE
        } else if c == r + 1 && c > t {
            minus_one
        } else {
            Elem::ZERO
        }
    })
}

/// Whether `A_2 * Delta_0 * ... * Delta_{n-1} = I`.
pub fn pascal_inverse_check(family: &UdmFamily) -> Result<bool, UdmError> {
    if family.num_channels() < 3 {
        return Err(UdmError::BadParameters("family has no A_2".into()));
    }
    let f = family.field();
    let n = family.block_len();
    let mut acc = family.matrix(2).clone();
    for t in 0..n {
        acc = acc.matmul(&delta_matrix(f, n, t))?;
    }
    Ok(acc == FieldMatrix::identity(f, n))
}

/// Entry `(i, t)` of `A_{l+2}` of the constructed family through radix-p
/// digits: `prod_h C(t_h, i_h) alpha^(l (t_h - i_h) p^h)`.
pub fn lucas_entry(
    field: &Field,
    channels: usize,
    n: usize,
    l: usize,
    i: usize,
    t: usize,
) -> Result<Elem, UdmError> {
    if l + 2 >= channels || i >= n || t >= n {
        return Err(UdmError::BadParameters(format!(
            "(l={l}, i={i}, t={t}) out of range for L={channels}, n={n}"
        )));
    }
    let p = field.characteristic() as usize;
    let group = (field.order() - 1) as i128;
    let alpha = field.primitive_element();
    let mut digits = 0;
    while p.pow(digits) < n {
        digits += 1;
    }
    let (mut i_rest, mut t_rest) = (i, t);
    let mut place: i128 = 1;
    let mut acc = Elem::ONE;
    for _ in 0..digits {
        let (ih, th) = (i_rest % p, t_rest % p);
        let c = field.binom(th as i64, ih as i64);
        let e = (l as i128 * (th as i128 - ih as i128) * place).rem_euclid(group.max(1));
        acc = field.mul(acc, field.mul(c, field.pow(alpha, e as u64)));
        i_rest /= p;
        t_rest /= p;
        place *= p as i128;
    }
    Ok(acc)
}
