//! Universally decodable matrices.
//!
//! `L` matrices `A_0, ..., A_{L-1}` of size `n x n` over GF(q) are
//! `(L, n, q)`-UDMs when, for every tuple `(k_0, ..., k_{L-1})` with
//! `0 <= k_l <= n` and `sum k_l >= n`, stacking the first `k_l` rows of each
//! `A_l` gives a matrix of full column rank. Checking tuples with
//! `sum k_l = n` is enough; there are `C(n + L - 1, L - 1)` of them.

mod search;
mod transform;

use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::gf::{Elem, Field, FieldError};
use crate::hasse::{hasse_monomial_bivariate, HasseError, Polynomial};
use crate::linalg::{stack_prefixes, FieldMatrix, LinalgError};

pub use search::{
    exhaustive_search, refute_bound, SearchReport, DEFAULT_SEARCH_BUDGET, MAX_EXAMPLES,
};
pub use transform::{
    delta_matrix, left_transform, lucas_entry, pascal_inverse_check, reduce, reverse_pairs,
    right_multiply, tensor_power,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UdmError {
    #[error("invalid parameters: {0}")]
    BadParameters(String),
    #[error("(L={channels}, n={n}) needs L <= q+1 = {} for n >= 2", .q + 1)]
    TooManyChannels { channels: usize, n: usize, q: u32 },
    #[error("matrix is not lower triangular")]
    NotLowerTriangular,
    #[error("matrix has a zero on its diagonal")]
    ZeroDiagonal,
    #[error("matrix is singular")]
    Singular,
    #[error(
        "left null vector has a zero pivot component (pair {pair}, step {step}); input is not UDMs"
    )]
    DegenerateNullVector { pair: usize, step: usize },
    #[error("family is not normalized to A_0 = I and A_1 = J")]
    BadNormalization,
    #[error("search space of {candidates} candidates exceeds the budget of {budget}")]
    BudgetExceeded { candidates: u128, budget: u128 },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Hasse(#[from] HasseError),
}

/// An ordered list of `L` square matrices of size `n` over one field.
#[derive(Clone, PartialEq, Eq)]
pub struct UdmFamily {
    field: Field,
    n: usize,
    matrices: Vec<FieldMatrix>,
    /// Primitive element used by [`construct`]; `None` otherwise.
    alpha: Option<Elem>,
}

impl UdmFamily {
    pub fn new(field: &Field, matrices: Vec<FieldMatrix>) -> Result<Self, UdmError> {
        let first = matrices
            .first()
            .ok_or_else(|| UdmError::BadParameters("a family needs at least one matrix".into()))?;
        let n = first.rows();
        if n == 0 {
            return Err(UdmError::BadParameters(
                "matrices must be at least 1x1".into(),
            ));
        }
        for (l, m) in matrices.iter().enumerate() {
            if m.field() != field {
                return Err(LinalgError::FieldMismatch.into());
            }
            if m.rows() != n || m.cols() != n {
                return Err(UdmError::BadParameters(format!(
                    "matrix {l} is {}x{}, expected {n}x{n}",
                    m.rows(),
                    m.cols()
                )));
            }
        }
        Ok(UdmFamily {
            field: field.clone(),
            n,
            matrices,
            alpha: None,
        })
    }

    pub fn with_alpha(mut self, alpha: Option<Elem>) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    /// `L`.
    pub fn num_channels(&self) -> usize {
        self.matrices.len()
    }

    /// `n`.
    pub fn block_len(&self) -> usize {
        self.n
    }

    pub fn matrices(&self) -> &[FieldMatrix] {
        &self.matrices
    }

    pub fn matrix(&self, l: usize) -> &FieldMatrix {
        &self.matrices[l]
    }

    pub fn alpha(&self) -> Option<Elem> {
        self.alpha
    }

    /// `A_{sigma(0)}, ..., A_{sigma(L-1)}`.
    pub fn permute(&self, sigma: &[usize]) -> Result<UdmFamily, UdmError> {
        let mut seen = vec![false; self.matrices.len()];
        if sigma.len() != seen.len()
            || sigma
                .iter()
                .any(|&s| s >= seen.len() || std::mem::replace(&mut seen[s], true))
        {
            return Err(UdmError::BadParameters(format!(
                "{sigma:?} is not a permutation"
            )));
        }
        let matrices = sigma.iter().map(|&s| self.matrices[s].clone()).collect();
        UdmFamily::new(&self.field, matrices)
    }

    /// The first `count` matrices.
    pub fn prefix(&self, count: usize) -> Result<UdmFamily, UdmError> {
        if count == 0 || count > self.matrices.len() {
            return Err(UdmError::BadParameters(format!(
                "cannot take {count} of {} matrices",
                self.matrices.len()
            )));
        }
        Ok(UdmFamily::new(&self.field, self.matrices[..count].to_vec())?.with_alpha(self.alpha))
    }

    /// Replaces matrix `l`, dropping the construction metadata.
    pub(crate) fn replace(&self, l: usize, m: FieldMatrix) -> UdmFamily {
        let mut matrices = self.matrices.clone();
        matrices[l] = m;
        UdmFamily {
            field: self.field.clone(),
            n: self.n,
            matrices,
            alpha: None,
        }
    }
}

impl fmt::Debug for UdmFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UdmFamily")
            .field("field", &self.field)
            .field("L", &self.matrices.len())
            .field("n", &self.n)
            .field("alpha", &self.alpha)
            .field("matrices", &self.matrices)
            .finish()
    }
}

/// Per-channel lengths of the non-erased prefixes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ErasureTuple(Vec<usize>);

impl ErasureTuple {
    pub fn new(ks: Vec<usize>, n: usize) -> Result<Self, UdmError> {
        if let Some(k) = ks.iter().find(|&&k| k > n) {
            return Err(UdmError::BadParameters(format!(
                "prefix length {k} exceeds n = {n}"
            )));
        }
        Ok(ErasureTuple(ks))
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `sum k_l`.
    pub fn weight(&self) -> usize {
        self.0.iter().sum()
    }
}

impl fmt::Display for ErasureTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|k| k.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// All tuples of length `L` with entries in `[0, n]` summing to `n`, in
/// lexicographic order (`k_0` varies slowest).
pub fn enumerate_exact_tuples(channels: usize, n: usize) -> ExactTuples {
    assert!(channels >= 1, "need at least one channel");
    let mut first = vec![0; channels];
    first[channels - 1] = n;
    ExactTuples { next: Some(first) }
}

pub struct ExactTuples {
    next: Option<Vec<usize>>,
}

impl Iterator for ExactTuples {
    type Item = ErasureTuple;

    fn next(&mut self) -> Option<ErasureTuple> {
        let current = self.next.take()?;
        // Move one unit from the last nonzero position z >= 1 into z - 1 and
        // sweep the remainder of k_z to the end.
        let mut succ = current.clone();
        if let Some(z) = (1..succ.len()).rev().find(|&z| succ[z] > 0) {
            let r = succ[z];
            succ[z] = 0;
            succ[z - 1] += 1;
            let last = succ.len() - 1;
            succ[last] += r - 1;
            self.next = Some(succ);
        }
        Some(ErasureTuple(current))
    }
}

/// All tuples in `[0, n]^L` with `sum >= n`, in lexicographic order.
pub fn enumerate_superset_tuples(channels: usize, n: usize) -> impl Iterator<Item = ErasureTuple> {
    assert!(channels >= 1, "need at least one channel");
    let mut state = Some(vec![0usize; channels]);
    std::iter::from_fn(move || {
        let current = state.take()?;
        let mut succ = current.clone();
        let mut k = channels;
        while k > 0 {
            k -= 1;
            if succ[k] < n {
                succ[k] += 1;
                state = Some(succ);
                break;
            }
            succ[k] = 0;
        }
        Some(current)
    })
    .filter(move |ks| ks.iter().sum::<usize>() >= n)
    .map(ErasureTuple)
}

/// Number of tuples in `K^{=n}_L`: `C(n + L - 1, L - 1)`.
pub fn exact_tuple_count(channels: usize, n: usize) -> u128 {
    let (top, k) = ((n + channels - 1) as u128, (channels - 1) as u128);
    let k = k.min(top - k);
    (0..k).fold(1u128, |acc, j| acc * (top - j) / (j + 1))
}

/// The `(L, n, q)` family with `A_0 = I`, `A_1 = J` and
/// `[A_{l+2}]_{i,t} = C(t, i) * alpha^(l (t - i))` for the canonical
/// primitive element `alpha`.
///
/// Needs `L <= q + 1` unless `n = 1`, where `L` copies of `(1)` are UDMs for
/// any `L`.
pub fn construct(field: &Field, channels: usize, n: usize) -> Result<UdmFamily, UdmError> {
    if channels == 0 || n == 0 {
        return Err(UdmError::BadParameters("L and n must be positive".into()));
    }
    if n >= 2 && channels > field.order() as usize + 1 {
        return Err(UdmError::TooManyChannels {
            channels,
            n,
            q: field.order(),
        });
    }
    let alpha = field.primitive_element();
    let mut matrices = Vec::with_capacity(channels);
    matrices.push(FieldMatrix::identity(field, n));
    if channels >= 2 {
        matrices.push(FieldMatrix::anti_identity(field, n));
    }
    for l in 0..channels.saturating_sub(2) {
        matrices.push(FieldMatrix::from_fn(field, n, n, |i, t| {
            let c = field.binom(t as i64, i as i64);
            if c.is_zero() {
                return c;
            }
            let shift = field
                .pow_signed(alpha, l as i64 * (t as i64 - i as i64))
                .expect("alpha is nonzero");
            field.mul(c, shift)
        }));
    }
    Ok(UdmFamily::new(field, matrices)?.with_alpha(Some(alpha)))
}

/// Evaluation point of channel `l` for the constructed family: `beta_0 = 0`,
/// `beta_{l+2} = alpha^l`. Channel 1 sits at infinity and has none.
pub fn evaluation_point(field: &Field, l: usize) -> Option<Elem> {
    match l {
        0 => Some(Elem::ZERO),
        1 => None,
        _ => Some(field.pow(field.primitive_element(), (l - 2) as u64)),
    }
}

/// Entry `(i, t)` of channel `l` of the constructed family, computed as a
/// Hasse derivative of `L^t` evaluated at `beta_l`, or for `l = 1` as the
/// derivative in the homogenizing variable at the point `(1, 0)`.
pub fn construct_entry_oracle(
    field: &Field,
    channels: usize,
    n: usize,
    l: usize,
    i: usize,
    t: usize,
) -> Result<Elem, UdmError> {
    if l >= channels || i >= n || t >= n {
        return Err(UdmError::BadParameters(format!(
            "(l={l}, i={i}, t={t}) out of range for L={channels}, n={n}"
        )));
    }
    match evaluation_point(field, l) {
        None => Ok(hasse_monomial_bivariate(
            field,
            t,
            n,
            i,
            (Elem::ONE, Elem::ZERO),
        )?),
        Some(beta) => Ok(Polynomial::monomial(field, Elem::ONE, t)
            .hasse_derivative(i)
            .evaluate(beta)),
    }
}

/// The whole family rebuilt entrywise by [`construct_entry_oracle`].
pub fn construct_by_oracle(
    field: &Field,
    channels: usize,
    n: usize,
) -> Result<UdmFamily, UdmError> {
    let mut matrices = Vec::with_capacity(channels);
    for l in 0..channels {
        let mut m = FieldMatrix::zeros(field, n, n);
        for i in 0..n {
            for t in 0..n {
                m.set(i, t, construct_entry_oracle(field, channels, n, l, i, t)?);
            }
        }
        matrices.push(m);
    }
    UdmFamily::new(field, matrices)
}

#[derive(Clone, Copy, Debug, Default)]
pub struct VerifyOptions {
    /// Also check every tuple with `sum k > n`.
    pub superset: bool,
    /// Split the tuple list across worker threads.
    pub parallel: bool,
}

/// First failing tuple, with the stacked matrix and its rank.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub tuple: ErasureTuple,
    pub matrix: FieldMatrix,
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyReport {
    pub passed: bool,
    pub tuples_checked: usize,
    pub witness: Option<Witness>,
}

pub fn verify(family: &UdmFamily) -> VerifyReport {
    verify_with(family, VerifyOptions::default())
}

/// Checks the rank condition tuple by tuple in enumeration order. The
/// reported witness is the first failure in that order, also when the work
/// is spread over threads.
pub fn verify_with(family: &UdmFamily, options: VerifyOptions) -> VerifyReport {
    let (channels, n) = (family.num_channels(), family.block_len());
    let check = |k: &ErasureTuple| -> Option<Witness> {
        let matrix =
            stack_prefixes(family.matrices(), k.as_slice()).expect("tuple fits the family");
        let rank = matrix.rank();
        (rank < n).then(|| Witness {
            tuple: k.clone(),
            matrix,
            rank,
        })
    };
    let tuples: Box<dyn Iterator<Item = ErasureTuple>> = if options.superset {
        Box::new(enumerate_superset_tuples(channels, n))
    } else {
        Box::new(enumerate_exact_tuples(channels, n))
    };

    if options.parallel {
        let all: Vec<ErasureTuple> = tuples.collect();
        let failure = all.par_iter().position_first(|k| check(k).is_some());
        return match failure {
            None => VerifyReport {
                passed: true,
                tuples_checked: all.len(),
                witness: None,
            },
            Some(idx) => VerifyReport {
                passed: false,
                tuples_checked: idx + 1,
                witness: check(&all[idx]),
            },
        };
    }

    let mut checked = 0;
    for k in tuples {
        checked += 1;
        if let Some(w) = check(&k) {
            return VerifyReport {
                passed: false,
                tuples_checked: checked,
                witness: Some(w),
            };
        }
    }
    VerifyReport {
        passed: true,
        tuples_checked: checked,
        witness: None,
    }
}
