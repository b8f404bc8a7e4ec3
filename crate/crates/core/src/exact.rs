//! Fraction-free (Bareiss) elimination over the integers plus modular
//! rank certificates for families of 0/1 vectors.
//!
//! Vectors are bit-packed into `u64` words (bit `i` is coordinate `i`) and
//! laid out as the rows of the working matrix. Row rank equals column rank,
//! and `det(M^T) = det(M)`, so callers may pass either the columns or the
//! rows of a matrix.

use num_bigint::BigInt;
use num_traits::{One, Zero};

/// The Mersenne prime 2^31 - 1, used by the modular fast path.
pub const MODULUS: u64 = (1 << 31) - 1;

/// Integer types Bareiss elimination can run in. Fixed-width types report
/// overflow by returning `None`.
pub(crate) trait ExactInt: Clone {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_bit(bit: bool) -> Self;
    fn is_zero(&self) -> bool;
    /// `(p * x - q * y) / prev`; the division is exact by construction.
    fn cross_div(p: &Self, x: &Self, q: &Self, y: &Self, prev: &Self) -> Option<Self>;
    fn to_bigint(&self) -> BigInt;
}

macro_rules! checked_exact_int {
    ($t:ty) => {
        impl ExactInt for $t {
            fn zero() -> Self {
                0
            }
            fn one() -> Self {
                1
            }
            fn from_bit(bit: bool) -> Self {
                bit as $t
            }
            fn is_zero(&self) -> bool {
                *self == 0
            }
            #[inline]
            fn cross_div(p: &Self, x: &Self, q: &Self, y: &Self, prev: &Self) -> Option<Self> {
                let lhs = p.checked_mul(*x)?;
                let rhs = q.checked_mul(*y)?;
                Some(lhs.checked_sub(rhs)? / *prev)
            }
            fn to_bigint(&self) -> BigInt {
                BigInt::from(*self)
            }
        }
    };
}

checked_exact_int!(i64);
checked_exact_int!(i128);

impl ExactInt for BigInt {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_bit(bit: bool) -> Self {
        BigInt::from(bit as u8)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn cross_div(p: &Self, x: &Self, q: &Self, y: &Self, prev: &Self) -> Option<Self> {
        Some((p * x - q * y) / prev)
    }
    fn to_bigint(&self) -> BigInt {
        self.clone()
    }
}

/// Outcome of a fraction-free elimination.
pub(crate) struct Echelon<T> {
    pub rank: usize,
    /// Last pivot; for a nonsingular square input this is `±det`.
    pub last_pivot: T,
    pub negated: bool,
}

/// Bareiss elimination with column skipping, in place on a row-major
/// `rows x cols` matrix. Every intermediate entry is a minor of the input,
/// so fixed-width overflow can only occur past the Hadamard bound.
pub(crate) fn bareiss<T: ExactInt>(a: &mut [T], rows: usize, cols: usize) -> Option<Echelon<T>> {
    debug_assert_eq!(a.len(), rows * cols);
    let mut prev = T::one();
    let mut rank = 0;
    let mut negated = false;
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let Some(p) = (rank..rows).find(|&r| !a[r * cols + c].is_zero()) else {
            continue;
        };
        if p != rank {
            for j in 0..cols {
                a.swap(p * cols + j, rank * cols + j);
            }
            negated = !negated;
        }
        let pivot = a[rank * cols + c].clone();
        for i in rank + 1..rows {
            let factor = a[i * cols + c].clone();
            for j in c + 1..cols {
                let v = T::cross_div(
                    &pivot,
                    &a[i * cols + j],
                    &factor,
                    &a[rank * cols + j],
                    &prev,
                )?;
                a[i * cols + j] = v;
            }
            a[i * cols + c] = T::zero();
        }
        prev = pivot;
        rank += 1;
    }
    Some(Echelon {
        rank,
        last_pivot: prev,
        negated,
    })
}

fn load<T: ExactInt>(vectors: &[u64], dim: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(vectors.len() * dim);
    for &v in vectors {
        for i in 0..dim {
            out.push(T::from_bit((v >> i) & 1 == 1));
        }
    }
    out
}

fn try_rank_det<T: ExactInt>(vectors: &[u64], dim: usize) -> Option<(usize, BigInt)> {
    let mut a = load::<T>(vectors, dim);
    let e = bareiss(&mut a, vectors.len(), dim)?;
    let det = if vectors.len() == dim && e.rank == dim {
        let d = e.last_pivot.to_bigint();
        if e.negated {
            -d
        } else {
            d
        }
    } else {
        <BigInt as Zero>::zero()
    };
    Some((e.rank, det))
}

/// Exact rank of a family of 0/1 vectors and, when the family is square,
/// its exact determinant (zero otherwise). Escalates `i64 -> i128 -> BigInt`
/// on overflow.
pub fn exact_rank_det(vectors: &[u64], dim: usize) -> (usize, BigInt) {
    if vectors.len().max(dim) <= 16 {
        if let Some(r) = try_rank_det::<i64>(vectors, dim) {
            return r;
        }
    }
    if let Some(r) = try_rank_det::<i128>(vectors, dim) {
        return r;
    }
    try_rank_det::<BigInt>(vectors, dim).expect("BigInt elimination cannot overflow")
}

/// Exact rank only.
pub fn exact_rank(vectors: &[u64], dim: usize) -> usize {
    exact_rank_det(vectors, dim).0
}

/// Rank over GF(2). A family that is independent mod 2 has an odd maximal
/// minor and is therefore independent over the rationals.
pub fn gf2_rank(vectors: &[u64]) -> usize {
    let mut basis = [0u64; 64];
    let mut rank = 0;
    for &v in vectors {
        let mut x = v;
        while x != 0 {
            let top = 63 - x.leading_zeros() as usize;
            if basis[top] == 0 {
                basis[top] = x;
                rank += 1;
                break;
            }
            x ^= basis[top];
        }
    }
    rank
}

/// Rank modulo 3, with each vector held as two masks (coordinates equal to
/// 1, coordinates equal to 2). Never exceeds the rational rank.
pub fn gf3_rank(vectors: &[u64]) -> usize {
    #[inline(always)]
    fn add(x: (u64, u64), y: (u64, u64)) -> (u64, u64) {
        let (x1, x2) = x;
        let (y1, y2) = y;
        let x0 = !(x1 | x2);
        let y0 = !(y1 | y2);
        (
            (x1 & y0) | (x0 & y1) | (x2 & y2),
            (x2 & y0) | (x0 & y2) | (x1 & y1),
        )
    }
    let mut rows = [(0u64, 0u64); 64];
    let n = vectors.len().min(64);
    for (r, &v) in rows.iter_mut().zip(vectors) {
        *r = (v, 0);
    }
    let mut live = &mut rows[..n];
    let mut rank = 0;
    while !live.is_empty() {
        let Some(p) = live.iter().position(|&(a, b)| a | b != 0) else {
            break;
        };
        live.swap(0, p);
        let (head, rest) = live.split_first_mut().expect("nonempty");
        let pivot = *head;
        let bit = (pivot.0 | pivot.1) & (pivot.0 | pivot.1).wrapping_neg();
        for row in rest.iter_mut() {
            // subtract the pivot where the entries agree, add it where they differ
            let same = (((row.0 & pivot.0) | (row.1 & pivot.1)) & bit != 0) as u64;
            let diff = (((row.0 & pivot.1) | (row.1 & pivot.0)) & bit != 0) as u64;
            let (s, t) = (same.wrapping_neg(), diff.wrapping_neg());
            *row = add(
                *row,
                ((pivot.1 & s) | (pivot.0 & t), (pivot.0 & s) | (pivot.1 & t)),
            );
        }
        rank += 1;
        live = rest;
    }
    rank
}

#[inline(always)]
fn reduce(x: u64) -> u64 {
    // x < 2^63
    let x = (x & MODULUS) + (x >> 31);
    let x = (x & MODULUS) + (x >> 31);
    if x >= MODULUS {
        x - MODULUS
    } else {
        x
    }
}

/// Rank modulo [`MODULUS`]. Never exceeds the rational rank.
pub fn modp_rank(vectors: &[u64], dim: usize) -> usize {
    // eliminate on the shorter side; rank is the same
    if vectors.len() > dim && vectors.len() <= 64 {
        let rows: Vec<u64> = (0..dim)
            .map(|i| {
                vectors
                    .iter()
                    .enumerate()
                    .fold(0, |acc, (j, &v)| acc | (((v >> i) & 1) << j))
            })
            .collect();
        return modp_rank(&rows, vectors.len());
    }
    let rows = vectors.len();
    let cols = dim;
    let mut stack = [0u32; MAX_ENTRIES];
    let mut heap = Vec::new();
    let a: &mut [u32] = if rows * cols <= MAX_ENTRIES {
        &mut stack[..rows * cols]
    } else {
        heap.resize(rows * cols, 0);
        &mut heap
    };
    for (r, &v) in vectors.iter().enumerate() {
        for i in 0..cols {
            a[r * cols + i] = ((v >> i) & 1) as u32;
        }
    }
    let mut rank = 0;
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let Some(p) = (rank..rows).find(|&r| a[r * cols + c] != 0) else {
            continue;
        };
        if p != rank {
            for j in c..cols {
                a.swap(p * cols + j, rank * cols + j);
            }
        }
        let (head, tail) = a.split_at_mut((rank + 1) * cols);
        let pivot_row = &head[rank * cols..];
        let pivot = pivot_row[c] as u64;
        for row in tail.chunks_exact_mut(cols) {
            let f = row[c] as u64;
            if f == 0 {
                continue;
            }
            let nf = MODULUS - f;
            for (x, &y) in row[c + 1..].iter_mut().zip(&pivot_row[c + 1..]) {
                *x = reduce(pivot * *x as u64 + nf * y as u64) as u32;
            }
            row[c] = 0;
        }
        rank += 1;
    }
    rank
}

const MAX_ENTRIES: usize = 32 * 32;

/// How a rank was established.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RankMethod {
    /// Full rank certified modulo a prime.
    ModularFastPath,
    /// Established by exact fraction-free elimination.
    ExactFractionFree,
}

/// Rational rank of a vector family. Full rank may be certified modulo 2, 3 or
/// modulo [`MODULUS`]; a deficient modular rank is always re-derived by
/// exact elimination.
pub fn family_rank(vectors: &[u64], dim: usize) -> (usize, RankMethod) {
    let full = vectors.len().min(dim);
    if gf2_rank(vectors) == full {
        return (full, RankMethod::ModularFastPath);
    }
    if gf3_rank(vectors) == full {
        return (full, RankMethod::ModularFastPath);
    }
    if vectors.len() * dim <= SMALL_ENTRIES {
        return (
            small_exact_rank(vectors, dim),
            RankMethod::ExactFractionFree,
        );
    }
    if modp_rank(vectors, dim) == full {
        return (full, RankMethod::ModularFastPath);
    }
    (exact_rank(vectors, dim), RankMethod::ExactFractionFree)
}

const SMALL_ENTRIES: usize = 64;

/// Exact rank of a family with at most [`SMALL_ENTRIES`] entries, on the
/// stack. Minors of such a family are far below `i64` range.
fn small_exact_rank(vectors: &[u64], dim: usize) -> usize {
    let rows = vectors.len();
    let mut a = [0i64; SMALL_ENTRIES];
    for (r, &v) in vectors.iter().enumerate() {
        for i in 0..dim {
            a[r * dim + i] = ((v >> i) & 1) as i64;
        }
    }
    bareiss(&mut a[..rows * dim], rows, dim)
        .expect("small minors fit in i64")
        .rank
}

/// True when the family is linearly independent over the rationals.
pub fn is_independent(vectors: &[u64], dim: usize) -> bool {
    vectors.len() <= dim && family_rank(vectors, dim).0 == vectors.len()
}
