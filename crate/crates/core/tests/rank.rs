use cubespec_core::exact::{self, RankMethod};
use cubespec_core::matrix::{self, determinant, kernel_normal, rank_exact, BinaryMatrix};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn entries(m: &BinaryMatrix) -> Vec<Vec<i64>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| m.get(i, j) as i64).collect())
        .collect()
}

fn cofactor_det(a: &[Vec<i64>]) -> i64 {
    let n = a.len();
    if n == 0 {
        return 1;
    }
    if n == 1 {
        return a[0][0];
    }
    let mut total = 0;
    for j in 0..n {
        if a[0][j] == 0 {
            continue;
        }
        let minor: Vec<Vec<i64>> = a[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|&(k, _)| k != j)
                    .map(|(_, &x)| x)
                    .collect()
            })
            .collect();
        let sign = if j % 2 == 0 { 1 } else { -1 };
        total += sign * a[0][j] * cofactor_det(&minor);
    }
    total
}

/// Rank and determinant by Gaussian elimination over the rationals.
fn rational_rank_det(a: &[Vec<i64>]) -> (usize, BigRational) {
    let mut m: Vec<Vec<BigRational>> = a
        .iter()
        .map(|r| {
            r.iter()
                .map(|&x| BigRational::from_integer(x.into()))
                .collect()
        })
        .collect();
    let rows = m.len();
    let cols = m[0].len();
    let mut det = BigRational::from_integer(1.into());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows).find(|&r| !m[r][c].is_zero()) else {
            det = BigRational::zero();
            continue;
        };
        if p != rank {
            m.swap(p, rank);
            det = -det;
        }
        det *= m[rank][c].clone();
        for r in rank + 1..rows {
            if m[r][c].is_zero() {
                continue;
            }
            let f = &m[r][c] / &m[rank][c];
            for k in c..cols {
                let delta = &f * &m[rank][k];
                m[r][k] -= delta;
            }
        }
        rank += 1;
    }
    if rank < rows.min(cols) || rows != cols {
        det = BigRational::zero();
    }
    (rank, det)
}

fn random_matrix(rng: &mut StdRng, d: usize) -> BinaryMatrix {
    let cols = (0..d)
        .map(|_| rng.gen::<u64>() & matrix::low_mask(d))
        .collect();
    BinaryMatrix::from_columns(d, cols).unwrap()
}

fn check_against_cofactor(m: &BinaryMatrix) {
    let det = cofactor_det(&entries(m));
    let r = rank_exact(m);
    assert_eq!(r.determinant, Some(BigInt::from(det)), "{m}");
    assert_eq!(r.rank == m.rows(), det != 0, "{m}");
    assert_eq!(determinant(m).unwrap(), BigInt::from(det));
}

#[test]
fn exhaustive_determinants_up_to_three() {
    for d in 1..=3 {
        for idx in 0u64..1 << (d * d) {
            let cols = (0..d)
                .map(|j| (idx >> (j * d)) & matrix::low_mask(d))
                .collect();
            check_against_cofactor(&BinaryMatrix::from_columns(d, cols).unwrap());
        }
    }
}

#[test]
fn random_determinants_four_and_five() {
    let mut rng = StdRng::seed_from_u64(11);
    for d in [4, 5] {
        for _ in 0..100_000 {
            check_against_cofactor(&random_matrix(&mut rng, d));
        }
    }
}

#[test]
fn wide_dimension_matches_rational_oracle() {
    let mut rng = StdRng::seed_from_u64(12);
    for d in [12, 20, 30] {
        for _ in 0..20 {
            let m = random_matrix(&mut rng, d);
            let (rank, det) = rational_rank_det(&entries(&m));
            let r = rank_exact(&m);
            assert_eq!(r.rank, rank);
            let got = r.determinant.unwrap();
            assert_eq!(BigRational::from_integer(got.clone()), det);
            // Hadamard: det^2 <= d^d
            assert!(&got * &got <= BigInt::from(d).pow(d as u32));
        }
    }
}

#[test]
fn rank_deficient_wide_matrices() {
    // duplicate a column of a random matrix: rank drops, exact path reports it
    let mut rng = StdRng::seed_from_u64(13);
    for d in [10, 30, 60] {
        let m = random_matrix(&mut rng, d);
        let mut cols = m.columns().to_vec();
        cols[d - 1] = cols[0];
        let m = BinaryMatrix::from_columns(d, cols).unwrap();
        let r = rank_exact(&m);
        assert!(r.rank < d);
        assert_eq!(r.determinant, Some(BigInt::zero()));
        let (rank, _) = rational_rank_det(&entries(&m));
        assert_eq!(r.rank, rank);
        assert_eq!(
            exact::family_rank(m.columns(), d),
            (rank, RankMethod::ExactFractionFree)
        );
    }
}

#[test]
fn rectangular_ranks_match_oracle() {
    let mut rng = StdRng::seed_from_u64(14);
    for _ in 0..2_000 {
        let rows = rng.gen_range(1..=9);
        let cols: Vec<u64> = (0..rng.gen_range(1..=9))
            .map(|_| rng.gen::<u64>() & matrix::low_mask(rows))
            .collect();
        let m = BinaryMatrix::from_columns(rows, cols).unwrap();
        let (rank, _) = rational_rank_det(&entries(&m));
        assert_eq!(matrix::rank(&m), rank, "{m}");
    }
}

fn random_full_rank_tall(rng: &mut StdRng, d: usize) -> BinaryMatrix {
    loop {
        let cols: Vec<u64> = (0..d - 1)
            .map(|_| rng.gen::<u64>() & matrix::low_mask(d))
            .collect();
        if exact::is_independent(&cols, d) {
            return BinaryMatrix::from_columns(d, cols).unwrap();
        }
    }
}

#[test]
fn kernel_normal_is_orthogonal() {
    let mut rng = StdRng::seed_from_u64(15);
    for case in 0..10_000 {
        let d = 2 + case % 15;
        let m = random_full_rank_tall(&mut rng, d);
        let a = kernel_normal(&m).unwrap();
        assert!(!a.is_zero());
        for &c in m.columns() {
            assert!(a.dot_bits(c).is_zero(), "{m}\n{a}");
        }
    }
}

/// Kernel of the transpose by exact rational elimination, scaled to
/// coprime integers.
fn kernel_oracle(m: &BinaryMatrix) -> Vec<BigInt> {
    let d = m.rows();
    // rows of M^T are the columns of M
    let mut a: Vec<Vec<BigRational>> = m
        .columns()
        .iter()
        .map(|&c| {
            (0..d)
                .map(|i| BigRational::from_integer(((c >> i) & 1).into()))
                .collect()
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..d {
        let Some(p) = (r..a.len()).find(|&k| !a[k][c].is_zero()) else {
            continue;
        };
        a.swap(p, r);
        let inv = a[r][c].recip();
        for x in a[r].iter_mut() {
            *x *= inv.clone();
        }
        for k in 0..a.len() {
            if k != r && !a[k][c].is_zero() {
                let f = a[k][c].clone();
                for j in 0..d {
                    let delta = &f * &a[r][j];
                    a[k][j] -= delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free = (0..d).find(|c| !pivots.contains(c)).unwrap();
    let mut x = vec![BigRational::zero(); d];
    x[free] = BigRational::from_integer(1.into());
    for (row, &p) in pivots.iter().enumerate() {
        x[p] = -a[row][free].clone();
    }
    let lcm = x.iter().fold(BigInt::from(1), |acc, v| {
        num_integer::lcm(acc, v.denom().clone())
    });
    let ints: Vec<BigInt> = x
        .iter()
        .map(|v| (v * BigRational::from_integer(lcm.clone())).to_integer())
        .collect();
    let g = ints
        .iter()
        .fold(BigInt::zero(), |acc, v| num_integer::gcd(acc, v.clone()));
    ints.into_iter().map(|v| v / &g).collect()
}

fn proportional(a: &[BigInt], b: &[BigInt]) -> bool {
    // a_i b_j == a_j b_i for all pairs
    (0..a.len()).all(|i| (0..a.len()).all(|j| &a[i] * &b[j] == &a[j] * &b[i]))
}

#[test]
fn kernel_normal_matches_elimination_oracle() {
    let m = BinaryMatrix::from_columns(4, vec![0b0011, 0b0110, 0b1100]).unwrap();
    let a = kernel_normal(&m).unwrap();
    let oracle = kernel_oracle(&m);
    assert!(proportional(a.entries(), &oracle), "{a} vs {oracle:?}");
    for &c in m.columns() {
        assert!(a.dot_bits(c).is_zero());
    }
    // the cofactor normal has a_j = (-1)^j det(M without row j), j from 1
    for j in 0..4 {
        let minor = determinant(&m.without_row(j).unwrap()).unwrap();
        let expect = if j % 2 == 0 { -minor } else { minor };
        assert_eq!(a.entries()[j], expect);
    }

    let mut rng = StdRng::seed_from_u64(16);
    for _ in 0..500 {
        let m = random_full_rank_tall(&mut rng, 4);
        assert!(proportional(
            kernel_normal(&m).unwrap().entries(),
            &kernel_oracle(&m)
        ));
    }
}

#[test]
fn kernel_support_invariant_under_permutations() {
    let mut rng = StdRng::seed_from_u64(17);
    for _ in 0..2_000 {
        let d = rng.gen_range(2..=10);
        let m = random_full_rank_tall(&mut rng, d);
        let a = kernel_normal(&m).unwrap();
        // reverse the column order
        let mut cols = m.columns().to_vec();
        cols.reverse();
        let b = kernel_normal(&BinaryMatrix::from_columns(d, cols.clone()).unwrap()).unwrap();
        assert_eq!(a.support_size(), b.support_size());
        // swap two rows: the normal swaps the same entries up to a global sign
        let (i, j) = (rng.gen_range(0..d), rng.gen_range(0..d));
        let swapped: Vec<u64> = cols
            .iter()
            .map(|&c| {
                let (bi, bj) = ((c >> i) & 1, (c >> j) & 1);
                (c & !(1 << i) & !(1 << j)) | (bi << j) | (bj << i)
            })
            .collect();
        let s = kernel_normal(&BinaryMatrix::from_columns(d, swapped).unwrap()).unwrap();
        assert_eq!(s.support_size(), a.support_size());
        let mut expect = b.entries().to_vec();
        expect.swap(i, j);
        let same = s.entries() == &expect[..];
        let negated = s.entries().iter().zip(&expect).all(|(x, y)| *x == -y);
        assert!(same || negated || i == j);
        assert!(s
            .entries()
            .iter()
            .map(|x| x.abs())
            .eq(expect.iter().map(|x| x.abs())));
    }
}

#[test]
fn gf2_and_modp_never_exceed_exact_rank() {
    let mut rng = StdRng::seed_from_u64(18);
    for _ in 0..20_000 {
        let d = rng.gen_range(1..=12);
        let cols: Vec<u64> = (0..d)
            .map(|_| rng.gen::<u64>() & matrix::low_mask(d))
            .collect();
        let r = exact::exact_rank(&cols, d);
        assert!(exact::gf2_rank(&cols) <= r);
        assert!(exact::gf3_rank(&cols) <= r);
        assert!(exact::modp_rank(&cols, d) <= r);
        assert_eq!(exact::family_rank(&cols, d).0, r);
    }
}
