//! Rational subspaces of Q^d for d <= 7, described by the set of 0/1
//! points they contain. A point `x` of {0,1}^d is bit `x` of a `u128`.

/// Bitmask over the 2^d points of the cube.
pub(crate) type PointSet = u128;

/// Largest dimension whose cube fits in a [`PointSet`].
pub(crate) const MAX_DIM: usize = 7;

/// Integer row-reduced basis. Every stored row is zero in the pivot
/// columns of the other rows.
#[derive(Clone, Debug, Default)]
pub(crate) struct ReducedBasis {
    rows: Vec<(usize, [i64; MAX_DIM])>,
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.abs()
}

fn normalize(v: &mut [i64; MAX_DIM]) {
    let g = v.iter().fold(0, |g, &x| gcd(g, x));
    if g > 1 {
        v.iter_mut().for_each(|x| *x /= g);
    }
}

fn unpack(bits: u64) -> [i64; MAX_DIM] {
    std::array::from_fn(|i| ((bits >> i) & 1) as i64)
}

impl ReducedBasis {
    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, mut v: [i64; MAX_DIM]) -> [i64; MAX_DIM] {
        for (p, row) in &self.rows {
            let f = v[*p];
            if f != 0 {
                let r = row[*p];
                for i in 0..MAX_DIM {
                    v[i] = r * v[i] - f * row[i];
                }
                normalize(&mut v);
            }
        }
        v
    }

    pub fn contains(&self, bits: u64) -> bool {
        self.reduce(unpack(bits)).iter().all(|&x| x == 0)
    }

    /// Adds `bits` to the spanning set; returns false if it was already in
    /// the span.
    pub fn insert(&mut self, bits: u64) -> bool {
        let v = self.reduce(unpack(bits));
        let Some(p) = v.iter().position(|&x| x != 0) else {
            return false;
        };
        for (_, row) in self.rows.iter_mut() {
            let f = row[p];
            if f != 0 {
                for i in 0..MAX_DIM {
                    row[i] = v[p] * row[i] - f * v[i];
                }
                normalize(row);
            }
        }
        self.rows.push((p, v));
        true
    }

    /// All cube points in the span.
    pub fn points(&self, d: usize) -> PointSet {
        debug_assert!(d <= MAX_DIM);
        let mut set: PointSet = 1;
        for x in 1..(1u64 << d) {
            if self.contains(x) {
                set |= 1 << x;
            }
        }
        set
    }
}

/// Points of {0,1}^d in the span of `vectors`.
#[cfg(test)]
pub(crate) fn span_points(vectors: &[u64], d: usize) -> PointSet {
    let mut b = ReducedBasis::default();
    for &v in vectors {
        b.insert(v);
    }
    b.points(d)
}

/// Mask of all point indices `>= start` in a cube of dimension `d`.
pub(crate) fn indices_from(start: u64, d: usize) -> PointSet {
    let all: PointSet = if d == MAX_DIM {
        u128::MAX
    } else {
        (1u128 << (1 << d)) - 1
    };
    if start >= 128 {
        0
    } else {
        all & !((1u128 << start) - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinate_plane() {
        let s = span_points(&[0b001, 0b010], 3);
        let expect: u128 = (1 << 0) | (1 << 1) | (1 << 2) | (1 << 3);
        assert_eq!(s, expect);
    }

    #[test]
    fn non_coordinate_plane() {
        // x1 = x2 + x3 (coordinate 0 is the sum of coordinates 1 and 2)
        let s = span_points(&[0b011, 0b101], 3);
        assert_eq!(s.count_ones(), 3);
        assert!(s & (1 << 0b011) != 0);
        assert!(s & (1 << 0b101) != 0);
    }

    #[test]
    fn insert_reports_dependence() {
        let mut b = ReducedBasis::default();
        assert!(b.insert(0b011));
        assert!(b.insert(0b110));
        assert!(!b.insert(0b011));
        assert!(b.insert(0b101));
        assert_eq!(b.dim(), 3);
        assert_eq!(b.points(3).count_ones(), 8);
    }

    #[test]
    fn full_dimension_seven() {
        let basis: Vec<u64> = (0..7).map(|i| 1 << i).collect();
        assert_eq!(span_points(&basis, 7), u128::MAX);
        assert_eq!(indices_from(0, 7), u128::MAX);
        assert_eq!(indices_from(3, 2), 0b1000);
    }
}
