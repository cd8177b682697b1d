//! Exact linear algebra over `Q` and `Z` for small dense systems.
//!
//! Everything here works on plain `Vec` rows. Sizes are tiny (rank at most a
//! handful, a few dozen rows), so clarity wins over asymptotics.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rat = BigRational;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat_vec(v: &[i64]) -> Vec<Rat> {
    v.iter().map(|&x| rat(x)).collect()
}

/// `<a, x>` for an integer covector and a rational point.
pub fn dot_int_rat(a: &[i64], x: &[Rat]) -> Rat {
    a.iter()
        .zip(x)
        .fold(Rat::zero(), |acc, (&ai, xi)| acc + xi * BigInt::from(ai))
}

pub fn dot_rat(a: &[Rat], x: &[Rat]) -> Rat {
    a.iter().zip(x).fold(Rat::zero(), |acc, (ai, xi)| acc + ai * xi)
}

pub fn dot_int(a: &[i64], b: &[i64]) -> i128 {
    a.iter().zip(b).map(|(&x, &y)| x as i128 * y as i128).sum()
}

/// Reduced row echelon form in place; returns the pivot columns.
fn rref(rows: &mut [Vec<Rat>], ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][col].recip();
        for x in rows[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][col].is_zero() {
                let f = rows[i][col].clone();
                for j in 0..rows[i].len() {
                    let d = &f * &rows[r][j];
                    rows[i][j] -= d;
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    pivots
}

pub fn rank(rows: &[Vec<Rat>], ncols: usize) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m, ncols).len()
}

/// Basis of `{x : rows * x = 0}`, one vector per free column.
pub fn nullspace(rows: &[Vec<Rat>], ncols: usize) -> Vec<Vec<Rat>> {
    let mut m = rows.to_vec();
    let pivots = rref(&mut m, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rat::zero(); ncols];
            v[f] = Rat::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[r][f].clone();
            }
            v
        })
        .collect()
}

/// Unique solution of a square system, or `None` when singular.
pub fn solve_square(rows: &[Vec<Rat>], rhs: &[Rat]) -> Option<Vec<Rat>> {
    let n = rhs.len();
    let mut aug: Vec<Vec<Rat>> = rows
        .iter()
        .zip(rhs)
        .map(|(row, b)| {
            let mut r = row.clone();
            r.push(b.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug, n);
    if pivots.len() < n {
        return None;
    }
    Some(aug.iter().map(|r| r[n].clone()).collect())
}

pub fn inverse(rows: &[Vec<Rat>]) -> Option<Vec<Vec<Rat>>> {
    let n = rows.len();
    let mut aug: Vec<Vec<Rat>> = rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rat::one() } else { Rat::zero() }));
            r
        })
        .collect();
    if rref(&mut aug, n).len() < n {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn determinant(rows: &[Vec<Rat>]) -> Rat {
    let n = rows.len();
    let mut m = rows.to_vec();
    let mut det = Rat::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&i| !m[i][col].is_zero()) else {
            return Rat::zero();
        };
        if p != col {
            m.swap(p, col);
            det = -det;
        }
        det *= m[col][col].clone();
        for i in col + 1..n {
            if !m[i][col].is_zero() {
                let f = &m[i][col] / &m[col][col];
                for j in col..n {
                    let d = &f * &m[col][j];
                    m[i][j] -= d;
                }
            }
        }
    }
    det
}

pub fn gcd_slice(v: &[i64]) -> i64 {
    v.iter().fold(0i64, |g, &x| g.gcd(&x))
}

/// Divide out the content of a nonzero integer vector.
pub fn primitive(v: &[i64]) -> Vec<i64> {
    let g = gcd_slice(v);
    if g == 0 {
        return v.to_vec();
    }
    v.iter().map(|x| x / g).collect()
}

/// Positive rescaling of a nonzero rational vector to a primitive integer
/// vector. Returns `None` if the result does not fit in `i64`.
pub fn primitive_from_rational(v: &[Rat]) -> Option<Vec<i64>> {
    let (ints, _) = clear_denominators(v);
    let g = ints.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if g.is_zero() {
        return ints.iter().map(|x| x.to_i64()).collect();
    }
    ints.iter().map(|x| (x / &g).to_i64()).collect()
}

/// Multiply by the lcm of denominators; returns the integer vector and the
/// positive factor used.
pub fn clear_denominators(v: &[Rat]) -> (Vec<BigInt>, BigInt) {
    let l = v.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
    let ints = v.iter().map(|x| (x * &l).to_integer()).collect();
    (ints, l)
}

/// Row-style Hermite normal form of a family of integer row vectors: pivots
/// positive, entries above each pivot reduced into `[0, pivot)`, zero rows
/// dropped.
pub fn hermite_normal_form(mut rows: Vec<Vec<i128>>) -> Vec<Vec<i128>> {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    for col in 0..ncols {
        if r == rows.len() {
            break;
        }
        loop {
            let Some(p) = (r..rows.len())
                .filter(|&i| rows[i][col] != 0)
                .min_by_key(|&i| rows[i][col].abs())
            else {
                break;
            };
            rows.swap(r, p);
            let mut done = true;
            for i in r + 1..rows.len() {
                if rows[i][col] != 0 {
                    let q = Integer::div_floor(&rows[i][col], &rows[r][col]);
                    for j in 0..ncols {
                        rows[i][j] -= q * rows[r][j];
                    }
                    if rows[i][col] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if rows[r][col] == 0 {
            continue;
        }
        if rows[r][col] < 0 {
            for x in rows[r].iter_mut() {
                *x = -*x;
            }
        }
        for i in 0..r {
            let q = Integer::div_floor(&rows[i][col], &rows[r][col]);
            if q != 0 {
                for j in 0..ncols {
                    rows[i][j] -= q * rows[r][j];
                }
            }
        }
        r += 1;
    }
    rows.retain(|row| row.iter().any(|&x| x != 0));
    rows
}

/// Canonical (Hermite-reduced) basis of the integer kernel
/// `{w in Z^n : <v, w> = 0}`.
pub fn integer_kernel_basis(v: &[i64]) -> Vec<Vec<i64>> {
    let n = v.len();
    let mut r: Vec<i128> = v.iter().map(|&x| x as i128).collect();
    // columns of a unimodular matrix, stored as vectors
    let mut cols: Vec<Vec<i128>> = (0..n)
        .map(|j| (0..n).map(|i| i128::from(i == j)).collect())
        .collect();
    let basis: Vec<Vec<i128>> = loop {
        let Some(p) = (0..n).filter(|&i| r[i] != 0).min_by_key(|&i| r[i].abs()) else {
            break cols.clone();
        };
        let mut finished = true;
        for j in 0..n {
            if j != p && r[j] != 0 {
                let q = Integer::div_floor(&r[j], &r[p]);
                r[j] -= q * r[p];
                let cp = cols[p].clone();
                for (x, y) in cols[j].iter_mut().zip(&cp) {
                    *x -= q * y;
                }
                if r[j] != 0 {
                    finished = false;
                }
            }
        }
        if finished {
            break (0..n).filter(|&j| j != p).map(|j| cols[j].clone()).collect();
        }
    };
    if basis.is_empty() {
        return Vec::new();
    }
    hermite_normal_form(basis)
        .into_iter()
        .map(|row| row.into_iter().map(|x| x as i64).collect())
        .collect()
}

/// Integer `floor` and `ceil` of a rational.
pub fn floor_i64(x: &Rat) -> Option<i64> {
    x.floor().to_integer().to_i64()
}

pub fn ceil_i64(x: &Rat) -> Option<i64> {
    x.ceil().to_integer().to_i64()
}

pub fn is_integral(x: &Rat) -> bool {
    x.is_integer()
}

pub fn abs_rat(x: &Rat) -> Rat {
    x.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(rows: &[&[i64]]) -> Vec<Vec<Rat>> {
        rows.iter().map(|row| rat_vec(row)).collect()
    }

    #[test]
    fn solve_and_inverse() {
        let m = r(&[&[2, 1], &[1, 1]]);
        let x = solve_square(&m, &rat_vec(&[3, 2])).unwrap();
        assert_eq!(x, rat_vec(&[1, 1]));
        let inv = inverse(&m).unwrap();
        assert_eq!(inv, r(&[&[1, -1], &[-1, 2]]));
        assert!(solve_square(&r(&[&[1, 2], &[2, 4]]), &rat_vec(&[1, 2])).is_none());
    }

    #[test]
    fn determinant_of_edge_matrix() {
        assert_eq!(determinant(&r(&[&[-1, 0], &[-1, 2]])), rat(-2));
        assert_eq!(determinant(&[]), rat(1));
    }

    #[test]
    fn nullspace_dimension() {
        let ns = nullspace(&r(&[&[1, 1, 0]]), 3);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(dot_rat(&rat_vec(&[1, 1, 0]), v).is_zero());
        }
    }

    #[test]
    fn kernel_basis_is_hermite_reduced() {
        assert_eq!(integer_kernel_basis(&[1, 0]), vec![vec![0, 1]]);
        assert_eq!(integer_kernel_basis(&[1, 2]), vec![vec![2, -1]]);
        assert_eq!(integer_kernel_basis(&[1]), Vec::<Vec<i64>>::new());
        assert_eq!(integer_kernel_basis(&[1, 0, 0]), vec![vec![0, 1, 0], vec![0, 0, 1]]);
        let k = integer_kernel_basis(&[3, 5, 7]);
        assert_eq!(k.len(), 2);
        for w in &k {
            assert_eq!(dot_int(&[3, 5, 7], w), 0);
        }
    }

    #[test]
    fn primitive_scaling() {
        let v = vec![Rat::new(1.into(), 2.into()), Rat::new(3.into(), 4.into())];
        assert_eq!(primitive_from_rational(&v).unwrap(), vec![2, 3]);
        assert_eq!(primitive(&[4, -6]), vec![2, -3]);
    }
}
