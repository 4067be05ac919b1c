//! Gaussian elimination over prime fields GF(p), with a bit-packed path for
//! GF(2). Matrices are row-major residue vectors.

/// Multiplicative inverses mod `p`; entry 0 is unused.
pub fn inverse_table(p: u32) -> Vec<u32> {
    (0..p)
        .map(|a| if a == 0 { 0 } else { pow_mod(a, p - 2, p) })
        .collect()
}

pub fn pow_mod(base: u32, mut e: u32, p: u32) -> u32 {
    let p = p as u64;
    let mut acc = 1 % p;
    let mut b = base as u64 % p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc as u32
}

/// Reduces `m` (rows × cols) in place to reduced row echelon form, pivoting
/// only in the first `pivot_cols` columns, and returns the rank found there.
pub fn row_reduce(
    p: u32,
    rows: usize,
    cols: usize,
    pivot_cols: usize,
    m: &mut [u8],
    inv: &[u32],
) -> usize {
    let mut rank = 0;
    for col in 0..pivot_cols {
        if rank == rows {
            break;
        }
        let Some(pivot) = (rank..rows).find(|&r| m[r * cols + col] != 0) else {
            continue;
        };
        if pivot != rank {
            for c in 0..cols {
                m.swap(pivot * cols + c, rank * cols + c);
            }
        }
        let scale = inv[m[rank * cols + col] as usize];
        for c in col..cols {
            m[rank * cols + c] = (m[rank * cols + c] as u32 * scale % p) as u8;
        }
        for r in 0..rows {
            let factor = m[r * cols + col] as u32;
            if r == rank || factor == 0 {
                continue;
            }
            for c in col..cols {
                let sub = factor * m[rank * cols + c] as u32 % p;
                m[r * cols + c] = ((m[r * cols + c] as u32 + p - sub) % p) as u8;
            }
        }
        rank += 1;
    }
    rank
}

pub fn rank_mod_p(p: u32, rows: usize, cols: usize, m: &[u8]) -> usize {
    let mut work = m.to_vec();
    row_reduce(p, rows, cols, cols, &mut work, &inverse_table(p))
}

/// Solves `A x = b` for square `A` (n × n). `None` when `A` is singular.
pub fn solve_mod_p(p: u32, n: usize, a: &[u8], b: &[u8], inv: &[u32]) -> Option<Vec<u8>> {
    let cols = n + 1;
    let mut m = vec![0u8; n * cols];
    for r in 0..n {
        m[r * cols..r * cols + n].copy_from_slice(&a[r * n..(r + 1) * n]);
        m[r * cols + n] = b[r];
    }
    let rank = row_reduce(p, n, cols, n, &mut m, inv);
    (rank == n).then(|| (0..n).map(|r| m[r * cols + n]).collect())
}

/// GF(2) solve with rows packed into `u128`: bit `j < n` is column `j`, bit
/// `n` is the right-hand side. Requires `n < 128`.
pub fn solve_gf2(n: usize, rows: &mut [u128]) -> Option<u128> {
    debug_assert!(n < 128 && rows.len() == n);
    for col in 0..n {
        let bit = 1u128 << col;
        let pivot = (col..n).find(|&r| rows[r] & bit != 0)?;
        rows.swap(col, pivot);
        let pivot_row = rows[col];
        for (r, row) in rows.iter_mut().enumerate() {
            if r != col && *row & bit != 0 {
                *row ^= pivot_row;
            }
        }
    }
    let rhs = 1u128 << n;
    Some((0..n).fold(0u128, |acc, r| {
        if rows[r] & rhs != 0 {
            acc | (1 << r)
        } else {
            acc
        }
    }))
}
