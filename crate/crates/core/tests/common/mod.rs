#![allow(dead_code, clippy::needless_range_loop)]

use arx_evolve::data::{TimeSeriesTable, INPUT_COUNT, OUTPUT_COUNT};
use arx_evolve::ArxModel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Solves the normal equations `X'X beta = X'y` by Gaussian elimination
/// with partial pivoting, working on plain row vectors.
pub fn normal_equations(rows: &[Vec<f64>], target: &[f64]) -> Vec<f64> {
    let n = rows[0].len();
    let mut m = vec![vec![0.0; n + 1]; n];
    for (row, &t) in rows.iter().zip(target) {
        for i in 0..n {
            for j in 0..n {
                m[i][j] += row[i] * row[j];
            }
            m[i][n] += row[i] * t;
        }
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        m.swap(col, pivot);
        for r in col + 1..n {
            let factor = m[r][col] / m[col][col];
            for c in col..=n {
                m[r][c] -= factor * m[col][c];
            }
        }
    }
    let mut beta = vec![0.0; n];
    for i in (0..n).rev() {
        let mut acc = m[i][n];
        for j in i + 1..n {
            acc -= m[i][j] * beta[j];
        }
        beta[i] = acc / m[i][i];
    }
    beta
}

/// Regression rows built directly from the difference equation, without
/// going through the library's design-matrix builder.
pub fn brute_force_rows(
    table: &TimeSeriesTable,
    na: usize,
    nb: usize,
    nk: usize,
    inputs: usize,
) -> (Vec<Vec<f64>>, Vec<f64>) {
    let lag = na.max(nb + nk);
    let mut rows = Vec::new();
    let mut target = Vec::new();
    for t in lag..table.len() {
        let mut row = Vec::new();
        for j in 1..=na {
            row.push(-table.outputs(t - j)[0]);
        }
        for i in 0..inputs {
            for k in 1..=nb {
                row.push(table.inputs(t - nk - k)[i]);
            }
        }
        rows.push(row);
        target.push(table.outputs(t)[0]);
    }
    (rows, target)
}

/// Stable `A(q)` coefficients from real roots with magnitude below 0.8.
pub fn stable_a<R: Rng>(na: usize, rng: &mut R) -> Vec<f64> {
    // (1 - r1 q^-1)(1 - r2 q^-1)... expanded; poly[0] = 1
    let mut poly = vec![1.0];
    for _ in 0..na {
        let r: f64 = rng.random_range(-0.8..0.8);
        let mut next = vec![0.0; poly.len() + 1];
        for (i, c) in poly.iter().enumerate() {
            next[i] += c;
            next[i + 1] -= r * c;
        }
        poly = next;
    }
    poly[1..].to_vec()
}

pub fn random_siso_model<R: Rng>(na: usize, nb: usize, nk: usize, rng: &mut R) -> ArxModel {
    let a = stable_a(na, rng);
    let b = (0..nb).map(|_| rng.random_range(-1.0..1.0)).collect();
    ArxModel::siso(a, b, nk).unwrap()
}

pub fn white_input(rows: usize, width: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..rows)
        .map(|_| (0..width).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect()
}

pub fn random_table(rows: usize, seed: u64) -> TimeSeriesTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inputs = Vec::new();
    let mut outputs = Vec::new();
    for _ in 0..rows {
        let mut u = [0.0; INPUT_COUNT];
        u.iter_mut()
            .for_each(|v| *v = rng.random_range(-100.0..100.0));
        let mut y = [0.0; OUTPUT_COUNT];
        y.iter_mut()
            .for_each(|v| *v = rng.random_range(-100.0..100.0));
        inputs.push(u);
        outputs.push(y);
    }
    TimeSeriesTable::new(
        (0..rows as i32).map(|k| 1900 + k).collect(),
        inputs,
        outputs,
    )
    .unwrap()
}
