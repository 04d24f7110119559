//! Centered discrete Fourier transforms in the unitary convention
//! `ǧ(x) = (2π)^{-d/2} ∫ e^{ixξ} g(ξ) dξ`, `ĝ(ξ) = (2π)^{-d/2} ∫ e^{-ixξ} u(x) dx`.
//!
//! With `ξ_j = (j - n/2)hξ`, `x_k = (k - n/2)hx` and `hξ·hx = 2π/n` the kernel
//! factors as `e^{ix_kξ_j} = (-1)^{n/2} (-1)^{j+k} e^{2πi jk/n}` per axis, so
//! each transform is one unnormalized FFT between two checkerboard sign flips.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::Result;
use crate::grid::{Field, GridSpec, Side};

type Plan = Arc<dyn Fft<f64>>;

fn plan(n: usize, inverse: bool) -> Plan {
    static CACHE: OnceLock<Mutex<(FftPlanner<f64>, HashMap<(usize, bool), Plan>)>> =
        OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new((FftPlanner::new(), HashMap::new())));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    let (planner, plans) = &mut *guard;
    plans
        .entry((n, inverse))
        .or_insert_with(|| {
            if inverse {
                planner.plan_fft_inverse(n)
            } else {
                planner.plan_fft_forward(n)
            }
        })
        .clone()
}

/// Which entries of a padded cube matter, for skipping all-zero or unread lines.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Prune {
    None,
    /// Input is zero outside `[lo, hi)ᵈ`.
    Input(usize, usize),
    /// Only outputs inside `[lo, hi)ᵈ` are read.
    Output(usize, usize),
}

#[cfg(test)]
/// Unnormalized d-dimensional FFT of a row-major cube with side `n`.
pub(crate) fn fft_nd(data: &mut [Complex64], n: usize, d: usize, inverse: bool) {
    fft_nd_pruned(data, n, d, inverse, Prune::None);
}

/// Columns `j` of an axis pass whose inner multi-index (the axes after the
/// current one) lies in `[lo, hi)` on every axis.
fn active_columns(n: usize, inner_axes: usize, lo: usize, hi: usize) -> Vec<usize> {
    let count = n.pow(inner_axes as u32);
    (0..count)
        .filter(|&j| {
            let mut rest = j;
            (0..inner_axes).all(|_| {
                let i = rest % n;
                rest /= n;
                (lo..hi).contains(&i)
            })
        })
        .collect()
}

/// Unnormalized d-dimensional FFT, skipping lines that are zero on input
/// or never read on output. Axes run first to last for input pruning and
/// last to first for output pruning, so in both cases the skipped lines are
/// those whose inner indices fall outside the active block.
pub(crate) fn fft_nd_pruned(data: &mut [Complex64], n: usize, d: usize, inverse: bool, prune: Prune) {
    let fft = plan(n, inverse);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let (order, range): (Vec<usize>, Option<(usize, usize)>) = match prune {
        Prune::None => ((0..d).collect(), None),
        Prune::Input(lo, hi) => ((0..d).collect(), Some((lo, hi))),
        Prune::Output(lo, hi) => ((0..d).rev().collect(), Some((lo, hi))),
    };
    for axis in order {
        let stride = n.pow((d - 1 - axis) as u32);
        if stride == 1 {
            fft.process_with_scratch(data, &mut scratch);
            continue;
        }
        let cols: Vec<usize> = match range {
            Some((lo, hi)) => active_columns(n, d - 1 - axis, lo, hi),
            None => (0..stride).collect(),
        };
        // Each block is an n × stride matrix whose columns are the lines to
        // transform; gather the active columns so the lines are contiguous.
        let block = n * stride;
        let mut buf = vec![Complex64::new(0.0, 0.0); n * cols.len()];
        for chunk in data.chunks_mut(block) {
            for i in 0..n {
                let row = &chunk[i * stride..(i + 1) * stride];
                for (c, &j) in cols.iter().enumerate() {
                    buf[c * n + i] = row[j];
                }
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for i in 0..n {
                let row = &mut chunk[i * stride..(i + 1) * stride];
                for (c, &j) in cols.iter().enumerate() {
                    row[j] = buf[c * n + i];
                }
            }
        }
    }
}

/// Multiplies by `scale·(-1)^{Σ indices}`.
fn checkerboard(data: &mut [Complex64], n: usize, d: usize, scale: f64) {
    for (r, row) in data.chunks_mut(n).enumerate() {
        let parity = match d {
            1 => 0,
            2 => r,
            _ => r / n + r % n,
        };
        let mut s = if parity % 2 == 0 { scale } else { -scale };
        for v in row.iter_mut() {
            *v *= s;
            s = -s;
        }
    }
}

/// Transforms raw samples in place from `from` to the other side of `grid`.
pub(crate) fn transform_in_place(values: &mut [Complex64], grid: &GridSpec, from: Side) {
    transform_in_place_pruned(values, grid, from, Prune::None);
}

pub(crate) fn transform_in_place_pruned(
    values: &mut [Complex64],
    grid: &GridSpec,
    from: Side,
    prune: Prune,
) {
    let n = grid.n();
    let d = grid.dim();
    let h = grid.spacing(from);
    let mut scale = (h / (2.0 * PI).sqrt()).powi(d as i32);
    if (d * n / 2) % 2 == 1 {
        scale = -scale;
    }
    checkerboard(values, n, d, 1.0);
    fft_nd_pruned(values, n, d, from == Side::Frequency, prune);
    checkerboard(values, n, d, scale);
}

/// Discrete `ℱ⁻¹`: frequency samples to physical samples.
pub fn to_physical(g: &Field) -> Result<Field> {
    g.expect_side(Side::Frequency)?;
    let mut values = g.values().to_vec();
    transform_in_place(&mut values, g.grid(), Side::Frequency);
    Field::from_values(*g.grid(), Side::Physical, values)
}

/// Discrete `ℱ`: physical samples to frequency samples.
pub fn to_frequency(u: &Field) -> Result<Field> {
    u.expect_side(Side::Physical)?;
    let mut values = u.values().to_vec();
    transform_in_place(&mut values, u.grid(), Side::Physical);
    Field::from_values(*u.grid(), Side::Frequency, values)
}

/// Transform to whichever side `f` is not on.
pub fn to_dual(f: &Field) -> Result<Field> {
    match f.side() {
        Side::Frequency => to_physical(f),
        Side::Physical => to_frequency(f),
    }
}

/// Flat indices of a centered `n`-cube inside a centered `m`-cube (`m ≥ n`,
/// both even) whose nodes share coordinates.
pub(crate) fn centered_embedding(n: usize, m: usize, d: usize) -> Vec<usize> {
    let off = (m - n) / 2;
    let len = n.pow(d as u32);
    (0..len)
        .map(|f| {
            let mut rest = f;
            let mut idx = [0usize; 3];
            for a in (0..d).rev() {
                idx[a] = rest % n + off;
                rest /= n;
            }
            idx[..d].iter().fold(0, |acc, &i| acc * m + i)
        })
        .collect()
}

/// Trigonometric interpolation of a frequency field onto a grid refined by
/// `factor` in frequency (same half width, `factor·n` points), computed by
/// zero-padding on the physical side.
pub fn refine_frequency(g: &Field, factor: usize) -> Result<Field> {
    g.expect_side(Side::Frequency)?;
    let grid = g.grid();
    let fine = GridSpec::new(grid.dim(), grid.n() * factor, grid.half_width())?;
    let mut phys = g.values().to_vec();
    transform_in_place(&mut phys, grid, Side::Frequency);
    // The unpaired boundary plane has no symmetric partner once embedded.
    for (k, v) in phys.iter_mut().enumerate() {
        if grid.on_nyquist_plane(k) {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    let map = centered_embedding(grid.n(), fine.n(), grid.dim());
    let mut big = vec![Complex64::new(0.0, 0.0); fine.len()];
    for (c, &f) in map.iter().enumerate() {
        big[f] = phys[c];
    }
    transform_in_place(&mut big, &fine, Side::Physical);
    Field::from_values(fine, Side::Frequency, big)
}
