//! Discrete symmetric decreasing rearrangement.

use num_complex::Complex64;

use super::engine::Triple;
use crate::spectral::{Field, FieldKind};

/// Sorts `|f|` in decreasing order and lays the values out around the node
/// at `x = 0`: largest at the center, then alternating right and left.
///
/// The output is a permutation of `|f|`, so every discrete `L^p` norm is
/// preserved exactly.
pub fn rearrange(f: &Field) -> Field {
    let grid = f.grid();
    let n = grid.points();
    let mut mags: Vec<f64> = f.values().iter().map(|c| c.norm()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let center = grid.center_index();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (rank, value) in mags.into_iter().enumerate() {
        let offset = (rank + 1) / 2;
        let idx = if rank % 2 == 1 {
            (center + offset) % n
        } else {
            (center + n - offset) % n
        };
        out[idx] = Complex64::new(value, 0.0);
    }
    Field::from_values(grid, out, FieldKind::Real).expect("same length")
}

/// Rearranges all three components, keeping envelope components complex-typed.
pub fn symmetrize(x: &Triple) -> Triple {
    let keep_kind = |f: &Field| {
        let r = rearrange(f);
        match f.kind() {
            FieldKind::Complex => r.as_complex(),
            FieldKind::Real => r,
        }
    };
    [keep_kind(&x[0]), keep_kind(&x[1]), keep_kind(&x[2])]
}
