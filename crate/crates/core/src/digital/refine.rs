//! Combining the analog estimate with a decoded quantization cell.

use super::quantizer::QuantizerSpec;
use crate::analog::Ieo;

/// Refined coefficients for all `n` indices.
///
/// With a verified frame, each coefficient whose analog posterior variance is
/// below the cell's uniform variance `step^2 / 12` keeps its analog estimate
/// projected onto the decoded cell; where the analog belief is coarser than
/// the cell (including analog-discarded coefficients) the cell midpoint is
/// used. Without a verified frame the analog estimates pass unchanged.
pub fn refine(ieo: &Ieo, cells: Option<&[usize]>, spec: &QuantizerSpec) -> Vec<f64> {
    let Some(cells) = cells else {
        return ieo.est.clone();
    };
    assert_eq!(cells.len(), ieo.est.len());
    let top = spec.levels() - 1;
    cells
        .iter()
        .enumerate()
        .map(|(i, &j)| {
            let step = spec.step(i);
            if ieo.err_var[i] <= step * step / 12.0 {
                let (lo, hi) = spec.cell_bounds(i, j);
                let lo = if j == 0 { f64::NEG_INFINITY } else { lo };
                let hi = if j == top { f64::INFINITY } else { hi };
                ieo.est[i].clamp(lo, hi)
            } else {
                spec.midpoint(i, j)
            }
        })
        .collect()
}
