//! Exhaustive grid oracle for qubit convex roofs.

use std::f64::consts::{FRAC_PI_2, TAU};

use rayon::prelude::*;

use super::Support;
use crate::error::{Error, Result};
use crate::measures::r_pure;
use crate::state::{binary_entropy, DensityMatrix, PureState, C64};

/// Grid minimum of the two-member ensemble average over mixing unitaries
///
/// ```text
/// U = [[ cos t e^{i phi},  sin t e^{i chi}],
///      [-sin t e^{-i chi}, cos t e^{-i phi}]]
/// ```
///
/// applied to the eigen-decomposition, with `t` on `grid_n + 1` points of
/// `[0, pi/2]` and `phi`, `chi` on `grid_n` points of `[0, 2 pi)`. Grids for
/// `n` and `2n` are nested, so the result is non-increasing under doubling.
pub fn brute_force_roof_qubit(rho: &DensityMatrix, grid_n: usize) -> Result<f64> {
    if rho.dim() != 2 {
        return Err(Error::DimensionNot2(rho.dim()));
    }
    if grid_n == 0 {
        return Err(Error::InvalidInput("grid_n must be positive".into()));
    }
    let support = Support::of(rho);
    if support.rank() == 1 {
        let v = support.scaled.row(0).transpose();
        return Ok(r_pure(&PureState::normalized(v)?).value);
    }
    let s0 = [support.scaled[(0, 0)], support.scaled[(0, 1)]];
    let s1 = [support.scaled[(1, 0)], support.scaled[(1, 1)]];

    let phases: Vec<C64> = (0..grid_n).map(|b| C64::from_polar(1.0, TAU * b as f64 / grid_n as f64)).collect();
    let best = (0..=grid_n)
        .into_par_iter()
        .map(|a| {
            let t = FRAC_PI_2 * a as f64 / grid_n as f64;
            let (c, s) = (t.cos(), t.sin());
            let mut best = f64::INFINITY;
            for ephi in &phases {
                for echi in &phases {
                    let u00 = ephi * c;
                    let u01 = echi * s;
                    let u10 = -echi.conj() * s;
                    let u11 = ephi.conj() * c;
                    let v = member_average(u00, u01, &s0, &s1) + member_average(u10, u11, &s0, &s1);
                    best = best.min(v);
                }
            }
            best
        })
        .reduce(|| f64::INFINITY, f64::min);
    Ok(best)
}

/// `p H(|a_0|^2 / p)` for the member `u0 s0 + u1 s1`.
fn member_average(u0: C64, u1: C64, s0: &[C64; 2], s1: &[C64; 2]) -> f64 {
    let a0 = u0 * s0[0] + u1 * s1[0];
    let a1 = u0 * s0[1] + u1 * s1[1];
    let p = a0.norm_sqr() + a1.norm_sqr();
    if p <= 0.0 {
        return 0.0;
    }
    p * binary_entropy(a0.norm_sqr() / p)
}
