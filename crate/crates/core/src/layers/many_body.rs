//! Many-body product layer: grade-resolved quadratic interactions of a
//! channel with itself, plus a linear residual.
//!
//! With `X = A_x(a)` and `Y = A_y(a)`,
//!
//!   O_n = sum_ijk [ W_nijk <<X_n>_j <Y_n>_k>_i
//!                 + V_nijk <<X_n>_j v <Y_n>_k>_i ] + Y_n
//!
//! where grades run over 0..=4 and the products are taken channelwise.

use rand::Rng;

use crate::pga::blade::{BLADE_COUNT, GRADE, JOIN, GEOMETRIC};
use crate::pga::Multivector;
use crate::tensor::Tensor;

use super::{EquiLinear, LayerError};

#[derive(Clone, Debug, PartialEq)]
pub struct ManyBodyProduct {
    pub lin_x: EquiLinear,
    pub lin_y: EquiLinear,
    /// Geometric-product weights, shape `[channels, 5, 5, 5]` over
    /// (output grade i, left grade j, right grade k).
    pub w: Tensor,
    /// Join weights, same shape.
    pub w_join: Tensor,
}

impl ManyBodyProduct {
    pub fn new(channels: usize, rng: &mut impl Rng) -> Self {
        // quadratic terms start small so the residual dominates at init
        let scale = 1.0 / (125.0f64).sqrt();
        ManyBodyProduct {
            lin_x: EquiLinear::new(channels, channels, rng),
            lin_y: EquiLinear::new(channels, channels, rng),
            w: Tensor::uniform(&[channels, 5, 5, 5], scale, rng),
            w_join: Tensor::uniform(&[channels, 5, 5, 5], scale, rng),
        }
    }

    pub fn channels(&self) -> usize {
        self.lin_x.in_channels()
    }

    pub fn parameter_count(&self) -> usize {
        self.lin_x.parameter_count()
            + self.lin_y.parameter_count()
            + self.w.len()
            + self.w_join.len()
    }

    pub fn forward(&self, a: &[Multivector]) -> Result<Vec<Multivector>, LayerError> {
        self.forward_batch(a, 1)
    }

    /// Batched forward over `rows` channel groups.
    pub fn forward_batch(
        &self,
        a: &[Multivector],
        rows: usize,
    ) -> Result<Vec<Multivector>, LayerError> {
        let c = self.channels();
        let x = self.lin_x.forward_batch(a, rows)?;
        let y = self.lin_y.forward_batch(a, rows)?;
        let mut out = Vec::with_capacity(rows * c);
        for r in 0..rows {
            for n in 0..c {
                let xn = &x[r * c + n];
                let yn = &y[r * c + n];
                let mut o = contract_products(xn, yn, &self.w, &self.w_join, n);
                o += *yn;
                out.push(o);
            }
        }
        Ok(out)
    }
}

/// Accumulate `sum_ijk w[n,i,j,k] <<x>_j <y>_k>_i` for both product tables.
/// One pass over all basis-blade pairs covers every (j, k) grade pair; the
/// output grade i is the grade of the produced blade.
fn contract_products(
    x: &Multivector,
    y: &Multivector,
    w_geo: &Tensor,
    w_join: &Tensor,
    n: usize,
) -> Multivector {
    let mut out = Multivector::ZERO;
    for bi in 0..BLADE_COUNT {
        let xv = x[bi];
        if xv == 0.0 {
            continue;
        }
        let gj = GRADE[bi];
        for bj in 0..BLADE_COUNT {
            let yv = y[bj];
            if yv == 0.0 {
                continue;
            }
            let gk = GRADE[bj];
            let term = xv * yv;
            let ge = GEOMETRIC[bi][bj];
            if ge.sign != 0 {
                let gi = GRADE[ge.target];
                out[ge.target] += w_geo.at4(n, gi, gj, gk) * ge.sign as f64 * term;
            }
            let je = JOIN[bi][bj];
            if je.sign != 0 {
                let gi = GRADE[je.target];
                out[je.target] += w_join.at4(n, gi, gj, gk) * je.sign as f64 * term;
            }
        }
    }
    out
}
