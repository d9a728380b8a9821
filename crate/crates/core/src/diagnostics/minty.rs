use std::fmt::Write as _;

use crate::error::{invalid, Error, Result};
use crate::operators::OperatorProblem;
use crate::vecops::{dot, norm_sq, sub};

use super::fmt_real;

/// Magnitudes of `<F(u), u - u*>` below this are reported as sign 0.
pub const SIGN_ZERO_TOL: f64 = 1e-12;

/// `<F(u), u - u*> + rho/2 ||F(u)||^2`; nonnegative wherever the weak Minty
/// condition holds with the stored `rho`.
pub fn weak_minty_residual(op: &OperatorProblem, u: &[f64]) -> Result<f64> {
    let solution = op.require_solution()?;
    let rho = op.require_rho()?;
    op.check_dim(u)?;
    let f = op.eval(u);
    Ok(dot(&f, &sub(u, solution)) + 0.5 * rho * norm_sq(&f))
}

/// Signs of `<F(u), u - u*>` on a rectangular grid over a 2-D operator.
#[derive(Debug, Clone, PartialEq)]
pub struct SignGrid {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub nx: usize,
    pub ny: usize,
    /// Row-major in `y`: entry `iy * nx + ix`.
    pub values: Vec<i8>,
}

impl SignGrid {
    pub fn x_at(&self, ix: usize) -> f64 {
        grid_coord(self.x_range, self.nx, ix)
    }

    pub fn y_at(&self, iy: usize) -> f64 {
        grid_coord(self.y_range, self.ny, iy)
    }

    pub fn get(&self, ix: usize, iy: usize) -> i8 {
        self.values[iy * self.nx + ix]
    }

    /// Iterator over `(x, y, sign)`.
    pub fn cells(&self) -> impl Iterator<Item = (f64, f64, i8)> + '_ {
        (0..self.ny).flat_map(move |iy| {
            (0..self.nx).map(move |ix| (self.x_at(ix), self.y_at(iy), self.get(ix, iy)))
        })
    }

    pub fn count(&self, sign: i8) -> usize {
        self.values.iter().filter(|v| **v == sign).count()
    }

    /// `x,y,sign`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,sign\n");
        for (x, y, s) in self.cells() {
            let _ = writeln!(out, "{},{},{}", fmt_real(x), fmt_real(y), s);
        }
        out
    }
}

fn grid_coord((lo, hi): (f64, f64), n: usize, i: usize) -> f64 {
    if n == 1 {
        lo
    } else {
        lo + (hi - lo) * i as f64 / (n - 1) as f64
    }
}

pub fn sign_grid(
    op: &OperatorProblem,
    x_range: (f64, f64),
    y_range: (f64, f64),
    resolution: (usize, usize),
) -> Result<SignGrid> {
    let solution = op.require_solution()?;
    if op.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: op.dim(),
        });
    }
    let (nx, ny) = resolution;
    if nx == 0 || ny == 0 {
        return Err(invalid("resolution", "must be at least 1x1"));
    }
    for (lo, hi) in [x_range, y_range] {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(invalid("range", "need finite lo <= hi"));
        }
    }
    let mut values = Vec::with_capacity(nx * ny);
    for iy in 0..ny {
        let y = grid_coord(y_range, ny, iy);
        for ix in 0..nx {
            let u = [grid_coord(x_range, nx, ix), y];
            let v = dot(&op.eval(&u), &sub(&u, solution));
            values.push(if v.abs() < SIGN_ZERO_TOL {
                0
            } else if v > 0.0 {
                1
            } else {
                -1
            });
        }
    }
    Ok(SignGrid {
        x_range,
        y_range,
        nx,
        ny,
        values,
    })
}
