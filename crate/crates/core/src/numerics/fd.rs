//! Second-order finite-difference stencils along one axis of a [`Field`].
//!
//! Interior nodes use central stencils; the first and last
//! [`boundary_width`] nodes of each line use one-sided stencils of the same
//! order. A result node is excluded when any node of its stencil is.

use serde::{Deserialize, Serialize};

use super::{Field, NumericsError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    T,
}

impl Axis {
    pub fn from_index(i: usize) -> Result<Axis, NumericsError> {
        match i {
            0 => Ok(Axis::X),
            1 => Ok(Axis::T),
            _ => Err(NumericsError::InvalidAxis(i)),
        }
    }
}

/// Number of nodes at each end of a line that use one-sided stencils.
pub fn boundary_width(order: u8) -> usize {
    if order == 3 {
        2
    } else {
        1
    }
}

// (offset list, weights) for one node; the derivative is Σ w f / h^order.
type Stencil = (&'static [isize], &'static [f64]);

const D1_CENTRAL: Stencil = (&[-1, 1], &[-0.5, 0.5]);
const D1_FORWARD: Stencil = (&[0, 1, 2], &[-1.5, 2.0, -0.5]);
const D2_CENTRAL: Stencil = (&[-1, 0, 1], &[1.0, -2.0, 1.0]);
const D2_FORWARD: Stencil = (&[0, 1, 2, 3], &[2.0, -5.0, 4.0, -1.0]);
const D3_CENTRAL: Stencil = (&[-2, -1, 1, 2], &[-0.5, 1.0, -1.0, 0.5]);
const D3_FORWARD: Stencil = (&[0, 1, 2, 3, 4], &[-2.5, 9.0, -12.0, 7.0, -1.5]);

fn stencil_at(order: u8, i: usize, n: usize) -> (Stencil, isize, f64) {
    let (central, forward) = match order {
        1 => (D1_CENTRAL, D1_FORWARD),
        2 => (D2_CENTRAL, D2_FORWARD),
        _ => (D3_CENTRAL, D3_FORWARD),
    };
    let w = boundary_width(order);
    if i < w {
        (forward, 0, 1.0)
    } else if i + w >= n {
        // Mirror the forward stencil; odd derivatives flip sign.
        let sign = if order % 2 == 1 { -1.0 } else { 1.0 };
        (forward, -1, sign)
    } else {
        (central, 1, 1.0)
    }
}

/// Derivative of a 1-D line of samples with spacing `h`.
pub fn derivative_line(values: &[f64], mask: &[bool], h: f64, order: u8) -> (Vec<f64>, Vec<bool>) {
    let n = values.len();
    let scale = h.powi(order as i32);
    let mut out = vec![0.0; n];
    let mut excl = vec![false; n];
    for i in 0..n {
        let ((offsets, weights), dir, sign) = stencil_at(order, i, n);
        let mut acc = 0.0;
        let mut bad = false;
        for (o, w) in offsets.iter().zip(weights.iter()) {
            let k = if dir == 0 { i as isize + o } else { i as isize + dir * o };
            let k = k as usize;
            bad |= mask[k];
            acc += w * values[k];
        }
        out[i] = sign * acc / scale;
        excl[i] = bad || !out[i].is_finite();
    }
    (out, excl)
}

pub fn fd_derivative(field: &Field, axis: Axis, order: u8) -> Result<Field, NumericsError> {
    if !(1..=3).contains(&order) {
        return Err(NumericsError::InvalidOrder(order));
    }
    let g = field.grid;
    let mut out = Field::zeros(g);
    match axis {
        Axis::X => {
            for j in 0..g.nt {
                let r = g.index(0, j)..g.index(0, j) + g.nx;
                let (v, m) = derivative_line(&field.values[r.clone()], &field.excluded[r.clone()], g.dx(), order);
                out.values[r.clone()].copy_from_slice(&v);
                out.excluded[r].copy_from_slice(&m);
            }
        }
        Axis::T => {
            for i in 0..g.nx {
                let vals: Vec<f64> = (0..g.nt).map(|j| field.get(i, j)).collect();
                let mask: Vec<bool> = (0..g.nt).map(|j| field.is_excluded(i, j)).collect();
                let (v, m) = derivative_line(&vals, &mask, g.dt(), order);
                for j in 0..g.nt {
                    let k = g.index(i, j);
                    out.values[k] = v[j];
                    out.excluded[k] = m[j];
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Grid;

    fn grid(n: usize) -> Grid {
        Grid::new((0.0, 2.0), n, (0.0, 1.0), n).unwrap()
    }

    #[test]
    fn derivative_of_square() {
        let g = grid(21);
        let f = Field::tabulate(g, |x, _| Ok::<_, ()>(x * x));
        let d = fd_derivative(&f, Axis::X, 1).unwrap();
        for i in 0..g.nx {
            assert!((d.get(i, 3) - 2.0 * g.x(i)).abs() < 1e-10);
        }
    }

    #[test]
    fn third_derivative_of_cubic_is_exact() {
        let g = grid(17);
        let f = Field::tabulate(g, |x, _| Ok::<_, ()>(x * x * x - x));
        let d = fd_derivative(&f, Axis::X, 3).unwrap();
        for i in 0..g.nx {
            assert!((d.get(i, 0) - 6.0).abs() < 1e-8, "i = {i}: {}", d.get(i, 0));
        }
    }

    #[test]
    fn time_derivative_of_sine() {
        let g = Grid::new((0.0, 1.0), 8, (0.0, 1.0), 101).unwrap();
        let f = Field::tabulate(g, |_, t| Ok::<_, ()>(t.sin()));
        let d = fd_derivative(&f, Axis::T, 1).unwrap();
        assert!((d.get(2, 0) - 1.0).abs() < g.dt().powi(2));
    }

    #[test]
    fn observed_order_is_two() {
        for order in 1..=3u8 {
            let err = |n: usize| {
                let g = Grid::new((0.1, 1.1), n, (0.0, 1.0), 8).unwrap();
                let f = Field::tabulate(g, |x, _| Ok::<_, ()>(x.sin() + x.exp()));
                let d = fd_derivative(&f, Axis::X, order).unwrap();
                (0..g.nx)
                    .map(|i| {
                        let x = g.x(i);
                        let exact = match order {
                            1 => x.cos() + x.exp(),
                            2 => -x.sin() + x.exp(),
                            _ => -x.cos() + x.exp(),
                        };
                        (d.get(i, 0) - exact).abs()
                    })
                    .fold(0.0, f64::max)
            };
            let p = (err(41) / err(81)).log2();
            assert!(p >= 1.9, "order {order}: observed {p}");
        }
    }

    #[test]
    fn exclusion_spreads_through_stencil() {
        let g = grid(11);
        let mut f = Field::tabulate(g, |x, _| Ok::<_, ()>(x));
        let k = g.index(5, 0);
        f.excluded[k] = true;
        let d = fd_derivative(&f, Axis::X, 1).unwrap();
        assert!(d.is_excluded(4, 0) && d.is_excluded(6, 0) && !d.is_excluded(5, 0));
        assert!(fd_derivative(&f, Axis::X, 4).is_err());
        assert!(Axis::from_index(2).is_err());
    }
}
