//! Tabulated solutions of `u''(y) = q(y) u(y)` with polynomial `q`.
//!
//! The table is built by Taylor-series stepping outwards from `y = 0`. Every
//! node keeps its local series, so evaluation between nodes expands around
//! the nearest node and is smooth to rounding level, which keeps finite
//! differences of tabulated functions clean.

use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::Expr;

const ORDER: usize = 32;
const MAX_STEP: f64 = 0.25;
const MIN_STEP: f64 = 1e-10;
const REL_TOL: f64 = 1e-17;

static NEXT_ID: AtomicUsize = AtomicUsize::new(1);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecfunError {
    #[error("step size underflow at y = {y}")]
    StepUnderflow { y: f64 },
    #[error("solution overflows at y = {y}")]
    Overflow { y: f64 },
    #[error("y = {y} outside tabulated range [{lo}, {hi}]")]
    OutOfRange { y: f64, lo: f64, hi: f64 },
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    /// `u(0) = 1, u'(0) = 0`.
    #[default]
    Even,
    /// `u(0) = 0, u'(0) = 1`.
    Odd,
}

impl Parity {
    pub fn initial(self) -> (f64, f64) {
        match self {
            Parity::Even => (1.0, 0.0),
            Parity::Odd => (0.0, 1.0),
        }
    }
}

/// `G'' = ± y^n G` on `range`, started from parity initial data at `y = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeberSpec {
    pub n: u32,
    pub sign: Sign,
    #[serde(default)]
    pub parity: Parity,
    pub range: (f64, f64),
}

impl WeberSpec {
    pub fn new(n: u32, sign: Sign, parity: Parity, range: (f64, f64)) -> Self {
        WeberSpec { n, sign, parity, range }
    }

    /// Polynomial coefficients of `q`, lowest degree first.
    pub fn coefficients(&self) -> Vec<f64> {
        let mut q = vec![0.0; self.n as usize + 1];
        q[self.n as usize] = self.sign.factor();
        q
    }
}

pub fn weber_solve(spec: &WeberSpec) -> Result<OdeTable, SpecfunError> {
    if spec.n < 1 {
        return Err(SpecfunError::InvalidSpec("n must be at least 1".into()));
    }
    OdeTable::solve(spec.coefficients(), spec.parity.initial(), spec.range)
}

#[derive(Clone, Debug)]
struct Patch {
    y: f64,
    series: Vec<f64>,
}

/// Dense solution of `u'' = q(y) u` on a closed interval containing 0.
#[derive(Debug)]
pub struct OdeTable {
    id: usize,
    q: Vec<f64>,
    lo: f64,
    hi: f64,
    patches: Vec<Patch>,
}

/// Taylor coefficients of `q` re-centred at `y0`.
fn shifted(q: &[f64], y0: f64) -> Vec<f64> {
    let mut p = q.to_vec();
    // Repeated synthetic division.
    let n = p.len();
    for i in 0..n {
        for j in (i..n - 1).rev() {
            p[j] += y0 * p[j + 1];
        }
    }
    p
}

fn local_series(q: &[f64], y0: f64, u: f64, du: f64) -> Vec<f64> {
    let p = shifted(q, y0);
    let mut c = vec![0.0; ORDER + 1];
    c[0] = u;
    c[1] = du;
    for k in 0..ORDER - 1 {
        let mut acc = 0.0;
        for (j, pj) in p.iter().enumerate().take(k + 1) {
            acc += pj * c[k - j];
        }
        c[k + 2] = acc / ((k + 2) as f64 * (k + 1) as f64);
    }
    c
}

/// Value, first and second derivative of the polynomial `c` at `s`.
fn horner(c: &[f64], s: f64) -> (f64, f64, f64) {
    let (mut v, mut d, mut dd) = (0.0, 0.0, 0.0);
    for ck in c.iter().rev() {
        dd = dd * s + 2.0 * d;
        d = d * s + v;
        v = v * s + ck;
    }
    (v, d, dd)
}

fn poly(q: &[f64], y: f64) -> f64 {
    q.iter().rev().fold(0.0, |acc, c| acc * y + c)
}

impl OdeTable {
    /// Integrate from `y = 0` with `(u(0), u'(0)) = initial` over `range`.
    pub fn solve(q: Vec<f64>, initial: (f64, f64), range: (f64, f64)) -> Result<Self, SpecfunError> {
        let (lo, hi) = range;
        if !(lo.is_finite() && hi.is_finite()) || lo > 0.0 || hi < 0.0 || lo >= hi {
            return Err(SpecfunError::InvalidSpec(format!(
                "range [{lo}, {hi}] must be finite and contain 0"
            )));
        }
        if q.is_empty() || q.iter().any(|c| !c.is_finite()) {
            return Err(SpecfunError::InvalidSpec("q must have finite coefficients".into()));
        }
        let right = Self::march(&q, initial, hi, 1.0)?;
        let left = Self::march(&q, initial, lo, -1.0)?;
        let mut patches: Vec<Patch> = left.into_iter().skip(1).rev().collect();
        patches.extend(right);
        Ok(OdeTable {
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
            q,
            lo,
            hi,
            patches,
        })
    }

    fn march(q: &[f64], initial: (f64, f64), end: f64, dir: f64) -> Result<Vec<Patch>, SpecfunError> {
        let mut y = 0.0;
        let (mut u, mut du) = initial;
        let mut out = vec![Patch {
            y,
            series: local_series(q, y, u, du),
        }];
        while dir * (end - y) > 0.0 {
            let c = &out.last().unwrap().series;
            let mut h = MAX_STEP.min(dir * (end - y));
            loop {
                let scale = c[0].abs() + c[1].abs() * h;
                let tail = c[ORDER - 1].abs() * h.powi(ORDER as i32 - 1) + c[ORDER].abs() * h.powi(ORDER as i32);
                if tail <= REL_TOL * scale || (scale == 0.0 && tail == 0.0) {
                    break;
                }
                h *= 0.5;
                if h < MIN_STEP {
                    return Err(SpecfunError::StepUnderflow { y });
                }
            }
            let (v, d, _) = horner(c, dir * h);
            u = v;
            du = d;
            y += dir * h;
            if dir * (end - y) < 1e-12 {
                y = end;
            }
            if !u.is_finite() || !du.is_finite() || u.abs() > 1e250 {
                return Err(SpecfunError::Overflow { y });
            }
            out.push(Patch {
                y,
                series: local_series(q, y, u, du),
            });
        }
        Ok(out)
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn range(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.q
    }

    /// `q(y)` as a numeric value.
    pub fn potential(&self, y: f64) -> f64 {
        poly(&self.q, y)
    }

    /// `q(arg)` as an expression.
    pub fn potential_expr(&self, arg: &Expr) -> Expr {
        let mut acc = Expr::zero();
        for c in self.q.iter().rev() {
            acc = acc * arg + *c;
        }
        acc
    }

    fn nearest(&self, y: f64) -> &Patch {
        let i = self.patches.partition_point(|p| p.y < y);
        if i == 0 {
            return &self.patches[0];
        }
        if i == self.patches.len() {
            return &self.patches[i - 1];
        }
        let (a, b) = (&self.patches[i - 1], &self.patches[i]);
        if y - a.y <= b.y - y {
            a
        } else {
            b
        }
    }

    /// `(u(y), u'(y))`.
    pub fn eval(&self, y: f64) -> Result<(f64, f64), SpecfunError> {
        if !(y >= self.lo && y <= self.hi) {
            return Err(SpecfunError::OutOfRange {
                y,
                lo: self.lo,
                hi: self.hi,
            });
        }
        let p = self.nearest(y);
        let (u, du, _) = horner(&p.series, y - p.y);
        Ok((u, du))
    }

    pub fn value(&self, y: f64) -> Result<f64, SpecfunError> {
        self.eval(y).map(|(u, _)| u)
    }

    /// Tabulation nodes.
    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        self.patches.iter().map(|p| p.y)
    }

    pub fn max_abs(&self) -> f64 {
        self.patches.iter().map(|p| p.series[0].abs()).fold(0.0, f64::max)
    }

    /// Largest `|u'' - q u|` over nodes and the midpoints between them,
    /// with `u''` taken from the local series, relative to `max |u|`.
    pub fn relative_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for w in self.patches.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            for &(patch, s) in &[(a, 0.0), (a, 0.5 * (b.y - a.y)), (b, -0.5 * (b.y - a.y))] {
                let (u, _, d2) = horner(&patch.series, s);
                worst = worst.max((d2 - self.potential(patch.y + s) * u).abs());
            }
            // Adjacent patches must agree where they meet.
            let mid = 0.5 * (b.y - a.y);
            let ua = horner(&a.series, mid).0;
            let ub = horner(&b.series, -mid).0;
            worst = worst.max((ua - ub).abs());
        }
        worst / self.max_abs().max(f64::MIN_POSITIVE)
    }

    /// Nodes with value and slope, for export.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("y,u,du\n");
        for p in &self.patches {
            s.push_str(&format!("{},{},{}\n", p.y, p.series[0], p.series[1]));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::airy;

    #[test]
    fn gaussian_is_the_even_solution() {
        let table = OdeTable::solve(vec![-0.5, 0.0, 0.25], (1.0, 0.0), (-4.0, 4.0)).unwrap();
        let mut y: f64 = -4.0;
        while y <= 4.0 {
            let want: f64 = (-y * y / 4.0_f64).exp();
            assert!((table.value(y).unwrap() - want).abs() < 1e-8, "y = {y}");
            y += 0.01;
        }
    }

    #[test]
    fn reproduces_airy_from_its_initial_data() {
        let (a0, d0) = airy(0.0);
        let table = OdeTable::solve(vec![0.0, 1.0], (a0, d0), (-5.0, 5.0)).unwrap();
        let mut y: f64 = -5.0;
        while y <= 5.0 {
            assert!((table.value(y).unwrap() - airy(y).0).abs() < 1e-8, "y = {y}");
            y += 0.05;
        }
    }

    #[test]
    fn wronskian_is_constant() {
        let range = (-6.0, 6.0);
        let even = weber_solve(&WeberSpec::new(1, Sign::Plus, Parity::Even, range)).unwrap();
        let odd = weber_solve(&WeberSpec::new(1, Sign::Plus, Parity::Odd, range)).unwrap();
        let mut y: f64 = -6.0;
        while y <= 6.0 {
            let (u, du) = even.eval(y).unwrap();
            let (v, dv) = odd.eval(y).unwrap();
            let w = u * dv - du * v;
            assert!((w - 1.0).abs() < 1e-8 * (1.0 + u.abs() * dv.abs()), "y = {y}, W = {w}");
            y += 0.1;
        }
    }

    #[test]
    fn even_solutions_are_symmetric_for_even_n() {
        let g = weber_solve(&WeberSpec::new(2, Sign::Minus, Parity::Even, (-5.0, 5.0))).unwrap();
        assert_eq!(g.eval(0.0).unwrap(), (1.0, 0.0));
        for &y in &[0.3, 1.7, 3.2, 4.9] {
            let d = g.value(y).unwrap() - g.value(-y).unwrap();
            assert!(d.abs() < 1e-12);
        }
    }

    #[test]
    fn residual_is_small() {
        for n in 1..=3 {
            for sign in [Sign::Plus, Sign::Minus] {
                let g = weber_solve(&WeberSpec::new(n, sign, Parity::Even, (-4.0, 4.0))).unwrap();
                assert!(g.relative_residual() <= 1e-8, "n = {n}, {sign:?}");
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            OdeTable::solve(vec![1.0], (1.0, 0.0), (1.0, 2.0)),
            Err(SpecfunError::InvalidSpec(_))
        ));
        let g = weber_solve(&WeberSpec::new(1, Sign::Plus, Parity::Even, (-1.0, 1.0))).unwrap();
        assert!(matches!(g.eval(2.0), Err(SpecfunError::OutOfRange { .. })));
        assert!(matches!(
            weber_solve(&WeberSpec::new(6, Sign::Plus, Parity::Even, (-60.0, 60.0))),
            Err(SpecfunError::Overflow { .. } | SpecfunError::StepUnderflow { .. })
        ));
    }
}
