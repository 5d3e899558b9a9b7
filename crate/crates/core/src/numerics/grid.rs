use serde::{Deserialize, Serialize};

use super::NumericsError;

/// Uniform space-time lattice; node `(i, j)` sits at
/// `(x_min + i dx, t_min + j dt)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub nt: usize,
}

impl Grid {
    pub fn new(x: (f64, f64), nx: usize, t: (f64, f64), nt: usize) -> Result<Self, NumericsError> {
        let g = Grid {
            x_min: x.0,
            x_max: x.1,
            nx,
            t_min: t.0,
            t_max: t.1,
            nt,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), NumericsError> {
        let finite = [self.x_min, self.x_max, self.t_min, self.t_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(NumericsError::InvalidGrid("bounds must be finite".into()));
        }
        if self.nx < 8 || self.nt < 8 {
            return Err(NumericsError::InvalidGrid(format!(
                "need at least 8 nodes per axis, got {}x{}",
                self.nx, self.nt
            )));
        }
        if self.x_max <= self.x_min || self.t_max <= self.t_min {
            return Err(NumericsError::InvalidGrid("ranges must be increasing".into()));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn dt(&self) -> f64 {
        (self.t_max - self.t_min) / (self.nt - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.nx {
            self.x_max
        } else {
            self.x_min + i as f64 * self.dx()
        }
    }

    pub fn t(&self, j: usize) -> f64 {
        if j + 1 == self.nt {
            self.t_max
        } else {
            self.t_min + j as f64 * self.dt()
        }
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x(i)).collect()
    }

    pub fn ts(&self) -> Vec<f64> {
        (0..self.nt).map(|j| self.t(j)).collect()
    }

    pub fn len(&self) -> usize {
        self.nx * self.nt
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major index, time-major: all of `x` for `t_0`, then `t_1`, ...
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// Same bounds with both spacings halved.
    pub fn refined(&self) -> Grid {
        Grid {
            nx: 2 * self.nx - 1,
            nt: 2 * self.nt - 1,
            ..*self
        }
    }

    pub fn contains_x(&self, x: f64) -> bool {
        x >= self.x_min && x <= self.x_max
    }

    /// Parse `xmin,xmax,nx,tmin,tmax,nt`.
    pub fn parse(text: &str) -> Result<Grid, NumericsError> {
        let parts: Vec<&str> = text.split(',').map(str::trim).collect();
        if parts.len() != 6 {
            return Err(NumericsError::InvalidGrid(format!(
                "expected xmin,xmax,nx,tmin,tmax,nt; got `{text}`"
            )));
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| NumericsError::InvalidGrid(format!("`{s}` is not a number")))
        };
        let count = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| NumericsError::InvalidGrid(format!("`{s}` is not a node count")))
        };
        Grid::new(
            (num(parts[0])?, num(parts[1])?),
            count(parts[2])?,
            (num(parts[3])?, num(parts[4])?),
            count(parts[5])?,
        )
    }
}

/// Values on a [`Grid`] with a mask of excluded (singular or unusable) nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub excluded: Vec<bool>,
}

impl Field {
    pub fn zeros(grid: Grid) -> Self {
        Field {
            grid,
            values: vec![0.0; grid.len()],
            excluded: vec![false; grid.len()],
        }
    }

    /// Tabulate `f`; nodes where `f` fails or is non-finite are excluded.
    pub fn tabulate<E>(grid: Grid, f: impl Fn(f64, f64) -> Result<f64, E> + Sync) -> Self {
        use rayon::prelude::*;
        let cells: Vec<(f64, bool)> = (0..grid.len())
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k % grid.nx, k / grid.nx);
                match f(grid.x(i), grid.t(j)) {
                    Ok(v) if v.is_finite() => (v, false),
                    _ => (f64::NAN, true),
                }
            })
            .collect();
        let (values, excluded) = cells.into_iter().unzip();
        Field { grid, values, excluded }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn is_excluded(&self, i: usize, j: usize) -> bool {
        self.excluded[self.grid.index(i, j)]
    }

    pub fn excluded_fraction(&self) -> f64 {
        self.excluded.iter().filter(|e| **e).count() as f64 / self.values.len() as f64
    }

    /// Largest `|value|` over included nodes.
    pub fn linf(&self) -> f64 {
        self.included().map(|v| v.abs()).fold(0.0, f64::max)
    }

    pub fn included(&self) -> impl Iterator<Item = f64> + '_ {
        self.values
            .iter()
            .zip(&self.excluded)
            .filter(|(_, e)| !**e)
            .map(|(v, _)| *v)
    }

    /// `x,t,value` rows; excluded nodes are written as `nan`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,t,value\n");
        for j in 0..self.grid.nt {
            for i in 0..self.grid.nx {
                let k = self.grid.index(i, j);
                let v = if self.excluded[k] { f64::NAN } else { self.values[k] };
                s.push_str(&format!("{},{},{}\n", self.grid.x(i), self.grid.t(j), v));
            }
        }
        s
    }

    /// Grid metadata plus the row-major value array; excluded nodes are `null`.
    pub fn to_json(&self) -> serde_json::Value {
        let values: Vec<Option<f64>> = self
            .values
            .iter()
            .zip(&self.excluded)
            .map(|(v, e)| if *e { None } else { Some(*v) })
            .collect();
        serde_json::json!({
            "grid": self.grid,
            "layout": "row-major, t outer, x inner",
            "values": values,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_and_endpoints() {
        let g = Grid::new((-1.0, 1.0), 11, (0.0, 2.0), 9).unwrap();
        assert!((g.dx() - 0.2).abs() < 1e-15);
        assert!((g.dt() - 0.25).abs() < 1e-15);
        assert_eq!(g.x(10), 1.0);
        assert_eq!(g.t(8), 2.0);
        let r = g.refined();
        assert!((r.dx() - 0.1).abs() < 1e-15);
        assert_eq!(r.x(20), 1.0);
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(Grid::new((0.0, 1.0), 4, (0.0, 1.0), 10).is_err());
        assert!(Grid::new((1.0, 0.0), 10, (0.0, 1.0), 10).is_err());
        assert!(Grid::parse("0,1,10,0,1").is_err());
        assert_eq!(
            Grid::parse("-8,8,512,0.1,2,256").unwrap(),
            Grid::new((-8.0, 8.0), 512, (0.1, 2.0), 256).unwrap()
        );
    }

    #[test]
    fn tabulate_masks_failures() {
        let g = Grid::new((-1.0, 1.0), 9, (0.0, 1.0), 8).unwrap();
        let f = Field::tabulate(g, |x, _| if x < 0.0 { Err(()) } else { Ok(x) });
        assert!((f.excluded_fraction() - 4.0 / 9.0).abs() < 1e-12);
        assert_eq!(f.linf(), 1.0);
        assert!(f.to_csv().lines().count() == 1 + 72);
    }
}
