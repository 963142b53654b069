use crate::ppgen::{Point, Region};

/// Planar or toroidal distance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Metric {
    Planar,
    Torus { side: f64 },
}

impl Metric {
    pub fn for_region(region: &Region) -> Self {
        match region.torus_side() {
            Some(side) => Metric::Torus { side },
            None => Metric::Planar,
        }
    }

    /// Displacement from `a` to `b` (minimal image on the torus).
    #[inline]
    pub fn displacement(&self, a: Point, b: Point) -> Point {
        let mut d = [b[0] - a[0], b[1] - a[1]];
        if let Metric::Torus { side } = *self {
            let half = side / 2.0;
            for c in &mut d {
                // Coordinates lie in [0, side), so one shift suffices.
                if *c > half {
                    *c -= side;
                } else if *c < -half {
                    *c += side;
                }
            }
        }
        d
    }

    #[inline]
    pub fn distance(&self, a: Point, b: Point) -> f64 {
        let d = self.displacement(a, b);
        (d[0] * d[0] + d[1] * d[1]).sqrt()
    }
}

/// Uniform cell list over a region, stored in compressed-row form.
///
/// Cells have side at least `min_side`, so any two points within `min_side`
/// of each other share a cell or sit in 8-adjacent cells. On a torus the
/// number of cells per axis is `floor(side / min_side)` and adjacency wraps.
#[derive(Clone, Debug)]
pub struct SpatialGrid {
    origin: Point,
    cell_side: f64,
    dims: [usize; 2],
    wrap: bool,
    cell_start: Vec<usize>,
    entries: Vec<usize>,
}

impl SpatialGrid {
    pub fn build(points: &[Point], region: &Region, min_side: f64) -> Self {
        let (lo, hi) = region.bounds();
        let (dims, cell_side, wrap) = match region.torus_side() {
            Some(side) => {
                let n = ((side / min_side).floor() as usize).max(1);
                ([n, n], side / n as f64, true)
            }
            None => {
                let nx = (((hi[0] - lo[0]) / min_side).ceil() as usize).max(1);
                let ny = (((hi[1] - lo[1]) / min_side).ceil() as usize).max(1);
                ([nx, ny], min_side, false)
            }
        };
        let mut grid = SpatialGrid {
            origin: lo,
            cell_side,
            dims,
            wrap,
            cell_start: vec![0; dims[0] * dims[1] + 1],
            entries: vec![0; points.len()],
        };
        let cells: Vec<usize> = points.iter().map(|&p| grid.flat(grid.cell_of(p))).collect();
        for &c in &cells {
            grid.cell_start[c + 1] += 1;
        }
        for c in 0..dims[0] * dims[1] {
            grid.cell_start[c + 1] += grid.cell_start[c];
        }
        let mut fill = grid.cell_start.clone();
        for (i, &c) in cells.iter().enumerate() {
            grid.entries[fill[c]] = i;
            fill[c] += 1;
        }
        grid
    }

    pub fn cell_side(&self) -> f64 {
        self.cell_side
    }

    pub fn dims(&self) -> [usize; 2] {
        self.dims
    }

    /// `floor((x - origin) / cell_side)` per axis, clamped to the grid.
    pub fn cell_of(&self, p: Point) -> [usize; 2] {
        let mut c = [0usize; 2];
        for k in 0..2 {
            let raw = ((p[k] - self.origin[k]) / self.cell_side).floor();
            c[k] = if raw < 0.0 {
                0
            } else {
                (raw as usize).min(self.dims[k] - 1)
            };
        }
        c
    }

    fn flat(&self, c: [usize; 2]) -> usize {
        c[1] * self.dims[0] + c[0]
    }

    pub fn bucket(&self, cell: [usize; 2]) -> &[usize] {
        let f = self.flat(cell);
        &self.entries[self.cell_start[f]..self.cell_start[f + 1]]
    }

    /// Distinct cells within `rings` cells (Chebyshev) of `cell`.
    pub fn cells_around(&self, cell: [usize; 2], rings: usize) -> Vec<[usize; 2]> {
        let r = rings as i64;
        let mut out = Vec::with_capacity(((2 * r + 1) * (2 * r + 1)) as usize);
        for dy in -r..=r {
            for dx in -r..=r {
                let mut c = [0usize; 2];
                let mut inside = true;
                for (k, d) in [(0usize, dx), (1usize, dy)] {
                    let n = self.dims[k] as i64;
                    let v = cell[k] as i64 + d;
                    if self.wrap {
                        c[k] = v.rem_euclid(n) as usize;
                    } else if v < 0 || v >= n {
                        inside = false;
                    } else {
                        c[k] = v as usize;
                    }
                }
                if inside && !out.contains(&c) {
                    out.push(c);
                }
            }
        }
        out
    }

    /// Calls `visit` with every indexed point that may lie within `radius`
    /// of `p`; each point at most once.
    pub fn for_each_candidate<F: FnMut(usize)>(&self, p: Point, radius: f64, mut visit: F) {
        let rings = ((radius / self.cell_side).ceil() as usize).max(1);
        let cell = self.cell_of(p);
        let [sx, sy] = [0, 1].map(|k| self.axis_span(cell[k], rings, k));
        for ty in 0..sy.1 {
            let y = self.axis_index(sy, ty, 1);
            for tx in 0..sx.1 {
                let x = self.axis_index(sx, tx, 0);
                for &j in self.bucket([x, y]) {
                    visit(j);
                }
            }
        }
    }

    /// First cell (possibly negative before wrapping) and number of distinct
    /// cells within `rings` of `c` along axis `k`.
    fn axis_span(&self, c: usize, rings: usize, k: usize) -> (i64, usize) {
        let n = self.dims[k] as i64;
        let (c, r) = (c as i64, rings as i64);
        if self.wrap {
            if 2 * r + 1 >= n {
                (0, n as usize)
            } else {
                (c - r, (2 * r + 1) as usize)
            }
        } else {
            let lo = (c - r).max(0);
            (lo, ((c + r).min(n - 1) - lo + 1) as usize)
        }
    }

    fn axis_index(&self, span: (i64, usize), t: usize, k: usize) -> usize {
        (span.0 + t as i64).rem_euclid(self.dims[k] as i64) as usize
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
