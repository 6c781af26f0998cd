//! Periodic structured grids and discrete fields.
//!
//! Cells are numbered row-major with the x₁ index running fastest:
//! cell `(i, j)` has DOF index `j * nx + i` and center `((i+½)dx, (j+½)dy)`.
//! All index arithmetic wraps in both directions.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Index};

use crate::numeric;
use crate::{Error, Result};

/// Periodic grid of `nx × ny` cells on `[0, lx] × [0, ly]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::GridTooSmall { nx, ny });
        }
        if !(lx.is_finite() && ly.is_finite() && lx > 0.0 && ly > 0.0) {
            return Err(Error::InvalidExtent { lx, ly });
        }
        Ok(Self { nx, ny, lx, ly })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn lx(&self) -> f64 {
        self.lx
    }

    pub fn ly(&self) -> f64 {
        self.ly
    }

    pub fn dx(&self) -> f64 {
        self.lx / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        self.ly / self.ny as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dy()
    }

    /// Number of degrees of freedom `H = nx · ny`.
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// Inverse of [`GridSpec::index`]: `(i, j)` of a DOF.
    #[inline]
    pub fn cell(&self, index: usize) -> (usize, usize) {
        (index % self.nx, index / self.nx)
    }

    /// Index of cell `(i + di, j + dj)` with periodic wrap.
    #[inline]
    pub fn wrapped_index(&self, i: usize, j: usize, di: i64, dj: i64) -> usize {
        let ii = (i as i64 + di).rem_euclid(self.nx as i64) as usize;
        let jj = (j as i64 + dj).rem_euclid(self.ny as i64) as usize;
        self.index(ii, jj)
    }

    pub fn center(&self, i: usize, j: usize) -> (f64, f64) {
        ((i as f64 + 0.5) * self.dx(), (j as f64 + 0.5) * self.dy())
    }

    pub fn check_index(&self, index: usize) -> Result<()> {
        if index < self.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index, len: self.len() })
        }
    }
}

/// Element of the translation group `G = ℝ²`.
///
/// The identity is `(0, 0)` and the group product is vector addition. Because
/// the domain is periodic, `g` and `g + (lx, ly)` act identically.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GroupVec(pub [f64; 2]);

impl GroupVec {
    pub const IDENTITY: GroupVec = GroupVec([0.0, 0.0]);

    /// Translation by a whole number of cells.
    pub fn from_cells(grid: &GridSpec, di: i64, dj: i64) -> Self {
        GroupVec([di as f64 * grid.dx(), dj as f64 * grid.dy()])
    }

    /// `g · exp(dt · alg)`. For translations the exponential is the identity map.
    pub fn advance(self, alg: LieAlgebraVec, dt: f64) -> Self {
        GroupVec([self.0[0] + dt * alg.0[0], self.0[1] + dt * alg.0[1]])
    }
}

impl Add for GroupVec {
    type Output = GroupVec;

    fn add(self, rhs: GroupVec) -> GroupVec {
        GroupVec([self.0[0] + rhs.0[0], self.0[1] + rhs.0[1]])
    }
}

/// Element of the Lie algebra `Lℝ² = ℝ²`, in the coordinate basis `𝔢₁, 𝔢₂`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LieAlgebraVec(pub [f64; 2]);

impl LieAlgebraVec {
    pub const ZERO: LieAlgebraVec = LieAlgebraVec([0.0, 0.0]);

    pub fn is_finite(&self) -> bool {
        self.0[0].is_finite() && self.0[1].is_finite()
    }
}

/// A discrete function in `V_H`: one value per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: GridSpec,
    values: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: GridSpec) -> Self {
        Field { grid, values: vec![0.0; grid.len()] }
    }

    pub fn constant(grid: GridSpec, value: f64) -> Self {
        Field { grid, values: vec![value; grid.len()] }
    }

    /// Canonical unit field `φ_index`.
    pub fn unit(grid: GridSpec, index: usize) -> Result<Self> {
        grid.check_index(index)?;
        let mut f = Self::zeros(grid);
        f.values[index] = 1.0;
        Ok(f)
    }

    pub fn from_values(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), got: values.len() });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Field { grid, values })
    }

    /// Unchecked constructor for values produced by the solvers themselves.
    pub(crate) fn from_raw(grid: GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Field { grid, values }
    }

    /// Projection `P_H` of a closure onto the grid by sampling at cell centers.
    pub fn project<F: Fn(f64, f64) -> f64>(grid: GridSpec, f: F) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.ny() {
            for i in 0..grid.nx() {
                let (x1, x2) = grid.center(i, j);
                values.push(f(x1, x2));
            }
        }
        Self::from_values(grid, values)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn same_grid(&self, other: &Field) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Discrete L² product `dx·dy·Σ aᵢbᵢ`.
    pub fn inner(&self, other: &Field) -> Result<f64> {
        self.same_grid(other)?;
        Ok(self.inner_unchecked(other))
    }

    pub(crate) fn inner_unchecked(&self, other: &Field) -> f64 {
        self.grid.cell_area() * numeric::dot(&self.values, &other.values)
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.inner_unchecked(self))
    }

    pub fn sup_norm(&self) -> f64 {
        numeric::max_abs(&self.values)
    }

    /// Compensated plain sum of the cell values.
    pub fn cell_sum(&self) -> f64 {
        numeric::compensated_sum(self.values.iter().copied())
    }

    /// `self += alpha · other`.
    pub fn axpy(&mut self, alpha: f64, other: &Field) -> Result<()> {
        self.same_grid(other)?;
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += alpha * b;
        }
        Ok(())
    }

    pub fn scale(&mut self, alpha: f64) {
        for a in &mut self.values {
            *a *= alpha;
        }
    }

    pub fn scaled(&self, alpha: f64) -> Field {
        let mut f = self.clone();
        f.scale(alpha);
        f
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(Field::from_raw(self.grid, values))
    }

    /// `‖self − other‖` in the L² norm.
    pub fn distance(&self, other: &Field) -> Result<f64> {
        Ok(self.sub(other)?.norm())
    }
}

impl Index<usize> for Field {
    type Output = f64;

    fn index(&self, index: usize) -> &f64 {
        &self.values[index]
    }
}

/// Discrete L² inner product of two fields on the same grid.
pub fn inner_product(a: &Field, b: &Field) -> Result<f64> {
    a.inner(b)
}

/// Shifts smaller than this fraction of a cell are snapped to the nearest
/// whole cell so that translations by `k·dx` act as exact permutations.
const CELL_SNAP: f64 = 1e-9;

/// Splits a shift measured in cells into its whole part and the fractional
/// remainder in `[0, 1)`.
fn split_shift(cells: f64) -> (i64, f64) {
    let nearest = libm::round(cells);
    if libm::fabs(cells - nearest) <= CELL_SNAP * f64::max(1.0, libm::fabs(cells)) {
        return (nearest as i64, 0.0);
    }
    let whole = libm::floor(cells);
    (whole as i64, cells - whole)
}

/// Periodic translate `(g.v)(x) = v(x − g)` by bilinear interpolation between
/// cell centers.
///
/// Whole-cell translations are exact permutations of the values.
pub fn shift_field(v: &Field, g: GroupVec) -> Field {
    let grid = *v.grid();
    let (wx, fx) = split_shift(g.0[0] / grid.dx());
    let (wy, fy) = split_shift(g.0[1] / grid.dy());
    // The sample point x − g sits at index position (i − wx − fx): weight
    // (1 − fx) on column i − wx and fx on column i − wx − 1.
    let xs: [(i64, f64); 2] = [(-wx, 1.0 - fx), (-wx - 1, fx)];
    let ys: [(i64, f64); 2] = [(-wy, 1.0 - fy), (-wy - 1, fy)];
    let src = v.values();
    let mut out = Vec::with_capacity(grid.len());
    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            let mut acc = 0.0;
            for &(dj, wyj) in &ys {
                if wyj == 0.0 {
                    continue;
                }
                for &(di, wxi) in &xs {
                    if wxi == 0.0 {
                        continue;
                    }
                    let w = wxi * wyj;
                    let s = src[grid.wrapped_index(i, j, di, dj)];
                    acc += if w == 1.0 { s } else { w * s };
                }
            }
            out.push(acc);
        }
    }
    Field::from_raw(grid, out)
}
