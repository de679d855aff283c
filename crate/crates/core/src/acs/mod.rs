//! Almost complex structures near the standard one: the structure tensor `J`,
//! the Beltrami matrix `A` and the dictionary between them, the Nijenhuis
//! tensor and the integrability condition, and test-structure generators.
//!
//! Orientation: row `j` of `A` is the `zbar_j` direction, so a chart `F`
//! satisfies `df_l/dzbar_j = sum_k a_jk df_l/dz_k`.

mod dictionary;
mod generate;
pub(crate) mod linalg;
pub(crate) mod nijenhuis;

pub use dictionary::{
    beltrami_from_map, beltrami_from_structure, normalize_origin, structure_from_beltrami,
    OriginChange,
};
pub use generate::{
    cutoff_periodize, gen_structure, radial_cutoff, GenKind, GenMetadata, GenParams, Generated,
    HolderScale,
};
pub use nijenhuis::{integrability_residual, nijenhuis, IntegrabilityReport, ProductRoute};

use crate::error::{AcsError, Result};
use crate::grid::{Field, Grid};
use num_complex::Complex64;

/// Complex `n x n` coefficient field; component `j * n + k` is `a_jk`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeltramiMatrix {
    field: Field,
}

impl BeltramiMatrix {
    pub fn new(field: Field) -> Result<Self> {
        let n = field.grid().n();
        if field.ncomp() != n * n {
            return Err(AcsError::DimensionMismatch(format!(
                "Beltrami matrix on C^{n} needs {} components, got {}",
                n * n,
                field.ncomp()
            )));
        }
        Ok(Self { field })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            field: Field::zeros(grid, grid.n() * grid.n()),
        }
    }

    /// The same matrix (row-major) at every node.
    pub fn constant(grid: Grid, a: &[Complex64]) -> Result<Self> {
        let n = grid.n();
        if a.len() != n * n {
            return Err(AcsError::DimensionMismatch(format!(
                "expected {} entries",
                n * n
            )));
        }
        let mut field = Field::zeros(grid, n * n);
        for (c, v) in a.iter().enumerate() {
            field.comp_mut(c).fill(*v);
        }
        Ok(Self { field })
    }

    pub fn grid(&self) -> &Grid {
        self.field.grid()
    }

    pub fn n(&self) -> usize {
        self.grid().n()
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn into_field(self) -> Field {
        self.field
    }

    pub fn entry(&self, j: usize, k: usize) -> &[Complex64] {
        self.field.comp(j * self.n() + k)
    }

    /// Row-major matrix at node `idx`.
    pub fn at(&self, idx: usize) -> Vec<Complex64> {
        (0..self.field.ncomp())
            .map(|c| self.field.comp(c)[idx])
            .collect()
    }

    /// `max_x |A(x)|_2`, the smallness gauge.
    pub fn sup_norm(&self) -> f64 {
        let n = self.n();
        (0..self.grid().len())
            .map(|idx| crate::grid::spectral_norm(&self.at(idx), n))
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            field: self.field.scale(Complex64::new(s, 0.0)),
        }
    }
}

/// Real `2n x 2n` endomorphism field on the frame `(dx_1, dy_1, ..., dx_n, dy_n)`;
/// component `a * 2n + b` is the entry in row `a`, column `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureField {
    field: Field,
}

/// Tolerance on `|J^2 + I|` accepted by [`StructureField::new`].
pub const SQUARE_TOL: f64 = 1e-10;

impl StructureField {
    /// Checks that the entries are real and `J^2 = -I` at every node.
    pub fn new(field: Field) -> Result<Self> {
        let d = 2 * field.grid().n();
        if field.ncomp() != d * d {
            return Err(AcsError::DimensionMismatch(format!(
                "structure on R^{d} needs {} components, got {}",
                d * d,
                field.ncomp()
            )));
        }
        let s = Self { field };
        let scale = s.field.sup_norm().max(1.0);
        if s.field
            .values()
            .iter()
            .any(|v| v.im.abs() > SQUARE_TOL * scale)
        {
            return Err(AcsError::InvalidParameter(
                "structure entries must be real".into(),
            ));
        }
        let defect = s.square_defect();
        if defect > SQUARE_TOL * scale * scale {
            return Err(AcsError::InvalidParameter(format!(
                "J^2 + I reaches {defect:.3e}, not an almost complex structure"
            )));
        }
        Ok(s)
    }

    /// The standard structure: `J dx = dy`, `J dy = -dx` in every factor.
    pub fn standard(grid: Grid) -> Self {
        let d = 2 * grid.n();
        let mut field = Field::zeros(grid, d * d);
        for j in 0..grid.n() {
            field
                .comp_mut((2 * j + 1) * d + 2 * j)
                .fill(Complex64::new(1.0, 0.0));
            field
                .comp_mut((2 * j) * d + 2 * j + 1)
                .fill(Complex64::new(-1.0, 0.0));
        }
        Self { field }
    }

    pub(crate) fn from_field_unchecked(field: Field) -> Self {
        Self { field }
    }

    pub fn grid(&self) -> &Grid {
        self.field.grid()
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn real_dim(&self) -> usize {
        2 * self.grid().n()
    }

    pub fn entry(&self, a: usize, b: usize) -> &[Complex64] {
        self.field.comp(a * self.real_dim() + b)
    }

    /// Row-major real matrix at node `idx`.
    pub fn at(&self, idx: usize) -> Vec<f64> {
        (0..self.field.ncomp())
            .map(|c| self.field.comp(c)[idx].re)
            .collect()
    }

    /// `max_x |J(x)^2 + I|_max`.
    pub fn square_defect(&self) -> f64 {
        let d = self.real_dim();
        let mut worst: f64 = 0.0;
        for idx in 0..self.grid().len() {
            let j = self.at(idx);
            let sq = linalg::real_matmul(d, &j, &j);
            for a in 0..d {
                for b in 0..d {
                    let want = if a == b { -1.0 } else { 0.0 };
                    worst = worst.max((sq[a * d + b] - want).abs());
                }
            }
        }
        worst
    }
}

/// Real vector field with `2n` coefficient components on the coordinate frame.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    field: Field,
}

impl VectorField {
    pub fn new(field: Field) -> Result<Self> {
        let d = 2 * field.grid().n();
        if field.ncomp() != d {
            return Err(AcsError::DimensionMismatch(format!(
                "vector field on R^{d} needs {d} components, got {}",
                field.ncomp()
            )));
        }
        Ok(Self { field })
    }

    /// The coordinate field `d/d(axis)`.
    pub fn coordinate(grid: Grid, axis: usize) -> Result<Self> {
        let d = 2 * grid.n();
        if axis >= d {
            return Err(AcsError::IndexOutOfRange {
                index: axis,
                limit: d,
            });
        }
        let mut field = Field::zeros(grid, d);
        field.comp_mut(axis).fill(Complex64::new(1.0, 0.0));
        Ok(Self { field })
    }

    pub fn grid(&self) -> &Grid {
        self.field.grid()
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn into_field(self) -> Field {
        self.field
    }
}
