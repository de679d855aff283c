use super::Grid;
use crate::error::{AcsError, Result};
use num_complex::Complex64;
use rayon::prelude::*;

/// Complex samples of one or more components on a periodic grid.
///
/// Storage is component-major: component `c` occupies
/// `values[c * len .. (c + 1) * len]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    ncomp: usize,
    values: Vec<Complex64>,
}

impl Field {
    pub fn zeros(grid: Grid, ncomp: usize) -> Self {
        Self {
            grid,
            ncomp,
            values: vec![Complex64::new(0.0, 0.0); ncomp * grid.len()],
        }
    }

    pub fn constant(grid: Grid, value: Complex64) -> Self {
        Self {
            grid,
            ncomp: 1,
            values: vec![value; grid.len()],
        }
    }

    pub fn from_values(grid: Grid, ncomp: usize, values: Vec<Complex64>) -> Result<Self> {
        if ncomp == 0 || values.len() != ncomp * grid.len() {
            return Err(AcsError::InvalidParameter(format!(
                "expected {} samples for {ncomp} components, got {}",
                ncomp * grid.len(),
                values.len()
            )));
        }
        if let Some(i) = values
            .iter()
            .position(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(AcsError::NonFinite(format!("sample {i}")));
        }
        Ok(Self {
            grid,
            ncomp,
            values,
        })
    }

    /// Samples `f(component, wrapped_coords)` at every node.
    pub fn from_fn<F>(grid: Grid, ncomp: usize, f: F) -> Self
    where
        F: Fn(usize, &[f64]) -> Complex64 + Sync,
    {
        let len = grid.len();
        let m = grid.dim();
        let mut values = vec![Complex64::new(0.0, 0.0); ncomp * len];
        values
            .par_chunks_mut(len)
            .enumerate()
            .for_each(|(c, chunk)| {
                let mut x = [0.0; 4];
                for (idx, v) in chunk.iter_mut().enumerate() {
                    grid.wrapped_coords(idx, &mut x[..m]);
                    *v = f(c, &x[..m]);
                }
            });
        Self {
            grid,
            ncomp,
            values,
        }
    }

    /// Stacks single-component fields into one multi-component field.
    pub fn stack(parts: &[Field]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| AcsError::InvalidParameter("nothing to stack".into()))?;
        let grid = first.grid;
        let mut values = Vec::with_capacity(parts.iter().map(|p| p.values.len()).sum());
        let mut ncomp = 0;
        for p in parts {
            grid.check_same(&p.grid)?;
            values.extend_from_slice(&p.values);
            ncomp += p.ncomp;
        }
        Ok(Self {
            grid,
            ncomp,
            values,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn ncomp(&self) -> usize {
        self.ncomp
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn comp(&self, c: usize) -> &[Complex64] {
        let len = self.grid.len();
        &self.values[c * len..(c + 1) * len]
    }

    pub fn comp_mut(&mut self, c: usize) -> &mut [Complex64] {
        let len = self.grid.len();
        &mut self.values[c * len..(c + 1) * len]
    }

    /// Copies component `c` out as a single-component field.
    pub fn component(&self, c: usize) -> Field {
        Field {
            grid: self.grid,
            ncomp: 1,
            values: self.comp(c).to_vec(),
        }
    }

    pub fn components(&self) -> Vec<Field> {
        (0..self.ncomp).map(|c| self.component(c)).collect()
    }

    pub fn set_component(&mut self, c: usize, src: &Field) {
        self.comp_mut(c).copy_from_slice(src.comp(0));
    }

    /// Value of component `c` at the origin (node 0).
    pub fn at_origin(&self, c: usize) -> Complex64 {
        self.comp(c)[0]
    }

    pub fn map<F: Fn(Complex64) -> Complex64 + Sync>(&self, f: F) -> Field {
        Field {
            grid: self.grid,
            ncomp: self.ncomp,
            values: self.values.par_iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map<F>(&self, other: &Field, f: F) -> Result<Field>
    where
        F: Fn(Complex64, Complex64) -> Complex64 + Sync,
    {
        self.grid.check_same(&other.grid)?;
        if self.ncomp != other.ncomp {
            return Err(AcsError::DimensionMismatch(format!(
                "{} vs {} components",
                self.ncomp, other.ncomp
            )));
        }
        Ok(Field {
            grid: self.grid,
            ncomp: self.ncomp,
            values: self
                .values
                .par_iter()
                .zip(other.values.par_iter())
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Field) -> Result<Field> {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn scale(&self, s: Complex64) -> Field {
        self.map(|v| v * s)
    }

    pub fn conj(&self) -> Field {
        self.map(|v| v.conj())
    }

    pub fn axpy(&mut self, alpha: Complex64, x: &Field) -> Result<()> {
        self.grid.check_same(&x.grid)?;
        self.values
            .par_iter_mut()
            .zip(x.values.par_iter())
            .for_each(|(y, &xv)| *y += alpha * xv);
        Ok(())
    }

    /// Largest modulus over all components and nodes.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// Root-mean-square over nodes, summed over components.
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        (s / self.grid.len() as f64).sqrt()
    }

    pub fn mean(&self, c: usize) -> Complex64 {
        let s: Complex64 = self.comp(c).iter().sum();
        s / self.grid.len() as f64
    }

    pub fn is_finite(&self) -> bool {
        self.values
            .iter()
            .all(|v| v.re.is_finite() && v.im.is_finite())
    }
}
