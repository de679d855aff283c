//! Littlewood–Paley blocks on the periodic lattice and the Bony decomposition
//! of products.

use crate::error::{AcsError, Result};
use crate::grid::{partial, Field, Grid, Spectrum};
use num_complex::Complex64;

/// Smooth step: 1 on `[0, 1]`, 0 on `[2, inf)`.
pub fn theta(rho: f64) -> f64 {
    fn s(t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else {
            (-1.0 / t).exp()
        }
    }
    if rho <= 1.0 {
        1.0
    } else if rho >= 2.0 {
        0.0
    } else {
        let a = s(2.0 - rho);
        a / (a + s(rho - 1.0))
    }
}

/// Value of block symbol `k` (from `-1` to `k_max`) at lattice radius `rho`.
pub fn block_symbol(k: i32, k_max: i32, rho: f64) -> f64 {
    let cut = |j: i32| theta(rho / 2f64.powi(j));
    match k {
        -1 => theta(2.0 * rho),
        k if k == k_max => 1.0 - cut(k_max - 1),
        k => cut(k) - cut(k - 1),
    }
}

/// Per-lattice-point bookkeeping of the dyadic partition: every frequency
/// lives in block `lower` with weight `w` and in `lower + 1` with `1 - w`.
#[derive(Debug, Clone)]
pub struct DyadicPartition {
    grid: Grid,
    k_max: i32,
    lower: Vec<i8>,
    weight: Vec<f64>,
}

impl DyadicPartition {
    pub fn new(grid: &Grid) -> Self {
        let k_max = grid.k_max();
        let m = grid.dim();
        let mut d = [0usize; 4];
        let mut lower = Vec::with_capacity(grid.len());
        let mut weight = Vec::with_capacity(grid.len());
        for idx in 0..grid.len() {
            grid.digits(idx, &mut d[..m]);
            let rho = d[..m]
                .iter()
                .map(|&i| (grid.freq(i) as f64).powi(2))
                .sum::<f64>()
                .sqrt();
            let k = (-1..=k_max)
                .find(|&k| block_symbol(k, k_max, rho) > 0.0)
                .expect("the blocks cover every frequency");
            let w = if k == k_max {
                1.0
            } else {
                block_symbol(k, k_max, rho)
            };
            lower.push(k as i8);
            weight.push(w);
        }
        Self {
            grid: *grid,
            k_max,
            lower,
            weight,
        }
    }

    pub fn k_max(&self) -> i32 {
        self.k_max
    }

    /// Block indices `-1..=k_max`.
    pub fn blocks(&self) -> std::ops::RangeInclusive<i32> {
        -1..=self.k_max
    }

    pub fn table(&self, k: i32) -> Vec<Complex64> {
        self.lower
            .iter()
            .zip(&self.weight)
            .map(|(&l, &w)| {
                let l = l as i32;
                let v = if l == k {
                    w
                } else if l + 1 == k {
                    1.0 - w
                } else {
                    0.0
                };
                Complex64::new(v, 0.0)
            })
            .collect()
    }

    fn check(&self, u: &Field) -> Result<()> {
        self.grid.check_same(u.grid())
    }
}

/// The blocks `Delta_k u` for `k = -1, ..., k_max` of a field.
#[derive(Debug, Clone)]
pub struct LPDecomposition {
    k_max: i32,
    blocks: Vec<Field>,
}

impl LPDecomposition {
    pub fn k_max(&self) -> i32 {
        self.k_max
    }

    pub fn block(&self, k: i32) -> &Field {
        &self.blocks[(k + 1) as usize]
    }

    pub fn blocks(&self) -> &[Field] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Iterator of `(k, Delta_k u)`.
    pub fn iter(&self) -> impl Iterator<Item = (i32, &Field)> {
        self.blocks
            .iter()
            .enumerate()
            .map(|(i, b)| (i as i32 - 1, b))
    }

    /// `S_j u = sum_{i <= j} Delta_i u`; zero for `j < -1`.
    pub fn partial_sum(&self, j: i32) -> Field {
        let mut out = Field::zeros(*self.blocks[0].grid(), self.blocks[0].ncomp());
        for (k, b) in self.iter() {
            if k > j {
                break;
            }
            out.axpy(Complex64::new(1.0, 0.0), b)
                .expect("blocks share a grid");
        }
        out
    }

    pub fn sum(&self) -> Field {
        self.partial_sum(self.k_max)
    }
}

pub fn lp_decompose(u: &Field) -> LPDecomposition {
    lp_decompose_with(u, &DyadicPartition::new(u.grid()))
}

pub fn lp_decompose_with(u: &Field, part: &DyadicPartition) -> LPDecomposition {
    let spec = Spectrum::of(u);
    let blocks = part
        .blocks()
        .map(|k| spec.apply_table(&part.table(k)))
        .collect();
    LPDecomposition {
        k_max: part.k_max,
        blocks,
    }
}

/// Spectral gap of the paraproduct; the remainder collects `|i - k| < gap`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BonyConfig {
    pub gap: i32,
}

impl Default for BonyConfig {
    fn default() -> Self {
        Self { gap: 2 }
    }
}

fn product_sum<P>(u: &LPDecomposition, v: &LPDecomposition, keep: P) -> Field
where
    P: Fn(i32, i32) -> bool,
{
    let g = *u.blocks[0].grid();
    let mut out = Field::zeros(g, u.blocks[0].ncomp());
    for (i, bu) in u.iter() {
        for (k, bv) in v.iter() {
            if keep(i, k) {
                let p = bu.mul(bv).expect("blocks share a grid");
                out.axpy(Complex64::new(1.0, 0.0), &p).expect("same grid");
            }
        }
    }
    out
}

fn paraproduct_blocks(u: &LPDecomposition, v: &LPDecomposition, gap: i32) -> Field {
    // sum_k S_{k-gap} u * Delta_k v, accumulated through running partial sums
    let g = *u.blocks[0].grid();
    let ncomp = u.blocks[0].ncomp();
    let mut out = Field::zeros(g, ncomp);
    let mut s = Field::zeros(g, ncomp);
    let one = Complex64::new(1.0, 0.0);
    for (k, bv) in v.iter() {
        let j = k - gap;
        if j < -1 {
            continue;
        }
        s.axpy(one, u.block(j)).expect("same grid");
        out.axpy(one, &s.mul(bv).expect("same grid"))
            .expect("same grid");
    }
    out
}

fn check_pair(u: &Field, v: &Field) -> Result<()> {
    u.grid().check_same(v.grid())?;
    if u.ncomp() != v.ncomp() {
        return Err(AcsError::DimensionMismatch(format!(
            "fields have {} and {} components",
            u.ncomp(),
            v.ncomp()
        )));
    }
    Ok(())
}

/// `T_u v = sum_k S_{k-gap} u * Delta_k v`.
pub fn paraproduct(u: &Field, v: &Field) -> Result<Field> {
    paraproduct_with(u, v, BonyConfig::default())
}

pub fn paraproduct_with(u: &Field, v: &Field, cfg: BonyConfig) -> Result<Field> {
    check_pair(u, v)?;
    validate(cfg)?;
    Ok(paraproduct_blocks(
        &lp_decompose(u),
        &lp_decompose(v),
        cfg.gap,
    ))
}

/// `R(u, v) = sum_{|i - k| < gap} Delta_i u * Delta_k v`.
pub fn remainder(u: &Field, v: &Field) -> Result<Field> {
    remainder_with(u, v, BonyConfig::default())
}

pub fn remainder_with(u: &Field, v: &Field, cfg: BonyConfig) -> Result<Field> {
    check_pair(u, v)?;
    validate(cfg)?;
    let gap = cfg.gap;
    Ok(product_sum(&lp_decompose(u), &lp_decompose(v), |i, k| {
        (i - k).abs() < gap
    }))
}

fn validate(cfg: BonyConfig) -> Result<()> {
    if cfg.gap < 1 {
        return Err(AcsError::InvalidParameter(format!(
            "paraproduct gap must be at least 1, got {}",
            cfg.gap
        )));
    }
    Ok(())
}

/// The three Bony pieces of a product `u v`.
#[derive(Debug, Clone)]
pub struct BonyTerms {
    pub t_u_v: Field,
    pub t_v_u: Field,
    pub remainder: Field,
}

impl BonyTerms {
    pub fn total(&self) -> Field {
        let mut out = self.t_u_v.add(&self.t_v_u).expect("same grid");
        out.axpy(Complex64::new(1.0, 0.0), &self.remainder)
            .expect("same grid");
        out
    }
}

pub fn bony_decompose(u: &Field, v: &Field, cfg: BonyConfig) -> Result<BonyTerms> {
    check_pair(u, v)?;
    validate(cfg)?;
    let part = DyadicPartition::new(u.grid());
    part.check(v)?;
    let du = lp_decompose_with(u, &part);
    let dv = lp_decompose_with(v, &part);
    let gap = cfg.gap;
    Ok(BonyTerms {
        t_u_v: paraproduct_blocks(&du, &dv, gap),
        t_v_u: paraproduct_blocks(&dv, &du, gap),
        remainder: product_sum(&du, &dv, |i, k| (i - k).abs() < gap),
    })
}

/// Bony pieces of `u * d_axis v`, the product of a rough coefficient with a
/// derivative.
pub fn rough_product_terms(u: &Field, v: &Field, axis: usize) -> Result<BonyTerms> {
    let dv = partial(v, axis)?;
    bony_decompose(u, &dv, BonyConfig::default())
}
