//! Tensor grid on the unit cube, multi-indices of the discrete Laplacian
//! eigenbasis, and potential sampling.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use crate::{Error, Result};

/// Uniform Dirichlet grid on `(0,1)^d` with `N` interior points per axis and
/// mesh size `h = 1/(N+1)`. `N` is restricted so that either the register
/// size `N` or the mesh density `h^{-1} = N+1` is a power of two, keeping
/// register and transform sizes aligned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    d: usize,
    n: usize,
}

impl GridSpec {
    pub fn new(d: usize, n: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::RejectedInput("d must be positive".into()));
        }
        if n < 2 || !(n.is_power_of_two() || (n + 1).is_power_of_two()) {
            return Err(Error::RejectedInput(format!(
                "N = {n} must satisfy N = 2^n or N = 2^n - 1, N >= 2"
            )));
        }
        // Reject N^d that does not fit the address space.
        let mut total: usize = 1;
        for _ in 0..d {
            total = total.checked_mul(n).ok_or_else(|| {
                Error::Capacity(format!("N^d = {n}^{d} overflows the index range"))
            })?;
        }
        Ok(GridSpec { d, n })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        1.0 / (self.n as f64 + 1.0)
    }

    /// Total dimension `N^d` of the discretized space.
    pub fn total_dim(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    /// Grid point for a flat index, row-major with axis 1 fastest.
    pub fn point(&self, flat: usize) -> Vec<f64> {
        let h = self.h();
        let mut rem = flat;
        (0..self.d)
            .map(|_| {
                let l = rem % self.n + 1;
                rem /= self.n;
                l as f64 * h
            })
            .collect()
    }

    /// Flat index of a multi-index (axis 1 fastest).
    pub fn flat_index(&self, k: &MultiIndex) -> usize {
        let mut idx = 0usize;
        for &ki in k.components().iter().rev() {
            idx = idx * self.n + (ki - 1);
        }
        idx
    }

    /// Number of fractional bits kept when sampling the potential,
    /// `ceil(log2 h^{-1})`.
    pub fn truncation_bits(&self) -> u32 {
        let inv_h = self.n + 1;
        (usize::BITS - (inv_h - 1).leading_zeros()) as u32
    }
}

/// Multi-index `k` of a Laplacian eigenpair, one component per axis, each in
/// `[1, N]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(grid: &GridSpec, k: Vec<usize>) -> Result<Self> {
        if k.len() != grid.d() {
            return Err(Error::RejectedInput(format!(
                "multi-index has {} components, grid has d = {}",
                k.len(),
                grid.d()
            )));
        }
        if let Some(&bad) = k.iter().find(|&&ki| ki < 1 || ki > grid.n()) {
            return Err(Error::RejectedInput(format!(
                "multi-index component {bad} outside [1, {}]",
                grid.n()
            )));
        }
        Ok(MultiIndex(k))
    }

    pub fn components(&self) -> &[usize] {
        &self.0
    }
}

/// Eigenvalue of the 1D operator `-1/2 Δ_h` for axis index `k`:
/// `(2/h^2) sin^2(pi h k / 2)`.
pub fn laplacian_eigenvalue_1d(h: f64, k: usize) -> f64 {
    let s = (PI * h * k as f64 / 2.0).sin();
    2.0 / (h * h) * s * s
}

/// Eigenvalue of `-1/2 Δ_h` for a multi-index: the sum of per-axis values.
pub fn laplacian_eigenvalue(grid: &GridSpec, k: &MultiIndex) -> f64 {
    let h = grid.h();
    k.components()
        .iter()
        .map(|&ki| laplacian_eigenvalue_1d(h, ki))
        .sum()
}

/// Analytic eigenpair of `-1/2 Δ_h`: the sine eigenvalue and the unit tensor
/// eigenvector with coordinates `prod_i sqrt(2h) sin(k_i l_i pi h)`.
pub fn laplacian_eigenpair(grid: &GridSpec, k: &MultiIndex) -> (f64, Vec<f64>) {
    let h = grid.h();
    let n = grid.n();
    let scale = (2.0 * h).sqrt();
    // Per-axis 1D eigenvectors.
    let axes: Vec<Vec<f64>> = k
        .components()
        .iter()
        .map(|&ki| {
            (1..=n)
                .map(|l| scale * (ki as f64 * l as f64 * PI * h).sin())
                .collect()
        })
        .collect();
    let mut vec = vec![0.0; grid.total_dim()];
    for (flat, entry) in vec.iter_mut().enumerate() {
        let mut rem = flat;
        let mut val = 1.0;
        for axis in &axes {
            val *= axis[rem % n];
            rem /= n;
        }
        *entry = val;
    }
    (laplacian_eigenvalue(grid, k), vec)
}

/// Continuum Laplacian eigenvalue `(pi^2/2) sum k_i^2` for a raw index tuple.
pub fn continuum_eigenvalue(k: &[usize]) -> f64 {
    let s: usize = k.iter().map(|&ki| ki * ki).sum();
    0.5 * s as f64 * PI * PI
}

/// Named potential families on the unit cube.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum PotentialFamily {
    Zero,
    Constant { value: f64 },
    /// `V(x) = amplitude * prod_i sin(pi x_i)`.
    ProductSine { amplitude: f64 },
    /// `V(x) = depth * prod_i 4 x_i (1 - x_i)`.
    Well { depth: f64 },
    /// Values supplied externally, one per grid point in row-major order
    /// (axis 1 fastest).
    Tabulated { values: Vec<f64> },
}

/// A potential together with its uniform bound `M` and the bound `C` on its
/// first partial derivatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    #[serde(flatten)]
    pub family: PotentialFamily,
    pub m_bound: f64,
    pub c_bound: f64,
}

impl Potential {
    pub fn zero() -> Self {
        Potential {
            family: PotentialFamily::Zero,
            m_bound: 0.0,
            c_bound: 0.0,
        }
    }

    pub fn constant(value: f64) -> Self {
        Potential {
            family: PotentialFamily::Constant { value },
            m_bound: value,
            c_bound: 0.0,
        }
    }

    pub fn product_sine(amplitude: f64) -> Self {
        Potential {
            family: PotentialFamily::ProductSine { amplitude },
            m_bound: amplitude,
            c_bound: amplitude * PI,
        }
    }

    pub fn well(depth: f64) -> Self {
        Potential {
            family: PotentialFamily::Well { depth },
            m_bound: depth,
            c_bound: 4.0 * depth,
        }
    }

    pub fn tabulated(values: Vec<f64>, m_bound: f64, c_bound: f64) -> Self {
        Potential {
            family: PotentialFamily::Tabulated { values },
            m_bound,
            c_bound,
        }
    }

    /// Read a tabulated potential from a file: either `N^d` little-endian
    /// f64 values (binary) or whitespace-separated decimal text.
    pub fn tabulated_from_file(path: &Path, m_bound: f64, c_bound: f64) -> Result<Self> {
        let bytes = fs::read(path)?;
        let values = if bytes.len() % 8 == 0 && !bytes.is_empty() {
            match std::str::from_utf8(&bytes) {
                Ok(text) => parse_text_values(text)?,
                Err(_) => bytes
                    .chunks_exact(8)
                    .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                    .collect(),
            }
        } else {
            let text = std::str::from_utf8(&bytes)
                .map_err(|_| Error::RejectedInput("tabulated file is neither f64 binary nor text".into()))?;
            parse_text_values(text)?
        };
        Ok(Potential::tabulated(values, m_bound, c_bound))
    }

    /// Evaluate at a point in `[0,1]^d`. Tabulated potentials are only
    /// defined on grid points and are handled in [`sample_potential`].
    pub fn evaluate(&self, point: &[f64]) -> f64 {
        match &self.family {
            PotentialFamily::Zero => 0.0,
            PotentialFamily::Constant { value } => *value,
            PotentialFamily::ProductSine { amplitude } => {
                amplitude * point.iter().map(|&x| (PI * x).sin()).product::<f64>()
            }
            PotentialFamily::Well { depth } => {
                depth * point.iter().map(|&x| 4.0 * x * (1.0 - x)).product::<f64>()
            }
            PotentialFamily::Tabulated { .. } => {
                unreachable!("tabulated potentials are sampled by index")
            }
        }
    }
}

fn parse_text_values(text: &str) -> Result<Vec<f64>> {
    text.split_whitespace()
        .map(|tok| {
            tok.parse::<f64>()
                .map_err(|e| Error::RejectedInput(format!("bad value {tok:?}: {e}")))
        })
        .collect()
}

/// Truncate toward zero at `bits` fractional bits.
pub fn truncate_bits(v: f64, bits: u32) -> f64 {
    let scale = (1u64 << bits) as f64;
    (v * scale).trunc() / scale
}

/// Sample the potential at all interior grid points, truncating each value
/// toward zero at `ceil(log2 h^{-1})` fractional bits. Values must lie in
/// `[0, M]` before truncation.
pub fn sample_potential(p: &Potential, grid: &GridSpec) -> Result<Vec<f64>> {
    let bits = grid.truncation_bits();
    let total = grid.total_dim();
    if let PotentialFamily::Tabulated { values } = &p.family {
        if values.len() != total {
            return Err(Error::RejectedInput(format!(
                "tabulated potential has {} values, grid needs {total}",
                values.len()
            )));
        }
    }
    let mut out = Vec::with_capacity(total);
    for flat in 0..total {
        let v = match &p.family {
            PotentialFamily::Tabulated { values } => values[flat],
            _ => p.evaluate(&grid.point(flat)),
        };
        if !(0.0..=p.m_bound).contains(&v) {
            return Err(Error::BoundViolation {
                point: grid.point(flat),
                value: v,
                bound: p.m_bound,
            });
        }
        out.push(truncate_bits(v, bits));
    }
    Ok(out)
}
