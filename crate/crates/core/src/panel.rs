//! Balanced panels and their simulation from the AR(1) recursion.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::innovations::{InnovationSampler, InnovationSpec};
use crate::regime::{resolve_rho, RegimeSpec};
use crate::rng::substream;

/// A balanced `N × (T+1)` panel with `y[i][0] = 0`.
///
/// Storage is row-major by cross section: series `i` occupies
/// `y[i*(T+1) .. (i+1)*(T+1)]`. Innovations, when attached, are stored the
/// same way with `T` entries per series (`eps[i][t-1]` is `ε_{it}`).
#[derive(Debug, Clone, PartialEq)]
pub struct PanelData {
    n: usize,
    t_len: usize,
    y: Vec<f64>,
    eps: Option<Vec<f64>>,
    rho_used: Option<f64>,
    seed: Option<u64>,
    warnings: Vec<String>,
}

impl PanelData {
    /// Builds a panel from observed series (row-major, `T+1` values each).
    pub fn from_observations(n: usize, t_len: usize, y: Vec<f64>) -> Result<Self> {
        if n == 0 || t_len == 0 {
            return Err(Error::InvalidArgument(format!(
                "panel needs N >= 1 and T >= 1, got N={n}, T={t_len}"
            )));
        }
        if y.len() != n * (t_len + 1) {
            return Err(Error::UnbalancedPanel(format!(
                "expected {} values for N={n}, T={t_len}, got {}",
                n * (t_len + 1),
                y.len()
            )));
        }
        for (i, row) in y.chunks_exact(t_len + 1).enumerate() {
            if row[0] != 0.0 {
                return Err(Error::NonzeroInitial {
                    series: i,
                    value: row[0],
                });
            }
        }
        Ok(Self {
            n,
            t_len,
            y,
            eps: None,
            rho_used: None,
            seed: None,
            warnings: Vec::new(),
        })
    }

    /// Builds a panel by running the recursion on given innovations (`T` per series).
    pub fn from_innovations(rho: f64, n: usize, t_len: usize, eps: Vec<f64>) -> Result<Self> {
        if n == 0 || t_len == 0 || eps.len() != n * t_len {
            return Err(Error::InvalidArgument(format!(
                "need N*T = {} innovations, got {}",
                n * t_len,
                eps.len()
            )));
        }
        let mut y = vec![0.0; n * (t_len + 1)];
        for (row, e) in y.chunks_exact_mut(t_len + 1).zip(eps.chunks_exact(t_len)) {
            run_recursion(rho, e, row);
        }
        Ok(Self {
            n,
            t_len,
            y,
            eps: Some(eps),
            rho_used: Some(rho),
            seed: None,
            warnings: Vec::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t_len(&self) -> usize {
        self.t_len
    }

    pub fn rho_used(&self) -> Option<f64> {
        self.rho_used
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn has_innovations(&self) -> bool {
        self.eps.is_some()
    }

    /// `y[i][0..=T]`.
    pub fn series(&self, i: usize) -> &[f64] {
        let w = self.t_len + 1;
        &self.y[i * w..(i + 1) * w]
    }

    /// `ε_{i1}, ..., ε_{iT}` when attached.
    pub fn innovations(&self, i: usize) -> Option<&[f64]> {
        let t = self.t_len;
        self.eps.as_ref().map(|e| &e[i * t..(i + 1) * t])
    }

    pub fn observations(&self) -> &[f64] {
        &self.y
    }

    pub(crate) fn push_warning(&mut self, warning: String) {
        self.warnings.push(warning);
    }

    /// Checks `y[i][t] == ρ y[i][t-1] + ε_{it}` bit for bit.
    pub fn recursion_holds(&self) -> bool {
        let (Some(rho), Some(_)) = (self.rho_used, &self.eps) else {
            return false;
        };
        (0..self.n).all(|i| {
            let y = self.series(i);
            let e = self.innovations(i).unwrap();
            y[0] == 0.0 && (1..=self.t_len).all(|t| y[t] == rho * y[t - 1] + e[t - 1])
        })
    }
}

#[inline]
pub(crate) fn run_recursion(rho: f64, eps: &[f64], y: &mut [f64]) {
    y[0] = 0.0;
    let mut prev = 0.0;
    for (slot, &e) in y[1..].iter_mut().zip(eps) {
        prev = rho * prev + e;
        *slot = prev;
    }
}

/// Generates series `index` of the panel keyed by `seed`.
#[inline]
pub(crate) fn simulate_section(
    rho: f64,
    sampler: &InnovationSampler,
    seed: u64,
    index: usize,
    y: &mut [f64],
    eps: &mut [f64],
) {
    let mut rng = substream(seed, index as u64);
    sampler.fill(&mut rng, eps);
    run_recursion(rho, eps, y);
}

/// Simulates a balanced panel with `ρ = resolve_rho(spec, T)`.
///
/// Series `i` draws its innovations from the substream `(seed, i)`, so the
/// output is identical for any number of rayon workers.
pub fn simulate_panel(
    spec: &RegimeSpec,
    innovations: &InnovationSpec,
    n: usize,
    t_len: usize,
    seed: u64,
    keep_innovations: bool,
) -> Result<PanelData> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    if t_len < 2 {
        return Err(Error::InvalidArgument("T must be at least 2".into()));
    }
    let rho = resolve_rho(spec, t_len)?;
    let sampler = innovations.sampler()?;

    let mut y = vec![0.0; n * (t_len + 1)];
    let mut eps = vec![0.0; n * t_len];
    y.par_chunks_mut(t_len + 1)
        .zip(eps.par_chunks_mut(t_len))
        .enumerate()
        .for_each(|(i, (row, e))| simulate_section(rho, &sampler, seed, i, row, e));

    Ok(PanelData {
        n,
        t_len,
        y,
        eps: keep_innovations.then_some(eps),
        rho_used: Some(rho),
        seed: Some(seed),
        warnings: Vec::new(),
    })
}
