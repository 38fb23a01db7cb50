//! Shared problem setup: gauge selection and the enrichment oracle.

use super::iterative::sparse_null_space;
use super::kernel::ZERO_TOL;
use crate::assembly::{assemble_coupling, build_multiplier, MultiplierKind};
use crate::error::{Error, Result};
use crate::gauge::{
    build_graph, enrich_cohomology, gauge_partition, GaugePartition, NeighborOrder,
};
use crate::spaces::{DiscreteSpace, SplineComplex};
use crate::sparse::CsrMatrix;
use std::fmt;
use std::str::FromStr;

/// Whether the potential is gauged by a spanning tree.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum GaugeMode {
    #[default]
    Tree,
    None,
}

impl FromStr for GaugeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tree" => Ok(GaugeMode::Tree),
            "none" => Ok(GaugeMode::None),
            _ => Err(Error::Config(format!(
                "unknown gauge '{s}' (expected tree or none)"
            ))),
        }
    }
}

impl fmt::Display for GaugeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GaugeMode::Tree => "tree",
            GaugeMode::None => "none",
        })
    }
}

impl FromStr for MultiplierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(MultiplierKind::Standard),
            "enriched" => Ok(MultiplierKind::Enriched),
            _ => Err(Error::Config(format!(
                "unknown multiplier '{s}' (expected standard or enriched)"
            ))),
        }
    }
}

impl fmt::Display for MultiplierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MultiplierKind::Standard => "standard",
            MultiplierKind::Enriched => "enriched",
        })
    }
}

/// Mortar constraint `G = G¹ − G²` for `kind`, or `None` without multipliers.
pub fn mortar_constraint(
    complex: &SplineComplex,
    space1: &DiscreteSpace,
    kind: MultiplierKind,
) -> Result<Option<CsrMatrix>> {
    let mult = build_multiplier(complex, kind)?;
    if mult.dim() == 0 {
        return Ok(None);
    }
    Ok(Some(
        assemble_coupling(complex, space1, &mult)?.constraint(),
    ))
}

/// Tree-cotree partition completed by cohomology enrichment.
///
/// The oracle measures the null space of `K_CC + s·G_CᵀG_C` against
/// `M_CC`, where `G` is the enriched constraint (if any) and `s` balances
/// the two terms.
pub fn gauge_space(
    complex: &SplineComplex,
    space1: &DiscreteSpace,
    stiffness: &CsrMatrix,
    mass: &CsrMatrix,
    enriched: Option<&CsrMatrix>,
    order: NeighborOrder,
) -> Result<GaugePartition> {
    let graph = build_graph(complex, space1);
    let partition = gauge_partition(&graph, order);
    enrich_cohomology(&partition, |cotree| {
        let mut a = stiffness.select(cotree, cotree);
        if let Some(g) = enriched {
            let rows: Vec<usize> = (0..g.nrows()).collect();
            let gc = g.select(&rows, cotree);
            let gg = gc.transpose().matmul(&gc);
            let s = diag_mean(&a) / diag_mean(&gg).max(f64::MIN_POSITIVE);
            a = a.add_scaled(&gg, s);
        }
        Ok(sparse_null_space(&a, &mass.select(cotree, cotree), ZERO_TOL)?.0)
    })
}

fn diag_mean(a: &CsrMatrix) -> f64 {
    let d: Vec<f64> = (0..a.nrows())
        .map(|i| a.get(i, i))
        .filter(|v| *v != 0.0)
        .collect();
    d.iter().map(|v| v.abs()).sum::<f64>() / d.len().max(1) as f64
}
