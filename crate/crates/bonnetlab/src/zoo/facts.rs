//! Machine-checkable claims attached to zoo entries.

use serde::Serialize;

use super::ZooEntry;
use crate::error::Result;
use crate::grid::Grid;
use crate::invariants::PointGeometry;
use crate::mixed::{hopf_dbar_residual, isothermicity_classify, mixed_form_field, parallel_h_residual, DEFAULT_ISO_EPS};
use crate::Sign;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Fact {
    FlatNormalBundle,
    ParallelH,
    Isothermic,
    Minimal,
    SuperconformalPlus,
    StronglyIsoIsothermic,
    VerticallyHarmonicMinus,
    TotallyUmbilic,
    MixedFormsAgree,
}

impl Fact {
    /// Survives composition with an ambient inversion. Inversions reverse
    /// the orientation of R^4, which swaps the two signs, so only sign-free
    /// facts qualify.
    pub fn conformally_invariant(self) -> bool {
        matches!(self, Fact::FlatNormalBundle | Fact::Isothermic | Fact::StronglyIsoIsothermic | Fact::TotallyUmbilic)
    }

    /// Survives a homothety.
    pub fn similarity_invariant(self) -> bool {
        true
    }

    /// Name of the grid test that certifies the fact.
    pub fn test_name(self) -> &'static str {
        match self {
            Fact::FlatNormalBundle => "sup |K_N| / scale^2",
            Fact::ParallelH => "sup |normal part of dH| / scale",
            Fact::Isothermic => "isothermal chart and sup |v_vec| / scale",
            Fact::Minimal => "sup |H| / scale",
            Fact::SuperconformalPlus => "sup B_plus / scale",
            Fact::StronglyIsoIsothermic => "sup |d*Omega| / scale over both signs",
            Fact::VerticallyHarmonicMinus => "sup |dbar phi_minus (normal part)| / scale",
            Fact::TotallyUmbilic => "sup max(B_minus, B_plus) / scale",
            Fact::MixedFormsAgree => "sup |Omega_plus - Omega_minus|",
        }
    }

    fn limit(self) -> f64 {
        match self {
            Fact::FlatNormalBundle | Fact::Minimal | Fact::SuperconformalPlus | Fact::TotallyUmbilic | Fact::Isothermic => 1e-9,
            Fact::ParallelH => 1e-7,
            Fact::StronglyIsoIsothermic => DEFAULT_ISO_EPS,
            Fact::VerticallyHarmonicMinus => 1e-5,
            Fact::MixedFormsAgree => 1e-6,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FactCheck {
    pub fact: Fact,
    pub test: &'static str,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

/// Grid side used by [`certify`].
pub const CERTIFY_GRID: usize = 16;

fn sup(vals: impl IntoIterator<Item = f64>) -> f64 {
    vals.into_iter().fold(0.0, f64::max)
}

fn measure(entry: &ZooEntry, fact: Fact, grid: &Grid, geoms: &[PointGeometry]) -> Result<f64> {
    let chart = &entry.chart;
    let pts = grid.map(|u, v| (u, v));
    let per_point = |f: &(dyn Fn(f64, f64) -> Result<f64> + Sync)| -> Result<f64> {
        use rayon::prelude::*;
        let v: Vec<f64> = pts.par_iter().map(|&(u, v)| f(u, v)).collect::<Result<_>>()?;
        Ok(sup(v))
    };
    Ok(match fact {
        Fact::FlatNormalBundle => sup(geoms.iter().map(|g| g.sff.normal_k().abs() / g.curvature_scale().powi(2))),
        Fact::Minimal => sup(geoms.iter().map(|g| g.sff.h.norm() / g.curvature_scale())),
        Fact::SuperconformalPlus => sup(geoms.iter().map(|g| g.sff.b(Sign::Plus) / g.curvature_scale())),
        Fact::TotallyUmbilic => sup(geoms.iter().map(|g| g.sff.b(Sign::Minus).max(g.sff.b(Sign::Plus)) / g.curvature_scale())),
        Fact::Isothermic => {
            if !chart.isothermal {
                f64::INFINITY
            } else {
                sup(geoms.iter().map(|g| g.sff.v_vec.norm() / g.curvature_scale()))
            }
        }
        Fact::ParallelH => per_point(&|u, v| {
            let s = PointGeometry::at(chart, u, v)?.curvature_scale();
            Ok(parallel_h_residual(chart, u, v)? / s)
        })?,
        Fact::VerticallyHarmonicMinus => per_point(&|u, v| {
            let s = PointGeometry::at(chart, u, v)?.curvature_scale();
            Ok(hopf_dbar_residual(chart, u, v, Sign::Minus)? / s)
        })?,
        Fact::StronglyIsoIsothermic => {
            let cls = isothermicity_classify(chart, grid, DEFAULT_ISO_EPS)?;
            if !cls.strong() {
                f64::INFINITY
            } else {
                let scale = |k: usize| geoms[k].curvature_scale();
                sup(cls
                    .flags
                    .iter()
                    .enumerate()
                    .flat_map(|(k, f)| [f.costar_minus, f.costar_plus].into_iter().flatten().map(move |x| x.abs() / scale(k))))
            }
        }
        Fact::MixedFormsAgree => {
            let m = mixed_form_field(chart, grid, Sign::Minus)?;
            let p = mixed_form_field(chart, grid, Sign::Plus)?;
            sup(m.omega.iter().zip(p.omega.iter()).filter_map(|(a, b)| match (a, b) {
                (Some(a), Some(b)) => Some((a[0] - b[0]).abs().max((a[1] - b[1]).abs())),
                _ => None,
            }))
        }
    })
}

/// Re-verify every fact of an entry on a `CERTIFY_GRID`-square grid.
pub fn certify(entry: &ZooEntry) -> Result<Vec<FactCheck>> {
    let grid = Grid::for_chart(&entry.chart, CERTIFY_GRID, CERTIFY_GRID)?;
    let geoms = grid.try_map(|u, v| PointGeometry::at(&entry.chart, u, v))?;
    entry
        .facts
        .iter()
        .map(|&fact| {
            let value = measure(entry, fact, &grid, &geoms)?;
            let limit = fact.limit();
            Ok(FactCheck { fact, test: fact.test_name(), value, limit, pass: value < limit })
        })
        .collect()
}
