//! Chart and grid construction from the `[surface]` and `[grid]` tables.

use bonnetlab::zoo::{self, Poly2, SurfaceSpec, ZooEntry};
use bonnetlab::{Domain, GeomError, Grid, Jet3, SurfaceChart, V4};

use crate::config::{ConfigError, GridConfig, SurfaceConfig};

pub struct Surface {
    pub chart: SurfaceChart,
    /// Present for zoo entries; carries the certified facts.
    pub entry: Option<ZooEntry>,
}

fn config_error(e: GeomError) -> ConfigError {
    ConfigError::new(format!("surface: {e}"))
}

/// Chart `(P1, P2, P3, P4)` with polynomial components.
pub fn polynomial_chart(components: &[Vec<f64>], domain: [f64; 4], isothermal: bool) -> Result<SurfaceChart, GeomError> {
    let polys: Vec<Poly2> =
        components.iter().enumerate().map(|(k, flat)| Poly2::from_flat(&format!("polynomial[{k}]"), flat)).collect::<Result<_, _>>()?;
    let [u0, u1, v0, v1] = domain;
    if !(u1 > u0 && v1 > v0) {
        return Err(GeomError::BadParameter { name: "domain".into(), reason: "expected [u0, u1, v0, v1] with u0 < u1 and v0 < v1".into() });
    }
    let domain = Domain::new(u0, u1, v0, v1);
    let name = format!("polynomial({:?})", polys.iter().map(|p| &p.0).collect::<Vec<_>>());
    // polynomials extend past any boundary, so stencils may use a full diameter
    let margin = domain.diameter();
    Ok(SurfaceChart::analytic(name, domain, isothermal, move |u, v| {
        Jet3::from_fn(|a, b| {
            let (a, b) = (a as u32, b as u32);
            V4::new(polys[0].partial(a, b, u, v), polys[1].partial(a, b, u, v), polys[2].partial(a, b, u, v), polys[3].partial(a, b, u, v))
        })
    })
    .with_margin(margin))
}

pub fn build_surface(cfg: &SurfaceConfig) -> Result<Surface, ConfigError> {
    if let Some(name) = &cfg.name {
        let spec = SurfaceSpec { name: name.clone(), params: cfg.params.clone() };
        let entry = zoo::make(&spec).map_err(|e| match e {
            GeomError::UnknownEntry(n) => ConfigError::new(format!("surface: unknown zoo entry '{n}' (known: {})", zoo::NAMES.join(", "))),
            e => config_error(e),
        })?;
        return Ok(Surface { chart: entry.chart.clone(), entry: Some(entry) });
    }
    let components = cfg.polynomial.as_ref().ok_or_else(|| ConfigError::new("surface: missing 'name' or 'polynomial'"))?;
    let domain = cfg.domain.ok_or_else(|| ConfigError::new("surface.domain is required for polynomial charts"))?;
    let chart = polynomial_chart(components, domain, cfg.isothermal).map_err(config_error)?;
    Ok(Surface { chart, entry: None })
}

pub fn build_grid(chart: &SurfaceChart, cfg: &GridConfig) -> Result<Grid, ConfigError> {
    let [nu, nv] = cfg.size;
    let grid = match cfg.subdomain {
        None => Grid::for_chart(chart, nu, nv),
        Some([u0, u1, v0, v1]) => {
            let d = &chart.domain;
            let slack = 1e-12 * d.diameter();
            if !(d.contains(u0, v0, slack) && d.contains(u1, v1, slack)) {
                return Err(ConfigError::new(format!(
                    "grid.subdomain [{u0}, {u1}, {v0}, {v1}] leaves the chart domain [{}, {}, {}, {}]",
                    d.u0, d.u1, d.v0, d.v1
                )));
            }
            Grid::sub(Domain::new(u0, u1, v0, v1), nu, nv)
        }
    };
    grid.map_err(|e| ConfigError::new(format!("grid: {e}")))
}
