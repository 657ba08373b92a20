//! JSON report: provenance, one block per command, and pass/fail checks.

use serde::Serialize;
use serde_json::Value;

use bonnetlab::Grid;

use crate::config::{Command, SurfaceConfig, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `abs_error = |value - target| <= tolerance`.
    Within,
    /// `value <= target + tolerance`.
    AtMost,
    /// `value >= target - tolerance`.
    AtLeast,
}

/// A single pass/fail decision. `pass` is a function of the other fields.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub target: f64,
    pub tolerance: f64,
    pub abs_error: f64,
    pub comparison: Comparison,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, target: f64, tolerance: f64, comparison: Comparison) -> Check {
        let abs_error = (value - target).abs();
        let mut c = Check { name: name.into(), value, target, tolerance, abs_error, comparison, pass: false };
        c.pass = c.recompute();
        c
    }

    pub fn within(name: impl Into<String>, value: f64, target: f64, tolerance: f64) -> Check {
        Check::new(name, value, target, tolerance, Comparison::Within)
    }

    /// `value <= bound`.
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Check {
        Check::new(name, value, bound, 0.0, Comparison::AtMost)
    }

    /// `value >= bound`.
    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Check {
        Check::new(name, value, bound, 0.0, Comparison::AtLeast)
    }

    /// Decision from `value`, `target` and `tolerance` alone; NaN fails.
    pub fn recompute(&self) -> bool {
        match self.comparison {
            Comparison::Within => (self.value - self.target).abs() <= self.tolerance,
            Comparison::AtMost => self.value <= self.target + self.tolerance,
            Comparison::AtLeast => self.value >= self.target - self.tolerance,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub library_version: &'static str,
    pub surface: SurfaceConfig,
    pub chart: String,
    pub grid: Grid,
    pub commands: Vec<Command>,
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, Serialize)]
pub struct CommandBlock {
    pub command: Command,
    pub ok: bool,
    /// Module error that stopped the command, if any.
    pub error: Option<String>,
    pub checks: Vec<Check>,
    pub data: Value,
    /// Files written, relative to the output directory.
    pub artifacts: Vec<String>,
}

impl CommandBlock {
    pub fn new(command: Command) -> CommandBlock {
        CommandBlock { command, ok: true, error: None, checks: vec![], data: Value::Null, artifacts: vec![] }
    }

    pub fn failed(command: Command, error: String) -> CommandBlock {
        CommandBlock { ok: false, error: Some(error), ..CommandBlock::new(command) }
    }

    pub fn passed(&self) -> bool {
        self.ok && self.checks.iter().all(|c| c.pass)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub pass: bool,
    pub checks: usize,
    /// `command: check` for every failing check, plus `command: error` lines.
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub provenance: Provenance,
    pub commands: Vec<CommandBlock>,
    pub summary: Summary,
}

impl Report {
    pub fn new(provenance: Provenance, commands: Vec<CommandBlock>) -> Report {
        let mut failures = Vec::new();
        for b in &commands {
            if let Some(e) = &b.error {
                failures.push(format!("{}: error: {e}", b.command.name()));
            }
            for c in b.checks.iter().filter(|c| !c.pass) {
                failures.push(format!("{}: check '{}' failed (value {:e}, target {:e}, tolerance {:e})", b.command.name(), c.name, c.value, c.target, c.tolerance));
            }
        }
        let checks = commands.iter().map(|b| b.checks.len()).sum();
        Report { provenance, commands, summary: Summary { pass: failures.is_empty(), checks, failures } }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Grid-valued field thinned to at most `max_side` samples per axis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridField {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// `values[j][i]` at `(u[i], v[j])`.
    pub values: Vec<Vec<Value>>,
}

/// Evenly spaced indices into `0..n`, keeping both ends.
pub fn thin_indices(n: usize, max_side: usize) -> Vec<usize> {
    if n <= max_side {
        return (0..n).collect();
    }
    let m = max_side.max(2);
    let mut out: Vec<usize> = (0..m).map(|k| ((k * (n - 1)) as f64 / (m - 1) as f64).round() as usize).collect();
    out.dedup();
    out
}

pub fn downsample<T: Serialize>(grid: &Grid, vals: &[T], max_side: usize) -> GridField {
    let is = thin_indices(grid.nu, max_side);
    let js = thin_indices(grid.nv, max_side);
    GridField {
        u: is.iter().map(|&i| grid.u(i)).collect(),
        v: js.iter().map(|&j| grid.v(j)).collect(),
        values: js.iter().map(|&j| is.iter().map(|&i| serde_json::to_value(&vals[grid.idx(i, j)]).expect("serializable")).collect()).collect(),
    }
}

pub fn sup(vals: impl IntoIterator<Item = f64>) -> f64 {
    vals.into_iter().fold(0.0, |m: f64, x: f64| if m.is_nan() || x.is_nan() { f64::NAN } else { m.max(x) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn thinning_keeps_the_ends() {
        assert_eq!(thin_indices(5, 16), vec![0, 1, 2, 3, 4]);
        let t = thin_indices(64, 16);
        assert_eq!((t.len(), t[0], t[15]), (16, 0, 63));
    }

    #[test]
    fn nan_never_passes() {
        for c in [Check::within("x", f64::NAN, 0.0, 1.0), Check::at_most("x", f64::NAN, 1.0), Check::at_least("x", f64::NAN, 0.0)] {
            assert!(!c.pass);
        }
        assert!(sup([1.0, f64::NAN, 0.5]).is_nan());
    }

    proptest! {
        #[test]
        fn pass_is_recomputable(value in -10.0f64..10.0, target in -10.0f64..10.0, tol in 0.0f64..5.0, which in 0usize..3) {
            let cmp = [Comparison::Within, Comparison::AtMost, Comparison::AtLeast][which];
            let c = Check::new("p", value, target, tol, cmp);
            // through JSON and back
            let v: serde_json::Value = serde_json::to_value(&c).unwrap();
            let (x, t, e) = (v["value"].as_f64().unwrap(), v["target"].as_f64().unwrap(), v["tolerance"].as_f64().unwrap());
            let expect = match cmp {
                Comparison::Within => (x - t).abs() <= e,
                Comparison::AtMost => x <= t + e,
                Comparison::AtLeast => x >= t - e,
            };
            prop_assert_eq!(v["pass"].as_bool().unwrap(), expect);
            prop_assert_eq!(c.abs_error, (value - target).abs());
        }
    }
}
