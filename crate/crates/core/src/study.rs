//! Mesh-refinement studies: run a case over a sequence of levels, collect
//! error rows and orders, and render them as CSV or markdown tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analysis::{commuting_residuals, error_eh, error_lambda, order, ConvergenceReport, ErrorRow, Orders};
use crate::error::{ConfigError, SystemError};
use crate::mesh::{unit_square_at_level, TriMesh};
use crate::problems::{ManufacturedCase, Regime};
use crate::system::{assemble, inf_sup_witness, solve, Solution};
use crate::wg::{project_mh, PrimalSpace, Quadrature, WgSpace};

pub const DEFAULT_LEVELS: [usize; 6] = [1, 2, 4, 8, 16, 32];

/// A solve whose relative residual exceeds this is reported as degraded.
pub const RESIDUAL_LIMIT: f64 = 1e-8;

pub const CSV_HEADER: &str = "inv_h,eh,eh_order,l0,l0_order,lb,lb_order,ln,ln_order,residual";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Markdown,
    #[default]
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn markdown(self) -> bool {
        matches!(self, Format::Markdown | Format::Both)
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "markdown" | "md" => Ok(Format::Markdown),
            "both" => Ok(Format::Both),
            other => Err(format!("unknown format `{other}` (expected csv, markdown or both)")),
        }
    }
}

fn default_k() -> usize {
    2
}

fn default_levels() -> Vec<usize> {
    DEFAULT_LEVELS.to_vec()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub case: String,
    #[serde(default = "default_k")]
    pub k: usize,
    /// Values of `1/h`.
    #[serde(default = "default_levels")]
    pub levels: Vec<usize>,
    /// Path prefix for output files; `None` means the case name.
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub emit_diagnostics: bool,
}

impl RunConfig {
    pub fn new(case: impl Into<String>) -> Self {
        Self {
            case: case.into(),
            k: default_k(),
            levels: default_levels(),
            output: None,
            format: Format::default(),
            emit_diagnostics: false,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.k < 2 {
            return Err(ConfigError::UnsupportedDegree(self.k));
        }
        validate_levels(&self.levels)
    }

    pub fn output_prefix(&self) -> &str {
        self.output.as_deref().unwrap_or(&self.case)
    }
}

pub fn validate_levels(levels: &[usize]) -> Result<(), ConfigError> {
    if levels.is_empty() {
        return Err(ConfigError::EmptyLevels);
    }
    for &n in levels {
        if !n.is_power_of_two() {
            return Err(ConfigError::NotPowerOfTwo(n));
        }
    }
    for w in levels.windows(2) {
        if w[1] <= w[0] {
            return Err(ConfigError::NotIncreasing { prev: w[0], next: w[1] });
        }
    }
    Ok(())
}

/// Per-level consistency checks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LevelDiagnostics {
    /// `max_T ‖ℒ_w(Q_h u) - 𝒬_h(ℒu)‖_T`.
    pub commuting: f64,
    /// `b(v, ρ_v)` for `v = 𝒬_h u`.
    pub witness_lhs: f64,
    /// The matching (constraint-reduced) `|||v|||₁²`.
    pub witness_rhs: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelOutcome {
    pub inv_h: usize,
    pub row: Option<ErrorRow>,
    pub residual: Option<f64>,
    pub diagnostics: Option<LevelDiagnostics>,
    pub warnings: Vec<String>,
    pub failure: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StudyResult {
    pub report: ConvergenceReport,
    pub levels: Vec<LevelOutcome>,
}

impl StudyResult {
    /// Any level failed or solved with a residual above [`RESIDUAL_LIMIT`].
    pub fn degraded(&self) -> bool {
        self.levels.iter().any(|l| l.failure.is_some() || l.residual.is_some_and(|r| r.is_nan() || r > RESIDUAL_LIMIT))
    }
}

/// Everything produced by one solve on one mesh.
pub struct LevelSolve {
    pub mesh: TriMesh,
    pub space: WgSpace,
    pub primal: PrimalSpace,
    pub quad: Quadrature,
    pub solution: Solution,
    pub row: ErrorRow,
    pub warnings: Vec<String>,
}

/// Assemble and solve `case` at `1/h = inv_h` and measure the errors.
pub fn solve_level(case: &ManufacturedCase, k: usize, inv_h: usize) -> Result<LevelSolve, SystemError> {
    let mesh = unit_square_at_level(inv_h.trailing_zeros());
    let space = WgSpace::new(&mesh, k, &case.bc).map_err(|e| match e {
        crate::wg::SpaceError::Mesh(m) => SystemError::Mesh(m),
        crate::wg::SpaceError::Fem(f) => SystemError::Fem(f),
    })?;
    let primal = PrimalSpace::new(&mesh, k)?;
    let quad = Quadrature::for_degree(k)?;
    let sys = assemble(&space, &primal, &mesh, &case.a, &case.load_data(), &case.bc, &quad)?;
    let solution = solve(&sys)?;
    let eh = error_eh(&solution.u, |p| (case.u)(p), &mesh, &primal, &quad)?;
    let lambda = error_lambda(&solution.lambda, &mesh, &space, &quad);
    let row = ErrorRow::new(inv_h, eh, lambda);
    Ok(LevelSolve { mesh, space, primal, quad, solution, row, warnings: sys.warnings })
}

fn diagnostics(case: &ManufacturedCase, level: &LevelSolve) -> Result<LevelDiagnostics, SystemError> {
    let k = level.space.k();
    let full = WgSpace::unconstrained(&level.mesh, k).map_err(|e| match e {
        crate::wg::SpaceError::Mesh(m) => SystemError::Mesh(m),
        crate::wg::SpaceError::Fem(f) => SystemError::Fem(f),
    })?;
    let f = case.f.clone();
    let commuting = commuting_residuals(
        |p| (case.u)(p),
        |p| (case.grad_u)(p),
        move |p| -f(p),
        &case.a,
        &level.mesh,
        &full,
        &level.primal,
        &level.quad,
    )?
    .into_iter()
    .fold(0.0, f64::max);
    let v = project_mh(|p| (case.u)(p), &level.mesh, &level.primal, &level.quad)?;
    let w = inf_sup_witness(&v, &level.space, &level.primal, &level.mesh, &case.a, &level.quad)?;
    Ok(LevelDiagnostics { commuting, witness_lhs: w.lhs, witness_rhs: w.rhs })
}

/// Orders between consecutive rows whose levels double; other rows get none.
pub fn attach_orders(rows: &mut [ErrorRow]) {
    for i in (1..rows.len()).rev() {
        let (c, f) = (rows[i - 1].clone(), &mut rows[i]);
        f.orders = (f.inv_h == 2 * c.inv_h).then(|| Orders {
            eh: order(c.eh, f.eh),
            l0: order(c.l0, f.l0),
            lb: order(c.lb, f.lb),
            ln: order(c.ln, f.ln),
        });
    }
    if let Some(first) = rows.first_mut() {
        first.orders = None;
    }
}

/// Run `case` over `levels` (values of `1/h`). Failing levels are recorded
/// and skipped.
pub fn run_case(
    case: &ManufacturedCase,
    k: usize,
    levels: &[usize],
    emit_diagnostics: bool,
) -> Result<StudyResult, ConfigError> {
    if k < 2 {
        return Err(ConfigError::UnsupportedDegree(k));
    }
    validate_levels(levels)?;
    let mut outcomes = Vec::with_capacity(levels.len());
    for &inv_h in levels {
        let mut out =
            LevelOutcome { inv_h, row: None, residual: None, diagnostics: None, warnings: Vec::new(), failure: None };
        match solve_level(case, k, inv_h) {
            Ok(level) => {
                out.residual = Some(level.solution.residual);
                out.row = Some(level.row.clone());
                out.warnings = level.warnings.clone();
                if emit_diagnostics {
                    match diagnostics(case, &level) {
                        Ok(d) => out.diagnostics = Some(d),
                        Err(e) => out.warnings.push(format!("diagnostics failed: {e}")),
                    }
                }
            }
            Err(e) => out.failure = Some(e.to_string()),
        }
        outcomes.push(out);
    }
    let mut rows: Vec<ErrorRow> = outcomes.iter().filter_map(|o| o.row.clone()).collect();
    attach_orders(&mut rows);
    let residuals = outcomes.iter().filter_map(|o| o.residual).collect();
    Ok(StudyResult {
        report: ConvergenceReport { case: case.name.to_string(), bc: case.bc.clone(), k, rows, residuals },
        levels: outcomes,
    })
}

/// Locale-independent scientific notation with 7 significant digits.
fn sci(x: f64) -> String {
    format!("{x:.6e}")
}

fn order_cell(o: Option<f64>) -> String {
    o.map(|v| format!("{v:.4}")).unwrap_or_default()
}

pub fn to_csv(report: &ConvergenceReport) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for (i, r) in report.rows.iter().enumerate() {
        let o = r.orders.unwrap_or_default();
        let residual = report.residuals.get(i).map(|v| sci(*v)).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            r.inv_h,
            sci(r.eh),
            order_cell(o.eh),
            sci(r.l0),
            order_cell(o.l0),
            sci(r.lb),
            order_cell(o.lb),
            sci(r.ln),
            order_cell(o.ln),
            residual
        );
    }
    s
}

/// Four significant digits, fixed notation when reasonable.
pub fn sig4(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let mag = x.abs().log10().floor() as i32;
    if (-5..4).contains(&mag) {
        let decimals = (3 - mag).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.3e}")
    }
}

fn md_order(o: Option<f64>) -> String {
    o.map(|v| format!("{v:.3}")).unwrap_or_default()
}

pub fn to_markdown(report: &ConvergenceReport, title: &str) -> String {
    let mut s = format!("### {title}\n\n");
    s.push_str("| 1/h | ‖e_h‖₀ | order | ‖λ₀‖₀ | order | ‖λ_b‖₀ | order | ‖λ_n‖₀ | order |\n");
    s.push_str("|---|---|---|---|---|---|---|---|---|\n");
    for r in &report.rows {
        let o = r.orders.unwrap_or_default();
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {} | {} | {} | {} | {} |",
            r.inv_h,
            sig4(r.eh),
            md_order(o.eh),
            sig4(r.l0),
            md_order(o.l0),
            sig4(r.lb),
            md_order(o.lb),
            sig4(r.ln),
            md_order(o.ln)
        );
    }
    s
}

/// A table with one `e_h` column pair per solution sharing one configuration.
pub fn to_markdown_combined(reports: &[&ConvergenceReport], labels: &[&str], title: &str) -> String {
    let mut s = format!("### {title}\n\n| 1/h |");
    for l in labels {
        let _ = write!(s, " ‖e_h‖₀ ({l}) | order |");
    }
    s.push_str("\n|---|");
    s.push_str(&"---|---|".repeat(labels.len()));
    s.push('\n');
    let mut by_level: BTreeMap<usize, Vec<Option<&ErrorRow>>> = BTreeMap::new();
    for (i, rep) in reports.iter().enumerate() {
        for r in &rep.rows {
            by_level.entry(r.inv_h).or_insert_with(|| vec![None; reports.len()])[i] = Some(r);
        }
    }
    for (inv_h, cols) in by_level {
        let _ = write!(s, "| {inv_h} |");
        for c in cols {
            match c {
                Some(r) => {
                    let _ = write!(s, " {} | {} |", sig4(r.eh), md_order(r.orders.and_then(|o| o.eh)));
                }
                None => s.push_str(" | |"),
            }
        }
        s.push('\n');
    }
    s
}

/// Outcome of checking one study against its regime's thresholds.
#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub case: String,
    pub table: u32,
    pub regime: Regime,
    pub pass: bool,
    pub detail: String,
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Orders of rows with `1/h` in `(lo, hi]`, per component.
fn orders_in(rows: &[ErrorRow], lo: usize, hi: usize) -> [Vec<f64>; 4] {
    let mut out: [Vec<f64>; 4] = Default::default();
    for r in rows.iter().filter(|r| r.inv_h > lo && r.inv_h <= hi) {
        if let Some(o) = r.orders {
            for (v, x) in out.iter_mut().zip([o.eh, o.l0, o.lb, o.ln]) {
                if let Some(x) = x {
                    v.push(x);
                }
            }
        }
    }
    out
}

/// Thresholds by regime:
/// - machine accuracy: every norm `<= 1e-10` for `1/h <= 8`;
/// - mixed: mean `e_h` order over 8→16→32 in `[0.95, 1.6]`, mean λ orders in `[1.6, 2.3]`;
/// - Cauchy: final `e_h` order `>= 0.95`, final λ orders `>= 1.4`;
/// - Cauchy, primal only: final `e_h` order `>= 0.95`.
pub fn judge(case: &ManufacturedCase, result: &StudyResult) -> Verdict {
    let rows = &result.report.rows;
    let (pass, detail) = match case.regime {
        Regime::MachineAccuracy => {
            let coarse: Vec<&ErrorRow> = rows.iter().filter(|r| r.inv_h <= 8).collect();
            let worst = coarse.iter().map(|r| r.max_norm()).fold(0.0, f64::max);
            (!coarse.is_empty() && worst <= 1e-10, format!("max norm for 1/h <= 8: {worst:.3e}"))
        }
        Regime::MixedBoundary => {
            let [eh, l0, lb, ln] = orders_in(rows, 8, 32);
            let m = [mean(&eh), mean(&l0), mean(&lb), mean(&ln)];
            let ok = eh.len() == 2
                && m[0].is_some_and(|v| (0.95..=1.6).contains(&v))
                && m[1..].iter().all(|v| v.is_some_and(|v| (1.6..=2.3).contains(&v)));
            (
                ok,
                format!(
                    "mean orders 8→32: e_h {} λ₀ {} λ_b {} λ_n {}",
                    fmt_opt(m[0]),
                    fmt_opt(m[1]),
                    fmt_opt(m[2]),
                    fmt_opt(m[3])
                ),
            )
        }
        Regime::Cauchy => {
            let last = rows.last().and_then(|r| r.orders);
            let ok = last.is_some_and(|o| {
                o.eh.is_some_and(|v| v >= 0.95) && [o.l0, o.lb, o.ln].iter().all(|v| v.is_some_and(|v| v >= 1.4))
            });
            let o = last.unwrap_or_default();
            (
                ok,
                format!(
                    "final orders: e_h {} λ₀ {} λ_b {} λ_n {}",
                    fmt_opt(o.eh),
                    fmt_opt(o.l0),
                    fmt_opt(o.lb),
                    fmt_opt(o.ln)
                ),
            )
        }
        Regime::CauchyPrimal => {
            let last = rows.last().and_then(|r| r.orders).unwrap_or_default();
            (last.eh.is_some_and(|v| v >= 0.95), format!("final e_h order {}", fmt_opt(last.eh)))
        }
    };
    Verdict {
        case: case.name.to_string(),
        table: case.table,
        regime: case.regime,
        pass: pass && !result.degraded(),
        detail,
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.3}")).unwrap_or_else(|| "-".to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::LambdaNorms;
    use crate::problems::get_case;

    #[test]
    fn config_defaults() {
        let c = RunConfig::new("constant_one");
        assert_eq!(c.k, 2);
        assert_eq!(c.levels, DEFAULT_LEVELS.to_vec());
        assert_eq!(c.format, Format::Both);
        assert_eq!(c.output_prefix(), "constant_one");
        assert!(c.validate().is_ok());
    }

    #[test]
    fn level_validation() {
        assert_eq!(validate_levels(&[]), Err(ConfigError::EmptyLevels));
        assert_eq!(validate_levels(&[1, 3]), Err(ConfigError::NotPowerOfTwo(3)));
        assert_eq!(validate_levels(&[4, 2]), Err(ConfigError::NotIncreasing { prev: 4, next: 2 }));
        assert!(validate_levels(&[1, 2, 4]).is_ok());
    }

    #[test]
    fn csv_layout() {
        let mut rows = vec![
            ErrorRow::new(2, 0.04, LambdaNorms { l0: 0.1, lb: 0.2, ln: 0.3 }),
            ErrorRow::new(4, 0.01, LambdaNorms { l0: 0.025, lb: 0.05, ln: 0.075 }),
        ];
        attach_orders(&mut rows);
        let report =
            ConvergenceReport { case: "x".into(), bc: Default::default(), k: 2, rows, residuals: vec![1e-15, 2e-15] };
        let csv = to_csv(&report);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines[1], "2,4.000000e-2,,1.000000e-1,,2.000000e-1,,3.000000e-1,,1.000000e-15");
        assert!(lines[2].starts_with("4,1.000000e-2,2.0000,"));
        let md = to_markdown(&report, "t");
        assert!(md.contains("| 4 | 0.01000 | 2.000 |"));
    }

    #[test]
    fn sig4_formatting() {
        assert_eq!(sig4(0.001604), "0.001604");
        assert_eq!(sig4(0.07907), "0.07907");
        assert_eq!(sig4(2.243e-15), "2.243e-15");
        assert_eq!(sig4(0.7059), "0.7059");
    }

    #[test]
    fn constant_case_study() {
        let case = get_case("constant_one").unwrap();
        let result = run_case(&case, 2, &[1, 2, 4], true).unwrap();
        assert!(!result.degraded());
        let v = judge(&case, &result);
        assert!(v.pass, "{}", v.detail);
        for l in &result.levels {
            let d = l.diagnostics.unwrap();
            assert!(d.commuting < 1e-12);
            assert!((d.witness_lhs - d.witness_rhs).abs() <= 1e-12);
        }
    }
}
