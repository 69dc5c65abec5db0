//! `pdwg` — run weak Galerkin refinement studies on the manufactured-problem
//! catalog and write CSV / markdown tables.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pdwg::problems::{get_case, list_cases, validate_case, ManufacturedCase};
use pdwg::study::{
    judge, run_case, to_csv, to_markdown, to_markdown_combined, Format, RunConfig, StudyResult, Verdict,
};

const OUTPUT_DIR_ENV: &str = "PDWG_OUTPUT_DIR";

#[derive(Parser)]
#[command(name = "pdwg", version, about = "Primal-dual weak Galerkin refinement studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one case over a sequence of mesh levels.
    Run(RunArgs),
    /// Run every catalog case with its boundary configuration.
    Suite(SuiteArgs),
    /// List catalog cases.
    List {
        #[arg(long)]
        json: bool,
    },
    /// Check the catalog's source terms and fluxes by finite differences.
    Validate {
        /// Cases to check (all if omitted).
        cases: Vec<String>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    case: Option<String>,
    #[arg(short, long)]
    k: Option<usize>,
    /// Comma-separated values of 1/h.
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<usize>>,
    /// Output path prefix (without extension).
    #[arg(short, long)]
    output: Option<String>,
    #[arg(long)]
    format: Option<Format>,
    /// Also compute commuting-property and inf-sup witness checks per level.
    #[arg(long)]
    diagnostics: bool,
    /// Output directory (overrides $PDWG_OUTPUT_DIR).
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct SuiteArgs {
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16,32")]
    levels: Vec<usize>,
    #[arg(long, default_value = "both")]
    format: Format,
    /// Output directory (overrides $PDWG_OUTPUT_DIR).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Only run cases of these tables.
    #[arg(long, value_delimiter = ',')]
    tables: Option<Vec<u32>>,
}

/// Exit statuses.
mod status {
    pub const CONFIG: u8 = 1;
    pub const VALIDATION: u8 = 2;
    pub const DEGRADED: u8 = 3;
}

struct Failure(u8, String);

impl Failure {
    fn config(msg: impl std::fmt::Display) -> Self {
        Failure(status::CONFIG, msg.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Suite(args) => cmd_suite(args),
        Command::List { json } => cmd_list(json),
        Command::Validate { cases } => cmd_validate(&cases),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

fn output_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("."))
}

fn load_config(args: &RunArgs) -> Result<RunConfig, Failure> {
    let mut config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
            serde_json::from_str::<RunConfig>(&text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))?
        }
        None => {
            RunConfig::new(args.case.clone().ok_or_else(|| Failure::config("either --config or --case is required"))?)
        }
    };
    if let Some(case) = &args.case {
        config.case = case.clone();
    }
    if let Some(k) = args.k {
        config.k = k;
    }
    if let Some(levels) = &args.levels {
        config.levels = levels.clone();
    }
    if let Some(output) = &args.output {
        config.output = Some(output.clone());
    }
    if let Some(format) = args.format {
        config.format = format;
    }
    config.emit_diagnostics |= args.diagnostics;
    config.validate().map_err(Failure::config)?;
    Ok(config)
}

fn validated(name: &str) -> Result<ManufacturedCase, Failure> {
    let case = get_case(name).map_err(Failure::config)?;
    validate_case(&case).map_err(|e| Failure(status::VALIDATION, e.to_string()))?;
    Ok(case)
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Failure::config(format!("{}: {e}", parent.display())))?;
    }
    fs::write(path, contents).map_err(|e| Failure::config(format!("{}: {e}", path.display())))
}

fn title(case: &ManufacturedCase) -> String {
    format!("u = {}, {}, {}", case.formula, coefficient_label(case), case.bc.describe())
}

fn coefficient_label(case: &ManufacturedCase) -> &'static str {
    if case.is_constant_coefficient() {
        "a = I"
    } else {
        "a = [1+x², xy/4; xy/4, 1+y²]"
    }
}

fn report_levels(result: &StudyResult) {
    for l in &result.levels {
        for w in &l.warnings {
            eprintln!("warning: 1/h = {}: {w}", l.inv_h);
        }
        if let Some(f) = &l.failure {
            eprintln!("error: 1/h = {}: {f}", l.inv_h);
        }
        if let Some(d) = &l.diagnostics {
            eprintln!(
                "diagnostics: 1/h = {}: commuting {:.3e}, witness b(v,ρ) = {:.6e} vs |||v|||₁² = {:.6e}",
                l.inv_h, d.commuting, d.witness_lhs, d.witness_rhs
            );
        }
    }
}

fn cmd_run(args: RunArgs) -> Result<(), Failure> {
    let config = load_config(&args)?;
    let case = validated(&config.case)?;
    let result = run_case(&case, config.k, &config.levels, config.emit_diagnostics).map_err(Failure::config)?;
    report_levels(&result);

    let base = output_dir(args.out_dir).join(config.output_prefix());
    let md = to_markdown(&result.report, &title(&case));
    if config.format.csv() {
        write(&base.with_extension("csv"), &to_csv(&result.report))?;
    }
    if config.format.markdown() {
        write(&base.with_extension("md"), &md)?;
    }
    if config.emit_diagnostics {
        let json = serde_json::to_string_pretty(&result.levels).expect("serializable");
        write(&base.with_extension("diagnostics.json"), &json)?;
    }
    print!("{md}");
    if result.degraded() {
        return Err(Failure(status::DEGRADED, format!("solver degraded on case {}", case.name)));
    }
    Ok(())
}

fn cmd_suite(args: SuiteArgs) -> Result<(), Failure> {
    pdwg::study::validate_levels(&args.levels).map_err(Failure::config)?;
    let dir = output_dir(args.out_dir);
    let mut cases = list_cases();
    if let Some(tables) = &args.tables {
        cases.retain(|c| tables.contains(&c.table));
        if cases.is_empty() {
            return Err(Failure::config(format!("no cases for tables {tables:?}")));
        }
    }
    for case in &cases {
        validate_case(case).map_err(|e| Failure(status::VALIDATION, e.to_string()))?;
    }

    let mut by_table: BTreeMap<u32, Vec<(ManufacturedCase, StudyResult)>> = BTreeMap::new();
    for case in cases {
        let result = run_case(&case, 2, &args.levels, false).map_err(Failure::config)?;
        report_levels(&result);
        by_table.entry(case.table).or_default().push((case, result));
    }

    let mut verdicts: Vec<Verdict> = Vec::new();
    let mut degraded = false;
    let mut summary = String::from("| table | case | regime | status | detail |\n|---|---|---|---|---|\n");
    for (table, entries) in &by_table {
        let stem = format!("table_{table:02}");
        if entries.len() == 1 {
            let (case, result) = &entries[0];
            if args.format.csv() {
                write(&dir.join(format!("{stem}.csv")), &to_csv(&result.report))?;
            }
            if args.format.markdown() {
                write(&dir.join(format!("{stem}.md")), &to_markdown(&result.report, &title(case)))?;
            }
        } else {
            for (case, result) in entries {
                if args.format.csv() {
                    write(&dir.join(format!("{stem}_{}.csv", case.name)), &to_csv(&result.report))?;
                }
            }
            if args.format.markdown() {
                let reports: Vec<_> = entries.iter().map(|(_, r)| &r.report).collect();
                let labels: Vec<_> = entries.iter().map(|(c, _)| c.formula).collect();
                let (case, _) = &entries[0];
                let heading = format!("{}, {}", coefficient_label(case), case.bc.describe());
                let mut md = to_markdown_combined(&reports, &labels, &heading);
                for (case, result) in entries {
                    md.push('\n');
                    md.push_str(&to_markdown(&result.report, &title(case)));
                }
                write(&dir.join(format!("{stem}.md")), &md)?;
            }
        }
        for (case, result) in entries {
            degraded |= result.degraded();
            let v = judge(case, result);
            summary.push_str(&format!(
                "| {} | {} | {} | {} | {} |\n",
                v.table,
                v.case,
                v.regime,
                if v.pass { "PASS" } else { "FAIL" },
                v.detail
            ));
            println!("{} table {:>2} {:<24} {}", if v.pass { "PASS" } else { "FAIL" }, v.table, v.case, v.detail);
            verdicts.push(v);
        }
    }
    write(&dir.join("summary.md"), &summary)?;
    write(&dir.join("summary.json"), &serde_json::to_string_pretty(&verdicts).expect("serializable"))?;

    if degraded {
        return Err(Failure(status::DEGRADED, "one or more solves degraded".into()));
    }
    let failed: Vec<_> = verdicts.iter().filter(|v| !v.pass).map(|v| v.case.as_str()).collect();
    if !failed.is_empty() {
        return Err(Failure(status::VALIDATION, format!("thresholds not met: {}", failed.join(", "))));
    }
    Ok(())
}

fn cmd_list(json: bool) -> Result<(), Failure> {
    let cases = list_cases();
    if json {
        let rows: Vec<_> = cases
            .iter()
            .map(|c| {
                serde_json::json!({
                    "name": c.name,
                    "table": c.table,
                    "u": c.formula,
                    "constant_coefficient": c.is_constant_coefficient(),
                    "regime": c.regime,
                    "bc": c.bc,
                })
            })
            .collect();
        println!("{}", serde_json::to_string_pretty(&rows).expect("serializable"));
        return Ok(());
    }
    for c in &cases {
        println!(
            "{:<24} table {:>2}  {:<18} {:<6} {:<17} {}",
            c.name,
            c.table,
            c.formula,
            if c.is_constant_coefficient() { "a=I" } else { "a(x)" },
            c.regime,
            c.bc.describe()
        );
    }
    Ok(())
}

fn cmd_validate(names: &[String]) -> Result<(), Failure> {
    let cases = if names.is_empty() {
        list_cases()
    } else {
        names.iter().map(|n| get_case(n).map_err(Failure::config)).collect::<Result<_, _>>()?
    };
    let mut failed = Vec::new();
    for case in &cases {
        match validate_case(case) {
            Ok(r) => println!(
                "ok   {:<24} source {:.2e}  gradient {:.2e}  flux {:.2e}",
                case.name, r.source_deviation, r.gradient_deviation, r.flux_deviation
            ),
            Err(e) => {
                println!("FAIL {:<24} {e}", case.name);
                failed.push(case.name);
            }
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure(status::VALIDATION, format!("{} case(s) failed validation", failed.len())))
    }
}
