use std::fmt::Write as _;

use walklab::barrier::{barrier_row, delayed_row, table2};
use walklab::montecarlo::{
    compare_report, simulate as run_simulation, simulate_with_threads, BarrierMode, SimulationConfig,
};
use walklab::series::{p_from_coupling, series_dump, Branch, SeriesKind};
use walklab::verify::{self, Selection, Suite, VerifyOptions};
use walklab::walk::{distribution_row, table1, TriangleRow};
use walklab::{exact, Coupling, Error, LatticeDistribution, Number, Odds, Result, Rule, StepProbability, Weight};

use crate::output::{Cell, Report};
use crate::{BranchArg, DistArgs, KindArg, SeriesArgs, SimBarrierArg, SimulateArgs, StepArgs, SuiteArg, VerifyArgs};

/// Decimal notation selects floating point; `a/b` and integers stay exact.
fn is_decimal(text: &str) -> bool {
    let t = text.trim();
    t.contains(['.', 'e', 'E']) || t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("nan")
}

fn parse_real(text: &str) -> Result<f64> {
    text.trim()
        .parse()
        .map_err(|_| Error::Parse(walklab::ParseError::Rational(text.to_string())))
}

pub fn parse_probability(text: &str) -> Result<StepProbability> {
    if is_decimal(text) {
        StepProbability::real(parse_real(text)?)
    } else {
        StepProbability::exact(exact::parse_rational(text)?)
    }
}

pub fn parse_coupling(text: &str) -> Result<Coupling> {
    if is_decimal(text) {
        Coupling::real(parse_real(text)?)
    } else {
        Coupling::exact(exact::parse_rational(text)?)
    }
}

fn branch(b: BranchArg) -> Branch {
    match b {
        BranchArg::Plus => Branch::Plus,
        BranchArg::Minus => Branch::Minus,
    }
}

/// Resolves `--p` / `--x` and echoes them into `report`.
fn step_probability(args: &StepArgs, report: &mut Report) -> Result<StepProbability> {
    let p = match (&args.p, &args.x) {
        (Some(p), _) => {
            report.arg("p", Cell::text(p));
            parse_probability(p)?
        }
        (None, Some(x)) => {
            report.arg("x", Cell::text(x));
            report.arg("branch", Cell::text(format!("{:?}", args.branch).to_lowercase()));
            p_from_coupling(&parse_coupling(x)?, branch(args.branch))?
        }
        (None, None) => return Err(Error::InvalidConfig("one of --p or --x is required".into())),
    };
    report.arg("mode", Cell::text(if p.is_exact() { "exact" } else { "real" }));
    report.arg("p_value", Cell::Real(p.value()));
    Ok(p)
}

fn number_cells(v: &Number) -> [Cell; 3] {
    match v {
        Number::Exact(q) => [
            Cell::Big(q.numer().to_string()),
            Cell::Big(q.denom().to_string()),
            Cell::Real(exact::to_f64(q)),
        ],
        Number::Real(r) => [Cell::Empty, Cell::Empty, Cell::Real(*r)],
    }
}

fn parse_rule(text: &str) -> Result<Rule> {
    match text {
        "none" | "free" => Ok(Rule::Free),
        "delayed" => Ok(Rule::DelayedBarrier),
        other => match other.parse::<u32>() {
            Ok(0) => Err(Error::InvalidBarrier(0)),
            Ok(a) => Ok(Rule::Barrier(a)),
            Err(_) => Err(Error::InvalidConfig(format!(
                "--barrier expects none, delayed or a positive integer, got {other:?}"
            ))),
        },
    }
}

fn row<W: Weight>(n: u32, rule: Rule, odds: &Odds<W>) -> Result<LatticeDistribution<W>> {
    match rule {
        Rule::Free => Ok(distribution_row(n, odds)),
        Rule::Barrier(a) => barrier_row(n, a, odds),
        Rule::DelayedBarrier => Ok(delayed_row(n, odds)),
    }
}

pub fn dist(a: &DistArgs) -> Result<Report> {
    if a.table1 || a.table2 {
        return triangle(a);
    }
    let mut report = Report::new("dist", vec!["n", "k", "numerator", "denominator", "value"]);
    let n = a.n.ok_or_else(|| Error::InvalidConfig("--n is required".into()))?;
    report.arg("n", Cell::UInt(n.into()));
    let p = step_probability(&a.step, &mut report)?;
    let rule = parse_rule(&a.barrier)?;
    report.arg("barrier", Cell::text(&a.barrier));
    let records = match p.odds_exact() {
        Some(odds) => row(n, rule, &odds)?.records(),
        None => row(n, rule, &p.odds_real())?.records(),
    };
    for r in records {
        report.push(vec![
            Cell::UInt(r.n.into()),
            Cell::Int(r.k),
            Cell::opt_big(r.numerator),
            Cell::opt_big(r.denominator),
            Cell::Real(r.real_value),
        ]);
    }
    Ok(report)
}

fn triangle(a: &DistArgs) -> Result<Report> {
    let (name, rows) = if a.table1 {
        ("table1", table1(a.max_n))
    } else {
        if a.max_n == 0 {
            return Err(Error::InvalidConfig("--table2 needs --max-n >= 1".into()));
        }
        ("table2", table2(a.max_n))
    };
    // Return probabilities in the free table, absorption probabilities with the barrier.
    let underlined = |n: u32, k: i64| {
        if a.table2 {
            n % 2 == 1 && k == -1
        } else {
            n.is_multiple_of(2) && k == 0
        }
    };
    let mut report = Report::new("dist", vec!["n", "k", "entry", "factor", "underlined"]);
    report.arg("table", Cell::text(name));
    report.arg("max_n", Cell::UInt(a.max_n.into()));
    for r in &rows {
        for (k, v) in &r.entries {
            report.push(vec![
                Cell::UInt(r.n.into()),
                Cell::Int(*k),
                Cell::Big(v.to_string()),
                Cell::text(format!("2^-{}", r.exponent)),
                Cell::Bool(underlined(r.n, *k)),
            ]);
        }
    }
    let legend = if a.table2 {
        "[v]: absorption probability after step n+1, times 2^-n"
    } else {
        "[v]: return probability after step n, times 2^-n"
    };
    report.text = Some(triangle_text(&rows, a.max_n, underlined, legend));
    Ok(report)
}

/// Centred triangle, one row per `n`, entries at `k = -n, -n+2, ..., n`.
fn triangle_text(rows: &[TriangleRow], max_n: u32, underlined: impl Fn(u32, i64) -> bool, legend: &str) -> String {
    let show = |n: u32, k: i64, v: &num_bigint::BigInt| {
        if underlined(n, k) {
            format!("[{v}]")
        } else {
            v.to_string()
        }
    };
    let longest = rows
        .iter()
        .flat_map(|r| r.entries.iter().map(|(k, v)| show(r.n, *k, v).len()))
        .max()
        .unwrap_or(1);
    let width = (longest + 2).next_multiple_of(2);
    let full = (max_n as usize + 1) * width;
    let mut out = String::new();
    for r in rows {
        let mut line = " ".repeat((max_n - r.n) as usize * width / 2);
        for (k, v) in &r.entries {
            let _ = write!(line, "{:^width$}", show(r.n, *k, v));
        }
        let _ = writeln!(out, "{line:<full$}  x 2^-{}", r.exponent);
    }
    if rows.iter().any(|r| r.entries.iter().any(|(k, _)| underlined(r.n, *k))) {
        out.push_str(legend);
        out.push('\n');
    }
    out
}

pub fn series(a: &SeriesArgs) -> Result<Report> {
    let kind = match a.kind {
        KindArg::Gamma => SeriesKind::Gamma,
        KindArg::Zeta => SeriesKind::Zeta,
    };
    let x = parse_coupling(&a.x)?;
    let mut report = Report::new(
        "series",
        vec![
            "l",
            "term_numerator",
            "term_denominator",
            "term",
            "partial_sum_numerator",
            "partial_sum_denominator",
            "partial_sum",
            "closed_form_numerator",
            "closed_form_denominator",
            "closed_form",
            "stirling",
        ],
    );
    report.arg("kind", Cell::text(kind.to_string()));
    report.arg("x", Cell::text(&a.x));
    report.arg("mode", Cell::text(if x.is_exact() { "exact" } else { "real" }));
    report.arg("max_n", Cell::UInt(a.max_n.into()));
    report.arg("with_stirling", Cell::Bool(a.with_stirling));
    for rec in series_dump(kind, &x, a.max_n, a.with_stirling)? {
        let mut row = vec![Cell::UInt(rec.l.into())];
        row.extend(number_cells(&rec.term_value));
        row.extend(number_cells(&rec.partial_sum_value));
        match &rec.closed_form_value {
            Some(v) => row.extend(number_cells(v)),
            None => row.extend([Cell::Empty, Cell::Empty, Cell::Empty]),
        }
        row.push(Cell::opt_real(rec.stirling_estimate));
        report.push(row);
    }
    Ok(report)
}

pub fn simulate(a: &SimulateArgs) -> Result<Report> {
    let mut report = Report::new(
        "simulate",
        vec![
            "statistic",
            "index",
            "count",
            "fraction",
            "ci_low",
            "ci_high",
            "expected",
            "z_score",
        ],
    );
    let p = step_probability(&a.step, &mut report)?;
    let barrier = match a.barrier {
        SimBarrierArg::None => BarrierMode::None,
        SimBarrierArg::Delayed => BarrierMode::DelayedAtOrigin,
    };
    let config = SimulationConfig::new(p.value(), a.steps, a.walks, a.seed, barrier).with_chunk_size(a.chunk_size);
    let sim = match a.threads {
        Some(t) => simulate_with_threads(&config, t)?,
        None => run_simulation(&config)?,
    };
    report.arg("steps", Cell::UInt(a.steps.into()));
    report.arg("walks", Cell::UInt(a.walks));
    report.arg("seed", Cell::UInt(a.seed));
    report.arg(
        "barrier",
        Cell::text(match barrier {
            BarrierMode::None => "none",
            BarrierMode::DelayedAtOrigin => "delayed",
        }),
    );
    report.arg("chunk_size", Cell::UInt(a.chunk_size));
    report.arg("rng", Cell::text(&sim.rng));
    let summary = compare_report(&sim, f64::INFINITY);
    for (e, d) in sim.estimates.iter().zip(&summary.deviations) {
        let statistic = serde_json::to_value(e.statistic)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default();
        report.push(vec![
            Cell::Text(statistic),
            e.index.map_or(Cell::Empty, Cell::Int),
            Cell::UInt(e.count),
            Cell::Real(e.value),
            Cell::Real(e.ci_low),
            Cell::Real(e.ci_high),
            Cell::Real(d.expected),
            Cell::Real(d.z_score),
        ]);
    }
    Ok(report)
}

pub fn verify(a: &VerifyArgs) -> Result<Report> {
    let selection = match a.suite {
        SuiteArg::All => Selection::All,
        SuiteArg::Exact => Selection::Only(Suite::Exact),
        SuiteArg::Asymptotic => Selection::Only(Suite::Asymptotic),
        SuiteArg::Stochastic => Selection::Only(Suite::Stochastic),
    };
    let options = VerifyOptions {
        max_n: a.max_n,
        walks: a.walks,
        seed: a.seed,
        z_threshold: a.z_threshold,
    };
    let checks = verify::run(selection, &options)?;
    let mut report = Report::new("verify", vec!["suite", "name", "passed", "detail"]);
    report.arg("suite", Cell::text(format!("{:?}", a.suite).to_lowercase()));
    report.arg("max_n", Cell::UInt(a.max_n.into()));
    report.arg("walks", Cell::UInt(a.walks));
    report.arg("seed", Cell::UInt(a.seed));
    report.arg("z_threshold", Cell::Real(a.z_threshold));
    let mut text = String::new();
    for c in &checks {
        let suite = format!("{:?}", c.suite).to_lowercase();
        let _ = writeln!(
            text,
            "{}  {suite:<10}  {}  ({})",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
        report.push(vec![
            Cell::Text(suite),
            Cell::text(&c.name),
            Cell::Bool(c.passed),
            Cell::text(&c.detail),
        ]);
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    let _ = writeln!(text, "{} checks, {failed} failed", checks.len());
    report.text = Some(text);
    report.checks = Some(checks);
    Ok(report)
}
