use std::fmt::Write as _;
use std::path::Path;

use fracoint::critval::{reference_table, simulate_cv_table, CriticalValueTable, CvSimConfig};
use fracoint::hualde::{estimate_rank_hualde, estimate_rank_hualde_with_threshold, RankTrace};
use fracoint::memory::{panel_memory, Estimator, Method};
use fracoint::nielsen::{estimate_rank_nielsen, DetCase, DEFAULT_D1};
use fracoint::series::{sigma_dispersion, simulate_arfima_stream, ArfimaSpec};
use fracoint::spectral::check_bandwidth;
use fracoint::xstar::{chi2_critical, xstar};
use fracoint::Panel;

use crate::config::{Cli, Command, EstimatorArg, Format, InputArgs, RunConfig};
use crate::error::{CliError, Result};
use crate::input::load_csv;
use crate::plot::line_chart_svg;
use crate::report::*;

/// A finished run: the report plus its text and CSV renderings.
#[derive(Debug, Clone)]
pub struct Output {
    pub report: Report,
    pub text: String,
    pub csv: String,
}

impl Output {
    pub fn json(&self) -> String {
        serde_json::to_string_pretty(&self.report).expect("reports serialize") + "\n"
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.text.clone(),
            Format::Json => self.json(),
            Format::Csv => self.csv.clone(),
        }
    }
}

struct Rendered {
    results: Results,
    text: String,
    csv: String,
    warnings: Vec<String>,
}

pub fn run(cli: &Cli) -> Result<Output> {
    let config = RunConfig::from_cli(cli);
    let r = match &cli.command {
        Command::Memory { input, bandwidths, estimator, mean } => {
            let est = match estimator {
                EstimatorArg::Lw => Estimator::LocalWhittle,
                EstimatorArg::Elw => Estimator::ExactLocalWhittle((*mean).into()),
            };
            memory(&load(input)?, bandwidths, est)?
        }
        Command::Xstar { input, bandwidths, columns, weights, alpha } => {
            xstar_cmd(&load(input)?, bandwidths, columns, weights, *alpha)?
        }
        Command::RankHualde { input, bandwidths, alpha, threshold } => {
            hualde(&load(input)?, bandwidths, *alpha, *threshold)?
        }
        Command::RankNielsen { input, d1, case, xi, cv_table, reps, seed } => {
            nielsen(&load(input)?, *d1, (*case).into(), *xi, cv_table.as_deref(), *reps, *seed)?
        }
        Command::SimulateCv { nobs, max_dim, d1, cases, levels, reps, seed, output } => {
            let cfg = CvSimConfig {
                nobs: *nobs,
                max_dim: *max_dim,
                d1: *d1,
                cases: cases.iter().map(|&c| c.into()).collect(),
                quantile_levels: levels.clone(),
                reps: *reps,
                seed: *seed,
            };
            simulate_cv(&cfg, output.as_deref())?
        }
        Command::Sigma { input, output, plot } => sigma(&load(input)?, output.as_deref(), plot.as_deref())?,
        Command::SimulatePanel { nobs, d, seed, levels, drift, scale, base, start_period, output } => {
            let level_spec = levels.then_some((*drift, *scale, *base));
            simulate_panel(*nobs, d, *seed, level_spec, *start_period, output.as_deref())?
        }
    };
    let mut text = r.text;
    for w in &r.warnings {
        let _ = writeln!(text, "warning: {w}");
    }
    let report = Report { command: r.results.command().to_string(), config, results: r.results, warnings: r.warnings };
    Ok(Output { report, text, csv: r.csv })
}

fn load(input: &InputArgs) -> Result<Panel> {
    let panel = load_csv(&input.input, &input.load_options())?;
    input.transform.apply(&panel)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| CliError::Write { path: path.into(), source })
}

fn check_bandwidths(panel: &Panel, bandwidths: &[usize]) -> Result<()> {
    if bandwidths.is_empty() {
        return Err(CliError::Usage("at least one bandwidth is required".into()));
    }
    for &m in bandwidths {
        check_bandwidth(panel.nobs(), m).map_err(CliError::core("bandwidth"))?;
    }
    Ok(())
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::LocalWhittle => "local Whittle",
        Method::ExactLocalWhittle => "exact local Whittle",
    }
}

fn row(cells: &[String], widths: &[usize]) -> String {
    let mut s = String::new();
    for (i, c) in cells.iter().enumerate() {
        if i == 0 {
            let _ = write!(s, "{c:<w$}", w = widths[0]);
        } else {
            let _ = write!(s, "  {c:>w$}", w = widths[i.min(widths.len() - 1)]);
        }
    }
    s.trim_end().to_string() + "\n"
}

fn memory(panel: &Panel, bandwidths: &[usize], est: Estimator) -> Result<Rendered> {
    check_bandwidths(panel, bandwidths)?;
    let method = match est {
        Estimator::LocalWhittle => Method::LocalWhittle,
        Estimator::ExactLocalWhittle(_) => Method::ExactLocalWhittle,
    };
    let per_m = bandwidths
        .iter()
        .map(|&m| panel_memory(panel, m, est))
        .collect::<fracoint::Result<Vec<_>>>()
        .map_err(CliError::core("memory"))?;
    let series: Vec<MemoryRow> = panel
        .labels()
        .iter()
        .enumerate()
        .map(|(j, label)| MemoryRow {
            label: label.clone(),
            d_hat: per_m.iter().map(|e| e[j].d_hat).collect(),
            std_err: per_m.iter().map(|e| e[j].std_err).collect(),
            at_boundary: per_m.iter().map(|e| e[j].at_boundary).collect(),
        })
        .collect();
    let mut warnings = Vec::new();
    for r in &series {
        for (k, &b) in r.at_boundary.iter().enumerate() {
            if b {
                warnings.push(format!("`{}` at m={}: estimate {} lies on the search boundary", r.label, bandwidths[k], fmt_num(r.d_hat[k])));
            }
        }
    }

    let lw = panel.labels().iter().map(String::len).max().unwrap_or(6).max(6);
    let widths = [lw, 10];
    let mut text = format!("Memory estimates ({}), T = {}\n", method_name(method), panel.nobs());
    let mut head = vec!["series".to_string()];
    head.extend(bandwidths.iter().map(|m| format!("m={m}")));
    text += &row(&head, &widths);
    for r in &series {
        let mut cells = vec![r.label.clone()];
        cells.extend(r.d_hat.iter().map(|&d| fmt_num(d)));
        text += &row(&cells, &widths);
    }
    let mut se = vec!["std.err".to_string()];
    se.extend(series[0].std_err.iter().map(|&s| fmt_num(s)));
    text += &row(&se, &widths);

    let mut csv = String::from("series");
    for m in bandwidths {
        let _ = write!(csv, ",m={m}");
    }
    csv.push('\n');
    for r in &series {
        csv += &r.label;
        for d in &r.d_hat {
            let _ = write!(csv, ",{d}");
        }
        csv.push('\n');
    }
    let results = Results::Memory(MemoryResults { method, nobs: panel.nobs(), bandwidths: bandwidths.to_vec(), series });
    Ok(Rendered { results, text, csv, warnings })
}

fn select_columns(panel: &Panel, columns: &[String]) -> Result<Panel> {
    if columns.is_empty() {
        return Ok(panel.clone());
    }
    let idx = columns
        .iter()
        .map(|c| panel.column_index(c).ok_or_else(|| CliError::Usage(format!("no column named `{c}`"))))
        .collect::<Result<Vec<_>>>()?;
    panel.select(&idx).map_err(CliError::core("xstar"))
}

fn xstar_cmd(panel: &Panel, bandwidths: &[usize], columns: &[String], weights: &[f64], alpha: f64) -> Result<Rendered> {
    let panel = select_columns(panel, columns)?;
    check_bandwidths(&panel, bandwidths)?;
    let cv = chi2_critical(alpha).map_err(CliError::core("xstar"))?;
    let w = (!weights.is_empty()).then_some(weights);
    let mut runs = Vec::new();
    let mut warnings = Vec::new();
    for &m in bandwidths {
        let r = xstar(&panel, m, w).map_err(CliError::core("xstar"))?;
        warnings.extend(r.warnings.iter().map(|s| format!("m={m}: {s}")));
        runs.push(XStarRun {
            m,
            d_hats: r.d_hats,
            weights: r.weights,
            d_tilde: r.d_tilde,
            s_star: r.s_star,
            x_star: r.x_star,
            p_value: r.p_value,
            reject: r.x_star > cv,
            discarded_imag: r.discarded_imag,
        });
    }
    let labels = panel.labels().to_vec();

    let mut text = format!(
        "X* test of no cointegration on [{}], T = {}, alpha = {}, critical value {}\n",
        labels.join(", "),
        panel.nobs(),
        fmt_num(alpha),
        fmt_num(cv)
    );
    for r in &runs {
        let _ = writeln!(
            text,
            "m={}: X* = {}, s* = {}, p-value = {}, d~ = {}, {}",
            r.m,
            fmt_num(r.x_star),
            fmt_num(r.s_star),
            fmt_num(r.p_value),
            fmt_num(r.d_tilde),
            if r.reject { "reject" } else { "do not reject" }
        );
        let d: Vec<String> = labels.iter().zip(&r.d_hats).map(|(l, d)| format!("{l} {}", fmt_num(*d))).collect();
        let w: Vec<String> = r.weights.iter().map(|&v| fmt_num(v)).collect();
        let _ = writeln!(text, "  d_hat: {}; weights: {}; dropped imaginary part {}", d.join(", "), w.join(", "), fmt_num(r.discarded_imag));
    }
    let mut csv = String::from("m,x_star,s_star,p_value,d_tilde,reject\n");
    for r in &runs {
        let _ = writeln!(csv, "{},{},{},{},{},{}", r.m, r.x_star, r.s_star, r.p_value, r.d_tilde, r.reject);
    }
    let results = Results::Xstar(XStarResults { columns: labels, alpha, critical_value: cv, runs });
    Ok(Rendered { results, text, csv, warnings })
}

fn hualde_run(trace: &RankTrace) -> HualdeRun {
    HualdeRun {
        m: trace.m,
        d_hats: trace.d_hats.clone(),
        r_hat: trace.r_hat,
        steps: trace
            .steps
            .iter()
            .map(|s| HualdeStep {
                step: s.step,
                common_trends: s.ct_labels.clone(),
                candidates: s
                    .candidates
                    .iter()
                    .map(|c| HualdeCandidate { label: c.label.clone(), x_star: c.stat, failure: c.failure.clone() })
                    .collect(),
                min_stat_label: s.min_stat_label.clone(),
                rejected: s.decision == fracoint::hualde::StepDecision::Rejected,
            })
            .collect(),
    }
}

fn hualde(panel: &Panel, bandwidths: &[usize], alpha: f64, threshold: Option<f64>) -> Result<Rendered> {
    check_bandwidths(panel, bandwidths)?;
    let mut runs = Vec::new();
    let mut warnings = Vec::new();
    let mut critical_value = 0.0;
    for &m in bandwidths {
        let trace = match threshold {
            Some(c) => estimate_rank_hualde_with_threshold(panel, m, c),
            None => estimate_rank_hualde(panel, m, alpha),
        }
        .map_err(CliError::core("rank-hualde"))?;
        critical_value = trace.critical_value;
        warnings.extend(trace.warnings.iter().map(|w| format!("m={m}: {w}")));
        runs.push(hualde_run(&trace));
    }
    let labels = panel.labels().to_vec();

    let lw = labels.iter().map(String::len).max().unwrap_or(4).max(6);
    let widths = [8, lw.max(9)];
    let mut text = format!(
        "Sequential rank estimate, T = {}, p = {}, critical value {}{}\n",
        panel.nobs(),
        labels.len(),
        fmt_num(critical_value),
        threshold.map_or(format!(" (alpha = {})", fmt_num(alpha)), |_| " (custom threshold)".into())
    );
    for run in &runs {
        let _ = writeln!(text, "\nm = {}: r_hat = {}", run.m, run.r_hat);
        let mut head = vec!["".to_string()];
        head.extend(labels.iter().cloned());
        text += &row(&head, &widths);
        let mut d = vec!["d_hat".to_string()];
        d.extend(run.d_hats.iter().map(|&v| fmt_num(v)));
        text += &row(&d, &widths);
        for s in &run.steps {
            let mut cells = vec![format!("step {}", s.step)];
            for l in &labels {
                let cell = if s.common_trends.contains(l) {
                    "CT".to_string()
                } else {
                    match s.candidates.iter().find(|c| &c.label == l) {
                        Some(HualdeCandidate { x_star: Some(x), .. }) => fmt_num(*x),
                        Some(_) => "failed".to_string(),
                        None => String::new(),
                    }
                };
                cells.push(cell);
            }
            text += &row(&cells, &widths);
            let _ = writeln!(
                text,
                "        {}",
                if s.rejected {
                    "all statistics exceed the critical value: reject".to_string()
                } else {
                    format!("not rejected; next CT {}", s.min_stat_label.as_deref().unwrap_or("-"))
                }
            );
        }
    }
    let mut csv = String::from("m,step,label,x_star,common_trend,rejected\n");
    for run in &runs {
        for s in &run.steps {
            for l in &labels {
                let ct = s.common_trends.contains(l);
                let x = s.candidates.iter().find(|c| &c.label == l).and_then(|c| c.x_star).map_or(String::new(), |v| v.to_string());
                let _ = writeln!(csv, "{},{},{l},{x},{ct},{}", run.m, s.step, s.rejected);
            }
        }
    }
    let alpha = threshold.is_none().then_some(alpha);
    Ok(Rendered { results: Results::RankHualde(HualdeResults { labels, alpha, critical_value, runs }), text, csv, warnings })
}

#[allow(clippy::too_many_arguments)]
fn nielsen(
    panel: &Panel,
    d1: f64,
    case: DetCase,
    xi: f64,
    cv_table: Option<&Path>,
    reps: Option<usize>,
    seed: u64,
) -> Result<Rendered> {
    let module = "rank-nielsen";
    let t = panel.nobs();
    let p = panel.nvars();
    let (table, source): (CriticalValueTable, String) = if let Some(path) = cv_table {
        (CriticalValueTable::read(path).map_err(CliError::core(module))?, path.display().to_string())
    } else if let Some(reps) = reps {
        let cfg = CvSimConfig {
            nobs: t,
            max_dim: p,
            d1,
            cases: vec![case],
            quantile_levels: vec![1.0 - xi],
            reps,
            seed,
        };
        (simulate_cv_table(&cfg).map_err(CliError::core(module))?, format!("simulated ({reps} replications, seed {seed})"))
    } else {
        match reference_table(t) {
            Some(table) if (d1 - DEFAULT_D1).abs() < 1e-12 => (table, format!("bundled table for T = {t}")),
            _ => {
                return Err(CliError::Usage(format!(
                    "no bundled critical values for T = {t}, d1 = {d1}; pass --cv-table or --reps"
                )))
            }
        }
    };
    let res = estimate_rank_nielsen(panel, d1, case, &table, xi).map_err(CliError::core(module))?;
    let rows: Vec<NielsenRow> = res
        .lambda_by_r0
        .iter()
        .enumerate()
        .map(|(r0, &lambda)| NielsenRow {
            r0,
            p_r: p - r0,
            lambda,
            critical_value: res.critical_values.get(r0).copied().or_else(|| table.lookup(case, xi, p - r0).ok()),
            reject: res.decisions.get(r0).copied(),
        })
        .collect();
    let mut warnings = Vec::new();
    if res.ceiling {
        warnings.push(format!("every r0 <= {} was rejected; r_hat is capped at p - 1", p - 1));
    }

    let mut text = format!(
        "Variance-ratio rank test, T = {t}, p = {p}, d1 = {}, case {case}, xi = {}\ncritical values: {source}\n",
        fmt_num(d1),
        fmt_num(xi)
    );
    let widths = [6, 10];
    text += &row(&["r0".into(), "p-r".into(), "Lambda".into(), "CV".into(), "decision".into()], &widths);
    for r in &rows {
        text += &row(
            &[
                r.r0.to_string(),
                r.p_r.to_string(),
                fmt_num(r.lambda),
                r.critical_value.map_or("-".into(), fmt_num),
                match r.reject {
                    Some(true) => "reject".into(),
                    Some(false) => "accept".into(),
                    None => "".into(),
                },
            ],
            &widths,
        );
    }
    let e: Vec<String> = res.eigenvalues.iter().map(|&v| fmt_num(v)).collect();
    let _ = writeln!(text, "eigenvalues: {}", e.join(" "));
    let _ = writeln!(text, "r_hat = {}", res.r_hat);

    let mut csv = String::from("r0,p_r,lambda,critical_value,reject\n");
    for r in &rows {
        let cv = r.critical_value.map_or(String::new(), |v| v.to_string());
        let rej = r.reject.map_or(String::new(), |v| v.to_string());
        let _ = writeln!(csv, "{},{},{},{cv},{rej}", r.r0, r.p_r, r.lambda);
    }
    let results = Results::RankNielsen(NielsenResults {
        labels: panel.labels().to_vec(),
        nobs: t,
        d1,
        det_case: case,
        xi,
        cv_source: source,
        eigenvalues: res.eigenvalues,
        rows,
        r_hat: res.r_hat,
        ceiling: res.ceiling,
    });
    Ok(Rendered { results, text, csv, warnings })
}

fn simulate_cv(cfg: &CvSimConfig, output: Option<&Path>) -> Result<Rendered> {
    let table = simulate_cv_table(cfg).map_err(CliError::core("simulate-cv"))?;
    let csv = table.to_csv_string();
    if let Some(path) = output {
        write_file(path, &csv)?;
    }
    let violations = table.monotonicity_violations();
    let warnings = violations.iter().map(|v| format!("monotonicity: {v}")).collect();

    let mut text = format!(
        "Simulated critical values, T = {}, d1 = {}, {} replications, seed {}\n",
        cfg.nobs,
        fmt_num(cfg.d1),
        cfg.reps,
        cfg.seed
    );
    let xis = table.xis();
    let widths = [6, 10];
    for case in table.cases() {
        let _ = writeln!(text, "\ncase {case}");
        let mut head = vec!["p-r".to_string()];
        head.extend(xis.iter().map(|&x| format!("xi={}", fmt_num(x))));
        text += &row(&head, &widths);
        for p_r in 1..=cfg.max_dim {
            let mut cells = vec![p_r.to_string()];
            cells.extend(xis.iter().map(|&x| table.lookup(case, x, p_r).map_or("-".into(), fmt_num)));
            text += &row(&cells, &widths);
        }
    }
    if let Some(path) = output {
        let _ = writeln!(text, "\ntable written to {}", path.display());
    }
    let cells = table.entries().iter().map(|e| CvCell { case: e.case, xi: e.xi, p_r: e.p_r, cv: e.cv }).collect();
    let results = Results::SimulateCv(SimulateCvResults {
        nobs: cfg.nobs,
        d1: cfg.d1,
        reps: cfg.reps,
        seed: cfg.seed,
        max_dim: cfg.max_dim,
        cells,
        monotonicity_violations: violations,
    });
    Ok(Rendered { results, text, csv, warnings })
}

fn sigma(panel: &Panel, output: Option<&Path>, plot: Option<&Path>) -> Result<Rendered> {
    let values = sigma_dispersion(panel).map_err(CliError::core("sigma"))?;
    let periods: Vec<String> = match panel.time_index() {
        Some(idx) => idx.to_vec(),
        None => (1..=panel.nobs()).map(|i| i.to_string()).collect(),
    };
    let mut csv = String::from("period,sigma\n");
    for (p, v) in periods.iter().zip(&values) {
        let _ = writeln!(csv, "{p},{v}");
    }
    if let Some(path) = output {
        write_file(path, &csv)?;
    }
    if let Some(path) = plot {
        write_file(path, &line_chart_svg("Cross-sectional dispersion", &periods, &values))?;
    }
    let mut text = format!("Cross-sectional dispersion of {} series\n", panel.nvars());
    let w = periods.iter().map(String::len).max().unwrap_or(6).max(6);
    text += &row(&["period".into(), "sigma".into()], &[w, 10]);
    for (p, v) in periods.iter().zip(&values) {
        text += &row(&[p.clone(), fmt_num(*v)], &[w, 10]);
    }
    Ok(Rendered { results: Results::Sigma(SigmaResults { periods, sigma: values }), text, csv, warnings: Vec::new() })
}

fn simulate_panel(
    nobs: usize,
    d: &[f64],
    seed: u64,
    levels: Option<(f64, f64, f64)>,
    start_period: Option<i64>,
    output: Option<&Path>,
) -> Result<Rendered> {
    let module = "simulate-panel";
    let labels: Vec<String> = (1..=d.len()).map(|i| format!("s{i}")).collect();
    let mut columns = Vec::with_capacity(d.len());
    for (i, &di) in d.iter().enumerate() {
        let spec = ArfimaSpec::fractional_noise(di, 1.0).map_err(CliError::core(module))?;
        let x = simulate_arfima_stream(nobs, &spec, seed, i as u64).map_err(CliError::core(module))?;
        let col = match levels {
            Some((drift, scale, base)) => {
                let mut acc = 0.0;
                x.iter()
                    .map(|v| {
                        acc += drift + scale * v;
                        base * acc.exp()
                    })
                    .collect()
            }
            None => x,
        };
        columns.push(col);
    }
    let mut csv = String::new();
    if start_period.is_some() {
        csv.push_str("period,");
    }
    csv += &labels.join(",");
    csv.push('\n');
    for t in 0..nobs {
        if let Some(s) = start_period {
            let _ = write!(csv, "{},", s + t as i64);
        }
        let cells: Vec<String> = columns.iter().map(|c| c[t].to_string()).collect();
        csv += &cells.join(",");
        csv.push('\n');
    }
    let mut text = format!("Simulated {} series of length {nobs}, d = [", d.len());
    text += &d.iter().map(|&v| fmt_num(v)).collect::<Vec<_>>().join(", ");
    text += "]\n";
    match output {
        Some(path) => {
            write_file(path, &csv)?;
            let _ = writeln!(text, "panel written to {}", path.display());
        }
        None => text += &csv,
    }
    let results = Results::SimulatePanel(SimulatePanelResults { nobs, labels, d: d.to_vec(), levels: levels.is_some() });
    Ok(Rendered { results, text, csv, warnings: Vec::new() })
}
