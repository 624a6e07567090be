//! File formats: graph and portfolio ingestion, run configuration, and
//! iteration-table / CSV emission.
//!
//! All data files are plain text, whitespace-separated, with `#` comment
//! lines allowed anywhere. CSV output uses `.` as the decimal separator,
//! `,` as the delimiter, LF line endings, and round-trip float formatting.

use serde::Deserialize;

use crate::alm::AlmIterRecord;
use crate::instances::{Graph, PortfolioData};

/// Parse failure with a 1-based line number.
#[derive(Debug, Clone, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError { line, message: message.into() }
    }
}

/// Numbered non-comment, non-empty lines of a data file.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_num<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T, ParseError> {
    tok.parse()
        .map_err(|_| ParseError::new(line, format!("cannot parse {what} from {tok:?}")))
}

/// Graph file: first line `n m`, then `m` lines `i j w` with 1-based
/// vertex indices. Weights may be negative.
pub fn parse_graph(text: &str) -> Result<Graph, ParseError> {
    let mut lines = data_lines(text);
    let (lno, header) = lines
        .next()
        .ok_or_else(|| ParseError::new(1, "empty graph file"))?;
    let mut toks = header.split_whitespace();
    let n: usize = parse_num(toks.next().ok_or_else(|| ParseError::new(lno, "missing vertex count"))?, lno, "vertex count")?;
    let m: usize = parse_num(toks.next().ok_or_else(|| ParseError::new(lno, "missing edge count"))?, lno, "edge count")?;

    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        let (lno, line) = lines
            .next()
            .ok_or_else(|| ParseError::new(lno, format!("expected {m} edges, file ended early")))?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(ParseError::new(lno, format!("expected \"i j w\", got {line:?}")));
        }
        let i: usize = parse_num(toks[0], lno, "vertex index")?;
        let j: usize = parse_num(toks[1], lno, "vertex index")?;
        let w: f64 = parse_num(toks[2], lno, "edge weight")?;
        if i == j {
            return Err(ParseError::new(lno, format!("self-loop at vertex {i}")));
        }
        if i == 0 || j == 0 || i > n || j > n {
            return Err(ParseError::new(lno, format!("edge ({i},{j}) out of range for {n} vertices")));
        }
        edges.push((i, j, w));
    }
    if let Some((lno, line)) = lines.next() {
        return Err(ParseError::new(lno, format!("unexpected trailing data {line:?}")));
    }
    Graph::new(n, edges).map_err(|e| ParseError::new(0, e.to_string()))
}

/// Inverse of [`parse_graph`].
pub fn write_graph(g: &Graph) -> String {
    let mut out = format!("{} {}\n", g.n, g.edges.len());
    for (i, j, w) in &g.edges {
        out.push_str(&format!("{i} {j} {w}\n"));
    }
    out
}

/// Portfolio file: line 1 `n kappa return_bound`, line 2 the `n` means,
/// line 3 the `n` upper bounds, then `n` rows of the covariance matrix.
/// The matrix must be symmetric up to `10⁻⁸`.
pub fn parse_portfolio(text: &str) -> Result<PortfolioData, ParseError> {
    let mut lines = data_lines(text);
    let (lno, header) = lines
        .next()
        .ok_or_else(|| ParseError::new(1, "empty portfolio file"))?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 3 {
        return Err(ParseError::new(lno, "expected \"n kappa return_bound\""));
    }
    let n: usize = parse_num(toks[0], lno, "dimension")?;
    let kappa: usize = parse_num(toks[1], lno, "cardinality")?;
    let bound: f64 = parse_num(toks[2], lno, "return bound")?;
    if kappa >= n {
        return Err(ParseError::new(lno, format!("kappa={kappa} must be smaller than n={n}")));
    }

    let mut read_row = |what: &str| -> Result<(usize, Vec<f64>), ParseError> {
        let (lno, line) = lines
            .next()
            .ok_or_else(|| ParseError::new(0, format!("missing {what}")))?;
        let row: Result<Vec<f64>, _> = line
            .split_whitespace()
            .map(|t| parse_num(t, lno, what))
            .collect();
        let row = row?;
        if row.len() != n {
            return Err(ParseError::new(lno, format!("{what}: expected {n} values, got {}", row.len())));
        }
        Ok((lno, row))
    };

    let (_, mu) = read_row("means")?;
    let (_, u) = read_row("upper bounds")?;
    let mut q = Vec::with_capacity(n * n);
    let mut q_line = 0;
    for _ in 0..n {
        let (lno, row) = read_row("covariance row")?;
        q_line = lno;
        q.extend(row);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (q[i * n + j] - q[j * n + i]).abs() > 1e-8 {
                return Err(ParseError::new(
                    q_line,
                    format!("covariance is not symmetric at ({},{})", i + 1, j + 1),
                ));
            }
        }
    }
    PortfolioData::new(n, q, mu, bound, u, kappa).map_err(|e| ParseError::new(0, e.to_string()))
}

/// Inverse of [`parse_portfolio`].
pub fn write_portfolio(d: &PortfolioData) -> String {
    let mut out = format!("{} {} {}\n", d.n, d.kappa, d.return_bound);
    out.push_str(&join(&d.mu));
    out.push('\n');
    out.push_str(&join(&d.u));
    out.push('\n');
    for row in d.q.chunks(d.n) {
        out.push_str(&join(row));
        out.push('\n');
    }
    out
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

const CSV_HEADER: &str = "k,j,j_cum,f_ev,f,V,t_j,rho";

/// Human-readable iteration table, one row per outer iteration.
pub fn write_iteration_table(records: &[AlmIterRecord]) -> String {
    let mut out = format!(
        "{:>4} {:>7} {:>8} {:>8} {:>16} {:>12} {:>12} {:>10}\n",
        "k", "j", "j_cum", "f-ev", "f(w^k)", "V_k", "t_j", "rho_k"
    );
    for r in records {
        out.push_str(&format!(
            "{:>4} {:>7} {:>8} {:>8} {:>16.8e} {:>12.4e} {:>12.4e} {:>10.3e}\n",
            r.k, r.j, r.j_cum, r.f_evals, r.f_value, r.v, r.t_j, r.rho
        ));
    }
    out
}

/// CSV log of the iteration records (header plus full-precision rows).
pub fn write_csv(records: &[AlmIterRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.k, r.j, r.j_cum, r.f_evals, r.f_value, r.v, r.t_j, r.rho
        ));
    }
    out
}

/// Inverse of [`write_csv`]; floats round-trip bitwise.
pub fn parse_csv(text: &str) -> Result<Vec<AlmIterRecord>, ParseError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| ParseError::new(1, "empty CSV"))?;
    if header != CSV_HEADER {
        return Err(ParseError::new(1, format!("unexpected header {header:?}")));
    }
    let mut records = Vec::new();
    for (lno, line) in lines {
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split(',').collect();
        if toks.len() != 8 {
            return Err(ParseError::new(lno, format!("expected 8 columns, got {}", toks.len())));
        }
        records.push(AlmIterRecord {
            k: parse_num(toks[0], lno, "k")?,
            j: parse_num(toks[1], lno, "j")?,
            j_cum: parse_num(toks[2], lno, "j_cum")?,
            f_evals: parse_num(toks[3], lno, "f_ev")?,
            f_value: parse_num(toks[4], lno, "f")?,
            v: parse_num(toks[5], lno, "V")?,
            t_j: parse_num(toks[6], lno, "t_j")?,
            rho: parse_num(toks[7], lno, "rho")?,
        });
    }
    Ok(records)
}

/// Run configuration: a problem selector plus solver overrides.
///
/// Files come in two equivalent forms, detected by the first non-blank
/// character: a flat `key = value` text format (with `#` comments) or a JSON
/// object of the same keys. Unknown keys are rejected. Absent keys keep the
/// solver defaults.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub problem: Option<String>,
    pub starts: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub inner_tol: Option<f64>,
    pub max_outer: Option<usize>,
    pub max_inner: Option<usize>,
    pub beta: Option<f64>,
    pub eta: Option<f64>,
    pub tau: Option<f64>,
    pub sigma: Option<f64>,
    pub m: Option<usize>,
    pub kappa: Option<usize>,
    pub box_lo: Option<f64>,
    pub box_hi: Option<f64>,
    pub csv_out: Option<String>,
    pub table_out: Option<String>,
}

pub fn parse_run_config(text: &str) -> Result<RunConfig, ParseError> {
    if text.trim_start().starts_with('{') {
        return serde_json::from_str(text).map_err(|e| ParseError::new(e.line(), e.to_string()));
    }
    let mut cfg = RunConfig::default();
    for (lno, line) in data_lines(text) {
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ParseError::new(lno, format!("expected key=value, got {line:?}")))?;
        let key = key.trim();
        let value = value.trim();
        match key {
            "problem" => cfg.problem = Some(value.to_string()),
            "starts" => cfg.starts = Some(parse_num(value, lno, "starts")?),
            "seed" => cfg.seed = Some(parse_num(value, lno, "seed")?),
            "tol" => cfg.tol = Some(parse_num(value, lno, "tol")?),
            "inner_tol" => cfg.inner_tol = Some(parse_num(value, lno, "inner_tol")?),
            "max_outer" => cfg.max_outer = Some(parse_num(value, lno, "max_outer")?),
            "max_inner" => cfg.max_inner = Some(parse_num(value, lno, "max_inner")?),
            "beta" => cfg.beta = Some(parse_num(value, lno, "beta")?),
            "eta" => cfg.eta = Some(parse_num(value, lno, "eta")?),
            "tau" => cfg.tau = Some(parse_num(value, lno, "tau")?),
            "sigma" => cfg.sigma = Some(parse_num(value, lno, "sigma")?),
            "m" => cfg.m = Some(parse_num(value, lno, "m")?),
            "kappa" => cfg.kappa = Some(parse_num(value, lno, "kappa")?),
            "box_lo" => cfg.box_lo = Some(parse_num(value, lno, "box_lo")?),
            "box_hi" => cfg.box_hi = Some(parse_num(value, lno, "box_hi")?),
            "csv_out" => cfg.csv_out = Some(value.to_string()),
            "table_out" => cfg.table_out = Some(value.to_string()),
            _ => return Err(ParseError::new(lno, format!("unknown key {key:?}"))),
        }
    }
    Ok(cfg)
}

impl RunConfig {
    /// Applies the overrides onto an [`crate::AlmConfig`].
    pub fn apply_to(&self, alm: &mut crate::alm::AlmConfig) {
        if let Some(t) = self.tol {
            alm.outer_tol = t;
        }
        if let Some(t) = self.inner_tol {
            alm.inner_tol_base = t;
        }
        if let Some(k) = self.max_outer {
            alm.max_outer = k;
        }
        if let Some(j) = self.max_inner {
            alm.spg.max_outer_iters = j;
        }
        if let Some(b) = self.beta {
            alm.beta = b;
        }
        if let Some(e) = self.eta {
            alm.eta = e;
        }
        if let Some(t) = self.tau {
            alm.spg.tau = t;
        }
        if let Some(s) = self.sigma {
            alm.spg.sigma = s;
        }
        if let Some(m) = self.m {
            alm.spg.m = m;
        }
        if let Some(s) = self.seed {
            alm.seed = s;
        }
    }
}
