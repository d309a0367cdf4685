//! Line-oriented text formats for every artifact. Lines starting with `#`
//! are comments; each writer emits a `# gsdlab 1 <kind>` banner first.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::enumerate::{Constraint, SolutionSet};
use crate::error::{Error, Result};
use crate::instance::{IsingInstance, LocalTerm, PlantedInstance, SpinConfig};
use crate::quantum::{AnalyticGsd, DriverKind, QgsDiagnostics};
use crate::sa::EmpiricalGsd;
use crate::stats::ComparisonRow;
use crate::topology::Graph;

pub const FORMAT_VERSION: u32 = 1;

fn banner(kind: &str) -> String {
    format!("# gsdlab {FORMAT_VERSION} {kind}\n")
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Writes `text` to `path`, creating parent directories.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Non-comment, non-blank lines with their 1-based numbers.
struct Lines<'a> {
    source: &'a str,
    inner: std::iter::Peekable<Box<dyn Iterator<Item = (usize, &'a str)> + 'a>>,
}

impl<'a> Lines<'a> {
    fn new(source: &'a str, text: &'a str) -> Self {
        let it: Box<dyn Iterator<Item = (usize, &'a str)>> = Box::new(
            text.lines()
                .enumerate()
                .map(|(i, l)| (i + 1, l.trim()))
                .filter(|(_, l)| !l.is_empty() && !l.starts_with('#')),
        );
        Lines {
            source,
            inner: it.peekable(),
        }
    }

    fn err(&self, line: usize, msg: impl Into<String>) -> Error {
        Error::Parse {
            path: self.source.to_string(),
            line,
            msg: msg.into(),
        }
    }

    fn next_line(&mut self, what: &str) -> Result<(usize, Vec<&'a str>)> {
        match self.inner.next() {
            Some((n, l)) => Ok((n, l.split_whitespace().collect())),
            None => Err(self.err(0, format!("unexpected end of file, expected {what}"))),
        }
    }

    fn peek_tag(&mut self) -> Option<&'a str> {
        self.inner.peek().and_then(|(_, l)| l.split_whitespace().next())
    }

    fn header(&mut self, tag: &str, fields: usize) -> Result<(usize, Vec<&'a str>)> {
        let (n, toks) = self.next_line(tag)?;
        if toks.first() != Some(&tag) || toks.len() < fields + 1 {
            return Err(self.err(n, format!("expected header `{tag}` with {fields} field(s)")));
        }
        Ok((n, toks[1..].to_vec()))
    }

    fn parse<T: FromStr>(&self, line: usize, tok: &str) -> Result<T> {
        tok.parse().map_err(|_| self.err(line, format!("cannot parse `{tok}`")))
    }

    fn finish(&mut self) -> Result<()> {
        match self.inner.next() {
            Some((n, _)) => Err(self.err(n, "trailing content")),
            None => Ok(()),
        }
    }
}

fn spin_row(lines: &Lines, n: usize, toks: &[&str], len: usize) -> Result<SpinConfig> {
    if toks.len() != len {
        return Err(lines.err(n, format!("expected {len} spins, found {}", toks.len())));
    }
    let spins = toks.iter().map(|t| lines.parse::<i8>(n, t)).collect::<Result<Vec<_>>>()?;
    SpinConfig::new(spins).map_err(|e| lines.err(n, e.to_string()))
}

fn spins_text(c: &SpinConfig) -> String {
    c.spins().iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn graph_to_string(g: &Graph) -> String {
    let mut out = banner("graph");
    writeln!(out, "vertices {}", g.vertex_count()).unwrap();
    for &(a, b) in g.edges() {
        writeln!(out, "{a} {b}").unwrap();
    }
    out
}

pub fn parse_graph(source: &str, text: &str) -> Result<Graph> {
    let mut lines = Lines::new(source, text);
    let (hn, h) = lines.header("vertices", 1)?;
    let n: usize = lines.parse(hn, h[0])?;
    let mut edges = Vec::new();
    while let Some((ln, l)) = lines.inner.next() {
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(lines.err(ln, "expected `i j`"));
        }
        edges.push((lines.parse(ln, toks[0])?, lines.parse(ln, toks[1])?));
    }
    Graph::new(n, edges).map_err(|e| lines.err(hn, e.to_string()))
}

/// `ising N`, then `c i j J` per edge (zeros included, so the graph
/// round-trips) and `f i h` per nonzero field.
pub fn instance_to_string(inst: &IsingInstance) -> String {
    let mut out = banner("instance");
    writeln!(out, "ising {}", inst.spin_count()).unwrap();
    for (&(a, b), &j) in inst.graph().edges().iter().zip(inst.couplings()) {
        writeln!(out, "c {a} {b} {j}").unwrap();
    }
    for (i, &h) in inst.fields().iter().enumerate() {
        if h != 0 {
            writeln!(out, "f {i} {h}").unwrap();
        }
    }
    out
}

pub fn parse_instance(source: &str, text: &str) -> Result<IsingInstance> {
    let mut lines = Lines::new(source, text);
    let (hn, h) = lines.header("ising", 1)?;
    let n: usize = lines.parse(hn, h[0])?;
    let mut edges = Vec::new();
    let mut js = Vec::new();
    let mut fields = vec![0i64; n];
    while let Some((ln, l)) = lines.inner.next() {
        let toks: Vec<&str> = l.split_whitespace().collect();
        match toks.as_slice() {
            ["c", a, b, j] => {
                let (a, b): (usize, usize) = (lines.parse(ln, a)?, lines.parse(ln, b)?);
                edges.push((a.min(b), a.max(b)));
                js.push(lines.parse::<i64>(ln, j)?);
            }
            ["f", i, v] => {
                let i: usize = lines.parse(ln, i)?;
                if i >= n {
                    return Err(lines.err(ln, format!("field index {i} out of range")));
                }
                fields[i] = lines.parse(ln, v)?;
            }
            _ => return Err(lines.err(ln, "expected `c i j J` or `f i h`")),
        }
    }
    let graph = Graph::new(n, edges.clone()).map_err(|e| lines.err(hn, e.to_string()))?;
    let mut couplings = vec![0i64; graph.edge_count()];
    for (&(a, b), &j) in edges.iter().zip(&js) {
        let e = graph.edge_index(a, b).expect("edge just inserted");
        couplings[e] = j;
    }
    IsingInstance::new(graph, couplings, fields).map_err(|e| lines.err(hn, e.to_string()))
}

/// `planted N E0` followed by the planted configuration.
pub fn planted_to_string(p: &PlantedInstance) -> String {
    let mut out = banner("planted");
    writeln!(out, "planted {} {}", p.planted.len(), p.ground_energy).unwrap();
    writeln!(out, "{}", spins_text(&p.planted)).unwrap();
    out
}

pub fn parse_planted(source: &str, text: &str) -> Result<(SpinConfig, i64)> {
    let mut lines = Lines::new(source, text);
    let (hn, h) = lines.header("planted", 2)?;
    let n: usize = lines.parse(hn, h[0])?;
    let e0: i64 = lines.parse(hn, h[1])?;
    let (ln, toks) = lines.next_line("planted configuration")?;
    let config = spin_row(&lines, ln, &toks, n)?;
    lines.finish()?;
    Ok((config, e0))
}

/// One block per term: `term <support...>`, `min <E>`, then `i j J` lines.
pub fn terms_to_string(terms: &[LocalTerm]) -> String {
    let mut out = banner("terms");
    writeln!(out, "terms {}", terms.len()).unwrap();
    for t in terms {
        let support: Vec<String> = t.support.iter().map(|v| v.to_string()).collect();
        writeln!(out, "term {}", support.join(" ")).unwrap();
        writeln!(out, "min {}", t.min_energy).unwrap();
        for &(a, b, j) in &t.couplings {
            writeln!(out, "{a} {b} {j}").unwrap();
        }
    }
    out
}

pub fn parse_terms(source: &str, text: &str) -> Result<Vec<LocalTerm>> {
    let mut lines = Lines::new(source, text);
    let (hn, h) = lines.header("terms", 1)?;
    let count: usize = lines.parse(hn, h[0])?;
    let mut terms = Vec::with_capacity(count);
    for _ in 0..count {
        let (tn, t) = lines.header("term", 1)?;
        let support = t.iter().map(|v| lines.parse(tn, v)).collect::<Result<Vec<usize>>>()?;
        let (mn, m) = lines.header("min", 1)?;
        let min_energy = lines.parse(mn, m[0])?;
        let mut couplings = Vec::new();
        while matches!(lines.peek_tag(), Some(tag) if tag != "term") {
            let (ln, toks) = lines.next_line("coupling")?;
            if toks.len() != 3 {
                return Err(lines.err(ln, "expected `i j J`"));
            }
            couplings.push((lines.parse(ln, toks[0])?, lines.parse(ln, toks[1])?, lines.parse(ln, toks[2])?));
        }
        terms.push(LocalTerm {
            support,
            couplings,
            min_energy,
        });
    }
    lines.finish()?;
    Ok(terms)
}

/// Constraints in tabular form: per block, one line per bit holding the bit
/// index followed by its value in each allowed setting; blank lines separate
/// blocks.
pub fn constraints_to_string(constraints: &[Constraint]) -> String {
    let mut out = banner("constraints");
    for (k, c) in constraints.iter().enumerate() {
        if k > 0 {
            out.push('\n');
        }
        let rows: Vec<&[i8]> = c.rows().collect();
        for (pos, bit) in c.bits().iter().enumerate() {
            write!(out, "{bit}").unwrap();
            for row in &rows {
                write!(out, " {}", row[pos]).unwrap();
            }
            out.push('\n');
        }
    }
    out
}

pub fn parse_constraints(source: &str, text: &str) -> Result<Vec<Constraint>> {
    let mut blocks: Vec<Vec<(usize, &str)>> = vec![Vec::new()];
    for (i, raw) in text.lines().enumerate() {
        let l = raw.trim();
        if l.starts_with('#') {
            continue;
        }
        if l.is_empty() {
            if !blocks.last().unwrap().is_empty() {
                blocks.push(Vec::new());
            }
            continue;
        }
        blocks.last_mut().unwrap().push((i + 1, l));
    }
    let err = |line, msg: String| Error::Parse {
        path: source.to_string(),
        line,
        msg,
    };
    let mut out = Vec::new();
    for block in blocks.into_iter().filter(|b| !b.is_empty()) {
        let mut bits = Vec::new();
        let mut columns: Vec<Vec<i8>> = Vec::new();
        let first = block[0].0;
        for (ln, l) in block {
            let toks: Vec<&str> = l.split_whitespace().collect();
            bits.push(toks[0].parse::<usize>().map_err(|_| err(ln, format!("bad bit index `{}`", toks[0])))?);
            let vals = toks[1..]
                .iter()
                .map(|t| t.parse::<i8>().map_err(|_| err(ln, format!("bad setting `{t}`"))))
                .collect::<Result<Vec<_>>>()?;
            if !columns.is_empty() && vals.len() != columns[0].len() {
                return Err(err(ln, "rows of a constraint must have equal length".into()));
            }
            columns.push(vals);
        }
        let settings = columns.first().map_or(0, Vec::len);
        let rows: Vec<Vec<i8>> = (0..settings).map(|k| columns.iter().map(|c| c[k]).collect()).collect();
        out.push(Constraint::new(bits, rows).map_err(|e| err(first, e.to_string()))?);
    }
    Ok(out)
}

/// `solutions D E0 truncated`, then one row of spins per solution.
pub fn solutions_to_string(s: &SolutionSet) -> String {
    let mut out = banner("solutions");
    writeln!(out, "instance {}", s.instance_id).unwrap();
    writeln!(out, "solutions {} {} {}", s.len(), s.ground_energy, s.truncated).unwrap();
    for c in &s.solutions {
        writeln!(out, "{}", spins_text(c)).unwrap();
    }
    out
}

pub fn parse_solutions(source: &str, text: &str) -> Result<SolutionSet> {
    let mut lines = Lines::new(source, text);
    let instance_id = if lines.peek_tag() == Some("instance") {
        lines.header("instance", 1)?.1[0].to_string()
    } else {
        String::new()
    };
    let (hn, h) = lines.header("solutions", 3)?;
    let d: usize = lines.parse(hn, h[0])?;
    let ground_energy: i64 = lines.parse(hn, h[1])?;
    let truncated: bool = lines.parse(hn, h[2])?;
    let mut solutions = Vec::with_capacity(d);
    let mut width = None;
    for _ in 0..d {
        let (ln, toks) = lines.next_line("solution row")?;
        let w = *width.get_or_insert(toks.len());
        solutions.push(spin_row(&lines, ln, &toks, w)?);
    }
    lines.finish()?;
    Ok(SolutionSet {
        instance_id,
        ground_energy,
        solutions,
        truncated,
    })
}

/// `gsd D N ground_hits`, then `index count` for every solution.
pub fn gsd_to_string(g: &EmpiricalGsd) -> String {
    let mut out = banner("gsd");
    writeln!(out, "gsd {} {} {}", g.counts.len(), g.anneals, g.ground_hits).unwrap();
    for (i, c) in g.counts.iter().enumerate() {
        writeln!(out, "{i} {c}").unwrap();
    }
    out
}

pub fn parse_gsd(source: &str, text: &str) -> Result<EmpiricalGsd> {
    let mut lines = Lines::new(source, text);
    let (hn, h) = lines.header("gsd", 3)?;
    if h.len() > 3 {
        return Err(lines.err(hn, "analytic distribution where counts were expected"));
    }
    let d: usize = lines.parse(hn, h[0])?;
    let anneals: u64 = lines.parse(hn, h[1])?;
    let ground_hits: u64 = lines.parse(hn, h[2])?;
    let mut counts = vec![0u64; d];
    for _ in 0..d {
        let (ln, toks) = lines.next_line("count row")?;
        if toks.len() != 2 {
            return Err(lines.err(ln, "expected `index count`"));
        }
        let i: usize = lines.parse(ln, toks[0])?;
        if i >= d {
            return Err(lines.err(ln, format!("index {i} out of range")));
        }
        counts[i] = lines.parse(ln, toks[1])?;
    }
    lines.finish()?;
    if counts.iter().sum::<u64>() != ground_hits || ground_hits > anneals {
        return Err(lines.err(hn, "counts do not add up to the ground hits"));
    }
    Ok(EmpiricalGsd {
        counts,
        anneals,
        ground_hits,
    })
}

/// Same layout as the counts file with an `analytic` flag; rows carry
/// probabilities and a `residual` line records solver diagnostics.
pub fn analytic_to_string(g: &AnalyticGsd) -> String {
    let d = &g.diagnostics;
    let mut out = banner("gsd");
    writeln!(out, "gsd {} 0 0 analytic {} {}", g.probabilities.len(), g.driver.tag(), g.order).unwrap();
    writeln!(
        out,
        "residual {:e} iterations {} basis {} pairs {} s_final {} overlap {} scaled_gap {:e} gap_ratio {} shift {:e} clipped {:e}",
        d.gradient_norm,
        d.iterations,
        d.basis_dim,
        d.ground_pairs,
        d.s_final,
        d.overlap,
        d.scaled_gap,
        d.gap_ratio,
        d.extrapolation_shift,
        d.clipped_mass
    )
    .unwrap();
    for (i, p) in g.probabilities.iter().enumerate() {
        writeln!(out, "{i} {p:e}").unwrap();
    }
    out
}

pub fn parse_analytic(source: &str, text: &str) -> Result<AnalyticGsd> {
    let mut lines = Lines::new(source, text);
    let (hn, h) = lines.header("gsd", 6)?;
    if h[3] != "analytic" {
        return Err(lines.err(hn, "missing `analytic` flag"));
    }
    let d: usize = lines.parse(hn, h[0])?;
    let driver = match h[4] {
        "tf" => DriverKind::TransverseField,
        "ns" => DriverKind::NonStoquastic,
        other => return Err(lines.err(hn, format!("unknown driver `{other}`"))),
    };
    let order: u8 = lines.parse(hn, h[5])?;
    let (rn, r) = lines.header("residual", 19)?;
    let num = |k: usize| -> Result<f64> { lines.parse(rn, r[k]) };
    let diagnostics = QgsDiagnostics {
        gradient_norm: num(0)?,
        iterations: lines.parse(rn, r[2])?,
        basis_dim: lines.parse(rn, r[4])?,
        ground_pairs: lines.parse(rn, r[6])?,
        s_final: num(8)?,
        overlap: num(10)?,
        scaled_gap: num(12)?,
        gap_ratio: num(14)?,
        extrapolation_shift: num(16)?,
        clipped_mass: num(18)?,
    };
    let mut probabilities = vec![0.0; d];
    for _ in 0..d {
        let (ln, toks) = lines.next_line("probability row")?;
        if toks.len() != 2 {
            return Err(lines.err(ln, "expected `index probability`"));
        }
        let i: usize = lines.parse(ln, toks[0])?;
        if i >= d {
            return Err(lines.err(ln, format!("index {i} out of range")));
        }
        probabilities[i] = lines.parse(ln, toks[1])?;
    }
    lines.finish()?;
    Ok(AnalyticGsd {
        driver,
        probabilities,
        order,
        diagnostics,
    })
}

/// Either kind of distribution file.
pub fn parse_any_gsd(source: &str, text: &str) -> Result<crate::stats::Gsd> {
    let analytic = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .is_some_and(|l| l.split_whitespace().nth(4) == Some("analytic"));
    if analytic {
        Ok(crate::stats::Gsd::Analytic(parse_analytic(source, text)?.probabilities))
    } else {
        Ok(crate::stats::Gsd::Empirical(parse_gsd(source, text)?.counts))
    }
}

pub const REPORT_HEADER: &str =
    "instance_id,method_a,method_b,chi2,p_value,bias_a,bias_b,bias_combined,support_mismatches";

pub fn report_to_csv(rows: &[ComparisonRow]) -> String {
    let mut out = String::from(REPORT_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.instance_id, r.method_a, r.method_b, r.chi2, r.p_value, r.bias_a, r.bias_b, r.bias_combined, r.support_mismatches
        )
        .unwrap();
    }
    out
}

pub fn parse_report_csv(source: &str, text: &str) -> Result<Vec<ComparisonRow>> {
    let err = |line, msg: &str| Error::Parse {
        path: source.to_string(),
        line,
        msg: msg.to_string(),
    };
    let mut it = text.lines().enumerate();
    match it.next() {
        Some((_, h)) if h.trim() == REPORT_HEADER => {}
        _ => return Err(err(1, "missing report header")),
    }
    let mut rows = Vec::new();
    for (i, l) in it {
        if l.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = l.split(',').collect();
        if f.len() != 9 {
            return Err(err(i + 1, "expected 9 columns"));
        }
        let num = |k: usize| f[k].parse::<f64>().map_err(|_| err(i + 1, "bad number"));
        rows.push(ComparisonRow {
            instance_id: f[0].to_string(),
            method_a: f[1].to_string(),
            method_b: f[2].to_string(),
            chi2: num(3)?,
            p_value: num(4)?,
            bias_a: num(5)?,
            bias_b: num(6)?,
            bias_combined: num(7)?,
            support_mismatches: f[8].parse().map_err(|_| err(i + 1, "bad count"))?,
        });
    }
    Ok(rows)
}

/// Reads and parses a file with one of the `parse_*` functions.
pub fn load<T>(path: &Path, parse: impl FnOnce(&str, &str) -> Result<T>) -> Result<T> {
    let text = read_text(path)?;
    parse(&path.display().to_string(), &text)
}
