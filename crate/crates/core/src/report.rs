//! Emission of profile rows as CSV, a JSON mirror, and a self-contained
//! SVG chart (one polyline per scale L).

use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::profile::ProfileRow;

pub const CSV_HEADER: &str = "family,block,L,R,eps,S_min,subsets_checked,max_residual,runtime_ms";

/// The CSV document for a row set, header included, `\n` line endings.
pub fn rows_to_csv(rows: &[ProfileRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.family,
            r.block,
            r.l,
            r.r,
            r.eps,
            r.s_min,
            r.subsets_checked,
            r.max_residual,
            r.runtime_ms
        ));
    }
    out
}

/// Parses a document produced by [`rows_to_csv`]; rejects a wrong header
/// or malformed lines.
pub fn rows_from_csv(text: &str) -> Result<Vec<ProfileRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        _ => return Err(Error::format("missing or wrong CSV header")),
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 9 {
            return Err(Error::format(format!("row {}: expected 9 fields", i + 2)));
        }
        let num = |s: &str, what: &str| -> Result<u64> {
            s.parse()
                .map_err(|_| Error::format(format!("row {}: bad {what} `{s}`", i + 2)))
        };
        rows.push(ProfileRow {
            family: f[0].to_string(),
            block: f[1].to_string(),
            l: num(f[2], "L")? as u32,
            r: num(f[3], "R")? as u32,
            eps: f[4].to_string(),
            s_min: num(f[5], "S_min")? as u32,
            subsets_checked: num(f[6], "subsets_checked")? as usize,
            max_residual: f[7].to_string(),
            runtime_ms: num(f[8], "runtime_ms")?,
        });
    }
    Ok(rows)
}

pub fn rows_to_json(rows: &[ProfileRow]) -> Result<String> {
    serde_json::to_string_pretty(rows).map_err(|e| Error::format(format!("JSON encode: {e}")))
}

pub fn rows_from_json(text: &str) -> Result<Vec<ProfileRow>> {
    serde_json::from_str(text).map_err(|e| Error::format(format!("JSON decode: {e}")))
}

const SVG_W: f64 = 800.0;
const SVG_H: f64 = 600.0;
const MARGIN: f64 = 60.0;
const PALETTE: [&str; 8] = [
    "#1b6ca8", "#c4411f", "#2d8a4e", "#7b3fa0", "#b8860b", "#197a78", "#a83262", "#555555",
];

/// A fixed 800x600 chart of S_min against block position, one polyline per
/// scale L. Self-contained: no external fonts, scripts, or stylesheets.
pub fn rows_to_svg(rows: &[ProfileRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::invalid("nothing to chart: no rows"));
    }
    // block positions in first-appearance order; one series per L
    let mut blocks: Vec<&str> = Vec::new();
    for r in rows {
        if blocks.last() != Some(&r.block.as_str()) && !blocks.contains(&r.block.as_str()) {
            blocks.push(&r.block);
        }
    }
    // duplicated families repeat labels; fall back to row grouping by L
    let mut ls: Vec<u32> = rows.iter().map(|r| r.l).collect();
    ls.sort_unstable();
    ls.dedup();
    let per_l = rows.len() / ls.len();
    let max_s = rows.iter().map(|r| r.s_min).max().unwrap_or(0).max(1);
    let x_of = |i: usize| {
        if per_l <= 1 {
            SVG_W / 2.0
        } else {
            MARGIN + (SVG_W - 2.0 * MARGIN) * i as f64 / (per_l - 1) as f64
        }
    };
    let y_of = |s: u32| SVG_H - MARGIN - (SVG_H - 2.0 * MARGIN) * s as f64 / max_s as f64;
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_W}\" height=\"{SVG_H}\" \
         viewBox=\"0 0 {SVG_W} {SVG_H}\">\n\
         <rect width=\"{SVG_W}\" height=\"{SVG_H}\" fill=\"white\"/>\n"
    ));
    // axes
    svg.push_str(&format!(
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n\
         <line x1=\"{m}\" y1=\"{t}\" x2=\"{m}\" y2=\"{b}\" stroke=\"black\"/>\n",
        m = MARGIN,
        b = SVG_H - MARGIN,
        r = SVG_W - MARGIN,
        t = MARGIN
    ));
    for s in 0..=max_s {
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"end\" \
             font-family=\"sans-serif\">{}</text>\n",
            MARGIN - 8.0,
            y_of(s) + 4.0,
            s
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"13\" text-anchor=\"middle\" \
         font-family=\"sans-serif\">block position</text>\n\
         <text x=\"18\" y=\"{:.1}\" font-size=\"13\" text-anchor=\"middle\" \
         font-family=\"sans-serif\" transform=\"rotate(-90 18 {:.1})\">S_min</text>\n",
        SVG_W / 2.0,
        SVG_H - 18.0,
        SVG_H / 2.0,
        SVG_H / 2.0
    ));
    for (li, &l) in ls.iter().enumerate() {
        let color = PALETTE[li % PALETTE.len()];
        let series: Vec<&ProfileRow> = rows.iter().filter(|r| r.l == l).collect();
        let pts: Vec<String> = series
            .iter()
            .enumerate()
            .map(|(i, r)| format!("{:.1},{:.1}", x_of(i), y_of(r.s_min)))
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>\n",
            pts.join(" ")
        ));
        for (i, r) in series.iter().enumerate() {
            svg.push_str(&format!(
                "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"3\" fill=\"{color}\"/>\n",
                x_of(i),
                y_of(r.s_min)
            ));
        }
        // legend entry
        let ly = MARGIN + 18.0 * li as f64;
        svg.push_str(&format!(
            "<line x1=\"{x}\" y1=\"{ly:.1}\" x2=\"{x2}\" y2=\"{ly:.1}\" stroke=\"{color}\" \
             stroke-width=\"2\"/>\n\
             <text x=\"{tx}\" y=\"{ty:.1}\" font-size=\"12\" font-family=\"sans-serif\">L = {l}</text>\n",
            x = SVG_W - MARGIN - 90.0,
            x2 = SVG_W - MARGIN - 60.0,
            tx = SVG_W - MARGIN - 52.0,
            ty = ly + 4.0
        ));
    }
    // x tick labels: block names for the first series (shared positions)
    if let Some(&l0) = ls.first() {
        for (i, r) in rows.iter().filter(|r| r.l == l0).enumerate() {
            svg.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"10\" text-anchor=\"middle\" \
                 font-family=\"sans-serif\">{}</text>\n",
                x_of(i),
                SVG_H - MARGIN + 16.0,
                xml_escape(&r.block)
            ));
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    f.write_all(content.as_bytes()).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

/// Destinations for a report; at least one must be set.
#[derive(Debug, Clone, Default)]
pub struct ReportConfig {
    pub csv: Option<std::path::PathBuf>,
    pub json: Option<std::path::PathBuf>,
    pub svg: Option<std::path::PathBuf>,
}

/// Writes the requested artifacts. Errors name the offending path.
pub fn emit_report(rows: &[ProfileRow], cfg: &ReportConfig) -> Result<()> {
    if cfg.csv.is_none() && cfg.json.is_none() && cfg.svg.is_none() {
        return Err(Error::invalid("report has no output destination"));
    }
    if let Some(p) = &cfg.csv {
        write_file(p, &rows_to_csv(rows))?;
    }
    if let Some(p) = &cfg.json {
        write_file(p, &rows_to_json(rows)?)?;
    }
    if let Some(p) = &cfg.svg {
        write_file(p, &rows_to_svg(rows)?)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_rows() -> Vec<ProfileRow> {
        let mut rows = Vec::new();
        for l in [2u32, 4] {
            for (i, b) in ["cycle_8", "cycle_16", "cycle_32"].iter().enumerate() {
                rows.push(ProfileRow {
                    family: "cycles".into(),
                    block: b.to_string(),
                    l,
                    r: 1,
                    eps: "1/2".into(),
                    s_min: 2 + (i as u32 % 2),
                    subsets_checked: 3,
                    max_residual: "2/5".into(),
                    runtime_ms: 0,
                });
            }
        }
        rows
    }

    #[test]
    fn csv_round_trip() {
        let rows = sample_rows();
        let text = rows_to_csv(&rows);
        assert!(text.starts_with(CSV_HEADER));
        assert_eq!(rows_from_csv(&text).unwrap(), rows);
    }

    #[test]
    fn json_round_trip() {
        let rows = sample_rows();
        assert_eq!(rows_from_json(&rows_to_json(&rows).unwrap()).unwrap(), rows);
    }

    #[test]
    fn csv_rejects_bad_input() {
        assert!(rows_from_csv("nonsense\n1,2,3").is_err());
        let mut text = rows_to_csv(&sample_rows());
        text.push_str("a,b,c\n");
        assert!(rows_from_csv(&text).is_err());
    }

    #[test]
    fn svg_shape() {
        let svg = rows_to_svg(&sample_rows()).unwrap();
        assert!(svg.contains("width=\"800\""));
        assert!(svg.contains("height=\"600\""));
        assert_eq!(svg.matches("<polyline").count(), 2); // one per L
        assert!(!svg.contains("http://") || svg.matches("http://www.w3.org").count() >= 1);
        assert!(rows_to_svg(&[]).is_err());
    }

    #[test]
    fn emit_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ReportConfig {
            csv: Some(dir.path().join("out.csv")),
            json: Some(dir.path().join("out.json")),
            svg: Some(dir.path().join("out.svg")),
        };
        emit_report(&sample_rows(), &cfg).unwrap();
        assert!(cfg.csv.as_ref().unwrap().exists());
        // unwritable path names the path in the error
        let bad = ReportConfig {
            csv: Some(dir.path().join("no_such_dir/out.csv")),
            ..Default::default()
        };
        let err = emit_report(&sample_rows(), &bad).unwrap_err().to_string();
        assert!(err.contains("no_such_dir"), "{err}");
        assert!(emit_report(&sample_rows(), &ReportConfig::default()).is_err());
    }
}
