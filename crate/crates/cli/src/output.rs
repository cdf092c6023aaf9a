//! CSV and SVG writers. Every file starts with a metadata comment carrying
//! the tool version, the config hash and the seed.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance stamped into every output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Meta {
    pub config_hash: String,
    pub seed: u64,
}

impl Meta {
    pub fn line(&self) -> String {
        format!("mbt {VERSION} config_sha256={} seed={}", self.config_hash, self.seed)
    }
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

/// CSV text: one `# ...` metadata line, then a header and the rows.
pub fn csv_string<R: Serialize>(meta: &Meta, rows: &[R]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(true).from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let body = w.into_inner().map_err(|e| CliError::Config(e.to_string()))?;
    let mut out = format!("# {}\n", meta.line());
    out.push_str(std::str::from_utf8(&body).expect("csv output is utf-8"));
    Ok(out)
}

pub fn write_csv<R: Serialize>(path: &Path, meta: &Meta, rows: &[R]) -> Result<()> {
    write_file(path, csv_string(meta, rows)?.as_bytes())
}

/// Reads a CSV written by [`write_csv`], skipping metadata comments.
pub fn read_csv<R: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<R>> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?;
    Ok(r.deserialize().collect::<Result<Vec<R>, _>>()?)
}

pub fn out_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

/// A bar in a grouped chart: value with a symmetric error bar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bar {
    pub value: f64,
    pub se: f64,
}

/// Grouped bar chart on a `[0, 1]` value axis. `groups` pairs a label with
/// one bar per series.
pub fn grouped_bars_svg(meta: &Meta, title: &str, series: &[&str], groups: &[(String, Vec<Bar>)]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const LEFT: f64 = 60.0;
    const RIGHT: f64 = 20.0;
    const TOP: f64 = 50.0;
    const BOTTOM: f64 = 60.0;
    const COLORS: [&str; 4] = ["#4c72b0", "#dd8452", "#55a868", "#c44e52"];
    let plot_w = W - LEFT - RIGHT;
    let plot_h = H - TOP - BOTTOM;
    let y = |v: f64| TOP + plot_h * (1.0 - v.clamp(0.0, 1.0));

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, "<!-- {} -->", meta.line());
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, W / 2.0, escape(title));
    for tick in 0..=5 {
        let v = tick as f64 / 5.0;
        let ty = y(v);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{ty:.2}" x2="{:.2}" y2="{ty:.2}" stroke="#dddddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{v:.1}</text>"##,
            W - RIGHT,
            LEFT - 6.0,
            ty + 4.0
        );
    }
    let _ = writeln!(s, r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{:.2}" stroke="black"/>"#, TOP + plot_h);
    let _ = writeln!(s, r#"<line x1="{LEFT}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black"/>"#, TOP + plot_h, W - RIGHT, TOP + plot_h);

    let group_w = plot_w / groups.len().max(1) as f64;
    let bar_w = group_w * 0.8 / series.len().max(1) as f64;
    for (g, (label, bars)) in groups.iter().enumerate() {
        let gx = LEFT + g as f64 * group_w + group_w * 0.1;
        for (b, bar) in bars.iter().enumerate() {
            let x = gx + b as f64 * bar_w;
            let top = y(bar.value);
            let color = COLORS[b % COLORS.len()];
            let _ = writeln!(
                s,
                r#"<rect x="{x:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="{color}"><title>{}: {:.6} ± {:.6}</title></rect>"#,
                bar_w * 0.9,
                TOP + plot_h - top,
                escape(series.get(b).copied().unwrap_or("")),
                bar.value,
                bar.se
            );
            let cx = x + bar_w * 0.45;
            let (hi, lo) = (y(bar.value + bar.se), y(bar.value - bar.se));
            let _ = writeln!(
                s,
                r#"<path d="M{:.2} {hi:.2}H{:.2}M{cx:.2} {hi:.2}V{lo:.2}M{:.2} {lo:.2}H{:.2}" stroke="black" fill="none"/>"#,
                cx - 4.0,
                cx + 4.0,
                cx - 4.0,
                cx + 4.0
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            gx + group_w * 0.4,
            TOP + plot_h + 18.0,
            escape(label)
        );
    }
    for (i, name) in series.iter().enumerate() {
        let lx = LEFT + 10.0 + i as f64 * 130.0;
        let ly = H - 18.0;
        let _ = writeln!(
            s,
            r#"<rect x="{lx:.2}" y="{:.2}" width="12" height="12" fill="{}"/><text x="{:.2}" y="{ly:.2}">{}</text>"#,
            ly - 10.0,
            COLORS[i % COLORS.len()],
            lx + 16.0,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta() -> Meta {
        Meta { config_hash: "ab".repeat(32), seed: 7 }
    }

    #[test]
    fn csv_has_metadata_then_header() {
        #[derive(Serialize)]
        struct Row {
            a: u32,
            b: f64,
        }
        let text = csv_string(&meta(), &[Row { a: 1, b: 0.5 }]).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("# mbt "));
        assert_eq!(lines.next(), Some("a,b"));
        assert_eq!(lines.next(), Some("1,0.5"));
    }

    #[test]
    fn svg_is_self_contained() {
        let svg = grouped_bars_svg(
            &meta(),
            "IR <and> efficiency",
            &["IR", "efficiency"],
            &[("normal".into(), vec![Bar { value: 0.8, se: 0.01 }, Bar { value: 0.99, se: 0.001 }])],
        );
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("config_sha256="));
        assert!(svg.contains("&lt;and&gt;"));
        assert!(!svg.contains("href"));
        assert_eq!(svg.matches("<rect").count(), 1 + 2 + 2);
    }
}
