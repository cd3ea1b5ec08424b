//! Report writers: CSV with a config header, JSON with the config embedded,
//! and plain SVG line plots.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::CliError;

/// 17 significant digits, so values round-trip exactly.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn opt_float(x: Option<f64>) -> String {
    x.map(float).unwrap_or_default()
}

pub struct Reports {
    dir: PathBuf,
    config: Value,
    pub written: Vec<PathBuf>,
}

impl Reports {
    pub fn new(dir: &Path, config: Value) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        Ok(Reports {
            dir: dir.to_path_buf(),
            config,
            written: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, text: String) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, text)?;
        self.written.push(path);
        Ok(())
    }

    /// `# config=<json>`, the header row, then one line per row.
    pub fn csv<I>(&mut self, name: &str, header: &[&str], rows: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let mut text = format!("# config={}\n{}\n", self.config, header.join(","));
        for row in rows {
            text.push_str(&row.join(","));
            text.push('\n');
        }
        self.write(name, text)
    }

    /// `{"config": …, "result": …}`, pretty printed.
    pub fn json<T: Serialize>(&mut self, name: &str, result: &T) -> Result<(), CliError> {
        let doc = serde_json::json!({
            "config": self.config,
            "result": serde_json::to_value(result).map_err(|e| CliError::Config(e.to_string()))?,
        });
        let mut text =
            serde_json::to_string_pretty(&doc).map_err(|e| CliError::Config(e.to_string()))?;
        text.push('\n');
        self.write(name, text)
    }

    pub fn text(
        &mut self,
        name: &str,
        lines: impl IntoIterator<Item = String>,
    ) -> Result<(), CliError> {
        let mut text = String::new();
        for line in lines {
            text.push_str(&line);
            text.push('\n');
        }
        self.write(name, text)
    }

    pub fn svg(&mut self, name: &str, plot: &LinePlot) -> Result<(), CliError> {
        let text = plot.render(&self.config.to_string());
        self.write(name, text)
    }
}

pub struct LinePlot<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub points: Vec<(f64, f64)>,
    /// Optional horizontal reference line.
    pub reference: Option<f64>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace("--", "- -")
}

impl LinePlot<'_> {
    pub fn render(&self, config: &str) -> String {
        const W: f64 = 640.0;
        const H: f64 = 400.0;
        const PAD: f64 = 50.0;
        let pts: Vec<(f64, f64)> = self
            .points
            .iter()
            .copied()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .collect();
        let (mut x0, mut x1) = pts
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
                (a.min(p.0), b.max(p.0))
            });
        let (mut y0, mut y1) = pts
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
                (a.min(p.1), b.max(p.1))
            });
        if let Some(r) = self.reference {
            y0 = y0.min(r);
            y1 = y1.max(r);
        }
        if !(x0 < x1) {
            x0 = if x0.is_finite() { x0 - 1.0 } else { 0.0 };
            x1 = x0 + 2.0;
        }
        if !(y0 < y1) {
            y0 = if y0.is_finite() { y0 - 1.0 } else { 0.0 };
            y1 = y0 + 2.0;
        }
        let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
        let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
        );
        let _ = writeln!(s, "<!-- config={} -->", escape(config));
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="16">{}</text>"#,
            W / 2.0,
            escape(self.title)
        );
        let _ = writeln!(
            s,
            r#"<path d="M{PAD} {PAD} L{PAD} {b} L{r} {b}" fill="none" stroke="black"/>"#,
            b = H - PAD,
            r = W - PAD
        );
        for (x, y, anchor, label) in [
            (PAD, H - PAD + 16.0, "start", format!("{x0:.4}")),
            (W - PAD, H - PAD + 16.0, "end", format!("{x1:.4}")),
            (W / 2.0, H - 12.0, "middle", self.x_label.to_string()),
            (PAD - 4.0, H - PAD, "end", format!("{y0:.3e}")),
            (PAD - 4.0, PAD + 4.0, "end", format!("{y1:.3e}")),
            (PAD, PAD - 8.0, "start", self.y_label.to_string()),
        ] {
            let _ = writeln!(
                s,
                r#"<text x="{x}" y="{y}" text-anchor="{anchor}" font-size="11">{}</text>"#,
                escape(&label)
            );
        }
        if let Some(r) = self.reference {
            let _ = writeln!(
                s,
                r#"<line x1="{PAD}" y1="{y:.3}" x2="{x2}" y2="{y:.3}" stroke="gray" stroke-dasharray="4 3"/>"#,
                y = sy(r),
                x2 = W - PAD
            );
        }
        let path: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.3},{:.3}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="1.2"/>"#,
            path.join(" ")
        );
        s.push_str("</svg>\n");
        s
    }
}
