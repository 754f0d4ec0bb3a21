//! CSV and SVG export of raster grids.
//!
//! The CSV has one row per cell, `x,y,value,class`, row-major with y outer,
//! numbers printed with nine significant digits. The SVG draws one `<g>` layer
//! per class: class 0 is the background square and class `t` is the region
//! where the magnitude exceeds the `t`-th threshold, traced by marching squares
//! on the field padded with a ring of zeros so every contour closes.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

use prefsens_core::contour::contour;
use prefsens_core::raster::RasterGrid;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Svg,
}

/// Axis captions for the SVG frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Axes {
    pub x: String,
    pub y: String,
}

pub fn write_csv<W: Write>(grid: &RasterGrid, out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "y", "value", "class"])?;
    for (x, y, value, class) in grid.cells() {
        w.write_record([
            format!("{x:.8e}"),
            format!("{y:.8e}"),
            format!("{value:.8e}"),
            class.to_string(),
        ])?;
    }
    w.flush()
}

/// One parsed CSV row.
#[derive(Debug, Clone, Copy, PartialEq, serde::Deserialize)]
pub struct CsvCell {
    pub x: f64,
    pub y: f64,
    pub value: f64,
    pub class: usize,
}

pub fn read_csv<R: Read>(input: R) -> std::result::Result<Vec<CsvCell>, csv::Error> {
    csv::Reader::from_reader(input).deserialize().collect()
}

const PALETTE: [&str; 8] = ["#fff7ec", "#fee8c8", "#fdd49e", "#fdbb84", "#fc8d59", "#ef6548", "#d7301f", "#990000"];
const PLOT: f64 = 512.0;
const MARGIN: f64 = 56.0;

fn colour(class: usize, classes: usize) -> &'static str {
    let k = if classes <= 1 { 0 } else { class * (PALETTE.len() - 1) / (classes - 1) };
    PALETTE[k.min(PALETTE.len() - 1)]
}

pub fn render_svg(grid: &RasterGrid, axes: &Axes) -> String {
    let res = grid.resolution();
    let padded = res + 2;
    let mut field = vec![0.0; padded * padded];
    for j in 0..res {
        for i in 0..res {
            field[(j + 1) * padded + i + 1] = grid.value(i, j);
        }
    }
    // padded node (pi, pj) sits at the center of cell (pi - 1, pj - 1)
    let to_svg = |(pi, pj): (f64, f64)| {
        let x = (pi - 0.5) / res as f64;
        let y = (pj - 0.5) / res as f64;
        (MARGIN + x * PLOT, MARGIN + (1.0 - y) * PLOT)
    };
    let size = PLOT + 2.0 * MARGIN;
    let classes = grid.thresholds().len() + 1;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    let _ = writeln!(
        s,
        r#"<defs><clipPath id="plot"><rect x="{MARGIN}" y="{MARGIN}" width="{PLOT}" height="{PLOT}"/></clipPath></defs>"#
    );
    let _ = writeln!(
        s,
        r#"<g class="class-0"><rect x="{MARGIN}" y="{MARGIN}" width="{PLOT}" height="{PLOT}" fill="{}"/></g>"#,
        colour(0, classes)
    );
    for (t, &level) in grid.thresholds().iter().enumerate() {
        let mut d = String::new();
        for line in contour(&field, padded, padded, level) {
            for (k, &p) in line.iter().enumerate() {
                let (x, y) = to_svg(p);
                let _ = write!(d, "{}{x:.2},{y:.2}", if k == 0 { "M" } else { "L" });
            }
            d.push('Z');
        }
        let _ = writeln!(
            s,
            r#"<g class="class-{}" data-threshold="{level}" clip-path="url(#plot)"><path fill="{}" fill-rule="evenodd" d="{d}"/></g>"#,
            t + 1,
            colour(t + 1, classes)
        );
    }
    let _ = writeln!(
        s,
        r#"<g class="frame" fill="none" stroke="black"><rect x="{MARGIN}" y="{MARGIN}" width="{PLOT}" height="{PLOT}"/>"#
    );
    for k in 0..=4 {
        let v = k as f64 / 4.0;
        let px = MARGIN + v * PLOT;
        let py = MARGIN + (1.0 - v) * PLOT;
        let bottom = MARGIN + PLOT;
        let _ = writeln!(s, r#"<line x1="{px}" y1="{bottom}" x2="{px}" y2="{}"/>"#, bottom + 5.0);
        let _ = writeln!(s, r#"<line x1="{}" y1="{py}" x2="{MARGIN}" y2="{py}"/>"#, MARGIN - 5.0);
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r#"<g class="labels" font-family="sans-serif" font-size="12">"#);
    for k in 0..=4 {
        let v = k as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{v}</text>"#,
            MARGIN + v * PLOT,
            MARGIN + PLOT + 18.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">{v}</text>"#,
            MARGIN - 8.0,
            MARGIN + (1.0 - v) * PLOT + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        MARGIN + PLOT / 2.0,
        size - 12.0,
        escape(&axes.x)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        MARGIN + PLOT / 2.0,
        MARGIN + PLOT / 2.0,
        escape(&axes.y)
    );
    let _ = writeln!(s, "</g>\n</svg>");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn export(grid: &RasterGrid, format: Format, axes: &Axes, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    match format {
        Format::Csv => write_csv(grid, &mut out),
        Format::Svg => out.write_all(render_svg(grid, axes).as_bytes()),
    }
    .and_then(|_| out.flush())
    .map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> RasterGrid {
        RasterGrid::from_values(2, vec![0.5, 1.5, 2.5, f64::INFINITY], vec![1.0, 2.0]).unwrap()
    }

    #[test]
    fn csv_rows_and_round_trip() {
        let mut buf = Vec::new();
        write_csv(&small(), &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], "x,y,value,class");
        assert_eq!(lines[1], "2.50000000e-1,2.50000000e-1,5.00000000e-1,0");
        assert_eq!(lines[4], "7.50000000e-1,7.50000000e-1,inf,2");
        let cells = read_csv(buf.as_slice()).unwrap();
        assert_eq!(cells.len(), 4);
        assert_eq!(cells[1], CsvCell { x: 0.75, y: 0.25, value: 1.5, class: 1 });
        assert!(cells[3].value.is_infinite());
    }

    #[test]
    fn svg_has_one_layer_per_class() {
        let axes = Axes { x: "p_ik".into(), y: "p_kj".into() };
        let svg = render_svg(&small(), &axes);
        for t in 0..3 {
            assert!(svg.contains(&format!(r#"class="class-{t}""#)));
        }
        assert!(!svg.contains("class-3"));
        assert_eq!(render_svg(&small(), &axes), svg);
    }
}
