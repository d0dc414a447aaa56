//! Bit-exact renderers: plain text, PBM `P1` and SVG.

use std::fmt::Write as _;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{CaGrid, OverlayClass, OverlayGrid};
use crate::error::{Error, Result};

const CELL: usize = 4;
const SET_FILL: &str = "#000000";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RenderFormat {
    Text,
    Pbm,
    Svg,
}

impl FromStr for RenderFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "text" => Ok(RenderFormat::Text),
            "pbm" => Ok(RenderFormat::Pbm),
            "svg" => Ok(RenderFormat::Svg),
            other => Err(format!("unknown format {other:?}: expected text, pbm or svg")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RenderOptions {
    /// Adds a carry line under each row in text output.
    pub carries: bool,
}

fn class_fill(class: OverlayClass) -> Option<&'static str> {
    match class {
        OverlayClass::Identical => Some("#cccccc"),
        OverlayClass::IntegerPerturbation => Some("#d62728"),
        OverlayClass::FractionalPerturbation => Some("#1f77b4"),
        OverlayClass::Outside => None,
    }
}

fn svg_document(width: usize, height: usize, rects: impl Iterator<Item = (usize, usize, &'static str)>) -> String {
    let (w, h) = (width * CELL, height * CELL);
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(out, r##"<rect x="0" y="0" width="{w}" height="{h}" fill="#ffffff"/>"##);
    for (row, col, fill) in rects {
        let _ = writeln!(
            out,
            r#"<rect x="{}" y="{}" width="{CELL}" height="{CELL}" fill="{fill}"/>"#,
            col * CELL,
            row * CELL
        );
    }
    out.push_str("</svg>\n");
    out
}

fn pbm_document(rows: &[Vec<u8>], width: usize) -> String {
    let mut out = format!("P1\n{} {}\n", width, rows.len());
    for row in rows {
        let line: Vec<&str> = row.iter().map(|&b| if b == 1 { "1" } else { "0" }).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

fn emit(sink: &mut dyn Write, doc: &str) -> Result<usize> {
    sink.write_all(doc.as_bytes())?;
    Ok(doc.len())
}

/// Writes `grid` as its rendered rectangle, highest lattice position on the
/// left. Returns the number of bytes written.
pub fn render(grid: &CaGrid, format: RenderFormat, opts: RenderOptions, sink: &mut dyn Write) -> Result<usize> {
    if grid.rows.is_empty() {
        return Err(Error::GridShape("one row"));
    }
    let cols: Vec<i64> = grid.columns().collect();
    let bits: Vec<Vec<u8>> = grid.rows.iter().map(|r| cols.iter().map(|&j| r.bit(j)).collect()).collect();
    let doc = match format {
        RenderFormat::Pbm => pbm_document(&bits, cols.len()),
        RenderFormat::Text => {
            let mut out = String::new();
            for (row, line) in grid.rows.iter().zip(&bits) {
                out.extend(line.iter().map(|&b| if b == 1 { '#' } else { '.' }));
                out.push('\n');
                if opts.carries {
                    out.extend(cols.iter().map(|&j| if row.carry(j) == 1 { '¹' } else { '·' }));
                    out.push('\n');
                }
            }
            out
        }
        RenderFormat::Svg => {
            let rects = bits.iter().enumerate().flat_map(|(n, line)| {
                line.iter().enumerate().filter(|(_, &b)| b == 1).map(move |(c, _)| (n, c, SET_FILL))
            });
            svg_document(cols.len(), bits.len(), rects)
        }
    };
    emit(sink, &doc)
}

/// Writes an overlay. Text uses `#`/`.` for identical cells, `I` and `F`
/// for integer and fractional perturbations and a space outside. PBM marks
/// perturbed cells. SVG draws identical set cells and every perturbed cell.
pub fn render_overlay(grid: &OverlayGrid, format: RenderFormat, sink: &mut dyn Write) -> Result<usize> {
    if grid.rows.is_empty() {
        return Err(Error::GridShape("one row"));
    }
    let perturbed = |c: &super::OverlayCell| {
        matches!(c.class, OverlayClass::IntegerPerturbation | OverlayClass::FractionalPerturbation)
    };
    let doc = match format {
        RenderFormat::Pbm => {
            let bits: Vec<Vec<u8>> =
                grid.rows.iter().map(|r| r.iter().map(|c| perturbed(c) as u8).collect()).collect();
            pbm_document(&bits, grid.width)
        }
        RenderFormat::Text => {
            let mut out = String::new();
            for row in &grid.rows {
                out.extend(row.iter().map(|c| match c.class {
                    OverlayClass::Identical if c.bit == 1 => '#',
                    OverlayClass::Identical => '.',
                    OverlayClass::IntegerPerturbation => 'I',
                    OverlayClass::FractionalPerturbation => 'F',
                    OverlayClass::Outside => ' ',
                }));
                out.push('\n');
            }
            out
        }
        RenderFormat::Svg => {
            let rects = grid.rows.iter().enumerate().flat_map(|(n, row)| {
                row.iter().enumerate().filter_map(move |(col, c)| {
                    let drawn = perturbed(c) || (c.class == OverlayClass::Identical && c.bit == 1);
                    if drawn {
                        class_fill(c.class).map(|f| (n, col, f))
                    } else {
                        None
                    }
                })
            });
            svg_document(grid.width, grid.rows.len(), rects)
        }
    };
    emit(sink, &doc)
}
