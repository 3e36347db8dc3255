//! Plain SVG renderings of Voronoi diagrams.

use num_complex::Complex64;
use phyllotaxis::colouring::{Colour, ColourMap, Shade};
use phyllotaxis::voronoi::{Cell, VoronoiDiagram};
use std::fmt::Write;

const PALETTE: [&str; 4] = ["#e8c547", "#30638e", "#d1495b", "#5c946e"];

fn header(r: f64) -> String {
    let side = 2.0 * r;
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{:.3} {:.3} {side:.3} {side:.3}\" width=\"800\" height=\"800\">\n<g transform=\"scale(1,-1)\" stroke=\"#222\" stroke-width=\"{:.4}\">\n",
        -r,
        -r,
        r / 400.0
    )
}

fn polygon(out: &mut String, poly: &[Complex64], fill: &str) {
    let pts: Vec<String> = poly.iter().map(|p| format!("{:.4},{:.4}", p.re, p.im)).collect();
    let _ = writeln!(out, "<polygon points=\"{}\" fill=\"{fill}\"/>", pts.join(" "));
}

fn finish(mut out: String) -> String {
    out.push_str("</g>\n</svg>\n");
    out
}

fn edge_fill(cell: &Cell) -> &'static str {
    match cell.polygon.len() {
        5 => "#d1495b",
        7 => "#30638e",
        6 => "#f4f1de",
        _ => "#aaaaaa",
    }
}

/// Cells shaded by edge count: pentagons red, heptagons blue.
pub fn voronoi(diag: &VoronoiDiagram) -> String {
    let mut out = header(diag.clip_radius);
    for cell in diag.cells.iter().flatten() {
        let fill = if cell.boundary { "#ffffff" } else { edge_fill(cell) };
        polygon(&mut out, &cell.polygon, fill);
    }
    finish(out)
}

fn palette(c: Colour) -> &'static str {
    PALETTE[(c[0] + 2 * c[1]) as usize % 4]
}

pub fn four_colour(diag: &VoronoiDiagram, colours: &ColourMap) -> String {
    let mut out = header(diag.clip_radius);
    for cell in diag.cells.iter().flatten() {
        let fill = colours.colour(cell.site).map_or("#ffffff", palette);
        polygon(&mut out, &cell.polygon, fill);
    }
    finish(out)
}

pub fn black_white(diag: &VoronoiDiagram, shades: &[Option<Shade>], annulus: (f64, f64)) -> String {
    let mut out = header(diag.clip_radius);
    for cell in diag.cells.iter().flatten() {
        let r = diag.sites[cell.site].norm();
        let fill = match shades.get(cell.site).copied().flatten() {
            _ if cell.boundary || r < annulus.0 || r >= annulus.1 => "#ffffff",
            Some(Shade::Black) => "#111111",
            Some(Shade::White) => "#eeeeee",
            None => "#ffffff",
        };
        polygon(&mut out, &cell.polygon, fill);
    }
    finish(out)
}
