//! ASCII, SVG and PGM pictures of patches, and the SVG state diagram.
//!
//! `k` runs rightward and `l` upward. Output bytes depend only on the inputs.

use std::collections::BTreeSet;
use std::fmt::Write;

use tridot::ribbon::{phi, transition_graph, varpi, StateLabel};
use tridot::sigma::{components, trace, ComponentTable};
use tridot::{Move, Patch, Position};

use crate::error::{usage, CliError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Layer {
    Cells,
    Y,
    Components,
    Deep,
    Extremal,
    Trajectories,
    States,
}

impl Layer {
    pub const ALL: [Layer; 7] =
        [Layer::Cells, Layer::Y, Layer::Components, Layer::Deep, Layer::Extremal, Layer::Trajectories, Layer::States];

    pub fn name(self) -> &'static str {
        match self {
            Layer::Cells => "cells",
            Layer::Y => "y",
            Layer::Components => "components",
            Layer::Deep => "deep",
            Layer::Extremal => "extremal",
            Layer::Trajectories => "trajectories",
            Layer::States => "states",
        }
    }

    pub fn parse(s: &str) -> Result<Layer, CliError> {
        Layer::ALL.into_iter().find(|l| l.name() == s).ok_or_else(|| {
            let names: Vec<_> = Layer::ALL.iter().map(|l| l.name()).collect();
            usage(format!("unknown layer `{s}` (expected one of {})", names.join(", ")))
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RenderSpec {
    pub layers: BTreeSet<Layer>,
    pub traces: Vec<(Position, usize)>,
    /// Pixels per cell.
    pub scale: u32,
}

impl Default for RenderSpec {
    fn default() -> Self {
        Self { layers: [Layer::Cells, Layer::Y, Layer::Components].into(), traces: Vec::new(), scale: 12 }
    }
}

impl RenderSpec {
    fn has(&self, l: Layer) -> bool {
        self.layers.contains(&l)
    }

    /// Only SVG draws component fill.
    fn needs_table(&self, fill: bool) -> bool {
        (fill && self.has(Layer::Components)) || self.has(Layer::Deep) || self.has(Layer::Extremal)
    }
}

/// What a cell shows, lowest to highest priority.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Mark {
    Zero,
    Y,
    Deep,
    Deep2,
    Extremal,
}

struct Frame<'a> {
    x: &'a Patch,
    table: Option<ComponentTable>,
    k_lo: i64,
    l_hi: i64,
    cols: i64,
    rows: i64,
}

impl<'a> Frame<'a> {
    fn new(x: &'a Patch, spec: &RenderSpec, fill: bool) -> Result<Self, CliError> {
        let g = x.geometry();
        if g.is_empty() {
            return Err(usage("cannot render an empty window"));
        }
        let table = match (spec.needs_table(fill), g.as_triangle()) {
            (false, _) => None,
            (true, Some(_)) => Some(components(x)?),
            (true, None) => return Err(usage("components, deep and extremal layers need a triangle geometry")),
        };
        let (k_lo, k_hi) = g.k_range();
        let (l_lo, l_hi) = g.l_range();
        Ok(Self { x, table, k_lo, l_hi, cols: k_hi - k_lo + 1, rows: l_hi - l_lo + 1 })
    }

    fn mark(&self, p: Position, spec: &RenderSpec) -> Mark {
        if !self.x.bit(p) {
            return Mark::Zero;
        }
        let Some(t) = &self.table else { return Mark::Y };
        if spec.has(Layer::Extremal) && t.component_of(p).is_some_and(|c| t.components()[c as usize].extremal == p) {
            return Mark::Extremal;
        }
        if spec.has(Layer::Deep) {
            if t.marking().is_deep2(p) {
                return Mark::Deep2;
            }
            if t.marking().is_deep(p) {
                return Mark::Deep;
            }
        }
        Mark::Y
    }

    fn col(&self, p: Position) -> i64 {
        p.k - self.k_lo
    }

    fn row(&self, p: Position) -> i64 {
        self.l_hi - p.l
    }
}

/// One line per row, top row first; `.` 0-cell, `#` Y-cell, `Z` deep, `*` deep2, `E` extremal.
pub fn render_ascii(x: &Patch, spec: &RenderSpec) -> Result<String, CliError> {
    let f = Frame::new(x, spec, false)?;
    let mut out = String::new();
    for r in x.geometry().rows().iter().rev() {
        let mut line = "  ".repeat((r.k_lo - f.k_lo) as usize);
        for k in r.k_lo..=r.k_hi {
            let c = match f.mark(Position::new(k, r.l), spec) {
                Mark::Zero => '.',
                Mark::Y => '#',
                Mark::Deep => 'Z',
                Mark::Deep2 => '*',
                Mark::Extremal => 'E',
            };
            line.push(c);
            line.push(' ');
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    Ok(out)
}

/// Binary greymap, `scale` pixels per cell.
pub fn render_pgm(x: &Patch, spec: &RenderSpec) -> Result<Vec<u8>, CliError> {
    if x.geometry().has_row_gaps() {
        return Err(usage("pgm output needs a window whose rows have no gaps"));
    }
    let f = Frame::new(x, spec, false)?;
    let s = spec.scale.max(1) as i64;
    let (w, h) = (f.cols * s, f.rows * s);
    let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
    let mut px = vec![224u8; (w * h) as usize];
    for p in x.geometry().cells() {
        let v = match f.mark(p, spec) {
            Mark::Zero => 255,
            Mark::Y => 128,
            Mark::Deep => 48,
            Mark::Deep2 => 0,
            Mark::Extremal => 80,
        };
        for dy in 0..s {
            let row = (f.row(p) * s + dy) * w;
            for dx in 0..s {
                px[(row + f.col(p) * s + dx) as usize] = v;
            }
        }
    }
    out.extend_from_slice(&px);
    Ok(out)
}

/// Fill colour of a component, a fixed function of its id.
pub fn component_color(id: u32) -> String {
    let hue = (id as u64 * 137) % 360;
    let light = 48 + (id as u64 * 7) % 20;
    format!("hsl({hue},62%,{light}%)")
}

/// One `<g>` per enabled layer, in the order cells, y, components, deep,
/// extremal, trajectories, states; deep marks therefore sit above component fill.
pub fn render_svg(x: &Patch, spec: &RenderSpec) -> Result<String, CliError> {
    let f = Frame::new(x, spec, true)?;
    let s = spec.scale.max(4) as i64;
    let (w, h) = (f.cols * s, f.rows * s);
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    );
    let cells: Vec<Position> = x.geometry().cells().collect();
    let rect = |out: &mut String, p: Position, attrs: &str| {
        writeln!(out, "<rect x=\"{}\" y=\"{}\" width=\"{s}\" height=\"{s}\" {attrs}/>", f.col(p) * s, f.row(p) * s).unwrap();
    };
    let center = |p: Position| (f.col(p) * s + s / 2, f.row(p) * s + s / 2);

    for layer in &spec.layers {
        writeln!(out, "<g id=\"{}\">", layer.name()).unwrap();
        match layer {
            Layer::Cells => {
                for &p in &cells {
                    rect(&mut out, p, "fill=\"white\" stroke=\"#ccc\" stroke-width=\"0.5\"");
                }
            }
            Layer::Y => {
                for &p in cells.iter().filter(|&&p| x.bit(p)) {
                    rect(&mut out, p, "fill=\"#555\"");
                }
            }
            Layer::Components => {
                let t = f.table.as_ref().unwrap();
                for &p in &cells {
                    if let Some(c) = t.component_of(p) {
                        rect(&mut out, p, &format!("fill=\"{}\" data-component=\"{c}\"", component_color(c)));
                    }
                }
            }
            Layer::Deep => {
                let m = f.table.as_ref().unwrap().marking();
                for &p in &cells {
                    let (cx, cy) = center(p);
                    if m.is_deep2(p) {
                        writeln!(out, "<circle cx=\"{cx}\" cy=\"{cy}\" r=\"{}\" fill=\"#d00\"/>", s / 3).unwrap();
                    } else if m.is_deep(p) {
                        writeln!(out, "<circle cx=\"{cx}\" cy=\"{cy}\" r=\"{}\" fill=\"black\"/>", s / 5).unwrap();
                    }
                }
            }
            Layer::Extremal => {
                for c in f.table.as_ref().unwrap().components() {
                    rect(&mut out, c.extremal, "fill=\"none\" stroke=\"black\" stroke-width=\"2\"");
                }
            }
            Layer::Trajectories => {
                for &(p, n) in &spec.traces {
                    let t = trace(x, p, n)?;
                    let pts: Vec<String> = t
                        .positions()
                        .map(|q| {
                            let (cx, cy) = center(q);
                            format!("{cx},{cy}")
                        })
                        .collect();
                    writeln!(
                        out,
                        "<polyline points=\"{}\" fill=\"none\" stroke=\"#06c\" stroke-width=\"2\" marker-end=\"url(#arrow)\"/>",
                        pts.join(" ")
                    )
                    .unwrap();
                }
            }
            Layer::States => {
                for &p in cells.iter().filter(|&&p| x.bit(p)) {
                    let st = varpi(x, p)?;
                    let (cx, cy) = center(p);
                    writeln!(
                        out,
                        "<text x=\"{cx}\" y=\"{cy}\" font-size=\"{}\" text-anchor=\"middle\" dominant-baseline=\"middle\">{st}</text>",
                        (s / 3).max(4)
                    )
                    .unwrap();
                }
            }
        }
        out.push_str("</g>\n");
    }
    if spec.has(Layer::Trajectories) {
        out.push_str(
            "<defs><marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"8\" refY=\"5\" markerWidth=\"6\" markerHeight=\"6\" orient=\"auto\">\
             <path d=\"M0,0 L10,5 L0,10 z\" fill=\"#06c\"/></marker></defs>\n",
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// The twelve states on a circle with their `T` (blue) and `S` (orange) arrows.
/// Forced arrows are thick and carry `class="forced"`; states without a
/// potential are dashed, and `(00,0)` carries a "not in Y" badge.
pub fn transition_diagram_svg() -> String {
    let states: Vec<StateLabel> = StateLabel::all().collect();
    let (cx, cy, radius, node) = (300.0f64, 300.0f64, 220.0f64, 30.0f64);
    let at = |i: usize| {
        let a = std::f64::consts::TAU * i as f64 / states.len() as f64 - std::f64::consts::FRAC_PI_2;
        (cx + radius * a.cos(), cy + radius * a.sin())
    };
    let index = |s: StateLabel| states.iter().position(|&t| t == s).unwrap();
    let mut out = String::from(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"600\" height=\"600\" viewBox=\"0 0 600 600\">\n<defs>\n",
    );
    for (id, colour) in [("T", "#06c"), ("S", "#e80")] {
        writeln!(
            out,
            "<marker id=\"arrow-{id}\" viewBox=\"0 0 10 10\" refX=\"10\" refY=\"5\" markerWidth=\"7\" markerHeight=\"7\" orient=\"auto\"><path d=\"M0,0 L10,5 L0,10 z\" fill=\"{colour}\"/></marker>"
        )
        .unwrap();
    }
    out.push_str("</defs>\n<g id=\"edges\">\n");
    for e in transition_graph() {
        let ((x0, y0), (x1, y1)) = (at(index(e.from)), at(index(e.to)));
        let (dx, dy) = (x1 - x0, y1 - y0);
        let len = (dx * dx + dy * dy).sqrt();
        let (ux, uy) = (dx / len, dy / len);
        // Opposite arrows between one pair of states are offset sideways.
        let (ox, oy) = (-uy * 4.0, ux * 4.0);
        let (id, colour) = if e.mv == Move::T { ("T", "#06c") } else { ("S", "#e80") };
        writeln!(
            out,
            "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"{colour}\" stroke-width=\"{}\" marker-end=\"url(#arrow-{id})\" class=\"{}\" data-from=\"{}\" data-move=\"{id}\" data-to=\"{}\"/>",
            x0 + ux * node + ox,
            y0 + uy * node + oy,
            x1 - ux * node + ox,
            y1 - uy * node + oy,
            if e.forced { 3 } else { 1 },
            if e.forced { "forced" } else { "free" },
            e.from,
            e.to
        )
        .unwrap();
    }
    out.push_str("</g>\n<g id=\"states\">\n");
    for (i, &s) in states.iter().enumerate() {
        let (x, y) = at(i);
        let dash = if phi(s).is_none() { " stroke-dasharray=\"4 3\"" } else { "" };
        writeln!(out, "<circle cx=\"{x:.1}\" cy=\"{y:.1}\" r=\"{node}\" fill=\"white\" stroke=\"black\"{dash}/>").unwrap();
        writeln!(out, "<text x=\"{x:.1}\" y=\"{:.1}\" font-size=\"13\" text-anchor=\"middle\">{s}</text>", y - 3.0).unwrap();
        let label = phi(s).map_or("φ undefined".to_string(), |v| format!("φ={v}"));
        writeln!(out, "<text x=\"{x:.1}\" y=\"{:.1}\" font-size=\"10\" text-anchor=\"middle\">{label}</text>", y + 12.0).unwrap();
        if s.to_string() == "00,0" {
            writeln!(
                out,
                "<text x=\"{x:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"middle\" fill=\"#d00\" class=\"badge\">not in Y</text>",
                y - node - 6.0
            )
            .unwrap();
        }
    }
    out.push_str("</g>\n</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use tridot::Geometry;

    fn hand() -> Patch {
        Patch::triangle_from_bottom_row(Position::ORIGIN, &[true, false, true]).unwrap()
    }

    #[test]
    fn hand_triangle_ascii() {
        assert_eq!(render_ascii(&hand(), &RenderSpec::default()).unwrap(), ".\n# #\n# . #\n");
    }

    #[test]
    fn zero_patch_is_all_dots() {
        let x = Patch::zeros(Geometry::rect(0..=2, 0..=1).unwrap());
        assert_eq!(render_ascii(&x, &RenderSpec::default()).unwrap(), ". . .\n. . .\n");
    }

    #[test]
    fn hand_triangle_svg_component() {
        let svg = render_svg(&hand(), &RenderSpec::default()).unwrap();
        let c0 = component_color(0);
        let filled = svg.matches(&format!("fill=\"{c0}\"")).count();
        assert_eq!(filled, 3);
        assert!(svg.find("<g id=\"components\">").unwrap() > svg.find("<g id=\"y\">").unwrap());
    }

    #[test]
    fn deep_marks_in_ascii() {
        let spec = RenderSpec { layers: [Layer::Y, Layer::Deep, Layer::Extremal].into(), ..RenderSpec::default() };
        let a = render_ascii(&hand(), &spec).unwrap();
        assert!(a.contains('E') && a.contains('Z'));
    }

    #[test]
    fn pgm_size() {
        let spec = RenderSpec { scale: 2, ..RenderSpec::default() };
        let bytes = render_pgm(&hand(), &spec).unwrap();
        assert!(bytes.starts_with(b"P5\n6 6\n255\n"));
        assert_eq!(bytes.len(), "P5\n6 6\n255\n".len() + 36);
    }

    #[test]
    fn diagram_marks() {
        let svg = transition_diagram_svg();
        assert!(svg.contains("class=\"forced\" data-from=\"01,0\" data-move=\"S\" data-to=\"00,2\""));
        assert!(svg.contains("class=\"forced\" data-from=\"10,0\" data-move=\"T\" data-to=\"00,1\""));
        assert!(svg.contains("not in Y"));
    }
}
