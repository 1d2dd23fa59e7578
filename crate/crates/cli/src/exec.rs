//! Runs a manifest. Every command goes through [`execute`], so a manifest
//! written by one invocation reproduces its output byte for byte.

use std::collections::BTreeSet;

use serde::Serialize;
use serde_json::json;
use tridot::haar::{correlation_decay_table, exact_probability, CylinderEvent};
use tridot::ribbon::{derive_transition_table, transition_graph};
use tridot::sigma::{components, diagonal_scan, trace, TrajectoryEnd};
use tridot::stats::{
    classify, deep_structure_audit, merge_rate_curve, triangle_suite, DeepParams, Measure, Sampler, Verdict,
};
use tridot::Patch;

use crate::error::{usage, CliError};
use crate::manifest::{Command, Format, Manifest, Suite};
use crate::render::{render_ascii, render_pgm, render_svg, transition_diagram_svg, Layer, RenderSpec};
use crate::spec::{parse_geometry, parse_position, parse_range, parse_trace};

/// Command output and whether the properties it checks held.
pub struct Output {
    pub bytes: Vec<u8>,
    pub pass: bool,
}

impl Output {
    fn pass(bytes: impl Into<Vec<u8>>) -> Self {
        Self { bytes: bytes.into(), pass: true }
    }
}

fn csv_header(m: &Manifest) -> String {
    format!("# tridot manifest={} seed={}\n", m.hash(), m.seed)
}

fn json_doc(m: &Manifest, result: impl Serialize) -> Vec<u8> {
    let doc = json!({ "manifest": m.hash(), "seed": m.seed, "result": result });
    (serde_json::to_string_pretty(&doc).expect("serializable") + "\n").into_bytes()
}

fn measure(m: &Manifest) -> Result<Measure, CliError> {
    let name = m.measure.as_deref().ok_or_else(|| usage("this command needs a measure"))?;
    name.parse().map_err(|e: tridot::Error| usage(e.to_string()))
}

/// The input patch, or a sample of the measure on the geometry.
fn patch(m: &Manifest) -> Result<Patch, CliError> {
    if let Some(path) = &m.params.input {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.clone(), source })?;
        return Patch::from_text(&text).map_err(|e| usage(format!("{path}: {e}")));
    }
    let g = parse_geometry(m.geometry.as_deref().ok_or_else(|| usage("this command needs a geometry or an input patch"))?)?;
    Ok(measure(m)?.sample(&g, m.seed))
}

pub fn execute(m: &Manifest) -> Result<Output, CliError> {
    let p = &m.params;
    match m.command {
        Command::Sample => {
            let x = patch(m)?;
            match p.format.unwrap_or(Format::Text) {
                Format::Text => Ok(Output::pass(x.to_text())),
                Format::Ascii => Ok(Output::pass(render_ascii(&x, &RenderSpec { layers: [Layer::Y].into(), ..Default::default() })?)),
                f => Err(usage(format!("sample writes text or ascii, not {f:?}"))),
            }
        }
        Command::Trace => {
            let x = patch(m)?;
            let from = parse_position(p.from.as_deref().unwrap_or("0,0"))?;
            let t = trace(&x, from, p.steps.unwrap_or(100))?;
            let end = match t.end {
                TrajectoryEnd::InWindow(q) => format!("in_window {q}"),
                TrajectoryEnd::WindowExit(q) => format!("window_exit {q}"),
            };
            let mut s = csv_header(m) + &format!("# end={end}\nstep,k,l,move\n");
            for (i, q) in t.positions().enumerate() {
                let mv = t.moves.get(i).map_or(String::new(), |mv| mv.letter().to_string());
                s += &format!("{i},{},{},{mv}\n", q.k, q.l);
            }
            Ok(Output::pass(s))
        }
        Command::Components => {
            let table = components(&patch(m)?)?;
            Ok(Output::pass(csv_header(m) + &table.to_csv()))
        }
        Command::Scan => {
            let x = patch(m)?;
            let from = parse_position(p.from.as_deref().unwrap_or("0,0"))?;
            let scan = diagonal_scan(&x, from, parse_range(p.hrange.as_deref().unwrap_or("-16..16"))?)?;
            let mut rows: Vec<(i64, &str)> = Vec::new();
            rows.extend(scan.kset.iter().map(|&h| (h, "merged")));
            rows.extend(scan.lset.iter().map(|&h| (h, "unmerged")));
            rows.extend(scan.outside.iter().map(|&h| (h, "outside")));
            rows.sort();
            let mut s = csv_header(m) + "h,k,l,class\n";
            for (h, class) in rows {
                let q = from.diagonal(h);
                s += &format!("{h},{},{},{class}\n", q.k, q.l);
            }
            Ok(Output::pass(s))
        }
        Command::Stats => stats(m),
        Command::Classify => {
            let v = classify(
                &measure(m)?,
                &p.budget.clone().unwrap_or_default(),
                &p.thresholds.clone().unwrap_or_default(),
                m.seed,
            )?;
            let pass = match p.expect.as_deref() {
                None => true,
                Some("tree") => v.verdict == Verdict::TreeType,
                Some("ribbon") => v.verdict == Verdict::RibbonType,
                Some("inconclusive") => v.verdict == Verdict::Inconclusive,
                Some(e) => return Err(usage(format!("unknown expected verdict `{e}` (tree, ribbon or inconclusive)"))),
            };
            Ok(Output { bytes: json_doc(m, &v), pass })
        }
        Command::Render => {
            let x = patch(m)?;
            let mut spec = RenderSpec::default();
            if !p.layers.is_empty() {
                spec.layers = p.layers.iter().map(|l| Layer::parse(l)).collect::<Result<BTreeSet<_>, _>>()?;
            } else if x.geometry().as_triangle().is_none() {
                spec.layers.remove(&Layer::Components);
            }
            spec.traces = p.trace.iter().map(|t| parse_trace(t)).collect::<Result<_, _>>()?;
            if !spec.traces.is_empty() {
                spec.layers.insert(Layer::Trajectories);
            }
            if let Some(s) = p.scale {
                spec.scale = s;
            }
            match p.format.unwrap_or(Format::Svg) {
                Format::Ascii => Ok(Output::pass(render_ascii(&x, &spec)?)),
                Format::Svg => Ok(Output::pass(render_svg(&x, &spec)?)),
                Format::Pgm => Ok(Output::pass(render_pgm(&x, &spec)?)),
                f => Err(usage(format!("render writes ascii, svg or pgm, not {f:?}"))),
            }
        }
        Command::Oracle => {
            let parse = |s: &str| s.parse::<CylinderEvent>().map_err(|e| usage(e.to_string()));
            let a = parse(p.event.as_deref().ok_or_else(|| usage("oracle needs an event"))?)?;
            match &p.against {
                None => {
                    let pr = exact_probability(&a)?;
                    Ok(Output::pass(json_doc(
                        m,
                        json!({ "event": a.to_string(), "probability": pr.to_string(), "value": pr.to_f64() }),
                    )))
                }
                Some(b) => {
                    let b = parse(b)?;
                    let shifts = p
                        .shifts
                        .iter()
                        .map(|s| parse_position(s).map(|q| (q.k, q.l)))
                        .collect::<Result<Vec<_>, _>>()?;
                    let mut s = csv_header(m) + "shift_k,shift_l,difference,value\n";
                    for r in correlation_decay_table(&a, &b, &shifts)? {
                        s += &format!("{},{},{},{}\n", r.shift.0, r.shift.1, r.difference, r.difference.to_f64());
                    }
                    Ok(Output::pass(s))
                }
            }
        }
        Command::Transitions => {
            let shipped = transition_graph();
            let mut derived = derive_transition_table();
            let mut sorted = shipped.clone();
            sorted.sort();
            derived.sort();
            let pass = sorted == derived;
            let bytes = match p.format.unwrap_or(Format::Csv) {
                Format::Svg => transition_diagram_svg(),
                Format::Csv => {
                    let mut s = csv_header(m) + &format!("# derived table agrees: {pass}\nfrom,move,to,forced\n");
                    for e in &shipped {
                        s += &format!("\"{}\",{},\"{}\",{}\n", e.from, e.mv.letter(), e.to, e.forced);
                    }
                    s
                }
                f => return Err(usage(format!("transitions writes csv or svg, not {f:?}"))),
            };
            Ok(Output { bytes: bytes.into_bytes(), pass })
        }
    }
}

fn stats(m: &Manifest) -> Result<Output, CliError> {
    let p = &m.params;
    let sampler = measure(m)?;
    let suite = p.suite.ok_or_else(|| usage("stats needs a suite"))?;
    let trials = p.trials.unwrap_or(1000);
    let ns = |default: &[u32]| if p.n.is_empty() { default.to_vec() } else { p.n.clone() };
    match suite {
        Suite::Lemma22 | Suite::Cor23 | Suite::Extremal => {
            let t = triangle_suite(&sampler, &ns(&[8, 16, 32, 64]), trials, m.seed);
            let pass = t.points.iter().all(|q| match suite {
                Suite::Lemma22 => q.lemma22_failures == 0,
                Suite::Cor23 => q.interior_budget_failures == 0,
                _ => q.extremal_failures == 0,
            });
            Ok(Output { bytes: (csv_header(m) + &t.to_csv()).into_bytes(), pass })
        }
        Suite::Merge => {
            let c = merge_rate_curve(&sampler, p.h.unwrap_or(4), &ns(&[16, 64, 256]), trials, m.seed);
            Ok(Output { pass: c.is_non_decreasing(), bytes: (csv_header(m) + &c.to_csv()).into_bytes() })
        }
        Suite::Deep => {
            let d = DeepParams::default();
            let params = DeepParams {
                width: p.width.unwrap_or(d.width),
                depths: if p.depths.is_empty() { d.depths } else { p.depths.clone() },
                trials,
            };
            let s = deep_structure_audit(&sampler, params, m.seed);
            Ok(Output::pass(csv_header(m) + &s.to_csv()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manifest(command: Command) -> Manifest {
        let mut m = Manifest::new(command, 5);
        m.measure = Some("haar".into());
        m.geometry = Some("triangle:8".into());
        m
    }

    #[test]
    fn sample_round_trips_through_text() {
        let out = execute(&manifest(Command::Sample)).unwrap();
        let x = Patch::from_text(std::str::from_utf8(&out.bytes).unwrap()).unwrap();
        assert_eq!(x.geometry().len(), 45);
    }

    #[test]
    fn csv_carries_hash_and_seed() {
        let m = manifest(Command::Components);
        let out = String::from_utf8(execute(&m).unwrap().bytes).unwrap();
        assert!(out.starts_with(&format!("# tridot manifest={} seed=5\n", m.hash())));
    }

    #[test]
    fn unknown_measure_is_usage() {
        let mut m = manifest(Command::Sample);
        m.measure = Some("lebesgue".into());
        assert!(matches!(execute(&m), Err(CliError::Usage(_))));
    }

    #[test]
    fn transitions_agree() {
        let out = execute(&Manifest::new(Command::Transitions, 0)).unwrap();
        assert!(out.pass);
    }
}
