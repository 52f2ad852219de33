//! Static SVG charts built from the CSV rows alone, so re-plotting a CSV
//! reproduces the same file.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::report::{Fig3Row, Fig4Row};

const W: f64 = 720.0;
const H: f64 = 420.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 4] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728"];

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="25" text-anchor="middle" font-size="15">{}</text>"#,
        (LEFT + W - RIGHT) / 2.0,
        escape(title)
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn axes(out: &mut String, x_label: &str, y_label: &str) {
    let (x0, y0, x1) = (LEFT, H - BOTTOM, W - RIGHT);
    let _ = writeln!(
        out,
        r#"<path d="M{x0:.1},{TOP:.1} V{y0:.1} H{x1:.1}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        H - 15.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="20" y="{:.1}" text-anchor="middle" transform="rotate(-90 20 {:.1})">{}</text>"#,
        (TOP + y0) / 2.0,
        (TOP + y0) / 2.0,
        escape(y_label)
    );
}

fn legend(out: &mut String, names: &[String], dashed_threshold: Option<f64>) {
    let x = W - RIGHT + 20.0;
    for (i, name) in names.iter().enumerate() {
        let y = TOP + 10.0 + 20.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{x:.1}" y="{:.1}" width="12" height="12" fill="{}"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            y - 10.0,
            PALETTE[i % PALETTE.len()],
            x + 18.0,
            y,
            escape(name)
        );
    }
    if let Some(t) = dashed_threshold {
        let y = TOP + 10.0 + 20.0 * names.len() as f64;
        let _ = writeln!(
            out,
            r#"<path d="M{x:.1},{:.1} h12" stroke="black" stroke-dasharray="4,3"/><text x="{:.1}" y="{y:.1}">threshold {t}</text>"#,
            y - 4.0,
            x + 18.0
        );
    }
}

/// Grouped bars of mean detection time (log scale): one group per
/// collusion level, one bar per network generation.
pub fn fig3_svg(rows: &[Fig3Row], preset: &str) -> String {
    // (collusion key, gen) -> cell mean
    let mut cells: BTreeMap<(String, String), Option<f64>> = BTreeMap::new();
    let mut collusions: Vec<(f64, String)> = Vec::new();
    let mut gens: Vec<String> = Vec::new();
    for r in rows.iter().filter(|r| r.preset == preset) {
        let key = format!("{}", r.collusion);
        if !collusions.iter().any(|(_, k)| *k == key) {
            collusions.push((r.collusion, key.clone()));
        }
        if !gens.contains(&r.gen) {
            gens.push(r.gen.clone());
        }
        cells.entry((key, r.gen.clone())).or_insert(r.mean);
    }
    collusions.sort_by(|a, b| a.0.total_cmp(&b.0));
    gens.sort();

    let values: Vec<f64> = cells.values().flatten().copied().filter(|v| *v > 0.0).collect();
    let (mut lo, mut hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v.log10()), hi.max(v.log10())));
    if values.is_empty() {
        (lo, hi) = (0.0, 1.0);
    }
    let (lo, hi) = (lo.floor(), hi.ceil().max(lo.floor() + 1.0));

    let mut out = String::new();
    header(&mut out, &format!("Time to detect malicious miner ({preset})"));
    axes(&mut out, "collusion fraction", "detection time (s, log scale)");
    let plot_h = H - BOTTOM - TOP;
    let y_of = |v: f64| H - BOTTOM - (v.log10() - lo) / (hi - lo) * plot_h;
    let mut decade = lo as i32;
    while decade as f64 <= hi {
        let y = y_of(10f64.powi(decade));
        let _ = writeln!(
            out,
            r##"<path d="M{LEFT:.1},{y:.1} H{:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" text-anchor="end">1e{decade}</text>"##,
            W - RIGHT,
            LEFT - 6.0,
            y + 4.0
        );
        decade += 1;
    }

    let group_w = (W - RIGHT - LEFT) / collusions.len().max(1) as f64;
    let bar_w = group_w * 0.7 / gens.len().max(1) as f64;
    for (gi, (_, ckey)) in collusions.iter().enumerate() {
        let gx = LEFT + group_w * gi as f64 + group_w * 0.15;
        for (bi, gen) in gens.iter().enumerate() {
            let x = gx + bar_w * bi as f64;
            match cells.get(&(ckey.clone(), gen.clone())).copied().flatten() {
                Some(v) if v > 0.0 => {
                    let y = y_of(v);
                    let _ = writeln!(
                        out,
                        r#"<rect x="{x:.1}" y="{y:.1}" width="{:.1}" height="{:.1}" fill="{}"><title>{gen} {ckey}: {v}</title></rect>"#,
                        bar_w - 2.0,
                        H - BOTTOM - y,
                        PALETTE[bi % PALETTE.len()]
                    );
                }
                _ => {
                    let _ = writeln!(
                        out,
                        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="10">n/d</text>"#,
                        x + bar_w / 2.0,
                        H - BOTTOM - 4.0
                    );
                }
            }
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{ckey}</text>"#,
            LEFT + group_w * (gi as f64 + 0.5),
            H - BOTTOM + 18.0
        );
    }
    legend(&mut out, &gens, None);
    out.push_str("</svg>\n");
    out
}

/// Reputation trajectories of every engine for one seed, with the
/// detection threshold dashed.
pub fn fig4_svg(rows: &[Fig4Row], seed: u64, threshold: f64) -> String {
    let mut series: Vec<(String, Vec<(u64, f64)>)> = Vec::new();
    for r in rows.iter().filter(|r| r.seed == seed) {
        match series.iter_mut().find(|(e, _)| *e == r.engine) {
            Some((_, pts)) => pts.push((r.round, r.reputation)),
            None => series.push((r.engine.clone(), vec![(r.round, r.reputation)])),
        }
    }
    let max_round = series
        .iter()
        .flat_map(|(_, p)| p.iter().map(|(r, _)| *r))
        .max()
        .unwrap_or(1)
        .max(1) as f64;

    let mut out = String::new();
    header(&mut out, &format!("Reputation of the watched miner (seed {seed})"));
    axes(&mut out, "round", "reputation");
    let plot_w = W - RIGHT - LEFT;
    let plot_h = H - BOTTOM - TOP;
    let x_of = |r: f64| LEFT + r / max_round * plot_w;
    let y_of = |v: f64| H - BOTTOM - v.clamp(0.0, 1.0) * plot_h;
    for tick in 0..=5 {
        let v = tick as f64 / 5.0;
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{v}</text>"#,
            LEFT - 6.0,
            y_of(v) + 4.0
        );
    }
    for tick in 0..=5 {
        let r = (max_round * tick as f64 / 5.0).round();
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{r}</text>"#,
            x_of(r),
            H - BOTTOM + 18.0
        );
    }
    let _ = writeln!(
        out,
        r#"<path d="M{LEFT:.1},{:.1} H{:.1}" stroke="black" stroke-dasharray="4,3"/>"#,
        y_of(threshold),
        W - RIGHT
    );
    for (i, (_, pts)) in series.iter().enumerate() {
        let mut d = String::new();
        for (j, (r, v)) in pts.iter().enumerate() {
            let _ = write!(d, "{}{:.2},{:.2}", if j == 0 { "M" } else { " L" }, x_of(*r as f64), y_of(*v));
        }
        let _ = writeln!(
            out,
            r#"<path d="{d}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
            PALETTE[i % PALETTE.len()]
        );
    }
    let names: Vec<String> = series.into_iter().map(|(e, _)| e).collect();
    legend(&mut out, &names, Some(threshold));
    out.push_str("</svg>\n");
    out
}
