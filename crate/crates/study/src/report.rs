//! CSV tables and the SVG error plot of a study.
//!
//! `summary.csv`: `scheme,n,m,l,status,max_mu_max_k_l2_error,flops_per_step,point_evals_per_step`
//!
//! `per_mu.csv`: `scheme,n,m,mu_index,mu,max_k_l2_error`
//!
//! `per_step.csv`: `scheme,n,m,mu_index,mu,step,l2_error`
//!
//! Errors are L² distances between the lifted reduced state and the detailed
//! state of the same scheme (frozen shapes for `frozen`, solutions for
//! `unfrozen`). Missing rows carry `NaN`, diverged runs `inf`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{IoContext, Result};
use crate::model::Scheme;
use crate::study::{Status, StudyResult};

fn status_tag(s: Status) -> &'static str {
    match s {
        Status::Ok => "ok",
        Status::Missing => "missing",
        Status::Diverged => "diverged",
    }
}

pub fn summary_csv(res: &StudyResult) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "scheme",
        "n",
        "m",
        "l",
        "status",
        "max_mu_max_k_l2_error",
        "flops_per_step",
        "point_evals_per_step",
    ])?;
    for r in &res.records {
        w.write_record([
            r.scheme.tag().to_owned(),
            r.n.to_string(),
            r.m.to_string(),
            r.l.to_string(),
            status_tag(r.status).to_owned(),
            r.max_error().to_string(),
            r.ops.flops.to_string(),
            r.ops.point_evals.to_string(),
        ])?;
    }
    Ok(w.into_inner().expect("in-memory writer"))
}

pub fn per_mu_csv(res: &StudyResult) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["scheme", "n", "m", "mu_index", "mu", "max_k_l2_error"])?;
    for r in &res.records {
        for (j, e) in r.per_mu.iter().enumerate() {
            let row = [
                r.scheme.tag().to_owned(),
                r.n.to_string(),
                r.m.to_string(),
                j.to_string(),
                res.mus[j].to_string(),
                e.to_string(),
            ];
            w.write_record(row)?;
        }
    }
    Ok(w.into_inner().expect("in-memory writer"))
}

pub fn per_step_csv(res: &StudyResult) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["scheme", "n", "m", "mu_index", "mu", "step", "l2_error"])?;
    for r in &res.records {
        for (j, errs) in r.per_step.iter().enumerate() {
            for (k, e) in errs.iter().enumerate() {
                w.write_record([
                    r.scheme.tag().to_owned(),
                    r.n.to_string(),
                    r.m.to_string(),
                    j.to_string(),
                    res.mus[j].to_string(),
                    k.to_string(),
                    e.to_string(),
                ])?;
            }
        }
    }
    Ok(w.into_inner().expect("in-memory writer"))
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;

fn scheme_style(s: Scheme) -> (&'static str, &'static str) {
    match s {
        Scheme::Frozen => ("#1f77b4", "with freezing"),
        Scheme::Unfrozen => ("#d62728", "without freezing"),
    }
}

/// Log-scale plot of the maximum error against `N`, one curve per scheme.
pub fn error_plot_svg(res: &StudyResult) -> String {
    let curves: Vec<(Scheme, Vec<(f64, f64)>)> = Scheme::ALL
        .iter()
        .map(|&s| {
            let pts = res
                .records
                .iter()
                .filter(|r| r.scheme == s)
                .map(|r| (r.n as f64, r.max_error()))
                .filter(|(_, e)| e.is_finite() && *e > 0.0)
                .collect();
            (s, pts)
        })
        .collect();
    let all = curves.iter().flat_map(|(_, p)| p.iter());
    let (mut x0, mut x1, mut e0, mut e1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, e) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        e0 = e0.min(e);
        e1 = e1.max(e);
    }
    if !x0.is_finite() {
        (x0, x1, e0, e1) = (0.0, 1.0, 1.0, 10.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    let d0 = e0.log10().floor() as i32;
    let d1 = (e1.log10().ceil() as i32).max(d0 + 1);
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |e: f64| TOP + (f64::from(d1) - e.log10()) / f64::from(d1 - d0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    for d in d0..=d1 {
        let y = sy(10f64.powi(d));
        let _ = writeln!(s, r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/>"##, LEFT + pw);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{d}</text>"#, LEFT - 6.0, y + 4.0);
    }
    let mut ns: Vec<usize> = res.records.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    for n in ns {
        let x = sx(n as f64);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{n}</text>"#, TOP + ph + 18.0);
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">N</text>"#, LEFT + pw / 2.0, HEIGHT - 15.0);
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">max error</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );
    for (i, (scheme, pts)) in curves.iter().enumerate() {
        let (colour, label) = scheme_style(*scheme);
        let path: Vec<String> = pts.iter().map(|&(x, e)| format!("{:.2},{:.2}", sx(x), sy(e))).collect();
        let _ =
            writeln!(s, r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="2"/>"#, path.join(" "));
        for &(x, e) in pts {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="{colour}"/>"#, sx(x), sy(e));
        }
        let ly = TOP + 16.0 + 18.0 * i as f64;
        let lx = LEFT + pw - 150.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{colour}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{label}</text>"#, lx + 26.0, ly + 4.0);
    }
    s.push_str("</svg>\n");
    s
}

/// Writes `summary.csv`, `per_mu.csv`, `per_step.csv` and `errors.svg`.
pub fn write_study(res: &StudyResult, out: &Path) -> Result<()> {
    fs::create_dir_all(out).at(out)?;
    let files = [
        ("summary.csv", summary_csv(res)?),
        ("per_mu.csv", per_mu_csv(res)?),
        ("per_step.csv", per_step_csv(res)?),
        ("errors.svg", error_plot_svg(res).into_bytes()),
    ];
    for (name, bytes) in files {
        let path = out.join(name);
        fs::write(&path, bytes).at(&path)?;
    }
    Ok(())
}
