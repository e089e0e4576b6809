//! Static SVG 1.1 phase portraits.

use std::fmt::Write;

use planar_lcs::{ControlSet, ControlSetDescription, Error, LinearSystem, Sign, Vec2};

pub struct Overlay {
    pub points: Vec<Vec2>,
}

const WIDTH: f64 = 800.0;
const MARGIN: f64 = 0.2;

struct View {
    min: Vec2,
    max: Vec2,
    decimals: usize,
}

impl View {
    fn fit(points: &[Vec2], fallback: f64) -> View {
        let (mut min, mut max) = if points.is_empty() {
            (Vec2::new(-fallback, -fallback), Vec2::new(fallback, fallback))
        } else {
            points.iter().fold(
                (
                    Vec2::new(f64::INFINITY, f64::INFINITY),
                    Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
                ),
                |(lo, hi), p| {
                    (
                        Vec2::new(lo.x.min(p.x), lo.y.min(p.y)),
                        Vec2::new(hi.x.max(p.x), hi.y.max(p.y)),
                    )
                },
            )
        };
        // A segment has no height or width; give it a square one.
        let span = (max.x - min.x).max(max.y - min.y).max(1e-9);
        for (lo, hi) in [(&mut min.x, &mut max.x), (&mut min.y, &mut max.y)] {
            let pad = MARGIN * (*hi - *lo).max(0.25 * span);
            *lo -= pad;
            *hi += pad;
        }
        let span = (max.x - min.x).max(max.y - min.y);
        let decimals = (5.0 - span.log10().floor()).clamp(0.0, 15.0) as usize;
        View { min, max, decimals }
    }

    fn num(&self, v: f64) -> String {
        let s = format!("{:.*}", self.decimals, v);
        if s.starts_with("-") && s[1..].chars().all(|c| c == '0' || c == '.') {
            s[1..].to_string()
        } else {
            s
        }
    }

    /// SVG y points down; flip.
    fn pt(&self, p: Vec2) -> String {
        format!("{},{}", self.num(p.x), self.num(-p.y))
    }

    fn points(&self, ps: &[Vec2]) -> String {
        ps.iter().map(|&p| self.pt(p)).collect::<Vec<_>>().join(" ")
    }
}

pub fn render(
    system: &LinearSystem,
    overlays: &[Overlay],
    canonical: bool,
    extent: f64,
    points: usize,
) -> anyhow::Result<String> {
    let set = ControlSet::new(system);
    let desc = *set.description();
    let canon = &system.canon;
    let show = |p: Vec2| if canonical { canon.to_canonical(p) } else { p };

    let boundary = match set.boundary_polyline(points, extent) {
        Ok(line) => Some((line.points.iter().map(|&p| show(p)).collect::<Vec<_>>(), line.closed)),
        Err(Error::WrongVariant(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let equilibria: Vec<Vec2> = if system.tag().det_sign != Sign::Zero {
        let omega = system.omega();
        [omega.min, omega.max]
            .iter()
            .filter_map(|&u| system.equilibrium(u).ok())
            .map(show)
            .collect()
    } else {
        Vec::new()
    };
    let fit: Vec<Vec2> = boundary.as_ref().map(|b| b.0.clone()).unwrap_or_default();
    let view = View::fit(&fit, extent);
    let (w, h) = (view.max.x - view.min.x, view.max.y - view.min.y);

    let mut title = format!("{}: control set {}", system.case().name(), desc.variant_name());
    if canonical {
        let p = canon.basis;
        write!(
            title,
            ", canonical coordinates, basis P = [[{}, {}], [{}, {}]]",
            p.a11, p.a12, p.a21, p.a22
        )?;
    }

    let mut s = String::new();
    writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#)?;
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="{} {} {} {}">"#,
        WIDTH,
        (WIDTH * h / w).round(),
        view.num(view.min.x),
        view.num(-view.max.y),
        view.num(w),
        view.num(h)
    )?;
    writeln!(s, "<title>{}</title>", escape(&title))?;
    let corners = [
        Vec2::new(view.min.x, view.min.y),
        Vec2::new(view.max.x, view.min.y),
        view.max,
        Vec2::new(view.min.x, view.max.y),
    ];
    writeln!(s, r##"<polygon points="{}" fill="#ffffff"/>"##, view.points(&corners))?;

    // Region.
    match (&desc, &boundary) {
        (ControlSetDescription::WholePlane, _) => {
            writeln!(
                s,
                r##"<polygon class="region" points="{}" fill="#d6e6f5"/>"##,
                view.points(&corners)
            )?;
        }
        (_, Some((ps, true))) => {
            writeln!(
                s,
                r##"<polygon class="region" points="{}" fill="#d6e6f5"/>"##,
                view.points(ps)
            )?;
        }
        _ => {}
    }

    // Axes.
    let stroke = r#"vector-effect="non-scaling-stroke""#;
    if view.min.y < 0.0 && view.max.y > 0.0 {
        let (a, b) = (Vec2::new(view.min.x, 0.0), Vec2::new(view.max.x, 0.0));
        writeln!(
            s,
            r##"<polyline class="axis" points="{} {}" fill="none" stroke="#999999" stroke-width="1" {stroke}/>"##,
            view.pt(a),
            view.pt(b)
        )?;
    }
    if view.min.x < 0.0 && view.max.x > 0.0 {
        let (a, b) = (Vec2::new(0.0, view.min.y), Vec2::new(0.0, view.max.y));
        writeln!(
            s,
            r##"<polyline class="axis" points="{} {}" fill="none" stroke="#999999" stroke-width="1" {stroke}/>"##,
            view.pt(a),
            view.pt(b)
        )?;
    }

    if let Some((ps, closed)) = &boundary {
        let tag = if *closed { "polygon" } else { "polyline" };
        let dash = match desc {
            ControlSetDescription::NodeRegion { closed: false, .. } => r#" stroke-dasharray="6 4""#,
            _ => "",
        };
        writeln!(
            s,
            r##"<{tag} class="boundary" points="{}" fill="none" stroke="#1f4e8c" stroke-width="2"{dash} {stroke}/>"##,
            view.points(ps)
        )?;
    }

    for o in overlays {
        let ps: Vec<Vec2> = o.points.iter().map(|&p| show(p)).collect();
        writeln!(
            s,
            r##"<polyline class="trajectory" points="{}" fill="none" stroke="#c0392b" stroke-width="1.5" {stroke}/>"##,
            view.points(&ps)
        )?;
    }

    let r = view.num(0.008 * w.max(h));
    for e in &equilibria {
        writeln!(
            s,
            r##"<circle class="equilibrium" cx="{}" cy="{}" r="{r}" fill="#000000"/>"##,
            view.num(e.x),
            view.num(-e.y)
        )?;
    }
    if boundary.is_none() && desc == ControlSetDescription::NoControlSet {
        writeln!(s, "<desc>no control set</desc>")?;
    }
    writeln!(s, "</svg>")?;
    Ok(s)
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
