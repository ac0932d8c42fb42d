//! Minimal deterministic SVG 1.1 writer.
//!
//! Coordinates are printed with two decimals so the same drawing always
//! serializes to the same bytes.

use std::fmt::Write;

pub struct Svg {
    width: f64,
    height: f64,
    body: String,
}

fn num(x: f64) -> String {
    let s = format!("{x:.2}");
    // Avoid "-0.00" so sign noise never changes bytes.
    if s == "-0.00" {
        "0.00".to_string()
    } else {
        s
    }
}

pub fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

impl Svg {
    pub fn new(width: f64, height: f64) -> Self {
        Self {
            width,
            height,
            body: String::new(),
        }
    }

    pub fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str, stroke: &str) {
        let _ = writeln!(
            self.body,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{fill}" stroke="{stroke}" stroke-width="1"/>"#,
            num(x),
            num(y),
            num(w),
            num(h)
        );
    }

    pub fn polygon(&mut self, points: &[(f64, f64)], fill: &str, stroke: &str) {
        let pts: Vec<String> = points.iter().map(|&(x, y)| format!("{},{}", num(x), num(y))).collect();
        let _ = writeln!(
            self.body,
            r#"<polygon points="{}" fill="{fill}" stroke="{stroke}" stroke-width="1" stroke-linejoin="round"/>"#,
            pts.join(" ")
        );
    }

    pub fn polyline(&mut self, points: &[(f64, f64)], stroke: &str, width: f64) {
        let pts: Vec<String> = points.iter().map(|&(x, y)| format!("{},{}", num(x), num(y))).collect();
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="{}" stroke-linecap="round" stroke-linejoin="round"/>"#,
            pts.join(" "),
            num(width)
        );
    }

    pub fn circle(&mut self, cx: f64, cy: f64, r: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            r#"<circle cx="{}" cy="{}" r="{}" fill="{fill}"/>"#,
            num(cx),
            num(cy),
            num(r)
        );
    }

    pub fn text(&mut self, x: f64, y: f64, size: f64, content: &str) {
        let _ = writeln!(
            self.body,
            r##"<text x="{}" y="{}" font-family="sans-serif" font-size="{}" text-anchor="middle" fill="#222222">{}</text>"##,
            num(x),
            num(y),
            num(size),
            escape(content)
        );
    }

    pub fn finish(self) -> String {
        format!(
            concat!(
                r#"<?xml version="1.0" encoding="UTF-8"?>"#,
                "\n",
                r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
                "\n",
                r##"<rect x="0" y="0" width="{w}" height="{h}" fill="#ffffff"/>"##,
                "\n{body}</svg>\n"
            ),
            w = num(self.width),
            h = num(self.height),
            body = self.body
        )
    }
}

/// Counts `<polygon` elements, used to cross-check renders.
pub fn polygon_count(svg: &str) -> usize {
    svg.matches("<polygon ").count()
}

/// Darkens a `#rrggbb` color by `factor` in `[0, 1]`.
pub fn shade(hex: &str, factor: f64) -> String {
    let parse = |i: usize| u8::from_str_radix(&hex[i..i + 2], 16).unwrap_or(0);
    let f = |c: u8| ((c as f64) * factor).round().clamp(0.0, 255.0) as u8;
    format!("#{:02x}{:02x}{:02x}", f(parse(1)), f(parse(3)), f(parse(5)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_output() {
        let draw = || {
            let mut s = Svg::new(10.0, 10.0);
            s.polygon(&[(0.0, 0.0), (1.0, -0.0), (1.0, 1.0)], "#ff0000", "#000000");
            s.text(5.0, 5.0, 3.0, "a<b");
            s.finish()
        };
        let a = draw();
        assert_eq!(a, draw());
        assert_eq!(polygon_count(&a), 1);
        assert!(a.contains("a&lt;b"));
        assert!(!a.contains("-0.00"));
    }

    #[test]
    fn shading() {
        assert_eq!(shade("#ffffff", 0.5), "#808080");
    }
}
