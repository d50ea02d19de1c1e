use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::{One, Signed};

use crate::poly::{Monomial, Poly};

pub(crate) fn render_poly(p: &Poly) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let chart = p.chart();
    let mut out = String::new();
    for (k, (m, c)) in p.terms().enumerate() {
        let negative = c.is_negative();
        match (k, negative) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        let magnitude = c.abs();
        let factors = render_factors(m, chart);
        if factors.is_empty() {
            out.push_str(&format!("{magnitude}"));
        } else if magnitude.is_one() {
            out.push_str(&factors);
        } else {
            out.push_str(&format!("{magnitude}*{factors}"));
        }
    }
    out
}

pub(crate) fn render_factors(m: &Monomial, chart: &crate::chart::Chart) -> String {
    let mut parts: Vec<String> = m.funcs().iter().map(|s| s.render(chart)).collect();
    for &(z, e) in m.gens() {
        let name = chart.coordinate(z).name();
        parts.push(if e == 1 { name } else { format!("{name}^{e}") });
    }
    parts.join("*")
}
