//! Per-domain distribution of the emitted dataset.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::ClarQRecord;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainStats {
    /// (domain, count), count descending, then domain name ascending.
    pub counts: Vec<(String, usize)>,
    pub total: usize,
}

impl DomainStats {
    pub fn from_counts(counts: impl IntoIterator<Item = (String, usize)>) -> Self {
        let mut merged: BTreeMap<String, usize> = BTreeMap::new();
        for (d, c) in counts {
            *merged.entry(d).or_default() += c;
        }
        let mut counts: Vec<(String, usize)> = merged.into_iter().collect();
        counts.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let total = counts.iter().map(|(_, c)| c).sum();
        DomainStats { counts, total }
    }

    pub fn from_records<'a>(records: impl IntoIterator<Item = &'a ClarQRecord>) -> Self {
        Self::from_counts(records.into_iter().map(|r| (r.domain.clone(), 1)))
    }

    pub fn share(&self, count: usize) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            count as f64 / self.total as f64
        }
    }

    /// Fraction of all pairs held by the `k` largest domains.
    pub fn top_k_share(&self, k: usize) -> f64 {
        self.share(self.counts.iter().take(k).map(|(_, c)| c).sum())
    }

    /// The `k` largest domains followed by an `others` bucket for the rest.
    pub fn top_k_with_others(&self, k: usize) -> Vec<(String, usize, f64)> {
        let mut rows: Vec<(String, usize, f64)> = self
            .counts
            .iter()
            .take(k)
            .map(|(d, c)| (d.clone(), *c, self.share(*c)))
            .collect();
        let rest: usize = self.counts.iter().skip(k).map(|(_, c)| c).sum();
        rows.push(("others".into(), rest, self.share(rest)));
        rows
    }

    /// `domain,count,share` rows for the top `k` domains and `others`.
    pub fn to_csv(&self, k: usize) -> String {
        let mut s = String::from("domain,count,share\n");
        for (d, c, sh) in self.top_k_with_others(k) {
            let _ = writeln!(s, "{},{},{:.6}", csv_field(&d), c, sh);
        }
        s
    }

    /// Static bar chart of the top `k` domains plus `others`.
    pub fn to_svg(&self, k: usize) -> String {
        let rows = self.top_k_with_others(k);
        let bar_w = 28.0;
        let gap = 8.0;
        let left = 50.0;
        let top = 30.0;
        let plot_h = 240.0;
        let width = left + rows.len() as f64 * (bar_w + gap) + 20.0;
        let height = top + plot_h + 110.0;
        let max = rows.iter().map(|r| r.1).max().unwrap_or(0).max(1) as f64;
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="11">"#
        );
        let _ = writeln!(
            s,
            r#"<text x="{left}" y="18" font-size="13">Clarification questions per domain (top {k} + others, total {})</text>"#,
            self.total
        );
        let base = top + plot_h;
        let _ = writeln!(
            s,
            r#"<line x1="{left}" y1="{base}" x2="{:.1}" y2="{base}" stroke="black"/>"#,
            width - 10.0
        );
        for (i, (d, c, sh)) in rows.iter().enumerate() {
            let h = *c as f64 / max * plot_h;
            let x = left + i as f64 * (bar_w + gap);
            let y = base - h;
            let fill = if d == "others" { "#999999" } else { "#4477aa" };
            let _ = writeln!(
                s,
                r#"<rect x="{x:.1}" y="{y:.1}" width="{bar_w}" height="{h:.1}" fill="{fill}"><title>{}: {c} ({:.2}%)</title></rect>"#,
                xml_escape(d),
                sh * 100.0
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{c}</text>"#,
                x + bar_w / 2.0,
                y - 3.0
            );
            let lx = x + bar_w / 2.0;
            let ly = base + 10.0;
            let _ = writeln!(
                s,
                r#"<text x="{lx:.1}" y="{ly:.1}" text-anchor="end" transform="rotate(-60 {lx:.1} {ly:.1})">{}</text>"#,
                xml_escape(d)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
