//! Batch evaluation: replay recorded queries and report where each target
//! screen ranked.
//!
//! Queries file, one per line:
//!
//! ```text
//! target_id<TAB>icon:Menu@0.0,0.0,0.2,0.1;icon:Search@0.8,0,1,0.1<TAB>tl:editor facebook
//! ```
//!
//! Either the icon or the text column may be empty. Blank lines and lines
//! starting with `#` are ignored.

use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bundle::SearchEngine;
use crate::classes::DoodleClass;
use crate::error::{Error, Result};
use crate::sketch::{DoodlePlacement, NormRect};

pub const REPORT_KS: [usize; 3] = [1, 10, 50];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalQuery {
    /// 1-based line in the source file.
    pub line: usize,
    pub target: String,
    pub icons: Vec<DoodlePlacement>,
    pub texts: Vec<String>,
}

impl EvalQuery {
    pub fn to_line(&self) -> String {
        let icons: Vec<String> = self
            .icons
            .iter()
            .map(|p| {
                let b = p.bbox;
                format!(
                    "icon:{}@{},{},{},{}",
                    p.class, b.left, b.top, b.right, b.bottom
                )
            })
            .collect();
        format!(
            "{}\t{}\t{}",
            self.target,
            icons.join(";"),
            self.texts.join(" ")
        )
    }
}

/// Parse `Class@left,top,right,bottom` (normalized coordinates).
pub fn parse_placement(spec: &str) -> Result<DoodlePlacement> {
    parse_placement_at(spec, "icon")
}

fn parse_placement_at(spec: &str, at: &str) -> Result<DoodlePlacement> {
    let (class, rect) = spec
        .rsplit_once('@')
        .ok_or_else(|| Error::parse(at, format!("missing @ in {spec:?}")))?;
    let class: DoodleClass = class.trim().parse()?;
    let coords: Vec<f64> = rect
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::parse(at, format!("bad coordinate in {spec:?}: {e}")))?;
    let [l, t, r, b] = coords[..] else {
        return Err(Error::parse(
            at,
            format!("expected four coordinates in {spec:?}"),
        ));
    };
    DoodlePlacement::new(class, NormRect::new(l, t, r, b))
        .map_err(|e| Error::parse(at, e.to_string()))
}

fn parse_icon(item: &str, at: &str) -> Result<DoodlePlacement> {
    let body = item
        .strip_prefix("icon:")
        .ok_or_else(|| Error::parse(at, format!("expected icon:Class@l,t,r,b, got {item:?}")))?;
    parse_placement_at(body, at)
}

pub fn parse_queries(text: &str) -> Result<Vec<EvalQuery>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let at = format!("queries:{}", n + 1);
        let mut cols = line.split('\t');
        let target = cols.next().unwrap_or_default().trim();
        if target.is_empty() {
            return Err(Error::parse(at, "missing target id"));
        }
        let icons = cols
            .next()
            .unwrap_or_default()
            .split(';')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|item| parse_icon(item, &at))
            .collect::<Result<Vec<_>>>()?;
        let texts: Vec<String> = cols
            .next()
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| vec![s.to_string()])
            .unwrap_or_default();
        if cols.next().is_some() {
            return Err(Error::parse(at, "more than three tab-separated columns"));
        }
        out.push(EvalQuery {
            line: n + 1,
            target: target.to_string(),
            icons,
            texts,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub line: usize,
    pub target: String,
    /// None when the target fell outside the ranked list.
    pub rank: Option<usize>,
    pub latency_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedRow {
    pub line: usize,
    pub target: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub rows: Vec<EvalRow>,
    pub skipped: Vec<SkippedRow>,
    pub limit: usize,
}

impl EvalReport {
    /// Fraction of evaluated queries whose target ranked within `k`.
    pub fn top_k(&self, k: usize) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        let hits = self
            .rows
            .iter()
            .filter(|r| r.rank.is_some_and(|x| x <= k))
            .count();
        hits as f64 / self.rows.len() as f64
    }

    pub fn avg_latency_ms(&self) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        self.rows.iter().map(|r| r.latency_ms).sum::<f64>() / self.rows.len() as f64
    }

    /// Nearest-rank 95th percentile.
    pub fn p95_latency_ms(&self) -> f64 {
        let mut l: Vec<f64> = self.rows.iter().map(|r| r.latency_ms).collect();
        if l.is_empty() {
            return 0.0;
        }
        l.sort_by(f64::total_cmp);
        let idx = ((0.95 * l.len() as f64).ceil() as usize).clamp(1, l.len()) - 1;
        l[idx]
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:>6}  {:<24}  {:>6}  {:>10}",
            "line", "target", "rank", "ms"
        );
        for r in &self.rows {
            let rank = r
                .rank
                .map_or_else(|| format!(">{}", self.limit), |x| x.to_string());
            let _ = writeln!(
                s,
                "{:>6}  {:<24}  {:>6}  {:>10.3}",
                r.line, r.target, rank, r.latency_ms
            );
        }
        for r in &self.skipped {
            let _ = writeln!(s, "{:>6}  {:<24}  skipped: {}", r.line, r.target, r.reason);
        }
        let _ = writeln!(s);
        let _ = writeln!(
            s,
            "queries {}  skipped {}",
            self.rows.len(),
            self.skipped.len()
        );
        for k in REPORT_KS {
            let _ = writeln!(s, "top-{k:<3} {:.4}", self.top_k(k));
        }
        let _ = writeln!(
            s,
            "latency avg {:.3} ms  p95 {:.3} ms",
            self.avg_latency_ms(),
            self.p95_latency_ms()
        );
        s
    }

    /// One JSON object per row (`"type": "row"` / `"skipped"`) then a summary.
    pub fn to_json_lines(&self) -> String {
        let mut s = String::new();
        for r in &self.rows {
            let mut v = serde_json::to_value(r).expect("row serializes");
            v["type"] = "row".into();
            s.push_str(&v.to_string());
            s.push('\n');
        }
        for r in &self.skipped {
            let mut v = serde_json::to_value(r).expect("row serializes");
            v["type"] = "skipped".into();
            s.push_str(&v.to_string());
            s.push('\n');
        }
        let summary = serde_json::json!({
            "type": "summary",
            "queries": self.rows.len(),
            "skipped": self.skipped.len(),
            "limit": self.limit,
            "top1": self.top_k(1),
            "top10": self.top_k(10),
            "top50": self.top_k(50),
            "avg_latency_ms": self.avg_latency_ms(),
            "p95_latency_ms": self.p95_latency_ms(),
        });
        s.push_str(&summary.to_string());
        s.push('\n');
        s
    }
}

/// Run every query through `engine.rank(.., limit)`. Rows whose target is not
/// indexed, or whose query fails to parse or rank, are skipped and counted.
pub fn evaluate(engine: &SearchEngine, queries: &[EvalQuery], limit: usize) -> Result<EvalReport> {
    if limit == 0 {
        return Err(Error::InvalidArgument("limit must be at least 1".into()));
    }
    let mut report = EvalReport {
        limit,
        ..EvalReport::default()
    };
    let screens = engine.bundle().screens();
    for q in queries {
        let skip = |reason: String| SkippedRow {
            line: q.line,
            target: q.target.clone(),
            reason,
        };
        if screens.ord(&q.target).is_none() {
            report
                .skipped
                .push(skip(Error::UnknownScreen(q.target.clone()).to_string()));
            continue;
        }
        let start = Instant::now();
        let result = engine
            .query(&q.icons, &q.texts)
            .and_then(|query| engine.rank(&query, limit));
        let latency_ms = start.elapsed().as_secs_f64() * 1e3;
        match result {
            Ok(ranked) => report.rows.push(EvalRow {
                line: q.line,
                target: q.target.clone(),
                rank: ranked.position(&q.target),
                latency_ms,
            }),
            Err(e) => report.skipped.push(skip(e.to_string())),
        }
    }
    Ok(report)
}
