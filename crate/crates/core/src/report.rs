//! Report emission: CSV tables, a markdown digest, and an optional SVG
//! forest plot, all pure functions of fitted models and score aggregates.

use serde::{Deserialize, Serialize};

use crate::error::StatsError;
use crate::harness::campaign::ScoreAggregate;
use crate::stats::fit::FitResult;
use crate::stats::summary::{max_effect_table, normalized_weights};

pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

/// Everything a report run emits. Each table carries the spec hash of the
/// fit it came from plus the campaign id, so artifacts stay traceable after
/// they leave the workspace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportBundle {
    pub coefficient_table: String,
    pub max_effects: String,
    pub normalized_weights: String,
    /// One panel per moderated fit, keyed by the moderator description.
    pub interaction_panels: Vec<(String, String)>,
    pub score_distribution: String,
    pub summary_md: String,
    pub svg: Option<String>,
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_line(fields: &[String]) -> String {
    fields.iter().map(|f| csv_field(f)).collect::<Vec<_>>().join(",")
}

/// One row per coefficient; `significant` mirrors the p<0.05 transparency
/// convention of the coefficient plots.
pub fn coefficient_csv(fit: &FitResult, campaign_id: &str) -> String {
    let mut out = String::from(
        "column,estimate,robust_se,t_stat,p_value,significant,spec_hash,campaign_id\n",
    );
    for c in &fit.coefficients {
        out.push_str(&csv_line(&[
            c.column.name.clone(),
            c.estimate.to_string(),
            c.robust_se.to_string(),
            c.t_stat.to_string(),
            c.p_value.to_string(),
            (c.p_value < SIGNIFICANCE_LEVEL).to_string(),
            fit.spec_hash.clone(),
            campaign_id.to_string(),
        ]));
        out.push('\n');
    }
    out
}

pub fn max_effect_csv(fit: &FitResult, campaign_id: &str) -> String {
    let mut out = String::from("rank,group,column,estimate,spec_hash,campaign_id\n");
    for row in max_effect_table(fit) {
        out.push_str(&csv_line(&[
            row.rank.to_string(),
            row.group,
            row.column,
            row.estimate.to_string(),
            fit.spec_hash.clone(),
            campaign_id.to_string(),
        ]));
        out.push('\n');
    }
    out
}

/// Normalized main-effect weights from the scoring fit, joined by column
/// name with the ranking fit when one exists; ranking cells are empty for
/// columns the rank regression could not identify.
pub fn normalized_weights_csv(
    score_fit: &FitResult,
    rank_fit: Option<&FitResult>,
    campaign_id: &str,
) -> Result<String, StatsError> {
    let score_weights = normalized_weights(score_fit)?;
    let rank_weights = match rank_fit {
        Some(f) => normalized_weights(f)?,
        None => Vec::new(),
    };
    let rank_hash = rank_fit.map(|f| f.spec_hash.clone()).unwrap_or_default();
    let mut out = String::from(
        "column,score_estimate,score_share,rank_estimate,rank_share,score_spec_hash,rank_spec_hash,campaign_id\n",
    );
    for w in &score_weights {
        let rank = rank_weights.iter().find(|r| r.column == w.column);
        out.push_str(&csv_line(&[
            w.column.clone(),
            w.estimate.to_string(),
            w.share.to_string(),
            rank.map(|r| r.estimate.to_string()).unwrap_or_default(),
            rank.map(|r| r.share.to_string()).unwrap_or_default(),
            score_fit.spec_hash.clone(),
            rank_hash.clone(),
            campaign_id.to_string(),
        ]));
        out.push('\n');
    }
    Ok(out)
}

/// Interaction terms of a moderated fit, one row per gated dummy.
pub fn interaction_panel_csv(fit: &FitResult, campaign_id: &str) -> String {
    let mut out = String::from(
        "base,moderator,estimate,robust_se,p_value,significant,spec_hash,campaign_id\n",
    );
    for c in &fit.coefficients {
        let Some(moderator) = &c.column.moderator else { continue };
        let base = c.column.name.split('*').next().unwrap_or_default().to_string();
        out.push_str(&csv_line(&[
            base,
            moderator.to_string(),
            c.estimate.to_string(),
            c.robust_se.to_string(),
            c.p_value.to_string(),
            (c.p_value < SIGNIFICANCE_LEVEL).to_string(),
            fit.spec_hash.clone(),
            campaign_id.to_string(),
        ]));
        out.push('\n');
    }
    out
}

/// Distribution of per-pair mean scores: moments, extremes, and 0.5-wide
/// bin counts.
pub fn score_distribution_csv(aggregates: &[ScoreAggregate], campaign_id: &str) -> String {
    let mut out = String::from("stat,value,campaign_id\n");
    let n = aggregates.len();
    let mut push = |stat: &str, value: String| {
        out.push_str(&csv_line(&[stat.to_string(), value, campaign_id.to_string()]));
        out.push('\n');
    };
    push("pairs", n.to_string());
    if n == 0 {
        return out;
    }
    let means: Vec<f64> = aggregates.iter().map(|a| a.mean_score).collect();
    let mean = means.iter().sum::<f64>() / n as f64;
    let var = means.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / n as f64;
    let min = means.iter().copied().fold(f64::MAX, f64::min);
    let max = means.iter().copied().fold(f64::MIN, f64::max);
    push("mean", mean.to_string());
    push("sd", var.sqrt().to_string());
    push("min", min.to_string());
    push("max", max.to_string());
    let lo = (min * 2.0).floor() as i64;
    let hi = (max * 2.0).floor() as i64;
    for b in lo..=hi {
        let low = b as f64 / 2.0;
        let high = low + 0.5;
        let count = means.iter().filter(|m| **m >= low && **m < high).count();
        push(&format!("bin:{low}-{high}"), count.to_string());
    }
    out
}

/// Per-pair aggregate scores, one row per fully-scored pair in enumeration
/// order, so two campaigns over the same store state emit identical bytes.
pub fn aggregates_csv(aggregates: &[ScoreAggregate]) -> String {
    let mut out = String::from("pair_id,brief_id,mean_score,spread,run_scores\n");
    for a in aggregates {
        let runs: Vec<String> = a.run_scores.iter().map(|s| s.to_string()).collect();
        out.push_str(&csv_line(&[
            a.pair_id.clone(),
            a.brief_id.clone(),
            a.mean_score.to_string(),
            a.spread.to_string(),
            runs.join(";"),
        ]));
        out.push('\n');
    }
    out
}

fn markdown_summary(
    fit: &FitResult,
    aggregates: &[ScoreAggregate],
    campaign_id: &str,
) -> String {
    // Every number quoted here is copied verbatim from a CSV cell, so the
    // digest never disagrees with the tables.
    let mut md = String::new();
    md.push_str("# Audit report\n\n");
    md.push_str(&format!("- Campaign: `{campaign_id}`\n"));
    md.push_str(&format!("- Main-effects model: `{}`\n\n", fit.spec_hash));
    if !aggregates.is_empty() {
        let n = aggregates.len();
        let means: Vec<f64> = aggregates.iter().map(|a| a.mean_score).collect();
        let mean = means.iter().sum::<f64>() / n as f64;
        let var = means.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / n as f64;
        let min = means.iter().copied().fold(f64::MAX, f64::min);
        let max = means.iter().copied().fold(f64::MIN, f64::max);
        md.push_str(&format!(
            "Scores over {n} pairs: mean {mean}, sd {}, range [{min}, {max}].\n\n",
            var.sqrt()
        ));
    }
    md.push_str("## Largest effect per dimension\n\n");
    md.push_str("| Rank | Dimension | Column | Estimate |\n|---|---|---|---|\n");
    for row in max_effect_table(fit) {
        md.push_str(&format!(
            "| {} | {} | {} | {} |\n",
            row.rank, row.group, row.column, row.estimate
        ));
    }
    md
}

/// Static forest plot of the main effects; non-significant coefficients are
/// drawn translucent.
pub fn forest_svg(fit: &FitResult) -> String {
    let mains: Vec<_> = fit.coefficients.iter().filter(|c| c.column.is_main()).collect();
    let row_h = 22;
    let width = 640.0;
    let label_w = 170.0;
    let height = (mains.len() as i64 + 1) * row_h + 20;
    let scale = mains.iter().map(|c| c.estimate.abs()).fold(0.1_f64, f64::max);
    let mid = label_w + (width - label_w) / 2.0;
    let half = (width - label_w) / 2.0 - 10.0;
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" font-family=\"monospace\" font-size=\"12\">\n<line x1=\"{mid}\" y1=\"10\" x2=\"{mid}\" y2=\"{}\" stroke=\"#888\"/>\n",
        height - 10
    );
    for (i, c) in mains.iter().enumerate() {
        let y = 20 + i as i64 * row_h;
        let x = mid + c.estimate / scale * half;
        let opacity = if c.p_value < SIGNIFICANCE_LEVEL { 1.0 } else { 0.35 };
        let (x0, w) = if x < mid { (x, mid - x) } else { (mid, x - mid) };
        svg.push_str(&format!(
            "<text x=\"4\" y=\"{ty}\">{name}</text><rect x=\"{x0}\" y=\"{ry}\" width=\"{w}\" height=\"10\" fill=\"#33658a\" fill-opacity=\"{opacity}\"/>\n",
            ty = y + 9,
            name = c.column.name,
            ry = y,
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Assembles the full bundle from fitted models and aggregates.
pub fn emit_report(
    main_fit: &FitResult,
    rank_fit: Option<&FitResult>,
    interaction_fits: &[FitResult],
    aggregates: &[ScoreAggregate],
    campaign_id: &str,
    with_svg: bool,
) -> Result<ReportBundle, StatsError> {
    let interaction_panels = interaction_fits
        .iter()
        .map(|f| {
            let moderator = f
                .coefficients
                .iter()
                .find_map(|c| c.column.moderator.as_ref())
                .map(|m| m.to_string())
                .unwrap_or_else(|| "none".into());
            (moderator, interaction_panel_csv(f, campaign_id))
        })
        .collect();
    Ok(ReportBundle {
        coefficient_table: coefficient_csv(main_fit, campaign_id),
        max_effects: max_effect_csv(main_fit, campaign_id),
        normalized_weights: normalized_weights_csv(main_fit, rank_fit, campaign_id)?,
        interaction_panels,
        score_distribution: score_distribution_csv(aggregates, campaign_id),
        summary_md: markdown_summary(main_fit, aggregates, campaign_id),
        svg: with_svg.then(|| forest_svg(main_fit)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::fit::Coefficient;
    use crate::stats::terms::{Column, TermKind};

    fn fit_with(entries: &[(TermKind, &str, f64, f64)]) -> FitResult {
        let mut coefficients = vec![Coefficient {
            column: Column::intercept(),
            estimate: 8.0,
            robust_se: 0.1,
            t_stat: 80.0,
            p_value: 0.0,
        }];
        coefficients.extend(entries.iter().map(|(kind, level, est, p)| Coefficient {
            column: Column::main(*kind, level),
            estimate: *est,
            robust_se: 0.05,
            t_stat: est / 0.05,
            p_value: *p,
        }));
        FitResult {
            spec_hash: "abc123".into(),
            response: "mean_score".into(),
            coefficients,
            r_squared: 0.99,
            n: 64,
            k: entries.len() + 1,
            n_clusters: 4,
        }
    }

    fn aggregates() -> Vec<ScoreAggregate> {
        [6.0, 6.5, 7.0, 6.5]
            .iter()
            .enumerate()
            .map(|(i, s)| ScoreAggregate {
                pair_id: format!("p{i}:b0"),
                brief_id: "b0".into(),
                run_scores: vec![*s; 3],
                mean_score: *s,
                spread: 0.0,
            })
            .collect()
    }

    #[test]
    fn emission_is_deterministic() {
        let fit = fit_with(&[(TermKind::Skill, "far", -0.69, 0.001)]);
        let a = emit_report(&fit, None, &[], &aggregates(), "camp1", true).unwrap();
        let b = emit_report(&fit, None, &[], &aggregates(), "camp1", true).unwrap();
        assert_eq!(a.coefficient_table, b.coefficient_table);
        assert_eq!(a.summary_md, b.summary_md);
        assert_eq!(a.svg, b.svg);
    }

    #[test]
    fn exactly_one_insignificant_flag() {
        let fit = fit_with(&[
            (TermKind::Skill, "far", -0.69, 0.001),
            (TermKind::Firm, "sme", 0.05, 0.4),
        ]);
        let csv = coefficient_csv(&fit, "camp1");
        assert_eq!(csv.matches(",false,").count(), 1);
        let svg = forest_svg(&fit);
        assert_eq!(svg.matches("fill-opacity=\"0.35\"").count(), 1);
    }

    #[test]
    fn tables_carry_spec_hash_and_campaign_id() {
        let fit = fit_with(&[(TermKind::Skill, "far", -0.69, 0.001)]);
        let bundle = emit_report(&fit, None, &[], &aggregates(), "camp7", false).unwrap();
        for table in [
            &bundle.coefficient_table,
            &bundle.max_effects,
            &bundle.normalized_weights,
        ] {
            assert!(table.contains("abc123"), "{table}");
            assert!(table.contains("camp7"), "{table}");
        }
        assert!(bundle.score_distribution.contains("camp7"));
    }

    #[test]
    fn markdown_numbers_come_from_the_tables() {
        let fit = fit_with(&[(TermKind::Skill, "far", -0.69, 0.001)]);
        let bundle = emit_report(&fit, None, &[], &aggregates(), "camp1", false).unwrap();
        // Distribution line: mean 6.5, sd, range, count all present in the CSV.
        for token in ["6.5", "0.3535533905932738", "6", "7"] {
            assert!(bundle.summary_md.contains(token));
            assert!(bundle.score_distribution.contains(token));
        }
        assert!(bundle.summary_md.contains("-0.69"));
        assert!(bundle.max_effects.contains("-0.69"));
    }

    #[test]
    fn weight_table_joins_score_and_rank_fits() {
        let score = fit_with(&[
            (TermKind::Skill, "far", -0.6, 0.0),
            (TermKind::Firm, "sme", 0.2, 0.0),
        ]);
        let mut rank = fit_with(&[(TermKind::Skill, "far", -0.4, 0.0)]);
        rank.spec_hash = "rankhash".into();
        let csv = normalized_weights_csv(&score, Some(&rank), "c").unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        let skill: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(skill[0], "skill:far");
        assert!((skill[2].parse::<f64>().unwrap() - 0.75).abs() < 1e-12);
        assert!((skill[4].parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
        // The rank fit has no firm:sme column; its cells stay empty.
        let firm: Vec<&str> = lines[2].split(',').collect();
        assert_eq!(firm[0], "firm:sme");
        assert!((firm[2].parse::<f64>().unwrap() - 0.25).abs() < 1e-12);
        assert_eq!(firm[3], "");
        assert_eq!(firm[4], "");
    }
}
