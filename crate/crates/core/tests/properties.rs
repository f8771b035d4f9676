use proptest::prelude::*;

use webtable::cleanse::{collapse_in, strip_edges_in, strip_redundancy, EdgeMode, NBSP};
use webtable::fieldparse::{split_source_time, split_votes};
use webtable::gridkit::{count_records, regroup, reorder_columns, ungroup, FieldMap};
use webtable::ingest::{extract_grid, RawCell, RawDocument, RawGrid};
use webtable::localeguard::{hazard_report, safe_parse_number, simulate_open, CellKind};
use webtable::verify::{count_mismatches, CleanReport, StepOutcome, VoteViolation};
use webtable::{CellTable, Exact, LocaleProfile, Origin, TableSelector};

/// Pairwise replacement of `sep sep` by `sep`, one occurrence at a time,
/// until none is left.
fn naive_collapse(text: &str, sep: &str) -> (String, usize) {
    let doubled = sep.repeat(2);
    let mut current = text.to_string();
    let mut count = 0;
    while let Some(at) = current.find(&doubled) {
        current.replace_range(at..at + doubled.len(), sep);
        count += 1;
    }
    (current, count)
}

fn grid_strategy() -> impl Strategy<Value = (usize, usize, usize)> {
    // (k, records, columns)
    (1usize..6, 1usize..20, 1usize..5)
}

fn label_grid(rows: usize, cols: usize) -> RawGrid {
    RawGrid::from_texts((0..rows).map(|r| (0..cols).map(move |c| format!("{r}/{c}"))))
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config(1000))]

    #[test]
    fn collapse_matches_pairwise_oracle(text in "[ab\t|]{0,24}", sep in prop_oneof![Just("\t"), Just("|"), Just("ab")]) {
        let (fast, n) = collapse_in(&text, sep);
        let (slow, m) = naive_collapse(&text, sep);
        prop_assert_eq!(&fast, &slow);
        prop_assert_eq!(n, m);
        prop_assert!(!fast.contains(&sep.repeat(2)));
    }

    #[test]
    fn strip_edges_keeps_interior_whitespace(words in proptest::collection::vec("[a-c]{1,4}", 1..5), gaps in proptest::collection::vec(prop_oneof![Just(" "), Just("\u{a0}"), Just(" \u{a0} ")], 4)) {
        let interior = words.iter().enumerate().fold(String::new(), |mut acc, (i, w)| {
            if i > 0 {
                acc.push_str(gaps[i % gaps.len()]);
            }
            acc.push_str(w);
            acc
        });
        let text = format!("{}{interior}{}", gaps[0], gaps[1]);
        let (leading, _) = strip_edges_in(&text, EdgeMode::Leading);
        prop_assert_eq!(leading, format!("{interior}{}", gaps[1]));
        let (trailing, _) = strip_edges_in(&text, EdgeMode::TrailingBeforeSeparator);
        prop_assert_eq!(trailing, format!("{}{interior}", gaps[0]));
    }
}

proptest! {
    #![proptest_config(config(256))]

    #[test]
    fn regroup_follows_index_oracle((k, records, cols) in grid_strategy(), picks in proptest::collection::vec((0usize..6, 0usize..5), 1..6)) {
        let grid = label_grid(k * records, cols);
        let maps: Vec<FieldMap> = picks
            .iter()
            .enumerate()
            .map(|(i, &(o, c))| FieldMap::new(format!("f{i}"), o % k, c % cols))
            .collect();
        let out = regroup(&grid, k, &maps).unwrap();
        prop_assert_eq!(out.table.record_count(), count_records(&grid, k).unwrap());
        for r in 0..records {
            for (f, m) in maps.iter().enumerate() {
                prop_assert_eq!(&out.table.rows[r][f], &format!("{}/{}", r * k + m.offset, m.column));
            }
        }
        let back = ungroup(&out.table, k, &maps, cols);
        for r in 0..records {
            for m in &maps {
                let row = r * k + m.offset;
                prop_assert_eq!(back.cell_text(row, m.column), grid.cell_text(row, m.column));
            }
        }
    }

    #[test]
    fn regroup_rejects_remainders(k in 2usize..6, records in 0usize..10, extra in 1usize..5) {
        let extra = extra % k;
        prop_assume!(extra != 0);
        let grid = label_grid(k * records + extra, 1);
        prop_assert!(count_records(&grid, k).is_err());
        prop_assert!(regroup(&grid, k, &[FieldMap::new("a", 0, 0)]).is_err());
    }

    #[test]
    fn reorder_preserves_row_multisets(rows in 1usize..8, perm in Just((0..5usize).collect::<Vec<_>>()).prop_shuffle()) {
        let grid = label_grid(rows, perm.len());
        let out = reorder_columns(&grid, &perm).unwrap();
        for r in 0..rows {
            let mut a: Vec<_> = (0..perm.len()).map(|c| grid.cell_text(r, c).into_owned()).collect();
            let mut b: Vec<_> = (0..perm.len()).map(|c| out.cell_text(r, c).into_owned()).collect();
            a.sort();
            b.sort();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn padding_keeps_every_segment(rows in proptest::collection::vec(proptest::collection::vec(proptest::collection::vec("[a-z]{1,3}", 0..3), 0..5), 0..6)) {
        let before: usize = rows.iter().flatten().map(Vec::len).sum();
        let cells: Vec<Vec<RawCell>> = rows
            .iter()
            .map(|r| r.iter().map(|s| RawCell::from_segments(s.clone())).collect())
            .collect();
        let (grid, padded) = RawGrid::padded(cells, None);
        prop_assert_eq!(grid.segment_count(), before);
        let widest = grid.column_count();
        prop_assert!(grid.rows().iter().all(|r| r.len() == widest));
        let expected_padding: usize = rows.iter().map(|r| widest - r.len()).sum();
        prop_assert_eq!(padded, expected_padding);
    }

    #[test]
    fn extraction_keeps_paragraph_order(paras in proptest::collection::vec("[a-z]{1,6}", 1..6)) {
        let body: String = paras.iter().map(|p| format!("<p>{p}</p>")).collect();
        let doc = RawDocument::from_markup(Origin::parse("p.html"), format!("<table><tr><td>{body}</td></tr></table>"));
        let grid = extract_grid(&doc, &TableSelector::LargestTable).unwrap().grid;
        prop_assert_eq!(&grid.cell(0, 0).unwrap().segments, &paras);
    }

    #[test]
    fn redundancy_removes_at_most_one_suffix(stems in proptest::collection::vec("[a-z]{0,4}", 0..8), tails in proptest::collection::vec(0usize..4, 8)) {
        let tail = [" Comments", " Comment", " Comments Comments", ""];
        let cells: Vec<String> = stems.iter().zip(&tails).map(|(s, &t)| format!("{s}{}", tail[t])).collect();
        let (out, outcome) = strip_redundancy(&cells, " Comments", " Comment", cells.len()).unwrap();
        for (before, after) in cells.iter().zip(&out) {
            let removed = before.len() - after.len();
            prop_assert!(removed == 0 || removed == " Comments".len() || removed == " Comment".len());
            prop_assert!(before.starts_with(after.as_str()));
        }
        prop_assert_eq!(outcome.plural + outcome.singular + outcome.unmatched_rows.len(), cells.len());
        if outcome.pass {
            let vector = count_mismatches("c", &out, " Comments").unwrap();
            let still = out.iter().filter(|c| c.ends_with(" Comments")).count();
            prop_assert_eq!(vector.count + still, out.len());
        }
    }

    #[test]
    fn mismatches_plus_occurrences_cover_column(cells in proptest::collection::vec("[ab ]{0,6}", 0..12), needle in "[ab]{1,2}") {
        let v = count_mismatches("c", &cells, &needle).unwrap();
        let hits = cells.iter().filter(|c| c.contains(needle.as_str())).count();
        prop_assert_eq!(v.count + hits, cells.len());
        prop_assert_eq!(v.count, v.failing_rows.len());
    }

    #[test]
    fn report_overall_is_monotone(verdicts in proptest::collection::vec(any::<bool>(), 0..10)) {
        let mut report = CleanReport::new();
        let mut failed = false;
        for pass in verdicts {
            let violations = if pass {
                vec![]
            } else {
                vec![VoteViolation { row: 0, positive: 1, negative: 0, staged_total: 0 }]
            };
            report.push("check", StepOutcome::Votes { violations });
            failed |= !pass;
            prop_assert_eq!(report.passed(), !failed);
        }
    }

    #[test]
    fn ground_truth_never_corrupts(cell in "[-+]?[0-9,.]{0,8}|[a-z .]{0,6}") {
        prop_assert!(!simulate_open::<f64>(&cell, &LocaleProfile::en_ground_truth()).corrupted);
    }

    #[test]
    fn simulate_agrees_with_safe_parse(neg in any::<bool>(), groups in proptest::collection::vec(0u32..1000, 1..4), frac in proptest::option::of("[0-9]{1,3}"), hu in any::<bool>()) {
        let mut profile = if hu { LocaleProfile::hu_hazard() } else { LocaleProfile::en_ground_truth() };
        profile.date_coercion = false;
        let mut int = groups[0].to_string();
        for g in &groups[1..] {
            int.push(profile.group_sep);
            int.push_str(&format!("{g:03}"));
        }
        let mut cell = format!("{}{int}", if neg { "-" } else { "" });
        if let Some(f) = &frac {
            cell.push(profile.decimal_sep);
            cell.push_str(f);
        }
        let parsed: Exact = safe_parse_number(&cell, &profile).unwrap();
        prop_assert_eq!(simulate_open::<Exact>(&cell, &profile).kind, CellKind::Number(parsed));
    }

    #[test]
    fn hazard_tallies_ignore_row_order(rows in proptest::collection::vec(("[0-9]{1,2}[.,][0-9]{1,3}", "[a-z0-9,]{0,5}"), 0..10).prop_shuffle(), seed in any::<u64>()) {
        let grid = RawGrid::from_texts(rows.iter().map(|(a, b)| [a.clone(), b.clone()]));
        let mut shuffled = rows.clone();
        shuffled.rotate_left(if rows.is_empty() { 0 } else { (seed as usize) % rows.len() });
        let other = RawGrid::from_texts(shuffled.iter().map(|(a, b)| [a.clone(), b.clone()]));
        let hu = LocaleProfile::hu_hazard();
        let (a, b) = (hazard_report(&grid, &hu, false), hazard_report(&other, &hu, false));
        prop_assert_eq!(a.tallies(), b.tallies());
    }

    #[test]
    fn date_cells_keep_their_original_text(a in 1u32..32, b in 1u32..32) {
        let cell = format!("{a}.{b}");
        let grid = RawGrid::from_texts([[cell.clone()]]);
        let report = hazard_report(&grid, &LocaleProfile::hu_hazard(), false);
        let col = &report.columns[0];
        if col.coerced_to_date == 1 {
            prop_assert_eq!(&col.date_losses[0].original, &cell);
            prop_assert!(a <= 12 || b <= 12);
        } else {
            prop_assert!(a > 12 && b > 12);
        }
    }

    #[test]
    fn parsing_is_order_independent(mut votes in proptest::collection::vec((0u64..500, 0u64..500), 1..10), times in proptest::collection::vec(1u32..100, 1..10)) {
        let raw: Vec<String> = votes.iter().map(|(p, n)| format!("{p} | {n}")).collect();
        let parsed: Vec<_> = raw.iter().map(|r| split_votes(r).unwrap()).collect();
        votes.reverse();
        let reversed: Vec<_> = votes.iter().map(|(p, n)| split_votes(&format!("{p} | {n}")).unwrap()).rev().collect();
        prop_assert_eq!(parsed, reversed);
        for t in times {
            prop_assert_eq!(split_source_time(&format!("in X about {t} hours ago")).unwrap().1, t);
        }
    }
}

#[test]
fn nbsp_runs_are_not_spaces() {
    let text = format!("{NBSP}{NBSP} a");
    assert_eq!(collapse_in(&text, " ").0, text);
    assert_eq!(strip_edges_in(&text, EdgeMode::Leading).0, "a");
}
