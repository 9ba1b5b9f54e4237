use lanfa::figures::{fig2_configs, fig3_configs, FIG2_FUNCTIONS};
use lanfa::run::execute;

/// First `k` from which the rational-function bound stays below the uniform
/// polynomial bound through the last row.
fn crossover(rows: &[lanfa::report::ReportRow]) -> Option<usize> {
    let mut start = None;
    for row in rows {
        match (row.bound_thm1.value(), row.bound_uniform.value()) {
            (Some(t), Some(u)) if t < u => {
                start.get_or_insert(row.k);
            }
            _ => start = None,
        }
    }
    start
}

/// Every Fig-2 function has a spectrum on which its bound eventually beats
/// the uniform bound.
#[test]
fn fig2_bound_overtakes_uniform_bound() {
    let mut found = vec![Vec::new(); FIG2_FUNCTIONS.len()];
    for cfg in fig2_configs() {
        let res = execute(&cfg).unwrap();
        for (i, fr) in res.functions.iter().enumerate() {
            let k = crossover(&fr.report.rows);
            eprintln!("{} {}: crossover {k:?}", cfg.id, fr.label);
            if let Some(k) = k {
                found[i].push((cfg.id.clone(), k));
            }
        }
    }
    for (f, hits) in FIG2_FUNCTIONS.iter().zip(&found) {
        assert!(!hits.is_empty(), "{f} never beats the uniform bound");
    }
    // Padé crosses on every spectrum.
    assert_eq!(found[0].len(), 3, "{:?}", found[0]);
}

/// On the symmetric indefinite spectrum, odd `k` places a Ritz value at 0,
/// so Lanczos-FA for `1/x` fails there and nowhere else.
#[test]
fn fig3_inverse_fails_exactly_at_odd_k() {
    let res = execute(&fig3_configs()[0]).unwrap();
    let inv = res.functions.iter().find(|fr| fr.spec == "inv_power:1").unwrap();
    for row in &inv.report.rows {
        assert_eq!(row.err_lanczos_fa.is_none(), row.k % 2 == 1, "k={}", row.k);
    }
}
