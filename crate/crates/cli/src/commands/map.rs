use serde_json::json;
use sqzcool::cooling::cool_map;
use sqzcool::units::squeezing_db;

use crate::error::CliError;
use crate::format::Table;
use crate::Context;

pub fn run(cx: &mut Context) -> Result<(), CliError> {
    let m = cx.config.map.clone().ok_or_else(|| CliError::Usage("`map` needs a [map] section".into()))?;
    for (i, &r) in m.r.iter().enumerate() {
        let map =
            cool_map(&m.kappa_over_omega, &m.delta_over_omega, r, m.n_l).map_err(CliError::at(format!("map r={r}")))?;
        let mut table = Table::new(&["kappa_over_omega", "delta_over_omega", "n_bath"]);
        for (k, d, v) in map.rows() {
            table.push(vec![k, d, v]);
        }
        let meta = json!({
            "command": "map",
            "r": r,
            "r_db": squeezing_db(r),
            "n_l": m.n_l,
            "theta": "theta0",
            "shape": [m.kappa_over_omega.len(), m.delta_over_omega.len()],
            "row_order": "kappa_over_omega outer, delta_over_omega inner",
            "nan": "drive does not cool",
        });
        cx.emitter.write_table(&format!("map_r{i}"), &table, &meta)?;
    }

    if let Some(kappa) = m.line_cut_kappa {
        let mut columns = vec!["delta_over_omega".to_string()];
        columns.extend((0..m.r.len()).map(|i| format!("n_bath_r{i}")));
        let mut cuts = Vec::new();
        for &r in &m.r {
            cuts.push(
                cool_map(&[kappa], &m.delta_over_omega, r, m.n_l).map_err(CliError::at(format!("line cut r={r}")))?,
            );
        }
        let mut table = Table { columns, rows: Vec::new(), preamble: Vec::new() };
        for (j, &d) in m.delta_over_omega.iter().enumerate() {
            let mut row = vec![d];
            row.extend(cuts.iter().map(|c| c.get(0, j)));
            table.push(row);
        }
        let meta = json!({
            "command": "map",
            "kappa_over_omega": kappa,
            "r": m.r,
            "r_db": m.r.iter().map(|&r| squeezing_db(r)).collect::<Vec<_>>(),
            "n_l": m.n_l,
            "theta": "theta0",
        });
        cx.emitter.write_table("line_cut", &table, &meta)?;
    }
    Ok(())
}
