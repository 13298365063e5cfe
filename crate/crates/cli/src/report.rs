//! The one CSV schema shared by every experiment:
//! `experiment,d,resolution,point_id,value,err_total,err_proj,err_approx,cond_est,seconds`
//! with empty fields where a column does not apply. All numeric fields are
//! printed with a fixed format, so the file is byte-identical for a fixed
//! config and seed (the `seconds` column, being wall-clock time, is the
//! one exception).

pub const CSV_HEADER: &str =
    "experiment,d,resolution,point_id,value,err_total,err_proj,err_approx,cond_est,seconds";

#[derive(Clone, Debug, Default)]
pub struct CsvRow {
    pub experiment: String,
    pub d: Option<usize>,
    pub resolution: Option<f64>,
    pub point_id: String,
    pub value: Option<f64>,
    pub err_total: Option<f64>,
    pub err_proj: Option<f64>,
    pub err_approx: Option<f64>,
    pub cond_est: Option<f64>,
    pub seconds: Option<f64>,
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.12e}"),
        None => String::new(),
    }
}

impl CsvRow {
    pub fn to_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.experiment,
            self.d.map(|d| d.to_string()).unwrap_or_default(),
            fmt_opt(self.resolution),
            self.point_id,
            fmt_opt(self.value),
            fmt_opt(self.err_total),
            fmt_opt(self.err_proj),
            fmt_opt(self.err_approx),
            fmt_opt(self.cond_est),
            self.seconds.map(|s| format!("{s:.3}")).unwrap_or_default(),
        )
    }
}

pub fn write_csv(rows: &[CsvRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_line());
        out.push('\n');
    }
    out
}
