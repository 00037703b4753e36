//! CSV output with a comment header echoing the resolved plan.

use std::io::Write;

use dirac_core::io::{write_comments, CSV_VERSION};
use dirac_core::Result;
use serde::Serialize;

pub fn header(command: &str, plan_json: &str) -> Vec<String> {
    vec![
        format!("dirac-harness {} csv-format {CSV_VERSION}", env!("CARGO_PKG_VERSION")),
        format!("command: {command}"),
        format!("plan: {plan_json}"),
    ]
}

/// Writes the comment header, the column names and one line per row.
pub fn write_table<W: Write, R: Serialize>(mut w: W, comments: &[String], rows: &[R]) -> Result<()> {
    write_comments(&mut w, comments)?;
    let mut writer = csv::Writer::from_writer(&mut w);
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Lines of a harness CSV without the `#` comments.
pub fn data_lines(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}
