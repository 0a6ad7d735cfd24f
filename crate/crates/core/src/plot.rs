//! Gnuplot scripts for the CSV artifacts.

use std::path::Path;

use crate::error::{Error, Result};
use crate::io::read_csv;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlotKind {
    /// U and V against x
    Profile,
    /// ln U against x with the e^{-kappa x} reference
    LogDecay { kappa: f64 },
    /// semilog W(t) with W(0) e^{2 lambda t}
    Decay { lambda: f64 },
    /// front position against time
    Front,
    /// sup u against time
    Monitor,
}

fn required(kind: PlotKind) -> &'static [&'static str] {
    match kind {
        PlotKind::Profile | PlotKind::LogDecay { .. } => &["x", "U"],
        PlotKind::Decay { .. } => &["t", "W"],
        PlotKind::Front => &["t", "position"],
        PlotKind::Monitor => &["t", "sup_u"],
    }
}

/// Writes a gnuplot script for `csv` next to it and returns the script text.
pub fn emit_plot(csv: &Path, kind: PlotKind, script: &Path) -> Result<String> {
    let table = read_csv(csv)?;
    if table.rows.is_empty() {
        return Err(Error::NoData(format!("no data in {}", csv.display())));
    }
    for col in required(kind) {
        if !table.header.iter().any(|h| h == col) {
            return Err(Error::NoData(format!("no data: column `{col}` missing from {}", csv.display())));
        }
    }
    let name = csv.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let col = |c: &str| table.header.iter().position(|h| h == c).map(|j| j + 1).unwrap_or(0);
    let base = "set datafile separator ','\nset key top right\n";
    let body = match kind {
        PlotKind::Profile => {
            let mut s = format!("set xlabel 'x'\nplot '{name}' skip 1 using 1:{} with lines title 'U'", col("U"));
            if col("V") > 0 {
                s.push_str(&format!(", \\\n     '{name}' skip 1 using 1:{} with lines title 'V'", col("V")));
            }
            s.push('\n');
            s
        }
        PlotKind::LogDecay { kappa } => format!(
            "set xlabel 'x'\nset ylabel 'ln U'\nplot '{name}' skip 1 using 1:(log(${u})) with lines title 'ln U', \\\n     -{kappa:.14e}*x with lines dashtype 2 title '-kappa x'\n",
            u = col("U")
        ),
        PlotKind::Decay { lambda } => {
            let w0 = table.rows[0][col("W") - 1];
            format!(
                "set logscale y\nset xlabel 't'\nset ylabel 'W(t)'\nplot '{name}' skip 1 using 1:{} with linespoints title 'W', \\\n     {w0:.14e}*exp(2*{lambda:.14e}*x) with lines dashtype 2 title 'W(0) e^{{2 lambda t}}'\n",
                col("W")
            )
        }
        PlotKind::Front => format!(
            "set xlabel 't'\nset ylabel 'front'\nplot '{name}' skip 1 using 1:{} with linespoints title 'front'\n",
            col("position")
        ),
        PlotKind::Monitor => format!(
            "set xlabel 't'\nset ylabel 'sup u'\nplot '{name}' skip 1 using 1:{} with lines title 'sup u'\n",
            col("sup_u")
        ),
    };
    let text = format!("{base}{body}pause -1\n");
    std::fs::write(script, &text)?;
    Ok(text)
}
