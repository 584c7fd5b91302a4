//! Minimal CSV assembly. Fields never contain commas or quotes here
//! (tags are sanitized, numbers use shortest-roundtrip formatting), so no
//! quoting machinery is needed.

use std::fmt::Display;

pub struct Csv {
    text: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Csv {
        assert!(!header.is_empty());
        Csv { text: header.join(",") + "\n", columns: header.len() }
    }

    pub fn row(&mut self, fields: &[&dyn Display]) {
        assert_eq!(fields.len(), self.columns, "row arity mismatch");
        for (i, f) in fields.iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            let s = f.to_string();
            debug_assert!(!s.contains(',') && !s.contains('"') && !s.contains('\n'));
            self.text.push_str(&s);
        }
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

/// A gnuplot script drawing one line per listed series from a CSV written
/// next to it. Series are (using-expression, title) pairs; the header row
/// is skipped and NaN marks filtered-out rows of long-format files.
pub fn line_plot(csv_name: &str, title: &str, xlabel: &str, ylabel: &str, series: &[(String, String)]) -> String {
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set datafile missing NaN\n");
    s.push_str(&format!("set title '{title}'\n"));
    s.push_str(&format!("set xlabel '{xlabel}'\n"));
    s.push_str(&format!("set ylabel '{ylabel}'\n"));
    s.push_str("set key left top\n");
    s.push_str("set grid\n");
    let mut first = true;
    for (expr, series_title) in series {
        s.push_str(if first { "plot " } else { ",\\\n     " });
        first = false;
        s.push_str(&format!(
            "'{csv_name}' using {expr} every ::1 title '{series_title}' with linespoints"
        ));
    }
    s.push('\n');
    s
}
