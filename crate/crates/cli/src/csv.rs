//! Plain CSV output with full-precision floats and `inf` / `neg_inf`
//! sentinels.

use condldp::{Extended, LogValue};

pub fn float(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "neg_inf".into()
    } else if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:.16e}")
    }
}

pub fn extended(v: Extended) -> String {
    match v {
        Extended::Finite(x) => float(x),
        Extended::Infinite => "inf".into(),
    }
}

pub fn log_value(v: LogValue) -> String {
    match v {
        LogValue::Finite(x) => float(x),
        LogValue::NegInfinite => "neg_inf".into(),
    }
}

#[derive(Debug, Default)]
pub struct Table {
    text: String,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut t = Self::default();
        t.row(header.iter().map(|s| s.to_string()));
        t
    }

    pub fn row(&mut self, cells: impl IntoIterator<Item = String>) {
        let cells: Vec<String> = cells.into_iter().collect();
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}
