use std::fmt::Display;
use std::io::{self, Write};

/// Ordered `key=value` result record.
#[derive(Debug, Default)]
pub struct Record {
    fields: Vec<(String, String)>,
}

impl Record {
    pub fn new(command: &str) -> Self {
        let mut r = Self::default();
        r.push("command", command);
        r
    }

    pub fn push(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.fields.push((key.to_string(), value.to_string()));
        self
    }

    pub fn push_list<T: Display>(&mut self, key: &str, values: &[T]) -> &mut Self {
        let joined = values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
        self.push(key, joined)
    }

    pub fn write_to(&self, mut w: impl Write) -> io::Result<()> {
        for (k, v) in &self.fields {
            writeln!(w, "{k}={v}")?;
        }
        Ok(())
    }
}
