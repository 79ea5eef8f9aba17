use std::io::{self, Write};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Result;
use serde::Serialize;
use serde_json::Value;

use crate::config::Format;

/// Writes reports to stdout in the chosen format. JSON goes out one object
/// per line so long runs can be consumed as they progress.
pub struct Out {
    pub format: Format,
    deterministic: bool,
    w: io::StdoutLock<'static>,
}

impl Out {
    pub fn new(format: Format, deterministic: bool) -> Out {
        Out {
            format,
            deterministic,
            w: io::stdout().lock(),
        }
    }

    /// One JSON object, stamped with the wall-clock time unless the run is
    /// deterministic.
    pub fn json<T: Serialize>(&mut self, v: &T) -> Result<()> {
        let mut v = serde_json::to_value(v)?;
        if let (Value::Object(map), false) = (&mut v, self.deterministic) {
            let secs = SystemTime::now().duration_since(UNIX_EPOCH)?.as_secs();
            map.insert("timestamp".into(), secs.into());
        }
        writeln!(self.w, "{}", serde_json::to_string(&v)?)?;
        self.w.flush()?;
        Ok(())
    }

    pub fn line(&mut self, s: impl AsRef<str>) -> Result<()> {
        writeln!(self.w, "{}", s.as_ref())?;
        Ok(())
    }

    pub fn csv<I, R>(&mut self, header: &[&str], rows: I) -> Result<()>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator,
        R::Item: AsRef<[u8]>,
    {
        let mut w = csv::Writer::from_writer(&mut self.w);
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}
