//! CSV emission: versioned header line, 17-significant-digit floats, and
//! atomic write-then-rename so failed runs leave no partial files.

use std::io;
use std::path::Path;

/// Version comment carried at the top of every emitted CSV.
pub const CSV_VERSION_LINE: &str = "# nedfield-csv v1";

/// 17 significant digits, enough for exact f64 round-trips.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write via a sibling temp file and rename into place.
pub fn write_atomic(path: &Path, content: &str) -> io::Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("out")
    ));
    std::fs::write(&tmp, content)?;
    std::fs::rename(&tmp, path)
}

/// Incremental CSV assembly with the version line first.
pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(header: &str) -> Csv {
        let mut buf = String::from(CSV_VERSION_LINE);
        buf.push('\n');
        buf.push_str(header);
        buf.push('\n');
        Csv { buf }
    }

    pub fn comment(&mut self, text: &str) {
        self.buf.push_str("# ");
        self.buf.push_str(text);
        self.buf.push('\n');
    }

    pub fn row(&mut self, fields: &[String]) {
        self.buf.push_str(&fields.join(","));
        self.buf.push('\n');
    }

    pub fn finish(self) -> String {
        self.buf
    }
}
