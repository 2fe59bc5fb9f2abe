use crate::args::Format;
use crate::Failure;
use qesforge_core::export::GridExport;
use std::io::Write;
use std::path::Path;

pub fn output_format(explicit: Option<Format>, out: Option<&Path>) -> Format {
    explicit.unwrap_or_else(|| match out.and_then(|p| p.extension()).and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("json") => Format::Json,
        _ => Format::Csv,
    })
}

/// Writes to `out` through a temporary file in the same directory that is
/// renamed into place, or to standard output.
pub fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    let Some(path) = out else {
        let mut stdout = std::io::stdout().lock();
        return stdout
            .write_all(text.as_bytes())
            .and_then(|_| stdout.flush())
            .map_err(|e| Failure::usage(format!("cannot write to standard output: {e}")));
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let fail = |e: std::io::Error| Failure::usage(format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(text.as_bytes()).map_err(fail)?;
    tmp.as_file().sync_all().map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}

pub fn render(export: &GridExport, format: Format) -> String {
    match format {
        Format::Csv => export.to_csv(),
        Format::Json => export.to_json(),
    }
}

/// Reads a CSV or JSON export; JSON is recognised by a leading `{`.
pub fn read_export(path: &Path) -> Result<GridExport, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    let parsed = if text.trim_start().starts_with('{') {
        GridExport::from_json(&text)
    } else {
        GridExport::from_csv(&text)
    };
    parsed.map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}
