//! Text and structured (JSON Lines) renderings of diagnostic lists.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use super::Diagnostic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Text,
    Structured,
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("report line {line}: {source}")]
    Malformed { line: usize, source: serde_json::Error },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// One `CODE severity subject: message` line per diagnostic.
pub fn write_text<W: Write>(diagnostics: &[Diagnostic], mut out: W) -> io::Result<()> {
    for d in diagnostics {
        writeln!(out, "{d}")?;
    }
    Ok(())
}

/// One JSON object per line with the fields code, severity, subject, message.
pub fn write_structured<W: Write>(diagnostics: &[Diagnostic], mut out: W) -> io::Result<()> {
    for d in diagnostics {
        serde_json::to_writer(&mut out, d)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_report<W: Write>(diagnostics: &[Diagnostic], format: ReportFormat, out: W) -> io::Result<()> {
    match format {
        ReportFormat::Text => write_text(diagnostics, out),
        ReportFormat::Structured => write_structured(diagnostics, out),
    }
}

/// Reads a structured report back. Blank lines are skipped.
pub fn read_structured<R: BufRead>(input: R) -> Result<Vec<Diagnostic>, ReportError> {
    let mut out = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let d = serde_json::from_str(&line).map_err(|source| ReportError::Malformed { line: n + 1, source })?;
        out.push(d);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::validation::Code;

    #[test]
    fn structured_report_reads_back() {
        let diagnostics = vec![
            Diagnostic::about(Code::E002, "e1", "event has no data source"),
            Diagnostic::log_level(Code::W005, "document holds no events"),
        ];
        let mut buf = Vec::new();
        write_structured(&diagnostics, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(r#"{"severity":"error","code":"E002","subject":"e1","#), "{text}");
        assert_eq!(read_structured(&buf[..]).unwrap(), diagnostics);
        assert!(matches!(read_structured(&b"{}\n"[..]), Err(ReportError::Malformed { line: 1, .. })));
    }

    #[test]
    fn text_report_lines() {
        let mut buf = Vec::new();
        write_text(&[Diagnostic::log_level(Code::W005, "empty")], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "W005 warning -: empty\n");
    }
}
