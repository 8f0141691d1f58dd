//! Reading and writing spaces.
//!
//! Two formats are supported:
//!
//! * the word2vec binary format: an ASCII header `<vocab_size> <dim>\n`, then
//!   per entry the word bytes, a single space, `dim` little-endian `f32`s and
//!   an optional newline;
//! * a portable text format: a `<vocab_size> <dim>` header line followed by
//!   one `<word> <v1> … <vdim>` line per word, with values written in a form
//!   that parses back to the identical `f64`.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::space::{Provenance, SemanticSpace};

struct CountingReader<R> {
    inner: R,
    offset: u64,
}

impl<R: BufRead> CountingReader<R> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Binary {
            offset: self.offset,
            message: message.into(),
        }
    }

    fn peek(&mut self) -> Result<Option<u8>> {
        Ok(self.inner.fill_buf()?.first().copied())
    }

    fn consume(&mut self, n: usize) {
        self.inner.consume(n);
        self.offset += n as u64;
    }

    /// Bytes up to (not including) `delim`; `None` at clean EOF.
    fn read_until(&mut self, delim: u8) -> Result<Option<Vec<u8>>> {
        let mut buf = Vec::new();
        let n = self.inner.read_until(delim, &mut buf)?;
        self.offset += n as u64;
        if n == 0 {
            return Ok(None);
        }
        if buf.last() != Some(&delim) {
            return Err(self.err(format!(
                "unexpected end of stream while looking for {:?}",
                delim as char
            )));
        }
        buf.pop();
        Ok(Some(buf))
    }

    fn read_exact(&mut self, buf: &mut [u8]) -> Result<()> {
        let mut filled = 0;
        while filled < buf.len() {
            let chunk = self.inner.fill_buf()?;
            if chunk.is_empty() {
                return Err(self.err(format!(
                    "truncated stream: needed {} more bytes",
                    buf.len() - filled
                )));
            }
            let take = chunk.len().min(buf.len() - filled);
            buf[filled..filled + take].copy_from_slice(&chunk[..take]);
            self.consume(take);
            filled += take;
        }
        Ok(())
    }
}

fn parse_header(line: &str) -> Option<(usize, usize)> {
    let mut parts = line.split_ascii_whitespace();
    let n = parts.next()?.parse().ok()?;
    let dim = parts.next()?.parse().ok()?;
    if parts.next().is_some() {
        return None;
    }
    Some((n, dim))
}

/// Reads a word2vec binary stream. Values are widened to `f64` exactly.
pub fn read_word2vec_binary<R: BufRead>(reader: R) -> Result<SemanticSpace> {
    read_binary(reader, &|_| true)
}

/// Like [`read_word2vec_binary`] but keeps only the words for which `keep`
/// returns true. The whole stream is still validated.
pub fn read_word2vec_binary_filtered<R: BufRead, F: Fn(&str) -> bool>(reader: R, keep: F) -> Result<SemanticSpace> {
    read_binary(reader, &keep)
}

fn read_binary<R: BufRead>(reader: R, keep: &dyn Fn(&str) -> bool) -> Result<SemanticSpace> {
    let mut r = CountingReader {
        inner: reader,
        offset: 0,
    };
    let header = r
        .read_until(b'\n')?
        .ok_or_else(|| r.err("empty stream: missing header"))?;
    let header = String::from_utf8(header).map_err(|_| Error::Binary {
        offset: 0,
        message: "header is not ASCII".into(),
    })?;
    let (n, dim) = parse_header(header.trim_end_matches('\r')).ok_or_else(|| Error::Binary {
        offset: 0,
        message: format!("malformed header {header:?}, expected '<vocab_size> <dim>'"),
    })?;

    let mut words = Vec::new();
    let mut data = Vec::new();
    let mut raw = vec![0u8; dim * 4];
    for i in 0..n {
        let start = r.offset;
        let word = match r.read_until(b' ')? {
            Some(bytes) => bytes,
            None => {
                return Err(r.err(format!(
                    "truncated stream: header declares {n} words but only {i} present"
                )))
            }
        };
        if word.is_empty() {
            return Err(Error::Binary {
                offset: start,
                message: format!("empty word for entry {i}"),
            });
        }
        let word = String::from_utf8(word).map_err(|e| Error::Binary {
            offset: start + e.utf8_error().valid_up_to() as u64,
            message: format!("entry {i}: word is not valid UTF-8"),
        })?;
        r.read_exact(&mut raw)?;
        if keep(&word) {
            data.extend(
                raw.chunks_exact(4)
                    .map(|b| f64::from(f32::from_le_bytes([b[0], b[1], b[2], b[3]]))),
            );
            words.push(word);
        }
        if r.peek()? == Some(b'\n') {
            r.consume(1);
        }
    }

    while let Some(b) = r.peek()? {
        if !b.is_ascii_whitespace() {
            return Err(r.err(format!(
                "vocab_size mismatch: data continues after the {n} declared words"
            )));
        }
        r.consume(1);
    }

    SemanticSpace::new(words, dim, data, Provenance::Neural).map_err(|e| match e {
        Error::InvalidArgument(m) | Error::NonFinite(m) => Error::Binary {
            offset: r.offset,
            message: m,
        },
        other => other,
    })
}

/// Writes the word2vec binary format; values are narrowed to `f32`.
pub fn write_word2vec_binary<W: Write>(space: &SemanticSpace, mut writer: W) -> Result<()> {
    writeln!(writer, "{} {}", space.len(), space.dim())?;
    for (i, word) in space.words().iter().enumerate() {
        check_word(word)?;
        writer.write_all(word.as_bytes())?;
        writer.write_all(b" ")?;
        for &v in space.row_at(i) {
            writer.write_all(&(v as f32).to_le_bytes())?;
        }
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

fn check_word(word: &str) -> Result<()> {
    if word.is_empty() || word.chars().any(char::is_whitespace) {
        return Err(Error::InvalidArgument(format!(
            "word {word:?} cannot be serialized (empty or contains whitespace)"
        )));
    }
    Ok(())
}

/// Writes the portable text format.
pub fn write_text<W: Write>(space: &SemanticSpace, mut writer: W) -> Result<()> {
    writeln!(writer, "{} {}", space.len(), space.dim())?;
    let mut line = String::new();
    for (i, word) in space.words().iter().enumerate() {
        check_word(word)?;
        line.clear();
        line.push_str(word);
        for (j, &v) in space.row_at(i).iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("component {j} of '{word}' is {v}")));
            }
            use std::fmt::Write as _;
            let _ = write!(line, " {v:?}");
        }
        line.push('\n');
        writer.write_all(line.as_bytes())?;
    }
    writer.flush()?;
    Ok(())
}

/// Reads the portable text format.
pub fn read_text<R: BufRead>(reader: R, provenance: Provenance) -> Result<SemanticSpace> {
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::parse(1, "empty input: missing header"))??;
    let (n, dim) = parse_header(&header)
        .ok_or_else(|| Error::parse(1, format!("malformed header {header:?}")))?;

    let mut words = Vec::with_capacity(n);
    let mut data = Vec::with_capacity(n * dim);
    for (idx, line) in lines.enumerate() {
        let lineno = idx + 2;
        let line = line?;
        if line.is_empty() && idx >= n {
            continue;
        }
        if idx >= n {
            return Err(Error::parse(lineno, format!("more rows than the declared {n}")));
        }
        let mut fields = line.split(' ');
        let word = fields.next().filter(|w| !w.is_empty()).ok_or_else(|| Error::parse(lineno, "missing word"))?;
        let before = data.len();
        for f in fields {
            let v: f64 = f
                .parse()
                .map_err(|_| Error::parse(lineno, format!("bad value {f:?}")))?;
            if !v.is_finite() {
                return Err(Error::parse(lineno, format!("non-finite value {f:?}")));
            }
            data.push(v);
        }
        if data.len() - before != dim {
            return Err(Error::parse(
                lineno,
                format!("expected {dim} values, found {}", data.len() - before),
            ));
        }
        words.push(word.to_owned());
    }
    if words.len() != n {
        return Err(Error::parse(
            words.len() + 2,
            format!("header declares {n} rows but found {}", words.len()),
        ));
    }
    SemanticSpace::new(words, dim, data, provenance).map_err(|e| match e {
        Error::InvalidArgument(m) => Error::parse(0, m),
        other => other,
    })
}
