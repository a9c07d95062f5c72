//! Structural PDF validation and naive text extraction, written against the
//! file format rather than the writer.

use std::collections::BTreeMap;

#[derive(Debug)]
pub struct PdfSummary {
    pub version: String,
    pub object_count: usize,
    pub page_count: usize,
    pub text: String,
}

fn find(hay: &[u8], needle: &[u8], from: usize) -> Option<usize> {
    hay.get(from..)?
        .windows(needle.len())
        .position(|w| w == needle)
        .map(|p| p + from)
}

fn rfind(hay: &[u8], needle: &[u8]) -> Option<usize> {
    hay.windows(needle.len()).rposition(|w| w == needle)
}

fn parse_usize(bytes: &[u8]) -> Result<usize, String> {
    std::str::from_utf8(bytes)
        .map_err(|e| e.to_string())?
        .trim()
        .parse()
        .map_err(|e| format!("bad number {:?}: {e}", String::from_utf8_lossy(bytes)))
}

fn unescape_string(s: &[u8]) -> String {
    let mut out = String::new();
    let mut i = 0;
    while i < s.len() {
        let b = s[i];
        if b == b'\\' && i + 1 < s.len() {
            let n = s[i + 1];
            if n.is_ascii_digit() {
                let end = (i + 4).min(s.len());
                let digits: Vec<u8> = s[i + 1..end].iter().copied().take_while(u8::is_ascii_digit).collect();
                let v = u8::from_str_radix(std::str::from_utf8(&digits).unwrap(), 8).unwrap_or(b'?');
                out.push(v as char);
                i += 1 + digits.len();
                continue;
            }
            out.push(match n {
                b'n' => '\n',
                b'r' => '\r',
                b't' => '\t',
                other => other as char,
            });
            i += 2;
        } else {
            out.push(b as char);
            i += 1;
        }
    }
    out
}

/// Strings shown with `Tj` in a content stream, one per line.
fn extract_text(stream: &[u8]) -> Vec<String> {
    let mut lines = Vec::new();
    let mut i = 0;
    while i < stream.len() {
        if stream[i] == b'(' {
            let mut depth = 1;
            let mut j = i + 1;
            while j < stream.len() && depth > 0 {
                match stream[j] {
                    b'\\' => j += 1,
                    b'(' => depth += 1,
                    b')' => depth -= 1,
                    _ => {}
                }
                j += 1;
            }
            lines.push(unescape_string(&stream[i + 1..j - 1]));
            i = j;
        } else {
            i += 1;
        }
    }
    lines
}

pub fn validate(pdf: &[u8]) -> Result<PdfSummary, String> {
    if !pdf.starts_with(b"%PDF-1.") {
        return Err("missing %PDF-1.x header".into());
    }
    let version = String::from_utf8_lossy(&pdf[5..8]).to_string();
    if !pdf.ends_with(b"%%EOF") && !pdf.ends_with(b"%%EOF\n") {
        return Err("missing trailing %%EOF".into());
    }
    let sx = rfind(pdf, b"startxref").ok_or("no startxref")?;
    let after = &pdf[sx + 9..];
    let end = find(after, b"%%EOF", 0).ok_or("no %%EOF after startxref")?;
    let xref_at = parse_usize(&after[..end])?;
    if pdf.get(xref_at..xref_at + 4) != Some(b"xref") {
        return Err(format!("startxref {xref_at} does not point at an xref table"));
    }
    // Subsection header "0 N".
    let mut pos = xref_at + 5;
    let line_end = find(pdf, b"\n", pos).ok_or("truncated xref")?;
    let header = String::from_utf8_lossy(&pdf[pos..line_end]).to_string();
    let mut parts = header.split_whitespace();
    let first: usize = parts.next().ok_or("xref header")?.parse().map_err(|_| "xref header")?;
    let count: usize = parts.next().ok_or("xref header")?.parse().map_err(|_| "xref header")?;
    if first != 0 {
        return Err("xref does not start at object 0".into());
    }
    pos = line_end + 1;
    let mut offsets = BTreeMap::new();
    for obj in 0..count {
        let entry = pdf.get(pos..pos + 20).ok_or("truncated xref entry")?;
        if entry[18] != b'\r' && entry[18] != b' ' || entry[19] != b'\n' && entry[19] != b'\r' {
            return Err(format!("xref entry {obj} is not 20 bytes"));
        }
        let off = parse_usize(&entry[0..10])?;
        let kind = entry[17];
        if obj == 0 {
            if kind != b'f' {
                return Err("object 0 must be free".into());
            }
        } else if kind == b'n' {
            let expect = format!("{obj} 0 obj");
            if pdf.get(off..off + expect.len()) != Some(expect.as_bytes()) {
                return Err(format!("xref offset {off} for object {obj} does not resolve"));
            }
            offsets.insert(obj, off);
        }
        pos += 20;
    }
    let trailer = find(pdf, b"trailer", pos).ok_or("no trailer")?;
    let size_at = find(pdf, b"/Size", trailer).ok_or("trailer without /Size")?;
    let size_end = find(pdf, b"/", size_at + 1).unwrap_or(size_at + 10);
    let size = parse_usize(&pdf[size_at + 5..size_end])?;
    if size != count {
        return Err(format!("/Size {size} but xref has {count} entries"));
    }
    if find(pdf, b"/Root", trailer).is_none() {
        return Err("trailer without /Root".into());
    }
    // Every "N 0 obj" in the file is in the table.
    let mut declared = 0;
    let mut scan = 0;
    while let Some(p) = find(pdf, b" 0 obj", scan) {
        declared += 1;
        scan = p + 6;
    }
    if declared != offsets.len() || declared != count - 1 {
        return Err(format!("{declared} objects declared, xref lists {}", offsets.len()));
    }

    let mut text = Vec::new();
    let mut pages = 0;
    for (&obj, &off) in &offsets {
        let end = find(pdf, b"endobj", off).ok_or(format!("object {obj} not closed"))?;
        let body = &pdf[off..end];
        if find(body, b"/Type /Page ", 0).is_some() || find(body, b"/Type /Page>", 0).is_some() {
            pages += 1;
        }
        if let Some(s) = find(body, b"stream\n", 0) {
            let len_at = find(body, b"/Length", 0).ok_or(format!("stream {obj} without /Length"))?;
            let len_end = find(body, b">>", len_at).ok_or("bad stream dict")?;
            let len = parse_usize(&body[len_at + 7..len_end])?;
            let data_start = s + 7;
            let data = body.get(data_start..data_start + len).ok_or("stream shorter than /Length")?;
            let tail = &body[data_start + len..];
            let tail = tail.strip_prefix(b"\r\n").or(tail.strip_prefix(b"\n")).unwrap_or(tail);
            if !tail.starts_with(b"endstream") {
                return Err(format!("stream {obj} /Length {len} does not end at endstream"));
            }
            text.extend(extract_text(data));
        }
    }
    Ok(PdfSummary {
        version,
        object_count: count - 1,
        page_count: pages,
        text: text.join("\n"),
    })
}
