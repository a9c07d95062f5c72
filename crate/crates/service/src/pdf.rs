//! Minimal PDF 1.4 writer for case documents.
//!
//! One standard font (Helvetica, WinAnsi encoding), US Letter pages, text
//! wrapped by glyph width, explicit cross-reference table. No timestamps or
//! ids are embedded, so the output is a pure function of the input.

use std::fmt::Write as _;

use citegraph_core::corpus::CaseRecord;

const PAGE_WIDTH: f64 = 612.0;
const PAGE_HEIGHT: f64 = 792.0;
const MARGIN: f64 = 72.0;
const BODY_SIZE: f64 = 10.0;
const TITLE_SIZE: f64 = 14.0;
const LEADING: f64 = 1.4;

/// Helvetica advance widths (1/1000 em) for bytes 32..=126.
const HELVETICA_WIDTHS: [u16; 95] = [
    278, 278, 355, 556, 556, 889, 667, 191, 333, 333, 389, 584, 278, 333, 278, 278, // space../
    556, 556, 556, 556, 556, 556, 556, 556, 556, 556, // 0-9
    278, 278, 584, 584, 584, 556, 1015, // :;<=>?@
    667, 667, 722, 722, 667, 611, 778, 722, 278, 500, 667, 556, 833, // A-M
    722, 778, 667, 778, 722, 667, 611, 722, 667, 944, 667, 667, 611, // N-Z
    278, 278, 278, 469, 556, 333, // [\]^_`
    556, 556, 500, 556, 556, 278, 556, 556, 222, 222, 500, 222, 833, // a-m
    556, 556, 556, 556, 333, 500, 278, 556, 500, 722, 500, 500, 500, // n-z
    334, 260, 334, 584, // {|}~
];

/// Map a character to a single WinAnsi byte, substituting close ASCII
/// forms for common typography and `?` for anything unrepresentable.
fn win_ansi(c: char) -> u8 {
    match c {
        ' '..='~' => c as u8,
        '\u{2018}' | '\u{2019}' | '\u{2032}' => b'\'',
        '\u{201C}' | '\u{201D}' | '\u{2033}' => b'"',
        '\u{2013}' | '\u{2014}' | '\u{2212}' => b'-',
        '\u{2026}' => 0x85,
        '\t' => b' ',
        '\u{A0}'..='\u{FF}' => c as u32 as u8,
        _ => b'?',
    }
}

fn glyph_width(b: u8) -> f64 {
    match b {
        32..=126 => HELVETICA_WIDTHS[(b - 32) as usize] as f64,
        _ => 556.0,
    }
}

fn text_width(bytes: &[u8], size: f64) -> f64 {
    bytes.iter().map(|&b| glyph_width(b)).sum::<f64>() * size / 1000.0
}

/// Greedy word wrap to `max_width` points. Words longer than a line are
/// split between glyphs. Paragraph breaks (newlines) are kept; empty input
/// lines become empty output lines.
pub fn wrap_text(text: &str, size: f64, max_width: f64) -> Vec<Vec<u8>> {
    let mut lines = Vec::new();
    for paragraph in text.split('\n') {
        let mut line: Vec<u8> = Vec::new();
        let mut any = false;
        for word in paragraph.split_whitespace() {
            any = true;
            let mut word: Vec<u8> = word.chars().map(win_ansi).collect();
            if !line.is_empty() {
                let mut candidate = line.clone();
                candidate.push(b' ');
                candidate.extend_from_slice(&word);
                if text_width(&candidate, size) <= max_width {
                    line = candidate;
                    continue;
                }
                lines.push(std::mem::take(&mut line));
            }
            while text_width(&word, size) > max_width && word.len() > 1 {
                let mut cut = 1;
                while cut < word.len() && text_width(&word[..cut + 1], size) <= max_width {
                    cut += 1;
                }
                lines.push(word[..cut].to_vec());
                word.drain(..cut);
            }
            line = word;
        }
        if !line.is_empty() || !any {
            lines.push(line);
        }
    }
    lines
}

fn escape(bytes: &[u8]) -> String {
    let mut out = String::with_capacity(bytes.len());
    for &b in bytes {
        match b {
            b'(' | b')' | b'\\' => {
                out.push('\\');
                out.push(b as char);
            }
            32..=126 => out.push(b as char),
            _ => {
                let _ = write!(out, "\\{b:03o}");
            }
        }
    }
    out
}

struct Line {
    bytes: Vec<u8>,
    size: f64,
}

fn page_stream(lines: &[Line]) -> String {
    let mut s = String::from("BT\n");
    let mut y = PAGE_HEIGHT - MARGIN;
    let mut first = true;
    for line in lines {
        if !first {
            y -= line.size * LEADING;
        }
        first = false;
        let _ = writeln!(
            s,
            "/F1 {} Tf 1 0 0 1 {} {:.2} Tm ({}) Tj",
            line.size,
            MARGIN,
            y,
            escape(&line.bytes)
        );
    }
    s.push_str("ET\n");
    s
}

/// A PDF with a title line, header lines and a wrapped body.
pub fn text_pdf(title: &str, header: &[String], body: &str) -> Vec<u8> {
    let width = PAGE_WIDTH - 2.0 * MARGIN;
    let mut lines: Vec<Line> = Vec::new();
    for l in wrap_text(title, TITLE_SIZE, width) {
        lines.push(Line { bytes: l, size: TITLE_SIZE });
    }
    for h in header {
        for l in wrap_text(h, BODY_SIZE, width) {
            lines.push(Line { bytes: l, size: BODY_SIZE });
        }
    }
    lines.push(Line { bytes: Vec::new(), size: BODY_SIZE });
    for l in wrap_text(body, BODY_SIZE, width) {
        lines.push(Line { bytes: l, size: BODY_SIZE });
    }

    // Paginate by accumulated leading.
    let usable = PAGE_HEIGHT - 2.0 * MARGIN;
    let mut pages: Vec<Vec<Line>> = vec![Vec::new()];
    let mut used = 0.0;
    for line in lines {
        let step = line.size * LEADING;
        let page = pages.last_mut().expect("at least one page");
        if !page.is_empty() && used + step > usable {
            pages.push(Vec::new());
            used = 0.0;
        }
        used += step;
        pages.last_mut().expect("at least one page").push(line);
    }

    let mut objects: Vec<String> = Vec::new();
    let page_ids: Vec<usize> = (0..pages.len()).map(|i| 4 + 2 * i).collect();
    objects.push("<< /Type /Catalog /Pages 2 0 R >>".into());
    let kids: Vec<String> = page_ids.iter().map(|id| format!("{id} 0 R")).collect();
    objects.push(format!(
        "<< /Type /Pages /Kids [{}] /Count {} >>",
        kids.join(" "),
        pages.len()
    ));
    objects.push("<< /Type /Font /Subtype /Type1 /BaseFont /Helvetica /Encoding /WinAnsiEncoding >>".into());
    for (page, &id) in pages.iter().zip(&page_ids) {
        objects.push(format!(
            "<< /Type /Page /Parent 2 0 R /MediaBox [0 0 {PAGE_WIDTH} {PAGE_HEIGHT}] \
             /Resources << /Font << /F1 3 0 R >> >> /Contents {} 0 R >>",
            id + 1
        ));
        let stream = page_stream(page);
        objects.push(format!(
            "<< /Length {} >>\nstream\n{}endstream",
            stream.len(),
            stream
        ));
    }

    let mut out: Vec<u8> = b"%PDF-1.4\n%\xE2\xE3\xCF\xD3\n".to_vec();
    let mut offsets = Vec::with_capacity(objects.len());
    for (i, body) in objects.iter().enumerate() {
        offsets.push(out.len());
        out.extend_from_slice(format!("{} 0 obj\n{}\nendobj\n", i + 1, body).as_bytes());
    }
    let xref_at = out.len();
    let mut xref = format!("xref\n0 {}\n0000000000 65535 f \n", objects.len() + 1);
    for off in offsets {
        let _ = write!(xref, "{off:010} 00000 n \n");
    }
    let _ = write!(
        xref,
        "trailer\n<< /Size {} /Root 1 0 R >>\nstartxref\n{xref_at}\n%%EOF",
        objects.len() + 1
    );
    out.extend_from_slice(xref.as_bytes());
    out
}

/// Case name, justice, year and source URL, then the full description.
pub fn case_pdf(record: &CaseRecord) -> Vec<u8> {
    let title = if record.case_name.trim().is_empty() {
        record.id.as_str()
    } else {
        record.case_name.as_str()
    };
    let header = vec![
        format!("Case ID: {}", record.id),
        format!("Justice: {}", record.justice),
        format!("Year: {}", record.year),
        format!("Source: {}", record.source_url),
    ];
    text_pdf(title, &header, &record.description)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_respects_width() {
        let text = "word ".repeat(200);
        let lines = wrap_text(&text, 10.0, 200.0);
        assert!(lines.len() > 1);
        assert!(lines.iter().all(|l| text_width(l, 10.0) <= 200.0));
        let joined: Vec<String> = lines.iter().map(|l| String::from_utf8(l.clone()).unwrap()).collect();
        assert_eq!(joined.join(" "), text.trim_end());
    }

    #[test]
    fn long_words_are_split() {
        let lines = wrap_text(&"W".repeat(100), 10.0, 100.0);
        assert!(lines.len() >= 9);
        assert_eq!(lines.iter().map(Vec::len).sum::<usize>(), 100);
    }

    #[test]
    fn paragraphs_kept() {
        let lines = wrap_text("a\n\nb", 10.0, 100.0);
        assert_eq!(lines, vec![b"a".to_vec(), Vec::new(), b"b".to_vec()]);
    }

    #[test]
    fn escapes_and_encoding() {
        assert_eq!(escape(b"(a)\\"), "\\(a\\)\\\\");
        assert_eq!(win_ansi('\u{2019}'), b'\'');
        assert_eq!(win_ansi('§'), 0xA7);
        assert_eq!(escape(&[0xA7]), "\\247");
        assert_eq!(win_ansi('\u{4E2D}'), b'?');
    }

    #[test]
    fn deterministic_envelope() {
        let mut r = CaseRecord::new("c1", 1999, "Some text (with parens).");
        r.case_name = "Doe v. Roe".into();
        let a = case_pdf(&r);
        assert_eq!(a, case_pdf(&r));
        assert!(a.starts_with(b"%PDF-1.4"));
        assert!(a.ends_with(b"%%EOF"));
    }
}
