//! Markup removal for post bodies and comment text.

/// Reduces an HTML fragment to plain text: tags removed, entities decoded,
/// whitespace runs collapsed to a single space and the ends trimmed.
pub fn html_to_text(html: &str) -> String {
    let mut out = String::with_capacity(html.len());
    let mut rest = html;
    while let Some(pos) = rest.find(['<', '&']) {
        out.push_str(&rest[..pos]);
        let tail = &rest[pos..];
        if let Some(after) = tail.strip_prefix('<') {
            if let Some(end) = tag_end(tail) {
                // Tags separate words: "<p>a</p><p>b</p>" must not become "ab".
                out.push(' ');
                rest = &tail[end..];
            } else {
                out.push('<');
                rest = after;
            }
        } else {
            let (decoded, used) = decode_entity(tail);
            match decoded {
                Some(c) => out.push(c),
                None => out.push('&'),
            }
            rest = &tail[used..];
        }
    }
    out.push_str(rest);
    collapse_whitespace(&out)
}

pub fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Byte length of the tag starting at `s[0] == '<'`, or `None` when the
/// `<` is a literal character (e.g. "a < b").
fn tag_end(s: &str) -> Option<usize> {
    let next = s[1..].chars().next()?;
    if !(next.is_ascii_alphabetic() || next == '/' || next == '!' || next == '?') {
        return None;
    }
    if s.starts_with("<!--") {
        return s.find("-->").map(|i| i + 3);
    }
    s.find('>').map(|i| i + 1)
}

/// Decodes the entity at the start of `s` (which begins with `&`).
/// Returns the decoded char (if recognised) and the number of bytes consumed.
fn decode_entity(s: &str) -> (Option<char>, usize) {
    let Some(semi) = s[..s.len().min(12)].find(';') else {
        return (None, 1);
    };
    let name = &s[1..semi];
    let decoded = match name {
        "amp" => Some('&'),
        "lt" => Some('<'),
        "gt" => Some('>'),
        "quot" => Some('"'),
        "apos" => Some('\''),
        "nbsp" => Some(' '),
        "hellip" => Some('…'),
        "mdash" => Some('\u{2014}'),
        "ndash" => Some('\u{2013}'),
        "rsquo" => Some('\''),
        "lsquo" => Some('\''),
        "ldquo" => Some('"'),
        "rdquo" => Some('"'),
        _ => {
            if let Some(hex) = name.strip_prefix("#x").or_else(|| name.strip_prefix("#X")) {
                u32::from_str_radix(hex, 16).ok().and_then(char::from_u32)
            } else if let Some(dec) = name.strip_prefix('#') {
                dec.parse::<u32>().ok().and_then(char::from_u32)
            } else {
                None
            }
        }
    };
    match decoded {
        Some(c) => (Some(c), semi + 1),
        None => (None, 1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strips_tags_and_decodes() {
        assert_eq!(
            html_to_text("<p>Use <code>a &amp;&amp; b</code></p>\n<p>then&#39;s  fine</p>"),
            "Use a && b then's fine"
        );
    }

    #[test]
    fn literal_angle_brackets_survive() {
        assert_eq!(html_to_text("if a < b &lt;ok&gt;"), "if a < b <ok>");
    }

    #[test]
    fn unknown_entity_kept() {
        assert_eq!(html_to_text("AT&T &bogus; x"), "AT&T &bogus; x");
    }

    #[test]
    fn comments_removed() {
        assert_eq!(html_to_text("a<!-- hidden > still -->b"), "a b");
    }
}
