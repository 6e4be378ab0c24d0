//! Answer-span extraction from free-form model output.

/// Contents of the last balanced `\boxed{...}` span, nested braces kept
/// verbatim. An unterminated `\boxed{` is skipped; earlier balanced spans can
/// still win. `None` when no balanced span exists.
pub fn extract_boxed(response: &str) -> Option<&str> {
    const MARKER: &str = "\\boxed{";
    let bytes = response.as_bytes();
    let mut last: Option<&str> = None;
    let mut search_from = 0;
    while let Some(found) = find_from(response, MARKER, search_from) {
        let content_start = found + MARKER.len();
        let mut depth = 1usize;
        let mut i = content_start;
        let mut end = None;
        while i < bytes.len() {
            match bytes[i] {
                b'{' => depth += 1,
                b'}' => {
                    depth -= 1;
                    if depth == 0 {
                        end = Some(i);
                        break;
                    }
                }
                _ => {}
            }
            i += 1;
        }
        if let Some(end) = end {
            // Braces are ASCII, so these offsets are char boundaries.
            last = Some(&response[content_start..end]);
        }
        search_from = content_start;
    }
    last
}

fn find_from(haystack: &str, needle: &str, from: usize) -> Option<usize> {
    haystack.get(from..)?.find(needle).map(|i| i + from)
}

/// The last maximal numeric literal in the text: optional sign, digits,
/// optional decimal part, optional `/digits` fraction. A sign is taken only
/// when it does not directly follow a digit ("3-4" yields "4", "x = -4"
/// yields "-4").
pub fn extract_last_number(response: &str) -> Option<&str> {
    let bytes = response.as_bytes();
    let mut last: Option<(usize, usize)> = None;
    let mut i = 0;
    while i < bytes.len() {
        if !bytes[i].is_ascii_digit() {
            i += 1;
            continue;
        }
        let mut start = i;
        if start > 0 && (bytes[start - 1] == b'-' || bytes[start - 1] == b'+') {
            let sign_is_binary = start >= 2 && bytes[start - 2].is_ascii_digit();
            if !sign_is_binary {
                start -= 1;
            }
        }
        let mut end = i;
        while end < bytes.len() && bytes[end].is_ascii_digit() {
            end += 1;
        }
        // Decimal part only when a digit follows the dot.
        if end + 1 < bytes.len() && bytes[end] == b'.' && bytes[end + 1].is_ascii_digit() {
            end += 1;
            while end < bytes.len() && bytes[end].is_ascii_digit() {
                end += 1;
            }
        }
        // Fraction part only when a digit follows the slash.
        if end + 1 < bytes.len() && bytes[end] == b'/' && bytes[end + 1].is_ascii_digit() {
            end += 1;
            while end < bytes.len() && bytes[end].is_ascii_digit() {
                end += 1;
            }
        }
        last = Some((start, end));
        i = end;
    }
    last.map(|(start, end)| &response[start..end])
}
