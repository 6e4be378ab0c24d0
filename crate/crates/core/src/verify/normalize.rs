//! Canonical textual form for extracted answers.

/// Normalize an answer span: collapse whitespace, strip outer `$` and
/// trailing periods, drop `\left`/`\right` sizing tokens, and rewrite
/// `\dfrac` to `\frac`. The pass is iterated to a fixpoint, which makes the
/// whole function idempotent by construction.
pub fn normalize_answer(raw: &str) -> String {
    let mut current = raw.to_string();
    // Each pass never grows the string, so this terminates; the bound is a
    // guard against logic errors only.
    for _ in 0..32 {
        let next = normalize_pass(&current);
        if next == current {
            break;
        }
        current = next;
    }
    current
}

fn normalize_pass(s: &str) -> String {
    let s = replace_command(s, "\\dfrac", "\\frac");
    let s = remove_command(&s, "\\left");
    let s = remove_command(&s, "\\right");
    let s = collapse_whitespace(&s);
    let s = s.trim_matches('$');
    let s = s.trim_end_matches('.');
    s.trim().to_string()
}

/// Replace a backslash command, but only where it is not a prefix of a longer
/// command (`\lefty` must survive `\left` removal).
fn replace_command(s: &str, command: &str, replacement: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(pos) = rest.find(command) {
        let after = &rest[pos + command.len()..];
        let followed_by_letter = after.chars().next().is_some_and(|c| c.is_ascii_alphabetic());
        out.push_str(&rest[..pos]);
        if followed_by_letter {
            out.push_str(command);
        } else {
            out.push_str(replacement);
        }
        rest = after;
    }
    out.push_str(rest);
    out
}

fn remove_command(s: &str, command: &str) -> String {
    replace_command(s, command, "")
}

fn collapse_whitespace(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut in_ws = false;
    for c in s.chars() {
        if c.is_whitespace() {
            in_ws = true;
        } else {
            if in_ws && !out.is_empty() {
                out.push(' ');
            }
            in_ws = false;
            out.push(c);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn whitespace_collapse() {
        assert_eq!(normalize_answer("  \\frac{1}{2} "), "\\frac{1}{2}");
        assert_eq!(normalize_answer("1 +   2"), "1 + 2");
    }

    #[test]
    fn dfrac_alias() {
        assert_eq!(normalize_answer("\\dfrac{3}{4}"), "\\frac{3}{4}");
    }

    #[test]
    fn trailing_period_strip() {
        assert_eq!(normalize_answer("42."), "42");
        assert_eq!(normalize_answer("42..."), "42");
        assert_eq!(normalize_answer("12.5"), "12.5");
    }

    #[test]
    fn dollar_strip() {
        assert_eq!(normalize_answer("$42$"), "42");
        assert_eq!(normalize_answer("$$\\frac{1}{2}$$"), "\\frac{1}{2}");
    }

    #[test]
    fn left_right_tokens_removed() {
        assert_eq!(normalize_answer("\\left(3,4\\right)"), "(3,4)");
        // \leftarrow is a different command and must survive.
        assert_eq!(normalize_answer("\\leftarrow"), "\\leftarrow");
    }

    #[test]
    fn idempotent_on_samples() {
        for s in [
            "  $ 42. $ ",
            "\\dfrac{1}{2}.",
            "\\left( x \\right)$",
            "already clean",
            "",
            "$.$",
        ] {
            let once = normalize_answer(s);
            assert_eq!(normalize_answer(&once), once, "not idempotent on {s:?}");
        }
    }
}
