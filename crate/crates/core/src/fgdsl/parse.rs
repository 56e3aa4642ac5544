use super::{FgError, FgLine, FgSpec, Object, Subject, SubjectKind, Verb};
use crate::policy::{validate_action, Effect};

struct Token<'a> {
    text: &'a str,
    column: usize,
}

pub fn parse_fgspec(text: &str) -> Result<FgSpec, FgError> {
    let mut lines = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        let tokens = tokenize(content);
        if tokens.is_empty() {
            continue;
        }
        lines.push(parse_line(line_no, &tokens, content)?);
    }
    if lines.is_empty() {
        return Err(FgError::Syntax {
            line: 1,
            column: 1,
            message: "specification has no lines".into(),
        });
    }
    Ok(FgSpec::new(lines))
}

fn tokenize(content: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, c) in content.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push(token(content, s, i));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(token(content, s, content.len()));
    }
    out
}

fn token(content: &str, start: usize, end: usize) -> Token<'_> {
    Token {
        text: &content[start..end],
        column: content[..start].chars().count() + 1,
    }
}

fn parse_line(line: usize, tokens: &[Token<'_>], content: &str) -> Result<FgLine, FgError> {
    let syntax = |column: usize, message: String| FgError::Syntax {
        line,
        column,
        message,
    };
    if tokens.len() != 4 {
        let column = tokens
            .get(4)
            .map(|t| t.column)
            .unwrap_or(content.trim_end().chars().count() + 1);
        return Err(syntax(
            column,
            format!(
                "expected `EFFECT SUBJECT VERB OBJECT`, found {} token(s)",
                tokens.len()
            ),
        ));
    }
    let effect = match tokens[0].text.to_ascii_uppercase().as_str() {
        "ALLOW" => Effect::Allow,
        "DENY" => Effect::Deny,
        other => {
            return Err(syntax(
                tokens[0].column,
                format!("expected ALLOW or DENY, found {other:?}"),
            ))
        }
    };
    let subject = parse_subject(line, &tokens[1])?;
    let verb = parse_verb(line, &tokens[2])?;
    let object = parse_object(line, &tokens[3])?;
    Ok(FgLine {
        effect,
        subject,
        verb,
        object,
    })
}

fn parse_subject(line: usize, tok: &Token<'_>) -> Result<Subject, FgError> {
    if tok.text.eq_ignore_ascii_case("any") {
        return Ok(Subject::any());
    }
    let unknown = |kind: &str| FgError::UnknownSubjectKind {
        line,
        column: tok.column,
        kind: kind.to_string(),
    };
    let (kind, name) = tok.text.split_once(':').ok_or_else(|| unknown(tok.text))?;
    let kind = match kind.to_ascii_lowercase().as_str() {
        "user" => SubjectKind::User,
        "role" => SubjectKind::Role,
        "service" => SubjectKind::Service,
        "account" => SubjectKind::Account,
        _ => return Err(unknown(kind)),
    };
    if name.is_empty() {
        return Err(FgError::Syntax {
            line,
            column: tok.column,
            message: "subject name is empty".into(),
        });
    }
    Ok(Subject {
        kind,
        name: name.to_string(),
    })
}

fn parse_verb(line: usize, tok: &Token<'_>) -> Result<Verb, FgError> {
    if tok.text.contains(':') {
        validate_action(tok.text).map_err(|e| FgError::Syntax {
            line,
            column: tok.column,
            message: e.to_string(),
        })?;
        return Ok(Verb::Literal(tok.text.to_string()));
    }
    Ok(match tok.text.to_ascii_uppercase().as_str() {
        "READ" => Verb::Read,
        "WRITE" => Verb::Write,
        "DELETE" => Verb::Delete,
        "LIST" => Verb::List,
        "ACL" => Verb::Acl,
        _ => {
            return Err(FgError::UnknownVerb {
                line,
                column: tok.column,
                verb: tok.text.to_string(),
            })
        }
    })
}

fn parse_object(line: usize, tok: &Token<'_>) -> Result<Object, FgError> {
    let syntax = |message: String| FgError::Syntax {
        line,
        column: tok.column,
        message,
    };
    let text = tok.text;
    if text == "*" {
        return Ok(Object::Any);
    }
    if starts_with_ignore_case(text, "bucket:") {
        let rest = &text["bucket:".len()..];
        let (name, key) = match rest.split_once('/') {
            Some((n, k)) => (n, Some(k.to_string())),
            None => (rest, None),
        };
        if name.is_empty()
            || !name
                .bytes()
                .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'.' || b == b'-')
        {
            return Err(syntax(format!(
                "bucket name {name:?} must match [a-z0-9.-]+"
            )));
        }
        return Ok(Object::Bucket {
            name: name.to_string(),
            key,
        });
    }
    if starts_with_ignore_case(text, "arn:") {
        return Ok(Object::Arn(text.to_string()));
    }
    Err(syntax(format!(
        "expected `bucket:<name>[/<key>]`, an ARN, or `*`, found {text:?}"
    )))
}

fn starts_with_ignore_case(text: &str, prefix: &str) -> bool {
    text.len() >= prefix.len()
        && text.is_char_boundary(prefix.len())
        && text[..prefix.len()].eq_ignore_ascii_case(prefix)
}
