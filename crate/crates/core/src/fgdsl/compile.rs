use super::{FgLine, FgSpec, Object, SubjectKind, Verb};
use crate::policy::{Matcher, Policy, Statement};

/// Fixed verb table; literal verbs map to themselves.
pub fn verb_actions(verb: &Verb) -> Vec<String> {
    let fixed: &[&str] = match verb {
        Verb::Read => &["s3:GetObject", "s3:GetObjectVersion"],
        Verb::Write => &["s3:PutObject"],
        Verb::Delete => &["s3:DeleteObject"],
        Verb::List => &["s3:ListBucket"],
        Verb::Acl => &["s3:GetObjectAcl", "s3:PutObjectAcl"],
        Verb::Literal(a) => return vec![a.clone()],
    };
    fixed.iter().map(|s| s.to_string()).collect()
}

/// One statement per line, in line order.
pub fn compile_fgspec(s: &FgSpec) -> Policy {
    Policy::new(
        s.lines
            .iter()
            .map(|l| compile_line(l, &s.account_id))
            .collect(),
    )
}

fn compile_line(line: &FgLine, account_id: &str) -> Statement {
    let name = &line.subject.name;
    let principal = match line.subject.kind {
        SubjectKind::User => format!("arn:aws:iam::{account_id}:user/{name}"),
        SubjectKind::Role => format!("arn:aws:iam::{account_id}:role/{name}"),
        SubjectKind::Service => name.clone(),
        SubjectKind::Account => format!("arn:aws:iam::{name}:root"),
        SubjectKind::Any => "*".to_string(),
    };
    let resource = match &line.object {
        Object::Any => "*".to_string(),
        Object::Arn(arn) => arn.clone(),
        Object::Bucket { name, .. } if line.verb == Verb::List => format!("arn:aws:s3:::{name}"),
        obj @ Object::Bucket { name, .. } => {
            format!(
                "arn:aws:s3:::{name}/{}",
                obj.key_glob().expect("bucket object")
            )
        }
    };
    Statement {
        sid: None,
        effect: line.effect,
        principal: Matcher::positive([principal]),
        action: Matcher::positive(verb_actions(&line.verb)),
        resource: Matcher::positive([resource]),
    }
}
