use super::{Decision, Effect, Policy, Request};

/// Deny-overrides evaluation: any matching Deny wins, otherwise any matching
/// Allow grants, otherwise the request is implicitly denied.
pub fn evaluate(p: &Policy, r: &Request) -> Decision {
    let mut allowed = false;
    for s in &p.statements {
        if !s.matches(r) {
            continue;
        }
        match s.effect {
            Effect::Deny => return Decision::ExplicitDeny,
            Effect::Allow => allowed = true,
        }
    }
    if allowed {
        Decision::Allowed
    } else {
        Decision::ImplicitDeny
    }
}
