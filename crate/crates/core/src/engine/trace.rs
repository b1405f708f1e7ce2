//! Derivation trees recording which evaluation rule produced each judgment.

use std::fmt::{self, Write};

use serde::{Serialize, Serializer};

/// The rule applied at a derivation node.
///
/// Rules 1-4 are the backchaining phase, 5-11 the evaluation phase.
/// `Builtin` marks a primitive operation, which has no counterpart among the
/// numbered rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    /// 1: a ground clause head; continue by evaluating its body.
    BcGround,
    /// 2: select a clause from the left conjunct.
    BcLeft,
    /// 3: select a clause from the right conjunct.
    BcRight,
    /// 4: bind head variables to the call's constants.
    BcBind,
    /// 5: `T` evaluates to itself.
    Top,
    /// 6: a constant evaluates to itself.
    Const,
    /// 7: a call with constant arguments switches to backchaining.
    Call,
    /// 8: evaluate the arguments of a call first.
    Args,
    /// 9: `D1 -o E` evaluates `E` in `D & D1`.
    Di,
    /// 10: splice an imported module's declarations.
    Import,
    /// 11: replace a module query by its instantiated fact.
    Query,
    Builtin,
}

impl Rule {
    pub fn number(self) -> Option<u8> {
        Some(match self {
            Rule::BcGround => 1,
            Rule::BcLeft => 2,
            Rule::BcRight => 3,
            Rule::BcBind => 4,
            Rule::Top => 5,
            Rule::Const => 6,
            Rule::Call => 7,
            Rule::Args => 8,
            Rule::Di => 9,
            Rule::Import => 10,
            Rule::Query => 11,
            Rule::Builtin => return None,
        })
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.number() {
            Some(n) => write!(f, "rule {n}"),
            None => f.write_str("builtin"),
        }
    }
}

/// Serialised as the rule number, or the string `"builtin"`.
impl Serialize for Rule {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.number() {
            Some(n) => s.serialize_u8(n),
            None => s.serialize_str("builtin"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DerivationTrace {
    pub rule: Rule,
    pub conclusion: String,
    pub children: Vec<DerivationTrace>,
}

impl DerivationTrace {
    pub fn leaf(rule: Rule, conclusion: String) -> Self {
        DerivationTrace {
            rule,
            conclusion,
            children: Vec::new(),
        }
    }

    pub fn node(rule: Rule, conclusion: String, child: DerivationTrace) -> Self {
        DerivationTrace {
            rule,
            conclusion,
            children: vec![child],
        }
    }

    /// Indented text, one judgment per line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(&mut out, 0);
        out
    }

    fn render_into(&self, out: &mut String, indent: usize) {
        let _ = writeln!(out, "{:width$}[{}] {}", "", self.rule, self.conclusion, width = indent * 2);
        for c in &self.children {
            c.render_into(out, indent + 1);
        }
    }

    /// Pre-order traversal.
    pub fn nodes(&self) -> Vec<&DerivationTrace> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(n.children.iter().rev());
        }
        out
    }

    /// Every node has as many children as its rule has premises.
    pub fn is_well_formed(&self) -> bool {
        self.nodes().into_iter().all(|n| match n.rule {
            Rule::Top | Rule::Const | Rule::Builtin => n.children.is_empty(),
            // n argument derivations followed by the rule 7 node.
            Rule::Args => n.children.last().is_some_and(|c| c.rule == Rule::Call),
            _ => n.children.len() == 1,
        })
    }

    pub fn size(&self) -> usize {
        self.nodes().len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_and_json() {
        let t = DerivationTrace::node(
            Rule::Call,
            "eval(D, f(1)) => 1".into(),
            DerivationTrace::leaf(Rule::Builtin, "+(0, 1) => 1".into()),
        );
        assert_eq!(t.render(), "[rule 7] eval(D, f(1)) => 1\n  [builtin] +(0, 1) => 1\n");
        let json = serde_json::to_value(&t).unwrap();
        assert_eq!(json["rule"], 7);
        assert_eq!(json["children"][0]["rule"], "builtin");
        assert!(t.is_well_formed());
    }

    #[test]
    fn malformed_premise_counts() {
        let t = DerivationTrace::leaf(Rule::Call, "x".into());
        assert!(!t.is_well_formed());
        let t = DerivationTrace::node(Rule::Const, "x".into(), DerivationTrace::leaf(Rule::Top, "T".into()));
        assert!(!t.is_well_formed());
    }
}
