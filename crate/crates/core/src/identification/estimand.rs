//! Symbolic adjustment formulas over observed temporal vertices.

use std::collections::BTreeSet;
use std::fmt;

use crate::temporal::TemporalVertex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EffectKind {
    Cde,
    Nde,
}

impl fmt::Display for EffectKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EffectKind::Cde => "CDE",
            EffectKind::Nde => "NDE",
        })
    }
}

/// Which treatment value a term conditions on: `x` or `x'`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    Control,
    Treated,
}

/// Named vertex sets: `Z` (possible parents of the outcome other than the
/// treatment) and `A` (possible parents of the treatment).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    Z,
    A,
}

impl Role {
    fn set_name(self) -> &'static str {
        match self {
            Role::Z => "Z",
            Role::A => "A",
        }
    }

    fn value_name(self) -> &'static str {
        match self {
            Role::Z => "z",
            Role::A => "a",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    /// `E[Y | X = level, role = value]`; the role is omitted when absent.
    Expectation { level: Level, given: Option<Role> },
    /// `P(of = value | X = level, given = value)`.
    Probability {
        of: Role,
        level: Option<Level>,
        given: Option<Role>,
    },
    /// `sum over values v of role: body(v) * weight(v)`, where `weight` is a
    /// distribution over the role.
    Sum {
        over: Role,
        body: Box<Expr>,
        weight: Box<Expr>,
    },
    Difference(Box<Expr>, Box<Expr>),
}

impl Expr {
    /// Whether `role` appears anywhere in the expression.
    pub fn mentions(&self, role: Role) -> bool {
        match self {
            Expr::Expectation { given, .. } => *given == Some(role),
            Expr::Probability { of, given, .. } => *of == role || *given == Some(role),
            Expr::Sum { over, body, weight } => {
                *over == role || body.mentions(role) || weight.mentions(role)
            }
            Expr::Difference(a, b) => a.mentions(role) || b.mentions(role),
        }
    }
}

/// An adjustment formula together with the concrete vertex sets it ranges
/// over.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimand {
    pub kind: EffectKind,
    pub outcome: TemporalVertex,
    pub treatment: TemporalVertex,
    pub x: f64,
    pub x_prime: f64,
    /// Possible parents of the outcome, minus the treatment.
    pub z: Vec<TemporalVertex>,
    /// Possible parents of the treatment (empty for CDE).
    pub a: Vec<TemporalVertex>,
    pub expr: Expr,
}

impl Estimand {
    fn cde_expr(z_empty: bool) -> Expr {
        let given = if z_empty { None } else { Some(Role::Z) };
        Expr::Difference(
            Box::new(Expr::Expectation {
                level: Level::Treated,
                given,
            }),
            Box::new(Expr::Expectation {
                level: Level::Control,
                given,
            }),
        )
    }

    pub fn cde(
        outcome: TemporalVertex,
        treatment: TemporalVertex,
        x: f64,
        x_prime: f64,
        z: Vec<TemporalVertex>,
    ) -> Self {
        let expr = Self::cde_expr(z.is_empty());
        Self {
            kind: EffectKind::Cde,
            outcome,
            treatment,
            x,
            x_prime,
            z,
            a: Vec::new(),
            expr,
        }
    }

    /// `sum_z CDE(z) * sum_a P(Z=z | X=x, A=a) P(A=a)`. With `A` empty the
    /// inner sum is `P(Z=z | X=x)`; with `Z` empty the whole formula is the
    /// CDE term.
    pub fn nde(
        outcome: TemporalVertex,
        treatment: TemporalVertex,
        x: f64,
        x_prime: f64,
        z: Vec<TemporalVertex>,
        a: Vec<TemporalVertex>,
    ) -> Self {
        let expr = if z.is_empty() {
            Self::cde_expr(true)
        } else {
            let weight = if a.is_empty() {
                Expr::Probability {
                    of: Role::Z,
                    level: Some(Level::Control),
                    given: None,
                }
            } else {
                Expr::Sum {
                    over: Role::A,
                    body: Box::new(Expr::Probability {
                        of: Role::Z,
                        level: Some(Level::Control),
                        given: Some(Role::A),
                    }),
                    weight: Box::new(Expr::Probability {
                        of: Role::A,
                        level: None,
                        given: None,
                    }),
                }
            };
            Expr::Sum {
                over: Role::Z,
                body: Box::new(Self::cde_expr(false)),
                weight: Box::new(weight),
            }
        };
        let a = if expr.mentions(Role::A) { a } else { Vec::new() };
        Self {
            kind: EffectKind::Nde,
            outcome,
            treatment,
            x,
            x_prime,
            z,
            a,
            expr,
        }
    }

    pub fn role(&self, role: Role) -> &[TemporalVertex] {
        match role {
            Role::Z => &self.z,
            Role::A => &self.a,
        }
    }

    /// Every vertex the formula references.
    pub fn variables(&self) -> BTreeSet<TemporalVertex> {
        let mut out: BTreeSet<_> = self.z.iter().chain(&self.a).cloned().collect();
        out.insert(self.outcome.clone());
        out.insert(self.treatment.clone());
        out
    }

    fn render_expr(&self, e: &Expr, out: &mut String) {
        let t = self.outcome.time;
        let treat = |level: Level| {
            format!(
                "{}={}",
                self.treatment.relative(t),
                match level {
                    Level::Control => "x",
                    Level::Treated => "x'",
                }
            )
        };
        let role = |r: Role| format!("{}={}", r.set_name(), r.value_name());
        match e {
            Expr::Expectation { level, given } => {
                out.push_str(&format!("E[{} | {}", self.outcome.relative(t), treat(*level)));
                if let Some(r) = given {
                    out.push_str(&format!(", {}", role(*r)));
                }
                out.push(']');
            }
            Expr::Probability { of, level, given } => {
                out.push_str(&format!("P({}", role(*of)));
                let cond: Vec<String> = level
                    .map(treat)
                    .into_iter()
                    .chain(given.map(role))
                    .collect();
                if !cond.is_empty() {
                    out.push_str(&format!(" | {}", cond.join(", ")));
                }
                out.push(')');
            }
            Expr::Sum { over, body, weight } => {
                out.push_str(&format!("sum_{} ", over.value_name()));
                let wrap = matches!(**body, Expr::Difference(..));
                if wrap {
                    out.push('(');
                }
                self.render_expr(body, out);
                if wrap {
                    out.push(')');
                }
                out.push_str(" * ");
                self.render_expr(weight, out);
            }
            Expr::Difference(a, b) => {
                self.render_expr(a, out);
                out.push_str(" - ");
                self.render_expr(b, out);
            }
        }
    }

    fn render_set(&self, vs: &[TemporalVertex]) -> String {
        let t = self.outcome.time;
        let names: Vec<String> = vs.iter().map(|v| v.relative(t)).collect();
        format!("{{{}}}", names.join(", "))
    }
}

/// Sort key used for rendering: latest time first, then series name.
pub fn display_order(vs: impl IntoIterator<Item = TemporalVertex>) -> Vec<TemporalVertex> {
    let mut v: Vec<_> = vs.into_iter().collect();
    v.sort_by(|a, b| b.time.cmp(&a.time).then_with(|| a.series.cmp(&b.series)));
    v
}

impl fmt::Display for Estimand {
    /// Formula on the first line, role sets after `where`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.render_expr(&self.expr, &mut s);
        f.write_str(&s)?;
        let mut roles = Vec::new();
        for r in [Role::Z, Role::A] {
            if self.expr.mentions(r) {
                roles.push(format!("{} = {}", r.set_name(), self.render_set(self.role(r))));
            }
        }
        if !roles.is_empty() {
            write!(f, "\n  where {}", roles.join(", "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tv(s: &str, t: i64) -> TemporalVertex {
        TemporalVertex::new(s, t)
    }

    #[test]
    fn cde_rendering() {
        let e = Estimand::cde(tv("Y", 5), tv("X", 4), 0.0, 1.0, vec![tv("W", 5)]);
        assert_eq!(
            e.to_string(),
            "E[Y_t | X_{t-1}=x', Z=z] - E[Y_t | X_{t-1}=x, Z=z]\n  where Z = {W_t}"
        );
    }

    #[test]
    fn cde_without_adjustment_set() {
        let e = Estimand::cde(tv("Y", 1), tv("X", 0), 0.0, 1.0, vec![]);
        assert_eq!(e.to_string(), "E[Y_t | X_{t-1}=x'] - E[Y_t | X_{t-1}=x]");
    }

    #[test]
    fn nde_rendering_with_and_without_a() {
        let e = Estimand::nde(tv("Y", 1), tv("X", 0), 0.0, 1.0, vec![tv("W", 1)], vec![tv("V", 0)]);
        assert_eq!(
            e.to_string(),
            "sum_z (E[Y_t | X_{t-1}=x', Z=z] - E[Y_t | X_{t-1}=x, Z=z]) * sum_a P(Z=z | X_{t-1}=x, A=a) * P(A=a)\n  where Z = {W_t}, A = {V_{t-1}}"
        );
        let e = Estimand::nde(tv("Y", 1), tv("X", 0), 0.0, 1.0, vec![tv("W", 1)], vec![]);
        assert_eq!(
            e.to_string(),
            "sum_z (E[Y_t | X_{t-1}=x', Z=z] - E[Y_t | X_{t-1}=x, Z=z]) * P(Z=z | X_{t-1}=x)\n  where Z = {W_t}"
        );
    }

    #[test]
    fn nde_with_empty_z_collapses_to_cde() {
        let e = Estimand::nde(tv("Y", 1), tv("X", 0), 0.0, 1.0, vec![], vec![tv("V", 0)]);
        assert_eq!(e.expr, Estimand::cde_expr(true));
        assert!(e.a.is_empty());
    }
}
