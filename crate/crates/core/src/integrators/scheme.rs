use std::fmt;

use crate::error::{Error, Result};
use crate::matfun::Vector;
use crate::model::RefPolicy;

/// Base rule of a scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    ExplicitEuler,
    ImplicitEuler,
    ImplicitMidpoint,
    Trapezoidal,
    /// Locally exact explicit Euler at the current point.
    ExponentialEuler,
    Gr1dSymmetric,
    Gr1dIncrement,
    GrMultiSymmetric,
    GrMultiIncrement,
    GrMultiSeparable,
}

impl Rule {
    pub const ALL: [Rule; 10] = [
        Rule::ExplicitEuler,
        Rule::ImplicitEuler,
        Rule::ImplicitMidpoint,
        Rule::Trapezoidal,
        Rule::ExponentialEuler,
        Rule::Gr1dSymmetric,
        Rule::Gr1dIncrement,
        Rule::GrMultiSymmetric,
        Rule::GrMultiIncrement,
        Rule::GrMultiSeparable,
    ];

    /// Command-line name.
    pub fn name(self) -> &'static str {
        match self {
            Rule::ExplicitEuler => "explicit-euler",
            Rule::ImplicitEuler => "implicit-euler",
            Rule::ImplicitMidpoint => "midpoint",
            Rule::Trapezoidal => "trapezoidal",
            Rule::ExponentialEuler => "exp-euler",
            Rule::Gr1dSymmetric => "gr1d-sym",
            Rule::Gr1dIncrement => "gr1d-incre",
            Rule::GrMultiSymmetric => "grmulti-sym",
            Rule::GrMultiIncrement => "grmulti-incre",
            Rule::GrMultiSeparable => "grmulti-sep",
        }
    }

    pub fn from_name(name: &str) -> Option<Rule> {
        Rule::ALL.into_iter().find(|r| r.name() == name)
    }

    pub fn description(self) -> &'static str {
        match self {
            Rule::ExplicitEuler => "y+ = y + delta F(y)",
            Rule::ImplicitEuler => "y+ = y + delta F(y+)",
            Rule::ImplicitMidpoint => "y+ = y + delta F((y + y+)/2)",
            Rule::Trapezoidal => "y+ = y + delta (F(y) + F(y+))/2",
            Rule::ExponentialEuler => "y+ = y + h phi1(hF'(y)) F(y)",
            Rule::Gr1dSymmetric => "one-degree-of-freedom symmetric discrete gradient",
            Rule::Gr1dIncrement => "one-degree-of-freedom coordinate-increment discrete gradient",
            Rule::GrMultiSymmetric => "y+ = y + theta S grad_s H, symmetric discrete gradient",
            Rule::GrMultiIncrement => {
                "y+ = y + theta S grad H, coordinate-increment discrete gradient"
            }
            Rule::GrMultiSeparable => "block-diagonal theta for H = T(p) + V(x)",
        }
    }

    /// Discrete-gradient rules need a Hamiltonian and conserve its energy.
    pub fn is_gradient(self) -> bool {
        matches!(
            self,
            Rule::Gr1dSymmetric
                | Rule::Gr1dIncrement
                | Rule::GrMultiSymmetric
                | Rule::GrMultiIncrement
                | Rule::GrMultiSeparable
        )
    }

    pub fn is_one_dof(self) -> bool {
        matches!(self, Rule::Gr1dSymmetric | Rule::Gr1dIncrement)
    }

    /// Reference policy used when none is given.
    pub fn default_policy(self) -> RefPolicy {
        match self {
            Rule::ExplicitEuler | Rule::ExponentialEuler => RefPolicy::Current,
            Rule::ImplicitEuler => RefPolicy::Next,
            _ => RefPolicy::Midpoint,
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Variants of the one-degree-of-freedom discrete-gradient scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gr1dVariant {
    Symmetric,
    Increment,
}

/// Variants of the multidimensional discrete-gradient scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GrMultiVariant {
    Symmetric,
    Increment,
    Separable,
}

/// A rule, a reference policy and whether the step coefficient is the
/// locally exact one (`true`) or the classical `h` (`false`).
#[derive(Clone, Debug, PartialEq)]
pub struct Scheme {
    pub rule: Rule,
    pub policy: RefPolicy,
    pub locally_exact: bool,
}

impl Scheme {
    pub fn new(rule: Rule, policy: RefPolicy, locally_exact: bool) -> Result<Scheme> {
        let s = Scheme {
            rule,
            policy,
            locally_exact,
        };
        s.validate()?;
        Ok(s)
    }

    /// Classical rule with `δ = h`; the policy is irrelevant.
    pub fn classical(rule: Rule) -> Result<Scheme> {
        Scheme::new(rule, RefPolicy::Current, false)
    }

    pub fn locally_exact(rule: Rule, policy: RefPolicy) -> Result<Scheme> {
        Scheme::new(rule, policy, true)
    }

    pub fn exponential_euler() -> Scheme {
        Scheme {
            rule: Rule::ExponentialEuler,
            policy: RefPolicy::Current,
            locally_exact: true,
        }
    }

    /// Standard symmetric discrete-gradient scheme, `δ = h`.
    pub fn gr() -> Scheme {
        Scheme {
            rule: Rule::Gr1dSymmetric,
            policy: RefPolicy::Current,
            locally_exact: false,
        }
    }

    /// `δ` frozen at an equilibrium.
    pub fn mod_gr(equilibrium: Vector) -> Scheme {
        Scheme {
            rule: Rule::Gr1dSymmetric,
            policy: RefPolicy::Fixed(equilibrium),
            locally_exact: true,
        }
    }

    /// `δ` evaluated at the current point.
    pub fn gr_lex() -> Scheme {
        Scheme {
            rule: Rule::Gr1dSymmetric,
            policy: RefPolicy::Current,
            locally_exact: true,
        }
    }

    /// `δ` evaluated at the midpoint; time-reversible.
    pub fn gr_slex() -> Scheme {
        Scheme {
            rule: Rule::Gr1dSymmetric,
            policy: RefPolicy::Midpoint,
            locally_exact: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rule == Rule::ExponentialEuler
            && !(self.locally_exact && self.policy == RefPolicy::Current)
        {
            return Err(Error::InvalidScheme(
                "exponential Euler is locally exact at the current point by definition".into(),
            ));
        }
        Ok(())
    }

    /// Short label such as `midpoint/le@midpoint` or `gr1d-sym/classical`.
    pub fn label(&self) -> String {
        if self.locally_exact {
            format!("{}/le@{}", self.rule.name(), self.policy.name())
        } else {
            format!("{}/classical", self.rule.name())
        }
    }
}

/// Initial guess of the implicit solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Predictor {
    /// `y + hφ₁(hF'(y))F(y)`, exact on linear problems.
    ExponentialEuler,
    ForwardEuler,
}

/// Settings of the implicit solver.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    /// Converged when `‖r‖ ≤ tol (1 + ‖y‖)`.
    pub tol: f64,
    pub max_iter: usize,
    pub predictor: Predictor,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-13,
            max_iter: 50,
            predictor: Predictor::ExponentialEuler,
        }
    }
}

impl SolverConfig {
    pub fn with_tol(tol: f64) -> Self {
        SolverConfig {
            tol,
            ..SolverConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Config(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}
