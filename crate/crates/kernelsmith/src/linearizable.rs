//! Goal-function expression trees with a linearizability budget.
//!
//! A tree describes how a goal function is composed from coordinate lookups,
//! scalar factors, sums, maxima, minima, and sign-guarded case distinctions.
//! Each node carries a coefficient domain and a budget `alpha`: for every
//! solution there is a representation vector `b` with entries in the domain
//! at level `alpha` such that the goal value is `b·w`, and that equation
//! stays valid for every weight vector in the class of `w` at level `alpha`.
//!
//! `alpha` is computed bottom-up by the composition rules:
//!
//! * coordinate lookup: 1; the constant zero: 0;
//! * scalar factor with coefficients at level `n`: `n·alpha`;
//! * sum over at most `n` terms: `n·alpha` (integer domain) or
//!   `alpha!·n·alpha` (rational domain);
//! * max/min over a family: `2·alpha` (integer) or `2·alpha²` (rational);
//! * case distinction on the sign of a guard: the max of the three budgets;
//! * heterogeneous children are implicitly lifted to the largest child
//!   budget, and [`LinExpr::lift`] makes such a lift explicit.
//!
//! The declared family bounds are accounting devices for the budget calculus;
//! evaluation validates selections structurally (valid indices, nonempty
//! max/min families, coefficients within their level) and does not re-derive
//! the budgets.
//!
//! Shrinking: for an integer-domain tree, reducing the weight vector at level
//! `N = 2·alpha` preserves every comparison `f(x,·) ≥ f(y,·)` and, with a
//! threshold attached, every decision `f(x,·) ≥ k`. For a rational-domain
//! tree the same follows from the rational reduction at level `r = 2·alpha²`.

use num_traits::{One, Signed, Zero};

use crate::equivalence::CoeffDomain;
use crate::numeric::{dot, factorial, Int, Rat};
use crate::weight_reduction::{
    reduce, reduce_rational, rational_bound, reduce_bound, threshold_bound, ReductionReport,
};
use crate::{Error, Result};

#[derive(Clone, Debug)]
enum Node {
    Coord(usize),
    Zero,
    Scale { bound: u64, child: Box<LinExpr> },
    SumOver { children: Vec<LinExpr> },
    MaxOver { children: Vec<LinExpr> },
    MinOver { children: Vec<LinExpr> },
    Piecewise {
        guard: Box<LinExpr>,
        if_nonpos: Box<LinExpr>,
        if_pos: Box<LinExpr>,
    },
    /// A term whose representation vector is supplied with each solution,
    /// with a declared entry-level budget.
    Direct { level: Int },
}

/// An expression tree with cached coefficient domain and budget.
#[derive(Clone, Debug)]
pub struct LinExpr {
    domain: CoeffDomain,
    alpha: Int,
    node: Node,
}

fn max_alpha(children: &[LinExpr]) -> Int {
    children
        .iter()
        .map(|c| c.alpha.clone())
        .max()
        .unwrap_or_else(Int::zero)
}

fn check_same_domain(domain: CoeffDomain, children: &[&LinExpr]) -> Result<()> {
    if children.iter().any(|c| c.domain != domain) {
        return Err(Error::invalid_argument(
            "expression children must share one coefficient domain",
        ));
    }
    Ok(())
}

impl LinExpr {
    pub fn domain(&self) -> CoeffDomain {
        self.domain
    }

    /// The linearizability budget of this (sub)tree.
    pub fn alpha(&self) -> &Int {
        &self.alpha
    }

    pub fn coord(domain: CoeffDomain, index: usize) -> LinExpr {
        LinExpr {
            domain,
            alpha: Int::one(),
            node: Node::Coord(index),
        }
    }

    pub fn zero(domain: CoeffDomain) -> LinExpr {
        LinExpr {
            domain,
            alpha: Int::zero(),
            node: Node::Zero,
        }
    }

    /// Multiplication by a solution-dependent nonzero coefficient at level
    /// `bound`.
    pub fn scale(bound: u64, child: LinExpr) -> Result<LinExpr> {
        if bound == 0 {
            return Err(Error::invalid_argument("scale level must be ≥ 1"));
        }
        Ok(LinExpr {
            domain: child.domain,
            alpha: &child.alpha * Int::from(bound),
            node: Node::Scale {
                bound,
                child: Box::new(child),
            },
        })
    }

    pub fn sum_over(bound: u64, children: Vec<LinExpr>) -> Result<LinExpr> {
        if bound == 0 || children.is_empty() {
            return Err(Error::invalid_argument(
                "sum needs a positive bound and at least one child",
            ));
        }
        let domain = children[0].domain;
        check_same_domain(domain, &children.iter().collect::<Vec<_>>())?;
        let a = max_alpha(&children);
        let alpha = match domain {
            CoeffDomain::Integers => &a * Int::from(bound),
            CoeffDomain::Rationals => factorial(&a)? * Int::from(bound) * &a,
        };
        Ok(LinExpr {
            domain,
            alpha,
            node: Node::SumOver { children },
        })
    }

    pub fn max_over(bound: u64, children: Vec<LinExpr>) -> Result<LinExpr> {
        Self::extremum(bound, children, true)
    }

    pub fn min_over(bound: u64, children: Vec<LinExpr>) -> Result<LinExpr> {
        Self::extremum(bound, children, false)
    }

    fn extremum(bound: u64, children: Vec<LinExpr>, is_max: bool) -> Result<LinExpr> {
        if bound == 0 || children.is_empty() {
            return Err(Error::invalid_argument(
                "max/min needs a positive bound and at least one child",
            ));
        }
        let domain = children[0].domain;
        check_same_domain(domain, &children.iter().collect::<Vec<_>>())?;
        let a = max_alpha(&children);
        let alpha = match domain {
            CoeffDomain::Integers => Int::from(2) * &a,
            CoeffDomain::Rationals => Int::from(2) * &a * &a,
        };
        let node = if is_max {
            Node::MaxOver { children }
        } else {
            Node::MinOver { children }
        };
        Ok(LinExpr {
            domain,
            alpha,
            node,
        })
    }

    /// `if guard ≤ 0 then if_nonpos else if_pos`.
    pub fn piecewise(guard: LinExpr, if_nonpos: LinExpr, if_pos: LinExpr) -> Result<LinExpr> {
        let domain = guard.domain;
        check_same_domain(domain, &[&if_nonpos, &if_pos])?;
        let alpha = guard
            .alpha
            .clone()
            .max(if_nonpos.alpha.clone())
            .max(if_pos.alpha.clone());
        Ok(LinExpr {
            domain,
            alpha,
            node: Node::Piecewise {
                guard: Box::new(guard),
                if_nonpos: Box::new(if_nonpos),
                if_pos: Box::new(if_pos),
            },
        })
    }

    /// A leaf whose representation vector arrives with each solution.
    pub fn direct(domain: CoeffDomain, level: Int) -> Result<LinExpr> {
        if level < Int::one() {
            return Err(Error::invalid_argument("direct leaf level must be ≥ 1"));
        }
        Ok(LinExpr {
            domain,
            alpha: level.clone(),
            node: Node::Direct { level },
        })
    }

    /// Raises the budget to `alpha' ≥ alpha`; evaluation and representation
    /// are unchanged.
    pub fn lift(mut self, alpha: Int) -> Result<LinExpr> {
        if alpha < self.alpha {
            return Err(Error::invalid_argument(
                "lift target must not be below the current budget",
            ));
        }
        self.alpha = alpha;
        Ok(self)
    }
}

/// A solution rendered in the shape of its expression tree: which family
/// members are active, which coefficients apply, and the supplied
/// representation vectors of direct leaves.
#[derive(Clone, Debug)]
pub enum Selection {
    /// For coordinate and zero leaves.
    Unit,
    Scale {
        coeff: Rat,
        child: Box<Selection>,
    },
    /// Active child indices (strictly ascending) with their selections; used
    /// by sums, maxima, and minima.
    Subset {
        active: Vec<(usize, Selection)>,
    },
    Branch {
        guard: Box<Selection>,
        if_nonpos: Box<Selection>,
        if_pos: Box<Selection>,
    },
    Direct {
        rep: Vec<Rat>,
    },
}

fn shape_error(expected: &str) -> Error {
    Error::InfeasibleSolution(format!(
        "selection shape does not match the expression (expected {expected})"
    ))
}

fn check_coeff(domain: CoeffDomain, bound: u64, coeff: &Rat) -> Result<()> {
    let b = Int::from(bound);
    if coeff.is_zero() {
        return Err(Error::InfeasibleSolution(
            "scale coefficient must be nonzero; use the zero leaf instead".into(),
        ));
    }
    let ok = match domain {
        CoeffDomain::Integers => coeff.is_integer() && coeff.numer().abs() <= b,
        CoeffDomain::Rationals => coeff.numer().abs() <= b && coeff.denom() <= &b,
    };
    if !ok {
        return Err(Error::InfeasibleSolution(format!(
            "scale coefficient {coeff} is outside its level-{bound} domain"
        )));
    }
    Ok(())
}

fn check_direct_rep(domain: CoeffDomain, level: &Int, rep: &[Rat], dim: usize) -> Result<()> {
    if rep.len() != dim {
        return Err(Error::DimensionMismatch(format!(
            "direct representation has length {}, weights have length {dim}",
            rep.len()
        )));
    }
    for x in rep {
        let ok = match domain {
            CoeffDomain::Integers => x.is_integer() && &x.numer().abs() <= level,
            CoeffDomain::Rationals => &x.numer().abs() <= level && x.denom() <= level,
        };
        if !ok {
            return Err(Error::InfeasibleSolution(format!(
                "direct representation entry {x} is outside its level-{level} domain"
            )));
        }
    }
    Ok(())
}

fn active_children<'a>(
    children: &'a [LinExpr],
    sel: &'a Selection,
) -> Result<Vec<(&'a LinExpr, &'a Selection)>> {
    let Selection::Subset { active } = sel else {
        return Err(shape_error("a family subset"));
    };
    let mut out = Vec::with_capacity(active.len());
    let mut prev: Option<usize> = None;
    for (idx, child_sel) in active {
        if prev.is_some_and(|p| p >= *idx) {
            return Err(Error::InfeasibleSolution(
                "active indices must be strictly ascending".into(),
            ));
        }
        prev = Some(*idx);
        let child = children.get(*idx).ok_or_else(|| {
            Error::InfeasibleSolution(format!("active index {idx} is outside the family"))
        })?;
        out.push((child, child_sel));
    }
    Ok(out)
}

/// The goal value `f(x, w)` for the solution rendered by `sel`.
pub fn evaluate(expr: &LinExpr, sel: &Selection, w: &[Rat]) -> Result<Rat> {
    match (&expr.node, sel) {
        (Node::Coord(i), Selection::Unit) => w.get(*i).cloned().ok_or_else(|| {
            Error::DimensionMismatch(format!(
                "coordinate {i} is outside the weight vector of length {}",
                w.len()
            ))
        }),
        (Node::Zero, Selection::Unit) => Ok(Rat::zero()),
        (Node::Scale { bound, child }, Selection::Scale { coeff, child: cs }) => {
            check_coeff(expr.domain, *bound, coeff)?;
            Ok(coeff * &evaluate(child, cs, w)?)
        }
        (Node::SumOver { children }, sel) => {
            let mut acc = Rat::zero();
            for (child, cs) in active_children(children, sel)? {
                acc = &acc + &evaluate(child, cs, w)?;
            }
            Ok(acc)
        }
        (Node::MaxOver { children }, sel) | (Node::MinOver { children }, sel) => {
            let is_max = matches!(expr.node, Node::MaxOver { .. });
            let parts = active_children(children, sel)?;
            if parts.is_empty() {
                return Err(Error::InfeasibleSolution(
                    "max/min over an empty family".into(),
                ));
            }
            let mut best: Option<Rat> = None;
            for (child, cs) in parts {
                let v = evaluate(child, cs, w)?;
                best = Some(match best {
                    None => v,
                    Some(b) => {
                        if (is_max && v > b) || (!is_max && v < b) {
                            v
                        } else {
                            b
                        }
                    }
                });
            }
            Ok(best.expect("nonempty family"))
        }
        (
            Node::Piecewise {
                guard,
                if_nonpos,
                if_pos,
            },
            Selection::Branch {
                guard: gs,
                if_nonpos: ns,
                if_pos: ps,
            },
        ) => {
            let g = evaluate(guard, gs, w)?;
            if g.sgn() <= 0 {
                evaluate(if_nonpos, ns, w)
            } else {
                evaluate(if_pos, ps, w)
            }
        }
        (Node::Direct { level }, Selection::Direct { rep }) => {
            check_direct_rep(expr.domain, level, rep, w.len())?;
            dot(rep, w)
        }
        (Node::Coord(_) | Node::Zero, _) => Err(shape_error("a unit leaf")),
        (Node::Scale { .. }, _) => Err(shape_error("a scale")),
        (Node::Piecewise { .. }, _) => Err(shape_error("a branch")),
        (Node::Direct { .. }, _) => Err(shape_error("a direct representation")),
    }
}

/// The representation vector `b` of the solution at the weight vector `w`:
/// `b·w` equals the goal value, and the same `b` keeps representing the
/// solution for every weight vector in the class of `w` at level `alpha`.
/// Arg-max/arg-min choices are taken at `w` with lowest-index tie-breaking,
/// so the output is deterministic.
pub fn representation_vector(expr: &LinExpr, sel: &Selection, w: &[Rat]) -> Result<Vec<Rat>> {
    let d = w.len();
    match (&expr.node, sel) {
        (Node::Coord(i), Selection::Unit) => {
            if *i >= d {
                return Err(Error::DimensionMismatch(format!(
                    "coordinate {i} is outside the weight vector of length {d}"
                )));
            }
            let mut b = vec![Rat::zero(); d];
            b[*i] = Rat::one();
            Ok(b)
        }
        (Node::Zero, Selection::Unit) => Ok(vec![Rat::zero(); d]),
        (Node::Scale { bound, child }, Selection::Scale { coeff, child: cs }) => {
            check_coeff(expr.domain, *bound, coeff)?;
            let inner = representation_vector(child, cs, w)?;
            Ok(inner.iter().map(|x| coeff * x).collect())
        }
        (Node::SumOver { children }, sel) => {
            let mut acc = vec![Rat::zero(); d];
            for (child, cs) in active_children(children, sel)? {
                for (a, b) in acc.iter_mut().zip(representation_vector(child, cs, w)?) {
                    *a = &*a + &b;
                }
            }
            Ok(acc)
        }
        (Node::MaxOver { children }, sel) | (Node::MinOver { children }, sel) => {
            let is_max = matches!(expr.node, Node::MaxOver { .. });
            let parts = active_children(children, sel)?;
            if parts.is_empty() {
                return Err(Error::InfeasibleSolution(
                    "max/min over an empty family".into(),
                ));
            }
            let mut best: Option<(&LinExpr, &Selection, Rat)> = None;
            for (child, cs) in parts {
                let v = evaluate(child, cs, w)?;
                let better = match &best {
                    None => true,
                    Some((_, _, bv)) => {
                        if is_max {
                            v > *bv
                        } else {
                            v < *bv
                        }
                    }
                };
                if better {
                    best = Some((child, cs, v));
                }
            }
            let (child, cs, _) = best.expect("nonempty family");
            representation_vector(child, cs, w)
        }
        (
            Node::Piecewise {
                guard,
                if_nonpos,
                if_pos,
            },
            Selection::Branch {
                guard: gs,
                if_nonpos: ns,
                if_pos: ps,
            },
        ) => {
            let g = evaluate(guard, gs, w)?;
            if g.sgn() <= 0 {
                representation_vector(if_nonpos, ns, w)
            } else {
                representation_vector(if_pos, ps, w)
            }
        }
        (Node::Direct { level }, Selection::Direct { rep }) => {
            check_direct_rep(expr.domain, level, rep, d)?;
            Ok(rep.clone())
        }
        (Node::Coord(_) | Node::Zero, _) => Err(shape_error("a unit leaf")),
        (Node::Scale { .. }, _) => Err(shape_error("a scale")),
        (Node::Piecewise { .. }, _) => Err(shape_error("a branch")),
        (Node::Direct { .. }, _) => Err(shape_error("a direct representation")),
    }
}

fn alpha_as_positive_level(alpha: &Int) -> Int {
    if alpha < &Int::one() {
        Int::one()
    } else {
        alpha.clone()
    }
}

/// Shrinks the weights of an integer-domain goal function: reduces at level
/// `N = 2·alpha` (the concatenation `w ∘ k` when a threshold is attached),
/// preserving all pairwise goal comparisons and the threshold decision.
pub fn shrink_z(
    expr: &LinExpr,
    w: &[Rat],
    k: Option<&Rat>,
) -> Result<(Vec<Int>, Option<Int>, ReductionReport)> {
    if expr.domain != CoeffDomain::Integers {
        return Err(Error::invalid_argument(
            "shrink_z needs an integer-domain expression",
        ));
    }
    let alpha = alpha_as_positive_level(&expr.alpha);
    let n = Int::from(2) * &alpha;
    shrink_at_level(w, k, &n, expr.alpha.clone(), false)
}

/// Rational-domain analog: reduces at rational level `r = 2·alpha²`.
pub fn shrink_q(
    expr: &LinExpr,
    w: &[Rat],
    k: Option<&Rat>,
) -> Result<(Vec<Int>, Option<Int>, ReductionReport)> {
    if expr.domain != CoeffDomain::Rationals {
        return Err(Error::invalid_argument(
            "shrink_q needs a rational-domain expression",
        ));
    }
    let alpha = alpha_as_positive_level(&expr.alpha);
    let r = Int::from(2) * &alpha * &alpha;
    shrink_at_level(w, k, &r, expr.alpha.clone(), true)
}

pub(crate) fn shrink_at_level(
    w: &[Rat],
    k: Option<&Rat>,
    level: &Int,
    alpha: Int,
    rational: bool,
) -> Result<(Vec<Int>, Option<Int>, ReductionReport)> {
    match k {
        None => {
            let (out, mut report) = if rational {
                reduce_rational(w, level)?
            } else {
                reduce(w, level)?
            };
            report.alpha = Some(alpha);
            Ok((out, None, report))
        }
        Some(k) => {
            let mut joint = w.to_vec();
            joint.push(k.clone());
            let (mut out, mut report) = if rational {
                reduce_rational(&joint, level)?
            } else {
                reduce(&joint, level)?
            };
            let k_hat = out.pop().expect("joint vector is nonempty");
            report.alpha = Some(alpha);
            report.d = w.len();
            report.bound = if rational {
                // threshold shape of the rational bound: dimension d+1
                rational_bound(w.len() + 1, level)?
            } else {
                threshold_bound(w.len(), level)
            };
            Ok((out, Some(k_hat), report))
        }
    }
}

/// Plain (no-threshold) certified bound for an integer-domain shrink.
pub fn shrink_z_bound(d: usize, alpha: &Int) -> crate::weight_reduction::BoundFormula {
    let n = Int::from(2) * alpha_as_positive_level(alpha);
    reduce_bound(d, &n)
}
