//! Domains of doubly bounded functions over the real line.
//!
//! The domain `{ x | l(x) <= x <= u(x) }` is found by sampling the predicate
//! on a uniform grid across a finite window and refining every change of
//! truth value by bisection. The window stands in for the extended line:
//! an interval that reaches a window edge is flagged rather than extended
//! to infinity. Features narrower than one grid cell can be missed.

mod expr;

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

pub use expr::{eval, parse_expr, resolve_self_reference, Expr};

pub const DEFAULT_WINDOW: (f64, f64) = (-100.0, 100.0);
pub const DEFAULT_GRID: usize = 4001;
pub const DEFAULT_TOL: f64 = 1e-9;

const MAX_BISECTIONS: usize = 200;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RealError {
    #[error("at offset {offset}: expected {expected}, found {found}")]
    Parse {
        offset: usize,
        expected: String,
        found: String,
    },
    #[error("the function body may not refer to f(x)")]
    SelfReferenceInBody,
    #[error("f(x) must be resolved against a body before evaluation")]
    UnresolvedSelfReference,
    #[error("division by zero at x = {0}")]
    DivisionByZero(f64),
    #[error("window [{0}, {1}] is empty")]
    EmptyWindow(f64, f64),
    #[error("grid needs at least 2 samples, got {0}")]
    GridTooSmall(usize),
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("a domain needs at least one bound")]
    NoBounds,
}

/// A closed interval of the domain, clipped to the window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub touches_left_edge: bool,
    pub touches_right_edge: bool,
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        if self.touches_left_edge {
            f.write_str("-edge")?;
        } else {
            write!(f, "{:.6}", self.lo)?;
        }
        f.write_str(", ")?;
        if self.touches_right_edge {
            f.write_str("+edge")?;
        } else {
            write!(f, "{:.6}", self.hi)?;
        }
        f.write_str("]")
    }
}

/// Disjoint intervals in increasing order.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
#[serde(transparent)]
pub struct IntervalSet(pub Vec<Interval>);

impl IntervalSet {
    pub fn intervals(&self) -> &[Interval] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Endpoints that lie strictly inside the window, in order.
    pub fn interior_endpoints(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for iv in &self.0 {
            if !iv.touches_left_edge {
                out.push(iv.lo);
            }
            if !iv.touches_right_edge {
                out.push(iv.hi);
            }
        }
        out
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("∅");
        }
        for (i, iv) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ∪ ")?;
            }
            write!(f, "{iv}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionReason {
    DivisionByZero,
    NonFinite,
}

/// A grid sample where a bound could not be evaluated; it counts as outside
/// the domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Exclusion {
    pub x: f64,
    pub reason: ExclusionReason,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DomainReport {
    pub intervals: IntervalSet,
    pub window: (f64, f64),
    pub tolerance: f64,
    pub sample_count: usize,
    pub excluded: Vec<Exclusion>,
}

/// Lower and upper bound, each optional, with `f(x)` already resolved.
#[derive(Debug, Clone, Copy)]
pub struct Bounds<'a> {
    pub lower: Option<&'a Expr>,
    pub upper: Option<&'a Expr>,
}

impl Bounds<'_> {
    /// `Ok(truth)` or the reason the sample is excluded.
    fn check(&self, x: f64) -> Result<bool, ExclusionReason> {
        let value = |e: &Expr| match eval(e, x) {
            Ok(v) if v.is_finite() => Ok(v),
            Ok(_) => Err(ExclusionReason::NonFinite),
            Err(RealError::DivisionByZero(_)) => Err(ExclusionReason::DivisionByZero),
            Err(_) => Err(ExclusionReason::NonFinite),
        };
        let lower_ok = match self.lower {
            Some(l) => value(l)? <= x,
            None => true,
        };
        let upper_ok = match self.upper {
            Some(u) => x <= value(u)?,
            None => true,
        };
        Ok(lower_ok && upper_ok)
    }

    fn holds(&self, x: f64) -> bool {
        self.check(x).unwrap_or(false)
    }
}

/// `n` uniformly spaced points from `window.0` to `window.1` inclusive.
pub fn sample_points(window: (f64, f64), n: usize) -> impl Iterator<Item = f64> {
    let (lo, hi) = window;
    let last = (n - 1) as f64;
    (0..n).map(move |i| {
        if i + 1 == n {
            hi
        } else {
            lo + (hi - lo) * (i as f64) / last
        }
    })
}

/// Shrinks `[inside, outside]` (either order) around the change of truth
/// value and returns the end where the predicate holds.
fn bisect(bounds: &Bounds<'_>, mut inside: f64, mut outside: f64, tol: f64) -> f64 {
    for _ in 0..MAX_BISECTIONS {
        if (outside - inside).abs() <= tol / 2.0 {
            break;
        }
        let mid = inside + (outside - inside) / 2.0;
        if mid == inside || mid == outside {
            break;
        }
        if bounds.holds(mid) {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    inside
}

/// Decides the domain of `l(x) <= x <= u(x)` over `window`.
pub fn real_domain(
    lower: Option<&Expr>,
    upper: Option<&Expr>,
    window: (f64, f64),
    grid_n: usize,
    tol: f64,
) -> Result<DomainReport, RealError> {
    if lower.is_none() && upper.is_none() {
        return Err(RealError::NoBounds);
    }
    if lower.is_some_and(Expr::has_self_ref) || upper.is_some_and(Expr::has_self_ref) {
        return Err(RealError::UnresolvedSelfReference);
    }
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(RealError::EmptyWindow(lo, hi));
    }
    if grid_n < 2 {
        return Err(RealError::GridTooSmall(grid_n));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(RealError::BadTolerance(tol));
    }

    let bounds = Bounds { lower, upper };
    let xs: Vec<f64> = sample_points(window, grid_n).collect();
    let mut excluded = Vec::new();
    let truth: Vec<bool> = xs
        .iter()
        .map(|&x| {
            bounds.check(x).unwrap_or_else(|reason| {
                excluded.push(Exclusion { x, reason });
                false
            })
        })
        .collect();

    let mut intervals = Vec::new();
    let mut i = 0;
    while i < grid_n {
        if !truth[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < grid_n && truth[i + 1] {
            i += 1;
        }
        let end = i;
        let touches_left_edge = start == 0;
        let touches_right_edge = end == grid_n - 1;
        let iv_lo = if touches_left_edge {
            lo
        } else {
            bisect(&bounds, xs[start], xs[start - 1], tol)
        };
        let iv_hi = if touches_right_edge {
            hi
        } else {
            bisect(&bounds, xs[end], xs[end + 1], tol)
        };
        intervals.push(Interval {
            lo: iv_lo,
            hi: iv_hi,
            touches_left_edge,
            touches_right_edge,
        });
        i += 1;
    }

    Ok(DomainReport {
        intervals: IntervalSet(intervals),
        window,
        tolerance: tol,
        sample_count: grid_n,
        excluded,
    })
}

/// Writes one CSV row per grid sample: `x,f,l,u,id,valid`.
///
/// `f` is left empty outside the domain (or when no body is given); `l` and
/// `u` are empty when the bound is absent or cannot be evaluated.
pub fn write_plot_csv<W: Write>(
    out: &mut W,
    body: Option<&Expr>,
    lower: Option<&Expr>,
    upper: Option<&Expr>,
    report: &DomainReport,
) -> io::Result<()> {
    let bounds = Bounds { lower, upper };
    let cell = |e: Option<&Expr>, x: f64| -> String {
        match e.map(|e| eval(e, x)) {
            Some(Ok(v)) if v.is_finite() => v.to_string(),
            _ => String::new(),
        }
    };
    writeln!(out, "x,f,l,u,id,valid")?;
    for x in sample_points(report.window, report.sample_count) {
        let valid = bounds.holds(x);
        let f = if valid { cell(body, x) } else { String::new() };
        writeln!(
            out,
            "{x},{f},{},{},{x},{}",
            cell(lower, x),
            cell(upper, x),
            u8::from(valid)
        )?;
    }
    Ok(())
}

pub fn emit_plot_csv(
    body: Option<&Expr>,
    lower: Option<&Expr>,
    upper: Option<&Expr>,
    report: &DomainReport,
    path: &Path,
) -> io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_plot_csv(&mut out, body, lower, upper, report)?;
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(s: &str) -> Expr {
        parse_expr(s).unwrap()
    }

    #[test]
    fn samples_hit_window_ends() {
        let xs: Vec<f64> = sample_points((-100.0, 100.0), 4001).collect();
        assert_eq!(xs.len(), 4001);
        assert_eq!(xs[0], -100.0);
        assert_eq!(xs[2000], 0.0);
        assert_eq!(xs[4000], 100.0);
    }

    #[test]
    fn argument_errors() {
        let x = e("x");
        assert_eq!(
            real_domain(None, None, DEFAULT_WINDOW, 10, 1e-9),
            Err(RealError::NoBounds)
        );
        assert!(matches!(
            real_domain(Some(&x), None, (1.0, 1.0), 10, 1e-9),
            Err(RealError::EmptyWindow(..))
        ));
        assert!(matches!(
            real_domain(Some(&x), None, DEFAULT_WINDOW, 1, 1e-9),
            Err(RealError::GridTooSmall(1))
        ));
        assert!(matches!(
            real_domain(Some(&x), None, DEFAULT_WINDOW, 10, 0.0),
            Err(RealError::BadTolerance(_))
        ));
        let s = e("f(x)");
        assert_eq!(
            real_domain(None, Some(&s), DEFAULT_WINDOW, 10, 1e-9),
            Err(RealError::UnresolvedSelfReference)
        );
    }

    #[test]
    fn linear_bounds() {
        let r = real_domain(
            Some(&e("x/2")),
            Some(&e("3*x")),
            DEFAULT_WINDOW,
            DEFAULT_GRID,
            DEFAULT_TOL,
        )
        .unwrap();
        assert_eq!(r.intervals.len(), 1);
        let iv = r.intervals.intervals()[0];
        assert!(iv.touches_right_edge && !iv.touches_left_edge);
        assert!(iv.lo.abs() <= DEFAULT_TOL);
        assert_eq!(r.intervals.to_string(), "[0.000000, +edge]");
    }

    #[test]
    fn division_by_zero_excludes_sample() {
        // 1/x <= x holds on [-1, 0) and [1, inf); x = 0 is excluded
        let r = real_domain(Some(&e("1/x")), None, (-2.0, 2.0), 401, 1e-9).unwrap();
        assert_eq!(
            r.excluded,
            vec![Exclusion {
                x: 0.0,
                reason: ExclusionReason::DivisionByZero
            }]
        );
        let ends = r.intervals.interior_endpoints();
        assert_eq!(ends.len(), 3);
        assert!((ends[0] + 1.0).abs() < 1e-9);
        assert!(ends[1] < 0.0 && ends[1] > -1e-9);
        assert!((ends[2] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn empty_domain_displays() {
        let r = real_domain(Some(&e("x+1")), None, DEFAULT_WINDOW, 101, 1e-9).unwrap();
        assert!(r.intervals.is_empty());
        assert_eq!(r.intervals.to_string(), "∅");
    }

    #[test]
    fn csv_shape() {
        let (l, u) = (e("x/2"), e("3*x"));
        let r = real_domain(Some(&l), Some(&u), (-1.0, 1.0), 5, 1e-9).unwrap();
        let mut buf = Vec::new();
        write_plot_csv(&mut buf, Some(&e("x^3")), Some(&l), Some(&u), &r).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "x,f,l,u,id,valid\n-1,,-0.5,-3,-1,0\n-0.5,,-0.25,-1.5,-0.5,0\n0,0,0,0,0,1\n0.5,0.125,0.25,1.5,0.5,1\n1,1,0.5,3,1,1\n"
        );
    }
}
