use dfb_core::realline::{
    eval, parse_expr, real_domain, resolve_self_reference, sample_points, write_plot_csv,
    DomainReport, Expr, DEFAULT_GRID, DEFAULT_TOL, DEFAULT_WINDOW,
};

fn e(s: &str) -> Expr {
    parse_expr(s).unwrap()
}

fn domain(lower: Option<&str>, upper: Option<&str>) -> DomainReport {
    let (l, u) = (lower.map(e), upper.map(e));
    real_domain(
        l.as_ref(),
        u.as_ref(),
        DEFAULT_WINDOW,
        DEFAULT_GRID,
        DEFAULT_TOL,
    )
    .unwrap()
}

/// Newton iteration on a polynomial given by coefficients, highest degree first.
fn newton(coeffs: &[f64], mut x: f64) -> f64 {
    for _ in 0..100 {
        let (mut p, mut dp) = (0.0, 0.0);
        for &c in coeffs {
            dp = dp * x + p;
            p = p * x + c;
        }
        let step = p / dp;
        x -= step;
        if step.abs() < 1e-15 {
            break;
        }
    }
    x
}

fn assert_endpoints(report: &DomainReport, expected: &[f64], tol: f64) {
    let got = report.intervals.interior_endpoints();
    assert_eq!(got.len(), expected.len(), "{}", report.intervals);
    for (g, w) in got.iter().zip(expected) {
        assert!(
            (g - w).abs() <= tol,
            "endpoint {g} vs {w} in {}",
            report.intervals
        );
    }
}

#[test]
fn linear_bounds_start_at_zero() {
    let r = domain(Some("x/2"), Some("3*x"));
    assert_eq!(r.intervals.len(), 1);
    assert!(r.intervals.intervals()[0].touches_right_edge);
    assert_endpoints(&r, &[0.0], 1e-6);
}

#[test]
fn parabola_bounds() {
    let s5 = 5f64.sqrt();
    let r = domain(Some("(x-2)^2+1"), Some("-(x-2)^2+3"));
    assert_endpoints(&r, &[(5.0 - s5) / 2.0, (3.0 + s5) / 2.0], 1e-6);
    // quadratic-formula roots agree with Newton on x^2-5x+5 and -x^2+3x-1
    assert!((newton(&[1.0, -5.0, 5.0], 1.0) - (5.0 - s5) / 2.0).abs() < 1e-12);
    assert!((newton(&[-1.0, 3.0, -1.0], 3.0) - (3.0 + s5) / 2.0).abs() < 1e-12);
}

#[test]
fn input_side_recursion_resolves_to_cube() {
    let body = e("x^3");
    let bound = resolve_self_reference(&e("f(x)"), &body).unwrap();
    let r = real_domain(
        None,
        Some(&bound),
        DEFAULT_WINDOW,
        DEFAULT_GRID,
        DEFAULT_TOL,
    )
    .unwrap();
    assert_eq!(r.intervals.len(), 2);
    assert!(r.intervals.intervals()[1].touches_right_edge);
    assert_endpoints(&r, &[-1.0, 0.0, 1.0], 1e-6);
}

#[test]
fn cubic_bounds_match_approximate_and_newton_roots() {
    let r = domain(Some("(x-5)^3-10*x+65"), Some("-(x-5)^3+10*x-37"));
    assert_eq!(r.intervals.len(), 2);
    assert!(r.intervals.intervals()[0].touches_left_edge);
    assert_endpoints(&r, &[1.3, 6.0, 7.7], 0.05);
    // l(x) - x = x^3 - 15x^2 + 64x - 60, roots near 1.3, 6 and 7.7
    let oracle = [
        newton(&[1.0, -15.0, 64.0, -60.0], 1.0),
        newton(&[1.0, -15.0, 64.0, -60.0], 6.2),
        newton(&[1.0, -15.0, 64.0, -60.0], 8.0),
    ];
    assert_endpoints(&r, &oracle, 1e-6);
}

#[test]
fn constant_bounds() {
    let r = domain(Some("1"), Some("3"));
    assert_endpoints(&r, &[1.0, 3.0], 1e-9);
}

#[test]
fn resolution_matches_hand_written_bound_sample_for_sample() {
    let body = e("x^3");
    for (with_self, by_hand, upper) in [
        ("f(x)", "x^3", true),
        ("f(x)/2", "x^3/2", false),
        ("f(x)+1", "x^3+1", true),
    ] {
        let resolved = resolve_self_reference(&e(with_self), &body).unwrap();
        let hand = e(by_hand);
        let (a, b) = if upper {
            (
                real_domain(None, Some(&resolved), DEFAULT_WINDOW, 801, 1e-9),
                real_domain(None, Some(&hand), DEFAULT_WINDOW, 801, 1e-9),
            )
        } else {
            (
                real_domain(Some(&resolved), None, DEFAULT_WINDOW, 801, 1e-9),
                real_domain(Some(&hand), None, DEFAULT_WINDOW, 801, 1e-9),
            )
        };
        assert_eq!(a.unwrap(), b.unwrap());
        for x in sample_points(DEFAULT_WINDOW, 801) {
            assert_eq!(eval(&resolved, x).unwrap(), eval(&hand, x).unwrap());
        }
    }
}

const EXAMPLE_PAIRS: [(Option<&str>, Option<&str>); 5] = [
    (Some("x/2"), Some("3*x")),
    (Some("(x-2)^2+1"), Some("-(x-2)^2+3")),
    (None, Some("x^3")),
    (Some("(x-5)^3-10*x+65"), Some("-(x-5)^3+10*x-37")),
    (Some("1"), Some("3")),
];

#[test]
fn bisection_contract() {
    for (l, u) in EXAMPLE_PAIRS {
        let (l, u) = (l.map(e), u.map(e));
        let r = real_domain(
            l.as_ref(),
            u.as_ref(),
            DEFAULT_WINDOW,
            DEFAULT_GRID,
            DEFAULT_TOL,
        )
        .unwrap();
        let holds = |x: f64| {
            l.as_ref().is_none_or(|l| eval(l, x).unwrap() <= x)
                && u.as_ref().is_none_or(|u| x <= eval(u, x).unwrap())
        };
        for end in r.intervals.interior_endpoints() {
            assert_ne!(
                holds(end - DEFAULT_TOL),
                holds(end + DEFAULT_TOL),
                "endpoint {end}"
            );
            assert!(holds(end), "reported endpoint {end} lies in the domain");
        }
    }
}

#[test]
fn refinement_is_stable() {
    for (l, u) in EXAMPLE_PAIRS {
        let (l, u) = (l.map(e), u.map(e));
        let coarse = real_domain(
            l.as_ref(),
            u.as_ref(),
            DEFAULT_WINDOW,
            DEFAULT_GRID,
            DEFAULT_TOL,
        )
        .unwrap();
        let fine = real_domain(
            l.as_ref(),
            u.as_ref(),
            DEFAULT_WINDOW,
            2 * DEFAULT_GRID,
            DEFAULT_TOL,
        )
        .unwrap();
        let (a, b) = (
            coarse.intervals.interior_endpoints(),
            fine.intervals.interior_endpoints(),
        );
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= DEFAULT_TOL, "{x} vs {y}");
        }
    }
}

#[test]
fn csv_valid_column_follows_sign_of_x() {
    let (l, u) = (e("x/2"), e("3*x"));
    let r = real_domain(
        Some(&l),
        Some(&u),
        DEFAULT_WINDOW,
        DEFAULT_GRID,
        DEFAULT_TOL,
    )
    .unwrap();
    let mut buf = Vec::new();
    write_plot_csv(&mut buf, Some(&e("x^3")), Some(&l), Some(&u), &r).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,f,l,u,id,valid"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), DEFAULT_GRID);
    for row in rows {
        let x: f64 = row[0].parse().unwrap();
        assert_eq!(row[4], row[0]);
        assert_eq!(row[5], if x >= 0.0 { "1" } else { "0" });
        assert_eq!(row[1].is_empty(), x < 0.0);
    }
}
