use cvschmidt_core::amplitude::expr;
use cvschmidt_core::*;
use proptest::prelude::*;

fn families() -> Vec<BasisFamily> {
    vec![
        BasisFamily::hermite(1.0).unwrap(),
        BasisFamily::hermite(0.6).unwrap(),
        BasisFamily::laguerre(1.0).unwrap(),
        BasisFamily::legendre(-1.0, 1.0).unwrap(),
        BasisFamily::legendre(0.5, 4.0).unwrap(),
    ]
}

/// Gram matrix of `O_0..O_n_max` on the matched rule.
fn gram(basis: &BasisFamily, n_max: usize, order: usize) -> Vec<Vec<f64>> {
    let rule = matched_rule(basis, order).unwrap();
    let table: Vec<Vec<f64>> = rule.nodes().iter().map(|&k| basis.eval_batch(n_max, k).unwrap()).collect();
    let w = rule.compensated_weights();
    let mut g = vec![vec![0.0; n_max + 1]; n_max + 1];
    for (row, &wi) in table.iter().zip(w) {
        for m in 0..=n_max {
            for n in 0..=n_max {
                g[m][n] += wi * row[m] * row[n];
            }
        }
    }
    g
}

#[test]
fn basis_functions_are_orthonormal() {
    for b in families() {
        let g = gram(&b, 25, 60);
        for (m, row) in g.iter().enumerate() {
            for (n, &v) in row.iter().enumerate() {
                let want = if m == n { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-10, "{:?} ({m},{n}) = {v}", b.kind());
            }
        }
    }
}

#[test]
fn high_order_basis_functions_stay_normalized() {
    for b in families() {
        let g = gram(&b, 100, 160);
        assert!((g[100][100] - 1.0).abs() < 1e-10, "{:?}: {}", b.kind(), g[100][100]);
        assert!(g[100][99].abs() < 1e-10 && g[100][0].abs() < 1e-10);
    }
}

fn measures() -> [Measure; 3] {
    [Measure::GaussHermite, Measure::GaussLaguerre, Measure::GaussLegendre]
}

/// Exact moments `∫ xᵏ w(x) dx` for each measure.
fn moment(measure: Measure, k: u32) -> f64 {
    match measure {
        // Γ((k+1)/2) for even k, by recursion from √π.
        Measure::GaussHermite if k % 2 == 1 => 0.0,
        Measure::GaussHermite => (1..=k / 2).fold(std::f64::consts::PI.sqrt(), |acc, j| acc * (2 * j - 1) as f64 / 2.0),
        Measure::GaussLaguerre => (1..=k).fold(1.0, |acc, j| acc * j as f64),
        Measure::GaussLegendre if k % 2 == 1 => 0.0,
        Measure::GaussLegendre => 2.0 / (k + 1) as f64,
    }
}

#[test]
fn gauss_rules_are_exact_to_degree_2n_minus_1() {
    for measure in measures() {
        for order in 1..=64usize {
            let rule = gauss_rule(measure, order).unwrap();
            // Degrees beyond ~40 overflow the Laguerre moments' precision; the
            // relative check stays meaningful up to there for every measure.
            let top = (2 * order - 1).min(40) as u32;
            for k in 0..=top {
                let got = rule.integrate(false, |x| x.powi(k as i32));
                let want = moment(measure, k);
                let scale = want.abs().max(moment(measure, k + k % 2).abs()).max(1.0);
                assert!((got - want).abs() <= 1e-10 * scale, "{measure:?} n={order} k={k}: {got} vs {want}");
            }
        }
    }
}

fn random_matrix(rows: usize, cols: usize, rank: Option<usize>, seed: &[f64]) -> ComplexMatrix {
    let mut it = seed.iter().cycle().copied().enumerate().map(|(i, s)| (s * (i as f64 * 0.731 + 1.3)).sin());
    let mut next = move || it.next().unwrap();
    match rank {
        None => ComplexMatrix::from_row_major(
            rows,
            cols,
            (0..rows * cols).map(|_| Complex64::new(next(), next())).collect(),
        ),
        Some(r) => {
            let a: Vec<Complex64> = (0..rows * r).map(|_| Complex64::new(next(), next())).collect();
            let b: Vec<Complex64> = (0..r * cols).map(|_| Complex64::new(next(), next())).collect();
            let mut m = ComplexMatrix::zeros(rows, cols);
            for i in 0..rows {
                for j in 0..cols {
                    m[(i, j)] = (0..r).map(|l| a[i * r + l] * b[l * cols + j]).sum();
                }
            }
            m
        }
    }
}

fn wrap(entries: ComplexMatrix) -> CoefficientMatrix {
    let b = BasisFamily::hermite(1.0).unwrap();
    CoefficientMatrix::from_entries(entries, b, b, NormSquared::Exact(1.0)).unwrap()
}

fn max_inner_product_error(m: &ComplexMatrix, rows: &[usize]) -> f64 {
    let mut worst: f64 = 0.0;
    for &i in rows {
        for &j in rows {
            let ip: Complex64 = m.row(i).iter().zip(m.row(j)).map(|(a, b)| a.conj() * b).sum();
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((ip - want).norm());
        }
    }
    worst
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn parity_of_basis_functions(k in -6.0f64..6.0, beta in 0.3f64..3.0, n in 0usize..60) {
        let b = BasisFamily::hermite(beta).unwrap();
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!((b.eval(n, k).unwrap() - sign * b.eval(n, -k).unwrap()).abs() < 1e-14);
        let l = BasisFamily::legendre(-2.0, 2.0).unwrap();
        let x = k / 3.0;
        prop_assert!((l.eval(n, x).unwrap() - sign * l.eval(n, -x).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn batch_matches_single(k in -5.0f64..5.0, which in 0usize..5) {
        let b = families()[which];
        let k = if b.domain().contains(k) { k } else { b.center() + 0.3 };
        let batch = b.eval_batch(40, k).unwrap();
        for (n, v) in batch.iter().enumerate() {
            prop_assert!((v - b.eval(n, k).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn svd_preserves_trace_and_reconstructs(
        rows in 1usize..=50,
        cols in 1usize..=50,
        rank in prop::option::of(1usize..6),
        seed in prop::collection::vec(-3.0f64..3.0, 7),
    ) {
        let c = wrap(random_matrix(rows, cols, rank, &seed));
        let d = decompose(&c).unwrap();
        let total = c.captured_norm_squared();
        prop_assert!((d.captured_weight() - total).abs() < 1e-12 * total);
        prop_assert!(d.reconstruct().max_abs_diff(c.entries()) < 1e-10);
        prop_assert!(d.lambdas().windows(2).all(|w| w[0] >= w[1]));

        let all: Vec<usize> = (0..d.len()).collect();
        prop_assert!(max_inner_product_error(d.modes(Side::First), &all) < 1e-10);
        let active: Vec<usize> = (0..d.len()).filter(|&i| d.lambdas()[i] > 0.0).collect();
        prop_assert!(max_inner_product_error(d.modes(Side::Second), &active) < 1e-10);
    }

    #[test]
    fn lambda_order_is_scale_invariant(
        seed in prop::collection::vec(-3.0f64..3.0, 5),
        scale in 1e-3f64..1e3,
    ) {
        let c = random_matrix(8, 10, None, &seed);
        let scaled = ComplexMatrix::from_row_major(8, 10, c.as_slice().iter().map(|z| z * scale).collect());
        let a = decompose(&wrap(c)).unwrap();
        let b = decompose(&wrap(scaled)).unwrap();
        for (x, y) in a.lambdas().iter().zip(b.lambdas()) {
            prop_assert!((x * scale * scale - y).abs() <= 1e-10 * y.abs().max(1e-300));
        }
        let argmax = |d: &SchmidtDecomposition| {
            (0..d.len()).max_by(|&i, &j| d.lambdas()[i].total_cmp(&d.lambdas()[j]).then(j.cmp(&i))).unwrap()
        };
        prop_assert_eq!(argmax(&a), argmax(&b));
    }

    #[test]
    fn normalize_is_idempotent(lp in 0.5f64..4.0, gap in 1.0f64..6.0, factor in 0.1f64..5.0) {
        let amp = Amplitude::pdc(PdcParams::dimensionless(lp, lp + gap).unwrap()).scaled(factor.into());
        let rule = matched_rule(&BasisFamily::hermite(1.0).unwrap(), 40).unwrap();
        let once = normalize(&amp, &rule, &rule).unwrap();
        let twice = normalize(&once, &rule, &rule).unwrap();
        prop_assert_eq!(once.norm_hint(), Some(1.0));
        for &(p, q) in &[(0.0, 0.0), (0.3, -1.2), (2.0, 1.0)] {
            let (a, b) = (once.evaluate(p, q).unwrap(), twice.evaluate(p, q).unwrap());
            prop_assert!((a - b).norm() <= 1e-15 * a.norm().max(1.0));
        }
    }
}

/// Expressions covering every operator, function and precedence level.
const CORPUS: [&str; 50] = [
    "p",
    "q",
    "1",
    "2.5",
    "1e-3",
    "p+q",
    "p-q",
    "p*q",
    "p/q",
    "p^2",
    "-p",
    "-p^2",
    "(-p)^2",
    "p^-2",
    "p^q^2",
    "(p^q)^2",
    "p-q-1",
    "p-(q-1)",
    "p/q/2",
    "p/(q/2)",
    "p*q+1",
    "p*(q+1)",
    "--p",
    "-(p+q)",
    "+p",
    "exp(p)",
    "sin(q)",
    "cos(p*q)",
    "sinc(p-q)",
    "sqrt(abs(p))",
    "abs(-q)",
    "exp(-(p+q)^2/2)",
    "exp(-(p+q)^2/8)*sinc(2.135*p+7.455*q)",
    "exp(-p^2/2)*exp(-q^2/2)",
    "p*exp(-p^2)*q*exp(-q^2)",
    "1/(1+p^2+q^2)",
    "2*p - 3*q + 4",
    "p^3 - 3*p*q^2",
    "(p+q)*(p-q)",
    "((p))",
    "-(-(-p))",
    "cos(p)^2 + sin(p)^2",
    "sinc(0.5*(p+q))^2",
    "exp(-abs(p-q))",
    "0.25*p^4 - q",
    "1.5e2*p",
    "p / -q",
    "2^-p",
    "-2^2",
    "sqrt(p^2+q^2)*exp(-sqrt(p^2+q^2))",
];

#[test]
fn render_then_parse_is_idempotent() {
    for src in CORPUS {
        let tree = expr::parse(src).unwrap();
        let rendered = tree.to_string();
        let again = expr::parse(&rendered).unwrap();
        assert_eq!(tree, again, "{src} rendered as {rendered}");
        assert_eq!(rendered, again.to_string());
    }
}

#[test]
fn decomposition_is_deterministic() {
    let amp = Amplitude::pdc(PdcParams::typical());
    let basis = BasisFamily::hermite(1.0).unwrap();
    let rule = matched_rule(&basis, 80).unwrap();
    let run = || {
        let c = compute_coefficients(&amp, &basis, &basis, 12, 12, &rule, &rule).unwrap();
        let d = decompose(&c).unwrap();
        (d.lambdas().to_vec(), d.modes(Side::First).clone(), d.modes(Side::Second).clone())
    };
    assert_eq!(run(), run());
}
