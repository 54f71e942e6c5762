//! End-to-end checks on the down-conversion amplitude with the default
//! dimensionless widths `L_p = 2.135`, `L_q = 7.455`.

use cvschmidt_core::*;

struct Run {
    dec: SchmidtDecomposition,
    rule: QuadratureRule,
}

fn run(beta: f64, cutoff: usize) -> Run {
    let basis = BasisFamily::hermite(beta).unwrap();
    let rule = matched_rule(&basis, auto_order(cutoff)).unwrap();
    let amp = Amplitude::pdc(PdcParams::typical());
    let c = compute_coefficients(&amp, &basis, &basis, cutoff, cutoff, &rule, &rule).unwrap();
    Run {
        dec: decompose(&c).unwrap(),
        rule,
    }
}

#[test]
fn typical_parameters_are_dimensionless_widths() {
    let p = PdcParams::typical();
    assert!((p.l_p() - 2.135).abs() < 1e-12);
    assert!((p.l_q() - 7.455).abs() < 1e-12);
    // 2π √(π/2) / (L_q − L_p)
    assert!((p.exact_norm_squared().unwrap() - 1.480_226_498_658_122).abs() < 1e-12);
}

#[test]
fn odd_parity_coefficients_vanish() {
    let r = run(1.0, 25);
    let c = r.dec.source().entries();
    for m in 0..=25 {
        for n in 0..=25 {
            if (m + n) % 2 == 1 {
                assert!(c[(m, n)].norm() < 1e-10, "C[{m},{n}] = {}", c[(m, n)]);
            }
        }
    }
}

#[test]
fn captured_weight_obeys_bessel() {
    let r = run(1.0, 25);
    let norm = r.dec.source().norm_squared().value().unwrap();
    assert!(r.dec.captured_weight() <= norm);
    assert!(r.dec.captured_weight() > 0.96 * norm);
}

#[test]
fn d2_is_nonincreasing_in_the_cutoff() {
    let full = run(1.0, 25);
    let mut last = f64::INFINITY;
    for cutoff in 5..=25 {
        let c = full.dec.source().truncated(cutoff, cutoff).unwrap();
        let d2 = distance_d2(&decompose(&c).unwrap()).unwrap();
        assert!(d2 <= last, "cutoff {cutoff}: {d2} > {last}");
        last = d2;
    }
}

#[test]
fn d1_agrees_with_d2() {
    let amp = Amplitude::pdc(PdcParams::typical());
    for beta in [1.0, 0.5, 2.0] {
        for cutoff in [10, 25] {
            let r = run(beta, cutoff);
            let d1 = distance_d1(&amp, &r.dec, &r.rule, &r.rule).unwrap();
            let d2 = distance_d2(&r.dec).unwrap();
            assert!((d1 - d2).abs() < 1e-3, "β={beta} cutoff={cutoff}: d1={d1} d2={d2}");
        }
    }
}

#[test]
fn leading_eigenvalues_do_not_depend_on_beta() {
    let a = run(1.0, 25);
    let b = run(2.0, 25);
    for i in 0..6 {
        let (x, y) = (a.dec.lambdas()[i], b.dec.lambdas()[i]);
        assert!((x - y).abs() < 5e-3, "λ{i}: {x} vs {y}");
    }
}

#[test]
fn modes_are_orthonormal_functions() {
    let r = run(1.0, 25);
    for side in [Side::First, Side::Second] {
        let values: Vec<Vec<Complex64>> = r.rule.nodes().iter().map(|&k| eval_modes(&r.dec, side, k).unwrap()).collect();
        for i in 0..=5 {
            for j in 0..=5 {
                let ip: Complex64 = values
                    .iter()
                    .zip(r.rule.compensated_weights())
                    .map(|(v, &w)| v[i].conj() * v[j] * w)
                    .sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((ip - want).norm() < 1e-8, "{side:?} <{i},{j}> = {ip}");
            }
        }
    }
}

#[test]
fn modes_have_definite_parity() {
    let r = run(1.0, 25);
    for side in [Side::First, Side::Second] {
        for i in 0..8 {
            let mut even: f64 = 0.0;
            let mut odd: f64 = 0.0;
            for step in 0..=500 {
                let k = step as f64 * 0.01;
                let (a, b) = (eval_mode(&r.dec, side, i, k).unwrap(), eval_mode(&r.dec, side, i, -k).unwrap());
                even = even.max((a - b).norm());
                odd = odd.max((a + b).norm());
            }
            assert!(even.min(odd) < 1e-6, "{side:?} mode {i}: even {even}, odd {odd}");
        }
    }
}

#[test]
fn quadrature_norm_approaches_the_exact_norm_slowly() {
    // |f|² falls off like 1/t² along p = −q·L_q/L_p, so tensor quadrature
    // misses a tail that shrinks only as the rule widens.
    let exact = PdcParams::typical().exact_norm_squared().unwrap();
    let amp = Amplitude::pdc(PdcParams::typical()).with_norm_hint(None);
    let err = |order| {
        let rule = matched_rule(&BasisFamily::hermite(1.0).unwrap(), order).unwrap();
        (norm_squared(&amp, &rule, &rule).unwrap() - exact).abs() / exact
    };
    let (coarse, fine) = (err(60), err(200));
    assert!(fine < coarse && fine < 1e-2, "{coarse} {fine}");
}
