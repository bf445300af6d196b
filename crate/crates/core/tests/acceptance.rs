use std::f64::consts::TAU;
use std::process::ExitCode;
use std::time::Instant;

use qcord_core::calculus::{Chart, ChartMap, CoordImage, Form, Loop, RationalField, ScalarField, SampleDomain, VectorField};
use qcord_core::cech::{extract_cocycle, roundtrip_class, same_class, Cover, ExactCocycle, SmoothCircleCord};
use qcord_core::cohomology::{chain_map_defect, gv_integral_of, h0_dimension, nabla, slope_lattice_count};
use qcord_core::cord::{
    bracket, compose_sections, concord_from_gauge, curvature, curvature_by_recursion, gauge, gv_cord, is_impotent, mc_cord,
    stabilizer_solve, transport_form, JetForm, QuantumCord, RecursionFactor,
};
use qcord_core::holonomy::{compose, first_order_check, monodromy_word, transport, HolonomyJet, TransportOptions, Word};
use qcord_core::jet::{arrow_compose, arrow_invert, GroupoidArrow};
use qcord_core::rational::{int, rat, zero};
use qcord_core::sample;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<E: std::fmt::Debug>(err: E) -> String {
    format!("{err:?}")
}

fn minus_dy() -> VectorField {
    VectorField::coordinate(2, 1, int(-1))
}

fn cylinder_a0() -> Form {
    Form::basis(1).add(&Form::one_form(0, ScalarField::coord(1).mul(&ScalarField::cos(&[(0, 1)]))))
}

fn cylinder(order: u32) -> QuantumCord {
    gv_cord(&cylinder_a0(), &minus_dy(), order).unwrap()
}

fn circle_cord(coeffs: &[i64], order: u32) -> JetForm {
    let mut c = vec![Form::zero()];
    c.extend(coeffs.iter().map(|&k| Form::basis(0).scale(&int(k))));
    JetForm::univariate(1, order, c).unwrap()
}

fn groupoid_laws() -> Outcome {
    let mut r = sample::rng(1);
    for i in 0..200 {
        let k = 1 + i % 2;
        let [a, b, c] = sample::arrow_triple(&mut r, k, 8);
        let left = arrow_compose(&arrow_compose(&a, &b).map_err(e)?, &c).map_err(e)?;
        let right = arrow_compose(&a, &arrow_compose(&b, &c).map_err(e)?).map_err(e)?;
        ensure(left == right, || format!("associativity fails on instance {i}"))?;
        let ai = arrow_invert(&a).map_err(e)?;
        ensure(arrow_compose(&a, &ai).map_err(e)?.is_identity(), || format!("a⁻¹∘a ≠ 1 on instance {i}"))?;
        ensure(arrow_compose(&ai, &a).map_err(e)?.is_identity(), || format!("a∘a⁻¹ ≠ 1 on instance {i}"))?;
        ensure(arrow_invert(&ai).map_err(e)? == a, || format!("(a⁻¹)⁻¹ ≠ a on instance {i}"))?;
    }
    Ok("200 triples, k ∈ {1,2}, N = 8".into())
}

fn gauge_covariance() -> Outcome {
    let chart = Chart::cylinder();
    let mut r = sample::rng(2);
    let mut nonflat = 0;
    for i in 0..50 {
        let k = 1 + i % 2;
        let s_a = sample::source(&mut r, &chart, k);
        let s_y = sample::source(&mut r, &chart, k);
        let y = sample::section(&mut r, &chart, s_y, &s_a, 6);
        let a = sample::jet_form(&mut r, &chart, s_a, 1, 6);
        let fa = curvature(&a).map_err(e)?;
        if !fa.is_zero() {
            nonflat += 1;
        }
        let lhs = curvature(&gauge(&y, &a).map_err(e)?).map_err(e)?;
        let rhs = transport_form(&y.truncate(5), &fa).map_err(e)?;
        let (l, rr) = lhs.common_order(&rhs);
        ensure(l == rr, || format!("F_(Y⋆A) ≠ (F_A∘Y)(Y′)⁻¹ on instance {i}"))?;
    }
    Ok(format!("50 instances, N = 6, {nonflat} with F_A ≠ 0"))
}

fn gauge_group_law() -> Outcome {
    let chart = Chart::cylinder();
    let mut r = sample::rng(3);
    for i in 0..100 {
        let k = 1 + i % 2;
        let n = 5;
        let s_a = sample::source(&mut r, &chart, k);
        let s_y = sample::source(&mut r, &chart, k);
        let s_z = sample::source(&mut r, &chart, k);
        let y = sample::section(&mut r, &chart, s_y.clone(), &s_a, n);
        let z = sample::section(&mut r, &chart, s_z, &s_y, n);
        let a = sample::jet_form(&mut r, &chart, s_a, 1, n);
        let lhs = gauge(&z.truncate(n - 1), &gauge(&y, &a).map_err(e)?).map_err(e)?;
        let rhs = gauge(&compose_sections(&z, &y).map_err(e)?, &a).map_err(e)?;
        ensure(lhs.agrees_with(&rhs), || format!("Z⋆(Y⋆A) ≠ (Y∘Z)⋆A on instance {i}"))?;
    }
    Ok("100 instances, k ∈ {1,2}, N = 5".into())
}

fn gv_construction() -> Outcome {
    let a = gv_cord(&cylinder_a0(), &minus_dy(), 9).map_err(e)?;
    let want = Form::one_form(0, ScalarField::cos(&[(0, 1)]).neg());
    ensure(a.form().coeff1(1) == want, || "a₁ ≠ −cos x dx".into())?;
    ensure((2..=9).all(|m| a.form().coeff1(m).is_zero()), || "a_m ≠ 0 for some m ≥ 2".into())?;
    ensure(a.flat_through() >= 8, || format!("flat only through {}", a.flat_through()))?;
    let derived = curvature_by_recursion(a.form(), RecursionFactor::Derived).map_err(e)?;
    let printed = curvature_by_recursion(a.form(), RecursionFactor::AsPrinted).map_err(e)?;
    let chart = Chart::cylinder();
    let residual = printed
        .first_nonzero()
        .map(|(_, m, w)| format!("order {} residual {}", m.degree(), w.display(&chart)))
        .unwrap_or_else(|| "zero".into());
    Ok(format!(
        "curvature ≡ 0 through order {}; (p−q) recursion: with ½ {}, as printed {}",
        a.flat_through(),
        if derived.is_zero() { "zero" } else { "nonzero" },
        residual
    ))
}

fn stabilizer() -> Outcome {
    let examples = [
        ("dy", Form::basis(1)),
        ("cylinder", cylinder_a0()),
        ("dy + y² sin x dx", Form::basis(1).add(&Form::one_form(0, ScalarField::coord(1).pow(2).mul(&ScalarField::sin(&[(0, 1)]))))),
    ];
    for (name, a0) in &examples {
        let a = gv_cord(a0, &minus_dy(), 8).map_err(e)?;
        let y = stabilizer_solve(&a, &minus_dy()).map_err(e)?;
        ensure(y.is_identity() && y.order() == 8, || format!("{name}: stabilizer is not the identity"))?;
    }
    let zero = QuantumCord::certify(JetForm::zero(1, 1, 8)).map_err(e)?;
    ensure(stabilizer_solve(&zero, &minus_dy()).is_err(), || "impotent cord was not rejected".into())?;
    Ok(format!("{} nonsingular examples give the identity at N = 8; impotent control rejected", examples.len()))
}

fn mc_elements() -> Outcome {
    let chart = Chart::cylinder();
    let mut r = sample::rng(6);
    let n = 4;
    for i in 0..20 {
        let x = sample::negative_x(&mut r, &chart, n);
        let (b, _) = mc_cord(&cylinder_a0(), &minus_dy(), &x, n, &chart, &SampleDomain::default()).map_err(e)?;
        let sum = b.form().contract(&minus_dy()).map_err(e)?.add(&x).map_err(e)?;
        ensure(sum.is_zero(), || format!("ι_V B + X ≠ 0 on instance {i}"))?;
    }
    let minus_one = JetForm::univariate(0, 8, vec![Form::constant(int(-1))]).map_err(e)?;
    let (b, _) = mc_cord(&cylinder_a0(), &minus_dy(), &minus_one, 8, &chart, &SampleDomain::default()).map_err(e)?;
    let a = cylinder(8);
    for m in 0..=8u32 {
        let sign = if m % 2 == 0 { -1 } else { 1 };
        ensure(b.form().coeff1(m) == a.form().coeff1(m).scale(&int(sign)), || format!("X = −1 disagrees at order {m}"))?;
    }
    Ok("20 random X at N = 4; X = −1 gives b_n = (−1)^(n+1) a_n through order 8".into())
}

fn flat_torus_cord() -> JetForm {
    // Y⋆(t a₁) with a₁ closed: flat, impotent and nonlinear in t
    let a1 = Form::one_form(0, ScalarField::cos(&[(0, 1)]).add(&ScalarField::constant(rat(1, 5)))).add(&Form::basis(1).scale(&rat(1, 3)));
    let a = JetForm::univariate(1, 5, vec![Form::zero(), a1]).unwrap();
    let y = qcord_core::cord::GaugeSection::univariate(
        5,
        vec![
            RationalField::zero(),
            ScalarField::constant(int(2)).add(&ScalarField::sin(&[(1, 1)])).into(),
            ScalarField::cos(&[(0, 1)]).scale(&rat(1, 2)).into(),
            RationalField::constant(rat(1, 4)),
        ],
    )
    .unwrap();
    gauge(&y, &a).unwrap()
}

fn holonomy() -> Outcome {
    let opts = TransportOptions::default();
    let circle = Chart::circle();
    let gen = Loop::generator(&circle, 0, &[int(0)]).map_err(e)?;
    let ex = TAU.exp();
    let j = transport(&circle_cord(&[1], 3), &circle, &gen, &opts).map_err(e)?;
    let lin = (j.linear() - ex).abs() / ex;
    ensure(lin < 1e-8, || format!("t dθ linear part rel err {lin:.2e}"))?;
    let j = transport(&circle_cord(&[1, 1], 3), &circle, &gen, &opts).map_err(e)?;
    let q = ex * (ex - 1.0);
    let quad = (j.coeff(2) - q).abs() / q;
    ensure(quad < 1e-6, || format!("logistic quadratic rel err {quad:.2e}"))?;

    let torus = Chart::torus(2);
    let b = flat_torus_cord();
    let gens: Vec<Loop> = (0..2).map(|i| Loop::generator(&torus, i, &[int(0), int(0)]).unwrap()).collect();
    let letter = |w: &[(usize, i8)]| monodromy_word(&b, &torus, &gens, &Word(w.to_vec()), &opts);
    let words: Vec<Vec<(usize, i8)>> = vec![
        vec![(0, 1), (1, 1)],
        vec![(0, 1), (0, -1)],
        vec![(1, -1), (0, 1), (1, 1)],
        vec![(0, 1), (1, 1), (0, -1), (1, -1)],
        vec![(1, 1), (1, 1), (0, -1), (1, 1)],
    ];
    let mut worst: f64 = 0.0;
    for w in &words {
        let whole = letter(w).map_err(e)?;
        let mut prod = HolonomyJet::identity(whole.order());
        for l in w {
            prod = compose(&prod, &letter(&[*l]).map_err(e)?).map_err(e)?;
        }
        worst = worst.max(whole.residual(&prod));
    }
    let comm = letter(&words[3]).map_err(e)?.residual(&HolonomyJet::identity(b.order()));
    worst = worst.max(comm);
    ensure(worst <= 1e-6, || format!("homomorphism residual {worst:.2e}"))?;

    let mut ghys: f64 = 0.0;
    let impotent: Vec<(JetForm, Chart, Loop)> = vec![
        (circle_cord(&[1], 3), circle.clone(), gen.clone()),
        (circle_cord(&[1, 1], 3), circle.clone(), gen.clone()),
        (b.clone(), torus.clone(), gens[0].clone()),
        (b.clone(), torus.clone(), gens[1].clone()),
        (leaf_cord(4), circle.clone(), gen.clone()),
    ];
    for (a, chart, g) in &impotent {
        ensure(is_impotent(a), || "example is not impotent".into())?;
        ghys = ghys.max(first_order_check(a, chart, g, &opts).map_err(e)?.rel_err);
    }
    ensure(ghys < 1e-6, || format!("first-order check rel err {ghys:.2e}"))?;
    Ok(format!(
        "e^2π rel {lin:.1e}; logistic c₂ rel {quad:.1e}; words ≤ 4 residual {worst:.1e}; first-order worst {ghys:.1e} over {} examples",
        impotent.len()
    ))
}

fn leaf_cord(order: u32) -> JetForm {
    let y = ScalarField::coord(1);
    let a0 = Form::basis(1).sub(&Form::one_form(0, y.add(&y.pow(2))));
    let a = gv_cord(&a0, &minus_dy(), order).unwrap();
    let leaf = ChartMap::new(
        Chart::circle(),
        Chart::cylinder(),
        vec![CoordImage::Angle(vec![(0, 1)]), CoordImage::Expr(ScalarField::zero())],
    )
    .unwrap();
    a.form().pullback(&leaf).unwrap()
}

fn twisted_complex() -> Outcome {
    let chart = Chart::cylinder();
    let mut r = sample::rng(8);
    let n = 5;
    let src = vec![RationalField::zero()];
    let a = cylinder(n).into_form();
    for i in 0..10 {
        let s_y = sample::source(&mut r, &chart, 1);
        let y = sample::section(&mut r, &chart, s_y, &src, n);
        let flat = if i % 2 == 0 { a.clone() } else { gauge(&y, &a).map_err(e)?.truncate(n - 1) };
        let s = flat.source().to_vec();
        for p in 0..=1 {
            let w = sample::jet_form(&mut r, &chart, s.clone(), p, flat.order());
            let twice = nabla(&flat, &nabla(&flat, &w).map_err(e)?).map_err(e)?;
            ensure(twice.is_zero(), || format!("∇² ≠ 0 on instance {i}, degree {p}"))?;
        }
        let (p, q) = (i % 2, 1);
        let z = sample::jet_form(&mut r, &chart, s.clone(), p, flat.order());
        let w = sample::jet_form(&mut r, &chart, s.clone(), q, flat.order());
        let lhs = nabla(&flat, &bracket(&z, &w).map_err(e)?).map_err(e)?;
        let nz = nabla(&flat, &z).map_err(e)?;
        let nw = nabla(&flat, &w).map_err(e)?;
        let t1 = bracket(&nz, &w.truncate(nz.order())).map_err(e)?;
        let t2 = bracket(&z.truncate(nw.order()), &nw).map_err(e)?;
        let sign = if p % 2 == 0 { int(1) } else { int(-1) };
        let rhs = t1.add(&t2.scale(&sign)).map_err(e)?;
        let (l, rr) = lhs.common_order(&rhs);
        ensure(l == rr, || format!("graded Leibniz fails on instance {i}"))?;
        let w = sample::jet_form(&mut r, &chart, src.clone(), (i % 2) as u32, n);
        ensure(chain_map_defect(&y, &a, &w).map_err(e)?.is_zero(), || format!("chain map defect on instance {i}"))?;
    }
    Ok("10 instances each: ∇² = 0, Leibniz, ∇_B∘Φ = Φ∘∇_A, k = 1, N = 5".into())
}

fn bott_h0() -> Outcome {
    let torus = Chart::torus(2);
    let mut checked = 0;
    for (p, q) in [(0i64, 1i64), (1, 1), (1, 2), (2, 3)] {
        let a = Form::basis(1).scale(&int(q)).sub(&Form::basis(0).scale(&int(p)));
        let v = VectorField::coordinate(2, 1, rat(-1, q));
        for d in 0..=6 {
            let got = h0_dimension(&a, &v, &torus, d).map_err(e)?;
            let want = slope_lattice_count(p, q, d);
            ensure(got == want, || format!("slope ({p},{q}), D = {d}: rank {got} vs lattice {want}"))?;
            checked += 1;
        }
    }
    let a = Form::basis(1).scale(&int(2)).sub(&Form::basis(0));
    let five = h0_dimension(&a, &VectorField::coordinate(2, 1, rat(-1, 2)), &torus, 4).map_err(e)?;
    ensure(five == 5, || format!("slope (1,2), D = 4 gave {five}"))?;
    Ok(format!("{checked} (slope, cutoff) pairs match; (1,2), D = 4 → 5"))
}

fn gv_integral() -> Outcome {
    let t3 = Chart::torus(3);
    let a1 = Form::one_form(0, ScalarField::cos(&[(2, 1)])).add(&Form::one_form(1, ScalarField::sin(&[(2, 1)])));
    let base = gv_integral_of(&a1, &t3).map_err(e)?;
    ensure(base.rational == int(-1) && base.two_pi_power == 3, || format!("GV = {base:?}"))?;
    let mut r = sample::rng(10);
    for i in 0..20 {
        let f = sample::scalar(&mut r, &t3, 3);
        let moved = gv_integral_of(&a1.add(&Form::scalar(f).d()), &t3).map_err(e)?;
        ensure(moved == base, || format!("a₁ + df changes the integral on instance {i}"))?;
    }
    Ok(format!("−(2π)³ = {:.6}; invariant under 20 random df", base.to_f64()))
}

fn cech_roundtrip() -> Outcome {
    let cover = Cover::uniform(3, rat(1, 10)).map_err(e)?;
    let opts = TransportOptions::default();
    let a1 = Form::one_form(0, ScalarField::cos(&[(0, 1)]).add(&ScalarField::constant(rat(1, 5))));
    let a2 = Form::one_form(0, ScalarField::sin(&[(0, 2)]).scale(&rat(1, 2)));
    let a = JetForm::univariate(1, 4, vec![Form::zero(), a1, a2]).map_err(e)?;
    let c = extract_cocycle(&SmoothCircleCord::new(a), &cover, &opts, 1e-6).map_err(e)?;
    let rep = roundtrip_class(&c.to_exact().map_err(e)?, &opts, 1e-6).map_err(e)?;
    ensure(rep.linear_rel_err < 1e-6, || format!("linear rel err {:.2e}", rep.linear_rel_err))?;
    ensure(rep.same_class, || "extracted class differs".into())?;

    let arrow = |c: &[i64]| {
        let mut v = vec![zero()];
        v.extend(c.iter().map(|&x| rat(x, 2)));
        GroupoidArrow::univariate(zero(), 4, v).unwrap()
    };
    let exact = ExactCocycle::new(cover.clone(), vec![arrow(&[3, 1]), arrow(&[2, 0, 1]), arrow(&[5, -1, 0, 1])]).map_err(e)?;
    let d: Vec<HolonomyJet> = [[1.5, 0.25, 0.0, 0.0], [1.0, -0.5, 0.125, 0.0], [0.75, 0.0, 0.0, 0.5]]
        .iter()
        .map(|r| HolonomyJet::new(vec![0.0, r[0], r[1], r[2], r[3]], vec![0.0; 5]).unwrap())
        .collect();
    let moved = exact.to_float().coboundary(&d).map_err(e)?.to_exact().map_err(e)?;
    let r1 = roundtrip_class(&exact, &opts, 1e-6).map_err(e)?;
    let r2 = roundtrip_class(&moved, &opts, 1e-6).map_err(e)?;
    ensure(r1.linear_rel_err < 1e-6 && r2.linear_rel_err < 1e-6, || "coboundary roundtrip linear error".into())?;
    ensure(same_class(&r1.input_class, &r2.input_class, 1e-6), || "coboundary-equivalent inputs differ in class".into())?;
    ensure(same_class(&r1.extracted_class, &r2.extracted_class, 1e-6), || "reconstructed classes differ".into())?;
    Ok(format!(
        "linear rel err {:.1e}; coboundary pair shares class {:?}",
        rep.linear_rel_err, r1.input_class.kind
    ))
}

fn concordance() -> Outcome {
    let chart = Chart::cylinder();
    let mut r = sample::rng(12);
    let n = 6;
    let a = cylinder(n);
    let zero_src = vec![RationalField::zero()];
    for i in 0..3 {
        let y = sample::section(&mut r, &chart, zero_src.clone(), &zero_src, n);
        let c = concord_from_gauge(&a, &y, &chart).map_err(e)?;
        ensure(curvature(c.cord().form()).map_err(e)?.is_zero(), || format!("concord not flat on instance {i}"))?;
        ensure(c.restrict(&int(0)).map_err(e)?.agrees_with(a.form()), || format!("A_0 ≠ A on instance {i}"))?;
        ensure(c.restrict(&int(1)).map_err(e)? == gauge(&y, a.form()).map_err(e)?, || format!("A_1 ≠ Y⋆A on instance {i}"))?;
        ensure(c.split_defect().map_err(e)?.is_zero(), || format!("∂_sA_s ≠ ∇_(A_s)B_s on instance {i}"))?;
    }
    Ok(format!("3 random sections, N = {n}: flat, exact endpoints, decomposition identity"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("groupoid laws", groupoid_laws),
        ("gauge covariance", gauge_covariance),
        ("gauge group law", gauge_group_law),
        ("GV construction", gv_construction),
        ("stabilizer triviality", stabilizer),
        ("MC elements", mc_elements),
        ("holonomy", holonomy),
        ("twisted complex", twisted_complex),
        ("Bott H0", bott_h0),
        ("GV integral", gv_integral),
        ("Cech roundtrip", cech_roundtrip),
        ("concordance", concordance),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let out = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match out {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} ({secs:.2}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} ({secs:.2}s)", i + 1)
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
