use std::f64::consts::TAU;

use qcord_core::calculus::{Chart, ChartMap, CoordImage, Form, Loop, RationalField, ScalarField, VectorField};
use qcord_core::cord::{gauge, gv_cord, is_impotent, GaugeSection, JetForm};
use qcord_core::holonomy::{conjugation_check, monodromy_word, section_at, transport, Orientation, TransportOptions, Word};
use qcord_core::rational::{int, rat};

fn leaf_cord(order: u32) -> JetForm {
    // a₀ = dy − (y + y²) dx on the cylinder, restricted to the closed leaf y = 0
    let y = ScalarField::coord(1);
    let a0 = Form::basis(1).sub(&Form::one_form(0, y.add(&y.pow(2))));
    let a = gv_cord(&a0, &VectorField::coordinate(2, 1, int(-1)), order).unwrap();
    let leaf = ChartMap::new(
        Chart::circle(),
        Chart::cylinder(),
        vec![CoordImage::Angle(vec![(0, 1)]), CoordImage::Expr(ScalarField::zero())],
    )
    .unwrap();
    a.form().pullback(&leaf).unwrap()
}

#[test]
fn closed_leaf_return_map() {
    let a = leaf_cord(5);
    assert!(is_impotent(&a));
    assert_eq!(a.coeff1(1), Form::basis(0));
    assert_eq!(a.coeff1(2), Form::basis(0).neg());
    let gamma = Loop::generator(&Chart::circle(), 0, &[int(0)]).unwrap();
    let jet = transport(&a, &Chart::circle(), &gamma, &TransportOptions::default()).unwrap();
    // leaves of a₀ solve dy/dx = y + y², so y(2π) = y₀e/(1 − y₀(e − 1)), e = e^{2π};
    // in t = −y the return map is t ↦ e t/(1 + (e − 1)t)
    let e = TAU.exp();
    for m in 1..=5 {
        let want = e * (1.0 - e).powi(m - 1);
        let got = jet.coeff(m as u32);
        assert!((got - want).abs() / want.abs() < 1e-6, "c{m}: {got} vs {want}");
    }
}

#[test]
fn gauge_conjugates_monodromy() {
    let chart = Chart::torus(2);
    let theta = |f: ScalarField| RationalField::from(f);
    let a1 = Form::one_form(0, ScalarField::cos(&[(1, 1)])).add(&Form::basis(1).scale(&rat(1, 3)));
    let a2 = Form::one_form(1, ScalarField::sin(&[(0, 1)]).scale(&rat(1, 2)));
    let a = JetForm::univariate(1, 5, vec![Form::zero(), a1, a2]).unwrap();
    let y = GaugeSection::univariate(
        5,
        vec![
            RationalField::zero(),
            theta(ScalarField::constant(int(2)).add(&ScalarField::cos(&[(0, 1)]))),
            theta(ScalarField::sin(&[(1, 1)])),
            RationalField::constant(rat(1, 4)),
        ],
    )
    .unwrap();
    let b = gauge(&y, &a).unwrap();
    assert!(is_impotent(&b));
    let gens: Vec<Loop> = (0..2).map(|i| Loop::generator(&chart, i, &[int(0), int(0)]).unwrap()).collect();
    let opts = TransportOptions::default();
    let y_x = section_at(&y, &[0.0, 0.0]).unwrap();
    for w in [vec![(0, 1)], vec![(1, 1)], vec![(0, 1), (1, -1)]] {
        let word = Word(w);
        let pa = monodromy_word(&a, &chart, &gens, &word, &opts).unwrap();
        let pb = monodromy_word(&b, &chart, &gens, &word, &opts).unwrap();
        let rep = conjugation_check(&pa, &pb, &y_x, 1e-6).unwrap();
        assert_eq!(rep.passing, Some(Orientation::YFirst), "{rep:?}");
    }
}

#[test]
fn basepoint_mismatch() {
    let chart = Chart::torus(2);
    let a = JetForm::univariate(1, 3, vec![Form::zero(), Form::basis(0)]).unwrap();
    let gens = vec![
        Loop::generator(&chart, 0, &[int(0), int(0)]).unwrap(),
        Loop::generator(&chart, 1, &[int(1), int(0)]).unwrap(),
    ];
    assert!(monodromy_word(&a, &chart, &gens, &Word(vec![(0, 1)]), &TransportOptions::default()).is_err());
}
