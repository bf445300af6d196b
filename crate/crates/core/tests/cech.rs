use std::f64::consts::TAU;

use qcord_core::calculus::{Form, RationalField, ScalarField};
use qcord_core::cech::{classify, extract_cocycle, reconstruct_cord, roundtrip_class, same_class, Cover, ExactCocycle, SmoothCircleCord};
use qcord_core::cord::{gauge, is_impotent, GaugeSection, JetForm};
use qcord_core::holonomy::{invert, section_at, HolonomyJet, TransportOptions};
use qcord_core::jet::GroupoidArrow;
use qcord_core::rational::{int, rat, to_f64, zero};

fn wavy_cord(order: u32) -> JetForm {
    let a1 = Form::one_form(0, ScalarField::cos(&[(0, 1)]).add(&ScalarField::constant(rat(1, 5))));
    let a2 = Form::one_form(0, ScalarField::sin(&[(0, 2)]).scale(&rat(1, 2)));
    JetForm::univariate(1, order, vec![Form::zero(), a1, a2]).unwrap()
}

#[test]
fn gauge_equivalent_cords_give_cohomologous_cocycles() {
    let cover = Cover::uniform(3, rat(1, 10)).unwrap();
    let opts = TransportOptions::default();
    let a = wavy_cord(5);
    let y = GaugeSection::univariate(
        5,
        vec![
            RationalField::zero(),
            ScalarField::constant(int(2)).add(&ScalarField::sin(&[(0, 1)])).into(),
            ScalarField::cos(&[(0, 1)]).scale(&rat(1, 3)).into(),
        ],
    )
    .unwrap();
    let b = gauge(&y, &a).unwrap();
    let ca = extract_cocycle(&SmoothCircleCord::new(a.truncate(4)), &cover, &opts, 1e-6).unwrap();
    let cb = extract_cocycle(&SmoothCircleCord::new(b), &cover, &opts, 1e-6).unwrap();
    // c^B_{αβ} = d_α ∘ c^A_{αβ} ∘ d_β⁻¹ with d_α = Y(anchor α)⁻¹
    let d: Vec<HolonomyJet> = (0..cover.len())
        .map(|i| {
            let theta = TAU * to_f64(&cover.anchor(i));
            let y4 = section_at(&y.truncate(4), &[theta]).unwrap();
            invert(&y4).unwrap()
        })
        .collect();
    assert!(ca.coboundary(&d).unwrap().residual(&cb) < 1e-6);
    let (ka, kb) = (classify(&ca.full_loop().unwrap(), 1e-6).unwrap(), classify(&cb.full_loop().unwrap(), 1e-6).unwrap());
    assert!(same_class(&ka, &kb, 1e-6));
}

#[test]
fn exponential_cord_roundtrip() {
    let cover = Cover::uniform(3, rat(1, 12)).unwrap();
    let opts = TransportOptions::default();
    let a = JetForm::univariate(1, 3, vec![Form::zero(), Form::basis(0)]).unwrap();
    let c = extract_cocycle(&SmoothCircleCord::new(a), &cover, &opts, 1e-6).unwrap();
    let rep = roundtrip_class(&c.to_exact().unwrap(), &opts, 1e-6).unwrap();
    let e = TAU.exp();
    assert!((rep.monodromy.linear() - e).abs() / e < 1e-6);
    assert!(rep.linear_rel_err < 1e-6);
    assert!(rep.same_class);
}

#[test]
fn coboundary_equivalent_inputs_share_a_class() {
    let cover = Cover::uniform(4, rat(1, 16)).unwrap();
    let opts = TransportOptions::default();
    let arrow = |c: &[i64]| {
        let mut v = vec![zero()];
        v.extend(c.iter().map(|&x| rat(x, 2)));
        GroupoidArrow::univariate(zero(), 4, v).unwrap()
    };
    let c = ExactCocycle::new(cover.clone(), vec![arrow(&[3, 1]), arrow(&[2, 0, 1]), arrow(&[2]), arrow(&[5, -1, 0, 1])]).unwrap();
    let d: Vec<HolonomyJet> = [[1.5, 0.25, 0.0, 0.0], [1.0, -0.5, 0.125, 0.0], [0.75, 0.0, 0.0, 0.5], [2.0, 1.0, 0.0, 0.0]]
        .iter()
        .map(|r| HolonomyJet::new(vec![0.0, r[0], r[1], r[2], r[3]], vec![0.0; 5]).unwrap())
        .collect();
    let moved = c.to_float().coboundary(&d).unwrap().to_exact().unwrap();
    let r1 = roundtrip_class(&c, &opts, 1e-6).unwrap();
    let r2 = roundtrip_class(&moved, &opts, 1e-6).unwrap();
    assert!(r1.same_class && r2.same_class);
    assert!(same_class(&r1.input_class, &r2.input_class, 1e-6));
    assert!(r1.quadratic_rel_err < 1e-5 && r2.quadratic_rel_err < 1e-5);
}

#[test]
fn reconstruction_is_impotent_and_local() {
    let cover = Cover::uniform(3, rat(1, 12)).unwrap();
    let id = GroupoidArrow::identity(vec![zero()], 3);
    let g = GroupoidArrow::univariate(zero(), 3, vec![zero(), int(2), int(1)]).unwrap();
    let cord = reconstruct_cord(&ExactCocycle::new(cover, vec![g, id.clone(), id]).unwrap()).unwrap();
    assert!(cord.pieces().iter().all(|p| is_impotent(p.cord.form())));
    // only the overlap carrying the nontrivial arrow has a nonzero piece
    let nonzero: Vec<bool> = cord.pieces().iter().map(|p| !p.cord.form().is_zero()).collect();
    assert_eq!(nonzero, vec![true, false, false]);
}
