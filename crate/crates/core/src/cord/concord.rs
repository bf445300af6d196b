//! Concordance built from a gauge equivalence, on the chart extended by s ∈ [0,1].

use crate::calculus::{Chart, ChartMap, CoordImage, CoordKind, RationalField, SampleDomain, ScalarField};
use crate::cord::gauge::{gauge, GaugeSection};
use crate::cord::jetform::{bracket, JetForm, QuantumCord};
use crate::error::{Error, Result};
use crate::rational::{int, Rational};
use crate::series::Series;

/// h(s) = 3s² − 2s³ in coordinate `s`.
pub fn smoothstep(s: u8) -> ScalarField {
    ScalarField::monomial(int(3), &[(s, 2)]).add(&ScalarField::monomial(int(-2), &[(s, 3)]))
}

#[derive(Clone, Debug)]
pub struct Concord {
    cord: QuantumCord,
    base: Chart,
    chart: Chart,
    s: usize,
}

/// Z(t,x,s) = t + h(s)(Y(t,x) − t) acting on the s-constant extension of A.
/// Y must fix the source of A (s_Y = t_Y = s_A), so that every Z shares it.
pub fn concord_from_gauge(a: &QuantumCord, y: &GaugeSection, chart: &Chart) -> Result<Concord> {
    let form = a.form();
    if y.target() != form.source() {
        return Err(Error::Domain("target of the section differs from the source of the cord".into()));
    }
    if y.source() != form.source() {
        return Err(Error::Domain("the interpolating gauge needs s_Y = s_A".into()));
    }
    let ext = chart.extend_real("s")?;
    let s = chart.dim();
    let h = RationalField::from(smoothstep(s as u8));
    let (k, order) = (y.k(), y.order());
    let comps = (0..k)
        .map(|j| {
            let id = Series::<RationalField>::variable(k, order, j)
                .add(&Series::constant(k, order, form.source()[j].clone()))?;
            let yj = y.components()[j].map(|f| f.as_function().unwrap_or_default());
            let delta = yj.sub(&id)?.map(|f| f.mul(&h));
            id.add(&delta)
        })
        .collect::<Result<Vec<_>>>()?;
    let z = GaugeSection::new(form.source().to_vec(), comps)?;
    let domain = SampleDomain::default().with_range(s, 0.0, 1.0);
    let pos = z.positivity(&ext, &domain);
    if !pos.holds() {
        return Err(Error::Positivity { at: format!("{pos:?}"), detail: "interpolating gauge degenerates".into() });
    }
    let cord = QuantumCord::certify(gauge(&z, form)?)?;
    Ok(Concord { cord, base: chart.clone(), chart: ext, s })
}

impl Concord {
    pub fn cord(&self) -> &QuantumCord {
        &self.cord
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    /// Pull back along x ↦ (x, s₀).
    pub fn restrict(&self, s0: &Rational) -> Result<JetForm> {
        let mut images: Vec<CoordImage> = (0..self.base.dim())
            .map(|i| match self.base.kind(i) {
                CoordKind::Real => CoordImage::Expr(ScalarField::coord(i as u8)),
                _ => CoordImage::Angle(vec![(i as u8, 1)]),
            })
            .collect();
        images.push(CoordImage::Expr(ScalarField::constant(s0.clone())));
        let map = ChartMap::new(self.base.clone(), self.chart.clone(), images)?;
        self.cord.form().pullback(&map)
    }

    /// (A_s, B_s) with A = A_s + B_s ds.
    pub fn split(&self) -> Result<(JetForm, JetForm)> {
        let form = self.cord.form();
        let along = form.map_forms(|w| Ok(w.split_last(self.s).0))?;
        let comps = form.components().iter().map(|c| c.map(|w| w.split_last(self.s).1)).collect();
        let normal = form.with_components(0, comps)?;
        Ok((along, normal))
    }

    /// ∂_s A_s − (d_M B_s + [A_s, B_s]), at order N−2; zero for a flat concord.
    pub fn split_defect(&self) -> Result<JetForm> {
        let (a_s, b_s) = self.split()?;
        let s = self.s as u8;
        let ds_a = a_s.map_forms(|w| w.map_coeffs(|f| Ok(f.partial(s))))?;
        let d_b = b_s.d().map_forms(|w| Ok(w.drop_coordinate(self.s)))?;
        let br = bracket(&a_s, &b_s)?;
        let n = br.order();
        ds_a.truncate(n).sub(&d_b.truncate(n))?.sub(&br)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{Form, VectorField};
    use crate::cord::gv::gv_cord;
    use crate::rational::rat;

    fn cylinder(order: u32) -> QuantumCord {
        let a0 = Form::basis(1).add(&Form::one_form(0, ScalarField::coord(1).mul(&ScalarField::cos(&[(0, 1)]))));
        gv_cord(&a0, &VectorField::coordinate(2, 1, int(-1)), order).unwrap()
    }

    #[test]
    fn identity_gives_constant_extension() {
        let a = cylinder(5);
        let c = concord_from_gauge(&a, &GaugeSection::identity(vec![RationalField::zero()], 5), &Chart::cylinder()).unwrap();
        let (a_s, b_s) = c.split().unwrap();
        assert!(b_s.is_zero());
        assert!(a_s.agrees_with(a.form()));
        assert!(c.split_defect().unwrap().is_zero());
    }

    #[test]
    fn half_scaling_endpoints_and_split() {
        let a = cylinder(7);
        let y = GaugeSection::univariate(7, vec![RationalField::zero(), RationalField::constant(rat(1, 2))]).unwrap();
        let c = concord_from_gauge(&a, &y, &Chart::cylinder()).unwrap();
        assert_eq!(c.cord().flat_through(), 5);
        assert!(c.restrict(&int(0)).unwrap().agrees_with(a.form()));
        assert_eq!(c.restrict(&int(1)).unwrap(), gauge(&y, a.form()).unwrap());
        let (_, b_s) = c.split().unwrap();
        assert!(!b_s.is_zero());
        assert!(c.split_defect().unwrap().is_zero());
    }

    #[test]
    fn moving_section_is_rejected() {
        let a = cylinder(4);
        let y = GaugeSection::translation(vec![RationalField::zero()], 4);
        assert!(concord_from_gauge(&a, &y, &Chart::cylinder()).is_ok());
        let shifted = GaugeSection::identity(vec![RationalField::constant(int(1))], 4);
        assert!(concord_from_gauge(&a, &shifted, &Chart::cylinder()).is_err());
    }
}
