//! Maps between charts given by component functions, and pullback along them.

use crate::calculus::chart::{Chart, CoordKind};
use crate::calculus::form::Form;
use crate::calculus::rational_field::RationalField;
use crate::calculus::scalar::{Harmonic, ScalarField};
use crate::error::{Error, Result};

/// Image of one target coordinate.
#[derive(Clone, Debug, PartialEq)]
pub enum CoordImage {
    /// integer combination of source coordinates (winding into an angle)
    Angle(Vec<(u8, i64)>),
    /// a coefficient-ring function of the source coordinates
    Expr(ScalarField),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChartMap {
    source: Chart,
    target: Chart,
    images: Vec<CoordImage>,
}

impl ChartMap {
    pub fn new(source: Chart, target: Chart, images: Vec<CoordImage>) -> Result<Self> {
        if images.len() != target.dim() {
            return Err(Error::Structural(format!(
                "map needs {} component functions, got {}",
                target.dim(),
                images.len()
            )));
        }
        for (i, img) in images.iter().enumerate() {
            let label = target.label(i);
            match (target.kind(i), img) {
                (CoordKind::Periodic | CoordKind::Unwrapped, CoordImage::Expr(_)) => {
                    return Err(Error::UnsupportedMap(format!(
                        "periodic coordinate {label} must be an integer combination of source angles"
                    )));
                }
                (kind, CoordImage::Angle(comb)) => {
                    for &(j, _) in comb {
                        let j = j as usize;
                        if j >= source.dim() {
                            return Err(Error::Structural(format!("source coordinate {j} out of range")));
                        }
                        if kind != CoordKind::Real && !source.allows_harmonic(j) {
                            return Err(Error::UnsupportedMap(format!(
                                "{label} winds along non-periodic source coordinate {}",
                                source.label(j)
                            )));
                        }
                        if kind != CoordKind::Periodic && !source.allows_monomial(j) {
                            return Err(Error::UnsupportedMap(format!(
                                "{label} would be a polynomial in periodic coordinate {}",
                                source.label(j)
                            )));
                        }
                    }
                }
                (CoordKind::Real, CoordImage::Expr(e)) => e.validate(&source)?,
            }
        }
        Ok(ChartMap { source, target, images })
    }

    pub fn identity(chart: &Chart) -> Self {
        let images = (0..chart.dim())
            .map(|i| match chart.kind(i) {
                CoordKind::Real => CoordImage::Expr(ScalarField::coord(i as u8)),
                _ => CoordImage::Angle(vec![(i as u8, 1)]),
            })
            .collect();
        ChartMap { source: chart.clone(), target: chart.clone(), images }
    }

    pub fn source(&self) -> &Chart {
        &self.source
    }

    pub fn target(&self) -> &Chart {
        &self.target
    }

    pub fn images(&self) -> &[CoordImage] {
        &self.images
    }

    fn poly_image(&self, i: usize) -> ScalarField {
        match &self.images[i] {
            CoordImage::Expr(e) => e.clone(),
            CoordImage::Angle(comb) => comb.iter().fold(ScalarField::zero(), |acc, &(j, w)| {
                acc.add(&ScalarField::coord(j).scale(&crate::rational::int(w)))
            }),
        }
    }

    pub fn pull_scalar(&self, f: &ScalarField) -> Result<ScalarField> {
        let mut out = ScalarField::zero();
        for (k, c) in f.terms() {
            let mut term = ScalarField::constant(c.clone());
            for &(i, e) in &k.mono {
                term = term.mul(&self.poly_image(i as usize).pow(e));
            }
            if k.kind != Harmonic::One {
                let mut freq: Vec<(u8, i64)> = Vec::new();
                for &(i, fr) in &k.freq {
                    let CoordImage::Angle(comb) = &self.images[i as usize] else {
                        return Err(Error::UnsupportedMap("harmonic of a non-angle image".into()));
                    };
                    for &(j, w) in comb {
                        freq.push((j, fr * w));
                    }
                }
                term = term.mul(&ScalarField::harmonic(crate::rational::one(), k.kind, &freq));
            }
            out = out.add(&term);
        }
        Ok(out)
    }

    pub fn pull_field(&self, f: &RationalField) -> Result<RationalField> {
        f.map_ring(|s| self.pull_scalar(s))
    }

    fn pull_basis(&self, i: usize) -> Form {
        match &self.images[i] {
            CoordImage::Angle(comb) => comb.iter().fold(Form::zero(), |acc, &(j, w)| {
                acc.add(&Form::basis(j as usize).scale(&crate::rational::int(w)))
            }),
            CoordImage::Expr(e) => Form::scalar(e.clone()).d(),
        }
    }

    pub fn pull_form(&self, w: &Form) -> Result<Form> {
        let mut out = Form::zero();
        for (m, f) in w.components() {
            let mut piece = Form::scalar(self.pull_field(f)?);
            for i in 0..self.target.dim() {
                if m & (1 << i) != 0 {
                    piece = piece.wedge(&self.pull_basis(i));
                }
            }
            out = out.add(&piece);
        }
        Ok(out)
    }
}
