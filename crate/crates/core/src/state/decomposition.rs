//! Three-mode decomposition of an output mode:
//! `a_v = A a_u + B a_u† + C a_k + D a_k† + E a_s`.

use serde::Serialize;

use crate::bogoliubov::{pullback_output_mode, BogoliubovKernels};
use crate::mode::{inner_product, orthogonal_complement, ModeFunction};
use crate::{Error, Result, C64};

#[derive(Clone, Debug)]
pub struct OutputDecomposition {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
    pub e: C64,
    pub zeta: f64,
    pub xi: f64,
    /// `⟨f, u⟩`
    pub overlap_fu: C64,
    /// `⟨u, g⟩`
    pub overlap_ug: C64,
    /// `⟨h, k⟩`
    pub overlap_hk: C64,
    pub f: ModeFunction,
    pub g: Option<ModeFunction>,
    pub h: Option<ModeFunction>,
    pub k: Option<ModeFunction>,
    pub s: Option<ModeFunction>,
}

/// Coefficients only, for reports.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CoefficientRow {
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub c: [f64; 2],
    pub d: [f64; 2],
    pub e: [f64; 2],
    pub zeta: f64,
    pub xi: f64,
}

impl OutputDecomposition {
    /// Decomposition with only the listed coefficients; modes are left absent.
    pub fn from_coefficients(grid_mode: &ModeFunction, coefficients: [C64; 5]) -> Self {
        let [a, b, c, d, e] = coefficients;
        let zeta = (a.norm_sqr() + c.norm_sqr() + e.norm_sqr()).sqrt();
        let xi = (b.norm_sqr() + d.norm_sqr()).sqrt();
        Self {
            a,
            b,
            c,
            d,
            e,
            zeta,
            xi,
            overlap_fu: if zeta > 0.0 { a / zeta } else { C64::new(0.0, 0.0) },
            overlap_ug: if xi > 0.0 { b / xi } else { C64::new(0.0, 0.0) },
            overlap_hk: C64::new(0.0, 0.0),
            f: grid_mode.clone(),
            g: None,
            h: None,
            k: None,
            s: None,
        }
    }

    pub fn coefficients(&self) -> [C64; 5] {
        [self.a, self.b, self.c, self.d, self.e]
    }

    /// `|A|² − |B|² + |C|² − |D|² + |E|² − 1`
    pub fn commutator_defect(&self) -> f64 {
        self.a.norm_sqr() - self.b.norm_sqr() + self.c.norm_sqr() - self.d.norm_sqr() + self.e.norm_sqr() - 1.0
    }

    pub fn row(&self) -> CoefficientRow {
        let p = |z: C64| [z.re, z.im];
        CoefficientRow {
            a: p(self.a),
            b: p(self.b),
            c: p(self.c),
            d: p(self.d),
            e: p(self.e),
            zeta: self.zeta,
            xi: self.xi,
        }
    }

    /// `⟨a_v† a_v⟩` for input moments `n = ⟨a_u† a_u⟩`, `m = ⟨a_u a_u⟩`.
    pub fn mean_photon_number(&self, n: f64, m: C64) -> f64 {
        self.a.norm_sqr() * n + self.b.norm_sqr() * (n + 1.0) + 2.0 * (self.a * self.b.conj() * m).re
            + self.d.norm_sqr()
    }
}

pub fn decompose_output_mode(
    k: &BogoliubovKernels,
    u: &ModeFunction,
    v: &ModeFunction,
) -> Result<OutputDecomposition> {
    let (u, _) = u.normalize()?;
    let (v, _) = v.normalize()?;
    let p = pullback_output_mode(k, &v)?;
    let overlap_fu = inner_product(&p.f, &u)?;
    let h_part = orthogonal_complement(&p.f, &[&u])?;
    let sf = h_part.residual_norm();
    let h = h_part.into_mode();

    let (overlap_ug, k_mode, sg) = match &p.g {
        Some(g) => {
            let c = orthogonal_complement(g, &[&u])?;
            let r = c.residual_norm();
            (inner_product(&u, g)?, c.into_mode(), r)
        }
        None => (C64::new(0.0, 0.0), None, 0.0),
    };

    let (overlap_hk, s, sh) = match (&h, &k_mode) {
        (Some(h), Some(km)) => {
            let c = orthogonal_complement(h, &[&u, km])?;
            let r = c.residual_norm();
            (inner_product(h, km)?, c.into_mode(), r)
        }
        (Some(h), None) => (C64::new(0.0, 0.0), Some(h.clone()), 1.0),
        (None, _) => (C64::new(0.0, 0.0), None, 0.0),
    };

    let a = overlap_fu * p.zeta;
    let b = overlap_ug * p.xi;
    let c = if h.is_some() && k_mode.is_some() { overlap_hk * (p.zeta * sf) } else { C64::new(0.0, 0.0) };
    let d = C64::new(if k_mode.is_some() { p.xi * sg } else { 0.0 }, 0.0);
    let e = C64::new(if s.is_some() { p.zeta * sf * sh } else { 0.0 }, 0.0);
    let out = OutputDecomposition {
        a,
        b,
        c,
        d,
        e,
        zeta: p.zeta,
        xi: p.xi,
        overlap_fu,
        overlap_ug,
        overlap_hk,
        f: p.f,
        g: p.g,
        h,
        k: k_mode,
        s,
    };
    let defect = out.commutator_defect();
    if defect.abs() > 1e-6 * (1.0 + p.zeta * p.zeta) {
        return Err(Error::TheoryViolation(format!("commutator defect {defect:.3e} in output decomposition")));
    }
    Ok(out)
}

/// Rephase `v` so that `A` is real and non-negative; returns the rephased mode.
pub fn gauge_output_mode(k: &BogoliubovKernels, u: &ModeFunction, v: &ModeFunction) -> Result<ModeFunction> {
    let d = decompose_output_mode(k, u, v)?;
    if d.a.norm() == 0.0 {
        return Ok(v.clone());
    }
    // a_{e^{iφ}v} = e^{−iφ} a_v
    Ok(v.scale(C64::from_polar(1.0, d.a.arg())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bogoliubov::{identity_kernels, ideal_squeezer_kernels};
    use crate::devices::{build_opo, GaussianPump, OpoParams};
    use crate::grid::TemporalGrid;

    fn grid() -> TemporalGrid {
        TemporalGrid::new(-10.0, 30.0, 256).unwrap()
    }

    #[test]
    fn identity_case() {
        let u = ModeFunction::gaussian(grid(), 0.0, 1.0).unwrap();
        let d = decompose_output_mode(&identity_kernels(grid()), &u, &u).unwrap();
        assert!((d.a - 1.0).norm() < 1e-12);
        for z in [d.b, d.c, d.d, d.e] {
            assert!(z.norm() < 1e-12);
        }
    }

    #[test]
    fn squeezer_case() {
        let u = ModeFunction::gaussian(grid(), 0.0, 1.0).unwrap();
        let r = 0.8f64;
        let k = ideal_squeezer_kernels(grid(), &u, r).unwrap();
        let d = decompose_output_mode(&k, &u, &u).unwrap();
        assert!((d.a - r.cosh()).norm() < 1e-10);
        assert!((d.b - r.sinh()).norm() < 1e-10);
        for z in [d.c, d.d, d.e] {
            assert!(z.norm() < 1e-6);
        }
    }

    #[test]
    fn opo_commutator_and_gauge() {
        let p = OpoParams { detuning: 0.3, decay: 1.0, pump: GaussianPump::new(1.5, 0.0, 0.5) };
        let k = build_opo(&p, &grid()).unwrap();
        let u = ModeFunction::gaussian(grid(), 0.0, 1.0).unwrap();
        let v = ModeFunction::gaussian(grid(), 1.0, 1.3).unwrap().scale(C64::from_polar(1.0, 2.0));
        let d = decompose_output_mode(&k, &u, &v).unwrap();
        assert!(d.commutator_defect().abs() < 1e-10);
        assert!(d.c.norm() > 1e-3 && d.d.norm() > 1e-3 && d.e.norm() > 1e-3);
        assert!(d.d.im == 0.0 && d.d.re >= 0.0 && d.e.im == 0.0 && d.e.re >= 0.0);
        let vg = gauge_output_mode(&k, &u, &v).unwrap();
        let dg = decompose_output_mode(&k, &u, &vg).unwrap();
        assert!(dg.a.im.abs() < 1e-12 && dg.a.re > 0.0);
        assert!((dg.a.norm() - d.a.norm()).abs() < 1e-12);
    }
}
