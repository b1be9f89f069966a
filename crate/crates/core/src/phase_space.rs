//! Displacement-operator algebra and characteristic functions of the
//! analytic oscillator states.

use alloc::vec::Vec;
use core::ops::Mul;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Dimensionless coherent amplitude or displacement argument.
pub type ComplexAmp = Complex64;

/// Tolerance on the norm of a cat superposition.
pub const CAT_NORM_TOL: f64 = 1e-10;

/// One term `weight * |amp>` of a coherent-state superposition.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CatComponent {
    pub weight: Complex64,
    pub amp: ComplexAmp,
}

impl CatComponent {
    pub fn new(weight: Complex64, amp: ComplexAmp) -> Self {
        Self { weight, amp }
    }
}

/// Oscillator states with closed-form characteristic functions.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "kind", rename_all = "snake_case")
)]
pub enum OscillatorState {
    Ground,
    Coherent { amp: ComplexAmp },
    Thermal { nbar: f64 },
    Cat { components: Vec<CatComponent> },
}

impl OscillatorState {
    pub fn coherent(amp: ComplexAmp) -> Self {
        OscillatorState::Coherent { amp }
    }

    pub fn thermal(nbar: f64) -> Result<Self> {
        let s = OscillatorState::Thermal { nbar };
        s.validate()?;
        Ok(s)
    }

    /// Builds a cat state, rescaling the weights to unit norm.
    pub fn cat_normalized(mut components: Vec<CatComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::arg("cat state needs at least one component"));
        }
        if components
            .iter()
            .any(|c| !finite_c(c.weight) || !finite_c(c.amp))
        {
            return Err(Error::arg("cat component is not finite"));
        }
        let n = superposition_norm_sqr(&components);
        if !n.is_finite() || n <= 0.0 {
            return Err(Error::arg("cat superposition has zero norm"));
        }
        let s = 1.0 / n.sqrt();
        for c in &mut components {
            c.weight *= s;
        }
        Ok(OscillatorState::Cat { components })
    }

    /// Checks the state invariants.
    pub fn validate(&self) -> Result<()> {
        match self {
            OscillatorState::Ground => Ok(()),
            OscillatorState::Coherent { amp } => {
                if finite_c(*amp) {
                    Ok(())
                } else {
                    Err(Error::arg("coherent amplitude is not finite"))
                }
            }
            OscillatorState::Thermal { nbar } => {
                if nbar.is_finite() && *nbar >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::arg("thermal occupation must be finite and >= 0"))
                }
            }
            OscillatorState::Cat { components } => {
                if components.is_empty() {
                    return Err(Error::arg("cat state needs at least one component"));
                }
                if components
                    .iter()
                    .any(|c| !finite_c(c.weight) || !finite_c(c.amp))
                {
                    return Err(Error::arg("cat component is not finite"));
                }
                let n = superposition_norm_sqr(components);
                if (n - 1.0).abs() > CAT_NORM_TOL {
                    return Err(Error::arg("cat state is not normalized"));
                }
                Ok(())
            }
        }
    }

    /// Pure states as coherent superpositions; `None` for thermal states.
    pub fn components(&self) -> Option<Vec<CatComponent>> {
        let one = Complex64::new(1.0, 0.0);
        match self {
            OscillatorState::Ground => Some(alloc::vec![CatComponent::new(
                one,
                Complex64::new(0.0, 0.0)
            )]),
            OscillatorState::Coherent { amp } => Some(alloc::vec![CatComponent::new(one, *amp)]),
            OscillatorState::Thermal { .. } => None,
            OscillatorState::Cat { components } => Some(components.clone()),
        }
    }

    /// Characteristic function `<D(beta)>` without validating the state.
    pub fn characteristic(&self, beta: ComplexAmp) -> Complex64 {
        match self {
            OscillatorState::Ground => Complex64::new((-0.5 * beta.norm_sqr()).exp(), 0.0),
            OscillatorState::Thermal { nbar } => {
                Complex64::new((-0.5 * beta.norm_sqr() * (2.0 * nbar + 1.0)).exp(), 0.0)
            }
            OscillatorState::Coherent { amp } => {
                let a = beta * amp.conj() - beta.conj() * amp;
                (Complex64::new(-0.5 * beta.norm_sqr(), 0.0) + a).exp()
            }
            OscillatorState::Cat { components } => {
                let mut acc = Complex64::new(0.0, 0.0);
                for cj in components {
                    let shifted = beta + cj.amp;
                    let ph = Complex64::from_polar(1.0, (beta * cj.amp.conj()).im);
                    for ck in components {
                        acc +=
                            ck.weight.conj() * cj.weight * ph * coherent_overlap(ck.amp, shifted);
                    }
                }
                acc
            }
        }
    }
}

/// `sum_jk w_k* w_j <a_k|a_j>`.
pub fn superposition_norm_sqr(components: &[CatComponent]) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for cj in components {
        for ck in components {
            acc += ck.weight.conj() * cj.weight * coherent_overlap(ck.amp, cj.amp);
        }
    }
    acc.re
}

/// `<a|b>` for coherent states.
pub fn coherent_overlap(a: ComplexAmp, b: ComplexAmp) -> Complex64 {
    (Complex64::new(-0.5 * (a.norm_sqr() + b.norm_sqr()), 0.0) + a.conj() * b).exp()
}

/// A product of displacements `exp(i accumulated_phase) D(total_amp)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisplacementProduct {
    pub total_amp: ComplexAmp,
    pub accumulated_phase: f64,
}

impl DisplacementProduct {
    pub const IDENTITY: Self = Self {
        total_amp: Complex64 { re: 0.0, im: 0.0 },
        accumulated_phase: 0.0,
    };

    pub fn single(amp: ComplexAmp) -> Self {
        Self {
            total_amp: amp,
            accumulated_phase: 0.0,
        }
    }

    /// `D(amp) * self`.
    pub fn then(self, amp: ComplexAmp) -> Self {
        Self::single(amp) * self
    }
}

/// Operator product `lhs * rhs` using `D(a)D(b) = exp(i Im(a b*)) D(a + b)`.
impl Mul for DisplacementProduct {
    type Output = DisplacementProduct;

    fn mul(self, rhs: Self) -> Self {
        Self {
            total_amp: self.total_amp + rhs.total_amp,
            accumulated_phase: self.accumulated_phase
                + rhs.accumulated_phase
                + (self.total_amp * rhs.total_amp.conj()).im,
        }
    }
}

/// Composes `D(list[k-1]) ... D(list[1]) D(list[0])`, the first entry acting first.
pub fn compose_displacements(list: &[ComplexAmp]) -> Result<DisplacementProduct> {
    if list.is_empty() {
        return Err(Error::arg("cannot compose an empty list of displacements"));
    }
    Ok(list
        .iter()
        .fold(DisplacementProduct::IDENTITY, |acc, &a| acc.then(a)))
}

/// `<D(alpha)>` in a validated state.
pub fn expect_displacement(state: &OscillatorState, alpha: ComplexAmp) -> Result<Complex64> {
    state.validate()?;
    Ok(state.characteristic(alpha))
}

/// `Re(exp(i phi) <D(alpha)>)`, the mean of the modular variable `Q(phi, alpha)`.
pub fn modular_variable_expectation(
    state: &OscillatorState,
    phi: f64,
    alpha: ComplexAmp,
) -> Result<f64> {
    let chi = expect_displacement(state, alpha)?;
    Ok((Complex64::from_polar(1.0, phi) * chi).re)
}

pub(crate) fn finite_c(z: Complex64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}
