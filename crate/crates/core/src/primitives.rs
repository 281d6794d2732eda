//! Atomic motion primitives for one double-integrator output on the canonical
//! box `[0, d]`.
//!
//! Each primitive is an affine state feedback `u = K x + g` on the local
//! position/velocity pair `x = (ξ, ν)`, together with the polytope on which it
//! is meant to run:
//!
//! * Hold drives the output to the box center and never leaves the box.
//! * Forward cruises towards `ξ = d` at speed `v*/2` and exits through it.
//! * Backward is the mirror image of Forward.

use std::fmt;

use crate::error::{Error, Result};
use crate::workspace::Sign;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AtomicTag {
    Hold,
    Forward,
    Backward,
}

impl AtomicTag {
    pub const ALL: [AtomicTag; 3] = [AtomicTag::Hold, AtomicTag::Forward, AtomicTag::Backward];

    pub fn code(self) -> u32 {
        self as u32
    }

    pub fn from_code(code: u32) -> AtomicTag {
        AtomicTag::ALL[code as usize]
    }

    pub fn symbol(self) -> char {
        match self {
            AtomicTag::Hold => 'H',
            AtomicTag::Forward => 'F',
            AtomicTag::Backward => 'B',
        }
    }

    pub fn from_symbol(c: char) -> Option<AtomicTag> {
        match c {
            'H' => Some(AtomicTag::Hold),
            'F' => Some(AtomicTag::Forward),
            'B' => Some(AtomicTag::Backward),
            _ => None,
        }
    }

    /// Face this primitive is designed to exit through, if any.
    pub fn exit_sign(self) -> Option<Sign> {
        match self {
            AtomicTag::Hold => None,
            AtomicTag::Forward => Some(Sign::Plus),
            AtomicTag::Backward => Some(Sign::Minus),
        }
    }
}

impl fmt::Display for AtomicTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Box length, actuation bound and the derived speed and gains of one output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomicParams {
    pub d: f64,
    pub u_star: f64,
    pub v_star: f64,
    pub k1: f64,
    pub k2: f64,
}

impl AtomicParams {
    pub fn new(d: f64, u_star: f64) -> Result<AtomicParams> {
        if !(d.is_finite() && d > 0.0 && u_star.is_finite() && u_star > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "box length and u* must be positive (d = {d}, u* = {u_star})"
            )));
        }
        let v_star = (d * u_star).sqrt();
        Ok(AtomicParams {
            d,
            u_star,
            v_star,
            k1: -2.0 * u_star / d,
            k2: -2.0 * u_star / v_star,
        })
    }

    /// Time constant `sqrt(d / u*)`.
    pub fn tau(&self) -> f64 {
        (self.d / self.u_star).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomicPrimitive {
    pub tag: AtomicTag,
    pub gain: [f64; 2],
    pub offset: f64,
}

impl AtomicPrimitive {
    pub fn new(tag: AtomicTag, params: &AtomicParams) -> AtomicPrimitive {
        let (gain, offset) = match tag {
            AtomicTag::Hold => ([params.k1, params.k2], params.u_star),
            AtomicTag::Forward => ([0.0, params.k2], params.u_star),
            AtomicTag::Backward => ([0.0, params.k2], -params.u_star),
        };
        AtomicPrimitive { tag, gain, offset }
    }

    /// Commanded acceleration at local state `(xi, nu)`. Not saturated.
    pub fn control(&self, xi: f64, nu: f64) -> f64 {
        self.gain[0] * xi + self.gain[1] * nu + self.offset
    }

    /// Closed loop `ẋ = A x + b` of the double integrator under this law.
    pub fn closed_loop(&self) -> ([[f64; 2]; 2], [f64; 2]) {
        ([[0.0, 1.0], [self.gain[0], self.gain[1]]], [0.0, self.offset])
    }
}

pub fn control(primitive: &AtomicPrimitive, x: (f64, f64)) -> f64 {
    primitive.control(x.0, x.1)
}

/// Eigenvalues `(re, im)` of the Hold closed loop. The characteristic
/// polynomial is `s² - k2 s - k1`.
pub fn hold_eigenvalues(params: &AtomicParams) -> [(f64, f64); 2] {
    let b = -params.k2;
    let c = -params.k1;
    let disc = b * b - 4.0 * c;
    if disc < 0.0 {
        let re = -b / 2.0;
        let im = (-disc).sqrt() / 2.0;
        [(re, im), (re, -im)]
    } else {
        let r = disc.sqrt();
        [((-b + r) / 2.0, 0.0), ((-b - r) / 2.0, 0.0)]
    }
}

/// `a · (ξ/d, ν/v*) <= b` in normalized coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Halfspace {
    pub a: [f64; 2],
    pub b: f64,
}

/// Convex polytope in local `(ξ, ν)` coordinates, stored normalized by
/// `(d, v*)` so membership tolerances are scale-free.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantRegion {
    pub tag: AtomicTag,
    params: AtomicParams,
    halfspaces: Vec<Halfspace>,
    vertices: Vec<[f64; 2]>,
}

impl InvariantRegion {
    pub fn new(tag: AtomicTag, params: &AtomicParams) -> InvariantRegion {
        let hs = |a0: f64, a1: f64, b: f64| Halfspace { a: [a0, a1], b };
        let (halfspaces, vertices) = match tag {
            AtomicTag::Forward => (
                vec![hs(-1.0, 0.0, 0.0), hs(1.0, 0.0, 1.0), hs(0.0, -1.0, 0.0), hs(0.0, 1.0, 1.0)],
                vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            ),
            AtomicTag::Backward => (
                vec![hs(-1.0, 0.0, 0.0), hs(1.0, 0.0, 1.0), hs(0.0, -1.0, 1.0), hs(0.0, 1.0, 0.0)],
                vec![[0.0, -1.0], [1.0, -1.0], [1.0, 0.0], [0.0, 0.0]],
            ),
            AtomicTag::Hold => (
                vec![
                    hs(-1.0, 0.0, 0.0),
                    hs(1.0, 0.0, 1.0),
                    hs(0.0, 1.0, 1.0),
                    hs(0.0, -1.0, 1.0),
                    // ν <= 2 (1 - ξ)
                    hs(2.0, 1.0, 2.0),
                    // ν >= -2 ξ
                    hs(-2.0, -1.0, 0.0),
                ],
                vec![[0.0, 0.0], [0.0, 1.0], [0.5, 1.0], [1.0, 0.0], [1.0, -1.0], [0.5, -1.0]],
            ),
        };
        InvariantRegion {
            tag,
            params: *params,
            halfspaces,
            vertices,
        }
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    /// Polytope vertices in physical `(ξ, ν)` units.
    pub fn vertices(&self) -> Vec<[f64; 2]> {
        self.vertices
            .iter()
            .map(|v| [v[0] * self.params.d, v[1] * self.params.v_star])
            .collect()
    }

    pub fn contains(&self, x: (f64, f64), eps: f64) -> bool {
        let z = [x.0 / self.params.d, x.1 / self.params.v_star];
        self.halfspaces
            .iter()
            .all(|h| h.a[0] * z[0] + h.a[1] * z[1] <= h.b + eps)
    }
}

pub fn in_invariant(tag: AtomicTag, params: &AtomicParams, x: (f64, f64), eps: f64) -> bool {
    InvariantRegion::new(tag, params).contains(x, eps)
}

/// Atomic face outcomes a primitive can produce. `Zero` means "has not
/// crossed yet" and only matters when primitives are composed.
pub fn exit_contract(tag: AtomicTag) -> &'static [Sign] {
    match tag {
        AtomicTag::Hold => &[Sign::Zero],
        AtomicTag::Forward => &[Sign::Zero, Sign::Plus],
        AtomicTag::Backward => &[Sign::Zero, Sign::Minus],
    }
}
