//! Physical parameters, the particle-branch dispersion relation and the
//! branch rule for the momentum outside the well.
//!
//! The well is `V(x) = V0` for `x < 0` and `x > L`, and zero on `[0, L]`.
//! Inside the well the particle carries momentum `p > 0` and energy
//! `E = +sqrt(c^2 p^2 + m^2 c^4)`; outside it carries the momentum `q`
//! solving `(E - V0)^2 = c^2 q^2 + m^2 c^4`.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative width of the band around `|E - V0| = mc^2` treated as degenerate.
pub const DEGENERATE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem {
    pub hbar: f64,
    pub c: f64,
}

impl UnitSystem {
    /// `hbar = c = 1`.
    pub const NATURAL: UnitSystem = UnitSystem { hbar: 1.0, c: 1.0 };

    pub fn new(hbar: f64, c: f64) -> Result<Self> {
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::InvalidParameter(format!("hbar must be positive, got {hbar}")));
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidParameter(format!("c must be positive, got {c}")));
        }
        Ok(Self { hbar, c })
    }
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self::NATURAL
    }
}

/// Square well of depth `depth` (the potential step height V0) and width
/// `width` (L), holding a particle of mass `mass`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WellConfig {
    pub depth: f64,
    pub width: f64,
    pub mass: f64,
}

impl WellConfig {
    pub fn new(depth: f64, width: f64, mass: f64) -> Result<Self> {
        if !(depth.is_finite() && depth >= 0.0) {
            return Err(Error::InvalidParameter(format!("well depth must be >= 0, got {depth}")));
        }
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::InvalidParameter(format!("well width must be > 0, got {width}")));
        }
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::InvalidParameter(format!("mass must be > 0, got {mass}")));
        }
        Ok(Self { depth, width, mass })
    }

    pub fn rest_energy(&self, units: UnitSystem) -> f64 {
        self.mass * units.c * units.c
    }

    pub fn region(&self, x: f64) -> Region {
        if x < 0.0 {
            Region::Left
        } else if x > self.width {
            Region::Right
        } else {
            Region::Inside
        }
    }

    /// `V(x)`; exactly on an edge it takes the midpoint value `V0/2`, so that
    /// a sampled charge density there is the mean of its one-sided limits.
    pub fn potential(&self, x: f64) -> f64 {
        if x == 0.0 || x == self.width {
            return 0.5 * self.depth;
        }
        match self.region(x) {
            Region::Inside => 0.0,
            Region::Left | Region::Right => self.depth,
        }
    }
}

/// The three regions of the well: `x < 0`, `0 <= x <= L`, `x > L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    Left,
    Inside,
    Right,
}

impl Region {
    pub fn index(self) -> usize {
        match self {
            Region::Left => 0,
            Region::Inside => 1,
            Region::Right => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `|E - V0| < mc^2`: q is imaginary and the outside solution decays.
    Bound,
    /// `E - V0 < -mc^2`: the gap is crossed and q is real (Klein tunneling).
    Supercritical,
    /// `E - V0 > mc^2`: the particle is above the outside continuum.
    OpenChannel,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Regime::Bound => "bound",
            Regime::Supercritical => "supercritical",
            Regime::OpenChannel => "open",
        };
        f.write_str(name)
    }
}

/// Positive (particle) branch of the free dispersion relation.
pub fn energy(p: f64, mass: f64, units: UnitSystem) -> f64 {
    let c = units.c;
    let rest = mass * c * c;
    (c * p).hypot(rest)
}

/// Inverse of [`energy`] for `E >= mc^2`.
pub fn momentum_for_energy(e: f64, mass: f64, units: UnitSystem) -> f64 {
    let rest = mass * units.c * units.c;
    ((e - rest) * (e + rest)).max(0.0).sqrt() / units.c
}

/// `(E - V0)^2 - m^2 c^4`, the quantity whose sign separates bound from
/// propagating solutions outside the well.
fn outside_discriminant(e: f64, depth: f64, mass: f64, units: UnitSystem) -> f64 {
    let rest = mass * units.c * units.c;
    let shifted = e - depth;
    (shifted - rest) * (shifted + rest)
}

pub fn classify(e: f64, depth: f64, mass: f64, units: UnitSystem) -> Result<Regime> {
    let rest = mass * units.c * units.c;
    let disc = outside_discriminant(e, depth, mass, units);
    if disc.abs() < DEGENERATE_TOLERANCE * rest * rest {
        return Err(Error::DegenerateChannel { energy: e, depth });
    }
    Ok(if disc < 0.0 {
        Regime::Bound
    } else if e - depth < 0.0 {
        Regime::Supercritical
    } else {
        Regime::OpenChannel
    })
}

/// Momentum outside the well for the in-well momentum `p`.
///
/// The branch is fixed by the boundary conditions (nothing incoming from
/// infinity): decaying (`Im q > 0`) when bound, and outgoing group velocity
/// `v' = q c^2 / (E - V0)` otherwise, which forces `q < 0` in the
/// supercritical regime and `q > 0` in the open channel.
pub fn outside_momentum(p: f64, well: &WellConfig, units: UnitSystem) -> Result<(Complex64, Regime)> {
    if !(p.is_finite() && p > 0.0) {
        return Err(Error::InvalidParameter(format!("in-well momentum must be > 0, got {p}")));
    }
    let e = energy(p, well.mass, units);
    let regime = classify(e, well.depth, well.mass, units)?;
    let disc = outside_discriminant(e, well.depth, well.mass, units);
    let magnitude = disc.abs().sqrt() / units.c;
    let q = match regime {
        Regime::Bound => Complex64::new(0.0, magnitude),
        Regime::Supercritical => Complex64::new(-magnitude, 0.0),
        Regime::OpenChannel => Complex64::new(magnitude, 0.0),
    };
    Ok((q, regime))
}

/// Plane-wave data for one in-well momentum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSolution {
    pub p: f64,
    pub energy: f64,
    pub q: Complex64,
    pub regime: Regime,
}

impl ModeSolution {
    pub fn new(p: f64, well: &WellConfig, units: UnitSystem) -> Result<Self> {
        let (q, regime) = outside_momentum(p, well, units)?;
        Ok(Self { p, energy: energy(p, well.mass, units), q, regime })
    }

    /// Classical velocity outside the well, `q c^2 / (E - V0)`.
    pub fn outside_velocity(&self, well: &WellConfig, units: UnitSystem) -> Complex64 {
        self.q * (units.c * units.c) / (self.energy - well.depth)
    }

    pub fn inside_velocity(&self, units: UnitSystem) -> f64 {
        self.p * units.c * units.c / self.energy
    }
}
