//! Physical parameters, dipolar coupling frequencies and the continuum limit
//! of the summed coupling.
//!
//! The target spin sits at the origin with its quantisation axis along `z`.
//! A probe at position `(x, y, z)` with cylindrical radius `r = √(x² + y²)`
//! picks up the secular dipolar frequency
//!
//! ```text
//! ω = 2G / (r² + z²)^{3/2} · (1 − 3z² / (r² + z²)) · s
//! ```
//!
//! where `s = ±1` is the classical value of the target spin.

mod lattice;

pub use lattice::{generate_lattice, LatticeMode, SpinLattice};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{positive, positive_finite, Error, Result};

/// Vacuum permeability, N/A² (CODATA 2018).
pub const VACUUM_PERMEABILITY: f64 = 1.256_637_062_12e-6;
/// Reduced Planck constant, J·s (CODATA 2018).
pub const REDUCED_PLANCK: f64 = 1.054_571_817e-34;
/// Electron gyromagnetic ratio magnitude, rad/(s·T) (CODATA 2018).
pub const ELECTRON_GYROMAGNETIC_RATIO: f64 = 1.760_859_630_23e11;
/// Cubic micrometres per cubic metre.
pub const UM3_PER_M3: f64 = 1e18;
/// Divide a density in cm⁻³ by this to obtain μm⁻³.
pub const UM3_PER_CM3_INVERSE: f64 = 1e12;

/// Dipolar constant for two electron spins written with Pauli operators.
///
/// With `S = σ/2` for both spins the dipolar prefactor `μ₀γ²ħ²/(4π)` in energy
/// units becomes `μ₀γ²ħ/(16π)` in angular frequency, here converted from
/// rad·m³/s to rad·μm³/s. Evaluates to ≈ 8.1746×10⁻² rad·μm³/s.
pub fn default_coupling_constant() -> f64 {
    VACUUM_PERMEABILITY * ELECTRON_GYROMAGNETIC_RATIO * ELECTRON_GYROMAGNETIC_RATIO * REDUCED_PLANCK
        / (16.0 * PI)
        * UM3_PER_M3
}

/// Converts a density given per cm³ to per μm³.
pub fn density_from_per_cm3(per_cm3: f64) -> f64 {
    per_cm3 / UM3_PER_CM3_INVERSE
}

/// Parameters shared by every sensitivity formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Dipolar constant `G`, rad·μm³/s.
    pub g_coupling: f64,
    /// Coherence time `T₂`, s.
    pub t2: f64,
    /// Probe density, μm⁻³.
    pub rho: f64,
    /// Total measurement budget `T`, s.
    pub total_time: f64,
}

impl PhysicalParams {
    pub fn new(g_coupling: f64, t2: f64, rho: f64, total_time: f64) -> Result<Self> {
        Ok(Self {
            g_coupling: positive("g_coupling", g_coupling)?,
            t2: positive_finite("t2", t2)?,
            rho: positive_finite("rho", rho)?,
            total_time: positive("total_time", total_time)?,
        })
    }

    pub fn with_total_time(self, total_time: f64) -> Result<Self> {
        Self::new(self.g_coupling, self.t2, self.rho, total_time)
    }

    pub fn with_g_coupling(self, g_coupling: f64) -> Result<Self> {
        Self::new(g_coupling, self.t2, self.rho, self.total_time)
    }
}

/// Classical value of the target spin after the rotating-wave reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TargetState {
    Up,
    Down,
}

impl TargetState {
    pub fn from_value(s: i32) -> Result<Self> {
        match s {
            1 => Ok(Self::Up),
            -1 => Ok(Self::Down),
            other => Err(Error::InvalidParameter {
                name: "s",
                reason: format!("target spin must be +1 or -1, got {other}"),
            }),
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Self::Up => 1.0,
            Self::Down => -1.0,
        }
    }
}

/// Columnar probe substrate: a solid cylinder about the `z` axis occupying
/// `z_min ≤ z ≤ z_max`, `√(x² + y²) ≤ r`. All lengths in μm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylinderGeometry {
    pub z_min: f64,
    pub z_max: f64,
    pub r: f64,
}

impl CylinderGeometry {
    pub fn new(z_min: f64, z_max: f64, r: f64) -> Result<Self> {
        positive_finite("z_min", z_min)?;
        positive_finite("r", r)?;
        if !(z_max > z_min) || !z_max.is_finite() {
            return Err(Error::InvalidParameter {
                name: "z_max",
                reason: format!("must satisfy z_min < z_max < ∞, got z_min={z_min}, z_max={z_max}"),
            });
        }
        Ok(Self { z_min, z_max, r })
    }

    pub fn volume(&self) -> f64 {
        PI * self.r * self.r * (self.z_max - self.z_min)
    }

    /// Dimensionless shape `(r / z_min, z_max / z_min)`.
    pub fn reduced(&self) -> ReducedGeometry {
        ReducedGeometry {
            r_tilde: self.r / self.z_min,
            z_tilde_max: self.z_max / self.z_min,
        }
    }

    pub fn contains(&self, site: &SpinSite) -> bool {
        site.z >= self.z_min && site.z <= self.z_max && site.radial_sq() <= self.r * self.r
    }
}

/// Cylinder shape in units of the standoff `z_min`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedGeometry {
    pub r_tilde: f64,
    pub z_tilde_max: f64,
}

impl ReducedGeometry {
    pub fn new(r_tilde: f64, z_tilde_max: f64) -> Result<Self> {
        positive_finite("r_tilde", r_tilde)?;
        if !(z_tilde_max > 1.0) || !z_tilde_max.is_finite() {
            return Err(Error::Domain(format!(
                "z_tilde_max must exceed 1, got {z_tilde_max}"
            )));
        }
        Ok(Self { r_tilde, z_tilde_max })
    }

    /// Physical cylinder for a given standoff.
    pub fn scale(&self, z_min: f64) -> Result<CylinderGeometry> {
        CylinderGeometry::new(z_min, self.z_tilde_max * z_min, self.r_tilde * z_min)
    }
}

/// Position of a probe spin, μm. The target sits at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinSite {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl SpinSite {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn radial_sq(&self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn distance_sq(&self) -> f64 {
        self.radial_sq() + self.z * self.z
    }
}

/// Coupling frequency per unit target spin, `ω_j / s`, in rad/s.
pub fn dipolar_frequency(site: &SpinSite, g_coupling: f64) -> Result<f64> {
    let l2 = site.distance_sq();
    if l2 == 0.0 {
        return Err(Error::Domain(
            "probe site coincides with the target; the dipolar coupling diverges".into(),
        ));
    }
    let anisotropy = 1.0 - 3.0 * site.z * site.z / l2;
    Ok(2.0 * g_coupling / (l2 * l2.sqrt()) * anisotropy)
}

/// Probe frequency shift `ω_j` produced by the target in state `target`.
pub fn coupling_omega(site: &SpinSite, params: &PhysicalParams, target: TargetState) -> Result<f64> {
    Ok(dipolar_frequency(site, params.g_coupling)? * target.value())
}

/// Signed sum `Σ_j ∂ω_j/∂s` over the lattice.
pub fn sum_domega_ds(lattice: &SpinLattice, params: &PhysicalParams) -> Result<f64> {
    if lattice.is_empty() {
        return Err(Error::EmptyLattice);
    }
    lattice
        .sites()
        .iter()
        .map(|site| dipolar_frequency(site, params.g_coupling))
        .sum()
}

/// Continuum value of `|Σ_j ∂ω_j/∂s|` for a homogeneous cylinder,
/// `4πGρ |z_max/√(r²+z_max²) − z_min/√(r²+z_min²)|`.
///
/// No validation is done so that degenerate and limiting shapes (`z_max = z_min`,
/// `z_max = ∞`) can be evaluated.
pub fn coupling_integral(z_min: f64, z_max: f64, r: f64, g_coupling: f64, rho: f64) -> f64 {
    let face = |z: f64| {
        if z.is_infinite() {
            1.0
        } else {
            z / (r * r + z * z).sqrt()
        }
    };
    4.0 * PI * g_coupling * rho * (face(z_max) - face(z_min)).abs()
}

/// Continuum limit of `|Σ_j ∂ω_j/∂s|` for a probe cylinder at density `params.rho`.
pub fn continuous_sum_domega(geom: &CylinderGeometry, params: &PhysicalParams) -> f64 {
    coupling_integral(geom.z_min, geom.z_max, geom.r, params.g_coupling, params.rho)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_params() -> PhysicalParams {
        PhysicalParams::new(1.0, 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn coupling_constant_matches_hand_evaluation() {
        // μ₀γ²ħ/(16π)·10¹⁸ evaluated by hand from CODATA 2018 values.
        let expected = 0.081_745_836_714_845_88;
        let g = default_coupling_constant();
        assert!((g - expected).abs() / expected < 1e-12, "{g}");
        assert!((g / 1.0f64.powi(3) - 0.0817).abs() < 1e-3);
        let nm = 1e-3f64;
        assert!((g / nm.powi(3) / 8.1746e7 - 1.0).abs() < 1e-4);
    }

    #[test]
    fn coupling_omega_trivial_values() {
        let p = unit_params();
        let eq = SpinSite::new(1.0, 0.0, 0.0);
        let axis = SpinSite::new(0.0, 0.0, 1.0);
        assert_eq!(coupling_omega(&eq, &p, TargetState::Up).unwrap(), 2.0);
        assert_eq!(coupling_omega(&axis, &p, TargetState::Up).unwrap(), -4.0);
        assert_eq!(coupling_omega(&eq, &p, TargetState::Down).unwrap(), -2.0);
        // 3z² = x² + y² + z² with x = √2: magic angle.
        let magic = SpinSite::new(2f64.sqrt(), 0.0, 1.0);
        assert!(coupling_omega(&magic, &p, TargetState::Up).unwrap().abs() < 1e-15);
        assert!(coupling_omega(&magic, &p, TargetState::Down).unwrap().abs() < 1e-15);
    }

    #[test]
    fn origin_is_a_domain_error() {
        let err = coupling_omega(&SpinSite::new(0.0, 0.0, 0.0), &unit_params(), TargetState::Up);
        assert!(matches!(err, Err(Error::Domain(_))));
    }

    #[test]
    fn sum_over_single_and_magic_sites() {
        let p = unit_params();
        let z = 0.7;
        let single = SpinLattice::from_sites(vec![SpinSite::new(0.0, 0.0, z)]).unwrap();
        let expected = -4.0 / (z * z * z);
        assert!((sum_domega_ds(&single, &p).unwrap() - expected).abs() < 1e-12);
        let pair = SpinLattice::from_sites(vec![
            SpinSite::new(0.0, 0.0, z),
            SpinSite::new(z * 2f64.sqrt(), 0.0, z),
        ])
        .unwrap();
        assert!((sum_domega_ds(&pair, &p).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn continuum_limits() {
        let (z_min, r) = (1.3, 0.8);
        let semi_infinite = coupling_integral(z_min, f64::INFINITY, r, 1.0, 1.0);
        let expected = 4.0 * PI * (1.0 - z_min / (r * r + z_min * z_min).sqrt());
        assert!((semi_infinite - expected).abs() < 1e-14);
        assert_eq!(coupling_integral(z_min, z_min, r, 1.0, 1.0), 0.0);
        let far = coupling_integral(z_min, 1e9, r, 1.0, 1.0);
        assert!((far - expected).abs() < 1e-9);
    }

    #[test]
    fn geometry_validation() {
        assert!(CylinderGeometry::new(1.0, 1.0, 1.0).is_err());
        assert!(CylinderGeometry::new(0.0, 1.0, 1.0).is_err());
        assert!(CylinderGeometry::new(1.0, 2.0, 0.0).is_err());
        assert!(ReducedGeometry::new(1.0, 1.0).is_err());
        let g = CylinderGeometry::new(2.0, 8.6, 3.74).unwrap();
        let red = g.reduced();
        assert!((red.r_tilde - 1.87).abs() < 1e-12 && (red.z_tilde_max - 4.3).abs() < 1e-12);
        let back = red.scale(2.0).unwrap();
        assert!((back.z_max - 8.6).abs() < 1e-12 && (back.r - 3.74).abs() < 1e-12);
    }

    #[test]
    fn density_conversion_is_exact() {
        assert_eq!(density_from_per_cm3(6.7e16), 6.7e4);
        assert!(TargetState::from_value(0).is_err());
        assert_eq!(TargetState::from_value(-1).unwrap(), TargetState::Down);
    }

    #[test]
    fn params_reject_nonpositive() {
        assert!(PhysicalParams::new(1.0, 0.0, 1.0, 1.0).is_err());
        assert!(PhysicalParams::new(1.0, 1.0, f64::INFINITY, 1.0).is_err());
        assert!(PhysicalParams::new(-1.0, 1.0, 1.0, 1.0).is_err());
    }
}
