use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CylinderGeometry, SpinSite};
use crate::error::{positive_finite, Error, Result};

/// How a homogeneous probe density is realised as explicit sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LatticeMode {
    /// Simple cubic grid of spacing `ρ^{-1/3}`. In-plane sites sit on the
    /// axis-aligned grid through the cylinder axis; layers are cell-centred,
    /// starting half a spacing above `z_min`.
    Cubic,
    /// `round(ρ·V)` sites drawn uniformly inside the cylinder.
    Poisson,
}

/// Ordered list of probe positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinLattice {
    sites: Vec<SpinSite>,
}

impl SpinLattice {
    pub fn from_sites(sites: Vec<SpinSite>) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::EmptyLattice);
        }
        Ok(Self { sites })
    }

    pub fn sites(&self) -> &[SpinSite] {
        &self.sites
    }

    /// Probe count `L`.
    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn concat(&self, other: &SpinLattice) -> SpinLattice {
        let mut sites = self.sites.clone();
        sites.extend_from_slice(&other.sites);
        SpinLattice { sites }
    }
}

/// Fills `geom` with probes at density `rho`. Deterministic in all arguments;
/// `seed` only matters for [`LatticeMode::Poisson`].
pub fn generate_lattice(
    geom: &CylinderGeometry,
    rho: f64,
    mode: LatticeMode,
    seed: u64,
) -> Result<SpinLattice> {
    positive_finite("rho", rho)?;
    if rho * geom.volume() < 1.0 {
        return Err(Error::InvalidParameter {
            name: "rho",
            reason: format!(
                "expected at least one probe, density × volume = {}",
                rho * geom.volume()
            ),
        });
    }
    let sites = match mode {
        LatticeMode::Cubic => cubic_sites(geom, rho.powf(-1.0 / 3.0)),
        LatticeMode::Poisson => poisson_sites(geom, rho, seed),
    };
    SpinLattice::from_sites(sites)
}

fn cubic_sites(geom: &CylinderGeometry, spacing: f64) -> Vec<SpinSite> {
    let r2 = geom.r * geom.r;
    let n = (geom.r / spacing).floor() as i64;
    let mut plane = Vec::new();
    for i in -n..=n {
        for j in -n..=n {
            let (x, y) = (i as f64 * spacing, j as f64 * spacing);
            if x * x + y * y <= r2 {
                plane.push((x, y));
            }
        }
    }
    let mut sites = Vec::new();
    let mut layer = 0u64;
    loop {
        let z = geom.z_min + (layer as f64 + 0.5) * spacing;
        if z > geom.z_max {
            break;
        }
        sites.extend(plane.iter().map(|&(x, y)| SpinSite::new(x, y, z)));
        layer += 1;
    }
    sites
}

fn poisson_sites(geom: &CylinderGeometry, rho: f64, seed: u64) -> Vec<SpinSite> {
    let count = (rho * geom.volume()).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            // sqrt of a uniform deviate gives a uniform areal density on the disc
            let radius = geom.r * rng.random::<f64>().sqrt();
            let phi = 2.0 * PI * rng.random::<f64>();
            let z = geom.z_min + (geom.z_max - geom.z_min) * rng.random::<f64>();
            SpinSite::new(radius * phi.cos(), radius * phi.sin(), z)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_count_is_density_times_volume() {
        let geom = CylinderGeometry::new(1.0, 2.0, 1.0).unwrap();
        let lat = generate_lattice(&geom, 1000.0, LatticeMode::Poisson, 7).unwrap();
        assert_eq!(lat.len(), 3142);
        assert!(lat.sites().iter().all(|s| geom.contains(s)));
    }

    #[test]
    fn cubic_spacing_is_inverse_cube_root_density() {
        let geom = CylinderGeometry::new(1.0, 11.0, 10.0).unwrap();
        let lat = generate_lattice(&geom, 1.0, LatticeMode::Cubic, 0).unwrap();
        let mut zs: Vec<f64> = lat.sites().iter().map(|s| s.z).collect();
        zs.dedup();
        assert_eq!(zs.len(), 10);
        for w in zs.windows(2) {
            assert_eq!(w[1] - w[0], 1.0);
        }
        // every in-plane coordinate is an integer multiple of the spacing
        assert!(lat.sites().iter().all(|s| s.x.fract() == 0.0 && s.y.fract() == 0.0));
        assert!(lat.sites().iter().all(|s| geom.contains(s)));
    }

    #[test]
    fn same_seed_same_sites() {
        let geom = CylinderGeometry::new(0.5, 1.5, 0.7).unwrap();
        let a = generate_lattice(&geom, 200.0, LatticeMode::Poisson, 42).unwrap();
        let b = generate_lattice(&geom, 200.0, LatticeMode::Poisson, 42).unwrap();
        let c = generate_lattice(&geom, 200.0, LatticeMode::Poisson, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn too_sparse_is_rejected() {
        let geom = CylinderGeometry::new(1.0, 2.0, 0.1).unwrap();
        assert!(generate_lattice(&geom, 1.0, LatticeMode::Cubic, 0).is_err());
        assert_eq!(SpinLattice::from_sites(vec![]), Err(Error::EmptyLattice));
    }
}
