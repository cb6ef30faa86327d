//! Heat conduction in the unit square with four square inclusions:
//! `∂θ/∂t = ∇·(γ(w, μ) ∇θ)`, unit influx on the left edge, zero flux on top
//! and bottom, `θ = 0` on the right edge. `γ = 1` in the background and
//! `κ_i` in inclusion `i`, with `κ₄` held fixed.

use super::fom::{AffineTerm, Coefficient, ParametricFom, TimeGrid, Trajectory};
use super::params::{GridSpacing, ParameterDomain, ParameterSample, TrainingSet};
use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;

pub const DEFAULT_MESH_DENSITY: usize = 32;
pub const DEFAULT_DT: f64 = 0.01;
pub const DEFAULT_HORIZON: f64 = 1.0;
pub const KAPPA4: f64 = 0.5;
/// Inclusion whose mean temperature is the output.
pub const OUTPUT_REGION: usize = 2;

#[derive(Clone, Debug, PartialEq)]
pub struct ThermalGeometry {
    /// Centres of the inclusions Ω₁..Ω₄.
    pub centers: [(f64, f64); 4],
    pub side: f64,
}

impl Default for ThermalGeometry {
    fn default() -> Self {
        Self {
            centers: [(0.3, 0.3), (0.7, 0.3), (0.3, 0.7), (0.7, 0.7)],
            side: 0.3,
        }
    }
}

impl ThermalGeometry {
    pub fn validate(&self) -> Result<()> {
        let h = self.side / 2.0;
        if !(self.side > 0.0) {
            return Err(Error::InvalidModel("inclusion side must be positive".into()));
        }
        for (i, &(x, y)) in self.centers.iter().enumerate() {
            if x - h < 0.0 || x + h > 1.0 || y - h < 0.0 || y + h > 1.0 {
                return Err(Error::InvalidModel(format!("inclusion {} leaves the unit square", i + 1)));
            }
            for (j, &(u, v)) in self.centers.iter().enumerate().skip(i + 1) {
                if (x - u).abs() < self.side && (y - v).abs() < self.side {
                    return Err(Error::InvalidModel(format!("inclusions {} and {} overlap", i + 1, j + 1)));
                }
            }
        }
        Ok(())
    }

    /// Region id of a point: 0 for the background, `i` for inclusion Ω_i.
    pub fn region_of(&self, x: f64, y: f64) -> usize {
        let h = self.side / 2.0;
        self.centers
            .iter()
            .position(|&(cx, cy)| (x - cx).abs() < h && (y - cy).abs() < h)
            .map_or(0, |i| i + 1)
    }
}

/// Crossed-triangle mesh: every square cell is split into four triangles
/// through its centre. Nodes on the right edge carry the Dirichlet value
/// and get no degree of freedom.
#[derive(Clone, Debug)]
pub struct ThermalMesh {
    pub density: usize,
    pub nodes: Vec<(f64, f64)>,
    pub dof: Vec<Option<usize>>,
    pub triangles: Vec<[usize; 3]>,
    pub regions: Vec<usize>,
    pub n_dofs: usize,
}

impl ThermalMesh {
    pub fn new(density: usize, geometry: &ThermalGeometry) -> Result<Self> {
        if density < 8 {
            return Err(Error::InvalidModel(format!("mesh density {density} below 8")));
        }
        geometry.validate()?;
        let nn = density;
        let h = 1.0 / nn as f64;
        // corner row r, then the cell-centre row r, interleaved to keep the band narrow
        let corner = |r: usize, c: usize| r * (2 * nn + 1) + c;
        let centre = |r: usize, c: usize| r * (2 * nn + 1) + (nn + 1) + c;
        let total = (nn + 1) * (nn + 1) + nn * nn;
        let mut nodes = vec![(0.0, 0.0); total];
        for r in 0..=nn {
            for c in 0..=nn {
                nodes[corner(r, c)] = (c as f64 * h, r as f64 * h);
            }
            if r < nn {
                for c in 0..nn {
                    nodes[centre(r, c)] = ((c as f64 + 0.5) * h, (r as f64 + 0.5) * h);
                }
            }
        }
        let mut dof = vec![None; total];
        let mut next = 0;
        for (i, d) in dof.iter_mut().enumerate() {
            if nodes[i].0 < 1.0 - 0.25 * h {
                *d = Some(next);
                next += 1;
            }
        }
        let mut triangles = Vec::with_capacity(4 * nn * nn);
        for r in 0..nn {
            for c in 0..nn {
                let (a, b, cc, d) = (corner(r, c), corner(r, c + 1), corner(r + 1, c + 1), corner(r + 1, c));
                let m = centre(r, c);
                triangles.extend([[a, b, m], [b, cc, m], [cc, d, m], [d, a, m]]);
            }
        }
        let regions: Vec<usize> = triangles
            .iter()
            .map(|t| {
                let (x, y) = centroid(&nodes, t);
                geometry.region_of(x, y)
            })
            .collect();
        for reg in 0..=4 {
            if !regions.contains(&reg) {
                return Err(Error::InvalidModel(format!("region {reg} received no elements at density {density}")));
            }
        }
        Ok(Self {
            density,
            nodes,
            dof,
            triangles,
            regions,
            n_dofs: next,
        })
    }

    pub fn area(&self, t: &[usize; 3]) -> f64 {
        let (p0, p1, p2) = (self.nodes[t[0]], self.nodes[t[1]], self.nodes[t[2]]);
        0.5 * ((p1.0 - p0.0) * (p2.1 - p0.1) - (p2.0 - p0.0) * (p1.1 - p0.1)).abs()
    }

    /// P1 stiffness over the triangles for which `weight` is non-zero, each
    /// scaled by that weight.
    pub fn stiffness(&self, weight: impl Fn(usize, &[usize; 3]) -> f64) -> CsrMatrix {
        let mut t = Vec::new();
        for (e, tri) in self.triangles.iter().enumerate() {
            let w = weight(e, tri);
            if w == 0.0 {
                continue;
            }
            let p: Vec<(f64, f64)> = tri.iter().map(|&v| self.nodes[v]).collect();
            let area = self.area(tri);
            let b = [p[1].1 - p[2].1, p[2].1 - p[0].1, p[0].1 - p[1].1];
            let c = [p[2].0 - p[1].0, p[0].0 - p[2].0, p[1].0 - p[0].0];
            for i in 0..3 {
                for j in 0..3 {
                    if let (Some(di), Some(dj)) = (self.dof[tri[i]], self.dof[tri[j]]) {
                        t.push((di, dj, w * (b[i] * b[j] + c[i] * c[j]) / (4.0 * area)));
                    }
                }
            }
        }
        CsrMatrix::from_triplets(self.n_dofs, self.n_dofs, &t)
    }

    pub fn region_stiffness(&self, region: usize) -> CsrMatrix {
        self.stiffness(|e, _| if self.regions[e] == region { 1.0 } else { 0.0 })
    }

    pub fn mass(&self) -> CsrMatrix {
        let mut t = Vec::new();
        for tri in &self.triangles {
            let area = self.area(tri);
            for i in 0..3 {
                for j in 0..3 {
                    if let (Some(di), Some(dj)) = (self.dof[tri[i]], self.dof[tri[j]]) {
                        let v = if i == j { area / 6.0 } else { area / 12.0 };
                        t.push((di, dj, v));
                    }
                }
            }
        }
        CsrMatrix::from_triplets(self.n_dofs, self.n_dofs, &t)
    }

    /// `∫_{Γ_in} φ_j` along the left edge.
    pub fn left_flux(&self) -> Vec<f64> {
        let nn = self.density;
        let h = 1.0 / nn as f64;
        let mut b = vec![0.0; self.n_dofs];
        for r in 0..nn {
            for node in [r * (2 * nn + 1), (r + 1) * (2 * nn + 1)] {
                if let Some(d) = self.dof[node] {
                    b[d] += 0.5 * h;
                }
            }
        }
        b
    }

    /// Row averaging a P1 field over `region`.
    pub fn region_average(&self, region: usize) -> CsrMatrix {
        let mut total = 0.0;
        let mut t = Vec::new();
        for (e, tri) in self.triangles.iter().enumerate() {
            if self.regions[e] != region {
                continue;
            }
            let area = self.area(tri);
            total += area;
            for &v in tri {
                if let Some(d) = self.dof[v] {
                    t.push((0, d, area / 3.0));
                }
            }
        }
        for e in t.iter_mut() {
            e.2 /= total;
        }
        CsrMatrix::from_triplets(1, self.n_dofs, &t)
    }
}

fn centroid(nodes: &[(f64, f64)], t: &[usize; 3]) -> (f64, f64) {
    let x = t.iter().map(|&v| nodes[v].0).sum::<f64>() / 3.0;
    let y = t.iter().map(|&v| nodes[v].1).sum::<f64>() / 3.0;
    (x, y)
}

pub fn thermal_domain() -> ParameterDomain {
    ParameterDomain::new(vec![1e-5, 1e-5, 1e-4], vec![1e-2, 1e-2, 1.0]).expect("static bounds")
}

pub fn thermal_training_set(per_dim: usize, spacing: GridSpacing) -> Result<TrainingSet> {
    TrainingSet::grid(&thermal_domain(), &[per_dim; 3], spacing)
}

pub fn build_thermal(mesh_density: usize) -> Result<ParametricFom> {
    build_thermal_with(mesh_density, &ThermalGeometry::default(), DEFAULT_DT, DEFAULT_HORIZON)
}

pub fn build_thermal_with(mesh_density: usize, geometry: &ThermalGeometry, dt: f64, horizon: f64) -> Result<ParametricFom> {
    let mesh = ThermalMesh::new(mesh_density, geometry)?;
    let time = TimeGrid::new(dt, horizon)?;
    let mut stiffness = vec![AffineTerm {
        coefficient: Coefficient::Constant(1.0),
        matrix: mesh.region_stiffness(0),
    }];
    for region in 1..=4 {
        stiffness.push(AffineTerm {
            coefficient: if region == 4 {
                Coefficient::Constant(KAPPA4)
            } else {
                Coefficient::Parameter(region - 1)
            },
            matrix: mesh.region_stiffness(region),
        });
    }
    let fom = ParametricFom {
        name: "thermal".into(),
        mass: mesh.mass(),
        stiffness,
        input: mesh.left_flux(),
        output: mesh.region_average(OUTPUT_REGION),
        nonlinearity: None,
        input_signal: 1.0,
        time,
        steady: false,
        domain: thermal_domain(),
    };
    fom.validate()?;
    Ok(fom)
}

pub fn solve_thermal(fom: &ParametricFom, mu: &ParameterSample) -> Result<Trajectory> {
    fom.solve(mu)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_size_and_time_grid() {
        let fom = build_thermal(DEFAULT_MESH_DENSITY).unwrap();
        assert_eq!(fom.dim(), 2080);
        assert_eq!(fom.time.instants(), 101);
        assert_eq!(fom.output_dim(), 1);
    }

    #[test]
    fn unit_conductivity_sums_to_laplacian() {
        let g = ThermalGeometry::default();
        let mesh = ThermalMesh::new(10, &g).unwrap();
        let fom = build_thermal(10).unwrap();
        let ones = ParameterSample::new(vec![1.0, 1.0, 1.0]);
        let mut parts = fom.stiffness_at(&ones);
        // κ₄ is fixed, so add back the missing half of region 4
        parts = CsrMatrix::linear_combination(&[(1.0, &parts), (1.0 - KAPPA4, &mesh.region_stiffness(4))]);
        let whole = mesh.stiffness(|_, _| 1.0);
        let diff = CsrMatrix::linear_combination(&[(1.0, &parts), (-1.0, &whole)]);
        assert!(diff.triplets().iter().all(|t| t.2.abs() < 1e-12));
    }

    #[test]
    fn constant_field_averages_to_one() {
        let fom = build_thermal(12).unwrap();
        let y = fom.output_of(&vec![1.0; fom.dim()]);
        assert!((y[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn geometry_errors() {
        let mut g = ThermalGeometry::default();
        g.centers[1] = (0.4, 0.35);
        assert!(build_thermal_with(16, &g, 0.01, 1.0).is_err());
        assert!(build_thermal(4).is_err());
    }
}
