use crate::benchmarks::{Coefficient, Nonlinearity, ParameterSample, ParametricFom, TimeGrid};
use crate::error::{Error, Result};
use crate::linalg::{axpy, CsrMatrix, DenseLu, DenseMatrix, ReducedBasis};
use crate::selector::InterpolationSelection;

/// Interpolation of the nonlinear term through a few of its entries:
/// `Vᵀ f ≈ H f_P` with `H = VᵀU (PᵀU)⁻¹`.
#[derive(Clone, Debug)]
pub struct HyperReduction {
    pub selection: InterpolationSelection,
    /// `H`, r × ℓ.
    pub projector: DenseMatrix,
    /// `(PᵀU)⁻¹`, mapping sampled entries to coefficients in `U`.
    pub coefficient_map: DenseMatrix,
    /// Rows of `V` at the sampled entries, ℓ × r.
    pub rows_at: DenseMatrix,
    /// Rows of `V` at the upwind neighbour of every sampled entry (zero
    /// where the neighbour is the eliminated boundary node), ℓ × r.
    pub rows_upwind: DenseMatrix,
}

/// Galerkin-projected operators. Affine terms stay separate and are
/// combined with their μ-coefficients at solve time.
#[derive(Clone, Debug)]
pub struct RomOperators {
    pub basis: ReducedBasis,
    pub mass: DenseMatrix,
    pub stiffness: Vec<(Coefficient, DenseMatrix)>,
    pub input: Vec<f64>,
    pub output: DenseMatrix,
    pub hyper: Option<HyperReduction>,
    pub nonlinearity: Option<Nonlinearity>,
    pub input_signal: f64,
    pub time: TimeGrid,
    pub steady: bool,
}

/// Reduced coordinates and outputs of one reduced solve.
#[derive(Clone, Debug)]
pub struct ReducedTrajectory {
    pub r: usize,
    /// `z^k` for k = 0..K, stored one instant after another.
    pub coords: Vec<f64>,
    pub outputs: DenseMatrix,
    /// Interpolation coefficients `c^k = (PᵀU)⁻¹ f_P(V z^k)` for k = 0..K−1.
    pub deim_coefficients: Option<Vec<f64>>,
}

impl ReducedTrajectory {
    pub fn instants(&self) -> usize {
        self.outputs.cols()
    }

    pub fn z(&self, k: usize) -> &[f64] {
        &self.coords[k * self.r..(k + 1) * self.r]
    }
}

fn project_sparse(v: &DenseMatrix, a: &CsrMatrix) -> Result<DenseMatrix> {
    v.t_matmul(&a.mul_dense(v))
}

pub fn galerkin_project(
    fom: &ParametricFom,
    basis: &ReducedBasis,
    selection: Option<&InterpolationSelection>,
) -> Result<RomOperators> {
    let n = fom.dim();
    if basis.ambient_dim() != n {
        return Err(Error::DimensionMismatch {
            op: "galerkin projection",
            left: (n, n),
            right: (basis.ambient_dim(), basis.dim()),
        });
    }
    let v = basis.matrix().ok_or(Error::EmptyMatrix { rows: n, cols: 0 })?;
    let mass = project_sparse(&v, &fom.mass)?;
    let stiffness = fom
        .stiffness
        .iter()
        .map(|t| Ok((t.coefficient, project_sparse(&v, &t.matrix)?)))
        .collect::<Result<Vec<_>>>()?;
    let input = v.t_matvec(&fom.input);
    let output = v.t_matmul(&fom.output.to_dense().transpose())?.transpose();

    let hyper = match (selection, &fom.nonlinearity) {
        (Some(sel), Some(nl)) => Some(hyper_reduce(&v, sel, nl)?),
        _ => None,
    };
    Ok(RomOperators {
        basis: basis.clone(),
        mass,
        stiffness,
        input,
        output,
        hyper,
        nonlinearity: fom.nonlinearity.clone(),
        input_signal: fom.input_signal,
        time: fom.time,
        steady: fom.steady,
    })
}

fn hyper_reduce(v: &DenseMatrix, sel: &InterpolationSelection, nl: &Nonlinearity) -> Result<HyperReduction> {
    sel.check()?;
    if !sel.is_square() {
        return Err(Error::InvalidBudget {
            m: sel.len(),
            base: sel.rank(),
            rows: sel.basis.rows(),
        });
    }
    let u = &sel.basis;
    if u.rows() != v.rows() {
        return Err(Error::DimensionMismatch {
            op: "hyper-reduction basis",
            left: v.shape(),
            right: u.shape(),
        });
    }
    let coefficient_map = DenseLu::factor(&sel.selected_rows(), "interpolation matrix")?.inverse();
    let projector = v.t_matmul(u)?.matmul(&coefficient_map)?;
    let rows_at = v.select_rows(&sel.indices)?;
    let r = v.cols();
    let rows_upwind = DenseMatrix::from_fn(sel.len(), r, |i, j| match nl.support(sel.indices[i]).1 {
        Some(p) => v.get(p, j),
        None => 0.0,
    })?;
    Ok(HyperReduction {
        selection: sel.clone(),
        projector,
        coefficient_map,
        rows_at,
        rows_upwind,
    })
}

impl RomOperators {
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn interpolation_size(&self) -> usize {
        self.hyper.as_ref().map_or(0, |h| h.selection.len())
    }

    pub fn stiffness_at(&self, mu: &ParameterSample) -> DenseMatrix {
        let r = self.dim();
        let mut data = vec![0.0; r * r];
        for (c, m) in &self.stiffness {
            axpy(c.eval(mu), m.data(), &mut data);
        }
        DenseMatrix::new(r, r, data).expect("finite reduced operators")
    }
}

/// Sampled nonlinear entries `f_P(V z)` through the stored rows of `V`.
fn sampled_nonlinearity(h: &HyperReduction, nl: &Nonlinearity, z: &[f64]) -> Vec<f64> {
    let here = h.rows_at.matvec(z);
    let up = h.rows_upwind.matvec(z);
    here.iter().zip(&up).map(|(&x, &p)| nl.eval_local(x, p)).collect()
}

/// Reduced solve with the time scheme of the full model.
pub fn rom_solve(rom: &RomOperators, mu: &ParameterSample) -> Result<ReducedTrajectory> {
    let r = rom.dim();
    let q = rom.output.rows();
    let kmat = rom.stiffness_at(mu);
    if rom.steady {
        let rhs: Vec<f64> = rom.input.iter().map(|b| b * rom.input_signal).collect();
        let z = DenseLu::factor(&kmat, &format!("reduced steady system at mu = {:?}", mu.values))?.solve(&rhs);
        let y = rom.output.matvec(&z);
        return Ok(ReducedTrajectory {
            r,
            coords: z,
            outputs: DenseMatrix::new(q, 1, y)?,
            deim_coefficients: None,
        });
    }
    let dt = rom.time.dt;
    let nt = rom.time.instants();
    let step: Vec<f64> = rom.mass.data().iter().zip(kmat.data()).map(|(m, k)| m + dt * k).collect();
    let step = DenseMatrix::new(r, r, step)?;
    let lu = DenseLu::factor(&step, &format!("reduced step matrix at mu = {:?}", mu.values))?;
    let a_hat = lu.solve_matrix(&rom.mass);
    let g_hat: Vec<f64> = lu.solve(&rom.input).iter().map(|g| dt * rom.input_signal * g).collect();
    let h_hat = rom.hyper.as_ref().map(|h| {
        let mut m = lu.solve_matrix(&h.projector);
        m.scale(dt);
        m
    });

    let mut coords = vec![0.0; r * nt];
    let mut outputs = DenseMatrix::zeros(q, nt);
    let mut deim_coefficients = rom.hyper.as_ref().map(|h| Vec::with_capacity(h.selection.len() * (nt - 1)));
    let v_full = match (&rom.nonlinearity, &rom.hyper) {
        (Some(_), None) => rom.basis.matrix(),
        _ => None,
    };
    for k in 1..nt {
        let (prev, rest) = coords.split_at_mut(k * r);
        let zp = &prev[(k - 1) * r..];
        let zk = &mut rest[..r];
        let az = a_hat.matvec(zp);
        for i in 0..r {
            zk[i] = az[i] + g_hat[i];
        }
        if let (Some(nl), Some(h), Some(hh)) = (&rom.nonlinearity, &rom.hyper, &h_hat) {
            let fp = sampled_nonlinearity(h, nl, zp);
            let contrib = hh.matvec(&fp);
            for i in 0..r {
                zk[i] += contrib[i];
            }
            if let Some(store) = deim_coefficients.as_mut() {
                store.extend(h.coefficient_map.matvec(&fp));
            }
        } else if let (Some(nl), Some(v)) = (&rom.nonlinearity, &v_full) {
            let fx = nl.eval(&v.matvec(zp));
            let projected = v.t_matvec(&fx);
            let contrib = lu.solve(&projected);
            for i in 0..r {
                zk[i] += dt * contrib[i];
            }
        }
        if zk.iter().any(|x| !x.is_finite()) {
            return Err(Error::Singular {
                context: format!("reduced solve diverged at step {k} for mu = {:?}", mu.values),
            });
        }
        let y = rom.output.matvec(zk);
        outputs.column_mut(k).copy_from_slice(&y);
    }
    Ok(ReducedTrajectory {
        r,
        coords,
        outputs,
        deim_coefficients,
    })
}
