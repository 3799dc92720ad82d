//! Element-by-element interpolation into the global spaces of a mesh.

use serde::Serialize;

use super::operator::{interpolator, IntegrableField, InterpError};
use super::projection::InnerProductSpec;
use crate::localspace::SpaceKind;
use crate::meshasm::{BoundaryCondition, GlobalDofMap, Mesh};
use crate::polycore::Rational;

/// Global coefficients of `Pi^l_p u`. Shared facet coefficients are
/// computed by every adjacent element and must agree.
#[derive(Clone, Debug, Serialize)]
pub struct GlobalInterpolant {
    pub level: usize,
    pub p: usize,
    pub coeffs: Vec<f64>,
    /// Present for polynomial inputs.
    pub exact: Option<Vec<Rational>>,
    /// Largest disagreement between elements on a shared coefficient.
    pub max_mismatch: f64,
}

pub fn space_kind(level: usize) -> Result<SpaceKind, InterpError> {
    match level {
        0 => Ok(SpaceKind::Scalar),
        1 => Ok(SpaceKind::W1),
        2 => Ok(SpaceKind::W2),
        _ => Err(InterpError::BadLevel),
    }
}

/// `Pi^l_p u` on every element, merged in element order.
pub fn pi_global(mesh: &Mesh, p: usize, level: usize, u: &IntegrableField, ip: &InnerProductSpec) -> Result<GlobalInterpolant, InterpError> {
    let dm = GlobalDofMap::new(mesh, space_kind(level)?, p, BoundaryCondition::None);
    let mut coeffs: Vec<Option<f64>> = vec![None; dm.n_dofs];
    let mut exact: Vec<Option<Rational>> = vec![None; dm.n_dofs];
    let mut max_mismatch = 0.0f64;
    let mut worst = 0;
    for t in 0..mesh.num_tets() {
        let op = interpolator(level, &mesh.simplex(t), p, ip)?;
        let (local, local_exact) = match u {
            IntegrableField::Exact(f) => {
                let c = op.apply_exact(f)?.coeffs;
                (c.iter().map(Rational::to_f64).collect::<Vec<_>>(), Some(c))
            }
            IntegrableField::Callable(f) => (op.apply_f64(f), None),
        };
        for (i, g) in dm.local[t].iter().enumerate() {
            let Some((g, sign)) = *g else { continue };
            let v = local[i] * sign as f64;
            match coeffs[g] {
                Some(prev) => {
                    let d = (prev - v).abs() / (1.0 + prev.abs());
                    if d > max_mismatch {
                        max_mismatch = d;
                        worst = g;
                    }
                }
                None => coeffs[g] = Some(v),
            }
            if let Some(le) = &local_exact {
                let v = if sign > 0 { le[i].clone() } else { -&le[i] };
                match &exact[g] {
                    Some(prev) if *prev != v => {
                        return Err(InterpError::Inconsistent { dof: g });
                    }
                    Some(_) => {}
                    None => exact[g] = Some(v),
                }
            }
        }
    }
    if max_mismatch > 1e-10 {
        return Err(InterpError::Inconsistent { dof: worst });
    }
    let is_exact = matches!(u, IntegrableField::Exact(_));
    Ok(GlobalInterpolant {
        level,
        p,
        coeffs: coeffs.into_iter().map(|c| c.unwrap_or(0.0)).collect(),
        exact: is_exact.then(|| exact.into_iter().map(|c| c.unwrap_or(Rational::ZERO)).collect()),
        max_mismatch,
    })
}
