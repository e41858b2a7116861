//! Built-in problem families.
//!
//! A [`ProblemFamily`] bundles a symbol, the Hermitian weight of the
//! nonlocal functional, a default data family and (where one exists) a
//! conserved energy functional. The catalog covers:
//!
//! * `scalar_kirchhoff`: the classical equation `∂_t² u = (1+s) Δu` with
//!   `s = ‖∇u‖²`, reduced to the 2×2 companion system in
//!   `V = (|ξ| û, D_t û)`;
//! * `coupled`: two wave equations coupled through degree-2 polynomials,
//!   the 4×4 system with closed-form characteristic roots;
//! * `l2_kirchhoff`: the `s = ‖u‖²_{L²}` variant realized through the
//!   `|ξ|^{-2}`-weighted functional (needs n ≥ 3 so that k = 2 ≤ n-1);
//! * `constant_wave`: a symbol that ignores s, for Θ-independence checks.

use std::sync::Arc;

use crate::classnorms::DataFamily;
use crate::error::Result;
use crate::grid::FrequencyGrid;
use crate::solver::SpectralField;
use crate::symbol::{
    companion_symbol, coupled_symbol, CoeffFn, HermitianWeight, SphereFn, SymbolModel,
};

/// Conserved-energy functional of a spectral state.
pub type EnergyFn = Arc<dyn Fn(&SpectralField) -> Result<f64> + Send + Sync>;

/// A named problem: symbol + nonlocal weight + default data (+ energy).
#[derive(Clone)]
pub struct ProblemFamily {
    pub name: String,
    pub dim: usize,
    pub symbol: SymbolModel,
    pub weight: HermitianWeight,
    pub data: DataFamily,
    pub energy: Option<EnergyFn>,
}

impl std::fmt::Debug for ProblemFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProblemFamily")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("m", &self.symbol.size())
            .finish()
    }
}

/// `∂_t² u = (1 + s) Δ u`, `s(t) = ‖∇u‖²`. State `V = (|ξ| û, D_t û)`,
/// so `s = ∫ |V_1|² dξ` (weight diag(1,0), radial exponent 0) and the
/// conserved energy is `E = ‖u_t‖² + ‖∇u‖² + ½ ‖∇u‖⁴`.
pub fn scalar_kirchhoff(dim: usize, delta: f64, data: DataFamily) -> Result<ProblemFamily> {
    let h1: CoeffFn = Arc::new(|_, _| 0.0);
    let h2: CoeffFn = Arc::new(|s, _| -(1.0 + s));
    let symbol = companion_symbol(vec![h1, h2], delta, 1.0);
    let weight = HermitianWeight::diagonal(&[1.0, 0.0], 0, dim)?;
    let grad_w = HermitianWeight::diagonal(&[1.0, 0.0], 0, dim)?;
    let vel_w = HermitianWeight::diagonal(&[0.0, 1.0], 0, dim)?;
    let energy: EnergyFn = Arc::new(move |field: &SpectralField| {
        let grad_sq = field.weighted_quad_form(&grad_w);
        let vel_sq = field.weighted_quad_form(&vel_w);
        Ok(vel_sq + grad_sq + 0.5 * grad_sq * grad_sq)
    });
    Ok(ProblemFamily {
        name: "scalar_kirchhoff".into(),
        dim,
        symbol,
        weight,
        data,
        energy: Some(energy),
    })
}

/// Two coupled wave equations with speeds `c_k² = a_k (1+s)` and coupling
/// polynomials `P_k(ξ) = p_k |ξ|²`; `s = ‖∇u‖² + ‖∇v‖²` in the state
/// `V = (|ξ|û, û', |ξ|v̂, v̂')`.
pub fn coupled(
    dim: usize,
    a1: f64,
    a2: f64,
    p1_coeff: f64,
    p2_coeff: f64,
    delta: f64,
    grid: &FrequencyGrid,
    data: DataFamily,
) -> Result<ProblemFamily> {
    let p1: SphereFn = Arc::new(move |_| p1_coeff);
    let p2: SphereFn = Arc::new(move |_| p2_coeff);
    let symbol = coupled_symbol(a1, a2, p1, p2, delta, grid)?;
    let weight = HermitianWeight::diagonal(&[1.0, 0.0, 1.0, 0.0], 0, dim)?;
    Ok(ProblemFamily {
        name: "coupled".into(),
        dim,
        symbol,
        weight,
        data,
        energy: None,
    })
}

/// The `s(t) = ‖u(t)‖²_{L²}` equation `∂_t² u = (1+s) Δu`, realized with
/// the `|ξ|^{-2}`-weighted functional on `V = (|ξ|û, D_t û)`; needs n ≥ 3.
pub fn l2_kirchhoff(dim: usize, delta: f64, data: DataFamily) -> Result<ProblemFamily> {
    let h1: CoeffFn = Arc::new(|_, _| 0.0);
    let h2: CoeffFn = Arc::new(|s, _| -(1.0 + s));
    let symbol = companion_symbol(vec![h1, h2], delta, 1.0);
    let weight = HermitianWeight::diagonal(&[1.0, 0.0], 2, dim)?;
    Ok(ProblemFamily {
        name: "l2_kirchhoff".into(),
        dim,
        symbol,
        weight,
        data,
        energy: None,
    })
}

/// Constant-coefficient wave system `A = [[0,1],[c²,0]]`: the symbol never
/// reads `s`, so Θ is independent of the input trajectory.
pub fn constant_wave(dim: usize, c: f64, data: DataFamily) -> Result<ProblemFamily> {
    let symbol = SymbolModel::new(2, 1.0, 0.0, move |_, _| {
        crate::CMat::from_row_slice(
            2,
            2,
            &[
                crate::C64::new(0.0, 0.0),
                crate::C64::new(1.0, 0.0),
                crate::C64::new(c * c, 0.0),
                crate::C64::new(0.0, 0.0),
            ],
        )
    });
    let weight = HermitianWeight::diagonal(&[1.0, 0.0], 0, dim)?;
    Ok(ProblemFamily {
        name: "constant_wave".into(),
        dim,
        symbol,
        weight,
        data,
        energy: None,
    })
}

impl ProblemFamily {
    pub fn with_data(&self, data: DataFamily) -> Self {
        let mut out = self.clone();
        out.data = data;
        out
    }

    pub fn with_amplitude(&self, amplitude: f64) -> Self {
        let mut out = self.clone();
        out.data = self.data.with_amplitude(amplitude);
        out
    }
}
