//! Browser bindings: each export returns a JSON string for www/index.html.

use serde_json::{json, Value};
use toda_core::ansatz::{assemble_ansatz, schedule, BlowupConfig};
use toda_core::bubbles::{expansion_pu, project_bubble};
use toda_core::cartan::{build_cartan, Family};
use toda_core::geometry::{make_surface, MeridianSpace, Model, Pole};
use toda_core::nonlinear::{fixed_point_solve, SolverOptions};
use toda_core::numerics::GridSpec;
use wasm_bindgen::prelude::*;

type Out = Result<Value, String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Keeps positive radii only so the page can use a log axis.
fn profile(nodes: &[f64], fields: &[&[f64]]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let keep: Vec<usize> = (0..nodes.len()).filter(|&i| nodes[i] > 0.0).collect();
    (
        keep.iter().map(|&i| nodes[i]).collect(),
        fields
            .iter()
            .map(|f| keep.iter().map(|&i| f[i]).collect())
            .collect(),
    )
}

/// Projected bubble PU on the unit disk against its asymptotic expansion.
pub fn projected_bubble_value(alpha: f64, delta: f64) -> Out {
    if !(delta > 0.0 && delta < 0.1) {
        return Err("delta must lie in (0, 0.1)".into());
    }
    let surf = make_surface(Model::UnitDisk, false);
    let k = (alpha / 2.0).floor() as u32 + 1;
    let space = MeridianSpace::new(
        &surf,
        &[Pole::North],
        &[vec![delta]],
        Some(0.24),
        &GridSpec::default(),
        k,
    )
    .map_err(err)?;
    let pu = project_bubble(&space, 0, alpha, delta).map_err(err)?;
    let ex = expansion_pu(&space, 0, alpha, delta);
    let (r, f) = profile(space.nodes(), &[&pu.values, &ex.values]);
    Ok(json!({
        "alpha": alpha,
        "delta": delta,
        "r": r,
        "pu": f[0],
        "expansion": f[1],
        "sup_difference": pu.sup_difference(&ex),
    }))
}

/// Scales, d coefficients and annuli at the disk center.
pub fn concentration_schedule_value(family: &str, rank: usize, eps: f64) -> Out {
    let fam: Family = family.parse().map_err(err)?;
    let cd = build_cartan(fam, rank).map_err(err)?;
    let k = (cd.alphas[rank - 1] / 2 + 1) as u32;
    let q: Vec<f64> = (0..rank).map(|i| cd.q_f64(i)).collect();
    let alphas = cd.alphas.clone();
    let cfg = BlowupConfig::new(
        cd,
        make_surface(Model::UnitDisk, true),
        vec![Pole::North],
        k,
        eps,
    );
    let s = schedule(&cfg).map_err(err)?;
    Ok(json!({
        "family": fam.to_string(),
        "rank": rank,
        "k": k,
        "eps": eps,
        "alpha": alphas,
        "q": q,
        "d": s.d.values[0],
        "delta": s.delta[0],
        "annuli": s.annuli[0].iter().map(|(a, b)| (*a, b.is_finite().then_some(*b))).collect::<Vec<_>>(),
        "threshold": s.threshold,
    }))
}

/// Full SU(3) solve with one blow-up point at the disk center.
pub fn solve_su3_disk_value(eps: f64) -> Out {
    if !(1e-6..=5e-2).contains(&eps) {
        return Err("eps must lie in [1e-6, 5e-2]".into());
    }
    let cfg = BlowupConfig::new(
        build_cartan(Family::A, 2).map_err(err)?,
        make_surface(Model::UnitDisk, true),
        vec![Pole::North],
        3,
        eps,
    );
    let ans = assemble_ansatz(&cfg).map_err(err)?;
    let (st, rep) = fixed_point_solve(&ans, SolverOptions::default()).map_err(err)?;
    let (r, f) = profile(ans.space.nodes(), &[&rep.u[0], &rep.u[1]]);
    Ok(json!({
        "eps": eps,
        "iterations": st.iterations,
        "ratios": st.ratios,
        "masses": rep.masses,
        "limits": rep.mass_limits,
        "mass_deviation": rep.mass_deviation,
        "final_residual": rep.final_residual,
        "r": r,
        "u": f,
    }))
}

fn export(v: Out) -> Result<String, JsError> {
    v.map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn projected_bubble(alpha: f64, delta: f64) -> Result<String, JsError> {
    export(projected_bubble_value(alpha, delta))
}

#[wasm_bindgen]
pub fn concentration_schedule(family: &str, rank: usize, eps: f64) -> Result<String, JsError> {
    export(concentration_schedule_value(family, rank, eps))
}

#[wasm_bindgen]
pub fn solve_su3_disk(eps: f64) -> Result<String, JsError> {
    export(solve_su3_disk_value(eps))
}
