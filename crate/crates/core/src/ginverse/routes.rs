use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ginverse::{core_ep, core_inverse, group_inverse, weak_group, weighted_core_ep};
use crate::numeric::{
    moore_penrose, null_basis_with_rank, oblique_projector, orthogonal_projector,
    range_basis_with_dim, relative_distance, ComplexMatrix, NumericContext,
};
use crate::spectral::{core_subspace, drazin, w_drazin};

/// Independent ways of computing the weighted weak group inverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Route {
    #[serde(rename = "DEF")]
    Def,
    #[serde(rename = "GEOM")]
    Geom,
    #[serde(rename = "REP_I")]
    RepI,
    #[serde(rename = "REP_II")]
    RepII,
    #[serde(rename = "REP_III")]
    RepIII,
    #[serde(rename = "REP_IV")]
    RepIV,
    #[serde(rename = "REP_V")]
    RepV,
    #[serde(rename = "REP_VI")]
    RepVI,
    #[serde(rename = "REP_VII")]
    RepVII,
    #[serde(rename = "PRODUCT")]
    Product,
    #[serde(rename = "TRANSFER")]
    Transfer,
}

impl Route {
    pub const ALL: [Route; 11] = [
        Route::Def,
        Route::Geom,
        Route::RepI,
        Route::RepII,
        Route::RepIII,
        Route::RepIV,
        Route::RepV,
        Route::RepVI,
        Route::RepVII,
        Route::Product,
        Route::Transfer,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Route::Def => "DEF",
            Route::Geom => "GEOM",
            Route::RepI => "REP_I",
            Route::RepII => "REP_II",
            Route::RepIII => "REP_III",
            Route::RepIV => "REP_IV",
            Route::RepV => "REP_V",
            Route::RepVI => "REP_VI",
            Route::RepVII => "REP_VII",
            Route::Product => "PRODUCT",
            Route::Transfer => "TRANSFER",
        }
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Results of every route, the `DEF` result as reference, and the largest
/// relative distance between any two entries.
#[derive(Clone, Debug)]
pub struct RouteTable {
    pub entries: BTreeMap<Route, ComplexMatrix>,
    pub reference: ComplexMatrix,
    pub max_pairwise_residual: f64,
}

impl RouteTable {
    fn from_entries(entries: BTreeMap<Route, ComplexMatrix>) -> Self {
        let reference = entries[&Route::Def].clone();
        let values: Vec<&ComplexMatrix> = entries.values().collect();
        let mut max = 0.0f64;
        for (i, x) in values.iter().enumerate() {
            for y in &values[i + 1..] {
                max = max.max(relative_distance(x, y));
            }
        }
        Self {
            entries,
            reference,
            max_pairwise_residual: max,
        }
    }

    /// Relative distance of each route to the reference.
    pub fn residuals_to_reference(&self) -> BTreeMap<Route, f64> {
        self.entries
            .iter()
            .map(|(r, m)| (*r, relative_distance(m, &self.reference)))
            .collect()
    }
}

fn route<T>(r: Route, f: impl FnOnce() -> Result<T>) -> Result<T> {
    f().map_err(|e| e.in_route(r))
}

/// The weighted weak group inverse by all eleven routes.
pub fn wwg_representations(a: &ComplexMatrix, w: &ComplexMatrix, ctx: &NumericContext) -> Result<RouteTable> {
    let awd = w_drazin(a, w, ctx)?;
    let wcep = weighted_core_ep(a, w, ctx)?;
    let aw = a * w;
    let wa = w * a;
    // every range below has the dimension of the core part
    let (_, r_aw) = core_subspace(&aw, ctx)?;
    let r = r_aw.dim();
    let mut out = BTreeMap::new();

    out.insert(
        Route::Def,
        route(Route::Def, || {
            let x = &wcep * w;
            Ok(&(&x * &x) * a)
        })?,
    );

    // P_{R(W A^{d,W}), N(A^{ⓓ,W} W A)}
    let wcep_wa = &(&wcep * w) * a;
    let proj = route(Route::RepI, || {
        let l = range_basis_with_dim(&(w * &awd), r, ctx)?;
        let m = null_basis_with_rank(&wcep_wa, r, ctx)?;
        oblique_projector(&l, &m, ctx)
    })?;

    out.insert(
        Route::Geom,
        route(Route::Geom, || {
            // B = C Y with C spanning R(A^{d,W}) and W A W C Y = P
            let c = range_basis_with_dim(&awd, r, ctx)?;
            let wawc = &(&wa * w) * c.frame();
            Ok(c.frame() * &moore_penrose(&wawc, ctx) * &proj)
        })?,
    );
    out.insert(Route::RepI, &wcep * &proj);
    out.insert(Route::RepII, &awd * &proj);

    // (W P_{R((AW)^d)})^†
    let w_pr_pinv = moore_penrose(&(w * &orthogonal_projector(&r_aw)), ctx);
    let tail = &(&(&aw * &wcep) * w) * a;

    out.insert(
        Route::RepIII,
        route(Route::RepIII, || {
            let inner = &(&wa * &core_ep(&wa, ctx)?) * &wa;
            Ok(&w_pr_pinv * &group_inverse(&inner, ctx)?)
        })?,
    );
    out.insert(
        Route::RepIV,
        route(Route::RepIV, || Ok(&core_ep(&(&aw * &aw), ctx)? * &tail))?,
    );
    out.insert(
        Route::RepV,
        route(Route::RepV, || {
            let d = drazin(&aw, ctx)?;
            Ok(&(&(&d * &d) * &w_pr_pinv) * &wa)
        })?,
    );
    out.insert(
        Route::RepVI,
        route(Route::RepVI, || {
            Ok(&(&w_pr_pinv * &core_ep(&(&wa * &wa), ctx)?) * &wa)
        })?,
    );
    out.insert(
        Route::RepVII,
        route(Route::RepVII, || {
            let d = drazin(&aw, ctx)?;
            let m = &(&(&aw * &aw) * &aw) * &d;
            let ci = core_inverse(&m, ctx).map_err(|e| match e {
                Error::IndexTooLarge { index } => Error::DecompositionFailure(format!(
                    "(AW)^3 (AW)^d has index {index}, expected at most 1"
                )),
                other => other,
            })?;
            Ok(&ci * &tail)
        })?,
    );
    out.insert(
        Route::Product,
        route(Route::Product, || {
            Ok(&(&weak_group(&aw, ctx)? * a) * &weak_group(&wa, ctx)?)
        })?,
    );
    out.insert(
        Route::Transfer,
        route(Route::Transfer, || {
            let g = weak_group(&wa, ctx)?;
            Ok(a * &(&g * &g))
        })?,
    );
    Ok(RouteTable::from_entries(out))
}
