//! Battery, extension to mu*K_n, amalgamation and detachment in one call.

use crate::conditions::{ConditionReport, EnclosureParams, Regime};
use crate::decomp::{verify_enclosing, Decomposition, Enclosing};
use crate::detach::{build_amalgamated_triad, fair_detach, DetachStats};
use crate::error::{Error, Result};
use crate::extend::{enclose_in_mu_kn, ExtensionPath, ExtensionTrace};

#[derive(Clone, Debug)]
pub struct EnclosureOutcome {
    pub regime: Regime,
    pub report: ConditionReport,
    /// The intermediate decomposition of mu*K_n.
    pub extended: Decomposition,
    pub trace: ExtensionTrace,
    pub detach: DetachStats,
    pub enclosing: Enclosing,
}

/// Encloses `g` in a 2-edge-connected r-factorization of mu*K_m, or reports
/// the first failing condition.
pub fn enclose(g: &Decomposition, params: &EnclosureParams, seed: u64, budget: u64) -> Result<EnclosureOutcome> {
    let regime = Regime::select(params).ok_or_else(|| {
        Error::OutOfRegime(format!(
            "n = {}, m = {}, lambda = {}, mu = {}, r = {}",
            params.n, params.m, params.lambda, params.mu, params.r
        ))
    })?;
    let report = regime.battery(g, params)?;
    report.require()?;
    let (extended, trace) = match regime {
        Regime::Direct => (g.clone(), ExtensionTrace::default()),
        Regime::B => enclose_in_mu_kn(g, params, ExtensionPath::B, seed)?,
        Regime::C => enclose_in_mu_kn(g, params, ExtensionPath::C, seed)?,
        Regime::Padding => enclose_in_mu_kn(g, params, ExtensionPath::Padding, seed)?,
    };
    let (outer, detach) = if params.m == params.n {
        (extended.clone(), DetachStats::default())
    } else {
        let triad = build_amalgamated_triad(&extended, params)?;
        let w = fair_detach(&triad, params, seed, budget)?;
        (w.result, w.stats)
    };
    let enclosing = Enclosing::new(outer);
    let check = verify_enclosing(g, &enclosing, params)?;
    if !check.is_valid() {
        return Err(Error::Inconsistency(format!(
            "constructed enclosing fails verification: {:?}",
            check.diagnostics
        )));
    }
    Ok(EnclosureOutcome {
        regime,
        report,
        extended,
        trace,
        detach,
        enclosing,
    })
}
