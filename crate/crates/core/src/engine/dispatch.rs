use serde::{Deserialize, Serialize};

use crate::devices::IbrKind;
use crate::netmodel::NetworkModel;

/// Load plus battery charging, kW. This is the denominator of the PLR.
pub fn effective_load_kw(net: &NetworkModel) -> f64 {
    let load: f64 = net.loads.iter().map(|l| l.s_nominal_kva.re).sum();
    let charging: f64 = net
        .ibrs
        .iter()
        .filter(|u| u.kind == IbrKind::Bess && u.p_set_kw < 0.0)
        .map(|u| -u.p_set_kw)
        .sum();
    load + charging
}

/// Nameplate of all PV units (farm and rooftop), kW at unity power factor.
pub fn installed_pv_kw(net: &NetworkModel) -> f64 {
    net.ibrs.iter().filter(|u| u.kind.is_pv()).map(|u| u.s_rated_kva).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dispatch {
    pub plr: f64,
    pub effective_load_kw: f64,
    pub installed_pv_kw: f64,
    /// Common fraction of nameplate every PV unit is set to.
    pub factor: f64,
    /// The requested output exceeded the nameplate and was capped.
    pub clamped: bool,
}

impl Dispatch {
    pub fn pv_output_kw(&self) -> f64 {
        self.factor * self.installed_pv_kw
    }
}

/// Set every PV unit to the same fraction of its nameplate so that total PV
/// output equals `plr` times the effective load. Batteries are untouched.
pub fn apply_plr(net: &NetworkModel, plr: f64) -> (NetworkModel, Dispatch) {
    let load = effective_load_kw(net);
    let installed = installed_pv_kw(net);
    let wanted = if installed > 0.0 { plr * load / installed } else { 0.0 };
    let factor = wanted.clamp(0.0, 1.0);
    let mut out = net.clone();
    for u in out.ibrs.iter_mut().filter(|u| u.kind.is_pv()) {
        u.p_set_kw = factor * u.s_rated_kva;
    }
    let dispatch = Dispatch {
        plr,
        effective_load_kw: load,
        installed_pv_kw: installed,
        factor,
        clamped: wanted > 1.0 || (installed == 0.0 && plr * load > 0.0),
    };
    (out, dispatch)
}
