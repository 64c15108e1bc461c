//! Rooftop PV placement over the feeder's load points.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::devices::{Ibr, IbrKind};
use crate::netmodel::{NetworkModel, NetworkParts, Phase};

#[derive(Debug, Clone, PartialEq)]
pub struct RooftopPlan {
    pub count: usize,
    pub total_kw: f64,
    /// 0 keeps file order; any other value shuffles candidates.
    pub seed: u64,
    pub i_limit_pu: f64,
    pub frt_curve: String,
    pub id_prefix: String,
}

impl Default for RooftopPlan {
    fn default() -> Self {
        Self {
            count: 86,
            total_kw: 4500.0,
            seed: 0,
            i_limit_pu: Ibr::DEFAULT_ROOFTOP_I_LIMIT_PU,
            frt_curve: super::BUILTIN_CURVE.to_string(),
            id_prefix: "RPV".to_string(),
        }
    }
}

/// Replace any existing rooftop units with `plan.count` single-phase units
/// of equal size.
///
/// Units are dealt to phases a, b, c in turn. Each phase keeps its own
/// cursor over the distinct buses that carry a load on that phase, wrapping
/// when the list runs out.
pub fn place_rooftops(net: &NetworkModel, plan: &RooftopPlan) -> Result<NetworkModel, String> {
    let mut candidates: [Vec<String>; 3] = Default::default();
    for load in &net.loads {
        let list = &mut candidates[load.phase.index()];
        if !list.contains(&load.bus) {
            list.push(load.bus.clone());
        }
    }
    if plan.seed != 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
        for list in &mut candidates {
            list.shuffle(&mut rng);
        }
    }
    let unit_kw = plan.total_kw / plan.count.max(1) as f64;
    let mut parts: NetworkParts = net.clone().into_parts();
    parts.ibrs.retain(|u| u.kind != IbrKind::RooftopPv);
    let mut cursor = [0usize; 3];
    let width = plan.count.to_string().len().max(2);
    for k in 0..plan.count {
        let phase = Phase::from_index(k % 3);
        let list = &candidates[phase.index()];
        if list.is_empty() {
            return Err(format!("no load on phase {phase} to host a rooftop unit"));
        }
        let bus = list[cursor[phase.index()] % list.len()].clone();
        cursor[phase.index()] += 1;
        parts.ibrs.push(Ibr {
            id: format!("{}{:0width$}", plan.id_prefix, k + 1),
            bus,
            phases: crate::netmodel::PhaseSet::single(phase),
            kind: IbrKind::RooftopPv,
            s_rated_kva: unit_kw,
            p_set_kw: unit_kw,
            q_set_kvar: 0.0,
            i_limit_pu: plan.i_limit_pu,
            frt_curve: plan.frt_curve.clone(),
        });
    }
    NetworkModel::new(parts).map_err(|e| e.to_string())
}
