//! Random radial feeders and an independent dense solve of them.

use std::collections::BTreeMap;
use std::collections::HashMap;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tdfault::devices::{ZipCoefficients, ZipLoad};
use tdfault::netmodel::{Bus, LineBranch, NetworkModel, NetworkParts, Phase, PhaseSet, SourceEquivalent, Zone};
use tdfault::Complex64;

const S_BASE_MVA: f64 = 10.0;
const KV: f64 = 4.16;
/// Per-phase load ceiling that keeps every random feeder above 0.8 pu.
pub const LIGHT_KVA: f64 = 60.0;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Radial network of 2..=8 buses hanging off bus 0, some laterals carrying
/// fewer phases, constant-impedance loads on every phase of every non-source
/// bus.
pub fn random_radial(seed: u64, zip: ZipCoefficients, max_kva: f64) -> NetworkModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=8usize);
    let mut buses = vec![Bus {
        id: "b0".into(),
        base_kv_ll: KV,
        phases: PhaseSet::ABC,
        zone: Zone::Distribution,
    }];
    let mut lines = Vec::new();
    let mut loads = Vec::new();
    for k in 1..n {
        let parent = rng.random_range(0..k);
        let parent_phases = buses[parent].phases;
        let phases = if parent_phases.len() == 3 && rng.random_bool(0.7) {
            PhaseSet::ABC
        } else {
            let all = parent_phases.to_vec();
            let keep = rng.random_range(1..=all.len());
            PhaseSet::from_phases(all[..keep].iter().copied())
        };
        let id = format!("b{k}");
        buses.push(Bus {
            id: id.clone(),
            base_kv_ll: KV,
            phases,
            zone: Zone::Distribution,
        });
        let z1 = c(rng.random_range(0.05..0.8), rng.random_range(0.1..0.9));
        let z0 = c(z1.re * rng.random_range(1.5..3.5), z1.im * rng.random_range(2.0..4.0));
        lines.push(LineBranch {
            id: format!("l{k}"),
            from: buses[parent].id.clone(),
            to: id.clone(),
            length_km: rng.random_range(0.05..2.0),
            z1_per_km: z1,
            z0_per_km: z0,
            phases,
        });
        for p in phases.iter() {
            loads.push(ZipLoad {
                id: format!("ld{k}{p}"),
                bus: id.clone(),
                phase: p,
                s_nominal_kva: c(rng.random_range(0.0..max_kva), rng.random_range(-0.1 * max_kva..0.5 * max_kva)),
                coeffs: zip,
                v_nominal_pu: 1.0,
            });
        }
    }
    NetworkModel::new(NetworkParts {
        name: format!("radial-{seed}"),
        s_base_mva: S_BASE_MVA,
        f_nominal_hz: 60.0,
        feeder_head: "b0".into(),
        buses,
        lines,
        sources: vec![SourceEquivalent {
            bus: "b0".into(),
            v_set_pu: rng.random_range(0.95..1.05),
            angle_deg: rng.random_range(-30.0..30.0),
            z_internal_pu: c(rng.random_range(0.0..0.02), rng.random_range(0.005..0.1)),
        }],
        loads,
        frt_curves: BTreeMap::new(),
        ..NetworkParts::default()
    })
    .expect("valid radial network")
}

/// Dense nodal solve built from first principles: transposed-line phase
/// impedances from sequence values, loads as admittances, source as a
/// Norton equivalent.
pub fn oracle(net: &NetworkModel) -> HashMap<(String, Phase), Complex64> {
    let mut rows = Vec::new();
    for b in &net.buses {
        for p in b.phases.iter() {
            rows.push((b.id.clone(), p));
        }
    }
    let at: HashMap<(String, Phase), usize> = rows.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();
    let n = rows.len();
    let mut y = DMatrix::<Complex64>::zeros(n, n);
    let mut rhs = nalgebra::DVector::<Complex64>::zeros(n);
    let z_base = KV * KV / S_BASE_MVA;

    for l in &net.lines {
        let ph = l.phases.to_vec();
        let scale = l.length_km / z_base;
        let zs = (l.z0_per_km + 2.0 * l.z1_per_km) / 3.0 * scale;
        let zm = (l.z0_per_km - l.z1_per_km) / 3.0 * scale;
        let z = DMatrix::from_fn(ph.len(), ph.len(), |i, j| if i == j { zs } else { zm });
        let yl = z.try_inverse().expect("invertible line");
        for (i, pi) in ph.iter().enumerate() {
            for (j, pj) in ph.iter().enumerate() {
                let (fi, ti) = (at[&(l.from.clone(), *pi)], at[&(l.to.clone(), *pi)]);
                let (fj, tj) = (at[&(l.from.clone(), *pj)], at[&(l.to.clone(), *pj)]);
                y[(fi, fj)] += yl[(i, j)];
                y[(ti, tj)] += yl[(i, j)];
                y[(fi, tj)] -= yl[(i, j)];
                y[(ti, fj)] -= yl[(i, j)];
            }
        }
    }
    for ld in &net.loads {
        // per-phase power on a per-phase base of S_base / 3
        let s = ld.s_nominal_kva * 3.0 / (S_BASE_MVA * 1000.0);
        let r = at[&(ld.bus.clone(), ld.phase)];
        y[(r, r)] += s.conj() / (ld.v_nominal_pu * ld.v_nominal_pu);
    }
    let src = &net.sources[0];
    let ys = Complex64::new(1.0, 0.0) / src.z_internal_pu;
    for (k, p) in [Phase::A, Phase::B, Phase::C].into_iter().enumerate() {
        let e = Complex64::from_polar(src.v_set_pu, (src.angle_deg - 120.0 * k as f64).to_radians());
        let r = at[&(src.bus.clone(), p)];
        y[(r, r)] += ys;
        rhs[r] += e * ys;
    }
    let v = y.lu().solve(&rhs).expect("non-singular oracle system");
    rows.into_iter().zip(v.iter().copied()).collect()
}

