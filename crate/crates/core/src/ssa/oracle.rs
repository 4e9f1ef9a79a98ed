use rayon::prelude::*;
use serde::Serialize;

use super::{poisson_reference_simulate, project_dstar, project_subprocess, replica_rng, MeanSe, Trajectory};
use crate::netmodel::{parse_network, Block};

const NETWORK: &str = "f: A -> D\nr: D -> A\nirr: D -> B";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FunctionalStat {
    pub name: String,
    /// Mean of N_irr(t)·g - k·(N_r(t) + N_irr(t))·g over replicas.
    pub mean: f64,
    pub se: f64,
    /// |mean| / se
    pub z: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProjectionReport {
    pub t_end: f64,
    pub replicas: u64,
    pub seed: u64,
    /// k = 1/2 against D-measurable g; each must sit within 3 SE of zero.
    pub functionals: Vec<FunctionalStat>,
    /// k = 1/4 with g = N_r + N_irr; must sit at least 5 SE from zero.
    pub control: FunctionalStat,
    /// (1/2 - 1/4)·E[(N_r + N_irr)^2] = (2t + 4t^2)/4 under unit rates.
    pub control_expected: f64,
    /// Largest |N_irr(t) - N̂_irr(t)| with N̂_irr read off the D\* path.
    pub reconstruction_max_residual: u64,
    pub passed: bool,
}

struct Replica {
    /// g values in functional order, followed by N_irr and N_r + N_irr at t.
    g: [f64; 6],
    irr: f64,
    merged: f64,
    residual: u64,
}

/// Under M independent unit-rate Poisson processes for f: A→D, r: D→A and
/// irr: D→B, the D history sees only N_f and N_r + N_irr, and the
/// projection of N_irr onto it is half the merged count. The difference
/// N_irr - (N_r + N_irr)/2 must then be orthogonal to every D-measurable g.
/// N^{D\*} separates r from irr, so there N_irr is recovered exactly.
pub fn conditional_projection_test(t_end: f64, replicas: u64, seed: u64) -> ProjectionReport {
    let net = parse_network(NETWORK).expect("fixed network");
    let s = |ids: &[&str]| net.species_set(ids).expect("fixed species");
    let p = net.dstar_partition(&s(&["A"]), &s(&["B"]), &s(&["D"])).expect("fixed partition");
    let irr = net.reaction_index("irr").expect("irr");
    let f = net.reaction_index("f").expect("f");

    let runs: Vec<Replica> = (0..replicas)
        .into_par_iter()
        .map(|rep| {
            let events = poisson_reference_simulate(net.n_reactions(), t_end, &mut replica_rng(seed, rep));
            // counts may go negative under the reference measure; only the
            // counting paths are used
            let traj = Trajectory { x0: vec![0; net.n_species()], events, t_end, absorbed: false };
            let nd = project_subprocess(&traj, &net, &p.d).expect("D is nonempty");
            let cf = nd.class_of(f).expect("f changes D");
            let cm = nd.class_of(irr).expect("irr changes D");
            let at = |t: f64| {
                let n = nd.counts_at(t);
                (n[cf] as f64, n[cm] as f64)
            };
            let (nf, nm) = at(t_end);
            let (hf, hm) = at(t_end / 2.0);

            let dstar = project_dstar(&traj, &net, &p);
            let blocks = dstar.blocks.as_ref().expect("D* blocks");
            let c_irr = (0..dstar.classes.len()).find(|&c| blocks[c] == Block::B).expect("irr class");
            let est = dstar.counts_at(t_end)[c_irr];
            let truth = traj.counts_at(net.n_reactions(), t_end)[irr];
            Replica {
                g: [1.0, nf, nm, hf, hm, nf * nm],
                irr: truth as f64,
                merged: nm,
                residual: truth.abs_diff(est),
            }
        })
        .collect();

    let stat = |name: &str, k: f64, g: &dyn Fn(&Replica) -> f64| {
        let y: Vec<f64> = runs.iter().map(|r| (r.irr - k * r.merged) * g(r)).collect();
        let m = MeanSe::of(&y);
        let z = m.mean.abs() / m.se;
        FunctionalStat { name: name.to_string(), mean: m.mean, se: m.se, z, pass: z <= 3.0 }
    };
    let names = ["1", "N_f(t)", "N_r+N_irr(t)", "N_f(t/2)", "N_r+N_irr(t/2)", "N_f(t)*(N_r+N_irr)(t)"];
    let functionals: Vec<FunctionalStat> =
        names.iter().enumerate().map(|(i, name)| stat(name, 0.5, &|r: &Replica| r.g[i])).collect();
    let mut control = stat("N_r+N_irr(t), k=1/4", 0.25, &|r: &Replica| r.merged);
    control.pass = control.z >= 5.0;
    let reconstruction_max_residual = runs.iter().map(|r| r.residual).max().unwrap_or(0);
    let passed = functionals.iter().all(|f| f.pass) && control.pass && reconstruction_max_residual == 0;
    ProjectionReport {
        t_end,
        replicas,
        seed,
        functionals,
        control,
        control_expected: (2.0 * t_end + 4.0 * t_end * t_end) / 4.0,
        reconstruction_max_residual,
        passed,
    }
}
