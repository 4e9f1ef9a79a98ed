//! Exact stochastic simulation, subprocess projections, likelihoods against
//! the unit-rate Poisson reference, reaction-path reconstruction, and the
//! conditional projection oracle.

use std::fmt::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::netmodel::{Kinetics, NetworkError, ReactionNetwork};

mod likelihood;
mod oracle;
mod project;
mod reconstruct;

pub use likelihood::{likelihood_groups, log_likelihood, LikelihoodGroups, LogLikelihoodBreakdown};
pub use oracle::{conditional_projection_test, FunctionalStat, ProjectionReport};
pub use project::{project_dstar, project_subprocess, SubprocessPath};
pub use reconstruct::{reconstruct_reaction_paths, side_scope, ReconstructedPaths, Side};

pub const DEFAULT_EVENT_CAP: u64 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SsaError {
    #[error("state has {0} entries, network has {1} species")]
    StateLength(usize, usize),
    #[error("negative count {value} for species {species}")]
    NegativeState { species: String, value: i64 },
    #[error("horizon must be positive and finite, got {0}")]
    BadHorizon(f64),
    #[error("time {t} is outside [0, {t_end}]")]
    TimeOutOfRange { t: f64, t_end: f64 },
    #[error("event cap of {cap} reached at time {time}; the process may be explosive")]
    Explosion { cap: u64, time: f64 },
    #[error("reaction {reaction} fired at time {time} with zero propensity; the likelihood is -inf")]
    ZeroPropensity { reaction: String, time: f64 },
    #[error("propensity of reaction {reaction} is {value}")]
    BadPropensity { reaction: String, value: f64 },
    #[error("trajectory is inconsistent with the network: {0}")]
    BadTrajectory(String),
    #[error("paths admit no consistent reconstruction: {0}")]
    Inconsistent(String),
    #[error("partition violates the reconstruction hypotheses: {0}")]
    Hypothesis(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Event {
    pub time: f64,
    pub reaction: usize,
}

/// One realization of the marked point process: the initial state and the
/// ordered (time, reaction) events up to the horizon.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub x0: Vec<i64>,
    pub events: Vec<Event>,
    pub t_end: f64,
    /// Total propensity reached zero before the horizon.
    pub absorbed: bool,
}

fn binomial(n: i64, k: u32) -> f64 {
    if n < k as i64 {
        return 0.0;
    }
    (0..k as i64).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

fn check_state(net: &ReactionNetwork, x: &[i64]) -> Result<(), SsaError> {
    if x.len() != net.n_species() {
        return Err(SsaError::StateLength(x.len(), net.n_species()));
    }
    match x.iter().position(|&v| v < 0) {
        Some(k) => Err(SsaError::NegativeState { species: net.species_id(k).to_string(), value: x[k] }),
        None => Ok(()),
    }
}

fn propensity_of(net: &ReactionNetwork, m: usize, x: &[i64]) -> f64 {
    let r = &net.reactions()[m];
    let g = match &r.kinetics {
        Kinetics::MassAction => r.reactants.iter().map(|t| binomial(x[t.species], t.coeff)).product(),
        Kinetics::Tabulated { entries, default } => {
            let levels: Vec<u64> = r.reactants.iter().map(|t| x[t.species] as u64).collect();
            *entries.get(&levels).unwrap_or(default)
        }
    };
    r.rate * g
}

fn propensities_into(net: &ReactionNetwork, x: &[i64], out: &mut [f64]) -> Result<(), SsaError> {
    for (m, slot) in out.iter_mut().enumerate() {
        let v = propensity_of(net, m, x);
        if !(v.is_finite() && v >= 0.0) {
            return Err(SsaError::BadPropensity { reaction: net.reaction_name(m).to_string(), value: v });
        }
        *slot = v;
    }
    Ok(())
}

/// λ_m(x) = c_m g_m(x) for every reaction, with mass-action g_m the product
/// of binomial(x_i, α_i) over the reactants.
pub fn propensity(net: &ReactionNetwork, x: &[i64]) -> Result<Vec<f64>, SsaError> {
    check_state(net, x)?;
    let mut out = vec![0.0; net.n_reactions()];
    propensities_into(net, x, &mut out)?;
    Ok(out)
}

fn apply(net: &ReactionNetwork, x: &mut [i64], m: usize) {
    for (xi, s) in x.iter_mut().zip(net.column(m)) {
        *xi += s;
    }
}

/// Random stream for one replica; streams for distinct replicas of the same
/// seed are independent, so serial and parallel runs agree.
pub fn replica_rng(seed: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimOptions {
    pub cap: u64,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions { cap: DEFAULT_EVENT_CAP }
    }
}

/// Direct-method SSA: exponential waiting times at the total propensity,
/// marks in proportion to the individual propensities, both evaluated at
/// the pre-jump state.
pub fn simulate_with(
    net: &ReactionNetwork,
    x0: &[i64],
    t_end: f64,
    rng: &mut impl Rng,
    opts: SimOptions,
) -> Result<Trajectory, SsaError> {
    check_state(net, x0)?;
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(SsaError::BadHorizon(t_end));
    }
    let mut x = x0.to_vec();
    let mut lambda = vec![0.0; net.n_reactions()];
    let mut events = Vec::new();
    let mut t = 0.0;
    let mut absorbed = false;
    loop {
        propensities_into(net, &x, &mut lambda)?;
        let total: f64 = lambda.iter().sum();
        if total <= 0.0 {
            absorbed = true;
            break;
        }
        let w: f64 = rng.sample(Exp1);
        let next = t + w / total;
        if next > t_end {
            break;
        }
        if events.len() as u64 >= opts.cap {
            return Err(SsaError::Explosion { cap: opts.cap, time: t });
        }
        let mut u = rng.random::<f64>() * total;
        let mut m = lambda.iter().rposition(|&l| l > 0.0).expect("positive total");
        for (j, &l) in lambda.iter().enumerate() {
            if u < l {
                m = j;
                break;
            }
            u -= l;
        }
        // a tie can only come from rounding; nudge to keep times strictly increasing
        t = if next > t { next } else { next.next_up() };
        apply(net, &mut x, m);
        if let Some(k) = x.iter().position(|&v| v < 0) {
            return Err(SsaError::NegativeState { species: net.species_id(k).to_string(), value: x[k] });
        }
        events.push(Event { time: t, reaction: m });
    }
    Ok(Trajectory { x0: x0.to_vec(), events, t_end, absorbed })
}

pub fn simulate(net: &ReactionNetwork, x0: &[i64], t_end: f64, seed: u64) -> Result<Trajectory, SsaError> {
    simulate_with(net, x0, t_end, &mut replica_rng(seed, 0), SimOptions::default())
}

/// Runs `replicas` independent simulations in parallel, replica r on stream
/// r of `seed`, and maps each through `f`. Results are in replica order.
pub fn replicate<T, F>(
    net: &ReactionNetwork,
    x0: &[i64],
    t_end: f64,
    replicas: u64,
    seed: u64,
    opts: SimOptions,
    f: F,
) -> Result<Vec<T>, SsaError>
where
    T: Send,
    F: Fn(u64, Trajectory) -> Result<T, SsaError> + Sync,
{
    (0..replicas)
        .into_par_iter()
        .map(|r| simulate_with(net, x0, t_end, &mut replica_rng(seed, r), opts).and_then(|traj| f(r, traj)))
        .collect()
}

/// M independent unit-rate Poisson streams on [0, t_end], merged in time
/// order; the event's `reaction` is its stream index.
pub fn poisson_reference_simulate(m: usize, t_end: f64, rng: &mut impl Rng) -> Vec<Event> {
    let mut events = Vec::new();
    for stream in 0..m {
        let mut t = 0.0;
        loop {
            let w: f64 = rng.sample(Exp1);
            t += w;
            if t > t_end {
                break;
            }
            events.push(Event { time: t, reaction: stream });
        }
    }
    events.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.reaction.cmp(&b.reaction)));
    events
}

impl Trajectory {
    /// X(t), right-continuous: events at exactly t are included.
    pub fn state_at(&self, net: &ReactionNetwork, t: f64) -> Result<Vec<i64>, SsaError> {
        if !(0.0..=self.t_end).contains(&t) {
            return Err(SsaError::TimeOutOfRange { t, t_end: self.t_end });
        }
        let mut x = self.x0.clone();
        for e in self.events.iter().take_while(|e| e.time <= t) {
            apply(net, &mut x, e.reaction);
        }
        Ok(x)
    }

    pub fn final_state(&self, net: &ReactionNetwork) -> Vec<i64> {
        self.state_at(net, self.t_end).expect("horizon is in range")
    }

    /// N_m(t) for every reaction.
    pub fn counts_at(&self, n_reactions: usize, t: f64) -> Vec<u64> {
        let mut n = vec![0; n_reactions];
        for e in self.events.iter().take_while(|e| e.time <= t) {
            n[e.reaction] += 1;
        }
        n
    }

    /// Event times of each reaction.
    pub fn reaction_times(&self, n_reactions: usize) -> Vec<Vec<f64>> {
        let mut out = vec![Vec::new(); n_reactions];
        for e in &self.events {
            out[e.reaction].push(e.time);
        }
        out
    }

    /// The trajectory restricted to [0, t].
    pub fn truncate(&self, t: f64) -> Trajectory {
        let events: Vec<Event> = self.events.iter().copied().take_while(|e| e.time <= t).collect();
        Trajectory { x0: self.x0.clone(), events, t_end: t.min(self.t_end), absorbed: false }
    }

    /// Checks the trajectory against a network: state length, strictly
    /// increasing times within the horizon, reaction indices in range and
    /// nonnegative intermediate states.
    pub fn validate(&self, net: &ReactionNetwork) -> Result<(), SsaError> {
        check_state(net, &self.x0)?;
        let mut x = self.x0.clone();
        let mut last = 0.0;
        for e in &self.events {
            if e.reaction >= net.n_reactions() {
                return Err(SsaError::BadTrajectory(format!("reaction index {} out of range", e.reaction)));
            }
            if !(e.time > last && e.time <= self.t_end) {
                return Err(SsaError::BadTrajectory(format!("event time {} out of order", e.time)));
            }
            last = e.time;
            apply(net, &mut x, e.reaction);
            check_state(net, &x)?;
        }
        Ok(())
    }

    /// `time,reaction` lines with a header.
    pub fn to_csv(&self, net: &ReactionNetwork) -> String {
        let mut out = String::from("time,reaction\n");
        for e in &self.events {
            writeln!(out, "{},{}", e.time, net.reaction_name(e.reaction)).unwrap();
        }
        out
    }

    pub fn to_json(&self, net: &ReactionNetwork) -> TrajectoryJson {
        TrajectoryJson {
            species: net.species().iter().map(|s| s.id.clone()).collect(),
            x0: self.x0.clone(),
            t_end: self.t_end,
            absorbed: self.absorbed,
            events: self
                .events
                .iter()
                .map(|e| EventJson { time: e.time, reaction: net.reaction_name(e.reaction).to_string() })
                .collect(),
            final_state: self.final_state(net),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EventJson {
    pub time: f64,
    pub reaction: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectoryJson {
    pub species: Vec<String>,
    pub x0: Vec<i64>,
    pub t_end: f64,
    pub absorbed: bool,
    pub events: Vec<EventJson>,
    pub final_state: Vec<i64>,
}

/// Sample mean and standard error of the mean.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
}

impl MeanSe {
    pub fn of(values: &[f64]) -> MeanSe {
        let n = values.len() as f64;
        if values.is_empty() {
            return MeanSe { mean: f64::NAN, se: f64::NAN };
        }
        let mean = values.iter().sum::<f64>() / n;
        if values.len() < 2 {
            return MeanSe { mean, se: f64::NAN };
        }
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        MeanSe { mean, se: (var / n).sqrt() }
    }

    /// |mean - target| in standard errors.
    pub fn z(&self, target: f64) -> f64 {
        (self.mean - target).abs() / self.se
    }
}

/// Per-species final-state and event-count statistics over replicas.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReplicaStats {
    pub replicas: u64,
    pub seed: u64,
    pub t_end: f64,
    pub species: Vec<String>,
    pub final_state: Vec<MeanSe>,
    pub events: MeanSe,
    pub absorbed: u64,
}

pub fn replica_stats(
    net: &ReactionNetwork,
    x0: &[i64],
    t_end: f64,
    replicas: u64,
    seed: u64,
    opts: SimOptions,
) -> Result<ReplicaStats, SsaError> {
    let runs = replicate(net, x0, t_end, replicas, seed, opts, |_, traj| {
        Ok((traj.final_state(net), traj.events.len() as f64, traj.absorbed))
    })?;
    let final_state = (0..net.n_species())
        .map(|k| MeanSe::of(&runs.iter().map(|r| r.0[k] as f64).collect::<Vec<_>>()))
        .collect();
    Ok(ReplicaStats {
        replicas,
        seed,
        t_end,
        species: net.species().iter().map(|s| s.id.clone()).collect(),
        final_state,
        events: MeanSe::of(&runs.iter().map(|r| r.1).collect::<Vec<_>>()),
        absorbed: runs.iter().filter(|r| r.2).count() as u64,
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::netmodel::fixtures::*;
    use crate::netmodel::parse_network;
    use proptest::prelude::*;

    pub fn example21_x0(net: &ReactionNetwork) -> Vec<i64> {
        let mut x = vec![0; net.n_species()];
        x[net.species_index("g").unwrap()] = 1;
        x[net.species_index("R").unwrap()] = 2;
        x[net.species_index("P").unwrap()] = 6;
        x
    }

    #[test]
    fn mass_action_propensities() {
        let net = parse_network("d: 2 P -> P2 ; c=0.5\nb: 0 -> X ; c=2").unwrap();
        let p = net.species_index("P").unwrap();
        let mut x = vec![0; 3];
        x[p] = 4;
        assert_eq!(propensity(&net, &x).unwrap(), vec![3.0, 2.0]);
        x[p] = 1;
        assert_eq!(propensity(&net, &x).unwrap()[0], 0.0);
        x[p] = -1;
        assert!(matches!(propensity(&net, &x), Err(SsaError::NegativeState { .. })));
        assert!(matches!(propensity(&net, &[0]), Err(SsaError::StateLength(1, 3))));
    }

    #[test]
    fn tabulated_propensity() {
        let text = r#"{"species":["X","Y"],"reactions":[{"name":"a","reactants":[{"species":"X"}],
            "products":[{"species":"Y"}],"rate":2.0,
            "kinetics":{"type":"tabulated","entries":[{"levels":[3],"value":0.5}],"default":0.0}}]}"#;
        let net: ReactionNetwork = serde_json::from_str(text).unwrap();
        assert_eq!(propensity(&net, &[3, 0]).unwrap(), vec![1.0]);
        assert_eq!(propensity(&net, &[2, 0]).unwrap(), vec![0.0]);
        let traj = simulate(&net, &[3, 0], 100.0, 1).unwrap();
        assert_eq!(traj.events.len(), 1);
        assert!(traj.absorbed);
    }

    #[test]
    fn tabulated_kinetics_cannot_drive_counts_negative() {
        let text = r#"{"species":["X"],"reactions":[{"name":"a","reactants":[{"species":"X"}],
            "products":[],"kinetics":{"type":"tabulated","entries":[],"default":1.0}}]}"#;
        let net: ReactionNetwork = serde_json::from_str(text).unwrap();
        assert!(matches!(simulate(&net, &[0], 10.0, 3), Err(SsaError::NegativeState { .. })));
    }

    #[test]
    fn explosion_guard_and_horizon() {
        let net = parse_network("a: X -> 2 X").unwrap();
        let mut rng = replica_rng(0, 0);
        let err = simulate_with(&net, &[1], 100.0, &mut rng, SimOptions { cap: 1000 }).unwrap_err();
        assert!(matches!(err, SsaError::Explosion { cap: 1000, .. }));
        assert!(matches!(simulate(&net, &[1], 0.0, 0), Err(SsaError::BadHorizon(_))));
        assert!(matches!(simulate(&net, &[1], f64::INFINITY, 0), Err(SsaError::BadHorizon(_))));
    }

    #[test]
    fn absorbing_state_stops_early() {
        let net = parse_network("die: X -> 0").unwrap();
        let traj = simulate(&net, &[5], 1e6, 11).unwrap();
        assert_eq!(traj.events.len(), 5);
        assert!(traj.absorbed);
        assert_eq!(traj.final_state(&net), vec![0]);
    }

    #[test]
    fn state_at_is_right_continuous() {
        let net = example21();
        let x0 = example21_x0(&net);
        let traj = simulate(&net, &x0, 5.0, 7).unwrap();
        assert!(!traj.events.is_empty());
        assert_eq!(traj.state_at(&net, 0.0).unwrap(), x0);
        let first = traj.events[0];
        let mut after = x0.clone();
        apply(&net, &mut after, first.reaction);
        assert_eq!(traj.state_at(&net, first.time).unwrap(), after);
        assert_eq!(traj.state_at(&net, first.time.next_down()).unwrap(), x0);
        assert!(matches!(traj.state_at(&net, 5.5), Err(SsaError::TimeOutOfRange { .. })));
        assert!(matches!(traj.state_at(&net, -1.0), Err(SsaError::TimeOutOfRange { .. })));
    }

    #[test]
    fn exports() {
        let net = theorem47();
        let traj = simulate(&net, &[3, 0, 0], 2.0, 5).unwrap();
        let csv = traj.to_csv(&net);
        assert!(csv.starts_with("time,reaction\n"));
        assert_eq!(csv.lines().count(), traj.events.len() + 1);
        let json = serde_json::to_value(traj.to_json(&net)).unwrap();
        assert_eq!(json["species"], serde_json::json!(["A", "D", "B"]));
        assert_eq!(json["events"].as_array().unwrap().len(), traj.events.len());
        assert_eq!(json["final_state"].as_array().unwrap().iter().map(|v| v.as_i64().unwrap()).sum::<i64>(), 3);
    }

    #[test]
    fn poisson_reference_streams() {
        let mut rng = replica_rng(1, 0);
        let ev = poisson_reference_simulate(3, 50.0, &mut rng);
        assert!(ev.windows(2).all(|w| w[0].time < w[1].time));
        assert!(ev.iter().all(|e| e.reaction < 3 && e.time <= 50.0));

        let counts: Vec<[f64; 2]> = (0..4000)
            .map(|r| {
                let ev = poisson_reference_simulate(2, 5.0, &mut replica_rng(2, r));
                let a = ev.iter().filter(|e| e.reaction == 0).count() as f64;
                [a, ev.len() as f64 - a]
            })
            .collect();
        let a: Vec<f64> = counts.iter().map(|c| c[0]).collect();
        let b: Vec<f64> = counts.iter().map(|c| c[1]).collect();
        assert!(MeanSe::of(&a).z(5.0) < 4.0);
        // independence: E[N_0 N_1] = 25
        let prod: Vec<f64> = counts.iter().map(|c| c[0] * c[1]).collect();
        assert!(MeanSe::of(&prod).z(25.0) < 4.0);
        assert!(MeanSe::of(&b).z(5.0) < 4.0);
    }

    #[test]
    fn replicas_match_serial_streams() {
        let net = theorem47();
        let par = replicate(&net, &[4, 0, 0], 3.0, 16, 9, SimOptions::default(), |_, t| Ok(t)).unwrap();
        for (r, t) in par.iter().enumerate() {
            let serial = simulate_with(&net, &[4, 0, 0], 3.0, &mut replica_rng(9, r as u64), SimOptions::default()).unwrap();
            assert_eq!(*t, serial);
        }
        assert_ne!(par[0], par[1]);
    }

    #[test]
    fn mean_se() {
        let m = MeanSe::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m.mean, 2.5);
        assert!((m.se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert!(MeanSe::of(&[]).mean.is_nan());
    }

    proptest! {
        #[test]
        fn path_identity_and_ordering(seed in 0u64..500) {
            let net = example21();
            let x0 = example21_x0(&net);
            let traj = simulate(&net, &x0, 3.0, seed).unwrap();
            traj.validate(&net).unwrap();
            let s = net.stoichiometry();
            for e in &traj.events {
                let n = traj.counts_at(net.n_reactions(), e.time);
                let x = traj.state_at(&net, e.time).unwrap();
                for k in 0..net.n_species() {
                    let sn: i64 = (0..net.n_reactions()).map(|m| s[k][m] * n[m] as i64).sum();
                    prop_assert_eq!(x[k], x0[k] + sn);
                }
            }
        }

        #[test]
        fn seed_determinism(seed in 0u64..200) {
            let net = example21();
            let x0 = example21_x0(&net);
            let a = serde_json::to_vec(&simulate(&net, &x0, 2.0, seed).unwrap().to_json(&net)).unwrap();
            let b = serde_json::to_vec(&simulate(&net, &x0, 2.0, seed).unwrap().to_json(&net)).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
