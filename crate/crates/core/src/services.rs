//! Services, communities and their JSON document format.
//!
//! A nondeterministic service is totalized over the community alphabet with
//! an absorbing, never-final error state: any `(state, action)` pair without a
//! declared transition leads there. Stochastic services are not totalized;
//! undeclared pairs are simply unavailable.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::num::Scalar;

/// Index of a service-local state. The error state of a nondeterministic
/// service is `num_states()`.
pub type LocalState = usize;

pub const ERROR_STATE_NAME: &str = "sigma_u";

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ServiceError {
    #[error("invalid community document: {0}")]
    Schema(String),
    #[error("service `{service}`: unknown state `{state}`")]
    UnknownState { service: String, state: String },
    #[error("service `{service}`: state `{state}` declared twice")]
    DuplicateState { service: String, state: String },
    #[error("service `{service}` has no states")]
    NoStates { service: String },
    #[error("service `{service}`: distribution of ({from}, {action}) sums to {sum}")]
    Distribution {
        service: String,
        from: String,
        action: String,
        sum: f64,
    },
    #[error("service `{service}`: non-positive probability {prob} in ({from}, {action})")]
    NonPositiveProbability {
        service: String,
        from: String,
        action: String,
        prob: f64,
    },
    #[error("service `{service}`: non-positive cost {cost} on ({from}, {action})")]
    NonPositiveCost {
        service: String,
        from: String,
        action: String,
        cost: f64,
    },
    #[error("service `{service}`: ({from}, {action}) declared more than once")]
    DuplicateTransition {
        service: String,
        from: String,
        action: String,
    },
    #[error("duplicate service name `{0}`")]
    DuplicateName(String),
    #[error("community has no services")]
    EmptyCommunity,
    #[error("community alphabet is empty")]
    EmptyAlphabet,
    #[error("service `{service}`: action `{action}` unavailable in state `{state}`")]
    ActionUnavailable {
        service: String,
        state: String,
        action: String,
    },
    #[error("expected a {expected} community, document declares {found}")]
    ModeMismatch { expected: Mode, found: Mode },
}

/// Common read access to both service kinds.
pub trait ServiceModel {
    fn name(&self) -> &str;
    fn state_names(&self) -> &[String];
    fn initial(&self) -> LocalState;
    fn is_final(&self, state: LocalState) -> bool;
    /// Actions with at least one declared transition, sorted.
    fn actions(&self) -> &BTreeSet<String>;
    fn num_transitions(&self) -> usize;

    fn num_states(&self) -> usize {
        self.state_names().len()
    }

    fn state_name(&self, state: LocalState) -> &str {
        self.state_names()
            .get(state)
            .map(String::as_str)
            .unwrap_or(ERROR_STATE_NAME)
    }

    fn state_index(&self, name: &str) -> Option<LocalState> {
        self.state_names().iter().position(|s| s == name)
    }
}

/// State skeleton shared by both service kinds.
#[derive(Clone, Debug, PartialEq)]
struct Skeleton {
    name: String,
    states: Vec<String>,
    initial: LocalState,
    finals: Vec<bool>,
    actions: BTreeSet<String>,
}

impl Skeleton {
    fn new(
        name: &str,
        states: &[&str],
        initial: &str,
        finals: &[&str],
    ) -> Result<Self, ServiceError> {
        if states.is_empty() {
            return Err(ServiceError::NoStates {
                service: name.into(),
            });
        }
        let mut seen = BTreeSet::new();
        for s in states {
            if !seen.insert(*s) {
                return Err(ServiceError::DuplicateState {
                    service: name.into(),
                    state: s.to_string(),
                });
            }
        }
        let mut skeleton = Skeleton {
            name: name.into(),
            states: states.iter().map(|s| s.to_string()).collect(),
            initial: 0,
            finals: vec![false; states.len()],
            actions: BTreeSet::new(),
        };
        skeleton.initial = skeleton.lookup(initial)?;
        for f in finals {
            let idx = skeleton.lookup(f)?;
            skeleton.finals[idx] = true;
        }
        Ok(skeleton)
    }

    fn lookup(&self, state: &str) -> Result<LocalState, ServiceError> {
        self.states
            .iter()
            .position(|s| s == state)
            .ok_or_else(|| ServiceError::UnknownState {
                service: self.name.clone(),
                state: state.into(),
            })
    }
}

/// Nondeterministic service `⟨Σ, A, σ0, F, δ⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct Service {
    skeleton: Skeleton,
    transitions: BTreeMap<(LocalState, String), Vec<LocalState>>,
}

impl Service {
    /// Builds a service from state names and `(from, action, to)` triples.
    pub fn new(
        name: &str,
        states: &[&str],
        initial: &str,
        finals: &[&str],
        transitions: &[(&str, &str, &str)],
    ) -> Result<Self, ServiceError> {
        let mut skeleton = Skeleton::new(name, states, initial, finals)?;
        let mut table: BTreeMap<(LocalState, String), Vec<LocalState>> = BTreeMap::new();
        for (from, action, to) in transitions {
            let (from, to) = (skeleton.lookup(from)?, skeleton.lookup(to)?);
            skeleton.actions.insert(action.to_string());
            let succ = table.entry((from, action.to_string())).or_default();
            if let Err(pos) = succ.binary_search(&to) {
                succ.insert(pos, to);
            }
        }
        Ok(Service {
            skeleton,
            transitions: table,
        })
    }

    pub fn error_state(&self) -> LocalState {
        self.num_states()
    }

    /// Totalized successor set: never empty, the error state stands in for
    /// undeclared moves and is absorbing.
    pub fn step_nondet(&self, state: LocalState, action: &str) -> Vec<LocalState> {
        if state >= self.num_states() {
            return vec![self.error_state()];
        }
        match self.transitions.get(&(state, action.to_string())) {
            Some(succ) => succ.clone(),
            None => vec![self.error_state()],
        }
    }

    /// Declared transitions as `(from, action, to)` index triples.
    pub fn transitions(&self) -> impl Iterator<Item = (LocalState, &str, LocalState)> + '_ {
        self.transitions
            .iter()
            .flat_map(|((from, a), succ)| succ.iter().map(move |&to| (*from, a.as_str(), to)))
    }
}

impl ServiceModel for Service {
    fn name(&self) -> &str {
        &self.skeleton.name
    }
    fn state_names(&self) -> &[String] {
        &self.skeleton.states
    }
    fn initial(&self) -> LocalState {
        self.skeleton.initial
    }
    fn is_final(&self, state: LocalState) -> bool {
        self.skeleton.finals.get(state).copied().unwrap_or(false)
    }
    fn actions(&self) -> &BTreeSet<String> {
        &self.skeleton.actions
    }
    fn num_transitions(&self) -> usize {
        self.transitions.values().map(Vec::len).sum()
    }
}

/// Distribution over successor states (sorted by state, all probabilities
/// positive) and the strictly positive cost of the move.
#[derive(Clone, Debug, PartialEq)]
pub struct StochasticTransition<T> {
    pub distribution: Vec<(LocalState, T)>,
    pub cost: T,
}

/// Stochastic service `⟨Σ, A, σ0, F, P, C⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct StochasticService<T> {
    skeleton: Skeleton,
    transitions: BTreeMap<(LocalState, String), StochasticTransition<T>>,
}

fn sum_tolerance<T: Scalar>() -> T {
    T::from_f64_lossy(1e-9).max(T::epsilon() * T::from_f64_lossy(16.0))
}

/// `(from, action, cost, [(to, probability)])`.
pub type StochasticRow<'a, T> = (&'a str, &'a str, T, &'a [(&'a str, T)]);

impl<T: Scalar> StochasticService<T> {
    /// Builds a service from [`StochasticRow`] entries.
    pub fn new(
        name: &str,
        states: &[&str],
        initial: &str,
        finals: &[&str],
        transitions: &[StochasticRow<'_, T>],
    ) -> Result<Self, ServiceError> {
        let mut skeleton = Skeleton::new(name, states, initial, finals)?;
        let mut table = BTreeMap::new();
        for (from_name, action, cost, dist) in transitions {
            let from = skeleton.lookup(from_name)?;
            let describe = || (name.to_string(), from_name.to_string(), action.to_string());
            // NaN costs are rejected too
            if *cost <= T::zero() || cost.is_nan() {
                let (service, from, action) = describe();
                return Err(ServiceError::NonPositiveCost {
                    service,
                    from,
                    action,
                    cost: cost.to_f64_lossy(),
                });
            }
            let mut merged: BTreeMap<LocalState, T> = BTreeMap::new();
            for (to, p) in dist.iter() {
                if *p <= T::zero() || p.is_nan() {
                    let (service, from, action) = describe();
                    return Err(ServiceError::NonPositiveProbability {
                        service,
                        from,
                        action,
                        prob: p.to_f64_lossy(),
                    });
                }
                let entry = merged.entry(skeleton.lookup(to)?).or_insert_with(T::zero);
                *entry = *entry + *p;
            }
            let sum: T = crate::num::compensated_sum(merged.values().copied());
            if (sum - T::one()).abs() > sum_tolerance::<T>() {
                let (service, from, action) = describe();
                return Err(ServiceError::Distribution {
                    service,
                    from,
                    action,
                    sum: sum.to_f64_lossy(),
                });
            }
            let key = (from, action.to_string());
            if table.contains_key(&key) {
                let (service, from, action) = describe();
                return Err(ServiceError::DuplicateTransition {
                    service,
                    from,
                    action,
                });
            }
            skeleton.actions.insert(action.to_string());
            table.insert(
                key,
                StochasticTransition {
                    distribution: merged.into_iter().collect(),
                    cost: *cost,
                },
            );
        }
        Ok(StochasticService {
            skeleton,
            transitions: table,
        })
    }

    /// Declared distribution and cost of `action` in `state`.
    pub fn step_stochastic(
        &self,
        state: LocalState,
        action: &str,
    ) -> Result<&StochasticTransition<T>, ServiceError> {
        self.transitions
            .get(&(state, action.to_string()))
            .ok_or_else(|| ServiceError::ActionUnavailable {
                service: self.name().into(),
                state: self.state_name(state).into(),
                action: action.into(),
            })
    }

    pub fn transition(&self, state: LocalState, action: &str) -> Option<&StochasticTransition<T>> {
        self.transitions.get(&(state, action.to_string()))
    }

    pub fn transitions(
        &self,
    ) -> impl Iterator<Item = (LocalState, &str, &StochasticTransition<T>)> + '_ {
        self.transitions
            .iter()
            .map(|((from, a), t)| (*from, a.as_str(), t))
    }

    /// Nondeterministic service with the supports as successor sets.
    pub fn support_service(&self) -> Service {
        let transitions = self
            .transitions
            .iter()
            .map(|(key, t)| {
                (
                    key.clone(),
                    t.distribution.iter().map(|(s, _)| *s).collect(),
                )
            })
            .collect();
        Service {
            skeleton: self.skeleton.clone(),
            transitions,
        }
    }

    /// Converts probabilities and costs to another scalar type.
    pub fn cast<U: Scalar>(&self) -> StochasticService<U> {
        let transitions = self
            .transitions
            .iter()
            .map(|(key, t)| {
                let distribution = t
                    .distribution
                    .iter()
                    .map(|(s, p)| (*s, U::from_f64_lossy(p.to_f64_lossy())))
                    .collect();
                (
                    key.clone(),
                    StochasticTransition {
                        distribution,
                        cost: U::from_f64_lossy(t.cost.to_f64_lossy()),
                    },
                )
            })
            .collect();
        StochasticService {
            skeleton: self.skeleton.clone(),
            transitions,
        }
    }
}

impl<T> ServiceModel for StochasticService<T> {
    fn name(&self) -> &str {
        &self.skeleton.name
    }
    fn state_names(&self) -> &[String] {
        &self.skeleton.states
    }
    fn initial(&self) -> LocalState {
        self.skeleton.initial
    }
    fn is_final(&self, state: LocalState) -> bool {
        self.skeleton.finals.get(state).copied().unwrap_or(false)
    }
    fn actions(&self) -> &BTreeSet<String> {
        &self.skeleton.actions
    }
    fn num_transitions(&self) -> usize {
        self.transitions.len()
    }
}

/// One local state per service, in community order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Configuration(pub Vec<LocalState>);

impl Configuration {
    pub fn with(&self, service: usize, state: LocalState) -> Configuration {
        let mut next = self.0.clone();
        next[service] = state;
        Configuration(next)
    }
}

/// Indexed collection of services sharing the union alphabet.
#[derive(Clone, Debug, PartialEq)]
pub struct Community<S> {
    services: Vec<S>,
    alphabet: Vec<String>,
}

pub type NondetCommunity = Community<Service>;
pub type StochasticCommunity<T> = Community<StochasticService<T>>;

impl<S: ServiceModel> Community<S> {
    pub fn new(services: Vec<S>) -> Result<Self, ServiceError> {
        if services.is_empty() {
            return Err(ServiceError::EmptyCommunity);
        }
        let mut names = BTreeSet::new();
        for s in &services {
            if !names.insert(s.name().to_string()) {
                return Err(ServiceError::DuplicateName(s.name().into()));
            }
        }
        let alphabet: BTreeSet<String> = services
            .iter()
            .flat_map(|s| s.actions().iter().cloned())
            .collect();
        if alphabet.is_empty() {
            return Err(ServiceError::EmptyAlphabet);
        }
        Ok(Community {
            services,
            alphabet: alphabet.into_iter().collect(),
        })
    }

    pub fn services(&self) -> &[S] {
        &self.services
    }

    pub fn service(&self, index: usize) -> &S {
        &self.services[index]
    }

    pub fn len(&self) -> usize {
        self.services.len()
    }

    pub fn is_empty(&self) -> bool {
        self.services.is_empty()
    }

    /// Sorted union of the services' actions.
    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn initial_configuration(&self) -> Configuration {
        Configuration(self.services.iter().map(ServiceModel::initial).collect())
    }

    pub fn is_final(&self, config: &Configuration) -> bool {
        self.services
            .iter()
            .zip(&config.0)
            .all(|(s, &q)| s.is_final(q))
    }

    pub fn state_names(&self, config: &Configuration) -> Vec<String> {
        self.services
            .iter()
            .zip(&config.0)
            .map(|(s, &q)| s.state_name(q).to_string())
            .collect()
    }

    /// Inverse of [`Community::state_names`]; error states are accepted by
    /// name.
    pub fn parse_configuration<N: AsRef<str>>(&self, names: &[N]) -> Option<Configuration> {
        if names.len() != self.services.len() {
            return None;
        }
        let mut out = Vec::with_capacity(names.len());
        for (s, n) in self.services.iter().zip(names) {
            let n = n.as_ref();
            match s.state_index(n) {
                Some(q) => out.push(q),
                None if n == ERROR_STATE_NAME => out.push(s.num_states()),
                None => return None,
            }
        }
        Some(Configuration(out))
    }

    pub fn describe(&self, config: &Configuration) -> String {
        format!("({})", self.state_names(config).join(", "))
    }
}

impl<T: Scalar> StochasticCommunity<T> {
    /// The nondeterministic community over the transition supports.
    pub fn support_community(&self) -> NondetCommunity {
        Community {
            services: self
                .services
                .iter()
                .map(StochasticService::support_service)
                .collect(),
            alphabet: self.alphabet.clone(),
        }
    }

    pub fn cast<U: Scalar>(&self) -> StochasticCommunity<U> {
        Community {
            services: self.services.iter().map(StochasticService::cast).collect(),
            alphabet: self.alphabet.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Nondet,
    Stochastic,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Nondet => "nondet",
            Mode::Stochastic => "stochastic",
        })
    }
}

/// On-disk community document. Costs are positive magnitudes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommunityDocument {
    pub mode: Mode,
    pub services: Vec<ServiceDocument>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceDocument {
    pub name: String,
    pub states: Vec<String>,
    pub initial: String,
    #[serde(rename = "final")]
    pub finals: Vec<String>,
    pub transitions: Vec<TransitionDocument>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionDocument {
    pub from: String,
    pub action: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub to: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cost: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub distribution: Option<BTreeMap<String, f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LoadedCommunity {
    Nondet(NondetCommunity),
    Stochastic(StochasticCommunity<f64>),
}

impl LoadedCommunity {
    pub fn mode(&self) -> Mode {
        match self {
            LoadedCommunity::Nondet(_) => Mode::Nondet,
            LoadedCommunity::Stochastic(_) => Mode::Stochastic,
        }
    }

    pub fn alphabet(&self) -> &[String] {
        match self {
            LoadedCommunity::Nondet(c) => c.alphabet(),
            LoadedCommunity::Stochastic(c) => c.alphabet(),
        }
    }

    pub fn into_nondet(self) -> Result<NondetCommunity, ServiceError> {
        match self {
            LoadedCommunity::Nondet(c) => Ok(c),
            other => Err(ServiceError::ModeMismatch {
                expected: Mode::Nondet,
                found: other.mode(),
            }),
        }
    }

    pub fn into_stochastic(self) -> Result<StochasticCommunity<f64>, ServiceError> {
        match self {
            LoadedCommunity::Stochastic(c) => Ok(c),
            other => Err(ServiceError::ModeMismatch {
                expected: Mode::Stochastic,
                found: other.mode(),
            }),
        }
    }
}

fn schema(msg: impl Into<String>) -> ServiceError {
    ServiceError::Schema(msg.into())
}

/// Parses and validates a community document.
pub fn load_community(text: &str) -> Result<LoadedCommunity, ServiceError> {
    let doc: CommunityDocument = serde_json::from_str(text).map_err(|e| schema(e.to_string()))?;
    community_from_document(&doc)
}

pub fn community_from_document(doc: &CommunityDocument) -> Result<LoadedCommunity, ServiceError> {
    match doc.mode {
        Mode::Nondet => {
            let services = doc
                .services
                .iter()
                .map(nondet_service)
                .collect::<Result<Vec<_>, _>>()?;
            Ok(LoadedCommunity::Nondet(Community::new(services)?))
        }
        Mode::Stochastic => {
            let services = doc
                .services
                .iter()
                .map(stochastic_service)
                .collect::<Result<Vec<_>, _>>()?;
            Ok(LoadedCommunity::Stochastic(Community::new(services)?))
        }
    }
}

fn str_refs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

fn nondet_service(doc: &ServiceDocument) -> Result<Service, ServiceError> {
    let mut triples = Vec::with_capacity(doc.transitions.len());
    for t in &doc.transitions {
        if t.cost.is_some() || t.distribution.is_some() {
            return Err(schema(format!(
                "service `{}`: nondet transitions take `to`, not cost/distribution",
                doc.name
            )));
        }
        let to = t
            .to
            .as_deref()
            .ok_or_else(|| schema(format!("service `{}`: transition without `to`", doc.name)))?;
        triples.push((t.from.as_str(), t.action.as_str(), to));
    }
    Service::new(
        &doc.name,
        &str_refs(&doc.states),
        &doc.initial,
        &str_refs(&doc.finals),
        &triples,
    )
}

fn stochastic_service(doc: &ServiceDocument) -> Result<StochasticService<f64>, ServiceError> {
    let mut dists: Vec<Vec<(&str, f64)>> = Vec::with_capacity(doc.transitions.len());
    for t in &doc.transitions {
        if t.to.is_some() {
            return Err(schema(format!(
                "service `{}`: stochastic transitions take a distribution, not `to`",
                doc.name
            )));
        }
        let dist = t.distribution.as_ref().ok_or_else(|| {
            schema(format!(
                "service `{}`: transition without `distribution`",
                doc.name
            ))
        })?;
        dists.push(dist.iter().map(|(s, p)| (s.as_str(), *p)).collect());
    }
    let mut entries = Vec::with_capacity(doc.transitions.len());
    for (t, dist) in doc.transitions.iter().zip(&dists) {
        let cost = t
            .cost
            .ok_or_else(|| schema(format!("service `{}`: transition without `cost`", doc.name)))?;
        entries.push((t.from.as_str(), t.action.as_str(), cost, dist.as_slice()));
    }
    StochasticService::new(
        &doc.name,
        &str_refs(&doc.states),
        &doc.initial,
        &str_refs(&doc.finals),
        &entries,
    )
}

fn skeleton_document(
    s: &impl ServiceModel,
    transitions: Vec<TransitionDocument>,
) -> ServiceDocument {
    ServiceDocument {
        name: s.name().into(),
        states: s.state_names().to_vec(),
        initial: s.state_name(s.initial()).into(),
        finals: (0..s.num_states())
            .filter(|&q| s.is_final(q))
            .map(|q| s.state_name(q).to_string())
            .collect(),
        transitions,
    }
}

impl NondetCommunity {
    pub fn to_document(&self) -> CommunityDocument {
        let services = self
            .services()
            .iter()
            .map(|s| {
                let ts = s
                    .transitions()
                    .map(|(from, a, to)| TransitionDocument {
                        from: s.state_name(from).into(),
                        action: a.into(),
                        to: Some(s.state_name(to).into()),
                        cost: None,
                        distribution: None,
                    })
                    .collect();
                skeleton_document(s, ts)
            })
            .collect();
        CommunityDocument {
            mode: Mode::Nondet,
            services,
        }
    }
}

impl<T: Scalar> StochasticCommunity<T> {
    pub fn to_document(&self) -> CommunityDocument {
        let services = self
            .services()
            .iter()
            .map(|s| {
                let ts = s
                    .transitions()
                    .map(|(from, a, t)| TransitionDocument {
                        from: s.state_name(from).into(),
                        action: a.into(),
                        to: None,
                        cost: Some(t.cost.to_f64_lossy()),
                        distribution: Some(
                            t.distribution
                                .iter()
                                .map(|(q, p)| (s.state_name(*q).to_string(), p.to_f64_lossy()))
                                .collect(),
                        ),
                    })
                    .collect();
                skeleton_document(s, ts)
            })
            .collect();
        CommunityDocument {
            mode: Mode::Stochastic,
            services,
        }
    }
}

/// Per-service summary used by validation reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ServiceStats {
    pub index: usize,
    pub name: String,
    pub states: usize,
    pub actions: Vec<String>,
    pub transitions: usize,
}

pub fn service_stats<S: ServiceModel>(community: &Community<S>) -> Vec<ServiceStats> {
    community
        .services()
        .iter()
        .enumerate()
        .map(|(i, s)| ServiceStats {
            index: i + 1,
            name: s.name().into(),
            states: s.num_states(),
            actions: s.actions().iter().cloned().collect(),
            transitions: s.num_transitions(),
        })
        .collect()
}

/// Map from action name to index in the community alphabet.
pub fn alphabet_index<S: ServiceModel>(community: &Community<S>) -> HashMap<&str, usize> {
    community
        .alphabet()
        .iter()
        .enumerate()
        .map(|(i, a)| (a.as_str(), i))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const GARDEN: &str = include_str!("../examples/garden_bots.json");

    fn garden() -> StochasticCommunity<f64> {
        load_community(GARDEN).unwrap().into_stochastic().unwrap()
    }

    #[test]
    fn garden_document_loads() {
        let c = garden();
        assert_eq!(c.len(), 3);
        assert_eq!(c.alphabet(), ["clean", "empty", "pluck", "water"]);
        let bot1 = c.service(0);
        let t = bot1.step_stochastic(0, "clean").unwrap();
        assert_eq!(t.distribution, vec![(0, 0.8), (1, 0.2)]);
        assert_eq!(t.cost, 0.1);
        let bot2 = c.service(1);
        let t = bot2
            .step_stochastic(bot2.state_index("b0").unwrap(), "water")
            .unwrap();
        assert_eq!((t.distribution.clone(), t.cost), (vec![(0, 1.0)], 1.0));
        let bot3 = c.service(2);
        let t = bot3
            .step_stochastic(bot3.state_index("c1").unwrap(), "empty")
            .unwrap();
        assert_eq!((t.distribution.clone(), t.cost), (vec![(0, 1.0)], 1.0));
        assert!(matches!(
            bot3.step_stochastic(0, "water"),
            Err(ServiceError::ActionUnavailable { .. })
        ));
    }

    #[test]
    fn nondet_steps_are_totalized() {
        let c = garden().support_community();
        let bot1 = c.service(0);
        assert_eq!(bot1.step_nondet(0, "clean"), vec![0, 1]);
        let bot3 = c.service(2);
        assert_eq!(bot3.step_nondet(0, "water"), vec![bot3.error_state()]);
        assert_eq!(bot3.state_name(bot3.error_state()), ERROR_STATE_NAME);
        let bot2 = c.service(1);
        assert_eq!(bot2.step_nondet(1, "empty"), vec![0]);
        for a in c.alphabet() {
            let err = bot2.error_state();
            assert_eq!(bot2.step_nondet(err, a), vec![err]);
        }
        assert!(!bot2.is_final(bot2.error_state()));
    }

    #[test]
    fn trivial_community() {
        let s = Service::new("solo", &["s"], "s", &["s"], &[("s", "a", "s")]).unwrap();
        let c = Community::new(vec![s]).unwrap();
        assert_eq!(c.alphabet(), ["a"]);
        assert!(c.is_final(&c.initial_configuration()));
    }

    #[test]
    fn bad_distribution() {
        let doc = r#"{"mode":"stochastic","services":[{"name":"s","states":["x","y"],"initial":"x","final":["x"],
            "transitions":[{"from":"x","action":"a","cost":1,"distribution":{"x":0.5,"y":0.4}}]}]}"#;
        let err = load_community(doc).unwrap_err();
        assert!(err.to_string().contains("sums to 0.9"), "{err}");
    }

    #[test]
    fn validation_errors() {
        let base = |transitions: &str, extra: &str| {
            format!(
                r#"{{"mode":"stochastic","services":[{{"name":"s","states":["x"],"initial":"x","final":["x"],"transitions":[{transitions}]}}{extra}]}}"#
            )
        };
        let cost0 = base(
            r#"{"from":"x","action":"a","cost":0,"distribution":{"x":1}}"#,
            "",
        );
        assert!(matches!(
            load_community(&cost0),
            Err(ServiceError::NonPositiveCost { .. })
        ));
        let unknown = base(
            r#"{"from":"x","action":"a","cost":1,"distribution":{"z":1}}"#,
            "",
        );
        assert!(matches!(
            load_community(&unknown),
            Err(ServiceError::UnknownState { .. })
        ));
        let dup = base(
            r#"{"from":"x","action":"a","cost":1,"distribution":{"x":1}}"#,
            r#",{"name":"s","states":["x"],"initial":"x","final":[],"transitions":[]}"#,
        );
        assert_eq!(
            load_community(&dup),
            Err(ServiceError::DuplicateName("s".into()))
        );
        let twice = base(
            r#"{"from":"x","action":"a","cost":1,"distribution":{"x":1}},{"from":"x","action":"a","cost":2,"distribution":{"x":1}}"#,
            "",
        );
        assert!(matches!(
            load_community(&twice),
            Err(ServiceError::DuplicateTransition { .. })
        ));
        let mixed = base(r#"{"from":"x","action":"a","to":"x"}"#, "");
        assert!(matches!(
            load_community(&mixed),
            Err(ServiceError::Schema(_))
        ));
        assert!(matches!(
            load_community("{\"mode\":\"other\",\"services\":[]}"),
            Err(ServiceError::Schema(_))
        ));
        let empty = r#"{"mode":"nondet","services":[]}"#;
        assert_eq!(load_community(empty), Err(ServiceError::EmptyCommunity));
    }

    #[test]
    fn documents_round_trip() {
        let c = garden();
        let again = community_from_document(&c.to_document())
            .unwrap()
            .into_stochastic()
            .unwrap();
        assert_eq!(again, c);
        let n = c.support_community();
        let again = community_from_document(&n.to_document())
            .unwrap()
            .into_nondet()
            .unwrap();
        assert_eq!(again, n);
    }

    #[test]
    fn configurations() {
        let c = garden();
        let init = c.initial_configuration();
        assert_eq!(c.state_names(&init), ["a0", "b0", "c0"]);
        assert!(c.is_final(&init));
        assert!(!c.is_final(&init.with(0, 1)));
        assert_eq!(
            c.parse_configuration(&["a1", "b0", "c0"]),
            Some(init.with(0, 1))
        );
        assert_eq!(c.parse_configuration(&["a1", "b0"]), None);
    }

    #[test]
    fn cast_to_f32() {
        let c32: StochasticCommunity<f32> = garden().cast();
        let t = c32.service(0).step_stochastic(0, "clean").unwrap();
        assert_eq!(t.distribution, vec![(0, 0.8f32), (1, 0.2f32)]);
    }
}
