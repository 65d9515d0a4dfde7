use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex};

use feo_core::inference::ConditionalTable;
use feo_core::roles::FeoScenario;
use feo_core::solver::{MarginalConstraint, SolutionReport, SolveOutcome};
use lru::LruCache;
use uuid::Uuid;

/// One uploaded scenario and its latest solve.
#[derive(Debug)]
pub struct Session {
    pub scenario: FeoScenario,
    pub pre: ConditionalTable,
    pub constraints: Vec<MarginalConstraint>,
    /// Bumped by every constraint update.
    pub revision: u64,
    pub solved: Option<Solved>,
}

#[derive(Debug)]
pub struct Solved {
    /// Constraint revision the solve ran against.
    pub revision: u64,
    pub outcome: SolveOutcome,
    pub report: SolutionReport,
}

impl Session {
    pub fn new(scenario: FeoScenario, pre: ConditionalTable, constraints: Vec<MarginalConstraint>) -> Self {
        Self { scenario, pre, constraints, revision: 0, solved: None }
    }

    /// The stored solution, if it belongs to the current constraints.
    pub fn current(&self) -> Option<&Solved> {
        self.solved.as_ref().filter(|s| s.revision == self.revision)
    }

    pub fn replace_constraints(&mut self, constraints: Vec<MarginalConstraint>) {
        self.constraints = constraints;
        self.revision += 1;
        self.solved = None;
    }
}

pub type SessionHandle = Arc<tokio::sync::Mutex<Session>>;

/// In-memory sessions with least-recently-used eviction. The outer lock is
/// held only for lookups; each session carries its own async mutex so that
/// requests on one session run one at a time.
pub struct SessionStore {
    sessions: Mutex<LruCache<String, SessionHandle>>,
}

impl SessionStore {
    pub fn new(capacity: NonZeroUsize) -> Self {
        Self { sessions: Mutex::new(LruCache::new(capacity)) }
    }

    pub fn insert(&self, session: Session) -> String {
        let id = Uuid::new_v4().simple().to_string();
        let handle = Arc::new(tokio::sync::Mutex::new(session));
        self.sessions.lock().expect("store lock").put(id.clone(), handle);
        id
    }

    pub fn get(&self, id: &str) -> Option<SessionHandle> {
        self.sessions.lock().expect("store lock").get(id).cloned()
    }

    pub fn len(&self) -> usize {
        self.sessions.lock().expect("store lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
