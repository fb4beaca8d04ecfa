//! Instances and runs, their background workers and on-disk persistence.
//!
//! Layout under the data directory:
//! `manifest.json`, `instances/{id}.json` and one run bundle per run in
//! `runs/{id}/`.

use std::collections::BTreeMap;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::thread;

use irp_core::io::{self, RunBundle};
use irp_core::{
    Archive, Instance, NormalizedPoint, Result, Search, SearchConfig, SearchStats, Termination,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunState {
    Constructing,
    Improving,
    Converged,
    Stopped,
    Failed,
}

impl RunState {
    pub fn is_terminal(self) -> bool {
        matches!(self, RunState::Converged | RunState::Stopped | RunState::Failed)
    }
}

/// Immutable view of a run, replaced wholesale at step boundaries.
#[derive(Debug, Clone)]
pub struct RunSnapshot {
    pub state: RunState,
    pub stats: SearchStats,
    pub config: SearchConfig,
    pub archive: Arc<Archive>,
    pub reference_points: Vec<NormalizedPoint>,
    pub error: Option<String>,
}

pub struct RunHandle {
    pub id: String,
    pub instance_id: String,
    pub instance: Arc<Instance>,
    snapshot: RwLock<Arc<RunSnapshot>>,
    cancel: AtomicBool,
    /// Present whenever no worker owns the search.
    search: Mutex<Option<Search>>,
}

impl RunHandle {
    pub fn snapshot(&self) -> Arc<RunSnapshot> {
        self.snapshot.read().unwrap().clone()
    }

    fn publish(&self, snap: RunSnapshot) {
        *self.snapshot.write().unwrap() = Arc::new(snap);
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct Manifest {
    next_instance: u64,
    next_run: u64,
    instances: Vec<String>,
    runs: Vec<ManifestRun>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct ManifestRun {
    id: String,
    instance_id: String,
    state: RunState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Default)]
struct Registry {
    next_instance: u64,
    next_run: u64,
    instances: BTreeMap<String, Arc<Instance>>,
    runs: BTreeMap<String, Arc<RunHandle>>,
}

pub struct Store {
    data_dir: Option<PathBuf>,
    registry: RwLock<Registry>,
    manifest_lock: Mutex<()>,
}

const MANIFEST_FILE: &str = "manifest.json";

impl Store {
    /// Store without persistence.
    pub fn in_memory() -> Arc<Self> {
        Arc::new(Self { data_dir: None, registry: RwLock::default(), manifest_lock: Mutex::new(()) })
    }

    /// Opens (or creates) a data directory and restores its contents. Runs
    /// that were active when the previous process ended come back stopped.
    pub fn open(dir: &Path) -> Result<Arc<Self>> {
        fs::create_dir_all(dir.join("instances"))?;
        fs::create_dir_all(dir.join("runs"))?;
        let manifest: Manifest = match fs::read_to_string(dir.join(MANIFEST_FILE)) {
            Ok(text) => serde_json::from_str(&text)?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Manifest::default(),
            Err(e) => return Err(e.into()),
        };
        let mut reg = Registry { next_instance: manifest.next_instance, next_run: manifest.next_run, ..Default::default() };
        for id in &manifest.instances {
            let inst = io::read_instance(&dir.join("instances").join(format!("{id}.json")))?;
            reg.instances.insert(id.clone(), Arc::new(inst));
        }
        for run in &manifest.runs {
            let Some(instance) = reg.instances.get(&run.instance_id).cloned() else {
                log::warn!("run {} refers to missing instance {}", run.id, run.instance_id);
                continue;
            };
            let handle = restore_run(dir, run, instance)?;
            reg.runs.insert(run.id.clone(), Arc::new(handle));
        }
        let store = Arc::new(Self {
            data_dir: Some(dir.to_path_buf()),
            registry: RwLock::new(reg),
            manifest_lock: Mutex::new(()),
        });
        store.save_manifest()?;
        Ok(store)
    }

    pub fn instance(&self, id: &str) -> Option<Arc<Instance>> {
        self.registry.read().unwrap().instances.get(id).cloned()
    }

    pub fn run(&self, id: &str) -> Option<Arc<RunHandle>> {
        self.registry.read().unwrap().runs.get(id).cloned()
    }

    pub fn run_ids(&self) -> Vec<String> {
        self.registry.read().unwrap().runs.keys().cloned().collect()
    }

    /// Stores a validated instance and returns its id.
    pub fn add_instance(&self, inst: Instance) -> Result<String> {
        inst.ensure_valid()?;
        let id = {
            let mut reg = self.registry.write().unwrap();
            reg.next_instance += 1;
            let id = format!("i{}", reg.next_instance);
            if let Some(dir) = &self.data_dir {
                io::write_instance(&dir.join("instances").join(format!("{id}.json")), &inst)?;
            }
            reg.instances.insert(id.clone(), Arc::new(inst));
            id
        };
        self.save_manifest()?;
        Ok(id)
    }

    /// Creates a run and starts its worker.
    pub fn start_run(self: &Arc<Self>, instance_id: &str, config: SearchConfig) -> Result<Option<String>> {
        let Some(instance) = self.instance(instance_id) else {
            return Ok(None);
        };
        let search = Search::new(instance.clone(), config.clone())?;
        let snapshot = RunSnapshot {
            state: RunState::Constructing,
            stats: SearchStats::default(),
            config,
            archive: Arc::new(Archive::new()),
            reference_points: search.reference_points().points.clone(),
            error: None,
        };
        let handle = {
            let mut reg = self.registry.write().unwrap();
            reg.next_run += 1;
            let id = format!("r{}", reg.next_run);
            let handle = Arc::new(RunHandle {
                id: id.clone(),
                instance_id: instance_id.to_string(),
                instance,
                snapshot: RwLock::new(Arc::new(snapshot)),
                cancel: AtomicBool::new(false),
                search: Mutex::new(None),
            });
            reg.runs.insert(id, handle.clone());
            handle
        };
        self.save_manifest()?;
        self.spawn_worker(handle.clone(), search);
        Ok(Some(handle.id.clone()))
    }

    /// Requests cancellation at the next step boundary. `false` means the
    /// run is already terminal.
    pub fn stop(&self, handle: &RunHandle) -> bool {
        let snap = handle.snapshot.read().unwrap();
        if snap.state.is_terminal() {
            return false;
        }
        handle.cancel.store(true, Ordering::SeqCst);
        true
    }

    /// Resumes a finished run towards the given points (joined with the two
    /// extreme corners) and returns the state it entered. `Ok(None)` means
    /// the run is neither converged nor stopped.
    pub fn refine(self: &Arc<Self>, handle: &Arc<RunHandle>, points: &[NormalizedPoint]) -> Result<Option<RunState>> {
        let (search, state) = {
            let mut guard = handle.snapshot.write().unwrap();
            if !matches!(guard.state, RunState::Converged | RunState::Stopped) {
                return Ok(None);
            }
            let existing = handle.search.lock().unwrap().take();
            let mut search = match existing {
                Some(s) => s,
                None => self.rebuild_search(handle, &guard)?,
            };
            if let Err(e) = search.set_reference_points(points) {
                *handle.search.lock().unwrap() = Some(search);
                return Err(e);
            }
            handle.cancel.store(false, Ordering::SeqCst);
            let state = if search.is_constructed() { RunState::Improving } else { RunState::Constructing };
            *guard = Arc::new(RunSnapshot {
                state,
                config: search.config().clone(),
                reference_points: search.reference_points().points.clone(),
                error: None,
                ..(**guard).clone()
            });
            (search, state)
        };
        self.record_state();
        self.spawn_worker(handle.clone(), search);
        Ok(Some(state))
    }

    fn rebuild_search(&self, handle: &RunHandle, snap: &RunSnapshot) -> Result<Search> {
        if snap.archive.is_empty() {
            return Search::new(handle.instance.clone(), snap.config.clone());
        }
        Search::resume(handle.instance.clone(), snap.config.clone(), (*snap.archive).clone(), snap.stats)
    }

    fn spawn_worker(self: &Arc<Self>, handle: Arc<RunHandle>, mut search: Search) {
        let store = self.clone();
        thread::spawn(move || {
            let outcome = catch_unwind(AssertUnwindSafe(|| {
                let result = search.run_with(Some(&handle.cancel), |s, _| {
                    let snap = snapshot_of(s, RunState::Improving, None);
                    store.persist_bundle(&handle, &snap);
                    handle.publish(snap);
                });
                (search, result)
            }));
            let final_snap = match outcome {
                Ok((search, result)) => {
                    let (state, error) = match result {
                        Ok(Termination::Converged) => (RunState::Converged, None),
                        Ok(Termination::BudgetExhausted | Termination::Cancelled) => (RunState::Stopped, None),
                        Err(e) => (RunState::Failed, Some(e.to_string())),
                    };
                    let snap = snapshot_of(&search, state, error);
                    *handle.search.lock().unwrap() = Some(search);
                    snap
                }
                Err(panic) => {
                    let msg = panic
                        .downcast_ref::<&str>()
                        .map(|s| s.to_string())
                        .or_else(|| panic.downcast_ref::<String>().cloned())
                        .unwrap_or_else(|| "worker panicked".into());
                    RunSnapshot { state: RunState::Failed, error: Some(msg), ..(*handle.snapshot()).clone() }
                }
            };
            if final_snap.state != RunState::Failed {
                store.persist_bundle(&handle, &final_snap);
            }
            handle.publish(final_snap);
            store.record_state();
        });
    }

    fn persist_bundle(&self, handle: &RunHandle, snap: &RunSnapshot) {
        let Some(dir) = &self.data_dir else { return };
        let bundle = RunBundle { archive: (*snap.archive).clone(), stats: snap.stats, config: snap.config.clone() };
        let path = dir.join("runs").join(&handle.id);
        if let Err(e) = io::write_bundle(&path, handle.instance.num_customers(), &bundle) {
            log::error!("persisting run {}: {e}", handle.id);
        }
    }

    fn record_state(&self) {
        if let Err(e) = self.save_manifest() {
            log::error!("writing manifest: {e}");
        }
    }

    fn save_manifest(&self) -> Result<()> {
        let Some(dir) = &self.data_dir else { return Ok(()) };
        let _guard = self.manifest_lock.lock().unwrap();
        let manifest = {
            let reg = self.registry.read().unwrap();
            Manifest {
                next_instance: reg.next_instance,
                next_run: reg.next_run,
                instances: reg.instances.keys().cloned().collect(),
                runs: reg
                    .runs
                    .values()
                    .map(|h| {
                        let snap = h.snapshot();
                        ManifestRun {
                            id: h.id.clone(),
                            instance_id: h.instance_id.clone(),
                            state: snap.state,
                            error: snap.error.clone(),
                        }
                    })
                    .collect(),
            }
        };
        let tmp = dir.join("manifest.json.tmp");
        fs::write(&tmp, serde_json::to_string_pretty(&manifest)? + "\n")?;
        fs::rename(tmp, dir.join(MANIFEST_FILE))?;
        Ok(())
    }
}

fn snapshot_of(search: &Search, state: RunState, error: Option<String>) -> RunSnapshot {
    let state = if state == RunState::Improving && !search.is_constructed() {
        RunState::Constructing
    } else {
        state
    };
    RunSnapshot {
        state,
        stats: search.stats(),
        config: search.config().clone(),
        archive: Arc::new(search.archive().clone()),
        reference_points: search.reference_points().points.clone(),
        error,
    }
}

fn restore_run(dir: &Path, run: &ManifestRun, instance: Arc<Instance>) -> Result<RunHandle> {
    let bundle_dir = dir.join("runs").join(&run.id);
    let bundle = if bundle_dir.join(io::CONFIG_FILE).exists() { Some(io::read_bundle(&bundle_dir)?) } else { None };
    let state = if run.state.is_terminal() { run.state } else { RunState::Stopped };
    let (archive, stats, config) = match bundle {
        Some(b) => (b.archive, b.stats, b.config),
        None => (Archive::new(), SearchStats::default(), SearchConfig::default()),
    };
    let reference_points = config.reference_points().map(|r| r.points).unwrap_or_default();
    Ok(RunHandle {
        id: run.id.clone(),
        instance_id: run.instance_id.clone(),
        instance,
        snapshot: RwLock::new(Arc::new(RunSnapshot {
            state,
            stats,
            config,
            archive: Arc::new(archive),
            reference_points,
            error: run.error.clone(),
        })),
        cancel: AtomicBool::new(false),
        search: Mutex::new(None),
    })
}
