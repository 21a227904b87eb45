use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ModelError, TaskId, VfId};

/// Range (MIPS) the randomized workload mode draws from.
pub const RANDOM_WORKLOAD_RANGE: (f64, f64) = (500.0, 5000.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub id: TaskId,
    pub workload_mips: f64,
    pub traffic_mbps: f64,
    pub source_vf: VfId,
}

impl Task {
    pub fn new(
        id: TaskId,
        workload_mips: f64,
        traffic_mbps: f64,
        source_vf: VfId,
    ) -> Result<Self, ModelError> {
        if !(workload_mips.is_finite() && workload_mips > 0.0) {
            return Err(ModelError::InvalidTask {
                id,
                field: "workload_mips".into(),
            });
        }
        if !(traffic_mbps.is_finite() && traffic_mbps > 0.0) {
            return Err(ModelError::InvalidTask {
                id,
                field: "traffic_mbps".into(),
            });
        }
        Ok(Task {
            id,
            workload_mips,
            traffic_mbps,
            source_vf,
        })
    }

    /// Mbps carried per MIPS placed; traffic follows workload when a task is split.
    pub fn traffic_per_mips(&self) -> f64 {
        self.traffic_mbps / self.workload_mips
    }
}

/// Ordered set of tasks with unique ids.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TaskSet {
    tasks: Vec<Task>,
}

impl TaskSet {
    pub fn new(tasks: Vec<Task>) -> Result<Self, ModelError> {
        let mut seen = std::collections::BTreeSet::new();
        for t in &tasks {
            if !seen.insert(t.id) {
                return Err(ModelError::DuplicateId(format!("task {}", t.id)));
            }
        }
        Ok(TaskSet { tasks })
    }

    pub fn empty() -> Self {
        TaskSet::default()
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Task> {
        self.tasks.iter()
    }

    pub fn as_slice(&self) -> &[Task] {
        &self.tasks
    }

    pub fn get(&self, id: TaskId) -> Option<&Task> {
        // ids are 1..=n for generated sets; fall back to a scan otherwise
        let guess = (id.0 as usize).wrapping_sub(1);
        match self.tasks.get(guess) {
            Some(t) if t.id == id => Some(t),
            _ => self.tasks.iter().find(|t| t.id == id),
        }
    }
}

impl<'a> IntoIterator for &'a TaskSet {
    type Item = &'a Task;
    type IntoIter = std::slice::Iter<'a, Task>;

    fn into_iter(self) -> Self::IntoIter {
        self.tasks.iter()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WorkloadMode {
    /// Every task demands the same workload.
    Fixed(f64),
    /// Workloads drawn uniformly (whole MIPS) from [`RANDOM_WORKLOAD_RANGE`].
    Randomized,
}

/// Generates `count` tasks with ids `1..=count`. Traffic is
/// `workload * traffic_per_mips`. Only the randomized mode consumes `seed`.
pub fn make_tasks(
    count: usize,
    mode: WorkloadMode,
    seed: u64,
    traffic_per_mips: f64,
    source_vf: VfId,
) -> Result<TaskSet, ModelError> {
    if count == 0 {
        return Err(ModelError::EmptyTaskSet);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = RANDOM_WORKLOAD_RANGE;
    let tasks = (1..=count)
        .map(|i| {
            let workload = match mode {
                WorkloadMode::Fixed(w) => w,
                WorkloadMode::Randomized => rng.gen_range(lo as u32..=hi as u32) as f64,
            };
            Task::new(
                TaskId(i as u32),
                workload,
                workload * traffic_per_mips,
                source_vf,
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    TaskSet::new(tasks)
}
