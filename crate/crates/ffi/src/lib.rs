//! C ABI over the swarm-ot solver.
//!
//! Handles are opaque and owned by the caller: every `*_new` has a matching
//! `*_free`. Every fallible call returns a [`SwarmOtStatus`]; on failure the
//! message is available from [`swarm_ot_last_error`] on the same thread.
//! Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use swarm_ot::admm::{self, AdmmConfig};
use swarm_ot::dynamic::{
    dynamic_loop, extract_assignment, DynamicConfig, DynamicState, EdgeUpdate, NoEvents, SwarmEvent,
};
use swarm_ot::oracle::brute_force_optimal;
use swarm_ot::sim::{decode_message, encode_message, WaypointMessage, MESSAGE_LEN};
use swarm_ot::{Error, Matrix, Problem, UtilityParams};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwarmOtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Infeasible = 3,
    NotConverged = 4,
    BudgetExceeded = 5,
    InvalidEvent = 6,
    Codec = 7,
    TooLarge = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

impl From<&Error> for SwarmOtStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::DimensionMismatch { .. }
            | Error::NonPositiveCoefficient { .. }
            | Error::InvalidTopology(_)
            | Error::InvalidBounds(_)
            | Error::InvalidConfig(_) => SwarmOtStatus::InvalidArgument,
            Error::Infeasible(_) => SwarmOtStatus::Infeasible,
            Error::NotConverged { .. } => SwarmOtStatus::NotConverged,
            Error::MaxIterationsExceeded(_) | Error::EpochBudgetExceeded { .. } => {
                SwarmOtStatus::BudgetExceeded
            }
            Error::UnknownEntity { .. }
            | Error::RevisitAttempt(_)
            | Error::NotCurrentAssignment { .. } => SwarmOtStatus::InvalidEvent,
            Error::WrongLength(_) | Error::InvalidReading(_) => SwarmOtStatus::Codec,
            Error::TooLarge { .. } => SwarmOtStatus::TooLarge,
            _ => SwarmOtStatus::InvalidArgument,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let message = CString::new(message.replace('\0', " ")).expect("interior nulls removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(message));
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn swarm_ot_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Runs `body`, turning errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> SwarmOtStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => SwarmOtStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(_) => {
            set_last_error("panic inside swarm-ot".into());
            SwarmOtStatus::Panic
        }
    }
}

struct Failure(SwarmOtStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(SwarmOtStatus::from(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(SwarmOtStatus::NullPointer, format!("{what} is null"))
}

fn invalid(message: String) -> Failure {
    Failure(SwarmOtStatus::InvalidArgument, message)
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn deref_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(
    p: *mut T,
    len: usize,
    need: usize,
    what: &str,
) -> Result<&'a mut [T], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    if len < need {
        return Err(Failure(
            SwarmOtStatus::BufferTooSmall,
            format!("{what} holds {len} entries, need {need}"),
        ));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

/// A matching-mode problem on a fully connected network.
pub struct SwarmOtProblem(Problem);

/// A warm-started solver that survives events.
pub struct SwarmOtSolver {
    state: DynamicState,
    config: AdmmConfig,
    /// True once the current epoch has converged and been recorded.
    settled: bool,
}

/// Builds a problem from row-major `agents x waypoints` rate matrices.
///
/// # Safety
/// `gamma` and `delta` must point to `agents * waypoints` doubles; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn swarm_ot_problem_new(
    agents: usize,
    waypoints: usize,
    gamma: *const f64,
    delta: *const f64,
    out: *mut *mut SwarmOtProblem,
) -> SwarmOtStatus {
    guard(|| {
        let out = deref_mut(out, "out")?;
        let len = agents
            .checked_mul(waypoints)
            .ok_or_else(|| invalid("size overflow".into()))?;
        let gamma =
            Matrix::from_row_major(agents, waypoints, slice(gamma, len, "gamma")?.to_vec())?;
        let delta =
            Matrix::from_row_major(agents, waypoints, slice(delta, len, "delta")?.to_vec())?;
        let problem = Problem::matching(UtilityParams::new(gamma, delta))?;
        *out = Box::into_raw(Box::new(SwarmOtProblem(problem)));
        Ok(())
    })
}

/// # Safety
/// `problem` must come from [`swarm_ot_problem_new`] and not be used again.
#[no_mangle]
pub unsafe extern "C" fn swarm_ot_problem_free(problem: *mut SwarmOtProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Exhaustive optimum. `assignment` receives one waypoint index per agent.
///
/// # Safety
/// `assignment` must hold `len` writable entries; `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn swarm_ot_brute_force(
    problem: *const SwarmOtProblem,
    assignment: *mut i64,
    len: usize,
    value: *mut f64,
) -> SwarmOtStatus {
    guard(|| {
        let problem = &deref(problem, "problem")?.0;
        let value = deref_mut(value, "value")?;
        let agents = problem.topology.agent_count();
        let out = slice_mut(assignment, len, agents, "assignment")?;
        let (best, best_value) = brute_force_optimal(&problem.topology, &problem.params)?;
        write_assignment(out, agents, best.iter());
        *value = best_value;
        Ok(())
    })
}

fn write_assignment(out: &mut [i64], agents: usize, pairs: impl Iterator<Item = (usize, usize)>) {
    out[..agents].fill(-1);
    for (x, y) in pairs {
        out[x] = y as i64;
    }
}

/// Creates a solver on a copy of `problem`.
///
/// # Safety
/// `problem` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn swarm_ot_solver_new(
    problem: *const SwarmOtProblem,
    eta: f64,
    epsilon: f64,
    max_iterations: usize,
    out: *mut *mut SwarmOtSolver,
) -> SwarmOtStatus {
    guard(|| {
        let problem = &deref(problem, "problem")?.0;
        let out = deref_mut(out, "out")?;
        let config = AdmmConfig {
            eta,
            epsilon,
            max_iterations,
        };
        config.validate()?;
        let solver = SwarmOtSolver {
            state: DynamicState::new(problem.clone(), eta),
            config,
            settled: false,
        };
        *out = Box::into_raw(Box::new(solver));
        Ok(())
    })
}

/// # Safety
/// `solver` must come from [`swarm_ot_solver_new`] and not be used again.
#[no_mangle]
pub unsafe extern "C" fn swarm_ot_solver_free(solver: *mut SwarmOtSolver) {
    if !solver.is_null() {
        drop(Box::from_raw(solver));
    }
}

/// One synchronous ADMM round. Writes the primal residual if `residual` is
/// non-null.
///
/// # Safety
/// `solver` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn swarm_ot_solver_step(
    solver: *mut SwarmOtSolver,
    residual: *mut f64,
) -> SwarmOtStatus {
    guard(|| {
        let solver = deref_mut(solver, "solver")?;
        solver.state.check_feasible()?;
        let stats = admm::iterate(&mut solver.state.admm, &solver.state.problem);
        if let Some(r) = residual.as_mut() {
            *r = stats.primal_residual;
        }
        Ok(())
    })
}

/// Iterates until the current epoch converges (within the per-epoch budget)
/// and records its assignment. Writes the iterations used if `iterations`
/// is non-null; zero if the epoch was already settled.
///
/// # Safety
/// `solver` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn swarm_ot_solver_run(
    solver: *mut SwarmOtSolver,
    iterations: *mut usize,
) -> SwarmOtStatus {
    guard(|| {
        let solver = deref_mut(solver, "solver")?;
        let mut used = 0;
        if !solver.settled {
            let config = DynamicConfig {
                admm: solver.config,
                ..DynamicConfig::default()
            };
            let records = dynamic_loop(&mut solver.state, &mut NoEvents, &config)?;
            used = records.last().map_or(0, |r| r.report.iterations);
            solver.settled = true;
        }
        if let Some(out) = iterations.as_mut() {
            *out = used;
        }
        Ok(())
    })
}

/// Assignment extracted from the current plan; `-1` for inactive agents.
/// Fails with `NotConverged` while the residual is above epsilon.
///
/// # Safety
/// `assignment` must hold `len` writable entries.
#[no_mangle]
pub unsafe extern "C" fn swarm_ot_solver_assignment(
    solver: *const SwarmOtSolver,
    assignment: *mut i64,
    len: usize,
) -> SwarmOtStatus {
    guard(|| {
        let solver = deref(solver, "solver")?;
        let agents = solver.state.topology().agent_count();
        let out = slice_mut(assignment, len, agents, "assignment")?;
        let extracted = extract_assignment(
            &solver.state.admm,
            solver.state.topology(),
            solver.config.epsilon,
        )?;
        write_assignment(out, agents, extracted.iter());
        Ok(())
    })
}

/// Copies the consensus plan, row-major `agents x waypoints`.
///
/// # Safety
/// `plan` must hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn swarm_ot_solver_plan(
    solver: *const SwarmOtSolver,
    plan: *mut f64,
    len: usize,
) -> SwarmOtStatus {
    guard(|| {
        let solver = deref(solver, "solver")?;
        let source = solver.state.admm.pi.as_slice();
        let out = slice_mut(plan, len, source.len(), "plan")?;
        out[..source.len()].copy_from_slice(source);
        Ok(())
    })
}

fn apply(solver: &mut SwarmOtSolver, event: SwarmEvent) -> Result<(), Failure> {
    solver.state.apply_event(event)?;
    solver.settled = false;
    Ok(())
}

/// `agent` reached its assigned `waypoint`; the waypoint leaves the network.
///
/// # Safety
/// `solver` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn swarm_ot_solver_waypoint_reached(
    solver: *mut SwarmOtSolver,
    agent: usize,
    waypoint: usize,
    reading: i32,
) -> SwarmOtStatus {
    guard(|| {
        let solver = deref_mut(solver, "solver")?;
        if !matches!(reading, 0 | 1) {
            return Err(Error::InvalidReading(reading).into());
        }
        apply(
            solver,
            SwarmEvent::WaypointReached {
                agent,
                waypoint,
                reading,
            },
        )
    })
}

/// # Safety
/// `solver` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn swarm_ot_solver_agent_dropout(
    solver: *mut SwarmOtSolver,
    agent: usize,
) -> SwarmOtStatus {
    guard(|| {
        apply(
            deref_mut(solver, "solver")?,
            SwarmEvent::AgentDropout { agent },
        )
    })
}

/// New rates on one edge; pass NaN to leave a side unchanged.
///
/// # Safety
/// `solver` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn swarm_ot_solver_set_rates(
    solver: *mut SwarmOtSolver,
    agent: usize,
    waypoint: usize,
    gamma: f64,
    delta: f64,
) -> SwarmOtStatus {
    guard(|| {
        let keep_nan = |v: f64| (!v.is_nan()).then_some(v);
        let update = EdgeUpdate {
            agent,
            waypoint,
            gamma: keep_nan(gamma),
            delta: keep_nan(delta),
        };
        apply(
            deref_mut(solver, "solver")?,
            SwarmEvent::ParamUpdate(vec![update]),
        )
    })
}

/// Encodes the three-integer waypoint report into 12 bytes.
///
/// # Safety
/// `out` must hold `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn swarm_ot_encode_message(
    agent: i32,
    waypoint: i32,
    reading: i32,
    out: *mut u8,
    len: usize,
) -> SwarmOtStatus {
    guard(|| {
        let out = slice_mut(out, len, MESSAGE_LEN, "out")?;
        let bytes = encode_message(&WaypointMessage::new(agent, waypoint, reading)?);
        out[..MESSAGE_LEN].copy_from_slice(&bytes);
        Ok(())
    })
}

/// # Safety
/// `bytes` must hold `len` readable bytes; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn swarm_ot_decode_message(
    bytes: *const u8,
    len: usize,
    agent: *mut i32,
    waypoint: *mut i32,
    reading: *mut i32,
) -> SwarmOtStatus {
    guard(|| {
        let msg = decode_message(slice(bytes, len, "bytes")?)?;
        *deref_mut(agent, "agent")? = msg.agent_id;
        *deref_mut(waypoint, "waypoint")? = msg.waypoint_id;
        *deref_mut(reading, "reading")? = msg.reading;
        Ok(())
    })
}
