use std::fs;
use std::path::Path;
use std::sync::Arc;

use anyhow::{Context, Result};
use irp_core::benchgen::{generate_instance, Geometry, ScenarioSpec};
use irp_core::io::{self, RunBundle};
use irp_core::search::enumerate_front;
use irp_core::vrp::{brute_force_oracle, rtr_improve, savings_construct};
use irp_core::{Budget, EvalSettings, Error, Search, SearchConfig, SolverKind, VrpSolver};

use crate::{EnumerateArgs, GenerateArgs, RoutingSolver, SearchSolver, ServeArgs, SolveArgs, VrpSolveArgs};

/// 1 for I/O failures anywhere in the chain, 2 for everything else.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<std::io::Error>() {
            return 1;
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            return if e.is_user_error() { 2 } else { 1 };
        }
    }
    2
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn load_instance(path: &Path) -> Result<irp_core::Instance> {
    let text = read_text(path)?;
    io::parse_instance(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn generate(a: GenerateArgs) -> Result<()> {
    let text = read_text(&a.geometry)?;
    let name = a.geometry.file_stem().map_or("geometry".into(), |s| s.to_string_lossy().into_owned());
    let geometry = Geometry::parse(&name, &text).with_context(|| format!("parsing {}", a.geometry.display()))?;
    let spec = ScenarioSpec {
        kind: a.scenario,
        horizon: a.periods,
        deviation: a.deviation,
        seed: a.seed,
        storage_cap_factor: a.storage_factor,
    };
    let generated = generate_instance(&geometry, &spec, a.capacity)?;
    generated.instance.ensure_valid()?;
    write_text(&a.out, &io::format_instance(&generated.instance))?;
    println!(
        "customers={} periods={} clamped={}",
        generated.instance.num_customers(),
        generated.instance.horizon,
        generated.clamped
    );
    Ok(())
}

pub fn solve(a: SolveArgs) -> Result<()> {
    let inst = Arc::new(load_instance(&a.instance)?);
    let config = SearchConfig {
        ref_point_count: a.refpoints,
        solver: match a.vrp {
            SearchSolver::Savings => SolverKind::Savings,
            SearchSolver::Rtr => SolverKind::Rtr,
        },
        seed: a.seed,
        budget: Budget { max_steps: a.max_steps, max_evaluations: a.max_evaluations, max_seconds: a.max_seconds },
        ..Default::default()
    };
    let mut search = Search::new(inst.clone(), config)?;
    let termination = search.run()?;
    log::info!("search ended: {termination:?}");
    let stats = search.stats();
    let bundle = RunBundle { archive: search.archive().clone(), stats, config: search.config().clone() };
    io::write_bundle(&a.out, inst.num_customers(), &bundle)
        .with_context(|| format!("writing bundle to {}", a.out.display()))?;
    println!("{}", io::stats_line(&stats));
    Ok(())
}

pub fn enumerate(a: EnumerateArgs) -> Result<()> {
    let inst = load_instance(&a.instance)?;
    let settings = EvalSettings { solver: VrpSolver::Exact, seed: 0 };
    let (front, evaluated) = enumerate_front(&inst, a.max_freq, &settings)?;
    write_text(&a.out, &io::format_archive(&front, inst.num_customers())?)?;
    println!("evaluations={evaluated} size={}", front.len());
    Ok(())
}

pub fn vrp_solve(a: VrpSolveArgs) -> Result<()> {
    let text = read_text(&a.problem)?;
    let problem = io::parse_routing_problem(&text).with_context(|| format!("parsing {}", a.problem.display()))?;
    let solution = match a.vrp {
        RoutingSolver::Savings => savings_construct(&problem)?,
        RoutingSolver::Rtr => rtr_improve(&problem, &savings_construct(&problem)?, a.seed, &Default::default())?,
        RoutingSolver::Exact => brute_force_oracle(&problem)?,
    };
    let json = serde_json::to_string_pretty(&solution)? + "\n";
    match &a.out {
        Some(path) => write_text(path, &json)?,
        None => print!("{json}"),
    }
    Ok(())
}

pub fn serve(a: ServeArgs) -> Result<()> {
    let store = match &a.data_dir {
        Some(dir) => irp_service::Store::open(dir).with_context(|| format!("opening {}", dir.display()))?,
        None => irp_service::Store::in_memory(),
    };
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(irp_service::serve(a.addr, store))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let io_err = anyhow::Error::from(std::io::Error::other("disk")).context("writing x");
        assert_eq!(exit_code(&io_err), 1);
        let wrapped_io = anyhow::Error::from(Error::Io(std::io::Error::other("disk")));
        assert_eq!(exit_code(&wrapped_io), 1);
        assert_eq!(exit_code(&anyhow::Error::from(Error::contract("bad"))), 2);
        assert_eq!(exit_code(&anyhow::anyhow!("other")), 2);
    }
}
