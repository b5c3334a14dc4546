use std::collections::BTreeMap;
use std::fs;

use anyhow::{bail, Context};
use serde_json::{json, Value};

use firefight::branching::{br_bracket, br_exact_periodic, lower_bound_certificate};
use firefight::cayley::{growth_rate_estimate, polynomial_probe, wait_and_surround, CayleyBall, GroupModel};
use firefight::game::{feasibility_check, simulate, synthesize_cutset_strategy, Arena, BudgetSequence, Strategy};
use firefight::oracle::{brute_force_containment, cache_key, random_corpus, run_triangle, ResultCache};
use firefight::{expand_with_cap, Error, Exec, TreeSpec, VertexId};

use crate::args::{BrArgs, CayleyArgs, CayleyMode, ContainArgs, OracleArgs, SimulateArgs};

/// How a run ended, which decides the exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Determinate,
    Indeterminate,
    Fault,
}

pub type Table = (Vec<&'static str>, Vec<Vec<String>>);

pub struct Outcome {
    pub status: Status,
    pub report: Value,
    pub table: Option<Table>,
}

impl Outcome {
    fn done(report: Value) -> Self {
        Outcome { status: Status::Determinate, report, table: None }
    }

    fn with_table(mut self, table: Table) -> Self {
        self.table = Some(table);
        self
    }
}

pub struct Ctx {
    pub cap: usize,
    pub exec: Exec,
}

fn load(path: &std::path::Path) -> anyhow::Result<TreeSpec> {
    TreeSpec::from_file(path).with_context(|| format!("reading {}", path.display()))
}

fn to_json<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialise")
}

pub fn br(args: &BrArgs, _ctx: &Ctx) -> anyhow::Result<Outcome> {
    let spec = load(&args.spec)?;
    let exact = br_exact_periodic(&spec)?;
    let bracket = if spec.is_infinite() { Some(br_bracket(&spec, args.tol, args.depth_max)?) } else { None };
    let heuristic = bracket.as_ref().is_some_and(|b| b.heuristic);
    let table = bracket.as_ref().map(|b| {
        let rows = b.probes.iter().map(|(l, c)| vec![l.to_string(), format!("{c:?}")]).collect();
        (vec!["lambda", "classification"], rows)
    });
    let mut out = Outcome {
        status: if heuristic { Status::Indeterminate } else { Status::Determinate },
        report: json!({ "exact": exact, "bracket": bracket }),
        table: None,
    };
    out.table = table;
    Ok(out)
}

pub fn contain(args: &ContainArgs, ctx: &Ctx) -> anyhow::Result<Outcome> {
    let spec = load(&args.spec)?;
    let br = match &spec {
        TreeSpec::Explicit(_) => 1.0,
        _ => br_exact_periodic(&spec)?,
    };
    let l = args.lambda.to_f64();
    if (l - br).abs() < 1e-9 {
        return Ok(Outcome {
            status: Status::Indeterminate,
            report: json!({ "br": br, "result": "undetermined", "reason": "λ equals the branching number" }),
            table: None,
        });
    }
    if l > br {
        return contain_above(args, &spec, br, ctx);
    }
    let cert = lower_bound_certificate(&spec, &args.lambda)?;
    let check = cert.verify(&spec, 60, 12)?;
    let k = cert.k.max(args.k);
    let budget = BudgetSequence::ExponentialFloor(args.lambda.clone());
    let mut depths = vec![];
    let mut stopped = None;
    for d in k + 1..=k + args.depths {
        match feasibility_check(&spec, k, &budget, d) {
            Ok(dec) => depths.push(json!({ "depth": d, "feasible": dec.is_feasible() })),
            Err(Error::VertexCap { cap }) => {
                stopped = Some(json!({ "depth": d, "vertex_cap": cap }));
                break;
            }
            Err(e) => return Err(e.into()),
        }
    }
    let all_infeasible = depths.iter().all(|d| d["feasible"] == false);
    let status = if check.all() && all_infeasible && stopped.is_none() { Status::Determinate } else { Status::Indeterminate };
    Ok(Outcome {
        status,
        report: json!({
            "br": br,
            "result": "not-contained",
            "certificate": cert,
            "certificate_check": check,
            "fire_radius": k,
            "feasibility": depths,
            "stopped_at": stopped,
        }),
        table: None,
    })
}

fn contain_above(args: &ContainArgs, spec: &TreeSpec, br: f64, _ctx: &Ctx) -> anyhow::Result<Outcome> {
    let plan = match synthesize_cutset_strategy(spec, &args.lambda, args.k, args.depth_max) {
        Ok(plan) => plan,
        Err(e @ Error::NoLightCutset { .. }) => {
            return Ok(Outcome {
                status: Status::Indeterminate,
                report: json!({ "br": br, "result": "undetermined", "reason": e.to_string() }),
                table: None,
            })
        }
        Err(e) => return Err(e.into()),
    };
    let budget = BudgetSequence::ExponentialFloor(args.lambda.clone());
    let sim = simulate(&plan.truncation, args.k, &plan.strategy, &budget, plan.depth + 2)?;
    let schedule: BTreeMap<u32, &Vec<VertexId>> = match &plan.strategy {
        Strategy::Cutset { by_level, offset } => by_level.iter().map(|(l, vs)| (l - offset, vs)).collect(),
        _ => BTreeMap::new(),
    };
    let rows = sim
        .trace
        .rounds
        .iter()
        .map(|r| vec![r.round.to_string(), r.budget.to_string(), r.protected.len().to_string(), r.burned.len().to_string()])
        .collect();
    let status = if sim.verdict.is_contained() { Status::Determinate } else { Status::Indeterminate };
    Ok(Outcome {
        status,
        report: json!({
            "br": br,
            "result": "contained",
            "epsilon": plan.epsilon,
            "cut_weight": plan.weight,
            "depth": plan.depth,
            "schedule": schedule,
            "verdict": sim.verdict,
        }),
        table: None,
    }
    .with_table((vec!["round", "budget", "protected", "burned"], rows)))
}

fn parse_schedule(text: &str) -> anyhow::Result<Strategy> {
    let mut rounds = BTreeMap::new();
    for part in text.split(';').filter(|p| !p.trim().is_empty()) {
        let (round, verts) = part.split_once(':').with_context(|| format!("schedule entry {part:?} lacks ':'"))?;
        let round: u32 = round.trim().parse().with_context(|| format!("bad round in {part:?}"))?;
        let verts = verts
            .split(',')
            .filter(|v| !v.trim().is_empty())
            .map(|v| v.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .with_context(|| format!("bad vertex in {part:?}"))?;
        rounds.insert(round, verts);
    }
    Ok(Strategy::Schedule { rounds })
}

pub fn simulate_cmd(args: &SimulateArgs, ctx: &Ctx) -> anyhow::Result<Outcome> {
    let spec = load(&args.spec)?;
    let trunc = expand_with_cap(&spec, args.depth, ctx.cap)?;
    let strategy = if let Some(path) = &args.source.strategy {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing strategy {}", path.display()))?
    } else if let Some(targets) = &args.source.canonical {
        Strategy::canonical(targets.iter().copied())
    } else if let Some(text) = &args.source.schedule {
        parse_schedule(text)?
    } else {
        bail!("no strategy given");
    };
    let horizon = args.horizon.unwrap_or(args.depth + 2);
    match simulate(&trunc, args.k, &strategy, &args.budget, horizon) {
        Ok(sim) => Ok(Outcome::done(json!({ "verdict": sim.verdict, "trace": sim.trace }))),
        Err(Error::StrategyFault { round, fault }) => Ok(Outcome {
            status: Status::Fault,
            report: json!({ "fault": fault.to_string(), "round": round }),
            table: None,
        }),
        Err(e) => Err(e.into()),
    }
}

fn corpus_budgets() -> Vec<BudgetSequence> {
    ["const:1", "const:2", "exp:3/2", "exp:2", "list:2,1", "list:1,0,3"]
        .iter()
        .map(|s| s.parse().expect("catalogue entries parse"))
        .collect()
}

pub fn oracle(args: &OracleArgs, ctx: &Ctx) -> anyhow::Result<Outcome> {
    if let Some(count) = args.corpus {
        let corpus = random_corpus(args.seed, count, args.max_outside);
        let budgets = corpus_budgets();
        let report = run_triangle(&corpus, &budgets, ctx.exec)?;
        let status = if report.disagreements.is_empty() { Status::Determinate } else { Status::Fault };
        return Ok(Outcome { status, report: json!({ "budgets": budgets, "triangle": report }), table: None });
    }
    let path = args.spec.as_ref().context("a spec file or --corpus is required")?;
    let spec = load(path)?;
    let trunc = expand_with_cap(&spec, args.depth, ctx.cap)?;
    let fire: Vec<VertexId> = trunc.ball(args.k)?.collect();
    let horizon = args.horizon.unwrap_or(args.depth + 2);
    let key = cache_key(&spec, &fire, &args.budget, horizon, args.mode.into());
    let mut cache = args.cache.as_ref().map(ResultCache::open).transpose()?;
    if let Some(hit) = cache.as_ref().and_then(|c| c.get(&key)) {
        return Ok(Outcome::done(json!({ "key": key, "feasible": hit, "cached": true })));
    }
    let decision = brute_force_containment(&trunc, &fire, &args.budget, horizon, args.mode.into())?;
    if let Some(c) = cache.as_mut() {
        c.insert(key.clone(), decision.is_feasible());
        c.save()?;
    }
    Ok(Outcome::done(json!({ "key": key, "feasible": decision.is_feasible(), "decision": decision, "cached": false })))
}

pub fn cayley(args: &CayleyArgs, ctx: &Ctx) -> anyhow::Result<Outcome> {
    let model: GroupModel = args.group.parse()?;
    match args.mode {
        CayleyMode::Growth => {
            let r = args.radius.unwrap_or(10);
            let g = growth_rate_estimate(&model, r, ctx.cap)?;
            let rows = (1..=r as usize)
                .map(|i| {
                    vec![
                        i.to_string(),
                        g.spheres[i].to_string(),
                        g.balls[i].to_string(),
                        g.ball_root[i - 1].to_string(),
                        g.sphere_ratio[i - 1].to_string(),
                    ]
                })
                .collect();
            let report = json!({
                "group": model,
                "radius": r,
                "ball_root": g.last_ball_root(),
                "sphere_ratio": g.last_sphere_ratio(),
                "estimates": g,
            });
            Ok(Outcome::done(report).with_table((vec!["radius", "sphere", "ball", "ball_root", "sphere_ratio"], rows)))
        }
        CayleyMode::Ball | CayleyMode::Tree => {
            let r = args.radius.unwrap_or(4);
            let ball = CayleyBall::build(&model, r, ctx.cap)?;
            let tree = ball.lex_min_tree();
            if let Some(path) = &args.export {
                fs::write(path, tree.to_toml_string()).with_context(|| format!("writing {}", path.display()))?;
            }
            let rows = (0..ball.len()).map(|v| vec![v.to_string(), ball.distance(v).to_string(), ball.word_string(v)]).collect();
            let report = json!({
                "group": model,
                "radius": r,
                "generators": model.generator_names(),
                "spheres": ball.sphere_sizes(),
                "vertices": ball.len(),
            });
            Ok(Outcome::done(report).with_table((vec!["vertex", "distance", "word"], rows)))
        }
        CayleyMode::Surround => {
            let r = args.radius.unwrap_or(12);
            let lambda = args.lambda.clone().context("--lambda is required for surround")?;
            match wait_and_surround(&model, args.k, &lambda, r, ctx.cap) {
                Ok(rep) => {
                    let rows = rep
                        .table
                        .iter()
                        .map(|row| vec![row.round.to_string(), row.budget.clone(), row.sphere.to_string(), row.sphere_size.to_string()])
                        .collect();
                    let status = if rep.verdict.is_contained() { Status::Determinate } else { Status::Indeterminate };
                    Ok(Outcome { status, report: to_json(&rep), table: None }
                        .with_table((vec!["round", "budget", "sphere", "sphere_size"], rows)))
                }
                Err(Error::NoTrigger { radius, trace }) => Ok(Outcome {
                    status: Status::Indeterminate,
                    report: json!({ "group": model, "result": "no-trigger", "radius": radius, "trace": trace }),
                    table: None,
                }),
                Err(e) => Err(e.into()),
            }
        }
        CayleyMode::Polyprobe => {
            let depth = args.radius.unwrap_or(12);
            let budget = args
                .budget
                .clone()
                .unwrap_or(BudgetSequence::PolynomialFloor { coeff: args.c.clone(), degree: args.d });
            let rep = polynomial_probe(&model, &budget, args.k, depth, ctx.cap)?;
            let rows = rep
                .table
                .iter()
                .map(|row| {
                    vec![
                        row.round.to_string(),
                        row.cumulative_budget.to_string(),
                        row.next_sphere.to_string(),
                        row.fire_sphere.map(|s| s.to_string()).unwrap_or_default(),
                    ]
                })
                .collect();
            Ok(Outcome::done(to_json(&rep)).with_table((vec!["round", "cumulative_budget", "next_sphere", "fire_sphere"], rows)))
        }
    }
}
