use anyhow::Result;
use serde_json::{json, Map, Value};
use whitney_core::body::AnyBody;
use whitney_core::chains::{cube_trajectory_to_points, run_walk, run_walk_with, ChrKernel, MpKernel};
use whitney_core::diagnostics::{chr_burn_in, mixing_curve, mp_burn_in, UniformityGrid, WhitneyHistogram};
use whitney_core::finite::{
    build_aux_chain, conductance_profile_bruteforce, cut_conductance, half_cube_experiment, ChainState,
};
use whitney_core::rng::{stream_rng, WalkRng};
use whitney_core::whitney::{scale_exponent_for, DyadicCube};
use whitney_core::{ConvexBody, Norm, WhitneyContext};

use crate::config::{csv, emit, json_document, json_lines, load_body, parse_p, usage, RunConfig, StartSpec};
use crate::{DecomposeArgs, FiniteArgs, MixcurveArgs, Report, SampleArgs, UniformityArgs, Walk};

// Streams of the run seed: walks use stream 0 through `run_walk`'s seeding
// or explicitly; start draws and in-cube point draws get their own.
const START_STREAM: u64 = 1;
const POINT_STREAM: u64 = 2;

fn cube_json(q: &DyadicCube, status: &str) -> Value {
    json!({
        "status": status,
        "level": q.level(),
        "vertex": q.vertex(),
        "side": q.side(),
        "center": q.center(),
    })
}

fn fmt_row(values: impl IntoIterator<Item = f64>) -> Vec<String> {
    values.into_iter().map(|v| v.to_string()).collect()
}

fn volume_of(body: &AnyBody, given: Option<f64>) -> Result<f64> {
    given
        .or_else(|| body.volume())
        .ok_or_else(|| usage("the body has no closed-form volume; pass --volume"))
}

fn aspect_ratio(body: &AnyBody) -> f64 {
    body.outer_radius() / body.inner_radius(Norm::Inf)
}

/// Draws a start inside `K`, redrawing uniform starts that fall outside.
fn start_point(spec: &StartSpec, body: &AnyBody, rng: &mut WalkRng) -> Result<Vec<f64>> {
    let scale = scale_exponent_for(body.outer_radius());
    loop {
        match spec.draw(body, scale, rng) {
            Ok(x) => return Ok(x),
            Err(_) if matches!(spec, StartSpec::Uniform { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
}

/// The start cube of a cube walk. A point on a cube facet starts in the cube
/// on the positive side of it.
fn start_cube(spec: &StartSpec, ctx: &WhitneyContext<AnyBody>, rng: &mut WalkRng) -> Result<DyadicCube> {
    if let StartSpec::Cube { level, vertex } = spec {
        let q = ctx.cube(*level, vertex);
        if q.dim() != ctx.dim() || !ctx.in_decomposition(&q)? {
            return Err(usage(format!("cube {level}:{vertex:?} is not in the decomposition")));
        }
        return Ok(q);
    }
    let nudge = (-40.0f64).exp2() * ctx.body().outer_radius().max(1.0);
    loop {
        let mut x = start_point(spec, ctx.body(), rng)?;
        let located = match ctx.locate_cube(&x) {
            Err(whitney_core::Error::BoundaryPoint { .. }) => {
                x.iter_mut().for_each(|v| *v += nudge);
                ctx.locate_cube(&x)
            }
            other => other,
        };
        match located {
            Ok(q) => return Ok(q),
            Err(_) if matches!(spec, StartSpec::Uniform { .. }) => continue,
            Err(e) => return Err(usage(format!("cannot start the cube walk at {x:?}: {e}"))),
        }
    }
}

pub fn decompose(a: DecomposeArgs) -> Result<()> {
    let p = parse_p(&a.common.p)?;
    let mut cfg = RunConfig::new("decompose", a.common.seed, &p.to_string());
    cfg.output = a.common.output.clone();
    cfg.depth = Some(a.depth);
    cfg.option("frontier", a.frontier);
    let body = load_body(&a.common.body, &mut cfg)?;
    let ctx = WhitneyContext::new(body, p);
    let mut en = ctx.enumerate_cubes(a.depth)?;
    en.complete.sort();
    en.frontier.sort();
    let mut records: Vec<Value> = en.complete.iter().map(|q| cube_json(q, "complete")).collect();
    if a.frontier {
        records.extend(en.frontier.iter().map(|q| cube_json(q, "frontier")));
    }
    records.push(json!({ "summary": {
        "scale_exponent": ctx.scale_exponent(),
        "cube_count": en.complete.len(),
        "frontier_count": en.frontier.len(),
        "total_volume": en.complete_volume(),
        "frontier_volume": en.frontier_volume(),
    }}));
    emit(&cfg, &json_lines(&cfg, records))
}

pub fn sample(a: SampleArgs) -> Result<()> {
    let p = parse_p(&a.common.p)?;
    if a.stride == 0 {
        return Err(usage("--stride must be positive"));
    }
    let start = StartSpec::parse(&a.start)?;
    let seed = a.common.seed;
    let mut cfg = RunConfig::new("sample", seed, &p.to_string());
    cfg.output = a.common.output.clone();
    cfg.walk = Some(a.walk.name().into());
    cfg.steps = Some(a.steps);
    cfg.stride = Some(a.stride);
    cfg.option("start", &start);
    let body = load_body(&a.common.body, &mut cfg)?;
    let n = body.dim();
    let coords: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    let mut start_rng = stream_rng(seed, START_STREAM);
    let text = match a.walk {
        Walk::Chr => {
            let x0 = start_point(&start, &body, &mut start_rng)?;
            let traj = run_walk(&ChrKernel::new(&body), x0, a.steps, a.stride, seed)?;
            csv(&cfg, &coords, traj.states.into_iter().map(fmt_row))
        }
        Walk::Mp => {
            let ctx = WhitneyContext::new(body, p);
            let q0 = start_cube(&start, &ctx, &mut start_rng)?;
            let traj = run_walk(&MpKernel { ctx: &ctx }, q0, a.steps, a.stride, seed)?;
            let points = cube_trajectory_to_points(&traj, &mut stream_rng(seed, POINT_STREAM));
            let mut header = vec!["level".to_string()];
            header.extend((0..n).map(|i| format!("v{i}")));
            header.extend(coords);
            let rows = traj.states.iter().zip(points).map(|(q, x)| {
                let mut row = vec![q.level().to_string()];
                row.extend(q.vertex().iter().map(|v| v.to_string()));
                row.extend(fmt_row(x));
                row
            });
            csv(&cfg, &header, rows)
        }
    };
    emit(&cfg, &text)
}

pub fn finite(a: FiniteArgs) -> Result<()> {
    let p = parse_p(&a.p)?;
    let mut cfg = RunConfig::new("finite", a.seed, &p.to_string());
    cfg.output = a.output.clone();
    cfg.depth = Some(a.depth);
    cfg.option("report", a.report.name());
    let mut out = Map::new();
    if a.report == Report::Halfcube {
        let n = a.n.ok_or_else(|| usage("--report halfcube needs --n"))?;
        cfg.option("n", n);
        let report = half_cube_experiment(n, p, a.depth)?;
        out.insert("half_cube".into(), serde_json::to_value(report)?);
        return emit(&cfg, &json_document(&cfg, out));
    }
    let path = a.body.as_ref().ok_or_else(|| usage(format!("--report {} needs --body", a.report.name())))?;
    let body = load_body(path, &mut cfg)?;
    let volume = volume_of(&body, a.volume)?;
    cfg.option("volume", volume);
    let ctx = WhitneyContext::new(body, p);
    let chain = build_aux_chain(&ctx, a.depth, volume)?;
    let fused = chain.states().iter().filter(|s| matches!(s, ChainState::Fused(_))).count();
    out.insert("states".into(), json!(chain.len()));
    out.insert("fused_states".into(), json!(fused));
    match a.report {
        Report::Balance => {
            out.insert("row_sum_error".into(), json!(chain.row_sum_error()));
            out.insert("stationarity_error".into(), json!(chain.stationarity_error()));
            out.insert("detailed_balance_error".into(), json!(chain.detailed_balance_error()));
        }
        Report::Cut => {
            cfg.option("axis", a.axis);
            if a.axis >= ctx.dim() {
                return Err(usage(format!("--axis {} out of range", a.axis)));
            }
            let in_s: Vec<bool> = chain
                .states()
                .iter()
                .map(|s| matches!(s, ChainState::Cube(q) if q.vertex()[a.axis] < 0))
                .collect();
            out.insert("cut".into(), serde_json::to_value(cut_conductance(&chain, &in_s)?)?);
        }
        Report::Profile => {
            cfg.option("alpha", a.alpha);
            let phi = conductance_profile_bruteforce(&chain, a.alpha)?;
            out.insert("profile".into(), json!({ "alpha": a.alpha, "phi": phi }));
        }
        Report::Evolve => {
            let start = StartSpec::parse(&a.start)?;
            cfg.option("steps", a.steps);
            cfg.option("start", &start);
            let q0 = start_cube(&start, &ctx, &mut stream_rng(a.seed, START_STREAM))?;
            let i0 = chain
                .index_of(&ChainState::Cube(q0.clone()))
                .ok_or_else(|| usage(format!("start cube at level {} is below the cutoff", q0.level())))?;
            let tv: Vec<f64> = chain
                .evolve(&chain.point_mass(i0), a.steps)
                .iter()
                .map(|nu| chain.tv_to_stationary(nu))
                .collect();
            out.insert("start_cube".into(), cube_json(&q0, "complete"));
            out.insert("tv".into(), json!(tv));
        }
        Report::Halfcube => unreachable!("handled above"),
    }
    emit(&cfg, &json_document(&cfg, out))
}

pub fn mixcurve(a: MixcurveArgs) -> Result<()> {
    let p = parse_p(&a.common.p)?;
    let start = StartSpec::parse(&a.start)?;
    let checkpoints: Vec<u64> = match &a.checkpoints {
        Some(c) => c.clone(),
        None => {
            if a.every == 0 {
                return Err(usage("--every must be positive"));
            }
            (0..=a.max_steps).step_by(a.every as usize).collect()
        }
    };
    let seed = a.common.seed;
    let mut cfg = RunConfig::new("mixcurve", seed, &p.to_string());
    cfg.output = a.common.output.clone();
    cfg.walk = Some(a.walk.name().into());
    cfg.depth = Some(a.bin_depth);
    cfg.option("checkpoints", &checkpoints);
    cfg.option("replicas", a.replicas);
    cfg.option("start", &start);
    let body = load_body(&a.common.body, &mut cfg)?;
    let volume = volume_of(&body, a.volume)?;
    cfg.option("volume", volume);
    let ctx = WhitneyContext::new(body, p);
    let hist = WhitneyHistogram::new(ctx.enumerate_cubes(a.bin_depth)?.complete, volume)?;
    let remainder = hist.len() - 1;

    // Validate the start once so replica draws cannot fail.
    let curve = match a.walk {
        Walk::Mp => {
            start_cube(&start, &ctx, &mut stream_rng(seed, START_STREAM))?;
            mixing_curve(
                &MpKernel { ctx: &ctx },
                |rng| start_cube(&start, &ctx, rng).expect("validated start"),
                |q| hist.bin_of(q),
                hist.pi(),
                &checkpoints,
                a.replicas,
                seed,
            )?
        }
        Walk::Chr => {
            start_point(&start, ctx.body(), &mut stream_rng(seed, START_STREAM))?;
            mixing_curve(
                &ChrKernel::new(ctx.body()),
                |rng| start_point(&start, ctx.body(), rng).expect("validated start"),
                |x| ctx.locate_cube(x).map_or(remainder, |q| hist.bin_of(&q)),
                hist.pi(),
                &checkpoints,
                a.replicas,
                seed,
            )?
        }
    };
    let header = ["step", "tv", "stderr"].map(String::from);
    let rows = curve
        .iter()
        .map(|m| vec![m.step.to_string(), m.tv.to_string(), m.stderr.to_string()]);
    emit(&cfg, &csv(&cfg, &header, rows))
}

pub fn uniformity(a: UniformityArgs) -> Result<()> {
    let p = parse_p(&a.common.p)?;
    if a.stride == 0 {
        return Err(usage("--stride must be positive"));
    }
    let start = StartSpec::parse(&a.start)?;
    let seed = a.common.seed;
    let mut cfg = RunConfig::new("uniformity", seed, &p.to_string());
    cfg.output = a.common.output.clone();
    cfg.walk = Some(a.walk.name().into());
    cfg.stride = Some(a.stride);
    cfg.option("points", a.points);
    cfg.option("grid", a.grid);
    cfg.option("probes", a.probes);
    cfg.option("start", &start);
    let body = load_body(&a.common.body, &mut cfg)?;
    let n = body.dim();
    let burn_in = a.burn_in.unwrap_or_else(|| match a.walk {
        Walk::Chr => chr_burn_in(n, aspect_ratio(&body), a.warmth, a.eps, 1.0),
        Walk::Mp => mp_burn_in(n, p, aspect_ratio(&body), a.warmth, a.eps, 1.0),
    });
    cfg.option("burn_in", burn_in);
    cfg.option("warmth", a.warmth);
    cfg.option("eps", a.eps);
    cfg.steps = Some(burn_in + a.stride * a.points);

    let mut walk_rng = stream_rng(seed, 0);
    let mut start_rng = stream_rng(seed, START_STREAM);
    let grid = UniformityGrid::new(&body, a.grid, a.probes, seed)?;
    let points: Vec<Vec<f64>> = match a.walk {
        Walk::Chr => {
            let kernel = ChrKernel::new(&body);
            let x0 = start_point(&start, &body, &mut start_rng)?;
            let warm = run_walk_with(&kernel, x0, burn_in, burn_in.max(1), &mut walk_rng)?;
            let warm = warm.states.last().expect("initial state").clone();
            let traj = run_walk_with(&kernel, warm, a.stride * a.points, a.stride, &mut walk_rng)?;
            traj.states.into_iter().skip(1).collect()
        }
        Walk::Mp => {
            let ctx = WhitneyContext::new(body.clone(), p);
            let kernel = MpKernel { ctx: &ctx };
            let q0 = start_cube(&start, &ctx, &mut start_rng)?;
            let warm = run_walk_with(&kernel, q0, burn_in, burn_in.max(1), &mut walk_rng)?;
            let warm = warm.states.last().expect("initial state").clone();
            let mut traj = run_walk_with(&kernel, warm, a.stride * a.points, a.stride, &mut walk_rng)?;
            traj.states.remove(0);
            cube_trajectory_to_points(&traj, &mut stream_rng(seed, POINT_STREAM))
        }
    };
    let report = grid.test(&points)?;
    let mut out = Map::new();
    out.insert("burn_in".into(), json!(burn_in));
    out.insert("report".into(), serde_json::to_value(report)?);
    emit(&cfg, &json_document(&cfg, out))
}
