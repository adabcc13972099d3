"""Command-line benchmark harness: generate, plan, campaign, plot-prior."""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import statistics
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import List, Optional

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .environment import CostParams, build_sdf, is_collision_free
from .gp_prior import NoiseProfile, TimeGrid, build_prior
from .interpolation import build_table, densify
from .maze import MazeSpec, generate_maze, load_maze, save_maze
from .optimizer import OptimizerConfig, Planner, PlanResult
from .plotting import plot_environment, plot_prior
from .scenes import SceneSpec, generate_scene, load_scene, save_scene

ARMS = ("heteroscedastic", "homoscedastic")
SUMMARY_HEADER = ["arm", "maze_size", "k", "t_max_ms", "success_rate_pct", "mean_ms", "median_ms", "n"]
RAW_HEADER = ["arm", "maze", "maze_size", "plan_seed", "outcome", "cost", "iterations",
              "samples", "elapsed_ms", "error"]


class CampaignError(RuntimeError):
    pass


def noise_for_arm(arm: str, t_total: float) -> NoiseProfile:
    if arm == "heteroscedastic":
        return NoiseProfile.parabolic(t_total)
    if arm == "homoscedastic":
        return NoiseProfile.matched_constant(t_total)
    raise ValueError(f"unknown arm {arm!r}; expected one of {ARMS}")


@dataclass
class CampaignConfig:
    corpus: Optional[str] = None  # directory of maze_*/scene_* dirs; None = generate in memory
    maze_sizes: List[int] = field(default_factory=lambda: [3, 4, 5])
    count: int = 100
    seed: int = 0
    arms: List[str] = field(default_factory=lambda: ["heteroscedastic"])
    k_samples: int = 400
    m_elites: int = 3
    t_max: float = 1.0  # seconds
    deterministic: bool = False
    max_iters: int = 1000
    n_support: int = 11
    steps_per_interval: int = 5
    t_total: float = 20.0
    worker_count: int = 1
    chunk_size: int = 100
    robot_radius: float = 0.5
    safety_margin: float = 0.1
    out_dir: str = "results"
    save_runs: bool = True
    parallel_corpus: int = 0  # >1 runs mazes concurrently; timings then not comparable

    def __post_init__(self):
        if not self.arms:
            raise ValueError("need at least one campaign arm")
        for arm in self.arms:
            noise_for_arm(arm, self.t_total)
        if self.count < 1 or not self.maze_sizes:
            raise ValueError("count must be >= 1 and maze_sizes non-empty")

    def optimizer(self, seed: int) -> OptimizerConfig:
        return OptimizerConfig(
            k_samples=self.k_samples, m_elites=self.m_elites,
            time_budget=None if self.deterministic else self.t_max,
            max_iters=self.max_iters, steps_per_interval=self.steps_per_interval, seed=seed,
            worker_count=self.worker_count, chunk_size=self.chunk_size)

    def cost_params(self) -> CostParams:
        return CostParams(self.robot_radius, self.safety_margin)


# -- environments ----------------------------------------------------------------

def load_environment(directory):
    directory = Path(directory)
    try:
        kind = json.loads((directory / "meta.json").read_text()).get("kind", "maze")
    except (OSError, ValueError) as exc:
        raise ValueError(f"cannot load {directory / 'meta.json'}: {exc}") from exc
    return load_scene(directory) if kind == "scene" else load_maze(directory)


def env_size(env) -> str:
    return str(env.spec.n) if isinstance(env.spec, MazeSpec) else "scene"


def corpus_dirs(corpus) -> List[Path]:
    root = Path(corpus)
    if not root.is_dir():
        raise CampaignError(f"corpus directory {root} does not exist")
    return sorted(p for p in root.iterdir() if (p / "meta.json").is_file())


# -- planning --------------------------------------------------------------------

def run_plan(env, arm: str, cfg: CampaignConfig, seed: int):
    """Plan one environment; returns (PlanResult, Planner)."""
    grid = TimeGrid(cfg.t_total, cfg.n_support)
    prior = build_prior(env.start, env.goal, grid, noise_for_arm(arm, cfg.t_total))
    planner = Planner(prior, build_sdf(env.occupancy), cfg.cost_params(), cfg.optimizer(seed))
    return planner.plan(), planner


def result_record(result: PlanResult, planner: Planner, arm: str, cfg: CampaignConfig,
                  seed: int, source: str) -> dict:
    prior = planner.prior
    dense = densify(result.trajectory.states, prior.mean_at, planner.table)[:, :prior.dim]
    return {
        "source": source,
        "arm": arm,
        "seed": seed,
        "config": asdict(planner.config),
        "cost_params": asdict(cfg.cost_params()),
        "t_total": cfg.t_total,
        "n_support": cfg.n_support,
        "outcome": result.outcome,
        "cost": result.cost,
        "iterations": result.iterations,
        "samples_evaluated": result.samples_evaluated,
        # wall-clock numbers would make deterministic output differ run to run
        "elapsed_ms": None if cfg.deterministic else 1e3 * result.elapsed,
        "start": [float(v) for v in prior.start],
        "goal": [float(v) for v in prior.goal],
        "support_states": result.trajectory.states.ravel().tolist(),
        "dense_positions": dense.ravel().tolist(),
    }


def revalidate(record: dict, env) -> bool:
    """Rebuild prior and table from a stored record and re-check collision freedom."""
    noise = noise_for_arm(record["arm"], record["t_total"])
    grid = TimeGrid(record["t_total"], record["n_support"])
    prior = build_prior(env.start, env.goal, grid, noise)
    table = build_table(grid, noise, prior.dim, record["config"]["steps_per_interval"])
    states = np.asarray(record["support_states"]).reshape(prior.mean.shape)
    return is_collision_free(states, prior.mean_at, build_sdf(env.occupancy),
                             CostParams(**record["cost_params"]), table, tol=1e-9)


# -- campaign --------------------------------------------------------------------

@dataclass
class CampaignReport:
    summary: List[dict]
    raw: List[dict]
    timings: List[dict]


def _fmt(x: float) -> str:
    return repr(float(x))


def _run_one(job):
    cfg, arm, name, source, env, seed = job
    row = {"arm": arm, "maze": name, "maze_size": env_size(env) if env is not None else "",
           "plan_seed": seed, "outcome": "error", "cost": "", "iterations": "", "samples": "",
           "elapsed_ms": "", "error": ""}
    record = None
    elapsed = None
    try:
        if env is None:
            env = load_environment(source)
            row["maze_size"] = env_size(env)
        result, planner = run_plan(env, arm, cfg, seed)
        elapsed = 1e3 * result.elapsed
        row.update(outcome=result.outcome, cost=_fmt(result.cost), iterations=result.iterations,
                   samples=result.samples_evaluated,
                   elapsed_ms="" if cfg.deterministic else f"{elapsed:.3f}")
        record = result_record(result, planner, arm, cfg, seed, str(source))
    except Exception as exc:  # recorded per row; the campaign continues
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row, elapsed, record


def _jobs(cfg: CampaignConfig):
    if cfg.corpus is not None:
        dirs = corpus_dirs(cfg.corpus)
        if not dirs:
            raise CampaignError(f"corpus {cfg.corpus} contains no environments")
        items = [(d.name, str(d), None) for d in dirs]
    else:
        items = []
        for n in cfg.maze_sizes:
            for i in range(cfg.count):
                s = cfg.seed + i
                items.append((f"maze_{n}x{n}_{s:04d}", "", generate_maze(MazeSpec(n, seed=s),
                                                                        cfg.robot_radius)))
    return [(cfg, arm, name, src, env, cfg.seed + i)
            for arm in cfg.arms for i, (name, src, env) in enumerate(items)]


def summarize(cfg: CampaignConfig, raw: List[dict], elapsed: List[Optional[float]]) -> List[dict]:
    rows = []
    keys = []
    for r in raw:
        if (r["arm"], r["maze_size"]) not in keys:
            keys.append((r["arm"], r["maze_size"]))
    for arm, size in keys:
        idx = [i for i, r in enumerate(raw) if r["arm"] == arm and r["maze_size"] == size]
        solved = [i for i in idx if raw[i]["outcome"] == "solved"]
        # execution time averages solved runs, as a success/time pair per cell
        times = [elapsed[i] for i in solved if elapsed[i] is not None]
        rows.append({
            "arm": arm, "maze_size": size, "k": cfg.k_samples,
            "t_max_ms": "" if cfg.deterministic else f"{1e3 * cfg.t_max:g}",
            "success_rate_pct": f"{100.0 * len(solved) / len(idx):.1f}",
            "mean_ms": f"{statistics.fmean(times):.1f}" if times else "",
            "median_ms": f"{statistics.median(times):.1f}" if times else "",
            "n": len(idx),
        })
    return rows


def _write_csv(path: Path, header, rows) -> None:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=header, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    path.write_text(buf.getvalue())


def run_campaign(cfg: CampaignConfig, out=None) -> CampaignReport:
    out = sys.stdout if out is None else out
    jobs = _jobs(cfg)
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if cfg.parallel_corpus > 1:
        print(f"note: {cfg.parallel_corpus} mazes run concurrently; timings are not comparable",
              file=out)
        with ProcessPoolExecutor(max_workers=cfg.parallel_corpus) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        results = [_run_one(job) for job in jobs]
    raw = [r for r, _, _ in results]
    elapsed = [e for _, e, _ in results]
    timings = [{"arm": r["arm"], "maze": r["maze"], "elapsed_ms": "" if e is None else f"{e:.3f}"}
               for r, e in zip(raw, elapsed)]
    summary = summarize(cfg, raw, elapsed)
    _write_csv(out_dir / "raw.csv", RAW_HEADER, raw)
    _write_csv(out_dir / "summary.csv", SUMMARY_HEADER, summary)
    _write_csv(out_dir / "timings.csv", ["arm", "maze", "elapsed_ms"], timings)
    if cfg.save_runs:
        for row, _, record in results:
            if record is not None:
                path = out_dir / "runs" / row["arm"] / f"{row['maze']}.json"
                path.parent.mkdir(parents=True, exist_ok=True)
                path.write_text(json.dumps(record) + "\n")
    print(format_table(summary), file=out)
    return CampaignReport(summary, raw, timings)


def format_table(summary: List[dict]) -> str:
    """Success rate (%) / mean solve time (ms), one row per arm, one column per size."""
    sizes = []
    for r in summary:
        if r["maze_size"] not in sizes:
            sizes.append(r["maze_size"])
    arms = []
    for r in summary:
        if r["arm"] not in arms:
            arms.append(r["arm"])
    cells = {(r["arm"], r["maze_size"]): f"{r['success_rate_pct']} / {r['mean_ms'] or '-'}"
             for r in summary}
    cols = [f"{s}x{s}" if s.isdigit() else s for s in sizes]
    width = max([len(a) for a in arms] + [8])
    lines = [" " * width + "".join(f" | {c:>14}" for c in cols)]
    for a in arms:
        lines.append(f"{a:<{width}}" + "".join(f" | {cells.get((a, s), ''):>14}" for s in sizes))
    return "\n".join(lines)


# -- argument handling -------------------------------------------------------------

def _bool(text: str) -> bool:
    if text.lower() in ("1", "true", "yes", "on"):
        return True
    if text.lower() in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text}")


def _add_config_flags(p: argparse.ArgumentParser, skip=()) -> None:
    p.add_argument("--config", help="TOML file with CampaignConfig fields")
    for f in fields(CampaignConfig):
        if f.name in skip:
            continue
        flag = "--" + f.name.replace("_", "-")
        default = getattr(CampaignConfig(), f.name)
        if isinstance(default, bool):
            p.add_argument(flag, dest=f.name, type=_bool, default=None, metavar="BOOL")
        elif isinstance(default, list):
            kind = int if f.name == "maze_sizes" else str
            p.add_argument(flag, dest=f.name, type=kind, nargs="+", default=None)
        elif f.name == "corpus":
            p.add_argument(flag, dest=f.name, default=None)
        else:
            p.add_argument(flag, dest=f.name, type=type(default), default=None)


def resolve_config(args: argparse.Namespace, environ=os.environ) -> CampaignConfig:
    """Defaults, then TOML, then HETGP_SEED, then explicit flags."""
    values = {}
    if getattr(args, "config", None):
        path = Path(args.config)
        try:
            values.update(tomllib.loads(path.read_text()))
        except (OSError, tomllib.TOMLDecodeError) as exc:
            raise SystemExit(f"cannot read config {path}: {exc}")
        unknown = set(values) - {f.name for f in fields(CampaignConfig)}
        if unknown:
            raise SystemExit(f"{path}: unknown config fields {sorted(unknown)}")
    if "HETGP_SEED" in environ:
        values["seed"] = int(environ["HETGP_SEED"])
    for f in fields(CampaignConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = v
    return CampaignConfig(**values)


def cmd_generate(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    failures = 0
    for i in range(args.count):
        s = args.seed + i
        try:
            if args.kind == "scene":
                save_scene(generate_scene(SceneSpec(seed=s), args.robot_radius),
                           out / f"scene_{i + 1:04d}")
            else:
                spec = MazeSpec(args.n, cell_size=args.cell_size, wall_thickness=args.wall_thickness,
                                resolution=args.resolution, seed=s)
                save_maze(generate_maze(spec, args.robot_radius), out / f"maze_{i + 1:04d}")
        except ValueError as exc:
            failures += 1
            print(f"seed {s}: {exc}", file=sys.stderr)
    print(f"wrote {args.count - failures} environments to {out}")
    return 1 if failures else 0


def cmd_plan(args) -> int:
    cfg = resolve_config(args)
    seed = cfg.seed
    env = load_environment(args.env_dir)
    arm = cfg.arms[0]
    result, planner = run_plan(env, arm, cfg, seed)
    record = result_record(result, planner, arm, cfg, seed, str(args.env_dir))
    Path(args.out).write_text(json.dumps(record, indent=1) + "\n")
    if args.plot:
        dense = np.asarray(record["dense_positions"]).reshape(-1, 2)
        elites = []
        if args.elites and result.final_elites is not None:
            elites = [densify(e, planner.prior.mean_at, planner.table)[:, :2]
                      for e in result.final_elites]
        plot_environment(args.plot, env.occupancy, env.start, env.goal, dense, elites,
                         cfg.robot_radius, title=f"{arm}: {result.outcome}")
    print(f"{result.outcome} after {result.iterations} iterations, cost {result.cost:.4g}")
    return 0


def cmd_campaign(args) -> int:
    cfg = resolve_config(args)
    try:
        run_campaign(cfg)
    except CampaignError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def cmd_plot_prior(args) -> int:
    profiles = [("heteroscedastic", NoiseProfile.parabolic(args.t_total)),
                ("homoscedastic", NoiseProfile.matched_constant(args.t_total))]
    plot_prior(args.out, profiles, count=args.samples, n_support=args.n_support, seed=args.seed)
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hetgp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a maze or scene corpus")
    g.add_argument("--kind", choices=("maze", "scene"), default="maze")
    g.add_argument("--n", type=int, default=3)
    g.add_argument("--count", type=int, default=10)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.add_argument("--cell-size", type=float, default=None)
    g.add_argument("--wall-thickness", type=float, default=0.2)
    g.add_argument("--resolution", type=float, default=0.05)
    g.add_argument("--robot-radius", type=float, default=0.5)
    g.set_defaults(func=cmd_generate)

    p = sub.add_parser("plan", help="plan one environment directory")
    p.add_argument("env_dir")
    p.add_argument("--out", default="result.json")
    p.add_argument("--plot", help="SVG output path")
    p.add_argument("--elites", action="store_true", help="draw the final elite fan")
    _add_config_flags(p, skip=("corpus", "maze_sizes", "count", "out_dir", "save_runs",
                               "parallel_corpus"))
    p.set_defaults(func=cmd_plan)

    c = sub.add_parser("campaign", help="run arms over a corpus and write CSVs")
    _add_config_flags(c)
    c.set_defaults(func=cmd_campaign)

    f = sub.add_parser("plot-prior", help="SVG of prior sample fans and q_c(t)")
    f.add_argument("--out", default="prior.svg")
    f.add_argument("--samples", type=int, default=30)
    f.add_argument("--n-support", type=int, default=11)
    f.add_argument("--t-total", type=float, default=20.0)
    f.add_argument("--seed", type=int, default=0)
    f.set_defaults(func=cmd_plot_prior)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
