"""conifold-lab command line interface.

Subcommands:
  run CONFIG.json       batch experiment sweeps, exit code 0 iff all pass
  weights               exceptional-weight table for a link as JSON rows
  regions               weight-region classification grid as CSV
"""

from __future__ import annotations

import json
import sys

import click

from .experiments import ExperimentConfig, emit, region_atlas_rows, run, run_config_file
from .link_spectra import link_from_string
from .weight_calculus import exceptional_weights


@click.group()
def main():
    """Weighted Sobolev calculus on conifolds: desk-scale verification of
    uniform estimates on parametric connect sums."""


@main.command("run")
@click.argument("config", type=click.Path(exists=True))
@click.option("--emit", "formats", default="csv,json",
              help="comma list of output formats: csv,json,plotdata")
@click.option("--out", "out_dir", default=".", help="output directory")
@click.option("--seed", type=int, default=None, help="override the config seed")
def run_cmd(config, formats, out_dir, seed):
    """Run the experiments in CONFIG and write result tables."""
    fmts = tuple(f.strip() for f in formats.split(",") if f.strip())
    if seed is None:
        code, results = run_config_file(config, formats=fmts, out_dir=out_dir)
    else:
        with open(config, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        entries = raw["experiments"] if isinstance(raw, dict) and "experiments" in raw else [raw]
        code, results = 0, []
        for entry in entries:
            entry = dict(entry)
            entry["seed"] = seed
            cfg = ExperimentConfig.from_dict(entry)
            res = run(cfg)
            emit(res, formats=fmts, out_dir=out_dir)
            results.append(res)
            if not res.passed:
                code = 1
    for res in results:
        status = "pass" if res.passed else "FAIL"
        click.echo(f"[{status}] {res.experiment}: {res.summary}")
    if code != 0:
        failing = [r.experiment for r in results if not r.passed]
        click.echo(f"failing experiments: {', '.join(failing)}", err=True)
    sys.exit(code)


@main.command("weights")
@click.option("--link", "link_spec", default="sphere:2", show_default=True,
              help="link spec, e.g. sphere:2, sphere:3:0.5, torus:1,2")
@click.option("--m", "m", type=int, default=3, show_default=True,
              help="cone dimension (link dimension + 1)")
@click.option("--range", "gamma_range", default="-4:3", show_default=True,
              help="open gamma interval lo:hi")
@click.option("--end", type=int, default=0, help="end index attached to the rows")
def weights_cmd(link_spec, m, gamma_range, end):
    """Exceptional weights of the Laplacian on the cone over LINK."""
    lo, hi = (float(x) for x in gamma_range.split(":"))
    link = link_from_string(link_spec)
    rows = [
        {"gamma": w.gamma, "mult": w.mult, "eigenvalue": w.source_eigenvalue,
         "end": end}
        for w in exceptional_weights(link, m, (lo, hi))
    ]
    click.echo(json.dumps(rows, indent=1))


@main.command("regions")
@click.option("--kind", type=click.Choice(["AC", "CS", "CSAC"]), default="AC",
              show_default=True)
@click.option("--m", "m", type=int, default=3, show_default=True)
@click.option("--link", "link_spec", default="sphere:2", show_default=True)
@click.option("--grid", "step", type=float, default=0.25, show_default=True,
              help="weight grid step")
@click.option("--range", "weight_range", default=None,
              help="weight interval lo:hi (default: (2-m)-1.5 to 1.5)")
@click.option("--out", "out_path", default="-", help="CSV path or - for stdout")
def regions_cmd(kind, m, link_spec, step, weight_range, out_path):
    """Classification grid (injective/surjective/index/kernel) per weight cell."""
    lo = hi = None
    if weight_range:
        lo, hi = (float(x) for x in weight_range.split(":"))
    rows = region_atlas_rows(kind, m, link_spec, step, lo, hi)
    cols = ("beta1", "beta2", "exceptional", "injective", "surjective",
            "index", "kernel_dim")
    lines = [",".join(cols)]
    for r in rows:
        lines.append(",".join(str(r[c]) for c in cols))
    text = "\n".join(lines) + "\n"
    if out_path == "-":
        click.echo(text, nl=False)
    else:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)


if __name__ == "__main__":
    main()
