"""Shared plumbing: CSV schema checks, FigureSpec, the render dispatch."""

import csv
import os
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


class SchemaError(ValueError):
    """Input file does not match the documented CSV schema."""


# documented column sets of the lab CLI outputs
SCHEMAS = {
    "spectrum": ("re", "im", "accepted"),
    "scan": ("eps", "omega", "abs_w0"),
    "kernel": ("rho", "s", "tau", "K", "E", "ratio", "err"),
    "strichartz": ("member", "p", "q", "norm", "h0", "ratio", "skipped"),
    "stability": ("delta", "member", "T_star", "S", "S_over_delta_sq"),
}


def read_csv(path, columns):
    """Load the named columns of a CSV file as float arrays.

    Raises SchemaError naming the first missing column; an empty file or
    one without data rows is a schema error too.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaError("%s is empty, expected header %s"
                              % (path, ",".join(columns))) from None
        for c in columns:
            if c not in header:
                raise SchemaError("%s is missing column '%s'" % (path, c))
        idx = [header.index(c) for c in columns]
        # flag columns are written as True/False literals
        flags = {"true": 1.0, "false": 0.0}

        def cell(tok):
            v = flags.get(tok.strip().lower())
            return float(tok) if v is None else v

        rows = []
        for line in reader:
            if not line:
                continue
            try:
                rows.append([cell(line[i]) for i in idx])
            except (ValueError, IndexError):
                raise SchemaError("%s holds a malformed row %r"
                                  % (path, line)) from None
    if not rows:
        raise SchemaError("%s has a header but no data rows" % path)
    data = np.asarray(rows, dtype=float)
    return {c: data[:, k] for k, c in enumerate(columns)}


@dataclass
class FigureSpec:
    """One figure: input CSV path(s), figure kind, output image path."""

    inputs: tuple
    kind: str
    output: str
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if isinstance(self.inputs, (str, os.PathLike)):
            self.inputs = (self.inputs,)
        self.inputs = tuple(str(p) for p in self.inputs)
        if self.kind not in SCHEMAS:
            raise SchemaError("unknown figure kind %r, have %s"
                              % (self.kind, sorted(SCHEMAS)))
        if not self.inputs:
            raise SchemaError("no input files given")


@dataclass
class RenderResult:
    path: str
    annotations: dict


def _save(fig, spec):
    out = spec.output
    os.makedirs(os.path.dirname(os.path.abspath(out)), exist_ok=True)
    kw = {"dpi": 150}
    if out.lower().endswith(".png"):
        # strip the version stamp so identical inputs give identical bytes
        kw["metadata"] = {"Software": None}
    fig.savefig(out, **kw)
    plt.close(fig)
    return out


def render(spec):
    """Render one figure, returning the output path and the numbers
    annotated on it."""
    fn = _RENDERERS[spec.kind]
    fig, notes = fn(spec)
    return RenderResult(_save(fig, spec), notes)


def _fig(spec, w=6.0, h=4.2):
    return plt.figure(figsize=(float(spec.options.get("width", w)),
                               float(spec.options.get("height", h))))


def _spectrum(spec):
    data = read_csv(spec.inputs[0], SCHEMAS["spectrum"])
    re, im = data["re"], data["im"]
    acc = data["accepted"] > 0.5
    fig = _fig(spec)
    ax = fig.add_subplot()
    ax.scatter(re[~acc], im[~acc], s=18, marker="x", c="0.7",
               label="filtered out")
    ax.scatter(re[acc], im[acc], s=22, c="C0", label="accepted")
    # ring the accepted eigenvalue closest to (1, 0)
    if not np.any(acc):
        raise SchemaError("%s holds no accepted eigenvalues"
                          % spec.inputs[0])
    d = np.hypot(re - 1.0, im)
    d[~acc] = np.inf
    k = int(np.argmin(d))
    ax.scatter([re[k]], [im[k]], s=180, facecolors="none",
               edgecolors="C3", linewidths=1.5, label="symmetry mode")
    ax.annotate("(1, 0)", (re[k], im[k]), textcoords="offset points",
                xytext=(10, 8), color="C3")
    ax.axvline(0.0, color="0.85", lw=0.8, zorder=0)
    ax.set_xlabel("Re eigenvalue")
    ax.set_ylabel("Im eigenvalue")
    ax.set_title("collocation spectrum of the linearized generator")
    ax.legend(loc="best", fontsize=8)
    return fig, {"gauge_re": float(re[k]), "gauge_im": float(im[k]),
                 "gauge_dist": float(d[k])}


def _scan(spec):
    data = read_csv(spec.inputs[0], SCHEMAS["scan"])
    eps = np.unique(data["eps"])
    om = np.unique(data["omega"])
    if len(eps) * len(om) != len(data["eps"]):
        raise SchemaError("%s is not a full eps x omega product grid"
                          % spec.inputs[0])
    order = np.lexsort((data["omega"], data["eps"]))
    Z = data["abs_w0"][order].reshape(len(eps), len(om))
    fig = _fig(spec, 6.4, 4.2)
    ax = fig.add_subplot()
    floor = float(spec.options.get("floor", 1e-16))
    mesh = ax.pcolormesh(om, eps, np.log10(np.maximum(Z, floor)),
                         shading="nearest", cmap="viridis")
    fig.colorbar(mesh, ax=ax, label="log10 |w0|")
    i, j = np.unravel_index(int(np.argmin(Z)), Z.shape)
    ax.plot([om[j]], [eps[i]], "r+", ms=10)
    ax.set_xlabel("Im lambda")
    ax.set_ylabel("Re lambda")
    ax.set_title("scaled Wronskian magnitude over the strip")
    return fig, {"min": float(Z[i, j]), "argmin_eps": float(eps[i]),
                 "argmin_omega": float(om[j])}


def _kernel(spec):
    data = read_csv(spec.inputs[0], SCHEMAS["kernel"])
    pts = sorted({(r, s) for r, s in zip(data["rho"], data["s"])})
    fig = _fig(spec)
    ax = fig.add_subplot()
    worst = 0.0
    for r, s in pts:
        sel = (data["rho"] == r) & (data["s"] == s)
        tau = data["tau"][sel]
        order = np.argsort(tau)
        ratio = data["ratio"][sel][order]
        worst = max(worst, float(np.max(ratio)))
        ax.plot(tau[order], ratio, "o-", ms=3,
                label="rho=%.2g, s=%.2g" % (r, s))
    ax.axhline(worst, color="0.8", lw=0.8, ls="--")
    ax.set_xlabel("tau")
    ax.set_ylabel("|K| / envelope")
    ax.set_title("perturbation kernel against its decay envelope")
    if len(pts) <= 8:
        ax.legend(fontsize=8)
    return fig, {"max_ratio": worst, "n_points": len(pts)}


def _strichartz(spec):
    data = read_csv(spec.inputs[0], SCHEMAS["strichartz"])
    keep = data["skipped"] < 0.5
    if not np.any(keep):
        raise SchemaError("%s holds only skipped members" % spec.inputs[0])
    order = np.argsort(data["member"][keep])
    ratio = data["ratio"][keep][order]
    running = np.maximum.accumulate(ratio)
    n = np.arange(1, len(running) + 1)
    fig = _fig(spec)
    ax = fig.add_subplot()
    ax.step(n, running, where="post", color="C0")
    ax.plot(n, ratio, ".", ms=4, c="0.6", label="per member")
    const = float(running[-1])
    ax.axhline(const, color="C3", lw=0.8, ls="--")
    ax.annotate("constant = %.4f" % const, (n[-1], const),
                textcoords="offset points", xytext=(-90, 6), color="C3")
    p, q = data["p"][0], data["q"][0]
    ax.set_xlabel("ensemble size")
    ax.set_ylabel("running max of norm ratio")
    ax.set_title("empirical space-time bound, (p, q) = (%g, %g)" % (p, q))
    ax.legend(fontsize=8, loc="lower right")
    return fig, {"constant": const, "n_members": int(len(running))}


def _stability(spec):
    data = read_csv(spec.inputs[0], SCHEMAS["stability"])
    deltas = np.unique(data["delta"])
    max_S = {}
    for d in deltas:
        if d <= 0:
            continue
        s = float(np.max(data["S"][data["delta"] == d]))
        if s > 0:
            max_S[float(d)] = s
    if len(max_S) < 2:
        raise SchemaError("%s needs at least two positive delta levels"
                          % spec.inputs[0])
    ld = np.log(sorted(max_S))
    ls = np.log([max_S[d] for d in sorted(max_S)])
    slope, icept = np.polyfit(ld, ls, 1)
    slope = float(slope)

    fig = _fig(spec)
    ax = fig.add_subplot()
    ax.loglog(data["delta"], data["S"], "o", ms=4, mfc="none", c="0.6",
              label="members")
    dd = np.array(sorted(max_S))
    ax.loglog(dd, [max_S[d] for d in dd], "s", c="C0", label="ensemble max")
    xs = np.linspace(ld.min(), ld.max(), 50)
    ax.loglog(np.exp(xs), np.exp(icept + slope * xs), "-", c="C3", lw=1,
              label="fit")
    ax.annotate("slope = %.4f" % slope,
                (np.exp(xs.mean()), np.exp(icept + slope * xs.mean())),
                textcoords="offset points", xytext=(8, -14), color="C3")
    ax.set_xlabel("perturbation size")
    ax.set_ylabel("max space-time amplitude squared")
    ax.set_title("quadratic response of the perturbed flow")
    ax.legend(fontsize=8)
    return fig, {"slope": slope, "intercept": float(icept),
                 "n_levels": len(max_S)}


_RENDERERS = {
    "spectrum": _spectrum,
    "scan": _scan,
    "kernel": _kernel,
    "strichartz": _strichartz,
    "stability": _stability,
}


def script_main(kind, argv=None):
    """Shared argv handling for the per-kind console scripts."""
    import argparse

    ap = argparse.ArgumentParser(
        prog="fig-%s" % kind,
        description="render the %s figure from a lab CSV" % kind)
    ap.add_argument("input", help="CSV file produced by the lab CLI")
    ap.add_argument("output", help="image file to write (png recommended)")
    ap.add_argument("--width", type=float, default=None)
    ap.add_argument("--height", type=float, default=None)
    args = ap.parse_args(argv)
    opts = {k: v for k, v in (("width", args.width), ("height", args.height))
            if v is not None}
    try:
        res = render(FigureSpec((args.input,), kind, args.output, opts))
    except (SchemaError, OSError) as exc:
        print("error: %s" % exc)
        return 2
    for k in sorted(res.annotations):
        print("%s: %s" % (k, res.annotations[k]))
    print("wrote %s" % res.path)
    return 0
