"""Command-line surface tying the transforms and diagnostics into pipelines.

Subcommands: diagnose, transform, compare, synth, check-operator.
Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.
Diagnostics go to stderr; JSON only ever lands in the --output file.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import io as aceio
from ._threads import apply_thread_cap
from .diagnostics import nn_overlap, similarity_preservation, spectrum_report
from .errors import AceError, DataError, NumericalError
from .matrix import EmbeddingMatrix, center
from .svd import exact_svd
from .synth import (ClusterSpec, ExplicitSpectrum, PowerLaw, SynthSpec,
                    synth_clustered, synth_power_spectrum)
from .transforms import (AceConfig, ace_operator_closed_form,
                         ace_operator_spectral, ace_embedding,
                         gamma_for_target_std, pca_project, whiten)

OPERATOR_CHECK_TOL = 1e-8


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="acekit",
        description="Spectrally controlled reshaping of embedding matrices "
                    "plus anisotropy and preservation diagnostics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("diagnose", help="spectrum and anisotropy report")
    p.add_argument("--input", required=True, help="EMB1 or CSV embedding file")
    p.add_argument("--centered", action="store_true",
                   help="analyze the mean-centered matrix")
    p.add_argument("--cosine", action="store_true",
                   help="include the sampled mean pairwise cosine")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True, help="report JSON path")

    p = sub.add_parser("transform", help="reshape an embedding matrix")
    p.add_argument("--input", required=True)
    p.add_argument("--method", required=True, choices=["ace", "whiten", "pca"])
    p.add_argument("--lambda", dest="lam", type=float, default=None,
                   help="shrinkage weight, required for ace; the usual search "
                        "grid is 0, 1, 5, 10, 50, 100, 500, 1000, 5000")
    p.add_argument("--k", type=int, default=128,
                   help="output dimension for ace/pca (default 128)")
    scale = p.add_mutually_exclusive_group()
    scale.add_argument("--target-std", type=float, default=None,
                       help="rescale output to this global std")
    scale.add_argument("--gamma", type=float, default=None,
                       help="explicit output scale factor (default 1)")
    p.add_argument("--centered", action="store_true",
                   help="run ace on the mean-centered matrix")
    p.add_argument("--output", required=True,
                   help="output file (.csv for CSV, EMB1 otherwise)")
    p.add_argument("--report", default=None,
                   help="also write a spectrum report of the output")

    p = sub.add_parser("compare", help="semantic-preservation metrics")
    p.add_argument("--ref", required=True, help="reference embedding file")
    p.add_argument("--new", required=True, help="transformed embedding file")
    p.add_argument("--pairs", type=int, default=100_000,
                   help="pair sample size (default 100000)")
    p.add_argument("--knn", type=int, default=10,
                   help="neighborhood size for overlap (default 10)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True, help="report JSON path")

    p = sub.add_parser("synth", help="generate synthetic embeddings")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    spect = p.add_mutually_exclusive_group(required=True)
    spect.add_argument("--alpha", type=float, default=None,
                       help="power-law exponent for the target spectrum")
    spect.add_argument("--spectrum", default=None,
                       help="explicit comma-separated singular values")
    p.add_argument("--clusters", type=int, default=None,
                   help="planted cluster count (enables clustered mode)")
    p.add_argument("--spread", type=float, default=None,
                   help="centroid sphere radius (clustered mode)")
    p.add_argument("--noise", type=float, default=None,
                   help="within-cluster noise scale (clustered mode)")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--output", required=True)

    p = sub.add_parser("check-operator",
                       help="max deviation between the closed-form and "
                            "spectral item-item operators")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)

    return parser


def _output_format(path: str) -> str:
    return "csv" if path.lower().endswith(".csv") else "emb1"


def _cmd_diagnose(args) -> int:
    E = aceio.read_embeddings(args.input)
    report = spectrum_report(E, centered=args.centered,
                             with_cosine=args.cosine, seed=args.seed)
    doc = aceio.build_report(args.input, E, report, transform=None,
                             seed=args.seed if args.cosine else None)
    aceio.write_report(doc, args.output)
    return 0


def _cmd_transform(args, parser) -> int:
    if args.method == "ace" and args.lam is None:
        parser.error("--method ace requires an explicit --lambda")
    if args.method == "ace" and args.lam < 0:
        parser.error("--lambda must be >= 0")
    if args.k < 1:
        parser.error("--k must be >= 1")
    if args.target_std is not None and args.target_std <= 0:
        parser.error("--target-std must be > 0")
    if args.gamma is not None and args.gamma <= 0:
        parser.error("--gamma must be > 0")

    E = aceio.read_embeddings(args.input)
    if args.method == "ace":
        source = center(E) if args.centered else E
        pre = ace_embedding(exact_svd(source),
                            AceConfig(lam=args.lam, k=args.k))
        if args.target_std is not None:
            gamma = gamma_for_target_std(pre, args.target_std)
        else:
            gamma = args.gamma if args.gamma is not None else 1.0
        out = EmbeddingMatrix(gamma * pre.values, item_ids=E.item_ids)
        transform_info = {"method": "ace", "lambda": args.lam, "k": args.k,
                          "gamma": gamma, "centering": args.centered}
    elif args.method == "whiten":
        out = whiten(E)
        transform_info = {"method": "whiten", "lambda": None, "k": None,
                          "gamma": None, "centering": True}
    else:
        out = pca_project(E, args.k)
        transform_info = {"method": "pca", "lambda": None, "k": args.k,
                          "gamma": None, "centering": True}

    aceio.write_embeddings(out, args.output, format=_output_format(args.output))
    if args.report:
        report = spectrum_report(out)
        doc = aceio.build_report(args.output, out, report,
                                 transform=transform_info, seed=None)
        aceio.write_report(doc, args.report)
    return 0


def _cmd_compare(args, parser) -> int:
    if args.pairs < 1:
        parser.error("--pairs must be >= 1")
    if args.knn < 1:
        parser.error("--knn must be >= 1")
    ref = aceio.read_embeddings(args.ref)
    new = aceio.read_embeddings(args.new)
    preservation = similarity_preservation(ref, new, max_pairs=args.pairs,
                                           seed=args.seed)
    overlap = nn_overlap(ref, new, k_nn=args.knn, seed=args.seed)
    report = spectrum_report(new)
    doc = aceio.build_report(args.new, new, report, transform=None,
                             seed=args.seed,
                             extras={"similarity_preservation": preservation,
                                     "nn_overlap": overlap})
    aceio.write_report(doc, args.output)
    return 0


def _cmd_synth(args, parser) -> int:
    if args.n < 1 or args.d < 1:
        parser.error("--n and --d must be >= 1")
    if args.alpha is not None:
        if args.alpha < 0:
            parser.error("--alpha must be >= 0")
        spectrum = PowerLaw(alpha=args.alpha)
    else:
        try:
            values = [float(x) for x in args.spectrum.split(",") if x.strip()]
        except ValueError:
            parser.error("--spectrum must be comma-separated numbers")
        if len(values) != args.d:
            parser.error(f"--spectrum needs exactly d = {args.d} values")
        if any(v < 0 for v in values) or any(
                a < b for a, b in zip(values, values[1:])):
            parser.error("--spectrum must be non-negative and non-increasing")
        spectrum = ExplicitSpectrum(tuple(values))

    clusters = None
    if args.clusters is not None:
        if args.spread is None or args.noise is None:
            parser.error("--clusters requires --spread and --noise")
        if args.clusters < 2 or args.clusters > args.n:
            parser.error("--clusters must be in [2, n]")
        if args.spread < 0 or args.noise < 0:
            parser.error("--spread and --noise must be >= 0")
        clusters = ClusterSpec(count=args.clusters, spread=args.spread,
                               noise=args.noise)
    elif args.spread is not None or args.noise is not None:
        parser.error("--spread/--noise only apply with --clusters")
    if clusters is None and args.n < args.d:
        parser.error("spectrum-controlled synthesis needs n >= d")

    spec = SynthSpec(n=args.n, d=args.d, spectrum=spectrum,
                     clusters=clusters, seed=args.seed)
    if clusters is not None:
        E, _ = synth_clustered(spec)
    else:
        E = synth_power_spectrum(spec)
    aceio.write_embeddings(E, args.output, format=_output_format(args.output))
    return 0


def _cmd_check_operator(args, parser) -> int:
    if args.n < 1 or args.d < 1:
        parser.error("--n and --d must be >= 1")
    if args.lam <= 0:
        parser.error("--lambda must be > 0 (both operator routes need it)")
    rng = np.random.default_rng(args.seed)
    E = EmbeddingMatrix(rng.standard_normal((args.n, args.d)))
    spectral = ace_operator_spectral(exact_svd(E), args.lam)
    closed = ace_operator_closed_form(E, args.lam)
    deviation = float(np.abs(spectral.values - closed.values).max())
    print(format(deviation, ".17g"))
    if deviation <= OPERATOR_CHECK_TOL:
        return 0
    print(f"deviation exceeds {OPERATOR_CHECK_TOL:g}", file=sys.stderr)
    return 4


def main(argv=None) -> int:
    apply_thread_cap()
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "diagnose":
            return _cmd_diagnose(args)
        if args.command == "transform":
            return _cmd_transform(args, parser)
        if args.command == "compare":
            return _cmd_compare(args, parser)
        if args.command == "synth":
            return _cmd_synth(args, parser)
        return _cmd_check_operator(args, parser)
    except NumericalError as exc:
        print(f"acekit: numerical failure: {exc}", file=sys.stderr)
        return 4
    except DataError as exc:
        print(f"acekit: {exc}", file=sys.stderr)
        return 3
    except AceError as exc:
        print(f"acekit: {exc}", file=sys.stderr)
        return exc.exit_code
    except np.linalg.LinAlgError as exc:
        print(f"acekit: numerical failure: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"acekit: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
