"""Command line front door: validate, analyze, serve."""

from __future__ import annotations

import argparse
import socket
import sys
from pathlib import Path

from .centering import Transition
from .errors import (
    BindFailure,
    CycleDetected,
    DuplicateId,
    MalformedInput,
    TreeError,
    UnifyConflict,
    UnknownParent,
    UnknownTag,
    VeintexError,
)
from .markup import parse_document, validate_references
from .pipeline import DocumentInput, PipelineConfig, run_analysis
from .tree import forest_from_document, validate_tree
from .viewio import load_view_graph

EXIT_PARSE = 1
EXIT_REFERENCE = 2
EXIT_GRAPH = 3
EXIT_TREE = 4


def _err(message: str):
    print(message, file=sys.stderr)


def cmd_validate(paths: list[str]) -> int:
    """Validate documents and view sets.

    Exit codes: 0 clean, 1 parse error, 2 unresolved references,
    3 view-graph error (cycles, unknown parents, unify conflicts),
    4 discourse-tree error.
    """
    doc_paths = [Path(p) for p in paths if not str(p).endswith(".vxv")]
    manifest_paths = [Path(p) for p in paths if str(p).endswith(".vxv")]

    effective_docs = []
    if manifest_paths:
        if len(doc_paths) != 1:
            _err(f"expected exactly one hub document with manifests, "
                 f"got {len(doc_paths)}")
            return EXIT_GRAPH
        try:
            graph = load_view_graph(doc_paths[0], manifest_paths)
        except (MalformedInput, UnknownTag, DuplicateId) as exc:
            _err(str(exc))
            return EXIT_PARSE
        except (CycleDetected, UnknownParent, UnifyConflict, VeintexError) as exc:
            _err(str(exc))
            return EXIT_GRAPH
        for view_id in graph.views:
            effective_docs.append(graph.compose_effective(view_id))
    else:
        for path in doc_paths:
            try:
                effective_docs.append(
                    parse_document(path.read_bytes(), source_name=str(path)))
            except (MalformedInput, UnknownTag, DuplicateId) as exc:
                _err(str(exc))
                return EXIT_PARSE
            except OSError as exc:
                _err(str(exc))
                return EXIT_PARSE

    clean = True
    for doc in effective_docs:
        for diag in validate_references(doc):
            _err(f"{doc.source_name}: {diag}")
            clean = False
    if not clean:
        return EXIT_REFERENCE

    for doc in effective_docs:
        try:
            for tree in forest_from_document(doc):
                for diag in validate_tree(tree):
                    _err(f"{doc.source_name}: {diag}")
                    clean = False
        except TreeError as exc:
            _err(f"{doc.source_name}: {exc}")
            clean = False
    return 0 if clean else EXIT_TREE


def _parse_weights(spec: str | None):
    if not spec:
        return None
    by_name = {t.value: t for t in Transition}
    weights = {}
    for item in spec.split(","):
        name, _, value = item.partition("=")
        name = name.strip().lower()
        if name not in by_name:
            raise VeintexError(
                f"unknown transition {name!r}; choose from {sorted(by_name)}")
        try:
            number = int(value)
        except ValueError:
            raise VeintexError(f"weight for {name!r} must be an integer") from None
        if number < 0:
            raise VeintexError(f"weight for {name!r} must be non-negative")
        weights[by_name[name]] = number
    return weights


def _build_config(args) -> PipelineConfig:
    docs = [DocumentInput(Path(group["hub"]), [Path(v) for v in group["views"]])
            for group in args.docs]
    return PipelineConfig(docs=docs,
                          output_dir=Path(getattr(args, "out", ".") or "."),
                          report_format=getattr(args, "format", "csv"),
                          score_weights=_parse_weights(getattr(args, "weights", None)))


def cmd_analyze(args) -> int:
    config = _build_config(args)
    try:
        analyses = run_analysis(config)
    except VeintexError as exc:
        _err(str(exc))
        return EXIT_GRAPH
    for analysis in analyses:
        for warning in analysis.warnings:
            _err(f"warning: {analysis.source}: {warning}")
    print(f"analyzed {len(analyses)} document(s) into {config.output_dir}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service.app import create_app

    config = _build_config(args) if args.docs else None
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind((args.host, args.port))
    except OSError as exc:
        probe.close()
        raise BindFailure(f"cannot bind {args.host}:{args.port}: {exc}") from None
    probe.close()
    app = create_app(config)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


class _HubAction(argparse.Action):
    def __call__(self, parser, namespace, values, option_string=None):
        namespace.docs.append({"hub": values, "views": []})


class _ViewsAction(argparse.Action):
    def __call__(self, parser, namespace, values, option_string=None):
        if not namespace.docs:
            parser.error("--views requires a preceding --hub")
        namespace.docs[-1]["views"].extend(values)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="veintex",
        description="discourse annotation toolkit: multi-view markup, "
                    "vein analysis, and smoothness scoring")
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="validate documents or view sets")
    p_validate.add_argument("paths", nargs="+")

    for name, help_text in (("analyze", "run the analysis pipeline"),
                            ("serve", "run the annotation service")):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(docs=[])
        p.add_argument("--hub", action=_HubAction,
                       help="hub document (.vxd); repeat for a batch")
        p.add_argument("--views", action=_ViewsAction, nargs="+", default=[],
                       help="view manifests (.vxv) for the preceding --hub")
        if name == "analyze":
            p.add_argument("--out", required=True, help="output directory")
            p.add_argument("--format", choices=("csv", "text"), default="csv")
            p.add_argument("--weights",
                           help="override transition scores, e.g. "
                                "continuation=4,no-cb=0")
        else:
            p.add_argument("--port", type=int, default=8399)
            p.add_argument("--host", default="127.0.0.1")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            return cmd_validate(args.paths)
        if args.command == "analyze":
            if not args.docs:
                _err("analyze needs at least one --hub")
                return 2
            return cmd_analyze(args)
        if args.command == "serve":
            return cmd_serve(args)
    except BindFailure as exc:
        _err(str(exc))
        return EXIT_GRAPH
    except VeintexError as exc:
        _err(str(exc))
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
