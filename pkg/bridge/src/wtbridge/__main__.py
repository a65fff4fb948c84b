"""Command line: python -m wtbridge {export-bundle,export-embeddings,verify}."""

from __future__ import annotations

import argparse
import json
import sys

from .export import export_bundle, export_embeddings, verify_bundle
from .manifest import BridgeError, load_manifest


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="wtbridge",
        description="Export transformer checkpoints into engine bundles")
    commands = parser.add_subparsers(dest="command", required=True)

    bundle_cmd = commands.add_parser(
        "export-bundle", help="write the expert-head weight bundle")
    bundle_cmd.add_argument("manifest")

    embed_cmd = commands.add_parser(
        "export-embeddings", help="write an embedding dump for a sentence file")
    embed_cmd.add_argument("manifest")
    embed_cmd.add_argument("sentences")

    verify_cmd = commands.add_parser(
        "verify", help="structurally re-check a written bundle")
    verify_cmd.add_argument("bundle")

    args = parser.parse_args(argv)
    try:
        if args.command == "export-bundle":
            path = export_bundle(load_manifest(args.manifest))
            print(f"wrote {path}")
        elif args.command == "export-embeddings":
            path = export_embeddings(load_manifest(args.manifest),
                                     args.sentences)
            print(f"wrote {path}")
        else:
            print(json.dumps(verify_bundle(args.bundle), indent=2))
    except (BridgeError, OSError, json.JSONDecodeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
