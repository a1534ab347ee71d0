#!/usr/bin/env python3
"""Write the HTTP API schema to docs/openapi.json."""

import json
from pathlib import Path

from pxbo.service import create_app


def main():
    app = create_app(datasets={})
    out = Path(__file__).resolve().parent.parent / "docs" / "openapi.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(app.openapi(), indent=2, sort_keys=True))
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
