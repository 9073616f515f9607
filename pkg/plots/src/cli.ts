#!/usr/bin/env node
/**
 * render --panel a|b|c --in results.csv --out fig.svg
 *
 * Exit codes: 0 success, 1 runtime/schema failure (with a column diagnostic
 * for schema violations), 2 usage error.
 */

import { SchemaError } from "./csv";
import { Panel } from "./figure";
import { render } from "./render";

function usage(): string {
  return "usage: render --panel a|b|c --in results.csv --out fig.svg";
}

export function main(argv: string[]): number {
  const args = [...argv];
  if (args[0] === "render") {
    args.shift(); // tolerate being invoked as `cli render ...`
  }
  const opts = new Map<string, string>();
  for (let i = 0; i < args.length; i += 2) {
    const flag = args[i];
    const value = args[i + 1];
    if (!flag || !flag.startsWith("--") || value === undefined) {
      process.stderr.write(`${usage()}\n`);
      return 2;
    }
    opts.set(flag.slice(2), value);
  }
  const panel = opts.get("panel");
  const input = opts.get("in");
  const output = opts.get("out");
  const known = new Set(["panel", "in", "out"]);
  const unknown = [...opts.keys()].filter((k) => !known.has(k));
  if (!panel || !input || !output || unknown.length > 0) {
    if (unknown.length > 0) {
      process.stderr.write(`unknown flags: ${unknown.map((u) => `--${u}`).join(", ")}\n`);
    }
    process.stderr.write(`${usage()}\n`);
    return 2;
  }
  if (panel !== "a" && panel !== "b" && panel !== "c") {
    process.stderr.write(`--panel must be one of a, b, c (got '${panel}')\n${usage()}\n`);
    return 2;
  }
  try {
    render({ panel: panel as Panel, inputCsv: input, outputSvg: output });
    process.stdout.write(`wrote ${output}\n`);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      process.stderr.write(`schema error in ${input}: ${err.message}\n`);
    } else {
      process.stderr.write(`error: ${err instanceof Error ? err.message : String(err)}\n`);
    }
    return 1;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
