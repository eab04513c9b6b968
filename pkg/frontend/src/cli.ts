// Batch figure tool: render SVG figures from a gpassm run directory.
//
//   node dist/cli.js --in results/ --out figures/ [--figures rmse,field]
//
// Exit codes: 0 success, 1 usage error or missing/invalid input data.

import { parseArgs } from "node:util";
import { pathToFileURL } from "node:url";
import { CsvError } from "./csv.js";
import { FIGURE_NAMES, plotAll } from "./figures.js";

export function main(argv: string[]): number {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      options: {
        in: { type: "string" },
        out: { type: "string" },
        figures: { type: "string" },
      },
      allowPositionals: false,
    });
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : String(err)}`);
    return 1;
  }
  const { in: inDir, out: outDir, figures } = parsed.values;
  if (!inDir || !outDir) {
    console.error(
      `usage: cli --in DIR --out DIR [--figures ${FIGURE_NAMES.join(",")}]`);
    return 1;
  }
  try {
    const written = plotAll(inDir, outDir, {
      figures: figures ? figures.split(",").map((s) => s.trim()) : undefined,
      warn: (message) => console.error(`warning: ${message}`),
    });
    for (const path of written) {
      console.log(path);
    }
    return 0;
  } catch (err) {
    if (err instanceof CsvError || err instanceof Error) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    throw err;
  }
}

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exit(main(process.argv.slice(2)));
}
