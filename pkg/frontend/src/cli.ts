// qct-plot <csv> --kind <tag> --out <file> [--filter key=value ...] [--x col]
// [--title text]. Reads only the documented result-row CSV schema; writes a
// deterministic SVG. Nothing is written when validation fails.

import { readFileSync, writeFileSync } from 'fs'
import { basename } from 'path'
import { PLOT_KINDS, PlotKind, render } from './plot.js'
import { SchemaError, applyFilters, parseResultCsv } from './schema.js'

interface Args {
  csv: string
  kind: PlotKind
  out: string
  filters: Record<string, string>
  x?: string
  title?: string
}

function usage(): string {
  return `usage: qct-plot <csv> --kind <${PLOT_KINDS.join('|')}> --out <file.svg> [--filter key=value ...] [--x col] [--title text]`
}

function parseArgs(argv: string[]): Args {
  let csv: string | undefined
  let kind: string | undefined
  let out: string | undefined
  let x: string | undefined
  let title: string | undefined
  const filters: Record<string, string> = {}
  for (let i = 0; i < argv.length; i += 1) {
    const arg = argv[i]
    const next = () => {
      i += 1
      if (i >= argv.length) throw new SchemaError(`${arg} needs a value\n${usage()}`)
      return argv[i]
    }
    if (arg === '--kind') kind = next()
    else if (arg === '--out') out = next()
    else if (arg === '--x') x = next()
    else if (arg === '--title') title = next()
    else if (arg === '--filter') {
      const pair = next()
      const eq = pair.indexOf('=')
      if (eq < 1) throw new SchemaError(`--filter expects key=value, got ${JSON.stringify(pair)}`)
      filters[pair.slice(0, eq)] = pair.slice(eq + 1)
    } else if (arg.startsWith('--')) {
      throw new SchemaError(`unknown flag ${arg}\n${usage()}`)
    } else if (csv === undefined) {
      csv = arg
    } else {
      throw new SchemaError(`unexpected positional argument ${JSON.stringify(arg)}\n${usage()}`)
    }
  }
  if (!csv || !kind || !out) throw new SchemaError(usage())
  if (!(PLOT_KINDS as string[]).includes(kind)) {
    throw new SchemaError(`unknown kind ${JSON.stringify(kind)}; expected one of ${PLOT_KINDS.join(', ')}`)
  }
  return { csv, kind: kind as PlotKind, out, filters, x, title }
}

export function main(argv: string[]): number {
  let args: Args
  try {
    args = parseArgs(argv)
  } catch (err) {
    console.error(`qct-plot: ${(err as Error).message}`)
    return 2
  }
  try {
    const text = readFileSync(args.csv, 'utf-8')
    const rows = applyFilters(parseResultCsv(text), args.filters)
    const title = args.title ?? `${args.kind}: ${basename(args.csv)}`
    const svg = render(rows, args.kind, title, args.x)
    writeFileSync(args.out, svg, 'utf-8')
    console.log(`qct-plot: wrote ${args.out} (${rows.length} rows, kind ${args.kind})`)
    return 0
  } catch (err) {
    console.error(`qct-plot: ${(err as Error).message}`)
    return 2
  }
}

