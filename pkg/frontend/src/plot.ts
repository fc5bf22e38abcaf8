// Deterministic SVG rendering of result rows: fixed canvas, fixed palette,
// no fonts embedded and no timestamps, so identical inputs give identical
// bytes.

import { ResultRow, SchemaError } from './schema.js'

export type PlotKind = 'vs-j' | 'vs-h' | 'vs-p' | 'keyrate' | 'shots-errorbar'

export const PLOT_KINDS: PlotKind[] = ['vs-j', 'vs-h', 'vs-p', 'keyrate', 'shots-errorbar']

export interface Point {
  x: number
  y: number
  err?: number
}

export interface Series {
  label: string
  points: Point[]
}

export interface PlotData {
  series: Series[]
  xLabel: string
  yLabel: string
}

const WIDTH = 800
const HEIGHT = 500
const MARGIN = { left: 70, right: 160, top: 30, bottom: 50 }
const PALETTE = ['#1f77b4', '#d62728', '#2ca02c', '#ff7f0e', '#9467bd', '#8c564b']

function requireNumber(row: ResultRow, column: string): number {
  const value = row[column]
  if (typeof value !== 'number') {
    throw new SchemaError(`column ${column} is empty in a selected row`)
  }
  return value
}

function bySplit(rows: ResultRow[], xColumn: string, yColumn: string, withErr: boolean): Series[] {
  const groups = new Map<string, Point[]>()
  for (const row of rows) {
    const key = row.a === null ? 'all rounds' : `a=${row.a}`
    const point: Point = { x: requireNumber(row, xColumn), y: requireNumber(row, yColumn) }
    if (withErr && typeof row.sem === 'number') point.err = row.sem
    if (!groups.has(key)) groups.set(key, [])
    groups.get(key)!.push(point)
  }
  return [...groups.entries()]
    .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0))
    .map(([label, points]) => ({
      label,
      points: points.slice().sort((p, q) => p.x - q.x),
    }))
}

export function extractSeries(rows: ResultRow[], kind: PlotKind, xOverride?: string): PlotData {
  if (rows.length === 0) {
    throw new SchemaError('no rows left after filtering; nothing to plot')
  }
  switch (kind) {
    case 'vs-j':
    case 'vs-h':
    case 'vs-p': {
      const x = kind.slice(3)
      return {
        series: bySplit(rows, x, 'delta_exact', false),
        xLabel: x,
        yLabel: 'teleported shift',
      }
    }
    case 'keyrate': {
      const points = rows
        .map((row) => ({
          p: requireNumber(row, 'p'),
          e_bit: requireNumber(row, 'e_bit'),
          e_ph: requireNumber(row, 'e_ph'),
          k_asym: requireNumber(row, 'k_asym'),
        }))
        .sort((a, b) => a.p - b.p)
      return {
        series: [
          { label: 'e_bit', points: points.map((r) => ({ x: r.p, y: r.e_bit })) },
          { label: 'e_ph', points: points.map((r) => ({ x: r.p, y: r.e_ph })) },
          { label: 'K_asym', points: points.map((r) => ({ x: r.p, y: r.k_asym })) },
        ],
        xLabel: 'p',
        yLabel: 'rate',
      }
    }
    case 'shots-errorbar': {
      const x = xOverride ?? 'j'
      for (const row of rows) {
        requireNumber(row, 'sem')
      }
      return {
        series: bySplit(rows, x, 'mean', true),
        xLabel: x,
        yLabel: 'measured mean',
      }
    }
  }
}

function niceTicks(lo: number, hi: number, count = 6): number[] {
  if (lo === hi) {
    lo -= 0.5
    hi += 0.5
  }
  const span = hi - lo
  const step0 = span / (count - 1)
  const mag = Math.pow(10, Math.floor(Math.log10(step0)))
  const candidates = [1, 2, 2.5, 5, 10].map((m) => m * mag)
  const step = candidates.find((s) => span / s <= count - 1) ?? candidates[candidates.length - 1]
  const start = Math.ceil(lo / step) * step
  const ticks: number[] = []
  for (let t = start; t <= hi + 1e-12 * span; t += step) {
    ticks.push(t)
  }
  return ticks
}

function fmt(value: number): string {
  if (value === 0) return '0'
  const text = value.toPrecision(6)
  return text.includes('.') ? text.replace(/\.?0+$/, '').replace(/\.?0+e/, 'e') : text
}

function coord(value: number): string {
  return value.toFixed(2)
}

export function renderSvg(data: PlotData, title: string): string {
  const xs = data.series.flatMap((s) => s.points.map((p) => p.x))
  const ys = data.series.flatMap((s) =>
    s.points.flatMap((p) => (p.err === undefined ? [p.y] : [p.y - p.err, p.y + p.err])),
  )
  let xLo = Math.min(...xs)
  let xHi = Math.max(...xs)
  let yLo = Math.min(0, ...ys)
  let yHi = Math.max(0, ...ys)
  if (xLo === xHi) {
    xLo -= 0.5
    xHi += 0.5
  }
  const yPad = 0.05 * (yHi - yLo || 1)
  yLo -= yPad
  yHi += yPad

  const plotW = WIDTH - MARGIN.left - MARGIN.right
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom
  const sx = (x: number) => MARGIN.left + ((x - xLo) / (xHi - xLo)) * plotW
  const sy = (y: number) => MARGIN.top + (1 - (y - yLo) / (yHi - yLo)) * plotH

  const parts: string[] = []
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`,
  )
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`)
  parts.push(
    `<text x="${WIDTH / 2}" y="18" text-anchor="middle" font-family="sans-serif" font-size="14">${title}</text>`,
  )

  for (const t of niceTicks(xLo, xHi)) {
    const x = coord(sx(t))
    parts.push(
      `<line x1="${x}" y1="${MARGIN.top}" x2="${x}" y2="${MARGIN.top + plotH}" stroke="#dddddd" stroke-width="1"/>`,
    )
    parts.push(
      `<text x="${x}" y="${MARGIN.top + plotH + 18}" text-anchor="middle" font-family="sans-serif" font-size="11">${fmt(t)}</text>`,
    )
  }
  for (const t of niceTicks(yLo, yHi)) {
    const y = coord(sy(t))
    parts.push(
      `<line x1="${MARGIN.left}" y1="${y}" x2="${MARGIN.left + plotW}" y2="${y}" stroke="#dddddd" stroke-width="1"/>`,
    )
    parts.push(
      `<text x="${MARGIN.left - 8}" y="${y}" text-anchor="end" dominant-baseline="middle" font-family="sans-serif" font-size="11">${fmt(t)}</text>`,
    )
  }
  if (yLo < 0 && yHi > 0) {
    const zero = coord(sy(0))
    parts.push(
      `<line x1="${MARGIN.left}" y1="${zero}" x2="${MARGIN.left + plotW}" y2="${zero}" stroke="#888888" stroke-width="1" stroke-dasharray="4 3"/>`,
    )
  }
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" fill="none" stroke="#333333"/>`,
  )

  data.series.forEach((series, index) => {
    const color = PALETTE[index % PALETTE.length]
    const path = series.points.map((p) => `${coord(sx(p.x))},${coord(sy(p.y))}`).join(' ')
    parts.push(`<polyline points="${path}" fill="none" stroke="${color}" stroke-width="1.5"/>`)
    for (const p of series.points) {
      const cx = coord(sx(p.x))
      parts.push(`<circle cx="${cx}" cy="${coord(sy(p.y))}" r="2.5" fill="${color}"/>`)
      if (p.err !== undefined) {
        const top = coord(sy(p.y + p.err))
        const bot = coord(sy(p.y - p.err))
        parts.push(`<line x1="${cx}" y1="${top}" x2="${cx}" y2="${bot}" stroke="${color}" stroke-width="1"/>`)
        const xf = sx(p.x)
        parts.push(`<line x1="${coord(xf - 3)}" y1="${top}" x2="${coord(xf + 3)}" y2="${top}" stroke="${color}" stroke-width="1"/>`)
        parts.push(`<line x1="${coord(xf - 3)}" y1="${bot}" x2="${coord(xf + 3)}" y2="${bot}" stroke="${color}" stroke-width="1"/>`)
      }
    }
    const ly = MARGIN.top + 16 + 18 * index
    const lx = MARGIN.left + plotW + 12
    parts.push(`<line x1="${lx}" y1="${ly - 4}" x2="${lx + 22}" y2="${ly - 4}" stroke="${color}" stroke-width="2"/>`)
    parts.push(
      `<text x="${lx + 28}" y="${ly}" font-family="sans-serif" font-size="12">${series.label}</text>`,
    )
  })

  parts.push(
    `<text x="${MARGIN.left + plotW / 2}" y="${HEIGHT - 12}" text-anchor="middle" font-family="sans-serif" font-size="12">${data.xLabel}</text>`,
  )
  parts.push(
    `<text x="20" y="${MARGIN.top + plotH / 2}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 20 ${MARGIN.top + plotH / 2})">${data.yLabel}</text>`,
  )
  parts.push('</svg>')
  return parts.join('\n') + '\n'
}

export function render(rows: ResultRow[], kind: PlotKind, title: string, xOverride?: string): string {
  return renderSvg(extractSeries(rows, kind, xOverride), title)
}
