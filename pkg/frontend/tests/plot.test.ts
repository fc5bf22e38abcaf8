import { createHash } from 'crypto'
import { readFileSync } from 'fs'
import { join } from 'path'
import { describe, expect, it } from 'vitest'
import { extractSeries, render } from '../src/plot.js'
import { SchemaError, parseResultCsv } from '../src/schema.js'

const FIXTURES = join(__dirname, 'fixtures')

function rows(name: string) {
  return parseResultCsv(readFileSync(join(FIXTURES, name), 'utf-8'))
}

describe('extractSeries', () => {
  it('splits vs-j data into sign-separated decision-bit bands', () => {
    const data = extractSeries(rows('charge_vs_j.csv'), 'vs-j')
    expect(data.series.map((s) => s.label)).toEqual(['a=0', 'a=1'])
    const [a0, a1] = data.series
    expect(a0.points.length).toBe(21)
    expect(a0.points.every((p) => p.y <= 1e-12)).toBe(true)
    expect(a1.points.every((p) => p.y >= -1e-12)).toBe(true)
    // strictly separated away from J = 0
    expect(a0.points.filter((p) => p.x > 0).every((p) => p.y < 0)).toBe(true)
    expect(a1.points.filter((p) => p.x > 0).every((p) => p.y > 0)).toBe(true)
  })

  it('sorts points by the x column', () => {
    const data = extractSeries(rows('energy_vs_h.csv'), 'vs-h')
    const xs = data.series[0].points.map((p) => p.x)
    expect(xs).toEqual([...xs].sort((a, b) => a - b))
  })

  it('builds the three keyrate curves with a clamped rate', () => {
    const data = extractSeries(rows('keyrate_n2.csv'), 'keyrate')
    expect(data.series.map((s) => s.label)).toEqual(['e_bit', 'e_ph', 'K_asym'])
    const k = data.series[2].points
    expect(k[0].y).toBeGreaterThan(0)
    expect(k.every((p) => p.y >= 0)).toBe(true)
    const e = data.series[0].points.map((p) => p.y)
    expect(e.every((v, i) => i === 0 || v >= e[i - 1] - 1e-12)).toBe(true)
  })

  it('attaches SEM error bars for shot data', () => {
    const data = extractSeries(rows('shots_vs_j.csv'), 'shots-errorbar')
    expect(data.series[0].points.every((p) => typeof p.err === 'number' && p.err > 0)).toBe(true)
  })

  it('rejects an empty selection', () => {
    expect(() => extractSeries([], 'vs-j')).toThrow(SchemaError)
  })

  it('rejects keyrate rendering when rate columns are empty', () => {
    expect(() => extractSeries(rows('charge_vs_j.csv'), 'keyrate')).toThrow(/is empty/)
  })
})

describe('render', () => {
  it('is byte-stable for identical inputs', () => {
    const input = rows('charge_vs_j.csv')
    const first = render(input, 'vs-j', 'charge vs j')
    const second = render(input, 'vs-j', 'charge vs j')
    expect(first).toBe(second)
    const hash = createHash('sha256').update(first).digest('hex')
    expect(createHash('sha256').update(second).digest('hex')).toBe(hash)
  })

  it('emits well-formed standalone SVG with both series and a zero line', () => {
    const svg = render(rows('charge_vs_j.csv'), 'vs-j', 'charge vs j')
    expect(svg.startsWith('<svg xmlns="http://www.w3.org/2000/svg"')).toBe(true)
    expect(svg.trimEnd().endsWith('</svg>')).toBe(true)
    expect(svg).toContain('>a=0</text>')
    expect(svg).toContain('>a=1</text>')
    expect(svg).toContain('stroke-dasharray')  // zero line present for sign bands
    expect((svg.match(/<polyline/g) ?? []).length).toBe(2)
    expect(svg).not.toMatch(/date|time/i)
  })

  it('draws error-bar caps for shot plots', () => {
    const svg = render(rows('shots_vs_j.csv'), 'shots-errorbar', 'shots')
    const lines = (svg.match(/<line/g) ?? []).length
    expect(lines).toBeGreaterThan(3 * 6)  // whiskers and caps for six points
  })

  it('renders the keyrate triptych', () => {
    const svg = render(rows('keyrate_n2.csv'), 'keyrate', 'keyrate n=2')
    expect((svg.match(/<polyline/g) ?? []).length).toBe(3)
    expect(svg).toContain('>K_asym</text>')
  })
})
