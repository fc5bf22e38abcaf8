// Result-row schema shared with the qct CLI: one fixed column set, empty
// cells for inapplicable values, '.' decimal separator.

import Papa from 'papaparse'

export const RESULT_COLUMNS = [
  'model', 'n', 'j', 'h', 'basis', 'a', 'observable', 'noise_kind', 'noise_site',
  'p', 'alpha', 'xi', 'eta', 'theta', 'delta_exact', 'n_shots', 'mean', 'sem',
  'e_bit', 'e_ph', 'k_asym', 'seed',
] as const

const NUMERIC_COLUMNS = new Set([
  'n', 'j', 'h', 'a', 'noise_site', 'p', 'alpha', 'xi', 'eta', 'theta',
  'delta_exact', 'n_shots', 'mean', 'sem', 'e_bit', 'e_ph', 'k_asym', 'seed',
])

export type ResultRow = Record<string, string | number | null>

export class SchemaError extends Error {}

export function parseResultCsv(text: string): ResultRow[] {
  const parsed = Papa.parse<string[]>(text.trim(), { skipEmptyLines: true })
  if (parsed.errors.length > 0) {
    throw new SchemaError(`CSV parse error: ${parsed.errors[0].message}`)
  }
  const grid = parsed.data
  if (grid.length === 0) {
    throw new SchemaError('CSV has no header row')
  }
  const header = grid[0]
  const expected = RESULT_COLUMNS as readonly string[]
  if (header.length !== expected.length || header.some((name, i) => name !== expected[i])) {
    throw new SchemaError(
      `CSV header does not match the result-row schema\n  expected: ${expected.join(',')}\n  got:      ${header.join(',')}`,
    )
  }
  const rows: ResultRow[] = []
  for (const record of grid.slice(1)) {
    if (record.length !== expected.length) {
      throw new SchemaError(`row has ${record.length} cells, expected ${expected.length}`)
    }
    const row: ResultRow = {}
    expected.forEach((name, i) => {
      const cell = record[i]
      if (cell === '') {
        row[name] = null
      } else if (NUMERIC_COLUMNS.has(name)) {
        const value = Number(cell)
        if (!Number.isFinite(value)) {
          throw new SchemaError(`column ${name}: ${JSON.stringify(cell)} is not a number`)
        }
        row[name] = value
      } else {
        row[name] = cell
      }
    })
    rows.push(row)
  }
  return rows
}

export function applyFilters(rows: ResultRow[], filters: Record<string, string>): ResultRow[] {
  const expected = RESULT_COLUMNS as readonly string[]
  for (const key of Object.keys(filters)) {
    if (!expected.includes(key)) {
      throw new SchemaError(`unknown filter column ${JSON.stringify(key)}`)
    }
  }
  return rows.filter((row) =>
    Object.entries(filters).every(([key, raw]) => {
      const value = row[key]
      if (value === null) return raw === ''
      if (typeof value === 'number') return value === Number(raw)
      return value === raw
    }),
  )
}
