export { RESULT_COLUMNS, ResultRow, SchemaError, applyFilters, parseResultCsv } from './schema.js'
export { PLOT_KINDS, PlotKind, PlotData, Series, extractSeries, render, renderSvg } from './plot.js'
